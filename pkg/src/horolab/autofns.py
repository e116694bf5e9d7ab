"""Automorphic test functions periodized from a compactly supported bump.

A test function here is a sum of one smooth, radially cut off kernel over
a principal congruence group, with each translate twisted by a unitary
character of the torus fibre.  Because the kernel vanishes outside a
Frobenius ball, only finitely many translates contribute at any point and
everything reduces to finite lattice sums plus torus quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .affine import GroupElement
from .errors import DomainError, ResourceGuardError
from .expsum import CosetSpec, _xgcd, enumerate_coset_ball
from .quadrature import adaptive_quad, box_grid
from .sl2core import IwasawaCoords, Sl2Matrix, iwasawa_compose, iwasawa_decompose, reduce_fundamental
from .smoothfns import bump6

MIN_SUPPORT_RADIUS = math.sqrt(2.0)
# Ball enumeration is quadratic in the radius; past this budget an
# evaluation would allocate tens of millions of candidate matrices.
BALL_RADIUS_SQ_GUARD = 4.0e5
_GRID_CHUNK = 4096
SIEGEL_V_FLOOR = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class PoincareTestFn:
    """Congruence-periodized bump with an integer frequency twist.

    ``freq`` is the k x 2 integer matrix of torus frequencies carried by
    the identity translate; the value at ``(M, v)`` sums the kernel over
    all level-``level`` integer translates of ``M``, each multiplied by
    the correspondingly transported character of ``xi = v M^{-1}``.

    The kernel is ``profile((|A|_F^2 - 2) / (support_radius^2 - 2))``,
    which peaks at rotations (the minimum of the Frobenius norm) and
    vanishes for ``|A|_F >= support_radius``.
    """

    level: int
    freq: tuple[tuple[int, int], ...]
    support_radius: float = 3.0
    profile: Callable[[np.ndarray], np.ndarray] = bump6

    def __post_init__(self) -> None:
        if not isinstance(self.level, int) or self.level < 1:
            raise DomainError("level must be a positive integer")
        arr = np.asarray(self.freq)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
            raise DomainError(f"freq must be a k x 2 integer array, got shape {arr.shape}")
        if not np.all(arr == np.round(arr)):
            raise DomainError("freq entries must be integers")
        object.__setattr__(
            self, "freq", tuple(tuple(int(x) for x in row) for row in arr)
        )
        if not (self.support_radius > MIN_SUPPORT_RADIUS):
            raise DomainError(
                "support_radius must exceed sqrt(2), the smallest Frobenius norm "
                "on the determinant-one surface"
            )

    @property
    def k(self) -> int:
        return len(self.freq)

    @property
    def freq_array(self) -> np.ndarray:
        return np.asarray(self.freq, dtype=np.int64)


def kernel_profile(fn: PoincareTestFn, norm_sq: np.ndarray) -> np.ndarray:
    """Kernel of ``fn`` as a function of the squared Frobenius norm."""
    rho_sq = fn.support_radius * fn.support_radius
    t = (np.asarray(norm_sq, dtype=float) - 2.0) / (rho_sq - 2.0)
    return np.where(t <= 1.0, fn.profile(np.minimum(t, 1.0)), 0.0)


def kernel_value(fn: PoincareTestFn, mats: np.ndarray) -> np.ndarray:
    """Kernel of ``fn`` on a stacked (..., 2, 2) array of matrices."""
    arr = np.asarray(mats, dtype=float)
    if arr.shape[-2:] != (2, 2):
        raise DomainError("expected trailing 2 x 2 matrix axes")
    return kernel_profile(fn, np.sum(arr * arr, axis=(-2, -1)))


@lru_cache(maxsize=256)
def _series_data(fn: PoincareTestFn, matrix: Sl2Matrix) -> tuple[np.ndarray, np.ndarray]:
    """Weights and flattened frequency rows of the translates through ``matrix``.

    Enumeration runs at the domain-reduced matrix so the candidate ball
    stays small no matter how far ``matrix`` sits from the maximal compact;
    translates are then pulled back through the reducing word.
    """
    rho = fn.support_radius
    rho_sq = rho * rho
    gamma, reduced = reduce_fundamental(matrix)
    v_red = iwasawa_decompose(reduced).v
    # Every integer translate of a matrix whose reduced height exceeds
    # rho^2 has Frobenius norm above rho, so the sum is empty.
    if v_red > rho_sq:
        empty = np.zeros(0)
        return empty, np.zeros((0, 2 * fn.k))
    radius = rho * reduced.frobenius_norm() * (1.0 + 1e-12)
    # Quantizing the ball radius upward makes repeated evaluations share
    # cached enumerations; the extra candidates all carry weight zero.
    radius_q = math.ceil(radius * 4.0) / 4.0
    if radius_q * radius_q > BALL_RADIUS_SQ_GUARD:
        raise ResourceGuardError(
            f"translate ball radius {radius_q:.3g} exceeds the enumeration budget"
        )
    if fn.level == 1:
        spec = CosetSpec.principal(1)
    else:
        ga, gb, gc, gd = (int(round(x)) for x in (gamma.a, gamma.b, gamma.c, gamma.d))
        spec = CosetSpec(fn.level, (ga, gb, gc, gd))
    cands = enumerate_coset_ball(spec, radius_q)
    if cands.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 2 * fn.k))
    weights = kernel_value(fn, cands.astype(float) @ reduced.as_array())
    keep = weights != 0.0
    cands, weights = cands[keep], weights[keep]
    gamma_inv = gamma.inverse()
    ginv = np.array(
        [
            [int(round(gamma_inv.a)), int(round(gamma_inv.b))],
            [int(round(gamma_inv.c)), int(round(gamma_inv.d))],
        ],
        dtype=np.int64,
    )
    translates = cands @ ginv
    inv_t = np.empty_like(translates)
    inv_t[:, 0, 0] = translates[:, 1, 1]
    inv_t[:, 0, 1] = -translates[:, 0, 1]
    inv_t[:, 1, 0] = -translates[:, 1, 0]
    inv_t[:, 1, 1] = translates[:, 0, 0]
    freq_rows = np.einsum("kj,nij->nki", fn.freq_array, inv_t)
    phase_rows = freq_rows.reshape(len(cands), 2 * fn.k).astype(float)
    weights = np.ascontiguousarray(weights)
    weights.setflags(write=False)
    phase_rows.setflags(write=False)
    return weights, phase_rows


def _torus_block(fn: PoincareTestFn, torus_point: np.ndarray) -> np.ndarray:
    xi = np.atleast_2d(np.asarray(torus_point, dtype=float))
    if xi.shape != (fn.k, 2):
        raise DomainError(f"torus point must have shape ({fn.k}, 2), got {xi.shape}")
    return xi - np.floor(xi)


def evaluate_f(fn: PoincareTestFn, matrix: Sl2Matrix, torus_point: np.ndarray) -> complex:
    """Value of ``fn`` at the element with the given matrix and torus block.

    The torus block is reduced into [0, 1) entrywise before any phase is
    formed, so shifting it by exact integers returns bit-identical values.
    """
    xi = _torus_block(fn, torus_point)
    weights, phase_rows = _series_data(fn, matrix)
    if weights.size == 0:
        return 0.0 + 0.0j
    phases = phase_rows @ xi.ravel()
    return complex(np.dot(weights, np.exp(2j * np.pi * phases)))


def evaluate_at(fn: PoincareTestFn, element: GroupElement) -> complex:
    if element.k != fn.k:
        raise DomainError(f"element has k={element.k} but the function expects k={fn.k}")
    return evaluate_f(fn, element.matrix, element.torus_point())


def coefficient_support(fn: PoincareTestFn, matrix: Sl2Matrix) -> np.ndarray:
    """Distinct integer frequencies with a contributing translate, sorted."""
    _, phase_rows = _series_data(fn, matrix)
    if phase_rows.shape[0] == 0:
        return np.zeros((0, fn.k, 2), dtype=np.int64)
    rows = np.unique(np.round(phase_rows).astype(np.int64), axis=0)
    return rows.reshape(-1, fn.k, 2)


def _check_freq_like(fn: PoincareTestFn, m: np.ndarray) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(m))
    if arr.shape != (fn.k, 2):
        raise DomainError(f"frequency must have shape ({fn.k}, 2), got {arr.shape}")
    if not np.all(arr == np.round(arr)):
        raise DomainError("frequency entries must be integers")
    return arr.astype(np.int64)


def fourier_coefficient_exact(fn: PoincareTestFn, matrix: Sl2Matrix, m: np.ndarray) -> float:
    """Coefficient by direct regrouping of the translate sum.

    Collecting all translates that carry the requested frequency gives the
    coefficient without any integration, and shows it is real for a real
    kernel.
    """
    target = _check_freq_like(fn, m).ravel().astype(float)
    weights, phase_rows = _series_data(fn, matrix)
    if weights.size == 0:
        return 0.0
    hit = np.all(phase_rows == target, axis=1)
    return float(np.sum(weights[hit]))


def _grid_coefficient(
    weights: np.ndarray,
    phase_rows: np.ndarray,
    target: np.ndarray,
    dim: int,
    panels: int,
    points: int,
) -> complex:
    pts, wts = box_grid([0.0] * dim, [1.0] * dim, panels, points)
    total = 0.0 + 0.0j
    for start in range(0, pts.shape[0], _GRID_CHUNK):
        block = pts[start : start + _GRID_CHUNK]
        bw = wts[start : start + _GRID_CHUNK]
        vals = np.exp(2j * np.pi * (block @ phase_rows.T)) @ weights
        total += np.sum(bw * vals * np.exp(-2j * np.pi * (block @ target)))
    return complex(total)


def fourier_coefficient(
    fn: PoincareTestFn,
    matrix: Sl2Matrix,
    m: np.ndarray,
    panels: int = 4,
    points: int = 8,
) -> complex:
    """Torus integral of ``fn`` against the conjugate character at ``m``.

    Uses a composite Gauss-Legendre grid over the unit box in the torus
    coordinates; at least four panels per dimension are required so the
    rule resolves the oscillation of nearby frequencies.
    """
    target = _check_freq_like(fn, m).ravel().astype(float)
    if panels < 4:
        raise DomainError("coefficient quadrature needs at least 4 panels per dimension")
    weights, phase_rows = _series_data(fn, matrix)
    if weights.size == 0:
        return 0.0 + 0.0j
    return _grid_coefficient(weights, phase_rows, target, 2 * fn.k, panels, points)


def twist_evaluate(
    fn: PoincareTestFn, r: Sl2Matrix, matrix: Sl2Matrix, torus_point: np.ndarray
) -> complex:
    """Value at ``(matrix, v)`` of the twist of ``fn`` by right translation.

    The twisted function sends an element to the value of ``fn`` at the
    same element with its matrix part premultiplied by ``r^{-1}``; in the
    (matrix, torus block) coordinates the block picks up a right factor.
    """
    xi = _torus_block(fn, torus_point)
    return evaluate_f(fn, r.inverse() @ matrix, xi @ r.as_array())


def twist_coefficient(
    fn: PoincareTestFn,
    r: Sl2Matrix,
    matrix: Sl2Matrix,
    m: np.ndarray,
    panels: int = 4,
    points: int = 8,
) -> complex:
    """Fourier coefficient of the twist of ``fn`` by an integer matrix."""
    if not r.is_integral():
        raise DomainError("twist coefficients need an integer twisting matrix")
    target = _check_freq_like(fn, m).ravel().astype(float)
    if panels < 4:
        raise DomainError("coefficient quadrature needs at least 4 panels per dimension")
    weights, phase_rows = _series_data(fn, r.inverse() @ matrix)
    if weights.size == 0:
        return 0.0 + 0.0j
    r_t = r.as_array().T
    twisted = (phase_rows.reshape(-1, fn.k, 2) @ r_t).reshape(-1, 2 * fn.k)
    return _grid_coefficient(weights, twisted, target, 2 * fn.k, panels, points)


def _prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return out


def sl2_count_mod(n: int) -> int:
    """Number of 2 x 2 determinant-one matrices over the integers mod n."""
    if n < 1:
        raise DomainError("modulus must be a positive integer")
    count = n ** 3
    for p in _prime_factors(n):
        count = count // (p * p) * (p * p - 1)
    return count


def covolume(level: int) -> float:
    """Volume of the level quotient under the measure v^{-2} du dv dtheta."""
    if not isinstance(level, int) or level < 1:
        raise DomainError("level must be a positive integer")
    return sl2_count_mod(level) * math.pi * math.pi / 3.0


def kernel_haar_mass(fn: PoincareTestFn) -> float:
    """Integral of the kernel of ``fn`` over the whole group.

    The kernel is rotation invariant, so the angular fibre contributes a
    flat factor of 2 pi and the rest is a two dimensional integral over
    the horocycle coordinates against v^{-2} du dv, supported where the
    hyperbolic point stays within the cutoff.
    """
    rho_sq = fn.support_radius * fn.support_radius
    disc = math.sqrt(rho_sq * rho_sq - 4.0)
    v_lo, v_hi = (rho_sq - disc) / 2.0, (rho_sq + disc) / 2.0

    def slab(v: float) -> float:
        span_sq = rho_sq * v - v * v - 1.0
        if span_sq <= 0.0:
            return 0.0
        span = math.sqrt(span_sq)
        inner = adaptive_quad(
            lambda u: fn.profile((u * u + v * v + 1.0 - 2.0 * v) / (v * (rho_sq - 2.0))),
            -span,
            span,
            rel_tol=1e-10,
        )
        return inner / (v * v)

    outer = adaptive_quad(
        lambda vs: np.array([slab(v) for v in np.atleast_1d(vs)]),
        v_lo,
        v_hi,
        rel_tol=1e-9,
    )
    return 2.0 * math.pi * float(outer)


def mean_value(fn: PoincareTestFn) -> float:
    """Average of ``fn`` over the level quotient, times the torus average.

    Any nonzero frequency integrates to zero along the torus fibre; the
    untwisted case reduces to the kernel mass divided by the covolume.
    """
    if np.any(fn.freq_array != 0):
        return 0.0
    return kernel_haar_mass(fn) / covolume(fn.level)


@dataclass(frozen=True)
class OrbitClass:
    """Orbit of an integer frequency under right determinant-one moves.

    ``rank`` is the rank of the frequency matrix (it is invariant), and
    ``canonical`` is the unique orbit representative in reduced column
    form, reached from the input by ``transform`` (an integer matrix of
    determinant one acting on the right).
    """

    rank: int
    canonical: np.ndarray
    transform: np.ndarray

    def __post_init__(self) -> None:
        canon = np.asarray(self.canonical, dtype=np.int64)
        canon.setflags(write=False)
        object.__setattr__(self, "canonical", canon)
        tr = np.asarray(self.transform, dtype=np.int64)
        tr.setflags(write=False)
        object.__setattr__(self, "transform", tr)


def _as_int_rows(m: np.ndarray) -> list[list[int]]:
    arr = np.atleast_2d(np.asarray(m))
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
        raise DomainError(f"frequency must be a k x 2 integer array, got shape {arr.shape}")
    if not np.all(arr == np.round(arr)):
        raise DomainError("frequency entries must be integers")
    return [[int(x) for x in row] for row in np.round(arr).astype(np.int64)]


def _mat_cols(rows: list[list[int]], g: list[list[int]]) -> list[list[int]]:
    return [
        [r[0] * g[0][0] + r[1] * g[1][0], r[0] * g[0][1] + r[1] * g[1][1]]
        for r in rows
    ]


def classify_orbit(m: np.ndarray) -> OrbitClass:
    """Canonical representative of a frequency under right unimodular moves.

    Rank zero is the zero matrix.  Rank one reduces to a single nonzero
    column whose leading entry is positive.  Rank two reduces to the
    column echelon shape: the first column leads strictly earlier than
    the second, with a positive leading entry, and its entry on the second
    column's leading row lies in ``[0, |pivot|)``.  The representative is
    unique, so equal outputs certify equal orbits.
    """
    rows = _as_int_rows(m)
    k = len(rows)
    ident = [[1, 0], [0, 1]]
    if all(x == 0 for row in rows for x in row):
        return OrbitClass(0, np.zeros((k, 2), dtype=np.int64), np.asarray(ident))
    full_rank = any(
        rows[i][0] * rows[j][1] - rows[i][1] * rows[j][0] != 0
        for i in range(k)
        for j in range(i + 1, k)
    )
    if not full_rank:
        i0 = next(i for i, row in enumerate(rows) if row != [0, 0])
        a, b = rows[i0]
        g0 = math.gcd(abs(a), abs(b))
        p, q = a // g0, b // g0
        g, x, y = _xgcd(p, q)
        if g < 0:
            g, x, y = -g, -x, -y
        gamma = [[x, -q], [y, p]]
        reduced = _mat_cols(rows, gamma)
        lead = next(row[0] for row in reduced if row[0] != 0)
        if lead < 0:
            gamma = [[-x, q], [-y, -p]]
            reduced = _mat_cols(rows, gamma)
        return OrbitClass(1, np.asarray(reduced), np.asarray(gamma))
    i0 = next(i for i, row in enumerate(rows) if row != [0, 0])
    a, b = rows[i0]
    g, x, y = _xgcd(a, b)
    if g < 0:
        g, x, y = -g, -x, -y
    gamma1 = [[x, -(b // g)], [y, a // g]]
    stage = _mat_cols(rows, gamma1)
    l2 = next(i for i, row in enumerate(stage) if row[1] != 0)
    pivot = stage[l2][1]
    rem = stage[l2][0] % abs(pivot)
    t = (rem - stage[l2][0]) // pivot
    gamma = _mat_cols(gamma1, [[1, 0], [t, 1]])
    return OrbitClass(2, np.asarray(_mat_cols(stage, [[1, 0], [t, 1]])), np.asarray(gamma))


def haar_sample_level_one(rng: np.random.Generator, count: int) -> list[Sl2Matrix]:
    """Draw matrices uniformly, for the v^{-2} du dv dtheta measure, from
    the classical level-one domain crossed with a full angular turn.

    Proposals fall on the strip |u| <= 1/2, v >= sqrt(3)/2 with the exact
    target density in v (its normalized tail is 1/v up to a constant, so
    inverse transform sampling applies), then rejection keeps the points
    with |u + iv| >= 1.
    """
    if count < 1:
        raise DomainError("sample count must be positive")
    out: list[Sl2Matrix] = []
    while len(out) < count:
        u = rng.uniform(-0.5, 0.5)
        v = SIEGEL_V_FLOOR / (1.0 - rng.random())
        if u * u + v * v < 1.0:
            continue
        theta = rng.uniform(0.0, 2.0 * math.pi)
        out.append(iwasawa_compose(IwasawaCoords(u, v, theta)))
    return out
