"""The affine extension: unimodular matrices paired with row-vector blocks.

Elements are pairs (M, v) where v is a k x 2 real block, multiplying by

    (M, v) (M', v') = (M M', v M' + v').

The torus variable attached to an element is xi = v M^{-1}; pushing an
integer vector q through :meth:`GroupElement.project` collapses the block
to the single row q v, which is what the planar gap statistic consumes.

The gap statistic measures how far a shifted lattice stays from a thin
rectangle anchored at the origin: the rectangle [-1/T, 1/T] x [-1, 1] is
inflated until it first touches the lattice, and the critical inflation
factor is returned.  A lattice that already contains the origin (only
possible for a nonzero q) gives zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .sl2core import Sl2Matrix

#: Inflation factors beyond this are reported as the cap itself.
GAP_CAP = 1e30

#: Lattice membership is decided in coefficient space at this tolerance.
MEMBERSHIP_TOL = 1e-9

_MAX_REDUCTION_SWEEPS = 200


@dataclass(frozen=True)
class GroupElement:
    """A pair (matrix, translation block) with the translation a k x 2 array."""

    matrix: Sl2Matrix
    translation: np.ndarray

    def __post_init__(self) -> None:
        block = np.asarray(self.translation, dtype=float)
        if block.ndim != 2 or block.shape[1] != 2 or block.shape[0] < 1:
            raise DomainError(f"translation block must be k x 2, got shape {block.shape}")
        block = np.array(block, copy=True)
        block.setflags(write=False)
        object.__setattr__(self, "translation", block)

    @property
    def k(self) -> int:
        return self.translation.shape[0]

    @classmethod
    def identity(cls, k: int = 1) -> "GroupElement":
        return cls(Sl2Matrix.identity(), np.zeros((k, 2)))

    @classmethod
    def from_torus_point(cls, matrix: Sl2Matrix, xi: np.ndarray) -> "GroupElement":
        """Build the element whose torus variable is the given xi (k x 2)."""
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return cls(matrix, xi @ matrix.as_array())

    def torus_point(self) -> np.ndarray:
        """The k x 2 block xi = v M^{-1}."""
        return self.translation @ self.matrix.inverse().as_array()

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        if self.k != other.k:
            raise DomainError(f"cannot multiply elements with k={self.k} and k={other.k}")
        return GroupElement(
            self.matrix @ other.matrix,
            self.translation @ other.matrix.as_array() + other.translation,
        )

    def inverse(self) -> "GroupElement":
        minv = self.matrix.inverse()
        return GroupElement(minv, -self.translation @ minv.as_array())

    def project(self, q: Sequence[int]) -> "GroupElement":
        """Contract the translation block against an integer vector.

        The result has k = 1 and translation q v.  This is a group
        homomorphism for each fixed q.
        """
        qv = np.asarray(q, dtype=float)
        if qv.shape != (self.k,):
            raise DomainError(f"q must have length {self.k}, got shape {qv.shape}")
        if not np.allclose(qv, np.round(qv), atol=1e-12):
            raise DomainError("projection vector must be integral")
        return GroupElement(self.matrix, (qv @ self.translation)[None, :])


@dataclass(frozen=True)
class PlanarGrid:
    """A shifted planar lattice: all points n B + offset with n integral.

    ``basis`` holds the two spanning vectors as rows.
    """

    basis: np.ndarray
    offset: np.ndarray

    def __post_init__(self) -> None:
        b = np.array(np.asarray(self.basis, dtype=float), copy=True)
        o = np.array(np.asarray(self.offset, dtype=float), copy=True)
        if b.shape != (2, 2):
            raise DomainError(f"basis must be 2x2, got {b.shape}")
        if o.shape != (2,):
            raise DomainError(f"offset must be a 2-vector, got {o.shape}")
        if abs(np.linalg.det(b)) < 1e-14:
            raise DomainError("basis rows are numerically dependent")
        b.setflags(write=False)
        o.setflags(write=False)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "offset", o)

    def coefficients(self, point: Sequence[float]) -> np.ndarray:
        """Real lattice coordinates of a plane point."""
        p = np.asarray(point, dtype=float) - self.offset
        return np.linalg.solve(self.basis.T, p)

    def contains(self, point: Sequence[float], tol: float = MEMBERSHIP_TOL) -> bool:
        c = self.coefficients(point)
        return bool(np.max(np.abs(c - np.round(c))) <= tol)


def grid_of(element: GroupElement, q: Sequence[int] | None = None) -> PlanarGrid:
    """The planar grid swept out by integer translates of a projected element.

    For an element (M, v) and integer vector q this is the lattice with
    basis rows M shifted by q v.  Passing q=None requires k = 1 and uses
    the element's own row.
    """
    if q is None:
        if element.k != 1:
            raise DomainError("q may only be omitted for k = 1 elements")
        proj = element
    else:
        proj = element.project(q)
    return PlanarGrid(proj.matrix.as_array(), proj.translation[0])


@dataclass(frozen=True)
class RectangleRT:
    """The anchor rectangle [-1/T, 1/T] x [-1, 1] for a time parameter T >= 1."""

    T: float

    def __post_init__(self) -> None:
        if not (self.T >= 1.0 and math.isfinite(self.T)):
            raise DomainError("time parameter must be a finite number >= 1")

    def entry_scale(self, point: Sequence[float]) -> float:
        """Smallest S >= 0 whose inflation S * rectangle contains the point.

        The rectangle is closed, so a point on the boundary of the inflated
        copy counts as contained.
        """
        x1, x2 = float(point[0]), float(point[1])
        return max(self.T * abs(x1), abs(x2))


@dataclass(frozen=True)
class GapResult:
    """Outcome of the gap computation: the critical scale and a witness point."""

    value: float
    witness: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(np.asarray(self.witness, dtype=float), copy=True)
        w.setflags(write=False)
        object.__setattr__(self, "witness", w)


def _gauss_reduce(rows: np.ndarray) -> tuple[np.ndarray, list[list[int]]]:
    """Euclidean reduction of a 2D lattice basis, tracking the integer change
    of coordinates u with reduced = u @ rows."""
    r = rows.astype(float).copy()
    u = [[1, 0], [0, 1]]
    for _ in range(_MAX_REDUCTION_SWEEPS):
        n0 = r[0] @ r[0]
        n1 = r[1] @ r[1]
        if n0 > n1:
            r = r[::-1].copy()
            u = [u[1], u[0]]
            n0, n1 = n1, n0
        mu = round(float(r[0] @ r[1]) / float(n0))
        if mu == 0:
            break
        r[1] = r[1] - mu * r[0]
        u = [u[0], [u[1][0] - mu * u[0][0], u[1][1] - mu * u[0][1]]]
    return r, u


def _point_value(n0: int, n1: int, basis: np.ndarray, offset: np.ndarray, T: float):
    # Shared evaluation formula; the brute-force cross-check in the test
    # suite mirrors it term for term so the two routes agree bitwise.
    x1 = n0 * basis[0, 0] + n1 * basis[1, 0] + offset[0]
    x2 = n0 * basis[0, 1] + n1 * basis[1, 1] + offset[1]
    return max(T * abs(x1), abs(x2)), x1, x2


def grid_gap(element: GroupElement, q: Sequence[int], T: float) -> GapResult:
    """Critical inflation of the anchored rectangle against a projected grid.

    Returns the largest S for which S * [-1/T, 1/T] x [-1, 1] misses every
    relevant grid point.  For q = 0 the origin itself is exempt (it always
    lies in the lattice); for nonzero q a grid that contains the origin
    forces the answer 0.  Values are capped at ``GAP_CAP``.
    """
    rect = RectangleRT(float(T))
    q_arr = np.asarray(q, dtype=int)
    zero_q = not np.any(q_arr)
    grid = grid_of(element, list(q_arr))
    basis, offset = grid.basis, grid.offset

    if not zero_q and grid.contains((0.0, 0.0)):
        return GapResult(0.0, np.zeros(2))

    # Work in coordinates rescaled so the target becomes the sup-norm ball.
    # After Euclidean reduction the coefficient of the longer basis vector
    # at any sup-norm minimizer sits within 2 of the rounded real solution,
    # so it is enumerated directly.  Along the shorter vector the minimizer
    # can drift arbitrarily far, but there the objective is convex piecewise
    # linear in one variable, so its breakpoints pin down the candidates.
    scale = np.array([rect.T, 1.0])
    reduced, u = _gauss_reduce(basis * scale)
    shifted = offset * scale
    target = np.linalg.solve(reduced.T, -shifted)

    candidates: set[tuple[int, int]] = set()
    c1_base = int(round(target[1]))
    for dc1 in range(-2, 3):
        c1 = c1_base + dc1
        base = c1 * reduced[1] + shifted
        breaks = [target[0]]
        for i in (0, 1):
            if reduced[0, i] != 0.0:
                breaks.append(-base[i] / reduced[0, i])
        for sgn in (1.0, -1.0):
            denom = reduced[0, 0] - sgn * reduced[0, 1]
            if denom != 0.0:
                breaks.append((sgn * base[1] - base[0]) / denom)
        for x in breaks:
            if not math.isfinite(x):
                continue
            lo = math.floor(x)
            for c0 in (lo - 1, lo, lo + 1, lo + 2):
                candidates.add((c0, c1))

    best_val = math.inf
    best_point = np.zeros(2)
    for c0, c1 in candidates:
        n0 = c0 * u[0][0] + c1 * u[1][0]
        n1 = c0 * u[0][1] + c1 * u[1][1]
        if zero_q and n0 == 0 and n1 == 0:
            continue
        val, x1, x2 = _point_value(n0, n1, basis, offset, rect.T)
        if val < best_val:
            best_val = val
            best_point = np.array([x1, x2])
    if best_val > GAP_CAP:
        return GapResult(GAP_CAP, best_point)
    return GapResult(best_val, best_point)


def log_gauge(x: float, j: int) -> float:
    """The gauge x * (log(2 + 1/x))^j, defined for x > 0 and integer j >= 0."""
    if not (x > 0.0 and math.isfinite(x)):
        raise DomainError("gauge argument must be a positive finite number")
    if j < 0 or j != int(j):
        raise DomainError("gauge order must be a nonnegative integer")
    if j == 0:
        return x
    return x * math.log(2.0 + 1.0 / x) ** int(j)
