"""Arithmetic on the group of real unimodular 2x2 matrices.

Everything downstream (grids, majorant sums, orbit integrals) leans on a
small set of exact-as-possible primitives collected here: the Iwasawa chart
(horizontal translation, height, rotation angle), the [u, v, s] chart used
by the window transform, Frobenius norms, the Moebius action on the upper
half plane, reduction into the classical fundamental domain, the cuspidal
height, and finite-difference derivatives along the standard generators of
the Lie algebra.

Conventions: matrices act on row vectors from the right, and on the upper
half plane by fractional linear maps.  The rotation angle is kept in
[0, 2*pi), not folded modulo pi, because minus the identity is a genuine
group element here and the covolume bookkeeping in :mod:`horolab.autofns`
depends on the full circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

# Determinant drift larger than this triggers renormalization by det^{-1/2}.
DET_RENORM_TOL = 1e-12
# After construction or multiplication the determinant must sit this close to 1.
DET_TOL = 1e-10
# Chart round-trips are expected to reproduce entries to this accuracy.
ROUNDTRIP_TOL = 1e-12

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Sl2Matrix:
    """A real 2x2 matrix of determinant one.

    Construction renormalizes mild determinant drift (|det - 1| up to
    ``DET_TOL``) by dividing through sqrt(det); anything worse, or a
    non-positive determinant, is rejected.  Instances are immutable and
    hashable, so they can be used freely as dictionary keys in caches.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        det = self.a * self.d - self.b * self.c
        if not math.isfinite(det) or det <= 0.0:
            raise DomainError(f"matrix determinant {det} is not a positive real")
        if abs(det - 1.0) > DET_RENORM_TOL:
            if abs(det - 1.0) > 1e-6:
                raise DomainError(f"determinant {det} too far from 1 to renormalize")
            s = 1.0 / math.sqrt(det)
            object.__setattr__(self, "a", self.a * s)
            object.__setattr__(self, "b", self.b * s)
            object.__setattr__(self, "c", self.c * s)
            object.__setattr__(self, "d", self.d * s)

    # -- constructors -------------------------------------------------

    @classmethod
    def identity(cls) -> "Sl2Matrix":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def translation(cls, x: float) -> "Sl2Matrix":
        """Upper unipotent u_x = (1, x; 0, 1)."""
        return cls(1.0, float(x), 0.0, 1.0)

    @classmethod
    def dilation(cls, y: float) -> "Sl2Matrix":
        """Diagonal a_y = (sqrt(y), 0; 0, 1/sqrt(y)) for y > 0."""
        if y <= 0.0:
            raise DomainError("dilation parameter must be positive")
        r = math.sqrt(y)
        return cls(r, 0.0, 0.0, 1.0 / r)

    @classmethod
    def rotation(cls, theta: float) -> "Sl2Matrix":
        ct, st = math.cos(theta), math.sin(theta)
        return cls(ct, -st, st, ct)

    @classmethod
    def inversion(cls) -> "Sl2Matrix":
        """The order-four element (0, -1; 1, 0)."""
        return cls(0.0, -1.0, 1.0, 0.0)

    @classmethod
    def from_array(cls, arr: np.ndarray | Sequence[Sequence[float]]) -> "Sl2Matrix":
        m = np.asarray(arr, dtype=float)
        if m.shape != (2, 2):
            raise DomainError(f"expected a 2x2 array, got shape {m.shape}")
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    # -- basic queries ------------------------------------------------

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def frobenius_norm(self) -> float:
        return math.sqrt(self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d)

    def inverse(self) -> "Sl2Matrix":
        return Sl2Matrix(self.d, -self.b, -self.c, self.a)

    def transpose(self) -> "Sl2Matrix":
        return Sl2Matrix(self.a, self.c, self.b, self.d)

    def __matmul__(self, other: "Sl2Matrix") -> "Sl2Matrix":
        return Sl2Matrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> "Sl2Matrix":
        return Sl2Matrix(-self.a, -self.b, -self.c, -self.d)

    def mobius(self, tau: complex) -> complex:
        """Fractional linear action on a point of the upper half plane."""
        if tau.imag <= 0.0:
            raise DomainError("mobius action expects Im tau > 0")
        return (self.a * tau + self.b) / (self.c * tau + self.d)

    def is_integral(self, tol: float = 1e-9) -> bool:
        return all(abs(x - round(x)) <= tol for x in (self.a, self.b, self.c, self.d))


@dataclass(frozen=True)
class IwasawaCoords:
    """Coordinates (u, v, theta) with M = u_u a_v rot(theta), v > 0."""

    u: float
    v: float
    theta: float

    def __post_init__(self) -> None:
        if self.v <= 0.0:
            raise DomainError("height coordinate must be positive")


@dataclass(frozen=True)
class UvsCoords:
    """The (u, v, s) chart: M = (u, -v/(u^2+v^2); v, u/(u^2+v^2)) u_s.

    Here (u, v) is the first column of the matrix, which must not vanish.
    """

    u: float
    v: float
    s: float

    def __post_init__(self) -> None:
        if self.u == 0.0 and self.v == 0.0:
            raise DomainError("(u, v) = (0, 0) is outside the chart")


def frobenius_norm(m: Sl2Matrix) -> float:
    return m.frobenius_norm()


def mobius(m: Sl2Matrix, tau: complex) -> complex:
    return m.mobius(tau)


def iwasawa_decompose(m: Sl2Matrix) -> IwasawaCoords:
    """Split M as u_u a_v rot(theta) with theta in [0, 2*pi).

    The bottom row determines v = 1/(c^2+d^2) and theta = atan2(c, d); u is
    the real part of M(i).
    """
    denom = m.c * m.c + m.d * m.d
    v = 1.0 / denom
    u = (m.a * m.c + m.b * m.d) * v
    theta = math.atan2(m.c, m.d)
    if theta < 0.0:
        theta += _TWO_PI
    return IwasawaCoords(u, v, theta % _TWO_PI)


def iwasawa_compose(coords: IwasawaCoords) -> Sl2Matrix:
    """Inverse of :func:`iwasawa_decompose`."""
    r = math.sqrt(coords.v)
    ct, st = math.cos(coords.theta), math.sin(coords.theta)
    # u_u a_v = (r, u/r; 0, 1/r), then multiply by the rotation.
    return Sl2Matrix(
        r * ct + (coords.u / r) * st,
        -r * st + (coords.u / r) * ct,
        st / r,
        ct / r,
    )


def iwasawa_frobenius_norm(coords: IwasawaCoords) -> float:
    """Frobenius norm in the (u, v, theta) chart: sqrt((u^2 + v^2 + 1)/v).

    Independent of theta, which makes it a useful cross-check on the
    decomposition routines.
    """
    return math.sqrt((coords.u * coords.u + coords.v * coords.v + 1.0) / coords.v)


def uvs_decompose(m: Sl2Matrix) -> UvsCoords:
    """Read off the (u, v, s) chart: u = a, v = c, s = (ab + cd)/(a^2 + c^2)."""
    denom = m.a * m.a + m.c * m.c
    if denom == 0.0:
        raise DomainError("zero first column cannot occur for a unimodular matrix")
    return UvsCoords(m.a, m.c, (m.a * m.b + m.c * m.d) / denom)


def uvs_compose(coords: UvsCoords) -> Sl2Matrix:
    u, v, s = coords.u, coords.v, coords.s
    denom = u * u + v * v
    return Sl2Matrix(u, u * s - v / denom, v, v * s + u / denom)


def uvs_frobenius_norm(coords: UvsCoords) -> float:
    """Norm in the (u, v, s) chart: sqrt((u^2+v^2)(1+s^2) + 1/(u^2+v^2))."""
    r2 = coords.u * coords.u + coords.v * coords.v
    return math.sqrt(r2 * (1.0 + coords.s * coords.s) + 1.0 / r2)


# -- fundamental domain -----------------------------------------------

#: Slack accepted on the fundamental-domain inequalities.
FUNDAMENTAL_TOL = 1e-12

_MAX_REDUCTION_STEPS = 4000


def reduce_fundamental(m: Sl2Matrix) -> tuple[Sl2Matrix, Sl2Matrix]:
    """Return (gamma, m_red) with m_red = gamma^{-1} m in the classical domain.

    gamma has integer entries and determinant one, and tau = m_red(i)
    satisfies |Re tau| <= 1/2 and |tau| >= 1 up to ``FUNDAMENTAL_TOL``.
    Ties are broken deterministically: the translation step lands the real
    part in [-1/2, 1/2), and a boundary point with |tau| = 1, Re tau > 0 is
    flipped by the inversion so every platform returns the same gamma.
    """
    # Accumulate w = gamma^{-1} as exact integer entries alongside cur = w m.
    wa, wb, wc, wd = 1, 0, 0, 1

    def shift(n: int) -> None:
        nonlocal wa, wb, cur
        wa, wb = wa - n * wc, wb - n * wd
        cur = Sl2Matrix(cur.a - n * cur.c, cur.b - n * cur.d, cur.c, cur.d)

    def invert() -> None:
        nonlocal wa, wb, wc, wd, cur
        wa, wb, wc, wd = -wc, -wd, wa, wb
        cur = Sl2Matrix(-cur.c, -cur.d, cur.a, cur.b)

    cur = m
    for _ in range(_MAX_REDUCTION_STEPS):
        tau = cur.mobius(1j)
        re, norm = tau.real, abs(tau)
        if abs(re) <= 0.5 + FUNDAMENTAL_TOL and norm >= 1.0 - FUNDAMENTAL_TOL:
            if re > 0.5 - FUNDAMENTAL_TOL:
                # Right edge of the strip: prefer the copy with Re tau <= 0.
                shift(1)
                continue
            if abs(norm - 1.0) <= FUNDAMENTAL_TOL and re > FUNDAMENTAL_TOL:
                # Unit-circle boundary with positive real part: flip across.
                invert()
                continue
            break
        n = math.floor(re + 0.5)
        if n != 0:
            shift(n)
        else:
            invert()
    else:
        raise RuntimeError("fundamental-domain reduction did not terminate")
    gamma = Sl2Matrix(float(wd), float(-wb), float(-wc), float(wa))
    return gamma, cur


def cuspidal_height(m: Sl2Matrix) -> float:
    """Largest imaginary part of M(i) over the integer unimodular orbit.

    Always at least sqrt(3)/2 and never more than the squared Frobenius
    norm of M.
    """
    _, reduced = reduce_fundamental(m)
    return reduced.mobius(1j).imag


# -- Lie derivatives --------------------------------------------------

#: Standard generators: X1 is upper nilpotent, X2 lower nilpotent, X3 diagonal.
LIE_GENERATORS = {
    "X1": np.array([[0.0, 1.0], [0.0, 0.0]]),
    "X2": np.array([[0.0, 0.0], [1.0, 0.0]]),
    "X3": np.array([[1.0, 0.0], [0.0, -1.0]]),
}

DEFAULT_FD_STEP = 1e-4


def _exp_generator(name: str, t: float) -> Sl2Matrix:
    """Closed-form one-parameter subgroups for the three generators."""
    if name == "X1":
        return Sl2Matrix.translation(t)
    if name == "X2":
        return Sl2Matrix(1.0, 0.0, t, 1.0)
    if name == "X3":
        e = math.exp(t)
        return Sl2Matrix(e, 0.0, 0.0, 1.0 / e)
    raise DomainError(f"unknown generator {name!r}")


def lie_derivative(
    phi: Callable[[Sl2Matrix], float],
    word: Sequence[str],
    m: Sl2Matrix,
    step: float = DEFAULT_FD_STEP,
) -> float:
    """Iterated directional derivative of phi along right translations.

    ``word`` lists generator names, outermost first; each letter contributes
    one central difference of the remaining derivative along t -> M exp(t X).
    An empty word returns phi(M).  Words longer than three letters lose too
    much precision to double rounding and are rejected.
    """
    if len(word) > 3:
        raise DomainError("finite differences beyond third order are not supported")
    if not (0.0 < step <= 1e-3):
        raise DomainError("step must lie in (0, 1e-3]")
    if not word:
        return phi(m)
    head, rest = word[0], word[1:]
    plus = lie_derivative(phi, rest, m @ _exp_generator(head, step), step)
    minus = lie_derivative(phi, rest, m @ _exp_generator(head, -step), step)
    return (plus - minus) / (2.0 * step)


def lie_derivative_iwasawa(
    phi_coords: Callable[[float, float, float], float],
    generator: str,
    coords: IwasawaCoords,
    step: float = DEFAULT_FD_STEP,
) -> float:
    """First-order derivative expressed through the Iwasawa chart.

    Used as the independent route when validating :func:`lie_derivative`:
    the three generators act on (u, v, theta) as explicit vector fields,

        X1 = cos(2t) v d/du - sin(2t) v d/dv - sin(t)^2 d/dt,
        X2 = cos(2t) v d/du - sin(2t) v d/dv + cos(t)^2 d/dt,
        X3 = 2 sin(2t) v d/du + 2 cos(2t) v d/dv + sin(2t) d/dt,

    writing t for theta.  The partial derivatives of phi are taken by
    central differences in each coordinate.
    """
    u, v, t = coords.u, coords.v, coords.theta
    du = (phi_coords(u + step, v, t) - phi_coords(u - step, v, t)) / (2.0 * step)
    dv = (phi_coords(u, v + step, t) - phi_coords(u, v - step, t)) / (2.0 * step)
    dt = (phi_coords(u, v, t + step) - phi_coords(u, v, t - step)) / (2.0 * step)
    if generator == "X1":
        return math.cos(2 * t) * v * du - math.sin(2 * t) * v * dv - math.sin(t) ** 2 * dt
    if generator == "X2":
        return math.cos(2 * t) * v * du - math.sin(2 * t) * v * dv + math.cos(t) ** 2 * dt
    if generator == "X3":
        return 2 * math.sin(2 * t) * v * du + 2 * math.cos(2 * t) * v * dv + math.sin(2 * t) * dt
    raise DomainError(f"unknown generator {generator!r}")
