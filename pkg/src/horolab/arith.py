"""Elementary arithmetic kernels: divisor counts, distances to lattices,
Kloosterman sums, and complete exponential sums over determinant-one
congruence classes.

The quadratic sum evaluated here runs over 4-tuples x in a fixed residue
class mod N, weighted by additive characters in both the determinant
constraint x1 x4 - x2 x3 = 1 and a linear twist v . x:

    S(q, v) = sum over units a mod q, sum over x mod qN with x = r (N)
              of e((a N (x1 x4 - x2 x3 - 1) + v . x) / (q N)).

Two evaluation routes are provided.  The brute-force route sums the
definition directly and refuses clearly oversized requests.  The closed
route reduces everything to Kloosterman sums, runs in roughly O(N^4 + q)
per call, and is the one production code should use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DomainError, ResourceGuardError

#: Largest modulus for which the divisor-count sieve will allocate a table.
SIEVE_CAP = 1_000_000

#: Brute-force quadratic sums are refused beyond this many character evaluations.
BRUTE_FORCE_LIMIT = 100_000_000

_sieve_table: np.ndarray | None = None


def _ensure_sieve(limit: int) -> np.ndarray:
    global _sieve_table
    if _sieve_table is None or len(_sieve_table) <= limit:
        size = 1024
        while size <= limit:
            size *= 4
        size = min(size, SIEVE_CAP + 1)
        table = np.zeros(size, dtype=np.int32)
        for d in range(1, size):
            table[d::d] += 1
        _sieve_table = table
    return _sieve_table


def divisor_count(n: int) -> int:
    """Number of positive divisors of n.

    Values up to one million come from a shared sieve table; larger inputs
    fall back to trial-division factorization.
    """
    if n < 1 or n != int(n):
        raise DomainError("divisor count requires a positive integer")
    n = int(n)
    if n <= SIEVE_CAP:
        return int(_ensure_sieve(n)[n])
    count = 1
    rest = n
    p = 2
    while p * p <= rest:
        if rest % p == 0:
            e = 0
            while rest % p == 0:
                rest //= p
                e += 1
            count *= e + 1
        p += 1 if p == 2 else 2
    if rest > 1:
        count *= 2
    return count


def dist_to_z(x) -> float:
    """Euclidean distance from a point to the nearest integer vector.

    Scalars are treated as 1-vectors, so the scalar case is the usual
    distance to the nearest integer.
    """
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    frac = arr - np.round(arr)
    return float(np.sqrt(np.sum(frac * frac)))


def mod_inverse(a: int, q: int) -> int:
    """Multiplicative inverse of a modulo q, normalized into [1, q]."""
    if q < 1:
        raise DomainError("modulus must be a positive integer")
    if math.gcd(a, q) != 1:
        raise DomainError(f"{a} is not invertible modulo {q}")
    inv = pow(a % q, -1, q)
    return q if inv == 0 else inv


@lru_cache(maxsize=None)
def _unit_tables(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Units modulo q and their inverses, as parallel integer arrays."""
    units = [a for a in range(1, max(q, 2)) if math.gcd(a, q) == 1]
    if q == 1:
        units = [0]
    inv = [pow(a, -1, q) if q > 1 else 0 for a in units]
    return np.array(units, dtype=np.int64), np.array(inv, dtype=np.int64)


@lru_cache(maxsize=None)
def _cos_table(q: int) -> np.ndarray:
    return np.cos(2.0 * np.pi * np.arange(q) / q)


def kloosterman(m: int, n: int, q: int) -> float:
    """The complete sum over units a mod q of e((m a + n a^{-1}) / q).

    Pairing a with -a shows the sum is real, so it is accumulated through
    cosines directly.
    """
    if q < 1:
        raise DomainError("modulus must be a positive integer")
    if q == 1:
        return 1.0
    units, inv = _unit_tables(q)
    phases = (m * units + n * inv) % q
    return float(_cos_table(q)[phases].sum())


def kloosterman_weil_bound(m: int, n: int, q: int) -> float:
    """Classical square-root cancellation bound for the sum above."""
    g = math.gcd(math.gcd(abs(m), abs(n)), q)
    return divisor_count(q) * math.sqrt(g) * math.sqrt(q)


@dataclass(frozen=True)
class CongruenceData:
    """A residue class mod N for 4-tuples, constrained to determinant one.

    The residue is stored reduced into [0, N)^4 and must satisfy
    r1 r4 - r2 r3 = 1 mod N, so the class actually meets the determinant
    surface.
    """

    N: int
    residue: tuple[int, int, int, int]

    def __post_init__(self) -> None:
        if self.N < 1 or self.N != int(self.N):
            raise DomainError("level N must be a positive integer")
        r = tuple(int(x) % self.N for x in self.residue)
        if len(self.residue) != 4:
            raise DomainError("residue must have four entries")
        det = r[0] * r[3] - r[1] * r[2]
        if det % self.N != 1 % self.N:
            raise DomainError(f"residue determinant {det} is not 1 mod {self.N}")
        object.__setattr__(self, "residue", r)


def _check_v(v: Sequence[int]) -> tuple[int, int, int, int]:
    vv = tuple(int(x) for x in v)
    if len(vv) != 4 or any(x != y for x, y in zip(vv, v)):
        raise DomainError("twist vector v must be four integers")
    return vv


def quad_expsum_bruteforce(q: int, cong: CongruenceData, v: Sequence[int]) -> complex:
    """Direct evaluation of S(q, v) from the definition.

    The work grows like (qN)^4 q, so requests beyond ``BRUTE_FORCE_LIMIT``
    character evaluations are refused outright.
    """
    if q < 1:
        raise DomainError("modulus must be a positive integer")
    vv = _check_v(v)
    N = cong.N
    cost = (q * N) ** 4 * q
    if cost > BRUTE_FORCE_LIMIT:
        raise ResourceGuardError(
            f"brute-force size (qN)^4 q = {cost} exceeds the limit {BRUTE_FORCE_LIMIT}; "
            "use quad_expsum_closed instead"
        )
    qN = q * N
    axes = [cong.residue[i] + N * np.arange(q, dtype=np.int64) for i in range(4)]
    x1, x2, x3, x4 = np.meshgrid(*axes, indexing="ij", sparse=True)
    quad = x1 * x4 - x2 * x3 - 1
    linear = vv[0] * x1 + vv[1] * x2 + vv[2] * x3 + vv[3] * x4
    roots = np.exp(2j * np.pi * np.arange(qN) / qN)
    units, _ = _unit_tables(q)
    total = 0j
    for a in units.tolist():
        phases = (a * N * quad + linear) % qN
        total += roots[phases].sum()
    return complex(total)


def quad_expsum_closed(q: int, cong: CongruenceData, v: Sequence[int]) -> complex:
    """Kloosterman-sum evaluation of S(q, v).

    Completing the square in the unit average turns each admissible shift
    class c (solving q c = v mod N componentwise) into a single Kloosterman
    sum at the integer point w = (v - q c) / N:

        S(q, v) = q^2 sum_c e(r . c / N) K(-1, -(w1 w4 - w2 w3); q).

    Coordinates with gcd(q, N) not dividing v_i admit no shift class and
    the whole sum vanishes.
    """
    if q < 1:
        raise DomainError("modulus must be a positive integer")
    vv = _check_v(v)
    N = cong.N
    g = math.gcd(q, N)
    n_g = N // g
    per_coord: list[list[int]] = []
    for vi in vv:
        if vi % g != 0:
            return 0j
        base = ((vi // g) * mod_inverse(q // g, n_g)) % n_g if n_g > 1 else 0
        per_coord.append([base + t * n_g for t in range(g)])
    total = 0j
    for c1 in per_coord[0]:
        for c2 in per_coord[1]:
            for c3 in per_coord[2]:
                for c4 in per_coord[3]:
                    w1 = (vv[0] - q * c1) // N
                    w2 = (vv[1] - q * c2) // N
                    w3 = (vv[2] - q * c3) // N
                    w4 = (vv[3] - q * c4) // N
                    r = cong.residue
                    phase = (r[0] * c1 + r[1] * c2 + r[2] * c3 + r[3] * c4) % N
                    kl = kloosterman(-1, -(w1 * w4 - w2 * w3), q)
                    total += np.exp(2j * np.pi * phase / N) * kl
    return complex(q * q * total)


def quadsum_weil_bound(q: int, N: int) -> float:
    """Size bound N^4 tau(q) q^{5/2} for the quadratic sum at level N."""
    return N ** 4 * divisor_count(q) * q ** 2.5
