"""Diophantine majorant series and the comparison bounds built from them.

The central object is a two-index series over integer vectors q != 0 and
positive integers d.  Each term couples an arithmetic weight
tau(d) / (|q|^m d^{3/2}) to a closeness factor measuring how near d q xi
sits to the integer lattice relative to the scale d sqrt(y):

    value(y; xi) = sum_q sum_d  tau(d) |q|^{-m} d^{-3/2}
                               / (1 + dist(d q xi) / (d sqrt(y))).

Truncation is always reported honestly: every evaluation returns the
partial sum together with a certified bound on everything discarded, so
the true value is bracketed by [value, value + tail].

Summation is deterministic.  Vectors q are ordered by increasing norm and
then lexicographically, d ascending, and blocks are combined by compensated
summation, so repeated runs produce identical floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .affine import GroupElement, grid_gap, log_gauge
from .arith import divisor_count
from .errors import DomainError

#: zeta(3/2); the divisor-weighted series sum_d tau(d) d^{-3/2} equals its square.
ZETA_THREE_HALVES = 2.612375348685488

_D_CHUNK = 4096


@dataclass(frozen=True)
class MajorantParams:
    """Shape of the series: block height k, decay exponent m, truncation cuts.

    The exponent must exceed k or the q-sum would diverge.  ``d_max=None``
    selects the y-dependent default ceil(y^{-1/2}) at evaluation time.
    """

    k: int
    m: float
    q_max: int = 20
    d_max: int | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise DomainError("block height k must be at least 1")
        if not self.m > self.k:
            raise DomainError(f"exponent m={self.m} must exceed k={self.k}")
        if self.q_max < 1:
            raise DomainError("q_max must be at least 1")
        if self.d_max is not None and self.d_max < 1:
            raise DomainError("d_max must be at least 1 when given")

    def effective_d_max(self, y: float) -> int:
        return self.d_max if self.d_max is not None else int(math.ceil(y ** -0.5))


@dataclass(frozen=True)
class MajorantValue:
    """A truncated series value plus a certified bound on the discarded part."""

    value: float
    tail_bound: float

    @property
    def upper(self) -> float:
        return self.value + self.tail_bound


@lru_cache(maxsize=None)
def _q_vectors(k: int, q_max: int) -> np.ndarray:
    """Nonzero integer vectors of norm at most q_max, norm-then-lex ordered."""
    grids = np.meshgrid(*[np.arange(-q_max, q_max + 1)] * k, indexing="ij")
    flat = np.stack([g.ravel() for g in grids], axis=1)
    norms2 = (flat * flat).sum(axis=1)
    keep = (norms2 > 0) & (norms2 <= q_max * q_max)
    flat, norms2 = flat[keep], norms2[keep]
    order = sorted(range(len(flat)), key=lambda i: (int(norms2[i]), tuple(flat[i])))
    out = flat[order].astype(np.int64)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _d_weights(d_max: int) -> np.ndarray:
    ds = np.arange(1, d_max + 1, dtype=np.int64)
    taus = np.array([divisor_count(int(d)) for d in ds], dtype=float)
    w = taus * ds.astype(float) ** -1.5
    w.setflags(write=False)
    return w


def q_tail_bound(k: int, m: float, q_max: int) -> float:
    """Upper bound for the discarded weights sum over |q| > q_max of |q|^{-m}."""
    return 2 ** k * k * q_max ** (k - m) * (1.0 + 1.0 / (m - k))


def d_tail_bound(d_max: int) -> float:
    """Upper bound for sum over d > d_max of tau(d) d^{-3/2}."""
    return 8.0 * d_max ** -0.5 * (math.log(d_max) + 2.0)


def _truncation_tail(params: MajorantParams, d_max: int, kept_q_weight: float) -> float:
    # Each closeness factor is at most 1, so the discarded mass is bounded by
    # the full d-series times the q-tail plus the kept q-weights times the
    # d-tail.
    zz = ZETA_THREE_HALVES * ZETA_THREE_HALVES
    return zz * q_tail_bound(params.k, params.m, params.q_max) + kept_q_weight * d_tail_bound(
        d_max
    )


def _check_y(y: float) -> float:
    if not (0.0 < y <= 1.0):
        raise DomainError(f"scale parameter y={y} must lie in (0, 1]")
    return float(y)


def _series_sum(coef_q: np.ndarray, dist_fn, d_max: int, sqrt_y: float) -> float:
    """Blockwise accumulation over d of the weighted closeness factors.

    ``dist_fn(ds)`` must return the matrix of lattice distances with q along
    the first axis and the supplied d-block along the second.
    """
    d_all = _d_weights(d_max)
    blocks = []
    for start in range(0, d_max, _D_CHUNK):
        ds = np.arange(start + 1, min(start + _D_CHUNK, d_max) + 1, dtype=np.int64)
        dist = dist_fn(ds)
        denom = 1.0 + dist / (ds.astype(float) * sqrt_y)[None, :]
        terms = (coef_q[:, None] * d_all[start : start + len(ds)][None, :]) / denom
        blocks.append(float(terms.sum()))
    return math.fsum(blocks)


def majorant_full(params: MajorantParams, xi: np.ndarray, y: float) -> MajorantValue:
    """Evaluate the series against a k x 2 torus block xi.

    The lattice distance is the planar one: each term measures how far
    d q xi falls from the nearest point of the integer plane lattice.
    """
    y = _check_y(y)
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (params.k, 2):
        raise DomainError(f"xi must have shape ({params.k}, 2), got {xi.shape}")
    qs = _q_vectors(params.k, params.q_max)
    norms = np.sqrt((qs * qs).sum(axis=1).astype(float))
    coef_q = norms ** -params.m
    proj = qs.astype(float) @ xi
    d_max = params.effective_d_max(y)
    sqrt_y = math.sqrt(y)

    def dist_fn(ds: np.ndarray) -> np.ndarray:
        prod = proj[:, None, :] * ds.astype(float)[None, :, None]
        frac = prod - np.round(prod)
        return np.sqrt((frac * frac).sum(axis=2))

    value = _series_sum(coef_q, dist_fn, d_max, sqrt_y)
    return MajorantValue(value, _truncation_tail(params, d_max, float(coef_q.sum())))


def majorant_column(params: MajorantParams, psi: Sequence[float], y: float) -> MajorantValue:
    """Evaluate the series against a single column vector psi.

    This is the block whose left column is psi and right column zero, so the
    planar lattice distance collapses to the scalar distance |d q . psi|
    from the nearest integer.
    """
    y = _check_y(y)
    psi_arr = np.asarray(psi, dtype=float)
    if psi_arr.shape != (params.k,):
        raise DomainError(f"psi must have shape ({params.k},), got {psi_arr.shape}")
    qs = _q_vectors(params.k, params.q_max)
    norms = np.sqrt((qs * qs).sum(axis=1).astype(float))
    coef_q = norms ** -params.m
    proj = qs.astype(float) @ psi_arr
    d_max = params.effective_d_max(y)
    sqrt_y = math.sqrt(y)

    def dist_fn(ds: np.ndarray) -> np.ndarray:
        prod = proj[:, None] * ds.astype(float)[None, :]
        return np.abs(prod - np.round(prod))

    value = _series_sum(coef_q, dist_fn, d_max, sqrt_y)
    return MajorantValue(value, _truncation_tail(params, d_max, float(coef_q.sum())))


def majorant_column_many(
    params: MajorantParams, psis: np.ndarray, y: float, chunk: int = 256
) -> np.ndarray:
    """Truncated column values for a whole batch of psi rows at once.

    Returns one float per row of ``psis`` (shape n x k).  Only the partial
    sums are produced; the tail bound is the same for every row and can be
    obtained from :func:`majorant_column` when needed.  Intended for
    Monte Carlo averaging, where per-row compensated summation would
    dominate the runtime.
    """
    y = _check_y(y)
    psis = np.atleast_2d(np.asarray(psis, dtype=float))
    if psis.shape[1] != params.k:
        raise DomainError(f"psi batch must have {params.k} columns")
    qs = _q_vectors(params.k, params.q_max).astype(float)
    norms = np.sqrt((qs * qs).sum(axis=1))
    coef_q = norms ** -params.m
    d_max = params.effective_d_max(y)
    d_w = _d_weights(d_max)
    ds = np.arange(1, d_max + 1, dtype=float)
    inv_scale = 1.0 / (ds * math.sqrt(y))
    weights = coef_q[:, None] * d_w[None, :]

    out = np.empty(len(psis))
    for start in range(0, len(psis), chunk):
        block = psis[start : start + chunk]
        proj = block @ qs.T
        prod = proj[:, :, None] * ds[None, None, :]
        dist = np.abs(prod - np.round(prod))
        terms = weights[None, :, :] / (1.0 + dist * inv_scale[None, None, :])
        out[start : start + chunk] = terms.sum(axis=(1, 2))
    return out


@dataclass(frozen=True)
class LowerEnvelopeReport:
    """Ratios of truncated values to the reference envelope y^{1/4} log(1/y + 1)."""

    rows: tuple[tuple[float, float, float], ...]
    min_ratio: float


def delta_lower_check(
    params: MajorantParams, psi: Sequence[float], ys: Sequence[float]
) -> LowerEnvelopeReport:
    """Compare column values against the small-y envelope on a grid of scales.

    Each row records (y, value, value / envelope).  A healthy series keeps
    the ratio bounded away from zero as y shrinks.
    """
    rows = []
    ratios = []
    for y in ys:
        val = majorant_column(params, psi, y).value
        envelope = y ** 0.25 * math.log(1.0 / y + 1.0)
        ratio = val / envelope
        rows.append((float(y), val, ratio))
        ratios.append(ratio)
    return LowerEnvelopeReport(tuple(rows), min(ratios))


@dataclass(frozen=True)
class LfdWitness:
    """A pair (d, q) violating the Diophantine lower bound."""

    d: int
    q: tuple[int, ...]


def lfd_test(
    psi: Sequence[float],
    kappa: float,
    alpha: float,
    c: float,
    q_max: int,
    d_max: int,
) -> LfdWitness | None:
    """Scan for violations of dist(d q . psi) >= c d^{-alpha} |q|^{-kappa}.

    The distance is even in q, so only vectors whose first nonzero entry is
    positive are scanned.  Returns None when every pair in the window
    satisfies the bound, otherwise the first failing pair in (d ascending,
    q norm-then-lex) order.
    """
    if c <= 0.0:
        raise DomainError("lower-bound constant c must be positive")
    psi_arr = np.asarray(psi, dtype=float)
    k = psi_arr.shape[0]
    qs = _q_vectors(k, q_max)
    lead = qs[np.arange(len(qs)), np.argmax(qs != 0, axis=1)]
    qs = qs[lead > 0]
    norms = np.sqrt((qs * qs).sum(axis=1).astype(float))
    proj = qs.astype(float) @ psi_arr
    for d in range(1, d_max + 1):
        x = d * proj
        dist = np.abs(x - np.round(x))
        bound = c * d ** -alpha * norms ** -kappa
        bad = np.nonzero(dist < bound)[0]
        if len(bad):
            i = int(bad[0])
            return LfdWitness(d, tuple(int(v) for v in qs[i]))
    return None


@dataclass(frozen=True)
class OrbitGapBound:
    """Gauge-weighted bound assembled from rectangle gap statistics.

    ``term0`` is the contribution of the unprojected lattice, ``series`` the
    truncated double sum over (q, d), and ``tail_bound`` certifies the
    truncation.  The headline number is ``total = term0 + series``.
    """

    term0: float
    series: float
    tail_bound: float

    @property
    def total(self) -> float:
        return self.term0 + self.series

    @property
    def upper(self) -> float:
        return self.total + self.tail_bound


def orbit_gap_bound(element: GroupElement, T: float, params: MajorantParams) -> OrbitGapBound:
    """Evaluate the long-orbit comparison bound at time T >= 2.

    The leading term applies the cubic gauge to the reciprocal square root
    of the q = 0 gap; each series term applies the linear gauge to
    1 / (1 + gap(d q) / d), weighted like the majorant series.
    """
    if not T >= 2.0:
        raise DomainError("time parameter must be at least 2")
    if params.d_max is None:
        raise DomainError("orbit gap bound needs an explicit d_max")
    if element.k != params.k:
        raise DomainError(f"element has k={element.k}, params expect {params.k}")
    zero = [0] * params.k
    s0 = grid_gap(element, zero, T).value
    term0 = log_gauge(s0 ** -0.5, 3)

    qs = _q_vectors(params.k, params.q_max)
    norms = np.sqrt((qs * qs).sum(axis=1).astype(float))
    coef_q = norms ** -params.m
    d_w = _d_weights(params.d_max)
    contributions = []
    for i, q in enumerate(qs):
        for d in range(1, params.d_max + 1):
            s = grid_gap(element, list(d * q), T).value
            gauge = log_gauge(1.0 / (1.0 + s / d), 1)
            contributions.append(coef_q[i] * d_w[d - 1] * gauge)
    series = math.fsum(contributions)
    tail = math.log(3.0) * _truncation_tail(params, params.d_max, float(coef_q.sum()))
    return OrbitGapBound(term0, series, tail)


@dataclass(frozen=True)
class LineSumComparison:
    """Two-sided comparison of the aperture-weighted line sum.

    ``lhs`` is the partial sum over |j| <= j_max, ``lhs_slack`` a certified
    bound on the discarded |j| > j_max terms, and ``rhs`` the gauge
    expression it is measured against.
    """

    lhs: float
    lhs_slack: float
    rhs: float

    @property
    def ratio(self) -> float:
        return (self.lhs + self.lhs_slack) / self.rhs


def shifted_line_sum(
    w1: float, w2: float, alpha: float, beta: float, j_max: int = 10_000
) -> LineSumComparison:
    """Sum the aperture weights alpha / (alpha + |j|)^2 damped by closeness
    of j w1 + w2 to the integers, and compare with the gauge bound.

    Arguments are restricted to w1, w2 in [0, 1/2], alpha >= 1/10, beta > 0;
    j_max may be raised for sharper anchors but not lowered below 10^4.
    """
    if not (0.0 <= w1 <= 0.5 and 0.0 <= w2 <= 0.5):
        raise DomainError("offsets w1, w2 must lie in [0, 1/2]")
    if not alpha >= 0.1:
        raise DomainError("aperture alpha must be at least 1/10")
    if not beta > 0.0:
        raise DomainError("scale beta must be positive")
    if j_max < 10_000:
        raise DomainError("j_max below 10^4 gives too coarse a partial sum")
    js = np.arange(-j_max, j_max + 1, dtype=float)
    absj = np.abs(js)
    x = js * w1 + w2
    dist = np.abs(x - np.round(x))
    weights = alpha / (alpha + absj) ** 2
    damp = 1.0 + alpha * beta * (w1 + dist) / (alpha + absj)
    lhs = float((weights / damp).sum())
    slack = 2.0 * alpha / j_max
    rhs = log_gauge(1.0 / (1.0 + alpha * beta * w1 + beta * w2), 1) + log_gauge(
        1.0 / (1.0 + beta), 2
    )
    return LineSumComparison(lhs, slack, rhs)
