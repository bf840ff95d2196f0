"""One-dimensional depth quantile functions.

The 1-D machinery is both a gentle special case and the test oracle for
the general engine: a split point s turns the line into two half-infinite
intervals, the depth of x is the smaller of the probability masses of
``[x, s]``-side pieces, and the DQF is the quantile function of that depth
when the split point is random.

Two evaluation modes are provided: empirical (a sorted sample, step ECDF)
and population (any continuous distribution given by ``cdf``/``ppf``
callables, evaluated by bisection).  The population mode is exact to
bisection tolerance and serves as the oracle for the empirical one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ValidationError


@dataclass(frozen=True)
class Sample1D:
    """A sorted 1-D sample."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValidationError("Sample1D needs a nonempty 1-D array")
        if not np.all(np.isfinite(values)):
            raise ValidationError("Sample1D values must be finite")
        if np.any(np.diff(values) < 0):
            values = np.sort(values)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def support(self) -> tuple[float, float]:
        return float(self.values[0]), float(self.values[-1])


@dataclass(frozen=True)
class DQFCurve:
    """A depth quantile function tabulated on an increasing delta grid."""

    delta_grid: np.ndarray
    q: np.ndarray

    def __post_init__(self) -> None:
        grid = np.asarray(self.delta_grid, dtype=np.float64)
        q = np.asarray(self.q, dtype=np.float64)
        if grid.shape != q.shape or grid.ndim != 1:
            raise ValidationError("delta_grid and q must be 1-D of equal length")
        if np.any(np.diff(grid) <= 0) or grid[0] <= 0 or grid[-1] > 1:
            raise ValidationError("delta_grid must be increasing within (0, 1]")
        if np.any(q < 0):
            raise ValidationError("DQF values must be nonnegative")
        if np.any(np.diff(q) < 0):
            raise ValidationError("DQF must be non-decreasing in delta")
        grid.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "delta_grid", grid)
        object.__setattr__(self, "q", q)


def ecdf(s: Sample1D, x) -> np.ndarray | float:
    """Right-continuous empirical distribution function: P_n(X <= x)."""
    r = np.searchsorted(s.values, x, side="right") / s.n
    return float(r) if np.isscalar(x) else r


def depth_1d(s: Sample1D, x: float, tip) -> np.ndarray | float:
    """Depth of x for split point ``tip``: the smaller of the sample masses
    of the interval between x and the tip and of the half-line beyond x.

    Vectorized over ``tip``.
    """
    fx = ecdf(s, x)
    ftip = np.asarray(ecdf(s, tip), dtype=np.float64)
    right = np.minimum(fx, ftip - fx)        # x <= tip
    left = np.minimum(fx - ftip, 1.0 - fx)   # x > tip
    out = np.where(np.asarray(tip, dtype=np.float64) >= x, right, left)
    return float(out) if np.isscalar(tip) else out


def mid_quantile_positions(m: int) -> np.ndarray:
    """The m probability levels (k - 1/2)/m, k = 1..m."""
    return (np.arange(1, m + 1) - 0.5) / m


def quantile_step_lookup(sorted_values: np.ndarray, deltas: np.ndarray) -> np.ndarray:
    """Left-continuous quantile lookup for atoms of equal mass 1/m.

    For delta in ((k-1)/m, k/m] returns the k-th smallest value.  The tiny
    slack guards against float products like 0.1*10 landing just above an
    exact grid point.
    """
    m = sorted_values.size
    idx = np.ceil(np.asarray(deltas, dtype=np.float64) * m - 1e-9).astype(np.int64) - 1
    return sorted_values[np.clip(idx, 0, m - 1)]


def dqf_1d(s: Sample1D, x: float, tips, delta_grid=None) -> DQFCurve:
    """Empirical DQF of x: quantile function of depth_1d over the tips.

    ``tips`` should be deterministic mid-quantiles of the tip law G (see
    :func:`mid_quantile_positions`); the DQF is then exactly the sorted
    depth sequence at delta = k/m, extended to other grids by
    left-continuous steps.
    """
    tips = np.asarray(tips, dtype=np.float64)
    if tips.size == 0:
        raise ValidationError("dqf_1d needs at least one tip")
    depths = np.sort(np.asarray(depth_1d(s, x, tips), dtype=np.float64))
    m = tips.size
    if delta_grid is None:
        grid = np.arange(1, m + 1) / m
        return DQFCurve(delta_grid=grid, q=depths)
    grid = np.asarray(delta_grid, dtype=np.float64)
    return DQFCurve(delta_grid=grid, q=quantile_step_lookup(depths, grid))


def delta_star(F, x: float) -> float:
    """The delta beyond which the DQF is flat at the global depth of x.

    Assumes the split-point law is uniform on [0, 1] and the support of F
    lies inside [0, 1]; F must expose scipy-style ``cdf`` and ``ppf``.
    """
    lo, hi = _support_of(F)
    if not lo <= x <= hi:
        raise ValidationError(f"x={x} outside the support [{lo}, {hi}]")
    fx = float(F.cdf(x))
    if fx <= 0.5:
        return float(F.ppf(2.0 * fx))
    return 1.0 - float(F.ppf(2.0 * fx - 1.0))


def zero_run_length_1d(s: Sample1D, x: float, support: tuple[float, float] | None = None) -> float:
    """Length of the empty interval around x, clipped to the tip support.

    Zero when x coincides with a sample point.  This is the width of the
    flat-at-zero start of the empirical DQF, in data units.
    """
    lo, hi = support if support is not None else s.support
    v = s.values
    if np.any(v == x):
        return 0.0
    below = v[v < x]
    above = v[v > x]
    a = max(float(below[-1]) if below.size else lo, lo)
    b = min(float(above[0]) if above.size else hi, hi)
    return max(b - a, 0.0)


def shorth(s: Sample1D, alpha: float, x: float) -> float:
    """Length of the shortest interval containing x with sample mass >= alpha.

    Scans windows of ceil(alpha*n) consecutive order statistics; a window
    not containing x is extended to x, so points outside the data range are
    handled too.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValidationError("alpha must be in (0, 1]")
    v = s.values
    n = s.n
    k = int(math.ceil(alpha * n - 1e-9))
    lows = v[: n - k + 1]
    highs = v[k - 1:]
    lengths = np.maximum(highs, x) - np.minimum(lows, x)
    return float(lengths.min())


def _support_of(F) -> tuple[float, float]:
    if hasattr(F, "support"):
        lo, hi = F.support()
    else:
        lo, hi = F.ppf(0.0), F.ppf(1.0)
    return float(lo), float(hi)


def population_depth_cdf(F, x: float, t, G=None) -> np.ndarray:
    """P(depth of x <= t) when the split point follows G (default U(0,1)).

    The sublevel set {s : depth <= t} is an interval [a(t), b(t)] around x;
    both endpoints come from the quantile function of F in closed form, so
    only the outer inversion (in :func:`population_dqf`) needs bisection.
    """
    lo, hi = _support_of(F)
    t = np.asarray(t, dtype=np.float64)
    fx = float(F.cdf(x))
    b = np.where(t >= fx, hi, F.ppf(np.minimum(fx + t, 1.0)))
    a = np.where(t >= 1.0 - fx, lo, F.ppf(np.maximum(fx - t, 0.0)))
    if G is None:
        return np.clip(b, 0.0, 1.0) - np.clip(a, 0.0, 1.0)
    return np.asarray(G.cdf(b) - G.cdf(a), dtype=np.float64)


def population_dqf(F, x: float, deltas, G=None, tol: float = 1e-9) -> np.ndarray:
    """Population DQF of x under split-point law G, by bisection in t.

    The depth cdf D(t) is non-decreasing, so for each delta the smallest t
    with D(t) >= delta is bracketed and halved to ``tol``.
    """
    deltas = np.atleast_1d(np.asarray(deltas, dtype=np.float64))
    if np.any((deltas <= 0) | (deltas > 1)):
        raise ValidationError("deltas must lie in (0, 1]")
    t_lo = np.zeros_like(deltas)
    t_hi = np.full_like(deltas, 0.5)
    # q(delta) = 0 wherever D(0) >= delta already
    d0 = population_depth_cdf(F, x, 0.0, G)
    done_zero = d0 >= deltas
    iters = max(int(math.ceil(math.log2(0.5 / tol))), 1)
    for _ in range(iters):
        mid = 0.5 * (t_lo + t_hi)
        ge = population_depth_cdf(F, x, mid, G) >= deltas
        t_hi = np.where(ge, mid, t_hi)
        t_lo = np.where(ge, t_lo, mid)
    return np.where(done_zero, 0.0, t_hi)
