"""Deterministic generators for the benchmark scenarios.

Each generator consumes an isolated RNG sub-stream keyed by its scenario
tag, draws in a fixed documented order, and attaches 0/1 ground-truth
labels, so acceptance tests and demos can regenerate identical data from
a seed alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .model import Dataset, STREAM_SCENARIO, ValidationError, substream
from .univariate import Sample1D

# sub-stream tags per generator family
_TAG_HOLEY_1D = 0
_TAG_HOLEY_2D = 1
_TAG_ANNULUS = 2
_TAG_EMBEDDED = 10  # + scenario index
_TAG_MANIFOLD_OFF = 20
_TAG_MANIFOLD_INLIER = 21

# the four embedded-outlier benchmarks, keyed by the shape of the bulk
_EMBEDDED_KINDS = ("plane", "cube", "sheet", "normal")

_HOLE = 0.13
_BAND = 0.26
_BULK = 0.987  # 1 - hole mass 0.05*0.26, so the three branches integrate to 1


class HoleyDistribution:
    """A standard normal with its center carved into a flat low-density hole.

    Density: 0.05 inside |x| <= 0.13; phi(x) + phi(|x| - 0.13) (times 0.987)
    on 0.13 < |x| < 0.26, reinstating the mass displaced from the hole right
    next to it; 0.987*phi(x) beyond.  The cdf is piecewise analytic and
    continuous; the quantile function is evaluated by bisection.
    """

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        ax = np.abs(x)
        mid = _BULK * (norm.pdf(x) + norm.pdf(ax - _HOLE))
        outer = _BULK * norm.pdf(x)
        return np.where(ax <= _HOLE, 0.05, np.where(ax < _BAND, mid, outer))

    def cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        ax = np.abs(x)
        hole = 0.5 + 0.05 * ax
        mid = (
            0.5
            + 0.05 * _HOLE
            + _BULK * (norm.cdf(ax) - norm.cdf(_HOLE) + norm.cdf(ax - _HOLE) - 0.5)
        )
        outer = 0.5 + 0.05 * _HOLE + _BULK * (norm.cdf(ax) - 0.5)
        upper = np.where(ax <= _HOLE, hole, np.where(ax < _BAND, mid, outer))
        return np.where(x >= 0, upper, 1.0 - upper)

    def ppf(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=np.float64)
        if np.any((q < 0) | (q > 1)):
            raise ValidationError("quantile levels must lie in [0, 1]")
        lo = np.full_like(q, -9.0)
        hi = np.full_like(q, 9.0)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            ge = self.cdf(mid) >= q
            hi = np.where(ge, mid, hi)
            lo = np.where(ge, lo, mid)
        return hi

    def support(self) -> tuple[float, float]:
        return (-9.0, 9.0)

    def rvs(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.ppf(rng.random(n))


def gen_holey_normal_1d(n: int, seed: int = 0) -> Sample1D:
    """n i.i.d. draws from the holey normal, by inverse cdf."""
    if n < 1:
        raise ValidationError("n must be positive")
    rng = substream(seed, STREAM_SCENARIO, _TAG_HOLEY_1D)
    return Sample1D(values=HoleyDistribution().rvs(n, rng))


def gen_holey_2d(n: int = 400, seed: int = 0) -> Dataset:
    """Rotationally symmetric version: radius = |holey draw|, uniform angle.

    Draw order: radii, then angles.  No designated anomalies (labels all 0);
    the hole is an annular antimode around the origin.
    """
    rng = substream(seed, STREAM_SCENARIO, _TAG_HOLEY_2D)
    radius = np.abs(HoleyDistribution().rvs(n, rng))
    theta = rng.uniform(0.0, 2.0 * math.pi, size=n)
    coords = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    return Dataset(
        ids=_ids(n), coords=coords, labels=np.zeros(n, dtype=np.int64)
    )


def gen_annulus_microcluster(seed: int = 0) -> Dataset:
    """106 points in R^30: a 100-point annulus, a 5-point inlying
    micro-cluster, and one isolated inlier mirroring the first cluster point.

    Bulk: direction uniform on the sphere, radius with density proportional
    to (1 - r) on [1/3, 1] (strictly decreasing in the norm).  Cluster:
    0.15*e1 + N(0, 0.02^2 I).  The final point is the exact negative of the
    first cluster point.  Draw order: bulk directions, bulk radii, cluster
    offsets.  Labels mark the six non-bulk points.
    """
    rng = substream(seed, STREAM_SCENARIO, _TAG_ANNULUS)
    d, n_bulk = 30, 100
    dirs = rng.normal(size=(n_bulk, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    u = rng.random(n_bulk)
    radius = 1.0 - (2.0 / 3.0) * np.sqrt(1.0 - u)  # inverse cdf of pdf ~ (1-r)
    bulk = dirs * radius[:, None]
    center = np.zeros(d)
    center[0] = 0.15
    cluster = center + 0.02 * rng.normal(size=(5, d))
    mirror = -cluster[0]
    coords = np.vstack([bulk, cluster, mirror])
    labels = np.zeros(106, dtype=np.int64)
    labels[100:] = 1
    return Dataset(ids=_ids(106), coords=coords, labels=labels)


def _orthogonal_shift(rng: np.random.Generator, basis_rows: np.ndarray, norm_: float) -> np.ndarray:
    """A vector of the given norm orthogonal to the row space of basis_rows."""
    g = rng.normal(size=basis_rows.shape[1])
    coef, *_ = np.linalg.lstsq(basis_rows.T, g, rcond=None)
    v = g - basis_rows.T @ coef
    return norm_ * v / np.linalg.norm(v)


def gen_embedded_outlier(kind: str, seed: int = 0) -> Dataset:
    """The four low-dimensional-structure benchmarks, one labeled anomaly each.

    plane: 80 points uniform on a 2-plane embedded in R^50 by a random
    U(-1,1) linear map; the last point is shifted off the plane by an
    orthogonal vector of norm 0.4.  cube: 100 points from a 6-cube in
    R^100 with N(0, 0.05^2) ambient noise and an orthogonal shift of norm
    10.  sheet: 100 points on the surface y3 = 2*cos((y1 - 0.5)*pi) over
    the unit square plus a 101st point at (0.5, 0.5, 1), embedded in R^30.
    normal: 50 standard normal points in R^30; the last point's first
    coordinate is set to 6 (no low-dimensional structure at all).  Draw
    order: base coordinates, embedding map, ambient noise, orthogonal
    direction.
    """
    if kind not in _EMBEDDED_KINDS:
        raise ValidationError(f"kind must be one of {_EMBEDDED_KINDS}")
    rng = substream(seed, STREAM_SCENARIO, _TAG_EMBEDDED + 1 + _EMBEDDED_KINDS.index(kind))
    if kind == "plane":
        n, d, D = 80, 2, 50
        y = rng.uniform(0.0, 1.0, size=(n, d))
        emb = rng.uniform(-1.0, 1.0, size=(d, D))
        coords = y @ emb
        coords[n - 1] += _orthogonal_shift(rng, emb, 0.4)
    elif kind == "cube":
        n, d, D = 100, 6, 100
        y = rng.uniform(0.0, 1.0, size=(n, d))
        emb = rng.uniform(-1.0, 1.0, size=(d, D))
        coords = y @ emb + rng.normal(0.0, 0.05, size=(n, D))
        coords[n - 1] += _orthogonal_shift(rng, emb, 10.0)
    elif kind == "sheet":
        coords = _embedded_manifold(rng, outlier=(0.5, 0.5, 1.0))
        n = coords.shape[0]
    else:
        n, D = 50, 30
        coords = rng.normal(size=(n, D))
        coords[n - 1, 0] = 6.0
    labels = np.zeros(n, dtype=np.int64)
    labels[n - 1] = 1
    return Dataset(ids=_ids(n), coords=coords, labels=labels)


def _embedded_manifold(
    rng: np.random.Generator,
    outlier: tuple[float, float, float],
    outlier_noise_sd: float = 0.0,
) -> np.ndarray:
    """100 points on the cosine sheet plus one off-sheet point, in R^30."""
    n, D = 100, 30
    y12 = rng.uniform(0.0, 1.0, size=(n, 2))
    y3 = 2.0 * np.cos((y12[:, 0] - 0.5) * math.pi)
    base = np.column_stack([y12, y3])
    extra = np.asarray(outlier, dtype=np.float64)
    emb = rng.uniform(-1.0, 1.0, size=(3, D))
    if outlier_noise_sd > 0.0:
        extra = extra + rng.normal(0.0, outlier_noise_sd, size=3)
    return np.vstack([base, extra]) @ emb


def gen_manifold_off(seed: int = 0) -> Dataset:
    """The cosine-sheet scenario with the off-manifold point at (0.5, 0.5, 1.5)."""
    rng = substream(seed, STREAM_SCENARIO, _TAG_MANIFOLD_OFF)
    coords = _embedded_manifold(rng, outlier=(0.5, 0.5, 1.5))
    labels = np.zeros(101, dtype=np.int64)
    labels[100] = 1
    return Dataset(ids=_ids(101), coords=coords, labels=labels)


def gen_manifold_inlier(seed: int = 0) -> Dataset:
    """Variant with the extra point at (0.5, 0.5, 0) + N(0, 0.05^2 I_3):
    an inlier under the sheet rather than a point far off it."""
    rng = substream(seed, STREAM_SCENARIO, _TAG_MANIFOLD_INLIER)
    coords = _embedded_manifold(rng, outlier=(0.5, 0.5, 0.0), outlier_noise_sd=0.05)
    labels = np.zeros(101, dtype=np.int64)
    labels[100] = 1
    return Dataset(ids=_ids(101), coords=coords, labels=labels)


def _ids(n: int) -> tuple[str, ...]:
    return tuple(f"x{k}" for k in range(1, n + 1))


@dataclass(frozen=True)
class ScenarioSpec:
    """A named, enumerable scenario with its defining parameters."""

    name: str
    n: int
    ambient_dim: int
    intrinsic_dim: int
    noise_sd: float
    outlier: str

    def __post_init__(self) -> None:
        if min(self.n, self.ambient_dim, self.intrinsic_dim) <= 0:
            raise ValidationError("scenario counts must be positive")


SCENARIOS: dict[str, ScenarioSpec] = {
    "holey-1d": ScenarioSpec("holey-1d", 500, 1, 1, 0.0, "antimode hole at 0"),
    "holey-2d": ScenarioSpec("holey-2d", 400, 2, 2, 0.0, "annular antimode"),
    "annulus": ScenarioSpec("annulus", 106, 30, 30, 0.0, "micro-cluster + mirrored inlier"),
    "plane-outlier": ScenarioSpec("plane-outlier", 80, 50, 2, 0.0, "orthogonal shift 0.4"),
    "cube-outlier": ScenarioSpec("cube-outlier", 100, 100, 6, 0.05, "orthogonal shift 10"),
    "sheet-outlier": ScenarioSpec("sheet-outlier", 101, 30, 3, 0.0, "off-sheet point (0.5,0.5,1)"),
    "normal-outlier": ScenarioSpec("normal-outlier", 50, 30, 30, 0.0, "first coordinate 6"),
    "manifold-off": ScenarioSpec("manifold-off", 101, 30, 3, 0.0, "off-sheet point (0.5,0.5,1.5)"),
    "manifold-inlier": ScenarioSpec(
        "manifold-inlier", 101, 30, 3, 0.05, "under-sheet point (0.5,0.5,0)+noise"
    ),
}


def generate(name: str, seed: int = 0, n: int | None = None):
    """Generate a named scenario; n is honored where the scenario is sized."""
    if name not in SCENARIOS:
        raise ValidationError(f"unknown scenario {name!r}; known: {sorted(SCENARIOS)}")
    spec = SCENARIOS[name]
    if name == "holey-1d":
        return gen_holey_normal_1d(n or spec.n, seed)
    if name == "holey-2d":
        return gen_holey_2d(n or spec.n, seed)
    if name == "annulus":
        return gen_annulus_microcluster(seed)
    if name.endswith("-outlier"):
        return gen_embedded_outlier(name[: -len("-outlier")], seed)
    if name == "manifold-off":
        return gen_manifold_off(seed)
    return gen_manifold_inlier(seed)
