"""The d >= 2 depth-quantile engine.

For each observation i and each sampled partner j, project everything onto
the pair axis, draw deterministic mid-quantile cone tips from the pair's
tip law, count points captured on each side of the anchor (the compiled
kernel or its numpy twin), and turn the tip-wise depths into a DQF by
sorting.  Averaging over partners gives q_bar_i, normalizing by the value
at delta = 1 gives q_tilde_i, and a smoothed derivative gives dq_i.  All
three live in a DQFBundle, whose canonical JSON bytes are the unit of
reproducibility (hashes are compared across runs and worker counts).
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.stats import norm

from ._kernels import depth_counts
from .geometry import (
    InnerProductView,
    PairFrame,
    ProjectionStats,
    pair_frame,
    projection_stats,
)
from .model import (
    Config,
    Dataset,
    GramMatrix,
    PairPlan,
    TipDistributionSpec,
    ValidationError,
    sample_pairs,
)
from .univariate import mid_quantile_positions

DEGENERATE_SPAN2 = 1e-24  # squared coincidence tolerance, matches geometry
TWO_POINT_EPS = 1e-6      # tip offset (times r) for fully concentrated pairs


@dataclass(frozen=True)
class DepthProfile:
    """Depths of one pair's anchor along the tip grid, one opening angle."""

    i: int
    j: int
    alpha: float
    tip_coords: np.ndarray
    depths: np.ndarray


def tip_grid(
    spec: TipDistributionSpec,
    stats: ProjectionStats,
    m: int,
    r: float,
    default_scale: float = 1.0,
) -> np.ndarray:
    """m deterministic mid-quantile tip coordinates for the pair's tip law.

    Tips are G^{-1}((k - 1/2)/m); a tip landing exactly on the anchor is
    nudged off it so every cone has a well-defined orientation.  A
    degenerate spread collapses the grid to two tips hugging the anchor.
    """
    p = mid_quantile_positions(m)
    c = spec.c if spec.c is not None else default_scale
    if spec.variant == "uniform_range":
        lo, hi = stats.t_min, stats.t_max
        if not hi - lo > 0.0:
            return _two_point_grid(m, r)
        tips = lo + p * (hi - lo)
    elif spec.variant == "uniform_robust":
        half = c * stats.winsorized_sd
        if not half > 0.0:
            return _two_point_grid(m, r)
        tips = (2.0 * p - 1.0) * half
    elif spec.variant == "uniform_fixed":
        if spec.a is None:
            raise ValidationError("uniform_fixed bounds unresolved; see resolve_tip_spec")
        tips = spec.a + p * (spec.b - spec.a)
    elif spec.variant == "normal_adaptive":
        sd = c * stats.winsorized_sd
        if not sd > 0.0:
            return _two_point_grid(m, r)
        tips = norm.ppf(p) * sd
    else:  # unreachable; TipDistributionSpec validates
        raise ValidationError(f"unknown tip distribution {spec.variant!r}")
    return np.where(tips == 0.0, 1e-12 * r, tips)


def _two_point_grid(m: int, r: float) -> np.ndarray:
    half = m // 2
    eps = TWO_POINT_EPS * r
    return np.concatenate([np.full(half, -eps), np.full(m - half, eps)])


def pair_depths(frame: PairFrame, tips: np.ndarray, cos_alphas: np.ndarray) -> np.ndarray:
    """(n_angles, m) matrix of anchor depths: min of the two side counts / n."""
    counts_a, counts_b = depth_counts(frame.t, frame.perp2, tips, cos_alphas)
    return np.minimum(counts_a, counts_b) / frame.t.shape[0]


def pair_depth_profile(frame: PairFrame, tips: np.ndarray, alpha: float) -> DepthProfile:
    """Single-angle depth profile (the engine shares one kernel call across
    angles; this wrapper serves tests and scoring)."""
    depths = pair_depths(frame, tips, np.array([math.cos(alpha)]))[0]
    return DepthProfile(i=frame.i, j=frame.j, alpha=alpha, tip_coords=tips, depths=depths)


def pair_dqf(profile: DepthProfile) -> np.ndarray:
    """DQF on the grid k/m: the sorted depth sequence (tips are mid-quantiles)."""
    return np.sort(profile.depths)


def zero_run_fraction(tips: np.ndarray, depths: np.ndarray) -> float:
    """Fraction of tips in the contiguous zero-depth run straddling the anchor.

    Zero if a tip adjacent to the anchor has nonzero depth (then no zero
    run contains the anchor coordinate 0).
    """
    m = tips.shape[0]
    right = int(np.searchsorted(tips, 0.0))
    adjacent = [k for k in (right - 1, right) if 0 <= k < m]
    if any(depths[k] != 0.0 for k in adjacent):
        return 0.0
    lo = min(adjacent)
    hi = max(adjacent)
    while lo > 0 and depths[lo - 1] == 0.0:
        lo -= 1
    while hi < m - 1 and depths[hi + 1] == 0.0:
        hi += 1
    return (hi - lo + 1) / m


def aggregate(pair_dqfs: list[np.ndarray]) -> np.ndarray:
    """Pointwise mean of the partner DQFs of one observation."""
    if not pair_dqfs:
        raise ValidationError("aggregate needs at least one pair DQF")
    return np.mean(np.stack(pair_dqfs), axis=0)


def normalize(q_bar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Divide each row by its value at delta = 1.

    Rows whose q_bar(1) is 0 carry no scale information; they are set to
    all zeros and reported in the returned flag mask rather than failing.
    """
    last = q_bar[:, -1]
    flagged = (last == 0.0) & ~np.isnan(last)
    safe = np.where(last == 0.0, 1.0, last)
    q_tilde = q_bar / safe[:, None]
    q_tilde[flagged] = 0.0
    return q_tilde, flagged


def smooth_derivative(
    q: np.ndarray, delta_grid: np.ndarray, window_fraction: float = 0.05
) -> np.ndarray:
    """Centered moving average (odd window, reflective ends), then gradient.

    The reflective boundary repeats the edge value, which preserves
    monotonicity of the smoothed rows, so the derivative of a valid DQF
    row never dips below -1e-9.
    """
    m = q.shape[-1]
    if m < 5:
        raise ValidationError("smoothing needs at least 5 grid points")
    w = max(3, int(round(window_fraction * m)))
    if w % 2 == 0:
        w += 1
    smoothed = uniform_filter1d(q, size=w, axis=-1, mode="reflect")
    return np.gradient(smoothed, delta_grid, axis=-1)


@dataclass(frozen=True)
class AngleBlock:
    """Per-angle curves: rows are observations, columns the delta grid."""

    alpha: float
    q_bar: np.ndarray
    q_tilde: np.ndarray
    dq: np.ndarray
    zero_interval_mean: np.ndarray


@dataclass(frozen=True)
class DQFBundle:
    """Everything a viewer or scorer needs from one engine run."""

    ids: tuple[str, ...]
    delta_grid: np.ndarray
    angles: tuple[AngleBlock, ...]
    config: Config
    flags: dict

    def to_dict(self) -> dict:
        return {
            "ids": list(self.ids),
            "delta_grid": _listify(self.delta_grid),
            "angles": [
                {
                    "alpha": block.alpha,
                    "q_bar": _listify(block.q_bar),
                    "q_tilde": _listify(block.q_tilde),
                    "dq": _listify(block.dq),
                    "zero_interval_mean": _listify(block.zero_interval_mean),
                }
                for block in self.angles
            ],
            "config": self.config.to_dict(),
            "flags": self.flags,
        }

    def to_json_bytes(self) -> bytes:
        return json.dumps(self.to_dict(), separators=(",", ":"), allow_nan=False).encode()

    @classmethod
    def from_dict(cls, d: dict) -> "DQFBundle":
        blocks = tuple(
            AngleBlock(
                alpha=float(b["alpha"]),
                q_bar=_unlistify(b["q_bar"]),
                q_tilde=_unlistify(b["q_tilde"]),
                dq=_unlistify(b["dq"]),
                zero_interval_mean=_unlistify(b["zero_interval_mean"]),
            )
            for b in d["angles"]
        )
        return cls(
            ids=tuple(d["ids"]),
            delta_grid=np.asarray(d["delta_grid"], dtype=np.float64),
            angles=blocks,
            config=Config.from_dict(d["config"]),
            flags=d.get("flags", {}),
        )

    @classmethod
    def from_json(cls, data: bytes | str) -> "DQFBundle":
        return cls.from_dict(json.loads(data))


def _listify(a: np.ndarray):
    """numpy -> plain Python lists with NaN mapped to None (JSON null)."""
    if a.ndim == 1:
        return [None if math.isnan(v) else float(v) for v in a.tolist()]
    return [_listify(row) for row in a]


def _unlistify(rows) -> np.ndarray:
    """Inverse of _listify: JSON null -> NaN."""
    return np.array(
        [
            [np.nan if v is None else v for v in row]
            if isinstance(row, list)
            else (np.nan if row is None else row)
            for row in rows
        ],
        dtype=np.float64,
    )


def resolve_pairs(view: InnerProductView, plan: PairPlan) -> tuple[list[list[int]], int, list[int]]:
    """Final partner lists with degenerate (coincident) pairs replaced from
    the plan's reserve stream.  Returns (partners, n_replaced, unpaired)."""
    n = view.n
    want = min(plan.n_pairs, n - 1)
    replaced = 0
    unpaired: list[int] = []
    final: list[list[int]] = []
    for i in range(n):
        good = [j for j in plan.partners[i] if view.span2(i, j) > DEGENERATE_SPAN2]
        dropped = want - len(good)
        if dropped > 0:
            for j in plan.reserve(i):
                if len(good) == want:
                    break
                if view.span2(i, j) > DEGENERATE_SPAN2:
                    good.append(j)
            replaced += dropped
        if not good:
            unpaired.append(i)
        final.append(good)
    return final, replaced, unpaired


def resolve_tip_spec(
    view: InnerProductView, partners: list[list[int]], cfg: Config
) -> TipDistributionSpec:
    """Fill in the uniform_fixed auto bounds: the envelope of the projection
    ranges across every pair in the plan (one non-adaptive G for all pairs)."""
    spec = cfg.tip_distribution
    if spec.variant != "uniform_fixed" or spec.a is not None:
        return spec
    lo, hi = math.inf, -math.inf
    for i, js in enumerate(partners):
        for j in js:
            frame = pair_frame(view, i, j, cfg.anchor)
            lo = min(lo, float(frame.t.min()))
            hi = max(hi, float(frame.t.max()))
    if not lo < hi:
        raise ValidationError("cannot resolve a fixed tip range: no valid pairs")
    return TipDistributionSpec(variant="uniform_fixed", a=lo, b=hi)


def _observation_row(
    view: InnerProductView,
    partners: list[int],
    i: int,
    cfg: Config,
    spec: TipDistributionSpec,
    cos_alphas: np.ndarray,
):
    """q_bar rows (one per angle) and zero-interval means for observation i."""
    k, m = cos_alphas.size, cfg.m_tips
    if not partners:
        return np.full((k, m), np.nan), np.full(k, np.nan)
    dqfs = np.empty((len(partners), k, m))
    zeros = np.empty((len(partners), k))
    for idx, j in enumerate(partners):
        frame = pair_frame(view, i, j, cfg.anchor)
        stats = projection_stats(frame, cfg.winsorize_per_side)
        tips = tip_grid(spec, stats, m, frame.r, cfg.normal_variance_scale)
        depths = pair_depths(frame, tips, cos_alphas)
        dqfs[idx] = np.sort(depths, axis=-1)
        for ka in range(k):
            zeros[idx, ka] = zero_run_fraction(tips, depths[ka])
    return np.mean(dqfs, axis=0), np.mean(zeros, axis=0)


def compute_bundle(
    data: Dataset | GramMatrix,
    cfg: Config,
    workers: int | None = None,
    ids: tuple[str, ...] | None = None,
) -> DQFBundle:
    """Run the full engine; the result depends only on (data, cfg).

    ``workers`` parallelizes over observations with threads (the counting
    kernel drops the GIL); every row is computed independently and merged
    in observation order, so the bundle is identical for any worker count.
    """
    if isinstance(data, Dataset):
        view = InnerProductView.from_dataset(data)
    elif isinstance(data, GramMatrix):
        view = InnerProductView.from_gram(data, ids)
    else:
        raise ValidationError("compute_bundle expects a Dataset or GramMatrix")

    n = view.n
    plan = sample_pairs(n, cfg)
    partners, n_replaced, unpaired = resolve_pairs(view, plan)
    spec = resolve_tip_spec(view, partners, cfg)
    cos_alphas = np.cos(np.asarray(cfg.angles, dtype=np.float64))

    def row(i: int):
        return _observation_row(view, partners[i], i, cfg, spec, cos_alphas)

    if workers is None or workers <= 1:
        rows = [row(i) for i in range(n)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, range(n)))

    k, m = cos_alphas.size, cfg.m_tips
    q_bar = np.stack([r[0] for r in rows], axis=1)          # (k, n, m)
    zero_mean = np.stack([r[1] for r in rows], axis=1)      # (k, n)

    grid_m = cfg.grid_size
    delta_grid = np.arange(1, grid_m + 1) / grid_m
    if grid_m != m:
        idx = np.ceil(delta_grid * m - 1e-9).astype(np.int64) - 1
        q_bar = q_bar[:, :, np.clip(idx, 0, m - 1)]

    blocks = []
    zero_norm_ids: list[str] = []
    for ka, alpha in enumerate(cfg.angles):
        q_tilde, flagged = normalize(q_bar[ka])
        zero_norm_ids.extend(view.ids[i] for i in np.flatnonzero(flagged))
        dq = smooth_derivative(q_tilde, delta_grid, cfg.smoothing_window_fraction)
        blocks.append(
            AngleBlock(
                alpha=float(alpha),
                q_bar=q_bar[ka],
                q_tilde=q_tilde,
                dq=dq,
                zero_interval_mean=zero_mean[ka],
            )
        )

    flags = {
        "degenerate_pairs_replaced": n_replaced,
        "unranked_ids": [view.ids[i] for i in unpaired],
        "zero_normalizer_ids": sorted(set(zero_norm_ids)),
    }
    return DQFBundle(
        ids=view.ids,
        delta_grid=delta_grid,
        angles=tuple(blocks),
        config=cfg,
        flags=flags,
    )
