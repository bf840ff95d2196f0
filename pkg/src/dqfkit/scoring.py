"""Anomaly evidence from DQF bundles.

Low depth curves mean isolation: the primary ranking reads each
observation's averaged curve at the smallest delta where a single
observation is strictly deepest-poorest (the first unique argmin), an
idea that targets isolated anomalies; score-at-delta supports picking a
delta by eye instead, and labeled data gets a rank-based ROC AUC.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .engine import DepthProfile, DQFBundle, zero_run_fraction
from .model import ValidationError


def zero_interval(profile: DepthProfile) -> float:
    """G-measure of the tip run around the anchor whose cones capture no
    mass on the anchor side — the gap signature of the pair."""
    return zero_run_fraction(profile.tip_coords, profile.depths)


@dataclass(frozen=True)
class RankingResult:
    delta_star: float
    scores: np.ndarray
    ranks: np.ndarray  # float; NaN for unranked rows
    fallback: bool


def rank_first_unique_argmin(matrix: np.ndarray, delta_grid: np.ndarray) -> RankingResult:
    """Rank observations at the smallest delta with a unique row-minimum.

    Averaged depths with a common pair count are rationals over one
    denominator, so exact float equality is the right tie test; ties that
    survive are genuine.  If no grid point has a unique argmin, the
    largest delta with the fewest tied rows is used and flagged.
    """
    valid = ~np.isnan(matrix[:, 0])
    if not valid.any():
        raise ValidationError("no rankable rows (all observations unpaired)")
    best_col, best_ties = None, np.inf
    for col in range(matrix.shape[1]):
        column = matrix[valid, col]
        ties = int(np.count_nonzero(column == column.min()))
        if ties == 1:
            best_col, best_ties = col, 1
            break
        if ties <= best_ties:  # later column wins on equal tie count
            best_col, best_ties = col, ties
    scores = matrix[:, best_col]
    ranks = np.full(matrix.shape[0], np.nan)
    ranks[valid] = rankdata(scores[valid], method="ordinal")
    return RankingResult(
        delta_star=float(delta_grid[best_col]),
        scores=scores,
        ranks=ranks,
        fallback=best_ties > 1,
    )


def score_at_delta(matrix: np.ndarray, delta_grid: np.ndarray, delta: float) -> np.ndarray:
    """Per-observation value at the grid point nearest to delta."""
    if not delta_grid[0] <= delta <= delta_grid[-1]:
        raise ValidationError(
            f"delta={delta} outside the grid range [{delta_grid[0]}, {delta_grid[-1]}]"
        )
    col = int(np.argmin(np.abs(delta_grid - delta)))
    scores = matrix[:, col]
    finite = scores[~np.isnan(scores)]
    if finite.size and np.all(finite == finite[0]):
        warnings.warn(f"scores at delta={delta} are constant (uninformative)", stacklevel=2)
    return scores


def auc(scores, labels) -> float:
    """ROC AUC of "lower score means anomaly", ties at half credit."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.shape != labels.shape:
        raise ValidationError("scores and labels must align")
    n1 = int(np.count_nonzero(labels == 1))
    n0 = int(np.count_nonzero(labels == 0))
    if n1 == 0 or n0 == 0:
        raise ValidationError("AUC undefined: labels contain a single class")
    ranks = rankdata(scores)
    u1 = ranks[labels == 1].sum() - n1 * (n1 + 1) / 2.0
    return 1.0 - u1 / (n1 * n0)


@dataclass(frozen=True)
class AnomalyReport:
    """Ranked anomaly evidence for one bundle and one angle/view choice."""

    ids: tuple[str, ...]
    ranks: np.ndarray
    scores: np.ndarray
    delta_star: float
    zero_interval_mean: np.ndarray
    method: str
    auc: float | None
    flags: dict

    def to_dict(self) -> dict:
        d = {
            "ids": list(self.ids),
            "ranks": [None if np.isnan(r) else int(r) for r in self.ranks],
            "scores": [None if np.isnan(s) else float(s) for s in self.scores],
            "delta_star": self.delta_star,
            "zero_interval_mean": [
                None if np.isnan(z) else float(z) for z in self.zero_interval_mean
            ],
            "method": self.method,
            "flags": self.flags,
        }
        if self.auc is not None:
            d["auc"] = self.auc
        return d

    def to_json_bytes(self) -> bytes:
        return json.dumps(self.to_dict(), separators=(",", ":"), allow_nan=False).encode()

    def top(self, k: int = 10) -> list[tuple[str, int, float]]:
        """The k most anomalous (id, rank, score), rank ascending."""
        order = [
            (self.ids[i], int(self.ranks[i]), float(self.scores[i]))
            for i in np.argsort(self.ranks)
            if not np.isnan(self.ranks[i])
        ]
        return order[:k]


def build_report(
    bundle: DQFBundle,
    angle_index: int = 0,
    view: str = "q_bar",
    labels=None,
    delta: float | None = None,
) -> AnomalyReport:
    """Score one angle block of a bundle.

    With ``delta`` unset, the ranking delta is chosen automatically (first
    unique argmin); otherwise scores are read at the nearest grid point to
    the requested delta.  Lower scores rank as more anomalous either way.
    """
    if not 0 <= angle_index < len(bundle.angles):
        raise ValidationError(f"angle_index {angle_index} out of range")
    if view not in ("q_bar", "q_tilde"):
        raise ValidationError("view must be q_bar or q_tilde")
    block = bundle.angles[angle_index]
    matrix = block.q_bar if view == "q_bar" else block.q_tilde
    flags = dict(bundle.flags)
    if delta is None:
        ranking = rank_first_unique_argmin(matrix, bundle.delta_grid)
        delta_star_value = ranking.delta_star
        scores, ranks = ranking.scores, ranking.ranks
        method = f"first-unique-argmin[{view}]"
        if ranking.fallback:
            flags["delta_star_fallback"] = True
    else:
        scores = score_at_delta(matrix, bundle.delta_grid, delta)
        valid = ~np.isnan(scores)
        ranks = np.full(scores.shape, np.nan)
        ranks[valid] = rankdata(scores[valid], method="ordinal")
        col = int(np.argmin(np.abs(bundle.delta_grid - delta)))
        delta_star_value = float(bundle.delta_grid[col])
        method = f"score-at-delta[{view}]"
    auc_value = None
    if labels is not None:
        labels = np.asarray(labels, dtype=np.int64)
        valid = ~np.isnan(scores)
        auc_value = auc(scores[valid], labels[valid])
    return AnomalyReport(
        ids=bundle.ids,
        ranks=ranks,
        scores=scores,
        delta_star=delta_star_value,
        zero_interval_mean=block.zero_interval_mean,
        method=method,
        auc=auc_value,
        flags=flags,
    )
