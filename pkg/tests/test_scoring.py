"""Scoring tests: ranking rule, score lookup, AUC, report assembly."""
import json
import math

import numpy as np
import pytest

from dqfkit.engine import compute_bundle, pair_depth_profile
from dqfkit.geometry import InnerProductView, pair_frame
from dqfkit.model import Config, Dataset, TipDistributionSpec, ValidationError
from dqfkit.scoring import (
    AnomalyReport,
    auc,
    build_report,
    rank_first_unique_argmin,
    score_at_delta,
    zero_interval,
)

GRID3 = np.array([0.25, 0.5, 1.0])


# ------------------------------------------------------------ zero interval


def test_zero_interval_reads_profile():
    pts = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 0.5], [1.0, 3.0]])
    view = InnerProductView(gram=pts @ pts.T, ids=("a", "b", "c", "d"))
    frame = pair_frame(view, 0, 1)
    tips = np.linspace(-0.99, 0.99, 100)
    prof = pair_depth_profile(frame, tips, math.pi / 4)
    assert zero_interval(prof) == pytest.approx(0.5, abs=0.01)


# ------------------------------------------------------------------ ranking


def test_rank_skips_tied_column():
    matrix = np.array([[0.0, 0.1, 0.2], [0.0, 0.05, 0.15], [0.01, 0.2, 0.3]])
    res = rank_first_unique_argmin(matrix, GRID3)
    assert res.delta_star == 0.5
    assert not res.fallback
    assert res.ranks.tolist() == [2.0, 1.0, 3.0]
    assert np.allclose(res.scores, [0.1, 0.05, 0.2])


def test_rank_strict_minimum_wins_at_first_grid_point():
    matrix = np.array([[0.0, 0.1, 0.2], [0.05, 0.2, 0.3], [0.07, 0.25, 0.4]])
    res = rank_first_unique_argmin(matrix, GRID3)
    assert res.delta_star == 0.25
    assert res.ranks[0] == 1.0
    assert not res.fallback


def test_rank_identical_rows_falls_back_to_last_delta():
    matrix = np.tile(np.array([0.1, 0.2, 0.3]), (4, 1))
    res = rank_first_unique_argmin(matrix, GRID3)
    assert res.fallback
    assert res.delta_star == 1.0  # largest delta among equally-tied columns


def test_rank_ignores_nan_rows():
    matrix = np.array([[0.0, 0.1], [np.nan, np.nan], [0.05, 0.3]])
    res = rank_first_unique_argmin(matrix, np.array([0.5, 1.0]))
    assert np.isnan(res.ranks[1])
    assert sorted(r for r in res.ranks if not np.isnan(r)) == [1.0, 2.0]


def test_rank_requires_a_rankable_row():
    with pytest.raises(ValidationError):
        rank_first_unique_argmin(np.full((2, 3), np.nan), GRID3)


# ------------------------------------------------------------ score lookup


def test_score_at_delta_nearest_grid_point():
    grid = np.array([0.25, 0.5, 0.75, 1.0])
    matrix = np.array([[1.0, 2.0, 3.0, 4.0], [5.0, 6.0, 7.0, 8.0]])
    assert np.array_equal(score_at_delta(matrix, grid, 0.42), [2.0, 6.0])
    assert np.array_equal(score_at_delta(matrix, grid, 0.75), [3.0, 7.0])


def test_score_at_delta_out_of_range():
    grid = np.array([0.25, 0.5, 0.75, 1.0])
    matrix = np.zeros((2, 4))
    for bad in (0.1, 1.2):
        with pytest.raises(ValidationError):
            score_at_delta(matrix, grid, bad)


def test_score_at_delta_one_warns_constant():
    grid = np.array([0.5, 1.0])
    q_tilde = np.array([[0.4, 1.0], [0.7, 1.0]])
    with pytest.warns(UserWarning, match="constant"):
        scores = score_at_delta(q_tilde, grid, 1.0)
    assert np.array_equal(scores, [1.0, 1.0])


# ---------------------------------------------------------------------- AUC


def test_auc_perfect_separation():
    assert auc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0]) == 1.0


def test_auc_half_credit_for_cross_class_tie():
    assert auc([0.1, 0.5, 0.5, 0.9], [1, 1, 0, 0]) == pytest.approx(0.875)


def test_auc_random_labels_near_half(rng):
    scores = rng.normal(size=24)
    vals = []
    for _ in range(400):
        labels = np.zeros(24, dtype=int)
        labels[rng.choice(24, size=6, replace=False)] = 1
        vals.append(auc(scores, labels))
    assert abs(np.mean(vals) - 0.5) < 0.02


def test_auc_invariant_to_monotone_transforms(rng):
    scores = rng.normal(size=30)
    labels = (rng.random(30) < 0.3).astype(int)
    labels[0] = 1
    labels[1] = 0
    base = auc(scores, labels)
    assert auc(3.0 * scores + 2.0, labels) == pytest.approx(base)
    assert auc(np.exp(scores), labels) == pytest.approx(base)


def test_auc_single_class_error():
    with pytest.raises(ValidationError):
        auc([0.1, 0.2], [1, 1])


# -------------------------------------------------------------- the report


def _bundle(rng, n=20, outlier=None, seed=13):
    coords = rng.normal(size=(n, 3))
    if outlier is not None:
        coords[-1] = outlier
    ds = Dataset(ids=tuple(f"x{k}" for k in range(n)), coords=coords)
    cfg = Config(angles=(math.pi / 4,), n_pairs=8, m_tips=50, seed=seed)
    return compute_bundle(ds, cfg), coords


def test_build_report_ranks_are_permutation(rng):
    bundle, _ = _bundle(rng)
    report = build_report(bundle)
    assert sorted(report.ranks.tolist()) == list(range(1, 21))
    assert report.method.startswith("first-unique-argmin")
    assert report.delta_star in bundle.delta_grid


def test_build_report_far_outlier_ranks_first(rng):
    bundle, _ = _bundle(rng, outlier=np.array([40.0, 40.0, 40.0]))
    report = build_report(bundle)
    assert report.top(1)[0][0] == "x19"
    assert report.top(1)[0][1] == 1


def test_build_report_fixed_delta_path(rng):
    bundle, _ = _bundle(rng)
    report = build_report(bundle, view="q_tilde", delta=0.42)
    assert report.method == "score-at-delta[q_tilde]"
    col = int(np.argmin(np.abs(bundle.delta_grid - 0.42)))
    assert report.delta_star == bundle.delta_grid[col]
    assert np.array_equal(report.scores, bundle.angles[0].q_tilde[:, col])


def test_build_report_auc_with_labels(rng):
    bundle, _ = _bundle(rng, outlier=np.array([40.0, 40.0, 40.0]))
    labels = np.zeros(20, dtype=int)
    labels[-1] = 1
    report = build_report(bundle, labels=labels)
    assert report.auc == 1.0


def test_build_report_fallback_flag_on_exchangeable_rows():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
    ds = Dataset(ids=("a", "b", "c"), coords=tri)
    cfg = Config(
        angles=(math.pi / 4,),
        n_pairs=2,
        m_tips=20,
        tip_distribution=TipDistributionSpec(variant="uniform_range"),
        seed=3,
    )
    report = build_report(compute_bundle(ds, cfg))
    assert report.flags.get("delta_star_fallback") is True


def test_build_report_argument_validation(rng):
    bundle, _ = _bundle(rng)
    with pytest.raises(ValidationError):
        build_report(bundle, angle_index=5)
    with pytest.raises(ValidationError):
        build_report(bundle, view="dq")


def test_report_json_schema(rng):
    bundle, _ = _bundle(rng)
    labels = np.zeros(20, dtype=int)
    labels[0] = 1
    report = build_report(bundle, labels=labels)
    payload = json.loads(report.to_json_bytes())
    assert set(payload) == {
        "ids",
        "ranks",
        "scores",
        "delta_star",
        "zero_interval_mean",
        "method",
        "flags",
        "auc",
    }
    assert payload["ids"] == list(bundle.ids)
    assert len(payload["ranks"]) == 20
    no_labels = json.loads(build_report(bundle).to_json_bytes())
    assert "auc" not in no_labels


def test_report_top_k_ordering(rng):
    bundle, _ = _bundle(rng)
    report = build_report(bundle)
    top = report.top(5)
    assert [t[1] for t in top] == [1, 2, 3, 4, 5]
    assert all(top[i][2] <= top[i + 1][2] for i in range(4))


def test_ranking_scale_equivariant(rng):
    # Doubling the coordinates doubles every projection, so counts, depths
    # and the chosen delta are untouched (a power of two keeps the tip
    # arithmetic exact).
    coords = rng.normal(size=(15, 3))
    ids = tuple(f"x{k}" for k in range(15))
    cfg = Config(angles=(math.pi / 4,), n_pairs=6, m_tips=40, seed=5)
    base = build_report(compute_bundle(Dataset(ids=ids, coords=coords), cfg))
    doubled = build_report(compute_bundle(Dataset(ids=ids, coords=2.0 * coords), cfg))
    assert base.delta_star == doubled.delta_star
    assert np.array_equal(base.ranks, doubled.ranks)
    assert np.array_equal(base.scores, doubled.scores)
