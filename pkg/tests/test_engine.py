"""Engine tests: tip grids, pair depth profiles, aggregation, bundles."""
import math

import numpy as np
import pytest
from scipy.stats import norm, spearmanr

from dqfkit.engine import (
    DQFBundle,
    aggregate,
    compute_bundle,
    normalize,
    pair_depth_profile,
    pair_dqf,
    resolve_pairs,
    resolve_tip_spec,
    smooth_derivative,
    tip_grid,
    zero_run_fraction,
)
from dqfkit.geometry import (
    InnerProductView,
    ProjectionStats,
    pair_frame,
    projection_stats,
)
from dqfkit.model import (
    Config,
    Dataset,
    GramMatrix,
    TipDistributionSpec,
    ValidationError,
    sample_pairs,
)

PI4 = math.pi / 4


def _view(coords):
    coords = np.asarray(coords, dtype=np.float64)
    ids = tuple(f"p{k}" for k in range(coords.shape[0]))
    return InnerProductView(gram=coords @ coords.T, ids=ids)


def _hand_frame(h=0.5):
    # Two axis points at t = -1, 1 plus one point at perp height h over the
    # anchor and one far off-axis point; the pair (0, 1) spans the axis.
    pts = [[0.0, 0.0], [2.0, 0.0], [1.0, h], [1.0, 3.0]]
    return pair_frame(_view(pts), 0, 1)


# ------------------------------------------------------------- tip grids


def test_tip_grid_uniform_fixed_mid_quantiles():
    spec = TipDistributionSpec(variant="uniform_fixed", a=0.0, b=1.0)
    stats = ProjectionStats(t_min=0.0, t_max=1.0, winsorized_sd=1.0)
    tips = tip_grid(spec, stats, 4, r=1.0)
    assert np.allclose(tips, [0.125, 0.375, 0.625, 0.875])


def test_tip_grid_uniform_range():
    spec = TipDistributionSpec(variant="uniform_range")
    stats = ProjectionStats(t_min=-1.0, t_max=1.0, winsorized_sd=0.6)
    tips = tip_grid(spec, stats, 4, r=1.0)
    assert np.allclose(tips, [-0.75, -0.25, 0.25, 0.75])


def test_tip_grid_normal_adaptive_two_tips():
    spec = TipDistributionSpec(variant="normal_adaptive", c=1.0)
    stats = ProjectionStats(t_min=-3.0, t_max=3.0, winsorized_sd=2.0)
    tips = tip_grid(spec, stats, 2, r=3.0)
    want = 2.0 * norm.ppf(0.75)
    assert tips == pytest.approx([-want, want])
    assert want == pytest.approx(1.3490, abs=5e-5)


def test_tip_grid_uniform_robust_half_width():
    spec = TipDistributionSpec(variant="uniform_robust", c=2.0)
    stats = ProjectionStats(t_min=-5.0, t_max=5.0, winsorized_sd=0.5)
    tips = tip_grid(spec, stats, 4, r=5.0)
    assert np.allclose(tips, [-0.75, -0.25, 0.25, 0.75])


def test_tip_grid_default_scale_fills_missing_c():
    spec = TipDistributionSpec(variant="normal_adaptive")
    stats = ProjectionStats(t_min=-3.0, t_max=3.0, winsorized_sd=1.0)
    tips = tip_grid(spec, stats, 2, r=3.0, default_scale=2.0)
    assert tips == pytest.approx([-2.0 * norm.ppf(0.75), 2.0 * norm.ppf(0.75)])


def test_tip_grid_nudges_anchor_tip():
    spec = TipDistributionSpec(variant="uniform_fixed", a=-1.0, b=1.0)
    stats = ProjectionStats(t_min=-1.0, t_max=1.0, winsorized_sd=1.0)
    tips = tip_grid(spec, stats, 5, r=2.0)
    assert tips[2] == pytest.approx(2.0e-12)
    assert not np.any(tips == 0.0)


def test_tip_grid_degenerate_spread_two_point_fallback():
    stats = ProjectionStats(t_min=-1.0, t_max=1.0, winsorized_sd=0.0)
    for variant in ("uniform_robust", "normal_adaptive"):
        tips = tip_grid(TipDistributionSpec(variant=variant, c=1.0), stats, 5, r=2.0)
        assert np.allclose(np.unique(tips), [-2.0e-6, 2.0e-6])
    flat = ProjectionStats(t_min=0.5, t_max=0.5, winsorized_sd=0.0)
    tips = tip_grid(TipDistributionSpec(variant="uniform_range"), flat, 4, r=2.0)
    assert np.allclose(np.unique(tips), [-2.0e-6, 2.0e-6])


def test_tip_grid_unresolved_fixed_bounds_error():
    stats = ProjectionStats(t_min=-1.0, t_max=1.0, winsorized_sd=1.0)
    with pytest.raises(ValidationError):
        tip_grid(TipDistributionSpec(variant="uniform_fixed"), stats, 4, r=1.0)


# --------------------------------------------------- depth profiles, DQFs


def test_pair_depth_hand_instance():
    frame = _hand_frame()
    prof = pair_depth_profile(frame, np.array([-2.0]), PI4)
    assert prof.depths[0] == pytest.approx(0.25)
    prof = pair_depth_profile(frame, np.array([-0.25]), PI4)
    assert prof.depths[0] == 0.0


def test_depths_are_multiples_of_one_over_n(rng):
    coords = rng.normal(size=(11, 3))
    frame = pair_frame(_view(coords), 0, 5)
    tips = np.linspace(-2.0, 2.0, 17)
    prof = pair_depth_profile(frame, tips, PI4)
    counts = prof.depths * 11
    assert np.allclose(counts, np.round(counts))
    assert prof.depths.max() <= 0.5 + 1e-15


def test_pair_dqf_is_sorted_depths():
    frame = _hand_frame()
    prof = pair_depth_profile(frame, np.array([-0.9, -0.6, 0.3, 0.8]), PI4)
    assert np.array_equal(pair_dqf(prof), np.sort(prof.depths))


def test_pair_dqf_examples():
    frame = _hand_frame()
    prof = pair_depth_profile(frame, np.array([-0.9]), PI4)
    base = dict(i=prof.i, j=prof.j, alpha=prof.alpha)
    mk = lambda d: type(prof)(tip_coords=np.arange(len(d)), depths=np.asarray(d), **base)
    assert np.allclose(pair_dqf(mk([0.5, 0.25, 0.25, 0.5])), [0.25, 0.25, 0.5, 0.5])
    assert np.array_equal(pair_dqf(mk([0.0, 0.0, 0.0])), np.zeros(3))
    assert np.array_equal(pair_dqf(mk([0.0, 0.25, 0.0])), [0.0, 0.0, 0.25])


def test_pair_dqf_monotone_on_random_frames(rng):
    for _ in range(20):
        coords = rng.normal(size=(rng.integers(4, 15), 3))
        view = _view(coords)
        i, j = 0, int(rng.integers(1, coords.shape[0]))
        frame = pair_frame(view, i, j)
        stats = projection_stats(frame)
        tips = tip_grid(TipDistributionSpec(variant="uniform_range"), stats, 40, frame.r)
        q = pair_dqf(pair_depth_profile(frame, tips, PI4))
        assert np.all(np.diff(q) >= 0)
        assert q.max() <= 0.5


# ----------------------------------------------------------- zero run


def test_zero_run_hand_instance_both_grids():
    for m, tol in ((100, 0.01), (1000, 0.001)):
        frame = _hand_frame()
        stats = projection_stats(frame)
        tips = tip_grid(TipDistributionSpec(variant="uniform_range"), stats, m, frame.r)
        prof = pair_depth_profile(frame, tips, PI4)
        assert zero_run_fraction(tips, prof.depths) == pytest.approx(0.5, abs=tol)


def test_zero_run_monotone_in_gap():
    prev = 0.0
    for g in (1.0, 1.5, 2.0):
        frame = _hand_frame(h=0.5 * g)
        stats = projection_stats(frame)
        tips = tip_grid(TipDistributionSpec(variant="uniform_range"), stats, 100, frame.r)
        prof = pair_depth_profile(frame, tips, PI4)
        frac = zero_run_fraction(tips, prof.depths)
        assert frac >= prev
        prev = frac


def test_zero_run_edges():
    tips = np.array([-0.3, -0.1, 0.1, 0.3])
    assert zero_run_fraction(tips, np.array([0.1, 0.2, 0.2, 0.1])) == 0.0
    assert zero_run_fraction(tips, np.zeros(4)) == 1.0
    assert zero_run_fraction(tips, np.array([0.0, 0.25, 0.0, 0.0])) == 0.0
    assert zero_run_fraction(tips, np.array([0.25, 0.0, 0.0, 0.25])) == 0.5


# ------------------------------------------------- aggregate / normalize


def test_aggregate_examples():
    q = aggregate([np.array([0.0, 0.2]), np.array([0.1, 0.3])])
    assert np.allclose(q, [0.05, 0.25])
    single = np.array([0.1, 0.4])
    assert np.array_equal(aggregate([single]), single)
    with pytest.raises(ValidationError):
        aggregate([])


def test_normalize_examples():
    q_bar = np.array([[0.1, 0.2, 0.4], [0.0, 0.0, 0.0]])
    q_tilde, flagged = normalize(q_bar)
    assert np.allclose(q_tilde[0], [0.25, 0.5, 1.0])
    assert np.array_equal(q_tilde[1], np.zeros(3))
    assert flagged.tolist() == [False, True]


def test_normalized_rows_end_at_one(rng):
    q_bar = np.sort(rng.uniform(0.01, 0.5, size=(6, 20)), axis=1)
    q_tilde, flagged = normalize(q_bar)
    assert not flagged.any()
    assert np.allclose(q_tilde[:, -1], 1.0)


# ------------------------------------------------------------- smoothing


def test_smooth_derivative_linear_rows():
    # Linearity is preserved away from the reflective ends (window w=5,
    # so cells further than w from either end see no boundary at all).
    grid = np.arange(1, 101) / 100.0
    q = np.vstack([0.3 * grid, 0.3 * grid + 0.1])
    dq = smooth_derivative(q, grid, 0.05)
    assert np.allclose(dq[:, 5:-5], 0.3, atol=1e-9)
    assert np.all(np.isfinite(dq))


def test_smooth_derivative_constant_rows():
    grid = np.arange(1, 51) / 50.0
    dq = smooth_derivative(np.full((3, 50), 0.7), grid, 0.05)
    assert np.allclose(dq, 0.0, atol=1e-12)


def test_smooth_derivative_step_peak_location():
    grid = np.arange(1, 101) / 100.0
    q = (grid >= 0.5).astype(float)[None, :]
    dq = smooth_derivative(q, grid, 0.05)
    peak_delta = grid[int(np.argmax(dq[0]))]
    assert abs(peak_delta - 0.5) <= 0.03


def test_smooth_derivative_needs_five_points():
    grid = np.arange(1, 5) / 4.0
    with pytest.raises(ValidationError):
        smooth_derivative(np.zeros((1, 4)), grid, 0.05)


# ------------------------------------------------------- pair resolution


def test_resolve_pairs_replaces_coincident_partners():
    coords = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    view = _view(coords)
    cfg = Config(n_pairs=2, seed=5)
    plan = sample_pairs(4, cfg)
    sampled_twins = sum(
        1 for i, js in enumerate(plan.partners) for j in js if view.span2(i, j) == 0.0
    )
    partners, replaced, unpaired = resolve_pairs(view, plan)
    assert unpaired == []
    assert replaced == sampled_twins
    for i, js in enumerate(partners):
        assert len(js) == 2  # every slot refilled from the reserve stream
        assert all(view.span2(i, j) > 0 for j in js)


def test_resolve_pairs_all_coincident_marks_unpaired():
    coords = np.ones((3, 2))
    view = _view(coords)
    plan = sample_pairs(3, Config(n_pairs=2, seed=1))
    partners, _, unpaired = resolve_pairs(view, plan)
    assert partners == [[], [], []]
    assert unpaired == [0, 1, 2]


def test_resolve_tip_spec_envelope_matches_direct_scan():
    coords = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 0.5], [1.0, 3.0], [-1.0, 1.0]])
    view = _view(coords)
    cfg = Config(
        n_pairs=4, seed=2, tip_distribution=TipDistributionSpec(variant="uniform_fixed")
    )
    plan = sample_pairs(5, cfg)
    partners, _, _ = resolve_pairs(view, plan)
    spec = resolve_tip_spec(view, partners, cfg)
    lo = min(
        pair_frame(view, i, j).t.min() for i, js in enumerate(partners) for j in js
    )
    hi = max(
        pair_frame(view, i, j).t.max() for i, js in enumerate(partners) for j in js
    )
    assert (spec.a, spec.b) == (lo, hi)
    # already-resolved specs pass through untouched
    fixed = TipDistributionSpec(variant="uniform_fixed", a=-1.0, b=1.0)
    assert resolve_tip_spec(view, partners, cfg.with_overrides(tip_distribution=fixed)) is fixed


# ------------------------------------------------------------ full runs


def _random_dataset(rng, n=18, d=4):
    coords = rng.normal(size=(n, d))
    return Dataset(ids=tuple(f"x{k}" for k in range(n)), coords=coords)


def test_bundle_invariants_on_random_data(rng):
    ds = _random_dataset(rng)
    cfg = Config(n_pairs=6, m_tips=60, seed=9)
    bundle = compute_bundle(ds, cfg)
    assert bundle.ids == ds.ids
    assert np.allclose(bundle.delta_grid, np.arange(1, 61) / 60.0)
    for block in bundle.angles:
        assert np.all(np.diff(block.q_bar, axis=1) >= 0)
        assert block.q_bar.max() <= 0.5
        assert np.allclose(block.q_tilde[:, -1], 1.0)
        assert block.dq.min() >= -1e-9
        assert block.zero_interval_mean.shape == (18,)


def test_equilateral_triangle_rows_exchangeable():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
    ds = Dataset(ids=("a", "b", "c"), coords=tri)
    cfg = Config(
        angles=(PI4,),
        n_pairs=2,
        m_tips=50,
        tip_distribution=TipDistributionSpec(variant="uniform_range"),
        seed=3,
    )
    q = compute_bundle(ds, cfg).angles[0].q_bar
    assert np.allclose(q[0], q[1], atol=1e-12)
    assert np.allclose(q[0], q[2], atol=1e-12)


def test_gram_and_coordinate_paths_bit_identical(rng):
    ds = _random_dataset(rng, n=14, d=3)
    cfg = Config(n_pairs=5, m_tips=40, seed=4)
    from_coords = compute_bundle(ds, cfg)
    gm = GramMatrix(entries=ds.coords @ ds.coords.T)
    from_gram = compute_bundle(gm, cfg, ids=ds.ids)
    assert from_coords.to_json_bytes() == from_gram.to_json_bytes()


def test_worker_count_does_not_change_bundle(rng):
    ds = _random_dataset(rng, n=16, d=3)
    cfg = Config(n_pairs=5, m_tips=40, seed=6)
    reference = compute_bundle(ds, cfg).to_json_bytes()
    assert compute_bundle(ds, cfg, workers=1).to_json_bytes() == reference
    assert compute_bundle(ds, cfg, workers=4).to_json_bytes() == reference


def test_coarser_delta_grid_subsamples_quantiles(rng):
    ds = _random_dataset(rng, n=12, d=3)
    fine = compute_bundle(ds, Config(n_pairs=4, m_tips=100, seed=7))
    coarse = compute_bundle(
        ds, Config(n_pairs=4, m_tips=100, delta_grid_size=50, seed=7)
    )
    assert np.allclose(coarse.delta_grid, np.arange(1, 51) / 50.0)
    for fb, cb in zip(fine.angles, coarse.angles):
        assert np.array_equal(cb.q_bar, fb.q_bar[:, 1::2])


def test_bundle_json_round_trip(rng):
    ds = _random_dataset(rng, n=10, d=2)
    bundle = compute_bundle(ds, Config(n_pairs=4, m_tips=30, seed=8))
    clone = DQFBundle.from_json(bundle.to_json_bytes())
    assert clone.ids == bundle.ids
    assert np.array_equal(clone.delta_grid, bundle.delta_grid)
    for a, b in zip(clone.angles, bundle.angles):
        assert a.alpha == b.alpha
        assert np.array_equal(a.q_bar, b.q_bar)
        assert np.array_equal(a.q_tilde, b.q_tilde)
        assert np.array_equal(a.dq, b.dq)
    assert clone.config.to_dict() == bundle.config.to_dict()
    assert clone.flags == bundle.flags
    assert clone.to_json_bytes() == bundle.to_json_bytes()


def test_all_coincident_observations_flagged_not_ranked():
    ds = Dataset(ids=("a", "b", "c"), coords=np.ones((3, 2)))
    bundle = compute_bundle(ds, Config(n_pairs=2, m_tips=20, seed=1))
    assert bundle.flags["unranked_ids"] == ["a", "b", "c"]
    assert np.isnan(bundle.angles[0].q_bar).all()
    clone = DQFBundle.from_json(bundle.to_json_bytes())  # NaN -> null -> NaN
    assert np.isnan(clone.angles[0].q_bar).all()


def test_embedding_into_higher_dimension_is_invisible(rng):
    # An orthogonal embedding of planar data into d=10 leaves every inner
    # product unchanged, so the DQFs must match to numerical noise.
    coords2 = rng.normal(size=(20, 2))
    q_mat = np.linalg.qr(rng.normal(size=(10, 2))).Q
    coords10 = coords2 @ q_mat.T
    cfg = Config(
        n_pairs=8,
        m_tips=60,
        tip_distribution=TipDistributionSpec(variant="uniform_range"),
        seed=12,
    )
    ids = tuple(f"x{k}" for k in range(20))
    low = compute_bundle(Dataset(ids=ids, coords=coords2), cfg)
    high = compute_bundle(Dataset(ids=ids, coords=coords10), cfg)
    for bl, bh in zip(low.angles, high.angles):
        assert np.allclose(bl.q_bar, bh.q_bar, atol=1e-9)
        assert np.allclose(bl.q_tilde, bh.q_tilde, atol=1e-9)


def test_small_delta_slope_tracks_density(rng):
    # Self-anchored curves over a 2-D Gaussian: the early slope of q_bar
    # should order observations like the density at the anchor does.
    coords = rng.normal(size=(250, 2))
    ds = Dataset(ids=tuple(f"x{k}" for k in range(250)), coords=coords)
    cfg = Config(
        angles=(PI4,),
        n_pairs=40,
        m_tips=100,
        anchor="self",
        tip_distribution=TipDistributionSpec(variant="uniform_fixed"),
        seed=11,
    )
    bundle = compute_bundle(ds, cfg)
    k = 9  # delta = 0.10
    slope = bundle.angles[0].q_bar[:, k] / bundle.delta_grid[k]
    density = np.exp(-0.5 * np.sum(coords**2, axis=1))
    rho = spearmanr(slope, density).statistic
    assert rho > 0.8
