import math

import numpy as np
import pytest

from apd.generators import TAU, fibonacci_chain, lattice, thue_morse_ones
from apd.pointset import (
    Box,
    PointPattern,
    covering_radius,
    difference_set,
    epsilon_dual,
    load_pattern,
    meyer_check,
    min_gap,
    patch_census,
    r_patch,
    repetitivity_radius,
    save_pattern,
    window_ladder,
)

import oracles


def pattern_1d(xs, lo, hi, label=""):
    return PointPattern(1, np.asarray(xs, dtype=float), Box((lo,), (hi,)), label)


def jittered_lattice(n, amp=0.3, seed=7):
    rng = np.random.default_rng(seed)
    xs = np.arange(n) + amp * rng.random(n)
    return pattern_1d(xs, -1.0, n + 1.0, "jittered")


# ---------------------------------------------------------------------------
# construction invariants


def test_points_sorted_and_deduplicated():
    p = pattern_1d([3.0, 1.0, 1.0 + 1e-12, 2.0], 0.0, 5.0)
    assert len(p) == 3
    assert np.all(np.diff(p.coords) > 0)


def test_point_outside_window_rejected():
    with pytest.raises(ValueError, match="outside window"):
        pattern_1d([0.0, 7.0], 0.0, 5.0)


def test_dimension_checks():
    with pytest.raises(ValueError):
        PointPattern(3, [[0.0] * 3], Box((0.0,) * 3, (1.0,) * 3))
    with pytest.raises(ValueError):
        PointPattern(2, [[0.0, 0.0]], Box((0.0,), (1.0,)))


def test_points_are_immutable():
    p = pattern_1d([0.0, 1.0], 0.0, 2.0)
    with pytest.raises(ValueError):
        p.points[0, 0] = 5.0


def test_min_gap_positive_after_construction():
    p = pattern_1d([0.0, 1e-12, 1.0], 0.0, 2.0)
    assert min_gap(p) > 0


# ---------------------------------------------------------------------------
# min_gap


def test_min_gap_integer_lattice():
    z = lattice(1, 1.0, Box((0.0,), (100.0,)))
    assert min_gap(z) == 1.0


def test_min_gap_direct():
    p = pattern_1d([0.0, 0.5, 3.0], 0.0, 3.0)
    assert min_gap(p) == 0.5


def test_min_gap_fibonacci_is_short_tile():
    f = fibonacci_chain(10)
    assert min_gap(f) == pytest.approx(1.0, abs=1e-9)


def test_min_gap_needs_two_points():
    p = pattern_1d([1.0], 0.0, 2.0)
    with pytest.raises(ValueError, match="insufficient points"):
        min_gap(p)


# ---------------------------------------------------------------------------
# covering radius


def test_covering_radius_integer_lattice():
    z = lattice(1, 1.0, Box((0.0,), (100.0,)))
    lo, hi = covering_radius(z, grid_step=0.05)
    assert lo <= 0.5 <= hi
    assert hi - lo <= 0.05 + 1e-12


def test_covering_radius_fibonacci_half_long_tile():
    f = fibonacci_chain(12)
    lo, hi = covering_radius(f, grid_step=0.05)
    assert lo <= TAU / 2 <= hi + 0.05


def test_covering_radius_single_point_margin_formula():
    # point at the center of [0, 8]: the margin-limited covering radius is
    # L/4, attained a quarter of the way to the boundary
    p = pattern_1d([4.0], 0.0, 8.0)
    lo, hi = covering_radius(p, grid_step=0.01)
    assert lo <= 2.0 <= hi
    oracle = oracles.brute_covering_lower([(4.0,)], (0.0,), (8.0,), 0.01)
    assert lo == pytest.approx(oracle, abs=1e-12)


def test_covering_radius_empty_pattern():
    p = PointPattern(1, [], Box((0.0,), (1.0,)))
    with pytest.raises(ValueError, match="empty"):
        covering_radius(p)


# ---------------------------------------------------------------------------
# patches and censuses


def test_r_patch_integer_lattice():
    z = lattice(1, 1.0, Box((0.0,), (10.0,)))
    patch = r_patch(z, 5, 2.5)
    assert np.allclose(patch.relative_points[:, 0], [-2, -1, 0, 1, 2])


def test_r_patch_zero_radius():
    z = lattice(1, 1.0, Box((0.0,), (10.0,)))
    patch = r_patch(z, 4, 0.0)
    assert np.allclose(patch.relative_points, [[0.0]])


def test_r_patch_boundary_rejected():
    z = lattice(1, 1.0, Box((0.0,), (10.0,)))
    with pytest.raises(ValueError, match="anchor too close to boundary"):
        r_patch(z, 0, 2.0)


def test_r_patch_thue_morse_adjacent_pair():
    # sigma^3(0) = 0110100110010110... contains "11"; radius-1 patches at a
    # paired site are {0,1} or {-1,0}
    tm = thue_morse_ones(3)
    idx = [i for i, x in enumerate(tm.coords) if x == 1.0][0]
    patch = r_patch(tm, idx, 1.0)
    assert np.allclose(patch.relative_points[:, 0], [0.0, 1.0])


def test_patch_census_lattice_single_class():
    z = lattice(1, 1.0, Box((0.0,), (60.0,)))
    for radius in (0.5, 1.5, 4.5):
        census = patch_census(z, radius)
        assert census.class_count == 1
    z2 = lattice(2, (1.0, 1.0), Box((0.0, 0.0), (12.0, 12.0)))
    assert patch_census(z2, 1.5).class_count == 1


def test_patch_census_every_interior_anchor_classified():
    tm = thue_morse_ones(6)
    census = patch_census(tm, 4.0)
    members = np.concatenate([c.members for c in census.classes])
    assert sorted(members) == sorted(census.anchors)


def test_patch_census_thue_morse_count_stable_in_window():
    small = thue_morse_ones(6)
    big = thue_morse_ones(8)
    c_small = patch_census(small, 1.5).class_count
    c_big = patch_census(big, 1.5).class_count
    assert c_small == c_big
    assert c_small <= 8


def test_patch_census_class_count_monotone_in_radius():
    tm = thue_morse_ones(7)
    counts = [patch_census(tm, r).class_count for r in (0.5, 1.5, 2.5, 4.0, 8.0)]
    assert counts == sorted(counts)


def test_patch_census_flags_flc_failure():
    # jittered points: class count grows with the sample instead of saturating
    small = jittered_lattice(80)
    big = jittered_lattice(160)
    c_small = patch_census(small, 2.0)
    c_big = patch_census(big, 2.0)
    assert c_small.class_count == len(c_small.anchors)
    assert c_big.class_count == len(c_big.anchors)
    assert c_big.class_count > c_small.class_count


def test_patch_census_no_interior_anchors():
    p = pattern_1d([0.5], 0.0, 1.0)
    with pytest.raises(ValueError, match="no interior anchors"):
        patch_census(p, 3.0)


# ---------------------------------------------------------------------------
# repetitivity


def test_repetitivity_integer_lattice():
    z = lattice(1, 1.0, Box((0.0,), (40.0,)))
    rep = repetitivity_radius(z, 1.0, grid_step=0.05)
    assert rep.verdict == "repetitive"
    # unit intervals contain an integer: ball radius 1/2
    assert rep.lower <= 0.5 <= rep.upper + 0.05


def test_repetitivity_thue_morse_stable():
    r6 = repetitivity_radius(thue_morse_ones(6), 2.0, grid_step=0.1)
    r7 = repetitivity_radius(thue_morse_ones(7), 2.0, grid_step=0.1)
    assert r6.verdict == "repetitive"
    assert r7.verdict == "repetitive"
    assert abs(r6.upper - r7.upper) <= 0.2 + r6.upper * 0.1


def test_repetitivity_isolated_configuration_flagged():
    xs = [0.0] + list(range(10, 60))
    p = pattern_1d(xs, -3.5, 60.0)
    rep = repetitivity_radius(p, 3.0, grid_step=0.1)
    assert rep.verdict == "not_repetitive"
    assert rep.singleton_classes


# ---------------------------------------------------------------------------
# difference set


def test_difference_set_integer_lattice():
    z = lattice(1, 1.0, Box((0.0,), (100.0,)))
    delta = difference_set(z, 3.0)
    assert np.allclose(delta.vectors[:, 0], [-3, -2, -1, 0, 1, 2, 3])


def test_difference_set_thue_morse_integer_vectors():
    tm = thue_morse_ones(7)
    delta = difference_set(tm, 5.0)
    assert np.all(np.abs(delta.vectors - np.round(delta.vectors)) <= 1e-9)
    assert np.max(np.abs(delta.vectors)) <= 5.0 + 1e-9


def test_difference_set_symmetric_with_zero():
    f = fibonacci_chain(10)
    delta = difference_set(f, 4.0)
    v = delta.vectors[:, 0]
    assert 0.0 in v
    for x in v:
        assert np.min(np.abs(v + x)) <= 1e-9
    # minimal positive element of the Fibonacci difference set is 1
    pos = v[v > 1e-9]
    assert pos.min() == pytest.approx(1.0, abs=1e-9)


def test_difference_set_cutoff_validation():
    z = lattice(1, 1.0, Box((0.0,), (10.0,)))
    with pytest.raises(ValueError):
        difference_set(z, 0.0)


# ---------------------------------------------------------------------------
# meyer check


def test_meyer_integer_lattice_passes():
    z = lattice(1, 1.0, Box((0.0,), (800.0,)))
    res = meyer_check(z, 5.0)
    assert res.verdict == "pass"
    assert res.delta_min_gap == pytest.approx(1.0, abs=1e-9)


def test_meyer_jittered_lattice_fails():
    p = jittered_lattice(1024)
    res = meyer_check(p, 5.0)
    assert res.verdict == "fail"
    assert "gap" in res.detail


def test_meyer_small_sample_inconclusive():
    p = pattern_1d([0.0, 1.0, 2.0, 3.0], 0.0, 3.0)
    res = meyer_check(p, 2.0)
    assert res.verdict == "inconclusive"


# ---------------------------------------------------------------------------
# epsilon dual


def test_epsilon_dual_integer_lattice():
    z = lattice(1, 1.0, Box((0.0,), (200.0,)))
    grid = np.arange(-2.0, 2.0 + 1e-12, 0.01)
    res = epsilon_dual(z, 0.1, grid)
    accepted = res.accepted_k()[:, 0]
    # accepted k cluster around integers, one cluster per integer
    assert all(min(abs(k - m) for m in (-2, -1, 0, 1, 2)) < 0.02 for k in accepted)
    assert np.min(np.abs(accepted)) <= 1e-9  # k = 0 accepted (grid hits it within fp)
    assert res.largest_gap == pytest.approx(1.0, abs=0.05)
    # symmetry about 0
    for k in accepted:
        assert np.min(np.abs(accepted + k)) <= 1e-9


def test_epsilon_dual_thue_morse_contains_integers():
    tm = thue_morse_ones(6)
    res = epsilon_dual(tm, 0.01, np.arange(0.0, 3.0 + 1e-12, 0.5))
    accepted = res.accepted_k()[:, 0]
    for m in (0.0, 1.0, 2.0, 3.0):
        assert m in accepted


def test_epsilon_dual_fibonacci_relatively_dense():
    f = fibonacci_chain(12)   # 233 points
    grid = np.arange(0.0, 10.0 + 1e-12, 1e-4)
    res = epsilon_dual(f, 0.5, grid)
    accepted = res.accepted_k()[:, 0]
    assert len(accepted) >= 3
    assert res.largest_gap <= 4.0


def test_epsilon_dual_validation():
    z = lattice(1, 1.0, Box((0.0,), (10.0,)))
    with pytest.raises(ValueError):
        epsilon_dual(z, 2.5, [0.0, 1.0])
    with pytest.raises(ValueError):
        epsilon_dual(z, 0.5, [])


# ---------------------------------------------------------------------------
# ladders, io


def test_window_ladder_nested():
    f = fibonacci_chain(12)
    ladder = window_ladder(f, steps=4, ratio=2.0)
    assert len(ladder) == 4
    for small, big in zip(ladder, ladder[1:]):
        assert big.contains_box(small)
    assert ladder[-1].contains_box(f.window)


def test_pattern_json_roundtrip(tmp_path):
    f = fibonacci_chain(9)
    path = tmp_path / "fib.json"
    save_pattern(f, str(path))
    g = load_pattern(str(path))
    assert g.dimension == f.dimension
    assert np.array_equal(g.points, f.points)
    assert g.window == f.window
    assert g.label == f.label


def test_pattern_text_roundtrip(tmp_path):
    z = lattice(2, (1.0, 2.0), Box((0.0, 0.0), (4.0, 4.0)))
    path = tmp_path / "z.txt"
    save_pattern(z, str(path), fmt="text")
    g = load_pattern(str(path))
    assert np.array_equal(g.points, z.points)
    assert g.window == z.window
