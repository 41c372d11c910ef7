import numpy as np
import pytest

from apd.generators import (
    SubstitutionSystem,
    fibonacci_chain,
    fibonacci_sub,
    period_doubling,
    thue_morse,
)
from apd.pointset import Box, PointPattern
from apd.proximal import (
    agreement_radius,
    coincidence_rank,
    column_analysis,
    column_cardinalities,
    proximality_probe,
    substitution_height,
)


# ---------------------------------------------------------------------------
# column analysis


def test_thue_morse_columns_power_one():
    assert column_cardinalities(thue_morse(), 1) == [2, 2, 2, 2]


def test_period_doubling_columns_power_one():
    # images (ab, aa): coincidence at position 0
    assert column_cardinalities(period_doubling(), 1) == [1, 2]


def test_column_analysis_requires_constant_length():
    with pytest.raises(ValueError, match="constant length"):
        column_cardinalities(fibonacci_sub(), 1)


def test_min_cardinality_non_increasing():
    for make in (thue_morse, period_doubling):
        minima = column_analysis(make(), power_max=6).min_cardinalities()
        assert all(b <= a for a, b in zip(minima, minima[1:]))


def test_coincidence_propagates():
    minima = column_analysis(period_doubling(), power_max=6).min_cardinalities()
    assert minima[0] == 1
    assert len(minima) == 1  # analysis stops once a coincidence appears


# ---------------------------------------------------------------------------
# coincidence rank


def test_thue_morse_rank_two_certified():
    rank = coincidence_rank(thue_morse())
    assert rank.cr_estimate == 2
    assert rank.certified
    assert rank.height == 1


def test_period_doubling_rank_one_certified():
    rank = coincidence_rank(period_doubling())
    assert rank.cr_estimate == 1
    assert rank.certified


def test_rank_requires_constant_length():
    with pytest.raises(ValueError, match="constant length"):
        coincidence_rank(fibonacci_sub())


def test_rank_requires_height_one():
    periodicish = SubstitutionSystem("ab", {"a": "ab", "b": "ab"})
    with pytest.raises(ValueError, match="pure base required.*height 2"):
        coincidence_rank(periodicish)


def test_rank_estimate_at_least_one_and_uncertified_note():
    # 3 letters, columns with cardinality 2: neither coincidence nor permutation
    s = SubstitutionSystem("abc", {"a": "ab", "b": "ca", "c": "cb"})
    if substitution_height(s) == 1:
        rank = coincidence_rank(s, power_max=4)
        assert rank.cr_estimate >= 1
        if rank.cr_estimate > 1:
            assert not rank.certified
            assert "upper bound" in rank.note


def test_height_values():
    assert substitution_height(thue_morse()) == 1
    assert substitution_height(period_doubling()) == 1


# ---------------------------------------------------------------------------
# agreement radius


def tm_fixed_point(left, right, iterations=6):
    return thue_morse().realize_two_sided(
        left, right, iterations, select={"1"}, label=f"tm({left}|{right})"
    )


def test_agreement_identical_patterns_capped():
    a = tm_fixed_point("0", "0")
    ar = agreement_radius(a, a, 10.0)
    assert ar.capped
    assert ar.radius == pytest.approx(ar.cap)


def test_agreement_differs_at_center():
    win = Box((-5.0,), (5.0,))
    a = PointPattern(1, [0.0, 2.0], win)
    b = PointPattern(1, [1.0, 2.0], win)
    assert agreement_radius(a, b, 0.0).radius == 0.0


def test_agreement_symmetric():
    a = tm_fixed_point("0", "0")
    b = tm_fixed_point("1", "0")
    for c in (0.0, 17.0, -33.0, 250.0):
        assert agreement_radius(a, b, c).radius == agreement_radius(b, a, c).radius


def test_agreement_center_outside_window():
    a = tm_fixed_point("0", "0", 4)
    b = tm_fixed_point("1", "0", 4)
    with pytest.raises(ValueError, match="outside"):
        agreement_radius(a, b, 10_000.0)


def test_agreement_grows_rightward_for_one_sided_pair():
    # (0|0) and (1|0) share the right half-line: radius ~ c + 1 at center c > 0
    a = tm_fixed_point("0", "0")
    b = tm_fixed_point("1", "0")
    for c in (5.0, 50.0, 500.0):
        ar = agreement_radius(a, b, c)
        assert not ar.capped
        assert ar.radius == pytest.approx(c + 1.0, abs=1e-9)


def test_agreement_periodic_structure_of_good_centers():
    # centers with agreement radius >= 4 exist but do not fill the line
    a = tm_fixed_point("0", "0")
    b = tm_fixed_point("1", "0")
    radii = {c: agreement_radius(a, b, float(c)).radius for c in range(-64, 65)}
    assert any(r >= 4.0 for r in radii.values())
    assert any(r < 4.0 for r in radii.values())


def test_complementary_fixed_points_never_agree():
    # seeds (0|0) vs (1|1) give letter-complementary sequences
    a = tm_fixed_point("0", "0")
    b = tm_fixed_point("1", "1")
    for c in (-100.0, 0.0, 37.0, 400.0):
        assert agreement_radius(a, b, c).radius <= 1.0


# ---------------------------------------------------------------------------
# proximality probe


def test_probe_self_copy_is_proximal():
    a = tm_fixed_point("0", "0")
    rep = proximality_probe(a, a, [(-100.0,), (0.0,), (100.0,)])
    assert rep.verdict == "proximal_evidence"


def test_probe_one_sided_pair_rightward_proximal():
    a = tm_fixed_point("0", "0", 7)
    b = tm_fixed_point("1", "0", 7)
    schedule = [(8.0 * k,) for k in range(1, 40)]
    rep = proximality_probe(a, b, schedule)
    assert rep.verdict == "proximal_evidence"
    assert rep.steps_completed == 39


def test_probe_fibonacci_shift_distal():
    f = fibonacci_chain(14)
    g = f.translate(1.0)
    lo = max(f.window.lo[0], g.window.lo[0])
    hi = min(f.window.hi[0], g.window.hi[0])
    centers = [(lo + (hi - lo) * t,) for t in np.linspace(0.2, 0.8, 25)]
    rep = proximality_probe(f, g, centers)
    assert rep.verdict == "distal_evidence"


def test_probe_window_exhaustion_inconclusive():
    # identical patterns, but the window cap (56 at this center) blocks the
    # growth the later schedule steps demand
    a = tm_fixed_point("0", "0", 4)   # window [-256, 256]
    rep = proximality_probe(a, a, [(200.0,)] * 80)
    assert rep.verdict == "inconclusive"
    assert "exhausted" in rep.detail


def test_probe_empty_schedule_rejected():
    a = tm_fixed_point("0", "0", 4)
    with pytest.raises(ValueError, match="empty"):
        proximality_probe(a, a, [])
