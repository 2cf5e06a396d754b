import numpy as np
import pytest
from scipy import stats as sps

from pggnudge import stats
from pggnudge.game import ContractError

from conftest import make_record


# ---------------------------------------------------------------------------
# Mann-Whitney U
# ---------------------------------------------------------------------------

def test_disjoint_samples_exact():
    u, p = stats.mann_whitney_u([1, 2, 3], [4, 5, 6])
    assert u == 0.0
    assert p == pytest.approx(0.1, abs=1e-12)


def test_identical_samples():
    u, p = stats.mann_whitney_u([1, 2, 3], [1, 2, 3])
    assert u == pytest.approx(4.5)
    assert p >= 0.99


def test_swap_symmetry(rng):
    for _ in range(50):
        a = rng.integers(0, 10, size=rng.integers(2, 7))
        b = rng.integers(0, 10, size=rng.integers(2, 7))
        u_ab, p_ab = stats.mann_whitney_u(a, b)
        u_ba, p_ba = stats.mann_whitney_u(b, a)
        assert u_ab + u_ba == pytest.approx(len(a) * len(b))
        assert p_ab == pytest.approx(p_ba, abs=1e-12)


def test_u_in_range(rng):
    for _ in range(100):
        a = rng.normal(size=rng.integers(2, 12))
        b = rng.normal(size=rng.integers(2, 12))
        u, p = stats.mann_whitney_u(a, b)
        assert 0.0 <= u <= len(a) * len(b)
        assert 0.0 <= p <= 1.0


def test_exact_vs_approx_agreement(rng):
    # the acceptance suite runs 1000 trials; a subset here.  Integer draws
    # from a wide range keep tie patterns mild; under heavy ties the exact
    # tail is a step function no smooth approximation can track to 0.02.
    for _ in range(200):
        a = rng.integers(0, 1000, size=8)
        b = rng.integers(0, 1000, size=8)
        _, p_exact = stats.mann_whitney_u(a, b, method="exact")
        _, p_approx = stats.mann_whitney_u(a, b, method="approx")
        assert abs(p_exact - p_approx) < 0.02


def test_matches_scipy_asymptotic(rng):
    for _ in range(25):
        a = rng.normal(size=40)
        b = rng.normal(0.3, 1.0, size=35)
        u, p = stats.mann_whitney_u(a, b)
        ref = sps.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic")
        assert u == pytest.approx(float(ref.statistic))
        assert p == pytest.approx(float(ref.pvalue), abs=1e-9)


def test_matches_scipy_exact_untied(rng):
    for _ in range(25):
        a = rng.normal(size=6)
        b = rng.normal(size=7)
        u, p = stats.mann_whitney_u(a, b, method="exact")
        ref = sps.mannwhitneyu(a, b, alternative="two-sided", method="exact")
        assert u == pytest.approx(float(ref.statistic))
        assert p == pytest.approx(float(ref.pvalue), abs=1e-12)


def test_degenerate_all_tied():
    u, p = stats.mann_whitney_u([2, 2, 2], [2, 2, 2])
    assert p == 1.0


def test_empty_sample_rejected():
    with pytest.raises(ContractError):
        stats.mann_whitney_u([], [1, 2])
    with pytest.raises(ContractError):
        stats.mann_whitney_u([1], [])


def test_unknown_method_rejected():
    with pytest.raises(ContractError):
        stats.mann_whitney_u([1], [2], method="bootstrap")


# ---------------------------------------------------------------------------
# summaries
# ---------------------------------------------------------------------------

def test_summarize_all_ones():
    rec = make_record(np.ones((25, 4)))
    summary = stats.summarize([rec])
    assert summary.sum_contribution_mean == 100.0
    assert summary.prop_over_threshold_mean == 1.0
    assert summary.cc_sum_contribution_mean == 100.0
    np.testing.assert_allclose(summary.cc_per_round_mean, 1.0)
    assert summary.planner_per_round_mean is None


def test_summarize_all_zero():
    summary = stats.summarize([make_record(np.zeros((25, 4)))])
    assert summary.sum_contribution_mean == 0.0
    assert summary.prop_over_threshold_mean == 0.0


def test_summarize_threshold_is_strict():
    summary = stats.summarize([make_record(np.full((25, 4), 0.5))])
    assert summary.prop_over_threshold_mean == 0.0


def test_summarize_splits_roles():
    c = np.zeros((4, 4))
    c[:, 3] = 1.0  # planner contributes everything, cooperators nothing
    rec = make_record(c, roster=("cc", "cc", "cc", "planner-sum"))
    summary = stats.summarize([rec])
    assert summary.sum_contribution_mean == 4.0
    assert summary.cc_sum_contribution_mean == 0.0
    np.testing.assert_allclose(summary.planner_per_round_mean, 1.0)
    np.testing.assert_allclose(summary.cc_per_round_mean, 0.0)


def test_summarize_permutation_invariant(rng):
    records = [make_record(rng.random((25, 4))) for _ in range(6)]
    forward = stats.summarize(records)
    backward = stats.summarize(records[::-1])
    assert forward.sum_contribution_mean == pytest.approx(backward.sum_contribution_mean, abs=1e-12)
    assert forward.prop_over_threshold_mean == pytest.approx(backward.prop_over_threshold_mean, abs=1e-12)


def test_summarize_rejects_mixed_rosters(rng):
    a = make_record(rng.random((25, 4)))
    b = make_record(rng.random((25, 4)), roster=("cc", "cc", "cc", "planner-sum"))
    with pytest.raises(ContractError):
        stats.summarize([a, b])
    with pytest.raises(ContractError):
        stats.summarize([])


def test_per_game_metrics(rng):
    records = [make_record(rng.random((25, 4))) for _ in range(3)]
    sums, props = stats.per_game_metrics(records)
    for rec, s, p in zip(records, sums, props):
        c = rec.contributions()
        assert s == pytest.approx(c.sum())
        assert p == pytest.approx((c > 0.5).mean())


# ---------------------------------------------------------------------------
# percentage change
# ---------------------------------------------------------------------------

def test_percentage_change_reference_values():
    assert round(stats.percentage_change(36.995, 40.035), 2) == 8.22
    # the operation reports the arithmetic change of the printed means
    assert stats.percentage_change(0.491, 0.56) == pytest.approx(
        100 * (0.56 - 0.491) / 0.491)
    assert round(stats.percentage_change(0.491, 0.56), 2) == 14.05


def test_percentage_change_identity_and_zero_baseline():
    assert stats.percentage_change(3.3, 3.3) == 0.0
    with pytest.raises(ContractError):
        stats.percentage_change(0.0, 1.0)
