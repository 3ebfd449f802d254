from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smithian import stats

# 3 x 2 fixture with two replicates per cell; sums of squares worked by hand
# from the cell, marginal and grand means (grand mean 13/3).
FIXTURE = {
    ("a1", "b1"): [1, 3], ("a1", "b2"): [2, 4],
    ("a2", "b1"): [5, 7], ("a2", "b2"): [4, 8],
    ("a3", "b1"): [2, 2], ("a3", "b2"): [9, 5],
}
SS_A, SS_B, SS_AB, SS_E, SS_T = Fraction(74, 3), Fraction(12), Fraction(14), Fraction(22), Fraction(218, 3)
F_A, F_B, F_AB = Fraction(37, 11), Fraction(36, 11), Fraction(21, 11)


def _fixture_arrays():
    vals, fa, fb = [], [], []
    for (a, b), v in FIXTURE.items():
        vals += v
        fa += [a] * len(v)
        fb += [b] * len(v)
    return vals, fa, fb


def test_hand_fixture_sums_of_squares_are_consistent():
    # the hand numbers themselves must satisfy the partition
    assert SS_A + SS_B + SS_AB + SS_E == SS_T
    assert F_A == (SS_A / 2) / (SS_E / 6)
    assert F_B == (SS_B / 1) / (SS_E / 6)
    assert F_AB == (SS_AB / 2) / (SS_E / 6)


def test_two_way_matches_hand_fixture():
    t = stats.two_way_anova(*_fixture_arrays())
    assert t.a.ss == pytest.approx(float(SS_A), abs=1e-9)
    assert t.b.ss == pytest.approx(float(SS_B), abs=1e-9)
    assert t.interaction.ss == pytest.approx(float(SS_AB), abs=1e-9)
    assert t.ss_error == pytest.approx(float(SS_E), abs=1e-9)
    assert t.ss_total == pytest.approx(float(SS_T), abs=1e-9)
    assert (t.a.df, t.b.df, t.interaction.df, t.df_error) == (2, 1, 2, 6)
    assert t.a.F == pytest.approx(float(F_A), abs=1e-9)
    assert t.b.F == pytest.approx(float(F_B), abs=1e-9)
    assert t.interaction.F == pytest.approx(float(F_AB), abs=1e-9)


def test_two_way_p_values_match_reference_table():
    # values from an OLS type-II table for the same fixture
    t = stats.two_way_anova(*_fixture_arrays())
    assert t.a.p == pytest.approx(0.104773, abs=1e-6)
    assert t.b.p == pytest.approx(0.120430, abs=1e-6)
    assert t.interaction.p == pytest.approx(0.228224, abs=1e-6)


def test_two_way_against_statsmodels():
    pd = pytest.importorskip("pandas")
    sm = pytest.importorskip("statsmodels.formula.api")
    from statsmodels.stats.anova import anova_lm
    rng = np.random.default_rng(3)
    rows = [(a, b, rng.normal(a + 0.5 * b, 1.0)) for a in range(3) for b in range(5) for _ in range(4)]
    df = pd.DataFrame(rows, columns=["A", "B", "y"])
    ref = anova_lm(sm.ols("y ~ C(A) * C(B)", data=df).fit(), typ=2)
    t = stats.two_way_anova(df.y, df.A, df.B)
    assert t.a.F == pytest.approx(ref.loc["C(A)", "F"], rel=1e-9)
    assert t.interaction.p == pytest.approx(ref.loc["C(A):C(B)", "PR(>F)"], rel=1e-7)
    assert t.ss_error == pytest.approx(ref.loc["Residual", "sum_sq"], rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 4), st.integers(2, 5), st.integers(2, 6))
def test_two_way_sum_of_squares_identity(seed, A, B, n):
    rng = np.random.default_rng(seed)
    vals = rng.normal(0, 50, size=A * B * n)
    fa = np.repeat(np.arange(A), B * n)
    fb = np.tile(np.repeat(np.arange(B), n), A)
    t = stats.two_way_anova(vals, fa, fb)
    parts = t.a.ss + t.b.ss + t.interaction.ss + t.ss_error
    assert parts == pytest.approx(t.ss_total, rel=1e-6)


def test_identical_rewards_give_zero_F():
    t = stats.two_way_anova([3.0] * 12, list("aabbccaabbcc"), list("xxxxxxyyyyyy"))
    assert (t.a.F, t.b.F, t.interaction.F) == (0.0, 0.0, 0.0)
    assert t.a.p == 1.0


def test_zero_within_variance_is_infinite_F():
    e = stats.one_way_anova([0, 0, 0, 0], [1, 1, 1, 1])
    assert e.ss == 2.0
    assert e.F == float("inf")
    assert e.p == 0.0


def test_unbalanced_design_rejected():
    with pytest.raises(ValueError, match="unbalanced"):
        stats.two_way_anova([1, 2, 3], ["a", "a", "b"], ["x", "y", "x"])


def test_one_way_matches_scipy():
    from scipy.stats import f_oneway
    rng = np.random.default_rng(0)
    groups = [rng.normal(m, 2, 30) for m in (0, 0.5, 1.5)]
    e = stats.one_way_anova(*groups)
    ref = f_oneway(*groups)
    assert e.F == pytest.approx(ref.statistic, rel=1e-12)
    assert e.p == pytest.approx(ref.pvalue, rel=1e-9)


@pytest.mark.parametrize("F,d1,d2", [(0.5, 2, 10), (3.2, 1, 998), (9.6, 2, 1485), (0.163, 2, 297)])
def test_f_sf_matches_scipy(F, d1, d2):
    from scipy.stats import f
    assert stats.f_sf(F, d1, d2) == pytest.approx(f.sf(F, d1, d2), rel=1e-10, abs=1e-300)


def test_f_sf_edges():
    assert stats.f_sf(0.0, 2, 5) == 1.0
    assert stats.f_sf(float("inf"), 2, 5) == 0.0
    assert np.isnan(stats.f_sf(float("nan"), 2, 5))


def test_bonferroni():
    assert stats.bonferroni(0.02, 3) == pytest.approx(0.06, abs=1e-15)
    assert stats.bonferroni(0.5, 3) == 1.0
    assert stats.bonferroni(1.0, 3) == 1.0
    assert stats.bonferroni(0.0, 3) == 0.0


def test_identical_groups_adjusted_to_one():
    out = stats.pairwise_bonferroni({"x": [1, 2, 3], "y": [1, 2, 3], "z": [1, 2, 3]})
    assert len(out) == 3
    for row in out:
        assert row["F"] == 0.0
        assert row["p_raw"] == 1.0 and row["p_adj"] == 1.0


def test_bootstrap_constant_sample_collapses():
    assert stats.bootstrap_ci([7.5] * 40, 2000) == (7.5, 7.5)


def test_bootstrap_width_close_to_normal_interval():
    x = np.random.default_rng(11).standard_normal(100)
    lo, hi = stats.bootstrap_ci(x, 10_000, 0.95, rng=5)
    analytic = 2 * 1.96 / np.sqrt(100)
    assert abs((hi - lo) - analytic) <= 0.15 * analytic
    assert lo < x.mean() < hi


def test_bootstrap_is_seeded():
    x = np.arange(30.0)
    assert stats.bootstrap_ci(x, 500, rng=1) == stats.bootstrap_ci(x, 500, rng=1)
    assert stats.bootstrap_ci(x, 500, rng=1) != stats.bootstrap_ci(x, 500, rng=2)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=1, max_size=30))
def test_bootstrap_interval_ordered_within_range(xs):
    lo, hi = stats.bootstrap_ci(xs, 200, rng=0)
    assert min(xs) <= lo <= hi <= max(xs)


def test_one_way_needs_two_groups():
    with pytest.raises(ValueError):
        stats.one_way_anova([1.0, 2.0])
