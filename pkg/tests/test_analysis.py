import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from battleship_lips.analysis import (
    StatsError,
    betainc,
    bootstrap_ci,
    mean_se,
    qq_points,
    quantiles,
    summarize,
    summary_csv,
    t_cdf,
    t_sf_two_sided,
    type_distribution,
    welch_t_test,
)
from battleship_lips.lips import CandidateRecord


@pytest.fixture(scope="module")
def pairs(fixtures_dir):
    return json.loads((fixtures_dir / "stats_pairs.json").read_text())


def reference_bootstrap(values, level, n_boot, seed):
    """Straightforward percentile bootstrap on the same random stream."""
    x = np.asarray(values, dtype=float)
    idx = np.random.default_rng(seed).integers(0, len(x), size=(n_boot, len(x)))
    means = np.sort(x[idx].sum(axis=1) / len(x))
    out = []
    for q in ((1 - level) / 2, 1 - (1 - level) / 2):
        pos = q * (n_boot - 1)
        lo = math.floor(pos)
        hi = min(lo + 1, n_boot - 1)
        out.append(means[lo] + (pos - lo) * (means[hi] - means[lo]))
    return max(out[0], x.min()), min(out[1], x.max())


def rec(eig=None, valid=True, depth=None, size=None, words=None, atype=None):
    return CandidateRecord("q" if words else None, "(size Red)" if valid else None, valid,
                           eig if valid else None, depth, size, words, atype)


# ---------------------------------------------------------------- mean / se


def test_mean_se_hand_values():
    m = mean_se([0.0, 2.0])
    assert (m.mean, m.se, m.n) == (1.0, 1.0, 2)
    m = mean_se([1.0, 2.0, 3.0])
    assert m.mean == 2.0 and m.se == pytest.approx(1 / math.sqrt(3), abs=1e-15)
    assert mean_se([4.0]) == mean_se([4.0]) and mean_se([4.0]).se == 0.0 and mean_se([4.0]).single
    assert mean_se([]).mean is None


@pytest.mark.parametrize("values,mean,se", [
    ([0.0, 2.0, 4.0], 2.0, 2 / math.sqrt(3)),
    ([1.0, 1.0, 1.0], 1.0, 0.0),
    ([0.0, 0.0, 3.0], 1.0, 1.0),
    ([1.0, 0.0, 1.0], 2 / 3, math.sqrt(1 / 3 / 3)),
])
def test_summarize_three_element_fixtures(values, mean, se):
    row = summarize([rec(v, depth=2, size=3, words=4) for v in values], "m", 1)
    assert row.metrics["eig"].mean == pytest.approx(mean, abs=1e-15)
    assert row.metrics["eig"].se == pytest.approx(se, abs=1e-15)


def test_summarize_invalid_and_percentages():
    recs = [rec(1.0, depth=2, size=2, words=5), rec(0.0, depth=3, size=4, words=3), rec(valid=False, words=7)]
    row = summarize(recs, "llm", 5)
    assert row.metrics["eig"].mean == pytest.approx(1 / 3)
    assert row.metrics["valid"].mean == pytest.approx(2 / 3)
    assert row.metrics["informative"].mean == pytest.approx(1 / 3)
    assert row.metrics["depth"].n == 2 and row.metrics["depth"].mean == 2.5
    assert row.metrics["words"].mean == 5.0
    # σ of a proportion is the standard error of the 0/1 indicators
    assert row.metrics["valid"].se == pytest.approx(np.std([1, 1, 0], ddof=1) / math.sqrt(3))
    with pytest.raises(StatsError):
        summarize([], "x")


def test_summary_csv_marks_missing():
    row = summarize([rec(1.0)], "grammar", 1)
    text = summary_csv([row])
    header, line = text.splitlines()
    assert header.startswith("model,k,eig_mean,eig_se")
    assert "--" in line and line.startswith("grammar,1,1.000000,0.000000")


# ---------------------------------------------------------------- t distribution


@pytest.mark.parametrize("t,df", [(0.5, 1), (2.0, 3), (-1.3, 7.5), (4.0, 30), (0.01, 2.2), (10.0, 4), (1.96, 1e5)])
def test_t_distribution_against_scipy(t, df):
    assert t_sf_two_sided(t, df) == pytest.approx(2 * stats.t.sf(abs(t), df), rel=1e-8, abs=1e-14)
    assert t_cdf(t, df) == pytest.approx(stats.t.cdf(t, df), rel=1e-8, abs=1e-14)


@settings(max_examples=100)
@given(st.floats(0.5, 50), st.floats(0.5, 50), st.floats(0.001, 0.999))
def test_betainc_against_scipy(a, b, x):
    from scipy.special import betainc as ref

    assert betainc(a, b, x) == pytest.approx(ref(a, b, x), abs=1e-10)


def test_t_edge_cases():
    assert t_sf_two_sided(0.0, 5) == 1.0
    with pytest.raises(StatsError):
        t_sf_two_sided(1.0, 0)


# ---------------------------------------------------------------- Welch


def test_welch_hand_values():
    r = welch_t_test([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
    assert r.t == pytest.approx(-1.0, abs=1e-12)
    assert r.df == pytest.approx(8.0, abs=1e-12)
    # [DERIVED] scipy.stats.ttest_ind(..., equal_var=False)
    assert r.p == pytest.approx(0.34659350708733416, abs=1e-10)


def test_welch_matches_scipy_on_fixture(pairs):
    for pair in pairs:
        r = welch_t_test(pair["a"], pair["b"])
        ref = stats.ttest_ind(pair["a"], pair["b"], equal_var=False)
        assert r.t == pytest.approx(ref.statistic, abs=1e-6)
        assert r.p == pytest.approx(ref.pvalue, abs=1e-6)


def test_welch_errors():
    with pytest.raises(StatsError):
        welch_t_test([1.0], [1.0, 2.0])
    with pytest.raises(StatsError):
        welch_t_test([1.0, 1.0], [2.0, 2.0])


# ---------------------------------------------------------------- bootstrap


def test_bootstrap_matches_reference(pairs):
    for pair in pairs:
        for values in (pair["a"], pair["b"]):
            got = bootstrap_ci(values, 0.95, 4000, seed=pair["id"])
            ref = reference_bootstrap(values, 0.95, 4000, pair["id"])
            assert got == pytest.approx(ref, abs=1e-6)


def test_bootstrap_properties():
    x = [0.0, 1.0, 2.5, 0.3, 1.1]
    lo, hi = bootstrap_ci(x, n_boot=2000, seed=1)
    assert min(x) <= lo <= np.mean(x) <= hi <= max(x)
    assert bootstrap_ci(x, n_boot=2000, seed=1) == (lo, hi)
    assert bootstrap_ci([3.0], n_boot=100) == (3.0, 3.0)
    with pytest.raises(StatsError):
        bootstrap_ci([], n_boot=10)
    with pytest.raises(StatsError):
        bootstrap_ci(x, level=1.0)


@pytest.mark.slow
def test_bootstrap_coverage():
    rng = np.random.default_rng(7)
    reps, hits = 500, 0
    for r in range(reps):
        sample = rng.normal(0.0, 1.0, 60)
        lo, hi = bootstrap_ci(sample, 0.95, 1000, seed=r)
        hits += lo <= 0.0 <= hi
    assert hits / reps >= 0.92


# ---------------------------------------------------------------- quantiles, types


def test_quantiles_linear():
    assert quantiles([1, 2, 3, 4], [25, 50, 75]) == [1.75, 2.5, 3.25]
    assert quantiles([5.0], [1, 99]) == [5.0, 5.0]


def test_qq_points():
    q = qq_points([1, 2, 3], [10, 20, 30, 40], grid=[0, 50, 100])
    assert q.model == (1.0, 2.0, 3.0) and q.human == (10.0, 25.0, 40.0)
    assert len(qq_points([1], [2]).percentiles) == 99
    with pytest.raises(StatsError):
        qq_points([], [1])


def test_type_distribution():
    recs = [rec(1.0, atype="Number"), rec(1.0, atype="Number"), rec(0.5, atype="Boolean"), rec(valid=False)]
    d = type_distribution(recs)
    assert d == {"Boolean": pytest.approx(1 / 3), "Number": pytest.approx(2 / 3),
                 "Color": 0.0, "Orientation": 0.0, "Location": 0.0}
    assert sum(type_distribution([rec(valid=False)]).values()) == 0.0
