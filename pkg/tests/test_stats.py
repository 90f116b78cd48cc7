import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from gasmet.stats import (
    MetricTable,
    UndefinedCorrelation,
    average_ranks,
    correlation_matrix,
    effect_class,
    holm_adjust,
    margin_of_error,
    sample_size,
    sloc_histogram,
    spearman_pvalue,
    spearman_rho,
)

from oracles import exact_p_oracle, holm_oracle, rank_oracle, spearman_oracle


def test_simple_rho_values():
    assert spearman_rho([1, 2, 3], [10, 20, 30]) == 1.0
    assert spearman_rho([1, 2, 3], [3, 2, 1]) == -1.0
    assert spearman_rho([1, 2, 2, 4], [1, 3, 2, 4]) == pytest.approx(0.9486832980505138, abs=1e-15)


def test_average_ranks_with_ties():
    assert average_ranks([10, 20, 20, 5]) == [2, 3.5, 3.5, 1]


def test_constant_column_is_undefined():
    with pytest.raises(UndefinedCorrelation):
        spearman_rho([1, 1, 1], [1, 2, 3])


@given(
    st.integers(3, 12).flatmap(
        lambda n: st.tuples(st.lists(st.integers(0, 5), min_size=n, max_size=n), st.lists(st.integers(0, 5), min_size=n, max_size=n))
    )
)
def test_rho_matches_rank_then_pearson(xy):
    x, y = xy
    if len(set(x)) == 1 or len(set(y)) == 1:
        return
    assert spearman_rho(x, y) == pytest.approx(spearman_oracle(x, y), abs=1e-12)
    assert spearman_rho(x, y) == pytest.approx(sps.spearmanr(x, y).statistic, abs=1e-12)


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=15))
def test_ranks_match_counting_oracle(values):
    assert average_ranks(values) == rank_oracle(values)


@pytest.mark.parametrize("seed", range(20))
def test_exact_pvalue_matches_enumeration(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 6)
    x = [rng.randint(0, 4) for _ in range(n)]
    y = [rng.randint(0, 4) for _ in range(n)]
    if len(set(x)) == 1 or len(set(y)) == 1:
        return
    got = spearman_pvalue(spearman_rho(x, y), n, average_ranks(x), average_ranks(y))
    assert got == float(exact_p_oracle(x, y))


def test_exact_pvalue_without_ties():
    # rho = 1 for n = 4: only the identity and the reversal are as extreme
    assert spearman_pvalue(1.0, 4) == 2 / 24
    assert spearman_pvalue(0.0, 7) == 1.0


def test_large_n_uses_t_approximation():
    p = spearman_pvalue(0.3, 100)
    t = 0.3 * math.sqrt(98 / (1 - 0.09))
    assert p == pytest.approx(2 * sps.t.sf(t, 98), rel=1e-12)
    assert spearman_pvalue(1.0, 50) == 0.0


def test_t_approximation_against_permutation_monte_carlo():
    rng = np.random.default_rng(7)
    n, draws = 100, 200_000
    base = np.arange(n, dtype=float)
    perms = rng.permuted(np.tile(base, (draws, 1)), axis=1)
    centred = base - base.mean()
    rhos = (perms - base.mean()) @ centred / (centred @ centred)
    mc = float(np.mean(np.abs(rhos) >= 0.3 - 1e-12))
    assert abs(spearman_pvalue(0.3, n) - mc) < 0.005


def test_holm_known_values():
    assert holm_adjust([0.01, 0.02, 0.03]) == pytest.approx([0.03, 0.04, 0.04])
    assert holm_adjust([0.5, 0.9]) == [1.0, 1.0]
    assert holm_adjust([]) == []


@given(st.lists(st.floats(0, 1), min_size=1, max_size=20))
def test_holm_properties(ps):
    adj = holm_adjust(ps)
    assert all(a >= p for a, p in zip(adj, ps))
    assert all(a <= 1.0 for a in adj)
    order = sorted(range(len(ps)), key=lambda i: ps[i])
    assert all(adj[order[i]] <= adj[order[i + 1]] for i in range(len(ps) - 1))
    assert adj == holm_oracle(ps)


@pytest.mark.parametrize(
    "rho, label",
    [(0.75, "large"), (0.5, "large"), (-0.65, "large"), (0.49, "medium"), (0.30, "medium"), (0.295, "small"), (0.1, "small"), (0.05, "negligible")],
)
def test_effect_class(rho, label):
    assert effect_class(rho) == label


def _table(rows, columns=("a", "b", "c")):
    return MetricTable(list(columns), [(f"r{i}", dict(zip(columns, r))) for i, r in enumerate(rows)])


def test_correlation_matrix_structure():
    rows = [(i, i * i, 5) for i in range(12)]
    report = correlation_matrix(_table(rows))
    assert report.cell("a", "b").rho == 1.0 and report.cell("a", "b").significant
    assert report.cell("a", "b") is report.cell("b", "a")
    assert report.cell("a", "c").blank and report.excluded == ["c"]
    assert report.cell("a", "a").rho == 1.0
    doc = report.to_dict()
    assert doc["schema_version"] == 1 and doc["matrix"]["c"]["a"]["rho"] is None


def test_alpha_one_marks_every_cell_significant():
    rng = random.Random(3)
    rows = [(rng.random(), rng.random(), rng.random()) for _ in range(15)]
    report = correlation_matrix(_table(rows), alpha=1.0)
    assert all(cell.significant for cell in report.matrix.values())


def test_holm_family_is_upper_triangle():
    rng = random.Random(4)
    rows = [(rng.random(), rng.random(), rng.random()) for _ in range(30)]
    report = correlation_matrix(_table(rows))
    pairs = [("a", "b"), ("a", "c"), ("b", "c")]
    raw = [report.cell(*p).p_raw for p in pairs]
    assert [report.cell(*p).p_adj for p in pairs] == holm_adjust(raw)


@settings(max_examples=30)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4), st.integers(0, 4)), min_size=3, max_size=14), st.randoms())
def test_row_order_invariance(rows, rnd):
    table = _table(rows)
    shuffled = list(rows)
    rnd.shuffle(shuffled)
    assert correlation_matrix(table).to_dict() == correlation_matrix(_table(shuffled)).to_dict()


def test_sampling_math():
    moe = margin_of_error(47037, 2186)
    assert 0.020 < moe < 0.021
    assert abs(sample_size(47037, moe) - 2186) <= 2
    assert margin_of_error(10**9, 1067) == pytest.approx(0.03, abs=1e-4)
    assert sample_size(100, 0.999) == 1


def test_sloc_histogram_bins():
    bins = sloc_histogram([49, 50, 99, 100, 499, 500])
    assert [c for _, c, _ in bins] == [1, 2, 2, 1]
    assert sloc_histogram([]) == [(label, 0, 0.0) for label, _, _ in bins]
