import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entp.diversity import (
    DiversitySelector,
    diversity_score,
    diversity_scores,
    kt_distance,
    kt_matrix,
    select_top_k,
    selection_size,
)
from entp.errors import InvalidParams, SingletonEnsemble, SuiteMismatch
from entp.model import Ensemble, StrictRanking

from conftest import P1, P2, P3, tr


def discordant_pairs(a, b):
    ra = {t: i for i, t in enumerate(a)}
    rb = {t: i for i, t in enumerate(b)}
    return {
        frozenset((x, y))
        for x, y in itertools.combinations(sorted(ra), 2)
        if (ra[x] - ra[y]) * (rb[x] - rb[y]) < 0
    }


def test_kt_golden_pairs():
    assert kt_distance(P1, P2) == 5
    expected = {frozenset(tr(a, b)) for a, b in [(3, 5), (3, 9), (1, 5), (1, 9), (1, 7)]}
    assert discordant_pairs(P1, P2) == expected


def test_kt_reverse_is_maximal():
    n = 9
    r = list(range(n))
    assert kt_distance(r, r[::-1]) == n * (n - 1) // 2


def test_kt_rejects_mismatched_suites():
    with pytest.raises(SuiteMismatch):
        kt_distance([0, 1], [0, 1, 2])


perm_pairs = st.integers(1, 7).flatmap(
    lambda n: st.tuples(st.permutations(range(n)), st.permutations(range(n)))
)


@given(perm_pairs)
@settings(max_examples=300)
def test_kt_matches_pair_count(ab):
    a, b = ab
    assert kt_distance(a, b) == len(discordant_pairs(a, b))


@given(st.integers(1, 9).flatmap(lambda n: st.lists(st.permutations(range(n)), min_size=3, max_size=3)))
@settings(max_examples=300)
def test_kt_metric_axioms(ps):
    a, b, c = ps
    assert kt_distance(a, a) == 0
    assert kt_distance(a, b) == kt_distance(b, a)
    assert (kt_distance(a, b) == 0) == (list(a) == list(b))
    assert kt_distance(a, c) <= kt_distance(a, b) + kt_distance(b, c)


def test_div_golden(running_ensemble):
    assert diversity_scores(running_ensemble).tolist() == [11, 12, 13]
    assert [diversity_score(i, running_ensemble) for i in range(3)] == [11, 12, 13]
    D = kt_matrix(running_ensemble)
    assert D.tolist() == [[0, 5, 6], [5, 0, 7], [6, 7, 0]]


def test_top2_selection(running_ensemble):
    sel = DiversitySelector(budget=67).fit(running_ensemble)
    assert sel.priority_[:2] == [2, 1]
    chosen = sel.transform(running_ensemble)
    assert set(chosen.labels) == {"p2", "p3"}
    assert chosen.labels == ("p2", "p3")
    assert sel.report() == [("p1", 11, False), ("p2", 12, True), ("p3", 13, True)]


@pytest.mark.parametrize("k,m", [(75, 18), (50, 12), (25, 6), (100, 25), (1, 1), (0.5, 1)])
def test_selection_size_floor(k, m):
    assert selection_size(k, 25) == m


@pytest.mark.parametrize("k", [0, -5, 100.5, "x"])
def test_bad_budget(k):
    with pytest.raises(InvalidParams):
        selection_size(k, 10)


def test_singleton_rejected():
    E = Ensemble.from_orders([[0, 1]])
    with pytest.raises(SingletonEnsemble):
        DiversitySelector().fit(E)


def test_ties_break_by_index():
    # identical rankings: all Div equal, so the first ones win
    E = Ensemble.from_orders([[0, 1, 2]] * 4, labels="abcd")
    assert select_top_k(E, 50).labels == ("a", "b")


ensembles = st.integers(2, 6).flatmap(
    lambda n: st.lists(st.permutations(range(n)), min_size=2, max_size=10)
)


@given(ensembles, st.integers(1, 100), st.integers(1, 100))
@settings(max_examples=150)
def test_selection_monotone_and_submultiset(orders, k1, k2):
    E = Ensemble.from_orders(orders)
    lo, hi = sorted((k1, k2))
    small = DiversitySelector(budget=lo).fit(E).get_support()
    big = DiversitySelector(budget=hi).fit(E).get_support()
    assert small.sum() <= big.sum()
    assert not np.any(small & ~big)
    # selected entries are never less diverse than dropped ones
    div = diversity_scores(E)
    if (~small).any():
        assert div[small].min() >= div[~small].max()


def test_transform_keeps_original_order():
    E = Ensemble.from_orders([[0, 1, 2], [2, 1, 0], [1, 0, 2], [0, 2, 1]], labels="wxyz")
    sel = DiversitySelector(budget=50).fit(E)
    idx = sel.get_support(indices=True).tolist()
    assert idx == sorted(idx)
    assert sel.transform(E).labels == tuple("wxyz"[i] for i in idx)


def test_transform_checks_size(running_ensemble):
    sel = DiversitySelector().fit(running_ensemble)
    with pytest.raises(SuiteMismatch):
        sel.transform(Ensemble.from_orders([P1, P2]))


def test_large_ranking_is_fast():
    rng = np.random.default_rng(0)
    a = StrictRanking(rng.permutation(20000).tolist())
    b = StrictRanking(rng.permutation(20000).tolist())
    d = kt_distance(a, b)
    assert 0 < d < 20000 * 19999 // 2
