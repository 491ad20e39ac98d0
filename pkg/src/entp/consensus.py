"""Rank aggregation: Kemeny-Young approximation, Borda count, mean/median.

All methods take a profile ``R`` of strict rankings over the same ``n`` tests.
Kemeny-Young returns a strict ranking; Borda and the mean family return tied
rankings whose groups can later become parallel execution windows.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import InvalidParams, InvariantViolation, SuiteMismatch, TooLarge
from .model import Ensemble, StrictRanking, TiedRanking, flatten
from .validation import check_ensemble, check_ranking

__all__ = [
    "KYParams",
    "KYResult",
    "METHODS",
    "preference_matrix",
    "agreement_score",
    "kemeny_young",
    "kemeny_young_search",
    "kemeny_exact",
    "borda_scores",
    "borda",
    "mean_keys",
    "mean_consensus",
    "average_rank_order",
    "KemenyYoung",
    "KemenyExact",
    "BordaCount",
    "MeanConsensus",
    "make_consensus",
]

METHODS = ("ky", "borda", "am", "gm", "hm", "med")
MEAN_OPS = ("am", "gm", "hm", "med")
EXACT_LIMIT = 8


@dataclass(frozen=True)
class KYParams:
    """Kemeny-Young search budget.

    ``N`` full sweeps at most (0..200), window size ``M`` (1..7, clipped to the
    suite size at run time), RNG ``seed`` (unsigned 64-bit).
    """

    N: int = 200
    M: int = 7
    seed: int = 0

    def __post_init__(self):
        for name, lo, hi in (("N", 0, 200), ("M", 1, 7), ("seed", 0, 2**64 - 1)):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise InvalidParams(f"{name} must be an integer, got {v!r}")
            if not lo <= v <= hi:
                raise InvalidParams(f"{name}={v} outside [{lo}, {hi}]")


@dataclass
class KYResult:
    ranking: StrictRanking
    score: int
    initial: StrictRanking
    initial_score: int
    history: List[int] = field(default_factory=list)
    optimal_orderings: List[Tuple[int, ...]] = field(default_factory=list)
    n_iter: int = 0


def preference_matrix(R) -> np.ndarray:
    """``P[i, j]`` = number of rankings in ``R`` placing test ``i`` before ``j``."""
    R = check_ensemble(R)
    ranks = R.rank_matrix()
    return (ranks[:, :, None] < ranks[:, None, :]).sum(axis=0, dtype=np.int64)


def _order_score(P: np.ndarray, order) -> int:
    o = np.asarray(order, dtype=np.int64)
    return int(np.triu(P[np.ix_(o, o)], 1).sum())


def agreement_score(p, R) -> int:
    """Total pairwise agreement of ``p`` with the profile ``R``.

    Equals ``sum(n(n-1)/2 - KT(p, p_i))``, so maximizing it minimizes the summed
    Kendall-tau distance.
    """
    R = check_ensemble(R)
    p = check_ranking(p)
    if p.n != R.n:
        raise SuiteMismatch(f"ranking over {p.n} tests, profile over {R.n}")
    return _order_score(preference_matrix(R), p.order)


@lru_cache(maxsize=None)
def _window_tables(size: int):
    perms = np.array(list(itertools.permutations(range(size))), dtype=np.int64)
    a, b = np.triu_indices(size, 1)
    return perms, perms[:, a], perms[:, b]


def average_rank_order(orderings) -> StrictRanking:
    """Order tests by mean 1-based rank over ``orderings``, ties by id."""
    orderings = [tuple(o) for o in orderings]
    n = len(orderings[0])
    totals = np.zeros(n, dtype=np.int64)
    for o in orderings:
        totals[np.asarray(o, dtype=np.int64)] += np.arange(1, n + 1)
    # same denominator for every test, so integer totals sort like the means
    return StrictRanking(sorted(range(n), key=lambda t: (int(totals[t]), t)))


def kemeny_young_search(R, params: KYParams = KYParams(), window_search: str = "exhaustive") -> KYResult:
    """Sliding-window hill climb towards the Kemeny-Young consensus.

    Starts from the flattened floored-AM consensus.  Each sweep slides a window of
    ``M`` positions (stride 1, truncated at the end) over the current order and
    rearranges the window's contents, keeping a rearrangement only when the
    agreement score strictly improves.  ``window_search="exhaustive"`` tries every
    arrangement of the window and keeps the best (random choice among equally
    good ones); ``"shuffle"`` tries a single random shuffle.  Rearranging inside a
    window leaves every pair that straddles it untouched, so only the window's
    internal pairs are rescored.

    Stops after ``N`` sweeps or the first sweep without improvement.
    """
    if window_search not in ("exhaustive", "shuffle"):
        raise InvalidParams(f"unknown window_search {window_search!r}")
    R = check_ensemble(R)
    n = R.n
    P = preference_matrix(R)
    rng = np.random.default_rng(params.seed)
    M = min(params.M, n)

    initial = flatten(mean_consensus(R, "am"))
    cur = np.array(initial.order, dtype=np.int64)
    score = _order_score(P, cur)
    result = KYResult(
        ranking=initial, score=score, initial=initial, initial_score=score, history=[score]
    )
    sweep_ends = [tuple(cur.tolist())]

    for _ in range(params.N):
        improved = False
        for start in range(n):
            w = cur[start : start + M].copy()
            size = len(w)
            if size < 2:
                continue
            perms, left, right = _window_tables(size)
            sub = P[np.ix_(w, w)]
            if window_search == "exhaustive":
                scores = sub[left, right].sum(axis=1)
                base = int(scores[0])  # identity arrangement comes first
                top = int(scores.max())
                if top <= base:
                    continue
                ties = np.flatnonzero(scores == top)
                pick = perms[ties[rng.integers(len(ties))]]
            else:
                pick = rng.permutation(size)
                a, b = np.triu_indices(size, 1)
                base = int(sub[a, b].sum())
                top = int(sub[pick[a], pick[b]].sum())
                if top <= base:
                    continue
            cur[start : start + size] = w[pick]
            score += top - base
            improved = True
        result.n_iter += 1
        result.history.append(score)
        sweep_ends.append(tuple(cur.tolist()))
        if not improved:
            break

    best = max(result.history)
    if score != best:
        raise InvariantViolation("hill climb lost its best score")
    seen = {}
    for o in sweep_ends:
        if _order_score(P, o) == best:
            seen.setdefault(o, None)
    optimal = list(seen)
    result.optimal_orderings = optimal

    final = StrictRanking(optimal[0]) if len(optimal) == 1 else average_rank_order(optimal)
    final_score = _order_score(P, final.order)
    if final_score < best:
        # averaging several optima can fall off the optimum; keep the last one reached
        final = StrictRanking(optimal[-1])
        final_score = best
    result.ranking = final
    result.score = final_score
    return result


def kemeny_young(R, params: KYParams = KYParams()) -> StrictRanking:
    return kemeny_young_search(R, params).ranking


def kemeny_exact(R) -> StrictRanking:
    """Brute-force Kemeny consensus over all ``n!`` orders (``n <= 8``).

    Among equally good orders the lexicographically smallest wins.
    """
    R = check_ensemble(R)
    n = R.n
    if n > EXACT_LIMIT:
        raise TooLarge(n, EXACT_LIMIT)
    P = preference_matrix(R)
    perms, left, right = _window_tables(n)
    if n < 2:
        return StrictRanking(range(n))
    scores = P[left, right].sum(axis=1)
    return StrictRanking(perms[int(np.argmax(scores))].tolist())


def _group_by_key(keys, descending: bool) -> TiedRanking:
    buckets: Dict = {}
    for t, k in enumerate(keys):
        buckets.setdefault(k, []).append(t)
    return TiedRanking(buckets[k] for k in sorted(buckets, reverse=descending))


def borda_scores(R) -> np.ndarray:
    """Per test, the number of tests it precedes summed over the profile."""
    R = check_ensemble(R)
    return (R.n - R.rank_matrix()).sum(axis=0)


def borda(R) -> TiedRanking:
    """Tests by decreasing Borda score; equal scores share a group."""
    return _group_by_key(borda_scores(R).tolist(), descending=True)


def _iroot_floor(x: int, k: int) -> int:
    if x < 2 or k == 1:
        return x
    r = int(math.exp(math.log(x) / k))
    while r**k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def _mean_key(ranks: List[int], op: str) -> int:
    m = len(ranks)
    if op == "am":
        return sum(ranks) // m
    if op == "gm":
        return _iroot_floor(math.prod(ranks), m)
    if op == "hm":
        return math.floor(Fraction(m) / sum(Fraction(1, r) for r in ranks))
    if op == "med":
        s = sorted(ranks)
        if m % 2:
            return s[m // 2]
        return (s[m // 2 - 1] + s[m // 2]) // 2
    raise InvalidParams(f"unknown mean operator {op!r}")


def mean_keys(R, op: str = "am") -> np.ndarray:
    """Floored per-test aggregate of 1-based ranks; exact integer arithmetic."""
    if op not in MEAN_OPS:
        raise InvalidParams(f"unknown mean operator {op!r}; expected one of {MEAN_OPS}")
    R = check_ensemble(R)
    ranks = R.rank_matrix()
    return np.array([_mean_key(ranks[:, t].tolist(), op) for t in range(R.n)], dtype=np.int64)


def mean_consensus(R, op: str = "am") -> TiedRanking:
    return _group_by_key(mean_keys(R, op).tolist(), descending=False)


# -- estimators -------------------------------------------------------------


class ConsensusMixin:
    """``fit`` learns ``consensus_`` from a profile; ``fit_predict`` returns it."""

    def fit_predict(self, X, y=None):
        return self.fit(X).consensus_

    def predict(self, X=None):
        check_is_fitted(self, "consensus_")
        return self.consensus_

    def score(self, X, y=None) -> int:
        """Agreement score of the learned consensus with profile ``X``."""
        check_is_fitted(self, "consensus_")
        return agreement_score(flatten(self.consensus_), X)


class KemenyYoung(ConsensusMixin, BaseEstimator):
    """Approximate Kemeny-Young consensus by sliding-window hill climbing.

    Parameters
    ----------
    n_iter : int, default=200
        Maximum number of sweeps (``N``).
    window : int, default=7
        Window size (``M``); clipped to the number of tests.
    random_state : int, default=0
    window_search : {"exhaustive", "shuffle"}, default="exhaustive"

    Attributes
    ----------
    consensus_ : StrictRanking
    score_ : int
        Agreement score of ``consensus_``.
    score_history_ : list of int
        Score after the initial approximation and after every sweep.
    optimal_orderings_ : list of tuple
    n_iter_ : int
        Sweeps actually run.
    """

    def __init__(self, n_iter=200, window=7, random_state=0, window_search="exhaustive"):
        self.n_iter = n_iter
        self.window = window
        self.random_state = random_state
        self.window_search = window_search

    def fit(self, X, y=None):
        params = KYParams(N=self.n_iter, M=self.window, seed=self.random_state)
        res = kemeny_young_search(X, params, window_search=self.window_search)
        self.consensus_ = res.ranking
        self.score_ = res.score
        self.initial_ = res.initial
        self.score_history_ = res.history
        self.optimal_orderings_ = res.optimal_orderings
        self.n_iter_ = res.n_iter
        return self


class KemenyExact(ConsensusMixin, BaseEstimator):
    """Exhaustive Kemeny consensus; only for ``n <= 8``."""

    def fit(self, X, y=None):
        self.consensus_ = kemeny_exact(X)
        self.score_ = agreement_score(self.consensus_, X)
        return self


class BordaCount(ConsensusMixin, BaseEstimator):
    def fit(self, X, y=None):
        R = check_ensemble(X)
        self.scores_ = borda_scores(R)
        self.consensus_ = _group_by_key(self.scores_.tolist(), descending=True)
        return self


class MeanConsensus(ConsensusMixin, BaseEstimator):
    """Group tests by the floored mean (or median) of their ranks.

    Parameters
    ----------
    op : {"am", "gm", "hm", "med"}, default="am"
    """

    def __init__(self, op="am"):
        self.op = op

    def fit(self, X, y=None):
        self.keys_ = mean_keys(X, self.op)
        self.consensus_ = _group_by_key(self.keys_.tolist(), descending=False)
        return self


def make_consensus(method: str, N: int = 200, M: int = 7, seed: int = 0):
    """Estimator for one of the six method labels."""
    if method == "ky":
        return KemenyYoung(n_iter=N, window=M, random_state=seed)
    if method == "borda":
        return BordaCount()
    if method in MEAN_OPS:
        return MeanConsensus(op=method)
    raise InvalidParams(f"unknown consensus method {method!r}; expected one of {METHODS}")
