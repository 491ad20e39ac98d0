"""Kendall-tau distance and diversity-based ensemble selection."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import InvalidParams, SingletonEnsemble, SuiteMismatch
from .model import Ensemble
from .validation import check_ensemble, check_ranking

__all__ = [
    "kt_distance",
    "kt_matrix",
    "diversity_score",
    "diversity_scores",
    "selection_size",
    "select_top_k",
    "DiversitySelector",
]


def _count_inversions(seq: List[int]) -> int:
    # bottom-up merge sort
    n = len(seq)
    src = list(seq)
    dst = [0] * n
    inv = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if src[i] <= src[j]:
                    dst[k] = src[i]
                    i += 1
                else:
                    dst[k] = src[j]
                    inv += mid - i
                    j += 1
                k += 1
            dst[k:hi] = src[i:mid] if i < mid else src[j:hi]
        src, dst = dst, src
        width *= 2
    return inv


def kt_distance(a, b) -> int:
    """Number of test pairs that ``a`` and ``b`` order oppositely.

    O(n log n): walk ``a`` in order, look up each test's rank in ``b`` and count
    inversions of that sequence.
    """
    a = check_ranking(a)
    b = check_ranking(b)
    if a.n != b.n:
        raise SuiteMismatch(f"rankings over {a.n} and {b.n} tests")
    rb = b.ranks
    return _count_inversions([int(rb[t]) for t in a.order])


def kt_matrix(E) -> np.ndarray:
    """Symmetric ``(m, m)`` matrix of pairwise KT distances."""
    E = check_ensemble(E)
    rankings = E.rankings
    m = len(rankings)
    D = np.zeros((m, m), dtype=np.int64)
    cache = {}
    for i in range(m):
        for j in range(i + 1, m):
            key = (rankings[i].order, rankings[j].order)
            if key not in cache:
                cache[key] = kt_distance(rankings[i], rankings[j])
            D[i, j] = D[j, i] = cache[key]
    return D


def diversity_scores(E) -> np.ndarray:
    """Div of every entry: summed KT distance to all other entries."""
    E = check_ensemble(E)
    if len(E) < 2:
        raise SingletonEnsemble()
    return kt_matrix(E).sum(axis=1)


def diversity_score(i: int, E) -> int:
    E = check_ensemble(E)
    if len(E) < 2:
        raise SingletonEnsemble()
    if not 0 <= i < len(E):
        raise IndexError(f"ensemble index {i} out of range")
    p = E.rankings[i]
    return sum(kt_distance(p, q) for j, q in enumerate(E.rankings) if j != i)


def _check_budget(k) -> Fraction:
    try:
        frac = Fraction(str(k))
    except (ValueError, TypeError):
        raise InvalidParams(f"budget must be a number, got {k!r}") from None
    if not 0 < frac <= 100:
        raise InvalidParams(f"budget must lie in (0, 100], got {k}")
    return frac


def selection_size(k, m: int) -> int:
    """``max(1, floor(k% of m))``."""
    return max(1, math.floor(_check_budget(k) * m / 100))


def _priority(div: Sequence[int]) -> List[int]:
    # decreasing Div, ties by original index
    return sorted(range(len(div)), key=lambda i: (-int(div[i]), i))


def select_top_k(E, k) -> Ensemble:
    """Keep the ``k``% most diverse entries, in their original relative order."""
    E = check_ensemble(E)
    size = selection_size(k, len(E))
    div = diversity_scores(E)
    keep = sorted(_priority(div)[:size])
    return E.subset(keep)


class DiversitySelector(TransformerMixin, BaseEstimator):
    """Select the top-``budget``% most diverse rankings of an ensemble.

    Parameters
    ----------
    budget : float, default=75
        Percentage in (0, 100] of the ensemble to keep.

    Attributes
    ----------
    distances_ : ndarray of shape (m, m)
        Pairwise Kendall-tau distances.
    diversity_ : ndarray of shape (m,)
        Summed distance of each entry to all others.
    priority_ : list of int
        Entry indices by decreasing diversity (ties by index).
    support_ : ndarray of bool
        Mask of selected entries.
    """

    def __init__(self, budget=75):
        self.budget = budget

    def fit(self, X, y=None):
        E = check_ensemble(X)
        if len(E) < 2:
            raise SingletonEnsemble()
        self.n_selected_ = selection_size(self.budget, len(E))
        self.distances_ = kt_matrix(E)
        self.diversity_ = self.distances_.sum(axis=1)
        self.priority_ = _priority(self.diversity_)
        self.support_ = np.zeros(len(E), dtype=bool)
        self.support_[self.priority_[: self.n_selected_]] = True
        self.labels_ = E.labels
        self.n_rankings_in_ = len(E)
        return self

    def get_support(self, indices=False):
        check_is_fitted(self, "support_")
        if indices:
            return np.flatnonzero(self.support_)
        return self.support_.copy()

    def transform(self, X) -> Ensemble:
        check_is_fitted(self, "support_")
        E = check_ensemble(X)
        if len(E) != self.n_rankings_in_:
            raise SuiteMismatch(
                f"fitted on {self.n_rankings_in_} rankings, got {len(E)}"
            )
        return E.subset(np.flatnonzero(self.support_).tolist())

    def report(self):
        """Rows of ``(label, Div, selected)`` in ensemble order."""
        check_is_fitted(self, "support_")
        return [
            (label, int(d), bool(s))
            for label, d, s in zip(self.labels_, self.diversity_, self.support_)
        ]
