"""Prioritization effectiveness: APFD, cost-cognizant APFD and EPS.

Orders are StrictRankings; a TiedRanking is flattened first (ascending id inside
groups).  APFD additionally accepts an ExecutionPlan, in which case a test's
position is the index of its batch.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import NoFailures, NonPositiveCost
from .model import TiedRanking, flatten
from .schedule import ExecutionPlan
from .validation import check_failures, check_ranking

__all__ = ["apfd", "apfd_c", "eps", "eps_normalizer", "evaluate"]


def _order(order):
    if isinstance(order, TiedRanking):
        return flatten(order)
    return check_ranking(order)


def apfd(order, failures) -> float:
    """``1 - sum(TF) / (n m) + 1 / (2n)`` with ``TF`` the 1-based failure positions."""
    if isinstance(order, ExecutionPlan):
        f = check_failures(failures, order.n)
        pos = order.positions()
        n = len(order)
        tf = [pos[t] for t in f.failed]
    else:
        r = _order(order)
        f = check_failures(failures, r.n)
        n = r.n
        tf = [r.rank(t) for t in f.failed]
    m = len(tf)
    if m == 0:
        raise NoFailures()
    return 1.0 - sum(tf) / (n * m) + 1.0 / (2 * n)


def apfd_c(order, cost: Sequence[float], failures) -> float:
    """Cost-cognizant APFD with every failure of equal severity."""
    r = _order(order)
    f = check_failures(failures, r.n)
    m = len(f)
    if m == 0:
        raise NoFailures()
    c = np.array([float(cost[t]) for t in r.order])
    if np.any(c <= 0):
        raise NonPositiveCost(int(r.order[int(np.argmax(c <= 0))]))
    # tail[i] = cost of positions i..n-1
    tail = np.cumsum(c[::-1])[::-1]
    num = sum(tail[r.rank(t) - 1] - 0.5 * c[r.rank(t) - 1] for t in f.failed)
    return float(num / (tail[0] * m))


def eps_normalizer(m: int, n: int) -> int:
    """Largest Manhattan distance between two 0/1 vectors of length ``n`` with ``m`` ones."""
    return 2 * min(m, n - m)


def eps(order, failures) -> float:
    """Similarity of the verdict vector to the failures-first ideal, in [0, 1]."""
    r = _order(order)
    f = check_failures(failures, r.n)
    n, m = r.n, len(f)
    if m == 0 or m == n:
        return 1.0
    v = f.verdicts(r.order)
    ideal = np.zeros(n, dtype=np.int8)
    ideal[:m] = 1
    d = int(np.abs(v - ideal).sum())
    return 1.0 - d / eps_normalizer(m, n)


def evaluate(order, cost, failures):
    """``(apfd, apfd_c, eps)``; the first two are ``None`` without failures."""
    f = check_failures(failures)
    if len(f) == 0:
        return None, None, eps(order, f)
    return apfd(order, f), apfd_c(order, cost, f), eps(order, f)
