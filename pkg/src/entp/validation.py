"""Input coercion helpers in the spirit of ``sklearn.utils.validation``.

Estimators accept loose inputs (nested lists, numpy arrays, model objects) and
funnel them through these helpers so the algorithms only ever see validated
model types.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import InputError, SuiteMismatch
from .model import Ensemble, FailureRecord, StrictRanking, SuiteSnapshot, TiedRanking, flatten

__all__ = [
    "check_ranking",
    "check_tied",
    "check_ensemble",
    "check_snapshot",
    "check_failures",
    "check_same_suite",
]


def check_ranking(x, n: Optional[int] = None) -> StrictRanking:
    """Coerce ``x`` to a StrictRanking over ``n`` tests.

    A TiedRanking is accepted and flattened; anything else must be a sequence of
    test ids forming a permutation.
    """
    if isinstance(x, TiedRanking):
        r = flatten(x)
    elif isinstance(x, StrictRanking):
        r = x
    else:
        arr = np.asarray(x)
        if arr.ndim != 1:
            raise InputError(f"expected a 1-d order, got shape {arr.shape}")
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise InputError("test ids must be integers")
        r = StrictRanking(arr.astype(np.int64).tolist())
    if n is not None and r.n != n:
        raise SuiteMismatch(f"ranking covers {r.n} tests, suite has {n}")
    return r


def check_tied(x, n: Optional[int] = None) -> TiedRanking:
    if isinstance(x, TiedRanking):
        t = x
    elif isinstance(x, StrictRanking):
        t = x.to_tied()
    else:
        t = check_ranking(x).to_tied()
    if n is not None and t.n != n:
        raise SuiteMismatch(f"ranking covers {t.n} tests, suite has {n}")
    return t


def check_ensemble(X, min_size: int = 1) -> Ensemble:
    """Coerce ``X`` to an Ensemble.

    Accepts an Ensemble, a sequence of StrictRankings, a sequence of
    ``(label, ranking)`` pairs, or a 2-d array-like whose rows are orders.
    """
    if isinstance(X, Ensemble):
        E = X
    else:
        items = list(X)
        if not items:
            raise InputError("empty ensemble")
        first = items[0]
        if (
            isinstance(first, tuple)
            and len(first) == 2
            and isinstance(first[0], str)
        ):
            E = Ensemble((label, check_ranking(r)) for label, r in items)
        else:
            rankings = [check_ranking(r) for r in items]
            n = rankings[0].n
            for r in rankings:
                if r.n != n:
                    raise SuiteMismatch("rankings cover different numbers of tests")
            E = Ensemble.from_orders([r.order for r in rankings])
    if len(E) < min_size:
        raise InputError(f"ensemble has {len(E)} rankings, need at least {min_size}")
    return E


def check_snapshot(s) -> SuiteSnapshot:
    if not isinstance(s, SuiteSnapshot):
        raise InputError(f"expected a SuiteSnapshot, got {type(s).__name__}")
    return s


def check_failures(f, n: Optional[int] = None) -> FailureRecord:
    if not isinstance(f, FailureRecord):
        f = FailureRecord(f)
    if n is not None:
        f.check(n)
    return f


def check_same_suite(a, b) -> None:
    if a.n != b.n:
        raise SuiteMismatch(f"rankings over {a.n} and {b.n} tests")
