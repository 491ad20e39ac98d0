"""Core domain types: rankings, ensembles, suite snapshots and failure records.

Tests are dense integer ids ``0..n-1``.  Ranks are 1-based throughout (rank 1 is
the first test executed).  All types are immutable once built.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DuplicateTest,
    EmptyTrace,
    InputError,
    MissingTest,
    SuiteMismatch,
    UnknownTest,
)

__all__ = [
    "StrictRanking",
    "TiedRanking",
    "Ensemble",
    "SuiteSnapshot",
    "FailureRecord",
    "validate_strict",
    "flatten",
]


def validate_strict(order: Sequence[int], n: int) -> None:
    """Raise unless ``order`` is a permutation of ``0..n-1``.

    Duplicates are reported before unknown ids, unknown ids before missing ones.
    """
    seen = set()
    for t in order:
        t = int(t)
        if t in seen:
            raise DuplicateTest(t)
        seen.add(t)
    for t in order:
        if not 0 <= int(t) < n:
            raise UnknownTest(int(t), f"suite has {n} tests")
    for t in range(n):
        if t not in seen:
            raise MissingTest(t)


@dataclass(frozen=True)
class StrictRanking:
    """A total order of the suite; ``order[0]`` runs first."""

    order: Tuple[int, ...]

    def __init__(self, order: Iterable[int]):
        order = tuple(int(t) for t in order)
        validate_strict(order, len(order))
        object.__setattr__(self, "order", order)

    @property
    def n(self) -> int:
        return len(self.order)

    @cached_property
    def ranks(self) -> np.ndarray:
        """1-based rank of every test, indexed by test id."""
        r = np.empty(self.n, dtype=np.int64)
        r[np.asarray(self.order, dtype=np.int64)] = np.arange(1, self.n + 1)
        r.setflags(write=False)
        return r

    def rank(self, test: int) -> int:
        return int(self.ranks[test])

    def reversed(self) -> "StrictRanking":
        return StrictRanking(self.order[::-1])

    def to_tied(self) -> "TiedRanking":
        return TiedRanking([t] for t in self.order)

    def __iter__(self) -> Iterator[int]:
        return iter(self.order)

    def __len__(self) -> int:
        return len(self.order)


@dataclass(frozen=True)
class TiedRanking:
    """Ordered rank groups; every test in group ``g`` has rank ``g + 1``.

    Group members are stored in ascending id order.
    """

    groups: Tuple[Tuple[int, ...], ...]

    def __init__(self, groups: Iterable[Iterable[int]]):
        norm = []
        for g in groups:
            g = tuple(sorted(int(t) for t in g))
            if not g:
                raise InputError("tied ranking contains an empty group")
            norm.append(g)
        flat = [t for g in norm for t in g]
        validate_strict(flat, len(flat))
        object.__setattr__(self, "groups", tuple(norm))

    @property
    def n(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def is_strict(self) -> bool:
        return all(len(g) == 1 for g in self.groups)

    @cached_property
    def ranks(self) -> np.ndarray:
        r = np.empty(self.n, dtype=np.int64)
        for i, g in enumerate(self.groups, start=1):
            r[list(g)] = i
        r.setflags(write=False)
        return r

    def __len__(self) -> int:
        return len(self.groups)


def flatten(tied: TiedRanking) -> StrictRanking:
    """Expand groups in order, ascending id inside each group."""
    if isinstance(tied, StrictRanking):
        return tied
    return StrictRanking(t for g in tied.groups for t in g)


@dataclass(frozen=True)
class Ensemble:
    """Ordered multiset of labelled strict rankings over one suite.

    Duplicates are meaningful: an entry repeated ``k`` times votes with weight ``k``.
    """

    entries: Tuple[Tuple[str, StrictRanking], ...]

    def __init__(self, entries: Iterable[Tuple[str, StrictRanking]]):
        entries = tuple((str(label), r) for label, r in entries)
        if not entries:
            raise InputError("ensemble needs at least one ranking")
        n = entries[0][1].n
        for label, r in entries:
            if not isinstance(r, StrictRanking):
                raise InputError(f"ensemble entry {label!r} is not a strict ranking")
            if r.n != n:
                raise SuiteMismatch(
                    f"ensemble entry {label!r} ranks {r.n} tests, expected {n}"
                )
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_orders(cls, orders, labels: Optional[Sequence[str]] = None) -> "Ensemble":
        orders = [StrictRanking(o) for o in orders]
        if labels is None:
            labels = [f"p{i + 1}" for i in range(len(orders))]
        if len(labels) != len(orders):
            raise InputError("labels and orders differ in length")
        return cls(zip(labels, orders))

    @property
    def n(self) -> int:
        return self.entries[0][1].n

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _ in self.entries)

    @property
    def rankings(self) -> Tuple[StrictRanking, ...]:
        return tuple(r for _, r in self.entries)

    def orders(self) -> np.ndarray:
        """``(m, n)`` array, row ``i`` is the order of entry ``i``."""
        return np.array([r.order for _, r in self.entries], dtype=np.int64).reshape(
            len(self), self.n
        )

    def rank_matrix(self) -> np.ndarray:
        """``(m, n)`` array of 1-based ranks, column ``t`` is test ``t``."""
        return np.vstack([r.ranks for _, r in self.entries])

    def subset(self, indices: Iterable[int]) -> "Ensemble":
        return Ensemble(self.entries[i] for i in indices)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]


@dataclass(frozen=True)
class FailureRecord:
    failed: frozenset = field(default_factory=frozenset)

    def __init__(self, failed: Iterable[int] = ()):
        object.__setattr__(self, "failed", frozenset(int(t) for t in failed))

    def check(self, n: int) -> None:
        for t in sorted(self.failed):
            if not 0 <= t < n:
                raise UnknownTest(t, "in failure record")

    def __len__(self) -> int:
        return len(self.failed)

    def __contains__(self, t) -> bool:
        return t in self.failed

    def verdicts(self, order: Iterable[int]) -> np.ndarray:
        return np.array([t in self.failed for t in order], dtype=np.int8)


@dataclass(frozen=True)
class SuiteSnapshot:
    """Per-test coverage, costs and optional traces plus the change set.

    ``traces[t]`` is a sequence of ``(block, instruction_count)`` pairs, raw or
    already linearized.  ``names[t]`` is the external name of test ``t``.
    """

    cov: Tuple[frozenset, ...]
    delta: frozenset
    cost: Tuple[float, ...]
    traces: Optional[Tuple[Tuple[Tuple[int, int], ...], ...]] = None
    names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        cov = tuple(frozenset(int(b) for b in c) for c in self.cov)
        n = len(cov)
        cost = _per_test(self.cost, n, "cost")
        cost = tuple(float(c) for c in cost)
        traces = self.traces
        if traces is not None:
            traces = _per_test(traces, n, "trace")
            norm = []
            for t, path in enumerate(traces):
                path = tuple((int(b), int(c)) for b, c in path)
                if not path:
                    raise EmptyTrace(t)
                norm.append(path)
            traces = tuple(norm)
        names = self.names
        if names is None:
            names = tuple(str(t) for t in range(n))
        names = tuple(str(x) for x in names)
        if len(names) != n:
            raise SuiteMismatch(f"{len(names)} names for {n} tests")
        if len(set(names)) != n:
            raise InputError("test names are not unique")
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "delta", frozenset(int(b) for b in self.delta))
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "traces", traces)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return len(self.cov)

    @property
    def has_traces(self) -> bool:
        return self.traces is not None


def _per_test(values, n, what):
    if isinstance(values, Mapping):
        for t in values:
            if not 0 <= int(t) < n:
                raise UnknownTest(int(t), f"in {what} data")
        out = []
        for t in range(n):
            if t not in values:
                raise MissingTest(t, f"no {what}")
            out.append(values[t])
        return tuple(out)
    values = tuple(values)
    if len(values) < n:
        raise MissingTest(len(values), f"no {what}")
    if len(values) > n:
        raise UnknownTest(n, f"in {what} data")
    return values
