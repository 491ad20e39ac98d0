"""Execution planning: tie groups become parallel windows chunked to ``nproc``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import InvalidParams, InvariantViolation, MissingCost
from .model import FailureRecord, StrictRanking, TiedRanking
from .validation import check_failures, check_tied

__all__ = ["ExecutionPlan", "Timeline", "make_plan", "simulate", "Scheduler"]


@dataclass(frozen=True)
class ExecutionPlan:
    """Batches run one after another; tests inside a batch run concurrently."""

    batches: Tuple[Tuple[int, ...], ...]
    nproc: int

    def __post_init__(self):
        if self.nproc < 1:
            raise InvalidParams(f"nproc must be >= 1, got {self.nproc}")
        batches = tuple(tuple(int(t) for t in b) for b in self.batches)
        flat = [t for b in batches for t in b]
        if len(set(flat)) != len(flat) or set(flat) != set(range(len(flat))):
            raise InvariantViolation("plan batches do not partition the suite")
        for b in batches:
            if not 0 < len(b) <= self.nproc:
                raise InvariantViolation(f"batch of size {len(b)} with nproc={self.nproc}")
        object.__setattr__(self, "batches", batches)

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.batches)

    def positions(self) -> List[int]:
        """1-based batch index of every test, indexed by test id."""
        pos = [0] * self.n
        for i, b in enumerate(self.batches, start=1):
            for t in b:
                pos[t] = i
        return pos

    def to_obj(self) -> dict:
        return {"nproc": self.nproc, "batches": [list(b) for b in self.batches]}

    @classmethod
    def from_obj(cls, obj: dict) -> "ExecutionPlan":
        return cls(tuple(tuple(b) for b in obj["batches"]), int(obj["nproc"]))

    def __len__(self) -> int:
        return len(self.batches)


@dataclass(frozen=True)
class Timeline:
    """Per batch: ``(batch index, completion time, failures seen so far)``."""

    events: Tuple[Tuple[int, float, int], ...]

    @property
    def makespan(self) -> float:
        return self.events[-1][1] if self.events else 0.0

    def to_csv(self) -> str:
        from .io import format_cost

        rows = ["batch,completion_time,cum_failures\n"]
        rows += [f"{i},{format_cost(t)},{f}\n" for i, t, f in self.events]
        return "".join(rows)


def make_plan(ranking, nproc: int) -> ExecutionPlan:
    """Each tie group is one window; windows wider than ``nproc`` are chunked in id order."""
    if isinstance(nproc, bool) or int(nproc) != nproc or nproc < 1:
        raise InvalidParams(f"nproc must be a positive integer, got {nproc!r}")
    nproc = int(nproc)
    tied = check_tied(ranking)
    batches = []
    for g in tied.groups:
        for i in range(0, len(g), nproc):
            batches.append(g[i : i + nproc])
    return ExecutionPlan(tuple(batches), nproc)


def simulate(plan: ExecutionPlan, cost: Sequence[float], failures=()) -> Timeline:
    """Barrier-synchronized replay: a batch lasts as long as its slowest test."""
    failures = check_failures(failures, plan.n)
    if len(cost) < plan.n:
        raise MissingCost(len(cost))
    clock = 0.0
    seen = 0
    events = []
    for i, b in enumerate(plan.batches, start=1):
        clock += max(float(cost[t]) for t in b)
        seen += sum(1 for t in b if t in failures.failed)
        events.append((i, clock, seen))
    return Timeline(tuple(events))


class Scheduler(BaseEstimator):
    """Consensus -> ExecutionPlan; ``fit`` stores ``plan_``."""

    def __init__(self, nproc=1):
        self.nproc = nproc

    def fit(self, X, y=None):
        self.plan_ = make_plan(X, self.nproc)
        return self

    def fit_predict(self, X, y=None) -> ExecutionPlan:
        return self.fit(X).plan_

    def simulate(self, cost, failures=()) -> Timeline:
        check_is_fitted(self, "plan_")
        return simulate(self.plan_, cost, failures)
