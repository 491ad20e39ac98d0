"""Reading and writing the on-disk artifacts.

File formats (all UTF-8, one record per line, blank lines ignored):

``coverage.csv``   ``test_id,block_id,block_id,...``
``delta.txt``      one block id per line
``cost.csv``       ``test_id,cost`` (optional ``test_id,cost`` header)
``traces.jsonl``   ``{"test": <id>, "path": [[block_id, instr_count], ...]}``
``failures.txt``   one failing test id per line
rankings           ``{"strategy": "<label>", "groups": [[ids...], ...]}``

Test ids in the input files are external names.  When the names in
``coverage.csv`` are exactly the integers ``0..n-1`` they are used as-is;
otherwise each name gets the next dense id in order of first appearance and the
mapping is kept on the snapshot (and written to ``names.csv`` by the writers).

The writers emit a canonical form: tests in id order, block ids ascending,
integral costs without a decimal point.  Reading a canonical file and writing it
back is byte-identical.
"""

from __future__ import annotations

import json
import os
import warnings
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .errors import (
    EmptyDelta,
    EmptyDeltaWarning,
    InputError,
    MalformedFile,
    MissingTest,
    NonPositiveCost,
    UnknownTest,
)
from .model import Ensemble, FailureRecord, StrictRanking, SuiteSnapshot, TiedRanking

PathLike = Union[str, os.PathLike]

SNAPSHOT_FILES = {
    "coverage": "coverage.csv",
    "delta": "delta.txt",
    "cost": "cost.csv",
    "traces": "traces.jsonl",
    "failures": "failures.txt",
    "names": "names.csv",
}


def _lines(path: PathLike):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if line:
            yield lineno, line


def _block(tok: str, path, lineno) -> int:
    try:
        b = int(tok)
    except ValueError:
        raise MalformedFile(path, lineno, f"block id {tok!r} is not an integer") from None
    if b < 0:
        raise MalformedFile(path, lineno, f"negative block id {b}")
    return b


class NameTable:
    """Bidirectional map between external test names and dense ids."""

    def __init__(self, names: Sequence[str]):
        self.names = tuple(names)
        self._ids = {name: i for i, name in enumerate(self.names)}
        if len(self._ids) != len(self.names):
            raise InputError("duplicate test names")

    @classmethod
    def from_names(cls, names: Sequence[str]) -> "NameTable":
        names = list(names)
        canonical = all(x.isdigit() and str(int(x)) == x for x in names)
        if canonical and sorted(int(x) for x in names) == list(range(len(names))):
            return cls([str(i) for i in range(len(names))])
        return cls(names)

    @property
    def is_identity(self) -> bool:
        return all(name == str(i) for i, name in enumerate(self.names))

    def id(self, name, path=None, lineno=None) -> int:
        key = str(name).strip()
        if key in self._ids:
            return self._ids[key]
        if path is not None:
            raise UnknownTest(key, f"{path}:{lineno}")
        raise UnknownTest(key)

    def __len__(self) -> int:
        return len(self.names)


def read_coverage(path: PathLike) -> Tuple[List[str], List[frozenset]]:
    names: List[str] = []
    cov: List[frozenset] = []
    seen = set()
    for lineno, line in _lines(path):
        parts = [p.strip() for p in line.split(",")]
        name = parts[0]
        if not name:
            raise MalformedFile(path, lineno, "empty test id")
        if name in seen:
            raise MalformedFile(path, lineno, f"test {name!r} listed twice")
        seen.add(name)
        blocks = frozenset(_block(p, path, lineno) for p in parts[1:] if p != "")
        names.append(name)
        cov.append(blocks)
    if not names:
        raise MalformedFile(path, None, "no tests")
    return names, cov


def read_delta(path: PathLike) -> frozenset:
    return frozenset(_block(line, path, lineno) for lineno, line in _lines(path))


def _parse_cost(tok: str, path, lineno) -> float:
    try:
        d = Decimal(tok)
    except InvalidOperation:
        raise MalformedFile(path, lineno, f"cost {tok!r} is not a number") from None
    if not d.is_finite():
        raise MalformedFile(path, lineno, f"cost {tok!r} is not finite")
    return float(d)


def read_costs(path: PathLike, table: NameTable) -> Dict[int, float]:
    costs: Dict[int, float] = {}
    for k, (lineno, line) in enumerate(_lines(path)):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise MalformedFile(path, lineno, "expected 'test_id,cost'")
        if k == 0 and parts[1].lower() == "cost":
            continue
        t = table.id(parts[0], path, lineno)
        if t in costs:
            raise MalformedFile(path, lineno, f"duplicate cost for test {parts[0]!r}")
        c = _parse_cost(parts[1], path, lineno)
        if c <= 0:
            raise NonPositiveCost(parts[0], f"{path}:{lineno}")
        costs[t] = c
    return costs


def read_traces(path: PathLike, table: NameTable) -> Dict[int, tuple]:
    traces: Dict[int, tuple] = {}
    for lineno, line in _lines(path):
        try:
            obj = json.loads(line)
            name = obj["test"]
            path_ = obj["path"]
            steps = tuple((int(b), int(c)) for b, c in path_)
        except (ValueError, KeyError, TypeError) as exc:
            raise MalformedFile(path, lineno, f"bad trace record: {exc}") from None
        for b, c in steps:
            if b < 0 or c <= 0:
                raise MalformedFile(
                    path, lineno, "block ids must be >= 0 and instruction counts > 0"
                )
        t = table.id(name, path, lineno)
        if t in traces:
            raise MalformedFile(path, lineno, f"duplicate trace for test {name!r}")
        traces[t] = steps
    return traces


def read_failures(path: PathLike, table: Optional[NameTable] = None) -> FailureRecord:
    failed = set()
    for lineno, line in _lines(path):
        if table is not None:
            failed.add(table.id(line, path, lineno))
        else:
            try:
                failed.add(int(line))
            except ValueError:
                raise MalformedFile(path, lineno, f"test id {line!r}") from None
    return FailureRecord(failed)


def read_names(path: PathLike) -> NameTable:
    pairs = {}
    for lineno, line in _lines(path):
        idx, _, name = line.partition(",")
        try:
            pairs[int(idx)] = name.strip()
        except ValueError:
            raise MalformedFile(path, lineno, "expected 'id,name'") from None
    if sorted(pairs) != list(range(len(pairs))):
        raise MalformedFile(path, None, "ids are not contiguous from 0")
    return NameTable([pairs[i] for i in range(len(pairs))])


def load_snapshot(
    coverage: PathLike,
    delta: PathLike,
    cost: PathLike,
    traces: Optional[PathLike] = None,
) -> SuiteSnapshot:
    """Parse and validate one version pair's inputs.

    Raises MissingTest when a covered test has no cost (or trace, if traces are
    given).  An empty change set only warns: it is legal input but the coverage
    based heuristics cannot rank against it.
    """
    names, cov = read_coverage(coverage)
    table = NameTable.from_names(names)
    order = [table.id(name) for name in names]
    cov_by_id = [frozenset()] * len(names)
    for t, c in zip(order, cov):
        cov_by_id[t] = c

    d = read_delta(delta)
    if not d:
        warnings.warn(f"{delta}: empty change set", EmptyDeltaWarning, stacklevel=2)

    costs = read_costs(cost, table)
    for t in range(len(table)):
        if t not in costs:
            raise MissingTest(t, f"{table.names[t]!r} absent from {cost}")

    tr = None
    if traces is not None:
        tr_map = read_traces(traces, table)
        for t in range(len(table)):
            if t not in tr_map:
                raise MissingTest(t, f"{table.names[t]!r} absent from {traces}")
        tr = tuple(tr_map[t] for t in range(len(table)))

    return SuiteSnapshot(
        cov=tuple(cov_by_id),
        delta=d,
        cost=tuple(costs[t] for t in range(len(table))),
        traces=tr,
        names=table.names,
    )


def load_snapshot_dir(directory: PathLike, traces: Optional[bool] = None) -> SuiteSnapshot:
    """Load a snapshot from the standard file names inside ``directory``.

    ``traces=None`` loads ``traces.jsonl`` only when it exists.
    """
    d = Path(directory)
    tr = d / SNAPSHOT_FILES["traces"]
    if traces is None:
        traces = tr.exists()
    return load_snapshot(
        d / SNAPSHOT_FILES["coverage"],
        d / SNAPSHOT_FILES["delta"],
        d / SNAPSHOT_FILES["cost"],
        tr if traces else None,
    )


def require_delta(snapshot: SuiteSnapshot) -> None:
    if not snapshot.delta:
        raise EmptyDelta()


# -- writers ----------------------------------------------------------------


def format_cost(c: float) -> str:
    if float(c).is_integer():
        return str(int(c))
    return repr(float(c))


def _write(path: PathLike, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def dumps_coverage(snapshot: SuiteSnapshot) -> str:
    lines = []
    for t in range(snapshot.n):
        cells = [snapshot.names[t]] + [str(b) for b in sorted(snapshot.cov[t])]
        lines.append(",".join(cells))
    return "".join(line + "\n" for line in lines)


def dumps_delta(delta: Iterable[int]) -> str:
    return "".join(f"{b}\n" for b in sorted(delta))


def dumps_costs(snapshot: SuiteSnapshot) -> str:
    return "".join(
        f"{snapshot.names[t]},{format_cost(snapshot.cost[t])}\n" for t in range(snapshot.n)
    )


def _name_token(name: str):
    return int(name) if name.isdigit() and str(int(name)) == name else name


def dumps_traces(snapshot: SuiteSnapshot) -> str:
    out = []
    for t in range(snapshot.n):
        rec = {"test": _name_token(snapshot.names[t]), "path": [list(s) for s in snapshot.traces[t]]}
        out.append(json.dumps(rec, separators=(", ", ": ")) + "\n")
    return "".join(out)


def dumps_failures(failures: FailureRecord, names: Optional[Sequence[str]] = None) -> str:
    ids = sorted(failures.failed)
    if names is None:
        return "".join(f"{t}\n" for t in ids)
    return "".join(f"{names[t]}\n" for t in ids)


def dumps_names(names: Sequence[str]) -> str:
    return "".join(f"{i},{name}\n" for i, name in enumerate(names))


def write_snapshot(
    snapshot: SuiteSnapshot,
    directory: PathLike,
    failures: Optional[FailureRecord] = None,
) -> Dict[str, Path]:
    """Write ``snapshot`` (and ``failures``) under the standard file names."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {k: d / v for k, v in SNAPSHOT_FILES.items()}
    _write(paths["coverage"], dumps_coverage(snapshot))
    _write(paths["delta"], dumps_delta(snapshot.delta))
    _write(paths["cost"], dumps_costs(snapshot))
    written = {k: paths[k] for k in ("coverage", "delta", "cost")}
    if snapshot.traces is not None:
        _write(paths["traces"], dumps_traces(snapshot))
        written["traces"] = paths["traces"]
    if failures is not None:
        _write(paths["failures"], dumps_failures(failures, snapshot.names))
        written["failures"] = paths["failures"]
    return written


# -- rankings ---------------------------------------------------------------


def ranking_to_obj(ranking, strategy: str, **extra) -> dict:
    if isinstance(ranking, StrictRanking):
        groups = [[t] for t in ranking.order]
    else:
        groups = [list(g) for g in ranking.groups]
    obj = {"strategy": strategy, "groups": groups}
    obj.update(extra)
    return obj


def ranking_from_obj(obj: dict, where="ranking"):
    """Return ``(label, ranking)``; the ranking is strict when all groups are singletons."""
    try:
        label = str(obj["strategy"])
        groups = [[int(t) for t in g] for g in obj["groups"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFile(where, None, f"bad ranking object: {exc}") from None
    tied = TiedRanking(groups)
    if tied.is_strict:
        return label, StrictRanking(g[0] for g in tied.groups)
    return label, tied


def dumps_ranking(ranking, strategy: str, **extra) -> str:
    return json.dumps(ranking_to_obj(ranking, strategy, **extra)) + "\n"


def write_ranking(path: PathLike, ranking, strategy: str, **extra) -> None:
    _write(path, dumps_ranking(ranking, strategy, **extra))


def read_ranking(path: PathLike):
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except ValueError as exc:
        raise MalformedFile(path, None, f"invalid JSON: {exc}") from None
    return ranking_from_obj(obj, path)


def dumps_ensemble(ensemble: Ensemble) -> str:
    rows = [json.dumps(ranking_to_obj(r, label)) for label, r in ensemble]
    return "[\n" + ",\n".join(rows) + "\n]\n"


def write_ensemble(path: PathLike, ensemble: Ensemble) -> None:
    _write(path, dumps_ensemble(ensemble))


def read_ensemble(path: PathLike) -> Ensemble:
    try:
        objs = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except ValueError as exc:
        raise MalformedFile(path, None, f"invalid JSON: {exc}") from None
    if isinstance(objs, dict):
        objs = [objs]
    entries = []
    for i, obj in enumerate(objs):
        label, r = ranking_from_obj(obj, f"{path}[{i}]")
        if not isinstance(r, StrictRanking):
            raise InputError(f"{path}[{i}]: ensemble rankings must be strict ({label!r} has ties)")
        entries.append((label, r))
    return Ensemble(entries)
