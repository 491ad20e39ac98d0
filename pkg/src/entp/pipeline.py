"""End-to-end runs: prioritize -> select -> aggregate -> schedule -> evaluate."""

from __future__ import annotations

import contextlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

from .consensus import KYParams, METHODS, agreement_score, make_consensus
from .diversity import DiversitySelector, _check_budget
from .errors import ConfigError, EnTPError, MissingCost
from .heuristics import EnsembleConfig, build_ensemble, read_ensemble_config
from .io import (
    NameTable,
    SNAPSHOT_FILES,
    dumps_names,
    load_snapshot,
    read_costs,
    read_ensemble,
    read_failures,
    write_ensemble,
    write_ranking,
)
from .metrics import evaluate
from .model import Ensemble, flatten
from .schedule import make_plan, simulate

__all__ = ["PipelineConfig", "run_pipeline", "budget_label", "metrics_csv", "diversity_csv"]


def budget_label(k) -> str:
    k = float(k)
    return str(int(k)) if k.is_integer() else repr(k)


@dataclass
class PipelineConfig:
    """Inputs and knobs for :func:`run_pipeline`.

    Either a snapshot (``coverage``, ``delta``, ``cost`` and optionally
    ``traces``) or a precomputed ``ensemble`` JSON must be given.  Every
    ``method`` is run at every ``budget``.
    """

    out: Path
    coverage: Optional[Path] = None
    delta: Optional[Path] = None
    cost: Optional[Path] = None
    traces: Optional[Path] = None
    failures: Optional[Path] = None
    ensemble: Optional[Path] = None
    ensemble_config: Optional[Path] = None
    budgets: Tuple[float, ...] = (75,)
    methods: Tuple[str, ...] = ("ky",)
    ky: KYParams = field(default_factory=KYParams)
    nproc: int = 1

    def __post_init__(self):
        self.out = Path(self.out)
        self.budgets = tuple(self.budgets)
        self.methods = tuple(self.methods)
        if not self.budgets or not self.methods:
            raise ConfigError("need at least one budget and one method")
        for k in self.budgets:
            _check_budget(k)
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; expected one of {METHODS}")
        if isinstance(self.nproc, bool) or int(self.nproc) != self.nproc or self.nproc < 1:
            raise ConfigError(f"nproc must be a positive integer, got {self.nproc}")
        if self.ensemble is None and None in (self.coverage, self.delta, self.cost):
            raise ConfigError("give --coverage, --delta and --cost, or --ensemble")


class StageError(EnTPError):
    def __init__(self, stage: str, err: EnTPError):
        self.stage = stage
        self.cause = err
        self.exit_code = err.exit_code
        super().__init__(f"[{stage}] {err}")


@contextlib.contextmanager
def stage(name: str):
    try:
        yield
    except StageError:
        raise
    except EnTPError as err:
        raise StageError(name, err) from err


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def _fmt(x) -> str:
    return "NA" if x is None else f"{x:.6f}"


def metrics_csv(rows: Sequence[Tuple[str, Optional[float], Optional[float], float]]) -> str:
    out = ["strategy,apfd,apfd_c,eps\n"]
    out += [f"{label},{_fmt(a)},{_fmt(c)},{_fmt(e)}\n" for label, a, c, e in rows]
    return "".join(out)


def diversity_csv(report) -> str:
    out = ["label,Div,selected\n"]
    out += [f"{label},{div},{int(sel)}\n" for label, div, sel in report]
    return "".join(out)


def _select(E: Ensemble, k):
    """Return ``(selected, report)``; a single ranking passes through untouched."""
    if len(E) == 1:
        return E, [(E.labels[0], 0, True)]
    sel = DiversitySelector(budget=k).fit(E)
    return sel.transform(E), sel.report()


def run_pipeline(cfg: PipelineConfig) -> Dict[str, Path]:
    """Run every stage and write the artifacts under ``cfg.out``.

    Layout::

        standalone/<label>.json     each distinct strategy once
        ensemble.json               the full (repeated) ensemble
        selection/<k>.json          selected sub-ensemble per budget
        selection/<k>_diversity.csv label,Div,selected
        consensus/<method>_<k>.json consensus with provenance
        plans/<method>_<k>.json     execution plan
        timelines/<method>_<k>.csv  only with failures and costs
        metrics.csv                 only with failures
        names.csv                   only when tests have external names
    """
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    written: Dict[str, Path] = {}

    names = None
    cost = None
    with stage("load"):
        if cfg.ensemble is not None:
            E = read_ensemble(cfg.ensemble)
            table = NameTable([str(i) for i in range(E.n)])
            if cfg.cost is not None:
                c = read_costs(cfg.cost, table)
                missing = [t for t in range(E.n) if t not in c]
                if missing:
                    raise MissingCost(missing[0])
                cost = [c[t] for t in range(E.n)]
            standalone = {}
            for label, r in E:
                standalone.setdefault(label, r)
        else:
            snap = load_snapshot(cfg.coverage, cfg.delta, cfg.cost, cfg.traces)
            table = NameTable(snap.names)
            cost = list(snap.cost)
            names = snap.names
        failures = read_failures(cfg.failures, table) if cfg.failures is not None else None
        if failures is not None:
            failures.check(len(table))

    if cfg.ensemble is None:
        with stage("prioritize"):
            ens_cfg = (
                read_ensemble_config(cfg.ensemble_config)
                if cfg.ensemble_config is not None
                else EnsembleConfig()
            )
            E = build_ensemble(snap, ens_cfg)
            standalone = {}
            for label, r in E:
                standalone.setdefault(label, r)
        for label, r in standalone.items():
            p = out / "standalone" / f"{label}.json"
            p.parent.mkdir(parents=True, exist_ok=True)
            write_ranking(p, r, label)
        if names is not None and not table.is_identity:
            written["names"] = out / SNAPSHOT_FILES["names"]
            _write(written["names"], dumps_names(names))
    write_ensemble(out / "ensemble.json", E)
    written["ensemble"] = out / "ensemble.json"

    rows = []
    if failures is not None:
        with stage("evaluate"):
            for label, r in standalone.items():
                a, c, e = evaluate(r, cost if cost is not None else [1.0] * E.n, failures)
                rows.append((label, a, c if cost is not None else None, e))

    for k in cfg.budgets:
        kl = budget_label(k)
        with stage("select"):
            selected, report = _select(E, k)
        (out / "selection").mkdir(exist_ok=True)
        write_ensemble(out / "selection" / f"{kl}.json", selected)
        _write(out / "selection" / f"{kl}_diversity.csv", diversity_csv(report))

        for method in cfg.methods:
            label = f"{method}_{kl}"
            with stage("consensus"):
                est = make_consensus(method, cfg.ky.N, cfg.ky.M, cfg.ky.seed).fit(selected)
                cons = est.consensus_
                prov = {
                    "method": method,
                    "budget": float(k) if not float(k).is_integer() else int(k),
                    "selected": list(selected.labels),
                    "agreement_score": agreement_score(flatten(cons), selected),
                }
                if method == "ky":
                    prov["params"] = {"N": cfg.ky.N, "M": cfg.ky.M, "seed": cfg.ky.seed}
                    prov["sweeps"] = est.n_iter_
            (out / "consensus").mkdir(exist_ok=True)
            write_ranking(out / "consensus" / f"{label}.json", cons, label, provenance=prov)

            with stage("schedule"):
                plan = make_plan(cons, cfg.nproc)
            _write(out / "plans" / f"{label}.json", json.dumps(plan.to_obj()) + "\n")
            if failures is not None and cost is not None:
                with stage("schedule"):
                    tl = simulate(plan, cost, failures)
                _write(out / "timelines" / f"{label}.csv", tl.to_csv())

            if failures is not None:
                with stage("evaluate"):
                    a, c, e = evaluate(cons, cost if cost is not None else [1.0] * E.n, failures)
                rows.append((label, a, c if cost is not None else None, e))

    if failures is not None:
        written["metrics"] = out / "metrics.csv"
        _write(written["metrics"], metrics_csv(rows))
    return written
