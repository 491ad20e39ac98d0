"""Command line interface.

Every stage reads the previous stage's files, so each one can be run alone::

    entp gen-synthetic --n 200 --seed 7 --out scen/
    entp prioritize --coverage scen/coverage.csv --delta scen/delta.txt \\
        --cost scen/cost.csv --traces scen/traces.jsonl --out run/
    entp select --ensemble run/ensemble.json --budget 75 --out run/
    entp consensus --ensemble run/selected.json --method ky --out run/ky_75.json
    entp schedule --ranking run/ky_75.json --nproc 4 --out run/plan.json
    entp evaluate --ranking run/ky_75.json --cost scen/cost.csv \\
        --failures scen/failures.txt

Exit codes: 0 success, 2 input error, 3 config error, 4 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .consensus import KYParams, METHODS, agreement_score, make_consensus
from .diversity import DiversitySelector
from .errors import ConfigError, EnTPError, InputError, InvariantViolation, MalformedFile, MissingCost
from .heuristics import EnsembleConfig, build_ensemble, read_ensemble_config
from .io import (
    NameTable,
    dumps_ensemble,
    dumps_names,
    dumps_ranking,
    load_snapshot,
    read_costs,
    read_failures,
    read_names,
    read_ensemble,
    read_ranking,
    write_ranking,
)
from .metrics import apfd, evaluate as evaluate_metrics
from .model import flatten
from .pipeline import PipelineConfig, diversity_csv, metrics_csv, run_pipeline, stage
from .schedule import ExecutionPlan, make_plan, simulate
from .synthetic import gen_synthetic


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ConfigError.exit_code, f"{self.prog}: error: {message}\n")


def _csv_list(conv):
    def parse(s):
        try:
            return tuple(conv(x) for x in s.split(",") if x.strip())
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad list {s!r}") from None

    return parse


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8", newline="\n")


def _add_snapshot(p, required=True):
    p.add_argument("--coverage", type=Path, required=required)
    p.add_argument("--delta", type=Path, required=required)
    p.add_argument("--cost", type=Path, required=required)
    p.add_argument("--traces", type=Path)


def _add_ky(p):
    p.add_argument("--N", type=int, default=200, help="max sweeps (0..200)")
    p.add_argument("--M", type=int, default=7, help="window size (1..7)")
    p.add_argument("--seed", type=int, default=0)


def _table(args, n: int) -> NameTable:
    if getattr(args, "names", None) is not None:
        t = read_names(args.names)
        if len(t) != n:
            raise InputError(f"{args.names}: {len(t)} names for {n} tests")
        return t
    return NameTable([str(i) for i in range(n)])


def cmd_prioritize(args) -> int:
    with stage("load"):
        snap = load_snapshot(args.coverage, args.delta, args.cost, args.traces)
    with stage("prioritize"):
        cfg = read_ensemble_config(args.ensemble_config) if args.ensemble_config else EnsembleConfig()
        if args.no_traces:
            cfg = cfg.without_traces()
        E = build_ensemble(snap, cfg)
    out = args.out
    (out / "standalone").mkdir(parents=True, exist_ok=True)
    done = set()
    for label, r in E:
        if label not in done:
            write_ranking(out / "standalone" / f"{label}.json", r, label)
            done.add(label)
    _emit(dumps_ensemble(E), out / "ensemble.json")
    if not NameTable(snap.names).is_identity:
        _emit(dumps_names(snap.names), out / "names.csv")
    return 0


def cmd_select(args) -> int:
    with stage("select"):
        E = read_ensemble(args.ensemble)
        sel = DiversitySelector(budget=args.budget).fit(E)
        chosen = sel.transform(E)
    if args.out is None:
        sys.stdout.write(dumps_ensemble(chosen))
        sys.stderr.write(diversity_csv(sel.report()))
    else:
        _emit(dumps_ensemble(chosen), args.out / "selected.json")
        _emit(diversity_csv(sel.report()), args.out / "diversity.csv")
    return 0


def cmd_consensus(args) -> int:
    with stage("consensus"):
        KYParams(args.N, args.M, args.seed)
        R = read_ensemble(args.ensemble)
        est = make_consensus(args.method, args.N, args.M, args.seed).fit(R)
        cons = est.consensus_
        prov = {
            "method": args.method,
            "agreement_score": agreement_score(flatten(cons), R),
        }
        if args.method == "ky":
            prov["params"] = {"N": args.N, "M": args.M, "seed": args.seed}
            prov["sweeps"] = est.n_iter_
    _emit(dumps_ranking(cons, args.label or args.method, provenance=prov), args.out)
    return 0


def cmd_schedule(args) -> int:
    with stage("schedule"):
        label, r = read_ranking(args.ranking)
        plan = make_plan(r, args.nproc)
    _emit(json.dumps(plan.to_obj()) + "\n", args.out)
    if args.timeline is not None:
        if args.cost is None:
            raise ConfigError("--timeline needs --cost")
        with stage("schedule"):
            table = _table(args, plan.n)
            costs = read_costs(args.cost, table)
            failures = read_failures(args.failures, table) if args.failures else ()
            missing = [t for t in range(plan.n) if t not in costs]
            if missing:
                raise MissingCost(missing[0])
            tl = simulate(plan, [costs[t] for t in range(plan.n)], failures)
        _emit(tl.to_csv(), args.timeline)
    return 0


def cmd_evaluate(args) -> int:
    with stage("evaluate"):
        items = []
        for path in args.ranking or ():
            items.append(read_ranking(path))
        if args.ensemble is not None:
            seen = set()
            for label, r in read_ensemble(args.ensemble):
                if label not in seen:
                    items.append((label, r))
                    seen.add(label)
        if args.plan is not None:
            obj = json.loads(Path(args.plan).read_text(encoding="utf-8"))
            try:
                plan = ExecutionPlan.from_obj(obj)
            except (KeyError, TypeError, InvariantViolation) as exc:
                raise MalformedFile(args.plan, None, str(exc)) from None
        if not items:
            raise ConfigError("nothing to evaluate; give --ranking or --ensemble")
        n = items[0][1].n
        table = _table(args, n)
        failures = read_failures(args.failures, table)
        failures.check(n)
        if args.cost is not None:
            c = read_costs(args.cost, table)
            missing = [t for t in range(n) if t not in c]
            if missing:
                raise MissingCost(missing[0])
            cost = [c[t] for t in range(n)]
        else:
            cost = None
        rows = []
        for label, r in items:
            a, ac, e = evaluate_metrics(r, cost or [1.0] * n, failures)
            rows.append((label, a, ac if cost is not None else None, e))
        if args.plan is not None and failures.failed:
            rows.append(("plan", apfd(plan, failures), None, None))
    _emit(metrics_csv(rows), args.out)
    return 0


def cmd_pipeline(args) -> int:
    cfg = PipelineConfig(
        out=args.out,
        coverage=args.coverage,
        delta=args.delta,
        cost=args.cost,
        traces=args.traces,
        failures=args.failures,
        ensemble=args.ensemble,
        ensemble_config=args.ensemble_config,
        budgets=args.budget,
        methods=args.method,
        ky=KYParams(args.N, args.M, args.seed),
        nproc=args.nproc,
    )
    run_pipeline(cfg)
    return 0


def cmd_gen_synthetic(args) -> int:
    with stage("gen-synthetic"):
        gen_synthetic(
            n=args.n,
            blocks=args.blocks,
            delta_frac=args.delta_frac,
            imbalance=args.imbalance,
            fail_frac=args.fail_frac,
            correlation=args.correlation,
            seed=args.seed,
            out=args.out,
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entp", description="Ensemble test prioritization.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("prioritize", help="run the standalone heuristics")
    _add_snapshot(p)
    p.add_argument("--ensemble-config", type=Path)
    p.add_argument("--no-traces", action="store_true", help="drop coluw/colw from the config")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_prioritize)

    p = sub.add_parser("select", help="keep the top-k%% most diverse rankings")
    p.add_argument("--ensemble", type=Path, required=True)
    p.add_argument("--budget", type=float, default=75)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("consensus", help="aggregate an ensemble")
    p.add_argument("--ensemble", type=Path, required=True)
    p.add_argument("--method", choices=METHODS, default="ky")
    _add_ky(p)
    p.add_argument("--label", help="strategy label in the output (default: method)")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_consensus)

    p = sub.add_parser("schedule", help="turn a consensus into an execution plan")
    p.add_argument("--ranking", type=Path, required=True)
    p.add_argument("--nproc", type=int, default=1)
    p.add_argument("--cost", type=Path)
    p.add_argument("--failures", type=Path)
    p.add_argument("--names", type=Path)
    p.add_argument("--timeline", type=Path, help="write the simulated timeline CSV here")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("evaluate", help="APFD, APFD_c and EPS of rankings")
    p.add_argument("--ranking", type=Path, action="append")
    p.add_argument("--ensemble", type=Path)
    p.add_argument("--plan", type=Path, help="also report APFD by batch position")
    p.add_argument("--failures", type=Path, required=True)
    p.add_argument("--cost", type=Path)
    p.add_argument("--names", type=Path)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="run all stages")
    _add_snapshot(p, required=False)
    p.add_argument("--failures", type=Path)
    p.add_argument("--ensemble", type=Path, help="precomputed ensemble instead of a snapshot")
    p.add_argument("--ensemble-config", type=Path)
    p.add_argument("--budget", type=_csv_list(float), default=(75.0,), help="comma list, e.g. 100,75")
    p.add_argument("--method", type=_csv_list(str), default=("ky",), help="comma list of " + ",".join(METHODS))
    _add_ky(p)
    p.add_argument("--nproc", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("gen-synthetic", help="write a seeded synthetic scenario")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--blocks", type=int, default=200)
    p.add_argument("--delta-frac", type=float, default=0.05)
    p.add_argument("--imbalance", type=float, default=2.0)
    p.add_argument("--fail-frac", type=float, default=0.1)
    p.add_argument("--correlation", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_gen_synthetic)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EnTPError as err:
        print(f"entp {args.command}: {err}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
