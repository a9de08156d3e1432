"""Command-line experiment runner.

Subcommands: ``validate`` a config, ``run`` a Monte-Carlo sweep, ``graph``
to generate and save an interaction graph, and ``report`` to re-aggregate
existing per-trial CSVs.  Exit codes: 0 ok, 1 invalid config, 2 every trial
of some algorithm diverged.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .config import ResolvedExperiment, load_config, resolve
from .diagnostics import TraceRecord, aggregate, group_by_trial, read_trace_csv, \
    write_aggregate_csv, write_trace_csv
from .engine import AlgorithmKind, run_trial
from .errors import ConfigError, DivergenceError
from .graph import build_ring_plus_random, check_strongly_connected, digraph_to_json, \
    digraph_from_json, weights_from_digraph
from .schedule import gamma_max


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    records: list[TraceRecord] | None
    error: str | None = None
    round_index: int | None = None


def _trial_task(args) -> TrialOutcome:
    exp, name, trial = args
    try:
        records = run_trial(AlgorithmKind(name), exp.wp, exp.problem, exp.schedules[name],
                            exp.noise_model, exp.oracle, horizon=exp.run.horizon,
                            master_seed=exp.run.master_seed, trial=trial,
                            record_stride=exp.run.record_stride)
        return TrialOutcome(trial=trial, records=records)
    except DivergenceError as err:
        return TrialOutcome(trial=trial, records=None, error=str(err),
                            round_index=err.round_index)


def run_algorithm(exp: ResolvedExperiment, name: str, workers: int = 1) -> list[TrialOutcome]:
    """Run all trials of one algorithm; divergences are collected, not fatal."""
    tasks = [(exp, name, t) for t in range(exp.run.trials)]
    if workers <= 1:
        outcomes = [_trial_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_trial_task, tasks))
    return sorted(outcomes, key=lambda o: o.trial)


def run_experiment(exp: ResolvedExperiment, out_dir: Path | None, workers: int = 1,
                   echo=print) -> tuple[dict[str, object], int]:
    """Execute the full sweep, write artifacts, and return (aggregates, exit code)."""
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        digraph_to_json(exp.digraph, out_dir / "graph.json", weights_scale=1.0 / exp.wp.m)
        (out_dir / "resolved-config.json").write_text(
            json.dumps(exp.raw, indent=2, sort_keys=True) + "\n")

    exit_code = 0
    reports: dict[str, object] = {}
    for name in exp.run.algorithms:
        outcomes = run_algorithm(exp, name, workers=workers)
        completed = [o for o in outcomes if o.records is not None]
        diverged = [o for o in outcomes if o.records is None]
        if out_dir is not None and exp.output.emit_per_trial:
            for o in completed:
                write_trace_csv(out_dir / f"trace_{name}_trial{o.trial:04d}.csv", o.records)
        for o in diverged:
            echo(f"{name}: trial {o.trial} diverged at round {o.round_index}: {o.error}")
        if not completed:
            echo(f"{name}: all {exp.run.trials} trials diverged")
            exit_code = 2
            continue
        report = aggregate([o.records for o in completed], config_digest=exp.digest)
        reports[name] = report
        if out_dir is not None:
            write_aggregate_csv(out_dir / f"aggregate_{name}.csv", report)
        final_mean, final_std = report.at("opt_error", report.ks[-1])
        echo(f"{name}: {len(completed)}/{exp.run.trials} trials ok, "
             f"final mean opt_error = {final_mean:.6g} (std {final_std:.3g})")
    return reports, exit_code


def cmd_validate(args) -> int:
    try:
        exp = resolve(load_config(args.config))
    except ConfigError as err:
        print(f"invalid: {err}")
        return 1
    print(f"graph: m={exp.wp.m}, {len(exp.digraph.edges)} edges, "
          f"strongly connected: {check_strongly_connected(exp.digraph)}")
    print(f"coupling bound gamma_max = {gamma_max(exp.wp):.6g}")
    for name in exp.run.algorithms:
        print(exp.schedule_reports[name])
    print("config valid")
    return 0


def cmd_run(args) -> int:
    overrides = {"trials": args.trials, "horizon": args.horizon,
                 "master_seed": args.seed, "directory": args.out}
    try:
        exp = resolve(load_config(args.config), overrides)
    except ConfigError as err:
        print(f"invalid config: {err}", file=sys.stderr)
        return 1
    out_dir = Path(exp.output.directory)
    _, exit_code = run_experiment(exp, out_dir, workers=args.workers)
    return exit_code


def cmd_graph(args) -> int:
    g = build_ring_plus_random(args.m, args.p, args.seed)
    weights_from_digraph(g)  # fails loudly if the draw is somehow unusable
    digraph_to_json(g, args.out, weights_scale=1.0 / args.m)
    print(f"wrote {args.out}: m={g.m}, {len(g.edges)} edges, "
          f"strongly connected: {check_strongly_connected(g)}")
    return 0


def cmd_report(args) -> int:
    out_dir = Path(args.dir)
    digest = ""
    resolved = out_dir / "resolved-config.json"
    if resolved.exists():
        from .config import config_digest
        digest = config_digest(json.loads(resolved.read_text()))
    found = False
    for name in ("alg1", "alg2", "pushpull_noisy"):
        paths = sorted(out_dir.glob(f"trace_{name}_trial*.csv"))
        if not paths:
            continue
        found = True
        records = [r for p in paths for r in read_trace_csv(p)]
        report = aggregate(group_by_trial(records), config_digest=digest)
        write_aggregate_csv(out_dir / f"aggregate_{name}.csv", report)
        print(f"{name}: re-aggregated {report.n_trials} trials over {len(report.ks)} rounds")
    if not found:
        print(f"no per-trial CSVs found under {out_dir}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dgtsim",
                                     description="gradient-tracking distributed-optimization simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate an experiment config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run a Monte-Carlo sweep from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="override output.directory")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="override run.master_seed")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--workers", type=int, default=1, help="concurrent trial processes")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("graph", help="generate a ring-plus-random digraph file")
    p.add_argument("-m", type=int, required=True)
    p.add_argument("-p", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("report", help="re-aggregate per-trial CSVs in a directory")
    p.add_argument("--dir", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
