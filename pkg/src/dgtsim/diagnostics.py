"""Per-round metrics and Monte-Carlo aggregation.

Consensus distances use plain Frobenius norms; convergence-to-zero statements
are unaffected by the choice of norm in finite dimension.  Across-trial
standard deviations follow the population convention (divide by N), stated in
a comment line of the aggregate CSV.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import AggregationError
from .graph import WeightPair
from .problem import RidgeProblem, global_gradient

TRACE_HEADER = ("trial", "k", "opt_error", "consensus_x", "consensus_s",
                "tracking_residual", "accumulation_norm", "grad_norm", "eig_error")
AGGREGATE_HEADER = ("k", "metric", "mean", "std", "n_trials")
STD_CONVENTION_NOTE = "# std convention: population (divide by N)"
METRIC_FIELDS = ("opt_error", "consensus_x", "consensus_s", "tracking_residual",
                 "accumulation_norm", "grad_norm", "eig_error")


@dataclass(frozen=True)
class TraceRecord:
    trial: int
    k: int
    opt_error: float
    consensus_x: float
    consensus_s: float | None
    tracking_residual: float | None
    accumulation_norm: float | None
    grad_norm: float
    eig_error: float | None


def metrics_for_round(state, wp: WeightPair, problem: RidgeProblem, trial: int = 0) -> TraceRecord:
    """Snapshot all applicable metrics of a network state (inapplicable ones are None)."""
    x = state.x
    m = wp.m
    opt_error = float(np.linalg.norm(x - problem.theta_star, axis=1).sum())
    xbar = wp.u @ x / m
    consensus_x = float(np.linalg.norm(x - xbar[None, :]))
    grad_norm = float(np.linalg.norm(global_gradient(problem, xbar)))

    consensus_s = tracking_residual = accumulation_norm = eig_error = None
    if state.s is not None:
        sbar = state.s.sum(axis=0) / m
        consensus_s = float(np.linalg.norm(state.s - np.outer(wp.v, sbar)))
        tracking_residual = float(state.tracking_residual)
    if state.y is not None:
        accumulation_norm = float(np.linalg.norm(state.acc_xi))
    if state.z is not None:
        eig_error = float(np.abs(m * np.diag(state.z) - wp.u).max())

    return TraceRecord(trial=trial, k=state.k, opt_error=opt_error, consensus_x=consensus_x,
                       consensus_s=consensus_s, tracking_residual=tracking_residual,
                       accumulation_norm=accumulation_norm, grad_norm=grad_norm,
                       eig_error=eig_error)


@dataclass(frozen=True)
class AggregateReport:
    ks: tuple[int, ...]
    metrics: dict[str, tuple[np.ndarray, np.ndarray]]  # name -> (means, stds) over ks
    n_trials: int
    config_digest: str = ""

    def series(self, metric: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        means, stds = self.metrics[metric]
        return np.asarray(self.ks), means, stds

    def at(self, metric: str, k: int) -> tuple[float, float]:
        idx = self.ks.index(k)
        means, stds = self.metrics[metric]
        return float(means[idx]), float(stds[idx])


def aggregate(per_trial: list[list[TraceRecord]], config_digest: str = "") -> AggregateReport:
    """Pointwise-in-k mean and population std of every applicable metric across trials."""
    if not per_trial:
        raise AggregationError("no trials to aggregate")
    ks = tuple(r.k for r in per_trial[0])
    applicable = {name: getattr(per_trial[0][0], name) is not None for name in METRIC_FIELDS}
    for trace in per_trial:
        if tuple(r.k for r in trace) != ks:
            raise AggregationError("trials disagree on recorded rounds; configs mixed?")
        for name in METRIC_FIELDS:
            if (getattr(trace[0], name) is not None) != applicable[name]:
                raise AggregationError(f"trials disagree on applicability of {name}")
    metrics = {}
    for name in METRIC_FIELDS:
        if not applicable[name]:
            continue
        values = np.array([[getattr(r, name) for r in trace] for trace in per_trial])
        metrics[name] = (values.mean(axis=0), values.std(axis=0, ddof=0))
    return AggregateReport(ks=ks, metrics=metrics, n_trials=len(per_trial),
                           config_digest=config_digest)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def write_trace_csv(path: str | Path, records: list[TraceRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for r in records:
            writer.writerow([_fmt(getattr(r, name)) for name in TRACE_HEADER])


def read_trace_csv(path: str | Path) -> list[TraceRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            kwargs = {"trial": int(row["trial"]), "k": int(row["k"])}
            for name in METRIC_FIELDS:
                kwargs[name] = float(row[name]) if row[name] != "" else None
            records.append(TraceRecord(**kwargs))
    return records


def write_aggregate_csv(path: str | Path, report: AggregateReport) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(STD_CONVENTION_NOTE + "\n")
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_HEADER)
        for name in METRIC_FIELDS:
            if name not in report.metrics:
                continue
            means, stds = report.metrics[name]
            for k, mean, std in zip(report.ks, means, stds):
                writer.writerow([k, name, _fmt(float(mean)), _fmt(float(std)), report.n_trials])


def group_by_trial(records: list[TraceRecord]) -> list[list[TraceRecord]]:
    """Split a flat record list into per-trial traces ordered by trial index."""
    trials: dict[int, list[TraceRecord]] = {}
    for r in records:
        trials.setdefault(r.trial, []).append(r)
    return [sorted(trials[t], key=lambda r: r.k) for t in sorted(trials)]
