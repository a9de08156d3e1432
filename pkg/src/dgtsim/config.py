"""Experiment configuration: JSON parsing, validation, and resolution."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .graph import Digraph, WeightPair, build_ring_plus_random, weights_from_digraph
from .noise import SharingNoiseModel, SigmaSchedule
from .problem import GradientOracle, RidgeProblem, generate_ridge
from .schedule import ScheduleSpec, ValidationReport, gamma_max, validate

ALGORITHM_NAMES = ("alg1", "alg2", "pushpull_noisy")


_MISSING = object()


def _get(section: dict, key: str, path: str, default=_MISSING):
    if key not in section:
        if default is not _MISSING:
            return default
        raise ConfigError(f"missing key '{path}.{key}'")
    return section[key]


def _section(cfg: dict, name: str) -> dict:
    value = cfg.get(name)
    if value is None:
        raise ConfigError(f"missing section '{name}'")
    if not isinstance(value, dict):
        raise ConfigError(f"section '{name}' must be an object")
    return value


@dataclass(frozen=True)
class RunSettings:
    algorithms: tuple[str, ...]
    horizon: int
    trials: int
    master_seed: int
    record_stride: int


@dataclass(frozen=True)
class OutputSettings:
    directory: str
    emit_per_trial: bool


@dataclass(frozen=True)
class ResolvedExperiment:
    raw: dict[str, Any]
    digraph: Digraph
    wp: WeightPair
    problem: RidgeProblem
    schedules: dict[str, ScheduleSpec]
    schedule_reports: dict[str, ValidationReport]
    noise_model: SharingNoiseModel
    oracle: GradientOracle
    run: RunSettings
    output: OutputSettings

    @property
    def digest(self) -> str:
        return config_digest(self.raw)


def config_digest(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def _parse_schedule(entry: dict, path: str) -> ScheduleSpec:
    gamma = _get(entry, "gamma", path)
    lam = _get(entry, "lambda", path)
    mode = _get(entry, "mode", path, default="decaying")
    try:
        return ScheduleSpec(
            c1=gamma["c1"], c2=float(gamma.get("c2", 0.0)), iota=float(gamma.get("iota", 1.0)),
            c3=float(lam["c3"]), c4=float(lam.get("c4", 0.0)), b=float(lam.get("b", 1.0)),
            mode=mode)
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"bad schedule at '{path}': {err}") from err


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: line {err.lineno}: {err.msg}") from err
    if not isinstance(cfg, dict):
        raise ConfigError("top-level config must be a JSON object")
    return cfg


def resolve(cfg: dict, overrides: dict[str, Any] | None = None) -> ResolvedExperiment:
    """Build all runtime objects from a parsed config, applying CLI overrides.

    Baseline schedules may leave gamma.c1 null; it resolves to half the
    admissible coupling bound of the generated weight pair, and the resolved
    value is recorded in the echoed config.
    """
    cfg = json.loads(json.dumps(cfg))  # deep copy; keeps the caller's dict untouched
    overrides = overrides or {}

    graph_cfg = _section(cfg, "graph")
    problem_cfg = _section(cfg, "problem")
    run_cfg = _section(cfg, "run")
    output_cfg = cfg.get("output", {})

    for key in ("trials", "horizon", "master_seed"):
        if overrides.get(key) is not None:
            run_cfg[key] = overrides[key]
    if overrides.get("directory") is not None:
        output_cfg["directory"] = overrides["directory"]
        cfg["output"] = output_cfg

    m = int(_get(graph_cfg, "m", "graph"))
    digraph = build_ring_plus_random(m, float(_get(graph_cfg, "p", "graph")),
                                     int(_get(graph_cfg, "seed", "graph")))
    wp = weights_from_digraph(digraph)
    bound = gamma_max(wp)

    problem = generate_ridge(
        m=m, d=int(_get(problem_cfg, "d", "problem")),
        s_rows=int(_get(problem_cfg, "s_rows", "problem")),
        varsigma=float(_get(problem_cfg, "varsigma", "problem")),
        seed=int(_get(problem_cfg, "seed", "problem")))

    run = RunSettings(
        algorithms=tuple(_get(run_cfg, "algorithms", "run")),
        horizon=int(_get(run_cfg, "horizon", "run")),
        trials=int(_get(run_cfg, "trials", "run")),
        master_seed=int(_get(run_cfg, "master_seed", "run")),
        record_stride=int(_get(run_cfg, "record_stride", "run", default=1)))
    if run.horizon < 1:
        raise ConfigError("run.horizon must be at least 1")
    if run.trials < 1:
        raise ConfigError("run.trials must be at least 1")
    for name in run.algorithms:
        if name not in ALGORITHM_NAMES:
            raise ConfigError(f"unknown algorithm '{name}' in run.algorithms")

    sched_cfg = _section(cfg, "schedule")
    schedules: dict[str, ScheduleSpec] = {}
    reports: dict[str, ValidationReport] = {}
    for name in run.algorithms:
        if name not in sched_cfg:
            raise ConfigError(f"missing section 'schedule.{name}'")
        entry = sched_cfg[name]
        if entry.get("gamma", {}).get("c1") is None:
            entry.setdefault("gamma", {})["c1"] = 0.5 * bound
        spec = _parse_schedule(entry, f"schedule.{name}")
        report = validate(spec, bound)
        if not report.ok:
            failed = "; ".join(f"{c.name} ({c.detail})" for c in report.failures())
            raise ConfigError(f"schedule.{name} invalid: {failed}")
        schedules[name] = spec
        reports[name] = report

    noise_cfg = cfg.get("noise", {"kind": "none"})
    try:
        noise_model = SharingNoiseModel(
            kind=noise_cfg.get("kind", "none"),
            sigma_zeta=SigmaSchedule.from_config(noise_cfg.get("sigma_zeta", 0.0)),
            sigma_xi=SigmaSchedule.from_config(noise_cfg.get("sigma_xi", 0.0)),
            delta=float(noise_cfg.get("delta", 0.0)),
            per_link=bool(noise_cfg.get("per_link", False)))
        oracle_cfg = cfg.get("oracle", {})
        oracle = GradientOracle(mode=oracle_cfg.get("mode", "exact"),
                                sigma_g=float(oracle_cfg.get("sigma_g", 0.0)))
    except (ValueError, KeyError, TypeError) as err:
        raise ConfigError(str(err)) from err

    output = OutputSettings(directory=output_cfg.get("directory", "out"),
                            emit_per_trial=bool(output_cfg.get("emit_per_trial", True)))
    cfg.setdefault("output", {})["directory"] = output.directory
    cfg["output"]["emit_per_trial"] = output.emit_per_trial

    return ResolvedExperiment(raw=cfg, digraph=digraph, wp=wp, problem=problem,
                              schedules=schedules, schedule_reports=reports,
                              noise_model=noise_model, oracle=oracle, run=run, output=output)
