"""Synchronous-round state machines for the three algorithms.

Two tracking variants share one mechanism: each agent pushes a running sum s
whose per-round increment carries the gradient estimate.  Because the column
sums of C vanish, the network total of those increments equals the injected
noise-plus-gradient term of the same round exactly, so sharing noise never
accumulates in the tracker.  The first variant divides the increment by the
exact left null vector u of R; the second replaces u with m times the
diagonal of an online estimate Z propagated by the row-stochastic I + R.  The
conventional push-pull baseline tracks the gradient itself through differenced
updates and therefore accumulates every round's weighted noise in its y total.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .diagnostics import TraceRecord, metrics_for_round
from .errors import DivergenceError, EstimatorDegeneracyError
from .graph import WeightPair
from .noise import (NO_NOISE, STREAM_GRADIENT, STREAM_INIT, NoiseDraw, SharingNoiseModel,
                    TrialStreams, sample_round, weighted_noise)
from .problem import EXACT_ORACLE, GradientOracle, RidgeProblem, sample_stacked_gradients
from .schedule import SchedulePoint, ScheduleSpec, evaluate

Z_DIAG_TOL = 1e-12


class AlgorithmKind(str, Enum):
    ALG1 = "alg1"
    ALG2 = "alg2"
    PUSHPULL_NOISY = "pushpull_noisy"

    @property
    def uses_estimated_eigenvector(self) -> bool:
        return self is AlgorithmKind.ALG2


@dataclass
class NetworkState:
    """Mutable per-trial state; one trial owns one instance exclusively."""

    kind: AlgorithmKind
    k: int
    x: np.ndarray                      # (m, d) optimization iterates
    s: np.ndarray | None = None        # (m, d) running-sum tracker (alg1/alg2)
    y: np.ndarray | None = None        # (m, d) gradient tracker (baseline)
    z: np.ndarray | None = None        # (m, m) eigenvector estimates, row i = agent i's
    g: np.ndarray | None = None        # (m, d) gradient paired with the current round (baseline)
    acc_xi: np.ndarray = None          # running sum of gamma_k * xi_w_k
    acc_sbar: np.ndarray = None        # running sum of gamma_k*xibar_w_k + lambda_k*gbar_k
    tracking_residual: float = 0.0     # last step's network-total identity residual

    def __post_init__(self):
        m, d = self.x.shape
        if self.acc_xi is None:
            self.acc_xi = np.zeros((m, d))
        if self.acc_sbar is None:
            self.acc_sbar = np.zeros(d)


def init_state(kind: AlgorithmKind, wp: WeightPair, problem: RidgeProblem,
               x0_seed: int | np.random.Generator,
               oracle: GradientOracle = EXACT_ORACLE,
               grad_rng: np.random.Generator | None = None) -> NetworkState:
    """Standard-normal x (and s); identity rows for Z; the baseline starts y at its gradients."""
    kind = AlgorithmKind(kind)
    rng = x0_seed if isinstance(x0_seed, np.random.Generator) else np.random.default_rng(x0_seed)
    m, d = problem.m, problem.d
    if wp.m != m:
        raise ValueError(f"weight pair is on {wp.m} agents but problem has {m}")
    x = rng.standard_normal((m, d))
    if kind is AlgorithmKind.PUSHPULL_NOISY:
        g0 = sample_stacked_gradients(problem, x, oracle, grad_rng)
        return NetworkState(kind=kind, k=0, x=x, y=g0.copy(), g=g0)
    s = rng.standard_normal((m, d))
    z = np.eye(m) if kind is AlgorithmKind.ALG2 else None
    return NetworkState(kind=kind, k=0, x=x, s=s, z=z)


def _advance_tracker(state: NetworkState, wp: WeightPair, sched: SchedulePoint,
                     noise: NoiseDraw, gradients: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Shared s-update; returns (s_new, ds, zeta_w) and refreshes the identity accumulators."""
    gam, lam = sched.gamma_k, sched.lambda_k
    zeta_w = weighted_noise(wp.R_off, noise.zeta)
    xi_w = weighted_noise(wp.C_off, noise.xi)
    s_new = state.s + gam * (wp.C @ state.s) + gam * xi_w + lam * gradients
    ds = s_new - state.s
    fed = gam * xi_w + lam * gradients
    state.tracking_residual = float(np.abs(ds.sum(axis=0) - fed.sum(axis=0)).max())
    state.acc_xi += gam * xi_w
    state.acc_sbar += fed.sum(axis=0) / wp.m
    return s_new, ds, zeta_w


def _guard_finite(state: NetworkState, *arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.isfinite(a).all():
            raise DivergenceError(f"non-finite iterate at round {state.k}", round_index=state.k)


def step_alg1(state: NetworkState, wp: WeightPair, u: np.ndarray, sched: SchedulePoint,
              noise: NoiseDraw, gradients: np.ndarray) -> NetworkState:
    """One round of the exact-eigenvector variant."""
    gam = sched.gamma_k
    s_new, ds, zeta_w = _advance_tracker(state, wp, sched, noise, gradients)
    x_new = state.x + gam * (wp.R @ state.x) + gam * zeta_w - ds / u[:, None]
    _guard_finite(state, x_new, s_new)
    state.x, state.s = x_new, s_new
    state.k += 1
    return state


def step_alg2(state: NetworkState, wp: WeightPair, sched: SchedulePoint,
              noise: NoiseDraw, gradients: np.ndarray) -> NetworkState:
    """One round of the estimated-eigenvector variant.

    The divisor is m * z_ii with z_ii the agent's own diagonal estimate; the
    estimate rows mix over I + R without any coupling factor or noise.
    """
    gam = sched.gamma_k
    z_diag = np.diag(state.z)
    if z_diag.min() <= Z_DIAG_TOL:
        raise EstimatorDegeneracyError(
            f"estimator diagonal fell to {z_diag.min():.2e} at round {state.k}")
    s_new, ds, zeta_w = _advance_tracker(state, wp, sched, noise, gradients)
    divisor = wp.m * z_diag
    x_new = state.x + gam * (wp.R @ state.x) + gam * zeta_w - ds / divisor[:, None]
    z_new = state.z + wp.R @ state.z
    _guard_finite(state, x_new, s_new, z_new)
    state.x, state.s, state.z = x_new, s_new, z_new
    state.k += 1
    return state


def step_pushpull_noisy(state: NetworkState, wp: WeightPair, sched: SchedulePoint,
                        noise: NoiseDraw, gradients_now: np.ndarray,
                        gradients_next: Callable[[np.ndarray], np.ndarray]) -> NetworkState:
    """One round of the conventional noisy push-pull baseline.

    ``gradients_next`` is called on the freshly moved iterates, so the
    differenced pair straddles the round; the caller must feed the same values
    back as ``gradients_now`` next round for the differences to telescope.
    """
    gam, lam = sched.gamma_k, sched.lambda_k
    zeta_w = weighted_noise(wp.R_off, noise.zeta)
    xi_w = weighted_noise(wp.C_off, noise.xi)
    x_new = state.x + gam * (wp.R @ state.x) + gam * zeta_w - lam * state.y
    g_next = gradients_next(x_new)
    y_new = state.y + gam * (wp.C @ state.y) + gam * xi_w + g_next - gradients_now
    _guard_finite(state, x_new, y_new)
    state.acc_xi += gam * xi_w
    state.x, state.y, state.g = x_new, y_new, g_next
    state.k += 1
    return state


def run_trial(kind: AlgorithmKind, wp: WeightPair, problem: RidgeProblem,
              schedule: ScheduleSpec, noise_model: SharingNoiseModel = NO_NOISE,
              oracle: GradientOracle = EXACT_ORACLE, horizon: int = 0,
              master_seed: int = 0, trial: int = 0,
              record_stride: int = 1) -> list[TraceRecord]:
    """Run one trial for ``horizon`` rounds, recording metrics every ``record_stride`` rounds.

    Deterministic in (master_seed, trial): initial states, noise and gradient
    draws all derive from per-stream counters, so trials are reproducible and
    independent of execution order.
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if record_stride < 1:
        raise ValueError("record_stride must be at least 1")
    kind = AlgorithmKind(kind)
    streams = TrialStreams(master_seed, trial)
    stochastic = oracle.mode == "stochastic"
    grad_rng = streams.generator(STREAM_GRADIENT, 0) if stochastic else None
    state = init_state(kind, wp, problem, streams.generator(STREAM_INIT, 0), oracle, grad_rng)
    m, d = problem.m, problem.d
    records: list[TraceRecord] = []
    try:
        for k in range(horizon):
            if k % record_stride == 0:
                records.append(metrics_for_round(state, wp, problem, trial=trial))
            sched = evaluate(schedule, k)
            noise = sample_round(noise_model, m, d, k, streams)
            if kind is AlgorithmKind.PUSHPULL_NOISY:
                def gradients_next(x_new, _k=k):
                    rng = streams.generator(STREAM_GRADIENT, _k + 1) if stochastic else None
                    return sample_stacked_gradients(problem, x_new, oracle, rng)

                step_pushpull_noisy(state, wp, sched, noise, state.g, gradients_next)
            else:
                rng = streams.generator(STREAM_GRADIENT, k) if stochastic else None
                gradients = sample_stacked_gradients(problem, state.x, oracle, rng)
                if kind is AlgorithmKind.ALG1:
                    step_alg1(state, wp, wp.u, sched, noise, gradients)
                else:
                    step_alg2(state, wp, sched, noise, gradients)
    except DivergenceError as err:
        err.trial = trial
        raise
    records.append(metrics_for_round(state, wp, problem, trial=trial))
    return records
