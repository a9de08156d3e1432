"""Information-sharing noise: per-sender corruption of shared iterates.

Noise is attached to the sender, not the link: all receivers of agent j see
the same corrupted broadcast in a round (an optional per-link extension draws
one value per directed edge instead).  Draws come from counter-based streams
keyed by (master seed, trial, stream id) with the round index selecting the
counter block, so any (seed, trial, k) triple reproduces identical values
regardless of call order, and trials can run concurrently without shared
state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STREAM_ZETA = 0
STREAM_XI = 1
STREAM_GRADIENT = 2
STREAM_PROBLEM = 3
STREAM_GRAPH = 4
STREAM_INIT = 5

NOISE_KINDS = ("gaussian", "uniform_quantization", "none")


class TrialStreams:
    """Bundle of independent counter-based RNG streams for one trial."""

    def __init__(self, master_seed: int, trial: int):
        self.master_seed = master_seed
        self.trial = trial
        self._bitgens: dict[int, np.random.Philox] = {}
        self._gens: dict[int, np.random.Generator] = {}

    def generator(self, stream_id: int, k: int) -> np.random.Generator:
        """Generator positioned at the counter block of round k for this stream."""
        bg = self._bitgens.get(stream_id)
        if bg is None:
            key = np.random.SeedSequence(
                entropy=self.master_seed,
                spawn_key=(self.trial, stream_id)).generate_state(2, np.uint64)
            bg = np.random.Philox(key=key)
            self._bitgens[stream_id] = bg
            self._gens[stream_id] = np.random.Generator(bg)
        state = bg.state
        state["state"]["counter"][:] = 0
        state["state"]["counter"][2] = int(k)  # block k * 2**128 of the 2**256 counter space
        state["buffer_pos"] = 4
        state["has_uint32"] = 0
        state["uinteger"] = 0
        bg.state = state
        return self._gens[stream_id]


@dataclass(frozen=True)
class SigmaSchedule:
    """Noise std as a function of the round: base * (1+k)**growth clipped at cap."""

    base: float
    growth: float = 0.0
    cap: float | None = None

    def __post_init__(self):
        if self.base < 0:
            raise ValueError("noise std must be nonnegative")

    def at(self, k: int) -> float:
        value = self.base * (1.0 + k) ** self.growth if self.growth else self.base
        return min(value, self.cap) if self.cap is not None else value

    @staticmethod
    def from_config(value) -> "SigmaSchedule":
        if isinstance(value, (int, float)):
            return SigmaSchedule(float(value))
        return SigmaSchedule(float(value["base"]), float(value.get("growth", 0.0)),
                             None if value.get("cap") is None else float(value["cap"]))


@dataclass(frozen=True)
class SharingNoiseModel:
    kind: str = "none"
    sigma_zeta: SigmaSchedule = SigmaSchedule(0.0)
    sigma_xi: SigmaSchedule = SigmaSchedule(0.0)
    delta: float = 0.0
    per_link: bool = False

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if self.kind == "uniform_quantization" and self.delta <= 0:
            raise ValueError("uniform_quantization needs a positive step delta")


NO_NOISE = SharingNoiseModel()


@dataclass(frozen=True)
class NoiseDraw:
    zeta: np.ndarray
    xi: np.ndarray


def sample_round(model: SharingNoiseModel, m: int, d: int, k: int,
                 streams: TrialStreams) -> NoiseDraw:
    """Draw round-k noise; row i is sender i's corruption of its broadcast."""
    shape = (m, m, d) if model.per_link else (m, d)
    if model.kind == "none":
        zero = np.zeros(shape)
        return NoiseDraw(zeta=zero, xi=zero.copy())
    if model.kind == "gaussian":
        zeta = model.sigma_zeta.at(k) * streams.generator(STREAM_ZETA, k).standard_normal(shape)
        xi = model.sigma_xi.at(k) * streams.generator(STREAM_XI, k).standard_normal(shape)
        return NoiseDraw(zeta=zeta, xi=xi)
    half = 0.5 * model.delta
    zeta = streams.generator(STREAM_ZETA, k).uniform(-half, half, shape)
    xi = streams.generator(STREAM_XI, k).uniform(-half, half, shape)
    return NoiseDraw(zeta=zeta, xi=xi)


def weighted_noise(W: np.ndarray, noise: np.ndarray) -> np.ndarray:
    """Row i of the result is the weighted sum of in-neighbor noise, W[i, j] * noise_j.

    W must be the off-diagonal part of a coupling matrix (agents never corrupt
    their own state).  Per-link draws of shape (m, m, d) are combined entry by
    entry instead of by broadcast.
    """
    if np.any(np.diag(W) != 0.0):
        raise ValueError("W must have a zero diagonal (off-diagonal coupling only)")
    if noise.ndim == 3:
        if noise.shape[:2] != W.shape:
            raise ValueError(f"per-link noise shape {noise.shape} incompatible with W {W.shape}")
        return np.einsum("ij,ijd->id", W, noise)
    if noise.shape[0] != W.shape[1]:
        raise ValueError(f"noise has {noise.shape[0]} rows, W expects {W.shape[1]}")
    return W @ noise


def left_weighted_average(u: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """u-weighted row average u^T A / m."""
    return u @ rows / len(u)


def column_average(rows: np.ndarray) -> np.ndarray:
    """Plain row average 1^T A / m."""
    return rows.sum(axis=0) / rows.shape[0]
