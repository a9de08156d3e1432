"""Local objectives for the distributed ridge-regression testbed.

Each agent i holds a measurement matrix M_i and observations
b_i = M_i @ theta_true + w_i with unit-variance Gaussian w_i, and minimizes
f_i(theta) = ||b_i - M_i theta||^2 + varsigma * ||theta||^2.  The global
objective is the average of the f_i; its minimizer theta_star has a closed
form through the normal equations and is stored on the instance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProblemError

OPT_GRAD_TOL = 1e-9


@dataclass(frozen=True)
class RidgeProblem:
    m: int
    d: int
    s_rows: int
    M: np.ndarray            # (m, s_rows, d)
    b: np.ndarray            # (m, s_rows)
    varsigma: float
    theta_true: np.ndarray   # (d,)
    theta_star: np.ndarray   # (d,)
    seed: int | None = None


@dataclass(frozen=True)
class GradientOracle:
    """Exact gradients, or unbiased Gaussian perturbations with per-coordinate std sigma_g."""

    mode: str = "exact"
    sigma_g: float = 0.0

    def __post_init__(self):
        if self.mode not in ("exact", "stochastic"):
            raise ValueError(f"oracle mode must be 'exact' or 'stochastic', got {self.mode!r}")
        if self.sigma_g < 0:
            raise ValueError("sigma_g must be nonnegative")
        if self.mode == "exact" and self.sigma_g != 0.0:
            raise ValueError("exact mode requires sigma_g = 0")


EXACT_ORACLE = GradientOracle()


def generate_ridge(m: int, d: int, s_rows: int, varsigma: float, seed: int) -> RidgeProblem:
    """Sample a problem instance and solve its normal equations for theta_star."""
    if m < 1 or d < 1 or s_rows < 1:
        raise ValueError("m, d and s_rows must all be at least 1")
    if varsigma < 0:
        raise ValueError("varsigma must be nonnegative")
    rng = np.random.default_rng(seed)
    theta_true = rng.standard_normal(d)
    M = rng.standard_normal((m, s_rows, d))
    w = rng.standard_normal((m, s_rows))
    b = np.einsum("isd,d->is", M, theta_true) + w

    normal = np.einsum("isd,ise->de", M, M) + m * varsigma * np.eye(d)
    rhs = np.einsum("isd,is->d", M, b)
    if varsigma == 0.0 and np.linalg.matrix_rank(normal) < d:
        raise DegenerateProblemError(
            "stacked measurements are rank deficient and varsigma = 0; "
            "regenerate with another seed or set varsigma > 0")
    theta_star = np.linalg.solve(normal, rhs)

    prob = RidgeProblem(m=m, d=d, s_rows=s_rows, M=M, b=b, varsigma=varsigma,
                        theta_true=theta_true, theta_star=theta_star, seed=seed)
    grad_norm = float(np.linalg.norm(global_gradient(prob, theta_star)))
    if grad_norm >= OPT_GRAD_TOL:
        raise DegenerateProblemError(f"normal-equation solve left gradient norm {grad_norm:.2e}")
    return prob


def local_value(p: RidgeProblem, i: int, theta: np.ndarray) -> float:
    r = p.b[i] - p.M[i] @ theta
    return float(r @ r + p.varsigma * (theta @ theta))


def global_value(p: RidgeProblem, theta: np.ndarray) -> float:
    return sum(local_value(p, i, theta) for i in range(p.m)) / p.m


def local_gradient(p: RidgeProblem, i: int, theta: np.ndarray) -> np.ndarray:
    if not 0 <= i < p.m:
        raise ValueError(f"agent index {i} out of range for m={p.m}")
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (p.d,):
        raise ValueError(f"theta must have shape ({p.d},), got {theta.shape}")
    return 2.0 * p.M[i].T @ (p.M[i] @ theta - p.b[i]) + 2.0 * p.varsigma * theta


def stacked_gradients(p: RidgeProblem, X: np.ndarray) -> np.ndarray:
    """Row i is agent i's exact gradient at its own iterate X[i]."""
    if X.shape != (p.m, p.d):
        raise ValueError(f"X must have shape ({p.m}, {p.d}), got {X.shape}")
    residual = np.einsum("isd,id->is", p.M, X) - p.b
    return 2.0 * np.einsum("isd,is->id", p.M, residual) + 2.0 * p.varsigma * X


def global_gradient(p: RidgeProblem, theta: np.ndarray) -> np.ndarray:
    """Gradient of the averaged objective at a common point."""
    X = np.broadcast_to(theta, (p.m, p.d))
    return stacked_gradients(p, np.ascontiguousarray(X)).sum(axis=0) / p.m


def lipschitz_constants(p: RidgeProblem) -> np.ndarray:
    """Per-agent gradient Lipschitz constants 2*lam_max(M_i^T M_i) + 2*varsigma."""
    out = np.empty(p.m)
    for i in range(p.m):
        out[i] = 2.0 * np.linalg.eigvalsh(p.M[i].T @ p.M[i]).max() + 2.0 * p.varsigma
    return out


def sample_gradient(p: RidgeProblem, i: int, theta: np.ndarray,
                    oracle: GradientOracle, rng: np.random.Generator) -> np.ndarray:
    g = local_gradient(p, i, theta)
    if oracle.mode == "stochastic" and oracle.sigma_g > 0:
        g = g + oracle.sigma_g * rng.standard_normal(p.d)
    return g


def sample_stacked_gradients(p: RidgeProblem, X: np.ndarray,
                             oracle: GradientOracle, rng: np.random.Generator | None) -> np.ndarray:
    g = stacked_gradients(p, X)
    if oracle.mode == "stochastic" and oracle.sigma_g > 0:
        if rng is None:
            raise ValueError("stochastic oracle needs an RNG")
        g = g + oracle.sigma_g * rng.standard_normal((p.m, p.d))
    return g
