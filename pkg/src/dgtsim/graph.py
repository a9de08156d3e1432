"""Directed interaction graphs and the coupling weight matrices built on them.

The simulator couples agents through two real matrices: a row matrix R whose
rows sum to zero (it mixes the optimization iterates) and a column matrix C
whose columns sum to zero (it mixes the shared running sums).  Off-diagonal
entries are nonnegative edge weights, diagonals absorb the negated sums, and
each matrix carries a positive null vector (u on the left of R, v on the
right of C) that weights averages and descent directions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GraphConditionError, NumericalFailureError

PERRON_TOL = 1e-10


@dataclass(frozen=True)
class Digraph:
    """Directed graph on m nodes; edge (i, j) means information flows j -> i."""

    m: int
    edges: frozenset[tuple[int, int]]
    seed: int | None = None
    p: float | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"node count must be positive, got {self.m}")
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop ({i},{i}) not allowed")
            if not (0 <= i < self.m and 0 <= j < self.m):
                raise ValueError(f"edge ({i},{j}) out of range for m={self.m}")

    def in_neighbors(self, i: int) -> list[int]:
        return sorted(j for (r, j) in self.edges if r == i)

    def adjacency(self) -> np.ndarray:
        """0/1 matrix with A[i, j] = 1 iff j -> i is an edge."""
        A = np.zeros((self.m, self.m))
        for i, j in self.edges:
            A[i, j] = 1.0
        return A

    def transpose(self) -> "Digraph":
        return Digraph(self.m, frozenset((j, i) for (i, j) in self.edges))


def build_ring_plus_random(m: int, p: float, seed: int) -> Digraph:
    """Directed ring 0->1->...->m-1->0 plus each remaining ordered pair with probability p."""
    if m < 2:
        raise ValueError(f"need at least 2 agents for a ring, got m={m}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must be in [0,1], got {p}")
    ring = {((i + 1) % m, i) for i in range(m)}
    rng = np.random.default_rng(seed)
    extra = set()
    for i in range(m):
        for j in range(m):
            if i == j or (i, j) in ring:
                continue
            if rng.random() < p:
                extra.add((i, j))
    return Digraph(m, frozenset(ring | extra), seed=seed, p=p)


def check_strongly_connected(g: Digraph) -> bool:
    """True iff every node reaches every other along edge directions."""
    if g.m == 1:
        return True
    fwd = [[] for _ in range(g.m)]  # fwd[j] = receivers of j
    bwd = [[] for _ in range(g.m)]
    for i, j in g.edges:
        fwd[j].append(i)
        bwd[i].append(j)
    return _reaches_all(fwd, 0, g.m) and _reaches_all(bwd, 0, g.m)


def check_spanning_tree_of_transpose(g: Digraph) -> bool:
    """True iff some root reaches all nodes in the transposed graph."""
    if g.m == 1:
        return True
    # transpose: original edge (i, j): j -> i, so transposed flow is i -> j
    fwd = [[] for _ in range(g.m)]
    for i, j in g.edges:
        fwd[i].append(j)
    return any(_reaches_all(fwd, r, g.m) for r in range(g.m))


def _reaches_all(adj: list[list[int]], root: int, m: int) -> bool:
    seen = [False] * m
    seen[root] = True
    stack = [root]
    count = 1
    while stack:
        node = stack.pop()
        for nxt in adj[node]:
            if not seen[nxt]:
                seen[nxt] = True
                count += 1
                stack.append(nxt)
    return count == m


def perron_left(R: np.ndarray) -> np.ndarray:
    """Positive u with u^T R = 0 and u^T 1 = m, via a dense null-space solve."""
    return _null_vector(R.T, "left null vector of R")


def perron_right(C: np.ndarray) -> np.ndarray:
    """Nonnegative v with C v = 0 and 1^T v = m."""
    return _null_vector(C, "right null vector of C")


def _null_vector(A: np.ndarray, what: str) -> np.ndarray:
    m = A.shape[0]
    _, _, vh = np.linalg.svd(A)
    vec = vh[-1]
    total = vec.sum()
    if abs(total) < 1e-12:
        raise NumericalFailureError(f"{what}: null vector has near-zero sum")
    vec = vec * (m / total)
    residual = np.abs(A @ vec).max()
    if residual > PERRON_TOL:
        raise NumericalFailureError(f"{what}: residual {residual:.2e} exceeds {PERRON_TOL:.0e}")
    if vec.min() < -PERRON_TOL:
        raise NumericalFailureError(f"{what}: entries not nonnegative (min {vec.min():.2e})")
    return vec


@dataclass(frozen=True)
class WeightPair:
    """Coupling matrices R (zero row sums) and C (zero column sums) with their null vectors."""

    R: np.ndarray
    C: np.ndarray
    u: np.ndarray
    v: np.ndarray
    gR: Digraph | None = None
    gC: Digraph | None = None
    R_off: np.ndarray = field(init=False, repr=False)
    C_off: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "R_off", self.R - np.diag(np.diag(self.R)))
        object.__setattr__(self, "C_off", self.C - np.diag(np.diag(self.C)))

    @property
    def m(self) -> int:
        return self.R.shape[0]

    @staticmethod
    def from_matrices(R: np.ndarray, C: np.ndarray,
                      gR: Digraph | None = None, gC: Digraph | None = None) -> "WeightPair":
        """Validate raw matrices, compute u and v, and wrap them up.

        Checks: nonnegative off-diagonals, zero row sums of R and column sums
        of C, strong connectivity of the graph induced by R, and a spanning
        tree in the transpose of the graph induced by C.
        """
        R = np.asarray(R, dtype=float)
        C = np.asarray(C, dtype=float)
        m = R.shape[0]
        if R.shape != (m, m) or C.shape != (m, m):
            raise ValueError("R and C must be square matrices of the same size")
        for name, W in (("R", R), ("C", C)):
            off = W - np.diag(np.diag(W))
            if off.min() < 0:
                raise ValueError(f"{name} has a negative off-diagonal entry")
        if np.abs(R.sum(axis=1)).max() > 1e-12:
            raise GraphConditionError("rows of R do not sum to zero")
        if np.abs(C.sum(axis=0)).max() > 1e-12:
            raise GraphConditionError("columns of C do not sum to zero")
        gR = gR if gR is not None else induced_digraph(R)
        gC = gC if gC is not None else induced_digraph(C)
        if not check_strongly_connected(gR):
            raise GraphConditionError("graph induced by R is not strongly connected")
        if not check_spanning_tree_of_transpose(gC):
            raise GraphConditionError("transpose of the graph induced by C has no spanning tree")
        u = perron_left(R)
        v = perron_right(C)
        if u.min() <= 0:
            raise NumericalFailureError("left null vector of R must be strictly positive")
        return WeightPair(R=R, C=C, u=u, v=v, gR=gR, gC=gC)


def induced_digraph(W: np.ndarray) -> Digraph:
    """Graph with an edge (i, j) wherever the off-diagonal weight W[i, j] is positive."""
    m = W.shape[0]
    edges = {(i, j) for i in range(m) for j in range(m) if i != j and W[i, j] > 0}
    return Digraph(m, frozenset(edges))


def weights_from_digraph(gR: Digraph, gC: Digraph | None = None) -> WeightPair:
    """Assign weight 1/m to every edge and set diagonals to the negated sums.

    The 1/m scale keeps every diagonal entry in (-1, 0], so a coupling factor
    of 1 is always admissible and I + R is row stochastic with positive
    diagonal, which the online eigenvector estimator relies on.
    """
    if gC is None:
        gC = gR
    if gR.m != gC.m:
        raise ValueError(f"graphs disagree on agent count: {gR.m} vs {gC.m}")
    m = gR.m
    R = gR.adjacency() / m
    R -= np.diag(R.sum(axis=1))
    C = gC.adjacency() / m
    C -= np.diag(C.sum(axis=0))
    wp = WeightPair.from_matrices(R, C, gR=gR, gC=gC)
    assert np.diag(wp.R).min() > -1.0 and np.diag(wp.C).min() > -1.0
    return wp


def spectral_diagnostics(wp: WeightPair, gamma: float) -> dict[str, float]:
    """Spectral radii of the coupled mixing matrices with their rank-one parts removed.

    Both radii are strictly below one for any admissible gamma, which is what
    drives consensus; they tend to one as gamma tends to zero.
    """
    from .schedule import gamma_max

    limit = gamma_max(wp)
    if not 0.0 < gamma < limit:
        raise ValueError(f"gamma must lie in (0, {limit:g}), got {gamma}")
    m = wp.m
    Rbar = np.eye(m) + gamma * wp.R - np.outer(np.ones(m), wp.u) / m
    Cbar = np.eye(m) + gamma * wp.C - np.outer(wp.v, np.ones(m)) / m
    return {
        "rhoRbar": float(np.abs(np.linalg.eigvals(Rbar)).max()),
        "rhoCbar": float(np.abs(np.linalg.eigvals(Cbar)).max()),
    }


def digraph_to_json(g: Digraph, path: str | Path, weights_scale: float | None = None) -> None:
    """Write the graph with its generation metadata for experiment provenance."""
    payload = {
        "m": g.m,
        "seed": g.seed,
        "p": g.p,
        "edges": sorted([i, j] for (i, j) in g.edges),
        "weights_scale": weights_scale if weights_scale is not None else 1.0 / g.m,
        "strongly_connected": check_strongly_connected(g),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def digraph_from_json(path: str | Path) -> Digraph:
    payload = json.loads(Path(path).read_text())
    edges = frozenset((int(i), int(j)) for i, j in payload["edges"])
    return Digraph(int(payload["m"]), edges, seed=payload.get("seed"), p=payload.get("p"))
