"""Benchmark graph topologies and ground-truth Gaussian models.

Vertex conventions: complete binary tree has root 0 with children of i at
2i+1 and 2i+2; the grid is row-major with 4-neighbor connectivity.  The
ground-truth precision is the normalized Laplacian plus a jitter,
``Theta = L + eps*I``, reindexed so the target vertices occupy the leading
block.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "GraphSpec",
    "GraphModel",
    "Partition",
    "PartitionedPrecision",
    "generate_graph",
    "normalized_laplacian",
    "partition_vertices",
    "build_ground_truth",
    "marginal_precision",
    "sparse_lowrank_split",
]


@dataclass(frozen=True)
class GraphSpec:
    """Parameters of one benchmark topology.

    topology is one of ``binary_tree`` (height), ``grid`` (width, height),
    ``erdos_renyi`` (n, p).
    """

    topology: str
    height: int | None = None
    width: int | None = None
    n: int | None = None
    p: float | None = None

    def tag(self) -> str:
        if self.topology == "binary_tree":
            return f"binary_tree(h={self.height})"
        if self.topology == "grid":
            return f"grid(w={self.width},h={self.height})"
        if self.topology == "erdos_renyi":
            return f"erdos_renyi(n={self.n},p={self.p})"
        return self.topology


@dataclass(frozen=True)
class GraphModel:
    """Undirected unweighted graph with its normalized Laplacian."""

    n: int
    edges: frozenset  # of (i, j) tuples with i < j
    topology_tag: str
    laplacian: np.ndarray = field(compare=False, repr=False)

    @classmethod
    def from_edges(cls, n: int, edges, tag: str = "custom") -> "GraphModel":
        if n < 1:
            raise ValueError(f"need at least one vertex, got n={n}")
        canon = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            canon.add((min(u, v), max(u, v)))
        edge_set = frozenset(canon)
        return cls(n=n, edges=edge_set, topology_tag=tag,
                   laplacian=_normalized_laplacian(n, edge_set))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1.0
        return a


def _normalized_laplacian(n: int, edges) -> np.ndarray:
    deg = np.zeros(n)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    # rows/columns of isolated vertices stay identically zero
    inv_sqrt = np.zeros(n)
    pos = deg > 0
    inv_sqrt[pos] = 1.0 / np.sqrt(deg[pos])
    lap = np.zeros((n, n))
    for u, v in edges:
        w = -inv_sqrt[u] * inv_sqrt[v]
        lap[u, v] = w
        lap[v, u] = w
    lap[np.diag_indices(n)] = np.where(deg > 0, 1.0, 0.0)
    return lap


def normalized_laplacian(g: GraphModel) -> np.ndarray:
    """L = I - D^{-1/2} A D^{-1/2} on vertices of positive degree."""
    return _normalized_laplacian(g.n, g.edges)


def binary_tree(height: int) -> GraphModel:
    """Complete binary tree: 2^(height+1) - 1 vertices, root 0."""
    if height < 1:
        raise ValueError(f"tree height must be >= 1, got {height}")
    n = 2 ** (height + 1) - 1
    edges = []
    for i in range(n):
        for child in (2 * i + 1, 2 * i + 2):
            if child < n:
                edges.append((i, child))
    return GraphModel.from_edges(n, edges, tag=f"binary_tree(h={height})")


def grid(width: int, height: int) -> GraphModel:
    """width x height lattice, row-major vertex order, 4-neighbor edges."""
    if width < 2 or height < 2:
        raise ValueError(f"grid needs width, height >= 2, got {width}x{height}")
    edges = []
    for r in range(height):
        for c in range(width):
            i = r * width + c
            if c + 1 < width:
                edges.append((i, i + 1))
            if r + 1 < height:
                edges.append((i, i + width))
    return GraphModel.from_edges(width * height, edges,
                                 tag=f"grid(w={width},h={height})")


def erdos_renyi(n: int, p: float, seed=None) -> GraphModel:
    """Each of the C(n,2) pairs is an edge independently with probability p."""
    if n < 2:
        raise ValueError(f"random graph needs n >= 2, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0,1], got {p}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(iu.size) < p
    edges = list(zip(iu[mask].tolist(), ju[mask].tolist()))
    return GraphModel.from_edges(n, edges, tag=f"erdos_renyi(n={n},p={p})")


def generate_graph(spec: GraphSpec, seed=None) -> GraphModel:
    """Build the topology described by ``spec``; ``seed`` only matters for
    the random family."""
    if spec.topology == "binary_tree":
        if spec.height is None:
            raise ValueError("binary_tree needs height")
        return binary_tree(spec.height)
    if spec.topology == "grid":
        if spec.width is None or spec.height is None:
            raise ValueError("grid needs width and height")
        return grid(spec.width, spec.height)
    if spec.topology == "erdos_renyi":
        if spec.n is None or spec.p is None:
            raise ValueError("erdos_renyi needs n and p")
        return erdos_renyi(spec.n, spec.p, seed)
    raise ValueError(f"unknown topology {spec.topology!r}")


@dataclass(frozen=True)
class Partition:
    """Disjoint split of the vertices into target (v1) and external (v2)."""

    v1: tuple
    v2: tuple
    seed: object = None

    @property
    def n1(self) -> int:
        return len(self.v1)

    @property
    def n2(self) -> int:
        return len(self.v2)


def partition_vertices(g: GraphModel, n1: int, seed=None) -> Partition:
    """Uniformly random n1-subset as the target set; remainder external."""
    if not 1 <= n1 < g.n:
        raise ValueError(f"n1 must satisfy 1 <= n1 < n={g.n}, got {n1}")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(g.n, size=n1, replace=False)
    v1 = tuple(sorted(int(i) for i in chosen))
    v2 = tuple(i for i in range(g.n) if i not in set(v1))
    return Partition(v1=v1, v2=v2, seed=seed)


@dataclass(frozen=True)
class PartitionedPrecision:
    """Global precision Theta = L + eps*I with its blocks and marginal.

    ``theta`` is reindexed so the target vertices come first; ``perm[k]`` is
    the original label of reindexed vertex k.  ``marginal_theta1`` is the
    Schur complement ``Theta_1 - Theta_12 Theta_2^{-1} Theta_21``, the
    precision of the target variables after the external ones are
    marginalized out.
    """

    theta: np.ndarray = field(compare=False, repr=False)
    epsilon: float
    n1: int
    perm: tuple
    marginal_theta1: np.ndarray = field(compare=False, repr=False)
    sigma: np.ndarray = field(compare=False, repr=False)

    @property
    def n(self) -> int:
        return self.theta.shape[0]

    @property
    def n2(self) -> int:
        return self.n - self.n1

    @property
    def theta1(self) -> np.ndarray:
        return self.theta[: self.n1, : self.n1]

    @property
    def theta2(self) -> np.ndarray:
        return self.theta[self.n1 :, self.n1 :]

    @property
    def theta12(self) -> np.ndarray:
        return self.theta[: self.n1, self.n1 :]

    @property
    def theta21(self) -> np.ndarray:
        return self.theta[self.n1 :, : self.n1]

    def target_edges(self, g: GraphModel) -> frozenset:
        """Edges of g between target vertices, in reindexed labels."""
        pos = {orig: k for k, orig in enumerate(self.perm[: self.n1])}
        out = set()
        for u, v in g.edges:
            if u in pos and v in pos:
                i, j = pos[u], pos[v]
                out.add((min(i, j), max(i, j)))
        return frozenset(out)


def build_ground_truth(g: GraphModel, epsilon: float,
                       part: Partition) -> PartitionedPrecision:
    """Assemble Theta = L + eps*I reindexed so v1 leads, with all blocks.

    The covariance is computed through a Cholesky factorization of Theta
    (positive definite for every eps > 0), never by forming an explicit
    unstructured inverse.
    """
    if epsilon <= 0:
        raise ValueError(f"jitter must be positive, got {epsilon}")
    perm = tuple(part.v1) + tuple(part.v2)
    if sorted(perm) != list(range(g.n)):
        raise ValueError("partition does not cover the vertex set exactly")
    idx = np.asarray(perm)
    theta = g.laplacian[np.ix_(idx, idx)] + epsilon * np.eye(g.n)
    theta = 0.5 * (theta + theta.T)
    cho = scipy.linalg.cho_factor(theta, lower=True, check_finite=False)
    sigma = scipy.linalg.cho_solve(cho, np.eye(g.n), check_finite=False)
    sigma = 0.5 * (sigma + sigma.T)
    n1 = part.n1
    marg = _schur_marginal(theta, n1)
    return PartitionedPrecision(theta=theta, epsilon=epsilon, n1=n1,
                                perm=perm, marginal_theta1=marg, sigma=sigma)


def _schur_marginal(theta: np.ndarray, n1: int) -> np.ndarray:
    theta2 = theta[n1:, n1:]
    theta21 = theta[n1:, :n1]
    cho = scipy.linalg.cho_factor(theta2, lower=True, check_finite=False)
    back = scipy.linalg.cho_solve(cho, theta21, check_finite=False)
    marg = theta[:n1, :n1] - theta[:n1, n1:] @ back
    return 0.5 * (marg + marg.T)


def marginal_precision(pp: PartitionedPrecision) -> np.ndarray:
    """Schur complement Theta_1 - Theta_12 Theta_2^{-1} Theta_21."""
    return _schur_marginal(pp.theta, pp.n1)


def sparse_lowrank_split(pp: PartitionedPrecision):
    """The marginal precision as sparse-minus-low-rank, (C, M).

    C is the target block Theta_1 and M = Theta_12 Theta_2^{-1} Theta_21 is
    the marginalization term; marginal_theta1 == C - M.
    """
    c = pp.theta1.copy()
    m = c - _schur_marginal(pp.theta, pp.n1)
    return c, 0.5 * (m + m.T)
