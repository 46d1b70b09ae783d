"""Finite graphs sampled from graphon kernels, and how far they sit from the kernel.

Random edges use a keyed generator: row i owns the Philox stream seeded by
(seed, i), and edge (i, j) with i < j takes the j-th uniform of that stream.
The draw for an edge therefore depends only on (seed, i, j).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cutnorm import CutNormEstimate, cutnorm
from .errors import ValidationError
from .grid import cell_edges, uniform_grid
from .kernels import Bipartite, GraphonKernel

MODES = ("Deterministic", "Random", "BipartiteAligned")


@dataclass(frozen=True, eq=False)
class SampledGraph:
    adjacency: np.ndarray
    mode: str
    kernel_id: str
    grid_points: np.ndarray
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        A = np.array(self.adjacency, dtype=float)
        x = np.array(self.grid_points, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != len(x):
            raise ValidationError("adjacency must be n x n with n grid points")
        if self.mode not in MODES:
            raise ValidationError(f"unknown sampling mode {self.mode!r}")
        if not np.array_equal(A, A.T):
            raise ValidationError("adjacency must be symmetric")
        if self.mode == "Deterministic":
            if A.min() < 0 or A.max() > 1:
                raise ValidationError("weighted adjacency entries must lie in [0, 1]")
        else:
            if not np.all((A == 0) | (A == 1)) or np.any(np.diag(A) != 0):
                raise ValidationError("random adjacency must be binary with zero diagonal")
        A.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "adjacency", A)
        object.__setattr__(self, "grid_points", x)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def graph_id(self) -> str:
        s = "" if self.seed is None else f",seed={self.seed}"
        return f"{self.mode}({self.kernel_id},n={self.n}{s})"

    def cell_widths(self) -> np.ndarray:
        return np.diff(cell_edges(self.grid_points))

    def degrees(self) -> np.ndarray:
        """(1/n) sum_j A_ij, diagonal included."""
        return self.adjacency.mean(axis=1)

    def manifest(self) -> dict:
        return {
            "kernel_id": self.kernel_id,
            "n": self.n,
            "seed": self.seed,
            "mode": self.mode,
            **self.meta,
        }


def edge_uniforms(seed: int, n: int) -> np.ndarray:
    """U[i, j] for i < j: the j-th draw of the stream keyed by (seed, i)."""
    key = int(seed) % (1 << 64)
    U = np.zeros((n, n))
    for i in range(n - 1):
        gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([key, i])))
        U[i] = gen.random(n)
    return np.triu(U, 1)


def _bernoulli(P: np.ndarray, seed: int) -> np.ndarray:
    n = P.shape[0]
    upper = np.triu(edge_uniforms(seed, n) < P, 1)
    return (upper | upper.T).astype(float)


def sample_deterministic(kernel: GraphonKernel, n: int) -> SampledGraph:
    if n < 1:
        raise ValueError("n must be >= 1")
    x = uniform_grid(n)
    return SampledGraph(kernel.matrix(x), "Deterministic", kernel.kernel_id, x)


def sample_random(kernel: GraphonKernel, n: int, seed: int) -> SampledGraph:
    if n < 1:
        raise ValueError("n must be >= 1")
    x = uniform_grid(n)
    A = _bernoulli(kernel.matrix(x), seed)
    return SampledGraph(A, "Random", kernel.kernel_id, x, seed=int(seed))


def bipartite_grid(alpha: float, n: int) -> tuple[np.ndarray, int]:
    """Points alpha(i-1)/n1 for i <= n1 and alpha + (1-alpha)(i-n1-1)/n2 after."""
    if not (0.0 < alpha < 1.0):
        raise ValidationError("alpha must lie in (0, 1)")
    n1 = int(np.floor(alpha * n))
    n2 = n - n1
    if n1 == 0 or n2 == 0:
        raise ValidationError(f"degenerate partition n1={n1}, n2={n2} for alpha={alpha}, n={n}")
    x = np.concatenate([alpha * np.arange(n1) / n1, alpha + (1 - alpha) * np.arange(n2) / n2])
    return x, n1


def sample_bipartite_aligned(alpha: float, p: float, n: int, seed: int) -> SampledGraph:
    kernel = Bipartite(alpha, p)
    x, n1 = bipartite_grid(alpha, n)
    group = np.arange(n) >= n1
    P = np.where(group[:, None] != group[None, :], float(p), 0.0)
    A = _bernoulli(P, seed)
    return SampledGraph(A, "BipartiteAligned", kernel.kernel_id, x, seed=int(seed), meta={"n1": n1})


def degree_deviation(graph: SampledGraph, kernel: GraphonKernel, sup_over_cells: bool = False, probes: int = 9) -> float:
    """sup-norm distance between graph degrees and the kernel degree d_W.

    By default d_W is compared at the grid points only. With
    ``sup_over_cells`` the step function of graph degrees is compared
    against d_W at ``probes`` points spread across each cell, which exposes
    jumps of d_W that fall strictly inside a cell.
    """
    dn = graph.degrees()
    if not sup_over_cells:
        return float(np.max(np.abs(dn - kernel.degree_at(graph.grid_points))))
    edges = cell_edges(graph.grid_points)
    t = np.linspace(0.0, 1.0, probes)
    t[-1] = 1.0 - 1e-9
    pts = edges[:-1, None] + t[None, :] * np.diff(edges)[:, None]
    dW = kernel.degree_at(pts.ravel()).reshape(pts.shape)
    return float(np.max(np.abs(dn[:, None] - dW)))


def difference_matrix(graph: SampledGraph, kernel: GraphonKernel, refinement: int = 4) -> np.ndarray:
    """Step graphon of ``graph`` minus the kernel, on the refined midpoint grid.

    Entries are weighted by the cell areas so that the unweighted normalized
    cut norm of the result equals the cut norm of the difference of functions.
    """
    if refinement < 1:
        raise ValueError("refinement must be >= 1")
    edges = cell_edges(graph.grid_points)
    widths = np.diff(edges) / refinement
    sub = (np.arange(refinement) + 0.5) / refinement
    mids = (edges[:-1, None] + sub[None, :] * np.diff(edges)[:, None]).ravel()
    w = np.repeat(widths, refinement)
    D = np.kron(graph.adjacency, np.ones((refinement, refinement))) - kernel.matrix(mids)
    N = len(mids)
    if not np.allclose(w, 1.0 / N, rtol=0, atol=1e-15):
        D = D * np.outer(w, w) * N**2
    return D


def cut_distance(graph: SampledGraph, kernel: GraphonKernel, refinement: int = 4, restarts: int = 64,
                 mode: str = "auto", seed: int = 0) -> CutNormEstimate:
    return cutnorm(difference_matrix(graph, kernel, refinement), mode=mode, restarts=restarts, seed=seed)
