"""Residuals F, G_n, the multipliers Q, Q_n, and dense linearizations.

States are either a GridFunction (piecewise constant on the cells of its
grid) or a ContinuumState evaluated at grid points with y-integrals done by
Gauss-Legendre quadrature split at every jump of W(x, .) and of u.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HypothesisViolation, ShapeError
from .grid import ContinuumState, GridFunction, as_points, cell_edges
from .kernels import GraphonKernel
from .models import ModelSpec

GL_PIECES = 64
GL_NODES = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_NODES)


@dataclass(frozen=True, eq=False)
class LinearizedOperator:
    matrix: np.ndarray
    q_values: np.ndarray
    kind: str  # "ContinuumFrozen" or "DiscreteJacobian"

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def min_q(self) -> float:
        return float(np.min(self.q_values))

    def header(self) -> dict:
        return {"kind": self.kind, "n": self.n, "minQ": self.min_q}


@dataclass(frozen=True, eq=False)
class QProfile:
    values: GridFunction

    @property
    def min(self) -> float:
        return float(np.min(self.values.values))

    @property
    def positive(self) -> bool:
        return self.min > 0


# --- quadrature helpers ----------------------------------------------------

def _quad_nodes(breaks) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on [0, 1] split at GL_PIECES panels and ``breaks``."""
    b = np.concatenate([np.linspace(0.0, 1.0, GL_PIECES + 1), np.asarray(breaks, dtype=float)])
    b = np.unique(np.clip(b, 0.0, 1.0))
    b = b[np.concatenate([[True], np.diff(b) > 1e-15])]
    a, c = b[:-1, None], b[1:, None]
    half = 0.5 * (c - a)
    nodes = (a + half * (_GL_X[None, :] + 1.0)).ravel()
    weights = (half * _GL_W[None, :]).ravel()
    return nodes, weights


def _row_quadrature(kernel: GraphonKernel, u: ContinuumState, x: float):
    """Nodes y, weights w, and W(x, y) for integrating against W(x, .)."""
    breaks = np.concatenate([kernel.breakpoints(x), np.asarray(u.breakpoints, dtype=float)])
    y, w = _quad_nodes(breaks)
    return y, w, np.asarray(kernel.eval(np.full_like(y, x), y))


def _couple_sum(model: ModelSpec, K: np.ndarray, ux: np.ndarray, uy: np.ndarray, which: str = "D") -> np.ndarray:
    """sum_j K_ij D*(ux_i, uy_j) for D* in {D, D1, D2}."""
    if model.terms:
        out = np.zeros(len(ux))
        for t in model.terms:
            if which == "D":
                out += t.g(ux) * (K @ t.h(uy))
            elif which == "D1":
                out += t.dg(ux) * (K @ t.h(uy))
            else:
                out += t.g(ux) * (K @ t.dh(uy))
        return out
    fn = {"D": model.D, "D1": model.D1, "D2": model.D2}[which]
    return np.sum(K * fn(ux[:, None], uy[None, :]), axis=1)


def _coupling_matrix(model: ModelSpec, ux: np.ndarray, uy: np.ndarray, which: str = "D2") -> np.ndarray:
    """[D*(ux_i, uy_j)]_ij."""
    if model.terms:
        out = np.zeros((len(ux), len(uy)))
        for t in model.terms:
            if which == "D2":
                out += np.outer(t.g(ux), t.dh(uy))
            elif which == "D1":
                out += np.outer(t.dg(ux), t.h(uy))
            else:
                out += np.outer(t.g(ux), t.h(uy))
        return out
    fn = {"D": model.D, "D1": model.D1, "D2": model.D2}[which]
    return np.asarray(fn(ux[:, None], uy[None, :]), dtype=float) * np.ones((len(ux), len(uy)))


def _integrate(model, kernel, u, grid, which):
    """x_i -> integral of W(x_i, y) D*(u(x_i), u(y)) dy."""
    if isinstance(u, GridFunction):
        x = u.grid
        K = kernel.cell_integrals(x, cell_edges(x))
        return x, u.values, _couple_sum(model, K, u.values, u.values, which)
    if grid is None:
        raise ShapeError("a continuum state needs a grid")
    x = as_points(grid)
    ux = u(x) * np.ones_like(x)
    fn = {"D": model.D, "D1": model.D1, "D2": model.D2}[which]
    out = np.empty(len(x))
    for i, xi in enumerate(x):
        y, w, Wy = _row_quadrature(kernel, u, xi)
        out[i] = np.sum(w * Wy * fn(ux[i], u(y)))
    return x, ux, out


def eval_F(model: ModelSpec, kernel: GraphonKernel, u, grid=None) -> GridFunction:
    """f(u(x_i)) + integral of W(x_i, y) D(u(x_i), u(y)) dy.

    For a GridFunction the integral is exact cell by cell; for a
    ContinuumState it uses split Gauss-Legendre quadrature on ``grid``.
    """
    x, ux, integral = _integrate(model, kernel, u, grid, "D")
    return GridFunction(model.f(ux) + integral, grid=x)


def _check_dim(graph, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (graph.n,):
        raise ShapeError(f"state has shape {u.shape}, graph has n={graph.n}")
    return u


def eval_Gn(model: ModelSpec, graph, u) -> np.ndarray:
    """f(u_i) + (1/n) sum_j A_ij D(u_i, u_j)."""
    u = _check_dim(graph, u)
    return model.f(u) + _couple_sum(model, graph.adjacency, u, u, "D") / graph.n


def q_function(model: ModelSpec, kernel: GraphonKernel, u_star, grid=None) -> QProfile:
    """Q(x_i) = -f'(u*(x_i)) - integral of W(x_i, y) D1(u*(x_i), u*(y)) dy."""
    x, ux, integral = _integrate(model, kernel, u_star, grid, "D1")
    return QProfile(GridFunction(-model.f_prime(ux) - integral, grid=x))


def qn_function(model: ModelSpec, graph, u) -> np.ndarray:
    """Q_n(u_i) = -f'(u_i) - (1/n) sum_j A_ij D1(u_i, u_j)."""
    u = _check_dim(graph, u)
    return -model.f_prime(u) - _couple_sum(model, graph.adjacency, u, u, "D1") / graph.n


def _sample_state(u_star, grid=None) -> GridFunction:
    if isinstance(u_star, GridFunction):
        return u_star
    if isinstance(u_star, ContinuumState):
        if grid is None:
            raise ShapeError("a continuum state needs a grid")
        return u_star.sample(as_points(grid))
    return GridFunction(np.asarray(u_star, dtype=float), grid=None if grid is None else as_points(grid))


def averaged_kernel(kernel: GraphonKernel, x: np.ndarray, refinement: int = 1) -> np.ndarray:
    """W at grid points, averaged over ``refinement`` sub-points per cell."""
    if refinement == 1:
        return kernel.matrix(x)
    edges = cell_edges(x)
    sub = np.arange(refinement) / refinement
    pts = (edges[:-1, None] + sub[None, :] * np.diff(edges)[:, None]).ravel()
    n = len(x)
    return kernel.matrix(pts).reshape(n, refinement, n, refinement).mean(axis=(1, 3))


def frozen_jacobian(model: ModelSpec, kernel: GraphonKernel, u_star, grid=None, refinement: int = 1) -> LinearizedOperator:
    """Dense matrix of DF(u*) restricted to step functions on the grid.

    M = diag(-Q) + (1/n) [Wbar_ij D2(u_i, u_j)], where Wbar is W at the grid
    points (averaged over sub-points when refinement > 1) and Q uses the same
    Wbar, so M is exactly the Jacobian of G_n on the deterministic sample.
    """
    u = _sample_state(u_star, grid)
    x, uv = u.grid, u.values
    n = len(uv)
    Wbar = averaged_kernel(kernel, x, refinement)
    q = -model.f_prime(uv) - _couple_sum(model, Wbar, uv, uv, "D1") / n
    M = Wbar * _coupling_matrix(model, uv, uv, "D2") / n
    M[np.diag_indices(n)] -= q
    return LinearizedOperator(M, q, "ContinuumFrozen")


def discrete_jacobian(model: ModelSpec, graph, u) -> LinearizedOperator:
    """Exact Jacobian of eval_Gn at u."""
    u = _check_dim(graph, u)
    n = graph.n
    A = graph.adjacency
    M = A * _coupling_matrix(model, u, u, "D2") / n
    d1 = _couple_sum(model, A, u, u, "D1") / n
    M[np.diag_indices(n)] += model.f_prime(u) + d1
    return LinearizedOperator(M, -model.f_prime(u) - d1, "DiscreteJacobian")


def eta_bound(model: ModelSpec, kernel: GraphonKernel, u_star, grid=None) -> float:
    """max{1, max_i (1/Q(x_i)) integral |D2(u*(x_i), u*(y))| dy}."""
    q = q_function(model, kernel, u_star, grid)
    if not q.positive:
        raise HypothesisViolation(f"min Q = {q.min} is not positive")
    x = q.values.grid
    if isinstance(u_star, GridFunction):
        w = np.diff(cell_edges(x))
        D2 = np.abs(_coupling_matrix(model, u_star.values, u_star.values, "D2"))
        integral = D2 @ w
    else:
        ux = u_star(x) * np.ones_like(x)
        y, w = _quad_nodes(u_star.breakpoints)
        uy = u_star(y) * np.ones_like(y)
        integral = np.abs(_coupling_matrix(model, ux, uy, "D2")) @ w
    return float(max(1.0, np.max(integral / q.values.values)))


def xi_opnorm_estimate(model: ModelSpec, kernel: GraphonKernel, graph, u_star) -> float:
    """Max absolute row sum of (1/Q_i)(1/n)(A_ij - W(x_i, x_j)) D2(u_i, u_j)."""
    x = graph.grid_points
    u = _sample_state(u_star, x)
    if u.n != graph.n:
        raise ShapeError("state and graph sizes differ")
    q = q_function(model, kernel, u_star if isinstance(u_star, ContinuumState) else u, x)
    if not q.positive:
        raise HypothesisViolation(f"min Q = {q.min} is not positive")
    diff = (graph.adjacency - kernel.matrix(x)) * _coupling_matrix(model, u.values, u.values, "D2")
    rows = np.abs(diff).sum(axis=1) / graph.n
    return float(np.max(rows / q.values.values))
