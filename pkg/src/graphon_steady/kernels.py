"""Graphon kernels W: [0,1]^2 -> [0,1] and the quantities derived from them.

Every kernel supports vectorised evaluation, exact integration of W(x, .)
over the cells of an arbitrary partition, and a JSON round trip::

    {"family": "smallworld", "alpha": 0.2, "p": 0.79577, "q": 0.0}
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, RangeError, ValidationError
from .grid import GridFunction, uniform_grid

# distances within this of a band edge count as inside the band
BOUNDARY_TOL = 1e-12
DEFAULT_FOURIER_K = 64


def ring_distance(x, y):
    d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    return np.minimum(d, 1.0 - d)


def _check_unit(*arrays):
    for a in arrays:
        a = np.asarray(a, dtype=float)
        if not np.all(np.isfinite(a)) or np.any(a < 0.0) or np.any(a > 1.0):
            raise DomainError("kernel coordinates must lie in [0, 1]")


def _check_prob(name, value):
    if not (0.0 <= value <= 1.0):
        raise ValidationError(f"{name}={value} must lie in [0, 1]")


def _overlap(a, b, lo, hi):
    return np.maximum(0.0, np.minimum(b, hi) - np.maximum(a, lo))


def _band_measure(x, a, b, r):
    """|[a, b] ∩ {y : ring_distance(x, y) <= r}|, broadcasting x against (a, b)."""
    if r >= 0.5:
        return np.broadcast_to(b - a, np.broadcast(x, a).shape).astype(float)
    total = 0.0
    for k in (-1.0, 0.0, 1.0):
        total = total + _overlap(a, b, x - r + k, x + r + k)
    return total


@dataclass(frozen=True)
class RingCoefficients:
    """Fourier coefficients c_0..c_K of a ring graphon, with c_k = c_{-k}."""

    values: tuple

    @property
    def K(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k: int) -> float:
        k = abs(int(k))
        if k > self.K:
            raise RangeError(f"Fourier index {k} exceeds truncation K={self.K}")
        return self.values[k]

    def two_sided(self) -> np.ndarray:
        """Array c_{-K}, ..., c_K."""
        v = np.asarray(self.values)
        return np.concatenate([v[:0:-1], v])


class GraphonKernel:
    """Base class. Subclasses implement ``_eval``, ``cell_integrals``, ``breakpoints``."""

    family = "abstract"

    def __call__(self, x, y):
        return self.eval(x, y)

    def eval(self, x, y):
        _check_unit(x, y)
        out = self._eval(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def _eval(self, x, y):
        raise NotImplementedError

    def matrix(self, points, cols=None) -> np.ndarray:
        """W(points[i], cols[j]); ``cols`` defaults to ``points``."""
        points = np.asarray(points, dtype=float)
        cols = points if cols is None else np.asarray(cols, dtype=float)
        return np.asarray(self.eval(points[:, None], cols[None, :]), dtype=float)

    def cell_integrals(self, x, edges) -> np.ndarray:
        """K[i, j] = integral of W(x_i, y) over y in [edges[j], edges[j+1])."""
        raise NotImplementedError

    def breakpoints(self, x: float) -> np.ndarray:
        """Locations in (0, 1) where y -> W(x, y) may jump."""
        return np.empty(0)

    def degree_at(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        _check_unit(x)
        return self.cell_integrals(x, np.array([0.0, 1.0]))[:, 0]

    def to_config(self) -> dict:
        raise NotImplementedError

    @property
    def kernel_id(self) -> str:
        cfg = self.to_config()
        if cfg["family"] == "step":
            return f"step(n={len(cfg['values'])})"
        args = ",".join(f"{k}={v!r}" for k, v in cfg.items() if k != "family")
        return f"{cfg['family']}({args})"


@dataclass(frozen=True, eq=False)
class Constant(GraphonKernel):
    p: float
    family = "constant"

    def __post_init__(self):
        _check_prob("p", self.p)

    def _eval(self, x, y):
        return np.full(np.broadcast(x, y).shape, float(self.p))

    def cell_integrals(self, x, edges):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        widths = np.diff(np.asarray(edges, dtype=float))
        return np.broadcast_to(self.p * widths, (len(x), len(widths))).copy()

    def fourier_coefficients(self, K: int = DEFAULT_FOURIER_K) -> RingCoefficients:
        return RingCoefficients((float(self.p),) + (0.0,) * K)

    def to_config(self):
        return {"family": "constant", "p": float(self.p)}


@dataclass(frozen=True, eq=False)
class Ring(GraphonKernel):
    """Ring graphon W(x, y) = R(ring_distance(x, y)).

    Either a piecewise-constant profile (``breaks`` increasing to 1/2, with
    R(d) = values[k] for breaks[k-1] < d <= breaks[k]) or truncated Fourier
    coefficients c_0..c_K.
    """

    breaks: tuple | None = None
    values: tuple | None = None
    coefficients: tuple | None = None
    family = "ring"

    def __post_init__(self):
        if (self.coefficients is None) == (self.breaks is None):
            raise ValidationError("Ring needs exactly one of a profile or Fourier coefficients")
        if self.breaks is not None:
            b = np.asarray(self.breaks, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if b.shape != v.shape or b.ndim != 1 or len(b) == 0:
                raise ValidationError("breaks and values must be equal-length sequences")
            if np.any(np.diff(b) <= 0) or b[0] <= 0 or abs(b[-1] - 0.5) > 1e-15:
                raise ValidationError("breaks must increase strictly and end at 1/2")
            for val in v:
                _check_prob("profile value", val)
            object.__setattr__(self, "breaks", tuple(float(t) for t in b))
            object.__setattr__(self, "values", tuple(float(t) for t in v))
        else:
            c = tuple(float(t) for t in self.coefficients)
            object.__setattr__(self, "coefficients", c)
            t = np.linspace(0.0, 0.5, 4097)
            r = self._series(t)
            if r.min() < -1e-9 or r.max() > 1 + 1e-9:
                raise ValidationError("truncated Fourier series leaves [0, 1]")

    def _series(self, d):
        c = self.coefficients
        out = np.full(np.shape(d), c[0])
        for k in range(1, len(c)):
            if c[k] != 0.0:
                out = out + 2.0 * c[k] * np.cos(2 * np.pi * k * d)
        return out

    def profile(self, d):
        d = np.asarray(d, dtype=float)
        if self.coefficients is not None:
            return np.clip(self._series(d), 0.0, 1.0)
        idx = np.searchsorted(self.breaks, d - BOUNDARY_TOL, side="left")
        return np.asarray(self.values)[np.minimum(idx, len(self.values) - 1)]

    def _eval(self, x, y):
        return self.profile(ring_distance(x, y))

    def cell_integrals(self, x, edges):
        x = np.atleast_1d(np.asarray(x, dtype=float))[:, None]
        edges = np.asarray(edges, dtype=float)
        a, b = edges[None, :-1], edges[None, 1:]
        if self.coefficients is not None:
            c = self.coefficients
            out = c[0] * (b - a) + 0.0 * x
            for k in range(1, len(c)):
                if c[k] != 0.0:
                    w = 2 * np.pi * k
                    out = out + 2.0 * c[k] * (np.sin(w * (x - a)) - np.sin(w * (x - b))) / w
            return out
        out = 0.0
        prev = 0.0
        inner_prev = np.zeros(np.broadcast(x, a).shape)
        for r, v in zip(self.breaks, self.values):
            inner = _band_measure(x, a, b, r)
            out = out + v * (inner - inner_prev)
            inner_prev, prev = inner, r
        return out

    def breakpoints(self, x):
        if self.breaks is None:
            return np.empty(0)
        pts = []
        for r in self.breaks[:-1]:
            pts.extend([(x - r) % 1.0, (x + r) % 1.0])
        pts = np.unique(np.asarray(pts))
        return pts[(pts > 0) & (pts < 1)]

    def fourier_coefficients(self, K: int = DEFAULT_FOURIER_K) -> RingCoefficients:
        if self.coefficients is not None:
            c = list(self.coefficients[: K + 1])
            return RingCoefficients(tuple(c + [0.0] * (K + 1 - len(c))))
        b = np.concatenate([[0.0], self.breaks])
        v = np.asarray(self.values)
        c = [float(2.0 * np.sum(v * np.diff(b)))]
        for k in range(1, K + 1):
            s = np.sin(2 * np.pi * k * b)
            c.append(float(np.sum(v * np.diff(s)) / (np.pi * k)))
        return RingCoefficients(tuple(c))

    def to_config(self):
        if self.coefficients is not None:
            return {"family": "ring", "coefficients": list(self.coefficients)}
        return {"family": "ring", "breaks": list(self.breaks), "values": list(self.values)}


@dataclass(frozen=True, eq=False)
class SmallWorld(GraphonKernel):
    """W = p when ring_distance(x, y) <= alpha, q otherwise."""

    alpha: float
    p: float
    q: float = 0.0
    family = "smallworld"

    def __post_init__(self):
        if not (0.0 < self.alpha <= 0.5):
            raise ValidationError(f"alpha={self.alpha} must lie in (0, 1/2]")
        _check_prob("p", self.p)
        _check_prob("q", self.q)

    def _eval(self, x, y):
        inside = ring_distance(x, y) <= self.alpha + BOUNDARY_TOL
        return np.where(inside, float(self.p), float(self.q))

    def cell_integrals(self, x, edges):
        x = np.atleast_1d(np.asarray(x, dtype=float))[:, None]
        edges = np.asarray(edges, dtype=float)
        a, b = edges[None, :-1], edges[None, 1:]
        band = _band_measure(x, a, b, self.alpha)
        return self.q * (b - a) + (self.p - self.q) * band

    def breakpoints(self, x):
        if self.alpha >= 0.5:
            return np.empty(0)
        pts = np.unique([(x - self.alpha) % 1.0, (x + self.alpha) % 1.0])
        return pts[(pts > 0) & (pts < 1)]

    def fourier_coefficients(self, K: int = DEFAULT_FOURIER_K) -> RingCoefficients:
        return smallworld_fourier(self.alpha, self.p, self.q, K)

    def to_config(self):
        return {"family": "smallworld", "alpha": float(self.alpha), "p": float(self.p), "q": float(self.q)}


@dataclass(frozen=True, eq=False)
class Bipartite(GraphonKernel):
    """W = p across the groups [0, alpha) and [alpha, 1], zero inside them."""

    alpha: float
    p: float
    family = "bipartite"

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValidationError(f"alpha={self.alpha} must lie in (0, 1)")
        _check_prob("p", self.p)

    def _eval(self, x, y):
        return np.where((x < self.alpha) != (y < self.alpha), float(self.p), 0.0)

    def cell_integrals(self, x, edges):
        x = np.atleast_1d(np.asarray(x, dtype=float))[:, None]
        edges = np.asarray(edges, dtype=float)
        a, b = edges[None, :-1], edges[None, 1:]
        first = _overlap(a, b, 0.0, self.alpha)
        second = _overlap(a, b, self.alpha, 1.0)
        return self.p * np.where(x < self.alpha, second, first)

    def breakpoints(self, x):
        return np.array([self.alpha])

    def to_config(self):
        return {"family": "bipartite", "alpha": float(self.alpha), "p": float(self.p)}


@dataclass(frozen=True, eq=False)
class StepGraphon(GraphonKernel):
    """Constant ``values[i, j]`` on [(i-1)/n, i/n) x [(j-1)/n, j/n)."""

    values: np.ndarray
    family = "step"

    def __post_init__(self):
        v = np.array(self.values, dtype=float, ndmin=2)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValidationError("step graphon values must be a square matrix")
        if not np.array_equal(v, v.T):
            raise ValidationError("step graphon values must be symmetric")
        if not np.all(np.isfinite(v)) or v.min() < 0 or v.max() > 1:
            raise ValidationError("step graphon values must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def _index(self, x):
        # compare against arange(n)/n, the same floats as the uniform grid
        steps = np.arange(self.n) / self.n
        return np.searchsorted(steps, x, side="right") - 1

    def _eval(self, x, y):
        return self.values[self._index(x), self._index(y)]

    def cell_integrals(self, x, edges):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        edges = np.asarray(edges, dtype=float)
        steps = np.arange(self.n + 1) / self.n
        # overlap[j, J] = |cell j ∩ step cell J|
        overlap = _overlap(edges[:-1, None], edges[1:, None], steps[None, :-1], steps[None, 1:])
        return self.values[self._index(x)] @ overlap.T

    def breakpoints(self, x):
        return np.arange(1, self.n) / self.n

    def to_config(self):
        return {"family": "step", "values": self.values.tolist()}


def step_from_matrix(A) -> StepGraphon:
    """Embed a symmetric matrix with entries in [0, 1] as a step graphon."""
    return StepGraphon(np.array(A, dtype=float))


def smallworld_fourier(alpha: float, p: float, q: float, K: int = DEFAULT_FOURIER_K) -> RingCoefficients:
    if not (0.0 < alpha <= 0.5):
        raise ValidationError(f"alpha={alpha} must lie in (0, 1/2]")
    c = [2 * alpha * p + (1 - 2 * alpha) * q]
    for k in range(1, K + 1):
        c.append((p - q) / (math.pi * k) * math.sin(2 * math.pi * k * alpha))
    return RingCoefficients(tuple(c))


def kernel_from_config(cfg: dict, base_dir: Path | None = None) -> GraphonKernel:
    family = str(cfg.get("family", "")).lower()
    if family in ("constant", "er", "erdos_renyi"):
        return Constant(float(cfg["p"]))
    if family in ("smallworld", "small_world"):
        return SmallWorld(float(cfg["alpha"]), float(cfg["p"]), float(cfg.get("q", 0.0)))
    if family == "bipartite":
        return Bipartite(float(cfg["alpha"]), float(cfg["p"]))
    if family == "ring":
        if "coefficients" in cfg:
            return Ring(coefficients=tuple(cfg["coefficients"]))
        return Ring(breaks=tuple(cfg["breaks"]), values=tuple(cfg["values"]))
    if family == "step":
        if "values" in cfg:
            return StepGraphon(np.asarray(cfg["values"], dtype=float))
        from .io import read_matrix_csv

        path = Path(cfg["csv"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return StepGraphon(read_matrix_csv(path))
    raise ValidationError(f"unknown kernel family {cfg.get('family')!r}")


def load_kernel(path) -> GraphonKernel:
    path = Path(path)
    return kernel_from_config(json.loads(path.read_text()), base_dir=path.parent)


def degree(kernel: GraphonKernel, resolution: int, method: str = "auto") -> GridFunction:
    """d_W(x_i) at x_i = (i - 1)/resolution.

    ``method="quadrature"`` forces composite midpoint quadrature with
    max(10 * resolution, 4000) nodes instead of exact integration.
    """
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    x = uniform_grid(resolution)
    if method == "auto":
        return GridFunction(kernel.degree_at(x))
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    return GridFunction(midpoint_degree(kernel, x, max(10 * resolution, 4000)))


def midpoint_degree(kernel: GraphonKernel, x, nodes: int) -> np.ndarray:
    y = (np.arange(nodes) + 0.5) / nodes
    return kernel.matrix(np.atleast_1d(x), y).mean(axis=1)


def continuity_modulus(kernel: GraphonKernel, delta: float, grid: int = 1000, nodes: int | None = None) -> float:
    """max over grid points |x - x0| < delta of  integral |W(x, y) - W(x0, y)| dy.

    Both x and x0 range over {0, 1/grid, ..., 1}; the y integral uses
    ``nodes`` midpoint nodes (default 4 * grid, at least 4000).
    """
    if not (0.0 < delta < 1.0):
        raise DomainError("delta must lie in (0, 1)")
    nodes = nodes or max(4 * grid, 4000)
    xs = np.arange(grid + 1) / grid
    ys = (np.arange(nodes) + 0.5) / nodes
    G = kernel.matrix(xs, ys)
    best = 0.0
    kmax = math.ceil(delta * grid) - 1
    for k in range(1, kmax + 1):
        if k / grid >= delta:
            break
        best = max(best, float(np.abs(G[k:] - G[:-k]).mean(axis=1).max()))
    return best
