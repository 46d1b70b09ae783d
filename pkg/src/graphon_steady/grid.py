"""Partitions of [0, 1] and piecewise-constant functions on them."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


def uniform_grid(n: int) -> np.ndarray:
    """Left endpoints x_i = (i - 1)/n of the cells of I_n."""
    if n < 1:
        raise ValueError("grid size must be >= 1")
    return np.arange(n, dtype=float) / n


def cell_edges(grid: np.ndarray) -> np.ndarray:
    return np.append(np.asarray(grid, dtype=float), 1.0)


def cell_widths(grid: np.ndarray) -> np.ndarray:
    return np.diff(cell_edges(grid))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A step function taking ``values[i]`` on ``[grid[i], grid[i+1])``.

    ``grid`` defaults to the uniform left endpoints (i - 1)/n.
    """

    values: np.ndarray
    grid: np.ndarray | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float, ndmin=1)
        if values.ndim != 1:
            raise ValueError("GridFunction values must be one-dimensional")
        grid = uniform_grid(len(values)) if self.grid is None else np.asarray(self.grid, dtype=float)
        if grid.shape != values.shape:
            raise ValueError("grid and values must have the same length")
        if grid[0] < 0 or grid[-1] >= 1 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing inside [0, 1)")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "grid", grid)

    @property
    def n(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __call__(self, x):
        """Evaluate the step function at points in [0, 1]."""
        idx = np.searchsorted(self.grid, np.asarray(x, dtype=float), side="right") - 1
        return self.values[np.clip(idx, 0, self.n - 1)]


@dataclass(frozen=True, eq=False)
class ContinuumState:
    """A function u(x) on [0, 1] with known jump locations.

    Quadrature routines split their panels at ``breakpoints``.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    breakpoints: Sequence[float] = field(default_factory=tuple)

    def __call__(self, x):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)

    def sample(self, grid) -> GridFunction:
        """Sample at grid points; an int means the uniform grid of that size."""
        pts = uniform_grid(grid) if np.isscalar(grid) else np.asarray(grid, dtype=float)
        return GridFunction(np.broadcast_to(self(pts), pts.shape).copy(), grid=pts)


def as_points(grid) -> np.ndarray:
    if isinstance(grid, (int, np.integer)):
        return uniform_grid(int(grid))
    return np.asarray(grid, dtype=float)
