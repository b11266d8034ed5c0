"""Uniform periodic grids and the scalar fields living on them.

Axis convention for 2D arrays: ``values[k, j]`` holds the value at node
``(x_k, y_j)`` with ``x_k = k * dx`` and ``y_j = j * dy`` (axis 0 is x,
axis 1 is y).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid in 1 or 2 dimensions.

    Nodes along an axis of length L with M partitions sit at k*L/M for
    k = 0..M-1; the node at L is identified with the node at 0.
    """

    lengths: tuple
    shape: tuple

    def __post_init__(self):
        lengths = tuple(float(v) for v in self.lengths)
        shape = tuple(int(v) for v in self.shape)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "shape", shape)
        if len(lengths) != len(shape):
            raise GridMismatch("lengths and shape must have equal rank")
        if len(lengths) not in (1, 2):
            raise GridMismatch("only 1D and 2D grids are supported")
        if any(v <= 0 for v in lengths):
            raise GridMismatch("domain lengths must be positive")
        if any(m < 2 for m in shape):
            raise GridMismatch("need at least 2 nodes per axis")

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def spacings(self) -> tuple:
        return tuple(L / M for L, M in zip(self.lengths, self.shape))

    @property
    def node_count(self) -> int:
        n = 1
        for m in self.shape:
            n *= m
        return n

    def axis_coords(self, axis: int) -> np.ndarray:
        d = self.spacings[axis]
        return np.arange(self.shape[axis]) * d

    def meshes(self):
        """Coordinate arrays broadcast to the grid shape ('ij' indexing)."""
        axes = [self.axis_coords(a) for a in range(self.ndim)]
        if self.ndim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def wrap_index(self, k, axis: int):
        """Total periodic index map ((k mod M) + M) mod M."""
        m = self.shape[axis]
        return (np.asarray(k) % m + m) % m


@dataclass
class GridField:
    """Scalar field sampled on a :class:`Grid`; values must stay finite."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise GridMismatch(
                f"field shape {self.values.shape} != grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise GridMismatch("field contains non-finite values")

    def copy(self) -> "GridField":
        return GridField(self.grid, self.values.copy())

    def total(self) -> float:
        return float(self.values.sum())


def require_same_grid(a: Grid, b: Grid):
    if a != b:
        raise GridMismatch(f"grids differ: {a} vs {b}")
