"""Uniform 2-D lattices over disks and squares, grid functions, and text I/O.

The lattice always spans [-extent, extent]^2 with N nodes per axis, spacing
h = 2*extent/(N-1).  A disk domain is a masked subset of that lattice: a node
is interior when it lies strictly inside the disk, and the discrete boundary
is the 8-connected collar of the interior (every non-interior node touching
an interior node through any of its eight lattice neighbours).  The collar
guarantees that cross-difference stencils evaluated at interior nodes never
reach an undefined node.  Boundary data at a collar node is evaluated at the
node's own coordinates; there is no sub-cell boundary fitting.

Grid file format (text, row-major in the x index):

    grid <shape> <N> <extent>
    v(0,0) v(0,1) ... v(0,N-1)
    ...
    v(N-1,0) ... v(N-1,N-1)

with ``nan`` for undefined nodes.  Values are written with shortest
round-trip formatting, so save/load is exact and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "Grid2",
    "GridFunction",
    "SubRegion",
    "load_grid",
    "save_grid",
    "shift_array",
]

_NEIGHBORS8 = [(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1) if (di, dj) != (0, 0)]


def shift_array(a: np.ndarray, di: int, dj: int, fill=0):
    """Return b with b[i, j] = a[i - di, j - dj], padding with ``fill``."""
    out = np.full_like(a, fill)
    n0, n1 = a.shape
    rs = slice(max(di, 0), n0 + min(di, 0))
    cs = slice(max(dj, 0), n1 + min(dj, 0))
    rs_src = slice(max(-di, 0), n0 + min(-di, 0))
    cs_src = slice(max(-dj, 0), n1 + min(-dj, 0))
    out[rs, cs] = a[rs_src, cs_src]
    return out


def _collar(interior: np.ndarray) -> np.ndarray:
    grown = np.zeros_like(interior)
    for di, dj in _NEIGHBORS8:
        grown |= shift_array(interior, di, dj, fill=False)
    return grown & ~interior


@dataclass(frozen=True)
class SubRegion:
    """Interior/boundary node masks carving a sub-domain out of a lattice."""

    interior: np.ndarray
    boundary: np.ndarray

    @property
    def defined(self) -> np.ndarray:
        return self.interior | self.boundary


class Grid2:
    """Square lattice over [-extent, extent]^2 with a disk or square domain mask."""

    def __init__(self, shape: str, N: int, extent: float = 1.0):
        if shape not in ("disk", "square"):
            raise ValueError(f"unknown grid shape {shape!r}")
        N = int(N)
        if N < 17:
            raise ValueError("grid needs at least 17 nodes per axis")
        if not extent > 0:
            raise ValueError("extent must be positive")
        self.shape = shape
        self.N = N
        self.extent = float(extent)
        self.h = 2.0 * self.extent / (N - 1)
        self.xs = np.linspace(-self.extent, self.extent, N)
        self.X, self.Y = np.meshgrid(self.xs, self.xs, indexing="ij")
        if shape == "disk":
            rr = np.hypot(self.X, self.Y)
            interior = rr < self.extent * (1.0 - 1e-12)
        else:
            interior = np.zeros((N, N), dtype=bool)
            interior[1:-1, 1:-1] = True
        self.region = SubRegion(interior, _collar(interior))

    @classmethod
    def disk(cls, N: int, radius: float = 1.0) -> "Grid2":
        return cls("disk", N, radius)

    @classmethod
    def square(cls, N: int, half_width: float = 1.0) -> "Grid2":
        return cls("square", N, half_width)

    @property
    def interior(self) -> np.ndarray:
        return self.region.interior

    @property
    def boundary(self) -> np.ndarray:
        return self.region.boundary

    @property
    def defined(self) -> np.ndarray:
        return self.region.defined

    def ball_mask(self, radius: float, center=(0.0, 0.0)) -> np.ndarray:
        """Defined nodes within the closed ball of the given radius."""
        rr = np.hypot(self.X - center[0], self.Y - center[1])
        return self.defined & (rr <= radius * (1.0 + 1e-12))

    def subregion(self, radius: float, center=(0.0, 0.0)) -> SubRegion:
        """Disk sub-domain on this lattice (interior strictly inside, 8-collar boundary)."""
        rr = np.hypot(self.X - center[0], self.Y - center[1])
        interior = rr < radius * (1.0 - 1e-12)
        return SubRegion(interior, _collar(interior))

    def __repr__(self) -> str:
        return f"Grid2({self.shape!r}, N={self.N}, extent={self.extent})"


@dataclass
class GridFunction:
    """Scalar field sampled on a grid; NaN off the defined mask."""

    grid: Grid2
    values: np.ndarray
    defined: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        bad = self.defined & ~np.isfinite(self.values)
        if bad.any():
            raise ValueError("non-finite values on defined nodes")

    @classmethod
    def from_callable(cls, grid: Grid2, fn: Callable, mask: np.ndarray | None = None) -> "GridFunction":
        mask = grid.defined if mask is None else mask
        values = np.full((grid.N, grid.N), np.nan)
        values[mask] = np.asarray(fn(grid.X[mask], grid.Y[mask]), dtype=float)
        return cls(grid, values, mask.copy())

    @classmethod
    def zeros(cls, grid: Grid2, mask: np.ndarray | None = None) -> "GridFunction":
        return cls.from_callable(grid, lambda x, y: np.zeros_like(x), mask)

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy(), self.defined.copy(), dict(self.meta))

    def filled(self, fill: float = 0.0) -> np.ndarray:
        """Values array with undefined nodes replaced by ``fill`` (for stencil work)."""
        out = self.values.copy()
        out[~self.defined] = fill
        return out

    def sup(self, mask: np.ndarray | None = None) -> float:
        """Max of |values| over defined nodes (optionally intersected with mask)."""
        m = self.defined if mask is None else (self.defined & mask)
        if not m.any():
            raise ValueError("empty evaluation mask")
        return float(np.max(np.abs(self.values[m])))

    def interp(self, px: np.ndarray, py: np.ndarray) -> np.ndarray:
        """Bilinear interpolation at points; NaN where a cell corner is undefined."""
        g = self.grid
        fx = (np.asarray(px) + g.extent) / g.h
        fy = (np.asarray(py) + g.extent) / g.h
        i0 = np.clip(np.floor(fx).astype(int), 0, g.N - 2)
        j0 = np.clip(np.floor(fy).astype(int), 0, g.N - 2)
        tx = fx - i0
        ty = fy - j0
        v = self.values
        out = (
            v[i0, j0] * (1 - tx) * (1 - ty)
            + v[i0 + 1, j0] * tx * (1 - ty)
            + v[i0, j0 + 1] * (1 - tx) * ty
            + v[i0 + 1, j0 + 1] * tx * ty
        )
        inside = (fx >= 0) & (fx <= g.N - 1) & (fy >= 0) & (fy <= g.N - 1)
        return np.where(inside, out, np.nan)


def save_grid(path, gf: GridFunction) -> None:
    g = gf.grid
    lines = [f"grid {g.shape} {g.N} {g.extent!r}"]
    for i in range(g.N):
        lines.append(" ".join(repr(float(v)) for v in gf.values[i]))
    Path(path).write_text("\n".join(lines) + "\n")


def load_grid(path) -> GridFunction:
    text = Path(path).read_text().strip().splitlines()
    head = text[0].split()
    if len(head) != 4 or head[0] != "grid":
        raise ValueError(f"{path}: malformed grid header {text[0]!r}")
    grid = Grid2(head[1], int(head[2]), float(head[3]))
    values = np.array([[float(tok) for tok in line.split()] for line in text[1:]])
    if values.shape != (grid.N, grid.N):
        raise ValueError(f"{path}: expected {grid.N}x{grid.N} values, got {values.shape}")
    defined = np.isfinite(values)
    return GridFunction(grid, values, defined)
