"""Density grids, binary PGM rendering and point CSV files."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ifs import cell_indices
from .primes import default_workers

LINEAR = "linear"
LOG = "log"
GRID_GRAY = 128


@dataclass
class DensityGrid:
    """Row-major visit counts; row 0 is the top of the image (y near 1)."""

    width: int
    height: int
    counts: np.ndarray
    points_total: int

    def __post_init__(self) -> None:
        if self.width != self.height:
            raise ValueError("density grids are square")
        if self.counts.shape != (self.height, self.width):
            raise ValueError("counts shape does not match the grid size")
        if int(self.counts.sum()) != self.points_total:
            raise ValueError("counts must sum to points_total")

    @property
    def size(self) -> int:
        return self.width

    def block_sums(self, depth: int) -> np.ndarray:
        """Counts summed over the ``2**depth`` x ``2**depth`` dyadic blocks (row 0 at the top)."""
        n = 1 << depth
        if self.size % n:
            raise ValueError(f"grid size {self.size} is not divisible by {n}")
        b = self.size // n
        return self.counts.reshape(n, b, n, b).sum(axis=(1, 3))


def _grid_counts(points: np.ndarray, size: int) -> np.ndarray:
    grid = np.zeros((size, size), dtype=np.int64)
    if len(points) == 0:
        return grid
    # Column/row at resolution ``size``: same floor-and-clamp rule as addresses.
    xs, ys = points[:, 0], points[:, 1]
    col = np.minimum(np.floor(xs * size).astype(np.int64), size - 1)
    row = (size - 1) - np.minimum(np.floor(ys * size).astype(np.int64), size - 1)
    np.add.at(grid, (row, col), 1)
    return grid


def accumulate(points, size: int, *, workers: int | None = None) -> DensityGrid:
    """Bin points of the unit square into a ``size`` x ``size`` grid.

    Column ``floor(x * size)`` and row ``size - 1 - floor(y * size)``, each
    clamped to ``size - 1``, so the image origin is top-left.
    """
    if size < 2:
        raise ValueError("size must be >= 2")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if pts.size:
        cell_indices(pts, 0)  # raises OutOfUnitSquareError
    workers = workers or default_workers()
    if workers == 1 or len(pts) < 2 * workers:
        grid = _grid_counts(pts, size)
    else:
        shards = np.array_split(pts, workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            grid = np.sum(list(pool.map(lambda s: _grid_counts(s, size), shards)), axis=0)
    return DensityGrid(size, size, grid, len(pts))


def add_gridlines(pixels: np.ndarray, divider: int) -> np.ndarray:
    """Mid-gray 1-pixel lines at multiples of ``size / divider`` (interior only)."""
    out = pixels.copy()
    size = out.shape[0]
    for k in range(1, divider):
        pos = k * size // divider
        out[pos, :] = GRID_GRAY
        out[:, pos] = GRID_GRAY
    return out


def intensities(g: DensityGrid, scale: str = LOG) -> np.ndarray:
    """8-bit gray levels, dark where visited often."""
    if scale not in (LINEAR, LOG):
        raise ValueError(f"unknown scale {scale!r}")
    c = g.counts.astype(np.float64)
    cmax = c.max() if c.size else 0.0
    if g.points_total == 0 or cmax <= 0:
        return np.full(g.counts.shape, 255, dtype=np.uint8)
    v = c / cmax if scale == LINEAR else np.log1p(c) / np.log1p(cmax)
    # Round half up; numpy's rint would round half to even.
    return (255 - np.floor(255 * v + 0.5)).astype(np.uint8)


def render_pgm(g: DensityGrid, scale: str = LOG, divider: int | None = None) -> bytes:
    """Binary P5 PGM with maxval 255."""
    pix = intensities(g, scale)
    if divider and divider > 1:
        pix = add_gridlines(pix, divider)
    header = f"P5\n{g.width} {g.height}\n255\n".encode("ascii")
    return header + pix.tobytes()


def read_pgm(data: bytes) -> np.ndarray:
    """Parse the P5 files written by :func:`render_pgm`."""
    magic, dims, maxval, body = data.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ValueError("not an 8-bit binary PGM")
    w, h = map(int, dims.split())
    return np.frombuffer(body, dtype=np.uint8, count=w * h).reshape(h, w)


def write_points_csv(points) -> str:
    """One ``x,y`` line per point with 17 significant digits (round-trips exactly)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    return "".join(f"{x:.17g},{y:.17g}\n" for x, y in pts.tolist())


def read_points_csv(text: str) -> np.ndarray:
    rows = [line.split(",") for line in text.splitlines() if line]
    return np.array([[float(x), float(y)] for x, y in rows], dtype=np.float64).reshape(-1, 2)
