"""Time-frequency regions, covering cells, and uniform sampling from a region.

A region is a boolean mask on the L x L grid.  With the 1/L grid weight
its measure is (#points)/L, so a disk of radius 120 px at L=480 has
measure ~94.25 -- the number that also counts the large eigenvalues of
the matching localization operator.

Covering cells discretize the plane's unit cubes: a unit length in the
continuous picture corresponds to sqrt(L) pixels under the 1/L scaling,
so the default cell side is round(sqrt(L)) px and the grid is covered by
ceil(L/cell)^2 axis-aligned cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InfeasibleError, ParameterError, RegionError
from .tfcore import TFPoint

__all__ = [
    "TFRegion",
    "SampleSet",
    "CoveringReport",
    "disk_region",
    "mask_region",
    "full_region",
    "region_measure",
    "uniform_sample",
    "covering_index",
    "default_cell_px",
    "covering_excess",
]


@dataclass(eq=False)
class TFRegion:
    """A subset of the L x L time-frequency grid with measure #points / L."""

    L: int
    mask: np.ndarray
    _points: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != (self.L, self.L):
            raise DimensionError(f"mask shape {m.shape} != ({self.L}, {self.L})")
        self.mask = m

    @property
    def point_count(self) -> int:
        return int(self.mask.sum())

    @property
    def measure(self) -> float:
        return self.point_count / self.L

    def points(self) -> np.ndarray:
        """(P, 2) integer array of (m, n) grid points, row-major order. Cached."""
        if self._points is None:
            self._points = np.argwhere(self.mask)
        return self._points


@dataclass(eq=False)
class SampleSet:
    """An ordered draw of r grid points from a region, with seed provenance."""

    points: np.ndarray  # (r, 2) int array, rows (m, n)
    seed: int
    region: TFRegion
    distinct: bool

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.int64)
        if p.ndim != 2 or p.shape[1] != 2:
            raise DimensionError("SampleSet.points must be an (r, 2) array")
        self.points = p

    @property
    def r(self) -> int:
        return self.points.shape[0]

    def tfpoints(self) -> list:
        return [TFPoint(int(m), int(n)) for m, n in self.points]


@dataclass(eq=False)
class CoveringReport:
    """Per-cell occupancy of a sample set and the covering index N0 = max."""

    cell_size: int
    counts: np.ndarray  # (C, C) int array, C = ceil(L / cell_size)
    N0: int


def disk_region(L: int, center: TFPoint, radius_px: float) -> TFRegion:
    """Euclidean disk of the given pixel radius; must fit without self-wrap."""
    if radius_px <= 0:
        raise RegionError("disk radius must be positive")
    if 2 * radius_px >= L:
        raise RegionError(f"disk of radius {radius_px} px wraps around an L={L} grid")
    mm, nn = np.meshgrid(np.arange(L), np.arange(L), indexing="ij")
    mask = (mm - center.m) ** 2 + (nn - center.n) ** 2 <= radius_px**2
    return TFRegion(L, mask)


def mask_region(mask) -> TFRegion:
    """Region from an explicit boolean L x L mask."""
    m = np.asarray(mask, dtype=bool)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError("mask must be a square 2-D boolean array")
    return TFRegion(m.shape[0], m)


def full_region(L: int) -> TFRegion:
    return TFRegion(L, np.ones((L, L), dtype=bool))


def region_measure(region: TFRegion) -> float:
    """|Omega| = #points / L."""
    return region.measure


def _draw_indices(rng: np.random.Generator, P: int, r: int, distinct: bool) -> np.ndarray:
    if distinct:
        # first-r-distinct of an iid uniform stream == uniform without replacement
        return rng.permutation(P)[:r]
    return rng.integers(0, P, size=r)


def uniform_sample(region: TFRegion, r: int, seed: int, distinct: bool = False) -> SampleSet:
    """Draw r points uniformly from the region's grid points.

    distinct=False draws i.i.d. with replacement (the law the probabilistic
    certificates assume); distinct=True draws without replacement (matching
    experiments that use r distinct points).  Deterministic per seed.
    """
    if r < 1:
        raise ParameterError("sample count r must be >= 1")
    P = region.point_count
    if P == 0:
        raise RegionError("cannot sample from an empty region")
    if distinct and r > P:
        raise InfeasibleError(f"r={r} distinct points requested but region has {P}")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    idx = _draw_indices(rng, P, r, distinct)
    return SampleSet(region.points()[idx], int(seed), region, distinct)


def default_cell_px(L: int) -> int:
    """Pixel side of the unit covering cell: round(sqrt(L)), at least 1."""
    return max(1, round(math.sqrt(L)))


def covering_index(samples: SampleSet, cell_px: int) -> CoveringReport:
    """Partition the grid into aligned cell_px x cell_px cells; N0 = max occupancy."""
    if cell_px < 1:
        raise ParameterError("cell_px must be >= 1")
    L = samples.region.L
    C = -(-L // cell_px)  # ceil
    counts = np.zeros((C, C), dtype=np.int64)
    if samples.r:
        ci = samples.points[:, 0] // cell_px
        cj = samples.points[:, 1] // cell_px
        np.add.at(counts, (ci, cj), 1)
    return CoveringReport(int(cell_px), counts, int(counts.max()) if samples.r else 0)


def covering_excess(region: TFRegion, cell_px: int) -> float:
    """eps1 = (number of covering cells intersecting the region) - |Omega|.

    The region is covered by at most |Omega| + eps1 cells; eps1 absorbs the
    boundary cells that are only partially filled.
    """
    if cell_px < 1:
        raise ParameterError("cell_px must be >= 1")
    pts = region.points()
    if pts.shape[0] == 0:
        return 0.0
    n_cells = np.unique(pts // cell_px, axis=0).shape[0]
    return n_cells - region.measure
