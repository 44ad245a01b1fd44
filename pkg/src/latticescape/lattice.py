"""Lattice geometry: site indexing, adjacency, and boundary classification.

Two domains are supported: the periodic torus (side K in every one of the
d directions, coordinates wrap modulo K) and the Dirichlet cube
{1,...,K}^d (edges leaving the cube are dropped; the outside is treated
as zero and never materialized).

Coordinates are 1-based tuples (c_1,...,c_d) with c_i in {1,...,K}.
Linear indices are 0-based, row-major with dimension 1 varying fastest:
linear = (c_1-1) + K*(c_2-1) + K^2*(c_3-1) + ...
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

from .errors import IndexOutOfRange, NotApplicable


class BoundaryCondition(str, enum.Enum):
    PERIODIC = "periodic"
    DIRICHLET = "dirichlet"


class SiteIndex(NamedTuple):
    linear: int
    coords: tuple[int, ...]


@dataclass(frozen=True)
class LatticeGeometry:
    """Cubic lattice of side K in d dimensions with a boundary condition."""

    dim: int
    side: int
    bc: BoundaryCondition

    def __post_init__(self):
        if isinstance(self.bc, str) and not isinstance(self.bc, BoundaryCondition):
            object.__setattr__(self, "bc", BoundaryCondition(self.bc.lower()))
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.side < 3:
            raise ValueError(f"side must be >= 3, got {self.side}")

    @property
    def n_sites(self) -> int:
        return self.side ** self.dim

    @property
    def is_periodic(self) -> bool:
        return self.bc == BoundaryCondition.PERIODIC

    def shape(self) -> tuple[int, ...]:
        return (self.side,) * self.dim


def to_coords(geom: LatticeGeometry, linear: int) -> tuple[int, ...]:
    """1-based coordinate tuple of a 0-based linear index."""
    if not 0 <= linear < geom.n_sites:
        raise IndexOutOfRange(f"linear index {linear} outside [0, {geom.n_sites})")
    out = []
    rem = int(linear)
    for _ in range(geom.dim):
        out.append(rem % geom.side + 1)
        rem //= geom.side
    return tuple(out)


def to_linear(geom: LatticeGeometry, coords: Iterable[int]) -> int:
    """0-based linear index of a 1-based coordinate tuple."""
    coords = tuple(int(c) for c in coords)
    if len(coords) != geom.dim:
        raise IndexOutOfRange(f"expected {geom.dim} coordinates, got {len(coords)}")
    lin = 0
    stride = 1
    for c in coords:
        if not 1 <= c <= geom.side:
            raise IndexOutOfRange(f"coordinate {c} outside [1, {geom.side}]")
        lin += (c - 1) * stride
        stride *= geom.side
    return lin


def site_index(geom: LatticeGeometry, site) -> SiteIndex:
    """Normalize a linear index, coordinate tuple, or SiteIndex to SiteIndex."""
    if isinstance(site, SiteIndex):
        if to_linear(geom, site.coords) != site.linear:
            raise IndexOutOfRange(f"inconsistent SiteIndex {site}")
        return site
    if isinstance(site, (int, np.integer)):
        return SiteIndex(int(site), to_coords(geom, int(site)))
    coords = tuple(int(c) for c in site)
    return SiteIndex(to_linear(geom, coords), coords)


@lru_cache(maxsize=32)
def neighbor_table(geom: LatticeGeometry) -> np.ndarray:
    """(N, 2d) array of neighbor linear indices, -1 where the edge leaves the cube.

    Column order is fixed: (-e_1, +e_1, -e_2, +e_2, ...), which pins the
    deterministic neighbor ordering used everywhere downstream.
    """
    K, d, n = geom.side, geom.dim, geom.n_sites
    lin = np.arange(n, dtype=np.int64)
    table = np.empty((n, 2 * d), dtype=np.int64)
    stride = 1
    for axis in range(d):
        c0 = (lin // stride) % K  # 0-based coordinate along this axis
        for sign, col in ((-1, 2 * axis), (+1, 2 * axis + 1)):
            shifted = c0 + sign
            if geom.is_periodic:
                tgt = lin + (shifted % K - c0) * stride
            else:
                inside = (0 <= shifted) & (shifted < K)
                tgt = np.where(inside, lin + sign * stride, -1)
            table[:, col] = tgt
        stride *= K
    table.setflags(write=False)
    return table


def neighbors(geom: LatticeGeometry, site) -> list[SiteIndex]:
    """Nearest neighbors of a site, in the fixed (-e_1, +e_1, ...) order.

    Periodic lattices return exactly 2d sites (coordinates wrap modulo K);
    Dirichlet cubes return only the in-cube neighbors.
    """
    s = site_index(geom, site)
    row = neighbor_table(geom)[s.linear]
    return [SiteIndex(int(m), to_coords(geom, int(m))) for m in row if m >= 0]


def boundary_deficiency(geom: LatticeGeometry, site) -> int:
    """Number of out-of-cube neighbors k_n of a Dirichlet site.

    Zero exactly on the interior; between 1 and d on the inner boundary.
    """
    if geom.is_periodic:
        raise NotApplicable("boundary deficiency is undefined for periodic lattices")
    s = site_index(geom, site)
    row = neighbor_table(geom)[s.linear]
    return int(np.sum(row < 0))


def inner_boundary_mask(geom: LatticeGeometry) -> np.ndarray:
    """Boolean mask over linear indices: some coordinate equals 1 or K."""
    if geom.is_periodic:
        raise NotApplicable("inner boundary is undefined for periodic lattices")
    table = neighbor_table(geom)
    return np.any(table < 0, axis=1)


def inner_boundary(geom: LatticeGeometry) -> list[SiteIndex]:
    """Inner-boundary sites of the Dirichlet cube, sorted by linear index."""
    mask = inner_boundary_mask(geom)
    return [SiteIndex(int(i), to_coords(geom, int(i))) for i in np.flatnonzero(mask)]


def coordinate_grid(geom: LatticeGeometry) -> np.ndarray:
    """(N, d) array of 1-based coordinates for all sites in linear order."""
    K, d = geom.side, geom.dim
    lin = np.arange(geom.n_sites, dtype=np.int64)
    cols = []
    stride = 1
    for _ in range(d):
        cols.append((lin // stride) % K + 1)
        stride *= K
    return np.stack(cols, axis=1)
