"""Agmon weights, effective wells, and the lattice path metric.

The metric charges an edge (n, m) the cost log(1 + sqrt(min(w_n, w_m))),
so travel inside flat (w = 0) regions is free. Distances to the well set
come from multi-source Dijkstra relaxation with deterministic heap ties;
a brute-force simple-path enumeration serves as the independent oracle on
instances with at most 64 sites.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyWells, TooLargeForOracle
from .landscape import LandscapeField
from .lattice import LatticeGeometry, neighbor_table, site_index

ORACLE_MAX_SITES = 64


@dataclass(frozen=True)
class AgmonField:
    """Weight w, well set with component labels, and distance-to-wells h."""

    mu: float
    delta: float
    w: np.ndarray
    wells: np.ndarray
    component_label: np.ndarray
    h: np.ndarray
    is_dual: bool

    def __post_init__(self):
        for name, dtype in (("w", np.float64), ("wells", np.int64),
                            ("component_label", np.int64), ("h", np.float64)):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=dtype))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _check_field(geom: LatticeGeometry, w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (geom.n_sites,):
        raise DimensionMismatch(
            f"field has {w.size} entries, lattice has {geom.n_sites} sites"
        )
    return w


def edge_cost(w_n: float, w_m: float) -> float:
    """Cost of one unit step between sites with weights w_n, w_m."""
    return math.log1p(math.sqrt(min(w_n, w_m)))


def weight_field(w_eff, mu: float) -> np.ndarray:
    """Positive part of the effective potential minus the energy."""
    return np.maximum(np.asarray(w_eff, dtype=np.float64) - mu, 0.0)


def wells(w_eff, mu: float, delta: float, geom: LatticeGeometry):
    """Threshold set {W_eff <= mu + delta} and its connected-component labels.

    Components are labeled 0, 1, ... ordered by their smallest linear index;
    label -1 marks sites outside the well set. Raises EmptyWells when the
    threshold set is empty.
    """
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    w_eff = _check_field(geom, w_eff)
    mask = w_eff <= mu + delta
    members = np.flatnonzero(mask)
    if members.size == 0:
        raise EmptyWells(f"no sites with effective potential <= {mu + delta:g}")
    table = neighbor_table(geom)
    labels = np.full(geom.n_sites, -1, dtype=np.int64)
    current = 0
    for start in members:
        if labels[start] != -1:
            continue
        labels[start] = current
        queue = deque([int(start)])
        while queue:
            n = queue.popleft()
            for m in table[n]:
                if m >= 0 and mask[m] and labels[m] == -1:
                    labels[m] = current
                    queue.append(int(m))
        current += 1
    return members, labels


def agmon_distance_field(w, well_sites, geom: LatticeGeometry) -> np.ndarray:
    """Shortest-path distance from every site to the well set; 0 on wells.

    Multi-source Dijkstra over nonnegative edge costs; ties resolved by
    smaller linear index so repeated runs are identical.
    """
    w = _check_field(geom, w)
    sources = np.asarray(well_sites, dtype=np.int64).ravel()
    if sources.size == 0:
        raise EmptyWells("well set is empty")
    table = neighbor_table(geom)
    dist = np.full(geom.n_sites, np.inf)
    heap = []
    for s in sorted(int(s) for s in sources):
        dist[s] = 0.0
        heap.append((0.0, s))
    heapq.heapify(heap)
    while heap:
        dn, n = heapq.heappop(heap)
        if dn > dist[n]:
            continue
        wn = w[n]
        for m in table[n]:
            if m < 0:
                continue
            nd = dn + math.log1p(math.sqrt(min(wn, w[m])))
            if nd < dist[m]:
                dist[m] = nd
                heapq.heappush(heap, (nd, int(m)))
    return dist


def agmon_metric(w, n, m, geom: LatticeGeometry) -> float:
    """Path metric rho(n, m): infimum of summed edge costs over unit-step paths."""
    w = _check_field(geom, w)
    src = site_index(geom, n).linear
    dst = site_index(geom, m).linear
    if src == dst:
        return 0.0
    dist = agmon_distance_field(w, np.array([src]), geom)
    return float(dist[dst])


def brute_force_metric(w, n, m, geom: LatticeGeometry) -> float:
    """Exhaustive minimum over simple paths; reference oracle for agmon_metric.

    The infimum over all paths is attained on a non-self-intersecting path,
    so enumerating simple paths is exact. Guarded to N <= 64 sites.
    """
    if geom.n_sites > ORACLE_MAX_SITES:
        raise TooLargeForOracle(
            f"{geom.n_sites} sites exceeds the oracle guard of {ORACLE_MAX_SITES}"
        )
    w = _check_field(geom, w)
    src = site_index(geom, n).linear
    dst = site_index(geom, m).linear
    if src == dst:
        return 0.0
    table = neighbor_table(geom)
    visited = np.zeros(geom.n_sites, dtype=bool)
    best = math.inf

    def dfs(site: int, acc: float):
        nonlocal best
        if acc >= best:
            return
        if site == dst:
            best = acc
            return
        visited[site] = True
        ws = w[site]
        for nxt in table[site]:
            if nxt >= 0 and not visited[nxt]:
                dfs(int(nxt), acc + math.log1p(math.sqrt(min(ws, w[nxt]))))
        visited[site] = False

    dfs(src, 0.0)
    return best


def agmon_field(
    landscape_field: LandscapeField,
    mu: float,
    delta: float,
    geom: LatticeGeometry,
) -> AgmonField:
    """Assemble the full Agmon field from a solved landscape at energy mu.

    Uses the stored effective potential of the landscape field, so weights,
    wells, and distances all derive from the exact same W values. For a
    dual pipeline pass the dual landscape and the mirrored energy.
    """
    w_eff = _check_field(geom, landscape_field.w_eff)
    w = weight_field(w_eff, mu)
    members, labels = wells(w_eff, mu, delta, geom)
    h = agmon_distance_field(w, members, geom)
    return AgmonField(
        mu=float(mu),
        delta=float(delta),
        w=w,
        wells=members,
        component_label=labels,
        h=h,
        is_dual=landscape_field.is_dual,
    )
