"""Exact nearest-hotspot search: a haversine ball tree and a brute-force twin.

The tree is built with numpy; queries walk it with the scalar
:func:`~hotspot_advisor.geodesy.haversine_m` kernel, the same function the
brute-force scan uses to settle its final answer. Both paths therefore return
the identical (index, distance) pair, with exact distance ties going to the
lowest node index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoNodes, ValidationError
from .geodesy import EARTH_RADIUS_M, GeoPoint, haversine_m
from .hotspot_map import HotspotMap

DEFAULT_LEAF_CAPACITY = 16

# Covering radii are padded and pruning is loosened by these amounts so that
# rounding differences between the numpy build and scalar queries can never
# cause a true nearest neighbour to be skipped.
_RADIUS_PAD_M = 1e-6
_PRUNE_SLACK_M = 1e-6


@dataclass(frozen=True, slots=True)
class NearestResult:
    node_index: int
    distance_m: float


def _haversine_np(lat, lon, qlat, qlon):
    phi1 = np.radians(lat)
    phi2 = math.radians(qlat)
    s_dphi = np.sin((phi2 - phi1) * 0.5)
    s_dlam = np.sin(np.radians(qlon - lon) * 0.5)
    h = s_dphi * s_dphi + np.cos(phi1) * math.cos(phi2) * s_dlam * s_dlam
    h = np.minimum(h, 1.0)
    return 2.0 * EARTH_RADIUS_M * np.arctan2(np.sqrt(h), np.sqrt(1.0 - h))


def _spherical_centroid(lat, lon) -> tuple[float, float]:
    phi = np.radians(lat)
    lam = np.radians(lon)
    x = float(np.mean(np.cos(phi) * np.cos(lam)))
    y = float(np.mean(np.cos(phi) * np.sin(lam)))
    z = float(np.mean(np.sin(phi)))
    norm = math.sqrt(x * x + y * y + z * z)
    if norm < 1e-12:
        return float(lat[0]), float(lon[0])
    clat = math.degrees(math.asin(max(-1.0, min(1.0, z / norm))))
    return clat, math.degrees(math.atan2(y, x))


class SpatialIndex:
    """Ball tree over the nodes of a :class:`HotspotMap`.

    Tree nodes live in flat lists: ``start``/``end`` delimit a slice of the
    permutation ``order``; ``left``/``right`` are child ids (-1 at leaves).
    """

    def __init__(self, hotspots: HotspotMap, leaf_capacity: int = DEFAULT_LEAF_CAPACITY):
        if leaf_capacity < 1:
            raise ValidationError(f"leaf capacity must be >= 1, got {leaf_capacity}")
        self.map = hotspots
        self.leaf_capacity = leaf_capacity
        self.lat = [n.pos.lat_deg for n in hotspots.nodes]
        self.lon = [n.pos.lon_deg for n in hotspots.nodes]
        self.order: list[int] = []
        self.start: list[int] = []
        self.end: list[int] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.center_lat: list[float] = []
        self.center_lon: list[float] = []
        self.radius: list[float] = []
        if self.lat:
            self._build()

    def __len__(self):
        return len(self.lat)

    def _new_node(self, lat, lon, start, end) -> int:
        idx = self.order_np[start:end]
        clat, clon = _spherical_centroid(lat[idx], lon[idx])
        r = float(np.max(_haversine_np(lat[idx], lon[idx], clat, clon)))
        self.start.append(start)
        self.end.append(end)
        self.left.append(-1)
        self.right.append(-1)
        self.center_lat.append(clat)
        self.center_lon.append(clon)
        self.radius.append(r * (1.0 + 1e-12) + _RADIUS_PAD_M)
        return len(self.start) - 1

    def _build(self) -> None:
        lat = np.asarray(self.lat, dtype=float)
        lon = np.asarray(self.lon, dtype=float)
        self.order_np = np.arange(len(lat))
        stack = [self._new_node(lat, lon, 0, len(lat))]
        while stack:
            node = stack.pop()
            s, e = self.start[node], self.end[node]
            if e - s <= self.leaf_capacity:
                continue
            idx = self.order_np[s:e]
            # farthest-pair heuristic: first point -> farthest A -> farthest B from A
            d0 = _haversine_np(lat[idx], lon[idx], lat[idx[0]], lon[idx[0]])
            a = idx[int(np.argmax(d0))]
            da = _haversine_np(lat[idx], lon[idx], lat[a], lon[a])
            b = idx[int(np.argmax(da))]
            if da.max() <= 0.0:
                # all points coincide; split by position to respect leaf capacity
                mid = s + (e - s) // 2
            else:
                db = _haversine_np(lat[idx], lon[idx], lat[b], lon[b])
                to_a = da <= db
                self.order_np[s:e] = np.concatenate([idx[to_a], idx[~to_a]])
                mid = s + int(np.count_nonzero(to_a))
            lchild = self._new_node(lat, lon, s, mid)
            rchild = self._new_node(lat, lon, mid, e)
            self.left[node] = lchild
            self.right[node] = rchild
            stack.append(lchild)
            stack.append(rchild)
        self.order = self.order_np.tolist()
        del self.order_np

    def query_counted(self, query: GeoPoint) -> tuple[NearestResult, int]:
        """Nearest node plus the number of distance evaluations spent finding it."""
        if not self.lat:
            raise NoNodes("index is empty")
        qlat, qlon = query.lat_deg, query.lon_deg
        lat, lon, order = self.lat, self.lon, self.order
        best_i, best_d = -1, math.inf
        evals = 1
        d_root = haversine_m(qlat, qlon, self.center_lat[0], self.center_lon[0])
        stack = [(max(0.0, d_root - self.radius[0]), 0)]
        while stack:
            bound, node = stack.pop()
            if bound > best_d + _PRUNE_SLACK_M:
                continue
            left = self.left[node]
            if left < 0:
                for i in order[self.start[node]:self.end[node]]:
                    d = haversine_m(qlat, qlon, lat[i], lon[i])
                    if d < best_d or (d == best_d and i < best_i):
                        best_i, best_d = i, d
                evals += self.end[node] - self.start[node]
                continue
            right = self.right[node]
            dl = haversine_m(qlat, qlon, self.center_lat[left], self.center_lon[left])
            dr = haversine_m(qlat, qlon, self.center_lat[right], self.center_lon[right])
            evals += 2
            bl = max(0.0, dl - self.radius[left])
            br = max(0.0, dr - self.radius[right])
            # push the farther child first so the nearer one is searched first
            if dl <= dr:
                stack.append((br, right))
                stack.append((bl, left))
            else:
                stack.append((bl, left))
                stack.append((br, right))
        return NearestResult(best_i, best_d), evals

    def query(self, query: GeoPoint) -> NearestResult:
        return self.query_counted(query)[0]

    def leaves(self) -> list[int]:
        return [n for n in range(len(self.start)) if self.left[n] < 0]

    def members(self, node: int) -> list[int]:
        return self.order[self.start[node]:self.end[node]]


def build_index(hotspots: HotspotMap, leaf_capacity: int = DEFAULT_LEAF_CAPACITY) -> SpatialIndex:
    return SpatialIndex(hotspots, leaf_capacity)


def nearest(index: SpatialIndex, query: GeoPoint) -> NearestResult:
    return index.query(query)


def brute_force_nearest(hotspots: HotspotMap, query: GeoPoint) -> NearestResult:
    """Linear scan. A vectorised pass shortlists candidates, then the scalar
    kernel picks the minimum, lowest index first on ties."""
    if not hotspots.nodes:
        raise NoNodes("map is empty")
    lat = np.fromiter((n.pos.lat_deg for n in hotspots.nodes), float, len(hotspots.nodes))
    lon = np.fromiter((n.pos.lon_deg for n in hotspots.nodes), float, len(hotspots.nodes))
    d = _haversine_np(lat, lon, query.lat_deg, query.lon_deg)
    cutoff = float(d.min()) * (1.0 + 1e-9) + 1e-6
    best_i, best_d = -1, math.inf
    for i in np.flatnonzero(d <= cutoff).tolist():
        di = haversine_m(query.lat_deg, query.lon_deg, lat[i], lon[i])
        if di < best_d:
            best_i, best_d = i, di
    return NearestResult(best_i, best_d)
