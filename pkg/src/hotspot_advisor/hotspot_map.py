"""Hotspot maps: clustered ego-vehicle positions at which pedestrians were seen.

Note that nodes hold where the *vehicle* was when pedestrians were in view, not
where the pedestrians stood. Advisories later fire when a vehicle approaches
such a position again.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

from .drive_log import AssociationInterval, DriveLog, split_intervals
from .errors import FormatError, RadiusMismatch, ValidationError
from .geodesy import GeoPoint, haversine_m

DEFAULT_CLUSTER_RADIUS_M = 5.0

Sample = tuple[GeoPoint, int]


@dataclass(frozen=True, slots=True)
class HotspotNode:
    pos: GeoPoint
    weight: int
    samples: int = 1

    def __post_init__(self):
        if self.weight < 1 or self.samples < 1:
            raise ValidationError(f"node weight/samples must be >= 1, got {self.weight}/{self.samples}")


def _node_key(n: HotspotNode):
    return (n.pos.lat_deg, n.pos.lon_deg, n.weight, n.samples)


@dataclass(frozen=True)
class HotspotMap:
    """Immutable hotspot map. Nodes are kept in canonical (lat, lon) order,
    so node indices are stable for a given set of nodes."""

    nodes: tuple[HotspotNode, ...]
    cluster_radius_m: float = DEFAULT_CLUSTER_RADIUS_M
    source_clips: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.cluster_radius_m > 0:
            raise ValidationError(f"cluster radius must be positive, got {self.cluster_radius_m}")
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes, key=_node_key)))
        object.__setattr__(self, "source_clips", frozenset(self.source_clips))

    def __len__(self):
        return len(self.nodes)

    @property
    def total_weight(self) -> int:
        return sum(n.weight for n in self.nodes)


def associate(intervals: Iterable[AssociationInterval]) -> list[Sample]:
    """Median ego position for every interval that has fixes and pedestrians.

    Latitude and longitude medians are taken independently; an even number of
    fixes gives the mean of the two middle values.
    """
    out = []
    for iv in intervals:
        if iv.empty or iv.ped_count < 1:
            continue
        lat = statistics.median(f.pos.lat_deg for f in iv.fixes_in_interval)
        lon = statistics.median(f.pos.lon_deg for f in iv.fixes_in_interval)
        out.append((GeoPoint(lat, lon), iv.ped_count))
    return out


class _Clusterer:
    """Greedy incremental epsilon-clustering with weighted-centroid update."""

    def __init__(self, epsilon_m: float):
        if not epsilon_m > 0:
            raise ValidationError(f"epsilon must be positive, got {epsilon_m}")
        self.epsilon_m = epsilon_m
        self.lat: list[float] = []
        self.lon: list[float] = []
        self.weight: list[int] = []
        self.samples: list[int] = []

    def add(self, pos: GeoPoint, weight: int, samples: int = 1) -> None:
        best = -1
        best_d = math.inf
        for i in range(len(self.lat)):
            d = haversine_m(pos.lat_deg, pos.lon_deg, self.lat[i], self.lon[i])
            if d < best_d:  # strict: exact ties keep the lowest index
                best, best_d = i, d
        if best >= 0 and best_d <= self.epsilon_m:
            # incremental weighted mean; exact when the sample sits on the node
            w = self.weight[best] + weight
            self.lat[best] += (pos.lat_deg - self.lat[best]) * weight / w
            self.lon[best] += (pos.lon_deg - self.lon[best]) * weight / w
            self.weight[best] = w
            self.samples[best] += samples
        else:
            self.lat.append(pos.lat_deg)
            self.lon.append(pos.lon_deg)
            self.weight.append(weight)
            self.samples.append(samples)

    def nodes(self) -> list[HotspotNode]:
        return [
            HotspotNode(GeoPoint(la, lo), w, s)
            for la, lo, w, s in zip(self.lat, self.lon, self.weight, self.samples)
        ]


def cluster(
    samples: Iterable[Sample],
    epsilon_m: float = DEFAULT_CLUSTER_RADIUS_M,
    source_clips: Iterable[str] = (),
) -> HotspotMap:
    """Fold samples, in order, into nodes.

    A sample within ``epsilon_m`` of an existing node joins the nearest such
    node (lowest index on exact ties); otherwise it starts a new node.
    """
    c = _Clusterer(epsilon_m)
    for pos, count in samples:
        if count < 1:
            raise ValidationError(f"sample count must be >= 1, got {count}")
        c.add(pos, count)
    return HotspotMap(tuple(c.nodes()), epsilon_m, frozenset(source_clips))


def build_map(logs: Sequence[DriveLog], epsilon_m: float = DEFAULT_CLUSTER_RADIUS_M) -> HotspotMap:
    ordered = sorted(logs, key=lambda log: log.clip_id)
    samples: list[Sample] = []
    for log in ordered:
        samples.extend(associate(split_intervals(log)))
    return cluster(samples, epsilon_m, (log.clip_id for log in ordered))


def merge_maps(a: HotspotMap, b: HotspotMap) -> HotspotMap:
    """Combine two maps built with the same radius by re-clustering their nodes."""
    if a.cluster_radius_m != b.cluster_radius_m:
        raise RadiusMismatch(f"cluster radii differ: {a.cluster_radius_m} vs {b.cluster_radius_m}")
    clips = a.source_clips | b.source_clips
    if not b.nodes or not a.nodes:
        return HotspotMap((a.nodes or b.nodes), a.cluster_radius_m, clips)
    c = _Clusterer(a.cluster_radius_m)
    for n in sorted(a.nodes + b.nodes, key=_node_key):
        c.add(n.pos, n.weight, n.samples)
    return HotspotMap(tuple(c.nodes()), a.cluster_radius_m, clips)


def filter_by_weight(m: HotspotMap, min_weight: int) -> HotspotMap:
    if min_weight < 1:
        raise ValidationError(f"min_weight must be >= 1, got {min_weight}")
    if min_weight == 1:
        return m
    kept = tuple(n for n in m.nodes if n.weight >= min_weight)
    return HotspotMap(kept, m.cluster_radius_m, m.source_clips)


# -- persistence ---------------------------------------------------------------

def map_to_dict(m: HotspotMap) -> dict:
    return {
        "cluster_radius_m": m.cluster_radius_m,
        "source_clips": sorted(m.source_clips),
        "nodes": [
            {"lat": n.pos.lat_deg, "lon": n.pos.lon_deg, "weight": n.weight, "samples": n.samples}
            for n in m.nodes
        ],
    }


def save_map(m: HotspotMap) -> bytes:
    return (json.dumps(map_to_dict(m), indent=1) + "\n").encode("utf-8")


def load_map(data: bytes | str) -> HotspotMap:
    try:
        obj = json.loads(data)
        radius = obj["cluster_radius_m"]
        clips = obj.get("source_clips", [])
        raw_nodes = obj["nodes"]
        if not isinstance(raw_nodes, list) or not isinstance(clips, list):
            raise TypeError("nodes and source_clips must be lists")
        nodes = []
        for rec in raw_nodes:
            weight, samples = rec["weight"], rec["samples"]
            if not (isinstance(weight, int) and isinstance(samples, int)):
                raise TypeError("weight and samples must be integers")
            nodes.append(HotspotNode(GeoPoint(float(rec["lat"]), float(rec["lon"])), weight, samples))
        return HotspotMap(tuple(nodes), float(radius), frozenset(str(c) for c in clips))
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"corrupt map file: {exc}") from None


def weight_band(weight: int) -> tuple[str, str]:
    """(band name, marker colour) used when rendering nodes."""
    if weight >= 10:
        return "high", "#d7191c"
    if weight >= 3:
        return "medium", "#fdae61"
    return "low", "#1a9641"


def map_geojson_features(m: HotspotMap) -> list[dict]:
    feats = []
    for i, n in enumerate(m.nodes):
        band, colour = weight_band(n.weight)
        feats.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [n.pos.lon_deg, n.pos.lat_deg]},
            "properties": {
                "kind": "hotspot",
                "index": i,
                "weight": n.weight,
                "samples": n.samples,
                "band": band,
                "marker-color": colour,
            },
        })
    return feats
