"""Advisory issuance: replay a drive against an indexed hotspot map.

Every ``sampling_distance_m`` meters of travel the engine looks up the nearest
hotspot and raises a vigilance advisory when that hotspot is closer than the
stopping distance and lies inside the forward field of view.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from typing import Sequence

from .drive_log import DriveLog, estimate_speed_kmh
from .errors import CoincidentPoints, FormatError, InvalidParams
from .geodesy import GeoPoint, haversine_distance, heading_angle, initial_bearing
from .hotspot_map import HotspotMap, filter_by_weight
from .spatial_index import NearestResult, SpatialIndex, build_index

# Path-distance comparisons tolerate this much rounding (1 micrometer), so
# fixes laid out exactly K meters apart are not skipped by float noise.
_PATH_TOL_M = 1e-6


@dataclass(frozen=True)
class AdvisoryParams:
    """Tunables of the advisory rule.

    reaction_time_s (t), friction (f), grade (G) and offset (b) feed the
    stopping distance; sampling_distance_m is K.
    """

    reaction_time_s: float = 1.5
    friction: float = 0.7
    grade: float = 0.0
    offset: float = 1.5
    sampling_distance_m: float = 2.0
    fov_half_angle_deg: float = 90.0
    min_weight: int = 1

    def __post_init__(self):
        if not self.reaction_time_s >= 0:
            raise InvalidParams(f"reaction time must be >= 0, got {self.reaction_time_s}")
        if not self.friction + self.grade > 0:
            raise InvalidParams(f"friction + grade must be > 0, got {self.friction + self.grade}")
        if not self.offset >= 1:
            raise InvalidParams(f"offset must be >= 1, got {self.offset}")
        if not self.sampling_distance_m > 0:
            raise InvalidParams(f"sampling distance must be > 0, got {self.sampling_distance_m}")
        if not 0 < self.fov_half_angle_deg <= 180:
            raise InvalidParams(f"FOV half-angle must be in (0, 180], got {self.fov_half_angle_deg}")
        if self.min_weight < 1:
            raise InvalidParams(f"min_weight must be >= 1, got {self.min_weight}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "AdvisoryParams":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass(frozen=True)
class AdvisorySample:
    t: float
    pos: GeoPoint
    speed_kmh: float
    stopping_distance_m: float
    nearest: NearestResult | None
    heading_angle_deg: float | None
    active: bool


@dataclass(frozen=True)
class AdvisoryEpisode:
    t_start: float
    t_end: float
    sample_count: int


def stopping_distance(v_kmh: float, p: AdvisoryParams) -> float:
    """s = b * (0.278 t v + v^2) / (254 (f + G)), v in km/h, s in meters.

    Both the reaction and braking terms sit over the friction denominator.
    """
    if v_kmh < 0:
        raise InvalidParams(f"negative speed {v_kmh}")
    denom = 254.0 * (p.friction + p.grade)
    if denom <= 0:
        raise InvalidParams("friction + grade must be > 0")
    return p.offset * ((0.278 * p.reaction_time_s * v_kmh) + v_kmh * v_kmh) / denom


def sample_points(log: DriveLog, k_m: float) -> list[tuple[float, GeoPoint, float | None]]:
    """Decision points every ``k_m`` meters of path, as (t, position, heading).

    The first fix always counts. Heading is the bearing from the previous fix,
    carried forward across stationary fixes, and None until the vehicle moves.
    """
    if not k_m > 0:
        raise InvalidParams(f"sampling distance must be > 0, got {k_m}")
    fixes = log.fixes
    out = [(fixes[0].t, fixes[0].pos, None)]
    heading = None
    travelled = 0.0
    for prev, cur in zip(fixes, fixes[1:]):
        travelled += haversine_distance(prev.pos, cur.pos)
        try:
            heading = initial_bearing(prev.pos, cur.pos)
        except CoincidentPoints:
            pass
        if travelled >= k_m - _PATH_TOL_M:
            out.append((cur.t, cur.pos, heading))
            travelled = 0.0
    return out


def evaluate_sample(
    t: float,
    pos: GeoPoint,
    heading: float | None,
    v_kmh: float,
    index: SpatialIndex,
    p: AdvisoryParams,
) -> AdvisorySample:
    s = stopping_distance(v_kmh, p)
    if len(index) == 0:
        return AdvisorySample(t, pos, v_kmh, s, None, None, False)
    near = index.query(pos)
    theta = None
    if heading is not None:
        try:
            theta = heading_angle(heading, initial_bearing(pos, index.map.nodes[near.node_index].pos))
        except CoincidentPoints:
            theta = None  # standing on the hotspot: direction is moot
    in_view = theta is None or theta < p.fov_half_angle_deg
    return AdvisorySample(t, pos, v_kmh, s, near, theta, near.distance_m < s and in_view)


def episodes_from_samples(samples: Sequence[AdvisorySample]) -> list[AdvisoryEpisode]:
    out = []
    run: list[AdvisorySample] = []
    for smp in list(samples) + [None]:
        if smp is not None and smp.active:
            run.append(smp)
            continue
        if run:
            out.append(AdvisoryEpisode(run[0].t, run[-1].t, len(run)))
            run = []
    return out


def replay(
    log: DriveLog,
    hotspots: HotspotMap,
    p: AdvisoryParams | None = None,
    index: SpatialIndex | None = None,
) -> tuple[list[AdvisorySample], list[AdvisoryEpisode]]:
    """Replay ``log`` against ``hotspots``.

    A prebuilt ``index`` may be passed to share one tree across replays; it
    must cover ``filter_by_weight(hotspots, p.min_weight)``.
    """
    p = p or AdvisoryParams()
    if index is None:
        index = build_index(filter_by_weight(hotspots, p.min_weight))
    samples = [
        evaluate_sample(t, pos, heading, estimate_speed_kmh(log, t), index, p)
        for t, pos, heading in sample_points(log, p.sampling_distance_m)
    ]
    return samples, episodes_from_samples(samples)


# -- advisory output file ------------------------------------------------------

def advisory_to_dict(
    clip_id: str,
    p: AdvisoryParams,
    samples: Sequence[AdvisorySample],
    episodes: Sequence[AdvisoryEpisode],
) -> dict:
    return {
        "clip_id": clip_id,
        "params": p.to_dict(),
        "samples": [
            {
                "t": s.t,
                "lat": s.pos.lat_deg,
                "lon": s.pos.lon_deg,
                "v_kmh": s.speed_kmh,
                "s_m": s.stopping_distance_m,
                "d_m": s.nearest.distance_m if s.nearest else None,
                "node": s.nearest.node_index if s.nearest else None,
                "theta_deg": s.heading_angle_deg,
                "active": s.active,
            }
            for s in samples
        ],
        "episodes": [
            {"t_start": e.t_start, "t_end": e.t_end, "sample_count": e.sample_count} for e in episodes
        ],
    }


def dump_advisory(doc: dict) -> str:
    return json.dumps(doc, indent=1) + "\n"


def load_advisory(data: bytes | str) -> dict:
    """Parse and sanity-check an advisory output document."""
    try:
        doc = json.loads(data)
        if not isinstance(doc, dict):
            raise TypeError("top level must be an object")
        str(doc["clip_id"])
        for ep in doc["episodes"]:
            if float(ep["t_start"]) > float(ep["t_end"]):
                raise ValueError("episode t_start after t_end")
        doc.setdefault("samples", [])
        doc.setdefault("params", {})
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"corrupt advisory file: {exc}") from None
    return doc


def episodes_from_doc(doc: dict) -> list[AdvisoryEpisode]:
    return [
        AdvisoryEpisode(float(e["t_start"]), float(e["t_end"]), int(e.get("sample_count", 0)))
        for e in doc["episodes"]
    ]
