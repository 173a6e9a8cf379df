"""Deterministic synthetic drives with ground truth.

Three route kinds:

* ``straight-pass``: a straight road driven twice for training (repeat
  visits). Ground truth is labelled ``nighttime`` because darkness defeats
  the detector, not the geometry.
* ``occlusion``: a straight road driven once in each direction. Every
  hotspot is seen by exactly one of the two passes, so only the merged map
  covers them all.
* ``blind-turn``: a straight leg, a 90 degree right-hand arc of 8 m radius,
  and a second leg. The first pedestrian sits just past the turn exit.

Test drives always carry zero detections: the map alone has to trigger the
advisory. A ground-truth window opens when the remaining path distance to a
hotspot drops below the stopping distance and closes when the vehicle
reaches it.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .advisory import AdvisoryParams, stopping_distance
from .drive_log import DetectionFrame, DriveLog, GpsFix, dump_drive_log
from .errors import ValidationError
from .evaluation import GroundTruthWindow, ground_truth_to_dict
from .geodesy import GeoPoint, offset_m

KINDS = ("straight-pass", "blind-turn", "occlusion")
LABELS = {"straight-pass": "nighttime", "blind-turn": "blind-turn", "occlusion": "occlusion"}
DEFAULT_PED_SECONDS = {"straight-pass": (6, 14), "blind-turn": (8, 16), "occlusion": (6, 14)}
DEFAULT_ORIGIN = GeoPoint(32.8700, -117.2500)
TURN_RADIUS_M = 8.0
# gap between the turn exit and the start of the first pedestrian second
TURN_EXIT_GAP_M = 0.5


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str = "straight-pass"
    seed: int = 0
    origin: GeoPoint = DEFAULT_ORIGIN
    speed_kmh: float = 30.0
    gps_hz: int = 10
    ped_seconds: tuple[int, ...] | None = None
    noise_m: float = 0.0
    duration_s: int = 20
    heading_deg: float = 0.0
    det_fps: int = 30
    # ground truth marks the physically required window, without safety offset
    gt_params: AdvisoryParams = field(default_factory=lambda: AdvisoryParams(offset=1.0))

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        if self.gps_hz < 1 or self.det_fps < 1:
            raise ValidationError("gps_hz and det_fps must be >= 1")
        if not self.speed_kmh > 0:
            raise ValidationError(f"speed must be positive, got {self.speed_kmh}")
        if not self.noise_m >= 0:
            raise ValidationError(f"noise must be >= 0, got {self.noise_m}")
        if self.ped_seconds is None:
            object.__setattr__(self, "ped_seconds", DEFAULT_PED_SECONDS[self.kind])
        secs = tuple(sorted(set(int(k) for k in self.ped_seconds)))
        if not secs or secs[0] < 1 or secs[-1] > self.duration_s - 2:
            raise ValidationError(f"ped_seconds must lie in [1, {self.duration_s - 2}], got {secs}")
        object.__setattr__(self, "ped_seconds", secs)


@dataclass(frozen=True)
class Scenario:
    spec: ScenarioSpec
    train_logs: tuple[DriveLog, ...]
    test_log: DriveLog
    ground_truth: tuple[GroundTruthWindow, ...]
    hotspots: tuple[GeoPoint, ...]


class _Route:
    """Arc-length parameterised route in local north/east meters."""

    def __init__(self, heading_deg: float, turn_at: float | None):
        self.h = math.radians(heading_deg)
        self.turn_at = turn_at

    def _local(self, s: float) -> tuple[float, float]:
        # route frame: x forward along the first leg, y to the right
        if self.turn_at is None or s <= self.turn_at:
            return s, 0.0
        r = TURN_RADIUS_M
        u = s - self.turn_at
        arc = r * math.pi / 2
        if u <= arc:
            phi = u / r
            return self.turn_at + r * math.sin(phi), r - r * math.cos(phi)
        return self.turn_at + r, r + (u - arc)

    def north_east(self, s: float) -> tuple[float, float]:
        x, y = self._local(s)
        c, sn = math.cos(self.h), math.sin(self.h)
        return x * c - y * sn, x * sn + y * c


def _median_offset(hz: int) -> float:
    """Median fix time inside a 1 s interval sampled at ``hz``."""
    return statistics.median(j / hz for j in range(hz))


def _drive(clip_id, route, origin, s0, direction, v_ms, speed_kmh, hz, n_seconds, rng, noise_m,
           detections=()) -> DriveLog:
    fixes = []
    for j in range(n_seconds * hz):
        t = j / hz
        n, e = route.north_east(s0 + direction * v_ms * t)
        if noise_m > 0:
            dn, de = rng.normal(0.0, noise_m, 2)
            n, e = n + dn, e + de
        fixes.append(GpsFix(t, offset_m(origin, n, e), speed_kmh))
    return DriveLog(clip_id, tuple(fixes), tuple(detections))


def _detections(n_seconds: int, fps: int, counts: dict[int, int]) -> list[DetectionFrame]:
    return [
        DetectionFrame(f / fps, counts.get(int(math.floor(f / fps)), 0))
        for f in range(n_seconds * fps)
    ]


def generate(spec: ScenarioSpec) -> Scenario:
    rng = np.random.default_rng(spec.seed)
    v_ms = spec.speed_kmh / 3.6
    m = _median_offset(spec.gps_hz)
    secs = spec.ped_seconds
    hot_offsets = [v_ms * (k + m) for k in secs]

    turn_at = None
    if spec.kind == "blind-turn":
        turn_at = hot_offsets[0] - (m * v_ms + TURN_EXIT_GAP_M) - TURN_RADIUS_M * math.pi / 2
        if turn_at < 0:
            raise ValidationError("first pedestrian second too early to fit the turn before it")
    route = _Route(spec.heading_deg, turn_at)
    counts = {k: int(rng.integers(1, 4)) for k in secs}
    tag = f"{spec.kind}-s{spec.seed}"

    # hotspot = component-wise median of the noise-free forward-pass fixes
    hotspots = []
    for k in secs:
        pts = [offset_m(spec.origin, *route.north_east(v_ms * (k + j / spec.gps_hz))) for j in range(spec.gps_hz)]
        hotspots.append(GeoPoint(statistics.median(p.lat_deg for p in pts),
                                 statistics.median(p.lon_deg for p in pts)))

    n_sec = spec.duration_s
    train = []
    if spec.kind == "occlusion":
        fwd = {k: counts[k] for i, k in enumerate(secs) if i % 2 == 1}
        train.append(_drive(f"{tag}-train0", route, spec.origin, 0.0, +1, v_ms, spec.speed_kmh,
                            spec.gps_hz, n_sec, rng, spec.noise_m,
                            _detections(n_sec, spec.det_fps, fwd)))
        # reverse pass timed so each hotspot again sits at the median of a second
        n0 = math.ceil(n_sec - secs[0] - 2 * m)
        rev_start = v_ms * (n0 + secs[0] + 2 * m)
        rev_secs = {n0 + secs[0] - k: counts[k] for i, k in enumerate(secs) if i % 2 == 0}
        rev_len = n_sec + 2
        train.append(_drive(f"{tag}-train1", route, spec.origin, rev_start, -1, v_ms, spec.speed_kmh,
                            spec.gps_hz, rev_len, rng, spec.noise_m,
                            _detections(rev_len, spec.det_fps, rev_secs)))
    else:
        for i in range(2):
            train.append(_drive(f"{tag}-train{i}", route, spec.origin, 0.0, +1, v_ms, spec.speed_kmh,
                                spec.gps_hz, n_sec, rng, spec.noise_m,
                                _detections(n_sec, spec.det_fps, counts)))

    phase = float(rng.uniform(0.0, v_ms))
    test_len = n_sec + 1
    test = _drive(f"{tag}-test", route, spec.origin, -phase, +1, v_ms, spec.speed_kmh,
                  spec.gps_hz, test_len, rng, spec.noise_m)

    s_gt = stopping_distance(spec.speed_kmh, spec.gt_params)
    last_t = test.fixes[-1].t
    windows = []
    for h in hot_offsets:
        t0 = max(0.0, (h - s_gt + phase) / v_ms)
        t1 = min(last_t, (h + phase) / v_ms)
        if t0 < t1:
            windows.append(GroundTruthWindow(t0, t1, LABELS[spec.kind]))
    return Scenario(spec, tuple(train), test, tuple(windows), tuple(hotspots))


def trend_suite(seeds: Sequence[int] = tuple(range(20)), noise_m: float = 1.0,
                speed_range: tuple[float, float] = (15.0, 35.0)) -> list[ScenarioSpec]:
    """Fixed multi-seed suite cycling the three kinds, speed drawn per seed."""
    specs = []
    for i, seed in enumerate(seeds):
        rng = np.random.default_rng(10_000 + seed)
        speed = round(float(rng.uniform(*speed_range)), 3)
        specs.append(ScenarioSpec(kind=KINDS[i % len(KINDS)], seed=seed, speed_kmh=speed, noise_m=noise_m))
    return specs


def write_scenario(sc: Scenario, out_dir: str | Path) -> dict[str, list[Path]]:
    """Write train/test logs (JSONL) and ``ground_truth.json`` under ``out_dir``."""
    out = Path(out_dir)
    (out / "train").mkdir(parents=True, exist_ok=True)
    (out / "test").mkdir(parents=True, exist_ok=True)
    written: dict[str, list[Path]] = {"train": [], "test": [], "ground_truth": []}
    for log in sc.train_logs:
        p = out / "train" / f"{log.clip_id}.jsonl"
        p.write_text(dump_drive_log(log, "jsonl"), encoding="utf-8")
        written["train"].append(p)
    p = out / "test" / f"{sc.test_log.clip_id}.jsonl"
    p.write_text(dump_drive_log(sc.test_log, "jsonl"), encoding="utf-8")
    written["test"].append(p)
    p = out / "ground_truth.json"
    doc = ground_truth_to_dict(sc.test_log.clip_id, sc.ground_truth)
    p.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    written["ground_truth"].append(p)
    return written
