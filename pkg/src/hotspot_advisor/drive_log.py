"""Drive logs: GPS fixes plus per-frame pedestrian counts.

Two on-disk encodings are accepted, JSONL and CSV::

    {"type":"fix","t":1.2,"lat":32.87,"lon":-117.25,"speed_kmh":31.5}
    {"type":"det","t":1.233,"count":2}

    type,t,lat,lon,speed_kmh,count
    fix,1.2,32.87,-117.25,31.5,
    det,1.233,,,,2
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import OutOfRange, ParseError, ValidationError
from .geodesy import GeoPoint, haversine_distance

MAX_FIX_GAP_S = 5.0
CSV_COLUMNS = ("type", "t", "lat", "lon", "speed_kmh", "count")


@dataclass(frozen=True, slots=True)
class GpsFix:
    t: float
    pos: GeoPoint
    speed_kmh: float | None = None


@dataclass(frozen=True, slots=True)
class DetectionFrame:
    t: float
    ped_count: int


@dataclass(frozen=True)
class DriveLog:
    clip_id: str
    fixes: tuple[GpsFix, ...]
    detections: tuple[DetectionFrame, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "fixes", tuple(sorted(self.fixes, key=lambda f: f.t)))
        object.__setattr__(self, "detections", tuple(sorted(self.detections, key=lambda d: d.t)))
        validate(self)


@dataclass(frozen=True)
class AssociationInterval:
    k: int
    fixes_in_interval: tuple[GpsFix, ...]
    ped_count: int = 0

    @property
    def empty(self) -> bool:
        return not self.fixes_in_interval


def validate(log: DriveLog) -> None:
    if not log.fixes:
        raise ValidationError(f"{log.clip_id}: drive log has no GPS fixes")
    prev = None
    for fix in log.fixes:
        if not math.isfinite(fix.t) or fix.t < 0:
            raise ValidationError(f"{log.clip_id}: bad fix time {fix.t!r}")
        if fix.speed_kmh is not None and not (fix.speed_kmh >= 0):
            raise ValidationError(f"{log.clip_id}: negative speed at t={fix.t}")
        if prev is not None:
            if fix.t <= prev.t:
                raise ValidationError(f"{log.clip_id}: fix times not strictly increasing at t={fix.t}")
            if fix.t - prev.t > MAX_FIX_GAP_S:
                raise ValidationError(
                    f"{log.clip_id}: {fix.t - prev.t:.3f} s gap between fixes at t={prev.t}"
                )
        prev = fix
    prev_t = None
    for det in log.detections:
        if not math.isfinite(det.t) or det.t < 0:
            raise ValidationError(f"{log.clip_id}: bad detection time {det.t!r}")
        if det.ped_count < 0:
            raise ValidationError(f"{log.clip_id}: negative pedestrian count at t={det.t}")
        if prev_t is not None and det.t <= prev_t:
            raise ValidationError(f"{log.clip_id}: detection times not strictly increasing at t={det.t}")
        prev_t = det.t


# -- parsing -----------------------------------------------------------------

def _num(value, line: int, name: str, required: bool = True) -> float | None:
    if value is None or value == "":
        if required:
            raise ParseError(line, f"missing field {name!r}")
        return None
    if isinstance(value, bool):
        raise ParseError(line, f"field {name!r} is not a number")
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ParseError(line, f"field {name!r} is not a number: {value!r}") from None
    if not math.isfinite(x):
        raise ParseError(line, f"field {name!r} is not finite")
    return x


def _count(value, line: int) -> int:
    x = _num(value, line, "count")
    if x != int(x):
        raise ParseError(line, f"count must be an integer, got {value!r}")
    return int(x)


def _record(rec: dict, line: int, fixes: list, dets: list) -> None:
    kind = rec.get("type")
    if kind == "fix":
        t = _num(rec.get("t"), line, "t")
        lat = _num(rec.get("lat"), line, "lat")
        lon = _num(rec.get("lon"), line, "lon")
        speed = _num(rec.get("speed_kmh"), line, "speed_kmh", required=False)
        fixes.append(GpsFix(t, GeoPoint(lat, lon), speed))
    elif kind == "det":
        dets.append(DetectionFrame(_num(rec.get("t"), line, "t"), _count(rec.get("count"), line)))
    else:
        raise ParseError(line, f"unknown record type {kind!r}")


def parse_drive_log(content: bytes | str, fmt: str, clip_id: str = "clip") -> DriveLog:
    """Parse drive-log file content in ``fmt`` ("jsonl" or "csv")."""
    text = content.decode("utf-8") if isinstance(content, bytes) else content
    fixes: list[GpsFix] = []
    dets: list[DetectionFrame] = []
    if fmt == "jsonl":
        for lineno, raw in enumerate(text.splitlines(), start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(lineno, f"invalid JSON: {exc.msg}") from None
            if not isinstance(rec, dict):
                raise ParseError(lineno, "record is not a JSON object")
            _record(rec, lineno, fixes, dets)
    elif fmt == "csv":
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None:
            raise ParseError(1, "missing CSV header")
        missing = [c for c in ("type", "t") if c not in reader.fieldnames]
        if missing:
            raise ParseError(1, f"CSV header lacks columns {missing}")
        for rec in reader:
            if None in rec:
                raise ParseError(reader.line_num, "too many fields")
            _record(rec, reader.line_num, fixes, dets)
    else:
        raise ValueError(f"unknown drive-log format {fmt!r}")
    return DriveLog(clip_id, tuple(fixes), tuple(dets))


def format_for_path(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".jsonl", ".json", ".ndjson"):
        return "jsonl"
    if suffix == ".csv":
        return "csv"
    raise ValueError(f"cannot infer drive-log format from {path}")


def load_drive_log(path: str | Path) -> DriveLog:
    path = Path(path)
    return parse_drive_log(path.read_bytes(), format_for_path(path), clip_id=path.stem)


def _records(log: DriveLog) -> list[dict]:
    rows = []
    for f in log.fixes:
        rec = {"type": "fix", "t": f.t, "lat": f.pos.lat_deg, "lon": f.pos.lon_deg}
        if f.speed_kmh is not None:
            rec["speed_kmh"] = f.speed_kmh
        rows.append(rec)
    rows.extend({"type": "det", "t": d.t, "count": d.ped_count} for d in log.detections)
    return rows


def dump_drive_log(log: DriveLog, fmt: str) -> str:
    """Serialize to text; ``parse_drive_log`` of the result reproduces ``log``."""
    if fmt == "jsonl":
        return "".join(json.dumps(r) + "\n" for r in _records(log))
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for r in _records(log):
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
        return buf.getvalue()
    raise ValueError(f"unknown drive-log format {fmt!r}")


# -- association intervals ------------------------------------------------------

def split_intervals(log: DriveLog) -> list[AssociationInterval]:
    """Split a log into half-open 1 s intervals [k, k+1) anchored at t = 0.

    Each interval's pedestrian count is the maximum per-frame count inside it,
    so a pedestrian visible for 30 frames is counted once. Intervals without
    fixes are still emitted (``empty`` is True).
    """
    last_t = max(log.fixes[-1].t, log.detections[-1].t if log.detections else 0.0)
    n = int(math.floor(last_t)) + 1
    buckets: list[list[GpsFix]] = [[] for _ in range(n)]
    counts = [0] * n
    for fix in log.fixes:
        buckets[int(math.floor(fix.t))].append(fix)
    for det in log.detections:
        k = int(math.floor(det.t))
        counts[k] = max(counts[k], det.ped_count)
    return [AssociationInterval(k, tuple(buckets[k]), counts[k]) for k in range(n)]


def estimate_speed_kmh(log: DriveLog, t: float) -> float:
    """Vehicle speed at time ``t``.

    Uses the recorded speed of the fix at or before ``t`` when present,
    otherwise the haversine displacement over the bracketing fix pair.
    """
    fixes = log.fixes
    if not fixes[0].t <= t <= fixes[-1].t:
        raise OutOfRange(f"t={t} outside [{fixes[0].t}, {fixes[-1].t}]")
    times = [f.t for f in fixes]
    i = bisect.bisect_right(times, t) - 1
    if fixes[i].speed_kmh is not None:
        return max(0.0, fixes[i].speed_kmh)
    if len(fixes) < 2:
        return 0.0
    if i == len(fixes) - 1:
        i -= 1
    a, b = fixes[i], fixes[i + 1]
    return max(0.0, haversine_distance(a.pos, b.pos) / (b.t - a.t) * 3.6)
