"""Scoring advisory episodes against ground-truth windows.

Correct and false advisories are counted per episode; missed advisories are
counted per ground-truth window. Any closed-interval overlap is a match.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from .advisory import AdvisoryEpisode, episodes_from_doc
from .drive_log import DriveLog, split_intervals
from .errors import ClipMismatch, FormatError, ValidationError


@dataclass(frozen=True)
class GroundTruthWindow:
    t_start: float
    t_end: float
    label: str = ""

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValidationError(f"window needs t_start < t_end, got [{self.t_start}, {self.t_end}]")


@dataclass(frozen=True)
class EvalReport:
    clip_id: str
    sampling_distance_m: float | None
    correct: int
    false_advisories: int
    missed: int
    covered_windows: int
    precision: float
    recall: float
    duration_s: float = 0.0
    scenario: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _overlaps(a0: float, a1: float, b0: float, b1: float) -> bool:
    return a0 <= b1 and b0 <= a1


def match_episodes(
    episodes: Sequence[AdvisoryEpisode], windows: Sequence[GroundTruthWindow]
) -> tuple[int, int, int, int]:
    """Return (correct, false_advisories, missed, covered_windows)."""
    correct = sum(
        1 for e in episodes if any(_overlaps(e.t_start, e.t_end, w.t_start, w.t_end) for w in windows)
    )
    covered = sum(
        1 for w in windows if any(_overlaps(e.t_start, e.t_end, w.t_start, w.t_end) for e in episodes)
    )
    return correct, len(episodes) - correct, len(windows) - covered, covered


def precision(correct: int, false_advisories: int) -> float:
    total = correct + false_advisories
    return 1.0 if total == 0 else correct / total


def recall(covered_windows: int, missed: int) -> float:
    total = covered_windows + missed
    return 1.0 if total == 0 else covered_windows / total


def score(
    clip_id: str,
    episodes: Sequence[AdvisoryEpisode],
    windows: Sequence[GroundTruthWindow],
    sampling_distance_m: float | None = None,
    duration_s: float = 0.0,
) -> EvalReport:
    c, f, m, cov = match_episodes(episodes, windows)
    labels = sorted({w.label for w in windows if w.label})
    return EvalReport(
        clip_id, sampling_distance_m, c, f, m, cov,
        precision(c, f), recall(cov, m), duration_s, "+".join(labels),
    )


def aggregate(reports: Iterable[EvalReport], clip_id: str = "ALL") -> EvalReport:
    """Micro-average: pool counts across clips, then compute the ratios."""
    reports = list(reports)
    c = sum(r.correct for r in reports)
    f = sum(r.false_advisories for r in reports)
    m = sum(r.missed for r in reports)
    cov = sum(r.covered_windows for r in reports)
    ks = {r.sampling_distance_m for r in reports}
    scen = sorted({s for r in reports for s in r.scenario.split("+") if s})
    return EvalReport(
        clip_id, ks.pop() if len(ks) == 1 else None, c, f, m, cov,
        precision(c, f), recall(cov, m), sum(r.duration_s for r in reports), "+".join(scen),
    )


# -- ground-truth files ------------------------------------------------------------

def ground_truth_to_dict(clip_id: str, windows: Sequence[GroundTruthWindow]) -> dict:
    return {
        "clip_id": clip_id,
        "windows": [{"t_start": w.t_start, "t_end": w.t_end, "label": w.label} for w in windows],
    }


def load_ground_truth(data: bytes | str) -> tuple[str, list[GroundTruthWindow]]:
    try:
        doc = json.loads(data)
        windows = [
            GroundTruthWindow(float(w["t_start"]), float(w["t_end"]), str(w.get("label", "")))
            for w in doc["windows"]
        ]
        return str(doc["clip_id"]), windows
    except ValidationError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"corrupt ground-truth file: {exc}") from None


def pedestrian_windows(log: DriveLog, label: str = "pedestrian") -> list[GroundTruthWindow]:
    """One [k, k+1] window per second of ``log`` in which pedestrians were detected."""
    return [
        GroundTruthWindow(float(iv.k), float(iv.k + 1), label)
        for iv in split_intervals(log)
        if iv.ped_count > 0
    ]


def evaluate_run(advisory_doc: dict, gt_clip_id: str, windows: Sequence[GroundTruthWindow]) -> EvalReport:
    """Score one advisory output document against its ground truth."""
    if advisory_doc["clip_id"] != gt_clip_id:
        raise ClipMismatch(f"advisory clip {advisory_doc['clip_id']!r} != ground truth {gt_clip_id!r}")
    ts = [float(s["t"]) for s in advisory_doc.get("samples", [])]
    duration = max(ts) - min(ts) if ts else 0.0
    k = advisory_doc.get("params", {}).get("sampling_distance_m")
    return score(gt_clip_id, episodes_from_doc(advisory_doc), windows, k, duration)


TABLE_COLUMNS = ("clip", "duration_min", "scenario", "sampling_distance_m", "precision", "recall")


def reports_csv(reports: Sequence[EvalReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for r in reports:
        w.writerow([
            r.clip_id,
            f"{r.duration_s / 60.0:.3f}",
            r.scenario,
            "" if r.sampling_distance_m is None else r.sampling_distance_m,
            _fmt(r.precision),
            _fmt(r.recall),
        ])
    return buf.getvalue()


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.4g}"
