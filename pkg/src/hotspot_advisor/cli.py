"""Command-line interface.

Exit status: 0 on success, 1 on validation/parse/IO errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import advisory, evaluation, hotspot_map, synth
from .drive_log import load_drive_log
from .errors import AdvisorError
from .geodesy import GeoPoint

_DEFAULTS = advisory.AdvisoryParams()


def _write(path: str | Path, data: str | bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data.encode("utf-8") if isinstance(data, str) else data)


def _log_paths(items: list[str]) -> list[Path]:
    paths: list[Path] = []
    for item in items:
        p = Path(item)
        if p.is_dir():
            found = sorted(q for q in p.iterdir() if q.suffix.lower() in (".jsonl", ".csv"))
            if not found:
                raise AdvisorError(f"no .jsonl or .csv drive logs in {p}")
            paths.extend(found)
        else:
            paths.append(p)
    return paths


def cmd_build_map(args) -> None:
    logs = [load_drive_log(p) for p in _log_paths(args.logs)]
    m = hotspot_map.build_map(logs, args.cluster_radius)
    _write(args.out, hotspot_map.save_map(m))
    print(f"{len(m.nodes)} hotspot nodes, total weight {m.total_weight}, from {len(logs)} logs")


def cmd_merge_maps(args) -> None:
    a = hotspot_map.load_map(Path(args.a).read_bytes())
    b = hotspot_map.load_map(Path(args.b).read_bytes())
    m = hotspot_map.merge_maps(a, b)
    _write(args.out, hotspot_map.save_map(m))
    print(f"{len(m.nodes)} hotspot nodes, total weight {m.total_weight}")


def params_from_args(args) -> advisory.AdvisoryParams:
    return advisory.AdvisoryParams(
        reaction_time_s=args.reaction_time,
        friction=args.friction,
        grade=args.grade,
        offset=args.offset,
        sampling_distance_m=args.sampling_distance,
        fov_half_angle_deg=args.fov,
        min_weight=args.min_weight,
    )


def cmd_replay(args) -> None:
    m = hotspot_map.load_map(Path(args.map).read_bytes())
    log = load_drive_log(args.log)
    p = params_from_args(args)
    samples, episodes = advisory.replay(log, m, p)
    _write(args.out, advisory.dump_advisory(advisory.advisory_to_dict(log.clip_id, p, samples, episodes)))
    active = sum(s.active for s in samples)
    print(f"{len(samples)} decision points, {active} active, {len(episodes)} episodes")


def cmd_evaluate(args) -> None:
    if len(args.advisories) != len(args.ground_truth):
        raise AdvisorError("--advisories and --ground-truth need the same number of files")
    reports = []
    for adv_path, gt_path in zip(args.advisories, args.ground_truth):
        doc = advisory.load_advisory(Path(adv_path).read_bytes())
        clip_id, windows = evaluation.load_ground_truth(Path(gt_path).read_bytes())
        reports.append(evaluation.evaluate_run(doc, clip_id, windows))
    if len(reports) == 1:
        out = reports[0].to_dict()
    else:
        out = evaluation.aggregate(reports).to_dict()
        out["clips"] = [r.to_dict() for r in reports]
    _write(args.out, json.dumps(out, indent=1) + "\n")
    if args.csv:
        rows = reports if len(reports) == 1 else reports + [evaluation.aggregate(reports)]
        _write(Path(args.out).with_suffix(".csv"), evaluation.reports_csv(rows))
    print(f"precision {out['precision']:.4g} recall {out['recall']:.4g}")


def cmd_synth(args) -> None:
    kw = {}
    if args.speed is not None:
        kw["speed_kmh"] = args.speed
    if args.origin is not None:
        kw["origin"] = GeoPoint(*args.origin)
    spec = synth.ScenarioSpec(kind=args.scenario, seed=args.seed, noise_m=args.noise, **kw)
    written = synth.write_scenario(synth.generate(spec), args.out_dir)
    for group, paths in written.items():
        for p in paths:
            print(f"{group}: {p}")


def cmd_export_geojson(args) -> None:
    m = hotspot_map.load_map(Path(args.map).read_bytes())
    features = hotspot_map.map_geojson_features(m)
    if args.advisories:
        doc = advisory.load_advisory(Path(args.advisories).read_bytes())
        features.extend(advisory_geojson_features(doc))
    _write(args.out, json.dumps({"type": "FeatureCollection", "features": features}, indent=1) + "\n")


def advisory_geojson_features(doc: dict) -> list[dict]:
    """One LineString per advisory episode, traced through its decision points."""
    feats = []
    samples = doc.get("samples", [])
    for i, ep in enumerate(doc["episodes"]):
        coords = [
            [s["lon"], s["lat"]]
            for s in samples
            if s.get("active") and ep["t_start"] <= s["t"] <= ep["t_end"]
        ]
        if not coords:
            continue
        geom = (
            {"type": "LineString", "coordinates": coords}
            if len(coords) > 1
            else {"type": "Point", "coordinates": coords[0]}
        )
        feats.append({
            "type": "Feature",
            "geometry": geom,
            "properties": {
                "kind": "advisory_episode",
                "clip_id": doc["clip_id"],
                "episode": i,
                "t_start": ep["t_start"],
                "t_end": ep["t_end"],
                "stroke": "#e41a1c",
            },
        })
    return feats


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hotspot-advisor",
        description="Build pedestrian-hotspot maps, replay drives for advisories, and score them.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("build-map", help="cluster drive logs into a hotspot map")
    p.add_argument("--logs", nargs="+", required=True, metavar="PATH",
                   help="drive-log files (.jsonl/.csv) or directories containing them")
    p.add_argument("--out", required=True, help="output map JSON")
    p.add_argument("--cluster-radius", type=float, default=hotspot_map.DEFAULT_CLUSTER_RADIUS_M,
                   metavar="EPS", help="clustering radius epsilon in meters (default %(default)s)")
    p.set_defaults(func=cmd_build_map)

    p = sub.add_parser("merge-maps", help="merge two hotspot maps (fleet or repeat aggregation)")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_merge_maps)

    p = sub.add_parser("replay", help="replay a drive log against a map and emit advisories")
    p.add_argument("--map", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--sampling-distance", type=float, default=_DEFAULTS.sampling_distance_m, metavar="K",
                   help="K: meters travelled between advisory evaluations (default %(default)s)")
    p.add_argument("--reaction-time", type=float, default=_DEFAULTS.reaction_time_s, metavar="T",
                   help="t: driver reaction time in seconds (default %(default)s)")
    p.add_argument("--friction", type=float, default=_DEFAULTS.friction, metavar="F",
                   help="f: tyre-road friction coefficient (default %(default)s, dry road)")
    p.add_argument("--grade", type=float, default=_DEFAULTS.grade, metavar="G",
                   help="G: road slope (default %(default)s, flat)")
    p.add_argument("--offset", type=float, default=_DEFAULTS.offset, metavar="B",
                   help="b: multiplicative safety offset on stopping distance s (default %(default)s)")
    p.add_argument("--fov", type=float, default=_DEFAULTS.fov_half_angle_deg, metavar="THETA",
                   help="theta: heading-angle limit in degrees; hotspots at or beyond it are ignored "
                        "(default %(default)s). Speed v (km/h) comes from the log.")
    p.add_argument("--min-weight", type=int, default=_DEFAULTS.min_weight, metavar="W",
                   help="ignore hotspots with fewer than W pedestrian sightings (default %(default)s)")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("evaluate", help="score advisories against ground-truth windows")
    p.add_argument("--advisories", nargs="+", required=True, help="advisory JSON file(s)")
    p.add_argument("--ground-truth", nargs="+", required=True, help="ground-truth JSON file(s), same order")
    p.add_argument("--out", required=True, help="report JSON")
    p.add_argument("--csv", action="store_true", help="also write a table row CSV next to --out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic train/test scenario with ground truth")
    p.add_argument("--scenario", required=True, choices=synth.KINDS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--noise", type=float, default=0.0, help="GPS jitter standard deviation in meters")
    p.add_argument("--speed", type=float, default=None, metavar="V",
                   help="v: constant drive speed in km/h (default 30)")
    p.add_argument("--origin", type=float, nargs=2, default=None, metavar=("LAT", "LON"))
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("export-geojson", help="export a map (and optional advisories) as GeoJSON")
    p.add_argument("--map", required=True)
    p.add_argument("--advisories", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_geojson)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        args.func(args)
    except (AdvisorError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
