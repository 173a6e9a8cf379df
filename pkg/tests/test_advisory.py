import itertools
import json

import pytest

from hotspot_advisor.advisory import (
    AdvisoryParams,
    advisory_to_dict,
    dump_advisory,
    episodes_from_samples,
    evaluate_sample,
    load_advisory,
    replay,
    sample_points,
    stopping_distance,
)
from hotspot_advisor.drive_log import DriveLog, GpsFix
from hotspot_advisor.errors import FormatError, InvalidParams
from hotspot_advisor.geodesy import GeoPoint, destination_point
from hotspot_advisor.hotspot_map import HotspotMap, HotspotNode, build_map, filter_by_weight
from hotspot_advisor.spatial_index import build_index

from conftest import ORIGIN, frames, straight_log

UNIT_OFFSET = AdvisoryParams(reaction_time_s=1.5, friction=0.7, grade=0.0, offset=1.0)


def test_defaults():
    p = AdvisoryParams()
    assert (p.reaction_time_s, p.friction, p.grade, p.offset) == (1.5, 0.7, 0.0, 1.5)
    assert (p.sampling_distance_m, p.fov_half_angle_deg, p.min_weight) == (2.0, 90.0, 1)


@pytest.mark.parametrize("v,expected", [(0.0, 0.0), (50.0, 14.178), (100.0, 56.478), (30.0, 5.132)])
def test_stopping_distance(v, expected):
    # hand arithmetic: (0.278 * 1.5 * v + v^2) / (254 * 0.7)
    assert stopping_distance(v, UNIT_OFFSET) == pytest.approx(expected, abs=1e-3)


def test_offset_scales_linearly():
    p = AdvisoryParams(offset=1.5)
    assert stopping_distance(50.0, p) == pytest.approx(1.5 * stopping_distance(50.0, UNIT_OFFSET))


@pytest.mark.parametrize("kw", [
    {"friction": 0.0}, {"friction": 0.2, "grade": -0.3}, {"offset": 0.9},
    {"reaction_time_s": -1}, {"sampling_distance_m": 0}, {"fov_half_angle_deg": 0},
    {"fov_half_angle_deg": 181}, {"min_weight": 0},
])
def test_invalid_params(kw):
    with pytest.raises(InvalidParams):
        AdvisoryParams(**kw)


def test_stopping_distance_monotonicity():
    vs = [1, 5, 10, 30, 60, 120]
    ts = [0.0, 0.5, 1.5, 3.0]
    fs = [0.1, 0.3, 0.7, 1.0]
    bs = [1.0, 1.2, 1.5, 3.0]
    for t, f, b in itertools.product(ts, fs, bs):
        p = AdvisoryParams(reaction_time_s=t, friction=f, offset=b)
        s = [stopping_distance(v, p) for v in vs]
        assert all(x < y for x, y in zip(s, s[1:]))
    for v, f, b in itertools.product(vs, fs, bs):
        s = [stopping_distance(v, AdvisoryParams(reaction_time_s=t, friction=f, offset=b)) for t in ts]
        assert all(x < y for x, y in zip(s, s[1:]))
    for v, t, f in itertools.product(vs, ts, fs):
        s = [stopping_distance(v, AdvisoryParams(reaction_time_s=t, friction=f, offset=b)) for b in bs]
        assert all(x < y for x, y in zip(s, s[1:]))
    for v, t, b in itertools.product(vs, ts, bs):
        s = [stopping_distance(v, AdvisoryParams(reaction_time_s=t, friction=f, offset=b)) for f in fs]
        assert all(x > y for x, y in zip(s, s[1:]))


def test_stationary_log_has_one_sample():
    log = DriveLog("c", tuple(GpsFix(i * 0.1, ORIGIN) for i in range(20)))
    pts = sample_points(log, 2.0)
    assert len(pts) == 1 and pts[0][2] is None


@pytest.mark.parametrize("k,expected", [(2.0, 51), (5.0, 21), (1.0, 101), (100.0, 2)])
def test_sample_count_on_straight_drive(k, expected):
    log = straight_log(101, spacing_m=1.0)
    assert len(sample_points(log, k)) == expected


def test_heading_carried_over_stationary_fixes():
    a = ORIGIN
    b = destination_point(a, 90.0, 3.0)
    log = DriveLog("c", (GpsFix(0, a), GpsFix(1, b), GpsFix(2, b), GpsFix(3, b)))
    pts = sample_points(log, 2.0)
    assert [p[0] for p in pts] == [0, 1]
    assert pts[1][2] == pytest.approx(90.0, abs=1e-6)
    log = DriveLog("c", (GpsFix(0, a), GpsFix(1, b), GpsFix(2, b), GpsFix(3, destination_point(b, 0.0, 0.5))))
    assert sample_points(log, 0.1)[-1][2] == pytest.approx(0.0, abs=1e-6)


def one_node_index(bearing, dist, weight=1):
    node = destination_point(ORIGIN, bearing, dist)
    return build_index(HotspotMap((HotspotNode(node, weight),), 5.0))


def test_active_when_node_ahead_within_s():
    s = evaluate_sample(0.0, ORIGIN, 0.0, 50.0, one_node_index(0.0, 10.0), UNIT_OFFSET)
    assert s.stopping_distance_m == pytest.approx(14.178, abs=1e-3)
    assert s.heading_angle_deg == pytest.approx(0.0, abs=1e-6)
    assert s.active


def test_inactive_when_node_behind():
    s = evaluate_sample(0.0, ORIGIN, 0.0, 50.0, one_node_index(180.0, 10.0), UNIT_OFFSET)
    assert s.heading_angle_deg == pytest.approx(180.0, abs=1e-6)
    assert not s.active


def test_inactive_at_exactly_fov_limit():
    # on the equator the bearing to a node due east is exactly 90 degrees
    q = GeoPoint(0.0, 0.0)
    index = build_index(HotspotMap((HotspotNode(GeoPoint(0.0, 0.0001), 1),), 5.0))
    s = evaluate_sample(0.0, q, 0.0, 50.0, index, UNIT_OFFSET)
    assert s.heading_angle_deg == 90.0
    assert s.nearest.distance_m < s.stopping_distance_m
    assert not s.active
    assert evaluate_sample(0.0, q, 0.001, 50.0, index, UNIT_OFFSET).active


def test_inactive_beyond_stopping_distance():
    assert not evaluate_sample(0.0, ORIGIN, 0.0, 50.0, one_node_index(0.0, 15.0), UNIT_OFFSET).active


def test_unknown_heading_passes_fov():
    assert evaluate_sample(0.0, ORIGIN, None, 50.0, one_node_index(180.0, 10.0), UNIT_OFFSET).active


def test_empty_index_inactive():
    s = evaluate_sample(0.0, ORIGIN, 0.0, 50.0, build_index(HotspotMap((), 5.0)), UNIT_OFFSET)
    assert s.nearest is None and not s.active


def test_replay_empty_map():
    samples, episodes = replay(straight_log(100, speed_kmh=36.0), HotspotMap((), 5.0))
    assert episodes == [] and not any(s.active for s in samples)


def straight_pass_log(n=400, speed_kmh=36.0):
    # 10 m/s at 10 Hz: fixes 1 m apart
    return straight_log(n, spacing_m=1.0, dt=0.1, speed_kmh=speed_kmh, clip_id="pass")


def test_straight_pass_single_episode():
    node_pos = destination_point(ORIGIN, 0.0, 200.0)
    m = HotspotMap((HotspotNode(node_pos, 2),), 5.0)
    samples, episodes = replay(straight_pass_log(), m)
    assert len(episodes) == 1
    ep = episodes[0]
    # the node falls behind at 200 m, i.e. t = 20 s
    assert ep.t_end <= 20.0
    after = [s for s in samples if s.t > ep.t_end]
    assert after and not any(s.active for s in after)
    assert all(s.heading_angle_deg >= 90.0 for s in after if s.t > 20.0)
    s_adv = stopping_distance(36.0, AdvisoryParams())
    assert ep.t_start >= (200.0 - s_adv) / 10.0 - 1e-9


def test_self_replay_covers_pedestrian_seconds():
    log = straight_log(300, spacing_m=1.0, dt=0.1, speed_kmh=36.0, clip_id="train",
                       detections=frames({5: 1, 12: 2, 21: 1}))
    m = build_map([log])
    _, episodes = replay(log, m)
    for k in (5, 12, 21):
        assert any(e.t_start <= k + 1 and k <= e.t_end for e in episodes)


def test_min_weight_monotone():
    nodes = tuple(HotspotNode(destination_point(ORIGIN, 0.0, d), w) for d, w in ((50, 1), (120, 3), (260, 5)))
    m = HotspotMap(nodes, 5.0)
    log = straight_pass_log()
    prev = None
    for w in range(1, 7):
        samples, _ = replay(log, m, AdvisoryParams(min_weight=w))
        active = {s.t for s in samples if s.active}
        if prev is not None:
            assert active <= prev
        prev = active
    assert prev == set()


def test_fov_invariant_and_episode_reconstruction():
    nodes = tuple(HotspotNode(destination_point(ORIGIN, b, d), 1) for b, d in ((5, 60), (355, 150), (90, 30), (0, 300)))
    m = HotspotMap(nodes, 5.0)
    for fov in (30.0, 60.0, 90.0, 150.0):
        samples, episodes = replay(straight_pass_log(), m, AdvisoryParams(fov_half_angle_deg=fov, offset=3.0))
        for s in samples:
            if s.active and s.heading_angle_deg is not None:
                assert s.heading_angle_deg < fov
            if s.active:
                assert s.nearest.distance_m < s.stopping_distance_m
        assert sum(e.sample_count for e in episodes) == sum(s.active for s in samples)


def test_shared_index_matches_internal_build():
    m = HotspotMap((HotspotNode(destination_point(ORIGIN, 0.0, 100.0), 3),), 5.0)
    p = AdvisoryParams(min_weight=2)
    index = build_index(filter_by_weight(m, 2))
    assert replay(straight_pass_log(), m, p) == replay(straight_pass_log(), m, p, index=index)


def test_episodes_from_samples():
    from hotspot_advisor.advisory import AdvisorySample

    flags = [False, True, True, False, True, False, False, True]
    samples = [AdvisorySample(float(i), ORIGIN, 0.0, 0.0, None, None, a) for i, a in enumerate(flags)]
    eps = episodes_from_samples(samples)
    assert [(e.t_start, e.t_end, e.sample_count) for e in eps] == [(1, 2, 2), (4, 4, 1), (7, 7, 1)]


def test_advisory_document_round_trip():
    m = HotspotMap((HotspotNode(destination_point(ORIGIN, 0.0, 100.0), 3),), 5.0)
    log = straight_pass_log(200)
    p = AdvisoryParams()
    samples, episodes = replay(log, m, p)
    doc = advisory_to_dict(log.clip_id, p, samples, episodes)
    text = dump_advisory(doc)
    assert load_advisory(text) == json.loads(text)
    first = doc["samples"][0]
    assert set(first) >= {"t", "lat", "lon", "v_kmh", "s_m", "d_m", "theta_deg", "active"}
    assert first["theta_deg"] is None  # no heading before the vehicle moves
    assert AdvisoryParams.from_dict(doc["params"]) == p


@pytest.mark.parametrize("data", [b"{}", b"[]", b'{"clip_id": "x", "episodes": [{"t_start": 2, "t_end": 1}]}'])
def test_load_advisory_corrupt(data):
    with pytest.raises(FormatError):
        load_advisory(data)
