import math
import random

import pytest
from hypothesis import given, strategies as st

from hotspot_advisor.errors import CoincidentPoints, ValidationError
from hotspot_advisor.geodesy import (
    EARTH_RADIUS_M,
    GeoPoint,
    destination_point,
    haversine_distance,
    heading_angle,
    initial_bearing,
)

lats = st.floats(-89.0, 89.0)
lons = st.floats(-179.0, 179.0)
points = st.builds(GeoPoint, lats, lons)


def law_of_cosines(a, b):
    p1, l1, p2, l2 = map(math.radians, (a.lat_deg, a.lon_deg, b.lat_deg, b.lon_deg))
    c = math.sin(p1) * math.sin(p2) + math.cos(p1) * math.cos(p2) * math.cos(l2 - l1)
    return EARTH_RADIUS_M * math.acos(max(-1.0, min(1.0, c)))


def test_identity_distance():
    assert haversine_distance(GeoPoint(0, 0), GeoPoint(0, 0)) == 0.0


@pytest.mark.parametrize("b", [GeoPoint(0, 1), GeoPoint(1, 0)])
def test_one_degree(b):
    d = haversine_distance(GeoPoint(0, 0), b)
    assert d == pytest.approx(111_195.08, abs=0.01)
    assert d == pytest.approx(law_of_cosines(GeoPoint(0, 0), b), abs=1e-6)


def test_matches_law_of_cosines_on_random_pairs():
    rng = random.Random(3)
    for _ in range(500):
        a = GeoPoint(rng.uniform(-80, 80), rng.uniform(-180, 180))
        b = GeoPoint(rng.uniform(-80, 80), rng.uniform(-180, 180))
        assert haversine_distance(a, b) == pytest.approx(law_of_cosines(a, b), rel=1e-9, abs=1e-3)


@pytest.mark.parametrize("lat,lon", [(91.0, 0.0), (-90.5, 0.0), (0.0, 180.1), (float("nan"), 0.0)])
def test_geopoint_range(lat, lon):
    with pytest.raises(ValidationError):
        GeoPoint(lat, lon)


@pytest.mark.parametrize("to,expected", [((1, 0), 0.0), ((0, 1), 90.0), ((-1, 0), 180.0), ((0, -1), 270.0)])
def test_cardinal_bearings(to, expected):
    assert initial_bearing(GeoPoint(0, 0), GeoPoint(*to)) == pytest.approx(expected, abs=1e-12)


def test_bearing_of_coincident_points():
    with pytest.raises(CoincidentPoints):
        initial_bearing(GeoPoint(1, 2), GeoPoint(1, 2))


@pytest.mark.parametrize("a,b,expected", [(0, 0, 0), (0, 90, 90), (350, 10, 20), (10, 350, 20), (0, 180, 180)])
def test_heading_angle(a, b, expected):
    assert heading_angle(a, b) == pytest.approx(expected)


def test_destination_examples():
    o = GeoPoint(0, 0)
    assert destination_point(o, 90.0, 0.0) == o
    north = destination_point(o, 0.0, 111_195.08)
    assert north.lat_deg == pytest.approx(1.0, abs=1e-6)
    assert north.lon_deg == pytest.approx(0.0, abs=1e-6)
    east = destination_point(o, 90.0, 111_195.08)
    assert east.lat_deg == pytest.approx(0.0, abs=1e-6)
    assert east.lon_deg == pytest.approx(1.0, abs=1e-6)


@given(points, points)
def test_symmetry(a, b):
    assert haversine_distance(a, b) == haversine_distance(b, a)


@given(points)
def test_self_distance_zero(a):
    assert haversine_distance(a, a) == 0.0


@given(points, points, points)
def test_triangle_inequality(a, b, c):
    assert haversine_distance(a, c) <= haversine_distance(a, b) + haversine_distance(b, c) + 1e-6


@given(st.floats(0, 360, exclude_max=True), st.floats(0, 360, exclude_max=True))
def test_heading_angle_symmetric_and_periodic(a, b):
    h = heading_angle(a, b)
    assert 0.0 <= h <= 180.0
    assert h == pytest.approx(heading_angle(b, a), abs=1e-9)
    assert h == pytest.approx(heading_angle(a + 360.0, b), abs=1e-9)
    assert h == pytest.approx(heading_angle(a, b + 360.0), abs=1e-9)


@given(st.floats(-80, 80), lons, st.floats(0, 360, exclude_max=True), st.floats(1.0, 100_000.0))
def test_destination_round_trip(lat, lon, bearing, dist):
    start = GeoPoint(lat, lon)
    end = destination_point(start, bearing, dist)
    assert haversine_distance(start, end) == pytest.approx(dist, rel=1e-6)
    assert heading_angle(initial_bearing(start, end), bearing) <= 1e-6 * 360
