"""Spherical-earth geodesy: haversine distance, bearings, destination points.

Angles are degrees at the API boundary and radians internally. The earth is a
sphere of mean radius :data:`EARTH_RADIUS_M`; no ellipsoidal correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CoincidentPoints, ValidationError

EARTH_RADIUS_M = 6_371_008.8
"""IUGG mean earth radius in meters."""


@dataclass(frozen=True, slots=True)
class GeoPoint:
    lat_deg: float
    lon_deg: float

    def __post_init__(self):
        lat, lon = self.lat_deg, self.lon_deg
        if not (-90.0 <= lat <= 90.0):
            raise ValidationError(f"latitude out of range: {lat!r}")
        if not (-180.0 <= lon <= 180.0):
            raise ValidationError(f"longitude out of range: {lon!r}")


def normalize_bearing(deg: float) -> float:
    """Map any angle in degrees onto [0, 360)."""
    b = math.fmod(deg, 360.0)
    if b < 0.0:
        b += 360.0
    # fmod of a tiny negative can round up to exactly 360
    return 0.0 if b >= 360.0 else b


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in meters between two (lat, lon) pairs in degrees.

    This scalar kernel is shared by every distance computation in the package,
    so two code paths that evaluate the same pair get bit-identical results.
    """
    phi1 = math.radians(lat1)
    phi2 = math.radians(lat2)
    s_dphi = math.sin((phi2 - phi1) * 0.5)
    s_dlam = math.sin(math.radians(lon2 - lon1) * 0.5)
    h = s_dphi * s_dphi + math.cos(phi1) * math.cos(phi2) * s_dlam * s_dlam
    if h > 1.0:
        h = 1.0
    # atan2 form stays well conditioned near antipodes, unlike asin(sqrt(h))
    return 2.0 * EARTH_RADIUS_M * math.atan2(math.sqrt(h), math.sqrt(1.0 - h))


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    return haversine_m(a.lat_deg, a.lon_deg, b.lat_deg, b.lon_deg)


def initial_bearing(start: GeoPoint, to: GeoPoint) -> float:
    """Forward azimuth at ``start`` of the great circle towards ``to``, in [0, 360).

    Raises CoincidentPoints when both points have identical coordinates.
    """
    if start.lat_deg == to.lat_deg and start.lon_deg == to.lon_deg:
        raise CoincidentPoints(f"bearing undefined between identical points {start}")
    phi1 = math.radians(start.lat_deg)
    phi2 = math.radians(to.lat_deg)
    dlam = math.radians(to.lon_deg - start.lon_deg)
    y = math.sin(dlam) * math.cos(phi2)
    x = math.cos(phi1) * math.sin(phi2) - math.sin(phi1) * math.cos(phi2) * math.cos(dlam)
    return normalize_bearing(math.degrees(math.atan2(y, x)))


def heading_angle(ego_heading: float, bearing_to_target: float) -> float:
    """Smallest absolute difference between two bearings, in [0, 180]."""
    d = abs(normalize_bearing(ego_heading) - normalize_bearing(bearing_to_target))
    return 360.0 - d if d > 180.0 else d


def destination_point(start: GeoPoint, bearing: float, distance_m: float) -> GeoPoint:
    """Point reached travelling ``distance_m`` along a great circle from ``start``."""
    if distance_m < 0:
        raise ValidationError(f"negative distance: {distance_m!r}")
    if distance_m == 0:
        return start
    delta = distance_m / EARTH_RADIUS_M
    theta = math.radians(bearing)
    phi1 = math.radians(start.lat_deg)
    lam1 = math.radians(start.lon_deg)
    sin_phi2 = math.sin(phi1) * math.cos(delta) + math.cos(phi1) * math.sin(delta) * math.cos(theta)
    phi2 = math.asin(max(-1.0, min(1.0, sin_phi2)))
    lam2 = lam1 + math.atan2(
        math.sin(theta) * math.sin(delta) * math.cos(phi1),
        math.cos(delta) - math.sin(phi1) * sin_phi2,
    )
    lon = (math.degrees(lam2) + 540.0) % 360.0 - 180.0
    return GeoPoint(max(-90.0, min(90.0, math.degrees(phi2))), lon)


def offset_m(origin: GeoPoint, north_m: float, east_m: float) -> GeoPoint:
    """Shift a point by small local north/east offsets (flat-earth approximation)."""
    lat = origin.lat_deg + math.degrees(north_m / EARTH_RADIUS_M)
    coslat = math.cos(math.radians(origin.lat_deg))
    lon = origin.lon_deg + math.degrees(east_m / (EARTH_RADIUS_M * max(coslat, 1e-12)))
    lon = (lon + 540.0) % 360.0 - 180.0
    return GeoPoint(max(-90.0, min(90.0, lat)), lon)
