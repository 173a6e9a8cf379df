import pytest

from hotspot_advisor.drive_log import DetectionFrame, DriveLog, GpsFix
from hotspot_advisor.geodesy import GeoPoint, destination_point

ORIGIN = GeoPoint(32.87, -117.25)


def straight_log(n_fixes, spacing_m=1.0, dt=0.1, bearing=0.0, clip_id="straight",
                 origin=ORIGIN, speed_kmh=None, detections=()):
    fixes = [
        GpsFix(round(i * dt, 9), destination_point(origin, bearing, i * spacing_m), speed_kmh)
        for i in range(n_fixes)
    ]
    return DriveLog(clip_id, tuple(fixes), tuple(detections))


def frames(spec):
    """Detection frames from {second: count} at 30 fps."""
    out = []
    for sec, count in spec.items():
        out.extend(DetectionFrame(sec + f / 30, count) for f in range(30))
    return out


@pytest.fixture
def origin():
    return ORIGIN
