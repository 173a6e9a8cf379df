"""Pedestrian-hotspot maps and map-based vigilance advisories.

Pipeline: drive logs -> hotspot map (:mod:`.hotspot_map`) -> ball-tree index
(:mod:`.spatial_index`) -> advisory replay (:mod:`.advisory`) -> precision and
recall against ground truth (:mod:`.evaluation`).
"""

from .advisory import AdvisoryEpisode, AdvisoryParams, AdvisorySample, replay, stopping_distance
from .drive_log import DetectionFrame, DriveLog, GpsFix, load_drive_log, parse_drive_log, split_intervals
from .errors import AdvisorError
from .evaluation import EvalReport, GroundTruthWindow, match_episodes, precision, recall
from .geodesy import GeoPoint, destination_point, haversine_distance, heading_angle, initial_bearing
from .hotspot_map import HotspotMap, HotspotNode, build_map, cluster, filter_by_weight, load_map, merge_maps, save_map
from .spatial_index import NearestResult, SpatialIndex, brute_force_nearest, build_index, nearest

__version__ = "0.1.0"
