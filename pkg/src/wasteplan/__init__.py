"""Waste-policy planning: hydrant-sited dumpster placement and
Pay-As-You-Throw sticker pricing."""

from .errors import InputError, NumericalError, ValidationError
from .geo import GeoPoint, Polygon, haversine_distance, point_in_polygon

__all__ = [
    "GeoPoint",
    "InputError",
    "NumericalError",
    "Polygon",
    "ValidationError",
    "haversine_distance",
    "point_in_polygon",
]

__version__ = "0.1.0"
