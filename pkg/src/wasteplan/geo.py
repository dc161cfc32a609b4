"""Great-circle distance and polygon containment.

Containment treats (lon, lat) as planar coordinates. Community districts
span a few kilometres, where the distortion of that approximation is far
below the precision of the zoning shapes themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError

EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True, order=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise InputError(f"non-finite coordinate ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise InputError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise InputError(f"longitude {self.lon} outside [-180, 180]")


def haversine_distance(a: GeoPoint, b: GeoPoint, radius: float = EARTH_RADIUS_M) -> float:
    """Great-circle distance between two points in meters."""
    lat1, lat2 = math.radians(a.lat), math.radians(b.lat)
    dlat = lat2 - lat1
    dlon = math.radians(b.lon - a.lon)
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    # rounding can push h a hair above 1 for antipodes
    return 2.0 * radius * math.asin(math.sqrt(min(1.0, h)))


def haversine_to_many(a: GeoPoint, lats, lons, radius: float = EARTH_RADIUS_M) -> np.ndarray:
    """Vectorized distance from ``a`` to arrays of latitudes and longitudes."""
    lat1 = math.radians(a.lat)
    lat2 = np.radians(np.asarray(lats, dtype=float))
    dlat = lat2 - lat1
    dlon = np.radians(np.asarray(lons, dtype=float) - a.lon)
    h = np.sin(dlat / 2) ** 2 + math.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2) ** 2
    return 2.0 * radius * np.arcsin(np.sqrt(np.minimum(1.0, h)))


def _open_ring(ring: Sequence[GeoPoint]) -> tuple[GeoPoint, ...]:
    pts = tuple(ring)
    if len(pts) > 1 and pts[0] == pts[-1]:
        pts = pts[:-1]
    if len(set(pts)) < 3:
        raise InputError("ring needs at least 3 distinct vertices")
    return pts


def _orient(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(px, py, ax, ay, bx, by) -> bool:
    if _orient(ax, ay, bx, by, px, py) != 0.0:
        return False
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def _segments_cross(a, b, c, d) -> bool:
    o1 = _orient(a[0], a[1], b[0], b[1], c[0], c[1])
    o2 = _orient(a[0], a[1], b[0], b[1], d[0], d[1])
    o3 = _orient(c[0], c[1], d[0], d[1], a[0], a[1])
    o4 = _orient(c[0], c[1], d[0], d[1], b[0], b[1])
    if ((o1 > 0) != (o2 > 0)) and o1 != 0 and o2 != 0 and ((o3 > 0) != (o4 > 0)) and o3 != 0 and o4 != 0:
        return True
    # touching or collinear overlap
    return (
        (o1 == 0 and _on_segment(c[0], c[1], a[0], a[1], b[0], b[1]))
        or (o2 == 0 and _on_segment(d[0], d[1], a[0], a[1], b[0], b[1]))
        or (o3 == 0 and _on_segment(a[0], a[1], c[0], c[1], d[0], d[1]))
        or (o4 == 0 and _on_segment(b[0], b[1], c[0], c[1], d[0], d[1]))
    )


def ring_is_simple(ring: Sequence[GeoPoint]) -> bool:
    """True if no two non-adjacent edges of the ring touch or cross."""
    pts = [(q.lon, q.lat) for q in _open_ring(ring)]
    n = len(pts)
    edges = [(pts[i], pts[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_cross(*edges[i], *edges[j]):
                return False
    return True


@dataclass(frozen=True)
class Polygon:
    """Outer ring plus optional holes.

    Rings are stored open (the closing vertex is dropped if supplied).
    """

    outer: tuple[GeoPoint, ...]
    holes: tuple[tuple[GeoPoint, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "outer", _open_ring(self.outer))
        object.__setattr__(self, "holes", tuple(_open_ring(h) for h in self.holes))

    @classmethod
    def from_lonlat(cls, outer, holes=()) -> "Polygon":
        """Build from GeoJSON-style ``[lon, lat]`` coordinate rings."""
        to_pts = lambda ring: tuple(GeoPoint(float(lat), float(lon)) for lon, lat, *_ in ring)  # noqa: E731
        return cls(to_pts(outer), tuple(to_pts(h) for h in holes))

    def validate(self) -> None:
        if not ring_is_simple(self.outer):
            raise InputError("outer ring is self-intersecting")

    @property
    def rings(self) -> tuple[tuple[GeoPoint, ...], ...]:
        return (self.outer, *self.holes)

    def bbox(self) -> tuple[float, float, float, float]:
        lons = [q.lon for q in self.outer]
        lats = [q.lat for q in self.outer]
        return min(lons), min(lats), max(lons), max(lats)


def _ring_edges(ring):
    n = len(ring)
    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        yield a.lon, a.lat, b.lon, b.lat


def _on_ring(x, y, ring) -> bool:
    return any(_on_segment(x, y, ax, ay, bx, by) for ax, ay, bx, by in _ring_edges(ring))


def _ray_cast(x, y, ring) -> bool:
    inside = False
    for ax, ay, bx, by in _ring_edges(ring):
        if (ay > y) != (by > y):
            xcross = ax + (y - ay) * (bx - ax) / (by - ay)
            if x < xcross:
                inside = not inside
    return inside


INSIDE, BOUNDARY, OUTSIDE = 1, 0, -1


def locate(p: GeoPoint, poly: Polygon) -> int:
    """Classify ``p`` as ``INSIDE``, ``BOUNDARY`` (on any ring) or ``OUTSIDE``."""
    x, y = p.lon, p.lat
    for ring in poly.rings:
        if _on_ring(x, y, ring):
            return BOUNDARY
    if not _ray_cast(x, y, poly.outer):
        return OUTSIDE
    return OUTSIDE if any(_ray_cast(x, y, h) for h in poly.holes) else INSIDE


def point_in_polygon(p: GeoPoint, poly: Polygon) -> bool:
    """Even-odd containment of ``p`` in ``poly``.

    Points on any ring boundary (outer or hole) count as inside, so the
    polygon is treated as a closed set.
    """
    return locate(p, poly) != OUTSIDE


def locate_any(p: GeoPoint, parts: Sequence[Polygon]) -> int:
    """Best classification of ``p`` over the parts of a multi-part geometry."""
    best = OUTSIDE
    for poly in parts:
        minx, miny, maxx, maxy = poly.bbox()
        if minx <= p.lon <= maxx and miny <= p.lat <= maxy:
            best = max(best, locate(p, poly))
            if best == INSIDE:
                break
    return best


def point_in_any(p: GeoPoint, parts: Sequence[Polygon]) -> bool:
    """Containment in a multi-part geometry."""
    return locate_any(p, parts) != OUTSIDE
