"""Distances between hydrants and which district each one falls in.

Run from the repository root:

    python3 demos/distance_and_containment.py
"""

from pathlib import Path

from wasteplan.geo import GeoPoint, Polygon, haversine_distance, point_in_polygon
from wasteplan.ingest import assign_to_districts, load_districts, load_hydrants

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

# Two corners of Morningside Park, roughly 900 m apart
a = GeoPoint(40.8035, -73.9604)
b = GeoPoint(40.8116, -73.9575)
print(f"a -> b: {haversine_distance(a, b):.1f} m")
print(f"antipodes on the equator: {haversine_distance(GeoPoint(0, 0), GeoPoint(0, 180)):,.0f} m")

# A square block with a courtyard cut out. Edges count as inside.
block = Polygon.from_lonlat([[0, 0], [4, 0], [4, 4], [0, 4]], holes=[[[1, 1], [3, 1], [3, 3], [1, 3]]])
for name, p in [("corner", GeoPoint(0, 0)), ("courtyard", GeoPoint(2, 2)),
                ("courtyard edge", GeoPoint(1, 2)), ("sidewalk", GeoPoint(0.5, 2))]:
    print(f"{name:>15}: {'in' if point_in_polygon(p, block) else 'out'}")

hydrants = load_hydrants(FIXTURES / "hydrants.csv")
districts = load_districts(FIXTURES / "districts.geojson")
result = assign_to_districts(hydrants, districts)
for did in sorted(result.assigned):
    print(f"district {did}: {len(result.assigned[did])} hydrants")
print("outside every district:", ", ".join(h.id for h in result.excluded))
