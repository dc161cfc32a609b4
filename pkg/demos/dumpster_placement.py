"""Sizing and siting dumpsters in one district.

Greedy farthest-point placement is compared with random picks of the
same size, then the site count is swept to show how average walking
distance and collection frequency trade off.

    python3 demos/dumpster_placement.py
"""

from pathlib import Path

from wasteplan import dcap
from wasteplan.ingest import (build_district_profiles, load_districts, load_hydrants, load_lots,
                              load_tonnage, load_zones)

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
SEED = 7

profiles = build_district_profiles(
    load_hydrants(FIXTURES / "hydrants.csv"), load_lots(FIXTURES / "lots.csv"),
    load_districts(FIXTURES / "districts.geojson"), load_tonnage(FIXTURES / "tonnage.csv"),
    load_zones(FIXTURES / "zones.geojson"),
)
prof = next(p for p in profiles if p.district_id == "109")
T = dcap.estimate_throughput(prof)
hs = prof.service_hydrants
print(f"district {prof.district_id}: {len(hs)} candidate hydrants, {T:.1f} t/month from 3+-unit lots")

n, freq, ok = dcap.choose_dumpster_count(T, len(hs))
print(f"smallest fleet collected at most 10 times a month: {n} sites ({freq:.2f}/month)")

# greedy vs random at N = 50
seed = dcap.district_seed(SEED, prof.district_id)
g = dcap.greedy_place(hs, 50, seed, lots=prof.lots_3plus)
r = dcap.random_place(hs, 50, seed, lots=prof.lots_3plus)
print(f"N=50 mean distance to nearest site: greedy {g.mean_min_distance:.0f} m, random {r.mean_min_distance:.0f} m")

print("\n  N   mean dist (m)   pickups/month")
for row in dcap.placement_curve(hs, prof.lots_3plus, T, [5, 10, 25, 50, 100, 200], seed):
    print(f"{row['N']:>4} {row['mean_min_distance']:>12.0f} {row['required_frequency']:>14.2f}")
