"""Dumpster and Compost Accessibility Program model.

Dumpsters come in 12 cubic-yard sites, one per fire hydrant. A district's
monthly dumpster throughput is its peak monthly refuse scaled by the share
of residential units on lots with three or more units; the plan then picks
a well-spread subset of in-service-area hydrants by farthest-point greedy
selection.

Random draws use numpy's PCG64 generator. Hydrants are sorted by id before
any draw, so a plan depends only on the set of hydrants and the seed, not on
input order.
"""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InputError
from .geo import haversine_to_many
from .ingest import CompositionProfile, DistrictProfile, Hydrant, Lot

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CapacityParams:
    tons_per_12yd3: float = 1.5
    dumpster_unit_cost: float = 8_310.0
    bin_unit_cost: float = 24.0
    target_collections_per_month: float = 10.0

    def __post_init__(self):
        for name in ("tons_per_12yd3", "dumpster_unit_cost", "bin_unit_cost", "target_collections_per_month"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InputError(f"{name} must be finite and > 0, got {v}")


@dataclass(frozen=True)
class PlacementPlan:
    district_id: str
    selected: tuple[Hydrant, ...]
    seed: int
    mean_min_distance: float = math.nan
    required_collection_frequency: float = math.nan

    @property
    def selected_hydrant_ids(self) -> tuple[str, ...]:
        return tuple(h.id for h in self.selected)


def district_seed(global_seed: int, district_id: str) -> int:
    """64-bit seed derived from the run seed and a district id.

    The first 8 bytes (big-endian) of SHA-256 over ``"<seed>:<district_id>"``.
    """
    digest = hashlib.sha256(f"{int(global_seed)}:{district_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def estimate_throughput(d: DistrictProfile, literal_ratio: bool = False) -> float:
    """Monthly tons the district's dumpsters must absorb.

    With ``literal_ratio`` the numerator is the *count* of 3+-unit lots
    rather than the units on them.
    """
    if d.U_total_units <= 0:
        raise InputError(f"district {d.district_id} has no residential units")
    numerator = d.lot_count_3plus if literal_ratio else d.U_units_on_3plus_lots
    return numerator / d.U_total_units * d.W_peak_monthly_refuse


def hydrant_load_ratio(T: float, N: int) -> float:
    if N < 1:
        raise InputError("district has no hydrants in the dumpster service area")
    return T / N


def fill_rate(ratio: float, cap: CapacityParams = CapacityParams()) -> float:
    """Fills per month of one 12 yd³ site receiving ``ratio`` tons/month."""
    return ratio / cap.tons_per_12yd3


class DumpsterCount(NamedTuple):
    n: int
    frequency: float
    meets_target: bool


def choose_dumpster_count(T: float, n_hydrants: int, cap: CapacityParams = CapacityParams()) -> DumpsterCount:
    """Smallest site count keeping collections at or below the target.

    Clamped to ``[1, n_hydrants]``; when even every hydrant is not enough the
    count is ``n_hydrants`` and ``meets_target`` is False.
    """
    if n_hydrants < 1:
        raise InputError("n_hydrants must be >= 1")
    if T < 0:
        raise InputError("throughput must be >= 0")

    def fits(n):
        return T / (n * cap.tons_per_12yd3) <= cap.target_collections_per_month

    n = min(max(1, math.ceil(T / (cap.tons_per_12yd3 * cap.target_collections_per_month))), n_hydrants)
    # the ceiling of a rounded quotient can be off by one either way
    while n > 1 and fits(n - 1):
        n -= 1
    while n < n_hydrants and not fits(n):
        n += 1
    freq = T / (n * cap.tons_per_12yd3)
    return DumpsterCount(n, freq, freq <= cap.target_collections_per_month)


def _sorted_unique(hydrants: Sequence[Hydrant]) -> list[Hydrant]:
    hs = sorted(hydrants, key=lambda h: h.id)
    for a, b in zip(hs, hs[1:]):
        if a.id == b.id:
            raise InputError(f"duplicate hydrant id {a.id!r}")
    return hs


def _check_count(N, hs):
    if not 1 <= N <= len(hs):
        raise InputError(f"dumpster count {N} outside [1, {len(hs)}]")


def greedy_order(hydrants: Sequence[Hydrant], N: int, seed: int) -> list[Hydrant]:
    """Farthest-point selection order.

    The first hydrant is drawn uniformly; every later pick is the
    unselected hydrant whose nearest selected hydrant is farthest away,
    ties going to the smallest id.
    """
    hs = _sorted_unique(hydrants)
    _check_count(N, hs)
    lats = np.array([h.location.lat for h in hs])
    lons = np.array([h.location.lon for h in hs])
    first = int(make_rng(seed).integers(len(hs)))
    order = [first]
    nearest = haversine_to_many(hs[first].location, lats, lons)
    nearest[first] = -np.inf
    for _ in range(N - 1):
        # argmax returns the first maximum, i.e. the smallest id
        nxt = int(np.argmax(nearest))
        order.append(nxt)
        nearest = np.minimum(nearest, haversine_to_many(hs[nxt].location, lats, lons))
        nearest[order] = -np.inf
    return [hs[i] for i in order]


def random_order(hydrants: Sequence[Hydrant], N: int, seed: int) -> list[Hydrant]:
    hs = _sorted_unique(hydrants)
    _check_count(N, hs)
    idx = make_rng(seed).choice(len(hs), size=N, replace=False)
    return [hs[int(i)] for i in idx]


def mean_min_distance(lots: Sequence[Lot], selected: Sequence[Hydrant]) -> float:
    """Mean over lots of the distance to the closest selected hydrant."""
    if not selected:
        raise InputError("no hydrants selected")
    if not lots:
        log.warning("no lots to measure; mean distance reported as 0")
        return 0.0
    return float(np.mean(_min_distances(lots, selected)))


def _min_distances(lots, selected):
    lats = np.array([lot.location.lat for lot in lots])
    lons = np.array([lot.location.lon for lot in lots])
    best = np.full(len(lots), np.inf)
    for h in selected:
        best = np.minimum(best, haversine_to_many(h.location, lats, lons))
    return best


def _plan(order, district_id, seed, lots, throughput, cap):
    mmd = mean_min_distance(lots, order) if lots is not None else math.nan
    freq = throughput / (len(order) * cap.tons_per_12yd3) if throughput is not None else math.nan
    return PlacementPlan(district_id, tuple(order), int(seed), mmd, freq)


def greedy_place(hydrants: Sequence[Hydrant], N: int, seed: int, district_id: str = "",
                 lots: Sequence[Lot] | None = None, throughput: float | None = None,
                 cap: CapacityParams = CapacityParams()) -> PlacementPlan:
    """Greedy dispersed placement of ``N`` sites.

    ``lots`` and ``throughput`` are optional; when given, the plan carries
    the mean lot-to-dumpster distance and the required collection frequency.
    """
    return _plan(greedy_order(hydrants, N, seed), district_id, seed, lots, throughput, cap)


def random_place(hydrants: Sequence[Hydrant], N: int, seed: int, district_id: str = "",
                 lots: Sequence[Lot] | None = None, throughput: float | None = None,
                 cap: CapacityParams = CapacityParams()) -> PlacementPlan:
    """Uniform sample of ``N`` sites without replacement (benchmark baseline)."""
    return _plan(random_order(hydrants, N, seed), district_id, seed, lots, throughput, cap)


def placement_curve(hydrants, lots, throughput: float, n_values: Sequence[int], seed: int,
                    cap: CapacityParams = CapacityParams()) -> list[dict]:
    """Mean distance and collection frequency as the site count varies.

    Greedy plans are nested, so one run to ``max(n_values)`` serves every row.
    """
    n_values = sorted(set(int(n) for n in n_values))
    order = greedy_order(hydrants, n_values[-1], seed)
    lats = np.array([lot.location.lat for lot in lots])
    lons = np.array([lot.location.lon for lot in lots])
    best = np.full(len(lots), np.inf)
    rows, done = [], 0
    for n in n_values:
        for h in order[done:n]:
            best = np.minimum(best, haversine_to_many(h.location, lats, lons))
        done = n
        rows.append({
            "N": n,
            "mean_min_distance": float(np.mean(best)) if len(lots) else 0.0,
            "required_frequency": throughput / (n * cap.tons_per_12yd3),
        })
    return rows


def plan_district(profile: DistrictProfile, global_seed: int, cap: CapacityParams = CapacityParams(),
                  count: int | None = None, literal_ratio: bool = False) -> PlacementPlan:
    """Size and place the dumpster fleet for one district."""
    service = profile.service_hydrants
    if not service:
        raise InputError(f"district {profile.district_id} has no hydrants in the dumpster service area")
    T = estimate_throughput(profile, literal_ratio)
    if count is None:
        count = choose_dumpster_count(T, len(service), cap).n
    elif not 1 <= count <= len(service):
        raise InputError(f"--count {count} outside [1, {len(service)}] for district {profile.district_id}")
    seed = district_seed(global_seed, profile.district_id)
    return greedy_place(service, count, seed, profile.district_id, profile.lots_3plus, T, cap)


@dataclass(frozen=True)
class BoroughOutcome:
    """Projected DCAP effect for one borough. Money in dollars."""

    borough: str
    current_efficiency: float
    proj_efficiency: float
    delta_tons_diverted: float
    dumpsters: int
    bin_units: int
    cost_dumpsters: float
    cost_bins: float
    cost_total: float
    cost_per_ton: float | None

    @property
    def zero_benefit(self) -> bool:
        return self.cost_per_ton is None


def project_outcome(composition: CompositionProfile, annual_compost_tons: float, dumpsters: int,
                    bin_units: int, cap: CapacityParams = CapacityParams()) -> BoroughOutcome:
    """Diversion and one-time cost of the program in one borough.

    Compost sorting is assumed to rise to the current recycling rate.
    ``cost_per_ton`` is None when no additional tons are diverted.
    """
    if annual_compost_tons < 0 or dumpsters < 0 or bin_units < 0:
        raise InputError("tonnage and counts must be >= 0")
    proj = composition.current_recycling_efficiency
    delta = (proj - composition.current_compost_efficiency) * annual_compost_tons
    # integer counts times whole-dollar unit costs stay exact in float64
    c_d = dumpsters * cap.dumpster_unit_cost
    c_b = bin_units * cap.bin_unit_cost
    total = c_d + c_b
    per_ton = total / delta if delta > 0 else None
    if per_ton is None:
        log.warning("%s: no additional tons diverted; cost per ton undefined", composition.borough)
    return BoroughOutcome(composition.borough, composition.current_compost_efficiency, proj,
                          delta, dumpsters, bin_units, c_d, c_b, total, per_ton)


def annual_compost_tons(series_by_district: dict, district_ids: Sequence[str], compost_fraction: float) -> float:
    """Compostable share of a borough's annualized curbside collection.

    Each district's total (refuse + recycling + organics) is averaged over
    the months it reports and scaled to 12 months.
    """
    total = 0.0
    for did in district_ids:
        months = [
            sum(v for v in (r.refuse_tons, r.recycling_tons, r.organics_tons) if v is not None)
            for r in series_by_district.get(did, [])
        ]
        if months:
            total += 12.0 * sum(months) / len(months)
    return compost_fraction * total


def project_dcap_outcome(profiles: Sequence[DistrictProfile], compositions: Sequence[CompositionProfile],
                         tonnage: dict, plans: dict[str, PlacementPlan],
                         cap: CapacityParams = CapacityParams()) -> list[BoroughOutcome]:
    """Per-borough projection from district profiles and placement plans.

    Dumpsters are counted from ``plans`` (keyed by district id); bins are
    one per residential unit on single/two-family lots.
    """
    comp = {c.borough: c for c in compositions}
    out = []
    for borough in sorted({p.borough for p in profiles}):
        members = [p for p in profiles if p.borough == borough]
        if borough not in comp:
            raise InputError(f"no composition profile for {borough}")
        c = comp[borough]
        ids = [p.district_id for p in members]
        out.append(project_outcome(
            c,
            annual_compost_tons(tonnage, ids, c.compost_fraction),
            sum(len(plans[i].selected) for i in ids if i in plans),
            sum(p.single_two_family_units for p in members),
            cap,
        ))
    return out
