"""Loaders for hydrant, lot, district, zoning, tonnage and composition data.

All tabular inputs are UTF-8 CSV with a header row. Geometry inputs are
GeoJSON FeatureCollections. Loaders fail on the first bad record with a
:class:`~wasteplan.errors.ValidationError` naming file, line and column.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InputError, ValidationError
from .geo import INSIDE, OUTSIDE, GeoPoint, Polygon, locate_any, point_in_any

log = logging.getLogger(__name__)

BOROUGHS = ("Bronx", "Brooklyn", "Manhattan", "Queens", "Staten Island")
SINGLE_TWO_FAMILY_ZONES = frozenset({"R1", "R2", "R3-1", "R3A", "R3X", "R4A", "R5A"})

HYDRANT_COLUMNS = ("id", "latitude", "longitude")
LOT_COLUMNS = ("lot_id", "latitude", "longitude", "residential_units", "zone_code")
TONNAGE_COLUMNS = ("district_id", "month", "refuse_tons", "recycling_tons", "organics_tons")
COMPOSITION_COLUMNS = ("borough", "compost_fraction", "recycling_fraction", "cur_compost_eff", "cur_recycling_eff")

_MONTH = re.compile(r"^(\d{4})-(0[1-9]|1[0-2])$")


def normalize_borough(name: str) -> str:
    key = " ".join(str(name).split()).lower()
    for b in BOROUGHS:
        if b.lower() == key:
            return b
    raise InputError(f"unknown borough {name!r}; expected one of {BOROUGHS}")


def is_single_two_family(zone_code: str) -> bool:
    """True if the zoning district allows only single/two-family housing."""
    return zone_code.strip().upper() in SINGLE_TWO_FAMILY_ZONES


@dataclass(frozen=True)
class Hydrant:
    id: str
    location: GeoPoint
    district_id: str | None = None
    in_dumpster_area: bool = False


@dataclass(frozen=True)
class Lot:
    id: str
    location: GeoPoint
    residential_units: int
    zone_code: str
    district_id: str | None = None

    @property
    def payt_serviced(self) -> bool:
        return is_single_two_family(self.zone_code)


@dataclass(frozen=True)
class District:
    district_id: str
    borough: str
    parts: tuple[Polygon, ...]

    def contains(self, p: GeoPoint) -> bool:
        return point_in_any(p, self.parts)

    def locate(self, p: GeoPoint) -> int:
        return locate_any(p, self.parts)


@dataclass(frozen=True)
class Zone:
    zone_code: str
    parts: tuple[Polygon, ...]

    def contains(self, p: GeoPoint) -> bool:
        return point_in_any(p, self.parts)


@dataclass(frozen=True)
class TonnageRecord:
    month: str
    refuse_tons: float | None
    recycling_tons: float | None
    organics_tons: float | None


@dataclass(frozen=True)
class CompositionProfile:
    borough: str
    compost_fraction: float
    recycling_fraction: float
    current_compost_efficiency: float
    current_recycling_efficiency: float

    def __post_init__(self):
        for name in ("compost_fraction", "recycling_fraction", "current_compost_efficiency",
                     "current_recycling_efficiency"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InputError(f"{name} must lie in [0, 1], got {v}")
        if self.compost_fraction + self.recycling_fraction > 1.0 + 1e-12:
            raise InputError("compost_fraction + recycling_fraction exceeds 1")


@dataclass(frozen=True)
class DistrictProfile:
    """Everything the dumpster model needs about one community district.

    ``hydrants`` holds every hydrant assigned to the district; the ones in
    the dumpster service area are exposed by :attr:`service_hydrants`.
    """

    district_id: str
    borough: str
    U_total_units: int
    U_units_on_3plus_lots: int
    W_peak_monthly_refuse: float
    hydrants: tuple[Hydrant, ...] = ()
    lots_3plus: tuple[Lot, ...] = ()
    lot_count_3plus: int = 0
    single_two_family_units: int = 0

    def __post_init__(self):
        if self.U_units_on_3plus_lots > self.U_total_units:
            raise InputError(f"district {self.district_id}: units on 3+ lots exceed total units")
        if self.W_peak_monthly_refuse < 0:
            raise InputError(f"district {self.district_id}: negative peak refuse")

    @property
    def service_hydrants(self) -> tuple[Hydrant, ...]:
        return tuple(h for h in self.hydrants if h.in_dumpster_area)


# -- CSV plumbing -----------------------------------------------------------


def _rows(path, columns: Sequence[str]):
    """Yield ``(line_number, row_dict)`` after checking the header."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise ValidationError("file is empty", path=path, line=1)
        missing = [c for c in columns if c not in header]
        if missing:
            raise ValidationError(f"header missing columns {missing}", path=path, line=1)
        for row in reader:
            if None in row:
                raise ValidationError("too many fields", path=path, line=reader.line_num)
            if any(row[c] is None for c in columns):
                raise ValidationError("too few fields", path=path, line=reader.line_num)
            yield reader.line_num, row


def _float(row, col, path, line, allow_empty=False):
    raw = row[col].strip()
    if raw == "" and allow_empty:
        return None
    try:
        v = float(raw)
    except ValueError:
        raise ValidationError(f"not a number: {raw!r}", path=path, line=line, column=col) from None
    if v != v or v in (float("inf"), float("-inf")):
        raise ValidationError(f"non-finite value {raw!r}", path=path, line=line, column=col)
    return v


def _point(row, path, line) -> GeoPoint:
    lat = _float(row, "latitude", path, line)
    lon = _float(row, "longitude", path, line)
    if not -90 <= lat <= 90:
        raise ValidationError(f"latitude {lat} out of range [-90, 90]", path=path, line=line, column="latitude")
    if not -180 <= lon <= 180:
        raise ValidationError(f"longitude {lon} out of range [-180, 180]", path=path, line=line, column="longitude")
    return GeoPoint(lat, lon)


def _text(row, col, path, line) -> str:
    v = row[col].strip()
    if not v:
        raise ValidationError("empty value", path=path, line=line, column=col)
    return v


def load_hydrants(path) -> list[Hydrant]:
    """Read ``id,latitude,longitude`` rows."""
    out, seen = [], {}
    for line, row in _rows(path, HYDRANT_COLUMNS):
        hid = _text(row, "id", path, line)
        if hid in seen:
            raise ValidationError(f"duplicate hydrant id {hid!r} (first on line {seen[hid]})",
                                  path=path, line=line, column="id")
        seen[hid] = line
        out.append(Hydrant(hid, _point(row, path, line)))
    log.info("loaded %d hydrants from %s", len(out), path)
    return out


def load_lots(path) -> list[Lot]:
    """Read ``lot_id,latitude,longitude,residential_units,zone_code`` rows."""
    out, seen = [], {}
    for line, row in _rows(path, LOT_COLUMNS):
        lid = _text(row, "lot_id", path, line)
        if lid in seen:
            raise ValidationError(f"duplicate lot id {lid!r} (first on line {seen[lid]})",
                                  path=path, line=line, column="lot_id")
        seen[lid] = line
        raw = row["residential_units"].strip()
        try:
            units = int(raw)
        except ValueError:
            raise ValidationError(f"not an integer: {raw!r}", path=path, line=line,
                                  column="residential_units") from None
        if units < 0:
            raise ValidationError("residential_units must be >= 0", path=path, line=line,
                                  column="residential_units")
        zone = _text(row, "zone_code", path, line).upper()
        out.append(Lot(lid, _point(row, path, line), units, zone))
    log.info("loaded %d lots from %s", len(out), path)
    return out


def load_tonnage(path) -> dict[str, list[TonnageRecord]]:
    """Monthly collection tonnage per district, sorted by month.

    Empty tonnage cells are kept as ``None`` and skipped downstream.
    """
    series: dict[str, dict[str, TonnageRecord]] = {}
    for line, row in _rows(path, TONNAGE_COLUMNS):
        did = _text(row, "district_id", path, line)
        month = _text(row, "month", path, line)
        if not _MONTH.match(month):
            raise ValidationError(f"month {month!r} is not YYYY-MM", path=path, line=line, column="month")
        vals = {}
        for col in ("refuse_tons", "recycling_tons", "organics_tons"):
            v = _float(row, col, path, line, allow_empty=True)
            if v is not None and v < 0:
                raise ValidationError("tonnage must be >= 0", path=path, line=line, column=col)
            vals[col] = v
        by_month = series.setdefault(did, {})
        if month in by_month:
            raise ValidationError(f"duplicate month {month} for district {did}", path=path, line=line)
        by_month[month] = TonnageRecord(month, **vals)
    return {did: [m[k] for k in sorted(m)] for did, m in sorted(series.items())}


def load_composition(path) -> list[CompositionProfile]:
    out, seen = [], set()
    for line, row in _rows(path, COMPOSITION_COLUMNS):
        try:
            borough = normalize_borough(row["borough"])
        except InputError as exc:
            raise ValidationError(str(exc), path=path, line=line, column="borough") from None
        if borough in seen:
            raise ValidationError(f"duplicate borough {borough!r}", path=path, line=line, column="borough")
        seen.add(borough)
        vals = [_float(row, c, path, line) for c in COMPOSITION_COLUMNS[1:]]
        try:
            out.append(CompositionProfile(borough, *vals))
        except InputError as exc:
            raise ValidationError(str(exc), path=path, line=line) from None
    return out


# -- GeoJSON ---------------------------------------------------------------


def _geometry_parts(geom, path, where) -> tuple[Polygon, ...]:
    if not isinstance(geom, dict) or "type" not in geom:
        raise ValidationError(f"{where}: missing geometry", path=path)
    gtype = geom["type"]
    coords = geom.get("coordinates")
    if gtype == "Polygon":
        polys = [coords]
    elif gtype == "MultiPolygon":
        polys = coords
    else:
        raise ValidationError(f"{where}: geometry type {gtype!r} is not Polygon/MultiPolygon", path=path)
    parts = []
    for k, rings in enumerate(polys or []):
        try:
            poly = Polygon.from_lonlat(rings[0], rings[1:])
            poly.validate()
        except (InputError, TypeError, ValueError, IndexError) as exc:
            raise ValidationError(f"{where}, part {k}: invalid ring ({exc})", path=path) from None
        parts.append(poly)
    if not parts:
        raise ValidationError(f"{where}: empty geometry", path=path)
    return tuple(parts)


def _features(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc.msg}", path=path, line=exc.lineno) from None
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ValidationError("expected a GeoJSON FeatureCollection", path=path)
    return path, doc.get("features", [])


def load_districts(path) -> list[District]:
    """Community districts from a FeatureCollection whose features carry
    ``district_id`` and ``borough`` properties."""
    path, feats = _features(path)
    out, seen = [], set()
    for i, feat in enumerate(feats):
        props = feat.get("properties") or {}
        where = f"feature {i}"
        for key in ("district_id", "borough"):
            if props.get(key) in (None, ""):
                raise ValidationError(f"{where}: missing property {key!r}", path=path)
        did = str(props["district_id"])
        if did in seen:
            raise ValidationError(f"{where}: duplicate district_id {did!r}", path=path)
        seen.add(did)
        try:
            borough = normalize_borough(props["borough"])
        except InputError as exc:
            raise ValidationError(f"{where}: {exc}", path=path) from None
        out.append(District(did, borough, _geometry_parts(feat.get("geometry"), path, where)))
    return out


def load_zones(path) -> list[Zone]:
    """Zoning districts from a FeatureCollection with a ``zone_code`` property."""
    path, feats = _features(path)
    out = []
    for i, feat in enumerate(feats):
        props = feat.get("properties") or {}
        where = f"feature {i}"
        code = props.get("zone_code")
        if code in (None, ""):
            raise ValidationError(f"{where}: missing property 'zone_code'", path=path)
        out.append(Zone(str(code).strip().upper(), _geometry_parts(feat.get("geometry"), path, where)))
    return out


# -- assignment -------------------------------------------------------------


@dataclass
class Assignment:
    """Result of assigning located records to districts."""

    assigned: dict[str, list] = field(default_factory=dict)
    excluded: list = field(default_factory=list)
    ambiguous: list = field(default_factory=list)

    @property
    def n_assigned(self) -> int:
        return sum(len(v) for v in self.assigned.values())


def assign_to_districts(records: Iterable, districts: Sequence[District]) -> Assignment:
    """Group records with a ``location`` by their containing district.

    Records outside every district are excluded; records strictly inside
    more than one are collected in ``ambiguous``. A record lying only on
    district boundaries (a shared edge) goes to the smallest district id.
    """
    result = Assignment(assigned={d.district_id: [] for d in districts})
    for rec in records:
        rel = [(d.district_id, d.locate(rec.location)) for d in districts]
        interior = [did for did, r in rel if r == INSIDE]
        edge = sorted(did for did, r in rel if r != OUTSIDE)
        if len(interior) > 1:
            result.ambiguous.append((rec, interior))
        elif interior:
            result.assigned[interior[0]].append(replace(rec, district_id=interior[0]))
        elif edge:
            result.assigned[edge[0]].append(replace(rec, district_id=edge[0]))
        else:
            result.excluded.append(rec)
    return result


def _raise_ambiguous(kind, ambiguous):
    listing = ", ".join(f"{rec.id} in {hits}" for rec, hits in ambiguous[:20])
    more = "" if len(ambiguous) <= 20 else f" (+{len(ambiguous) - 20} more)"
    raise ValidationError(f"{kind} contained in overlapping districts: {listing}{more}")


def peak_monthly_refuse(series: Sequence[TonnageRecord]) -> float:
    vals = [r.refuse_tons for r in series if r.refuse_tons is not None]
    return max(vals) if vals else 0.0


def build_district_profiles(
    hydrants: Sequence[Hydrant],
    lots: Sequence[Lot],
    districts: Sequence[District],
    tonnage: dict[str, list[TonnageRecord]],
    zones: Sequence[Zone] | None = None,
) -> list[DistrictProfile]:
    """Assemble one :class:`DistrictProfile` per district, sorted by id.

    A hydrant is in the dumpster service area unless it falls inside a
    single/two-family zoning polygon. Without ``zones`` every assigned
    hydrant is treated as in the service area.
    """
    h_assign = assign_to_districts(hydrants, districts)
    l_assign = assign_to_districts(lots, districts)
    if h_assign.ambiguous:
        _raise_ambiguous("hydrants", h_assign.ambiguous)
    if l_assign.ambiguous:
        _raise_ambiguous("lots", l_assign.ambiguous)
    if h_assign.excluded:
        log.warning("%d hydrants outside every district were excluded", len(h_assign.excluded))
    if l_assign.excluded:
        log.warning("%d lots outside every district (parks, port facilities) were excluded",
                    len(l_assign.excluded))
    payt_zones = [z for z in zones or () if is_single_two_family(z.zone_code)]
    if zones is None:
        log.warning("no zoning polygons supplied; all hydrants treated as in the dumpster service area")

    profiles = []
    for d in sorted(districts, key=lambda d: d.district_id):
        hs = tuple(
            replace(h, in_dumpster_area=not any(z.contains(h.location) for z in payt_zones))
            for h in sorted(h_assign.assigned[d.district_id], key=lambda h: h.id)
        )
        ls = sorted(l_assign.assigned[d.district_id], key=lambda lot: lot.id)
        big = tuple(lot for lot in ls if lot.residential_units >= 3)
        series = tonnage.get(d.district_id, [])
        if not series:
            log.warning("district %s has no tonnage records; peak refuse set to 0", d.district_id)
        profiles.append(DistrictProfile(
            district_id=d.district_id,
            borough=d.borough,
            U_total_units=sum(lot.residential_units for lot in ls),
            U_units_on_3plus_lots=sum(lot.residential_units for lot in big),
            W_peak_monthly_refuse=peak_monthly_refuse(series),
            hydrants=hs,
            lots_3plus=big,
            lot_count_3plus=len(big),
            single_two_family_units=sum(lot.residential_units for lot in ls if lot.payt_serviced),
        ))
    return profiles
