"""Command-line front end.

    wasteplan validate --hydrants H.csv --districts D.geojson [...]
    wasteplan dcap --district 109 --count 100 [--curve]
    wasteplan payt optimize --A 50 --B 0.20

Every flag may also be given in a JSON file passed with ``--config``
(keys are the long flag names with dashes replaced by underscores); flags on
the command line win. Outputs go to ``--output-dir``, defaulting to
``$WASTEPLAN_OUTPUT_DIR`` or ``./wasteplan-out``.

Exit codes: 0 success, 1 usage error, 2 data validation error,
3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dcap, ingest, payt
from .errors import InputError, NumericalError, ValidationError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
OUTPUT_ENV = "WASTEPLAN_OUTPUT_DIR"

log = logging.getLogger("wasteplan")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    hydrants: Path | None = None
    districts: Path | None = None
    lots: Path | None = None
    tonnage: Path | None = None
    composition: Path | None = None
    zones: Path | None = None
    scenario: Path | None = None
    global_seed: int = 0
    mode: str = payt.CONSISTENT
    output_dir: Path = Path("wasteplan-out")

    def check_files(self):
        for name in ("hydrants", "districts", "lots", "tonnage", "composition", "zones", "scenario"):
            p = getattr(self, name)
            if p is not None and not p.is_file():
                raise ValidationError(f"{name} file not found", path=p)


# -- output helpers ---------------------------------------------------------


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else ""
    return str(v)


def write_csv(path: Path, columns, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue(), encoding="utf-8")


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, Path):
        return str(v)
    return v


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_json(obj), encoding="utf-8")


def parse_grid(text) -> list[float]:
    """``"50"``, ``"10,20,30"`` or ``"start:stop:count"`` (inclusive linspace)."""
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        return [float(x) for x in text]
    s = str(text).strip()
    try:
        if ":" in s:
            start, stop, count = s.split(":")
            n = int(count)
            if n < 1:
                raise ValueError
            return [float(x) for x in np.linspace(float(start), float(stop), n)]
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}; use a number, a comma list or start:stop:count") from None


# -- argument parsing -------------------------------------------------------


def _common(parser):
    g = parser.add_argument_group("run configuration")
    g.add_argument("--config", type=Path, help="JSON file with flag values")
    for name in ("hydrants", "districts", "lots", "tonnage", "composition", "zones", "scenario"):
        g.add_argument(f"--{name}", type=Path)
    g.add_argument("--seed", type=int, dest="global_seed")
    g.add_argument("--paper-literal", action="store_true", default=None,
                   help="use every formula exactly as printed instead of the consistent forms")
    g.add_argument("--output-dir", type=Path)
    g.add_argument("-v", "--verbose", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wasteplan", description="Dumpster placement and PAYT pricing analysis.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p_val = sub.add_parser("validate", help="load and check every supplied input file")
    _common(p_val)

    p_dcap = sub.add_parser("dcap", help="size and place dumpsters")
    _common(p_dcap)
    which = p_dcap.add_mutually_exclusive_group()
    which.add_argument("--district")
    which.add_argument("--all", action="store_true", default=None)
    p_dcap.add_argument("--target-frequency", type=float)
    p_dcap.add_argument("--count", type=int)
    p_dcap.add_argument("--curve", action="store_true", default=None,
                        help="also tabulate mean distance and frequency against site count")
    p_dcap.add_argument("--curve-step", type=int)
    p_dcap.add_argument("--curve-max", type=int)
    p_dcap.add_argument("--literal-ratio", action="store_true", default=None,
                        help="count 3+-unit lots instead of units in the throughput ratio")

    p_payt = sub.add_parser("payt", help="sticker-price analysis")
    payt_sub = p_payt.add_subparsers(dest="payt_command", parser_class=_Parser)
    for name, helptext in (("curve", "tabulate the model over a price grid"),
                           ("optimize", "optimal price for one (A, B) answer pair"),
                           ("sweep", "optimal price over an A x B grid")):
        sp = payt_sub.add_parser(name, help=helptext)
        _common(sp)
        sp.add_argument("--A")
        sp.add_argument("--B")
        sp.add_argument("--p-min", type=float)
        sp.add_argument("--p-max", type=float)
        sp.add_argument("--step", type=float)
    return parser


DEFAULTS = {
    "global_seed": 0,
    "paper_literal": False,
    "verbose": False,
    "all": False,
    "curve": False,
    "literal_ratio": False,
    "target_frequency": 10.0,
    "curve_step": 1,
    "p_min": 0.0,
    "p_max": 5.0,
}


def _merge_config(args) -> dict:
    """Command-line values over config-file values over defaults."""
    cli_vals = {k: v for k, v in vars(args).items() if v is not None}
    file_vals = {}
    if args.config is not None:
        try:
            file_vals = json.loads(args.config.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ValidationError("config file not found", path=args.config) from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc.msg}", path=args.config, line=exc.lineno) from None
        if not isinstance(file_vals, dict):
            raise ValidationError("config must be a JSON object", path=args.config)
        file_vals = {k.replace("-", "_"): v for k, v in file_vals.items()}
        if "seed" in file_vals:
            file_vals["global_seed"] = file_vals.pop("seed")
        base = args.config.parent
        for key in ("hydrants", "districts", "lots", "tonnage", "composition", "zones", "scenario", "output_dir"):
            if key in file_vals and file_vals[key] is not None:
                file_vals[key] = base / file_vals[key]
    merged = dict(DEFAULTS)
    merged.update(file_vals)
    merged.update(cli_vals)
    return merged


def _run_config(opts) -> RunConfig:
    out = opts.get("output_dir") or os.environ.get(OUTPUT_ENV) or "wasteplan-out"
    kw = {name: Path(opts[name]) if opts.get(name) is not None else None
          for name in ("hydrants", "districts", "lots", "tonnage", "composition", "zones", "scenario")}
    return RunConfig(global_seed=int(opts["global_seed"]),
                     mode=payt.PAPER_LITERAL if opts["paper_literal"] else payt.CONSISTENT,
                     output_dir=Path(out), **kw)


# -- commands ---------------------------------------------------------------


def cmd_validate(cfg: RunConfig, opts: dict, out=None) -> int:
    out = out or sys.stdout
    cfg.check_files()
    report = {}
    hydrants = ingest.load_hydrants(cfg.hydrants) if cfg.hydrants else None
    lots = ingest.load_lots(cfg.lots) if cfg.lots else None
    districts = ingest.load_districts(cfg.districts) if cfg.districts else None
    zones = ingest.load_zones(cfg.zones) if cfg.zones else None
    tonnage = ingest.load_tonnage(cfg.tonnage) if cfg.tonnage else None
    comp = ingest.load_composition(cfg.composition) if cfg.composition else None
    if cfg.scenario:
        payt.load_scenario(cfg.scenario)
        report["scenario"] = "ok"
    if hydrants is not None:
        report["hydrants"] = len(hydrants)
    if lots is not None:
        report["lots"] = len(lots)
    if districts is not None:
        report["districts"] = len(districts)
    if zones is not None:
        report["zones"] = len(zones)
    if tonnage is not None:
        report["tonnage_records"] = sum(len(v) for v in tonnage.values())
    if comp is not None:
        report["composition_profiles"] = len(comp)
    warnings = []
    if districts is not None:
        for kind, recs in (("hydrants", hydrants), ("lots", lots)):
            if recs is None:
                continue
            a = ingest.assign_to_districts(recs, districts)
            report[f"{kind}_assigned"] = a.n_assigned
            report[f"{kind}_excluded"] = len(a.excluded)
            if a.ambiguous:
                raise ValidationError(f"{len(a.ambiguous)} {kind} fall in overlapping districts, e.g. "
                                      f"{a.ambiguous[0][0].id} in {a.ambiguous[0][1]}")
            if a.excluded:
                ids = ", ".join(r.id for r in a.excluded[:10])
                warnings.append(f"{len(a.excluded)} {kind} outside every district: {ids}")
    for line in warnings:
        print(f"warning: {line}", file=sys.stderr)
    for key in sorted(report):
        print(f"{key}: {report[key]}", file=out)
    return EXIT_OK


def _load_planning_inputs(cfg: RunConfig):
    for name in ("hydrants", "districts", "lots", "tonnage"):
        if getattr(cfg, name) is None:
            raise UsageError(f"dcap needs --{name}")
    cfg.check_files()
    hydrants = ingest.load_hydrants(cfg.hydrants)
    lots = ingest.load_lots(cfg.lots)
    districts = ingest.load_districts(cfg.districts)
    tonnage = ingest.load_tonnage(cfg.tonnage)
    zones = ingest.load_zones(cfg.zones) if cfg.zones else None
    comp = ingest.load_composition(cfg.composition) if cfg.composition else None
    profiles = ingest.build_district_profiles(hydrants, lots, districts, tonnage, zones)
    return profiles, tonnage, comp


PLAN_COLUMNS = ("district_id", "rank", "hydrant_id", "lat", "lon")
CURVE_DCAP_COLUMNS = ("N", "mean_min_distance", "required_frequency")
OUTCOME_COLUMNS = ("borough", "current_efficiency", "proj_efficiency", "delta_tons_diverted", "dumpsters",
                   "bin_units", "cost_dumpsters", "cost_bins", "cost_total", "cost_per_ton")


def cmd_dcap(cfg: RunConfig, opts: dict, out=None) -> int:
    out = out or sys.stdout
    if not opts.get("district") and not opts["all"]:
        raise UsageError("choose --district <id> or --all")
    profiles, tonnage, comp = _load_planning_inputs(cfg)
    cap = dcap.CapacityParams(target_collections_per_month=float(opts["target_frequency"]))
    by_id = {p.district_id: p for p in profiles}
    if opts.get("district"):
        did = str(opts["district"])
        if did not in by_id:
            raise UsageError(f"unknown district {did!r}; known ids: {', '.join(sorted(by_id))}")
        targets = [by_id[did]]
    else:
        targets = [p for p in profiles if p.service_hydrants and p.U_total_units > 0]
    count = opts.get("count")
    literal = bool(opts["literal_ratio"])
    outdir = cfg.output_dir / "dcap"
    plans, summary = {}, []
    for prof in targets:
        plan = dcap.plan_district(prof, cfg.global_seed, cap, count=count, literal_ratio=literal)
        plans[prof.district_id] = plan
        T = dcap.estimate_throughput(prof, literal)
        n_service = len(prof.service_hydrants)
        ratio = dcap.hydrant_load_ratio(T, n_service)
        rows = [
            {"district_id": prof.district_id, "rank": i + 1, "hydrant_id": h.id,
             "lat": h.location.lat, "lon": h.location.lon}
            for i, h in enumerate(plan.selected)
        ]
        write_csv(outdir / f"plan_{prof.district_id}.csv", PLAN_COLUMNS, rows)
        metrics = {
            "district_id": prof.district_id,
            "borough": prof.borough,
            "seed": plan.seed,
            "throughput_tons_per_month": T,
            "service_hydrants": n_service,
            "hydrant_load_ratio": ratio,
            "fill_rate_all_hydrants": dcap.fill_rate(ratio, cap),
            "dumpsters": len(plan.selected),
            "required_collection_frequency": plan.required_collection_frequency,
            "meets_target": plan.required_collection_frequency <= cap.target_collections_per_month,
            "mean_min_distance_m": plan.mean_min_distance,
            "lots_3plus": len(prof.lots_3plus),
        }
        write_json(outdir / f"metrics_{prof.district_id}.json", metrics)
        summary.append(metrics)
        if opts["curve"]:
            n_max = min(int(opts.get("curve_max") or n_service), n_service)
            step = max(1, int(opts["curve_step"]))
            ns = list(range(1, n_max + 1, step))
            if ns[-1] != n_max:
                ns.append(n_max)
            rows = dcap.placement_curve(prof.service_hydrants, prof.lots_3plus, T, ns, plan.seed, cap)
            write_csv(outdir / f"curve_{prof.district_id}.csv", CURVE_DCAP_COLUMNS, rows)
    if comp is not None:
        outcomes = dcap.project_dcap_outcome([by_id[d] for d in plans], comp, tonnage, plans, cap)
        write_csv(outdir / "borough_outcomes.csv", OUTCOME_COLUMNS,
                  [{c: getattr(o, c) if getattr(o, c) is not None else math.nan for c in OUTCOME_COLUMNS}
                   for o in outcomes])
    for m in summary:
        print(f"{m['district_id']}: {m['dumpsters']} dumpsters, "
              f"{m['required_collection_frequency']:.2f} collections/month, "
              f"mean distance {m['mean_min_distance_m']:.1f} m", file=out)
    return EXIT_OK


def _scenario(cfg: RunConfig):
    if cfg.scenario is None:
        return payt.queens_scenario()
    cfg.check_files()
    return payt.load_scenario(cfg.scenario)


def _price_bounds(opts):
    p_min, p_max = float(opts["p_min"]), float(opts["p_max"])
    if not 0 <= p_min < p_max:
        raise UsageError(f"need 0 <= --p-min < --p-max, got {p_min}, {p_max}")
    return p_min, p_max


def _single(opts, key):
    if opts.get(key) is None:
        raise UsageError(f"--{key} is required")
    vals = parse_grid(opts[key])
    if len(vals) != 1:
        raise UsageError(f"--{key} takes a single value here")
    return vals[0]


def cmd_payt(cfg: RunConfig, opts: dict, out=None) -> int:
    out = out or sys.stdout
    sub = opts.get("payt_command")
    if sub is None:
        raise UsageError("choose one of: curve, optimize, sweep")
    totals, consts = _scenario(cfg)
    p_min, p_max = _price_bounds(opts)
    outdir = cfg.output_dir / "payt"
    if sub == "curve":
        step = float(opts.get("step") or 0.01)
        if step <= 0:
            raise UsageError("--step must be > 0")
        n = int(round((p_max - p_min) / step)) + 1
        grid = np.linspace(p_min, p_max, n)
        table = payt.curve(grid, totals, consts, cfg.mode)
        rows = [{c: table[c][i] for c in payt.CURVE_COLUMNS} for i in range(n)]
        write_csv(outdir / "curve.csv", payt.CURVE_COLUMNS, rows)
        print(f"wrote {n} rows to {outdir / 'curve.csv'}", file=out)
    elif sub == "optimize":
        weights = payt.elicit_weights(_single(opts, "A"), _single(opts, "B"), p_min, p_max)
        res = payt.optimize_price(weights, totals, consts, cfg.mode, step=min(0.005, float(opts.get("step") or 0.005)))
        p = res.p_star
        result = {
            "A": weights.mu,
            "B": _single(opts, "B"),
            "weights": {"alpha": weights.alpha, "beta": weights.beta, "mu": weights.mu},
            "mode": cfg.mode,
            "p_star": p,
            "utility": res.utility,
            "efficiency": payt.efficiency(p, consts),
            "gov_savings": payt.gov_savings(p, totals, consts, cfg.mode),
            "societal_savings": payt.societal_savings(p, totals, consts, cfg.mode),
            "diverted_tons": payt.diverted_tons(p, totals, consts),
            "revenue": payt.revenue(p, totals, consts),
            "at_bound": res.diagnostics["at_bound"],
        }
        write_json(outdir / "optimize.json", result)
        out.write(dump_json(result))
    elif sub == "sweep":
        A_grid = parse_grid(opts.get("A") or "0:200:20")
        B_grid = parse_grid(opts.get("B") or "0:0.95:20")
        for B in B_grid:
            if not 0 <= B < 1:
                raise InputError(f"B must satisfy 0 <= B < 1, got {B}")
        mat = payt.sweep_ab(A_grid, B_grid, totals, consts, cfg.mode, p_min, p_max)
        rows = [{"A": A, "B": B, "p_star": mat[i, j]}
                for i, A in enumerate(A_grid) for j, B in enumerate(B_grid)]
        write_csv(outdir / "sweep.csv", ("A", "B", "p_star"), rows)
        print(f"wrote {len(rows)} cells to {outdir / 'sweep.csv'}", file=out)
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "dcap": cmd_dcap, "payt": cmd_payt}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        opts = _merge_config(args)
        logging.basicConfig(level=logging.INFO if opts["verbose"] else logging.WARNING,
                            format="%(levelname)s: %(message)s")
        cfg = _run_config(opts)
        return COMMANDS[args.command](cfg, opts)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
