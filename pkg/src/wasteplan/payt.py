"""Pay-As-You-Throw sticker pricing model.

Every price-dependent quantity is a function of ``p``, the sticker price
increase per 16-gallon refuse bag in dollars. Functions accept a float or a
numpy array of prices and return the same shape.

Two formula modes exist:

``consistent`` (default)
    Refuse cost uses collection + processing (``c_g + p_g``), government
    savings add sticker revenue to the expense reduction, and the diversion
    term of the utility uses the tons actually sorted at price ``p``.
``paper_literal``
    Refuse cost uses ``p_r + p_g``, government savings are computed as
    ``T_0 - (r - T)``, and the diversion term is the constant
    ``t_r + t_c``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InputError, NumericalError, ValidationError

CONSISTENT = "consistent"
PAPER_LITERAL = "paper_literal"
MODES = (CONSISTENT, PAPER_LITERAL)

CURVE_COLUMNS = ("p", "e", "d_c", "d_r", "d_g", "C", "R", "G", "E", "T", "r", "S_G", "S_S")


@dataclass(frozen=True)
class PaytConstants:
    """Unit costs and calibration constants of the Queens PAYT model.

    Costs are $/ton unless noted. ``e_ref`` is the sorting efficiency
    observed at the reference sticker price ``p_ref``.
    """

    c_c: float = 123.0
    c_r: float = 167.0
    c_g: float = 86.0
    p_c: float = 80.0
    p_r: float = 39.0
    p_g: float = 30.0
    e_g: float = 164.0
    L: float = 98_940.0
    b_f: float = 16_179_000.0
    b_b: float = 12.35
    e_0: float = 0.025
    p_c0: float = 602.0
    p_p0: float = 132.0
    w: float = 0.01
    e_base: float = 0.54
    e_ref: float = 0.89
    p_ref: float = 2.75
    enforcement_elasticity: float = 3.05

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v) or v < 0:
                raise InputError(f"constant {f.name} must be finite and >= 0, got {v}")
        if not (self.e_0 <= self.e_base <= self.e_ref <= 1.0):
            raise InputError("require 0 <= e_0 <= e_base <= e_ref <= 1")
        if self.w <= 0 or self.b_b <= 0 or self.p_ref <= 0:
            raise InputError("w, b_b and p_ref must be strictly positive")

    @property
    def efficiency_slope(self) -> float:
        return (self.e_ref - self.e_base) / self.p_ref

    @property
    def efficiency_kink(self) -> float:
        """Price at which sorting efficiency saturates at 1 (inf if never)."""
        if self.efficiency_slope == 0:
            return math.inf
        return (1.0 - self.e_base) / self.efficiency_slope


@dataclass(frozen=True)
class WasteTotals:
    """Tons per year of compostable, recyclable and refuse waste produced."""

    t_c: float
    t_r: float
    t_g: float

    def __post_init__(self):
        for name in ("t_c", "t_r", "t_g"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise InputError(f"{name} must be finite and >= 0, got {v}")

    @property
    def t_a(self) -> float:
        return self.t_c + self.t_r + self.t_g


@dataclass(frozen=True)
class PolicyWeights:
    """Utility per dollar of government savings (alpha), per dollar of
    societal savings (beta) and per ton diverted (mu), plus price bounds."""

    alpha: float
    beta: float
    mu: float
    p_min: float = 0.0
    p_max: float = 5.0

    def __post_init__(self):
        for name in ("alpha", "beta", "mu", "p_min", "p_max"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise InputError(f"{name} must be finite and >= 0, got {v}")
        if not self.p_min < self.p_max:
            raise InputError(f"need p_min < p_max, got [{self.p_min}, {self.p_max}]")

    def scaled(self, factor: float) -> "PolicyWeights":
        return replace(self, alpha=self.alpha * factor, beta=self.beta * factor, mu=self.mu * factor)


def _check_mode(mode):
    if mode not in MODES:
        raise InputError(f"mode must be one of {MODES}, got {mode!r}")


def _check_price(p):
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InputError("price must be finite")
    if np.any(arr < 0):
        raise InputError(f"price must be >= 0, got {p}")
    return arr


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def efficiency(p, k: PaytConstants = PaytConstants()):
    """Sorting efficiency at sticker price ``p``: linear from ``e_base``,
    clamped at 1."""
    arr = _check_price(p)
    return _out(np.minimum(1.0, k.e_base + k.efficiency_slope * arr))


def sorted_tonnages(p, t: WasteTotals, k: PaytConstants = PaytConstants()):
    """Tons sorted into compost, recycling and refuse at price ``p``.

    Refuse is the remainder, so the three always sum to ``t.t_a``.
    """
    e = np.asarray(efficiency(p, k))
    d_c = e * t.t_c
    d_r = e * t.t_r
    d_g = t.t_a - d_c - d_r
    return _out(d_c), _out(d_r), _out(d_g)


def diverted_tons(p, t: WasteTotals, k: PaytConstants = PaytConstants()):
    d_c, d_r, _ = sorted_tonnages(p, t, k)
    return _out(np.asarray(d_c) + np.asarray(d_r))


def compost_cost(d_c, k: PaytConstants = PaytConstants()):
    return _out((k.c_c + k.p_c) * np.asarray(d_c, dtype=float))


def recycle_cost(d_r, k: PaytConstants = PaytConstants()):
    return _out((k.c_r + k.p_r) * np.asarray(d_r, dtype=float))


def refuse_unit_cost(k: PaytConstants = PaytConstants(), mode: str = CONSISTENT) -> float:
    """Per-ton cost of refuse kept within local landfill capacity."""
    _check_mode(mode)
    return k.c_g + k.p_g if mode == CONSISTENT else k.p_r + k.p_g


def refuse_cost(d_g, k: PaytConstants = PaytConstants(), mode: str = CONSISTENT):
    """Refuse disposal cost; tons beyond landfill capacity ``L`` also pay
    the export cost ``e_g``."""
    u = refuse_unit_cost(k, mode)
    d = np.asarray(d_g, dtype=float)
    over = np.maximum(d - k.L, 0.0)
    return _out(u * d + k.e_g * over)


def enforcement_cost(p, k: PaytConstants = PaytConstants()):
    arr = _check_price(p)
    return _out(k.b_f * k.enforcement_elasticity * arr / k.b_b)


def expense_components(p, t: WasteTotals, k: PaytConstants = PaytConstants(), mode: str = CONSISTENT):
    """Return ``(C, R, G, E)`` at price ``p``."""
    d_c, d_r, d_g = sorted_tonnages(p, t, k)
    return (
        compost_cost(d_c, k),
        recycle_cost(d_r, k),
        refuse_cost(d_g, k, mode),
        enforcement_cost(p, k),
    )


def total_expense(p, t: WasteTotals, k: PaytConstants = PaytConstants(), mode: str = CONSISTENT):
    C, R, G, E = expense_components(p, t, k, mode)
    return _out(np.asarray(C) + np.asarray(R) + np.asarray(G) + np.asarray(E))


def baseline_compost_cost(t: WasteTotals, k: PaytConstants = PaytConstants()) -> float:
    """Current compost spend: current efficiency at current unit costs."""
    return k.e_0 * t.t_c * (k.p_c0 + k.p_p0)


def baseline_expense(t: WasteTotals, k: PaytConstants = PaytConstants(), mode: str = CONSISTENT) -> float:
    """Total current (pre-program) disposal expense.

    Recycling and refuse are priced as in the model at ``p = 0``; compost
    uses the current efficiency ``e_0`` and the current unit costs.
    """
    _, R, G, E = expense_components(0.0, t, k, mode)
    return baseline_compost_cost(t, k) + R + G + E


def revenue(p, t: WasteTotals, k: PaytConstants = PaytConstants()):
    """Sticker revenue: price times the number of refuse bags bought."""
    arr = _check_price(p)
    _, _, d_g = sorted_tonnages(arr, t, k)
    return _out(arr * np.asarray(d_g) / k.w)


def societal_savings(p, t: WasteTotals, k: PaytConstants = PaytConstants(), mode: str = CONSISTENT):
    return _out(baseline_expense(t, k, mode) - np.asarray(total_expense(p, t, k, mode)))


def gov_savings(p, t: WasteTotals, k: PaytConstants = PaytConstants(), mode: str = CONSISTENT):
    T0 = baseline_expense(t, k, mode)
    T = np.asarray(total_expense(p, t, k, mode))
    r = np.asarray(revenue(p, t, k))
    if mode == CONSISTENT:
        return _out(T0 - T + r)
    return _out(T0 - (r - T))


def utility(p, weights: PolicyWeights, t: WasteTotals, k: PaytConstants = PaytConstants(), mode: str = CONSISTENT):
    """Weighted objective over government savings, societal savings and
    diverted tons."""
    _check_mode(mode)
    s_g = np.asarray(gov_savings(p, t, k, mode))
    s_s = np.asarray(societal_savings(p, t, k, mode))
    if mode == CONSISTENT:
        div = np.asarray(diverted_tons(p, t, k))
    else:
        div = np.full_like(s_g, t.t_r + t.t_c)
    return _out(weights.alpha * s_g + weights.beta * s_s + weights.mu * div)


def elicit_weights(A: float, B: float, p_min: float = 0.0, p_max: float = 5.0) -> PolicyWeights:
    """Map the two elicitation answers to utility weights.

    Args:
        A: Most the government would spend to divert one ton ($/ton).
        B: Most the government would spend to raise resident wealth by $1.

    Returns:
        ``PolicyWeights(alpha=1, beta=B / (1 - B), mu=A)``.
    """
    if not (math.isfinite(A) and A >= 0):
        raise InputError(f"A must be finite and >= 0, got {A}")
    if not (math.isfinite(B) and 0 <= B < 1):
        raise InputError(f"B must satisfy 0 <= B < 1, got {B}")
    return PolicyWeights(alpha=1.0, beta=B / (1.0 - B), mu=float(A), p_min=p_min, p_max=p_max)


def breakpoints(t: WasteTotals, k: PaytConstants = PaytConstants()):
    """Prices where the model changes slope: the efficiency saturation
    price and the price at which refuse falls to landfill capacity."""
    pts = []
    kink = k.efficiency_kink
    if math.isfinite(kink):
        pts.append(kink)
    sortable = t.t_c + t.t_r
    if sortable > 0 and k.efficiency_slope > 0:
        e_cross = (t.t_a - k.L) / sortable
        if k.e_base <= e_cross <= 1.0:
            pts.append((e_cross - k.e_base) / k.efficiency_slope)
    return sorted(pts)


@dataclass(frozen=True)
class OptimizationResult:
    p_star: float
    utility: float
    diagnostics: dict


def _evaluate(p, weights, t, k, mode):
    with np.errstate(over="ignore", invalid="ignore"):
        u = np.asarray(utility(p, weights, t, k, mode))
    if not np.all(np.isfinite(u)):
        bad = np.atleast_1d(p)[~np.isfinite(np.atleast_1d(u))][0]
        raise NumericalError(f"objective is not finite at p={bad}")
    return u


def optimize_price(
    weights: PolicyWeights,
    t: WasteTotals,
    k: PaytConstants = PaytConstants(),
    mode: str = CONSISTENT,
    step: float = 0.005,
) -> OptimizationResult:
    """Global maximizer of the utility over ``[p_min, p_max]``.

    The objective is piecewise quadratic between at most two breakpoints,
    so a dense grid locates the best cell, a ternary search refines it, and
    the breakpoints and bounds are compared exactly. Among equal values the
    smallest price wins.
    """
    if not 0 < step <= 0.005:
        raise InputError("grid step must be in (0, 0.005]")
    lo, hi = weights.p_min, weights.p_max
    n = int(math.ceil((hi - lo) / step)) + 1
    grid = np.linspace(lo, hi, n)
    values = _evaluate(grid, weights, t, k, mode)
    i = int(np.argmax(values))

    a, b = grid[max(i - 1, 0)], grid[min(i + 1, n - 1)]
    f = lambda x: float(_evaluate(x, weights, t, k, mode))  # noqa: E731
    for _ in range(100):
        if b - a < 1e-10:
            break
        m1 = a + (b - a) / 3
        m2 = b - (b - a) / 3
        if f(m1) < f(m2):
            a = m1
        else:
            b = m2
    refined = 0.5 * (a + b)

    exact = [lo, hi] + [bp for bp in breakpoints(t, k) if lo <= bp <= hi]
    # a refinement that converged onto a bound or kink is that point
    near = [c for c in exact if abs(c - refined) < 1e-9]
    if near:
        refined = near[0]
    candidates = [float(grid[i]), refined] + exact
    scored = sorted((-f(c), c) for c in candidates)
    best_u = -scored[0][0]
    # ties within rounding resolve to the smallest price
    tol = 1e-12 * max(1.0, abs(best_u))
    p_star = min(c for neg_u, c in scored if -neg_u >= best_u - tol)
    u_star = f(p_star)
    diagnostics = {
        "grid_points": n,
        "grid_best_p": float(grid[i]),
        "refined_p": refined,
        "breakpoints": breakpoints(t, k),
        "at_bound": p_star in (lo, hi),
        "efficiency": efficiency(p_star, k),
        "mode": mode,
    }
    return OptimizationResult(p_star=p_star, utility=u_star, diagnostics=diagnostics)


def sweep_ab(A_grid, B_grid, t: WasteTotals, k: PaytConstants = PaytConstants(), mode: str = CONSISTENT,
             p_min: float = 0.0, p_max: float = 5.0) -> np.ndarray:
    """Optimal price for every (A, B) pair; rows follow ``A_grid``."""
    A_grid = list(A_grid)
    B_grid = list(B_grid)
    if not A_grid or not B_grid:
        raise InputError("A and B grids must be non-empty")
    out = np.empty((len(A_grid), len(B_grid)))
    for i, A in enumerate(A_grid):
        for j, B in enumerate(B_grid):
            w = elicit_weights(A, B, p_min, p_max)
            out[i, j] = optimize_price(w, t, k, mode).p_star
    return out


def curve(p_grid, t: WasteTotals, k: PaytConstants = PaytConstants(), mode: str = CONSISTENT) -> dict:
    """Tabulate every model quantity over ``p_grid``.

    Returns a dict of equal-length arrays keyed by ``CURVE_COLUMNS``.
    """
    p = _check_price(np.atleast_1d(np.asarray(p_grid, dtype=float)))
    d_c, d_r, d_g = sorted_tonnages(p, t, k)
    C, R, G, E = expense_components(p, t, k, mode)
    T0 = baseline_expense(t, k, mode)
    T = C + R + G + E
    r = revenue(p, t, k)
    S_S = T0 - T
    S_G = T0 - T + r if mode == CONSISTENT else T0 - (r - T)
    cols = dict(p=p, e=efficiency(p, k), d_c=d_c, d_r=d_r, d_g=d_g, C=C, R=R, G=G, E=E, T=T, r=r, S_G=S_G, S_S=S_S)
    return {name: np.asarray(cols[name], dtype=float) for name in CURVE_COLUMNS}


def load_scenario(path) -> tuple[WasteTotals, PaytConstants]:
    """Read a scenario JSON file.

    The file holds ``{"totals": {"t_c", "t_r", "t_g"}, "constants": {...}}``;
    ``constants`` is optional and overrides individual defaults.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc.msg}", path=path, line=exc.lineno) from exc
    if not isinstance(doc, dict) or "totals" not in doc:
        raise ValidationError("scenario needs a 'totals' object", path=path)
    known = {f.name for f in fields(PaytConstants)}
    overrides = doc.get("constants", {}) or {}
    unknown = set(overrides) - known
    if unknown:
        raise ValidationError(f"unknown constants: {sorted(unknown)}", path=path)
    try:
        totals = WasteTotals(**{key: float(doc["totals"][key]) for key in ("t_c", "t_r", "t_g")})
        consts = PaytConstants(**{key: float(v) for key, v in overrides.items()})
    except KeyError as exc:
        raise ValidationError(f"missing total {exc.args[0]!r}", path=path) from exc
    except (TypeError, ValueError) as exc:
        raise ValidationError(str(exc), path=path) from exc
    return totals, consts


def queens_scenario() -> tuple[WasteTotals, PaytConstants]:
    """The bundled Queens single/two-family scenario."""
    ref = resources.files("wasteplan") / "data" / "queens_scenario.json"
    with resources.as_file(ref) as path:
        return load_scenario(path)


def scenario_dict(t: WasteTotals, k: PaytConstants) -> dict:
    return {"totals": asdict(t), "constants": asdict(k)}
