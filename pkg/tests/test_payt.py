import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wasteplan import payt
from wasteplan.errors import InputError, NumericalError, ValidationError
from wasteplan.payt import (
    CONSISTENT,
    PAPER_LITERAL,
    PaytConstants,
    PolicyWeights,
    WasteTotals,
    baseline_compost_cost,
    baseline_expense,
    compost_cost,
    curve,
    efficiency,
    elicit_weights,
    enforcement_cost,
    gov_savings,
    optimize_price,
    recycle_cost,
    refuse_cost,
    revenue,
    societal_savings,
    sorted_tonnages,
    sweep_ab,
    total_expense,
    utility,
)

K = PaytConstants()
QUEENS = WasteTotals(19_162, 209_420, 78_451)
KINK = 0.46 * 2.75 / 0.35


def test_efficiency_anchors():
    assert efficiency(0) == 0.54
    assert efficiency(2.75) == pytest.approx(0.89, abs=1e-15)
    assert K.efficiency_kink == pytest.approx(3.6142857142857, rel=1e-12)
    assert efficiency(KINK) == pytest.approx(1.0)
    assert efficiency(3.7) == 1.0 and efficiency(50) == 1.0


def test_efficiency_negative_price():
    with pytest.raises(InputError):
        efficiency(-0.01)


def test_sorted_tonnages_examples():
    t = WasteTotals(100, 100, 100)
    d_c, d_r, d_g = sorted_tonnages(0, t)
    assert (d_c, d_r) == pytest.approx((54, 54)) and d_g == pytest.approx(192)
    assert sorted_tonnages(4.0, t)[2] == 100


def test_disposal_costs():
    assert compost_cost(0) == 0 and recycle_cost(0) == 0
    assert compost_cost(1000) == 203_000
    assert recycle_cost(1000) == 206_000


def test_refuse_cost_modes():
    u = 116
    assert refuse_cost(K.L) == u * K.L
    assert refuse_cost(K.L + 1000) == pytest.approx(u * K.L + 280_000)
    assert refuse_cost(1000, mode=PAPER_LITERAL) == 69_000
    assert refuse_cost(K.L + 1, mode=PAPER_LITERAL) == pytest.approx(69 * K.L + 233)


def test_refuse_cost_bad_mode():
    with pytest.raises(InputError):
        refuse_cost(10, mode="other")


def test_enforcement():
    assert enforcement_cost(0) == 0
    assert enforcement_cost(12.35) == pytest.approx(49_345_950, rel=1e-12)
    assert enforcement_cost(2.90) == pytest.approx(49_345_950 * 2.90 / 12.35, rel=1e-12)
    assert round(enforcement_cost(2.90), -2) == 11_587_300


def spreadsheet_T0_components(t):
    """Cell-by-cell arithmetic with the constant table typed in by hand."""
    d_c = 0.54 * t.t_c
    d_r = 0.54 * t.t_r
    d_g = t.t_c + t.t_r + t.t_g - d_c - d_r
    C = (123 + 80) * d_c
    R = (167 + 39) * d_r
    G = (86 + 30) * 98_940 + (86 + 30 + 164) * (d_g - 98_940) if d_g > 98_940 else (86 + 30) * d_g
    return C, R, G, 0.0


def test_queens_components_at_zero_to_the_cent():
    got = payt.expense_components(0.0, QUEENS)
    for a, b in zip(got, spreadsheet_T0_components(QUEENS)):
        assert round(a, 2) == round(b, 2)


def test_baseline_calibration():
    C0 = baseline_compost_cost(QUEENS)
    assert C0 == pytest.approx(0.025 * 19_162 * 734)
    assert abs(C0 - 351_628) / 351_628 < 0.005
    T0 = baseline_expense(QUEENS)
    assert abs(T0 - 58_829_000) / 58_829_000 < 0.01
    _, R, G, _ = spreadsheet_T0_components(QUEENS)
    assert T0 == pytest.approx(C0 + R + G, rel=1e-12)


def test_baseline_compost_example():
    assert baseline_compost_cost(WasteTotals(19_158, 0, 0)) == pytest.approx(351_549.3)


def test_revenue_and_savings_identities():
    assert revenue(0, QUEENS) == 0
    assert gov_savings(0, QUEENS) == societal_savings(0, QUEENS)
    p = np.linspace(0, 5, 51)
    np.testing.assert_allclose(gov_savings(p, QUEENS) - societal_savings(p, QUEENS), revenue(p, QUEENS), rtol=1e-9)


def test_literal_gov_savings_formula():
    p = 1.7
    T0 = baseline_expense(QUEENS, mode=PAPER_LITERAL)
    want = T0 - (revenue(p, QUEENS) - total_expense(p, QUEENS, mode=PAPER_LITERAL))
    assert gov_savings(p, QUEENS, mode=PAPER_LITERAL) == pytest.approx(want, rel=1e-12)


def test_gov_savings_shape_on_fixture():
    p = np.round(np.arange(0, 5.0001, 0.001), 3)
    sg = gov_savings(p, QUEENS)
    below = p < KINK
    p_max = p[below][np.argmax(sg[below])]
    assert abs(p_max - 2.84) <= 0.15
    past = p > KINK + 0.01
    slope = np.diff(sg[past]) / 0.001
    assert np.allclose(slope, slope[0], rtol=1e-6) and slope[0] > 0


def test_utility_weight_collapse():
    w = PolicyWeights(alpha=2.0, beta=0.0, mu=0.0)
    p = np.linspace(0, 5, 11)
    np.testing.assert_allclose(utility(p, w, QUEENS), 2.0 * gov_savings(p, QUEENS))


def test_utility_diversion_only():
    w = PolicyWeights(0.0, 0.0, 1.0)
    res = optimize_price(w, QUEENS)
    assert res.p_star >= KINK - 1e-9
    assert res.p_star == pytest.approx(KINK, abs=1e-9)
    p = np.linspace(0, 5, 21)
    u_lit = utility(p, w, QUEENS, mode=PAPER_LITERAL)
    assert np.all(u_lit == u_lit[0])


def test_elicitation():
    w = elicit_weights(50, 0.20)
    assert (w.alpha, w.beta, w.mu) == (1.0, pytest.approx(0.25, abs=1e-15), 50.0)
    assert (w.p_min, w.p_max) == (0.0, 5.0)
    assert elicit_weights(1, 0.5).beta == 1.0
    assert elicit_weights(1, 0).beta == 0.0
    with pytest.raises(InputError):
        elicit_weights(10, 1.0)
    with pytest.raises(InputError):
        elicit_weights(-1, 0.1)


def test_optimize_extremes():
    assert optimize_price(PolicyWeights(1, 1e6, 0), QUEENS).p_star == 0
    assert optimize_price(PolicyWeights(1, 0, 1e6), QUEENS).p_star == 5.0


def test_optimize_policy_example():
    res = optimize_price(elicit_weights(50, 0.20), QUEENS)
    assert abs(res.p_star - 2.90) <= 0.15
    assert abs(res.diagnostics["efficiency"] - 0.91) <= 0.02


def test_optimize_rejects_coarse_grid():
    with pytest.raises(InputError):
        optimize_price(PolicyWeights(1, 0, 0), QUEENS, step=0.01)


def test_optimize_nonfinite_objective():
    w = PolicyWeights(1e308, 1e308, 0)
    with pytest.raises(NumericalError, match="p="):
        optimize_price(w, QUEENS)


def test_sweep_single_cell_and_monotone():
    one = sweep_ab([50], [0.2], QUEENS)
    assert one.shape == (1, 1)
    assert one[0, 0] == optimize_price(elicit_weights(50, 0.2), QUEENS).p_star
    A = [0, 25, 50, 100, 200, 400]
    B = [0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 0.95]
    mat = sweep_ab(A, B, QUEENS)
    assert np.all(np.diff(mat, axis=0) >= -1e-9)
    assert np.all(np.diff(mat, axis=1) <= 1e-9)


def test_sweep_empty_grid():
    with pytest.raises(InputError):
        sweep_ab([], [0.1], QUEENS)


def test_curve_columns_and_zero_row():
    table = curve(np.linspace(0, 5, 501), QUEENS)
    assert tuple(table) == payt.CURVE_COLUMNS
    assert all(len(v) == 501 for v in table.values())
    assert table["e"][0] == 0.54
    assert table["T"][0] == pytest.approx(total_expense(0, QUEENS))
    assert table["S_S"][0] == pytest.approx(baseline_expense(QUEENS) - total_expense(0, QUEENS))
    assert table["r"][0] == 0
    div = table["d_c"] + table["d_r"]
    past = table["p"] > KINK
    assert np.all(div[past] == div[past][0])


def test_scenario_roundtrip(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"totals": {"t_c": 1, "t_r": 2, "t_g": 3}, "constants": {"b_f": 100}}))
    t, k = payt.load_scenario(p)
    assert t == WasteTotals(1, 2, 3) and k.b_f == 100 and k.c_c == 123


@pytest.mark.parametrize("doc", [{"totals": {"t_c": 1}}, {"nothing": 1},
                                 {"totals": {"t_c": 1, "t_r": 1, "t_g": 1}, "constants": {"zzz": 1}}])
def test_scenario_invalid(tmp_path, doc):
    p = tmp_path / "s.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(ValidationError):
        payt.load_scenario(p)


# -- properties -------------------------------------------------------------

tons = st.floats(0, 1e6, allow_nan=False)
totals = st.builds(WasteTotals, tons, tons, tons)
prices = st.floats(0, 10, allow_nan=False)
constants = st.builds(
    PaytConstants,
    c_g=st.floats(0, 300), p_g=st.floats(0, 300), e_g=st.floats(0, 400), L=st.floats(0, 5e5),
    b_f=st.floats(0, 5e7), e_base=st.floats(0.3, 0.6), e_ref=st.floats(0.6, 1.0), p_ref=st.floats(0.5, 5),
)


@settings(max_examples=300)
@given(prices, totals, constants)
def test_conservation(p, t, k):
    d_c, d_r, d_g = sorted_tonnages(p, t, k)
    assert d_c + d_r + d_g == pytest.approx(t.t_a, rel=1e-12, abs=1e-9)


@settings(max_examples=200)
@given(totals, constants, st.sampled_from(payt.MODES))
def test_continuity_at_breakpoints(t, k, mode):
    for bp in payt.breakpoints(t, k):
        if bp > 20:
            continue
        eps = 1e-9 * max(1.0, bp)
        for f in (total_expense, societal_savings, gov_savings):
            lo, mid, hi = f(max(bp - eps, 0), t, k, mode), f(bp, t, k, mode), f(bp + eps, t, k, mode)
            scale = max(1.0, abs(mid), abs(lo), abs(hi))
            assert abs(lo - mid) <= 1e-6 * scale and abs(hi - mid) <= 1e-6 * scale


@settings(max_examples=200)
@given(totals, constants)
def test_monotonicity(t, k):
    p = np.linspace(0, 8, 161)
    e = efficiency(p, k)
    d_c, d_r, d_g = sorted_tonnages(p, t, k)
    E = enforcement_cost(p, k)
    assert np.all(np.diff(e) >= 0)
    assert np.all(np.diff(d_g) <= 1e-9 * max(1, t.t_a))
    assert np.all(np.diff(d_c + d_r) >= -1e-9 * max(1, t.t_a))
    np.testing.assert_allclose(np.diff(E), np.diff(E)[0], rtol=1e-9, atol=1e-6)


@settings(max_examples=100)
@given(totals, constants)
def test_saturation_past_kink(t, k):
    kink = k.efficiency_kink
    if kink > 8:
        return
    p = np.array([kink + 0.5, kink + 1.0, kink + 1.5])
    _, _, d_g = sorted_tonnages(p, t, k)
    assert np.allclose(d_g, t.t_g, rtol=1e-12, atol=1e-6)
    sg = gov_savings(p, t, k)
    slope = np.diff(sg) / 0.5
    expected = t.t_g / k.w - k.b_f * k.enforcement_elasticity / k.b_b
    assert np.allclose(slope, expected, rtol=1e-6, atol=1e-3 * max(1.0, abs(expected)))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 5), st.floats(0, 5), st.floats(0, 500), st.floats(1e-3, 1e3))
def test_argmax_scale_invariant(alpha, beta, mu, factor):
    w = PolicyWeights(alpha, beta, mu)
    a = optimize_price(w, QUEENS).p_star
    b = optimize_price(w.scaled(factor), QUEENS).p_star
    assert abs(a - b) <= 0.005
