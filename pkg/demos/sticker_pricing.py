"""Bag-sticker pricing on the bundled Queens scenario.

Prints a few rows of the savings curve, the optimal price for one
decision-maker, and how that price moves with their answers.

    python3 demos/sticker_pricing.py
"""

from wasteplan import payt
totals, consts = payt.queens_scenario()
print(f"baseline expense T0 = ${payt.baseline_expense(totals, consts):,.0f}")

table = payt.curve([0, 1, 2, 2.84, 3, 3.6143, 4, 5], totals, consts)
print("\n   p     e    S_G ($M)   S_S ($M)   diverted (t)")
for i, p in enumerate(table["p"]):
    print(f"{p:5.2f} {table['e'][i]:5.3f} {table['S_G'][i] / 1e6:9.2f} {table['S_S'][i] / 1e6:10.2f} "
          f"{table['d_c'][i] + table['d_r'][i]:12,.0f}")

# willing to pay $50 to divert a ton, and 20 cents of savings per dollar of resident cost
w = payt.elicit_weights(50, 0.20)
res = payt.optimize_price(w, totals, consts)
print(f"\nA=50, B=0.20 -> alpha={w.alpha}, beta={w.beta:.2f}, mu={w.mu}")
print(f"optimal sticker price ${res.p_star:.2f}, sorting efficiency {res.diagnostics['efficiency']:.1%}")

A = [0, 50, 100, 200]
B = [0.0, 0.2, 0.5, 0.9]
grid = payt.sweep_ab(A, B, totals, consts)
print("\noptimal price by (A rows, B columns)")
print("      " + "".join(f"{b:>7.2f}" for b in B))
for a, row in zip(A, grid):
    print(f"{a:>5} " + "".join(f"{x:>7.2f}" for x in row))

# the printed formulas, for comparison
lit = payt.optimize_price(w, totals, consts, mode=payt.PAPER_LITERAL)
print(f"\nsame answers with the formulas as printed: ${lit.p_star:.2f}")
