"""One failure scenario, three physics models.

The inner (defender) problem asks: after these lines fail, how little load
can the operator shed? Three answers, in increasing physical fidelity:

* NF  -- treat the grid as a capacitated flow network (max-flow; a relaxation
         of DC, always the smallest shed),
* DC  -- linearized power flow: flows follow angle differences,
* SOC -- second-order-cone relaxation of AC power flow: voltages, reactive
         power and losses enter the picture.

The scenario here islands bus 14 of the 24-bus reliability test system (its
194 MW of load has exactly two feeders), so all three models agree on the
islanded shed -- and differ in the flow pattern they use elsewhere.
"""

from importlib.resources import files

from nkinterdict import apply_scenario, parse_matpower, parse_probabilities
from nkinterdict import cut_coefficients, soc_tightness, solve_inner

data = files("nkinterdict.data")
net = parse_matpower(data.joinpath("case24_rts96.m").read_text())
net = parse_probabilities(data.joinpath("prob_rts96_24.csv").read_text(), net)

s = net.scenario([19, 23])     # 11-14 and 14-16: bus 14 goes dark
sub = apply_scenario(net, s)

for form in ("nf", "dc", "soc"):
    sol = solve_inner(net, s, form)
    shed_buses = {b: l for b, l in sol.shed.items() if l > 1e-6}
    print(f"{form:3s}: z = {sol.z * net.base_mva:7.2f} MW shed, "
          f"buses shedding: {sorted(shed_buses)}")

# Load-shed cut: how much worse can things get if MORE lines fail? The cut
# coefficients are the per-line flow magnitudes of this solution.
sol = solve_inner(net, s, "soc")
cut = cut_coefficients(sol, sub)
heavy = sorted(cut.alpha.items(), key=lambda kv: -kv[1])[:5]
print("\nlargest cut coefficients (pu):")
for lid, a in heavy:
    line = net.line(lid)
    print(f"  line {lid:2d} ({line.from_bus}-{line.to_bus}): alpha = {a:.4f}")

# How tight is the cone relaxation? Gaps near zero mean the SOC solution is
# (locally) AC-exact.
rep = soc_tightness(sol)
print(f"\nSOC tightness: max gap {rep.max_gap:.2e}, mean gap {rep.mean_gap:.2e}")
