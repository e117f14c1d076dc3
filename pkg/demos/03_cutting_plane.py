"""The full solver: which k failures hurt the most, probability-weighted?

The master problem proposes a scenario (binary line choices, a cardinality
constraint, and everything learned so far); the inner problem prices it;
three cuts per round teach the master better (a load-shed bound, a
do-not-repeat constraint, and a tangent of the log objective). The loop
certifies an epsilon-optimal scenario when the bounds meet.

On the 24-bus system with its reliability-derived failure probabilities the
k=2 answer is the double outage islanding bus 14: probability 0.1482, shed
194 MW, weighted objective 28.75 MW.
"""

import math
from importlib.resources import files

from nkinterdict import cutting_plane, parse_matpower, parse_probabilities

data = files("nkinterdict.data")
net = parse_matpower(data.joinpath("case24_rts96.m").read_text())
net = parse_probabilities(data.joinpath("prob_rts96_24.csv").read_text(), net)

rep = cutting_plane(net, k=2, formulation="soc", epsilon=0.01, case_name="rts96-24")

names = {l.id: f"{l.from_bus}-{l.to_bus}" for l in net.lines}
print(f"best scenario: {[names[l] for l in rep.best_scenario]}")
print(f"Pr = {math.exp(rep.log_prob):.4f}, shed = {rep.z * net.base_mva:.1f} MW, "
      f"weighted = {rep.weighted_mw:.2f} MW")
print(f"{rep.iterations} iterations, {rep.termination}, gap {rep.gap:.2%}, "
      f"{rep.wall_seconds:.1f} s")

print("\nbound history (plot-ready):")
print("iter,z_pu,f_lb,f_ub")
for t in rep.trace:
    print(f"{t.iteration},{t.z:.6f},{t.f_lb:.6f},{t.f_ub:.6f}")
