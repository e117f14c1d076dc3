"""Load the shipped cases, look around, and apply failure scenarios.

The data model is small: buses carry aggregated generation bounds and
demand, lines carry a series admittance, a thermal limit, an angle limit and
a failure probability. Everything is per-unit on the system MVA base, and
everything is immutable -- a scenario produces a new operational view, never
a mutation.
"""

from importlib.resources import files

from nkinterdict import apply_scenario, from_json, parse_matpower, parse_probabilities

data = files("nkinterdict.data")
net = parse_matpower(data.joinpath("case24_rts96.m").read_text())
net = parse_probabilities(data.joinpath("prob_rts96_24.csv").read_text(), net)

print(f"{len(net.buses)} buses, {len(net.lines)} lines, base {net.base_mva} MVA")
print(f"total demand {net.total_pd:.3f} pu = {net.total_pd * net.base_mva:.0f} MW")

print("\nfive most failure-prone lines:")
for line in sorted(net.lines, key=lambda l: -l.pr)[:5]:
    print(f"  line {line.id:2d} ({line.from_bus}-{line.to_bus}): pr {line.pr:.2f}, "
          f"limit {line.t * net.base_mva:.0f} MVA, b {line.b:.1f} pu")

# A scenario is just a set of exactly k line ids; its probability is the
# product of the line probabilities, carried in log form.
s = net.scenario([19, 23])   # the two lines feeding bus 14
print(f"\nscenario {s.interdicted}: log Pr = {s.log_prob:.4f}")

sub = apply_scenario(net, s)
print(f"operational lines after interdiction: {len(sub.operational)} of {len(net.lines)}")

# The native JSON format round-trips exactly.
again = from_json(net.to_json())
assert again == net
print("\nJSON round-trip: exact")
