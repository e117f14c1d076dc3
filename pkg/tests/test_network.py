import math

import pytest

from nkinterdict.errors import DomainError, ParseError, RefError, UsageError
from nkinterdict.network import (Bus, Line, Network, apply_scenario, from_json,
                                 parse_matpower, parse_probabilities)

from conftest import data_text, two_bus

TWO_BUS_CASE = """
function mpc = case2
mpc.baseMVA = 100;
mpc.bus = [
    1 2 0   0 0 0 1 1 0 138 1 1.05 0.95;
    2 1 100 0 0 0 1 1 0 138 1 1.05 0.95;
];
mpc.gen = [
    1 0 0 0 0 1 100 1 100 0;
];
mpc.branch = [
    1 2 0 0.1 0 100 0 0 0 0 1 -360 360;  % x = 0.1 -> b = -10 pu
];
"""


def test_two_bus_case_parses_to_expected_pu():
    net = parse_matpower(TWO_BUS_CASE)
    assert len(net.lines) == 1
    line = net.lines[0]
    assert line.g == 0.0
    assert line.b == pytest.approx(-10.0)
    assert line.t == pytest.approx(1.0)
    assert net.bus(2).pd == pytest.approx(1.0)
    assert net.bus(1).pg_hi == pytest.approx(1.0)


def test_ieee14_counts():
    net = parse_matpower(data_text("case14.m"))
    assert len(net.buses) == 14
    assert len(net.lines) == 20


def test_branch_with_unknown_bus_is_reference_error():
    bad = TWO_BUS_CASE.replace("1 2 0 0.1", "1 99 0 0.1")
    with pytest.raises(RefError):
        parse_matpower(bad)


def test_malformed_table_reports_line_number():
    bad = TWO_BUS_CASE.replace("1 0 0 0 0 1 100 1 100 0", "1 oops")
    with pytest.raises(ParseError) as exc:
        parse_matpower(bad)
    assert exc.value.line_no is not None


def test_out_of_service_branch_dropped():
    text = TWO_BUS_CASE.replace("0 0 1 -360 360", "0 0 0 -360 360")
    net = parse_matpower(text)
    assert len(net.lines) == 0
    with pytest.raises(RefError):
        net.line(1)


def test_rate_zero_replaced_by_total_demand():
    text = TWO_BUS_CASE.replace("0 0.1 0 100", "0 0.1 0 0")
    net = parse_matpower(text)
    assert net.lines[0].t == pytest.approx(1.0)  # total demand 1 pu


def test_admittance_identity():
    # g = r/(r^2+x^2), b = -x/(r^2+x^2) for every parsed line
    net = parse_matpower(data_text("case24_rts96.m"))
    raw = {}
    for ln in data_text("case24_rts96.m").splitlines():
        toks = ln.split()
        if len(toks) == 13 and toks[-1].rstrip(";") == "360":
            key = (int(toks[0]), int(toks[1]))
            raw.setdefault(key, []).append((float(toks[2]), float(toks[3])))
    seen = {}
    for line in net.lines:
        key = (line.from_bus, line.to_bus)
        r, x = raw[key][seen.get(key, 0)]
        seen[key] = seen.get(key, 0) + 1
        denom = r * r + x * x
        assert line.g == pytest.approx(r / denom)
        assert line.b == pytest.approx(-x / denom)
        assert line.g ** 2 + line.b ** 2 > 0


def test_json_round_trip(case24):
    text = case24.to_json()
    again = from_json(text)
    assert again == case24


def test_scenario_and_subnetwork(net2):
    s = net2.scenario([1])
    sub = apply_scenario(net2, s)
    assert sub.operational == ()
    assert s.log_prob == pytest.approx(math.log(0.5))
    # identity case
    s0 = net2.scenario([])
    sub0 = apply_scenario(net2, s0)
    assert len(sub0.operational) == len(net2.lines)
    # source network is not mutated
    assert len(net2.lines) == 1


def test_apply_scenario_triangle():
    from nkinterdict.network import Bus, Line

    net = Network(base_mva=100.0, buses=tuple(Bus(id=i) for i in (1, 2, 3)), lines=(
        Line(id=1, from_bus=1, to_bus=2, g=0.0, b=-1.0, t=1.0),
        Line(id=2, from_bus=1, to_bus=3, g=0.0, b=-1.0, t=1.0),
        Line(id=3, from_bus=2, to_bus=3, g=0.0, b=-1.0, t=1.0),
    ))
    sub = apply_scenario(net, net.scenario([1]))
    assert [l.id for l in sub.operational] == [2, 3]
    assert len(sub.operational) == len(net.lines) - 1


def test_apply_scenario_unknown_line(net2):
    from nkinterdict.network import Scenario

    with pytest.raises(RefError):
        apply_scenario(net2, Scenario(interdicted=(7,), log_prob=0.0))


def test_parse_probabilities_roundtrip(net2):
    net = parse_probabilities("from_bus,to_bus,circuit,probability\n1,2,1,0.35\n", net2)
    assert net.line(1).pr == pytest.approx(0.35)


def test_parse_probabilities_missing_line():
    net = parse_matpower(data_text("case14.m"))
    rows = data_text("prob_case14.csv").splitlines()
    with pytest.raises(RefError) as exc:
        parse_probabilities("\n".join(rows[:-1]) + "\n", net)
    assert "13" in str(exc.value) and "14" in str(exc.value)  # names the uncovered line


@pytest.mark.parametrize("prob", ["1.5", "0", "-0.2"])
def test_parse_probabilities_domain(net2, prob):
    with pytest.raises(DomainError):
        parse_probabilities(f"from_bus,to_bus,circuit,probability\n1,2,1,{prob}\n", net2)


def test_parse_probabilities_duplicate(net2):
    text = "from_bus,to_bus,circuit,probability\n1,2,1,0.3\n1,2,1,0.4\n"
    with pytest.raises(ParseError):
        parse_probabilities(text, net2)


def test_parallel_circuits_are_distinct():
    net = parse_matpower(data_text("case24_rts96.m"))
    pairs = {}
    for line in net.lines:
        pairs.setdefault((line.from_bus, line.to_bus), []).append(line.id)
    assert len(pairs[(15, 21)]) == 2
    a, b = pairs[(15, 21)]
    assert a != b
    net = parse_probabilities(data_text("prob_rts96_24.csv"), net)
    assert net.line(a).pr == net.line(b).pr == pytest.approx(0.41)


def test_bus_and_line_invariants():
    with pytest.raises(DomainError):
        Bus(id=1, v_lo=0.0, v_hi=1.0)
    with pytest.raises(DomainError):
        Line(id=1, from_bus=1, to_bus=2, g=0.0, b=-1.0, t=0.0)
    with pytest.raises(DomainError):
        Line(id=1, from_bus=1, to_bus=2, g=0.0, b=-1.0, t=1.0, theta_max=2.0)
    with pytest.raises(DomainError):
        Line(id=1, from_bus=1, to_bus=2, g=0.0, b=-1.0, t=1.0, pr=0.0)


def test_duplicate_scenario_lines_rejected(net2):
    with pytest.raises(UsageError):
        net2.scenario([1, 1])
