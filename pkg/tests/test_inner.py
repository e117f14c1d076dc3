import itertools
import math

import numpy as np
import pytest

from nkinterdict.conic import solve_conic
from nkinterdict.errors import UsageError
from nkinterdict.inner import (DC, NF, SOC, InnerOptions, build_dc, build_soc,
                               cut_coefficients, soc_tightness, solve_inner)
from nkinterdict.network import Bus, Line, Network, apply_scenario

from conftest import two_bus
from reference_simplex import solve_lp


def triangle(t12=0.4, t13=0.6, t23=0.6):
    """Gen 1 pu at bus 1, loads 0.5 at buses 2 and 3, equal susceptances."""
    return Network(base_mva=100.0, buses=(
        Bus(id=1, v_lo=0.95, v_hi=1.05, pg_hi=1.0, qg_lo=-1.0, qg_hi=1.0),
        Bus(id=2, v_lo=0.95, v_hi=1.05, pd=0.5),
        Bus(id=3, v_lo=0.95, v_hi=1.05, pd=0.5),
    ), lines=(
        Line(id=1, from_bus=1, to_bus=2, g=0.0, b=-10.0, t=t12),
        Line(id=2, from_bus=1, to_bus=3, g=0.0, b=-10.0, t=t13),
        Line(id=3, from_bus=2, to_bus=3, g=0.0, b=-10.0, t=t23),
    ))


def reference_dc_lp(net, interdicted=()):
    """DC load-shed LP in pure nonnegative standard form for the dense simplex.

    Independent of the package's builder: variables are split/ shifted by
    hand here (theta = tp - tm, f = u - t, pg = lo + upg, ell in [0,1]).
    """
    buses = list(net.buses)
    lines = [l for l in net.lines if l.id not in set(interdicted)]
    bpos = {b.id: i for i, b in enumerate(buses)}
    nb, nl = len(buses), len(lines)
    nvar = 2 * nb + nl + nl + nb + nb  # tp, tm, u_f, s_f, ell, s_ell
    gen = [b for b in buses if max(b.pg_hi, 0.0) > min(b.pg_lo, 0.0)]
    gpos = {b.id: i for i, b in enumerate(gen)}
    nvar += 2 * len(gen)
    A = []
    bvec = []
    c = np.zeros(nvar)
    o_tp, o_tm = 0, nb
    o_uf, o_sf = 2 * nb, 2 * nb + nl
    o_el, o_sl = 2 * nb + 2 * nl, 2 * nb + 2 * nl + nb
    o_pg = 2 * nb + 2 * nl + 2 * nb

    for b in buses:
        row = np.zeros(nvar)
        lo = min(b.pg_lo, 0.0)
        rhs = b.pd - lo
        if b.id in gpos:
            row[o_pg + 2 * gpos[b.id]] = 1.0
        if b.pd > 0:
            row[o_el + bpos[b.id]] = b.pd
        for e, l in enumerate(lines):
            if l.from_bus == b.id:
                row[o_uf + e] -= 1.0
                rhs -= l.t
            if l.to_bus == b.id:
                row[o_uf + e] += 1.0
                rhs += l.t
        A.append(row)
        bvec.append(rhs)
    for e, l in enumerate(lines):
        row = np.zeros(nvar)
        row[o_uf + e] = 1.0
        row[o_tp + bpos[l.from_bus]] = l.b
        row[o_tm + bpos[l.from_bus]] = -l.b
        row[o_tp + bpos[l.to_bus]] = -l.b
        row[o_tm + bpos[l.to_bus]] = l.b
        A.append(row)
        bvec.append(l.t)
        row = np.zeros(nvar)
        row[o_uf + e] = 1.0
        row[o_sf + e] = 1.0
        A.append(row)
        bvec.append(2 * l.t)
    for b in buses:
        if b.pd > 0:
            row = np.zeros(nvar)
            row[o_el + bpos[b.id]] = 1.0
            row[o_sl + bpos[b.id]] = 1.0
            A.append(row)
            bvec.append(1.0)
            c[o_el + bpos[b.id]] = b.pd
        else:
            row = np.zeros(nvar)
            row[o_el + bpos[b.id]] = 1.0
            A.append(row)
            bvec.append(0.0)
    for b in gen:
        row = np.zeros(nvar)
        row[o_pg + 2 * gpos[b.id]] = 1.0
        row[o_pg + 2 * gpos[b.id] + 1] = 1.0
        A.append(row)
        bvec.append(max(b.pg_hi, 0.0) - min(b.pg_lo, 0.0))
    res = solve_lp(c, np.array(A), np.array(bvec))
    assert res.status == "optimal"
    return res.obj


def test_two_bus_dc_base(net2):
    sol = solve_inner(net2, net2.scenario([]), DC)
    assert sol.z == pytest.approx(0.0, abs=1e-8)
    assert sol.p_from[1] == pytest.approx(1.0, abs=1e-7)


def test_two_bus_islanded():
    net = two_bus()
    for f in (NF, DC, SOC):
        sol = solve_inner(net, net.scenario([1]), f)
        assert sol.z == pytest.approx(1.0, abs=1e-7), f


def test_two_bus_soc_lossless_zero_shed():
    net = two_bus(qd=0.0, t=1.3)  # generous bounds
    sol = solve_inner(net, net.scenario([]), SOC)
    assert sol.z == pytest.approx(0.0, abs=1e-7)


def test_triangle_dc_exceeds_nf():
    # with a binding limit toward bus 2, the angle coupling forces extra shed
    # in the DC model that the flow relaxation avoids
    net = triangle(t12=0.2, t13=0.45, t23=0.1)
    z_nf = solve_inner(net, net.scenario([]), NF).z
    z_dc = solve_inner(net, net.scenario([]), DC).z
    z_nf_ref = 0.5 + 0.5 - min(1.0, 0.2 + 0.45)  # supply bounded by the two source lines
    assert z_nf == pytest.approx(z_nf_ref, abs=1e-8)
    ref = reference_dc_lp(net)
    assert z_dc == pytest.approx(ref, abs=1e-7)
    assert z_dc >= z_nf - 1e-9


def test_dc_matches_reference_lp_under_scenarios(case14):
    for lines in ([], [1], [3, 9], [11, 15]):
        z = solve_inner(case14, case14.scenario(lines), DC).z
        ref = reference_dc_lp(case14, lines)
        assert z == pytest.approx(ref, abs=1e-6), lines


def test_cut_coefficients_rules(net2):
    sub = apply_scenario(net2, net2.scenario([]))
    sol = solve_inner(net2, net2.scenario([]), NF)
    cut = cut_coefficients(sol, sub)
    assert cut.intercept == pytest.approx(0.0)
    assert cut.alpha[1] == pytest.approx(1.0)

    s = net2.scenario([1])
    cut2 = cut_coefficients(solve_inner(net2, s, NF), apply_scenario(net2, s))
    assert cut2.alpha[1] == 0.0  # interdicted lines get zero


def test_cut_coefficients_dc_triangle():
    net = triangle()
    sub = apply_scenario(net, net.scenario([]))
    sol = solve_inner(net, net.scenario([]), DC)
    cut = cut_coefficients(sol, sub)
    for line in net.lines:
        assert cut.alpha[line.id] == pytest.approx(
            max(abs(sol.p_from[line.id]), abs(sol.p_to[line.id])))
        assert cut.alpha[line.id] >= 0.0
        assert cut.alpha[line.id] <= line.t + 1e-7


def test_soc_relaxation_bounds_ac_point():
    # an AC-feasible operating point evaluated by hand upper-bounds the SOC shed:
    # 2-bus lossless with V1 = V2 = 1, angle from p = -b sin(theta); serving the
    # full load is AC-feasible, so z_SOC <= 0 + tolerance
    net = two_bus(qd=0.0, t=1.3)
    z = solve_inner(net, net.scenario([]), SOC).z
    assert z <= 1e-7


def test_soc_tightness_lossless(net2):
    sol = solve_inner(net2, net2.scenario([]), SOC)
    rep = soc_tightness(sol)
    assert rep.max_gap is not None
    assert rep.max_gap >= -1e-7
    assert rep.max_gap == pytest.approx(0.0, abs=1e-6)  # radial net: cone tight
    assert rep.gaps[1] >= -1e-7


def test_soc_tightness_empty_and_usage(net2):
    sol = solve_inner(net2, net2.scenario([1]), SOC)
    rep = soc_tightness(sol)
    assert rep.gaps == {} and rep.max_gap is None
    with pytest.raises(UsageError):
        soc_tightness(solve_inner(net2, net2.scenario([]), DC))


def test_relaxation_ordering_small_nets():
    nets = [two_bus(), triangle(), triangle(t12=0.2, t13=0.45, t23=0.1)]
    for net in nets:
        line_ids = [l.id for l in net.lines]
        for k in range(0, min(2, len(line_ids)) + 1):
            for combo in itertools.combinations(line_ids, k):
                s = net.scenario(combo)
                z_nf = solve_inner(net, s, NF).z
                z_dc = solve_inner(net, s, DC).z
                assert z_nf <= z_dc + 1e-7, (combo, z_nf, z_dc)


def test_balance_residuals(case24):
    s = case24.scenario([19, 23])
    for f in (DC, SOC):
        sol = solve_inner(case24, s, f)
        for b in case24.buses:
            inflow = sum(sol.p_from[l.id] for l in case24.lines
                         if l.from_bus == b.id and l.id in sol.p_from)
            inflow += sum(sol.p_to[l.id] for l in case24.lines
                          if l.to_bus == b.id and l.id in sol.p_to)
            pg = sol.pg.get(b.id, min(b.pg_lo, 0.0))
            want = pg - (1 - sol.shed[b.id]) * b.pd
            assert abs(want - inflow) <= 1e-6, (f, b.id)


def test_determinism(case24):
    s = case24.scenario([1, 7, 12])
    for f in (NF, DC, SOC):
        z1 = solve_inner(case24, s, f).z
        z2 = solve_inner(case24, s, f).z
        assert z1 == z2 or abs(z1 - z2) <= 1e-9


def test_constant_power_factor_structural(case24):
    sol = solve_inner(case24, case24.scenario([19, 23]), SOC)
    # reactive shed at bus i equals ell_i * qd_i by construction
    for b in case24.buses:
        if b.pd > 0 and b.qd != 0:
            q_in = sum(sol.q_from[l.id] for l in case24.lines
                       if l.from_bus == b.id and l.id in sol.q_from)
            q_in += sum(sol.q_to[l.id] for l in case24.lines
                        if l.to_bus == b.id and l.id in sol.q_to)
            qg = sol.qg.get(b.id, b.qg_lo)
            served_q = qg - q_in
            assert served_q == pytest.approx((1 - sol.shed[b.id]) * b.qd, abs=2e-6)


def test_respect_pg_min_flag():
    net = Network(base_mva=100.0, buses=(
        Bus(id=1, v_lo=0.95, v_hi=1.05, pg_lo=0.5, pg_hi=1.0, qg_lo=-1.0, qg_hi=1.0),
        Bus(id=2, v_lo=0.95, v_hi=1.05, pd=1.0),
    ), lines=(Line(id=1, from_bus=1, to_bus=2, g=0.0, b=-10.0, t=1.0),))
    # default clamps the minimum: islanding the generator is fine
    sol = solve_inner(net, net.scenario([1]), DC)
    assert sol.z == pytest.approx(1.0, abs=1e-7)
    # respecting a strictly positive minimum makes the islanded bus infeasible
    from nkinterdict.errors import SolverError

    with pytest.raises(SolverError):
        solve_inner(net, net.scenario([1]), DC, options=InnerOptions(respect_pg_min=True))


def test_build_functions_return_problems():
    net2 = two_bus(t=1.3)  # headroom for the reactive series consumption
    sub = apply_scenario(net2, net2.scenario([]))
    for build in (build_dc, build_soc):
        prob = build(sub)
        sol = solve_conic(prob)
        assert sol.optimal
        assert sol.obj == pytest.approx(0.0, abs=1e-6)
