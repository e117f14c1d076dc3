"""Inner (defender) problem: minimum load shed for a fixed failure scenario.

Three formulations of the post-contingency operating problem:

* ``NF``  - capacitated network flow (solved combinatorially via max-flow),
* ``DC``  - linearized power flow (B-theta), a linear program,
* ``SOC`` - second-order cone relaxation of AC power flow in the lifted
  voltage-product variables.

The DC and SOC problems are lowered to the standard conic form and solved by
:mod:`nkinterdict.conic`.  For scenario sweeps the problems are built once
per network as patchable templates: interdicting a line only zeroes its
admittance entries in the flow-definition rows (forcing its flows to zero)
and relaxes its angle-difference box, which preserves the sparsity pattern
and makes per-scenario instantiation cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import maxflow
from .conic import ConeProblem, solve_conic
from .errors import SolverError, UsageError
from .modeling import ConeModel, PatchedFamily
from .network import Network, Scenario, SubNetwork, apply_scenario

NF = "nf"
DC = "dc"
SOC = "soc"
FORMULATIONS = (NF, DC, SOC)

DEFAULT_TOL = 1e-8
# widest residual accepted from a stalled (degenerate) conic solve; matches
# the balance-residual contract of the inner problems
INNER_ACCEPT_TOL = 1e-6


@dataclass(frozen=True)
class InnerOptions:
    """Model options shared by the DC and SOC builders.

    ``respect_pg_min`` restores literal generator lower bounds; the default
    clamps them to ``min(pg_lo, 0)`` so that islanded scenarios stay feasible
    (generators may shut down during contingencies).  ``dc_angle_limits``
    toggles the explicit angle-difference box in the DC formulation.
    ``dump_dir`` writes every conic problem built by :func:`solve_inner` to a
    plain-text file in that directory (debugging aid).
    """

    respect_pg_min: bool = False
    dc_angle_limits: bool = True
    dump_dir: str | None = None


@dataclass
class InnerSolution:
    """Load shed and flows for one scenario under one formulation.

    Flows are directed per operational line: ``p_from[e]`` is the active
    power entering line ``e`` at its from-bus, ``p_to[e]`` at its to-bus.
    For NF and DC these are antisymmetric; the SOC relaxation also carries
    reactive flows and the lifted voltage products (``w_bus``, ``w_re``,
    ``w_im``).
    """

    formulation: str
    status: str
    z: float
    shed: dict
    p_from: dict
    p_to: dict
    q_from: dict = field(default_factory=dict)
    q_to: dict = field(default_factory=dict)
    pg: dict = field(default_factory=dict)
    qg: dict = field(default_factory=dict)
    w_bus: dict = field(default_factory=dict)
    w_re: dict = field(default_factory=dict)
    w_im: dict = field(default_factory=dict)
    w_ends: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CutCoefficients:
    """Intercept and per-line slopes of one load-shed cut."""

    intercept: float
    alpha: dict

    def bound(self, interdicted) -> float:
        """Cut value  z_hat + sum of alpha over the given interdicted lines."""
        return self.intercept + sum(self.alpha[lid] for lid in interdicted)


def cut_coefficients(sol: InnerSolution, sub: SubNetwork) -> CutCoefficients:
    """Load-shed cut from an inner solution: alpha = max(|p_from|, |p_to|).

    Interdicted lines get zero.  The same rule applies to all three
    formulations; for the SOC relaxation the active-power part is used.
    """
    alpha = {}
    for line in sub.net.lines:
        if line.id in sub.interdicted:
            alpha[line.id] = 0.0
        else:
            alpha[line.id] = max(abs(sol.p_from[line.id]), abs(sol.p_to[line.id]))
    return CutCoefficients(intercept=sol.z, alpha=alpha)


@dataclass
class SocTightness:
    """Per-line slack of the relaxed product constraint W_ii W_jj - |W_ij|^2."""

    gaps: dict
    max_gap: float | None
    mean_gap: float | None


def soc_tightness(sol: InnerSolution) -> SocTightness:
    """Relaxation-quality report for a SOC solution.

    All gaps are nonnegative up to solver tolerance; a gap near zero means
    the cone constraint is tight on that line (the relaxation is locally
    exact).  Raises on non-SOC solutions.
    """
    if sol.formulation != SOC:
        raise UsageError(f"soc_tightness requires a SOC solution, got {sol.formulation!r}")
    gaps = {}
    for lid in sol.w_re:
        i, j = sol.w_ends[lid]
        gaps[lid] = sol.w_bus[i] * sol.w_bus[j] - (sol.w_re[lid] ** 2 + sol.w_im[lid] ** 2)
    if not gaps:
        return SocTightness({}, None, None)
    vals = list(gaps.values())
    return SocTightness(gaps, max(vals), sum(vals) / len(vals))


# ---------------------------------------------------------------------------
# DC formulation
# ---------------------------------------------------------------------------

class DcTemplate:
    """Patchable DC load-shed LP for one network.

    Lowered form (all inequalities carry explicit nonnegative slacks):

    * variables: theta (free), shifted line flow u_f = f + t in [0, 2t],
      shifted generation u_pg = pg - pg_lo, shed ell in [0, 1];
    * rows: per-bus balance, per-line flow-angle coupling
      ``u_f + b theta_i - b theta_j = t``, upper bounds, and the
      angle-difference box ``|theta_i - theta_j| <= theta_max``.

    Interdicting line e zeroes the two ``b`` entries of its coupling row
    (forcing f_e = 0) and widens its angle box to a free bound.
    """

    def __init__(self, net: Network, options: InnerOptions = InnerOptions()):
        self.net = net
        self.options = options
        m = ConeModel()
        nb, nl = len(net.buses), len(net.lines)
        bus_pos = {b.id: i for i, b in enumerate(net.buses)}
        theta = m.add_free("theta", nb)
        u_f = m.add_nonneg("u_f", nl)
        s_f = m.add_nonneg("s_f", nl)
        self.gen_buses = [b.id for b in net.buses if self._pg_hi(b) > self._pg_lo(b)]
        u_pg = m.add_nonneg("u_pg", len(self.gen_buses)) if self.gen_buses else np.array([], dtype=np.intp)
        s_pg = m.add_nonneg("s_pg", len(self.gen_buses)) if self.gen_buses else None
        self.load_buses = [b.id for b in net.buses if b.pd > 0]
        ell = m.add_nonneg("ell", len(self.load_buses)) if self.load_buses else np.array([], dtype=np.intp)
        s_ell = m.add_nonneg("s_ell", len(self.load_buses)) if self.load_buses else None
        sa = m.add_nonneg("s_ang", 2 * nl)

        gen_pos = {bid: i for i, bid in enumerate(self.gen_buses)}
        load_pos = {bid: i for i, bid in enumerate(self.load_buses)}
        self.angle_free_bound = sum(l.theta_max for l in net.lines) + 2 * math.pi

        # balance: u_pg + pd*ell - sum_from u_f + sum_to u_f = pd - pg_lo - sum_from t + sum_to t
        bal_cols = {b.id: ([], []) for b in net.buses}
        bal_rhs = {}
        for b in net.buses:
            cols, vals = bal_cols[b.id]
            rhs = b.pd - self._pg_lo(b)
            if b.id in gen_pos:
                cols.append(u_pg[gen_pos[b.id]]); vals.append(1.0)
            if b.id in load_pos:
                cols.append(ell[load_pos[b.id]]); vals.append(b.pd)
            bal_rhs[b.id] = rhs
        for e, line in enumerate(net.lines):
            cf, vf = bal_cols[line.from_bus]
            cf.append(u_f[e]); vf.append(-1.0)
            bal_rhs[line.from_bus] -= line.t
            ct, vt = bal_cols[line.to_bus]
            ct.append(u_f[e]); vt.append(1.0)
            bal_rhs[line.to_bus] += line.t
        for b in net.buses:
            cols, vals = bal_cols[b.id]
            m.add_eq(cols, vals, bal_rhs[b.id])

        # coupling, flow bound, angle boxes
        self.coupling_rows = []
        self.angle_rows = []
        for e, line in enumerate(net.lines):
            ti, tj = theta[bus_pos[line.from_bus]], theta[bus_pos[line.to_bus]]
            r = m.add_eq([u_f[e], ti, tj], [1.0, line.b, -line.b], line.t)
            self.coupling_rows.append((r, ti, tj, line.b))
            m.add_eq([u_f[e], s_f[e]], [1.0, 1.0], 2 * line.t)
            bound = line.theta_max if options.dc_angle_limits else self.angle_free_bound
            r1 = m.add_eq([ti, tj, sa[2 * e]], [1.0, -1.0, 1.0], bound)
            r2 = m.add_eq([ti, tj, sa[2 * e + 1]], [-1.0, 1.0, 1.0], bound)
            self.angle_rows.append((r1, r2))
        for i, bid in enumerate(self.gen_buses):
            b = net.bus(bid)
            m.add_eq([u_pg[i], s_pg[i]], [1.0, 1.0], self._pg_hi(b) - self._pg_lo(b))
        for i, bid in enumerate(self.load_buses):
            m.add_eq([ell[i], s_ell[i]], [1.0, 1.0], 1.0)
            m.obj([ell[i]], [net.bus(bid).pd])

        self.family = PatchedFamily(m.build())
        # per line: positions of the two coupling coefficients to zero
        self._line_entry_pos = {}
        self._line_entry_base = {}
        for line, (r, ti, tj, bval) in zip(net.lines, self.coupling_rows):
            pos = self.family.positions([(r, ti), (r, tj)])
            self._line_entry_pos[line.id] = pos
            self._line_entry_base[line.id] = np.array([bval, -bval])
        self._line_brow = {line.id: rows for line, rows in zip(net.lines, self.angle_rows)}
        self._u_f = u_f
        self._ell = ell
        self._u_pg = u_pg

    def _pg_lo(self, b):
        return b.pg_lo if self.options.respect_pg_min else min(b.pg_lo, 0.0)

    def _pg_hi(self, b):
        return max(b.pg_hi, self._pg_lo(b))

    def problem_for(self, interdicted) -> ConeProblem:
        dpos, dval, bpos, bval = [], [], [], []
        for lid in interdicted:
            dpos.append(self._line_entry_pos[lid])
            dval.append(np.zeros(2))
            r1, r2 = self._line_brow[lid]
            bpos.extend((r1, r2))
            bval.extend((self.angle_free_bound, self.angle_free_bound))
        if dpos:
            return self.family.instantiate(np.concatenate(dpos), np.concatenate(dval),
                                           np.asarray(bpos, dtype=np.intp), np.asarray(bval))
        return self.family.instantiate()

    def extract(self, sub: SubNetwork, sol) -> InnerSolution:
        x = sol.x
        net = self.net
        ell = {bid: float(x[self._ell[i]]) for i, bid in enumerate(self.load_buses)}
        shed = {b.id: ell.get(b.id, 0.0) for b in net.buses}
        z = sum(net.bus(bid).pd * l for bid, l in ell.items())
        p_from, p_to = {}, {}
        for e, line in enumerate(net.lines):
            if line.id in sub.interdicted:
                continue
            f = float(x[self._u_f[e]]) - line.t
            p_from[line.id] = f
            p_to[line.id] = -f
        pg = {}
        for i, bid in enumerate(self.gen_buses):
            pg[bid] = float(x[self._u_pg[i]]) + self._pg_lo(net.bus(bid))
        return InnerSolution(formulation=DC, status=sol.status, z=z, shed=shed,
                             p_from=p_from, p_to=p_to, pg=pg)


def build_dc(sub: SubNetwork, options: InnerOptions = InnerOptions()) -> ConeProblem:
    """Standalone DC load-shed LP for an operational subnetwork."""
    return DcTemplate(sub.net, options).problem_for(sub.interdicted)


# ---------------------------------------------------------------------------
# SOC formulation
# ---------------------------------------------------------------------------

class SocTemplate:
    """Patchable SOC load-shed program for one network.

    Variables per line: a rotated-cone block ``r = (r0, r1, r2, r3)`` encoding
    ``(Re W_ij)^2 + (Im W_ij)^2 <= W_ii W_jj`` through the standard cone
    ``||(2 Re W, 2 Im W, W_ii - W_jj)|| <= W_ii + W_jj`` (so ``Re W = r1/2``,
    ``Im W = r2/2``), and two thermal cones ``(t, p, q)`` per direction whose
    flow members are tied to the W variables by the power-flow definition
    rows.  Per bus: ``W_ii = v_lo^2 + u_W`` with an upper-bound row, shifted
    generation, and shed.

    The angle box ``|Im W| <= tan(theta_max) Re W`` implies ``Re W >= 0`` (the
    two slacks sum to ``2 tan(theta_max) Re W``), so no separate sign row is
    needed.  Interdicting a line zeroes the admittance entries and right-hand
    sides of its four flow-definition rows, pinning its flows to zero while
    its lifted W block floats inside its own cone.
    """

    def __init__(self, net: Network, options: InnerOptions = InnerOptions()):
        self.net = net
        self.options = options
        m = ConeModel()
        nb, nl = len(net.buses), len(net.lines)
        u_w = m.add_nonneg("u_w", nb)
        s_w = m.add_nonneg("s_w", nb)
        self.gen_buses = [b.id for b in net.buses if self._pg_hi(b) > self._pg_lo(b)]
        self.rgen_buses = [b.id for b in net.buses if b.qg_hi > b.qg_lo]
        self.load_buses = [b.id for b in net.buses if b.pd > 0]
        u_pg = m.add_nonneg("u_pg", len(self.gen_buses)) if self.gen_buses else np.array([], dtype=np.intp)
        s_pg = m.add_nonneg("s_pg", len(self.gen_buses)) if self.gen_buses else None
        u_qg = m.add_nonneg("u_qg", len(self.rgen_buses)) if self.rgen_buses else np.array([], dtype=np.intp)
        s_qg = m.add_nonneg("s_qg", len(self.rgen_buses)) if self.rgen_buses else None
        ell = m.add_nonneg("ell", len(self.load_buses)) if self.load_buses else np.array([], dtype=np.intp)
        s_ell = m.add_nonneg("s_ell", len(self.load_buses)) if self.load_buses else None
        sa = m.add_nonneg("s_ang", 2 * nl)
        rot, thf, tht = [], [], []
        for e in range(nl):
            rot.append(m.add_soc(f"rot{e}", 4))
            thf.append(m.add_soc(f"thf{e}", 3))
            tht.append(m.add_soc(f"tht{e}", 3))

        bus_pos = {b.id: i for i, b in enumerate(net.buses)}
        gen_pos = {bid: i for i, bid in enumerate(self.gen_buses)}
        rgen_pos = {bid: i for i, bid in enumerate(self.rgen_buses)}
        load_pos = {bid: i for i, bid in enumerate(self.load_buses)}

        # accumulate balance rows, then add at the end
        balp = {b.id: ([], [], b.pd - self._pg_lo(b)) for b in net.buses}
        balq = {b.id: ([], [], b.qd - b.qg_lo) for b in net.buses}
        for b in net.buses:
            if b.id in gen_pos:
                balp[b.id][0].append(u_pg[gen_pos[b.id]]); balp[b.id][1].append(1.0)
            if b.id in rgen_pos:
                balq[b.id][0].append(u_qg[rgen_pos[b.id]]); balq[b.id][1].append(1.0)
            if b.id in load_pos:
                balp[b.id][0].append(ell[load_pos[b.id]]); balp[b.id][1].append(b.pd)
                balq[b.id][0].append(ell[load_pos[b.id]]); balq[b.id][1].append(b.qd)

        self._flow_rows = {}
        for e, line in enumerate(net.lines):
            bi, bj = net.bus(line.from_bus), net.bus(line.to_bus)
            uwi, uwj = u_w[bus_pos[line.from_bus]], u_w[bus_pos[line.to_bus]]
            vloi2, vloj2 = bi.v_lo ** 2, bj.v_lo ** 2
            r0, r1, r2, r3 = rot[e]
            g, bsus, t = line.g, line.b, line.t
            # rotated-cone linkage
            m.add_eq([r0, uwi, uwj], [1.0, -1.0, -1.0], vloi2 + vloj2)
            m.add_eq([r3, uwi, uwj], [1.0, -1.0, 1.0], vloi2 - vloj2)
            # flow definitions; W_ji = conj(W_ij) flips the Im W sign
            pf_r = m.add_eq([thf[e][1], uwi, r1, r2], [1.0, -g, g / 2, bsus / 2], g * vloi2)
            qf_r = m.add_eq([thf[e][2], uwi, r1, r2], [1.0, bsus, -bsus / 2, g / 2], -bsus * vloi2)
            pt_r = m.add_eq([tht[e][1], uwj, r1, r2], [1.0, -g, g / 2, -bsus / 2], g * vloj2)
            qt_r = m.add_eq([tht[e][2], uwj, r1, r2], [1.0, bsus, -bsus / 2, -g / 2], -bsus * vloj2)
            # thermal cone heads
            m.add_eq([thf[e][0]], [1.0], t)
            m.add_eq([tht[e][0]], [1.0], t)
            # angle box (implies r1 >= 0 since the two slacks sum to 2 tan * r1);
            # |W_ij| needs no explicit box: the rotated cone and the W_ii upper
            # bounds already give |W_ij| <= v_hi_i v_hi_j, and adding the rows
            # measurably slows convergence
            tan = math.tan(line.theta_max)
            m.add_eq([r2, r1, sa[2 * e]], [1.0, -tan, 1.0], 0.0)       # Im W <= tan * Re W
            m.add_eq([r2, r1, sa[2 * e + 1]], [1.0, tan, -1.0], 0.0)   # Im W >= -tan * Re W
            # balance contributions
            balp[line.from_bus][0].append(thf[e][1]); balp[line.from_bus][1].append(-1.0)
            balq[line.from_bus][0].append(thf[e][2]); balq[line.from_bus][1].append(-1.0)
            balp[line.to_bus][0].append(tht[e][1]); balp[line.to_bus][1].append(-1.0)
            balq[line.to_bus][0].append(tht[e][2]); balq[line.to_bus][1].append(-1.0)
            self._flow_rows[line.id] = (
                (pf_r, uwi, -g), (pf_r, r1, g / 2), (pf_r, r2, bsus / 2),
                (qf_r, uwi, bsus), (qf_r, r1, -bsus / 2), (qf_r, r2, g / 2),
                (pt_r, uwj, -g), (pt_r, r1, g / 2), (pt_r, r2, -bsus / 2),
                (qt_r, uwj, bsus), (qt_r, r1, -bsus / 2), (qt_r, r2, -g / 2),
            )

        for b in net.buses:
            cols, vals, rhs = balp[b.id]
            m.add_eq(cols, vals, rhs)
            cols, vals, rhs = balq[b.id]
            m.add_eq(cols, vals, rhs)
        for i, b in enumerate(net.buses):
            m.add_eq([u_w[i], s_w[i]], [1.0, 1.0], b.v_hi ** 2 - b.v_lo ** 2)
        for i, bid in enumerate(self.gen_buses):
            b = net.bus(bid)
            m.add_eq([u_pg[i], s_pg[i]], [1.0, 1.0], self._pg_hi(b) - self._pg_lo(b))
        for i, bid in enumerate(self.rgen_buses):
            b = net.bus(bid)
            m.add_eq([u_qg[i], s_qg[i]], [1.0, 1.0], b.qg_hi - b.qg_lo)
        for i, bid in enumerate(self.load_buses):
            m.add_eq([ell[i], s_ell[i]], [1.0, 1.0], 1.0)
            m.obj([ell[i]], [net.bus(bid).pd])

        self.family = PatchedFamily(m.build())
        self._line_patch = {}
        for line in net.lines:
            rows = self._flow_rows[line.id]
            pos = self.family.positions([(r, c) for r, c, _ in rows])
            brows = np.asarray(sorted({r for r, _, _ in rows}), dtype=np.intp)
            self._line_patch[line.id] = (pos, brows)
        self._u_w, self._rot = u_w, rot
        self._thf, self._tht = thf, tht
        self._ell, self._u_pg, self._u_qg = ell, u_pg, u_qg

    def _pg_lo(self, b):
        return b.pg_lo if self.options.respect_pg_min else min(b.pg_lo, 0.0)

    def _pg_hi(self, b):
        return max(b.pg_hi, self._pg_lo(b))

    def problem_for(self, interdicted) -> ConeProblem:
        dpos, bpos = [], []
        for lid in interdicted:
            pos, brows = self._line_patch[lid]
            dpos.append(pos)
            bpos.append(brows)
        if dpos:
            dpos = np.concatenate(dpos)
            bpos = np.concatenate(bpos)
            return self.family.instantiate(dpos, np.zeros(len(dpos)), bpos, np.zeros(len(bpos)))
        return self.family.instantiate()

    def extract(self, sub: SubNetwork, sol) -> InnerSolution:
        x = sol.x
        net = self.net
        bus_pos = {b.id: i for i, b in enumerate(net.buses)}
        ell = {bid: float(x[self._ell[i]]) for i, bid in enumerate(self.load_buses)}
        shed = {b.id: ell.get(b.id, 0.0) for b in net.buses}
        z = sum(net.bus(bid).pd * l for bid, l in ell.items())
        w_bus = {b.id: b.v_lo ** 2 + float(x[self._u_w[bus_pos[b.id]]]) for b in net.buses}
        p_from, p_to, q_from, q_to, w_re, w_im, w_ends = {}, {}, {}, {}, {}, {}, {}
        for e, line in enumerate(net.lines):
            if line.id in sub.interdicted:
                continue
            p_from[line.id] = float(x[self._thf[e][1]])
            q_from[line.id] = float(x[self._thf[e][2]])
            p_to[line.id] = float(x[self._tht[e][1]])
            q_to[line.id] = float(x[self._tht[e][2]])
            w_re[line.id] = float(x[self._rot[e][1]]) / 2.0
            w_im[line.id] = float(x[self._rot[e][2]]) / 2.0
            w_ends[line.id] = (line.from_bus, line.to_bus)
        pg = {bid: float(x[self._u_pg[i]]) + self._pg_lo(net.bus(bid))
              for i, bid in enumerate(self.gen_buses)}
        qg = {bid: float(x[self._u_qg[i]]) + net.bus(bid).qg_lo
              for i, bid in enumerate(self.rgen_buses)}
        return InnerSolution(formulation=SOC, status=sol.status, z=z, shed=shed,
                             p_from=p_from, p_to=p_to, q_from=q_from, q_to=q_to,
                             pg=pg, qg=qg, w_bus=w_bus, w_re=w_re, w_im=w_im,
                             w_ends=w_ends)


def build_soc(sub: SubNetwork, options: InnerOptions = InnerOptions()) -> ConeProblem:
    """Standalone SOC load-shed program for an operational subnetwork."""
    return SocTemplate(sub.net, options).problem_for(sub.interdicted)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def _template(net: Network, formulation: str, options: InnerOptions):
    if formulation == DC:
        return DcTemplate(net, options)
    return SocTemplate(net, options)


def solve_inner(net: Network, scenario: Scenario, formulation: str,
                options: InnerOptions = InnerOptions(), tol: float = DEFAULT_TOL) -> InnerSolution:
    """Minimum load shed for one scenario under one formulation.

    NF dispatches to the combinatorial max-flow solver; DC and SOC build the
    conic program (from a cached per-network template) and solve it.  An
    infeasible conic status is an error: with clamped generator minimums the
    inner problems are always feasible, so infeasibility indicates either
    ``respect_pg_min`` with binding minimums or a genuine numerical failure.
    """
    if formulation not in FORMULATIONS:
        raise UsageError(f"unknown formulation {formulation!r}")
    sub = apply_scenario(net, scenario)
    if formulation == NF:
        return solve_nf(sub)
    tmpl = _template(net, formulation, options)
    prob = tmpl.problem_for(scenario.interdicted)
    if options.dump_dir:
        _dump_problem(prob, formulation, scenario, options.dump_dir)
    sol = solve_conic(prob, tol=tol)
    if sol.status == "primal-infeasible":
        raise SolverError(
            f"{formulation} inner problem infeasible for scenario {scenario.interdicted} "
            f"(generator minimums respected: {options.respect_pg_min})")
    if sol.status != "optimal":
        # Degenerate scenarios (strict complementarity failing on a cone
        # boundary) can stall short of the target tolerance; the inner
        # contract only needs residuals at the balance-equation level.
        achieved = max(sol.res_primal, sol.res_dual, sol.res_gap)
        if not math.isfinite(achieved) or achieved > INNER_ACCEPT_TOL:
            raise SolverError(
                f"{formulation} inner solve failed with status {sol.status!r} "
                f"(residual {achieved:.2e}) for scenario {scenario.interdicted}")
        sol.status = "optimal"
    return tmpl.extract(sub, sol)


def _dump_problem(prob, formulation, scenario, dump_dir):
    import os

    os.makedirs(dump_dir, exist_ok=True)
    tag = "-".join(str(l) for l in scenario.interdicted) or "base"
    path = os.path.join(dump_dir, f"inner_{formulation}_{tag}.txt")
    with open(path, "w") as fh:
        fh.write(prob.dump_text())


def solve_nf(sub: SubNetwork) -> InnerSolution:
    """Network-flow inner problem via max-flow; exact and fast."""
    z, res = maxflow.nf_shed(sub)
    p_from, p_to = {}, {}
    for line in sub.operational:
        f = res.line_flow(line.id)
        p_from[line.id] = f
        p_to[line.id] = -f
    shed = {}
    g = res.graph
    for b in sub.buses:
        if b.pd > 0:
            served = 0.0
            for a in g.adj[g.node(b.id)]:
                if a % 2 == 0 and g.head[a] == g.node(maxflow.SINK):
                    served = res.flow[a]
            shed[b.id] = 1.0 - served / b.pd
        else:
            shed[b.id] = 0.0
    return InnerSolution(formulation=NF, status="optimal", z=z, shed=shed,
                         p_from=p_from, p_to=p_to)
