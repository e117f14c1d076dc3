"""Cutting-plane master problem and driver.

The master selects k lines to interdict, maximizing  p + t  where
``p = sum(log pr_e * x_e)`` is the scenario log-probability and ``t`` is a
linear outer approximation of ``log z``.  The load-shed variable ``z`` is
bounded above by the accumulated shed cuts  ``z <= z_hat + sum(alpha * x)``;
logical cuts exclude every previously visited scenario; OA cuts
``t <= log(zh) + (z - zh)/zh`` tangent the logarithm at each visited shed
value.

``solve_master`` runs a best-bound branch-and-bound on the interdiction
binaries, solving LP relaxations with the conic interior-point solver. The
driver ``cutting_plane`` alternates master solves with inner solves, adding
one shed cut, one logical cut and one OA cut per iteration, until the bound
gap closes to the tolerance (measured on the exponentiated, probability-
weighted objective), the time limit is hit, or the master becomes infeasible
(every k-subset visited: complete enumeration reached).
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .conic import solve_conic
from .errors import SolverError, UsageError
from .inner import FORMULATIONS, InnerOptions, apply_scenario, cut_coefficients, solve_inner
from .modeling import ConeModel
from .network import Network, Scenario

INTEGRALITY_TOL = 1e-6
BOUND_TOL = 1e-8
LP_TOL = 1e-8
DEFAULT_NODE_LIMIT = 500_000


@dataclass
class MasterProblem:
    """State of the cutting-plane master for one (network, k) pair."""

    net: Network
    k: int
    shed_cuts: list = field(default_factory=list)      # CutCoefficients
    logical_cuts: list = field(default_factory=list)   # tuples of line ids
    oa_points: list = field(default_factory=list)      # z values > 0
    node_limit: int = DEFAULT_NODE_LIMIT

    def __post_init__(self):
        if self.k < 1:
            raise UsageError(f"k must be >= 1, got {self.k}")
        if self.k > len(self.net.lines):
            raise UsageError(f"k = {self.k} exceeds the number of lines {len(self.net.lines)}")
        self.z_max = max(self.net.total_pd, 0.0)
        self.line_ids = [l.id for l in self.net.lines]
        self.log_pr = {l.id: math.log(l.pr) for l in self.net.lines}

    def add_shed_cut(self, cut):
        for lid, a in cut.alpha.items():
            if a < -1e-12:
                raise UsageError(f"negative cut coefficient {a} on line {lid}")
        self.shed_cuts.append(cut)

    def add_logical_cut(self, scenario: Scenario):
        if scenario.k != self.k:
            raise UsageError(f"logical cut needs a k={self.k} scenario, got k={scenario.k}")
        self.logical_cuts.append(tuple(scenario.interdicted))

    def add_oa_cut(self, z_hat: float):
        if z_hat <= 0:
            raise UsageError(f"outer-approximation point must be positive, got {z_hat}")
        self.oa_points.append(float(z_hat))

    def log_prob(self, line_ids) -> float:
        return sum(self.log_pr[lid] for lid in line_ids)

    # -- evaluation of a fixed integral x against the current cuts ---------

    def z_of(self, line_ids) -> float:
        chosen = set(line_ids)
        z = self.z_max
        for cut in self.shed_cuts:
            z = min(z, cut.intercept + sum(cut.alpha[lid] for lid in chosen))
        return max(z, 0.0)

    def t_of(self, z: float) -> float:
        return min(math.log(zh) + (z - zh) / zh for zh in self.oa_points)

    def objective_of(self, line_ids) -> float:
        return self.log_prob(line_ids) + self.t_of(self.z_of(line_ids))

    def violates_logical(self, line_ids) -> bool:
        chosen = set(line_ids)
        return any(len(chosen.intersection(cut)) >= self.k for cut in self.logical_cuts)


@dataclass
class MasterResult:
    scenario: Scenario | None
    objective: float          # p + t of the master optimum (upper bound source)
    z: float                  # master z at the optimum
    status: str               # "optimal" | "exhausted"
    nodes: int = 0


class _NodeLP:
    """LP relaxation of the master at one branch-and-bound node.

    Binaries fixed by branching are substituted out (their contributions move
    into row right-hand sides and the objective constant), so the remaining
    LP keeps a strictly interior point and the interior-point solver stays on
    its central path.  Nodes whose fixing already decides every binary are
    evaluated directly without an LP.
    """

    def __init__(self, mp: MasterProblem, fixed0: frozenset, fixed1: frozenset):
        self.mp = mp
        self.infeasible = False
        # presolve: a logical cut with k-1 members fixed to 1 forces its
        # remaining members to 0 (otherwise those columns would be pinned at
        # zero inside the LP, which destroys the strict interior)
        fixed0 = set(fixed0)
        changed = True
        while changed and not self.infeasible:
            changed = False
            for lines in mp.logical_cuts:
                n1 = sum(1 for lid in lines if lid in fixed1)
                if n1 >= mp.k:
                    self.infeasible = True
                    break
                if n1 == mp.k - 1:
                    for lid in lines:
                        if lid not in fixed1 and lid not in fixed0:
                            fixed0.add(lid)
                            changed = True
        self.fixed0 = frozenset(fixed0)
        self.fixed1 = fixed1
        self.free_ids = [lid for lid in mp.line_ids
                         if lid not in self.fixed0 and lid not in fixed1]
        self.k_rem = mp.k - len(fixed1)
        self.obj_const = sum(mp.log_pr[lid] for lid in fixed1)
        self.decided = self.k_rem <= 0 or self.k_rem >= len(self.free_ids)

    def forced_choice(self):
        """The only completion when fixing leaves no freedom (or None)."""
        if self.k_rem < 0 or self.k_rem > len(self.free_ids):
            return None
        if self.k_rem == 0:
            return tuple(sorted(self.fixed1))
        return tuple(sorted(set(self.free_ids) | self.fixed1))

    def build_and_solve(self):
        mp = self.mp
        ids = self.free_ids
        nl = len(ids)
        m = ConeModel()
        x = m.add_nonneg("x", nl)
        z = m.add_nonneg("z")
        t = m.add_free("t")
        s_x = m.add_nonneg("s_x", nl)
        s_z = m.add_nonneg("s_z")
        ncuts = len(mp.shed_cuts) + len(mp.logical_cuts) + len(mp.oa_points)
        s_cut = m.add_nonneg("s_cut", max(ncuts, 1))

        w = np.array([mp.log_pr[lid] for lid in ids])
        m.obj(x, -w)                                   # max w'x + t -> min
        m.obj(t, [-1.0])
        m.add_eq(x, np.ones(nl), float(self.k_rem))    # cardinality (remaining)
        for e in range(nl):
            m.add_eq([x[e], s_x[e]], [1.0, 1.0], 1.0)
        m.add_eq([z[0], s_z[0]], [1.0, 1.0], mp.z_max)
        pos = {lid: i for i, lid in enumerate(ids)}
        ci = 0
        for cut in mp.shed_cuts:                       # z - a'x <= z_hat + a'fixed1
            rhs = cut.intercept + sum(cut.alpha[lid] for lid in self.fixed1)
            cols = [z[0]]
            vals = [1.0]
            for lid in ids:
                a = cut.alpha[lid]
                if a != 0.0:
                    cols.append(x[pos[lid]])
                    vals.append(-a)
            m.add_eq(cols + [s_cut[ci]], vals + [1.0], rhs)
            ci += 1
        for lines in mp.logical_cuts:                  # sum_{s} x <= k - 1 - |s & fixed1|
            rhs = float(mp.k - 1 - sum(1 for lid in lines if lid in self.fixed1))
            cols = [x[pos[lid]] for lid in lines if lid in pos]
            if cols and rhs > 0:
                m.add_eq(cols + [s_cut[ci]], [1.0] * len(cols) + [1.0], rhs)
            # rhs == 0 was turned into fixings by the presolve; empty rows
            # with nonnegative rhs are vacuous either way
            ci += 1
        for zh in mp.oa_points:                        # t - z/zh <= log zh - 1
            m.add_eq([t[0], z[0], s_cut[ci]], [1.0, -1.0 / zh, 1.0], math.log(zh) - 1.0)
            ci += 1

        prob = m.build()
        sol = solve_conic(prob, tol=LP_TOL)
        if sol.status == "primal-infeasible":
            return None
        if sol.status != "optimal":
            achieved = max(sol.res_primal, sol.res_dual, sol.res_gap)
            if not math.isfinite(achieved) or achieved > 1e-6:
                raise SolverError(f"master LP relaxation failed: {sol.status}")
        xv = sol.x[x]
        bound = self.obj_const - float(sol.obj)        # master objective upper bound
        return bound, dict(zip(ids, xv))


def solve_master(mp: MasterProblem) -> MasterResult:
    """Best-bound branch-and-bound on the interdiction binaries.

    LP relaxations come from the conic solver; branching picks the most
    fractional binary (ties to the smallest line id); integral solutions are
    re-evaluated exactly against the cuts, so the incumbent objective carries
    no LP noise.  Infeasibility of the root (every k-subset excluded) returns
    status "exhausted": complete enumeration has occurred.
    """
    if not mp.oa_points:
        raise UsageError("master needs at least one outer-approximation cut")
    best_obj = -math.inf
    best_lines = None
    heap = []
    counter = 0
    nodes = 0

    def consider(lines) -> None:
        nonlocal best_obj, best_lines
        lines = tuple(sorted(lines))
        if len(lines) != mp.k or mp.violates_logical(lines):
            return
        obj = mp.objective_of(lines)
        if obj > best_obj + 1e-15 or (obj == best_obj and best_lines and lines < best_lines):
            best_obj = obj
            best_lines = lines

    def expand(fixed0: frozenset, fixed1: frozenset):
        nonlocal nodes, counter
        if nodes >= mp.node_limit:
            raise SolverError(f"master branch-and-bound exceeded node limit {mp.node_limit}")
        nodes += 1
        node = _NodeLP(mp, fixed0, fixed1)
        if node.infeasible:
            return
        if node.decided:
            choice = node.forced_choice()
            if choice is not None:
                consider(choice)
            return
        res = node.build_and_solve()
        if res is None:
            return
        bound, xv = res
        if bound <= best_obj + BOUND_TOL * (1.0 + abs(best_obj)):
            return
        counter += 1
        heapq.heappush(heap, (-bound, counter, fixed0, fixed1, xv))

    expand(frozenset(), frozenset())
    while heap:
        neg_ub, _, fixed0, fixed1, xv = heapq.heappop(heap)
        if -neg_ub <= best_obj + BOUND_TOL * (1.0 + abs(best_obj)):
            continue
        frac = {lid: abs(v - round(v)) for lid, v in xv.items()}
        worst = max(frac.values())
        if worst <= INTEGRALITY_TOL:
            consider(tuple(lid for lid, v in xv.items() if v > 0.5) + tuple(fixed1))
            continue
        branch_lid = min(lid for lid, f in frac.items() if f == worst)
        expand(fixed0 | {branch_lid}, fixed1)
        expand(fixed0, fixed1 | {branch_lid})

    if best_lines is None:
        return MasterResult(None, -math.inf, 0.0, "exhausted")
    scenario = mp.net.scenario(best_lines)
    return MasterResult(scenario, best_obj, mp.z_of(best_lines), "optimal", nodes)


# ---------------------------------------------------------------------------
# cutting-plane driver
# ---------------------------------------------------------------------------

@dataclass
class TraceEntry:
    iteration: int
    scenario: tuple
    z: float
    f_lb: float
    f_ub: float


@dataclass
class SolveReport:
    """Outcome of one cutting-plane run.

    ``f_star = log Pr + log z`` of the best scenario found; ``weighted_pu``
    and ``weighted_mw`` are the exponentiated objective ``Pr * z`` in per-unit
    and MW.  ``upper_bound`` is the final certified bound (max of the
    incumbent and the last master bound).  ``termination`` is one of
    ``converged``, ``time-limit``, ``exhausted``.
    """

    case: str
    k: int
    formulation: str
    epsilon: float
    termination: str
    best_scenario: tuple | None
    z: float
    log_prob: float | None
    f_star: float | None
    upper_bound: float | None
    gap: float | None
    weighted_pu: float | None
    weighted_mw: float | None
    iterations: int
    wall_seconds: float
    trace: list
    flags: dict = field(default_factory=dict)
    seed: int | None = None


def initial_scenario(net: Network, k: int) -> Scenario:
    """k lines with the largest thermal capacity, ties to the smallest id."""
    ranked = sorted(net.lines, key=lambda l: (-l.t, l.id))
    return net.scenario([l.id for l in ranked[:k]])


def cutting_plane(net: Network, k: int, formulation: str, epsilon: float = 0.01,
                  time_limit: float | None = None, options: InnerOptions = InnerOptions(),
                  bound_from_z: bool = False, case_name: str = "",
                  node_limit: int = DEFAULT_NODE_LIMIT) -> SolveReport:
    """Run the cutting-plane algorithm to an epsilon-optimal N-k scenario.

    Convergence is tested on the exponentiated objective: stop when
    ``f_ub - f_lb <= log(1 + epsilon)``, i.e. when the probability-weighted
    shed of the incumbent is within a relative ``epsilon`` of the bound.
    Scenarios whose shed is numerically zero contribute their shed and
    logical cuts but no incumbent update and no OA point.

    With ``bound_from_z`` the per-iteration bound uses ``p + log z_master``
    instead of the master objective ``p + t``.
    """
    if formulation not in FORMULATIONS:
        raise UsageError(f"unknown formulation {formulation!r}")
    if epsilon <= 0:
        raise UsageError(f"epsilon must be positive, got {epsilon}")
    t_start = time.monotonic()
    mp = MasterProblem(net, k, node_limit=node_limit)
    z_floor = 1e-9 * max(mp.z_max, 1e-30)
    mp.add_oa_cut(max(mp.z_max, z_floor))

    s_hat = initial_scenario(net, k)
    f_star = -math.inf
    s_star = None
    z_star = 0.0
    f_ub = math.inf
    trace = []
    termination = "exhausted"
    gap_target = math.log1p(epsilon)
    iteration = 0

    while True:
        iteration += 1
        sol = solve_inner(net, s_hat, formulation, options=options)
        z_hat = sol.z if sol.z > z_floor else 0.0
        f_hat = -math.inf
        if z_hat > 0.0:
            f_hat = s_hat.log_prob + math.log(z_hat)
            if f_hat > f_star:
                f_star, s_star, z_star = f_hat, s_hat, z_hat
        cut = cut_coefficients(sol, apply_scenario(net, s_hat))
        mp.add_shed_cut(_sanitize(cut, z_floor))
        mp.add_logical_cut(s_hat)
        if z_hat > 0.0:
            mp.add_oa_cut(z_hat)

        res = solve_master(mp)
        if res.status == "exhausted":
            # every k-subset visited: the incumbent is exactly optimal
            f_ub = min(f_ub, f_star)
            trace.append(TraceEntry(iteration, tuple(s_hat.interdicted), sol.z, f_star, f_ub))
            termination = "exhausted"
            break
        bound = res.objective
        if bound_from_z:
            bound = (res.scenario.log_prob +
                     (math.log(res.z) if res.z > z_floor else -math.inf))
        f_ub = min(f_ub, bound)
        trace.append(TraceEntry(iteration, tuple(s_hat.interdicted), sol.z, f_star, f_ub))

        if f_ub - f_star <= gap_target:
            termination = "converged"
            break
        if time_limit is not None and time.monotonic() - t_start > time_limit:
            termination = "time-limit"
            break
        s_hat = res.scenario

    wall = time.monotonic() - t_start
    if s_star is None:
        return SolveReport(case=case_name, k=k, formulation=formulation, epsilon=epsilon,
                           termination=termination, best_scenario=None, z=0.0,
                           log_prob=None, f_star=None, upper_bound=None, gap=None,
                           weighted_pu=None, weighted_mw=None, iterations=iteration,
                           wall_seconds=wall, trace=trace,
                           flags=_flags(options, bound_from_z))
    ub = max(f_star, f_ub)
    gap = max(math.expm1(min(f_ub - f_star, 700.0)), 0.0) if math.isfinite(f_ub) else math.inf
    weighted = math.exp(f_star)
    return SolveReport(case=case_name, k=k, formulation=formulation, epsilon=epsilon,
                       termination=termination, best_scenario=tuple(s_star.interdicted),
                       z=z_star, log_prob=s_star.log_prob, f_star=f_star, upper_bound=ub,
                       gap=gap, weighted_pu=weighted, weighted_mw=weighted * net.base_mva,
                       iterations=iteration, wall_seconds=wall, trace=trace,
                       flags=_flags(options, bound_from_z))


def _sanitize(cut, z_floor: float):
    """Zero out solver-noise coefficients so master LPs stay well scaled.

    Values below the shed floor are numerically indistinguishable from zero
    shed; keeping them produces near-duplicate LP rows and entries at the
    1e-12 scale that only slow the relaxations down.
    """
    from .inner import CutCoefficients

    alpha = {lid: (a if a > z_floor else 0.0) for lid, a in cut.alpha.items()}
    intercept = cut.intercept if cut.intercept > z_floor else 0.0
    return CutCoefficients(intercept=intercept, alpha=alpha)


def _flags(options: InnerOptions, bound_from_z: bool) -> dict:
    return {
        "respect_pg_min": options.respect_pg_min,
        "dc_angle_limits": options.dc_angle_limits,
        "bound_from_z": bound_from_z,
    }


def hamming(a: Scenario, b: Scenario) -> int:
    """Hamming distance between two interdiction plans of equal cardinality.

    The distance of the binary incidence vectors: the size of the symmetric
    difference, so two k-sets differing in one line are at distance 2.
    """
    if a.k != b.k:
        raise UsageError(f"plans have different cardinality: {a.k} vs {b.k}")
    return len(set(a.interdicted).symmetric_difference(b.interdicted))
