"""Complete enumeration of all C(|E|, k) failure scenarios.

Ground truth for the cutting-plane algorithm on instances small enough to
sweep: every k-subset of lines is solved with the requested inner
formulation and recorded with its shed, log-probability and weighted
objective.  Subsets are visited in colexicographic order of line positions;
work is distributed to processes as contiguous rank ranges of the
combinatorial unranking, and results are merged by rank, so the table is
identical for any worker count.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field

from .errors import UsageError
from .inner import FORMULATIONS, InnerOptions, solve_inner
from .network import Network

DEFAULT_CAP = 10 ** 6


@dataclass
class EnumerationRecord:
    lines: tuple
    z: float
    log_prob: float

    def weighted_pu(self) -> float:
        return math.exp(self.log_prob) * self.z


@dataclass
class EnumerationTable:
    """All scenarios of one (network, k, formulation) sweep.

    ``best`` is the record maximizing ``log_prob + log z`` over positive-shed
    scenarios (ties to the lexicographically smallest line tuple), or None if
    every scenario sheds nothing.
    """

    net_case: str
    k: int
    formulation: str
    records: list
    wall_seconds: float
    base_mva: float
    best: EnumerationRecord | None = field(init=False)

    def __post_init__(self):
        best = None
        best_f = -math.inf
        for rec in self.records:
            if rec.z <= 0:
                continue
            f = rec.log_prob + math.log(rec.z)
            if f > best_f + 1e-15 or (abs(f - best_f) <= 1e-15 and best and rec.lines < best.lines):
                best, best_f = rec, f
        self.best = best

    def best_weighted_mw(self) -> float | None:
        return self.best.weighted_pu() * self.base_mva if self.best else None

    def to_csv(self) -> str:
        out = ["scenario_lines;z_pu;log_prob;weighted_mw"]
        for rec in self.records:
            lines = ",".join(str(l) for l in rec.lines)
            out.append(f"{lines};{rec.z!r};{rec.log_prob!r};{rec.weighted_pu() * self.base_mva!r}")
        return "\n".join(out) + "\n"


def n_choose_k(n: int, k: int) -> int:
    return math.comb(n, k)


def unrank_colex(rank: int, k: int):
    """The rank-th k-subset of {0, 1, ...} in colexicographic order.

    Returns positions in decreasing order; the subset with positions
    ``c_k > ... > c_1`` has rank ``sum(C(c_i, i))``.
    """
    out = []
    r = rank
    for i in range(k, 0, -1):
        c = i - 1
        while math.comb(c + 1, i) <= r:
            c += 1
        out.append(c)
        r -= math.comb(c, i)
    return out


_WORKER_STATE = {}


def _worker_init(net, k, formulation, options):
    _WORKER_STATE["args"] = (net, k, formulation, options)


def _solve_range(bounds):
    lo, hi = bounds
    net, k, formulation, options = _WORKER_STATE["args"]
    line_ids = [l.id for l in net.lines]
    out = []
    for rank in range(lo, hi):
        positions = unrank_colex(rank, k)
        ids = tuple(sorted(line_ids[p] for p in positions))
        scen = net.scenario(ids)
        sol = solve_inner(net, scen, formulation, options=options)
        out.append(EnumerationRecord(ids, sol.z, scen.log_prob))
    return lo, out


def enumerate_scenarios(net: Network, k: int, formulation: str, workers: int = 1,
                        options: InnerOptions = InnerOptions(), cap: int = DEFAULT_CAP,
                        case_name: str = "", progress=None) -> EnumerationTable:
    """Solve every k-subset of lines; refuse when C(|E|, k) exceeds ``cap``."""
    if formulation not in FORMULATIONS:
        raise UsageError(f"unknown formulation {formulation!r}")
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    n = len(net.lines)
    if k > n:
        raise UsageError(f"k = {k} exceeds the number of lines {n}")
    total = n_choose_k(n, k)
    if total > cap:
        raise UsageError(
            f"enumeration of C({n},{k}) = {total} scenarios exceeds the cap {cap}")
    t0 = time.monotonic()
    workers = max(1, min(workers, total))
    chunks = _ranges(total, workers if workers > 1 else 1)
    if workers == 1:
        _worker_init(net, k, formulation, options)
        results = [_solve_range(c) for c in chunks]
    else:
        import multiprocessing as mp

        ctx = mp.get_context("fork")
        # chunk finer than the worker count so progress is steady
        chunks = _ranges(total, min(workers * 8, total))
        with ctx.Pool(workers, initializer=_worker_init,
                      initargs=(net, k, formulation, options)) as pool:
            results = []
            for got in pool.imap_unordered(_solve_range, chunks):
                results.append(got)
                if progress:
                    progress(sum(len(r) for _, r in results), total)
    results.sort(key=lambda pair: pair[0])
    records = [rec for _, recs in results for rec in recs]
    return EnumerationTable(net_case=case_name, k=k, formulation=formulation,
                            records=records, wall_seconds=time.monotonic() - t0,
                            base_mva=net.base_mva)


def _ranges(total: int, parts: int):
    step = (total + parts - 1) // parts
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]
