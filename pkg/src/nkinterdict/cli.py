"""Command-line front end.

Subcommands::

    solve      run the cutting-plane algorithm for one k
    sweep      run solve over a k range, emitting a CSV of objectives
    enumerate  complete enumeration table for one k (CSV)
    compare    Hamming distance and objective delta between two reports
    genprob    generate a line-failure probability CSV for a case

Reports are JSON on stdout (or ``--out``).  Exit codes for ``solve``:
0 when the run converged (or exhausted the scenario space with a certified
optimum), 2 on hitting the time limit, 3 when no positive-shed scenario
exists.  Input and usage errors exit 1 with a message on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import probgen
from .enumeration import enumerate_scenarios
from .errors import GridError, UsageError
from .inner import FORMULATIONS, InnerOptions
from .master import SolveReport, cutting_plane, hamming
from .network import Network, from_json, parse_matpower, parse_probabilities

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TIME_LIMIT = 2
EXIT_NO_SHED = 3


def report_to_dict(rep: SolveReport) -> dict:
    return {
        "case": rep.case,
        "k": rep.k,
        "formulation": rep.formulation,
        "epsilon": rep.epsilon,
        "status": rep.termination,
        "best_scenario": list(rep.best_scenario) if rep.best_scenario else [],
        "z_pu": rep.z,
        "log_prob": rep.log_prob,
        "weighted_pu": rep.weighted_pu,
        "weighted_mw": rep.weighted_mw,
        "upper_bound": rep.upper_bound,
        "gap": rep.gap,
        "iterations": rep.iterations,
        "wall_seconds": rep.wall_seconds,
        "trace": [
            {"iter": t.iteration, "scenario": list(t.scenario), "z_pu": t.z,
             "f_lb": _json_float(t.f_lb), "f_ub": _json_float(t.f_ub)}
            for t in rep.trace
        ],
        "flags": rep.flags,
        "seed": rep.seed,
    }


def _json_float(v):
    if v is None or not math.isfinite(v):
        return None
    return v


def report_from_dict(doc: dict) -> dict:
    """Normalized view of a report dict (inverse of ``report_to_dict``)."""
    return report_to_dict(_report_from(doc))


def _report_from(doc: dict) -> SolveReport:
    from .master import TraceEntry

    trace = [TraceEntry(t["iter"], tuple(t["scenario"]), t["z_pu"],
                        t["f_lb"] if t["f_lb"] is not None else -math.inf,
                        t["f_ub"] if t["f_ub"] is not None else math.inf)
             for t in doc["trace"]]
    return SolveReport(
        case=doc["case"], k=doc["k"], formulation=doc["formulation"],
        epsilon=doc["epsilon"], termination=doc["status"],
        best_scenario=tuple(doc["best_scenario"]) or None,
        z=doc["z_pu"], log_prob=doc["log_prob"],
        f_star=None, upper_bound=doc["upper_bound"], gap=doc["gap"],
        weighted_pu=doc.get("weighted_pu"), weighted_mw=doc["weighted_mw"],
        iterations=doc["iterations"], wall_seconds=doc["wall_seconds"],
        trace=trace, flags=doc["flags"], seed=doc["seed"])


def load_network(case_path: str, prob_path: str | None = None) -> Network:
    text = Path(case_path).read_text()
    if case_path.endswith(".json"):
        net = from_json(text)
    else:
        net = parse_matpower(text)
    if prob_path:
        net = parse_probabilities(Path(prob_path).read_text(), net)
    return net


def _inner_options(args) -> InnerOptions:
    return InnerOptions(respect_pg_min=args.respect_pg_min,
                        dc_angle_limits=args.dc_angle_limits,
                        dump_dir=getattr(args, "dump_conic", None))


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _add_common(p):
    p.add_argument("--case", required=True, help="Matpower .m or native .json case file")
    p.add_argument("--prob", help="line-failure probability CSV")
    p.add_argument("--form", required=True, choices=FORMULATIONS)
    p.add_argument("--respect-pg-min", action="store_true",
                   help="keep literal generator minimums (may make islands infeasible)")
    p.add_argument("--dc-angle-limits", action=argparse.BooleanOptionalAction, default=True,
                   help="enforce the angle-difference box in the DC formulation")
    p.add_argument("--dump-conic", metavar="DIR",
                   help="dump every inner conic problem to plain-text files in DIR")
    p.add_argument("--out", help="write the report here instead of stdout")


def _solve_args(p):
    _add_common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--bound-from-z", action="store_true",
                   help="derive the master bound from log z instead of the OA term")
    p.add_argument("--node-limit", type=int, default=500_000)
    p.add_argument("--seed", type=int, default=None)


def cmd_solve(args) -> int:
    net = load_network(args.case, args.prob)
    if args.k < 1 or args.k > len(net.lines):
        raise UsageError(f"k must lie in [1, {len(net.lines)}], got {args.k}")
    rep = cutting_plane(net, args.k, args.form, epsilon=args.eps,
                        time_limit=args.time_limit, options=_inner_options(args),
                        bound_from_z=args.bound_from_z, case_name=args.case,
                        node_limit=args.node_limit)
    rep.seed = args.seed
    _write(json.dumps(report_to_dict(rep), indent=1) + "\n", args.out)
    if rep.termination == "time-limit":
        return EXIT_TIME_LIMIT
    if rep.best_scenario is None:
        return EXIT_NO_SHED
    return EXIT_OK


def cmd_sweep(args) -> int:
    net = load_network(args.case, args.prob)
    if args.k_min > args.k_max:
        raise UsageError(f"k range is empty: {args.k_min}..{args.k_max}")
    rows = ["k,weighted_mw,weighted_pu,iterations,wall_seconds,status"]
    worst = EXIT_OK
    for k in range(args.k_min, args.k_max + 1):
        rep = cutting_plane(net, k, args.form, epsilon=args.eps,
                            time_limit=args.time_limit, options=_inner_options(args),
                            bound_from_z=args.bound_from_z, case_name=args.case,
                            node_limit=args.node_limit)
        rows.append(f"{k},{_csv_opt(rep.weighted_mw)},{_csv_opt(rep.weighted_pu)},"
                    f"{rep.iterations},{rep.wall_seconds:.3f},{rep.termination}")
        if rep.termination == "time-limit":
            worst = max(worst, EXIT_TIME_LIMIT)
    _write("\n".join(rows) + "\n", args.out)
    return worst


def _csv_opt(v):
    return "" if v is None else repr(v)


def cmd_enumerate(args) -> int:
    net = load_network(args.case, args.prob)
    table = enumerate_scenarios(net, args.k, args.form, workers=args.workers,
                                options=_inner_options(args), cap=args.cap,
                                case_name=args.case)
    _write(table.to_csv(), args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    a = _report_from(json.loads(Path(args.report_a).read_text()))
    b = _report_from(json.loads(Path(args.report_b).read_text()))
    if a.k != b.k:
        raise UsageError(f"reports have different k: {a.k} vs {b.k}")
    if a.best_scenario is None or b.best_scenario is None:
        raise UsageError("both reports need a best scenario to compare")
    from .network import Scenario

    dist = hamming(Scenario(a.best_scenario, 0.0), Scenario(b.best_scenario, 0.0))
    lines = [
        f"hamming_distance: {dist}",
        f"a: {a.formulation} {list(a.best_scenario)} weighted_mw {a.weighted_mw}",
        f"b: {b.formulation} {list(b.best_scenario)} weighted_mw {b.weighted_mw}",
        f"objective_delta_mw: {None if a.weighted_mw is None or b.weighted_mw is None else a.weighted_mw - b.weighted_mw}",
    ]
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_genprob(args) -> int:
    net = load_network(args.case)
    n = len(net.lines)
    ids = [l.id for l in net.lines]
    if args.mode in probgen.SAMPLE_MODES:
        raw = probgen.sample(args.mode, n, args.seed)
        if args.budget is None and args.budget_from is None:
            raise UsageError("det/uniform/texp need --budget or --budget-from")
        budget = args.budget
        if budget is None:
            ref_net = load_network(args.case, args.budget_from)
            budget = sum(l.pr for l in ref_net.lines)
        pr = probgen.budget_normalize(dict(zip(ids, raw)), budget)
    elif args.mode == "range-uniform":
        if not args.reference:
            raise UsageError("range-uniform needs --reference probability CSV")
        ref_net = load_network(args.case, None)
        ref = {}
        for line in Path(args.reference).read_text().splitlines()[1:]:
            if line.strip():
                ref[len(ref)] = float(line.split(",")[3])
        draws = probgen.range_uniform(ref, n, args.seed)
        pr = dict(zip(ids, (float(d) for d in draws)))
    elif args.mode == "severe-event":
        if not (args.base and args.region):
            raise UsageError("severe-event needs --base probabilities and --region file")
        base_net = load_network(args.case, args.base)
        base = {l.id: l.pr for l in base_net.lines}
        region = probgen.parse_region(Path(args.region).read_text())
        pr = probgen.severe_event(base, region, args.severity)
    else:
        raise UsageError(f"unknown mode {args.mode!r}")
    _write(probgen.probability_csv(net, pr), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nkinterdict",
                                 description="probabilistic N-k interdiction solver")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="cutting-plane solve for one k")
    _solve_args(p)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("sweep", help="cutting-plane solve over a k range")
    _add_common(p)
    p.add_argument("--k-min", type=int, required=True)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--bound-from-z", action="store_true")
    p.add_argument("--node-limit", type=int, default=500_000)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("enumerate", help="complete enumeration table")
    _add_common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--cap", type=int, default=10 ** 6)
    p.set_defaults(fn=cmd_enumerate)

    p = sub.add_parser("compare", help="compare two solve reports")
    p.add_argument("report_a")
    p.add_argument("report_b")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("genprob", help="generate a probability CSV")
    p.add_argument("--case", required=True)
    p.add_argument("--mode", required=True,
                   choices=["det", "uniform", "texp", "range-uniform", "severe-event"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=float, default=None)
    p.add_argument("--budget-from", help="probability CSV whose sum defines the budget")
    p.add_argument("--reference", help="probability CSV defining the uniform range")
    p.add_argument("--base", help="base probability CSV for severe-event scaling")
    p.add_argument("--region", help="newline-separated line ids affected by the event")
    p.add_argument("--severity", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_genprob)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except GridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
