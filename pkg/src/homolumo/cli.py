"""Command-line interface: ``homolumo {gap,bridgeable,optimize,reproduce}``.

Exit codes:
  0  success
  1  ``reproduce`` found a value outside tolerance
  2  usage or graph parse error
  3  internal fault (cross-checks disagree, solver failure)
  4  graph not invertible, or bridge vertices not arbitrarily bridgeable
  5  no bridge satisfies the constraints
  6  enumeration budget exceeded
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys
import time
from dataclasses import asdict
from typing import Any, Sequence

import numpy as np

from . import __version__
from .bridging import (
    BridgeProblem,
    ConstraintSet,
    bridge,
    enumerate_bridgeable_subsets,
    format_bridging,
    parse_bridging,
)
from .errors import (
    BudgetExceededError,
    GraphFormatError,
    HomoLumoError,
    InfeasibleError,
    InternalFaultError,
    NotBridgeableError,
    NotInvertibleError,
    SolverError,
)
from .graph import Graph, builtin, dot_export, is_builtin_name, parse_graph
from .optimizer import (
    ENUM_BUDGET_BITS,
    BoundsReport,
    BridgeSolution,
    bounds_report,
    enumerate_opt_gap,
    exact_opt_gap,
    lower_bound,
    upper_bound_sdp,
)
from .reference import TABLES, TOLERANCE
from .spectral import GapResult, gap_via_inverse_sdp, homo_lumo_gap

SCHEMA_VERSION = 1
EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_FAULT, EXIT_SINGULAR, EXIT_INFEASIBLE, EXIT_BUDGET = range(7)
# ``reproduce`` enumerates rows with more bridge bits than this, up to the enumeration budget
REPRODUCE_BNB_BITS = 16


class UsageError(Exception):
    pass


def fmt(x: float | None) -> str:
    if x is None:
        return "-"
    return f"{x:.6g}"


def load_graph(source: str) -> Graph:
    """Builtin name, path to a JSON file, or inline JSON."""
    if is_builtin_name(source):
        return builtin(source)
    if os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            return parse_graph(fh.read())
    if source.lstrip().startswith("{"):
        return parse_graph(source)
    raise GraphFormatError(f"{source!r} is neither a builtin graph nor a readable file")


def parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def parse_bounds(text: str | None) -> tuple[tuple[int, int], ...] | None:
    """``lo:hi,lo:hi,...``."""
    if text is None:
        return None
    out = []
    for t in text.split(","):
        lo, sep, hi = t.partition(":")
        try:
            out.append((int(lo), int(hi)) if sep else (int(lo), int(lo)))
        except ValueError:
            raise UsageError(f"bad bound {t!r}; use lo:hi") from None
    return tuple(out)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def gap_dict(res: GapResult) -> dict:
    out = {
        "lambda_plus": res.lambda_plus if res.invertible else None,
        "lambda_minus": res.lambda_minus if res.invertible else None,
        "gap": res.gap,
        "invertible": res.invertible,
    }
    if res.spectrum is not None:
        out["spectrum"] = list(res.spectrum.eigenvalues)
    return out


def solution_dict(sol: BridgeSolution, p: BridgeProblem) -> dict:
    return {
        "gap": sol.gap,
        "mu": sol.mu,
        "eta": sol.eta,
        "K": sol.K_opt.K,
        "bridging": format_bridging(sol.K_opt, p.bridge_vertices),
        "spectrum": list(sol.spectrum.eigenvalues),
        "nodes_explored": sol.nodes_explored,
        "method": sol.method,
        "wall_time": sol.wall_time,
    }


def bounds_dict(rep: BoundsReport, p: BridgeProblem) -> dict:
    d = {k: v for k, v in asdict(rep).items() if k not in ("solution", "timings")}
    if rep.solution is not None:
        d["solution"] = solution_dict(rep.solution, p)
    return d


def make_report(argv: Sequence[str], instance: dict, results: dict, timings: dict, diagnostics: dict | None = None) -> dict:
    return _jsonable({
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "homolumo", "version": __version__},
        "command": list(argv),
        "instance": instance,
        "results": results,
        "timings": timings,
        "diagnostics": diagnostics or {},
    })


# With ``--json -`` the human-readable text goes to stderr and stdout carries only JSON.
_json_stdout = None


def write_json(report: dict, path: str | None) -> None:
    if path is None:
        return
    text = json.dumps(report, indent=2, ensure_ascii=False, allow_nan=False)
    if path == "-":
        print(text, file=_json_stdout or sys.stdout)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_gap(args, argv) -> int:
    G = load_graph(args.graph)
    t0 = time.perf_counter()
    res = homo_lumo_gap(G)
    timings = {"eigen": time.perf_counter() - t0}
    print(f"graph        {G}  (n={G.n}, edges={len(G.edges)})")
    print(f"invertible   {str(res.invertible).lower()}")
    print(f"lambda_plus  {fmt(res.lambda_plus) if res.invertible else '-'}")
    print(f"lambda_minus {fmt(res.lambda_minus) if res.invertible else '-'}")
    print(f"gap          {fmt(res.gap)}")
    print("spectrum     " + " ".join(fmt(v) for v in res.spectrum.eigenvalues))
    results = {"gap": gap_dict(res)}
    diagnostics = {}
    if args.via_sdp:
        if not res.invertible:
            raise NotInvertibleError(f"{G} is not invertible; the SDP formulation needs the inverse")
        t0 = time.perf_counter()
        sdp = gap_via_inverse_sdp(G)
        timings["sdp"] = time.perf_counter() - t0
        diff = abs(sdp.gap - res.gap)
        print(f"gap (SDP)    {fmt(sdp.gap)}  |diff| = {diff:.2e}")
        if diff > 1e-6:
            raise InternalFaultError(f"SDP gap {sdp.gap} disagrees with eigenvalue gap {res.gap}")
        results["gap_sdp"] = gap_dict(sdp)
        diagnostics["sdp_difference"] = diff
    write_json(make_report(argv, {"graph": G.name, "n": G.n, "edges": G.edges}, results, timings, diagnostics), args.json)
    return EXIT_OK


def cmd_bridgeable(args, argv) -> int:
    G = load_graph(args.graph)
    if not 1 <= args.k <= G.n // 2:
        raise UsageError(f"k must be in 1..{G.n // 2} for a graph on {G.n} vertices")
    subsets = enumerate_bridgeable_subsets(G, args.k)
    print(f"{len(subsets)} arbitrarily bridgeable {args.k}-subset(s) of {G}:")
    for s in subsets:
        print("  {" + ",".join(map(str, s)) + "}")
    write_json(make_report(argv, {"graph": G.name, "n": G.n, "k": args.k}, {"subsets": subsets}, {}), args.json)
    return EXIT_OK


def _problem(args) -> BridgeProblem:
    GA, GB = load_graph(args.GA), load_graph(args.GB)
    cs = ConstraintSet(args.max_degree, parse_bounds(args.row_bounds), parse_bounds(args.col_bounds))
    return BridgeProblem(GA, GB, parse_int_list(args.bridge), cs)


def _instance(p: BridgeProblem) -> dict:
    cs = p.constraints
    return {
        "GA": p.GA.name, "GB": p.GB.name, "n": p.n, "m": p.m,
        "bridge_vertices": p.bridge_vertices,
        "constraints": {"max_degree": cs.max_degree, "row_bounds": cs.row_bounds, "col_bounds": cs.col_bounds},
    }


def _print_solution(sol: BridgeSolution, p: BridgeProblem) -> None:
    print(f"optimal gap  {fmt(sol.gap)}  (mu={fmt(sol.mu)}, eta={fmt(sol.eta)})")
    print(f"bridging     {format_bridging(sol.K_opt, p.bridge_vertices)}")
    print(f"search       {sol.method}, {sol.nodes_explored} nodes, {sol.wall_time:.2f}s")


def cmd_optimize(args, argv) -> int:
    p = _problem(args)
    if args.dot and args.mode not in ("exact", "oracle", "all"):
        raise UsageError("--dot needs a mode that produces a bridge (exact, oracle or all)")
    print(p.describe())
    t0 = time.perf_counter()
    results: dict = {}
    sol = None
    if args.mode == "exact":
        sol = exact_opt_gap(p)
    elif args.mode == "oracle":
        sol = enumerate_opt_gap(p)
    elif args.mode == "upper-sdp":
        results["upper_sdp"] = v = upper_bound_sdp(p)
        print(f"upper_sdp    {fmt(v)}")
    elif args.mode == "lower-sdp":
        results["lower_sdp"] = v = lower_bound(p, "binary")
        print(f"lower_sdp    {fmt(v)}")
    elif args.mode == "lower-sir":
        results["lower_sir"] = v = lower_bound(p, "relaxed")
        print(f"lower_sir    {fmt(v)}")
    else:
        rep = bounds_report(p, include_exact=True, exact_method=args.exact_method)
        sol = rep.solution
        print("lower_sdp  lower_sir  opt  upper_sdp")
        print("  ".join(fmt(v) for v in (rep.lower_sdp, rep.lower_sir, rep.opt, rep.upper_sdp)))
        print(f"gap(G_A)     {fmt(rep.gap_of_GA)}")
        results["bounds"] = bounds_dict(rep, p)
    if sol is not None:
        _print_solution(sol, p)
        results.setdefault("solution", solution_dict(sol, p))
        if args.dot:
            GC = bridge(p.GA, p.GB, sol.K_opt)
            with open(args.dot, "w", encoding="utf-8") as fh:
                fh.write(dot_export(GC, sol.K_opt))
    write_json(make_report(argv, _instance(p), results, {"total": time.perf_counter() - t0}), args.json)
    return EXIT_OK


def cmd_reproduce(args, argv) -> int:
    rows, max_degree = TABLES[args.table]
    columns = ("lower_sdp", "lower_sir", "opt", "upper_sdp")
    print(f"table {args.table}" + (f" (max degree {max_degree})" if max_degree else "") + f", tolerance {TOLERANCE:g}")
    print(f"{'instance':<24}" + "".join(f"{c:>22}" for c in columns) + "  bridging")
    passed = failed = 0
    out_rows = []
    t_all = time.perf_counter()
    for row in rows:
        GA, GB = builtin(row.GA), builtin(row.GB)
        p = BridgeProblem(GA, GB, row.bridge, ConstraintSet(max_degree=max_degree))
        method = "enumerate" if REPRODUCE_BNB_BITS < p.n * p.k_B <= ENUM_BUDGET_BITS else "bnb"
        t0 = time.perf_counter()
        rep = bounds_report(p, include_exact=True, exact_method=method)
        elapsed = time.perf_counter() - t0
        cells = []
        ok_row = True
        for c in columns:
            got, want = getattr(rep, c), getattr(row, c)
            ok = abs(got - want) <= TOLERANCE
            ok_row &= ok
            cells.append({"column": c, "computed": got, "published": want, "pass": ok})
        sol = rep.solution
        GC = bridge(GA, GB, sol.K_opt)
        degree_ok = max_degree is None or int(GC.degrees().max()) <= max_degree
        ok_row &= degree_ok
        try:
            published_gap = homo_lumo_gap(bridge(GA, GB, parse_bridging(row.bridging, GA.n, GB.n))).gap
        except ValueError:
            published_gap = None
        line = f"{row.label:<24}" + "".join(
            f"{fmt(cell['computed']):>10} ({fmt(cell['published'])}){'' if cell['pass'] else '!'}".rjust(22) for cell in cells
        )
        print(f"{line}  {format_bridging(sol.K_opt, row.bridge)}  [{'PASS' if ok_row else 'FAIL'}, {method}, {elapsed:.1f}s]")
        passed += ok_row
        failed += not ok_row
        out_rows.append({
            "instance": row.label, "cells": cells, "bridging": format_bridging(sol.K_opt, row.bridge),
            "published_bridging": row.bridging, "published_bridging_gap": published_gap,
            "max_degree_ok": degree_ok, "method": method, "seconds": elapsed, "pass": ok_row,
        })
    print(f"{passed} passed, {failed} failed")
    results = {"rows": out_rows, "passed": passed, "failed": failed}
    write_json(make_report(argv, {"table": args.table, "max_degree": max_degree}, results,
                           {"total": time.perf_counter() - t_all}), args.json)
    return EXIT_MISMATCH if failed else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homolumo",
        description="HOMO-LUMO gaps of graphs and optimal bridging of two graphs.",
        epilog="Graphs are builtin names (P(n), C(n), K2, F0, F1, COMB(k)), JSON files or inline JSON.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gap", help="gap and spectrum of a graph")
    p.add_argument("graph")
    p.add_argument("--via-sdp", action="store_true", help="cross-check the gap with the inverse-matrix SDP")
    p.add_argument("--json", metavar="PATH", help="write a JSON report ('-' for stdout)")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("bridgeable", help="arbitrarily bridgeable vertex subsets")
    p.add_argument("graph")
    p.add_argument("k", type=int)
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=cmd_bridgeable)

    p = sub.add_parser("optimize", help="optimal bridge and bounds")
    p.add_argument("GA")
    p.add_argument("GB")
    p.add_argument("--bridge", required=True, help="bridge vertices of G_B, e.g. 1,4")
    p.add_argument("--mode", default="all", choices=("exact", "oracle", "upper-sdp", "lower-sdp", "lower-sir", "all"))
    p.add_argument("--max-degree", type=int, help="cap on every vertex degree of the bridged graph")
    p.add_argument("--row-bounds", metavar="LO:HI,...", help="bridge edges allowed at each G_A vertex")
    p.add_argument("--col-bounds", metavar="LO:HI,...", help="bridge edges allowed at each bridge vertex")
    p.add_argument("--exact-method", default="bnb", choices=("bnb", "enumerate"), help="exact search used by --mode all")
    p.add_argument("--dot", metavar="PATH", help="write the bridged graph as DOT")
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("reproduce", help="recompute a published table")
    p.add_argument("table", type=int, choices=(1, 2))
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    global _json_stdout
    to_stdout = getattr(args, "json", None) == "-"
    _json_stdout = sys.stdout if to_stdout else None
    try:
        with contextlib.redirect_stdout(sys.stderr) if to_stdout else contextlib.nullcontext():
            return args.func(args, argv)
    except (UsageError, GraphFormatError) as exc:
        print(f"homolumo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NotInvertibleError, NotBridgeableError) as exc:
        print(f"homolumo: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except InfeasibleError as exc:
        print(f"homolumo: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except BudgetExceededError as exc:
        print(f"homolumo: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InternalFaultError, SolverError) as exc:
        print(f"homolumo: internal fault: {exc}", file=sys.stderr)
        return EXIT_FAULT
    except (ValueError, OSError) as exc:
        print(f"homolumo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HomoLumoError as exc:
        print(f"homolumo: internal fault: {exc}", file=sys.stderr)
        return EXIT_FAULT
    finally:
        _json_stdout = None


if __name__ == "__main__":
    sys.exit(main())
