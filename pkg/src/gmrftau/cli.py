"""Command-line front end.

Graphs are given as ``family:params`` (``cycle:4``, ``regular:20,3,seed=7``,
``gnp:10,0.4,seed=1``, ``petersen``) or ``file:path`` for an edge list.
Exit status: 0 success, 1 failed verification, 2 usage error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from . import audit, corpus, graph, ldp, series, solver, trees, zeta
from .errors import GmrfError, NotApplicable, ParameterError, PoleError

ALIASES = {
    "regular": "random_regular",
    "gnp": "erdos_renyi",
    "er": "erdos_renyi",
    "tree": "random_tree",
    "chordal": "random_chordal",
    "bipartite": "complete_bipartite",
    "mobius": "mobius_ladder",
}


class UsageError(Exception):
    pass


# -- parsing helpers ------------------------------------------------------------

def _number(text):
    try:
        return int(text)
    except ValueError:
        return float(text)


def load_graph(expr: str) -> graph.Graph:
    """Graph from a generator expression or ``file:path``."""
    family, _, rest = expr.partition(":")
    if family == "file":
        path = Path(rest)
        if not path.exists():
            bundled = resources.files("gmrftau") / "data" / rest
            if not bundled.is_file():
                raise UsageError(f"edge-list file not found: {rest}")
            return graph.parse_edge_list(bundled.read_text())
        return graph.read_edge_list(path)
    family = ALIASES.get(family, family)
    params, seed = [], None
    for tok in filter(None, (t.strip() for t in rest.split(","))):
        if tok.startswith("seed="):
            seed = int(tok[5:])
        else:
            try:
                params.append(_number(tok))
            except ValueError:
                raise UsageError(f"bad parameter {tok!r} in {expr!r}")
    try:
        return graph.generate(family, params, seed)
    except GmrfError as exc:
        raise UsageError(str(exc))


def parse_grid(text: str):
    """``a:b:num`` (inclusive linspace) or a comma list."""
    try:
        if text.count(":") == 2:
            a, b, num = text.split(":")
            return [round(float(v), 12) for v in np.linspace(float(a), float(b), int(num))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad grid {text!r}")


def parse_ints(text: str):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad integer list {text!r}")


def parse_interval(text: str):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"interval must be lo,hi (got {text!r})")
    return lo, hi


# -- output ------------------------------------------------------------------

def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(type(obj).__name__)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def dump_csv(rows, fields) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r.get(k)) for k in fields})
    return buf.getvalue()


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def emit(text: str, out):
    if out:
        Path(out).write_text(text, newline="\n")
    else:
        sys.stdout.write(text)


def _pmap(fn, items, jobs):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


# -- subcommands ---------------------------------------------------------------

def cmd_solve(args):
    g = load_graph(args.graph)
    sol = solver.solve(g, args.x, method=args.method, tol=args.tol)
    emit(dump_json(sol.to_dict()), args.out)
    return 0


def _battery_task(item):
    g, x, tol = item
    return x, audit.run_battery(g, x, tol)


def cmd_verify(args):
    g = load_graph(args.graph)
    results = _pmap(_battery_task, [(g, x, args.audit_tol) for x in args.x], args.jobs)
    summary = {}
    lines = []
    for x, battery in results:
        for claim, report, reason in battery:
            row = summary.setdefault(claim, {"claim": claim, "checked": 0, "passed": 0, "failed": 0,
                                            "skipped": 0, "worst_margin": None})
            if report is None:
                row["skipped"] += 1
                continue
            row["checked"] += 1
            row["passed" if report.passed else "failed"] += 1
            m = report.margin
            row["worst_margin"] = m if row["worst_margin"] is None else min(row["worst_margin"], m)
            lines.append(json.dumps(report.to_dict(), default=_json_default))
    if args.reports:
        Path(args.reports).write_text("\n".join(lines) + "\n", newline="\n")
    rows = list(summary.values())
    if args.format == "json":
        emit(dump_json(rows), args.out)
    else:
        emit(dump_csv(rows, ["claim", "checked", "passed", "failed", "skipped", "worst_margin"]), args.out)
    return 1 if any(r["failed"] for r in rows) else 0


SWEEP_FIELDS = ["x", "log_tau", "tau", "sum_y", "min_y", "max_y", "sidorenko_margin",
                "log_ineq_margin", "type_I", "type_II", "type_III", "boundary"]


def _sweep_row(item):
    g, x, tol = item
    sol = solver.solve(g, x, tol=tol)
    yv = sol.y_vector
    row = {"x": x, "log_tau": sol.log_tau, "tau": sol.tau, "sum_y": float(yv.sum()) if yv.size else 0.0,
           "min_y": float(yv.min()) if yv.size else None, "max_y": float(yv.max()) if yv.size else None,
           "sidorenko_margin": sol.log_tau - g.m * math.log1p(-x * x)}
    if 0 < x < 1 and (x <= audit.first_interval_end(g) or x >= audit.second_interval_start(g)):
        row["log_ineq_margin"] = 2 * g.m * x / (1 - x * x) - 2 * row["sum_y"]
    if 0 < x < 1 and g.m:
        cls = solver.classify_edges(sol)
        for lab, key in (("I", "type_I"), ("II", "type_II"), ("III", "type_III"), ("Boundary", "boundary")):
            row[key] = cls.count(lab)
    return row


def cmd_sweep(args):
    g = load_graph(args.graph)
    rows = _pmap(_sweep_row, [(g, x, args.tol) for x in args.grid], args.jobs)
    emit(dump_csv(rows, SWEEP_FIELDS), args.out)
    return 0


ZETA_FIELDS = ["x", "zeta_bass", "zeta_edge", "zeta_times_edge_factor", "tau", "zeta_tau_margin",
               "girth_bound_margin", "tightness_margin", "note"]


def _zeta_row(item):
    g, x = item
    row = {"x": x, "tau": solver.tau(g, x)}
    try:
        row["zeta_bass"] = zeta.zeta_bass(g, x)
        if 2 * g.m <= zeta.EDGE_MATRIX_LIMIT:
            row["zeta_edge"] = zeta.zeta_edge(g, x)
    except PoleError:
        row["note"] = "pole"
        return row
    row["zeta_times_edge_factor"] = row["zeta_bass"] * (1 - x * x) ** g.m
    try:
        rep = zeta.zeta_tau_audit(g, x)
    except NotApplicable:
        return row
    parts = {p.claim: p.margin for p in rep.parts}
    row["zeta_tau_margin"] = parts["zeta_tau"]
    row["girth_bound_margin"] = parts["log_zeta_girth"]
    row["tightness_margin"] = parts.get("tightness_first_interval")
    return row


def cmd_zeta(args):
    g = load_graph(args.graph)
    rows = _pmap(_zeta_row, [(g, x) for x in args.grid], args.jobs)
    emit(dump_csv(rows, ZETA_FIELDS), args.out)
    return 0


def cmd_trees(args):
    g = load_graph(args.graph)
    try:
        out = trees.mckay_audit(g).to_dict()
    except NotApplicable as exc:
        out = {"n": g.n, "count": str(trees.count_spanning_trees(g)), "mckay": f"not applicable: {exc}"}
    emit(dump_json(out), args.out)
    return 0


LDP_FIELDS = ["k", "n", "samples", "hits", "p_hat", "se", "emp_rate", "theo_rate", "gap",
              "low_hits", "lower_bound_rate"]


def cmd_ldp(args):
    g = load_graph(args.graph)
    lo, hi = args.interval
    region = ldp.EdgeIntervalRegion(g, lo, hi)
    ests = ldp.ldp_estimate(region, args.n, args.samples, args.seed, args.jobs, args.sampler)
    emit(dump_csv([e.row() for e in ests], LDP_FIELDS), args.out)
    return 0


def cmd_series(args):
    g = load_graph(args.graph)
    res = series.tau_series(g, args.order)
    emit(dump_json(res.to_dict()), args.out)
    return 0


def _scan_task(item):
    label, g, xs, tol = item
    best_z, best_excess = None, None
    for x in xs:
        sol = solver.solve(g, x, tol=tol)
        A = np.asarray(sol.A)
        iu = np.triu_indices(g.n, 1)
        if iu[0].size:
            k = int(np.argmin(A[iu]))
            cand = (float(A[iu][k]), x, [int(iu[0][k]), int(iu[1][k])])
            if best_z is None or cand[0] < best_z[0]:
                best_z = cand
        thr = x / (1 - x * x)
        for e, y in sol.y.items():
            if best_excess is None or y - thr > best_excess[0]:
                best_excess = (y - thr, x, list(e))
    return label, best_z, best_excess


def cmd_scan(args):
    corp = corpus.random_corpus(args.count, n_max=args.n_max, ps=tuple(args.p), seed=args.seed)
    # entries across components are trivially zero
    corp = [(lab, g) for lab, g in corp if g.is_connected()]
    results = _pmap(_scan_task, [(lab, g, args.grid, args.tol) for lab, g in corp], args.jobs)
    min_entry, max_excess = None, None
    for label, bz, be in results:
        if bz and (min_entry is None or bz[0] < min_entry["value"]):
            min_entry = {"value": bz[0], "x": bz[1], "pair": bz[2], "graph": label}
        if be and (max_excess is None or be[0] > max_excess["value"]):
            max_excess = {"value": be[0], "x": be[1], "edge": be[2], "graph": label}
    out = {"graphs": len(corp), "x_grid": args.grid, "min_entry_of_A": min_entry,
           "max_y_minus_edge_threshold": max_excess}
    emit(dump_json(out), args.out)
    return 0


# -- parser -------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _typed(fn):
    def wrap(text):
        try:
            return fn(text)
        except UsageError as exc:
            raise argparse.ArgumentTypeError(str(exc))

    wrap.__name__ = fn.__name__
    return wrap


def build_parser():
    p = _Parser(prog="gmrftau", description="Max-determinant completions and tau(G, x) audits.")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for grids and corpora")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def jobs(sp):
        sp.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="worker processes")

    def common(sp, x=False, grid=False):
        jobs(sp)
        sp.add_argument("--graph", required=True, help="family:params, or file:path")
        sp.add_argument("--out", help="output file (default stdout)")
        if x:
            sp.add_argument("--x", type=float, required=True)
        if grid:
            sp.add_argument("--grid", type=_typed(parse_grid), default=parse_grid("0.1:0.9:9"),
                            help="a:b:num or comma list of x values")
        sp.add_argument("--tol", type=float, default=solver.DEFAULT_TOL)

    sp = sub.add_parser("solve", help="solve for A_G(x) and print JSON")
    common(sp, x=True)
    sp.add_argument("--method", default="dual_ascent", choices=["dual_ascent", "recoupling", "chordal_exact"])
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("verify", help="run every audit; nonzero exit on any failure")
    common(sp)
    sp.add_argument("--x", type=float, nargs="+", required=True)
    sp.add_argument("--audit-tol", type=float, default=audit.AUDIT_TOL)
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--reports", help="write every AuditReport here as JSON lines")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sweep", help="CSV of ln tau, sum y and margins over an x grid")
    common(sp, grid=True)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("zeta", help="CSV of zeta values and zeta bounds over an x grid")
    common(sp, grid=True)
    sp.set_defaults(func=cmd_zeta)

    sp = sub.add_parser("trees", help="spanning-tree count and the regular-graph bound")
    common(sp)
    sp.set_defaults(func=cmd_trees)

    sp = sub.add_parser("ldp", help="Monte Carlo large-deviation rates for an edge-interval region")
    common(sp)
    sp.add_argument("--interval", type=_typed(parse_interval), required=True, help="lo,hi")
    sp.add_argument("--n", type=_typed(parse_ints), required=True, help="comma list of dimensions")
    sp.add_argument("--samples", type=int, default=10**6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sampler", choices=["bartlett", "gaussian"], default="bartlett")
    sp.set_defaults(func=cmd_ldp)

    sp = sub.add_parser("series", help="integer power-series coefficients of tau(G, x)")
    common(sp)
    sp.add_argument("--order", type=int, default=10)
    sp.set_defaults(func=cmd_series)

    sp = sub.add_parser("scan", help="search random graphs for small entries of A and large y")
    jobs(sp)
    sp.add_argument("--count", type=int, default=50)
    sp.add_argument("--n-max", type=int, default=10)
    sp.add_argument("--p", type=float, nargs="+", default=[0.3, 0.6])
    sp.add_argument("--grid", type=_typed(parse_grid), default=parse_grid("0.1:0.9:9"))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=solver.DEFAULT_TOL)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_scan)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    try:
        return args.func(args)
    except (UsageError, ParameterError) as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"gmrftau: error: {exc}\n")
        return 2
    except (GmrfError, ArithmeticError, np.linalg.LinAlgError) as exc:
        sys.stdout.write(dump_json({"error": type(exc).__name__, "message": str(exc)}))
        return 3


if __name__ == "__main__":
    sys.exit(main())
