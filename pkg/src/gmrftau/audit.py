"""Numerical audits of the inequalities satisfied by tau(G, x) and the solved completions.

Every audit is pure: it solves what it needs, compares in log space where the
quantities can underflow, and records margins instead of raising on failure.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import integrate

from . import symmat
from .coupling import log_tau_complete, y_complete
from .errors import NotApplicable, ParameterError
from .graph import Graph, complete_bipartite, contract_edge, delete_edge, girth, hom_density
from .model import GmrfSolution
from .report import AuditReport, check, combine, worst_of
from .solver import log_tau, solve

AUDIT_TOL = 1e-8
FD_STEP = 1e-4
FD_THRESHOLD = 1e-5


def graph_inputs(g: Graph, **extra) -> dict:
    d = {"graph": {"n": g.n, "edges": [list(e) for e in g.edges]}}
    d.update(extra)
    return d


def first_interval_end(g: Graph) -> float:
    """Right end of [0, 1/(Delta-1)]; infinite when Delta <= 1."""
    delta = g.max_degree
    return math.inf if delta <= 1 else 1.0 / (delta - 1)


def second_interval_start(g: Graph) -> float:
    """Left end of [1/(dbar-1), 1]; infinite (empty interval) when dbar <= 1."""
    dbar = g.average_degree
    return math.inf if dbar <= 1 else 1.0 / (dbar - 1)


def _edge_threshold(x):
    return x / (1.0 - x * x)


# -- Sidorenko-type lower bound --------------------------------------------------

def sidorenko_check(g: Graph, x: float, tol=AUDIT_TOL) -> AuditReport:
    """ln tau(G, x) >= e(G) ln(1 - x^2); also at -x for bipartite graphs."""
    bip = g.is_bipartite()
    if x < 0 and not bip:
        raise NotApplicable("negative x is only covered for bipartite graphs")
    points = [x] + ([-x] if bip and x != 0 else [])
    parts = [
        check("tau_lower_bound", {"x": xv}, log_tau(g, xv), g.m * math.log1p(-xv * xv), tol)
        for xv in points
    ]
    return combine("sidorenko", graph_inputs(g, x=x), parts, tol)


# -- logarithmic derivative --------------------------------------------------

def log_derivative_check(g: Graph, x: float, h=FD_STEP, threshold=FD_THRESHOLD, tol=AUDIT_TOL):
    """Central difference of ln tau against -2 sum y, and the log-derivative inequality."""
    if not 0.0 < x < 1.0 or x + h >= 1.0 - 1e-6:
        raise ParameterError("need 0 < x and x + h inside the solvable range")
    sol = solve(g, x)
    sum_y = float(np.sum(sol.y_vector))
    fd = (log_tau(g, x + h) - log_tau(g, x - h)) / (2.0 * h)
    parts = [
        check(
            "finite_difference",
            {"h": h},
            threshold,
            abs(fd + 2.0 * sum_y),
            tol,
            f"d/dx ln tau ~ {fd:.12g}, -2 sum y = {-2 * sum_y:.12g}",
        )
    ]
    first = x <= first_interval_end(g)
    second = x >= second_interval_start(g)
    if first or second:
        which = "first" if first else "second"
        parts.append(
            check("log_ineq", {"interval": which}, 2 * g.m * _edge_threshold(x), 2 * sum_y, tol)
        )
    return combine("log_derivative", graph_inputs(g, x=x), parts, tol)


# -- tightness --------------------------------------------------------------

def alpha_integral(dbar: float, x: float) -> float:
    """Integral of 2(t(dbar-1)-1)/(dbar(1-t^2)) from 1/(dbar-1) to x."""
    if dbar <= 1:
        raise NotApplicable("need average degree > 1")
    u = 1.0 / (dbar - 1)
    if x == u:
        return 0.0
    if not u < x < 1.0:
        raise NotApplicable(f"need 1/(dbar-1) = {u:.6g} < x < 1")
    val, _err = integrate.quad(
        lambda t: 2.0 * (t * (dbar - 1) - 1.0) / (dbar * (1.0 - t * t)),
        u,
        x,
        epsabs=1e-12,
        epsrel=1e-12,
    )
    return val


def girth_deviation_bound(g: Graph, x: float) -> float:
    """2((Delta-1)|x|)^g / (1 - (Delta-1)|x|), zero for forests."""
    q = (g.max_degree - 1) * abs(x)
    gi = girth(g)
    if math.isinf(gi):
        return 0.0
    return 2.0 * q**gi / (1.0 - q)


def tightness_bounds(g: Graph, x: float, tol=AUDIT_TOL) -> AuditReport:
    if g.m == 0:
        raise NotApplicable("graph has no edges")
    dev = log_tau(g, x) / g.m - math.log1p(-x * x)
    parts = []
    if 0.0 <= x < first_interval_end(g):
        parts.append(check("first_interval", {}, girth_deviation_bound(g, x), abs(dev), tol))
    if second_interval_start(g) < x < 1.0:
        parts.append(check("second_interval", {}, dev, alpha_integral(g.average_degree, x), tol))
    return combine("tightness", graph_inputs(g, x=x), parts, tol)


# -- edge deletion / contraction ----------------------------------------------------

def deletion_contraction_audit(g: Graph, e, x: float, tol=AUDIT_TOL, hyp_tol=1e-9):
    if not 0.0 <= x < 1.0:
        raise ParameterError("x must lie in [0, 1)")
    u, v = min(e), max(e)
    sol = solve(g, x)
    y = sol.y[(u, v)]
    thr = _edge_threshold(x)
    lt = sol.log_tau
    l2 = math.log1p(-x * x)
    parts = []
    notes = f"y_e = {y:.12g}, x/(1-x^2) = {thr:.12g}"
    if abs(y) <= thr + hyp_tol:
        parts.append(check("deletion", {}, lt, l2 + log_tau(delete_edge(g, (u, v)), x), tol))
    if y >= thr - hyp_tol:
        parts.append(check("contraction", {}, lt, l2 + log_tau(contract_edge(g, (u, v)), x), tol))
    minus = solve(delete_edge(g, (u, v)), x)
    z = float(minus.A[u, v])
    rhs = 2 * math.log1p(-z * x) - math.log1p(-z * z) - l2 + lt
    parts.append(check("counterpart", {"z": z}, minus.log_tau, rhs, tol))
    return combine("deletion_contraction", graph_inputs(g, x=x, edge=[u, v]), parts, tol, notes)


# -- bounds from Schur complements ----------------------------------------------

def _max_clique_containing(g: Graph, u, v) -> int:
    common = sorted(g.adjacency[u] & g.adjacency[v])
    best = 0
    for r in range(len(common), 0, -1):
        if r <= best:
            break
        for sub in itertools.combinations(common, r):
            if g.is_clique(sub):
                best = r
                break
    return best + 2


def structural_bounds(sol: GmrfSolution, tol=AUDIT_TOL) -> AuditReport:
    """Vertex sums, edge and non-edge Schur complement bounds, and the clique bound."""
    spec = sol.spec
    if not spec.is_uniform or not 0.0 < spec.x < 1.0:
        raise ParameterError("structural bounds need a uniform x in (0, 1)")
    g, x = sol.graph, spec.x
    A = np.asarray(sol.A)
    Y = sol.Y
    y = sol.y
    thr = _edge_threshold(x)
    inputs = graph_inputs(g, x=x)
    parts = [
        worst_of("Y_lower", {}, ((u, Y[u], thr) for u in range(g.n) if g.degree(u)), tol),
        worst_of("vertex_sum_nonnegative", {}, ((u, Y[u], 0.0) for u in range(g.n)), tol),
        worst_of(
            "edge_schur",
            {},
            (((a, b), 2 + x * (Y[a] + Y[b]) + 2 * t, 2 / (1 - x)) for (a, b), t in y.items()),
            tol,
        ),
        worst_of(
            "nonedge_schur",
            {},
            (((a, b), 2 + x * (Y[a] + Y[b]), 2 / (1 - A[a, b])) for a, b in g.non_edges()),
            tol,
        ),
        check("sum_y_upper", {}, (g.n - 1) / (1 - x), 2 * sum(y.values()), tol),
    ]
    yv = sol.y_vector
    if yv.size and np.all(yv >= 0):
        parts.append(
            worst_of(
                "clique_y_bound",
                {},
                (((a, b), y_complete(_max_clique_containing(g, a, b), x), t) for (a, b), t in y.items()),
                tol,
            )
        )
    if x < first_interval_end(g):
        parts.append(worst_of("small_x_type_I_lower", {}, ((e, t, 0.0) for e, t in y.items()), tol))
        parts.append(worst_of("small_x_type_I_upper", {}, ((e, thr, t) for e, t in y.items()), tol))
        parts.append(worst_of("small_x_nonedge_z", {}, ((e, x, A[e]) for e in g.non_edges()), tol))
    return combine("structural_bounds", inputs, parts, tol)


def b_minors_check(sol: GmrfSolution, tol=AUDIT_TOL) -> AuditReport:
    """Principal minors of the precision matrix relative to its determinant."""
    g = sol.graph
    B = np.asarray(sol.B)
    ldB = -sol.log_tau
    items_v, items_e, items_t = [], [], []
    if g.n >= 2:
        for u in range(g.n):
            rest = [i for i in range(g.n) if i != u]
            items_v.append((u, 0.0, abs(symmat.logdet(symmat.principal(B, rest)) - ldB)))
    for (u, v), w in zip(g.edges, sol.spec.weight_vector()):
        rest = [i for i in range(g.n) if i not in (u, v)]
        if rest:
            got = symmat.logdet(symmat.principal(B, rest))
            items_e.append(((u, v), 0.0, abs(got - (math.log1p(-w * w) + ldB))))
        for frac in (-0.5, 0.5):
            t = frac / (1 - w * w)
            E = np.zeros_like(B)
            E[u, u] = E[v, v] = w
            E[u, v] = E[v, u] = -1.0
            got = symmat.logdet(B - t * E)
            want = ldB + math.log1p(-(t * (1 - w * w)) ** 2)
            items_t.append(((u, v, t), 0.0, abs(got - want)))
    parts = [
        worst_of("delete_vertex", {}, items_v, tol),
        worst_of("delete_edge_pair", {}, items_e, tol),
        worst_of("edge_perturbation", {}, items_t, tol),
    ]
    return combine("b_minors", graph_inputs(g), parts, tol, "lhs 0 vs |log-det discrepancy|")


def vertex_transitive_check(sol: GmrfSolution, tol=AUDIT_TOL) -> AuditReport:
    """For a vertex-transitive input: y > 0 on edges (with the 1/n lower bound) and z < x off edges."""
    g, x = sol.graph, sol.spec.x
    if not sol.spec.is_uniform or not 0 < x < 1:
        raise ParameterError("needs a uniform x in (0, 1)")
    y = sol.y
    A = np.asarray(sol.A)
    parts = [
        worst_of("y_positive", {}, ((e, t, 0.0) for e, t in y.items()), tol),
        worst_of("y_remark_lower", {}, ((e, t, x / ((1 - x) * g.n)) for e, t in y.items()), tol),
        worst_of("z_below_x", {}, ((e, x, A[e]) for e in g.non_edges()), tol),
    ]
    return combine("vertex_transitive", graph_inputs(g, x=x), parts, tol)


# -- convexity of tau in x ------------------------------------------------------

def convexity_suite(g: Graph, x1: float, x2: float, alpha: float, tol=AUDIT_TOL):
    if not (0.0 <= x1 < x2 < 1.0 and 0.0 < alpha < 1.0):
        raise ParameterError("need 0 <= x1 < x2 < 1 and 0 < alpha < 1")
    l1, l2 = log_tau(g, x1), log_tau(g, x2)
    lmid = log_tau(g, alpha * x1 + (1 - alpha) * x2)
    lprod = log_tau(g, x1 * x2)
    t1, t2, tp = math.exp(l1), math.exp(l2), math.exp(lprod)
    parts = [
        check("monotone", {}, l1, l2, tol),
        check("log_concave", {}, lmid, alpha * l1 + (1 - alpha) * l2, tol),
        check("oppenheim_sum", {}, tp + t1 * t2, t1 + t2, tol),
        check("product_monotone", {}, lprod, l1, tol),
    ]
    return combine("convexity", graph_inputs(g, x1=x1, x2=x2, alpha=alpha), parts, tol)


# -- regular graphs ----------------------------------------------------------

KDD_MAX = 12


def regular_comparison(g: Graph, x: float, tol=AUDIT_TOL) -> AuditReport:
    if not g.is_regular() or g.max_degree == 0:
        raise NotApplicable("needs a regular graph with edges")
    d = g.max_degree
    per_vertex = log_tau(g, x) / g.n
    parts = []
    if 0.0 < x < 1.0:
        parts.append(check("complete", {"d": d}, log_tau_complete(d + 1, x) / (d + 1), per_vertex, tol))
    if g.is_bipartite() and d <= KDD_MAX:
        kdd = log_tau(complete_bipartite(d, d), x) / (2 * d)
        parts.append(check("complete_bipartite", {"d": d}, kdd, per_vertex, tol))
    return combine("regular_comparison", graph_inputs(g, x=x), parts, tol)


# -- entropy -------------------------------------------------------------------

def entropy_report(sol: GmrfSolution, tol=AUDIT_TOL) -> AuditReport:
    """Field entropy minus edge entropies plus (deg-1) point entropies, which is >= 0."""
    if not sol.spec.is_uniform:
        raise ParameterError("entropy report needs uniform x")
    g, x = sol.graph, sol.spec.x
    c = math.log(2 * math.pi * math.e)
    field = 0.5 * g.n * c + 0.5 * sol.log_tau
    edge = c + 0.5 * math.log1p(-x * x)
    point = 0.5 * c
    total = field - g.m * edge + sum((d - 1) * point for d in g.degrees)
    closed = 0.5 * (sol.log_tau - g.m * math.log1p(-x * x))
    scale = 1e-10 * (1.0 + abs(field) + g.m * abs(edge) + g.n * point * (g.max_degree + 1))
    notes = "" if (x >= 0 or g.is_bipartite()) else "x < 0 on a non-bipartite graph: inequality not guaranteed"
    parts = [
        check("entropy_inequality", {"value": total}, total, 0.0, tol),
        check("closed_form", {"half_log_ratio": closed}, scale, abs(total - closed), tol),
    ]
    return combine("entropy", graph_inputs(g, x=x), parts, tol, notes)


# -- multiplicative inequalities ----------------------------------------------

def small_graphs(max_n=4):
    """All labelled graphs with 1..max_n vertices and at least one edge (plus K1)."""
    out = [Graph(1, ())]
    for n in range(2, max_n + 1):
        pairs = list(itertools.combinations(range(n), 2))
        for mask in range(1, 1 << len(pairs)):
            out.append(Graph.from_edges(n, [p for i, p in enumerate(pairs) if mask >> i & 1]))
    return out


def hom_inequality_holds(pairs, max_target=4):
    """Brute-force check of prod t(G_i, H)^a_i >= 1 over all small targets H; returns (ok, witness)."""
    for h in small_graphs(max_target):
        if h.m == 0:
            continue
        total = 0.0
        for gi, a in pairs:
            t = hom_density(gi, h)
            if t == 0:
                total += -math.inf if a > 0 else (math.inf if a < 0 else 0.0)
            else:
                total += a * math.log(t)
        if not total >= -1e-12:
            return False, h
    return True, None


def multiplicative_inequality_check(pairs, x: float, tol=AUDIT_TOL, cross_check=True):
    """sum a_i ln tau(G_i, x) >= 0 for a family declared to satisfy the density inequality."""
    pairs = [(gi, float(a)) for gi, a in pairs]
    lhs = sum(a * log_tau(gi, x) for gi, a in pairs)
    notes = ""
    if cross_check and all(gi.n <= 6 for gi, _ in pairs):
        ok, witness = hom_inequality_holds(pairs)
        notes = (
            "density inequality confirmed on all targets with <= 4 vertices"
            if ok
            else f"density inequality FAILS for target {witness.edges} on {witness.n} vertices"
        )
    inputs = {
        "family": [{"n": gi.n, "edges": [list(e) for e in gi.edges], "power": a} for gi, a in pairs],
        "x": x,
    }
    return check("multiplicative", inputs, lhs, 0.0, tol, notes)


# -- battery -----------------------------------------------------------------

def _deletion_contraction_all(g, x, tol):
    reports = [deletion_contraction_audit(g, e, x, tol) for e in g.edges]
    return combine("deletion_contraction", graph_inputs(g, x=x), reports, tol, "all edges")


def _sidorenko_family(g, x, tol):
    if not g.is_bipartite() or g.m == 0:
        raise NotApplicable("density family only formed for bipartite graphs")
    k2 = Graph(2, ((0, 1),))
    return multiplicative_inequality_check([(g, 1), (k2, -g.m)], x, tol, cross_check=g.n <= 6)


def _vertex_transitive(g, x, tol):
    from .graph import is_vertex_transitive

    if g.m == 0 or g.n > 20 or not is_vertex_transitive(g):
        raise NotApplicable("not a vertex-transitive graph with edges")
    return vertex_transitive_check(solve(g, x), tol)


def _zeta(g, x, tol):
    from .zeta import zeta_tau_audit

    return zeta_tau_audit(g, x, tol)


def _mckay(g, x, tol):
    from .trees import mckay_audit

    return mckay_audit(g, tol=tol).certificate


def battery_step(x):
    """FD_STEP, shrunk near x = 1 where the third derivative of ln tau grows like (1-x)^-3."""
    return FD_STEP * min(1.0, ((1.0 - x) / 0.2) ** 1.5)


BATTERY = (
    ("sidorenko", lambda g, x, tol: sidorenko_check(g, x, tol)),
    ("log_derivative", lambda g, x, tol: log_derivative_check(g, x, h=battery_step(x), tol=tol)),
    ("tightness", lambda g, x, tol: tightness_bounds(g, x, tol)),
    ("deletion_contraction", _deletion_contraction_all),
    ("structural_bounds", lambda g, x, tol: structural_bounds(solve(g, x), tol)),
    ("b_minors", lambda g, x, tol: b_minors_check(solve(g, x), tol)),
    ("vertex_transitive", _vertex_transitive),
    ("convexity", lambda g, x, tol: convexity_suite(g, x / 2, x, 0.5, tol)),
    ("regular_comparison", lambda g, x, tol: regular_comparison(g, x, tol)),
    ("entropy", lambda g, x, tol: entropy_report(solve(g, x), tol)),
    ("multiplicative", _sidorenko_family),
    ("zeta_tau", _zeta),
    ("mckay", _mckay),
)


def run_battery(g: Graph, x: float, tol=AUDIT_TOL):
    """Every audit once; returns ``(claim, report_or_None, reason)`` with None for skipped claims."""
    if not 0.0 < x < 1.0:
        raise ParameterError("the battery runs at x in (0, 1)")
    out = []
    for claim, fn in BATTERY:
        try:
            out.append((claim, fn(g, x, tol), ""))
        except (NotApplicable, ParameterError) as exc:
            out.append((claim, None, str(exc)))
    return out
