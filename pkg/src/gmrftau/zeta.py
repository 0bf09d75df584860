"""Ihara zeta function: three-term determinant and non-backtracking edge matrix."""

from __future__ import annotations

import math

import numpy as np
from scipy import linalg

from . import symmat
from .errors import NotApplicable, NotPositiveDefinite, ParameterError, PoleError, SizeGuardError
from .graph import Graph, girth
from .model import CorrelationSpec, dual_matrix
from .report import check, combine

POLE_TOL = 1e-13
EDGE_MATRIX_LIMIT = 2000
TRACE_POWER_CAP = 12


def directed_edges(g: Graph):
    """Arc list: edge i gives arcs 2i = (u, v) and 2i+1 = (v, u)."""
    arcs = []
    for u, v in g.edges:
        arcs += [(u, v), (v, u)]
    return arcs


def directed_edge_matrix(g: Graph) -> np.ndarray:
    """0/1 matrix with M[e, f] = 1 when f continues e without reversing it."""
    arcs = directed_edges(g)
    if len(arcs) > EDGE_MATRIX_LIMIT:
        raise SizeGuardError(f"2e = {len(arcs)} exceeds {EDGE_MATRIX_LIMIT}")
    by_tail = {}
    for j, (a, _b) in enumerate(arcs):
        by_tail.setdefault(a, []).append(j)
    M = np.zeros((len(arcs), len(arcs)), dtype=np.int64)
    for i, (a, b) in enumerate(arcs):
        for j in by_tail.get(b, ()):
            if arcs[j][1] != a:
                M[i, j] = 1
    return M


def bass_matrix(g: Graph, x: float) -> np.ndarray:
    """I - xA + (D - I)x^2."""
    A = g.adjacency_matrix()
    D = np.diag(np.asarray(g.degrees, dtype=float))
    eye = np.eye(g.n)
    return eye - x * A + (D - eye) * x * x


def _check_x(x):
    if not -1.0 < x < 1.0:
        raise ParameterError("x must lie in (-1, 1)")


def log_zeta_bass(g: Graph, x: float) -> float:
    """ln zeta_G(x); requires the three-term determinant to be positive."""
    _check_x(x)
    sign, ld = np.linalg.slogdet(bass_matrix(g, x))
    if sign == 0 or ld < math.log(POLE_TOL):
        raise PoleError(x)
    if sign < 0:
        raise NotApplicable(f"zeta is negative at x={x}; no logarithm")
    return -(g.m - g.n) * math.log1p(-x * x) - ld


def zeta_bass(g: Graph, x: float) -> float:
    _check_x(x)
    sign, ld = np.linalg.slogdet(bass_matrix(g, x))
    if sign == 0 or ld < math.log(POLE_TOL):
        raise PoleError(x)
    return float(sign) * math.exp(-(g.m - g.n) * math.log1p(-x * x) - ld)


def zeta_edge(g: Graph, x: float) -> float:
    """1 / det(I - xM), by LU with partial pivoting."""
    _check_x(x)
    if g.m == 0:
        return 1.0
    M = directed_edge_matrix(g)
    lu, piv = linalg.lu_factor(np.eye(M.shape[0]) - x * M, check_finite=False)
    d = np.diag(lu)
    swaps = int(np.sum(piv != np.arange(piv.size)))
    if np.any(np.abs(d) == 0.0):
        raise PoleError(x)
    ld = float(np.sum(np.log(np.abs(d))))
    if ld < math.log(POLE_TOL):
        raise PoleError(x)
    sign = (-1) ** swaps * int(np.prod(np.sign(d)))
    return sign * math.exp(-ld)


def trace_powers(g: Graph, kmax=None) -> list:
    """Exact integers tr(M^k) for k = 1..kmax (default min(girth - 1, 12))."""
    if kmax is None:
        gi = girth(g)
        kmax = TRACE_POWER_CAP if math.isinf(gi) else min(int(gi) - 1, TRACE_POWER_CAP)
    if g.m == 0 or kmax < 1:
        return []
    M = directed_edge_matrix(g)
    bound = 2 * g.m * max(g.max_degree - 1, 1) ** kmax
    if bound < 2**62:
        P, out = M.copy(), []
        for _ in range(kmax):
            out.append(int(np.trace(P)))
            P = P @ M
        return out
    P, Mo, out = M.astype(object), M.astype(object), []
    for _ in range(kmax):
        out.append(int(np.trace(P)))
        P = P.dot(Mo)
    return out


def zeta_matrix(g: Graph, x: float) -> np.ndarray:
    """Z_G(x) = (I - xA + (D - I)x^2) / (1 - x^2)."""
    return bass_matrix(g, x) / (1.0 - x * x)


def zeta_tau_audit(g: Graph, x: float, tol=1e-8):
    """Zeta bounds on tau in the first interval |x| < 1/(Delta - 1)."""
    from .audit import girth_deviation_bound, graph_inputs
    from .solver import log_tau

    _check_x(x)
    if g.m == 0:
        raise NotApplicable("graph has no edges")
    delta = g.max_degree
    if delta > 1 and abs(x) >= 1.0 / (delta - 1):
        raise NotApplicable(f"|x| must be below 1/(Delta-1) = {1.0 / (delta - 1):.6g}")
    Z = zeta_matrix(g, x)
    t = x / (1.0 - x * x)
    spec = CorrelationSpec.uniform(g, x)
    param_gap = float(np.max(np.abs(Z - dual_matrix(spec, np.full(g.m, t)))))
    try:
        symmat.cholesky(Z)
        min_eig = symmat.min_eigenvalue(Z)
    except NotPositiveDefinite:
        min_eig = -math.inf
    lz = log_zeta_bass(g, x)
    lt = log_tau(g, x)
    l2 = math.log1p(-x * x)
    dev_bound = girth_deviation_bound(g, x)
    parts = [
        check("Z_in_B_set", {"t": t}, 1e-12 * (1 + abs(t) * delta), param_gap, tol),
        check("Z_positive_definite", {}, min_eig, 0.0, 0.0),
        check("logdet_Z_le_logdet_B", {}, -lt, symmat.logdet(Z), tol),
        check("zeta_tau", {}, lz + g.m * l2, lt, tol),
        check("log_zeta_girth", {}, g.m * dev_bound, lz, tol),
    ]
    if x >= 0:
        parts.append(check("tightness_first_interval", {}, dev_bound, abs(lt / g.m - l2), tol))
    return combine("zeta_tau", graph_inputs(g, x=x), parts, tol)
