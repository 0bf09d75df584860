"""Determinant-maximising completions: recoupling sweeps and Newton ascent on the dual.

Both solvers return a :class:`~gmrftau.model.GmrfSolution` whose constrained
entries (unit diagonal, edge values) are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import symmat
from .coupling import CouplingLayout, couple
from .errors import InfeasibleSpec, NoConvergence, NotPositiveDefinite, ParameterError
from .graph import Graph
from .model import CorrelationSpec, GmrfSolution, kkt_residuals, make_solution

DEFAULT_TOL = 1e-10
MAX_SWEEPS = 10_000
MAX_NEWTON = 500
T_NORM_LIMIT = 1e8


def _as_spec(g_or_spec, x=None) -> CorrelationSpec:
    if isinstance(g_or_spec, CorrelationSpec):
        return g_or_spec
    if x is None:
        raise ParameterError("x is required when passing a bare graph")
    if np.isscalar(x):
        return CorrelationSpec.uniform(g_or_spec, x)
    return CorrelationSpec.per_edge(g_or_spec, x)


# -- recoupling --------------------------------------------------------------

def recoupling_step(M, v, w):
    """One literal recoupling step: couple the principal submatrices missing v and w."""
    n = M.shape[0]
    a = tuple(i for i in range(n) if i != v)
    b = tuple(i for i in range(n) if i != w)
    return couple(symmat.principal(M, a), symmat.principal(M, b), CouplingLayout(a, b))


def initial_matrix(spec: CorrelationSpec) -> np.ndarray:
    """Starting point: the all-x matrix (uniform) or edge values with a constant fill."""
    if spec.is_uniform:
        m0 = symmat.constant_correlation(spec.graph.n, spec.x)
        symmat.cholesky(m0)
        return m0
    w = spec.weight_vector()
    fills = [float(np.mean(w)), 0.0] if w.size else [0.0]
    for fill in fills:
        m0 = spec.constrained_matrix(fill)
        if symmat.is_positive_definite(m0):
            return m0
    raise NotPositiveDefinite(-1, "no positive definite starting matrix; use dual ascent")


def solve_recoupling(spec, x=None, tol=DEFAULT_TOL, max_sweeps=MAX_SWEEPS) -> GmrfSolution:
    """Cyclic recoupling over the non-edges in lexicographic order.

    Each step replaces the current matrix by the coupling of its two principal
    submatrices that omit one endpoint of a non-edge, which zeroes that entry of
    the inverse. Implemented as the equivalent rank-two update of the inverse;
    the inverse is refactorised after every sweep.
    """
    spec = _as_spec(spec, x)
    spec.check_solvable_range()
    g = spec.graph
    M = initial_matrix(spec)
    non_edges = g.non_edges()
    P, ld = symmat.inverse_logdet(M)
    trace = [ld]
    if not non_edges:
        return make_solution(spec, M, "recoupling", 0, trace)
    ne = np.array(non_edges)
    sweeps = 0
    residual = float(np.max(np.abs(P[ne[:, 0], ne[:, 1]])))
    while residual >= tol:
        if sweeps >= max_sweeps:
            raise NoConvergence(residual, sweeps)
        for v, w in non_edges:
            idx = [v, w]
            p2 = P[np.ix_(idx, idx)]
            det2 = p2[0, 0] * p2[1, 1] - p2[0, 1] ** 2
            delta = p2[0, 1] / det2
            if delta == 0.0:
                continue
            M[v, w] += delta
            M[w, v] += delta
            c = np.array([[0.0, delta], [delta, 0.0]])
            k = c @ np.linalg.inv(np.eye(2) + p2 @ c)
            pu = P[:, idx]
            P -= pu @ k @ pu.T
        P, ld = symmat.inverse_logdet(M)
        if ld < trace[-1] - 1e-9 * max(1.0, abs(ld)):
            raise NoConvergence(residual, sweeps, "log-determinant decreased during recoupling")
        trace.append(ld)
        sweeps += 1
        residual = float(np.max(np.abs(P[ne[:, 0], ne[:, 1]])))
    return make_solution(spec, M, "recoupling", sweeps, trace)


# -- dual Newton ascent -------------------------------------------------------------

class _DualProblem:
    """ln det B(t) with B(t) = I + sum_e t_e E_e, E_e = w_e(e_u e_u' + e_v e_v') - (e_u e_v' + e_v e_u')."""

    def __init__(self, spec):
        self.spec = spec
        g = spec.graph
        self.n = g.n
        self.w = spec.weight_vector()
        e = np.array(g.edges, dtype=int).reshape(-1, 2)
        self.u, self.v = e[:, 0], e[:, 1]
        self.rows = np.stack([self.u, self.v, self.u, self.v], axis=1)
        self.cols = np.stack([self.u, self.v, self.v, self.u], axis=1)
        one = np.ones_like(self.w)
        self.coef = np.stack([self.w, self.w, -one, -one], axis=1)

    def matrix(self, t):
        b = np.eye(self.n)
        np.add.at(b, (self.u, self.u), self.w * t)
        np.add.at(b, (self.v, self.v), self.w * t)
        b[self.u, self.v] -= t
        b[self.v, self.u] -= t
        return b

    def gradient(self, A):
        return self.w * (A[self.u, self.u] + A[self.v, self.v]) - 2.0 * A[self.u, self.v]

    def hessian(self, A):
        r, c, k = self.rows, self.cols, self.coef
        t1 = A[c[:, :, None, None], r[None, None, :, :]]
        t2 = A[r[:, :, None, None], c[None, None, :, :]]
        return -np.einsum("ea,fb,eafb,eafb->ef", k, k, t1, t2)


def solve_dual_ascent(spec, x=None, tol=DEFAULT_TOL, max_iters=MAX_NEWTON) -> GmrfSolution:
    """Damped Newton ascent of ln det B(t) starting from t = 0 (B = I)."""
    spec = _as_spec(spec, x)
    spec.check_solvable_range()
    prob = _DualProblem(spec)
    g = spec.graph
    t = np.zeros(g.m)
    B = np.eye(g.n)
    A, f = np.eye(g.n), 0.0
    trace = [-f]
    for it in range(max_iters + 1):
        grad = prob.gradient(A)
        viol = max(
            float(np.max(np.abs(A[prob.u, prob.v] - prob.w), initial=0.0)),
            float(np.max(np.abs(np.diag(A) - 1.0))),
        )
        if viol < tol:
            return make_solution(spec, A, "dual_ascent", it, trace)
        if it == max_iters:
            break
        H = prob.hessian(A)
        try:
            step = np.linalg.solve(-H, grad)
        except np.linalg.LinAlgError:
            step = grad
        slope = float(grad @ step)
        s = 1.0
        while True:
            trial = t + s * step
            try:
                B_new = prob.matrix(trial)
                A_new, f_new = symmat.inverse_logdet(B_new)
            except NotPositiveDefinite:
                f_new = -math.inf
            if f_new >= f + 1e-4 * s * slope:
                break
            # near the optimum rounding hides the ascent; accept any feasible full step
            if slope < 1e-14 and f_new > -math.inf and f_new >= f - 1e-12 * (1.0 + abs(f)):
                break
            s *= 0.5
            if s < 1e-14:
                raise NoConvergence(viol, it, "line search failed in dual ascent")
        t, B, A, f = trial, B_new, A_new, f_new
        trace.append(-f)
        if float(np.linalg.norm(t)) > T_NORM_LIMIT or f > 700.0:
            raise InfeasibleSpec(
                f"dual ascent diverged (|t|={np.linalg.norm(t):.3e}, ln det B={f:.3f}); "
                "the constraint set is probably empty"
            )
    raise NoConvergence(viol, max_iters)


# -- front door --------------------------------------------------------------

@lru_cache(maxsize=8192)
def _solve_cached(spec, tol):
    return solve_dual_ascent(spec, tol=tol)


def solve(g_or_spec, x=None, method="dual_ascent", tol=DEFAULT_TOL) -> GmrfSolution:
    """Solve a specification (or a graph plus ``x``) with the named method."""
    spec = _as_spec(g_or_spec, x)
    if method == "dual_ascent":
        return _solve_cached(spec, tol)
    if method == "recoupling":
        return solve_recoupling(spec, tol=tol)
    if method == "chordal_exact":
        from .coupling import chordal_solve

        return chordal_solve(spec.graph, spec.x if spec.is_uniform else dict(spec.weights))
    raise ParameterError(f"unknown method {method!r}")


def log_tau(g: Graph, x: float, tol=DEFAULT_TOL) -> float:
    return solve(g, x, tol=tol).log_tau


def tau(g: Graph, x: float, tol=DEFAULT_TOL) -> float:
    return math.exp(log_tau(g, x, tol))


# -- checks and derived quantities -------------------------------------------------

@dataclass(frozen=True)
class KktReport:
    residuals: dict
    tol: float

    @property
    def passed(self):
        return all(v < self.tol for v in self.residuals.values())

    @property
    def worst(self):
        return max(self.residuals.items(), key=lambda kv: kv[1])


def verify_kkt(sol: GmrfSolution, spec=None, tol=DEFAULT_TOL) -> KktReport:
    spec = sol.spec if spec is None else spec
    return KktReport(kkt_residuals(spec, np.asarray(sol.A), np.asarray(sol.B)), tol)


@dataclass(frozen=True)
class EdgeClassification:
    labels: dict
    margins: dict
    threshold: float

    def count(self, label):
        return sum(1 for v in self.labels.values() if v == label)


def classify_edges(sol: GmrfSolution, x=None, tol=DEFAULT_TOL) -> EdgeClassification:
    """Label edges I (0 <= y <= x/(1-x^2)), II (y < 0), III (y > x/(1-x^2)) or Boundary."""
    if not sol.spec.is_uniform:
        raise ParameterError("edge types are defined for uniform x")
    x = sol.spec.x if x is None else float(x)
    if not 0.0 < x < 1.0:
        raise ParameterError("edge types are defined for x in (0, 1)")
    thr = x / (1.0 - x * x)
    band = math.sqrt(tol) * thr
    labels, margins = {}, {}
    for e, y in sol.y.items():
        margin = min(abs(y), abs(y - thr))
        margins[e] = margin
        if margin < band:
            labels[e] = "Boundary"
        elif y < 0:
            labels[e] = "II"
        elif y <= thr:
            labels[e] = "I"
        else:
            labels[e] = "III"
    return EdgeClassification(labels, margins, thr)


def min_y(g: Graph, x: float) -> float:
    return float(np.min(solve(g, x, tol=1e-12).y_vector))


def m_threshold(g: Graph, tol=1e-6, grid=None) -> float:
    """Largest x up to which every y stays nonnegative (1.0 if no sign change on the grid)."""
    if g.m == 0:
        raise ParameterError("graph has no edges")
    grid = np.linspace(0.02, 0.98, 49) if grid is None else np.asarray(grid)
    prev = 0.0
    for xg in grid:
        if min_y(g, float(xg)) < 0.0:
            lo, hi = prev, float(xg)
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if min_y(g, mid) < 0.0:
                    hi = mid
                else:
                    lo = mid
            return lo
        prev = float(xg)
    return 1.0
