"""Spanning-tree counts (exact Matrix-Tree) and the determinant-based upper bound for regular graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from . import symmat
from .errors import NotApplicable, NotPositiveDefinite
from .graph import Graph
from .model import CorrelationSpec, dual_matrix
from .report import AuditReport, check, combine

BOUND_PREC = 64


def bareiss_det(rows) -> int:
    """Exact determinant of an integer matrix by fraction-free elimination."""
    a = [[int(v) for v in r] for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) // prev
        prev = pivot
    return sign * a[n - 1][n - 1]


def reduced_laplacian(g: Graph) -> np.ndarray:
    return g.laplacian()[:-1, :-1]


def count_spanning_trees(g: Graph) -> int:
    """Exact count (0 when disconnected)."""
    if g.n <= 1:
        return 1
    return bareiss_det(reduced_laplacian(g).astype(np.int64).tolist())


def log_count_spanning_trees(g: Graph) -> float:
    """Floating ln of the count, for graphs too large for exact elimination."""
    if g.n <= 1:
        return 0.0
    sign, ld = np.linalg.slogdet(reduced_laplacian(g).astype(float))
    return ld if sign > 0 else -math.inf


def mckay_log_bound(n: int, d: int):
    """ln of e(d-1)/(d(d-2)) * ((d-1)^(d-1) / (d^2-2d)^(d/2-1))^n, as an mpmath number."""
    if d < 3:
        raise NotApplicable("bound needs d >= 3")
    with mpmath.workprec(BOUND_PREC):
        d_ = mpmath.mpf(d)
        return (
            1
            + mpmath.log(d_ - 1)
            - mpmath.log(d_)
            - mpmath.log(d_ - 2)
            + n * ((d_ - 1) * mpmath.log(d_ - 1) - (d_ / 2 - 1) * mpmath.log(d_ * d_ - 2 * d_))
        )


def mckay_bound(n: int, d: int):
    with mpmath.workprec(BOUND_PREC):
        return mpmath.exp(mckay_log_bound(n, d))


def certificate_matrix(g: Graph, d: int):
    """B = I/n + t L(G) with x = 1/(d-1) and t = (n-1)/(n d (1-x))."""
    n = g.n
    x = 1.0 / (d - 1)
    t = (n - 1) / (n * d * (1 - x))
    return np.eye(n) / n + t * g.laplacian().astype(float), x, t


@dataclass(frozen=True)
class SpanningTreeReport:
    n: int
    d: int
    count: int
    log_bound: float
    ratio: float
    certificate: AuditReport

    @property
    def bound(self) -> float:
        return math.exp(self.log_bound)

    @property
    def passed(self) -> bool:
        return self.certificate.passed

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "count": str(self.count),
            "mckay_bound": mpmath.nstr(mckay_bound(self.n, self.d), 17),
            "log_bound": self.log_bound,
            "ratio": self.ratio,
            "pass": self.passed,
            "certificate": self.certificate.to_dict(),
        }


def mckay_audit(g: Graph, d: int | None = None, tol=1e-8) -> SpanningTreeReport:
    """Rebuild the certificate for the tree bound and check each link of the chain."""
    from .audit import graph_inputs
    from .solver import log_tau

    if not g.is_regular() or not g.is_connected():
        raise NotApplicable("needs a connected regular graph")
    d = g.max_degree if d is None else int(d)
    if d != g.max_degree or d < 3:
        raise NotApplicable(f"needs a d-regular graph with d >= 3 (got degree {g.max_degree})")
    n = g.n
    count = count_spanning_trees(g)
    B, x, t = certificate_matrix(g, d)
    spec = CorrelationSpec.uniform(g, x)
    param_gap = float(np.max(np.abs(B - dual_matrix(spec, np.full(g.m, t)))))
    try:
        ld_b = symmat.logdet(B)
        min_eig = symmat.min_eigenvalue(B)
    except NotPositiveDefinite:
        ld_b, min_eig = math.nan, -math.inf
    ln_count = math.log(count)
    log_bound = mckay_log_bound(n, d)
    with mpmath.workprec(BOUND_PREC):
        ratio = float(mpmath.mpf(count) / mpmath.exp(log_bound))
    parts = [
        check("B_in_B_set", {"t": t}, 1e-12 * (1 + d * t), param_gap, tol),
        check("B_positive_definite", {}, min_eig, 0.0, 0.0),
        check("det_B_ge_tree_term", {}, ld_b, (n - 1) * math.log(t) + ln_count, tol),
        check("det_B_le_inverse_tau", {"x": x}, -log_tau(g, x), ld_b, tol),
        check("count_le_bound", {}, float(log_bound), ln_count, tol),
    ]
    cert = combine("mckay", graph_inputs(g, d=d), parts, tol)
    return SpanningTreeReport(n, d, count, float(log_bound), ratio, cert)
