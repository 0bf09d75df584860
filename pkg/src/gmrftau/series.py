"""Exact truncated power series and the formal expansion of tau(G, x) around 0.

The recoupling iteration is run over the ring Q[x]/(x^(N+1)) starting from the
all-x matrix; its entries converge coefficient by coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import IntegrityError, NoStabilization, ParameterError
from .graph import Graph

MAX_ORDER = 40
MAX_SWEEPS = 200


@dataclass(frozen=True)
class TruncatedSeries:
    """c_0 + c_1 x + ... + c_N x^N with exact rational coefficients."""

    coeffs: tuple

    def __post_init__(self):
        if not self.coeffs:
            raise ParameterError("a series needs at least the constant coefficient")
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    @classmethod
    def constant(cls, c, order):
        return cls((c,) + (0,) * order)

    @classmethod
    def variable(cls, order, scale=1):
        """scale * x, truncated at ``order``."""
        if order == 0:
            return cls((0,))
        return cls((0, scale) + (0,) * (order - 1))

    @classmethod
    def from_coeffs(cls, coeffs, order):
        coeffs = list(coeffs)[: order + 1]
        return cls(tuple(coeffs) + (0,) * (order + 1 - len(coeffs)))

    @property
    def order(self):
        return len(self.coeffs) - 1

    def __getitem__(self, i):
        return self.coeffs[i]

    def _coerce(self, other):
        if isinstance(other, TruncatedSeries):
            if other.order != self.order:
                raise ParameterError("series orders differ")
            return other
        return TruncatedSeries.constant(other, self.order)

    def __add__(self, other):
        other = self._coerce(other)
        return TruncatedSeries(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            c = Fraction(other)
            return TruncatedSeries(tuple(a * c for a in self.coeffs))
        other = self._coerce(other)
        n = self.order
        a, b = self.coeffs, other.coeffs
        nz_a = [i for i in range(n + 1) if a[i]]
        nz_b = [j for j in range(n + 1) if b[j]]
        out = [Fraction(0)] * (n + 1)
        for i in nz_a:
            for j in nz_b:
                if i + j > n:
                    break
                out[i + j] += a[i] * b[j]
        return TruncatedSeries(tuple(out))

    __rmul__ = __mul__

    def invert(self):
        """Multiplicative inverse; needs a nonzero constant term."""
        a = self.coeffs
        if a[0] == 0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        inv0 = 1 / a[0]
        out = [inv0]
        for k in range(1, self.order + 1):
            s = sum((a[j] * out[k - j] for j in range(1, k + 1) if a[j]), Fraction(0))
            out.append(-s * inv0)
        return TruncatedSeries(tuple(out))

    def __truediv__(self, other):
        return self * self._coerce(other).invert()

    def is_integral(self):
        return all(c.denominator == 1 for c in self.coeffs)

    def integer_coeffs(self):
        if not self.is_integral():
            raise IntegrityError(f"non-integer coefficient in {self.coeffs}")
        return [int(c) for c in self.coeffs]

    def partial_sum(self, x: float) -> float:
        total = 0.0
        for c in reversed(self.coeffs):
            total = total * x + float(c)
        return total

    def __repr__(self):
        terms = [f"{c}*x^{i}" for i, c in enumerate(self.coeffs) if c]
        return " + ".join(terms) or "0"


def invert(s: TruncatedSeries) -> TruncatedSeries:
    return s.invert()


# -- matrices of series (lists of lists) ---------------------------------------

def _gauss_jordan(m, want_inverse):
    """Elimination with pivots chosen by nonzero constant term; returns (det, inverse or None)."""
    n = len(m)
    if n == 0:
        raise ParameterError("empty matrix")
    order = m[0][0].order
    a = [list(row) for row in m]
    inv = None
    if want_inverse:
        one, zero = TruncatedSeries.constant(1, order), TruncatedSeries.constant(0, order)
        inv = [[one if i == j else zero for j in range(n)] for i in range(n)]
    det = TruncatedSeries.constant(1, order)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col][0] != 0), None)
        if piv is None:
            raise ZeroDivisionError("constant-term matrix is singular")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            if inv is not None:
                inv[col], inv[piv] = inv[piv], inv[col]
            det = -det
        p = a[col][col]
        det = det * p
        p_inv = p.invert()
        a[col] = [e * p_inv for e in a[col]]
        if inv is not None:
            inv[col] = [e * p_inv for e in inv[col]]
        rows = range(n) if inv is not None else range(col + 1, n)
        for r in rows:
            if r == col or not any(a[r][col].coeffs):
                continue
            f = a[r][col]
            a[r] = [x - f * y for x, y in zip(a[r], a[col])]
            if inv is not None:
                inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    return det, inv


def matrix_inverse(m):
    return _gauss_jordan(m, True)[1]


def matrix_det(m) -> TruncatedSeries:
    return _gauss_jordan(m, False)[0]


def matrix_mul(a, b):
    order = a[0][0].order
    zero = TruncatedSeries.constant(0, order)
    return [
        [sum((a[i][k] * b[k][j] for k in range(len(b))), zero) for j in range(len(b[0]))]
        for i in range(len(a))
    ]


# -- tau(G, x) ---------------------------------------------------------------

@dataclass(frozen=True)
class SeriesResult:
    series: TruncatedSeries
    sweeps: int

    @property
    def coefficients(self):
        return self.series.integer_coeffs()

    def to_dict(self):
        return {"order": self.series.order, "coefficients": self.coefficients, "sweeps": self.sweeps}


def _literal_step(M, v, w, order):
    """New (v, w) entry M_vZ M_ZZ^-1 M_Zw with Z the other vertices."""
    n = len(M)
    z = [i for i in range(n) if i not in (v, w)]
    if not z:
        return TruncatedSeries.constant(0, order)
    inv = matrix_inverse([[M[i][j] for j in z] for i in z])
    row = matrix_mul([[M[v][i] for i in z]], inv)
    return matrix_mul(row, [[M[i][w]] for i in z])[0][0]


def _woodbury_step(M, P, v, w):
    """Same update via the inverse P = M^-1; returns the increment and updates M and P in place."""
    pvv, pww, pvw = P[v][v], P[w][w], P[v][w]
    if not any(pvw.coeffs):
        return None
    delta = pvw / (pvv * pww - pvw * pvw)
    M[v][w] = M[w][v] = M[v][w] + delta
    # (M + C)^-1 = P - P_[:,vw] C (I + P_vw,vw C)^-1 P_[vw,:] with C = delta * offdiag
    one = TruncatedSeries.constant(1, delta.order)
    det = (one + pvw * delta) * (one + pvw * delta) - pvv * pww * delta * delta
    det_inv = det.invert()
    # K = C (I + P2 C)^-1, written out for the 2 x 2 case
    k11 = -(delta * delta * pww) * det_inv
    k22 = -(delta * delta * pvv) * det_inv
    k12 = delta * (one + pvw * delta) * det_inv
    n = len(P)
    col_v = [P[i][v] for i in range(n)]
    col_w = [P[i][w] for i in range(n)]
    for i in range(n):
        a = col_v[i] * k11 + col_w[i] * k12
        b = col_v[i] * k12 + col_w[i] * k22
        for j in range(i, n):
            upd = P[i][j] - (a * col_v[j] + b * col_w[j])
            P[i][j] = upd
            P[j][i] = upd
    return delta


def tau_series(g: Graph, order: int, max_sweeps=MAX_SWEEPS, method="woodbury") -> SeriesResult:
    """Power series of tau(G, x) to ``order`` by formal recoupling sweeps.

    ``literal`` evaluates M_vZ M_ZZ^-1 M_Zw at every step; ``woodbury`` applies the
    identical update through a rank-two correction of the inverse.
    """
    if not 0 <= order <= MAX_ORDER:
        raise ParameterError(f"order must lie in [0, {MAX_ORDER}]")
    if method not in ("woodbury", "literal"):
        raise ParameterError(f"unknown method {method!r}")
    n = g.n
    one = TruncatedSeries.constant(1, order)
    xs = TruncatedSeries.variable(order)
    M = [[one if i == j else xs for j in range(n)] for i in range(n)]
    non_edges = g.non_edges()
    P = matrix_inverse(M) if non_edges and method == "woodbury" else None
    sweeps = 0
    while non_edges:
        if sweeps >= max_sweeps:
            raise NoStabilization(f"coefficients still moving after {max_sweeps} sweeps")
        changed = False
        for v, w in non_edges:
            if P is not None:
                changed |= _woodbury_step(M, P, v, w) is not None
                continue
            new = _literal_step(M, v, w, order)
            if new != M[v][w]:
                changed = True
                M[v][w] = M[w][v] = new
        sweeps += 1
        if not changed:
            break
    det = matrix_det(M) if n else one
    if not det.is_integral():
        raise IntegrityError(f"tau series has a non-integer coefficient: {det}")
    return SeriesResult(det, sweeps)
