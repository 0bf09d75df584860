from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from gmrftau.errors import NoStabilization, ParameterError
from gmrftau.graph import Graph, complete_bipartite, complete_graph, cycle_graph, path_graph
from gmrftau.series import (
    TruncatedSeries,
    invert,
    matrix_det,
    matrix_inverse,
    matrix_mul,
    tau_series,
)
from gmrftau.solver import tau

N = 8


def S(*coeffs, order=N):
    return TruncatedSeries.from_coeffs(coeffs, order)


def c4_series_oracle(order):
    """Expand the C4 identity: x^2 = s^2/2 + s/2 gives s as a series in x."""
    x = sympy.symbols("x")
    s = (-1 + sympy.sqrt(1 + 8 * x**2)) / 2
    expr = 1 - 2 * s + 2 * s**3 - s**4
    poly = sympy.series(expr, x, 0, order + 1).removeO()
    return [int(poly.coeff(x, k)) for k in range(order + 1)]


def test_geometric_series():
    assert invert(S(1, -1)).coeffs == tuple(Fraction(1) for _ in range(N + 1))


def test_inverse_round_trip():
    s = S(1, 0, -1)
    assert (s * s.invert()).coeffs == S(1).coeffs
    with pytest.raises(ZeroDivisionError):
        S(0, 1).invert()


def test_truncation():
    x = TruncatedSeries.variable(3)
    assert (x * x * x * x).coeffs == (0, 0, 0, 0)
    with pytest.raises(ParameterError):
        S(1) + TruncatedSeries.constant(1, 2)


def test_matrix_inverse_k2():
    one, x = S(1), TruncatedSeries.variable(N)
    inv = matrix_inverse([[one, x], [x, one]])
    # [[1, x], [x, 1]]^-1 = 1/(1-x^2) [[1, -x], [-x, 1]]
    geo = S(1, 0, -1).invert()
    assert inv[0][0] == geo
    assert inv[0][1] == -(x * geo)
    assert matrix_det([[one, x], [x, one]]) == S(1, 0, -1)
    prod = matrix_mul(inv, [[one, x], [x, one]])
    assert prod[0][0] == one and prod[1][0] == S(0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=6).filter(lambda c: c[0] != 0))
def test_inverse_property(coeffs):
    s = S(*coeffs, order=6)
    assert (s * s.invert()) == TruncatedSeries.constant(1, 6)


def test_tau_series_known_graphs():
    assert tau_series(complete_graph(2), 6).coefficients == [1, 0, -1, 0, 0, 0, 0]
    assert tau_series(path_graph(3), 6).coefficients == [1, 0, -2, 0, 1, 0, 0]


def test_tau_series_c4_matches_identity():
    assert tau_series(cycle_graph(4), 12).coefficients == c4_series_oracle(12)
    assert c4_series_oracle(6)[:5] == [1, 0, -4, 0, 8]


def test_complete_graph_series():
    # no non-edges: det of the all-x matrix (1-x)^2 (1+2x) = 1 - 3x^2 + 2x^3
    assert tau_series(complete_graph(3), 5).coefficients == [1, 0, -3, 2, 0, 0]


def test_literal_and_woodbury_agree():
    g = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 0), (3, 4), (4, 5), (5, 2)])
    a = tau_series(g, 10)
    b = tau_series(g, 10, method="literal")
    assert a.coefficients == b.coefficients and a.sweeps == b.sweeps


def test_partial_sums_match_numeric():
    g = cycle_graph(5)
    res = tau_series(g, 12)
    assert abs(res.series.partial_sum(0.05) - tau(g, 0.05)) < 10 * 0.05**13 + 1e-14


def test_bipartite_odd_coefficients_vanish():
    c = tau_series(complete_bipartite(2, 3), 10).coefficients
    assert all(v == 0 for v in c[1::2])
    assert c[2] == -6


def test_guards():
    with pytest.raises(ParameterError):
        tau_series(path_graph(3), 41)
    with pytest.raises(NoStabilization):
        tau_series(cycle_graph(6), 12, max_sweeps=1)


def test_json():
    d = tau_series(path_graph(3), 4).to_dict()
    assert d == {"order": 4, "coefficients": [1, 0, -2, 0, 1], "sweeps": d["sweeps"]}
