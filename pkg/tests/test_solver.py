import math

import numpy as np
import pytest

from gmrftau import symmat
from gmrftau.coupling import log_tau_complete, tau_complete, y_complete
from gmrftau.errors import InfeasibleSpec, ParameterError
from gmrftau.graph import (
    Graph,
    book_graph,
    complete_bipartite,
    complete_graph,
    cycle_graph,
    erdos_renyi,
    path_graph,
    petersen_graph,
    random_tree,
)
from gmrftau.model import CorrelationSpec, dual_matrix, kkt_residuals
from gmrftau.solver import (
    classify_edges,
    initial_matrix,
    log_tau,
    m_threshold,
    recoupling_step,
    solve,
    solve_dual_ascent,
    solve_recoupling,
    tau,
    verify_kkt,
)


def c4_identity(x):
    """tau(C4, sqrt(x^2/2 + x/2)) = 1 - 2x + 2x^3 - x^4."""
    return 1 - 2 * x + 2 * x**3 - x**4


# -- closed forms ---------------------------------------------------------

def test_k2():
    sol = solve(complete_graph(2), 0.5)
    assert sol.tau == pytest.approx(0.75, abs=1e-14)
    assert sol.y[(0, 1)] == pytest.approx(2 / 3, abs=1e-12)


def test_p3_values():
    sol = solve(path_graph(3), 0.5)
    assert sol.tau == pytest.approx(0.5625, abs=1e-12)
    assert sol.z_nonedges[(0, 2)] == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("method", ["dual_ascent", "recoupling", "chordal_exact"])
def test_tree_formula_all_methods(method):
    g = random_tree(9, 4)
    x = 0.7
    sol = solve(g, x, method=method)
    assert sol.log_tau == pytest.approx(8 * math.log1p(-x * x), abs=1e-9)
    assert np.allclose(sol.y_vector, x / (1 - x * x), atol=1e-8)


def test_c4_identity_values():
    s = math.sqrt(0.375)
    assert tau(cycle_graph(4), s) == pytest.approx(0.1875, abs=1e-10)
    for x in (0.2, 0.6, 0.9):
        assert tau(cycle_graph(4), math.sqrt(x * x / 2 + x / 2)) == pytest.approx(c4_identity(x), abs=1e-9)


def test_complete_graph_closed_form():
    for r, x in [(4, 0.5), (5, 0.3), (6, -0.1)]:
        sol = solve(complete_graph(r), x)
        assert sol.tau == pytest.approx(tau_complete(r, x), rel=1e-12)
        assert np.allclose(sol.y_vector, y_complete(r, x), atol=1e-10)
    assert tau_complete(4, 0.5) == pytest.approx(0.3125)
    assert log_tau_complete(4, 0.5) == pytest.approx(math.log(0.3125))


def test_bipartite_even_in_x():
    for g in (cycle_graph(4), cycle_graph(6), complete_bipartite(2, 3)):
        assert log_tau(g, 0.3) == pytest.approx(log_tau(g, -0.3), abs=1e-10)


# -- optimality ----------------------------------------------------------

def test_inverse_vanishes_on_non_edges():
    g = erdos_renyi(9, 0.4, 3)
    sol = solve(g, 0.5)
    for u, v in g.non_edges():
        assert abs(sol.B[u, v]) < 1e-9
    assert verify_kkt(sol, tol=1e-8).passed


def test_dual_parametrisation_reproduces_precision():
    g = petersen_graph()
    sol = solve(g, 0.3)
    b = dual_matrix(sol.spec, sol.y_vector)
    assert np.allclose(b, sol.B, atol=1e-9)


def test_kkt_detects_wrong_candidate():
    g = cycle_graph(5)
    spec = CorrelationSpec.uniform(g, 0.4)
    A = spec.constrained_matrix(0.4)
    res = kkt_residuals(spec, A, symmat.inverse(A))
    assert res["precision_pattern"] > 1e-3


def test_solvers_agree():
    for seed in range(5):
        g = erdos_renyi(10, 0.4, seed)
        a = solve_dual_ascent(g, 0.6)
        b = solve_recoupling(g, 0.6)
        assert np.max(np.abs(a.A - b.A)) < 1e-8


def test_recoupling_logdet_nondecreasing():
    sol = solve_recoupling(cycle_graph(7), 0.8)
    trace = np.array(sol.logdet_trace)
    assert np.all(np.diff(trace) >= -1e-12)


def test_recoupling_step_matches_woodbury_update():
    g = cycle_graph(5)
    spec = CorrelationSpec.uniform(g, 0.5)
    M = initial_matrix(spec)
    v, w = g.non_edges()[0]
    coupled = recoupling_step(M, v, w)
    P = symmat.inverse(M)
    delta = P[v, w] / (P[v, v] * P[w, w] - P[v, w] ** 2)
    assert coupled[v, w] == pytest.approx(M[v, w] + delta, abs=1e-13)
    assert abs(symmat.inverse(coupled)[v, w]) < 1e-12


def test_per_edge_weights():
    g = path_graph(3)
    w = {(0, 1): 0.3, (1, 2): -0.6}
    sol = solve(CorrelationSpec.per_edge(g, w))
    assert sol.tau == pytest.approx((1 - 0.09) * (1 - 0.36), abs=1e-12)
    assert sol.z_nonedges[(0, 2)] == pytest.approx(-0.18, abs=1e-12)
    rec = solve(CorrelationSpec.per_edge(g, w), method="recoupling")
    assert rec.tau == pytest.approx(sol.tau, abs=1e-12)


def test_infeasible_spec_detected():
    # K_5 at x < -1/4 has no positive definite completion
    with pytest.raises(InfeasibleSpec):
        solve_dual_ascent(complete_graph(5), -0.3)


def test_parameter_errors():
    with pytest.raises(ParameterError):
        solve(cycle_graph(4), 1.0)
    with pytest.raises(ParameterError):
        solve(cycle_graph(4), 1 - 1e-7)
    with pytest.raises(ParameterError):
        solve(cycle_graph(4), 0.3, method="magic")


def test_solution_json():
    sol = solve(path_graph(3), 0.5)
    d = sol.to_dict()
    assert d["n"] == 3 and d["x"] == 0.5
    assert d["z_nonedges"][0][:2] == [0, 2]
    assert '"method": "dual_ascent"' in sol.to_json()


def test_solution_is_immutable():
    sol = solve(cycle_graph(4), 0.3)
    with pytest.raises(ValueError):
        sol.A[0, 1] = 0.0


# -- edge types --------------------------------------------------------------

def book_spine_y(k, x):
    return x * (1 - (k - 2) * x) / ((1 - x) * (1 + x) * (1 + 2 * x))


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
def test_book_spine(k):
    for x in (0.1, 0.4, 0.7):
        sol = solve(book_graph(k), x)
        assert sol.y[(0, 1)] == pytest.approx(book_spine_y(k, x), abs=1e-9)


def test_classify_book_graph():
    cls = classify_edges(solve(book_graph(4), 0.6))
    assert cls.labels[(0, 1)] == "II"
    assert cls.count("I") == 8
    cls = classify_edges(solve(book_graph(4), 0.5))
    assert cls.labels[(0, 1)] == "Boundary"
    assert classify_edges(solve(path_graph(4), 0.5)).count("Boundary") == 3


def test_m_threshold_book():
    assert m_threshold(book_graph(5), tol=1e-7) == pytest.approx(1 / 3, abs=1e-6)
    assert m_threshold(cycle_graph(5)) == 1.0


def test_bare_graph_needs_x():
    with pytest.raises(ParameterError):
        solve(Graph(2, ((0, 1),)))
