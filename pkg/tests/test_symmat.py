import math

import numpy as np
import pytest

from gmrftau import symmat
from gmrftau.errors import NotPositiveDefinite, ParameterError


def test_as_symmetric_uses_lower_triangle():
    m = symmat.as_symmetric([[1.0, 9.0], [2.0, 3.0]])
    assert np.array_equal(m, [[1.0, 2.0], [2.0, 3.0]])


def test_constant_correlation_determinant():
    # det of the all-x matrix: (1-x)^(n-1) (1+(n-1)x)
    for n, x in [(2, 0.5), (4, 0.5), (6, -0.1), (5, 0.9)]:
        expected = (1 - x) ** (n - 1) * (1 + (n - 1) * x)
        assert symmat.det(symmat.constant_correlation(n, x)) == pytest.approx(expected, rel=1e-13)


def test_cholesky_reports_failing_pivot():
    m = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 2.0], [0.0, 2.0, 1.0]])
    with pytest.raises(NotPositiveDefinite) as info:
        symmat.cholesky(m)
    assert info.value.pivot == 2


def test_semidefinite_rejected():
    with pytest.raises(NotPositiveDefinite):
        symmat.cholesky(np.ones((3, 3)))
    assert not symmat.is_positive_definite(np.ones((2, 2)))


def test_inverse_and_logdet():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((6, 6))
    m = a @ a.T + 6 * np.eye(6)
    inv, ld = symmat.inverse_logdet(m)
    assert np.allclose(inv @ m, np.eye(6), atol=1e-12)
    assert ld == pytest.approx(np.linalg.slogdet(m)[1], rel=1e-12)
    assert np.array_equal(inv, inv.T)


def test_det_overflow_guard():
    with pytest.raises(OverflowError):
        symmat.det(np.eye(2) * math.exp(400))


def test_schur_complement_matches_block_formula():
    m = np.array([[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]])
    s = symmat.schur_complement(m, [2])
    expected = m[:2, :2] - np.outer(m[:2, 2], m[2, :2]) / m[2, 2]
    assert np.allclose(s, expected, atol=1e-14)
    with pytest.raises(ParameterError):
        symmat.schur_complement(m, [0, 1, 2])


def test_principal_submatrix():
    m = np.arange(16.0).reshape(4, 4)
    assert np.array_equal(symmat.principal(m, [0, 3]), [[0.0, 3.0], [12.0, 15.0]])
