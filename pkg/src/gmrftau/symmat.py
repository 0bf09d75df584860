"""Dense symmetric-matrix kernel.

Matrices are plain ``numpy`` arrays. :func:`as_symmetric` copies the lower
triangle onto the upper one, so symmetry is exact after it is applied.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve, lapack

from .errors import NotPositiveDefinite, ParameterError

PIVOT_RTOL = 1e-12
MAX_EXP_LOGDET = 700.0


def as_symmetric(m) -> np.ndarray:
    m = np.array(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ParameterError(f"expected a nonempty square matrix, got shape {m.shape}")
    lower = np.tril(m)
    return lower + np.tril(m, -1).T


def identity(n):
    return np.eye(n)


def constant_correlation(n, x):
    """Unit diagonal, ``x`` everywhere else (the all-x matrix)."""
    m = np.full((n, n), float(x))
    np.fill_diagonal(m, 1.0)
    return m


def principal(m, idx):
    idx = np.asarray(idx, dtype=int)
    return m[np.ix_(idx, idx)]


def cholesky(m) -> np.ndarray:
    """Lower Cholesky factor; raises :class:`NotPositiveDefinite` with the failing pivot.

    Pivots ``<= 1e-12 * max(diag)`` are rejected as well.
    """
    m = as_symmetric(m)
    factor, info = lapack.dpotrf(m, lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefinite(info - 1)
    if info < 0:
        raise ParameterError(f"dpotrf argument error {info}")
    pivots = np.diag(factor) ** 2
    floor = PIVOT_RTOL * max(float(np.max(np.diag(m))), 0.0)
    bad = np.flatnonzero(pivots <= floor)
    if bad.size:
        raise NotPositiveDefinite(int(bad[0]))
    return factor


def is_positive_definite(m) -> bool:
    try:
        cholesky(m)
    except NotPositiveDefinite:
        return False
    return True


def logdet(m) -> float:
    factor = cholesky(m)
    return 2.0 * float(np.sum(np.log(np.diag(factor))))


def det(m) -> float:
    ld = logdet(m)
    if abs(ld) >= MAX_EXP_LOGDET:
        raise OverflowError(f"log-determinant {ld:.3f} out of exp range; use logdet")
    return float(np.exp(ld))


def inverse(m) -> np.ndarray:
    factor = cholesky(m)
    inv = cho_solve((factor, True), np.eye(factor.shape[0]))
    return as_symmetric(inv)


def inverse_logdet(m):
    """Inverse and log-determinant from a single factorization."""
    factor = cholesky(m)
    inv = cho_solve((factor, True), np.eye(factor.shape[0]))
    return as_symmetric(inv), 2.0 * float(np.sum(np.log(np.diag(factor))))


def schur_complement(m, block) -> np.ndarray:
    """Eliminate the index set ``block``; returns the complement of the rest.

    ``m[R, R] - m[R, S] m[S, S]^-1 m[S, R]`` with ``S = block`` and ``R`` the
    remaining indices in increasing order.
    """
    m = as_symmetric(m)
    n = m.shape[0]
    s = sorted(set(int(i) for i in block))
    if not s or len(s) >= n or s[0] < 0 or s[-1] >= n:
        raise ParameterError("block must be a proper nonempty subset of the indices")
    r = [i for i in range(n) if i not in set(s)]
    factor = cholesky(principal(m, s))
    m_sr = m[np.ix_(s, r)]
    return as_symmetric(principal(m, r) - m_sr.T @ cho_solve((factor, True), m_sr))


def min_eigenvalue(m) -> float:
    """Smallest eigenvalue; intended for test oracles and diagnostics."""
    return float(np.linalg.eigvalsh(as_symmetric(m))[0])
