"""Gram matrices of random sphere vectors, elliptope volumes and large-deviation rates.

Sampling is split into fixed-size chunks, each with its own Philox stream spawned
from one seed, so estimates do not depend on how many workers run the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .errors import ParameterError
from .graph import Graph, is_edge_transitive
from .solver import log_tau

CHUNK = 1 << 18
MIN_HITS = 50
EDGE_EPS = 1e-6
PSD_TOL = 1e-12


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def chunk_streams(seed, count):
    """``count`` independent generators derived from ``seed``."""
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(count)]


# -- sampling -----------------------------------------------------------------

@dataclass(frozen=True)
class GramSample:
    k: int
    n: int
    matrix: np.ndarray

    def check(self, tol=1e-12) -> bool:
        m = self.matrix
        return bool(
            np.allclose(np.diag(m), 1.0, atol=tol)
            and np.all(np.abs(m) <= 1.0 + tol)
            and np.linalg.eigvalsh(m)[0] >= -tol
        )


def _check_kn(k, n):
    if not 2 <= k <= n:
        raise ParameterError("need n >= k >= 2")


def sphere_vectors(k, n, rng) -> np.ndarray:
    """k independent uniform unit vectors in R^n (normalised Gaussians, zero vectors redrawn)."""
    v = rng.standard_normal((k, n))
    norms = np.linalg.norm(v, axis=1)
    while np.any(norms == 0.0):
        bad = norms == 0.0
        v[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(v, axis=1)
    return v / norms[:, None]


def sample_gram(k, n, rng) -> GramSample:
    _check_kn(k, n)
    v = sphere_vectors(k, n, rng)
    g = v @ v.T
    np.fill_diagonal(g, 1.0)
    return GramSample(k, n, g)


def gram_batch(k, n, size, rng, method="bartlett") -> np.ndarray:
    """``size`` Gram matrices as an array of shape (size, k, k).

    ``gaussian`` normalises explicit vectors; ``bartlett`` draws the Wishart
    factor of the same Gram matrix (cost independent of n) and normalises it.
    """
    _check_kn(k, n)
    if method == "gaussian":
        v = rng.standard_normal((size, k, n))
        v /= np.linalg.norm(v, axis=2, keepdims=True)
        g = v @ v.transpose(0, 2, 1)
    elif method == "bartlett":
        L = np.zeros((size, k, k))
        rows, cols = np.tril_indices(k, -1)
        L[:, rows, cols] = rng.standard_normal((size, rows.size))
        for i in range(k):
            L[:, i, i] = np.sqrt(rng.chisquare(n - i, size))
        w = L @ L.transpose(0, 2, 1)
        d = 1.0 / np.sqrt(np.einsum("sii->si", w))
        g = w * d[:, :, None] * d[:, None, :]
    else:
        raise ParameterError(f"unknown sampling method {method!r}")
    idx = np.arange(k)
    g[:, idx, idx] = 1.0
    return g


# -- densities and volumes -----------------------------------------------------

def mv_gamma_log(k, a) -> float:
    """ln of the multivariate gamma function Gamma_k(a)."""
    if a <= (k - 1) / 2:
        raise ParameterError("need a > (k-1)/2")
    return float(special.multigammaln(a, k))


def log_density_constant(k, n) -> float:
    return k * special.gammaln(n / 2) - mv_gamma_log(k, n / 2)


def density_f(k, n, M) -> float:
    """Density of the Gram matrix w.r.t. Lebesgue measure on the off-diagonal entries."""
    _check_kn(k, n)
    M = np.asarray(M, dtype=float)
    if M.shape != (k, k) or not np.allclose(np.diag(M), 1.0) or not np.allclose(M, M.T):
        return 0.0
    if np.linalg.eigvalsh(M)[0] < -PSD_TOL:
        return 0.0
    expo = (n - k - 1) / 2
    c = log_density_constant(k, n)
    if expo == 0:
        return math.exp(c)
    d = float(np.linalg.det(M))
    if d <= 0:
        return 0.0
    return math.exp(expo * math.log(d) + c)


def density_f2(n, t):
    """Vectorised k = 2 density in the off-diagonal entry t."""
    t = np.asarray(t, dtype=float)
    c = math.exp(log_density_constant(2, n))
    inside = np.abs(t) < 1.0
    out = np.zeros_like(t)
    out[inside] = c * (1.0 - t[inside] ** 2) ** ((n - 3) / 2)
    return out


def elliptope_volume(k) -> float:
    if k < 2:
        raise ParameterError("need k >= 2")
    a = (k + 1) / 2
    return math.exp(mv_gamma_log(k, a) - k * special.gammaln(a))


def _psd_leading_minors(g) -> np.ndarray:
    """Positive definiteness by Sylvester's criterion on leading minors (batched)."""
    ok = np.ones(g.shape[0], dtype=bool)
    for r in range(2, g.shape[1] + 1):
        ok &= np.linalg.det(g[:, :r, :r]) > 0
    return ok


def mc_elliptope_volume(k, samples, rng, chunk=CHUNK):
    """Rejection estimate of Vol(elliptope) over the cube [-1, 1]^(k(k-1)/2); returns (vol, se)."""
    if not 2 <= k <= 6:
        raise ParameterError("Monte Carlo volume supported for 2 <= k <= 6")
    rows, cols = np.triu_indices(k, 1)
    hits, done = 0, 0
    while done < samples:
        size = min(chunk, samples - done)
        g = np.broadcast_to(np.eye(k), (size, k, k)).copy()
        off = rng.uniform(-1.0, 1.0, (size, rows.size))
        g[:, rows, cols] = off
        g[:, cols, rows] = off
        hits += int(_psd_leading_minors(g).sum())
        done += size
    cube = 2.0 ** rows.size
    p = hits / samples
    return cube * p, cube * math.sqrt(p * (1 - p) / samples)


# -- regions and rates ---------------------------------------------------------

@dataclass(frozen=True)
class EdgeIntervalRegion:
    """Correlation matrices whose entries on the edges of ``graph`` lie in [lo, hi]."""

    graph: Graph
    lo: float
    hi: float

    def __post_init__(self):
        if not -1.0 <= self.lo <= self.hi <= 1.0:
            raise ParameterError("need -1 <= lo <= hi <= 1")
        if self.graph.n < 2:
            raise ParameterError("region needs at least two vertices")

    @property
    def k(self):
        return self.graph.n

    def contains(self, grams) -> np.ndarray:
        grams = np.asarray(grams)
        if grams.ndim == 2:
            grams = grams[None]
        ok = np.ones(grams.shape[0], dtype=bool)
        for u, v in self.graph.edges:
            e = grams[:, u, v]
            ok &= (e >= self.lo) & (e <= self.hi)
        return ok


@dataclass(frozen=True)
class RateTarget:
    """(1/2) sup ln det over the region, from the uniform-x profile."""

    log_det: float
    argmax: float
    lower_bound: bool

    @property
    def rate(self):
        return 0.5 * self.log_det


def sup_log_det(region: EdgeIntervalRegion, grid=21) -> RateTarget:
    """max over x in [lo, hi] of ln tau(G, x), by grid search refined with golden section.

    Exact for edge-transitive graphs (averaging over automorphisms); otherwise a lower bound.
    """
    g = region.graph
    exact = g.n <= 20 and is_edge_transitive(g)
    if g.m == 0:
        return RateTarget(0.0, 0.0, False)
    lo = max(region.lo, -1.0 + EDGE_EPS)
    hi = min(region.hi, 1.0 - EDGE_EPS)
    if lo > hi:
        raise ParameterError("interval lies outside the solvable range")
    if lo <= 0.0 <= hi:
        return RateTarget(0.0, 0.0, False)
    xs = np.linspace(lo, hi, grid) if hi > lo else np.array([lo])
    vals = [log_tau(g, float(x)) for x in xs]
    i = int(np.argmax(vals))
    best_x, best = float(xs[i]), vals[i]
    if 0 < i < len(xs) - 1:
        res = optimize.minimize_scalar(
            lambda x: -log_tau(g, float(x)),
            bracket=(xs[i - 1], xs[i], xs[i + 1]),
            method="golden",
            tol=1e-10,
        )
        if -res.fun > best:
            best_x, best = float(res.x), -float(res.fun)
    return RateTarget(best, best_x, not exact)


@dataclass(frozen=True)
class LdpEstimate:
    k: int
    n: int
    samples: int
    hits: int
    theo_rate: float
    lower_bound_rate: bool = False

    @property
    def p_hat(self):
        return self.hits / self.samples

    @property
    def se(self):
        p = self.p_hat
        return math.sqrt(p * (1 - p) / self.samples)

    @property
    def emp_rate(self):
        return math.log(self.p_hat) / self.n if self.hits else -math.inf

    @property
    def rate_se(self):
        """Delta-method standard error of the empirical rate."""
        return self.se / (self.p_hat * self.n) if self.hits else math.inf

    @property
    def gap(self):
        return self.emp_rate - self.theo_rate

    @property
    def low_hits(self):
        return self.hits < MIN_HITS

    def row(self):
        return {
            "k": self.k,
            "n": self.n,
            "samples": self.samples,
            "hits": self.hits,
            "p_hat": self.p_hat,
            "se": self.se,
            "emp_rate": self.emp_rate,
            "theo_rate": self.theo_rate,
            "gap": self.gap,
            "low_hits": self.low_hits,
            "lower_bound_rate": self.lower_bound_rate,
        }


def _count_chunk(args):
    graph, lo, hi, n, size, seed_seq, method = args
    rng = np.random.Generator(np.random.Philox(seed_seq))
    region = EdgeIntervalRegion(graph, lo, hi)
    return int(region.contains(gram_batch(graph.n, n, size, rng, method)).sum())


def count_hits(region: EdgeIntervalRegion, n, samples, seed, jobs=1, method="bartlett", chunk=CHUNK):
    """Number of Gram samples in the region; identical for any ``jobs``."""
    sizes = [chunk] * (samples // chunk) + ([samples % chunk] if samples % chunk else [])
    seqs = np.random.SeedSequence([int(seed), int(n)]).spawn(len(sizes))
    tasks = [(region.graph, region.lo, region.hi, n, s, q, method) for s, q in zip(sizes, seqs)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return sum(ex.map(_count_chunk, tasks))
    return sum(map(_count_chunk, tasks))


def ldp_estimate(region: EdgeIntervalRegion, n_list, samples, seed=0, jobs=1, method="bartlett"):
    """Monte Carlo hit probabilities and empirical rates (1/n) ln p against the theoretical rate."""
    target = sup_log_det(region)
    out = []
    for n in n_list:
        _check_kn(region.k, n)
        hits = count_hits(region, n, samples, seed, jobs, method)
        out.append(LdpEstimate(region.k, n, samples, hits, target.rate, target.lower_bound))
    return out


def spherical_graphon_density(g: Graph, lo, hi, n, samples, seed=0, jobs=1, method="bartlett"):
    """Estimate of t(G, Sph(S, n)) with S = [lo, hi]; vectors live on the unit sphere of R^(n+1)."""
    est = ldp_estimate(EdgeIntervalRegion(g, lo, hi), [n + 1], samples, seed, jobs, method)[0]
    return est
