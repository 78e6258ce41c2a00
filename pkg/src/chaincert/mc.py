"""Monte Carlo verification of the process-level sup bounds.

Samplers generate Gaussian processes whose increments are normalized so that
E psi(|X(s)-X(t)| / d(s,t)) = 1 exactly (power psi of any order, or the
normalized exponential gauge with exponent 2; both have closed-form Gaussian
moments). Path generation is reproducible bit for bit: each path draws from
its own generator seeded by (seed, path index), so any worker count produces
the same batch.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chain import modulus_pairs
from .mspace import MetricMeasureSpace

__all__ = [
    "gaussian_abs_moment",
    "ProcessSampler",
    "PathBatch",
    "brownian_grid_sampler",
    "gaussian_cov_sampler",
    "analytic_increment_moment",
    "sample",
    "McStat",
    "McReport",
    "increment_moment_stats",
    "empirical_corollary",
]


def gaussian_abs_moment(p):
    """E|Z|^p for standard normal Z: 2^(p/2) Gamma((p+1)/2) / sqrt(pi)."""
    if p <= 0:
        raise ValueError("p must be positive")
    return 2.0 ** (p / 2.0) * math.gamma((p + 1.0) / 2.0) / math.sqrt(math.pi)


def _normalizer(psi):
    """Scale c with E psi(|N(0,1)| / c) = 1, for the supported gauge kinds."""
    if psi.kind == "power":
        return gaussian_abs_moment(psi.p) ** (1.0 / psi.p)
    if psi.kind == "exponential" and psi.q == 2.0:
        # E exp(lam Z^2) = 1/sqrt(1-2 lam); solve (1/sqrt(1-2/c^2)-1)/(e-1) = 1
        return math.sqrt(2.0 / (1.0 - math.exp(-2.0)))
    raise ValueError("samplers support power gauges and the exponential gauge with q=2")


@dataclass(frozen=True)
class ProcessSampler:
    """Gaussian process on a finite space with unit normalized increments."""

    kind: str
    space: MetricMeasureSpace = field(repr=False)
    sigma: np.ndarray = field(repr=False)  # pairwise increment standard deviations
    psi: object
    times: np.ndarray | None = field(repr=False, default=None)
    chol: np.ndarray | None = field(repr=False, default=None)

    @property
    def n(self):
        return self.space.n


def brownian_grid_sampler(n, psi):
    """Brownian motion observed at n evenly spread times in [0, 1].

    The metric is c * |s - t|^(1/2) with c chosen so the increments have unit
    normalized psi-moment; masses are uniform.
    """
    if n < 2:
        raise ValueError("need at least two grid points")
    c = _normalizer(psi)
    times = np.linspace(0.0, 1.0, n)
    sigma = np.sqrt(np.abs(times[:, None] - times[None, :]))
    space = MetricMeasureSpace(c * sigma, np.full(n, 1.0 / n))
    return ProcessSampler(kind="brownian-grid", space=space, sigma=sigma, psi=psi, times=times)


def gaussian_cov_sampler(cov, psi, mass=None):
    """Centered Gaussian vector with the given covariance.

    The metric is c * sigma(s,t) with sigma the L2 increment distance; rows
    with identical covariance profiles are rejected (zero distance).
    """
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0]
    var = np.diag(cov)
    sigma2 = var[:, None] + var[None, :] - 2.0 * cov
    sigma2 = np.maximum(sigma2, 0.0)
    np.fill_diagonal(sigma2, 0.0)
    sigma = np.sqrt(sigma2)
    if np.any(sigma[~np.eye(n, dtype=bool)] <= 0):
        raise ValueError("covariance induces coincident points")
    c = _normalizer(psi)
    m = np.full(n, 1.0 / n) if mass is None else np.asarray(mass, dtype=float)
    space = MetricMeasureSpace(c * sigma, m / m.sum())
    chol = np.linalg.cholesky(cov + 1e-12 * np.eye(n))
    return ProcessSampler(kind="gaussian-cov", space=space, sigma=sigma, psi=psi, chol=chol)


def analytic_increment_moment(sampler):
    """Exact E psi(|X(s)-X(t)| / d(s,t)) per pair (1 on the off-diagonal)."""
    n = sampler.n
    d = sampler.space.dist
    out = np.zeros((n, n))
    off = ~np.eye(n, dtype=bool)
    ratio = np.zeros_like(d)
    ratio[off] = sampler.sigma[off] / d[off]
    psi = sampler.psi
    if psi.kind == "power":
        out[off] = ratio[off] ** psi.p * gaussian_abs_moment(psi.p)
    else:
        lam = ratio[off] ** 2
        out[off] = (1.0 / np.sqrt(1.0 - 2.0 * lam) - 1.0) / math.expm1(1.0)
    return out


@dataclass(frozen=True)
class PathBatch:
    values: np.ndarray = field(repr=False)  # (n_paths, n_points)
    seed: int
    kind: str

    @property
    def n_paths(self):
        return self.values.shape[0]


def _one_path(sampler, seed, index):
    rng = np.random.default_rng([seed, index])
    if sampler.kind == "brownian-grid":
        dt = np.diff(sampler.times)
        steps = rng.standard_normal(dt.size) * np.sqrt(dt)
        return np.concatenate([[0.0], np.cumsum(steps)])
    z = rng.standard_normal(sampler.n)
    return sampler.chol @ z


def sample(sampler, n_paths, seed, workers=1):
    """Draw n_paths paths; identical output for any worker count."""
    if n_paths < 1:
        raise ValueError("need at least one path")
    values = np.empty((n_paths, sampler.n))

    def fill(lo, hi):
        for i in range(lo, hi):
            values[i] = _one_path(sampler, seed, i)

    if workers <= 1:
        fill(0, n_paths)
    else:
        chunk = -(-n_paths // workers)
        bounds = [(i, min(i + chunk, n_paths)) for i in range(0, n_paths, chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda ab: fill(*ab), bounds))
    return PathBatch(values=values, seed=int(seed), kind=sampler.kind)


@dataclass(frozen=True)
class McStat:
    name: str
    mean: float
    stderr: float
    n_paths: int
    threshold: float = 1.0

    @property
    def passed(self):
        return self.mean + 3.0 * self.stderr <= self.threshold


@dataclass(frozen=True)
class McReport:
    stats: list

    @property
    def passed(self):
        return all(s.passed for s in self.stats)

    def stat(self, name):
        for s in self.stats:
            if s.name == name:
                return s
        raise KeyError(name)


def _path_sups(values, iu, iv, denom, chunk=512):
    sups = np.empty(values.shape[0])
    for lo in range(0, values.shape[0], chunk):
        hi = min(lo + chunk, values.shape[0])
        ratios = np.abs(values[lo:hi, iu] - values[lo:hi, iv]) / denom[None, :]
        sups[lo:hi] = ratios.max(axis=1)
    return sups


def _mean_stderr(x):
    m = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return m, se


def increment_moment_stats(batch, sampler):
    """Empirical per-pair psi moment of normalized increments, worst pair.

    Sampler correctness: the worst empirical mean should sit within three
    standard errors of the analytic value 1.
    """
    n = sampler.n
    iu, iv = np.triu_indices(n, 1)
    d = sampler.space.dist[iu, iv]
    vals = sampler.psi.value(np.abs(batch.values[:, iu] - batch.values[:, iv]) / d[None, :])
    means = vals.mean(axis=0)
    ses = vals.std(axis=0, ddof=1) / math.sqrt(batch.n_paths)
    j = int(np.argmax(means - 3.0 * ses))
    worst = McStat("increment_moment_worst_pair", float(means[j]), float(ses[j]), batch.n_paths,
                   threshold=1.0 + 6.0 * float(ses[j]))
    return McReport([worst])


def empirical_corollary(batch, cert, metrics):
    """Empirical E sup over pairs of the certificate-normalized increments.

    For a ratio-pair certificate: sup |dX| / (2 K tau) and its psi image.
    For a radius-weighted certificate: sup phi(|dX| / modulus). Pass means
    mean + 3 * stderr <= 1.
    """
    space = metrics.space
    if cert.n != space.n or batch.values.shape[1] != space.n:
        raise ValueError("batch, certificate and metrics must share one space")
    iu, iv = np.triu_indices(space.n, 1)
    tau = metrics.tau[iu, iv]
    if np.any(tau <= 0):
        raise ValueError("coincident points produce zero minorizing distances")
    stats = []
    if cert.theorem == "T1":
        denom = 2.0 * cert.K * tau
        sups = _path_sups(batch.values, iu, iv, denom)
        m, se = _mean_stderr(sups)
        stats.append(McStat("increment_ratio_sup", m, se, batch.n_paths))
        gauge_vals = cert.psi.value(sups)
        m2, se2 = _mean_stderr(gauge_vals)
        stats.append(McStat("gauge_ratio_sup", m2, se2, batch.n_paths))
    else:
        denom = modulus_pairs(cert, metrics, iu, iv)
        sups = _path_sups(batch.values, iu, iv, denom)
        vals = cert.phi.value(sups)
        m, se = _mean_stderr(vals)
        stats.append(McStat("modulus_ratio_sup", m, se, batch.n_paths))
    return McReport(stats)
