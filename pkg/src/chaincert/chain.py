"""Averaging kernels, composed kernels and explicit chaining certificates.

Two certificates are built. The ratio-pair certificate (tag "T1") weights
closed/open ball averaging kernels by w_k = phi(R^(k+1))/gauge_psi(R^(k+n0+1))
and yields constants (A, B, K) with K = 3*A*B*R^(n0+1). The radius-weighted
certificate (tag "T3") weights the same kernels by r_k(u)*R^(k+1) and yields
(A, B, C, K) with C = 2*A*R^5 and K = A*R/B. Both normalize the kernel sum to
a probability measure on pairs; beyond the stabilization level the bracket
matrix is constant, so only a scalar geometric tail is summed numerically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .mspace import ZeroMassAtomError, radius_table
from .young import ConvexGauge, pair_series, ratio_condition

__all__ = [
    "PreconditionError",
    "CertificateError",
    "AveragingKernel",
    "ComposedKernel",
    "ChainCertificate",
    "constant_a",
    "constant_b3",
    "averaging_kernel",
    "composed_kernel",
    "certificate_thm1",
    "certificate_thm3",
    "modulus_thm3",
    "modulus_pairs",
    "certificate_to_json",
]


class PreconditionError(ValueError):
    """A certificate precondition (growth ratio, series convergence, R range) failed."""


class CertificateError(ValueError):
    """The certificate cannot be built on the given space."""


def constant_a(R):
    """4R^3/((R-1)(R-2)(R-5)) + 3R^2/(2(R-5)); finite only for R > 5."""
    if R <= 5:
        raise ValueError("the trace constant requires R > 5")
    return 4.0 * R ** 3 / ((R - 1.0) * (R - 2.0) * (R - 5.0)) + 3.0 * R ** 2 / (2.0 * (R - 5.0))


def constant_b3(R):
    """3R^4/(R-1)^2, the normalizer bound of the radius-weighted certificate."""
    if R <= 1:
        raise ValueError("R must exceed 1")
    return 3.0 * R ** 4 / (R - 1.0) ** 2


@dataclass(frozen=True)
class AveragingKernel:
    """Row-stochastic matrix of the closed-ball averaging operator at one level."""

    level: int
    matrix: np.ndarray = field(repr=False)

    @property
    def n(self):
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ComposedKernel:
    """Ordered product P_l ... P_k; row x is the probability measure that
    represents applying the level-k..l averages to a function."""

    level_hi: int
    level_lo: int
    matrix: np.ndarray = field(repr=False)


def _closed_rows(space, radii):
    ind = space.dist <= radii[:, None] + 0.0
    rowmass = ind @ space.mass
    with np.errstate(invalid="ignore", divide="ignore"):
        P = np.where(rowmass[:, None] > 0, ind * space.mass[None, :] / rowmass[:, None], 0.0)
    return P


def _open_rows(space, radii):
    ind = space.dist < radii[:, None]
    rowmass = ind @ space.mass
    with np.errstate(invalid="ignore", divide="ignore"):
        P = np.where(rowmass[:, None] > 0, ind * space.mass[None, :] / rowmass[:, None], 0.0)
    return P


def averaging_kernel(table, k):
    """Averaging operator over closed balls B(x, r_k(x)) as a row matrix."""
    if k < 0:
        raise ValueError("level must be nonnegative")
    P = _closed_rows(table.space, table.radius_vector(k))
    return AveragingKernel(level=k, matrix=P)


def composed_kernel(kernels, l, k):
    """Product P_l P_{l-1} ... P_k of per-level kernels (level l applied last).

    kernels maps levels to AveragingKernel (a dict or a list indexed by level).
    """
    if k > l:
        raise ValueError("need k <= l")
    out = None
    for level in range(l, k - 1, -1):
        kern = kernels[level]
        P = kern.matrix if isinstance(kern, AveragingKernel) else np.asarray(kern)
        out = P.copy() if out is None else out @ P
    return ComposedKernel(level_hi=l, level_lo=k, matrix=out)


@dataclass(frozen=True)
class ChainCertificate:
    """Probability measure on pairs plus the constants of one construction.

    theorem "T1" stores (A, B, K) with K = 3*A*B*R^(n0+1); theorem "T3"
    stores (A, B, C, K) with C = 2*A*R^5 and K = A*R/B. R is the effective
    ratio after any escalation; escalated_from records the caller's R when
    it was raised to a power exceeding 5.
    """

    theorem: str
    R: float
    n0: int | None
    A: float
    B: float
    K: float
    C: float | None
    nu: np.ndarray = field(repr=False)
    tail_bound: float
    phi: object = field(repr=False)
    psi: object = field(repr=False, default=None)
    escalated_from: float | None = None
    normalizer: float | None = None
    kstar: int = 0

    @property
    def n(self):
        return self.nu.shape[0]


def _effective_ratio(R):
    if R <= 1:
        raise ValueError("R must exceed 1")
    if R > 5:
        return float(R), None
    power = 1
    Reff = float(R)
    while Reff <= 5:
        power += 1
        Reff = float(R) ** power
        if power > 64:
            raise PreconditionError("could not escalate R above 5")
    return Reff, float(R)


def _require_positive_atoms(space):
    if np.any(space.mass <= 0):
        raise ZeroMassAtomError("certificates require every atom to carry positive mass")


def _log_gauge(psi, log_x_exponent):
    """log(psi(x) - 1) for x = e**log_x_exponent > 1, overflow safe."""
    lv = psi.log_value_exp(log_x_exponent)
    if lv > 36.0:
        return lv  # the -1 correction is below double precision
    return lv + math.log1p(-math.exp(-lv))


def _check_ratio(phi, R, kmax=60):
    chk = ratio_condition(phi, R, kmax=kmax)
    if not chk.ok:
        raise PreconditionError(
            f"growth ratios of phi are not monotone along the grid R={R} "
            f"(first violation at k={chk.first_violation})"
        )


def certificate_thm1(space, phi, psi, R, n0, tail_tol=1e-12):
    """Certificate with kernel weights phi(R^(k+1))/gauge_psi(R^(k+n0+1)).

    Requires R > 5 (smaller R is escalated to the least power above 5),
    monotone growth ratios for phi at the effective R, and convergence of
    sum_k phi(R^k)/psi(R^(k+n0)). The pair measure nu is exact up to the
    scalar weight tail, which is bounded geometrically by tail_tol relative
    to the weight sum.
    """
    _require_positive_atoms(space)
    if int(n0) != n0 or n0 < 1:
        raise PreconditionError("n0 must be an integer >= 1")
    n0 = int(n0)
    Reff, escalated_from = _effective_ratio(R)
    _check_ratio(phi, Reff)
    series = pair_series(phi, psi, Reff, n0)
    if not series.converges:
        raise PreconditionError(
            "sum_k phi(R^k)/psi(R^(k+n0)) does not converge for the requested pair"
        )
    table = radius_table(space, phi, Reff)
    kstar = table.kstar
    n = space.n
    mass = space.mass
    logR = math.log(Reff)

    def weight(k):
        lt = phi.log_value_exp((k + 1) * logR) - _log_gauge(psi, (k + n0 + 1) * logR)
        return math.exp(lt) if lt > -745.0 else 0.0

    closed_avg = {k: mass[:, None] * _closed_rows(space, table.radius_vector(k)) for k in range(0, kstar + 1)}
    open_avg = {0: np.outer(mass, mass)}
    for j in range(1, kstar + 1):
        open_avg[j] = mass[:, None] * _open_rows(space, table.radius_vector(j))

    bracket_sum = np.zeros((n, n))
    weight_sum = 0.0
    tail_weight = 0.0
    prev = None
    recent: list[float] = []
    tail_bound = 0.0
    k = 1
    while True:
        wk = weight(k)
        weight_sum += wk
        if k <= kstar:
            bracket_sum += wk * (2.0 * closed_avg[k] + open_avg[k - 1])
        else:
            tail_weight += wk
        if prev is not None and prev > 0 and wk > 0:
            recent.append(wk / prev)
            recent = recent[-8:]
        if k > kstar and (wk == 0.0 or (recent and max(recent) < 1.0)):
            rho = max(recent) if recent else 0.0
            bound = 0.0 if wk == 0.0 else wk * rho / (1.0 - rho)
            if bound <= tail_tol * max(weight_sum, 1e-300):
                tail_bound = bound
                break
        prev = wk
        k += 1
        if k > 200000:
            raise PreconditionError("weight tail could not be certified within tail_tol")

    bracket_sum += tail_weight * 2.0 * closed_avg[kstar]
    total = float(bracket_sum.sum())
    if total <= 0.0:
        raise CertificateError("degenerate space: the pair measure has no mass")
    nu = bracket_sum / total
    A = constant_a(Reff)
    B1 = 3.0 * weight_sum
    K = 3.0 * A * B1 * Reff ** (n0 + 1)
    return ChainCertificate(
        theorem="T1",
        R=Reff,
        n0=n0,
        A=A,
        B=B1,
        K=K,
        C=None,
        nu=nu,
        tail_bound=3.0 * tail_bound,
        phi=phi,
        psi=psi,
        escalated_from=escalated_from,
        normalizer=total,
        kstar=kstar,
    )


def certificate_thm3(space, phi, R, tail_tol=1e-12):
    """Certificate with kernel weights r_k(u) * R^(k+1).

    The radii vanish from the stabilization level on, so the kernel series
    is a finite exact sum; tail_tol is accepted for interface symmetry and
    the recorded tail bound is exactly zero.
    """
    _require_positive_atoms(space)
    Reff, escalated_from = _effective_ratio(R)
    _check_ratio(phi, Reff)
    table = radius_table(space, phi, Reff)
    kstar = table.kstar
    n = space.n
    mass = space.mass

    S = np.zeros((n, n))
    for k in range(1, kstar + 1):
        rk = table.radius_vector(k)
        rk1 = table.radius_vector(k - 1)
        coef = Reff ** (k + 1)
        closed = mass[:, None] * _closed_rows(space, rk)
        if k - 1 == 0:
            open_part = np.outer(mass, mass)
        else:
            open_part = mass[:, None] * _open_rows(space, rk1)
        S += coef * (2.0 * rk[:, None] * closed + rk1[:, None] * open_part)
    total = float(S.sum())
    if total <= 0.0:
        raise CertificateError(
            "degenerate space: every radius vanishes, no pair measure exists "
            "(single-point spaces are refused)"
        )
    normalizer = total / (1.0 - 1.0 / Reff)
    nu = S / total
    if tail_tol < 0.0:
        raise ValueError("tail_tol must be nonnegative")
    A = constant_a(Reff)
    B3 = constant_b3(Reff)
    C = 2.0 * A * Reff ** 5
    K = A * Reff / B3
    return ChainCertificate(
        theorem="T3",
        R=Reff,
        n0=None,
        A=A,
        B=B3,
        K=K,
        C=C,
        nu=nu,
        tail_bound=0.0,
        phi=phi,
        psi=None,
        escalated_from=escalated_from,
        normalizer=normalizer,
        kstar=kstar,
    )


def modulus_thm3(cert, metrics, s, t):
    """C * tau(s,t) * gauge_inverse(M / (K * tau(s,t))) for distinct points.

    Uses the threshold inverse of the shifted gauge (value 1 at argument 0);
    defined as 0 when s == t by the continuity convention.
    """
    if cert.theorem != "T3":
        raise ValueError("modulus is defined for radius-weighted certificates only")
    if s == t:
        return 0.0
    tau = float(metrics.tau[s, t])
    if tau <= 0.0:
        raise ValueError("distinct points with zero minorizing distance")
    gauge = ConvexGauge(cert.phi)
    return cert.C * tau * gauge.inverse_from_one(metrics.total / (cert.K * tau))


def modulus_pairs(cert, metrics, iu, iv):
    """Vectorized modulus over index pairs (zero minorizing distances rejected)."""
    if cert.theorem != "T3":
        raise ValueError("modulus is defined for radius-weighted certificates only")
    tau = metrics.tau[iu, iv]
    if np.any(tau <= 0):
        raise ValueError("distinct points with zero minorizing distance")
    gauge = ConvexGauge(cert.phi)
    return cert.C * tau * gauge.inverse_from_one(metrics.total / (cert.K * tau))


def certificate_to_json(cert):
    """Wire format: constants plus the dense row-major pair measure."""
    payload = {
        "theorem": cert.theorem,
        "R": cert.R,
        "n0": cert.n0,
        "A": cert.A,
        "B": cert.B,
        "K": cert.K,
        "C": cert.C,
        "nu": [float(v) for v in cert.nu.ravel()],
        "tail_bound": cert.tail_bound,
        "escalated_R": cert.escalated_from,
    }
    return json.dumps(payload, sort_keys=True)
