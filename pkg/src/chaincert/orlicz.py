"""Luxemburg and Amemiya norms over finite measures.

Both norms take a vector of function values, a vector of nonnegative weights
over the same index set, and a gauge (a YoungFunction or ConvexGauge). The
convention 0/0 = 0 applies to every averaged integral.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["FiniteMeasure", "luxemburg_norm", "amemiya_norm"]


@dataclass(frozen=True)
class FiniteMeasure:
    """Nonnegative weights over a finite index set."""

    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size == 0:
            raise ValueError("a finite measure needs at least one atom")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "weights", w)

    @property
    def total(self):
        return float(self.weights.sum())

    @property
    def is_probability(self):
        return abs(self.total - 1.0) <= 1e-12


def _aligned(values, measure):
    w = measure.weights if isinstance(measure, FiniteMeasure) else np.asarray(measure, dtype=float).ravel()
    v = np.abs(np.asarray(values, dtype=float).ravel())
    if v.shape != w.shape:
        raise ValueError(f"values and weights are misaligned: {v.shape} vs {w.shape}")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if not np.all(np.isfinite(v)):
        raise ValueError("function values must be finite")
    return v, w


def luxemburg_norm(values, measure, gauge, rel_tol=1e-13):
    """inf{a > 0 : sum_i w_i * gauge(|v_i| / a) <= 1}, 0 when v = 0 a.e.

    Monotone bisection on a; the map a -> integral is nonincreasing, so the
    feasible set is a half line and the returned value is its left endpoint
    to rel_tol relative accuracy.
    """
    v, w = _aligned(values, measure)
    support = w > 0
    if not support.any():
        return 0.0
    v = v[support]
    w = w[support]
    vmax = float(v.max())
    if vmax == 0.0:
        return 0.0

    def integral(a):
        with np.errstate(over="ignore", invalid="ignore"):
            return float(np.sum(w * gauge.value(v / a)))

    hi = vmax
    for _ in range(200):
        if integral(hi) <= 1.0:
            break
        hi *= 2.0
    else:
        raise ArithmeticError("no finite scale satisfies the unit-integral constraint")
    lo = 0.5 * hi
    for _ in range(2500):
        if integral(lo) > 1.0:
            break
        hi = lo
        lo *= 0.5
        if lo < vmax * 1e-280:
            # the integral stays below 1 arbitrarily close to 0
            return 0.0
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if integral(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= rel_tol * hi:
            break
    return 0.5 * (lo + hi)


def amemiya_norm(values, measure, phi, rel_tol=1e-12):
    """inf_{a>0} a * (1 + sum_i w_i * phi(|v_i| / a)).

    The objective is convex in a (perspective of a convex function plus a
    linear term); it is minimized by ternary search on a bracket anchored at
    the Luxemburg norm and expanded toward 0, where the infimum sits for
    gauges with linear growth.
    """
    v, w = _aligned(values, measure)
    lux = luxemburg_norm(values, measure, phi)
    if lux == 0.0:
        return 0.0
    support = w > 0
    v = v[support]
    w = w[support]

    def objective(a):
        with np.errstate(over="ignore", invalid="ignore"):
            return a * (1.0 + float(np.sum(w * phi.value(v / a))))

    lo = lux * 1e-12
    hi = 2.0 * lux * (1.0 + 1e-12)
    best = min(objective(lux), objective(hi))
    for _ in range(240):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        f1, f2 = objective(m1), objective(m2)
        best = min(best, f1, f2)
        if f1 <= f2:
            hi = m2
        else:
            lo = m1
        if hi - lo <= rel_tol * max(hi, 1e-300):
            break
    return min(best, objective(0.5 * (lo + hi)))
