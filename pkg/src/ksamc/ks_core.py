"""One-sample Kolmogorov-Smirnov machinery.

Covers the quadrature decision statistic (pooled real/imaginary parts of the
received samples), the empirical CDF, the K-S sup-distance against a
hypothesized CDF, the asymptotic significance level of an observed distance,
and the Gaussian Q-function.

The sup-distance is evaluated on both sides of every ECDF jump by default:
against a continuous reference CDF the supremum sits at a jump's lower side
about half the time, and checking only the upper side underestimates it.
``both_jump_sides=False`` restores the upper-side-only evaluation for
compatibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "SampleSet",
    "quadrature_split",
    "ecdf_eval",
    "ks_statistic",
    "ks_q",
    "ks_significance",
    "gaussian_q",
]


@dataclass(frozen=True)
class SampleSet:
    """A nonempty, ascending-sorted sequence of real decision statistics."""

    values: np.ndarray
    count: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("SampleSet requires a nonempty 1-D value array")
        if not np.isfinite(v).all():
            raise ValueError("SampleSet values must be finite")
        if np.any(np.diff(v) < 0):
            raise ValueError("SampleSet values must be sorted ascending")
        if self.count != v.size:
            raise ValueError("count must equal len(values)")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, values) -> "SampleSet":
        """Sort raw values into a SampleSet."""
        v = np.sort(np.asarray(values, dtype=np.float64).ravel())
        return cls(values=v, count=v.size)


def quadrature_split(samples) -> SampleSet:
    """Pool real and imaginary parts of complex samples into one SampleSet.

    N complex inputs give 2N sorted reals.  Raises ValueError on empty input
    (no statistic is defined for it).
    """
    y = np.asarray(samples, dtype=np.complex128).ravel()
    if y.size == 0:
        raise ValueError("cannot form a decision statistic from zero samples")
    return SampleSet.from_values(np.concatenate([y.real, y.imag]))


def ecdf_eval(sample_set: SampleSet, z):
    """Empirical CDF (1/M) * #{values <= z}; right-continuous step function.

    ``z`` may be a scalar or an ndarray; evaluation is a binary search over
    the pre-sorted values.
    """
    pos = np.searchsorted(sample_set.values, z, side="right")
    out = pos / sample_set.count
    if np.ndim(z) == 0:
        return float(out)
    return out


def _ks_distance_rows(cdf_rows: np.ndarray, both_jump_sides: bool = True) -> np.ndarray:
    """Max |ECDF - cdf| per row, given the reference CDF at the sorted samples.

    ``cdf_rows`` has shape (..., M) with entry i the reference CDF at the
    i-th order statistic; the implied ECDF steps are i/M (and (i-1)/M on the
    lower side of each jump).
    """
    m = cdf_rows.shape[-1]
    upper = np.arange(1, m + 1, dtype=np.float64) / m
    d = np.abs(upper - cdf_rows)
    if both_jump_sides:
        lower = np.arange(0, m, dtype=np.float64) / m
        d = np.maximum(d, np.abs(lower - cdf_rows))
    return d.max(axis=-1)


def ks_statistic(sample_set: SampleSet, cdf, both_jump_sides: bool = True) -> float:
    """K-S sup-distance between the sample ECDF and the CDF evaluator ``cdf``.

    ``cdf`` must accept an ndarray of probe points and return values in
    [0, 1]; values outside that range raise ValueError.
    """
    f = np.asarray(cdf(sample_set.values), dtype=np.float64)
    if f.shape != sample_set.values.shape:
        raise ValueError("cdf evaluator must return one value per sample")
    if not np.isfinite(f).all() or f.min() < -1e-12 or f.max() > 1 + 1e-12:
        raise ValueError("cdf evaluator returned values outside [0, 1]")
    return float(_ks_distance_rows(np.clip(f, 0.0, 1.0), both_jump_sides))


def ks_q(x: float) -> float:
    """Tail series 2 * sum_{m>=1} (-1)^(m-1) exp(-2 m^2 x^2), clamped to [0,1].

    Terms below 1e-12 in magnitude are dropped (at most 100 terms are
    summed).  For x <= 0.05 the right-hand limit 1 is returned directly; the
    alternating series itself is numerically useless that close to zero.
    """
    if x < 0:
        raise ValueError(f"ks_q requires x >= 0, got {x}")
    if x <= 0.05:
        return 1.0
    total = 0.0
    sign = 1.0
    for m in range(1, 101):
        term = math.exp(-2.0 * m * m * x * x)
        if term < 1e-12:
            break
        total += sign * term
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_significance(count: int, d_hat: float) -> float:
    """Asymptotic probability of a K-S distance exceeding ``d_hat``.

    Uses the finite-sample-corrected argument
    (sqrt(M) + 0.12 + 0.11/sqrt(M)) * d_hat with M the number of decision
    statistics actually compared (2N after the quadrature split).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if not (0.0 <= d_hat <= 1.0):
        raise ValueError(f"d_hat must be in [0, 1], got {d_hat}")
    root = math.sqrt(count)
    return ks_q((root + 0.12 + 0.11 / root) * d_hat)


def gaussian_q(a):
    """Standard normal tail probability P(Z > a).

    Accepts scalars or ndarrays; absolute error is at the double-precision
    level of the underlying complementary normal CDF.
    """
    out = special.ndtr(-np.asarray(a, dtype=np.float64))
    if np.ndim(a) == 0:
        return float(out)
    return out
