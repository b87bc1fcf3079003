"""Modulation classifiers: K-S (exact CDF and table lookup) and cumulant.

The K-S classifiers pool the received samples' quadratures, compare the ECDF
against each candidate's reference CDF, and decide by the minimum
sup-distance; the normalized significance levels double as a soft decision.
The cumulant baseline decides by proximity of the normalized sample
fourth-order cumulant to each candidate's exact value.

All decision ties resolve toward the lower modulation order.  Besides the
per-record functions, this module carries vectorized `*_rows` helpers that
decide many independent sample records in one shot; the Monte Carlo harness
is built on those, and they are kept decision-identical to the per-record
path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellation import ModulationFormat, theoretical_c42
from .cdf_model import QuantizedCdfTable, table_lookup, theoretical_cdf_eval
from .ks_core import _ks_distance_rows, ks_significance, quadrature_split

__all__ = [
    "ClassificationResult",
    "classify_ks_exact",
    "classify_ks_table",
    "soft_decision",
    "sample_c42",
    "classify_cumulant",
]

_SOFT_FLOOR = 1e-300


@dataclass(frozen=True)
class ClassificationResult:
    """Hard decision plus per-candidate distances, significances, and soft mass."""

    decided: ModulationFormat
    d_hat: dict[ModulationFormat, float]
    alpha_hat: dict[ModulationFormat, float]
    soft: dict[ModulationFormat, float]


def _canonical_candidates(candidates) -> tuple[ModulationFormat, ...]:
    cands = sorted(set(candidates), key=lambda f: f.order)
    if not cands:
        raise ValueError("candidate set must be nonempty")
    return tuple(cands)


def _sorted_quadrature_rows(samples: np.ndarray) -> np.ndarray:
    """(T, N) complex records -> (T, 2N) sorted quadrature statistics."""
    y = np.asarray(samples, dtype=np.complex128)
    if y.ndim != 2 or y.shape[1] == 0:
        raise ValueError("expected a (T, N) sample matrix with N >= 1")
    return np.sort(np.concatenate([y.real, y.imag], axis=1), axis=1)


def _ks_exact_distance_matrix(z_rows, sigma, candidates) -> np.ndarray:
    """(T, K) K-S distances of each row against each candidate's exact CDF."""
    return np.stack(
        [_ks_distance_rows(theoretical_cdf_eval(k, sigma, z_rows)) for k in candidates],
        axis=-1,
    )


def _ks_table_distance_matrix(z_rows, snr_db, table, candidates) -> np.ndarray:
    return np.stack(
        [_ks_distance_rows(table_lookup(table, k, snr_db, z_rows)) for k in candidates],
        axis=-1,
    )


def decide_ks_exact_rows(samples, sigma: float, candidates) -> np.ndarray:
    """Vectorized hard decisions over (T, N) records; returns (T,) candidate indices.

    Candidate indices refer to the canonically ordered (ascending order)
    candidate tuple.
    """
    cands = _canonical_candidates(candidates)
    if not (sigma > 0):
        raise ValueError(f"sigma must be > 0, got {sigma}")
    z = _sorted_quadrature_rows(samples)
    return np.argmin(_ks_exact_distance_matrix(z, sigma, cands), axis=-1)


def decide_ks_table_rows(samples, snr_db: float, table: QuantizedCdfTable, candidates) -> np.ndarray:
    cands = _canonical_candidates(candidates)
    z = _sorted_quadrature_rows(samples)
    return np.argmin(_ks_table_distance_matrix(z, snr_db, table, cands), axis=-1)


def c42_rows(samples, sigma_sq: float) -> np.ndarray:
    """Normalized sample fourth-order cumulant of each (row) record."""
    y = np.asarray(samples, dtype=np.complex128)
    if y.ndim != 2 or y.shape[1] == 0:
        raise ValueError("expected a (T, N) sample matrix with N >= 1")
    a2 = np.abs(y) ** 2
    m2 = a2.mean(axis=1)
    m4 = (a2 * a2).mean(axis=1)
    msq = (y * y).mean(axis=1)
    den = m2 - sigma_sq
    if np.any(np.abs(den) < 1e-9):
        raise ValueError("degenerate input: sample power is within 1e-9 of sigma_sq")
    return (m4 - np.abs(msq) ** 2 - 2.0 * m2**2) / den**2


def decide_cumulant_rows(samples, sigma_sq: float, candidates) -> np.ndarray:
    cands = _canonical_candidates(candidates)
    refs = np.array([theoretical_c42(k) for k in cands])
    c = c42_rows(samples, sigma_sq)
    return np.argmin(np.abs(c[:, None] - refs[None, :]), axis=-1)


def _result_from_distances(cands, d, count) -> ClassificationResult:
    decided = cands[int(np.argmin(d))]
    d_hat = {k: float(v) for k, v in zip(cands, d)}
    alpha_hat = {k: ks_significance(count, d_hat[k]) for k in cands}
    return ClassificationResult(
        decided=decided, d_hat=d_hat, alpha_hat=alpha_hat, soft=soft_decision(alpha_hat)
    )


def classify_ks_exact(samples, sigma: float, candidates) -> ClassificationResult:
    """Classify one record of complex samples against exact reference CDFs.

    ``sigma`` is the known noise standard deviation entering the reference
    CDFs.  The decision is the candidate with the minimum K-S distance;
    significance levels use the pooled quadrature count 2N.
    """
    cands = _canonical_candidates(candidates)
    if not (sigma > 0):
        raise ValueError(f"sigma must be > 0, got {sigma}")
    ss = quadrature_split(samples)
    z = ss.values[None, :]
    d = _ks_exact_distance_matrix(z, sigma, cands)[0]
    return _result_from_distances(cands, d, ss.count)


def classify_ks_table(
    samples, snr_db_assumed: float, table: QuantizedCdfTable, candidates
) -> ClassificationResult:
    """Classify like ``classify_ks_exact`` but read CDFs from a lookup table.

    The table row nearest to ``snr_db_assumed`` supplies each candidate's
    CDF.  Raises ValueError when a candidate is missing from the table.
    """
    cands = _canonical_candidates(candidates)
    for k in cands:
        table.format_index(k)
    ss = quadrature_split(samples)
    z = ss.values[None, :]
    d = _ks_table_distance_matrix(z, snr_db_assumed, table, cands)[0]
    return _result_from_distances(cands, d, ss.count)


def soft_decision(alpha_hat: dict[ModulationFormat, float]) -> dict[ModulationFormat, float]:
    """Normalize significance levels into a probability mass over candidates.

    If every level has underflowed (all below 1e-300, which happens at large
    sample counts where every fit is rejected), the uniform distribution is
    returned instead.
    """
    if not alpha_hat:
        raise ValueError("alpha_hat must be nonempty")
    vals = np.array(list(alpha_hat.values()), dtype=np.float64)
    if np.any(vals < 0):
        raise ValueError("significance levels must be nonnegative")
    if vals.max() < _SOFT_FLOOR:
        u = 1.0 / len(vals)
        return {k: u for k in alpha_hat}
    total = vals.sum()
    return {k: float(v / total) for k, v in zip(alpha_hat, vals)}


def sample_c42(samples, sigma_sq: float) -> float:
    """Normalized sample fourth-order cumulant of one record.

    (E|y|^4 - |E{y^2}|^2 - 2(E|y|^2)^2) / (E|y|^2 - sigma_sq)^2 with plain
    sample means; invariant to scaling samples by c with sigma_sq by c^2.
    """
    y = np.asarray(samples, dtype=np.complex128).ravel()
    if y.size == 0:
        raise ValueError("samples must be nonempty")
    return float(c42_rows(y[None, :], sigma_sq)[0])


def classify_cumulant(samples, sigma_sq: float, candidates) -> ModulationFormat:
    """Decide the format whose exact cumulant is nearest the sample cumulant."""
    cands = _canonical_candidates(candidates)
    y = np.asarray(samples, dtype=np.complex128).ravel()
    if y.size == 0:
        raise ValueError("samples must be nonempty")
    return cands[int(decide_cumulant_rows(y[None, :], sigma_sq, cands)[0])]
