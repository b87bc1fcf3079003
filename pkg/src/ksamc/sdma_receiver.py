"""Two-antenna OFDM-SDMA interference-cancellation receiver.

Receiver chain per frame: draw per-subcarrier channels, receive the two
users' superimposed signals, extract the interferer with a per-subcarrier
unbiased MMSE filter, classify the interferer's modulation per subcarrier
group from one OFDM word of filter outputs, demodulate and subtract the
interferer, then matched-filter and demodulate the desired user.  The
``mmse-only`` mode skips cancellation (the same filter structure extracts
the desired user directly), and the ``ideal`` mode cancels with the true
interferer symbols, which lower-bounds every practical variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import SdmaChannelSet, draw_sdma_channels, sdma_transmit, snr_db_to_sigma_sq
from .cdf_model import QuantizedCdfTable
from .classifiers import classify_cumulant, classify_ks_exact, classify_ks_table
from .constellation import (
    ModulationFormat,
    Constellation,
    constellation_points,
    count_bit_errors,
    demodulate_min_distance,
)

__all__ = [
    "RECEIVER_MODES",
    "MmseFilter",
    "SdmaFrameConfig",
    "SdmaReceiverReport",
    "mmse_design",
    "mmse_output",
    "classify_interferer",
    "cancel_and_demod",
    "run_sdma_frame",
]

RECEIVER_MODES = ("mmse-only", "ic-ks", "ic-cumulant", "ideal")

CANDIDATE_FORMATS = (
    ModulationFormat.QAM4,
    ModulationFormat.QAM16,
    ModulationFormat.QAM64,
)


@dataclass(frozen=True)
class MmseFilter:
    """Unbiased interferer-extraction filter for one subcarrier.

    ``m`` passes the extracted channel undistorted (m^H g = 1); ``alpha`` is
    the normalizing scalar; ``residual_var`` is the variance of the leaked
    signal-plus-noise at the filter output.
    """

    m: np.ndarray  # (2,) complex
    alpha: complex
    residual_var: float


def _mmse_design_arrays(h: np.ndarray, g: np.ndarray, sigma_sq: float):
    """Vectorized filter design for (…, 2) channel arrays.

    Uses the rank-one inverse of (h h^H + sigma^2 I); returns (m, alpha,
    residual_var) with shapes (..., 2), (...,), (...,).
    """
    hh = np.sum(np.abs(h) ** 2, axis=-1)
    hg = np.sum(np.conj(h) * g, axis=-1)
    u = (g - h * (hg / (sigma_sq + hh))[..., None]) / sigma_sq
    ghu = np.real(np.sum(np.conj(g) * u, axis=-1))
    if np.any(ghu <= 0) or not np.all(np.isfinite(ghu)):
        raise ValueError("singular normalization: extracted channel has no energy")
    alpha = 1.0 / ghu
    m = alpha[..., None] * u
    mh = np.sum(np.conj(m) * h, axis=-1)
    residual = np.abs(mh) ** 2 + sigma_sq * np.sum(np.abs(m) ** 2, axis=-1)
    return m, alpha, residual


def mmse_design(h, g, sigma_sq: float) -> MmseFilter:
    """Design the filter m = alpha (h h^H + sigma^2 I)^{-1} g for one subcarrier.

    ``h`` is the channel to suppress, ``g`` the channel to extract;
    alpha = [g^H (h h^H + sigma^2 I)^{-1} g]^{-1} forces m^H g = 1.  Requires
    sigma_sq > 0 (keeps the matrix invertible); g = 0 raises the singular
    normalization error.
    """
    if not (sigma_sq > 0):
        raise ValueError(f"sigma_sq must be > 0, got {sigma_sq}")
    h = np.asarray(h, dtype=np.complex128).reshape(2)
    g = np.asarray(g, dtype=np.complex128).reshape(2)
    m, alpha, residual = _mmse_design_arrays(h, g, sigma_sq)
    return MmseFilter(m=m, alpha=complex(alpha), residual_var=float(residual))


def mmse_output(filter: MmseFilter, y) -> complex:
    """Filter output m^H y; equals the extracted symbol plus residual noise."""
    y = np.asarray(y, dtype=np.complex128).reshape(2)
    return complex(np.vdot(filter.m, y))


def classify_interferer(
    gamma_primes,
    residual_var: float,
    candidates=CANDIDATE_FORMATS,
    method: str = "ks",
    table: QuantizedCdfTable | None = None,
) -> ModulationFormat:
    """Classify the interferer's format from a group's filter outputs.

    The residual at the filter output is treated as AWGN with the group's
    mean variance, so the AWGN classifiers apply unchanged.  ``method`` is
    "ks" (exact CDFs), "ks-table" (requires ``table``), or "cumulant".
    """
    samples = np.asarray(gamma_primes, dtype=np.complex128).ravel()
    if samples.size == 0:
        raise ValueError("subcarrier group must be nonempty")
    if method == "ks":
        return classify_ks_exact(samples, math.sqrt(residual_var), candidates).decided
    if method == "ks-table":
        if table is None:
            raise ValueError("method 'ks-table' requires a table")
        snr_db = -10.0 * math.log10(residual_var)
        return classify_ks_table(samples, snr_db, table, candidates).decided
    if method == "cumulant":
        return classify_cumulant(samples, residual_var, candidates)
    raise ValueError(f"unknown classification method {method!r}")


def cancel_and_demod(
    y, h, g, x_prime_hat: complex, desired_constellation: Constellation
):
    """Subtract the reconstructed interferer, matched-filter, and demodulate.

    beta = h^H (y - g x_prime_hat); the desired symbol is the minimum-distance
    point of beta / |h|^2.  Returns (beta, decided index).
    """
    h = np.asarray(h, dtype=np.complex128).reshape(2)
    g = np.asarray(g, dtype=np.complex128).reshape(2)
    y = np.asarray(y, dtype=np.complex128).reshape(2)
    hh = float(np.sum(np.abs(h) ** 2))
    if hh < 1e-12:
        raise ValueError("degenerate desired channel: |h|^2 < 1e-12")
    beta = complex(np.vdot(h, y - g * x_prime_hat))
    return beta, demodulate_min_distance(beta / hh, desired_constellation)


@dataclass(frozen=True)
class SdmaFrameConfig:
    """Parameters of one simulated OFDM-SDMA frame.

    ``group_size`` of 0 means one classification group spanning the whole
    OFDM symbol (all subcarriers carry the same modulation).  The interferer
    channel is scaled so the interferer arrives with ``interferer_power``
    times the desired user's power.
    """

    num_subcarriers: int
    num_words: int
    desired_format: ModulationFormat
    interferer_format: ModulationFormat
    snr_db: float
    mode: str
    group_size: int = 0
    interferer_power: float = 1.0
    table: QuantizedCdfTable | None = None

    def validate(self) -> None:
        if self.num_subcarriers < 1:
            raise ValueError("num_subcarriers must be >= 1")
        if self.num_words < 1:
            raise ValueError("num_words must be >= 1")
        if self.mode not in RECEIVER_MODES:
            raise ValueError(f"mode must be one of {RECEIVER_MODES}, got {self.mode!r}")
        p = self.group_size or self.num_subcarriers
        if p < 1 or self.num_subcarriers % p != 0:
            raise ValueError("group_size must divide num_subcarriers")
        if not (self.interferer_power > 0):
            raise ValueError("interferer_power must be > 0")


@dataclass(frozen=True)
class SdmaReceiverReport:
    """Outcome counters of one frame."""

    classified_formats: tuple[ModulationFormat, ...]
    interferer_symbol_errors: int
    desired_bit_errors: int
    desired_bits_total: int

    @property
    def ber(self) -> float:
        return self.desired_bit_errors / self.desired_bits_total


def _demod_rows(samples: np.ndarray, constellation: Constellation) -> np.ndarray:
    return demodulate_min_distance(samples, constellation)


def run_sdma_frame(config: SdmaFrameConfig, rng: np.random.Generator) -> SdmaReceiverReport:
    """Simulate one frame end to end and count desired-user bit errors.

    All random draws happen before any mode-specific processing, so runs of
    different receiver modes from identically seeded generators see the same
    channels, symbols, and noise.
    """
    config.validate()
    p_sub = config.num_subcarriers
    n_words = config.num_words
    group = config.group_size or p_sub
    sigma_sq = snr_db_to_sigma_sq(config.snr_db)
    des_const = constellation_points(config.desired_format)
    int_const = constellation_points(config.interferer_format)

    chans = draw_sdma_channels(p_sub, rng)
    x_idx = rng.integers(des_const.order, size=(p_sub, n_words))
    xp_idx = rng.integers(int_const.order, size=(p_sub, n_words))
    x = des_const.points[x_idx]
    xp = int_const.points[xp_idx]
    g_eff = chans.g * math.sqrt(config.interferer_power)
    y = sdma_transmit(x, xp, SdmaChannelSet(h=chans.h, g=g_eff), sigma_sq, rng)

    classified: tuple[ModulationFormat, ...] = ()
    interferer_errors = 0

    if config.mode == "mmse-only":
        m_des, _, _ = _mmse_design_arrays(g_eff, chans.h, sigma_sq)
        gamma_des = np.einsum("pa,pna->pn", np.conj(m_des), y)
        decided_idx = _demod_rows(gamma_des, des_const)
    else:
        if config.mode == "ideal":
            xp_hat = xp
        else:
            m_int, _, resid = _mmse_design_arrays(chans.h, g_eff, sigma_sq)
            gamma_int = np.einsum("pa,pna->pn", np.conj(m_int), y)
            method = "cumulant" if config.mode == "ic-cumulant" else (
                "ks-table" if config.table is not None else "ks"
            )
            xp_hat = np.empty_like(gamma_int)
            fmt_list = []
            for start in range(0, p_sub, group):
                sl = slice(start, start + group)
                fmt = classify_interferer(
                    gamma_int[sl, 0], float(resid[sl].mean()),
                    method=method, table=config.table,
                )
                fmt_list.append(fmt)
                hat_const = constellation_points(fmt)
                xp_hat[sl] = hat_const.points[_demod_rows(gamma_int[sl], hat_const)]
            classified = tuple(fmt_list)
            interferer_errors = int(np.count_nonzero(xp_hat != xp))
        beta = np.einsum(
            "pa,pna->pn", np.conj(chans.h), y - g_eff[:, None, :] * xp_hat[:, :, None]
        )
        hh = np.sum(np.abs(chans.h) ** 2, axis=-1)
        decided_idx = _demod_rows(beta / hh[:, None], des_const)

    bit_errors = count_bit_errors(x_idx.ravel(), decided_idx.ravel(), des_const)
    return SdmaReceiverReport(
        classified_formats=classified,
        interferer_symbol_errors=interferer_errors,
        desired_bit_errors=bit_errors,
        desired_bits_total=x_idx.size * des_const.bits_per_symbol,
    )
