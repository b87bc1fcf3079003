"""AWGN and two-antenna SDMA channel simulation, plus seeded RNG substreams.

Every random quantity in the package is drawn from a ``numpy.random.Generator``
derived from one 64-bit master seed via ``derive_rng``.  The derivation hashes
the seed together with arbitrary stream keys (strings/ints), so noise,
channels, and symbol draws get independent, reproducible substreams and any
experiment point can be regenerated in isolation.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NoiseParams",
    "SdmaChannelSet",
    "derive_rng",
    "snr_db_to_sigma_sq",
    "sigma_sq_to_snr_db",
    "awgn_apply",
    "draw_sdma_channels",
    "sdma_transmit",
]


def derive_rng(seed: int, *keys) -> np.random.Generator:
    """Deterministic substream generator for (master seed, stream keys).

    Keys may be ints or strings; they are hashed, not concatenated, so
    distinct key tuples cannot collide by string juxtaposition.
    """
    h = hashlib.blake2b(digest_size=16)
    h.update(repr(int(seed)).encode())
    for k in keys:
        h.update(b"\x1f")
        h.update(repr(k).encode())
    return np.random.default_rng(int.from_bytes(h.digest(), "little"))


def snr_db_to_sigma_sq(snr_db: float) -> float:
    """Noise variance for a given SNR in dB (SNR defined as 1/sigma^2)."""
    return 10.0 ** (-snr_db / 10.0)


def sigma_sq_to_snr_db(sigma_sq: float) -> float:
    if sigma_sq <= 0:
        raise ValueError("sigma_sq must be positive to express an SNR in dB")
    return -10.0 * math.log10(sigma_sq)


@dataclass(frozen=True)
class NoiseParams:
    """Complex noise variance sigma^2 with its SNR views (SNR = 1/sigma^2)."""

    sigma_sq: float

    def __post_init__(self):
        if not (self.sigma_sq >= 0):
            raise ValueError(f"sigma_sq must be >= 0, got {self.sigma_sq}")

    @property
    def snr_linear(self) -> float:
        return math.inf if self.sigma_sq == 0 else 1.0 / self.sigma_sq

    @property
    def snr_db(self) -> float:
        return math.inf if self.sigma_sq == 0 else sigma_sq_to_snr_db(self.sigma_sq)

    @classmethod
    def from_snr_db(cls, snr_db: float) -> "NoiseParams":
        return cls(snr_db_to_sigma_sq(snr_db))


@dataclass(frozen=True)
class SdmaChannelSet:
    """Per-subcarrier channel pairs for the two-antenna, two-user link.

    ``h[l]`` is the desired user's 2-vector on subcarrier ``l``; ``g[l]`` the
    interferer's.
    """

    h: np.ndarray  # (P, 2) complex
    g: np.ndarray  # (P, 2) complex

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.complex128)
        g = np.asarray(self.g, dtype=np.complex128)
        if h.shape != g.shape or h.ndim != 2 or h.shape[1] != 2 or h.shape[0] < 1:
            raise ValueError(f"channel arrays must both be (P, 2), got {h.shape} and {g.shape}")
        if not (np.isfinite(h).all() and np.isfinite(g).all()):
            raise ValueError("channel entries must be finite")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)

    @property
    def num_subcarriers(self) -> int:
        return self.h.shape[0]


def awgn_apply(symbols, sigma_sq: float, rng: np.random.Generator) -> np.ndarray:
    """Add circularly symmetric complex Gaussian noise of variance sigma_sq.

    Each quadrature carries variance sigma_sq/2.  Output is deterministic
    given the generator state; sigma_sq == 0 returns a copy of the input.
    """
    if sigma_sq < 0:
        raise ValueError(f"sigma_sq must be >= 0, got {sigma_sq}")
    x = np.asarray(symbols, dtype=np.complex128)
    if sigma_sq == 0:
        return x.copy()
    w = rng.standard_normal(x.shape + (2,))
    return x + math.sqrt(sigma_sq / 2.0) * (w[..., 0] + 1j * w[..., 1])


def draw_sdma_channels(num_subcarriers: int, rng: np.random.Generator) -> SdmaChannelSet:
    """Draw i.i.d. unit-variance Rayleigh channels per subcarrier and antenna.

    Desired-user and interferer channels are independent; every entry is
    circularly symmetric complex Gaussian with E|.|^2 = 1.
    """
    if num_subcarriers < 1:
        raise ValueError("num_subcarriers must be >= 1")
    w = rng.standard_normal((2, num_subcarriers, 2, 2))
    cplx = (w[..., 0] + 1j * w[..., 1]) / math.sqrt(2.0)
    return SdmaChannelSet(h=cplx[0], g=cplx[1])


def sdma_transmit(
    x, x_prime, channels: SdmaChannelSet, sigma_sq: float, rng: np.random.Generator
) -> np.ndarray:
    """Received (P, N, 2) antenna samples: h*x + g*x' + noise per subcarrier.

    ``x`` and ``x_prime`` are (P, N) symbol matrices of the desired user and
    the interferer; the noise vector is i.i.d. complex Gaussian with variance
    sigma_sq per antenna.
    """
    if sigma_sq < 0:
        raise ValueError(f"sigma_sq must be >= 0, got {sigma_sq}")
    x = np.asarray(x, dtype=np.complex128)
    xp = np.asarray(x_prime, dtype=np.complex128)
    p = channels.num_subcarriers
    if x.ndim != 2 or x.shape != xp.shape or x.shape[0] != p:
        raise ValueError(
            f"symbol matrices must both be ({p}, N); got {x.shape} and {xp.shape}"
        )
    y = channels.h[:, None, :] * x[:, :, None] + channels.g[:, None, :] * xp[:, :, None]
    if sigma_sq > 0:
        w = rng.standard_normal(y.shape + (2,))
        y = y + math.sqrt(sigma_sq / 2.0) * (w[..., 0] + 1j * w[..., 1])
    return y
