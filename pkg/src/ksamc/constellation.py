"""Square QAM constellations with Gray bit mapping and exact cumulant values.

The candidate set is fixed to {4-QAM, 16-QAM, 64-QAM}, each normalized to
unit average symbol energy.  Point indices are row-major over the
(real level, imaginary level) grid with levels ascending, so index 0 is the
bottom-left corner point; this ordering is stable and shared by table files
and CSV output.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "ModulationFormat",
    "Constellation",
    "constellation_points",
    "modulate",
    "demodulate_min_distance",
    "theoretical_c42",
    "count_bit_errors",
]

# popcount over a byte, for Gray-label bit-error counting
_POPCOUNT8 = np.array([bin(v).count("1") for v in range(256)], dtype=np.uint8)


class ModulationFormat(enum.Enum):
    """The three candidate square-QAM formats."""

    QAM4 = 4
    QAM16 = 16
    QAM64 = 64

    @property
    def order(self) -> int:
        """Number of constellation points."""
        return self.value

    @property
    def bits_per_symbol(self) -> int:
        return self.value.bit_length() - 1

    @classmethod
    def from_name(cls, name: str) -> "ModulationFormat":
        try:
            return cls[name.strip()]
        except KeyError:
            raise ValueError(f"unknown modulation format {name!r}") from None


@dataclass(frozen=True)
class Constellation:
    """Unit-energy point set of one format, plus its per-rail Gray labeling.

    ``bit_map[pattern]`` is the point index carrying bit pattern ``pattern``
    (an integer of ``bits_per_symbol`` bits); ``bits_for_index`` is the
    inverse.  Arrays are read-only, so instances can be shared freely across
    concurrent workers.
    """

    format: ModulationFormat
    points: np.ndarray        # (order,) complex128, mean |point|^2 == 1
    real_levels: np.ndarray   # (sqrt(order),) ascending real-axis coordinates
    bit_map: np.ndarray       # (order,) bit pattern -> point index
    bits_for_index: np.ndarray  # (order,) point index -> bit pattern

    @property
    def order(self) -> int:
        return self.format.order

    @property
    def bits_per_symbol(self) -> int:
        return self.format.bits_per_symbol


def _gray(i: np.ndarray) -> np.ndarray:
    return i ^ (i >> 1)


@lru_cache(maxsize=None)
def constellation_points(format: ModulationFormat) -> Constellation:
    """Build (and cache) the unit-energy constellation for ``format``.

    Points are ``scale * (a + jb)`` over the odd-integer level grid, with
    scale 1/sqrt(2), 1/sqrt(10), 1/sqrt(42) for orders 4, 16, 64.  The bit
    labeling is Gray-coded independently on each rail: the high half of the
    pattern addresses the real level, the low half the imaginary level.
    """
    if not isinstance(format, ModulationFormat):
        raise TypeError(f"expected ModulationFormat, got {format!r}")
    m = int(round(math.sqrt(format.order)))
    base = 2 * np.arange(m) - (m - 1)                 # -(m-1), ..., m-1 step 2
    scale = 1.0 / math.sqrt(2.0 * np.mean(base.astype(float) ** 2))
    levels = base * scale
    # row-major over (real, imag): index = i_real * m + i_imag
    points = (levels[:, None] + 1j * levels[None, :]).reshape(-1)

    half = format.bits_per_symbol // 2
    gray = _gray(np.arange(m))
    i_re = np.repeat(np.arange(m), m)
    i_im = np.tile(np.arange(m), m)
    bits_for_index = (gray[i_re] << half) | gray[i_im]
    bit_map = np.empty(format.order, dtype=np.int64)
    bit_map[bits_for_index] = np.arange(format.order)

    for arr in (points, levels, bit_map, bits_for_index):
        arr.flags.writeable = False
    return Constellation(
        format=format,
        points=points,
        real_levels=levels,
        bit_map=bit_map,
        bits_for_index=bits_for_index.astype(np.int64),
    )


def modulate(indices, constellation: Constellation) -> np.ndarray:
    """Map point indices to complex symbols.

    Raises ValueError for any index outside [0, order).
    """
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= constellation.order):
        raise ValueError(
            f"symbol index out of range for order {constellation.order}"
        )
    return constellation.points[idx]


def demodulate_min_distance(sample, constellation: Constellation):
    """Minimum-distance detection; ties resolve to the lowest point index.

    Accepts a scalar or an ndarray of complex samples and returns indices of
    matching shape (a plain int for scalar input).
    """
    s = np.asarray(sample, dtype=np.complex128)
    d = np.abs(s[..., None] - constellation.points)
    idx = np.argmin(d, axis=-1)
    if s.ndim == 0:
        return int(idx)
    return idx


def theoretical_c42(format: ModulationFormat) -> float:
    """Normalized fourth-order cumulant E|x|^4 - |E{x^2}|^2 - 2(E|x|^2)^2.

    Computed by enumerating the unit-energy point set with equiprobable
    points (exact up to float rounding): -1 for 4-QAM, -0.68 for 16-QAM,
    -13/21 for 64-QAM.
    """
    p = constellation_points(format).points
    e2 = np.mean(np.abs(p) ** 2)
    e4 = np.mean(np.abs(p) ** 4)
    ex2 = np.mean(p**2)
    return float(e4 - abs(ex2) ** 2 - 2.0 * e2**2)


def count_bit_errors(true_indices, decided_indices, constellation: Constellation) -> int:
    """Number of differing Gray-labeled bits between two index sequences."""
    a = constellation.bits_for_index[np.asarray(true_indices, dtype=np.int64)]
    b = constellation.bits_for_index[np.asarray(decided_indices, dtype=np.int64)]
    return int(_POPCOUNT8[(a ^ b).astype(np.uint8)].sum())
