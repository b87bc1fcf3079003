"""Reference CDF of the quadrature statistic and its quantized lookup tables.

Under AWGN with noise variance sigma^2, the pooled real/imaginary statistic
of a unit-energy square-QAM signal is a balanced mixture of Gaussians, one
component per distinct real-axis level and each with standard deviation
sigma/sqrt(2).  ``theoretical_cdf_eval`` computes that CDF exactly;
``build_cdf_table`` precomputes it on an (SNR, z) grid so a classifier can
replace the transcendental evaluations with table reads.

Table file layout (little-endian, version 1)::

    KSAMC-CDF v1
    formats=QAM4,QAM16,QAM64
    snr_db=<start>:<step>:<stop>
    z=<start>:<step>:<stop>
    <blank line>
    <raw float64 payload, row-major over (format, snr, z)>

Read rules: the nearest stored SNR row is selected (ties toward the lower
row), z is linearly interpolated between grid nodes, and queries beyond the
stored z range clamp to CDF 0 below and 1 above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .channel import snr_db_to_sigma_sq
from .constellation import ModulationFormat, constellation_points

__all__ = [
    "Z_MIN",
    "Z_MAX",
    "Z_STEP",
    "TableError",
    "TableFormatError",
    "TableTruncatedError",
    "TableValidationError",
    "QuantizedCdfTable",
    "theoretical_cdf_eval",
    "build_cdf_table",
    "table_lookup",
    "serialize_table",
    "deserialize_table",
    "save_table",
    "load_table",
]

Z_MIN = -4.0
Z_MAX = 4.0
Z_STEP = 0.01

_MAGIC = "KSAMC-CDF v1"
# cap the (points x mixture components) working-set size per vectorized block
_CHUNK_ELEMS = 4_000_000


class TableError(Exception):
    """Base class for quantized-table file problems."""


class TableFormatError(TableError):
    """Bad magic, version, or header syntax."""


class TableTruncatedError(TableError):
    """Payload size disagrees with the header's grid dimensions."""


class TableValidationError(TableError):
    """Stored rows violate CDF invariants (monotone, within [0, 1])."""


def _grid(start: float, step: float, stop: float) -> np.ndarray:
    if step <= 0 or stop < start:
        raise ValueError(f"bad grid spec {start}:{step}:{stop}")
    n = int(round((stop - start) / step)) + 1
    g = np.linspace(start, stop, n)
    if n > 1 and abs((g[1] - g[0]) - step) > 1e-9:
        raise ValueError(f"grid spec {start}:{step}:{stop} is not uniform at step {step}")
    return g


def _z_grid() -> np.ndarray:
    return _grid(Z_MIN, Z_STEP, Z_MAX)


def theoretical_cdf_eval(format: ModulationFormat, sigma: float, z):
    """CDF of the quadrature statistic under ``format`` at noise std ``sigma``.

    Equal-weight mixture of normal CDFs centered at the constellation's real
    levels, each with standard deviation sigma/sqrt(2).  ``z`` may be a
    scalar or ndarray (large arrays are processed in blocks).
    """
    if not (sigma > 0):
        raise ValueError(f"sigma must be > 0, got {sigma}")
    levels = constellation_points(format).real_levels
    s = sigma / math.sqrt(2.0)
    zz = np.asarray(z, dtype=np.float64)
    flat = zz.reshape(-1)
    out = np.empty_like(flat)
    block = max(1, _CHUNK_ELEMS // levels.size)
    for i in range(0, flat.size, block):
        seg = flat[i : i + block]
        out[i : i + block] = special.ndtr((seg[:, None] - levels) / s).mean(axis=1)
    if zz.ndim == 0:
        return float(out[0])
    return out.reshape(zz.shape)


@dataclass(frozen=True)
class QuantizedCdfTable:
    """Precomputed quadrature-statistic CDF values on an (SNR, z) grid.

    ``values[f, s, i]`` is the CDF of format ``formats[f]`` at SNR
    ``snr_grid_db[s]`` evaluated at ``z_grid[i]``.  Immutable after
    construction; concurrent reads are unrestricted.
    """

    formats: tuple[ModulationFormat, ...]
    snr_grid_db: np.ndarray
    granularity_db: float
    z_grid: np.ndarray
    values: np.ndarray  # (|formats|, |snr_grid|, |z_grid|) float64 in [0, 1]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        expected = (len(self.formats), len(self.snr_grid_db), len(self.z_grid))
        if vals.shape != expected:
            raise ValueError(f"values shape {vals.shape} != {expected}")
        object.__setattr__(self, "values", vals)

    def format_index(self, format: ModulationFormat) -> int:
        try:
            return self.formats.index(format)
        except ValueError:
            raise ValueError(f"{format.name} is not stored in this table") from None

    def snr_row_index(self, snr_db: float) -> int:
        # ties between two equally near rows resolve to the lower one
        return int(np.argmin(np.abs(self.snr_grid_db - snr_db)))


def build_cdf_table(formats, snr_grid_db, granularity_db: float) -> QuantizedCdfTable:
    """Tabulate the reference CDF for each format over the SNR grid.

    ``snr_grid_db`` must be nonempty and uniformly spaced by
    ``granularity_db`` (the quantization step applied to the receiver's SNR
    knowledge).  The z grid is fixed at [-4, 4] step 0.01.
    """
    fmts = tuple(formats)
    if not fmts:
        raise ValueError("formats must be nonempty")
    grid = np.asarray(snr_grid_db, dtype=np.float64).ravel()
    if grid.size == 0:
        raise ValueError("snr_grid_db must be nonempty")
    if not (granularity_db > 0):
        raise ValueError(f"granularity_db must be > 0, got {granularity_db}")
    if grid.size > 1:
        steps = np.diff(grid)
        if np.any(np.abs(steps - granularity_db) > 1e-9):
            raise ValueError("snr_grid_db must be uniformly spaced by granularity_db")
    z = _z_grid()
    values = np.empty((len(fmts), grid.size, z.size))
    for fi, fmt in enumerate(fmts):
        for si, snr in enumerate(grid):
            sigma = math.sqrt(snr_db_to_sigma_sq(snr))
            values[fi, si] = theoretical_cdf_eval(fmt, sigma, z)
    return QuantizedCdfTable(
        formats=fmts, snr_grid_db=grid, granularity_db=float(granularity_db),
        z_grid=z, values=values,
    )


def table_lookup(table: QuantizedCdfTable, format: ModulationFormat, snr_db: float, z):
    """Read the stored CDF: nearest SNR row, linear interpolation in z.

    Queries below the stored z range return 0, above it 1 (the tails carry
    negligible probability mass and are not stored).  ``z`` may be a scalar
    or ndarray.
    """
    row = table.values[table.format_index(format), table.snr_row_index(snr_db)]
    zz = np.asarray(z, dtype=np.float64)
    out = np.interp(zz, table.z_grid, row)
    out = np.where(zz < table.z_grid[0], 0.0, out)
    out = np.where(zz > table.z_grid[-1], 1.0, out)
    if zz.ndim == 0:
        return float(out)
    return out


def _grid_spec(grid: np.ndarray, step: float) -> str:
    return f"{float(grid[0])!r}:{float(step)!r}:{float(grid[-1])!r}"


def serialize_table(table: QuantizedCdfTable) -> bytes:
    """Encode a table as the versioned header plus raw float64 payload."""
    z_step = Z_STEP if table.z_grid.size < 2 else float(table.z_grid[1] - table.z_grid[0])
    header = "\n".join(
        [
            _MAGIC,
            "formats=" + ",".join(f.name for f in table.formats),
            "snr_db=" + _grid_spec(table.snr_grid_db, table.granularity_db),
            "z=" + _grid_spec(table.z_grid, z_step),
            "",
            "",
        ]
    )
    return header.encode("ascii") + table.values.astype("<f8").tobytes()


def _parse_header_line(line: str, key: str) -> str:
    prefix = key + "="
    if not line.startswith(prefix):
        raise TableFormatError(f"expected '{key}=...' header line, got {line!r}")
    return line[len(prefix):]


def deserialize_table(data: bytes) -> QuantizedCdfTable:
    """Decode and validate a serialized table.

    Raises TableFormatError on magic/header problems, TableTruncatedError on
    payload size mismatch, TableValidationError when stored rows are not
    valid CDFs.
    """
    sep = data.find(b"\n\n")
    if sep < 0:
        raise TableFormatError("missing blank-line separator after header")
    try:
        lines = data[:sep].decode("ascii").split("\n")
    except UnicodeDecodeError:
        raise TableFormatError("header is not ASCII") from None
    if len(lines) != 4:
        raise TableFormatError(f"expected 4 header lines, got {len(lines)}")
    if lines[0] != _MAGIC:
        raise TableFormatError(f"bad magic/version line {lines[0]!r}")
    try:
        formats = tuple(
            ModulationFormat.from_name(n)
            for n in _parse_header_line(lines[1], "formats").split(",")
        )
        snr_start, snr_step, snr_stop = (
            float(v) for v in _parse_header_line(lines[2], "snr_db").split(":")
        )
        z_start, z_step, z_stop = (
            float(v) for v in _parse_header_line(lines[3], "z").split(":")
        )
        snr_grid = _grid(snr_start, snr_step, snr_stop)
        z_grid = _grid(z_start, z_step, z_stop)
    except (ValueError, TypeError) as exc:
        raise TableFormatError(f"bad header field: {exc}") from None

    payload = data[sep + 2 :]
    count = len(formats) * snr_grid.size * z_grid.size
    if len(payload) != 8 * count:
        raise TableTruncatedError(
            f"payload holds {len(payload)} bytes, header implies {8 * count}"
        )
    values = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(
        len(formats), snr_grid.size, z_grid.size
    )
    if not np.isfinite(values).all() or values.min() < -1e-12 or values.max() > 1 + 1e-12:
        raise TableValidationError("stored values outside [0, 1]")
    if np.any(np.diff(values, axis=-1) < -1e-12):
        raise TableValidationError("stored CDF rows are not nondecreasing in z")
    return QuantizedCdfTable(
        formats=formats, snr_grid_db=snr_grid, granularity_db=float(snr_step),
        z_grid=z_grid, values=values,
    )


def save_table(table: QuantizedCdfTable, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_table(table))


def load_table(path) -> QuantizedCdfTable:
    with open(path, "rb") as fh:
        return deserialize_table(fh.read())
