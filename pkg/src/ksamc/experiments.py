"""Monte Carlo experiment harness: seeded sweeps emitting CSV curve data.

Four experiments are provided: classification rate versus SNR, versus the
SNR offset fed to the classifier (robustness to noise-level mismatch),
versus sample size, and desired-user BER of the four SDMA receiver modes
versus SNR.

Every output is a pure function of (config, seed).  Trial data is drawn
from substreams keyed by (seed, true SNR, sample count, trial index) only,
so the same trial samples are shared by every method at a sweep point, by
every offset in the mismatch sweep, and across experiments that revisit the
same operating point.  Sweep points may be computed in parallel; worker
count cannot change any emitted byte.
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass, fields

import numpy as np

from .channel import awgn_apply, derive_rng, snr_db_to_sigma_sq
from .cdf_model import QuantizedCdfTable, build_cdf_table
from .classifiers import (
    decide_cumulant_rows,
    decide_ks_exact_rows,
    decide_ks_table_rows,
)
from .constellation import ModulationFormat, constellation_points
from .sdma_receiver import RECEIVER_MODES, SdmaFrameConfig, run_sdma_frame

__all__ = [
    "CANDIDATES",
    "ConfigError",
    "ExperimentConfig",
    "ResultRow",
    "load_config",
    "parse_config_value",
    "run_pcc_vs_snr",
    "run_pcc_vs_offset",
    "run_pcc_vs_samples",
    "run_ber_sweep",
    "write_csv",
]

CANDIDATES = (ModulationFormat.QAM4, ModulationFormat.QAM16, ModulationFormat.QAM64)

CSV_HEADER = "experiment,method,variable,value,metric,trials,seed"

KNOWN_METHODS = ("ks", "ks-table", "cumulant")


class ConfigError(ValueError):
    """Invalid experiment configuration (bad key, value, or combination)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs of all experiments; unused fields are ignored by each runner.

    Defaults reproduce the published operating points: SNR sweep -5..25 dB,
    offsets -6..+6 dB around a true SNR of 15 dB, sample sizes up to 1000 at
    14 dB, SNR-quantization granularities {1, 3, 5} dB, and a 512-subcarrier
    OFDM symbol for the receiver comparison.
    """

    seed: int = 1
    trials: int = 2000
    n_samples: int = 100
    snr_grid_db: tuple[float, ...] = tuple(float(v) for v in range(-5, 26))
    offset_grid_db: tuple[float, ...] = tuple(float(v) for v in range(-6, 7))
    sample_size_grid: tuple[int, ...] = (20, 50, 100, 200, 500, 1000)
    methods: tuple[str, ...] = ("ks", "ks-table", "cumulant")
    table_granularities_db: tuple[float, ...] = (1.0, 3.0, 5.0)
    offset_snr_db: float = 15.0
    samples_snr_db: float = 14.0
    table: str = ""
    workers: int = 1
    sdma_num_subcarriers: int = 512
    sdma_words_per_frame: int = 12
    sdma_frames: int = 8
    sdma_desired_format: str = "QAM16"
    sdma_group_size: int = 0
    sdma_modes: tuple[str, ...] = ("ideal", "ic-ks", "ic-cumulant", "mmse-only")
    sdma_interferer_power: float = 1.0


@dataclass(frozen=True)
class ResultRow:
    """One CSV data row: a metric value at one (method, variable) point."""

    experiment: str
    method: str
    variable: float
    value: float
    metric: str
    trials: int
    seed: int


_LIST_FIELDS_FLOAT = {"snr_grid_db", "offset_grid_db", "table_granularities_db"}
_LIST_FIELDS_INT = {"sample_size_grid"}
_LIST_FIELDS_STR = {"methods", "sdma_modes"}


def parse_config_value(name: str, raw: str):
    """Parse one config value from its flat text form (lists comma-separated)."""
    spec = {f.name: f.type for f in fields(ExperimentConfig)}
    if name not in spec:
        raise ConfigError(f"unknown config key {name!r}")
    raw = raw.strip()
    try:
        if name in _LIST_FIELDS_FLOAT:
            return tuple(float(v) for v in raw.split(",") if v.strip() != "")
        if name in _LIST_FIELDS_INT:
            return tuple(int(v) for v in raw.split(",") if v.strip() != "")
        if name in _LIST_FIELDS_STR:
            return tuple(v.strip() for v in raw.split(",") if v.strip() != "")
        if name in ("seed", "trials", "n_samples", "workers", "sdma_num_subcarriers",
                    "sdma_words_per_frame", "sdma_frames", "sdma_group_size"):
            return int(raw)
        if name in ("offset_snr_db", "samples_snr_db", "sdma_interferer_power"):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {name!r}: {exc}") from None


def load_config(path) -> ExperimentConfig:
    """Read a flat key=value config file; '#' lines and blanks are ignored."""
    overrides = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
            key, _, value = stripped.partition("=")
            overrides[key.strip()] = parse_config_value(key.strip(), value)
    return ExperimentConfig(**overrides)


def _validate_common(cfg: ExperimentConfig) -> None:
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1")
    if cfg.n_samples < 1:
        raise ConfigError("n_samples must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    for m in cfg.methods:
        if m not in KNOWN_METHODS:
            raise ConfigError(f"unknown method {m!r}; choose from {KNOWN_METHODS}")
    if not cfg.methods:
        raise ConfigError("methods must be nonempty")
    if "ks-table" in cfg.methods:
        if not cfg.table_granularities_db:
            raise ConfigError("ks-table requires table_granularities_db")
        if any(g <= 0 for g in cfg.table_granularities_db):
            raise ConfigError("table granularities must be > 0 dB")


def _validate_sdma(cfg: ExperimentConfig) -> None:
    if not cfg.snr_grid_db:
        raise ConfigError("snr_grid_db must be nonempty")
    if cfg.sdma_num_subcarriers < 1 or cfg.sdma_words_per_frame < 1 or cfg.sdma_frames < 1:
        raise ConfigError("sdma_num_subcarriers, sdma_words_per_frame, sdma_frames must be >= 1")
    ModulationFormat.from_name(cfg.sdma_desired_format)
    if not cfg.sdma_modes:
        raise ConfigError("sdma_modes must be nonempty")
    for mode in cfg.sdma_modes:
        if mode not in RECEIVER_MODES:
            raise ConfigError(f"unknown receiver mode {mode!r}; choose from {RECEIVER_MODES}")
    group = cfg.sdma_group_size or cfg.sdma_num_subcarriers
    if group < 1 or cfg.sdma_num_subcarriers % group != 0:
        raise ConfigError("sdma_group_size must divide sdma_num_subcarriers")
    if not (cfg.sdma_interferer_power > 0):
        raise ConfigError("sdma_interferer_power must be > 0")


def _mdb(snr_db: float) -> int:
    """Stable integer key for a dB value (milli-dB)."""
    return int(round(float(snr_db) * 1000.0))


def _draw_trials(seed: int, snr_db: float, n_samples: int, trials: int):
    """Per-trial substreams -> (true candidate indices (T,), samples (T, N)).

    The substream key deliberately excludes experiment name, method, and any
    classifier-side assumption, so every consumer of the same operating
    point sees identical data.
    """
    sigma_sq = snr_db_to_sigma_sq(snr_db)
    true_idx = np.empty(trials, dtype=np.int64)
    samples = np.empty((trials, n_samples), dtype=np.complex128)
    consts = [constellation_points(k) for k in CANDIDATES]
    for t in range(trials):
        rng = derive_rng(seed, "amc-trial", _mdb(snr_db), n_samples, t)
        k = int(rng.integers(len(CANDIDATES)))
        const = consts[k]
        sym = const.points[rng.integers(const.order, size=n_samples)]
        true_idx[t] = k
        samples[t] = awgn_apply(sym, sigma_sq, rng)
    return true_idx, samples


def _expand_methods(cfg: ExperimentConfig) -> tuple[tuple[str, float | None], ...]:
    """Method list with ks-table fanned out per granularity: (label, delta)."""
    out = []
    for m in cfg.methods:
        if m == "ks-table":
            out.extend((f"ks-table-{g:g}dB", g) for g in cfg.table_granularities_db)
        else:
            out.append((m, None))
    return tuple(out)


def _quantized_table(granularity_db: float, snr_db_values) -> QuantizedCdfTable:
    """Table whose rows are the multiples of the granularity covering the range."""
    lo = min(snr_db_values)
    hi = max(snr_db_values)
    start = granularity_db * math.floor(lo / granularity_db)
    stop = granularity_db * math.ceil(hi / granularity_db)
    n = int(round((stop - start) / granularity_db)) + 1
    grid = np.linspace(start, stop, n) if n > 1 else np.array([start])
    return build_cdf_table(CANDIDATES, grid, granularity_db)


def _decide(method_label, delta, tables, samples, assumed_snr_db):
    """Hard decisions (candidate indices) of one method on a trial batch."""
    if delta is not None:
        return decide_ks_table_rows(samples, assumed_snr_db, tables[delta], CANDIDATES)
    if method_label == "ks":
        sigma = math.sqrt(snr_db_to_sigma_sq(assumed_snr_db))
        return decide_ks_exact_rows(samples, sigma, CANDIDATES)
    if method_label == "cumulant":
        return decide_cumulant_rows(samples, snr_db_to_sigma_sq(assumed_snr_db), CANDIDATES)
    raise ConfigError(f"unknown method {method_label!r}")


def _run_points(worker_fn, points, workers: int):
    """Map a pure point function over sweep points, optionally in processes."""
    if workers <= 1 or len(points) <= 1:
        return [worker_fn(p) for p in points]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker_fn, points))


@dataclass(frozen=True)
class _PccPoint:
    cfg: ExperimentConfig
    experiment: str
    variable: float
    true_snr_db: float
    assumed_snr_db: float
    n_samples: int

    def __call__(self) -> list[ResultRow]:
        cfg = self.cfg
        true_idx, samples = _draw_trials(cfg.seed, self.true_snr_db, self.n_samples, cfg.trials)
        methods = _expand_methods(cfg)
        deltas = sorted({d for _, d in methods if d is not None})
        tables = {d: _quantized_table(d, [self.assumed_snr_db]) for d in deltas}
        rows = []
        for label, delta in methods:
            decided = _decide(label, delta, tables, samples, self.assumed_snr_db)
            pcc = float(np.mean(decided == true_idx))
            rows.append(ResultRow(self.experiment, label, self.variable, pcc,
                                  "pcc", cfg.trials, cfg.seed))
        return rows


def _call_point(point):
    return point()


def run_pcc_vs_snr(cfg: ExperimentConfig) -> list[ResultRow]:
    """Correct-classification rate per (method, SNR); true format uniform."""
    _validate_common(cfg)
    if not cfg.snr_grid_db:
        raise ConfigError("snr_grid_db must be nonempty")
    points = [
        _PccPoint(cfg, "pcc-vs-snr", snr, snr, snr, cfg.n_samples)
        for snr in cfg.snr_grid_db
    ]
    return [row for rows in _run_points(_call_point, points, cfg.workers) for row in rows]


def run_pcc_vs_offset(cfg: ExperimentConfig) -> list[ResultRow]:
    """Classification rate when the classifier assumes true SNR + offset."""
    _validate_common(cfg)
    if not cfg.offset_grid_db:
        raise ConfigError("offset_grid_db must be nonempty")
    points = [
        _PccPoint(cfg, "pcc-vs-offset", off, cfg.offset_snr_db,
                  cfg.offset_snr_db + off, cfg.n_samples)
        for off in cfg.offset_grid_db
    ]
    return [row for rows in _run_points(_call_point, points, cfg.workers) for row in rows]


def run_pcc_vs_samples(cfg: ExperimentConfig) -> list[ResultRow]:
    """Classification rate per (method, sample count) at a fixed SNR."""
    _validate_common(cfg)
    if not cfg.sample_size_grid:
        raise ConfigError("sample_size_grid must be nonempty")
    if any(n < 1 for n in cfg.sample_size_grid):
        raise ConfigError("sample sizes must be >= 1")
    points = [
        _PccPoint(cfg, "pcc-vs-samples", float(n), cfg.samples_snr_db,
                  cfg.samples_snr_db, n)
        for n in cfg.sample_size_grid
    ]
    return [row for rows in _run_points(_call_point, points, cfg.workers) for row in rows]


@dataclass(frozen=True)
class _BerPoint:
    cfg: ExperimentConfig
    snr_db: float

    def __call__(self) -> list[ResultRow]:
        cfg = self.cfg
        desired = ModulationFormat.from_name(cfg.sdma_desired_format)
        errors = {mode: 0 for mode in cfg.sdma_modes}
        bits = {mode: 0 for mode in cfg.sdma_modes}
        for f in range(cfg.sdma_frames):
            fmt_rng = derive_rng(cfg.seed, "sdma-interferer", _mdb(self.snr_db), f)
            interferer = CANDIDATES[int(fmt_rng.integers(len(CANDIDATES)))]
            for mode in cfg.sdma_modes:
                frame_cfg = SdmaFrameConfig(
                    num_subcarriers=cfg.sdma_num_subcarriers,
                    num_words=cfg.sdma_words_per_frame,
                    desired_format=desired,
                    interferer_format=interferer,
                    snr_db=self.snr_db,
                    mode=mode,
                    group_size=cfg.sdma_group_size,
                    interferer_power=cfg.sdma_interferer_power,
                )
                # identical substream per mode: all modes process the same frame
                report = run_sdma_frame(
                    frame_cfg, derive_rng(cfg.seed, "sdma-frame", _mdb(self.snr_db), f)
                )
                errors[mode] += report.desired_bit_errors
                bits[mode] += report.desired_bits_total
        return [
            ResultRow("ber-sweep", mode, self.snr_db, errors[mode] / bits[mode],
                      "ber", cfg.sdma_frames, cfg.seed)
            for mode in cfg.sdma_modes
        ]


def run_ber_sweep(cfg: ExperimentConfig) -> list[ResultRow]:
    """Desired-user BER per (receiver mode, SNR); interferer format drawn per frame."""
    _validate_common(cfg)
    _validate_sdma(cfg)
    points = [_BerPoint(cfg, snr) for snr in cfg.snr_grid_db]
    return [row for rows in _run_points(_call_point, points, cfg.workers) for row in rows]


def write_csv(rows, destination=None) -> bytes:
    """Render rows as CSV bytes, sorted by (experiment, method, variable).

    ``destination`` may be a path or binary file object; the encoded bytes
    are returned either way, and identical inputs yield identical bytes.
    """
    ordered = sorted(rows, key=lambda r: (r.experiment, r.method, r.variable))
    lines = [CSV_HEADER]
    for r in ordered:
        lines.append(
            f"{r.experiment},{r.method},{r.variable:g},{r.value!r},{r.metric},{r.trials},{r.seed}"
        )
    data = ("\n".join(lines) + "\n").encode("ascii")
    if destination is not None:
        if hasattr(destination, "write"):
            destination.write(data)
        else:
            with open(destination, "wb") as fh:
                fh.write(data)
    return data
