"""Command-line interface.

Subcommands: ``pcc-vs-snr``, ``pcc-vs-offset``, ``pcc-vs-samples``,
``ber-sweep`` (Monte Carlo sweeps writing CSV), ``build-table`` (write a
quantized CDF table file), ``classify`` (classify one IQ capture).  Every
config-file key is also a flag (underscores become dashes) and flags win.

Exit codes: 0 success, 1 configuration/validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import fields, replace

import numpy as np

from .cdf_model import TableError, build_cdf_table, load_table, save_table
from .channel import snr_db_to_sigma_sq
from .classifiers import classify_cumulant, classify_ks_exact, classify_ks_table
from .constellation import ModulationFormat
from .experiments import (
    ConfigError,
    ExperimentConfig,
    load_config,
    parse_config_value,
    run_ber_sweep,
    run_pcc_vs_offset,
    run_pcc_vs_samples,
    run_pcc_vs_snr,
    write_csv,
)

_EXPERIMENT_RUNNERS = {
    "pcc-vs-snr": run_pcc_vs_snr,
    "pcc-vs-offset": run_pcc_vs_offset,
    "pcc-vs-samples": run_pcc_vs_samples,
    "ber-sweep": run_ber_sweep,
}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    for f in fields(ExperimentConfig):
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, dest=f.name, default=None, metavar="V",
                            help=f"override config key {f.name}")


def _merge_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    for f in fields(ExperimentConfig):
        raw = getattr(args, f.name, None)
        if raw is not None:
            overrides[f.name] = parse_config_value(f.name, str(raw))
    return replace(cfg, **overrides)


def _parse_formats(raw: str) -> tuple[ModulationFormat, ...]:
    names = [v.strip() for v in raw.split(",") if v.strip()]
    if not names:
        raise ConfigError("candidate/format list must be nonempty")
    return tuple(ModulationFormat.from_name(n) for n in names)


def _cmd_experiment(name: str, args: argparse.Namespace) -> int:
    cfg = _merge_config(args)
    rows = _EXPERIMENT_RUNNERS[name](cfg)
    data = write_csv(rows, args.out)
    if args.out is None:
        sys.stdout.write(data.decode("ascii"))
    return 0


def _cmd_build_table(args: argparse.Namespace) -> int:
    try:
        start_s, step_s, stop_s = args.snr_db.split(":")
        start, step, stop = float(start_s), float(step_s), float(stop_s)
    except ValueError:
        raise ConfigError(f"--snr-db must be start:step:stop, got {args.snr_db!r}") from None
    if step <= 0 or stop < start:
        raise ConfigError(f"bad SNR grid {args.snr_db!r}")
    n = int(round((stop - start) / step)) + 1
    grid = np.linspace(start, stop, n)
    table = build_cdf_table(_parse_formats(args.formats), grid, step)
    save_table(table, args.out)
    return 0


def _read_iq_file(path: str) -> np.ndarray:
    """Load complex samples: '.csv' of re,im rows, else interleaved float64."""
    if path.endswith(".csv"):
        data = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
        if data.ndim != 2 or data.shape[1] != 2:
            raise ConfigError(f"{path}: expected two columns re,im")
        return data[:, 0] + 1j * data[:, 1]
    raw = np.fromfile(path, dtype="<f8")
    if raw.size == 0 or raw.size % 2:
        raise ConfigError(f"{path}: expected interleaved re,im float64 pairs")
    return raw[0::2] + 1j * raw[1::2]


def _cmd_classify(args: argparse.Namespace) -> int:
    candidates = _parse_formats(args.candidates)
    if not os.path.exists(args.input):
        raise ConfigError(f"input file {args.input!r} does not exist")
    samples = _read_iq_file(args.input)
    if args.method == "ks":
        result = classify_ks_exact(samples, math.sqrt(snr_db_to_sigma_sq(args.snr_db)),
                                   candidates)
    elif args.method == "ks-table":
        if not args.table:
            raise ConfigError("--method ks-table requires --table")
        if not os.path.exists(args.table):
            raise ConfigError(f"table file {args.table!r} does not exist")
        result = classify_ks_table(samples, args.snr_db, load_table(args.table), candidates)
    elif args.method == "cumulant":
        decided = classify_cumulant(samples, snr_db_to_sigma_sq(args.snr_db), candidates)
        nan = float("nan")
        lines = ["candidate,d_hat,alpha_hat,q,decided"]
        for k in sorted(candidates, key=lambda f: f.order):
            lines.append(f"{k.name},{nan!r},{nan!r},{nan!r},{int(k == decided)}")
        sys.stdout.write("\n".join(lines) + "\n")
        return 0
    else:
        raise ConfigError(f"unknown method {args.method!r}")
    lines = ["candidate,d_hat,alpha_hat,q,decided"]
    for k in sorted(result.d_hat, key=lambda f: f.order):
        lines.append(
            f"{k.name},{result.d_hat[k]!r},{result.alpha_hat[k]!r},"
            f"{result.soft[k]!r},{int(k == result.decided)}"
        )
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ksamc",
        description="K-S modulation classification experiments and tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in _EXPERIMENT_RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} sweep and write CSV")
        _add_config_flags(p)
        p.add_argument("--out", help="output CSV path (default: stdout)")

    p = sub.add_parser("build-table", help="write a quantized CDF table file")
    p.add_argument("--out", required=True, help="table file path")
    p.add_argument("--formats", default="QAM4,QAM16,QAM64",
                   help="comma-separated formats to store")
    p.add_argument("--snr-db", default="0:1:30",
                   help="SNR grid as start:step:stop in dB (step = granularity)")

    p = sub.add_parser("classify", help="classify an IQ capture file")
    p.add_argument("--input", required=True,
                   help="IQ file: interleaved float64 re,im; '.csv' for re,im rows")
    p.add_argument("--method", default="ks", choices=["ks", "ks-table", "cumulant"])
    p.add_argument("--snr-db", type=float, required=True,
                   help="assumed SNR in dB (1/sigma^2)")
    p.add_argument("--table", help="quantized CDF table file (for --method ks-table)")
    p.add_argument("--candidates", default="QAM4,QAM16,QAM64",
                   help="comma-separated candidate formats")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in _EXPERIMENT_RUNNERS:
            return _cmd_experiment(args.command, args)
        if args.command == "build-table":
            return _cmd_build_table(args)
        return _cmd_classify(args)
    except (ConfigError, TableError, ValueError) as exc:
        print(f"ksamc: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ksamc: i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
