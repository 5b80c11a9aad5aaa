"""Command-line experiment runner.

Usage::

    carnot-spectra <suite> --config <path> [--out <dir>] [--seed <u64>]

The suite writes ``<out>/<suite>.json`` (schema ``{suite, config, version,
assertions, timing_ms}``) and one CSV file per detail table,
``<out>/<suite>.<table>.csv``.  Exit status: 0 when every assertion holds,
1 when one fails (the first failing assertion is named on stderr), 2 for
configuration or hypothesis errors, 3 when a spectral multiplier or a
Fourier truncation could not be resolved.

``CARNOT_SPECTRA_THREADS`` caps the number of worker threads used inside
the numerical kernels.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__
from .config import ConfigError, load_config
from .fourier import TruncationError
from .hgrd import HGRDError, export_grid, import_grid  # noqa: F401
from .littlewood_paley import UnresolvedMultiplierError
from .paraproduct import HypothesisError
from .suites import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_UNRESOLVED = 0, 1, 2, 3


def _limit_threads():
    """Cap BLAS pools at ``CARNOT_SPECTRA_THREADS`` before numpy loads them."""
    n = os.environ.get("CARNOT_SPECTRA_THREADS")
    if n and n.isdigit() and int(n) > 0:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


def summary_json(cfg, result, timing_ms: int) -> str:
    doc = {"suite": cfg.suite, "config": cfg.resolved(),
           "version": __version__,
           "assertions": [a.to_json() for a in result.assertions],
           "timing_ms": timing_ms}
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def write_reports(out_dir: str, cfg, result, timing_ms: int) -> list:
    """Write the JSON summary, CSV tables and optional HGRD exports."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    path = os.path.join(out_dir, f"{cfg.suite}.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(summary_json(cfg, result, timing_ms))
    written.append(path)
    for name, table in result.tables.items():
        path = os.path.join(out_dir, f"{cfg.suite}.{name}.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(table.to_csv())
        written.append(path)
    for name, f in result.exports:
        path = os.path.join(out_dir, f"{cfg.suite}.{name}.hgrd")
        export_grid(f, path)
        written.append(path)
    return written


def run(suite: str, config_path: str, out: str | None = None,
        seed: int | None = None, stream=sys.stderr) -> int:
    """Run one suite and return the exit status."""
    try:
        cfg = load_config(config_path, suite=suite, seed=seed)
    except (ConfigError, HypothesisError) as exc:
        print(f"configuration error: {exc}", file=stream)
        return EXIT_CONFIG
    out_dir = out if out is not None else os.path.join(cfg.base_dir,
                                                       cfg.out_dir)
    t0 = time.perf_counter()
    try:
        result = run_suite(cfg)
    except (UnresolvedMultiplierError, TruncationError) as exc:
        print(f"unresolved: {exc}", file=stream)
        return EXIT_UNRESOLVED
    except (HypothesisError, HGRDError, ValueError) as exc:
        print(f"configuration error: {exc}", file=stream)
        return EXIT_CONFIG
    timing_ms = int(round(1000 * (time.perf_counter() - t0)))
    write_reports(out_dir, cfg, result, timing_ms)
    for a in result.assertions:
        print(f"{'PASS' if a.passed else 'FAIL'} {a.name}: {a.value!r} "
              f"(bound {a.bound!r})", file=stream)
    bad = result.first_failure()
    if bad is not None:
        print(f"assertion failed: {bad.name} (value {bad.value!r}, bound "
              f"{bad.bound!r})", file=stream)
        return EXIT_FAIL
    return EXIT_OK


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit "
                                         "integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="carnot-spectra",
        description="Run a Littlewood-Paley / Besov experiment suite.")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--config", required=True, help="key=value config file")
    p.add_argument("--out", default=None,
                   help="report directory (default: output.dir of the "
                        "config, relative to the config file)")
    p.add_argument("--seed", type=_seed, default=None,
                   help="override the configured seed")
    p.add_argument("--version", action="version",
                   version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    _limit_threads()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    return run(args.suite, args.config, args.out, args.seed)


if __name__ == "__main__":
    sys.exit(main())
