"""Command-line entry point.

Subcommands
    figure <id>   reproduce one canonical figure: CSV + PNG + manifest
    table <id>    reproduce one canonical table: CSV + manifest
    sweep         run a custom sweep described by a key=value config file
    validate      run the full invariant suite, print PASS/FAIL per check

Sweep config files are plain ``key = value`` lines ('#' comments allowed).
Scenario keys mirror SystemConfig: encoding, K, N_t, N_r, L, S, I_0, N_0
(or snr_db for the S=I_0=1 convention), mixed_m, trials, seed. Sweep keys:
metric (top | mean_sum_capacity | outage_capacity_vs_L | scaling_exponent),
axis (beta_db | snr_db | L | K), grid (comma-separated values), target_top,
mode (lb_sinr | true_sinr).

All dB/linear conversion happens here; the library works in linear units.
Every run writes a JSON manifest (resolved parameters, seed, versions)
next to its outputs so results can be audited and reproduced byte for
byte.

Exit codes: 0 success, 1 validation failures, 2 unknown figure/table id,
3 bad configuration, 4 computation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from . import __version__
from .config import SystemConfig, parse_kv_file
from .errors import BracketingError, ConfigError, SiasimError
from .experiments import SweepSpec, emit_records, run_sweep
from .figures import FIGURE_IDS, TABLE_IDS, build_figure, build_table, coefficient_rows

EXIT_OK = 0
EXIT_VALIDATE_FAILED = 1
EXIT_UNKNOWN_ID = 2
EXIT_BAD_CONFIG = 3
EXIT_COMPUTE_FAILED = 4


def _fail(code: int, kind: str, message: str) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def _write_manifest(out_dir: Path, name: str, payload: dict) -> None:
    import numpy
    import scipy

    payload = dict(payload)
    payload["siasim_version"] = __version__
    payload["numpy_version"] = numpy.__version__
    payload["scipy_version"] = scipy.__version__
    with open(out_dir / f"{name}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_figure(args) -> int:
    if args.id not in FIGURE_IDS:
        return _fail(EXIT_UNKNOWN_ID, "unknown-figure",
                     f"figure id {args.id!r}; known: {', '.join(FIGURE_IDS)}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        records = build_figure(args.id, seed=args.seed if args.seed is not None else 0,
                               trials=args.trials, threads=args.threads)
    except SiasimError as exc:
        return _fail(EXIT_COMPUTE_FAILED, "computation", str(exc))
    csv_path = out / f"{args.id}.csv"
    emit_records(records, csv_path)
    png_path = out / f"{args.id}.png"
    if not args.no_plot:
        from .plotting import render_figure

        render_figure(args.id, records, png_path)
    _write_manifest(out, args.id, {
        "command": "figure", "id": args.id,
        "seed": args.seed if args.seed is not None else 0,
        "trials": args.trials, "threads": args.threads,
        "outputs": [csv_path.name] + ([] if args.no_plot else [png_path.name]),
        "rows": len(records), "wall_time_s": round(time.perf_counter() - t0, 3),
    })
    print(f"wrote {csv_path}" + ("" if args.no_plot else f" and {png_path}"))
    return EXIT_OK


def _cmd_table(args) -> int:
    if args.id not in TABLE_IDS:
        return _fail(EXIT_UNKNOWN_ID, "unknown-table",
                     f"table id {args.id!r}; known: {', '.join(TABLE_IDS)}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    csv_path = out / f"{args.id}.csv"
    if args.id == "coeffs":
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["ensemble", "m", "n", "k0", "coefficients"])
            for ensemble, m, n, k0, coeffs in coefficient_rows():
                writer.writerow([ensemble, m, n, k0, " ".join(coeffs)])
        rows = len(coefficient_rows())
    else:
        try:
            records = build_table(args.id, seed=args.seed if args.seed is not None else 0,
                                  trials=args.trials, threads=args.threads)
        except SiasimError as exc:
            return _fail(EXIT_COMPUTE_FAILED, "computation", str(exc))
        emit_records(records, csv_path)
        rows = len(records)
    _write_manifest(out, args.id, {
        "command": "table", "id": args.id,
        "seed": args.seed if args.seed is not None else 0, "trials": args.trials,
        "threads": args.threads, "outputs": [csv_path.name], "rows": rows,
        "wall_time_s": round(time.perf_counter() - t0, 3),
    })
    print(f"wrote {csv_path}")
    return EXIT_OK


_SWEEP_KEYS = ("metric", "axis", "grid", "encoding", "K", "N_t", "N_r", "L", "S",
               "I_0", "N_0", "snr_db", "target_top", "trials", "seed", "mode",
               "mixed_m")


def _sweep_spec_from_file(path, seed_override, trials_override) -> SweepSpec:
    raw = parse_kv_file(path)
    unknown = set(raw) - set(_SWEEP_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for required in ("metric", "axis", "grid"):
        if required not in raw:
            raise ConfigError(f"config missing required key {required!r}")
    grid = tuple(float(v) for v in str(raw.pop("grid")).split(","))
    metric = raw.pop("metric")
    axis = raw.pop("axis")
    target_top = raw.pop("target_top", None)
    mode = raw.pop("mode", "lb_sinr")
    snr_db = raw.pop("snr_db", None)
    if seed_override is not None:
        raw["seed"] = seed_override
    if trials_override is not None:
        raw["trials"] = trials_override
    if snr_db is not None:
        base = SystemConfig.at_snr_db(snr_db, **raw)
    else:
        base = SystemConfig(**raw)
    return SweepSpec(base=base, metric=metric, axis=axis, grid=grid,
                     target_top=target_top, mode=mode)


def _cmd_sweep(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        spec = _sweep_spec_from_file(args.config, args.seed, args.trials)
    except (ConfigError, TypeError) as exc:
        return _fail(EXIT_BAD_CONFIG, "config", str(exc))
    try:
        records = run_sweep(spec, threads=args.threads)
    except BracketingError as exc:
        return _fail(EXIT_COMPUTE_FAILED, "solver", str(exc))
    except SiasimError as exc:
        return _fail(EXIT_COMPUTE_FAILED, "computation", str(exc))
    name = args.name or "sweep"
    csv_path = out / f"{name}.csv"
    emit_records(records, csv_path)
    _write_manifest(out, name, {
        "command": "sweep", "config": str(args.config), "metric": spec.metric,
        "axis": spec.axis, "grid": list(spec.grid),
        "base": {f: getattr(spec.base, f) for f in (
            "K", "N_t", "N_r", "L", "S", "I_0", "N_0", "encoding", "mixed_m",
            "trials", "seed")},
        "outputs": [csv_path.name], "rows": len(records),
        "wall_time_s": round(time.perf_counter() - t0, 3),
    })
    print(f"wrote {csv_path}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .validate import run_all

    failures = run_all(verbose=True)
    if failures:
        print(f"{failures} check(s) failed")
        return EXIT_VALIDATE_FAILED
    print("all checks passed")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="siasim",
        description="Link-level simulator and closed-form engine for "
                    "opportunistically scheduled interference channels",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_config=False):
        p.add_argument("--out", default="out", help="output directory (default: ./out)")
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed (default 0; for sweeps, the config file value)")
        p.add_argument("--trials", type=int, default=None,
                       help="Monte Carlo trials override")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: min(8, cpu count))")
        if with_config:
            p.add_argument("--config", required=True,
                           help="key = value sweep description file")

    p_fig = sub.add_parser("figure", help="reproduce a canonical figure")
    p_fig.add_argument("id", help=f"one of: {', '.join(FIGURE_IDS)}")
    common(p_fig)
    p_fig.add_argument("--no-plot", action="store_true",
                       help="write CSV only, skip PNG rendering")
    p_fig.set_defaults(fn=_cmd_figure)

    p_tab = sub.add_parser("table", help="reproduce a canonical table")
    p_tab.add_argument("id", help=f"one of: {', '.join(TABLE_IDS)}")
    common(p_tab)
    p_tab.set_defaults(fn=_cmd_table)

    p_sweep = sub.add_parser("sweep", help="run a custom sweep from a config file")
    common(p_sweep, with_config=True)
    p_sweep.add_argument("--name", default=None, help="output base name (default: sweep)")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_val = sub.add_parser("validate", help="run the invariant suite")
    p_val.add_argument("--seed", type=int, default=0)
    p_val.set_defaults(fn=_cmd_validate)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        return _fail(EXIT_BAD_CONFIG, "config", str(exc))
    except OSError as exc:
        return _fail(EXIT_BAD_CONFIG, "io", str(exc))


if __name__ == "__main__":
    sys.exit(main())
