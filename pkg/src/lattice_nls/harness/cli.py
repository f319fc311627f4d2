"""Command-line entry point.

Subcommands: ``converge``, ``single``, ``acl``, ``bilinear``, ``nonres`` and
``norms``.  Exit codes: 0 success, 2 configuration error, 3 numerical abort,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..diagnostics import NormSpec, spacetime_norm
from ..lattice import NumericalAbort
from ..spectral import SamplingError
from .config import ConfigError, load_config
from .io import HarnessIOError, fmt_float
from .study import (
    acl_rows,
    bilinear_rows,
    emit_report,
    emit_table,
    load_run,
    nonresonance_rows,
    run_convergence_study,
    run_single,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

# config fields exposed as flags: (flag, key)
_CONFIG_FLAGS = [
    ("--T", "T"),
    ("--gamma", "gamma"),
    ("--sign", "sign"),
    ("--torus-length", "torus_length"),
    ("--m-ref", "m_ref"),
    ("--dt", "dt"),
    ("--dt-ref", "dt_ref"),
    ("--snapshot-count", "snapshot_count"),
    ("--seed", "seed"),
    ("--psi", "psi"),
    ("--phi", "phi"),
    ("--output-dir", "output_dir"),
    ("--h0", "h0"),
]


def _add_config_args(p: argparse.ArgumentParser, h_list: bool = True) -> None:
    p.add_argument("--config", help="key = value config file")
    if h_list:
        p.add_argument("--h-list", nargs="+", help="lattice spacings, decreasing")
    for flag, key in _CONFIG_FLAGS:
        p.add_argument(flag, dest=key, default=None)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="report path (default: inside output_dir)")


def _config(args):
    overrides = {key: getattr(args, key) for _, key in _CONFIG_FLAGS}
    if getattr(args, "h_list", None):
        overrides["h_list"] = ",".join(args.h_list)
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip().replace("-", "_")] = value.strip()
    return load_config(args.config, overrides)


def _report_path(args, cfg, stem: str) -> Path:
    if args.out:
        return Path(args.out)
    return Path(cfg.output_dir) / f"{stem}.{args.format}"


def _cmd_converge(args) -> int:
    cfg = _config(args)
    report = run_convergence_study(cfg, jobs=args.jobs)
    path = emit_report(report, args.format, _report_path(args, cfg, "convergence"))
    print(path)
    return EXIT_OK


def _cmd_single(args) -> int:
    cfg = _config(args)
    print(run_single(cfg, args.h))
    return EXIT_OK


def _cmd_acl(args) -> int:
    cfg = _config(args)
    kappas = [float(k) for k in args.kappas.split(",")] if args.kappas else None
    h = args.h if args.h is not None else cfg.h_list[-1]
    rows, curve = acl_rows(cfg, h, kappas)
    meta = {"h": h, "fitted_exponent": curve.fitted_exponent, "floor": curve.floor, "mass0": curve.mass0,
            "config_hash": cfg.config_hash()}
    print(emit_table(["kappa", "drift", "measurable"], rows, meta, args.format, _report_path(args, cfg, "acl")))
    print(f"fitted exponent: {fmt_float(curve.fitted_exponent)}")
    return EXIT_OK


def _cmd_nonres(args) -> int:
    cfg = _config(args)
    rows = nonresonance_rows(cfg, jobs=args.jobs)
    cols = ["h", "psi_mixed", "phi_mixed", "psi_mixed_control", "phi_mixed_control"]
    meta = {"config_hash": cfg.config_hash()}
    print(emit_table(cols, rows, meta, args.format, _report_path(args, cfg, "nonres")))
    return EXIT_OK


def _cmd_bilinear(args) -> int:
    L_list = [float(v) for v in args.L_list.split(",")]
    try:
        rows, sweep = bilinear_rows(args.K, L_list, args.trials, args.seed, args.window, args.m)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    meta = {"slope": sweep.slope, "window": args.window, "trials": args.trials, "seed": args.seed, "m": args.m}
    out = Path(args.out) if args.out else Path(f"bilinear.{args.format}")
    print(emit_table(["K", "L", "median_lhs", "median_ratio", "max_ratio"], rows, meta, args.format, out))
    print(f"fitted slope: {fmt_float(sweep.slope)}")
    return EXIT_OK


def _cmd_norms(args) -> int:
    _, _, series = load_run(args.run)
    try:
        spec = NormSpec(float(args.q), float(args.p))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(fmt_float(spacetime_norm(series, spec)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lattice-nls", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("converge", help="lattice-vs-continuum error sweep over h")
    _add_config_args(p)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("single", help="all diagnostics for one h, written to a run directory")
    _add_config_args(p, h_list=False)
    p.add_argument("--h", type=float, required=True)
    p.set_defaults(func=_cmd_single)

    p = sub.add_parser("acl", help="truncated-mass drift against kappa")
    _add_config_args(p, h_list=False)
    p.add_argument("--kappas", help="comma-separated powers of two")
    p.add_argument("--h", type=float, default=None)
    p.set_defaults(func=_cmd_acl)

    p = sub.add_parser("bilinear", help="bilinear estimate ratios for annular random data")
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--L-list", required=True, help="comma-separated scales")
    p.add_argument("--trials", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window", type=float, default=50.0)
    p.add_argument("--m", type=int, default=4096)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bilinear)

    p = sub.add_parser("nonres", help="mixed cubic-term integrals over h")
    _add_config_args(p)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_nonres)

    p = sub.add_parser("norms", help="space-time norm of a stored run")
    p.add_argument("--run", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--p", required=True)
    p.set_defaults(func=_cmd_norms)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SamplingError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (HarnessIOError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
