"""Command-line entry point.

    torusmix run <config.toml> [--out DIR] [--threads N] [--seed N]
    torusmix render <field.csv> --style indicator|heatmap [--format ppm|svg] [--out FILE]

Exit codes: 0 every verdict holds or is vacuous, 1 a certified inequality is
violated, 2 config or usage error, 3 numerical or I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from . import kernels
from .config import load_config
from .errors import ConfigError, DomainError, IntegrationError, PrecisionError
from .geometry import read_field_csv
from .render import render
from .runner import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, Run

OUT_ENV = "TORUSMIX_OUT_DIR"


def _error(msg):
    print(f"torusmix: error: {msg}", file=sys.stderr)


def cmd_run(args):
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        _error(exc)
        return EXIT_CONFIG
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if args.out:
        out = Path(args.out)
    elif config.out:
        out = Path(config.out)
    else:
        out = Path(os.environ.get(OUT_ENV, "reports")) / config.name
    kernels.set_threads(args.threads)
    try:
        code = Run(config, out).execute()
    except ConfigError as exc:
        _error(exc)
        return EXIT_CONFIG
    except (IntegrationError, PrecisionError, DomainError, FloatingPointError, OSError) as exc:
        _error(f"numerical failure: {exc}")
        return EXIT_NUMERIC
    status = "ok" if code == EXIT_OK else "VIOLATION"
    print(f"{config.name}: {status} -> {out}")
    return code


def cmd_render(args):
    try:
        fld = read_field_csv(args.field, indicator=args.style == "indicator")
    except (OSError, DomainError) as exc:
        _error(exc)
        return EXIT_NUMERIC
    fmt = args.format or ("svg" if args.out and args.out.endswith(".svg") else "ppm")
    out = args.out or str(Path(args.field).with_suffix("." + fmt))
    try:
        render(fld, args.style, out, fmt)
    except OSError as exc:
        _error(exc)
        return EXIT_NUMERIC
    print(out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="torusmix",
        description="Mixing scales and energy lower bounds for maps and flows on the 2-torus.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the analyses of a TOML config")
    run.add_argument("config")
    run.add_argument("--out", help=f"output directory (default: ${OUT_ENV}/<name> or reports/<name>)")
    run.add_argument("--threads", type=int, default=0, help="worker threads (default: all cores)")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.set_defaults(func=cmd_run)

    rnd = sub.add_parser("render", help="render a field CSV as PPM or SVG")
    rnd.add_argument("field")
    rnd.add_argument("--style", choices=("indicator", "heatmap"), required=True)
    rnd.add_argument("--format", choices=("ppm", "svg"))
    rnd.add_argument("--out")
    rnd.set_defaults(func=cmd_render)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
