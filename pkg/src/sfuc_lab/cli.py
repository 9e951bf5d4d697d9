"""Command line entry point ``sfuc-lab``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .config import load_config
from .errors import LabError
from .parallel import WORKERS_ENV
from .runner import EXIT_ERROR, EXIT_FAIL, EXIT_OK, emit_plotdata, execute, save
from .selftest import run_selftest


def _parser():
    p = argparse.ArgumentParser(prog="sfuc-lab", description="Numerical laboratory for "
                                "scale-free unique continuation and its consequences.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiment described by a config file")
    r.add_argument("config")
    r.add_argument("--output", help="report directory (overrides the config)")
    r.add_argument("--workers", type=int, help=f"worker count (also {WORKERS_ENV})")
    pl = sub.add_parser("plot", help="emit two-column CSV of a named report series")
    pl.add_argument("report")
    pl.add_argument("series")
    pl.add_argument("--out", help="write to this file instead of stdout")
    sub.add_parser("selftest", help="run the built-in quick checks")
    return p


def _run(args) -> int:
    cfg = load_config(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    elif os.environ.get(WORKERS_ENV):
        cfg.workers = int(os.environ[WORKERS_ENV])
    out = Path(args.output) if args.output else cfg.output_dir
    env = execute(cfg)
    save(env, out)
    for name, ok in env.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"report: {out / 'report.json'}")
    if env.passed:
        return EXIT_OK
    print("error: one or more checks failed", file=sys.stderr)
    return EXIT_FAIL


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            return _run(args)
        if args.command == "plot":
            text = emit_plotdata(args.report, args.series)
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
            return EXIT_OK
        return EXIT_OK if run_selftest() else EXIT_FAIL
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except LabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
