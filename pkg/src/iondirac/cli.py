"""Command line runner: ``iondirac <experiment> [--config PATH] [--set section.key=value ...] [--out DIR]``.

Exit codes: 0 success, 2 invalid config or unwritable output, 3 numerical
health failure (conservation drift, Fock truncation leak), 1 anything else.
Failures print a JSON error report to stderr and, when possible, write it to
``error.json`` in the output directory.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import traceback
from pathlib import Path

from . import serialize
from .config import EXPERIMENTS, OUTPUT_ENV, ConfigError, load_config, resolve_output_dir
from .experiments import HealthError, run_experiment
from .fock import TruncationError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_HEALTH = 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="iondirac", description="Run Dirac-equation trapped-ion simulations.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, help="INI file layered over the defaults")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override one config value (repeatable)")
        p.add_argument("--out", type=Path, help=f"output directory (default: ${OUTPUT_ENV}/<experiment>)")
    return ap


def _fail(code: int, kind: str, exc: BaseException, out_dir: Path | None) -> int:
    report = {"status": "error", "exit_code": code, "kind": kind, "message": str(exc)}
    if code == EXIT_ERROR:
        report["traceback"] = traceback.format_exc()
    if out_dir is not None:
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            serialize.write_json(out_dir / "error.json", report)
        except OSError:
            pass
    print(json.dumps(report), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    out_dir = args.out
    try:
        cfg = load_config(args.experiment, args.config, args.overrides)
        out_dir = resolve_output_dir(cfg, args.out)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"output directory {out_dir} is not writable: {exc}") from exc
        report = run_experiment(cfg, out_dir)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", exc, out_dir)
    except (HealthError, TruncationError) as exc:
        return _fail(EXIT_HEALTH, "health", exc, out_dir)
    except Exception as exc:  # noqa: BLE001
        return _fail(EXIT_ERROR, type(exc).__name__, exc, out_dir)
    print(json.dumps({"status": "ok", "out": str(out_dir), "files": report["files"]}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
