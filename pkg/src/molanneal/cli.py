"""Command-line entry point.

    molanneal <subcommand> [--config FILE] [--out DIR] [--threads N] [--seedless] [--opt-in-3x3]

Subcommands: spectrum, couplings, scan, anneal, scale, stack3d. The output
directory is taken from --out, else $MOLANNEAL_OUT, else the config file.
Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 size ceiling exceeded. Failures print one JSON record on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from threadpoolctl import threadpool_limits

from molanneal.config import ConfigError, parse_config, parse_text, resolve_fields
from molanneal.coupling import WindowError
from molanneal.dynamics import AmbiguousSignError, NormDriftError
from molanneal.experiments import SizeCeilingError
from molanneal.molecule import LabelingError, NoMinimumError, TrackingError

OUT_ENV = "MOLANNEAL_OUT"
SUBCOMMANDS = ("spectrum", "couplings", "scan", "anneal", "scale", "stack3d")
# experiment names accepted by each subcommand
ACCEPTS = {
    "spectrum": {"spectrum"},
    "couplings": {"couplings"},
    "scan": {"scan"},
    "anneal": {"anneal", "two_qubit"},
    "scale": {"scale"},
    "stack3d": {"stack3d"},
}
NEEDS_FIELDS = {"anneal", "stack3d"}

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_SIZE = 0, 2, 3, 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="molanneal", description="Annealing with pairs of 2-Sigma molecules as qubits.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="JSON run configuration")
        s.add_argument("--out", type=Path, help=f"output directory (overrides ${OUT_ENV} and the config)")
        s.add_argument("--threads", type=int, default=None, help="BLAS thread limit")
        s.add_argument("--seedless", action="store_true",
                       help="no-op: every computation is deterministic and no RNG is used")
        s.add_argument("--opt-in-3x3", action="store_true", help="allow sectors up to C(18, 9) = 48620 states")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def _error(kind: str, exc: BaseException, code: int, **extra) -> int:
    record = {"error": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}
    record.update({k: v for k, v in extra.items() if v is not None})
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return code


def load(command: str, path: Path | None):
    default = "two_qubit" if command == "anneal" else command
    cfg = parse_text("{}", default_experiment=default) if path is None else parse_config(path, resolve=False,
                                                                                           default_experiment=default)
    if cfg.experiment not in ACCEPTS[command]:
        raise ConfigError(f"config experiment {cfg.experiment!r} does not match subcommand {command!r}", "experiment")
    if command in NEEDS_FIELDS:
        resolve_fields(cfg)
    return cfg


def output_dir(args, cfg) -> Path:
    if args.out is not None:
        return args.out
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    return Path(cfg.output_dir)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.threads is not None and args.threads < 1:
        return _error("config", ValueError("--threads must be >= 1"), EXIT_CONFIG)
    from molanneal.report import WRITERS

    try:
        cfg = load(args.command, args.config)
        out = output_dir(args, cfg)
        kw = {"allow_large": args.opt_in_3x3} if args.command in ("anneal", "scale") else {}
        extra = {"command": args.command, "threads": args.threads, "seedless": args.seedless,
                 "opt_in_3x3": args.opt_in_3x3}
        with threadpool_limits(limits=args.threads):
            files = WRITERS[args.command](cfg, out, **kw, **extra)
    except ConfigError as exc:
        return _error("config", exc, EXIT_CONFIG, key=exc.key, line=exc.line)
    except SizeCeilingError as exc:
        return _error("size_ceiling", exc, EXIT_SIZE)
    except (TrackingError, NormDriftError, NoMinimumError, WindowError, LabelingError, AmbiguousSignError) as exc:
        return _error("numerical", exc, EXIT_NUMERIC)
    except (ValueError, TypeError) as exc:
        # invalid physical inputs that slipped past schema validation
        return _error("config", exc, EXIT_CONFIG)
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
