"""Command-line front end: ``vlczone <subcommand> [--config PATH] ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from . import experiments
from .scenario import ConfigError, emit_csv, load_config, load_config_file

log = logging.getLogger("vlczone")

SUBCOMMANDS = {
    "zone-sweep": "Zone-0 radius vs rho for each LED half-angle (N = 1).",
    "subcarrier-sweep": "Zone-0 subcarriers vs overlap-limited radius over AP spacings.",
    "eta-sweep": "Monte Carlo zoning gain eta over schemes/illumination/beta/rho.",
    "fairness-sweep": "Monte Carlo fairness zeta over schemes/illumination/fairness_beta/rho.",
    "rate-map": "Line-of-sight probe rate and Zone-0 mask over the room.",
    "single-trial": "One placement + allocation run, per-user rates.",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vlczone",
        description="Two-zone OFDMA resource allocation for LED attocells.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    for name, help_text in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", metavar="PATH",
                       help="JSON scenario document (default: built-in reference parameters)")
        p.add_argument("--out", metavar="PATH", help="CSV output file (default: stdout)")
        p.add_argument("--seed", type=int, metavar="U64",
                       help="master seed, overrides the config 'seed' (default 0)")
        p.add_argument("--trials", type=int, metavar="N",
                       help="Monte Carlo trials, overrides the config 'trials' (default 10000)")
        p.add_argument("--workers", type=int, metavar="N",
                       help="worker processes for Monte Carlo (output does not depend on it)")
        p.add_argument("--quiet", action="store_true", help="suppress progress and summary on stderr")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr, force=True)
    try:
        cfg = load_config_file(args.config) if args.config else load_config(None)
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigError("--seed: must be an unsigned 64-bit integer")
            cfg = replace(cfg, seed=args.seed)
        if args.trials is not None:
            if args.trials < 1:
                raise ConfigError("--trials: must be >= 1")
            cfg = replace(cfg, trials=args.trials)
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers: must be >= 1")
            cfg = replace(cfg, workers=args.workers)

        cmd = args.command
        log.info("running %s", cmd)
        if cmd == "zone-sweep":
            table = experiments.zone_sweep(cfg)
        elif cmd == "subcarrier-sweep":
            table = experiments.subcarrier_sweep(cfg)
        elif cmd == "eta-sweep":
            table = experiments.eta_sweep(cfg)
        elif cmd == "fairness-sweep":
            table = experiments.fairness_sweep(cfg)
        elif cmd == "rate-map":
            table = experiments.rate_map_cmd(cfg)
        else:
            table, summary = experiments.single_trial(cfg)
            for key, value in summary.items():
                log.info("%s = %s", key, value)

        if args.out:
            emit_csv(table, args.out)
            log.info("wrote %d rows to %s", len(table.rows), args.out)
        else:
            emit_csv(table, sys.stdout)
    except BrokenPipeError:
        # Downstream reader (e.g. `head`) closed the pipe early.
        sys.stdout = None
        return 0
    except (ConfigError, ValueError, OSError, RuntimeError) as exc:
        print(f"vlczone: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
