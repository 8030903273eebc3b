"""Command-line entry point: scenario runs, power sweeps, CSV emission."""

import argparse
import os
import sys

from bistatrack.config import ConfigError, default_config, load_config, with_overrides
from bistatrack.runner import CLI_MODE_ALIASES, run_sweep, write_outputs


def _parse_modes(raw: str):
    tokens = [t.strip() for t in raw.split(",") if t.strip()]
    if "all" in tokens:
        return ("oracle", "rx0-only", "rx1-only", "rx2-only", "fuse")
    modes = []
    for tok in tokens:
        if tok not in CLI_MODE_ALIASES:
            raise argparse.ArgumentTypeError(
                f"unknown mode {tok!r} (choose from rx0,rx1,rx2,fuse,oracle,all)")
        modes.append(CLI_MODE_ALIASES[tok])
    return tuple(modes)


def _parse_powers(raw: str):
    try:
        return tuple(float(t) for t in raw.split(",") if t.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad power list {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bistatrack",
        description="Bistatic-sensing-assisted beam tracking Monte Carlo simulator")
    parser.add_argument("--config", metavar="PATH",
                        help="scenario JSON (defaults to the built-in reference scenario)")
    parser.add_argument("--mode", type=_parse_modes, default=("fuse",),
                        metavar="{rx0,rx1,rx2,fuse,oracle,all}[,...]",
                        help="tracking mode(s) to simulate")
    parser.add_argument("--runs", type=int, default=None,
                        help="Monte Carlo runs per (power, mode)")
    parser.add_argument("--seed", type=int, default=None, help="master seed")
    parser.add_argument("--power-dbm", type=_parse_powers, default=None,
                        metavar="LIST", help="transmit power sweep, e.g. -5,0,5")
    parser.add_argument("--out", default="out", metavar="DIR",
                        help="output directory for CSV files")
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="parallel worker processes (1 = serial)")
    parser.add_argument("--arch", choices=("digital", "hda"), default=None,
                        help="receiver front-end architecture override")
    parser.add_argument("--emit-epochs", choices=("yes", "no"), default="yes",
                        help="write the per-epoch CSV next to the summary")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else default_config()
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        cfg = with_overrides(cfg, modes=args.mode, power_dbm=args.power_dbm,
                             runs=args.runs, seed=args.seed, arch=args.arch)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    result = run_sweep(cfg, workers=max(args.workers, 1), progress=True)
    paths = write_outputs(result, cfg, args.out,
                          emit_epochs=args.emit_epochs == "yes")

    print(f"wrote {paths['summary']}")
    if "epochs" in paths:
        print(f"wrote {paths['epochs']}")
    for s in result.aggregator.summaries():
        print(f"  P_T {s.pt_dbm:+6.1f} dBm  {s.mode:<9s}  "
              f"avg SE {s.avg_se:7.3f} bps/Hz  ({s.n_runs} runs)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
