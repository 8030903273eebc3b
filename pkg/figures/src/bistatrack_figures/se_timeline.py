"""Spectral efficiency versus time step, one curve per tracking mode.

Reads a per-epoch CSV, averages SE across runs for each (mode, epoch) at one
transmit power, and plots the resulting timelines.
"""

import sys
from collections import defaultdict

from bistatrack_figures import schema
from bistatrack_figures._plotting import (
    MODE_ORDER,
    MODE_STYLE,
    base_parser,
    new_axes,
    parse_modes,
    save,
)


def render(epoch_csv, output, modes=None, power_dbm=None):
    rows, _ = schema.load_epoch_csv(epoch_csv)
    powers = sorted({float(r["pt_dbm"]) for r in rows})
    power = power_dbm if power_dbm is not None else powers[0]
    rows = [r for r in rows if float(r["pt_dbm"]) == power]
    rows = schema.filter_modes(rows, modes)
    if not rows:
        raise schema.SchemaError(f"{epoch_csv}: no rows at {power} dBm "
                                 f"after mode filtering")

    sums = defaultdict(lambda: defaultdict(lambda: [0.0, 0]))
    for r in rows:
        acc = sums[r["mode"]][int(r["epoch"])]
        acc[0] += float(r["se_bps_hz"])
        acc[1] += 1

    fig, ax = new_axes("Time step", "Achievable Spectral Efficiency (bps/Hz)")
    for mode in MODE_ORDER:
        if mode not in sums:
            continue
        epochs = sorted(sums[mode])
        curve = [sums[mode][e][0] / sums[mode][e][1] for e in epochs]
        ax.plot(epochs, curve, markevery=8, **MODE_STYLE[mode])
    ax.set_title(f"P_T = {power:g} dBm")
    ax.legend()
    save(fig, output)
    return output


def main(argv=None) -> int:
    parser = base_parser(__doc__)
    parser.add_argument("--power-dbm", type=float, default=None,
                        help="power to plot (default: lowest present)")
    args = parser.parse_args(argv)
    try:
        render(args.input_csv, args.output, parse_modes(args.modes),
               args.power_dbm)
    except (schema.SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
