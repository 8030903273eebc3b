"""Per-receiver GDOP versus time step: actual and estimated overlaid.

Reads a per-epoch CSV (normally from the fused mode, where every receiver
senses each epoch) and plots, for each receiver, the run-median of the
actual-SNR GDOP next to the data-estimated GDOP.
"""

import math
import statistics
import sys
from collections import defaultdict

from bistatrack_figures import schema
from bistatrack_figures._plotting import base_parser, new_axes, parse_modes, save

RX_COLORS = ("tab:red", "tab:blue", "tab:green", "tab:purple", "tab:orange")


def render(epoch_csv, output, modes=None, power_dbm=None):
    rows, n_receivers = schema.load_epoch_csv(epoch_csv)
    if n_receivers == 0:
        raise schema.SchemaError(f"{epoch_csv}: missing required column 'x0'")
    powers = sorted({float(r["pt_dbm"]) for r in rows})
    power = power_dbm if power_dbm is not None else powers[0]
    rows = schema.filter_modes([r for r in rows if float(r["pt_dbm"]) == power],
                               modes)
    if not rows:
        raise schema.SchemaError(f"{epoch_csv}: no rows at {power} dBm "
                                 f"after mode filtering")

    per_rx = {i: defaultdict(lambda: ([], []))
              for i in range(n_receivers)}
    for r in rows:
        epoch = int(r["epoch"])
        for i in range(n_receivers):
            est = float(r[f"gdop_est_{i}"])
            act = float(r[f"gdop_act_{i}"])
            acc = per_rx[i][epoch]
            if math.isfinite(est):
                acc[0].append(est)
            if math.isfinite(act):
                acc[1].append(act)

    fig, ax = new_axes("Time step", "GDOP (m)")
    for i in range(n_receivers):
        epochs = sorted(e for e, (est, act) in per_rx[i].items() if est and act)
        if not epochs:
            continue
        est_curve = [statistics.median(per_rx[i][e][0]) for e in epochs]
        act_curve = [statistics.median(per_rx[i][e][1]) for e in epochs]
        color = RX_COLORS[i % len(RX_COLORS)]
        ax.plot(epochs, act_curve, color=color, label=f"RX{i} actual")
        ax.plot(epochs, est_curve, color=color, linestyle="--",
                label=f"RX{i} estimated")
    ax.set_yscale("log")
    ax.set_title(f"P_T = {power:g} dBm")
    ax.legend(ncols=2, fontsize=9)
    save(fig, output)
    return output


def main(argv=None) -> int:
    parser = base_parser(__doc__)
    parser.add_argument("--power-dbm", type=float, default=None)
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
