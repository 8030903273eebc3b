"""Box plot of the predicted departure-angle error per tracking mode.

Reads a per-epoch CSV and draws a Tukey box (median, quartiles, 1.5 IQR
whiskers) of the pointing error distribution for each mode present.
"""

import math
import sys

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
    rows = schema.filter_modes([r for r in rows if float(r["pt_dbm"]) == power],
                               modes)
    if not rows:
        raise schema.SchemaError(f"{epoch_csv}: no rows at {power} dBm "
                                 f"after mode filtering")

    per_mode = {}
    for r in rows:
        value = float(r["pae_deg"])
        if math.isfinite(value):
            per_mode.setdefault(r["mode"], []).append(value)

    order = [m for m in MODE_ORDER if m in per_mode]
    fig, ax = new_axes("", "Predicted AoD Error (deg)")
    ax.boxplot([per_mode[m] for m in order],
               tick_labels=[MODE_STYLE[m]["label"] for m in order],
               whis=1.5, showfliers=False)
    ax.set_title(f"P_T = {power:g} dBm")
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
