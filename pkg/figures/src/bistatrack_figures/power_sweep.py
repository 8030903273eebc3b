"""Average spectral efficiency versus transmit power, one curve per mode.

Reads a sweep summary CSV (pt_dbm, mode, avg_se, n_runs) and plots the
labeled curves over the power axis.
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


def render(summary_csv, output, modes=None):
    rows = schema.filter_modes(schema.load_summary_csv(summary_csv), modes)
    if not rows:
        raise schema.SchemaError(f"{summary_csv}: no rows after mode filtering")
    curves = defaultdict(list)
    for r in rows:
        curves[r["mode"]].append((float(r["pt_dbm"]), float(r["avg_se"])))

    fig, ax = new_axes("Transmitted Power P_T (dBm)",
                       "Average Achievable Spectral Efficiency (bps/Hz)")
    for mode in MODE_ORDER:
        if mode not in curves:
            continue
        pts = sorted(curves[mode])
        ax.plot([p for p, _ in pts], [s for _, s in pts], **MODE_STYLE[mode])
    ax.legend()
    save(fig, output)
    return output


def main(argv=None) -> int:
    parser = base_parser(__doc__)
    args = parser.parse_args(argv)
    try:
        render(args.input_csv, args.output, parse_modes(args.modes))
    except (schema.SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
