"""CSV schema contract shared by all figure scripts.

The scripts consume the simulator's CSV outputs as plain files and never
recompute physics; this module validates the expected columns and loads rows
into dictionaries. Schema violations raise SchemaError naming the first
missing column.
"""

import csv

EPOCH_BASE_COLUMNS = (
    "run_id", "epoch", "pt_dbm", "mode", "x_true", "y_true", "theta_true_deg",
    "x_fused", "y_fused", "theta_pred_deg", "se_bps_hz", "pae_deg",
)
RX_COLUMN_TEMPLATES = ("x{i}", "y{i}", "valid_{i}", "gdop_est_{i}",
                       "gdop_act_{i}", "selected_{i}")
SUMMARY_COLUMNS = ("pt_dbm", "mode", "avg_se", "n_runs")


class SchemaError(ValueError):
    """Input CSV does not match the expected simulator schema."""


def _check_columns(header, required, path):
    for col in required:
        if col not in header:
            raise SchemaError(f"{path}: missing required column '{col}'")


def load_epoch_csv(path):
    """Load per-epoch rows; returns (rows, n_receivers).

    Every base column must be present; receiver columns are counted from the
    header and validated as complete groups.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        _check_columns(header, EPOCH_BASE_COLUMNS, path)
        n_receivers = 0
        while f"x{n_receivers}" in header:
            _check_columns(header,
                           [t.format(i=n_receivers) for t in RX_COLUMN_TEMPLATES],
                           path)
            n_receivers += 1
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows, n_receivers


def load_summary_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        _check_columns(reader.fieldnames or [], SUMMARY_COLUMNS, path)
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def to_float(value):
    return float(value)


def filter_modes(rows, modes):
    if not modes:
        return rows
    wanted = set(modes)
    return [r for r in rows if r["mode"] in wanted]
