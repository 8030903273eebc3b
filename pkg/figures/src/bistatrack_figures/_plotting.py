"""Shared plotting setup and CLI helpers for the figure scripts."""

import argparse

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

MODE_ORDER = ("oracle", "rx0-only", "rx1-only", "rx2-only", "fuse")
MODE_STYLE = {
    "oracle": dict(color="magenta", label="Oracle"),
    "rx0-only": dict(color="red", marker="+", label="RX0"),
    "rx1-only": dict(color="blue", marker="o", markersize=3, label="RX1"),
    "rx2-only": dict(color="green", marker="x", label="RX2"),
    "fuse": dict(color="black", marker="d", label="Select and Fuse"),
}


def base_parser(description: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("input_csv", help="simulator CSV to plot")
    parser.add_argument("output", help="image file to write (png/pdf/svg)")
    parser.add_argument("--modes", default=None,
                        help="comma-separated mode filter, e.g. fuse,oracle")
    return parser


def parse_modes(raw):
    if raw is None:
        return None
    return [m.strip() for m in raw.split(",") if m.strip()]


def new_axes(xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
