"""Spectral efficiency, predicted-AoD error, aggregation, CSV persistence.

The per-epoch CSV schema (one header line, comma separated, UTF-8):

    run_id, epoch, pt_dbm, mode, x_true, y_true, theta_true_deg,
    x_fused, y_fused, theta_pred_deg, se_bps_hz, pae_deg,
    then per receiver i: xi, yi, valid_i, gdop_est_i, gdop_act_i, selected_i

The summary CSV holds one row per (pt_dbm, mode): pt_dbm, mode, avg_se,
n_runs. Floats are written with repr() so reading a file back reproduces the
records exactly.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from bistatrack.arrays import beam_gain
from bistatrack.config import SystemParams
from bistatrack.geometry import wrap_angle

MODES = ("oracle", "rx0-only", "rx1-only", "rx2-only", "fuse")


def spectral_efficiency(theta_true_rad: float, theta_hat_rad: float,
                        d1_m: float, params: SystemParams) -> float:
    """Achievable downlink rate (bps/Hz) for one epoch.

    log2(1 + (lambda/(4*pi*d1))^2 * P_T * |a(theta)^H f(theta_hat)|^2
    / (K * N_o * M * delta_f)), with d1 the true TX-user distance.
    """
    if d1_m <= 0:
        raise ValueError("d1 must be positive")
    path_gain = (params.wavelength_m / (4.0 * np.pi * d1_m)) ** 2
    gain = beam_gain(theta_true_rad, theta_hat_rad, params.n_tx_antennas)
    snr = path_gain * params.tx_power_w * gain / (
        params.n_users * params.noise_variance_w)
    return float(np.log2(1.0 + snr))


def predicted_aod_error(theta_true_rad: float, theta_hat_rad: float) -> float:
    """Signed pointing error theta - theta_hat in degrees, wrapped."""
    return math.degrees(wrap_angle(theta_true_rad - theta_hat_rad))


@dataclass(frozen=True)
class ReceiverRecord:
    x: float = float("nan")
    y: float = float("nan")
    valid: bool = False
    gdop_est: float = float("nan")
    gdop_act: float = float("nan")
    selected: bool = False


@dataclass(frozen=True)
class EpochRecord:
    run_id: int
    epoch: int
    pt_dbm: float
    mode: str
    x_true: float
    y_true: float
    theta_true_deg: float
    x_fused: float
    y_fused: float
    theta_pred_deg: float
    se_bps_hz: float
    pae_deg: float
    receivers: tuple = ()
    config_hash: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SweepSummary:
    pt_dbm: float
    mode: str
    avg_se: float
    n_runs: int


def record_sort_key(rec: EpochRecord):
    return (rec.pt_dbm, rec.mode, rec.run_id, rec.epoch)


_BASE_FIELDS = ("run_id", "epoch", "pt_dbm", "mode", "x_true", "y_true",
                "theta_true_deg", "x_fused", "y_fused", "theta_pred_deg",
                "se_bps_hz", "pae_deg")
_RX_FIELDS = ("x{i}", "y{i}", "valid_{i}", "gdop_est_{i}", "gdop_act_{i}",
              "selected_{i}")


def epoch_csv_header(n_receivers: int):
    cols = list(_BASE_FIELDS)
    for i in range(n_receivers):
        cols.extend(f.format(i=i) for f in _RX_FIELDS)
    return cols


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_epoch_csv(records, path, n_receivers: int) -> None:
    """Write per-epoch records in canonical order (pt, mode, run, epoch)."""
    rows = sorted(records, key=record_sort_key)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(epoch_csv_header(n_receivers))
        for rec in rows:
            row = [rec.run_id, rec.epoch, _fmt(rec.pt_dbm), rec.mode,
                   _fmt(rec.x_true), _fmt(rec.y_true), _fmt(rec.theta_true_deg),
                   _fmt(rec.x_fused), _fmt(rec.y_fused), _fmt(rec.theta_pred_deg),
                   _fmt(rec.se_bps_hz), _fmt(rec.pae_deg)]
            rxs = list(rec.receivers) + [ReceiverRecord()] * (n_receivers - len(rec.receivers))
            for rx in rxs[:n_receivers]:
                row.extend([_fmt(rx.x), _fmt(rx.y), int(rx.valid),
                            _fmt(rx.gdop_est), _fmt(rx.gdop_act), int(rx.selected)])
            writer.writerow(row)


def read_epoch_csv(path):
    """Read per-epoch records back; inverse of write_epoch_csv."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n_receivers = (len(header) - len(_BASE_FIELDS)) // len(_RX_FIELDS)
        records = []
        for row in reader:
            base = row[:len(_BASE_FIELDS)]
            rxs = []
            for i in range(n_receivers):
                off = len(_BASE_FIELDS) + i * len(_RX_FIELDS)
                rxs.append(ReceiverRecord(
                    x=float(row[off]), y=float(row[off + 1]),
                    valid=bool(int(row[off + 2])), gdop_est=float(row[off + 3]),
                    gdop_act=float(row[off + 4]), selected=bool(int(row[off + 5]))))
            records.append(EpochRecord(
                run_id=int(base[0]), epoch=int(base[1]), pt_dbm=float(base[2]),
                mode=base[3], x_true=float(base[4]), y_true=float(base[5]),
                theta_true_deg=float(base[6]), x_fused=float(base[7]),
                y_fused=float(base[8]), theta_pred_deg=float(base[9]),
                se_bps_hz=float(base[10]), pae_deg=float(base[11]),
                receivers=tuple(rxs)))
    return records


def write_summary_csv(summaries, path) -> None:
    rows = sorted(summaries, key=lambda s: (s.pt_dbm, s.mode))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pt_dbm", "mode", "avg_se", "n_runs"])
        for s in rows:
            writer.writerow([_fmt(s.pt_dbm), s.mode, _fmt(s.avg_se), s.n_runs])


def read_summary_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        return [SweepSummary(pt_dbm=float(r[0]), mode=r[1], avg_se=float(r[2]),
                             n_runs=int(r[3])) for r in reader]


@dataclass(frozen=True)
class PaeBoxStats:
    """Tukey box-plot statistics of the pointing error distribution."""

    median: float
    q1: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    n: int


class Aggregator:
    """Streaming, mergeable aggregation of epoch records.

    Merging two aggregators equals aggregating the concatenated record
    streams, which keeps multi-worker reductions exact.
    """

    def __init__(self):
        self._se_sums = {}       # (pt, mode) -> [sum, count]
        self._runs = {}          # (pt, mode) -> set of run ids
        self._epoch_sums = {}    # (pt, mode) -> {epoch: [sum, count]}
        self._pae = {}           # (pt, mode) -> list of finite pae values
        self._config_hash = None

    def add(self, rec: EpochRecord) -> None:
        if rec.config_hash is not None:
            if self._config_hash is None:
                self._config_hash = rec.config_hash
            elif rec.config_hash != self._config_hash:
                raise ValueError("mixed-config record streams cannot be aggregated")
        key = (rec.pt_dbm, rec.mode)
        acc = self._se_sums.setdefault(key, [0.0, 0])
        acc[0] += rec.se_bps_hz
        acc[1] += 1
        self._runs.setdefault(key, set()).add(rec.run_id)
        epochs = self._epoch_sums.setdefault(key, {})
        eacc = epochs.setdefault(rec.epoch, [0.0, 0])
        eacc[0] += rec.se_bps_hz
        eacc[1] += 1
        if math.isfinite(rec.pae_deg):
            self._pae.setdefault(key, []).append(rec.pae_deg)

    def add_all(self, records) -> "Aggregator":
        for rec in records:
            self.add(rec)
        return self

    def merge(self, other: "Aggregator") -> "Aggregator":
        if (self._config_hash and other._config_hash
                and self._config_hash != other._config_hash):
            raise ValueError("mixed-config record streams cannot be aggregated")
        self._config_hash = self._config_hash or other._config_hash
        for key, (s, c) in other._se_sums.items():
            acc = self._se_sums.setdefault(key, [0.0, 0])
            acc[0] += s
            acc[1] += c
        for key, runs in other._runs.items():
            self._runs.setdefault(key, set()).update(runs)
        for key, epochs in other._epoch_sums.items():
            mine = self._epoch_sums.setdefault(key, {})
            for epoch, (s, c) in epochs.items():
                eacc = mine.setdefault(epoch, [0.0, 0])
                eacc[0] += s
                eacc[1] += c
        for key, values in other._pae.items():
            self._pae.setdefault(key, []).extend(values)
        return self

    def summaries(self):
        out = []
        for (pt, mode), (s, c) in sorted(self._se_sums.items()):
            out.append(SweepSummary(pt_dbm=pt, mode=mode, avg_se=s / c,
                                    n_runs=len(self._runs[(pt, mode)])))
        return out

    def se_curve(self, pt_dbm: float, mode: str) -> np.ndarray:
        """Mean SE per epoch across runs for one (power, mode) cell."""
        epochs = self._epoch_sums[(pt_dbm, mode)]
        length = max(epochs) + 1
        curve = np.full(length, np.nan)
        for epoch, (s, c) in epochs.items():
            curve[epoch] = s / c
        return curve

    def pae_stats(self, pt_dbm: float, mode: str) -> PaeBoxStats:
        values = np.sort(np.asarray(self._pae.get((pt_dbm, mode), []), dtype=float))
        if values.size == 0:
            nan = float("nan")
            return PaeBoxStats(nan, nan, nan, nan, nan, 0)
        q1, med, q3 = np.percentile(values, [25.0, 50.0, 75.0])
        iqr = q3 - q1
        lo = values[values >= q1 - 1.5 * iqr][0]
        hi = values[values <= q3 + 1.5 * iqr][-1]
        return PaeBoxStats(median=float(med), q1=float(q1), q3=float(q3),
                           whisker_lo=float(lo), whisker_hi=float(hi),
                           n=int(values.size))


def aggregate(records) -> Aggregator:
    """Aggregate an iterable of records (they must share a config hash)."""
    return Aggregator().add_all(records)
