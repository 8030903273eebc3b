import math

import numpy as np
import pytest

from bistatrack.config import SystemParams
from bistatrack.metrics import (
    Aggregator,
    EpochRecord,
    ReceiverRecord,
    aggregate,
    predicted_aod_error,
    read_epoch_csv,
    read_summary_csv,
    spectral_efficiency,
    write_epoch_csv,
    write_summary_csv,
)

PARAMS = SystemParams()


def make_record(run_id=0, epoch=0, pt=5.0, mode="fuse", se=1.0, pae=0.5,
                config_hash="h"):
    rxs = (ReceiverRecord(x=1.0, y=2.0, valid=True, gdop_est=0.5,
                          gdop_act=0.6, selected=True),
           ReceiverRecord(),
           ReceiverRecord(x=float("nan"), y=3.5, valid=False,
                          gdop_est=float("inf"), gdop_act=7.25, selected=False))
    return EpochRecord(run_id=run_id, epoch=epoch, pt_dbm=pt, mode=mode,
                       x_true=27.5, y_true=25.0, theta_true_deg=42.27,
                       x_fused=27.4, y_fused=24.9, theta_pred_deg=42.0,
                       se_bps_hz=se, pae_deg=pae, receivers=rxs,
                       config_hash=config_hash)


class TestSpectralEfficiency:
    def test_reference_value_at_5_dbm(self):
        # matched beam at d1 = 30.2076 m with the default link budget
        se = spectral_efficiency(0.3, 0.3, 30.2076, PARAMS)
        assert se == pytest.approx(5.141188716513634, rel=1e-9)

    def test_orthogonal_pointing_gives_zero(self):
        theta = 0.0
        theta_hat = math.asin(2.0 / PARAMS.n_tx_antennas)  # exact null
        se = spectral_efficiency(theta, theta_hat, 30.0, PARAMS)
        assert se == pytest.approx(0.0, abs=1e-9)

    def test_doubling_distance_costs_two_bits_at_high_snr(self):
        se_near = spectral_efficiency(0.1, 0.1, 10.0, PARAMS)
        se_far = spectral_efficiency(0.1, 0.1, 20.0, PARAMS)
        assert se_near - se_far == pytest.approx(2.0, abs=0.02)

    def test_rejects_bad_distance(self):
        with pytest.raises(ValueError):
            spectral_efficiency(0.0, 0.0, 0.0, PARAMS)


class TestPredictedAodError:
    def test_zero_when_matched(self):
        assert predicted_aod_error(0.5, 0.5) == 0.0

    def test_simple_difference(self):
        assert predicted_aod_error(math.radians(10), math.radians(8)) \
            == pytest.approx(2.0)

    def test_wraps_to_shortest_difference(self):
        assert predicted_aod_error(math.radians(179), math.radians(-179)) \
            == pytest.approx(-2.0)
        assert predicted_aod_error(math.radians(-179), math.radians(179)) \
            == pytest.approx(2.0)


class TestCsvRoundTrip:
    def test_epoch_records_roundtrip_exactly(self, tmp_path):
        records = [make_record(run_id=r, epoch=e, se=math.pi * (r + 1) + e,
                               pae=-0.123456789 * e, config_hash=None)
                   for r in range(3) for e in range(4)]
        path = tmp_path / "epochs.csv"
        write_epoch_csv(records, path, n_receivers=3)
        back = read_epoch_csv(path)
        assert len(back) == len(records)
        for a, b in zip(sorted(records, key=lambda r: (r.run_id, r.epoch)), back):
            for field in ("run_id", "epoch", "pt_dbm", "mode", "x_true",
                          "y_true", "theta_true_deg", "x_fused", "y_fused",
                          "theta_pred_deg", "se_bps_hz", "pae_deg"):
                va, vb = getattr(a, field), getattr(b, field)
                assert va == vb or (va != va and vb != vb)
            for ra, rb in zip(a.receivers, b.receivers):
                for field in ("x", "y", "valid", "gdop_est", "gdop_act",
                              "selected"):
                    va, vb = getattr(ra, field), getattr(rb, field)
                    assert va == vb or (va != va and vb != vb)

    def test_write_is_deterministic_bytes(self, tmp_path):
        records = [make_record(run_id=r, epoch=e, config_hash=None)
                   for r in range(2) for e in range(3)]
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_epoch_csv(records, p1, 3)
        write_epoch_csv(list(reversed(records)), p2, 3)
        assert p1.read_bytes() == p2.read_bytes()

    def test_summary_roundtrip(self, tmp_path):
        agg = aggregate([make_record(run_id=r, se=float(r)) for r in range(5)])
        path = tmp_path / "summary.csv"
        write_summary_csv(agg.summaries(), path)
        back = read_summary_csv(path)
        assert len(back) == 1
        assert back[0].avg_se == pytest.approx(2.0)
        assert back[0].n_runs == 5


class TestAggregation:
    def test_single_record_average(self):
        agg = aggregate([make_record(se=3.25)])
        s = agg.summaries()[0]
        assert s.avg_se == 3.25 and s.n_runs == 1

    def test_dead_epochs_count_in_average(self):
        records = [make_record(epoch=0, se=4.0), make_record(epoch=1, se=0.0)]
        assert aggregate(records).summaries()[0].avg_se == pytest.approx(2.0)

    def test_merge_equals_union(self):
        records = [make_record(run_id=r, epoch=e, se=r + 0.1 * e,
                               pae=0.3 * r - e)
                   for r in range(4) for e in range(5)]
        whole = aggregate(records)
        left = aggregate(records[:7])
        right = aggregate(records[7:])
        merged = left.merge(right)
        assert merged.summaries() == whole.summaries()
        assert np.allclose(merged.se_curve(5.0, "fuse"),
                           whole.se_curve(5.0, "fuse"))
        assert merged.pae_stats(5.0, "fuse") == whole.pae_stats(5.0, "fuse")

    def test_mixed_config_rejected(self):
        with pytest.raises(ValueError, match="mixed-config"):
            aggregate([make_record(config_hash="a"),
                       make_record(config_hash="b")])

    def test_nan_pae_excluded_from_box_stats(self):
        records = [make_record(epoch=0, pae=1.0),
                   make_record(epoch=1, pae=float("nan")),
                   make_record(epoch=2, pae=3.0)]
        stats = aggregate(records).pae_stats(5.0, "fuse")
        assert stats.n == 2
        assert stats.median == pytest.approx(2.0)

    def test_tukey_whiskers(self):
        values = [0.0, 1.0, 2.0, 3.0, 4.0, 100.0]
        records = [make_record(epoch=i, pae=v) for i, v in enumerate(values)]
        stats = aggregate(records).pae_stats(5.0, "fuse")
        assert stats.whisker_lo == 0.0
        assert stats.whisker_hi == 4.0  # 100 is beyond q3 + 1.5 iqr
