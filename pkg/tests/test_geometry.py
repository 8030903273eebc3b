import math

import numpy as np
import pytest

from bistatrack.geometry import (
    bearing,
    bistatic_geometry,
    local_ula_angle,
    wrap_angle,
)


def test_symmetric_vertical_baseline_case():
    geo = bistatic_geometry((0, 0), (0, 25), 0.0, (27.5, 12.5))
    assert geo.d1_m == pytest.approx(30.20761493398643, abs=1e-9)
    assert geo.d2_m == pytest.approx(30.20761493398643, abs=1e-9)
    assert geo.sum_range_m == pytest.approx(60.41522986797286, abs=1e-9)
    assert geo.baseline_m == pytest.approx(25.0)
    assert math.cos(geo.rx_baseline_angle_rad) == pytest.approx(0.413802944301184,
                                                                abs=1e-9)


def test_symmetric_horizontal_baseline_case():
    geo = bistatic_geometry((0, 0), (55, 0), -math.pi, (27.5, 12.5))
    assert geo.d1_m == pytest.approx(30.20761493398643, abs=1e-9)
    assert geo.d2_m == pytest.approx(30.20761493398643, abs=1e-9)


def test_collinear_midpoint():
    geo = bistatic_geometry((0, 0), (0, 25), 0.0, (0.0, 12.5))
    assert geo.sum_range_m == pytest.approx(geo.baseline_m)
    assert geo.rx_baseline_angle_rad == pytest.approx(0.0, abs=1e-12)


def test_target_on_node_rejected():
    with pytest.raises(ValueError):
        bistatic_geometry((0, 0), (0, 25), 0.0, (0.0, 0.0))


def test_sum_range_at_least_baseline_randomized(rng):
    for _ in range(300):
        tx = rng.uniform(-50, 50, 2)
        rx = rng.uniform(-50, 50, 2)
        target = rng.uniform(-50, 50, 2)
        if min(np.linalg.norm(target - tx), np.linalg.norm(target - rx),
               np.linalg.norm(tx - rx)) < 1e-6:
            continue
        geo = bistatic_geometry(tx, rx, 0.0, target)
        assert geo.sum_range_m >= geo.baseline_m - 1e-12


def test_reconstruction_roundtrip(rng):
    # rx + d2 * (unit vector of the global bearing) returns the target exactly
    for _ in range(200):
        rx = rng.uniform(-30, 30, 2)
        target = rng.uniform(-30, 30, 2)
        if np.linalg.norm(target - rx) < 1e-3:
            continue
        geo = bistatic_geometry((0.0, 0.0), rx, 0.0, target)
        b = bearing(rx, target)
        rebuilt = rx + geo.d2_m * np.array([math.cos(b), math.sin(b)])
        assert np.linalg.norm(rebuilt - target) < 1e-9


def test_local_angle_folds_rear_arrivals():
    # arrival from 137.7 deg seen by a +x-facing array aliases to its mirror
    front = local_ula_angle(math.radians(42.3), 0.0)
    rear = local_ula_angle(math.radians(137.7), 0.0)
    assert rear == pytest.approx(front, abs=1e-12)
    assert abs(rear) < math.pi / 2


def test_wrap_angle_range():
    for a in np.linspace(-12.0, 12.0, 1001):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi + 1e-15
        assert math.cos(w) == pytest.approx(math.cos(a), abs=1e-12)
        assert math.sin(w) == pytest.approx(math.sin(a), abs=1e-12)
