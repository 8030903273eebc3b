"""Exact bistatic transmitter-target-receiver geometry queries.

All angles are radians. Global bearings follow atan2(dy, dx). A uniform
linear array is described by its broadside bearing; local arrival angles are
measured from broadside and folded into (-pi/2, pi/2), which is the half-plane
a ULA can resolve unambiguously.
"""

from dataclasses import dataclass

import numpy as np


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = (-angle + np.pi) % (2.0 * np.pi)
    return float(np.pi - wrapped)


def bearing(from_point, to_point) -> float:
    """Global bearing of the direction from one point to another."""
    d = np.asarray(to_point, dtype=float) - np.asarray(from_point, dtype=float)
    return float(np.arctan2(d[1], d[0]))


def local_ula_angle(global_bearing: float, broadside_bearing: float) -> float:
    """Arrival angle relative to an array broadside, folded to (-pi/2, pi/2).

    Back-half arrivals alias onto their mirror in front of the array, exactly
    as the array response does (it depends only on sin of the local angle).
    """
    return float(np.arcsin(np.sin(global_bearing - broadside_bearing)))


@dataclass(frozen=True)
class BistaticGeometry:
    """One transmitter-target-receiver triangle."""

    d1_m: float              # TX-target distance
    d2_m: float              # RX-target distance
    sum_range_m: float       # d1 + d2
    baseline_m: float        # TX-RX distance
    rx_local_aoa_rad: float  # arrival angle at RX relative to its broadside
    rx_baseline_angle_rad: float  # angle at RX between RX->TX and RX->target
    tx_aod_rad: float        # departure angle at TX relative to its broadside


def bistatic_geometry(tx, rx, broadside: float, target,
                      tx_broadside: float = 0.0) -> BistaticGeometry:
    """Exact geometry of a TX-target-RX triangle.

    Raises ValueError when the target coincides with either node.
    """
    tx = np.asarray(tx, dtype=float)
    rx = np.asarray(rx, dtype=float)
    target = np.asarray(target, dtype=float)

    d1 = float(np.linalg.norm(target - tx))
    d2 = float(np.linalg.norm(target - rx))
    if d1 == 0.0 or d2 == 0.0:
        raise ValueError("target coincides with a node")
    baseline = float(np.linalg.norm(tx - rx))

    u_rx_tx = (tx - rx) / baseline
    u_rx_t = (target - rx) / d2
    cos_psi = float(np.clip(np.dot(u_rx_tx, u_rx_t), -1.0, 1.0))

    return BistaticGeometry(
        d1_m=d1,
        d2_m=d2,
        sum_range_m=d1 + d2,
        baseline_m=baseline,
        rx_local_aoa_rad=local_ula_angle(bearing(rx, target), broadside),
        rx_baseline_angle_rad=float(np.arccos(cos_psi)),
        tx_aod_rad=local_ula_angle(bearing(tx, target), tx_broadside),
    )
