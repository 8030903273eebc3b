"""Shared physical constants and unit helpers."""

import numpy as np

SPEED_OF_LIGHT = 3.0e8  # m/s


def dbm_to_watt(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0) * 1e-3


def watt_to_dbm(p_w: float) -> float:
    return 10.0 * np.log10(p_w / 1e-3)


def dbsm_to_m2(rcs_dbsm: float) -> float:
    return 10.0 ** (rcs_dbsm / 10.0)
