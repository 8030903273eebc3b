"""Gating, GDOP-based receiver selection, ML fusion, kinematic prediction.

The per-epoch state machine: gate each receiver's position estimate against
the predicted position, select the lowest-GDOP valid estimates, fuse them by
inverse-covariance weighting, then extrapolate the next position with the
constant-acceleration three-point predictor. Three consecutive all-miss
epochs end the track.
"""

from dataclasses import dataclass

import numpy as np

from bistatrack.estimator import aod_from_position

MAX_MISSES = 3


@dataclass
class PositionEstimate:
    """One receiver's position estimate with its error model."""

    position: np.ndarray | None
    receiver_index: int
    aoa_est_rad: float = float("nan")
    tau_est_s: float = float("nan")
    covariance: np.ndarray | None = None
    gdop: float = float("nan")
    valid: bool = False
    invalid_reason: str | None = None


def gate_validate(estimate: PositionEstimate, predicted, gate_radius_m: float) -> bool:
    """Accept an estimate lying within the gating circle of the prediction.

    Distance strictly greater than the radius is a miss; estimates already
    invalidated upstream (singular solve, ill-conditioned Jacobian) stay
    invalid.
    """
    if gate_radius_m <= 0:
        raise ValueError("gate radius must be positive")
    if not estimate.valid or estimate.position is None:
        return False
    distance = float(np.linalg.norm(np.asarray(estimate.position)
                                    - np.asarray(predicted, dtype=float)))
    return not distance > gate_radius_m


def select_receivers(valid_estimates, n_select: int):
    """The min(n_select, available) estimates with smallest GDOP.

    Ties break toward the lower receiver index.
    """
    ranked = sorted(valid_estimates, key=lambda e: (e.gdop, e.receiver_index))
    return ranked[:max(n_select, 0)]


@dataclass(frozen=True)
class FusedEstimate:
    position: np.ndarray
    covariance: np.ndarray
    receiver_indices: tuple


def ml_fuse(estimates) -> FusedEstimate:
    """Inverse-covariance-weighted fusion of independent position estimates.

    alpha = (sum_i Sigma_i^-1)^-1 * (sum_i Sigma_i^-1 T_i); the fused
    covariance is (sum_i Sigma_i^-1)^-1. Accepts PositionEstimate objects or
    (position, covariance) pairs; a single estimate passes through.
    """
    items = []
    for est in estimates:
        if isinstance(est, PositionEstimate):
            items.append((np.asarray(est.position, dtype=float),
                          np.asarray(est.covariance, dtype=float),
                          est.receiver_index))
        else:
            pos, cov = est[0], est[1]
            items.append((np.asarray(pos, dtype=float),
                          np.asarray(cov, dtype=float), len(items)))
    if not items:
        raise ValueError("nothing to fuse")

    info = np.zeros((2, 2))
    weighted = np.zeros(2)
    for pos, cov, _ in items:
        inv = np.linalg.inv(cov)
        info += inv
        weighted += inv @ pos
    fused_cov = np.linalg.inv(info)
    return FusedEstimate(position=fused_cov @ weighted, covariance=fused_cov,
                         receiver_indices=tuple(idx for _, _, idx in items))


def predict_next(newest, middle, oldest, tx_position=(0.0, 0.0),
                 tx_broadside: float = 0.0):
    """Constant-acceleration extrapolation from the last three positions.

    next = 3*T(l) - 3*T(l-1) + T(l-2); the predicted departure angle is the
    quadrant-aware bearing of the predicted position relative to the TX.
    """
    newest = np.asarray(newest, dtype=float)
    middle = np.asarray(middle, dtype=float)
    oldest = np.asarray(oldest, dtype=float)
    predicted = 3.0 * newest - 3.0 * middle + oldest
    return predicted, aod_from_position(predicted, tx_position, tx_broadside)


@dataclass
class TrackState:
    """Tracker state carried across epochs (single owner, mutated in place)."""

    history: list                     # fused positions, newest first (3 kept)
    predicted_position: np.ndarray
    predicted_aod_rad: float
    miss_count: int = 0
    alive: bool = True
    epoch: int = 0
    fused_epochs: int = 1             # history entries that are real updates
    tx_position: tuple = (0.0, 0.0)
    tx_broadside: float = 0.0


def bootstrap_track(initial_position, tx_position=(0.0, 0.0),
                    tx_broadside: float = 0.0) -> TrackState:
    """Start a track from a known (acquired) position.

    The three-deep history is seeded with the initial position, so the first
    prediction is stationary and the second reduces to constant velocity.
    """
    p0 = np.asarray(initial_position, dtype=float)
    return TrackState(history=[p0.copy(), p0.copy(), p0.copy()],
                      predicted_position=p0.copy(),
                      predicted_aod_rad=aod_from_position(p0, tx_position, tx_broadside),
                      tx_position=tuple(np.asarray(tx_position, dtype=float)),
                      tx_broadside=tx_broadside)


def _advance_prediction(state: TrackState) -> None:
    newest, middle, oldest = state.history[0], state.history[1], state.history[2]
    if state.fused_epochs == 2:
        # constant-velocity reduction while only two distinct updates exist
        predicted = 2.0 * np.asarray(newest) - np.asarray(middle)
        aod = aod_from_position(predicted, state.tx_position, state.tx_broadside)
    else:
        predicted, aod = predict_next(newest, middle, oldest,
                                      state.tx_position, state.tx_broadside)
    state.predicted_position = np.asarray(predicted, dtype=float)
    state.predicted_aod_rad = aod


def track_step(state: TrackState, per_rx_estimates, gate_radius_m: float,
               n_select: int):
    """One epoch of the tracking loop; returns the fused estimate or None.

    Gates every estimate against the current prediction; on an all-miss epoch
    the track coasts on the prediction and the miss counter advances (three
    in a row kill the track). Otherwise the miss counter resets and the
    lowest-GDOP survivors are fused.
    """
    if not state.alive:
        raise RuntimeError("cannot step a dead track")

    gated = [est for est in per_rx_estimates
             if gate_validate(est, state.predicted_position, gate_radius_m)]

    fused = None
    if not gated:
        state.miss_count += 1
        new_position = np.asarray(state.predicted_position, dtype=float)
        if state.miss_count >= MAX_MISSES:
            state.alive = False
    else:
        state.miss_count = 0
        selected = select_receivers(gated, n_select)
        fused = ml_fuse(selected)
        new_position = np.asarray(fused.position, dtype=float)

    state.history = [new_position, state.history[0], state.history[1]]
    state.fused_epochs += 1
    state.epoch += 1
    _advance_prediction(state)
    return fused
