"""End-to-end per-epoch simulation: echo synthesis, estimation, tracking.

One tracking run walks the trajectory epoch by epoch. The transmit beam
points at the tracker's predicted departure angle, the illuminated echoes are
synthesized per receiver, each receiver runs the estimation chain, and the
tracker gates/selects/fuses and predicts the next epoch. Spectral efficiency
is scored against the true geometry with the beam that was actually used, so
pointing errors feed back into the next epoch's sensing SNR.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from bistatrack.arrays import beam_gain, generate_qpsk_grid, make_beamformer, steering_vector
from bistatrack.channel import EchoParams, bistatic_doppler, reflection_coefficient, synthesize_rx_frame
from bistatrack.config import ScenarioConfig
from bistatrack.constants import SPEED_OF_LIGHT, dbm_to_watt
from bistatrack.errormodel import crlb_aoa, crlb_delay, estimate_snrs, jacobian, position_covariance
from bistatrack.estimator import (
    DelayDopplerEstimate,
    MusicEstimate,
    aod_from_position,
    bistatic_position,
    default_music_grid,
    delay_doppler_estimate,
    hermitian_eigendecomposition,
    music_aoa,
    sample_covariance,
    steering_grid_matrix,
)
from bistatrack.fusion import PositionEstimate, bootstrap_track, gate_validate, track_step
from bistatrack.geometry import bearing, bistatic_geometry, local_ula_angle
from bistatrack.hda import build_reduction, reduce_frame, reduced_steering
from bistatrack.metrics import (
    EpochRecord,
    ReceiverRecord,
    predicted_aod_error,
    spectral_efficiency,
)
from bistatrack.trajectory import sample_waypoints

MODE_ACTIVE_RECEIVERS = {
    "oracle": (),
    "rx0-only": (0,),
    "rx1-only": (1,),
    "rx2-only": (2,),
}


def active_receivers(mode: str, n_receivers: int):
    if mode == "fuse":
        return tuple(range(n_receivers))
    try:
        rxs = MODE_ACTIVE_RECEIVERS[mode]
    except KeyError:
        raise ValueError(f"unknown mode {mode!r}") from None
    if any(i >= n_receivers for i in rxs):
        raise ValueError(f"mode {mode!r} needs receiver beyond n_receivers")
    return rxs


@dataclass(frozen=True)
class RxChainResult:
    """Everything one receiver produced during one epoch."""

    estimate: PositionEstimate
    gdop_act: float
    music: MusicEstimate | None = None
    delay_doppler: DelayDopplerEstimate | None = None
    rho0_est: float = float("nan")
    rho1_est: float = float("nan")


def _invalid_result(receiver_index: int, reason: str) -> RxChainResult:
    return RxChainResult(
        estimate=PositionEstimate(position=None, receiver_index=receiver_index,
                                  valid=False, invalid_reason=reason),
        gdop_act=float("nan"))


def run_estimation_chain(frame, receiver_index: int, cfg: ScenarioConfig,
                         params, qpsk_symbols, predicted_position,
                         reduction=None, truth=None, h=None,
                         theta_hat: float = 0.0) -> RxChainResult:
    """Full single-receiver chain from a sampled frame to a weighted estimate.

    ``truth`` (a BistaticGeometry) and ``h`` enable the actual-SNR GDOP
    diagnostic next to the data-estimated one; both share the Jacobian
    evaluated at the receiver's own position estimate.
    """
    nodes = cfg.nodes
    rx = np.asarray(nodes.rx_positions[receiver_index], dtype=float)
    broadside = nodes.rx_broadside_rad[receiver_index]
    n_sources = params.n_users

    flat = frame.flat_samples if not isinstance(frame, np.ndarray) else frame
    grid = default_music_grid(cfg.sim.music_grid_deg)
    steering_rows = steering_grid_matrix(grid, params.n_rx_antennas)
    if reduction is not None and not reduction.is_identity:
        flat = reduce_frame(flat, reduction)
        steering_rows = reduced_steering(reduction, steering_rows)
    n_eff = flat.shape[1]

    r_cov = sample_covariance(flat)
    eig = hermitian_eigendecomposition(r_cov)

    phi_pred = local_ula_angle(bearing(rx, predicted_position), broadside)
    music = music_aoa(r_cov, n_sources, grid, phi_pred, eig=eig,
                      steering=steering_rows)
    if not music.valid:
        return _invalid_result(receiver_index, "no MUSIC peak")

    if reduction is not None and not reduction.is_identity:
        b_hat = reduced_steering(reduction,
                                 steering_vector(music.aoa_rad, params.n_rx_antennas)[None, :])[0]
        w = b_hat / np.linalg.norm(b_hat)
    else:
        w = make_beamformer(music.aoa_rad, params.n_rx_antennas)

    equalized = (flat @ w.conj().astype(flat.dtype)).reshape(qpsk_symbols.shape) \
        / qpsk_symbols
    baseline = float(np.linalg.norm(np.asarray(nodes.tx_position) - rx))
    dd = delay_doppler_estimate(
        equalized, params.fft_oversampling, params.subcarrier_spacing_hz,
        params.symbol_period_s,
        min_tau_s=baseline / SPEED_OF_LIGHT,
        max_tau_s=params.max_range_m / SPEED_OF_LIGHT,
        max_doppler_hz=2.0 * params.max_speed_mps / params.wavelength_m)
    solve = bistatic_position(dd.tau_hat_s, music.aoa_rad, rx, broadside,
                              nodes.tx_position)

    snrs = estimate_snrs(eig, equalized, params.tx_power_w, params.n_users,
                         n_sources=n_sources)
    c_phi = crlb_aoa(snrs.rho0_est, params.n_symbols, params.n_subcarriers,
                     n_eff, spatial_correction=cfg.sim.aoa_spatial_correction,
                     aoa_rad=music.aoa_rad)
    c_tau = crlb_delay(snrs.rho1_est, params.fft_oversampling,
                       params.n_subcarriers, params.subcarrier_spacing_hz,
                       params.n_symbols, params.symbol_period_s)

    if not solve.valid:
        return RxChainResult(
            estimate=PositionEstimate(position=None, receiver_index=receiver_index,
                                      aoa_est_rad=music.aoa_rad,
                                      tau_est_s=dd.tau_hat_s, valid=False,
                                      invalid_reason=solve.reason),
            gdop_act=float("nan"), music=music, delay_doppler=dd,
            rho0_est=snrs.rho0_est, rho1_est=snrs.rho1_est)

    jac = jacobian(solve.position, nodes.tx_position, rx)
    cov = position_covariance(jac, c_tau, c_phi)

    gdop_act = float("nan")
    if truth is not None and h is not None:
        gdop_act = _actual_gdop(cov.jacobian, truth, h, theta_hat, w, params,
                                reduction, cfg)

    if not cov.well_conditioned:
        return RxChainResult(
            estimate=PositionEstimate(position=solve.position,
                                      receiver_index=receiver_index,
                                      aoa_est_rad=music.aoa_rad,
                                      tau_est_s=dd.tau_hat_s, valid=False,
                                      invalid_reason="ill-conditioned geometry"),
            gdop_act=gdop_act, music=music, delay_doppler=dd,
            rho0_est=snrs.rho0_est, rho1_est=snrs.rho1_est)

    estimate = PositionEstimate(position=solve.position,
                                receiver_index=receiver_index,
                                aoa_est_rad=music.aoa_rad,
                                tau_est_s=dd.tau_hat_s,
                                covariance=cov.sigma, gdop=cov.gdop, valid=True)
    return RxChainResult(estimate=estimate, gdop_act=gdop_act, music=music,
                         delay_doppler=dd, rho0_est=snrs.rho0_est,
                         rho1_est=snrs.rho1_est)


def _actual_gdop(jac, truth, h, theta_hat, w, params, reduction, cfg) -> float:
    """GDOP recomputed from true-geometry SNRs through the same Jacobian."""
    gain = beam_gain(truth.tx_aod_rad, theta_hat, params.n_tx_antennas)
    rho0_elem = params.tx_power_w * abs(h) ** 2 * gain / (
        params.n_users * params.noise_variance_w)
    if rho0_elem <= 0:
        return float("inf")
    b_true = steering_vector(truth.rx_local_aoa_rad, params.n_rx_antennas)
    if reduction is not None and not reduction.is_identity:
        b_true = reduction.u.conj().T @ b_true
    n_eff = b_true.shape[0]
    rho0_eff = rho0_elem * float(np.linalg.norm(b_true) ** 2) / n_eff
    rho1 = float(np.abs(np.vdot(w, b_true)) ** 2) * rho0_elem
    c_phi = crlb_aoa(rho0_eff, params.n_symbols, params.n_subcarriers, n_eff,
                     spatial_correction=cfg.sim.aoa_spatial_correction,
                     aoa_rad=truth.rx_local_aoa_rad)
    c_tau = crlb_delay(rho1, params.fft_oversampling, params.n_subcarriers,
                       params.subcarrier_spacing_hz, params.n_symbols,
                       params.symbol_period_s)
    cov = position_covariance(jac, c_tau, c_phi)
    return cov.gdop if cov.well_conditioned else float("inf")


@dataclass
class RunResult:
    mode: str
    pt_dbm: float
    run_id: int
    records: list
    death_epoch: int | None


def _epoch_truths(cfg: ScenarioConfig, waypoints):
    """True bistatic geometry and Doppler per (epoch, receiver)."""
    nodes = cfg.nodes
    wavelength = cfg.system.wavelength_m
    per_epoch = []
    for wp in waypoints:
        row = []
        for rx, broadside in zip(nodes.rx_positions, nodes.rx_broadside_rad):
            geo = bistatic_geometry(nodes.tx_position, rx, broadside,
                                    wp.position, nodes.tx_broadside_rad)
            dop = bistatic_doppler(wp.velocity, wp.position, nodes.tx_position,
                                   rx, wavelength)
            row.append((geo, dop))
        per_epoch.append(row)
    return per_epoch


def run_tracking(cfg: ScenarioConfig, mode: str, pt_dbm: float, run_id: int,
                 rng: np.random.Generator, *, config_hash: str | None = None) -> RunResult:
    """One Monte Carlo tracking run over the whole trajectory."""
    params = replace(cfg.system, tx_power_w=dbm_to_watt(pt_dbm))
    nodes = cfg.nodes
    waypoints = sample_waypoints(cfg.trajectory, params.refresh_period_s)
    truths = _epoch_truths(cfg, waypoints)
    rxs = active_receivers(mode, params.n_receivers)
    dtype = np.complex64 if cfg.sim.dtype == "complex64" else np.complex128
    hda = cfg.receiver.architecture == "hda"

    records = []
    death_epoch = None
    state = None

    for epoch, wp in enumerate(waypoints):
        theta_true = aod_from_position(wp.position, nodes.tx_position,
                                       nodes.tx_broadside_rad)
        d1_true = float(np.linalg.norm(wp.position
                                       - np.asarray(nodes.tx_position, dtype=float)))

        if state is not None and not state.alive:
            records.append(_record(run_id, epoch, pt_dbm, mode, wp, theta_true,
                                   np.full(2, np.nan), float("nan"), 0.0,
                                   float("nan"), [], (), params, config_hash))
            continue

        if mode == "oracle":
            theta_hat = theta_true
            se = spectral_efficiency(theta_true, theta_hat, d1_true, params)
            records.append(_record(run_id, epoch, pt_dbm, mode, wp, theta_true,
                                   wp.position, math.degrees(theta_hat), se, 0.0,
                                   [], (), params, config_hash))
            continue

        if epoch == 0:
            theta_hat = theta_true  # acquisition: coarse AoD known at start
            predicted_position = wp.position
        else:
            theta_hat = state.predicted_aod_rad
            predicted_position = state.predicted_position

        se = spectral_efficiency(theta_true, theta_hat, d1_true, params)
        pae = predicted_aod_error(theta_true, theta_hat)

        tx_beam = make_beamformer(theta_hat, params.n_tx_antennas)
        qpsk = generate_qpsk_grid(params.n_symbols, params.n_subcarriers,
                                  params.tx_power_w / params.n_users, rng)

        results = []
        for i in rxs:
            geo, dop = truths[epoch][i]
            h = reflection_coefficient(geo.d1_m, geo.d2_m, params.wavelength_m,
                                       params.rcs_m2, rng)
            echo = EchoParams(h=h, theta_rad=geo.tx_aod_rad,
                              phi_rad=geo.rx_local_aoa_rad,
                              tau_s=geo.sum_range_m / SPEED_OF_LIGHT,
                              doppler_hz=dop)
            frame = synthesize_rx_frame([echo], [qpsk], [tx_beam], params, rng,
                                        dtype=dtype,
                                        cross_gains=cfg.sim.cross_gain_model,
                                        epoch_index=epoch, receiver_index=i)
            reduction = None
            if hda:
                center = local_ula_angle(bearing(nodes.rx_positions[i],
                                                 predicted_position),
                                         nodes.rx_broadside_rad[i])
                reduction = build_reduction(center, params.n_rx_antennas,
                                            cfg.receiver.n_rf, cfg.receiver.thbw)
            results.append(run_estimation_chain(
                frame, i, cfg, params, qpsk.astype(dtype), predicted_position,
                reduction=reduction, truth=geo, h=h, theta_hat=theta_hat))

        if epoch == 0:
            state = bootstrap_track(wp.position, nodes.tx_position,
                                    nodes.tx_broadside_rad)
            gate_flags = [gate_validate(res.estimate, wp.position,
                                        params.gate_radius_m) for res in results]
            records.append(_record(run_id, epoch, pt_dbm, mode, wp, theta_true,
                                   wp.position, math.degrees(theta_hat), se, pae,
                                   results, (), params, config_hash,
                                   gate_flags=gate_flags))
            continue

        fused = track_step(state, [res.estimate for res in results],
                           params.gate_radius_m, params.n_select)
        selected = fused.receiver_indices if fused is not None else ()
        if not state.alive and death_epoch is None:
            death_epoch = epoch
        gate_flags = [gate_validate(res.estimate, predicted_position,
                                    params.gate_radius_m) for res in results]
        records.append(_record(run_id, epoch, pt_dbm, mode, wp, theta_true,
                               state.history[0], math.degrees(theta_hat), se, pae,
                               results, selected, params, config_hash,
                               gate_flags=gate_flags))

    return RunResult(mode=mode, pt_dbm=pt_dbm, run_id=run_id, records=records,
                     death_epoch=death_epoch)


def _record(run_id, epoch, pt_dbm, mode, wp, theta_true, fused_xy,
            theta_pred_deg, se, pae, results, selected, params, config_hash,
            gate_flags=None) -> EpochRecord:
    # one slot per receiver column; inactive receivers stay empty records
    rx_records = [ReceiverRecord() for _ in range(params.n_receivers)]
    for k, res in enumerate(results):
        est = res.estimate
        pos = est.position if est.position is not None else (float("nan"),) * 2
        valid = gate_flags[k] if gate_flags is not None else est.valid
        rx_records[est.receiver_index] = ReceiverRecord(
            x=float(pos[0]), y=float(pos[1]), valid=bool(valid),
            gdop_est=float(est.gdop), gdop_act=float(res.gdop_act),
            selected=est.receiver_index in selected)
    fused_xy = np.asarray(fused_xy, dtype=float)
    return EpochRecord(
        run_id=run_id, epoch=epoch, pt_dbm=pt_dbm, mode=mode,
        x_true=float(wp.position[0]), y_true=float(wp.position[1]),
        theta_true_deg=math.degrees(theta_true),
        x_fused=float(fused_xy[0]), y_fused=float(fused_xy[1]),
        theta_pred_deg=float(theta_pred_deg), se_bps_hz=float(se),
        pae_deg=float(pae), receivers=tuple(rx_records), config_hash=config_hash)
