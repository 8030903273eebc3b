"""Per-receiver echo synthesis on the post-OFDM-processing sample grid.

The simulation operates directly at the sampled (symbol n, subcarrier m)
level: each user echo contributes a rank-one term across antennas with phase
progression exp(j*2*pi*(n*T_o*doppler - m*delta_f*delay)), plus circular white
Gaussian noise of per-antenna variance N_o * bandwidth. Time-domain OFDM
modulation and matched filtering are intentionally not simulated; the
estimation chain consumes exactly this grid.
"""

import struct
from dataclasses import dataclass

import numpy as np

from bistatrack import _kernels
from bistatrack.arrays import steering_vector
from bistatrack.config import SystemParams
from bistatrack.constants import SPEED_OF_LIGHT


class ModelValidityError(ValueError):
    """Echo parameters violate the sampled-grid model assumptions."""


@dataclass(frozen=True)
class EchoParams:
    """One user's echo as seen by one receiver during one epoch."""

    h: complex            # reflection coefficient (bistatic radar equation)
    theta_rad: float      # true departure angle at the TX array
    phi_rad: float        # true arrival angle at the RX array
    tau_s: float          # total TX-target-RX delay
    doppler_hz: float     # bistatic Doppler of the sum range


@dataclass
class RxFrame:
    """Sampled echo grid: n_symbols x n_subcarriers vectors of length n_rx."""

    samples: np.ndarray   # shape (n_symbols, n_subcarriers, n_rx_antennas)
    epoch_index: int = 0
    receiver_index: int = 0

    @property
    def flat_samples(self) -> np.ndarray:
        """View of shape (n_symbols*n_subcarriers, n_rx_antennas)."""
        n, m, nr = self.samples.shape
        return self.samples.reshape(n * m, nr)


def reflection_coefficient(d1_m: float, d2_m: float, wavelength_m: float,
                           rcs_m2: float, rng: np.random.Generator) -> complex:
    """Complex reflection coefficient with uniform random phase.

    |h|^2 = wavelength^2 * rcs / ((4*pi)^3 * d1^2 * d2^2); the phase is
    redrawn per epoch and per receiver (block fading per measurement).
    """
    if d1_m <= 0 or d2_m <= 0:
        raise ValueError("node-target distances must be positive")
    mag = np.sqrt(wavelength_m**2 * rcs_m2 / ((4.0 * np.pi) ** 3 * d1_m**2 * d2_m**2))
    phase = rng.uniform(-np.pi, np.pi)
    return complex(mag * np.exp(1j * phase))


def bistatic_doppler(velocity, target, tx, rx, wavelength_m: float) -> float:
    """Doppler of the TX-target-RX sum range, positive when it shrinks.

    gamma = -(1/wavelength) * d(d1 + d2)/dt for a target moving at the given
    velocity with static nodes.
    """
    target = np.asarray(target, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    u_from_tx = target - np.asarray(tx, dtype=float)
    u_from_rx = target - np.asarray(rx, dtype=float)
    n1 = np.linalg.norm(u_from_tx)
    n2 = np.linalg.norm(u_from_rx)
    if n1 == 0 or n2 == 0:
        raise ValueError("target coincides with a node")
    sum_range_rate = float(np.dot(velocity, u_from_tx / n1 + u_from_rx / n2))
    return -sum_range_rate / wavelength_m


def phase_grid(tau_s: float, doppler_hz: float, params: SystemParams,
               dtype=np.complex128) -> np.ndarray:
    """exp(j*2*pi*(n*T_o*doppler - m*delta_f*tau)) over the (n, m) grid."""
    n_idx = np.arange(params.n_symbols)
    m_idx = np.arange(params.n_subcarriers)
    col = np.exp(2j * np.pi * params.symbol_period_s * doppler_hz * n_idx)
    row = np.exp(-2j * np.pi * params.subcarrier_spacing_hz * tau_s * m_idx)
    return np.outer(col, row).astype(dtype)


def _check_model_validity(echo: EchoParams, params: SystemParams) -> None:
    if echo.tau_s > params.cyclic_prefix_s:
        raise ModelValidityError(
            f"delay {echo.tau_s:.3e} s exceeds the cyclic prefix "
            f"{params.cyclic_prefix_s:.3e} s")
    if abs(echo.doppler_hz) >= params.subcarrier_spacing_hz / 10.0:
        raise ModelValidityError(
            f"Doppler {echo.doppler_hz:.3e} Hz too large for subcarrier "
            f"spacing {params.subcarrier_spacing_hz:.3e} Hz")


def synthesize_rx_frame(echoes, qpsk_grids, tx_beams, params: SystemParams,
                        rng, *, noise: bool = True, dtype=np.complex64,
                        cross_gains: bool = False, epoch_index: int = 0,
                        receiver_index: int = 0) -> RxFrame:
    """Synthesize the sampled multi-antenna echo grid for one receiver.

    ``echoes``, ``qpsk_grids`` and ``tx_beams`` are parallel per-user lists.
    By default each echo carries only its own beam's gain (the well-separated
    users approximation); ``cross_gains=True`` keeps every beam-user pair.

    The single-echo noisy complex64 case runs through the fused synthesis
    kernel; all paths consume the generator identically only within a given
    (echo count, noise, dtype) call signature.
    """
    n_rx = params.n_rx_antennas
    n, m = params.n_symbols, params.n_subcarriers
    for echo in echoes:
        _check_model_validity(echo, params)

    signals = []
    responses = []
    for k, echo in enumerate(echoes):
        a_tx = steering_vector(echo.theta_rad, params.n_tx_antennas)
        if cross_gains:
            mixed = np.zeros((n, m), dtype=np.complex128)
            for beam, grid in zip(tx_beams, qpsk_grids):
                mixed += np.vdot(a_tx, beam) * grid
        else:
            mixed = np.vdot(a_tx, tx_beams[k]) * qpsk_grids[k]
        signals.append((echo.h * mixed * phase_grid(echo.tau_s, echo.doppler_hz,
                                                    params)).ravel())
        responses.append(steering_vector(echo.phi_rad, n_rx))

    noise_scale = np.sqrt(params.noise_variance_w / 2.0)

    if noise and dtype == np.complex64 and len(echoes) == 1:
        flat = _kernels.synth_frame(rng.bit_generator,
                                    signals[0].astype(np.complex64),
                                    responses[0].astype(np.complex64),
                                    noise_scale)
    else:
        flat = np.zeros((n * m, n_rx), dtype=dtype)
        if noise:
            raw = rng.standard_normal((n * m, n_rx, 2),
                                      dtype=np.float32 if dtype == np.complex64
                                      else np.float64)
            flat += noise_scale * (raw[..., 0] + 1j * raw[..., 1])
        for sig, resp in zip(signals, responses):
            flat += np.multiply.outer(sig, resp).astype(dtype)

    return RxFrame(samples=flat.reshape(n, m, n_rx),
                   epoch_index=epoch_index, receiver_index=receiver_index)


_DUMP_MAGIC = b"BTFR"


def dump_frame(frame: RxFrame, path) -> None:
    """Write a frame as little-endian binary for offline debugging.

    Layout: magic b"BTFR", three uint32 LE (n_rx, n_symbols, n_subcarriers),
    then n_symbols*n_subcarriers*n_rx complex64 LE values in C order
    (symbol, subcarrier, antenna).
    """
    n, m, nr = frame.samples.shape
    with open(path, "wb") as fh:
        fh.write(_DUMP_MAGIC)
        fh.write(struct.pack("<III", nr, n, m))
        fh.write(np.ascontiguousarray(frame.samples, dtype="<c8").tobytes())


def load_frame(path) -> RxFrame:
    with open(path, "rb") as fh:
        if fh.read(4) != _DUMP_MAGIC:
            raise ValueError(f"{path}: not a frame dump")
        nr, n, m = struct.unpack("<III", fh.read(12))
        data = np.frombuffer(fh.read(), dtype="<c8")
    if data.size != n * m * nr:
        raise ValueError(f"{path}: truncated frame dump")
    return RxFrame(samples=data.reshape(n, m, nr).astype(np.complex64))


def delay_from_sum_range(sum_range_m: float) -> float:
    return sum_range_m / SPEED_OF_LIGHT
