"""Per-receiver estimation chain.

Sample covariance over all grid samples, subspace (MUSIC) arrival-angle
estimation with prediction-guided peak association, receive beamforming with
known-data removal, 2-D delay-Doppler peak search, and the bistatic position
solve. The solve uses the interior-angle (cos psi) form of the bistatic
equation so it is independent of array orientation conventions; it reduces to
the familiar sin(phi) form when the broadside is perpendicular to the
baseline.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import blas as _blas

from bistatrack.arrays import steering_vector
from bistatrack.constants import SPEED_OF_LIGHT
from bistatrack.geometry import wrap_angle


def _flat_samples(frame) -> np.ndarray:
    """(n_samples, n_antennas) view of an RxFrame or sample array."""
    flat = np.asarray(frame) if isinstance(frame, np.ndarray) else frame.flat_samples
    if flat.ndim == 3:
        flat = flat.reshape(-1, flat.shape[-1])
    return flat


def sample_covariance(frame) -> np.ndarray:
    """(1/NM) * sum of y y^H over the whole grid, as complex128 Hermitian."""
    flat = _flat_samples(frame)
    n_samples = flat.shape[0]
    herk = _blas.cherk if flat.dtype == np.complex64 else _blas.zherk
    lower = herk(1.0 / n_samples, flat.T, lower=1)
    r = np.tril(lower) + np.tril(lower, -1).conj().T
    return r.astype(np.complex128)


@dataclass(frozen=True)
class EigenDecomposition:
    """Descending eigenvalues and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def hermitian_eigendecomposition(r: np.ndarray) -> EigenDecomposition:
    """Full Hermitian eigendecomposition, eigenvalues descending."""
    r = np.asarray(r)
    scale = np.linalg.norm(r)
    if scale > 0 and np.linalg.norm(r - r.conj().T) > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian")
    values, vectors = np.linalg.eigh(r)
    return EigenDecomposition(eigenvalues=values[::-1].copy(),
                              eigenvectors=np.ascontiguousarray(vectors[:, ::-1]))


_GRID_CACHE = {}


def default_music_grid(spacing_deg: float = 0.02) -> np.ndarray:
    """Uniform scan grid over the ULA's unambiguous (-90, 90) degree sector."""
    half = 90.0 - spacing_deg
    n_side = int(math.floor(half / spacing_deg))
    return np.radians(np.arange(-n_side, n_side + 1) * spacing_deg)


def steering_grid_matrix(grid_rad: np.ndarray, n_antennas: int) -> np.ndarray:
    """Cached (n_angles, n_antennas) steering matrix for a scan grid."""
    key = (n_antennas, grid_rad.shape[0],
           round(float(grid_rad[0]), 12), round(float(grid_rad[-1]), 12))
    mat = _GRID_CACHE.get(key)
    if mat is None:
        mat = np.exp(1j * np.pi * np.outer(np.sin(grid_rad), np.arange(n_antennas)))
        _GRID_CACHE[key] = mat
    return mat


def _steering_norms(steering: np.ndarray) -> np.ndarray:
    """Per-row squared norms of a scan matrix, cached for the shared grids."""
    key = ("norms", id(steering), steering.shape)
    norms = _GRID_CACHE.get(key)
    if norms is None:
        norms = np.einsum("gi,gi->g", steering, steering.conj()).real
        if any(steering is m for m in _GRID_CACHE.values()):
            _GRID_CACHE[key] = norms
    return norms


@dataclass(frozen=True)
class MusicEstimate:
    aoa_rad: float
    valid: bool
    peak_value: float
    spectrum: np.ndarray | None = None


def music_pseudospectrum(eig: EigenDecomposition, n_sources: int,
                         steering: np.ndarray) -> np.ndarray:
    """MUSIC spectrum ||b||^2 / ||E_n^H b||^2 evaluated on steering rows.

    The norm-relative form keeps the spectrum meaningful in reduced
    (beamspace) front ends where the steering norm varies across angles.
    """
    signal_basis = eig.eigenvectors[:, :n_sources]
    total = _steering_norms(steering)
    # |E_s^H b|^2 row-wise; conjugating the small basis avoids copying the grid
    in_signal = np.abs(steering @ signal_basis.conj()) ** 2
    noise_power = np.maximum(total - in_signal.sum(axis=1), 1e-300)
    return total / noise_power


def _local_maxima(values: np.ndarray) -> np.ndarray:
    interior = (values[1:-1] > values[:-2]) & (values[1:-1] >= values[2:])
    return np.nonzero(interior)[0] + 1


def music_aoa(r: np.ndarray, n_sources: int, grid_rad: np.ndarray,
              predicted_aoa_rad: float, *, eig: EigenDecomposition | None = None,
              steering: np.ndarray | None = None) -> MusicEstimate:
    """MUSIC arrival angle: prediction-guided association of spectrum peaks.

    The n_sources tallest interior local maxima are the candidate arrivals;
    among them the one nearest the prediction wins (ties break toward the
    larger spectrum value). Quadratic interpolation over the peak's three
    grid points refines the estimate below the grid spacing. Returns an
    invalid estimate when the spectrum has no interior local maximum.
    """
    if eig is None:
        eig = hermitian_eigendecomposition(r)
    if n_sources >= eig.eigenvalues.shape[0]:
        raise ValueError("n_sources must be below the space dimension")
    if steering is None:
        steering = steering_grid_matrix(grid_rad, eig.eigenvectors.shape[0])
    spectrum = music_pseudospectrum(eig, n_sources, steering)

    peaks = _local_maxima(spectrum)
    if peaks.size == 0:
        return MusicEstimate(aoa_rad=float("nan"), valid=False, peak_value=0.0)
    if peaks.size > n_sources:
        peaks = peaks[np.argsort(spectrum[peaks])[-n_sources:]]

    # nearest to the prediction; ties broken by the larger spectrum value
    distance = np.abs(grid_rad[peaks] - predicted_aoa_rad)
    order = np.lexsort((-spectrum[peaks], distance))
    best = peaks[order[0]]

    left, mid, right = spectrum[best - 1], spectrum[best], spectrum[best + 1]
    denom = left - 2.0 * mid + right
    offset = 0.0 if denom == 0.0 else 0.5 * (left - right) / denom
    offset = float(np.clip(offset, -0.5, 0.5))
    step = grid_rad[best + 1] - grid_rad[best] if offset >= 0 \
        else grid_rad[best] - grid_rad[best - 1]
    return MusicEstimate(aoa_rad=float(grid_rad[best] + offset * step),
                         valid=True, peak_value=float(mid))


def equalized_grid(frame, w: np.ndarray, qpsk_symbols: np.ndarray) -> np.ndarray:
    """Beamform with w and strip the known data: r[n,m] = w^H y[n,m] / zeta[n,m]."""
    beamformed = _flat_samples(frame) @ w.conj()
    return beamformed.reshape(qpsk_symbols.shape) / qpsk_symbols


@dataclass(frozen=True)
class DelayDopplerEstimate:
    tau_hat_s: float
    gamma_hat_hz: float
    peak_power: float
    grid_indices: tuple
    at_grid_edge: bool


def delay_doppler_estimate(equalized: np.ndarray, oversampling: int,
                           subcarrier_spacing_hz: float,
                           symbol_period_s: float, *,
                           min_tau_s: float | None = None,
                           max_tau_s: float | None = None,
                           max_doppler_hz: float | None = None) -> DelayDopplerEstimate:
    """Peak of the 2-D delay-Doppler map of the equalized grid.

    Doppler axis: forward FFT across symbols, zero-padded to S*N. Delay axis:
    inverse FFT across subcarriers, zero-padded to S*M. The delay estimate
    lives in [0, 1/delta_f); Doppler wraps to (-1/(2*T_o), 1/(2*T_o)].

    ``min_tau_s``/``max_tau_s``/``max_doppler_hz`` restrict the peak search
    to the physically possible window (sum range between the baseline length
    and the maximum range, Doppler within the maximum target speed), which
    keeps the estimate on the true peak through deep fades instead of losing
    it to a noise bin elsewhere on the map.
    """
    if oversampling < 1 or int(oversampling) != oversampling:
        raise ValueError("oversampling factor must be a positive integer")
    n, m = equalized.shape
    sn, sm = oversampling * n, oversampling * m
    spectrum = np.fft.fft(equalized, n=sn, axis=0)
    spectrum = np.fft.ifft(spectrum, n=sm, axis=1)
    power = np.abs(spectrum) ** 2

    doppler_bins = np.arange(sn)
    doppler_bins[doppler_bins > sn // 2] -= sn
    if max_doppler_hz is not None:
        blocked = np.abs(doppler_bins / (sn * symbol_period_s)) > max_doppler_hz
        power[blocked, :] = 0.0
    if min_tau_s is not None:
        q_min = int(np.ceil(min_tau_s * sm * subcarrier_spacing_hz))
        power[:, :q_min] = 0.0
    if max_tau_s is not None:
        q_max = int(np.floor(max_tau_s * sm * subcarrier_spacing_hz))
        power[:, q_max + 1:] = 0.0

    p, q = np.unravel_index(np.argmax(power), power.shape)
    gamma = doppler_bins[p] / (sn * symbol_period_s)
    tau = q / (sm * subcarrier_spacing_hz)
    edge = (q == sm - 1) or (p == sn // 2)
    return DelayDopplerEstimate(tau_hat_s=float(tau), gamma_hat_hz=float(gamma),
                                peak_power=float(power[p, q]),
                                grid_indices=(int(p), int(q)), at_grid_edge=edge)


@dataclass(frozen=True)
class PositionSolve:
    """Bistatic position solve output; invalid solves carry a reason."""

    position: np.ndarray | None
    d2_m: float
    valid: bool
    reason: str | None = None


def bistatic_position(tau_s: float, phi_rad: float, rx_position, rx_broadside: float,
                      tx_position) -> PositionSolve:
    """Invert (delay, arrival angle) into a target position.

    d2 = (sum_range^2 - baseline^2) / (2*(sum_range - baseline*cos(psi))) with
    psi the angle at the receiver between the baseline and the estimated
    arrival direction; the target then sits at rx + d2 * arrival direction.
    """
    rx = np.asarray(rx_position, dtype=float)
    tx = np.asarray(tx_position, dtype=float)
    sum_range = SPEED_OF_LIGHT * tau_s
    baseline = float(np.linalg.norm(tx - rx))

    if sum_range <= baseline:
        return PositionSolve(None, float("nan"), False, "sum range within baseline")

    arrival_bearing = rx_broadside + phi_rad
    u = np.array([math.cos(arrival_bearing), math.sin(arrival_bearing)])
    cos_psi = float(np.dot((tx - rx) / baseline, u))
    denom = sum_range - baseline * cos_psi
    if denom < 1e-6 * sum_range:
        return PositionSolve(None, float("nan"), False, "baseline singularity")

    d2 = 0.5 * (sum_range**2 - baseline**2) / denom
    return PositionSolve(position=rx + d2 * u, d2_m=float(d2), valid=True)


def aod_from_position(position, tx_position, tx_broadside: float) -> float:
    """Departure angle at the TX array implied by a (predicted) position."""
    d = np.asarray(position, dtype=float) - np.asarray(tx_position, dtype=float)
    return float(np.arcsin(np.sin(wrap_angle(math.atan2(d[1], d[0]) - tx_broadside))))
