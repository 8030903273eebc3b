"""Measurement-error modeling: CRLB weights, SNR estimation, GDOP.

The delay and arrival-angle error variances are Cramer-Rao style expressions
driven by SNR; mapped through the linearized measurement-to-position Jacobian
they give the per-receiver positional covariance whose root-trace is the
geometric dilution of precision (GDOP). These covariances weight receiver
selection and fusion, so relative consistency across receivers is what
matters.
"""

from dataclasses import dataclass

import numpy as np

from bistatrack.constants import SPEED_OF_LIGHT
from bistatrack.estimator import EigenDecomposition

COND_LIMIT = 1e8


@dataclass(frozen=True)
class SnrEstimates:
    rho0_est: float    # per-antenna SNR, linear
    rho1_est: float    # beamformed SNR, linear
    sigma2_est: float  # noise variance, W


def crlb_aoa(rho0: float, n_symbols: int, n_subcarriers: int, n_antennas: int,
             *, spatial_correction: bool = False, aoa_rad: float = 0.0) -> float:
    """Arrival-angle error variance bound (rad^2).

    C_phi = (1/(rho0*N*M)) * (1 + 1/(N_r*rho0)) * 6/(N_r*(N_r^2-1)).

    The optional cos^2 correction converts the electrical-angle bound to a
    spatial-angle bound; the uncorrected form is the default weighting.
    """
    if rho0 <= 0:
        raise ValueError("rho0 must be positive")
    grid = n_symbols * n_subcarriers
    c_phi = (1.0 / (rho0 * grid)) * (1.0 + 1.0 / (n_antennas * rho0)) \
        * 6.0 / (n_antennas * (n_antennas**2 - 1.0))
    if spatial_correction:
        c_phi /= np.cos(aoa_rad) ** 2
    return float(c_phi)


def crlb_delay(rho1: float, oversampling: int, n_subcarriers: int,
               subcarrier_spacing_hz: float, n_symbols: int,
               symbol_period_s: float) -> float:
    """Delay error variance bound: 3/(2*pi^2*S^2*(M*df)^2*rho1*N*T_o)."""
    if rho1 <= 0:
        raise ValueError("rho1 must be positive")
    bandwidth = n_subcarriers * subcarrier_spacing_hz
    return float(3.0 / (2.0 * np.pi**2 * oversampling**2 * bandwidth**2
                        * rho1 * n_symbols * symbol_period_s))


def estimate_snrs(eig: EigenDecomposition, equalized: np.ndarray,
                  tx_power_w: float, n_users: int, *,
                  n_sources: int = 1) -> SnrEstimates:
    """Data-driven SNR estimates from the eigenvalues and equalized samples.

    The noise variance is the mean of the trailing eigenvalues, the
    per-antenna SNR is lambda_1/(dim * sigma2), and the beamformed SNR uses
    the squared mean magnitude of the data-stripped beamformed samples.
    """
    values = eig.eigenvalues
    dim = values.shape[0]
    if dim < 2:
        raise ValueError("need at least two eigenvalues")
    if values[0] <= 0:
        raise ValueError("non-positive covariance")
    # noiseless frames leave the trailing eigenvalues at rounding level; the
    # floor keeps the estimate finite without affecting noisy operation
    sigma2 = float(max(np.mean(values[n_sources:]),
                       values[0] * np.finfo(np.float64).eps))
    rho0 = float(values[0] / (dim * sigma2))
    mean_mag = float(np.mean(np.abs(equalized)))
    rho1 = tx_power_w / (n_users * sigma2) * mean_mag**2
    return SnrEstimates(rho0_est=rho0, rho1_est=rho1, sigma2_est=sigma2)


def jacobian(target_est, tx, rx) -> np.ndarray:
    """Gradient of (delay, arrival bearing) with respect to target position.

    Row 0: grad tau = (u_tx->t + u_rx->t)/c; row 1: grad phi = (-dy, dx)/d2^2.
    The array broadside is a constant offset with zero gradient.
    """
    target_est = np.asarray(target_est, dtype=float)
    d_tx = target_est - np.asarray(tx, dtype=float)
    d_rx = target_est - np.asarray(rx, dtype=float)
    r1 = np.linalg.norm(d_tx)
    r2 = np.linalg.norm(d_rx)
    if r1 == 0 or r2 == 0:
        raise ValueError("target coincides with a node")
    grad_tau = (d_tx / r1 + d_rx / r2) / SPEED_OF_LIGHT
    grad_phi = np.array([-d_rx[1], d_rx[0]]) / r2**2
    return np.vstack([grad_tau, grad_phi])


@dataclass(frozen=True)
class PositionCovariance:
    sigma: np.ndarray
    jacobian: np.ndarray
    gdop: float
    well_conditioned: bool


def position_covariance(jac: np.ndarray, c_tau: float, c_phi: float) -> PositionCovariance:
    """Positional covariance B*C_Z*B^T with B = (J^T J)^-1 J^T, plus GDOP.

    When cond(J) exceeds COND_LIMIT the covariance is unbounded for practical
    purposes and the result is flagged so the caller can invalidate the
    estimate.
    """
    cond = np.linalg.cond(jac)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        return PositionCovariance(sigma=np.full((2, 2), np.inf), jacobian=jac,
                                  gdop=float("inf"), well_conditioned=False)
    # (J^T J)^-1 J^T reduces to J^-1 for square J; inverting directly avoids
    # squaring the condition number
    b = np.linalg.inv(jac) if jac.shape[0] == jac.shape[1] \
        else np.linalg.solve(jac.T @ jac, jac.T)
    sigma = b @ np.diag([c_tau, c_phi]) @ b.T
    return PositionCovariance(sigma=sigma, jacobian=jac,
                              gdop=float(np.sqrt(np.trace(sigma))),
                              well_conditioned=True)
