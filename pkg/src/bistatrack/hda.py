"""Hybrid digital-analog front end: Slepian beamspace reduction.

A reduction matrix maps the antenna outputs onto a few RF chains. Its columns
are discrete prolate spheroidal (Slepian) sequences - the subspace that
maximizes energy concentration in a spatial-frequency band of half-width
thbw/n_antennas - modulated to center that band on the predicted target
bearing. Downstream estimation runs unchanged in the reduced space with
effective steering vectors U^H b(phi).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal.windows import dpss

from bistatrack.arrays import steering_vector


@dataclass(frozen=True)
class ReductionMatrix:
    """Orthonormal beamspace reduction (n_antennas x n_rf)."""

    u: np.ndarray
    center_bearing_rad: float
    thbw: float

    @property
    def n_rf(self) -> int:
        return self.u.shape[1]

    @property
    def is_identity(self) -> bool:
        return self.u.shape[0] == self.u.shape[1]


@lru_cache(maxsize=8)
def _base_slepians(n_antennas: int, n_rf: int, thbw: float) -> np.ndarray:
    return np.ascontiguousarray(dpss(n_antennas, thbw, Kmax=n_rf).T)


def build_reduction(center_rad: float, n_antennas: int, n_rf: int,
                    thbw: float) -> ReductionMatrix:
    """Slepian beamspace reduction centered on a bearing.

    Each Slepian sequence is modulated by the steering phase of the center
    angle and the set is re-orthonormalized. With n_rf == n_antennas the
    reduction carries no information change and degenerates to the identity,
    which keeps the fully digital pipeline bit-identical.
    """
    if not 1 <= n_rf <= n_antennas:
        raise ValueError("need 1 <= n_rf <= n_antennas")
    if thbw <= 0:
        raise ValueError("time-half-bandwidth product must be positive")
    if n_rf == n_antennas:
        return ReductionMatrix(u=np.eye(n_antennas, dtype=np.complex128),
                               center_bearing_rad=center_rad, thbw=thbw)
    base = _base_slepians(n_antennas, n_rf, thbw)
    modulated = base.astype(np.complex128) * steering_vector(
        center_rad, n_antennas)[:, None]
    q, _ = np.linalg.qr(modulated)
    return ReductionMatrix(u=q, center_bearing_rad=center_rad, thbw=thbw)


def reduce_frame(frame_flat: np.ndarray, reduction: ReductionMatrix) -> np.ndarray:
    """Project (n_samples, n_antennas) samples onto the RF chains: U^H y."""
    if frame_flat.shape[1] != reduction.u.shape[0]:
        raise ValueError("frame/antenna dimension mismatch")
    return frame_flat @ reduction.u.conj().astype(frame_flat.dtype)


def reduced_steering(reduction: ReductionMatrix, steering: np.ndarray) -> np.ndarray:
    """Effective steering rows in the reduced space: (U^H b)^T per grid row."""
    return steering @ reduction.u.conj()
