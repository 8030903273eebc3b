"""Half-wavelength ULA steering vectors, unit-norm beamformers, QPSK grids."""

import numpy as np

# Fixed QPSK constellation (unit power, Gray mapping irrelevant here: the
# receivers know the transmitted data, so any fixed 4-point mapping works).
QPSK_CONSTELLATION = np.exp(1j * (np.pi / 4.0 + np.pi / 2.0 * np.arange(4)))


def steering_vector(angle_rad: float, n: int) -> np.ndarray:
    """Steering vector of an n-element half-wavelength ULA.

    Element i is exp(j*pi*(i-1)*sin(angle)).
    """
    if n < 1:
        raise ValueError("array needs at least one element")
    return np.exp(1j * np.pi * np.arange(n) * np.sin(angle_rad))


def make_beamformer(angle_rad: float, n: int) -> np.ndarray:
    """Unit-norm beam pointing at the given angle: a(angle)/sqrt(n)."""
    return steering_vector(angle_rad, n) / np.sqrt(n)


def beam_gain(angle_a: float, angle_b: float, n: int) -> float:
    """|a(angle_a)^H f(angle_b)|^2, the array gain under pointing mismatch."""
    a = steering_vector(angle_a, n)
    f = make_beamformer(angle_b, n)
    return float(np.abs(np.vdot(a, f)) ** 2)


def generate_qpsk_grid(n_symbols: int, n_subcarriers: int, power_w: float,
                       rng: np.random.Generator) -> np.ndarray:
    """I.i.d. uniform QPSK symbols on an (n_symbols, n_subcarriers) grid.

    Every entry has |symbol|^2 == power_w exactly; reproducible under the
    caller's generator.
    """
    if power_w <= 0:
        raise ValueError("symbol power must be positive")
    idx = rng.integers(0, 4, size=(n_symbols, n_subcarriers))
    return np.sqrt(power_w) * QPSK_CONSTELLATION[idx]
