"""Hot-loop kernels: compiled extension when available, NumPy otherwise.

The single hot kernel is per-epoch echo-frame synthesis (white-noise fill plus
a rank-one signal term over n_symbols*n_subcarriers*n_antennas samples). The
compiled path fuses those steps into one pass; both paths draw from the same
bit generator in the same order, so they produce identical streams.

Set BISTATRACK_BACKEND=numpy to force the fallback (used by the benchmark).
"""

import importlib
import os

import numpy as np

_fast = None
if os.environ.get("BISTATRACK_BACKEND", "").lower() != "numpy":
    try:
        _fast = importlib.import_module("bistatrack._kernels._fast")
    except ImportError:
        _fast = None

BACKEND = "cython" if _fast is not None else "numpy"


def synth_frame_numpy(bit_generator, signal_flat: np.ndarray, rx_response: np.ndarray,
                      noise_scale: float) -> np.ndarray:
    """Reference implementation: frame[s, i] = noise + signal_flat[s]*rx_response[i]."""
    n_samples = signal_flat.shape[0]
    n_ant = rx_response.shape[0]
    gen = np.random.Generator(bit_generator)
    raw = gen.standard_normal(2 * n_samples * n_ant, dtype=np.float32)
    frame = raw.view(np.complex64).reshape(n_samples, n_ant)
    frame *= np.float32(noise_scale)
    frame += np.multiply.outer(signal_flat.astype(np.complex64),
                               rx_response.astype(np.complex64))
    return frame


def synth_frame(bit_generator, signal_flat: np.ndarray, rx_response: np.ndarray,
                noise_scale: float) -> np.ndarray:
    """Synthesize one noisy single-echo frame, shape (n_samples, n_antennas).

    Consumes 2*n_samples*n_antennas float32 normals from bit_generator.
    """
    if _fast is not None:
        out = np.empty((signal_flat.shape[0], rx_response.shape[0]), dtype=np.complex64)
        _fast.synth_frame(bit_generator,
                          np.ascontiguousarray(signal_flat, dtype=np.complex64),
                          np.ascontiguousarray(rx_response, dtype=np.complex64),
                          np.float32(noise_scale), out)
        return out
    return synth_frame_numpy(bit_generator, signal_flat, rx_response, noise_scale)
