"""Benchmark the compiled synthesis kernel against the NumPy fallback.

Times the hot kernel (noisy frame synthesis) and a representative full
receiver-epoch at the default problem size (64 symbols x 512 subcarriers x
64 antennas), then prints a comparison table. Run as:

    python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np
from threadpoolctl import threadpool_limits

from bistatrack import _kernels
from bistatrack.estimator import (
    default_music_grid,
    hermitian_eigendecomposition,
    music_aoa,
    sample_covariance,
    steering_grid_matrix,
)

N_SYMBOLS, N_SUBCARRIERS, N_ANT = 64, 512, 64


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times) * 1e3


def receiver_epoch(synth, bitgen, signal, response, grid, rows):
    frame = synth(bitgen, signal, response, 1e-6)
    r = sample_covariance(frame)
    eig = hermitian_eigendecomposition(r)
    est = music_aoa(r, 1, grid, 0.0, eig=eig, steering=rows)
    w = (response / np.linalg.norm(response)).astype(np.complex64)
    eq = (frame @ w.conj()).reshape(N_SYMBOLS, N_SUBCARRIERS)
    spectrum = np.fft.ifft(np.fft.fft(eq, axis=0), axis=1)
    np.abs(spectrum).argmax()
    return est


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    threadpool_limits(limits=1)
    rng = np.random.default_rng(0)
    signal = (rng.standard_normal(N_SYMBOLS * N_SUBCARRIERS)
              + 1j * rng.standard_normal(N_SYMBOLS * N_SUBCARRIERS)
              ).astype(np.complex64) * 1e-7
    response = (rng.standard_normal(N_ANT)
                + 1j * rng.standard_normal(N_ANT)).astype(np.complex64)
    grid = default_music_grid(0.02)
    rows = steering_grid_matrix(grid, N_ANT)
    bitgen = np.random.PCG64(1)

    backends = [("numpy fallback", _kernels.synth_frame_numpy)]
    if _kernels.BACKEND == "cython":
        backends.insert(0, ("compiled kernel", _kernels.synth_frame))
    else:
        print("compiled kernel not built; benchmarking the fallback only\n")

    print(f"frame: {N_SYMBOLS} x {N_SUBCARRIERS} symbols, {N_ANT} antennas "
          f"({N_SYMBOLS * N_SUBCARRIERS * N_ANT / 1e6:.1f} M complex samples)")
    print(f"{'backend':<16} {'synthesis':>12} {'receiver epoch':>16}")
    results = {}
    for name, synth in backends:
        t_synth = best_of(lambda: synth(bitgen, signal, response, 1e-6),
                          args.repeats)
        t_epoch = best_of(
            lambda: receiver_epoch(synth, bitgen, signal, response, grid, rows),
            args.repeats)
        results[name] = (t_synth, t_epoch)
        print(f"{name:<16} {t_synth:>9.1f} ms {t_epoch:>13.1f} ms")

    if len(results) == 2:
        (ks, ke), (ns, ne) = results.values()
        print(f"\nspeedup: synthesis {ns / ks:.2f}x, receiver epoch {ne / ke:.2f}x")


if __name__ == "__main__":
    main()
