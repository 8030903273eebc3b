# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Fused single-pass frame synthesis (noise fill + rank-one signal add).

Draws float32 normals straight from the caller's bit generator with the same
ziggurat sampler NumPy uses, so the noise stream is bit-identical to the
NumPy fallback's. The scale-and-add pass runs on flat float views, which the
C compiler vectorizes.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_standard_normal_fill_f

cnp.import_array()


def synth_frame(bit_generator,
                const float complex[::1] signal_flat,
                const float complex[::1] rx_response,
                float noise_scale,
                float complex[:, ::1] out):
    """Fill ``out`` (n_samples, n_antennas) with noise + outer-product signal."""
    cdef bitgen_t *state = <bitgen_t *> PyCapsule_GetPointer(
        bit_generator.capsule, "BitGenerator")
    cdef Py_ssize_t n_samples = signal_flat.shape[0]
    cdef Py_ssize_t n_ant = rx_response.shape[0]
    if out.shape[0] != n_samples or out.shape[1] != n_ant:
        raise ValueError("output buffer shape mismatch")

    cdef float *buf = <float *> &out[0, 0]
    cdef const float *b = <const float *> &rx_response[0]
    cdef const float *sig = <const float *> &signal_flat[0]
    cdef Py_ssize_t s, i
    cdef float sr, si, re, im
    cdef float *row
    with nogil:
        random_standard_normal_fill_f(state, 2 * n_samples * n_ant, buf)
        for s in range(n_samples):
            sr = sig[2 * s]
            si = sig[2 * s + 1]
            row = buf + 2 * s * n_ant
            for i in range(n_ant):
                re = sr * b[2 * i] - si * b[2 * i + 1]
                im = sr * b[2 * i + 1] + si * b[2 * i]
                row[2 * i] = noise_scale * row[2 * i] + re
                row[2 * i + 1] = noise_scale * row[2 * i + 1] + im
