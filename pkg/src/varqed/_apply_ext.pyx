# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled matrix-free Hamiltonian apply (see ``_apply_py`` for the maths)."""
import numpy as np
cimport cython
from cython.parallel cimport prange
from libc.math cimport sqrt


cdef void _pass_one(const double complex[:, ::1] v, const int[:, ::1] up,
                    const int[:, ::1] down, const signed char[:, ::1] occ,
                    const double[::1] h, double complex[:, ::1] ann,
                    double complex[:, ::1] mix, int nthreads) noexcept nogil:
    # ann = A v, mix = D v + 2 A v
    cdef Py_ssize_t D = v.shape[0], Na = v.shape[1], M = h.shape[0]
    cdef Py_ssize_t t, i, a
    cdef int src
    cdef double w
    for t in prange(D, nogil=True, schedule="static", num_threads=nthreads):
        for a in range(Na):
            ann[t, a] = 0
            mix[t, a] = 0
        for i in range(M):
            src = up[t, i]
            if src >= 0:
                w = h[i] * sqrt(occ[t, i] + 1.0)
                for a in range(Na):
                    ann[t, a] = ann[t, a] + w * v[src, a]
            src = down[t, i]
            if src >= 0:
                w = h[i] * sqrt(<double>occ[t, i])
                for a in range(Na):
                    mix[t, a] = mix[t, a] + w * v[src, a]
        for a in range(Na):
            mix[t, a] = mix[t, a] + 2.0 * ann[t, a]


cdef void _pass_two(const double complex[:, ::1] v, const double[:, ::1] diag,
                    const int[:, ::1] up, const int[:, ::1] down,
                    const signed char[:, ::1] occ, const double[::1] h,
                    const double complex[:, ::1] p, double c_ap, double c_a2,
                    const double complex[:, ::1] ann, const double complex[:, ::1] mix,
                    double complex[:, ::1] out, int nthreads) noexcept nogil:
    cdef Py_ssize_t D = v.shape[0], Na = v.shape[1], M = h.shape[0]
    cdef Py_ssize_t t, i, a, b
    cdef int src
    cdef double w
    cdef double complex acc, xv
    for t in prange(D, nogil=True, schedule="static", num_threads=nthreads):
        for a in range(Na):
            acc = diag[t, a] * v[t, a]
            for b in range(Na):
                # X v = A v + D v = mix - ann
                xv = mix[t, b] - ann[t, b]
                acc = acc + c_ap * p[a, b] * xv
            out[t, a] = acc
        for i in range(M):
            src = up[t, i]
            if src >= 0:
                w = c_a2 * h[i] * sqrt(occ[t, i] + 1.0)
                for a in range(Na):
                    out[t, a] = out[t, a] + w * ann[src, a]
            src = down[t, i]
            if src >= 0:
                w = c_a2 * h[i] * sqrt(<double>occ[t, i])
                for a in range(Na):
                    out[t, a] = out[t, a] + w * mix[src, a]


def apply_hamiltonian(v, diag, raise_index, lower_index, occupations, h, momentum,
                      double c_ap, double c_a2, int threads=1):
    cdef double complex[:, ::1] vv = np.ascontiguousarray(v, dtype=np.complex128)
    cdef Py_ssize_t D = vv.shape[0], Na = vv.shape[1]
    ann = np.empty((D, Na), dtype=np.complex128)
    mix = np.empty((D, Na), dtype=np.complex128)
    out = np.empty((D, Na), dtype=np.complex128)
    cdef double complex[:, ::1] ann_v = ann, mix_v = mix, out_v = out
    cdef const double[:, ::1] diag_v = np.ascontiguousarray(diag, dtype=np.float64)
    cdef const int[:, ::1] up_v = np.ascontiguousarray(raise_index, dtype=np.int32)
    cdef const int[:, ::1] down_v = np.ascontiguousarray(lower_index, dtype=np.int32)
    cdef const signed char[:, ::1] occ_v = np.ascontiguousarray(occupations, dtype=np.int8)
    cdef const double[::1] h_v = np.ascontiguousarray(h, dtype=np.float64)
    cdef const double complex[:, ::1] p_v = np.ascontiguousarray(momentum, dtype=np.complex128)
    with nogil:
        _pass_one(vv, up_v, down_v, occ_v, h_v, ann_v, mix_v, threads)
        _pass_two(vv, diag_v, up_v, down_v, occ_v, h_v, p_v, c_ap, c_a2,
                  ann_v, mix_v, out_v, threads)
    return out
