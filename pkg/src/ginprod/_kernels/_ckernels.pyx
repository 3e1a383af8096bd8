# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp

cdef extern from "complex.h" nogil:
    double complex clog(double complex z)
    double creal(double complex z)

cdef extern from "math.h" nogil:
    double exp(double x)
    double cos(double x)

cnp.import_array()

cdef double LANCZOS_G = 7.0
cdef double HALF_LOG_2PI = 0.91893853320467274178
cdef double[9] COEF
COEF[:] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
]


cdef inline double complex _loggamma(double complex z) nogil:
    cdef double complex shift = 0
    cdef double complex acc, x, t
    cdef int i
    while creal(z) < 0.5:
        shift = shift + clog(z)
        z = z + 1.0
    x = z - 1.0
    acc = COEF[0]
    for i in range(1, 9):
        acc = acc + COEF[i] / (x + i)
    t = x + LANCZOS_G + 0.5
    return HALF_LOG_2PI + (x + 0.5) * clog(t) - t + clog(acc) - shift


def loggamma(z):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zz = np.ascontiguousarray(
        np.ravel(z), dtype=np.complex128)
    cdef Py_ssize_t n = zz.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(n, dtype=np.complex128)
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            out[i] = _loggamma(zz[i])
    return out.reshape(np.shape(z))


def shifted_real_exp_sum(g, weights, double pivot):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] gg = np.ascontiguousarray(
        np.ravel(g), dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ww = np.ascontiguousarray(
        np.ravel(weights), dtype=np.float64)
    cdef Py_ssize_t i, n = gg.shape[0]
    cdef double total = 0.0
    with nogil:
        for i in range(n):
            total += ww[i] * exp(gg[i].real - pivot) * cos(gg[i].imag)
    return total
