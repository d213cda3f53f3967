# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: oscillatory quadrature and mode phase sums.

The pure-python module ``_kernels_py`` provides the same interface; the
active implementation is chosen in ``_backend``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


def filon_sine(double[::1] y, double x0, double dx, double[::1] omegas):
    """Integrate y(x)*sin(omega*x) over the uniform grid, exactly for
    piecewise-linear y.  Returns one value per omega."""
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t m = omegas.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, j
    cdef double w, acc, s_prev, s_cur, x, xe
    if n < 2:
        out[:] = 0.0
        return out
    xe = x0 + (n - 1) * dx
    for i in range(m):
        w = omegas[i]
        if w == 0.0:
            ov[i] = 0.0
            continue
        acc = 0.0
        s_prev = sin(w * x0)
        for j in range(1, n):
            x = x0 + j * dx
            s_cur = sin(w * x)
            acc += (y[j] - y[j - 1]) * (s_cur - s_prev)
            s_prev = s_cur
        ov[i] = (y[0] * cos(w * x0) - y[n - 1] * cos(w * xe)) / w + acc / (w * w * dx)
    return out


def phase_exp_sum(double[::1] coeff, double[::1] omegas, double[::1] ts):
    """S(t) = sum_k coeff[k] * exp(-i omega_k t) for every t."""
    cdef Py_ssize_t nk = coeff.shape[0]
    cdef Py_ssize_t nt = ts.shape[0]
    cdef cnp.ndarray[complex, ndim=1] out = np.empty(nt, dtype=np.complex128)
    cdef complex[::1] ov = out
    cdef Py_ssize_t i, k
    cdef double re, im, ph, t
    for i in range(nt):
        t = ts[i]
        re = 0.0
        im = 0.0
        for k in range(nk):
            ph = omegas[k] * t
            re += coeff[k] * cos(ph)
            im -= coeff[k] * sin(ph)
        ov[i] = re + 1j * im
    return out


def thermal_cos_sum(double[::1] coeff, double[::1] omegas, double[::1] ts):
    """W(t) = sum_k coeff[k] * (1 - cos(omega_k t)) for every t."""
    cdef Py_ssize_t nk = coeff.shape[0]
    cdef Py_ssize_t nt = ts.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(nt, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, k
    cdef double acc, t
    for i in range(nt):
        t = ts[i]
        acc = 0.0
        for k in range(nk):
            acc += coeff[k] * (1.0 - cos(omegas[k] * t))
        ov[i] = acc
    return out
