"""NumPy implementations of the hot loops, mirroring ``_core``.

Kept in lockstep with the compiled extension; equivalence is asserted in
the test suite and timed in benchmarks/bench_core.py.
"""

import numpy as np

_CHUNK = 128


def filon_sine(y, x0, dx, omegas):
    """Integrate y(x)*sin(omega*x) over the uniform grid, exactly for
    piecewise-linear y.  Returns one value per omega."""
    y = np.asarray(y, dtype=np.float64)
    omegas = np.asarray(omegas, dtype=np.float64)
    n = y.size
    out = np.zeros(omegas.size, dtype=np.float64)
    if n < 2:
        return out
    x = x0 + dx * np.arange(n)
    dy = np.diff(y)
    for lo in range(0, omegas.size, _CHUNK):
        w = omegas[lo:lo + _CHUNK]
        nz = w != 0.0
        wn = np.where(nz, w, 1.0)
        s = np.sin(np.outer(wn, x))
        boundary = (y[0] * np.cos(wn * x[0]) - y[-1] * np.cos(wn * x[-1])) / wn
        bulk = np.einsum("j,ij->i", dy, np.diff(s, axis=1)) / (wn * wn * dx)
        out[lo:lo + _CHUNK] = np.where(nz, boundary + bulk, 0.0)
    return out


def phase_exp_sum(coeff, omegas, ts):
    """S(t) = sum_k coeff[k] * exp(-i omega_k t) for every t."""
    coeff = np.asarray(coeff, dtype=np.float64)
    omegas = np.asarray(omegas, dtype=np.float64)
    ts = np.asarray(ts, dtype=np.float64)
    out = np.empty(ts.size, dtype=np.complex128)
    for lo in range(0, ts.size, _CHUNK):
        t = ts[lo:lo + _CHUNK]
        out[lo:lo + _CHUNK] = np.exp(-1j * np.outer(t, omegas)) @ coeff
    return out


def thermal_cos_sum(coeff, omegas, ts):
    """W(t) = sum_k coeff[k] * (1 - cos(omega_k t)) for every t."""
    coeff = np.asarray(coeff, dtype=np.float64)
    omegas = np.asarray(omegas, dtype=np.float64)
    ts = np.asarray(ts, dtype=np.float64)
    out = np.empty(ts.size, dtype=np.float64)
    for lo in range(0, ts.size, _CHUNK):
        t = ts[lo:lo + _CHUNK]
        out[lo:lo + _CHUNK] = (1.0 - np.cos(np.outer(t, omegas))) @ coeff
    return out
