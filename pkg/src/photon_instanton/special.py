"""Special functions for the dissipative phase-slip problem.

The central object is the retarded friction kernel of a junction chain
with dispersion omega_q = 2 v sin(q/2),

    K(tau) = v*Gamma0 * [ (L2(2 v |tau|) - I2(2 v |tau|)) / |tau|
                          + 4 v / (3 pi) ],

where L2 is the modified Struve function and I2 the modified Bessel
function.  The difference L2 - I2 suffers catastrophic cancellation for
large argument (both grow like e^x while the difference decays like a
power), so K is evaluated from two stable representations:

* moderate argument, v|tau| < X_SWITCH: the integral
      L2(x) - I2(x) = -(2 x^2 / (3 pi)) * Int_0^{pi/2}
                        exp(-x cos(t)) sin(t)^4 dt,
  done with fixed Gauss-Legendre quadrature;
* large argument: the asymptotic series
      K(tau) ~ Gamma0/(pi tau^2) * (1 - 3/x^2 - 15/x^4 - 315/x^6 - ...),
  x = 2 v |tau|, truncated before the smallest term.

Both branches are independently cross-checked in the tests against the
defining band integral K(tau) = (Gamma0/pi) * Int_0^{2v} w sqrt(1 -
(w/2v)^2) exp(-w |tau|) dw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special as sps
from scipy.linalg import eigh_tridiagonal

# Switch between the quadrature branch and the asymptotic series, in
# units of v*|tau| (Struve argument 2*v*|tau| = 50 at the seam).
X_SWITCH = 25.0

# Gauss-Legendre rule for the cancellation-free Struve-Bessel integral.
_GL_NODES, _GL_WEIGHTS = leggauss(260)
_GL_T = 0.25 * math.pi * (_GL_NODES + 1.0)
_GL_W = 0.25 * math.pi * _GL_WEIGHTS
_GL_COS = np.cos(_GL_T)
_GL_SIN4 = np.sin(_GL_T) ** 4

# Coefficients of the large-argument series in 1/x^2:
# K ~ Gamma0/(pi tau^2) * sum_n c_n / x^(2n), c_n = binom(1/2, n) (-1)^n (2n+1)!
_N_ASYMP = 9


def _asymp_coeffs() -> np.ndarray:
    c = np.empty(_N_ASYMP)
    binom = 1.0
    for n in range(_N_ASYMP):
        if n > 0:
            binom *= (0.5 - (n - 1)) / n
        c[n] = binom * (-1.0) ** n * math.factorial(2 * n + 1)
    return c


_ASYMP_C = _asymp_coeffs()


@dataclass(frozen=True)
class KernelParams:
    """Friction-kernel parameters: band edge 2*v and damping rate gamma0."""

    v: float
    gamma0: float

    def __post_init__(self) -> None:
        if self.v <= 0.0 or self.gamma0 < 0.0:
            raise ValueError("need v > 0 and gamma0 >= 0")


def struve_L2(x):
    """Modified Struve function L_2; thin wrapper with a domain check."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0.0):
        raise ValueError("struve_L2 requires x >= 0")
    return sps.modstruve(2, x)


def bessel_I2(x):
    """Modified Bessel function I_2 for real non-negative argument."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0.0):
        raise ValueError("bessel_I2 requires x >= 0")
    return sps.iv(2, x)


def _struve_bessel_diff(x: np.ndarray) -> np.ndarray:
    """L2(x) - I2(x) without cancellation, via its Laplace-type integral."""
    expm = np.exp(-np.outer(x, _GL_COS))
    integral = expm @ (_GL_W * _GL_SIN4)
    return -(2.0 / (3.0 * math.pi)) * x * x * integral


def kernel_K(tau, params: KernelParams):
    """Friction kernel K(tau); even in tau, K(0) = 4 v^2 Gamma0 / (3 pi)."""
    scalar = np.isscalar(tau) or np.ndim(tau) == 0
    tau = np.atleast_1d(np.asarray(tau, dtype=np.float64))
    v, g0 = params.v, params.gamma0
    at = np.abs(tau)
    out = np.empty_like(at)

    small = v * at < X_SWITCH
    zero = at == 0.0
    quad = small & ~zero
    if np.any(quad):
        tq = at[quad]
        diff = _struve_bessel_diff(2.0 * v * tq)
        out[quad] = v * g0 * (diff / tq + 4.0 * v / (3.0 * math.pi))
    if np.any(zero):
        out[zero] = 4.0 * v * v * g0 / (3.0 * math.pi)
    big = ~small
    if np.any(big):
        tb = at[big]
        x2 = 1.0 / (2.0 * v * tb) ** 2
        series = np.full_like(tb, _ASYMP_C[0])
        term = np.ones_like(tb)
        for c in _ASYMP_C[1:]:
            term = term * x2
            series += c * term
        out[big] = g0 / (math.pi * tb * tb) * series
    return float(out[0]) if scalar else out


def kernel_K_band_integral(tau, params: KernelParams, n_nodes: int = 400):
    """Oracle form of K(tau): direct quadrature over the photon band.

    Slow reference used for validation; exact statements K(0) =
    4 v^2 Gamma0/(3 pi) and Int K dtau = v Gamma0 hold for it as well.
    """
    scalar = np.isscalar(tau) or np.ndim(tau) == 0
    tau = np.atleast_1d(np.asarray(tau, dtype=np.float64))
    v, g0 = params.v, params.gamma0
    nodes, weights = leggauss(n_nodes)
    # substitute w = 2 v sin(theta), theta in (0, pi/2): the square root
    # becomes cos(theta)^2 and the integrand is smooth at the band edge
    theta = 0.25 * math.pi * (nodes + 1.0)
    wq = 2.0 * v * np.sin(theta)
    jac = 0.25 * math.pi * 2.0 * v * np.cos(theta)
    f = wq * np.cos(theta) * jac * weights
    out = np.exp(-np.abs(tau)[:, None] * wq[None, :]) @ f
    out *= g0 / math.pi
    return float(out[0]) if scalar else out


def kernel_K_fourier(omega, params: KernelParams):
    """Closed-form transform Int e^{-i w tau} K(tau) dtau.

    Equals v Gamma0 - Gamma0 |w| (sqrt(1 + (w/2v)^2) - |w|/(2v)); the
    friction "self-energy" v Gamma0 - K(w) reduces to Gamma0 |w| deep
    inside the band.
    """
    omega = np.asarray(omega, dtype=np.float64)
    v, g0 = params.v, params.gamma0
    a = np.abs(omega) / (2.0 * v)
    return v * g0 - g0 * np.abs(omega) * (np.sqrt(1.0 + a * a) - a)


def friction_fourier(omega, params: KernelParams):
    """Friction symbol v Gamma0 - K(omega); ~ Gamma0 |omega| for |omega| << v."""
    omega = np.asarray(omega, dtype=np.float64)
    v, g0 = params.v, params.gamma0
    a = np.abs(omega) / (2.0 * v)
    return g0 * np.abs(omega) * (np.sqrt(1.0 + a * a) - a)


def incomplete_gamma0(z):
    """Upper incomplete gamma Gamma(0, z) for complex z off the negative
    real axis; used for the 1/tau tail correction of sine transforms."""
    z = np.asarray(z)
    if np.any(z == 0.0):
        raise ValueError("Gamma(0, z) diverges at z = 0")
    return sps.exp1(z)


def mathieu_levels(chi: float, q_g: float, n_levels: int = 4,
                   tol: float = 1e-10) -> np.ndarray:
    """Lowest eigenvalues of H = E_C (2 n - q_g)^2 - (E_J/2)(|n><n+1| + h.c.)
    in units of E_C, with chi = E_J / (2 E_C) and gate charge q_g.

    The charge basis is truncated and enlarged until the requested levels
    are stable to ``tol``.
    """
    if chi < 0.0:
        raise ValueError("chi must be >= 0")
    n_cut = max(8, int(4.0 * math.sqrt(max(chi, 1.0))) + 8)
    prev = None
    for _ in range(60):
        n = np.arange(-n_cut, n_cut + 1)
        diag = (2.0 * n - q_g) ** 2
        off = -chi * np.ones(2 * n_cut)
        vals = eigh_tridiagonal(diag, off, select="i",
                                select_range=(0, n_levels - 1),
                                eigvals_only=True)
        if prev is not None and np.all(np.abs(vals - prev) <
                                       tol * np.maximum(1.0, np.abs(vals))):
            return vals
        prev = vals
        n_cut += 8
    raise RuntimeError("charge-basis diagonalization did not stabilize")


def bose_occupation(omega, T):
    """Bose-Einstein occupation for omega > 0; returns 0 at T = 0."""
    omega = np.asarray(omega, dtype=np.float64)
    if np.any(omega <= 0.0):
        raise ValueError("bose_occupation requires omega > 0")
    if T < 0.0:
        raise ValueError("temperature must be >= 0")
    if T == 0.0:
        return np.zeros_like(omega) if omega.shape else 0.0
    x = omega / T
    out = np.where(x < 700.0, 1.0 / np.expm1(np.minimum(x, 700.0)), 0.0)
    return out if out.shape else float(out)
