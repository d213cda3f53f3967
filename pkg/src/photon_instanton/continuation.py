"""Analytic continuation of the kink distortion and per-mode overlap
factors.

The Matsubara data delta_phi(i w) carries a simple pole structure
inherited from the bare kink, phi^(0)(i w) = pi / (i w cosh(pi w / 2
omega0)).  Dividing it out leaves the smooth, even, real bracket

    B(w) = (w^2 + Gamma0 w + omega0^2) / (w^2 + omega0^2)
           * (1 + delta_phi(i w) / phi^(0)(i w)),

which is fitted by an even polynomial in w/omega0 and continued to the
real axis by w -> -i w_k.  The pole of the bare factor is continued in
closed form, so the mode factors

    f_k = f_k^apprx * sum_l alpha_l (-1)^(l/2) w_k^l

stay finite and continuous through the resonance w_k = omega0.

A free least-squares fit of B is ill-conditioned as a continuation
problem: B has genuine poles at w^2 ~ -(1.7 omega0)^2, so polynomial
orders p = 4..8 disagree at the few-percent level on the real axis
near resonance.  The fits are therefore pinned by exact real-axis
anchor values computed in the time domain (``bracket_anchor_values``),
after which all orders coincide at the anchors by construction.

The reference factor f_k^apprx (the linearized-trajectory result) is

    f_k^apprx = sqrt(2 Delta / (z w_k)) * (omega0^2 - w_k^2)
                / [cos(pi w_k / 2 omega0)
                   * sqrt((omega0^2 - w_k^2)^2 + (Gamma0 w_k)^2)],

with the removable 0/0 at w_k = omega0 evaluated by a guarded series
(the limit is (4 omega0 / pi Gamma0) sqrt(2 Delta / z omega0)).  It
genuinely diverges at w_k = 3 omega0, far above the frequencies that
enter any rate.

The action-entering factors f~_k need no continuation: they are built
directly from the Matsubara ratio r = delta_phi / phi^(0) at w = w_k,

    f~_k = f~_k^apprx * sqrt( (w_k^2 + omega0^2)/(Gamma0 w_k) r^2
                              + (1 + r)^2 ),
    f~_k^apprx = sqrt(2 Delta / (z w_k)) / cosh(pi w_k / 2 omega0).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline
from scipy.special import exp1

from ._backend import filon_sine
from .device import CircuitParams, build_mode_grid
from .solver import (SpectralFunction, Trajectory, matsubara_transform,
                     phi0_bare, phi0_bare_matsubara)

# half width (in units of omega0) of the guarded window around the
# removable singularity of f^apprx at w_k = omega0
_RES_EPS = 1e-3


@dataclass(frozen=True)
class ContinuationFit:
    """Even-polynomial fit of the bracket B(w) in x = w/omega0.

    ``alphas[l]`` multiplies x^(2l); continuation to the real axis sends
    x^(2l) -> (-1)^l x^(2l).
    """

    p: int
    alphas: np.ndarray
    omega0: float
    window: tuple[float, float]
    rms_residual: float

    def __post_init__(self) -> None:
        if self.p % 2 != 0 or not 4 <= self.p <= 10:
            raise ValueError("order p must be even, 4 <= p <= 10")
        if not (0.5 <= self.alphas[0] <= 1.5):
            warnings.warn(
                f"alpha0 = {self.alphas[0]:.3f} outside [0.5, 1.5]; the "
                "bracket fit is suspect (weak-coupling value is 1)",
                stacklevel=3)

    def evaluate_imag_axis(self, omega) -> np.ndarray:
        x2 = (np.asarray(omega, dtype=np.float64) / self.omega0) ** 2
        return np.polynomial.polynomial.polyval(x2, self.alphas)

    def evaluate_real_axis(self, omega) -> np.ndarray:
        x2 = (np.asarray(omega, dtype=np.float64) / self.omega0) ** 2
        signed = self.alphas * (-1.0) ** np.arange(self.alphas.size)
        return np.polynomial.polynomial.polyval(x2, signed)


@dataclass(frozen=True)
class RationalFit:
    """Degree-(4/4) rational cross-check fit, even in w: B ~ P(x^2)/Q(x^2)
    with Q(0) = 1; continuation sends x^2 -> -x^2 in both."""

    num: np.ndarray
    den: np.ndarray
    omega0: float

    def _eval(self, omega, sign: float) -> np.ndarray:
        x2 = sign * (np.asarray(omega, dtype=np.float64) / self.omega0) ** 2
        pv = np.polynomial.polynomial.polyval
        return pv(x2, self.num) / pv(x2, self.den)

    def evaluate_imag_axis(self, omega) -> np.ndarray:
        return self._eval(omega, 1.0)

    def evaluate_real_axis(self, omega) -> np.ndarray:
        return self._eval(omega, -1.0)


def matsubara_ratio(spectral: SpectralFunction, params: CircuitParams,
                    imag_tol: float = 1e-6) -> np.ndarray:
    """Real ratio delta_phi(i w) / phi^(0)(i w) on the spectral grid.

    Both transforms are purely imaginary for odd real functions, so the
    ratio is real; a residual imaginary part above ``imag_tol``
    (relative) signals a parity violation upstream and is an error.
    """
    ratio = spectral.values / phi0_bare_matsubara(spectral.omegas,
                                                  params.omega0)
    scale = float(np.max(np.abs(ratio.real))) or 1.0
    if float(np.max(np.abs(ratio.imag))) > imag_tol * scale:
        raise ValueError("delta_phi / phi^(0) has a non-real part beyond "
                         "tolerance; input is not odd")
    return ratio.real


def bracket_series(spectral: SpectralFunction, params: CircuitParams,
                   imag_tol: float = 1e-6,
                   wideband: bool = False) -> np.ndarray:
    """The even bracket B(w) on the spectral grid (w > 0).

    The friction term in the prefactor defaults to the exact band
    symbol Gamma0 w (sqrt(1 + (w/2v)^2) - w/2v), which is what the
    solved trajectory actually obeys; with the wideband Gamma0 w
    (``wideband=True``) the O(w/v) mismatch leaves a spurious
    non-polynomial residue of order 1e-3 in B that degrades the fit.
    """
    w = spectral.omegas
    ratio = matsubara_ratio(spectral, params, imag_tol)
    if wideband:
        fric = params.gamma0 * w
    else:
        a = w / (2.0 * params.v)
        fric = params.gamma0 * w * (np.sqrt(1.0 + a * a) - a)
    pref = (w * w + fric + params.omega0 ** 2) / \
        (w * w + params.omega0 ** 2)
    return pref * (1.0 + ratio)


def _window_mask(omegas: np.ndarray, window: tuple[float, float]) -> np.ndarray:
    mask = (omegas >= window[0]) & (omegas <= window[1])
    if np.count_nonzero(mask) < 12:
        raise ValueError("fit window contains too few spectral points")
    return mask


# tail-amplitude fit window and integration cut for the anchor
# continuation, in units of omega0 * tau
_ANCHOR_FIT_LO = 12.0
_ANCHOR_FIT_HI = 22.0
_ANCHOR_CUT = 25.0


def _exp_tail_integral(a: float, T: float) -> float:
    """Int_T^inf e^{-a tau} / tau^2 dtau for a >= 0 (1/T at a = 0)."""
    if a <= 0.0:
        return 1.0 / T
    return math.exp(-a * T) / T - a * float(exp1(a * T))


def bracket_anchor_values(traj: Trajectory, omega_k) -> np.ndarray:
    """Real-axis bracket values B~(w_k) computed directly in the time
    domain, valid for 0 < w_k <= omega0.

    The bracket equals 1 - N(i w) / ((w^2 + omega0^2) phi^(0)(i w))
    where N(tau) = (omega0^2/2)[sin(2 phi_0) - sin(2 phi^(0))]
    - omega0^2 delta_phi is the nonlinear source of the saddle
    equation.  N splits into

    * P = (omega0^2/2)(sin 2 delta_phi - 2 delta_phi), cubic in the
      distortion with a 1/tau^3 power-law tail, whose sinh-weighted
      continuation integral diverges; its (small) bracket contribution
      is continued by a stable low-order even-polynomial fit instead;
    * N_exp = N - P, which decays like A e^{-omega0 tau} / tau^2 with
      A = 4 omega0^2 c^2 (c the 1/tau tail coefficient of delta_phi),
      so its sine transform continues to a convergent sinh-weighted
      integral for w_k < omega0.  The integral is truncated at
      omega0 tau = 25 and completed analytically with the fitted tail
      amplitude, which also covers the marginal endpoint w_k = omega0.

    These values are exact up to quadrature error and serve as
    equality constraints for ``fit_continuation``, pinning the
    polynomial continuation where it is otherwise order-sensitive.
    """
    params = traj.params
    w0 = params.omega0
    grid = traj.grid
    if grid.tau_max * w0 < _ANCHOR_CUT + 5.0:
        raise ValueError("grid too short for anchor continuation; need "
                         f"tau_max >= {(_ANCHOR_CUT + 5.0) / w0:.2f}")
    wk = np.atleast_1d(np.asarray(omega_k, dtype=np.float64))
    if np.any(wk <= 0.0) or np.any(wk > w0 * (1.0 + 1e-12)):
        raise ValueError("anchor frequencies must lie in (0, omega0]")

    taus = grid.taus_half
    dphi = traj.delta_phi_half
    phib = phi0_bare(taus, w0)
    n_x = 0.5 * w0 * w0 * (np.sin(2.0 * phib + 2.0 * dphi)
                           - np.sin(2.0 * phib)) - w0 * w0 * dphi
    p_cubic = 0.5 * w0 * w0 * (np.sin(2.0 * dphi) - 2.0 * dphi)
    n_exp = n_x - p_cubic

    fitw = (w0 * taus >= _ANCHOR_FIT_LO) & (w0 * taus <= _ANCHOR_FIT_HI)
    amp = float(np.mean(n_exp[fitw] * taus[fitw] ** 2
                        * np.exp(w0 * taus[fitw])))
    cut = int(np.searchsorted(w0 * taus, _ANCHOR_CUT))
    t_cut = taus[cut - 1]

    # polynomial continuation of the cubic part's bracket contribution
    ws = np.linspace(0.01 * w0, 1.6 * w0, 400)
    d_p = -2.0 * filon_sine(np.ascontiguousarray(p_cubic), 0.0,
                            grid.dtau, ws)
    b_p = -d_p / ((ws * ws + w0 * w0)
                  * phi0_bare_matsubara(ws, w0).imag)
    x2 = (ws / w0) ** 2
    vand = x2[:, None] ** np.arange(4)[None, :]
    a_p, *_ = np.linalg.lstsq(vand, b_p, rcond=None)

    out = np.empty_like(wk)
    pv = np.polynomial.polynomial.polyval
    for i, w in enumerate(wk):
        body = simpson(np.sinh(w * taus[:cut]) * n_exp[:cut], x=taus[:cut])
        tail = 0.5 * amp * (_exp_tail_integral(w0 - w, t_cut)
                            - _exp_tail_integral(w0 + w, t_cut))
        n_tilde = -2.0 * (body + tail)
        u = w - w0
        if abs(u) < _RES_EPS * w0:
            s = 0.5 * math.pi * u / w0
            g = (4.0 * w0 * w0 / math.pi) * (1.0 + u / (2.0 * w0)) \
                * (1.0 + s * s / 6.0)
        else:
            g = (w0 * w0 - w * w) / math.cos(0.5 * math.pi * w / w0)
        out[i] = 1.0 - n_tilde * w / (math.pi * g) + pv(-(w / w0) ** 2, a_p)
    return out if np.ndim(omega_k) else float(out[0])


def fit_continuation(omegas: np.ndarray, values: np.ndarray,
                     params: CircuitParams, p: int = 6,
                     window: tuple[float, float] | None = None,
                     anchors: tuple[np.ndarray, np.ndarray] | None = None,
                     ) -> ContinuationFit:
    """Least-squares even-polynomial fit of B(w) over the window.

    The fit variable is x = w/omega0 (conditions the Vandermonde
    system); default window [0.05, 3] omega0, default order p = 6.

    ``anchors = (omega_a, B_a)`` imposes the continued polynomial's
    real-axis values at frequencies omega_a as equality constraints
    (solved by null-space elimination), so fits of every order agree
    at the anchor points; with p = 4 and three anchors the polynomial
    is fully determined by them.
    """
    if window is None:
        window = (0.05 * params.omega0, 3.0 * params.omega0)
    mask = _window_mask(omegas, window)
    x2 = (omegas[mask] / params.omega0) ** 2
    y = values[mask]
    n_coef = p // 2 + 1
    vand = x2[:, None] ** np.arange(n_coef)[None, :]
    if anchors is None:
        alphas, *_ = np.linalg.lstsq(vand, y, rcond=None)
    else:
        w_a = np.atleast_1d(np.asarray(anchors[0], dtype=np.float64))
        b_a = np.atleast_1d(np.asarray(anchors[1], dtype=np.float64))
        if w_a.size > n_coef:
            raise ValueError("more anchors than polynomial coefficients")
        # constraint rows evaluate the continued polynomial on the real
        # axis: x^(2l) -> (-x^2)^l
        cmat = (-(w_a[:, None] / params.omega0) ** 2) \
            ** np.arange(n_coef)[None, :]
        a_part, *_ = np.linalg.lstsq(cmat, b_a, rcond=None)
        _, s, vt = np.linalg.svd(cmat)
        null = vt[np.count_nonzero(s > 1e-12 * s[0]):].T
        if null.shape[1] > 0:
            beta, *_ = np.linalg.lstsq(vand @ null, y - vand @ a_part,
                                       rcond=None)
            alphas = a_part + null @ beta
        else:
            alphas = a_part
    resid = vand @ alphas - y
    rms = float(np.sqrt(np.mean(resid ** 2)))
    mean_mag = float(np.mean(np.abs(y)))
    # with anchors the polynomial trades imaginary-axis fidelity for
    # exact real-axis values, so a large rms is expected there
    if anchors is None and rms > 1e-2 * mean_mag:
        warnings.warn(f"bracket fit rms residual {rms:.2e} exceeds 1e-2 of "
                      f"the mean bracket magnitude {mean_mag:.2e}",
                      stacklevel=2)
    return ContinuationFit(p=p, alphas=alphas, omega0=params.omega0,
                           window=window, rms_residual=rms)


def fit_rational(omegas: np.ndarray, values: np.ndarray,
                 params: CircuitParams,
                 window: tuple[float, float] | None = None) -> RationalFit:
    """Linearized LS rational fit B ~ P/Q (degree 4/4 in w, 2/2 in x^2)."""
    if window is None:
        window = (0.05 * params.omega0, 3.0 * params.omega0)
    mask = _window_mask(omegas, window)
    x2 = (omegas[mask] / params.omega0) ** 2
    y = values[mask]
    # B*Q - P = 0 with q0 = 1: unknowns (p0, p1, p2, q1, q2)
    cols = [np.ones_like(x2), x2, x2 * x2, -y * x2, -y * x2 * x2]
    sol, *_ = np.linalg.lstsq(np.column_stack(cols), y, rcond=None)
    return RationalFit(num=sol[:3], den=np.array([1.0, sol[3], sol[4]]),
                       omega0=params.omega0)


def f_apprx_factors(omega_k, params: CircuitParams) -> np.ndarray:
    """Linearized-trajectory overlap factor with the resonance guard."""
    w = np.atleast_1d(np.asarray(omega_k, dtype=np.float64))
    if np.any(w <= 0.0) or np.any(w >= 2.0 * params.v):
        raise ValueError("mode frequencies must lie inside the band (0, 2v)")
    w0 = params.omega0
    g = np.empty_like(w)
    near = np.abs(w - w0) < _RES_EPS * w0
    far = ~near
    g[far] = (w0 * w0 - w[far] ** 2) / np.cos(0.5 * math.pi * w[far] / w0)
    if np.any(near):
        u = w[near] - w0
        s = 0.5 * math.pi * u / w0
        g[near] = (4.0 * w0 * w0 / math.pi) * (1.0 + u / (2.0 * w0)) \
            * (1.0 + s * s / 6.0)
    lor = np.sqrt((w0 * w0 - w * w) ** 2 + (params.gamma0 * w) ** 2)
    out = np.sqrt(2.0 * params.delta / (params.z * w)) * g / lor
    return out if np.ndim(omega_k) else float(out[0])


def f_factors(fit: ContinuationFit | RationalFit, omega_k,
              params: CircuitParams) -> np.ndarray:
    """Real-axis overlap factor f_k = f_k^apprx * continued bracket."""
    return f_apprx_factors(omega_k, params) * fit.evaluate_real_axis(omega_k)


def _cosh_safe(x: np.ndarray) -> np.ndarray:
    return np.cosh(np.minimum(x, 700.0))


def f_tilde_apprx_factors(omega_k, params: CircuitParams) -> np.ndarray:
    """Action-entering factor of the bare kink,
    sqrt(2 Delta / (z w_k)) / cosh(pi w_k / 2 omega0)."""
    w = np.asarray(omega_k, dtype=np.float64)
    if np.any(w <= 0.0):
        raise ValueError("mode frequencies must be > 0")
    return np.sqrt(2.0 * params.delta / (params.z * w)) / \
        _cosh_safe(0.5 * math.pi * w / params.omega0)


def _ratio_apprx(omega_k: np.ndarray, params: CircuitParams) -> np.ndarray:
    """Closed-form linearized ratio delta_phi/phi^(0) on the imaginary
    axis, with the exact band friction symbol; used beyond the spectral
    span where cosh suppression makes the factors negligible anyway."""
    a = omega_k / (2.0 * params.v)
    fric = params.gamma0 * omega_k * (np.sqrt(1.0 + a * a) - a)
    return -fric / (omega_k ** 2 + fric + params.omega0 ** 2)


def f_tilde_factors(spectral: SpectralFunction, omega_k,
                    params: CircuitParams) -> np.ndarray:
    """Action-entering factors from the solved trajectory.

    The Matsubara ratio is cubic-interpolated onto the mode
    frequencies; modes above the spectral span fall back to the
    closed-form linearized ratio (their cosh suppression is already
    below double precision there), modes below the span are an error.
    """
    w = np.atleast_1d(np.asarray(omega_k, dtype=np.float64))
    if np.any(w < spectral.omegas[0]):
        raise ValueError("mode below the spectral grid; extend it downward")
    ratio_grid = matsubara_ratio(spectral, params)
    spline = CubicSpline(spectral.omegas, ratio_grid)
    inside = w <= spectral.omegas[-1]
    r = np.empty_like(w)
    r[inside] = spline(w[inside])
    r[~inside] = _ratio_apprx(w[~inside], params)
    bracket = ((w * w + params.omega0 ** 2) / (params.gamma0 * w)) * r * r \
        + (1.0 + r) ** 2
    out = f_tilde_apprx_factors(w, params) * np.sqrt(bracket)
    return out if np.ndim(omega_k) else float(out[0])


def f_tilde_factors_generic(omega_k, abs_delta_phi, abs_phi_total,
                            params: CircuitParams) -> np.ndarray:
    """Generic-potential form of f~_k from raw transform magnitudes
    |delta_phi(i w_k)| and |phi(i w_k)| (full trajectory transform):

        f~_k^2 = (2 Delta w_k / (pi^2 z)) [ (w_k^2 + omega0^2)
                 / (Gamma0 w_k) |delta_phi|^2 + |phi|^2 ].
    """
    w = np.asarray(omega_k, dtype=np.float64)
    term = ((w * w + params.omega0 ** 2) / (params.gamma0 * w)) \
        * np.asarray(abs_delta_phi) ** 2 + np.asarray(abs_phi_total) ** 2
    return np.sqrt(2.0 * params.delta * w / (math.pi ** 2 * params.z) * term)


def f_factors_generic(omegas: np.ndarray, pole_free_values: np.ndarray,
                      omega_k, params: CircuitParams, p: int = 6,
                      window: tuple[float, float] | None = None,
                      anchors: tuple[np.ndarray, np.ndarray] | None = None,
                      ) -> np.ndarray:
    """Overlap factors when only the pole-free product is available.

    ``pole_free_values`` samples P(w) = -(w^2 + Gamma0 w + omega0^2)
    * w * Im phi(i w) / pi on the spectral grid (for the bare kink this
    is (w^2 + Gamma0 w + omega0^2)/cosh(pi w / 2 omega0)); it is fitted
    and continued by the same even-polynomial machinery, and

        f_k = sqrt(2 Delta / (z w_k)) * P~(w_k)
              / sqrt((omega0^2 - w_k^2)^2 + (Gamma0 w_k)^2).

    ``anchors`` constrains the continued P~ the same way as in
    ``fit_continuation``; P~ anchors follow from bracket anchors via
    P~(w) = B~(w) (omega0^2 - w^2)/cos(pi w / 2 omega0).
    """
    fit = fit_continuation(omegas, pole_free_values, params, p=p,
                           window=window, anchors=anchors)
    w = np.atleast_1d(np.asarray(omega_k, dtype=np.float64))
    lor = np.sqrt((params.omega0 ** 2 - w * w) ** 2
                  + (params.gamma0 * w) ** 2)
    out = np.sqrt(2.0 * params.delta / (params.z * w)) \
        * fit.evaluate_real_axis(w) / lor
    return out if np.ndim(omega_k) else float(out[0])


def pole_free_product(spectral: SpectralFunction,
                      params: CircuitParams,
                      wideband: bool = False) -> np.ndarray:
    """P(w) for ``f_factors_generic`` from full-trajectory spectral data
    i*Im phi(i w) (the bare-kink part included); same friction-symbol
    convention as ``bracket_series``."""
    w = spectral.omegas
    if wideband:
        fric = params.gamma0 * w
    else:
        a = w / (2.0 * params.v)
        fric = params.gamma0 * w * (np.sqrt(1.0 + a * a) - a)
    return -(w * w + fric + params.omega0 ** 2) * w \
        * spectral.imag / math.pi


@dataclass
class ModeFactors:
    """Per-mode overlap factors of one converged trajectory."""

    omegas: np.ndarray
    f: np.ndarray
    f_apprx: np.ndarray
    f_tilde: np.ndarray
    f_tilde_apprx: np.ndarray

    def __post_init__(self) -> None:
        arrs = (self.f, self.f_apprx, self.f_tilde, self.f_tilde_apprx)
        if not all(np.all(np.isfinite(a)) for a in arrs):
            raise ValueError("mode factors must be finite")

    def save_text(self, path) -> None:
        np.savetxt(path, np.column_stack(
            [self.omegas, self.f, self.f_tilde, self.f_apprx,
             self.f_tilde_apprx]),
            header="columns: omega_k f f_tilde f_apprx f_tilde_apprx")

    @classmethod
    def load_text(cls, path) -> "ModeFactors":
        data = np.loadtxt(path)
        return cls(omegas=data[:, 0], f=data[:, 1], f_tilde=data[:, 2],
                   f_apprx=data[:, 3], f_tilde_apprx=data[:, 4])


def spectral_grid_for(params: CircuitParams, grid_tau_max: float,
                      omega_max: float | None = None,
                      n_omega: int = 1601) -> np.ndarray:
    """Frequency grid for trajectory transforms: from below the lowest
    mode up to omega_max (default 6 omega0), dense enough for cubic
    interpolation onto the mode comb."""
    if omega_max is None:
        omega_max = 6.0 * params.omega0
    w_lo = min(0.25 * params.delta, 0.01 * params.omega0)
    return np.linspace(w_lo, omega_max, n_omega)


def compute_mode_factors(traj: Trajectory, modes: np.ndarray | None = None,
                         p: int = 6,
                         window: tuple[float, float] | None = None,
                         anchor_fracs: tuple[float, ...] | None =
                         (0.75, 1.0),
                         ) -> tuple[ModeFactors, ContinuationFit]:
    """Full factor assembly for one trajectory: transform, bracket fit,
    anchored continuation, and both factor families on the mode comb.

    By default the polynomial continuation is pinned at
    ``anchor_fracs`` * omega0 by the time-domain anchors of
    ``bracket_anchor_values``, which removes the order-p sensitivity
    of the free fit near and above the resonance; pass
    ``anchor_fracs=None`` for the unconstrained fit.

    B(0) = 1 is always added as an exact anchor when anchoring is on:
    the friction symbol vanishes at w = 0 and the Matsubara ratio
    vanishes linearly there, so the bracket is exactly 1.  Pinning it
    makes f_k^2 -> 2 Delta / (z w_k) exact in the soft limit, matching
    the soft behavior of f~_k^2; without it the mismatch leaves the
    decay rates with a spurious residual log(Delta).
    """
    params = traj.params
    if modes is None:
        modes = build_mode_grid(params)
    ws = spectral_grid_for(params, traj.grid.tau_max)
    spectral = matsubara_transform(traj.grid, traj.delta_phi, ws,
                                   tail_coeff=traj.tail_coeff, oversample=4)
    bracket = bracket_series(spectral, params)
    anchors = None
    if anchor_fracs is not None:
        w_a = params.omega0 * np.asarray(anchor_fracs, dtype=np.float64)
        b_a = bracket_anchor_values(traj, w_a)
        anchors = (np.concatenate(([0.0], w_a)),
                   np.concatenate(([1.0], b_a)))
    fit = fit_continuation(ws, bracket, params, p=p, window=window,
                           anchors=anchors)
    factors = ModeFactors(
        omegas=modes,
        f=f_factors(fit, modes, params),
        f_apprx=f_apprx_factors(modes, params),
        f_tilde=f_tilde_factors(spectral, modes, params),
        f_tilde_apprx=f_tilde_apprx_factors(modes, params))
    return factors, fit
