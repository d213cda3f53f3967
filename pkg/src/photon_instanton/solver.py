"""Euclidean phase-slip trajectories of a transmon damped by a photon band.

The saddle point phi_0(tau) of the dissipative action interpolates from
0 to pi in imaginary time.  Without damping it is the bare kink
phi^(0)(tau) = 2 arctan(exp(omega0 tau)); friction from the junction
array distorts it by delta_phi(tau) = phi_0 - phi^(0), an odd function
decaying like -Gamma0/(omega0^2 tau) at long times.  Two independent
routes compute delta_phi on the same grid:

* ``solve_iterative``: the bulk modes are eliminated in Matsubara
  space; each sweep updates the array response phi_1(i w) =
  [1 - mu(w)] phi_0(i w) from the previous trajectory and re-solves the
  local boundary-value problem.  mu(w) = [v Gamma0 - K(w)]/(v Gamma0)
  is the exact friction symbol of the band (-> |w|/v deep inside it).
  Anderson mixing removes the slow O(1 - omega0^2 / (v Gamma0))
  relaxation of the plain sweep; the fixed point is untouched.

* ``solve_integro_differential``: the same physics as an explicit
  memory kernel,

      d2(dphi) = (omega0^2/2)[sin(2 phi0) - sin(2 phi^(0))]
                 + v Gamma0 dphi - (K * dphi) + F,

  with the convolution in difference form Int K(tau - tau')
  [dphi(tau) - dphi(tau')] dtau' so the delta-function part of K never
  appears, a 1/tau extension beyond the grid, and a dense Newton
  iteration (folded to the half line tau >= 0 by oddness).

The drive exerted by the undistorted kink, F(tau) = Gamma0 *
Int |w| phi^(0)(i w) e^{i w tau} dw / (2 pi), has a closed form in
digamma functions (``bare_kink_drive``); the quadrature oracle for it
lives in the tests.

Fourier convention: G(w) = Int e^{-i w tau} g(tau) dtau, so for the
bare kink phi^(0)(i w) = pi / (i w cosh(pi w / 2 omega0)) and for any
odd real g the transform is i D(w) with real odd
D(w) = -2 Int_0^inf sin(w tau) g(tau) dtau.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline
from scipy.linalg import hankel, solve_banded, toeplitz
from scipy.special import digamma

from ._backend import filon_sine
from .device import CircuitParams
from .special import KernelParams, incomplete_gamma0, kernel_K

_EXT_NODES, _EXT_WEIGHTS = leggauss(48)
_EXT_U = 0.5 * (_EXT_NODES + 1.0)
_EXT_W = 0.5 * _EXT_WEIGHTS


@dataclass(frozen=True)
class TimeGrid:
    """Uniform symmetric imaginary-time grid with tau = 0 on a node."""

    tau_max: float
    n_points: int

    def __post_init__(self) -> None:
        if self.n_points % 2 == 0 or self.n_points < 5:
            raise ValueError("n_points must be odd and >= 5")
        if self.tau_max <= 0.0:
            raise ValueError("tau_max must be > 0")

    @property
    def taus(self) -> np.ndarray:
        return np.linspace(-self.tau_max, self.tau_max, self.n_points)

    @property
    def dtau(self) -> float:
        return 2.0 * self.tau_max / (self.n_points - 1)

    @property
    def n_half(self) -> int:
        return (self.n_points + 1) // 2

    @property
    def taus_half(self) -> np.ndarray:
        return np.linspace(0.0, self.tau_max, self.n_half)

    @classmethod
    def for_circuit(cls, params: CircuitParams, tau_max_omega0: float = 80.0,
                    dtau_omega0: float = 0.04) -> "TimeGrid":
        tau_max = tau_max_omega0 / params.omega0
        half = int(math.ceil(tau_max_omega0 / dtau_omega0))
        return cls(tau_max=tau_max, n_points=2 * half + 1)


def phi0_bare(tau, omega0: float):
    """Bare kink 2 arctan(exp(omega0 tau)), overflow-safe."""
    x = omega0 * np.asarray(tau, dtype=np.float64)
    pos = x > 0.0
    out = np.where(pos, math.pi - 2.0 * np.arctan(np.exp(-np.abs(x))),
                   2.0 * np.arctan(np.exp(-np.abs(x))))
    return out


def phi0_bare_matsubara(omega, omega0: float):
    """Transform pi / (i omega cosh(pi omega / 2 omega0)) of the bare kink
    (the constant background pi/2 contributes only at omega = 0)."""
    w = np.asarray(omega, dtype=np.float64)
    if np.any(w == 0.0):
        raise ValueError("transform of the kink diverges at omega = 0")
    return math.pi / (1j * w * np.cosh(math.pi * w / (2.0 * omega0)))


def bare_kink_drive(tau, omega0: float):
    """Inverse transform of |w| phi^(0)(i w), i.e. Gamma0^-1 times the
    drive of the linear problem:

        (omega0/pi) Im[ psi(3/4 - i omega0 tau / 2 pi)
                        - psi(1/4 - i omega0 tau / 2 pi) ],

    odd, linear at small tau and ~ 1/tau at large tau.  Checked against
    direct quadrature in the tests.
    """
    y = np.asarray(tau, dtype=np.float64) * omega0 / (2.0 * math.pi)
    val = np.imag(digamma(0.75 - 1j * y) - digamma(0.25 - 1j * y))
    return (omega0 / math.pi) * val


def forcing_term(tau, params: CircuitParams):
    """Drive exerted by the undistorted kink on its own distortion,
    F(tau) = Gamma0 * Int |w| phi^(0)(i w) e^{i w tau} dw / (2 pi)."""
    return params.gamma0 * bare_kink_drive(tau, params.omega0)


def forcing_term_band(taus_half: np.ndarray, params: CircuitParams,
                      omega_max_factor: float = 30.0,
                      n_omega: int = 2401) -> np.ndarray:
    """Drive with the exact band symbol, invFT[(v Gamma0 - K(w))
    phi^(0)(i w)], for tau >= 0.

    The wideband form ``forcing_term`` replaces v Gamma0 - K(w) by its
    deep-band limit Gamma0 |w|; the O(w/v) difference matters when the
    memory-kernel route is cross-validated against the Matsubara route,
    which carries the exact symbol automatically.
    """
    ws = np.linspace(0.0, omega_max_factor * params.omega0, n_omega)
    mu = _friction_mu(ws, params)
    with np.errstate(divide="ignore", invalid="ignore"):
        im_phi_bare = -math.pi / (ws * np.cosh(math.pi * ws /
                                               (2.0 * params.omega0)))
    with np.errstate(invalid="ignore"):
        corr = (mu - ws / params.v) * im_phi_bare
    corr[0] = 0.0
    base = params.gamma0 * bare_kink_drive(taus_half, params.omega0)
    return base + params.v * params.gamma0 * inverse_sine_transform(
        ws, corr, taus_half)


def delta_phi_apprx_matsubara_im(omega, params: CircuitParams,
                                 band_corrected: bool = False):
    """Im part of the linearized response
    -Gamma0 |w| phi^(0)(i w) / (w^2 + Gamma0 |w| + omega0^2);
    with ``band_corrected`` the exact friction symbol replaces Gamma0|w|.
    """
    w = np.abs(np.asarray(omega, dtype=np.float64))
    if band_corrected:
        a = w / (2.0 * params.v)
        fric = params.gamma0 * w * (np.sqrt(1.0 + a * a) - a)
    else:
        fric = params.gamma0 * w
    num = math.pi * fric / np.maximum(w, 1e-300)
    return np.sign(np.asarray(omega)) * num / (
        (w * w + fric + params.omega0 ** 2)
        * np.cosh(math.pi * w / (2.0 * params.omega0)))


def delta_phi_apprx(tau, params: CircuitParams, omega_max_factor: float = 40.0,
                    n_omega: int = 4001, band_corrected: bool = False):
    """Linearized (weak-friction) trajectory distortion in time domain,
    via oscillatory quadrature of the closed-form transform."""
    tau = np.asarray(tau, dtype=np.float64)
    wmax = omega_max_factor * params.omega0
    ws = np.linspace(0.0, wmax, n_omega)
    d = np.zeros_like(ws)
    d[1:] = delta_phi_apprx_matsubara_im(ws[1:], params, band_corrected)
    d[0] = math.pi * params.gamma0 / params.omega0 ** 2 if not band_corrected \
        else math.pi * params.gamma0 / params.omega0 ** 2
    at = np.abs(tau)
    vals = -(1.0 / math.pi) * filon_sine(d, 0.0, ws[1] - ws[0], at.ravel())
    return (np.sign(tau) * vals.reshape(tau.shape)) if tau.shape else \
        float(np.sign(tau) * vals[0])


@dataclass
class Trajectory:
    """Converged saddle-point distortion on a symmetric grid."""

    grid: TimeGrid
    delta_phi: np.ndarray
    params: CircuitParams
    method: str
    residual: float
    n_iterations: int
    tail_coeff: float

    @property
    def phi(self) -> np.ndarray:
        return phi0_bare(self.grid.taus, self.params.omega0) + self.delta_phi

    @property
    def delta_phi_half(self) -> np.ndarray:
        return self.delta_phi[self.grid.n_half - 1:]

    def save_text(self, path) -> None:
        header = (f"tau_max={self.grid.tau_max!r} n_points={self.grid.n_points} "
                  f"method={self.method} residual={self.residual!r} "
                  f"n_iterations={self.n_iterations} "
                  f"tail_coeff={self.tail_coeff!r}\n"
                  f"omega0={self.params.omega0!r} E_C={self.params.E_C!r} "
                  f"E_J={self.params.E_J!r} gamma0={self.params.gamma0!r} "
                  f"z={self.params.z!r} v={self.params.v!r} "
                  f"delta={self.params.delta!r} T={self.params.T!r}\n"
                  "columns: tau delta_phi")
        np.savetxt(path, np.column_stack([self.grid.taus, self.delta_phi]),
                   header=header)

    @classmethod
    def load_text(cls, path) -> "Trajectory":
        meta: dict[str, str] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if not line.startswith("#"):
                    break
                for tok in line[1:].split():
                    if "=" in tok:
                        k, _, val = tok.partition("=")
                        meta[k] = val
        data = np.loadtxt(path)
        grid = TimeGrid(tau_max=float(meta["tau_max"]),
                        n_points=int(meta["n_points"]))
        params = CircuitParams(
            omega0=float(meta["omega0"]), E_C=float(meta["E_C"]),
            E_J=float(meta["E_J"]), gamma0=float(meta["gamma0"]),
            z=float(meta["z"]), v=float(meta["v"]),
            delta=float(meta["delta"]), T=float(meta["T"]))
        return cls(grid=grid, delta_phi=data[:, 1], params=params,
                   method=meta.get("method", "loaded"),
                   residual=float(meta.get("residual", "nan")),
                   n_iterations=int(meta.get("n_iterations", "0")),
                   tail_coeff=float(meta.get("tail_coeff", "0")))


@dataclass(frozen=True)
class SpectralFunction:
    """Matsubara transform samples of an odd real function; values are
    purely imaginary (i * imag)."""

    omegas: np.ndarray
    imag: np.ndarray
    tail_coeff: float
    tail_corrected: bool = True

    @property
    def values(self) -> np.ndarray:
        return 1j * self.imag


def tail_flatness(grid: TimeGrid, values: np.ndarray) -> float:
    """Max relative deviation of tau * f(tau) from its median over the
    last decade of the grid; ~0 when the 1/tau asymptote is reached."""
    taus = grid.taus
    mask = taus >= grid.tau_max / 10.0
    prod = taus[mask] * values[mask]
    scale = np.max(np.abs(values)) * grid.tau_max
    med = np.median(prod)
    if abs(med) < 1e-12 * max(scale, 1e-300):
        return 0.0
    return float(np.max(np.abs(prod / med - 1.0)))


def fit_tail_coeff(grid: TimeGrid, values: np.ndarray) -> float:
    """Least-squares coefficient c of the asymptote f ~ c / tau over
    tau in [0.6, 0.9] tau_max."""
    taus = grid.taus
    mask = (taus >= 0.6 * grid.tau_max) & (taus <= 0.9 * grid.tau_max)
    t = taus[mask]
    y = values[mask]
    return float(np.sum(y / t) / np.sum(1.0 / (t * t)))


def matsubara_transform(grid: TimeGrid, values: np.ndarray,
                        omegas: np.ndarray, tail_coeff: float | None = None,
                        check_tail: bool = True,
                        oversample: int = 1) -> SpectralFunction:
    """Transform an odd real grid function to i D(omega), omega > 0.

    The grid integral is done with a piecewise-linear-exact oscillatory
    rule; the truncated 1/tau tail is restored in closed form through
    the incomplete gamma function,

        D(w) = -2 [ Int_0^taumax sin(w tau) f dtau
                    + c Im Gamma(0, -i w tau_max) ],  f ~ c/tau.

    ``oversample`` > 1 resamples the data on a finer grid by cubic
    spline before the rule is applied, trading the O(dtau^2) error of
    the piecewise-linear rule for the O(dtau^4) spline error; needed
    when D is evaluated deep in its exponential tail, where absolute
    quadrature error is amplified by the bare-kink division.
    """
    omegas = np.asarray(omegas, dtype=np.float64)
    if np.any(omegas <= 0.0):
        raise ValueError("omegas must be > 0")
    if check_tail:
        flat = tail_flatness(grid, values)
        if flat > 0.3:
            warnings.warn(
                f"tau*f varies by {flat:.2f} over the last grid decade; "
                "the 1/tau tail correction is unreliable (enlarge tau_max)",
                stacklevel=2)
    half = values[grid.n_half - 1:]
    if tail_coeff is None:
        tail_coeff = fit_tail_coeff(grid, values)
    dtau = grid.dtau
    if oversample > 1:
        fine = np.linspace(0.0, grid.tau_max,
                           oversample * (grid.n_half - 1) + 1)
        half = CubicSpline(grid.taus_half, half)(fine)
        dtau = fine[1] - fine[0]
    main = filon_sine(np.ascontiguousarray(half), 0.0, dtau, omegas)
    tail = tail_coeff * np.imag(incomplete_gamma0(-1j * omegas * grid.tau_max))
    return SpectralFunction(omegas=omegas, imag=-2.0 * (main + tail),
                            tail_coeff=tail_coeff)


def inverse_sine_transform(omegas: np.ndarray, imag_vals: np.ndarray,
                           taus: np.ndarray) -> np.ndarray:
    """Inverse of the convention above: g(tau) = -(1/pi)
    Int_0^inf sin(w tau) D(w) dw for spectral data i D(w)."""
    dw = omegas[1] - omegas[0]
    return -(1.0 / math.pi) * filon_sine(
        np.ascontiguousarray(imag_vals), omegas[0], dw, np.ascontiguousarray(taus))


# ----------------------------------------------------------------------
# iterative (Matsubara) route


def _friction_mu(omega: np.ndarray, params: CircuitParams) -> np.ndarray:
    a = np.abs(omega) / (2.0 * params.v)
    return (np.abs(omega) / params.v) * (np.sqrt(1.0 + a * a) - a)


def _solve_local_bvp(grid: TimeGrid, params: CircuitParams,
                     rhs_fixed: np.ndarray, bc: float,
                     start: np.ndarray) -> np.ndarray:
    """Damped Newton for d2(dphi) - (omega0^2/2) dsin - vG dphi =
    rhs_fixed with dphi(+-tau_max) = +-bc."""
    taus = grid.taus
    dt2 = grid.dtau ** 2
    w0sq = params.omega0 ** 2
    vg = params.v * params.gamma0
    phi_b = phi0_bare(taus, params.omega0)
    sin_b = np.sin(2.0 * phi_b)
    x = start.copy()
    x[0], x[-1] = -bc, bc
    for _ in range(40):
        dsin = 0.5 * w0sq * (np.sin(2.0 * phi_b + 2.0 * x) - sin_b)
        d2 = (x[:-2] - 2.0 * x[1:-1] + x[2:]) / dt2
        res = d2 - dsin[1:-1] - vg * x[1:-1] - rhs_fixed[1:-1]
        jac_diag = -2.0 / dt2 - w0sq * np.cos(2.0 * phi_b[1:-1] + 2.0 * x[1:-1]) - vg
        n_in = x.size - 2
        ab = np.zeros((3, n_in))
        ab[0, 1:] = 1.0 / dt2
        ab[1] = jac_diag
        ab[2, :-1] = 1.0 / dt2
        step = solve_banded((1, 1), ab, -res)
        smax = np.max(np.abs(step))
        if smax > 0.5:
            step *= 0.5 / smax
        x[1:-1] += step
        if smax < 1e-13:
            break
    return x


def solve_iterative(params: CircuitParams, grid: TimeGrid | None = None,
                    tol: float = 1e-8, max_outer: int = 120,
                    omega_max_factor: float = 30.0,
                    n_omega: int = 2401, anderson_depth: int = 10) -> Trajectory:
    """Self-consistent Matsubara sweep for the damped kink.

    Each sweep transforms the current distortion, forms the array
    response with the exact band symbol mu(w), and re-solves the local
    nonlinear boundary-value problem (warm-started tridiagonal Newton).
    The plain sweep contracts only at 1 - O(omega0^2 / v Gamma0), which
    would crawl for v >> omega0; Anderson mixing over the last
    ``anderson_depth`` sweep residuals removes the slow modes while
    leaving the fixed point untouched.
    """
    if grid is None:
        grid = TimeGrid.for_circuit(params)
    taus = grid.taus
    taus_h = grid.taus_half
    vg = params.v * params.gamma0
    ws = np.linspace(0.0, omega_max_factor * params.omega0, n_omega)
    mu = _friction_mu(ws, params)
    with np.errstate(divide="ignore", invalid="ignore"):
        im_phi_bare = -math.pi / (ws * np.cosh(math.pi * ws /
                                               (2.0 * params.omega0)))
    # (mu - w/v) * Im phi^(0): finite (-> 0) at w = 0
    with np.errstate(invalid="ignore"):
        bare_corr = (mu - ws / params.v) * im_phi_bare
    bare_corr[0] = 0.0
    tail_gamma = np.zeros_like(ws)
    tail_gamma[1:] = np.imag(incomplete_gamma0(-1j * ws[1:] * grid.tau_max))
    h_over_v = bare_kink_drive(taus, params.omega0) / params.v

    def to_spectral(vals_full: np.ndarray, c: float) -> np.ndarray:
        half = np.ascontiguousarray(vals_full[grid.n_half - 1:])
        d = -2.0 * (filon_sine(half, 0.0, grid.dtau, ws) + c * tail_gamma)
        d[0] = 0.0
        return d

    def sweep(x: np.ndarray) -> np.ndarray:
        c = fit_tail_coeff(grid, x)
        xb = x.copy()
        xb[0], xb[-1] = -c / grid.tau_max, c / grid.tau_max
        d_prev = to_spectral(xb, c)
        g_rest = inverse_sine_transform(ws, bare_corr + mu * d_prev, taus_h)
        w_resp = h_over_v.copy()
        w_resp[grid.n_half - 1:] += g_rest
        w_resp[:grid.n_half - 1] -= g_rest[1:][::-1]
        rhs_fixed = vg * (w_resp - xb)
        x_new = _solve_local_bvp(grid, params, rhs_fixed,
                                 c / grid.tau_max, xb)
        return 0.5 * (x_new - x_new[::-1])

    x = np.zeros_like(taus)
    hist_x: list[np.ndarray] = []
    hist_f: list[np.ndarray] = []
    change = np.inf
    n_iter = 0
    for n_iter in range(1, max_outer + 1):
        gx = sweep(x)
        f = gx - x
        change = float(np.max(np.abs(f)))
        if change < tol:
            x = gx
            break
        hist_x.append(x.copy())
        hist_f.append(f.copy())
        if len(hist_x) > anderson_depth:
            hist_x.pop(0)
            hist_f.pop(0)
        if len(hist_f) >= 2:
            fm = np.array(hist_f).T
            df = fm[:, 1:] - fm[:, :-1]
            gamma, *_ = np.linalg.lstsq(df, fm[:, -1], rcond=None)
            k = fm.shape[1]
            theta = np.zeros(k)
            theta[-1] = 1.0
            theta[1:] -= gamma
            theta[:-1] += gamma
            x = (np.array(hist_x).T + fm) @ theta
        else:
            x = gx
        x = 0.5 * (x - x[::-1])
    else:
        warnings.warn(f"iterative solver not converged to {tol} in "
                      f"{max_outer} sweeps (last change {change:.2e})",
                      stacklevel=2)
    x = 0.5 * (x - x[::-1])
    c = fit_tail_coeff(grid, x)
    x[0], x[-1] = -c / grid.tau_max, c / grid.tau_max
    return Trajectory(grid=grid, delta_phi=x, params=params,
                      method="iterative", residual=change,
                      n_iterations=n_iter, tail_coeff=c)


# ----------------------------------------------------------------------
# integro-differential (memory kernel) route


def _ext_integrals(taus_h: np.ndarray, tau_max: float, kp: KernelParams):
    """Integrals of K(tau_i -+ tau') and of K * (1/tau') over the
    extension tau' in (tau_max, inf), via the substitution
    tau' = tau_max / u."""
    tp = tau_max / _EXT_U
    jac = (tau_max / _EXT_U ** 2) * _EXT_W
    km = kernel_K(taus_h[:, None] - tp[None, :], kp)
    kpl = kernel_K(taus_h[:, None] + tp[None, :], kp)
    mass = (km + kpl) @ jac
    tail = ((km - kpl) / tp[None, :]) @ jac
    return mass, tail


def friction_apply(grid: TimeGrid, values: np.ndarray, kp: KernelParams,
                   tail_coeff: float = 0.0,
                   ext_mode: str = "odd-tail") -> np.ndarray:
    """Apply v Gamma0 f - K*f in difference form on the full grid,

        (L f)(tau_i) = Int K(tau_i - tau') [f(tau_i) - f(tau')] dtau',

    extending f beyond the grid either by the odd 1/tau tail
    (``ext_mode='odd-tail'`` with coefficient ``tail_coeff``) or by the
    boundary values themselves (``'constant'``; then L annihilates
    constants exactly, the discrete statement of Int K = v Gamma0).
    """
    taus = grid.taus
    n = taus.size
    w = np.full(n, grid.dtau)
    w[0] = w[-1] = 0.5 * grid.dtau
    kv = kernel_K(np.arange(n) * grid.dtau, kp)
    km = toeplitz(kv)
    tp = grid.tau_max / _EXT_U
    jac = (grid.tau_max / _EXT_U ** 2) * _EXT_W
    k_right = kernel_K(tp[None, :] - taus[:, None], kp)
    k_left = kernel_K(taus[:, None] + tp[None, :], kp)
    mass = km @ w + (k_right + k_left) @ jac
    if ext_mode == "odd-tail":
        ext_val = ((k_right - k_left) / tp[None, :]) @ jac * tail_coeff
    elif ext_mode == "constant":
        ext_val = k_right @ jac * values[-1] + k_left @ jac * values[0]
    else:
        raise ValueError(f"unknown ext_mode {ext_mode!r}")
    return mass * values - km @ (w * values) - ext_val


def solve_integro_differential(params: CircuitParams,
                               grid: TimeGrid | None = None,
                               tol: float = 1e-10, max_newton: int = 30,
                               n_tail_updates: int = 2) -> Trajectory:
    """Dense Newton solution of the memory-kernel equation, folded to the
    half line by the oddness of delta_phi."""
    if grid is None:
        grid = TimeGrid.for_circuit(params)
    kp = params.kernel
    m = grid.n_half
    taus_h = grid.taus_half
    dt = grid.dtau
    dt2 = dt * dt
    w0sq = params.omega0 ** 2

    w = np.full(m, dt)
    w[0] = w[-1] = 0.5 * dt
    kv = kernel_K(np.arange(2 * m - 1) * dt, kp)
    km = toeplitz(kv[:m])                       # K(tau_i - tau_j)
    kpl = hankel(kv[:m], kv[m - 1:])            # K(tau_i + tau_j)
    mass_ext, tail_ext = _ext_integrals(taus_h, grid.tau_max, kp)
    mass = (km + kpl) @ w + mass_ext
    lmat = np.diag(mass) - (km - kpl) * w[None, :]

    d2 = np.zeros((m, m))
    idx = np.arange(1, m - 1)
    d2[idx, idx] = -2.0 / dt2
    d2[idx, idx - 1] = 1.0 / dt2
    d2[idx, idx + 1] = 1.0 / dt2

    phi_b = phi0_bare(taus_h, params.omega0)
    sin_b = np.sin(2.0 * phi_b)
    force = forcing_term_band(taus_h, params)
    base = d2 - lmat

    x = np.zeros(m)
    c = 0.0
    res_norm = math.inf
    total_newton = 0
    for _ in range(n_tail_updates + 1):
        x[0] = 0.0
        x[-1] = c / grid.tau_max if c != 0.0 else 0.0
        for _ in range(max_newton):
            dsin = 0.5 * w0sq * (np.sin(2.0 * phi_b + 2.0 * x) - sin_b)
            res = base @ x - dsin - force + c * tail_ext
            res[0] = res[-1] = 0.0
            res_norm = float(np.max(np.abs(res)))
            jac = base[1:-1, 1:-1] - np.diag(
                w0sq * np.cos(2.0 * phi_b[1:-1] + 2.0 * x[1:-1]))
            step = np.linalg.solve(jac, -res[1:-1])
            smax = float(np.max(np.abs(step)))
            if smax > 0.5:
                step *= 0.5 / smax
            x[1:-1] += step
            total_newton += 1
            if smax < 0.1 * tol:
                break
        c_new = float(np.sum(x[m // 2:] / taus_h[m // 2:]) /
                      np.sum(1.0 / taus_h[m // 2:] ** 2))
        if abs(c_new - c) < 1e-12 * max(1.0, abs(c)):
            c = c_new
            break
        c = c_new

    full = np.concatenate([-x[1:][::-1], x])
    return Trajectory(grid=grid, delta_phi=full, params=params,
                      method="integro-differential", residual=res_norm,
                      n_iterations=total_newton, tail_coeff=c)


# ----------------------------------------------------------------------
# generic-potential bare trajectory


@dataclass(frozen=True)
class BarePath:
    """Undamped trajectory between adjacent minima of a general
    potential, sampled on a symmetric grid."""

    taus: np.ndarray
    phi: np.ndarray
    phi_a: float
    phi_b: float
    omega_a: float
    omega_b: float


def solve_bare_generic(V, phi_a: float, phi_b: float, C0: float,
                       grid: TimeGrid, n_phi: int = 2001,
                       x_span: float = 10.0) -> BarePath:
    """Quadrature solution of C0 phi'' = V'(phi) between degenerate
    minima phi_a < phi_b:  tau(phi) = Int sqrt(C0 / 2(V - V_a)) dphi,
    inverted onto the time grid.  The exponential approach to each
    minimum is matched analytically beyond the sampled range.
    """
    if not phi_b > phi_a:
        raise ValueError("need phi_b > phi_a")
    va = V(phi_a)
    if abs(V(phi_b) - va) > 1e-10 * max(1.0, abs(va)):
        raise ValueError("potential minima are not degenerate")
    # curvature at the minima sets the asymptotic decay rates
    hstep = 1e-5 * (phi_b - phi_a)
    vpp_a = (V(phi_a + hstep) - 2.0 * va + V(phi_a - hstep)) / hstep ** 2
    vpp_b = (V(phi_b + hstep) - 2.0 * V(phi_b) + V(phi_b - hstep)) / hstep ** 2
    if vpp_a <= 0.0 or vpp_b <= 0.0:
        raise ValueError("endpoints are not minima")
    kap_a = math.sqrt(vpp_a / C0)
    kap_b = math.sqrt(vpp_b / C0)

    # tanh-spaced phi samples crowd the endpoints where tau diverges
    xs = np.linspace(-x_span, x_span, n_phi)
    s = 0.5 * (1.0 + np.tanh(xs))
    phis = phi_a + (phi_b - phi_a) * s
    gl_x, gl_w = leggauss(8)

    def speed_inv(p):
        dv = V(p) - va
        return np.sqrt(C0 / (2.0 * np.maximum(dv, 1e-300)))

    mids = 0.5 * (phis[1:] + phis[:-1])
    halfw = 0.5 * (phis[1:] - phis[:-1])
    nodes = mids[:, None] + halfw[:, None] * gl_x[None, :]
    seg = (speed_inv(nodes) @ gl_w) * halfw
    tau_of_phi = np.concatenate([[0.0], np.cumsum(seg)])
    # anchor tau = 0 at the midpoint of the potential drop
    i_mid = n_phi // 2
    tau_of_phi -= tau_of_phi[i_mid]

    interp = CubicSpline(tau_of_phi, phis)
    taus = grid.taus
    phi = np.empty_like(taus)
    inside = (taus > tau_of_phi[0]) & (taus < tau_of_phi[-1])
    phi[inside] = interp(taus[inside])
    left = taus <= tau_of_phi[0]
    amp_a = (phis[0] - phi_a) * np.exp(kap_a * tau_of_phi[0])
    phi[left] = phi_a + amp_a * np.exp(kap_a * taus[left])
    right = taus >= tau_of_phi[-1]
    amp_b = (phi_b - phis[-1]) * np.exp(kap_b * tau_of_phi[-1])
    phi[right] = phi_b - amp_b * np.exp(-kap_b * taus[right])
    return BarePath(taus=taus, phi=phi, phi_a=phi_a, phi_b=phi_b,
                    omega_a=kap_a, omega_b=kap_b)
