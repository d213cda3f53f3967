"""Action corrections and inelastic photon decay rates.

The phase slip couples to the array modes through the overlap factors
f_k; summing the squared transition amplitudes over all multi-photon
final states resums into a retarded self-energy, and the inelastic
decay rate of a probe photon is

    Gamma_k^in = 2 f_k^2 Im Pi_R(omega_k).

Two evaluation schemes are provided for Im Pi_R:

* "direct": the resummed time integral

      Im Pi_R = -lam0^2 e^{-2 dS} Im Int_0^inf dt sin(w t)
                e^{-2 sum f^2 n_B} [e^{s_out + s_in} - 1 - s_out - s_in],

  with s_out(t) = sum f^2 (1 + n_B) e^{-i w' t} and s_in(t) =
  sum f^2 n_B e^{+i w' t}.  The subtraction of the constant and the
  linear terms is required at finite mode spacing: the linear s_out
  term contains the elastic w' = w component, which would otherwise
  grow secularly instead of integrating to a delta function that
  vanishes in the thermodynamic limit.  The exponent's dynamic range
  grows with sum f^2, so this scheme refuses near-resonance probes.

* "stabilized": the sum over modes is split at w_c in (w/2, w).  At
  T = 0 a photon above w_c cannot be emitted more than once for a
  probe at w < 2 w_c, so the high-mode exponential truncates exactly
  at first order:

      Im Pi_R = (lam0^2 / 2) e^{-2 dS} e^{sum_low f^2}
                Re Int_0^inf dt e^{i w t}
                e^{-sum_low f^2 (1 - e^{-i w' t})}
                (1 + sum_high f^2 e^{-i w' t}),

  with the same finite-spacing subtraction of the secular elastic
  component.  At finite T (T << w) the high-mode exponential is kept
  to M terms and the thermal weight exp(-sum 2 f^2 n_B (1 - cos w' t))
  multiplies the integrand.

The time integrals are quasiperiodic with revival scale 1/Delta; they
are evaluated on [0, t_horizon/Delta] and the cumulative integral is
averaged over its last half with a Hann window, which damps the
non-secular oscillatory remainders.  The residual oscillation
amplitude is monitored and a non-converged integral raises.

Mode sums retain w' <= 2.5 omega0: the analytic continuation that
feeds f_k is only trustworthy below the cos(pi w / 2 omega0) zero at
3 omega0, and modes that high are irrelevant for probes near
resonance.

All operations here are pure functions of immutable inputs; probe
frequencies may be evaluated concurrently over shared factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from ._backend import phase_exp_sum, thermal_cos_sum
from .continuation import ModeFactors, f_apprx_factors
from .device import CircuitParams, build_mode_grid, lambda0, lambda_star
from .solver import Trajectory, phi0_bare
from .special import bose_occupation

# upper mode cutoff for the self-energy sums, in units of omega0
_MODE_CUT_OMEGA0 = 2.5
# default time-integral horizon in units of 1/Delta
_T_HORIZON = 3.0
# sample points per period of the fastest retained oscillation
_PTS_PER_PERIOD = 20
_MAX_T_POINTS = 400_001
# relative oscillation amplitude above which the tail average is
# declared non-converged
_OSC_TOL = 0.5
# bound on the exponent dynamic range 2 sum f^2 (1 + 2 n_B) of the
# direct scheme (beyond it, cancellation eats the significand)
_DIRECT_RANGE_MAX = 30.0


@dataclass(frozen=True)
class ActionCorrection:
    """Action budget of one phase slip: isolated action S0 and the
    array-response corrections."""

    S0: float
    dS1: float
    dS2: float
    dS_apprx: float

    def __post_init__(self) -> None:
        if self.S0 <= 0.0:
            raise ValueError("S0 must be > 0")
        if self.dS1 <= 0.0:
            raise ValueError("dS1 must be > 0")

    @property
    def total(self) -> float:
        return self.dS1 + self.dS2


def delta_S1(factors: ModeFactors) -> float:
    """dS1 = (1/2) sum_k f~_k^2 over the supplied mode grid.

    The sum diverges logarithmically as the mode spacing Delta -> 0;
    that divergence is physical and is compensated in observables by
    the explicit Delta factors of f_k^2.
    """
    return 0.5 * float(np.sum(factors.f_tilde ** 2))


def delta_S_apprx(params: CircuitParams,
                  modes: np.ndarray | None = None) -> float:
    """Linearized-response action correction
    sum_k (Delta / (z w_k)) / cosh^2(pi w_k / 2 omega0)."""
    if modes is None:
        modes = build_mode_grid(params)
    arg = np.minimum(0.5 * math.pi * modes / params.omega0, 350.0)
    return float(np.sum((params.delta / (params.z * modes))
                        / np.cosh(arg) ** 2))


def delta_S2_generic(traj: Trajectory, potential, d_potential,
                     mass_coeff: float) -> float:
    """Beyond-quadratic action correction for a generic potential V:

        dS2 = Int dtau [V(phi) - V(phi0) - V'(phi0) dphi
                        - mass_coeff dphi^2],

    with mass_coeff = C0 omega0^2 / 2 the quadratic weight near the
    minima.  The integrand decays exponentially (the quadratic parts
    cancel identically and the remainder carries e^{-2 omega0 tau}
    envelopes), so trapezoidal quadrature on the grid suffices with no
    tail term.
    """
    grid = traj.grid
    taus = grid.taus
    dphi = traj.delta_phi
    phib = phi0_bare(taus, traj.params.omega0)
    integ = (potential(phib + dphi) - potential(phib)
             - d_potential(phib) * dphi - mass_coeff * dphi ** 2)
    return float(trapezoid(integ, taus))


def delta_S2(traj: Trajectory) -> float:
    """dS2 for the cosine potential V = E_J (1 - cos 2 phi):

        dS2 = -E_J Int dtau [cos 2 phi - cos 2 phi0
                             + 2 sin(2 phi0) dphi + 2 dphi^2].
    """
    e_j = traj.params.E_J
    return delta_S2_generic(
        traj,
        potential=lambda p: e_j * (1.0 - np.cos(2.0 * p)),
        d_potential=lambda p: 2.0 * e_j * np.sin(2.0 * p),
        mass_coeff=2.0 * e_j)


def action_correction(traj: Trajectory, factors: ModeFactors,
                      ) -> ActionCorrection:
    """Assemble the full action budget from one trajectory."""
    params = traj.params
    return ActionCorrection(
        S0=math.sqrt(8.0 * params.E_J / params.E_C),
        dS1=delta_S1(factors),
        dS2=delta_S2(traj),
        dS_apprx=delta_S_apprx(params, factors.omegas))


def sinh_resummation_identity(sigma_out: complex, sigma_in: complex,
                              n_max: int = 30) -> tuple[complex, complex]:
    """Closed form vs truncated double sum of the multi-photon weight.

    Returns (lhs, rhs) with lhs = sinh(s_out + s_in) - s_out - s_in
    and rhs = sum over N_out, N_in >= 0 with odd N_out + N_in >= 3 of
    s_out^N_out s_in^N_in / (N_out! N_in!), truncated at
    N_out + N_in <= n_max.
    """
    so, si = complex(sigma_out), complex(sigma_in)
    if abs(so) >= 5.0 or abs(si) >= 5.0:
        raise ValueError("|sigma| must be < 5 for truncation control")
    lhs = np.sinh(so + si) - so - si
    rhs = 0.0 + 0.0j
    for total in range(3, n_max + 1, 2):
        for n_out in range(total + 1):
            n_in = total - n_out
            rhs += so ** n_out * si ** n_in \
                / (math.factorial(n_out) * math.factorial(n_in))
    return lhs, rhs


def _retained_modes(factors: ModeFactors, params: CircuitParams,
                    apprx: bool) -> tuple[np.ndarray, np.ndarray]:
    mask = factors.omegas <= _MODE_CUT_OMEGA0 * params.omega0
    f = factors.f_apprx if apprx else factors.f
    return factors.omegas[mask], f[mask] ** 2


def _time_grid(params: CircuitParams, omega_fast: float,
               t_horizon: float) -> np.ndarray:
    t_max = t_horizon / params.delta
    dt = 2.0 * math.pi / (_PTS_PER_PERIOD * omega_fast)
    n = min(int(math.ceil(t_max / dt)) + 1, _MAX_T_POINTS)
    return np.linspace(0.0, t_max, n)


def _tail_average(ts: np.ndarray, h: np.ndarray) -> tuple[float, float]:
    """Hann-weighted average of the cumulative integral of h over the
    last half of the horizon; returns (value, oscillation amplitude)."""
    cum = cumulative_trapezoid(h, ts, initial=0.0)
    half = ts >= 0.5 * ts[-1]
    w = np.hanning(int(np.count_nonzero(half)))
    seg = cum[half]
    val = float(np.sum(w * seg) / np.sum(w))
    return val, float(np.max(np.abs(seg - val)))


def _check_converged(value: float, osc: float, h: np.ndarray,
                     omega: float) -> None:
    floor = 1e-9 * (float(np.max(np.abs(h))) / omega + 1e-300)
    if osc > _OSC_TOL * abs(value) and osc > floor:
        raise RuntimeError("self-energy time integral did not converge: "
                           f"oscillation amplitude {osc:.3e} vs value "
                           f"{value:.3e}; extend t_horizon or refine the "
                           "mode grid")


def _self_energy_im_arrays(omega: float, mode_w: np.ndarray,
                           f2: np.ndarray, dS: float,
                           params: CircuitParams, scheme: str, M: int,
                           omega_c_frac: float,
                           t_horizon: float) -> float:
    lam0 = lambda0(params.E_J, params.E_C)
    pref = lam0 * lam0 * math.exp(-2.0 * dS)
    T = params.T
    nb = bose_occupation(mode_w, T) if T > 0.0 else np.zeros_like(mode_w)

    if scheme == "direct":
        if T == 0.0:
            keep = mode_w <= omega * (1.0 + 1e-12)
            mode_w, f2, nb = mode_w[keep], f2[keep], nb[keep]
        dyn_range = 2.0 * float(np.sum(f2 * (1.0 + 2.0 * nb)))
        if dyn_range > _DIRECT_RANGE_MAX:
            raise ValueError(
                f"direct scheme exponent dynamic range {dyn_range:.1f} "
                f"exceeds {_DIRECT_RANGE_MAX}; use scheme='stabilized'")
        ts = _time_grid(params, omega + 2.0 * float(mode_w.max()),
                        t_horizon)
        s_out = phase_exp_sum(f2 * (1.0 + nb), mode_w, ts)
        s_in = np.conj(phase_exp_sum(f2 * nb, mode_w, ts))
        a = math.exp(-2.0 * float(np.sum(f2 * nb))) \
            * (np.exp(s_out + s_in) - 1.0 - s_out - s_in)
        h = np.sin(omega * ts) * a.imag
        val, osc = _tail_average(ts, h)
        _check_converged(val, osc, h, omega)
        return -pref * val

    if scheme != "stabilized":
        raise ValueError(f"unknown scheme {scheme!r}")
    w_c = omega_c_frac * omega
    if not 0.5 * omega < w_c < omega:
        raise ValueError("omega_c must lie in (omega/2, omega)")
    low = mode_w < w_c
    high = ~low
    sum_low = float(np.sum(f2[low]))
    ts = _time_grid(params, omega + 2.0 * float(mode_w.max()), t_horizon)
    x_low = phase_exp_sum(f2[low], mode_w[low], ts)
    env = np.exp(x_low - sum_low)
    s_high = phase_exp_sum(f2[high], mode_w[high], ts)
    # elastic secular component: the probe coincides with a retained
    # mode; its DC product with the envelope mean must be removed (it
    # integrates to a delta that vanishes in the thermodynamic limit)
    probe_f2 = float(np.sum(f2[high][np.abs(mode_w[high] - omega)
                                     < 1e-9 * omega]))

    if T == 0.0:
        integrand = np.exp(1j * omega * ts) \
            * (env * (1.0 + s_high)
               - math.exp(-sum_low)
               * (1.0 + probe_f2 * np.exp(-1j * omega * ts)))
        val, osc = _tail_average(ts, integrand.real)
        _check_converged(val, osc, integrand.real, omega)
        return 0.5 * pref * math.exp(sum_low) * val

    if T > 0.25 * omega:
        raise ValueError("stabilized finite-T expansion requires T << omega")
    therm = np.exp(-thermal_cos_sum(2.0 * f2 * nb, mode_w, ts))
    poly = np.ones_like(s_high)
    term = np.ones_like(s_high)
    for m in range(1, M + 1):
        term = term * s_high / m
        poly = poly + term
    dc = math.exp(-sum_low - 2.0 * float(np.sum(f2 * nb)))
    total = env * therm * poly \
        - dc * (1.0 + probe_f2 * np.exp(-1j * omega * ts))
    h = np.sin(omega * ts) * total.imag
    val, osc = _tail_average(ts, h)
    _check_converged(val, osc, h, omega)
    return -pref * math.exp(sum_low) * val


def self_energy_im(omega: float, factors: ModeFactors,
                   actions: ActionCorrection, params: CircuitParams,
                   scheme: str = "stabilized", M: int = 5,
                   omega_c_frac: float = 0.75,
                   t_horizon: float = _T_HORIZON) -> float:
    """Im Pi_R(omega) from the resummed multi-photon emission sum."""
    if omega <= 0.0:
        raise ValueError("probe frequency must be > 0")
    mode_w, f2 = _retained_modes(factors, params, apprx=False)
    return _self_energy_im_arrays(omega, mode_w, f2, actions.total,
                                  params, scheme, M, omega_c_frac,
                                  t_horizon)


@dataclass
class RateResult:
    """Per-probe inelastic decay rates with the linearized baseline.

    ``flags`` is a per-point bitmask: bit 0 set when
    max{omega_k, T, Gamma0} >= 10 lambda* (perturbative regime), bit 1
    set when Gamma_in / Delta < 1 (rate resolvable below the mode
    spacing); 3 means fully valid.
    """

    omegas: np.ndarray
    Gamma_in: np.ndarray
    Gamma_in_apprx: np.ndarray
    Im_Pi_R: np.ndarray
    flags: np.ndarray

    def __post_init__(self) -> None:
        for a in (self.Gamma_in, self.Gamma_in_apprx, self.Im_Pi_R):
            if not np.all(np.isfinite(a)):
                raise ValueError("rate columns must be finite")

    @property
    def valid(self) -> np.ndarray:
        return self.flags == 3

    def save_text(self, path) -> None:
        np.savetxt(path, np.column_stack(
            [self.omegas, self.Gamma_in, self.Gamma_in_apprx,
             self.Im_Pi_R, self.flags.astype(float)]),
            header="columns: omega_k Gamma_in Gamma_in_apprx Im_Pi_R flags")

    @classmethod
    def load_text(cls, path) -> "RateResult":
        data = np.atleast_2d(np.loadtxt(path))
        return cls(omegas=data[:, 0], Gamma_in=data[:, 1],
                   Gamma_in_apprx=data[:, 2], Im_Pi_R=data[:, 3],
                   flags=data[:, 4].astype(int))


def decay_rate(probe_omegas: np.ndarray, factors: ModeFactors,
               actions: ActionCorrection, params: CircuitParams,
               scheme: str = "stabilized", M: int = 5,
               omega_c_frac: float = 0.75,
               t_horizon: float = _T_HORIZON) -> RateResult:
    """Gamma_k^in = 2 f_k^2 Im Pi_R(omega_k) on the probe grid.

    The baseline column repeats the computation with the
    linearized-response ingredients (f^apprx and dS^apprx, dS2 = 0)
    throughout.  f_k at the probe frequencies is interpolated from the
    factor table, which must cover the probe range.
    """
    probes = np.atleast_1d(np.asarray(probe_omegas, dtype=np.float64))
    if probes.min() < factors.omegas[0] or \
            probes.max() > factors.omegas[-1]:
        raise ValueError("probe frequencies outside the factor table")
    f_p = np.interp(probes, factors.omegas, factors.f)
    fa_p = np.interp(probes, factors.omegas, factors.f_apprx)
    mode_w, f2 = _retained_modes(factors, params, apprx=False)
    mode_wa, f2a = _retained_modes(factors, params, apprx=True)

    im_pi = np.empty_like(probes)
    im_pi_a = np.empty_like(probes)
    for i, w in enumerate(probes):
        im_pi[i] = _self_energy_im_arrays(
            w, mode_w, f2, actions.total, params, scheme, M,
            omega_c_frac, t_horizon)
        im_pi_a[i] = _self_energy_im_arrays(
            w, mode_wa, f2a, actions.dS_apprx, params, scheme, M,
            omega_c_frac, t_horizon)
    gamma = 2.0 * f_p ** 2 * im_pi
    gamma_a = 2.0 * fa_p ** 2 * im_pi_a

    lam_eff = lambda0(params.E_J, params.E_C) \
        * math.exp(-actions.total)
    lam_star = lambda_star(lam_eff, params.omega0, params.z)
    scale = np.maximum(probes, max(params.T, params.gamma0))
    ok_lambda = scale >= 10.0 * lam_star.value
    ok_delta = np.abs(gamma) / params.delta < 1.0
    flags = ok_lambda.astype(int) | (ok_delta.astype(int) << 1)
    return RateResult(omegas=probes, Gamma_in=gamma,
                      Gamma_in_apprx=gamma_a, Im_Pi_R=im_pi, flags=flags)
