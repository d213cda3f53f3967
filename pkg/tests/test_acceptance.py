"""End-to-end acceptance battery.

Each test covers one release criterion, prints a single PASS/FAIL line
with the measured figure and its tolerance, and enforces its runtime
budget.
"""

import math
import time

import numpy as np
import pytest

from photon_instanton.continuation import (bracket_series,
                                           compute_mode_factors,
                                           f_apprx_factors, f_factors,
                                           fit_continuation,
                                           spectral_grid_for)
from photon_instanton.device import lambda0, load_devices, omega0_from_EJ
from photon_instanton.pipeline import (EC_OVER_EJ_WARN, RunConfig,
                                       device_sweep, ratio_scan)
from photon_instanton.rates import (action_correction, decay_rate,
                                    delta_S2, self_energy_im,
                                    sinh_resummation_identity)
from photon_instanton.solver import (SpectralFunction, TimeGrid,
                                     Trajectory,
                                     delta_phi_apprx_matsubara_im,
                                     solve_integro_differential,
                                     solve_iterative, tail_flatness)
from photon_instanton.special import (KernelParams, kernel_K,
                                      kernel_K_band_integral)
from tests.conftest import circuit


def _report(num: int, name: str, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    print(f"\ncriterion-{num:02d} {name}: {status} ({detail})")
    assert passed, f"criterion-{num:02d} {name}: {detail}"


def _onres_rate_over_delta(params, tau_max=80.0, dtau=0.04, p=6):
    grid = TimeGrid.for_circuit(params, tau_max_omega0=tau_max,
                                dtau_omega0=dtau)
    traj = solve_iterative(params, grid=grid)
    factors, _ = compute_mode_factors(traj, p=p)
    actions = action_correction(traj, factors)
    res = decay_rate(np.array([params.omega0]), factors, actions,
                     params)
    return res.Gamma_in[0] / params.delta


@pytest.fixture(scope="module")
def point_03():
    p = circuit(0.3)
    traj = solve_iterative(p, grid=TimeGrid.for_circuit(p))
    factors, _ = compute_mode_factors(traj)
    actions = action_correction(traj, factors)
    return p, traj, factors, actions


def test_criterion_01_kernel_exactness(rng):
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        kp = KernelParams(v=rng.uniform(50.0, 800.0),
                          gamma0=rng.uniform(0.1, 3.0))
        taus = np.geomspace(1e-3, 50.0, 25) / kp.v
        rel = np.abs(kernel_K(taus, kp)
                     / kernel_K_band_integral(taus, kp) - 1.0)
        worst = max(worst, float(rel.max()))
        far = np.linspace(21.0, 50.0, 10) / kp.v
        asym = np.abs(kernel_K(far, kp)
                      / (kp.gamma0 / (math.pi * far ** 2)) - 1.0)
        worst_asym = float(asym.max())
        assert worst_asym < 1e-2
    elapsed = time.perf_counter() - t0
    _report(1, "kernel-exactness",
            worst < 1e-8 and elapsed < 10.0,
            f"max rel err {worst:.2e} vs 1e-8, {elapsed:.1f}s < 10s")


def test_criterion_02_solver_cross_validation(traj_02):
    t0 = time.perf_counter()
    worst = 0.0
    for g in (0.1, 0.3, 0.5):
        p = circuit(g)
        grid = TimeGrid.for_circuit(p)
        a = traj_02 if g == 0.2 else solve_iterative(p, grid=grid)
        if g == 0.2:
            continue
        b = solve_integro_differential(p, grid=grid)
        worst = max(worst, float(np.max(np.abs(a.delta_phi
                                               - b.delta_phi))))
    elapsed = time.perf_counter() - t0
    tol = 1e-4 * math.pi
    _report(2, "solver-cross-validation",
            worst < tol and elapsed < 300.0,
            f"sup diff {worst:.2e} vs {tol:.2e}, {elapsed:.0f}s < 300s")


def test_criterion_03_antisymmetry_and_tail(traj_02):
    anti = float(np.max(np.abs(traj_02.delta_phi
                               + traj_02.delta_phi[::-1])))
    flat = tail_flatness(traj_02.grid, traj_02.delta_phi)
    _report(3, "antisymmetry-and-tail",
            anti < 1e-8 and flat < 0.15,
            f"antisymmetry {anti:.2e} vs 1e-8, "
            f"tail 1/tau flatness {flat:.3f} vs 0.15")


def test_criterion_04_linearized_limit_recovery(params_02, traj_02):
    ws = spectral_grid_for(params_02, traj_02.grid.tau_max)
    spec = SpectralFunction(
        omegas=ws,
        imag=delta_phi_apprx_matsubara_im(ws, params_02,
                                          band_corrected=True),
        tail_coeff=0.0)
    fit = fit_continuation(ws, bracket_series(spec, params_02),
                           params_02, p=6)
    wk = np.linspace(0.2, 2.0, 80) * params_02.omega0
    b_dev = float(np.max(np.abs(fit.evaluate_imag_axis(wk) - 1.0)))
    f_dev = float(np.max(np.abs(f_factors(fit, wk, params_02)
                                / f_apprx_factors(wk, params_02)
                                - 1.0)))
    zero_traj = Trajectory(grid=traj_02.grid,
                           delta_phi=np.zeros(traj_02.grid.n_points),
                           params=params_02, method="injected",
                           residual=0.0, n_iterations=0,
                           tail_coeff=0.0)
    ds2_zero = delta_S2(zero_traj)
    _report(4, "linearized-limit-recovery",
            b_dev < 1e-6 and f_dev < 5e-3 and ds2_zero == 0.0,
            f"|B-1| {b_dev:.2e} vs 1e-6, f dev {f_dev:.2e} vs 5e-3, "
            f"dS2(0) = {ds2_zero}")


@pytest.mark.filterwarnings("ignore:mode spacing")
def test_criterion_05_weak_coupling_limit(tmp_path):
    t0 = time.perf_counter()
    cfg = RunConfig(out_dir=str(tmp_path / "runs"), cache=False)
    sweep = ratio_scan(cfg, gamma_ratios=[0.01])
    assert not sweep.errors, sweep.errors
    ratio = float(sweep.columns["ratio"][0])
    elapsed = time.perf_counter() - t0
    _report(5, "weak-coupling-limit",
            abs(ratio - 1.0) < 0.05 and elapsed < 120.0,
            f"on-resonance ratio {ratio:.4f} vs 1 +- 0.05, "
            f"{elapsed:.0f}s < 120s")


@pytest.mark.filterwarnings("ignore:mode spacing")
def test_criterion_06_enhancement_trend(tmp_path):
    cfg = RunConfig(out_dir=str(tmp_path / "runs"), cache=False)
    sweep = ratio_scan(cfg, gamma_ratios=[0.1, 0.25, 0.5])
    assert not sweep.errors, sweep.errors
    r = sweep.columns["ratio"]
    f2r = float(sweep.columns["f2_ratio"][2])
    ear = float(sweep.columns["exp_action_ratio"][2])
    ok = bool(np.all(r > 1.0) and np.all(np.diff(r) > 0.0)
              and f2r > 1.0 and ear > 1.0)
    _report(6, "enhancement-trend", ok,
            f"ratios {np.array2string(r, precision=3)} increasing > 1; "
            f"at 0.5: f2 ratio {f2r:.3f} > 1, "
            f"action ratio {ear:.3f} > 1")


def test_criterion_07_resonance_behavior(params_02, traj_02,
                                         factors_02, factors_fit_02,
                                         actions_02):
    w0, g0 = params_02.omega0, params_02.gamma0
    scan = np.arange(0.9 * w0, 1.1 * w0, 1e-4 * w0)
    f_scan = f_factors(factors_fit_02[1], scan, params_02)
    finite = bool(np.all(np.isfinite(f_scan)))
    neigh = np.maximum(np.abs(f_scan[:-2]), np.abs(f_scan[2:]))
    jumpy = float(np.max(np.abs(f_scan[1:-1]) / neigh))
    probes = w0 + np.linspace(-1.5, 1.5, 13) * g0
    res = decay_rate(probes, factors_02, actions_02, params_02)
    peak_off = abs(probes[int(np.argmax(res.Gamma_in))] - w0)
    _report(7, "resonance-behavior",
            finite and jumpy < 3.0 and peak_off <= 0.5 * g0,
            f"finite on 1e-4 w0 scan, max point/neighbor "
            f"{jumpy:.2f} < 3, peak offset {peak_off:.3f} "
            f"<= Gamma0/2 = {0.5 * g0:.3f}")


def test_criterion_08_resummation_identity(rng):
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        so = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        si = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        lhs, rhs = sinh_resummation_identity(so, si)
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-30))
    elapsed = time.perf_counter() - t0
    _report(8, "resummation-identity",
            worst < 1e-10 and elapsed < 1.0,
            f"max rel err {worst:.2e} vs 1e-10, {elapsed:.2f}s < 1s")


def test_criterion_09_scheme_equivalence(params_02, factors_02,
                                         actions_02):
    w = 0.6 * params_02.omega0
    direct = self_energy_im(w, factors_02, actions_02, params_02,
                            scheme="direct")
    stab = self_energy_im(w, factors_02, actions_02, params_02,
                          scheme="stabilized")
    cross = abs(direct / stab - 1.0)
    s06 = self_energy_im(w, factors_02, actions_02, params_02,
                         omega_c_frac=0.6)
    s09 = self_energy_im(w, factors_02, actions_02, params_02,
                         omega_c_frac=0.9)
    split = abs(s06 / s09 - 1.0)
    _report(9, "scheme-equivalence",
            cross < 1e-2 and split < 5e-3,
            f"direct/stabilized dev {cross:.2e} vs 1e-2, "
            f"omega_c 0.6 vs 0.9 dev {split:.2e} vs 5e-3")


def test_criterion_10_spectrum():
    E_C = 1.0
    harm = abs(omega0_from_EJ(50.0, E_C)
               / (math.sqrt(8.0 * 50.0) - 1.0) - 1.0)
    from photon_instanton.device import EJ_from_omega0
    w0 = omega0_from_EJ(50.0, E_C)
    rt = abs(EJ_from_omega0(w0, E_C) / 50.0 - 1.0)

    def wkb_mis(ratio):
        return abs(lambda0(ratio, E_C, "wkb")
                   / lambda0(ratio, E_C, "exact") - 1.0)

    wkb_ok = wkb_mis(25.0) < wkb_mis(10.0)
    _report(10, "spectrum",
            harm < 1e-2 and rt < 1e-6 and wkb_ok,
            f"harmonic dev {harm:.2e} vs 1e-2, round trip {rt:.2e} vs "
            f"1e-6, WKB mismatch shrinks 10 -> 25: {wkb_ok}")


def test_criterion_11_discretization_robustness(point_03):
    t0 = time.perf_counter()
    p, traj, factors, actions = point_03
    base = decay_rate(np.array([p.omega0]), factors, actions,
                      p).Gamma_in[0] / p.delta
    devs = {}
    # the raw rate is proportional to the mode spacing by construction,
    # so the spacing item is checked on the invariant Gamma_in / Delta
    devs["delta/2"] = _onres_rate_over_delta(
        circuit(0.3, delta=0.08)) / base - 1.0
    devs["v*2"] = _onres_rate_over_delta(
        circuit(0.3, v=800.0)) / base - 1.0
    devs["dtau/2"] = _onres_rate_over_delta(
        circuit(0.3), dtau=0.02) / base - 1.0
    devs["tau_max*2"] = _onres_rate_over_delta(
        circuit(0.3), tau_max=160.0) / base - 1.0
    for order in (4, 8):
        f_o, _ = compute_mode_factors(traj, p=order)
        a_o = action_correction(traj, f_o)
        devs[f"p={order}"] = decay_rate(
            np.array([p.omega0]), f_o, a_o, p).Gamma_in[0] \
            / p.delta / base - 1.0
    worst_name, worst = max(devs.items(), key=lambda kv: abs(kv[1]))
    elapsed = time.perf_counter() - t0
    _report(11, "discretization-robustness",
            abs(worst) < 0.02 and elapsed < 1200.0,
            f"worst {worst_name}: {worst:+.4%} vs 2%, "
            f"{elapsed:.0f}s < 1200s")


@pytest.mark.filterwarnings("ignore:mode spacing")
def test_criterion_12_device_pipeline(tmp_path):
    t0 = time.perf_counter()
    # the sweep floor sits above the charging-limit gap of the most
    # charging-dominated device (4a) so every curve is defined
    cfg = RunConfig(out_dir=str(tmp_path / "runs"), cache=False,
                    tau_max_omega0=60.0, dtau_omega0=0.08,
                    sweep_points=2, sweep_lo_GHz=4.5,
                    sweep_hi_GHz=9.0)
    with pytest.warns(UserWarning, match="device 4a") as rec:
        sweeps = device_sweep(cfg)
    warned = {str(w.message).split(":")[0].split()[-1]
              for w in rec if "E_C/E_J" in str(w.message)}
    assert "4a" in warned
    assert len(sweeps) == 8
    mismatch = {}
    for name, sw in sweeps.items():
        assert not sw.errors, (name, sw.errors)
        mid = sw.columns["Gamma_in_over_delta"]
        lo = sw.columns["band_low"]
        hi = sw.columns["band_high"]
        assert np.all(np.isfinite(mid))
        assert np.all(lo <= mid) and np.all(mid <= hi)
        mismatch[name] = float(np.mean(np.abs(
            mid / sw.columns["Gamma_apprx_over_delta"] - 1.0)))
    a_mean = np.mean([v for k, v in mismatch.items()
                      if k.endswith("a")])
    b_mean = np.mean([v for k, v in mismatch.items()
                      if k.endswith("b")])
    elapsed = time.perf_counter() - t0
    _report(12, "device-pipeline",
            b_mean < a_mean and elapsed < 1800.0,
            f"all 8 devices finite with bands; baseline mismatch "
            f"b-series {b_mean:.3f} < a-series {a_mean:.3f}; "
            f"E_C/E_J > {EC_OVER_EJ_WARN} warning on 4a; "
            f"{elapsed:.0f}s < 1800s")
