"""Run orchestration: configs, caching, parameter sweeps, CSV emission.

A run is described by a flat, fully serializable ``RunConfig``; every
omitted field is filled with a default and the effective config is
echoed into the output directory next to the data, so any CSV can be
reproduced from its sidecar alone.  Point solves are cached under a
hash of the fields that affect them; a cache hit reloads the stored
text artifacts, which round-trip float64 exactly, so hit and miss
outputs are bit-identical.

Sweeps may run points on a bounded worker pool.  Workers only ever
share immutable configs; results are collected in axis order and all
files are written by the single orchestrating thread.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import shutil
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .continuation import (ModeFactors, bracket_series, compute_mode_factors,
                           fit_continuation, spectral_grid_for)
from .device import (CircuitParams, DeviceRecord, EJ_from_omega0,
                     load_devices, temperature_from_mK)
from .rates import (ActionCorrection, RateResult, action_correction,
                    decay_rate, sinh_resummation_identity)
from .solver import (SpectralFunction, TimeGrid, Trajectory,
                     delta_phi_apprx_matsubara_im,
                     solve_integro_differential, solve_iterative)
from .special import kernel_K, kernel_K_band_integral

ENV_PREFIX = "PHOTON_INSTANTON_"

# ratio of charging energy to Josephson energy above which the dilute
# phase-slip expansion itself is invalid (E_J < E_C means there is no
# tunneling barrier to speak of); devices crossing it are flagged
EC_OVER_EJ_WARN = 1.0


@dataclass(frozen=True)
class RunConfig:
    """Flat description of one run; every field has a default.

    Frequencies are in GHz, temperatures in mK; grid and probe fields
    are expressed in units of omega0 so a single config transfers
    across devices.  Exactly one of ``z`` / ``gamma0_ratio`` may be
    given; with neither, gamma0/omega0 = 0.1.
    """

    device: str | None = None
    omega0: float = 8.0
    E_C: float = 1.6
    z: float | None = None
    gamma0_ratio: float | None = None
    E_J: float | None = None
    T_mK: float = 0.0

    tau_max_omega0: float = 80.0
    dtau_omega0: float = 0.04
    v_omega0: float = 50.0
    delta_omega0: float = 0.02
    p: int = 6
    window_omega0: tuple[float, float] | None = None
    anchors_on: bool = True

    scheme: str = "stabilized"
    M: int = 5
    omega_c_frac: float = 0.75
    probes_omega0: tuple[float, ...] = (1.0,)

    scan_values: tuple[float, ...] = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5)
    sweep_lo_GHz: float = 4.0
    sweep_hi_GHz: float = 10.0
    sweep_points: int = 13
    sweep_T_mK: float = 40.0

    out_dir: str = "runs"
    cache: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        if self.z is not None and self.gamma0_ratio is not None:
            raise ValueError("give z or gamma0_ratio, not both")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.sweep_points < 2:
            raise ValueError("sweep_points must be >= 2")
        if not 0.5 < self.omega_c_frac < 1.0:
            raise ValueError("omega_c_frac must be in (0.5, 1)")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        data = dict(data)
        for key in ("window_omega0", "probes_omega0", "scan_values"):
            if data.get(key) is not None:
                data[key] = tuple(data[key])
        return cls(**data)

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("window_omega0", "probes_omega0", "scan_values"):
            if out[key] is not None:
                out[key] = list(out[key])
        return out

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def circuit(self, omega0: float | None = None,
                E_C: float | None = None,
                z: float | None = None,
                T_mK: float | None = None) -> CircuitParams:
        """Effective circuit parameters, with optional per-point overrides."""
        w0 = self.omega0 if omega0 is None else omega0
        ec = self.E_C if E_C is None else E_C
        if z is None:
            z = self.z
        gamma0 = None
        if z is None:
            ratio = 0.1 if self.gamma0_ratio is None else self.gamma0_ratio
            gamma0 = ratio * w0
        T = temperature_from_mK(self.T_mK if T_mK is None else T_mK)
        ej = self.E_J if (omega0 is None and E_C is None) else None
        return CircuitParams.from_inputs(
            omega0=w0, E_C=ec, z=z, gamma0=gamma0, E_J=ej, T=T,
            v=self.v_omega0 * w0, delta=self.delta_omega0 * w0)

    def grid(self, params: CircuitParams) -> TimeGrid:
        return TimeGrid.for_circuit(params,
                                    tau_max_omega0=self.tau_max_omega0,
                                    dtau_omega0=self.dtau_omega0)


def load_config(path: str | os.PathLike | None = None,
                overrides: dict | None = None,
                environ: dict | None = None) -> RunConfig:
    """Build a config from an optional YAML/JSON file, environment
    variables prefixed ``PHOTON_INSTANTON_`` (upper-cased key, YAML
    value), and explicit overrides, in increasing precedence."""
    import yaml

    data: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            loaded = yaml.safe_load(fh)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a mapping")
        data.update(loaded)
    environ = os.environ if environ is None else environ
    for key in RunConfig.__dataclass_fields__:
        raw = environ.get(ENV_PREFIX + key.upper())
        if raw is not None:
            data[key] = yaml.safe_load(raw)
    if overrides:
        data.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_dict(data)


@dataclass
class PointResult:
    """All artifacts of one full pipeline evaluation."""

    params: CircuitParams
    trajectory: Trajectory
    factors: ModeFactors
    actions: ActionCorrection
    rates: RateResult
    cached: bool = False


def _point_key(config: RunConfig, params: CircuitParams) -> str:
    ident = (params.omega0, params.E_C, params.E_J, params.gamma0,
             params.z, params.v, params.delta, params.T,
             config.tau_max_omega0, config.dtau_omega0, config.p,
             config.window_omega0, config.anchors_on, config.scheme,
             config.M, config.omega_c_frac, config.probes_omega0)
    return hashlib.sha256(repr(ident).encode()).hexdigest()[:16]


def _cache_dir(config: RunConfig, key: str) -> Path:
    return Path(config.out_dir) / "cache" / key


def solve_point(config: RunConfig,
                params: CircuitParams | None = None) -> PointResult:
    """Full pipeline for one parameter point: trajectory, mode factors,
    action budget, and decay rates on the configured probe grid.

    With caching on, a previously stored point is reloaded from its
    text artifacts instead of being recomputed; the stored files
    round-trip float64 exactly.
    """
    if params is None:
        params = config.circuit()
    key = _point_key(config, params)
    cdir = _cache_dir(config, key)
    if config.cache and (cdir / "rates.txt").exists():
        traj = Trajectory.load_text(cdir / "trajectory.txt")
        factors = ModeFactors.load_text(cdir / "factors.txt")
        with open(cdir / "actions.json", "r", encoding="utf-8") as fh:
            actions = ActionCorrection(**json.load(fh))
        rates = RateResult.load_text(cdir / "rates.txt")
        return PointResult(params, traj, factors, actions, rates,
                           cached=True)

    traj = solve_iterative(params, grid=config.grid(params))
    window = None
    if config.window_omega0 is not None:
        window = (config.window_omega0[0] * params.omega0,
                  config.window_omega0[1] * params.omega0)
    anchor_fracs = (0.75, 1.0) if config.anchors_on else None
    factors, _ = compute_mode_factors(traj, p=config.p, window=window,
                                      anchor_fracs=anchor_fracs)
    actions = action_correction(traj, factors)
    probes = params.omega0 * np.asarray(config.probes_omega0)
    rates = decay_rate(probes, factors, actions, params,
                       scheme=config.scheme, M=config.M,
                       omega_c_frac=config.omega_c_frac)
    result = PointResult(params, traj, factors, actions, rates)
    if config.cache:
        tmp = cdir.with_suffix(".tmp")
        if tmp.exists():
            shutil.rmtree(tmp)
        tmp.mkdir(parents=True)
        traj.save_text(tmp / "trajectory.txt")
        factors.save_text(tmp / "factors.txt")
        with open(tmp / "actions.json", "w", encoding="utf-8") as fh:
            json.dump({"S0": actions.S0, "dS1": actions.dS1,
                       "dS2": actions.dS2, "dS_apprx": actions.dS_apprx},
                      fh)
        rates.save_text(tmp / "rates.txt")
        if cdir.exists():
            shutil.rmtree(tmp)
        else:
            tmp.rename(cdir)
    return result


@dataclass
class SweepResult:
    """One sweep: axis values plus named result columns of equal length.

    Failed points are recorded in ``errors`` (axis index -> message)
    and carry NaN in every column; a sweep never dies on one point.
    """

    axis_name: str
    axis: np.ndarray
    columns: dict[str, np.ndarray]
    errors: dict[int, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, col in self.columns.items():
            if len(col) != len(self.axis):
                raise ValueError(f"column {name} length mismatch")
        lo = self.columns.get("band_low")
        hi = self.columns.get("band_high")
        if lo is not None and hi is not None:
            mid = self.columns["Gamma_in_over_delta"]
            good = np.isfinite(mid)
            if not (np.all(lo[good] <= mid[good] + 1e-300)
                    and np.all(mid[good] <= hi[good] + 1e-300)):
                raise ValueError("uncertainty band does not straddle "
                                 "the central curve")

    def to_csv(self, path: str | os.PathLike) -> None:
        names = [self.axis_name] + list(self.columns)
        data = np.column_stack([self.axis] + list(self.columns.values()))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(names) + "\n")
            for row in data:
                fh.write(",".join(f"{x:.12e}" for x in row) + "\n")


def write_metadata(path: str | os.PathLike, config: RunConfig,
                   extra: dict | None = None) -> None:
    """Sidecar for one CSV: effective config echo, versions, hash."""
    import scipy

    from . import __version__
    from ._backend import BACKEND

    meta = {
        "config": config.to_dict(),
        "config_hash": config.config_hash(),
        "versions": {"artifact": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "backend": BACKEND},
    }
    if extra:
        meta.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _map_points(config: RunConfig, tasks, worker):
    """Evaluate ``worker`` over ``tasks`` with a bounded pool, in order."""
    if config.workers == 1:
        return [worker(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(worker, tasks))


def ratio_scan(config: RunConfig,
               gamma_ratios=None) -> SweepResult:
    """On-resonance enhancement over the linearized baseline as a
    function of gamma0/omega0 at fixed omega0 and E_C, zero
    temperature, with z tied by gamma0 = 4 E_C / (pi z).

    Emits the ratio plus its decomposition: the on-resonance f^2 ratio
    and the tunneling-weight ratio e^{-2(dS - dS_apprx)}; the product
    of those two with the self-energy ratio reconstructs the total.
    """
    if gamma_ratios is None:
        gamma_ratios = config.scan_values
    ratios = np.asarray(gamma_ratios, dtype=np.float64)
    if np.any(ratios <= 0.0) or np.any(ratios > 0.7):
        raise ValueError("scan values must lie in (0, 0.7]")
    base = replace(config, z=None, gamma0_ratio=None, T_mK=0.0,
                   probes_omega0=(1.0,))

    def one(g: float):
        cfg = replace(base, gamma0_ratio=float(g))
        pt = solve_point(cfg)
        f2 = np.interp(pt.params.omega0, pt.factors.omegas, pt.factors.f) ** 2
        f2_a = np.interp(pt.params.omega0, pt.factors.omegas,
                         pt.factors.f_apprx) ** 2
        return {
            "Gamma_in": pt.rates.Gamma_in[0],
            "Gamma_in_apprx": pt.rates.Gamma_in_apprx[0],
            "ratio": pt.rates.Gamma_in[0] / pt.rates.Gamma_in_apprx[0],
            "f2_ratio": f2 / f2_a,
            "exp_action_ratio": math.exp(
                -2.0 * (pt.actions.total - pt.actions.dS_apprx)),
            "dS1": pt.actions.dS1,
            "dS2": pt.actions.dS2,
            "dS_apprx": pt.actions.dS_apprx,
            "flags": float(pt.rates.flags[0]),
        }

    names = ["Gamma_in", "Gamma_in_apprx", "ratio", "f2_ratio",
             "exp_action_ratio", "dS1", "dS2", "dS_apprx", "flags"]
    cols = {n: np.full(len(ratios), np.nan) for n in names}
    errors: dict[int, str] = {}

    def safe(args):
        i, g = args
        try:
            return i, one(g), None
        except Exception as exc:  # per-point isolation
            return i, None, f"{type(exc).__name__}: {exc}"

    for i, row, err in _map_points(config, list(enumerate(ratios)), safe):
        if err is not None:
            errors[i] = err
            continue
        for n in names:
            cols[n][i] = row[n]
    return SweepResult("gamma0_over_omega0", ratios, cols, errors)


def device_sweep(config: RunConfig,
                 devices: list[DeviceRecord] | None = None,
                 ) -> dict[str, SweepResult]:
    """Per-device frequency sweep of the on-resonance rate.

    For each device the qubit frequency is swept over the configured
    range, the Josephson energy is inverted from it at each point, and
    Gamma_in / Delta is computed centrally and at the four corners of
    +-10% on the impedance (through z) and on E_C; the corner envelope
    is reported as the uncertainty band.  Temperature defaults to the
    sweep temperature (40 mK).
    """
    if devices is None:
        devices = load_devices()
    w0s = np.linspace(config.sweep_lo_GHz, config.sweep_hi_GHz,
                      config.sweep_points)
    corners = [(0.9, 0.9), (0.9, 1.1), (1.1, 0.9), (1.1, 1.1)]
    out: dict[str, SweepResult] = {}
    for dev in devices:
        margin = dev.E_C / EJ_margin_ref(dev, w0s[0])
        if margin > EC_OVER_EJ_WARN:
            warnings.warn(
                f"device {dev.name}: E_C/E_J = {margin:.3g} exceeds "
                f"{EC_OVER_EJ_WARN} at the low end of the sweep; the "
                "dilute phase-slip treatment is marginal there",
                stacklevel=2)

        def one(args):
            i, w0 = args
            try:
                row = _device_point(config, dev, float(w0), corners)
                return i, row, None
            except Exception as exc:
                return i, None, f"{type(exc).__name__}: {exc}"

        names = ["Gamma_in_over_delta", "Gamma_apprx_over_delta",
                 "band_low", "band_high", "E_J", "flags"]
        cols = {n: np.full(len(w0s), np.nan) for n in names}
        errors: dict[int, str] = {}
        for i, row, err in _map_points(config, list(enumerate(w0s)), one):
            if err is not None:
                errors[i] = err
                continue
            for n in names:
                cols[n][i] = row[n]
        out[dev.name] = SweepResult("omega0_GHz", w0s, cols, errors)
    return out


def EJ_margin_ref(dev: DeviceRecord, omega0: float) -> float:
    """Josephson energy of a device at the given qubit frequency."""
    return EJ_from_omega0(omega0, dev.E_C)


def _device_point(config: RunConfig, dev: DeviceRecord, w0: float,
                  corners) -> dict[str, float]:
    def run(fz: float, fc: float) -> PointResult:
        params = CircuitParams.from_inputs(
            omega0=w0, E_C=dev.E_C * fc, z=dev.z * fz,
            T=temperature_from_mK(config.sweep_T_mK),
            v=config.v_omega0 * w0, delta=config.delta_omega0 * w0)
        cfg = replace(config, probes_omega0=(1.0,))
        return solve_point(cfg, params=params)

    central = run(1.0, 1.0)
    vals = [run(fz, fc).rates.Gamma_in[0]
            / (config.delta_omega0 * w0) for fz, fc in corners]
    g_mid = central.rates.Gamma_in[0] / central.params.delta
    lo = min(min(vals), g_mid)
    hi = max(max(vals), g_mid)
    return {
        "Gamma_in_over_delta": g_mid,
        "Gamma_apprx_over_delta":
            central.rates.Gamma_in_apprx[0] / central.params.delta,
        "band_low": lo,
        "band_high": hi,
        "E_J": central.params.E_J,
        "flags": float(central.rates.flags[0]),
    }


@dataclass
class CheckResult:
    check_id: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


def validate(config: RunConfig) -> tuple[list[CheckResult], str]:
    """Release-gate invariant suite on the configured circuit.

    Returns the individual named checks plus the effective config
    hash.  Each check compares a measured figure of merit against a
    fixed tolerance; a coarse grid or broken kernel shows up as the
    corresponding named failure.
    """
    checks: list[CheckResult] = []
    params = config.circuit()
    rng = np.random.default_rng(7)

    taus = np.geomspace(1e-3, 50.0, 40) / params.v
    exact = kernel_K(taus, params.kernel)
    oracle = kernel_K_band_integral(taus, params.kernel)
    err = float(np.max(np.abs(exact / oracle - 1.0)))
    checks.append(CheckResult("kernel-oracle", err < 1e-8, err, 1e-8))

    grid = config.grid(params)
    traj = solve_iterative(params, grid=grid)
    traj_int = solve_integro_differential(params, grid=grid)
    sup = float(np.max(np.abs(traj.delta_phi - traj_int.delta_phi)))
    checks.append(CheckResult("solver-agreement", sup < 1e-4 * math.pi,
                              sup, 1e-4 * math.pi))

    anti = float(np.max(np.abs(traj.delta_phi + traj.delta_phi[::-1])))
    checks.append(CheckResult("antisymmetry", anti < 1e-8, anti, 1e-8))

    # inject the closed-form linearized response with the same band
    # symbol the bracket uses; its bracket is identically 1
    ws = spectral_grid_for(params, grid.tau_max)
    spec = SpectralFunction(
        omegas=ws,
        imag=delta_phi_apprx_matsubara_im(ws, params, band_corrected=True),
        tail_coeff=0.0)
    fit = fit_continuation(ws, bracket_series(spec, params), params,
                           p=config.p)
    test_w = np.linspace(0.2, 2.0, 40) * params.omega0
    dev = float(np.max(np.abs(fit.evaluate_imag_axis(test_w) - 1.0)))
    checks.append(CheckResult("limit-recovery", dev < 1e-6, dev, 1e-6))

    worst = 0.0
    for _ in range(50):
        so, si = [complex(*rng.uniform(-2.0, 2.0, 2)) for _ in range(2)]
        lhs, rhs = sinh_resummation_identity(so, si)
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-30))
    checks.append(CheckResult("resummation-identity", worst < 1e-10,
                              worst, 1e-10))

    fine = TimeGrid(tau_max=grid.tau_max, n_points=2 * grid.n_points - 1)
    traj_f = solve_iterative(params, grid=fine)
    drift = float(np.max(np.abs(traj_f.delta_phi[::2] - traj.delta_phi)))
    checks.append(CheckResult("grid-convergence", drift < 2e-4, drift,
                              2e-4,
                              detail="sup change of delta_phi under "
                                     "dtau -> dtau/2"))

    return checks, config.config_hash()
