"""Inelastic photon decay induced by phase slips of a transmon
terminating a high-impedance Josephson-junction transmission line.

The computation proceeds in stages, one module each:

* :mod:`.special` - friction kernel of the junction array and the
  other special functions everything else is built on;
* :mod:`.device` - circuit-level parameters, transmon spectrum,
  phase-slip amplitude, photon mode grid, measured device table;
* :mod:`.solver` - the Euclidean saddle-point trajectory of a phase
  slip with the array's retarded friction (two independent routes);
* :mod:`.continuation` - analytic continuation of the trajectory's
  Matsubara transform to real frequency and the per-mode overlap
  factors f_k, f~_k;
* :mod:`.rates` - action corrections, the resummed multi-photon
  self-energy, and the inelastic decay rates Gamma_k^in;
* :mod:`.pipeline` / :mod:`.cli` - cached, reproducible sweeps and the
  command-line front end.

Heavy inner loops live in a compiled extension with a pure-Python
fallback; see :mod:`._backend`.
"""

from ._backend import BACKEND
from .continuation import ModeFactors, compute_mode_factors
from .device import (CircuitParams, DeviceRecord, EJ_from_omega0,
                     build_mode_grid, get_device, lambda0, lambda_star,
                     load_devices, omega0_from_EJ, temperature_from_mK)
from .pipeline import (RunConfig, SweepResult, device_sweep, load_config,
                       ratio_scan, solve_point, validate)
from .rates import (ActionCorrection, RateResult, action_correction,
                    decay_rate, self_energy_im)
from .solver import (TimeGrid, Trajectory, solve_integro_differential,
                     solve_iterative)
from .special import KernelParams, kernel_K

__version__ = "0.1.0"

__all__ = [
    "ActionCorrection", "BACKEND", "CircuitParams", "DeviceRecord",
    "EJ_from_omega0", "KernelParams", "ModeFactors", "RateResult",
    "RunConfig", "SweepResult", "TimeGrid", "Trajectory",
    "action_correction", "build_mode_grid", "compute_mode_factors",
    "decay_rate", "device_sweep", "get_device", "kernel_K", "lambda0",
    "lambda_star", "load_config", "load_devices", "omega0_from_EJ",
    "ratio_scan", "self_energy_im", "solve_integro_differential",
    "solve_iterative", "solve_point", "temperature_from_mK", "validate",
    "__version__",
]
