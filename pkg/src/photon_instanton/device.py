"""Circuit-level model: transmon spectrum, phase-slip amplitude, photon
modes of the junction-array waveguide, and the measured device table.

Conventions: hbar = 1, energies and rates in GHz (angular frequencies
divided by 2 pi are never used; every symbol is an angular quantity in
units where a frequency in GHz equals an energy in GHz).  Temperatures
are converted from mK with k_B/h = 20.836619 GHz/K.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, replace
from importlib import resources
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .special import KernelParams, mathieu_levels

GHZ_PER_MK = 0.020836619  # k_B * (1 mK) / h in GHz

# superconducting resistance quantum h/(2e)^2 in kOhm
R_Q_KOHM = 6.45338


def temperature_from_mK(T_mK: float) -> float:
    """Thermal energy k_B T in GHz for a temperature in mK."""
    if T_mK < 0.0:
        raise ValueError("temperature must be >= 0")
    return T_mK * GHZ_PER_MK


def omega0_from_EJ(E_J: float, E_C: float) -> float:
    """Qubit frequency of the transmon, averaged over gate charge.

    The 0-1 gap is computed by exact diagonalization in the charge basis
    at the two extremal gate charges and averaged, which removes the
    (exponentially small) charge dispersion of both levels.
    """
    if E_J < 0.0 or E_C <= 0.0:
        raise ValueError("need E_J >= 0 and E_C > 0")
    chi = E_J / (2.0 * E_C)
    gaps = []
    for q_g in (0.0, 1.0):
        lv = mathieu_levels(chi, q_g, n_levels=2)
        gaps.append((lv[1] - lv[0]) * E_C)
    return 0.5 * (gaps[0] + gaps[1])


def EJ_from_omega0(omega0: float, E_C: float, tol: float = 1e-8) -> float:
    """Invert omega0_from_EJ for the Josephson energy.

    The gap is monotone in E_J and equals 2 E_C at E_J = 0; requesting a
    smaller frequency is a domain error.
    """
    if omega0 <= 0.0 or E_C <= 0.0:
        raise ValueError("need omega0 > 0 and E_C > 0")
    lo = 0.0
    f_lo = omega0_from_EJ(lo, E_C) - omega0
    if f_lo > tol:
        raise ValueError(
            f"omega0 = {omega0} GHz is below the charging-limit gap "
            f"2 E_C = {2.0 * E_C} GHz; no transmon solution")
    if abs(f_lo) <= tol:
        return 0.0
    # harmonic estimate omega0 ~ sqrt(8 E_J E_C) for the upper bracket
    hi = max(omega0 * omega0 / (4.0 * E_C), 4.0 * E_C)
    while omega0_from_EJ(hi, E_C) < omega0:
        hi *= 2.0
    return brentq(lambda ej: omega0_from_EJ(ej, E_C) - omega0, lo, hi,
                  xtol=tol * max(1.0, omega0 * omega0 / (8.0 * E_C)))


def lambda0(E_J: float, E_C: float, method: str = "exact") -> float:
    """Bare phase-slip amplitude of the isolated transmon.

    "exact": half the splitting between the gate-charge extremes of the
    ground level.  "wkb": the dilute-instanton estimate
    (8/sqrt(pi)) (8 E_J^3 E_C)^(1/4) exp(-sqrt(8 E_J / E_C)).
    """
    if E_J < 0.0 or E_C <= 0.0:
        raise ValueError("need E_J >= 0 and E_C > 0")
    if method == "exact":
        chi = E_J / (2.0 * E_C)
        e1 = mathieu_levels(chi, 1.0, n_levels=1)[0]
        e0 = mathieu_levels(chi, 0.0, n_levels=1)[0]
        return 0.5 * abs(e1 - e0) * E_C
    if method == "wkb":
        if E_J == 0.0:
            return 0.5 * E_C  # charging limit of the exact splitting
        s0 = math.sqrt(8.0 * E_J / E_C)
        return (8.0 / math.sqrt(math.pi)) * (8.0 * E_J ** 3 * E_C) ** 0.25 \
            * math.exp(-s0)
    raise ValueError(f"unknown method {method!r}")


class LambdaStar(NamedTuple):
    value: float
    applicable: bool


def lambda_star(lam0: float, omega0: float, z: float) -> LambdaStar:
    """Renormalized phase-slip amplitude lambda* = (lambda0 /
    omega0^(1/z))^(1/(1 - 1/z)).

    Meaningful only on the insulating side z > 1 of the Schmid
    transition; elsewhere the flow is to zero and (0, False) is
    returned.
    """
    if lam0 < 0.0 or omega0 <= 0.0 or z <= 0.0:
        raise ValueError("need lambda0 >= 0, omega0 > 0, z > 0")
    if z <= 1.0 or lam0 == 0.0:
        return LambdaStar(0.0, False)
    expo = 1.0 / (1.0 - 1.0 / z)
    return LambdaStar((lam0 / omega0 ** (1.0 / z)) ** expo, True)


@dataclass(frozen=True)
class CircuitParams:
    """Full parameter set of a transmon terminating the junction array.

    gamma0 and z are tied by gamma0 = 4 E_C / (pi z); v is the plasmon
    velocity in units where the array spacing is 1, so the photon band
    is omega_q = 2 v sin(q/2) and discrete modes sit at
    omega_k = delta/2 + m delta.
    """

    omega0: float
    E_C: float
    E_J: float
    gamma0: float
    z: float
    v: float
    delta: float
    T: float = 0.0

    def __post_init__(self) -> None:
        for name in ("omega0", "E_C", "gamma0", "z", "v", "delta"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0")
        if self.E_J < 0.0:
            raise ValueError("E_J must be >= 0")
        if self.T < 0.0:
            raise ValueError("T must be >= 0")
        rel = abs(self.gamma0 - 4.0 * self.E_C / (math.pi * self.z))
        if rel > 1e-10 * self.gamma0:
            raise ValueError("gamma0 and z violate gamma0 = 4 E_C/(pi z)")
        if self.delta > 0.2 * min(self.gamma0, self.omega0):
            warnings.warn("mode spacing delta is not small compared to "
                          "min(gamma0, omega0); spectral sums will be coarse",
                          stacklevel=2)
        if self.v < 5.0 * self.omega0:
            warnings.warn("band edge 2v is close to the qubit frequency; "
                          "wide-band formulas lose accuracy", stacklevel=2)

    @classmethod
    def from_inputs(cls, omega0: float, E_C: float, z: float | None = None,
                    gamma0: float | None = None, v: float | None = None,
                    delta: float | None = None, T: float = 0.0,
                    E_J: float | None = None) -> "CircuitParams":
        """Build a consistent parameter set.

        Exactly one of z / gamma0 may be omitted (derived from the
        other); E_J is derived from omega0 unless given.  Defaults:
        v = 50 omega0, delta = omega0 / 50.
        """
        if z is None and gamma0 is None:
            raise ValueError("need z or gamma0")
        if gamma0 is None:
            gamma0 = 4.0 * E_C / (math.pi * z)
        if z is None:
            z = 4.0 * E_C / (math.pi * gamma0)
        if E_J is None:
            E_J = EJ_from_omega0(omega0, E_C)
        return cls(omega0=omega0, E_C=E_C, E_J=E_J, gamma0=gamma0, z=z,
                   v=(50.0 * omega0 if v is None else v),
                   delta=(omega0 / 50.0 if delta is None else delta),
                   T=T)

    @property
    def kernel(self) -> KernelParams:
        return KernelParams(v=self.v, gamma0=self.gamma0)

    def with_temperature(self, T: float) -> "CircuitParams":
        return replace(self, T=T)


def phase_shift_full(omega_k, params: CircuitParams):
    """Scattering phase of a chain mode off the terminating transmon,

        tan(delta_k) = omega_k Gamma0 sqrt(1 - (omega_k/2v)^2)
                       / (omega0^2 - (1 - Gamma0/2v) omega_k^2),

    taken continuously in (0, pi) across the resonance.
    """
    w = np.asarray(omega_k, dtype=np.float64)
    num = w * params.gamma0 * np.sqrt(np.clip(1.0 - (w / (2.0 * params.v)) ** 2,
                                              0.0, None))
    den = params.omega0 ** 2 - (1.0 - params.gamma0 / (2.0 * params.v)) * w * w
    return np.arctan2(num, den)


def phase_shift_bulk(omega_k, v: float):
    """Phase shift of a hard-wall (no transmon) termination,

        tan(delta_k) = omega_k v sqrt(1 - (omega_k/2v)^2)
                       / (v^2 - omega_k^2 / 2),

    continuous in (0, pi).
    """
    w = np.asarray(omega_k, dtype=np.float64)
    num = w * v * np.sqrt(np.clip(1.0 - (w / (2.0 * v)) ** 2, 0.0, None))
    den = v * v - 0.5 * w * w
    return np.arctan2(num, den)


def build_mode_grid(params: CircuitParams) -> np.ndarray:
    """Discrete mode frequencies delta/2 + m delta up to the band edge 2v."""
    n = int(math.floor((2.0 * params.v - 0.5 * params.delta) / params.delta)) + 1
    return 0.5 * params.delta + params.delta * np.arange(n)


@dataclass(frozen=True)
class DeviceRecord:
    """One measured device: impedance Z in kOhm, z = Z/R_Q, charging
    energy and damping rate in GHz."""

    name: str
    Z_kohm: float
    z: float
    E_C: float
    gamma0: float
    series: str

    def circuit(self, omega0: float, T: float = 0.0,
                v: float | None = None,
                delta: float | None = None) -> CircuitParams:
        # gamma0 is rederived from (E_C, z) so the consistency relation
        # holds exactly; the tabulated value is rounded to 2 digits
        return CircuitParams.from_inputs(omega0=omega0, E_C=self.E_C,
                                         z=self.z, v=v, delta=delta, T=T)


def load_devices() -> list[DeviceRecord]:
    """Measured device table bundled with the package."""
    out = []
    with resources.files("photon_instanton.data").joinpath(
            "devices.csv").open("r", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(DeviceRecord(
                name=row["name"], Z_kohm=float(row["Z_kohm"]),
                z=float(row["z"]), E_C=float(row["E_C_GHz"]),
                gamma0=float(row["gamma0_GHz"]), series=row["name"][-1]))
    return out


def get_device(name: str) -> DeviceRecord:
    for dev in load_devices():
        if dev.name == name:
            return dev
    raise KeyError(f"unknown device {name!r}")
