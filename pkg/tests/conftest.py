import numpy as np
import pytest

from photon_instanton.continuation import compute_mode_factors
from photon_instanton.device import CircuitParams
from photon_instanton.rates import action_correction
from photon_instanton.solver import TimeGrid, solve_iterative


def circuit(gamma_ratio: float, omega0: float = 8.0,
            E_C: float = 1.6, **kw) -> CircuitParams:
    return CircuitParams.from_inputs(omega0=omega0, E_C=E_C,
                                     gamma0=gamma_ratio * omega0, **kw)


@pytest.fixture(scope="session")
def params_02() -> CircuitParams:
    return circuit(0.2)


@pytest.fixture(scope="session")
def traj_02(params_02):
    return solve_iterative(params_02, grid=TimeGrid.for_circuit(params_02))


@pytest.fixture(scope="session")
def factors_fit_02(traj_02):
    return compute_mode_factors(traj_02)


@pytest.fixture(scope="session")
def factors_02(factors_fit_02):
    return factors_fit_02[0]


@pytest.fixture(scope="session")
def actions_02(traj_02, factors_02):
    return action_correction(traj_02, factors_02)


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.default_rng(20260823)
