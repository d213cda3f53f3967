import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from photon_instanton import _kernels_py
from photon_instanton._backend import (BACKEND, filon_sine,
                                       phase_exp_sum, thermal_cos_sum)


def _random_case(rng, n=257, n_w=40):
    y = rng.normal(size=n)
    x0, dx = -3.0, 0.025
    omegas = np.concatenate(([0.0], rng.uniform(0.1, 40.0, n_w - 1)))
    return y, x0, dx, omegas


class TestBackendSelection:
    def test_backend_name(self):
        assert BACKEND in ("compiled", "python")

    def test_pure_python_env_switch(self):
        import subprocess
        import sys
        out = subprocess.run(
            [sys.executable, "-c",
             "from photon_instanton._backend import BACKEND; "
             "print(BACKEND)"],
            env={"PHOTON_INSTANTON_PURE_PYTHON": "1", "PATH": "/usr/bin"},
            capture_output=True, text=True)
        assert out.stdout.strip() == "python"


class TestEquivalence:
    def test_filon_sine(self, rng):
        y, x0, dx, omegas = _random_case(rng)
        a = filon_sine(y, x0, dx, omegas)
        b = _kernels_py.filon_sine(y, x0, dx, omegas)
        assert a == pytest.approx(b, rel=1e-10, abs=1e-12)

    def test_phase_exp_sum(self, rng):
        coeff = rng.normal(size=150)
        omegas = rng.uniform(0.1, 50.0, 150)
        ts = np.linspace(0.0, 20.0, 301)
        a = phase_exp_sum(coeff, omegas, ts)
        b = _kernels_py.phase_exp_sum(coeff, omegas, ts)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)

    def test_thermal_cos_sum(self, rng):
        coeff = rng.uniform(0.0, 1.0, 150)
        omegas = rng.uniform(0.1, 50.0, 150)
        ts = np.linspace(0.0, 20.0, 301)
        a = thermal_cos_sum(coeff, omegas, ts)
        b = _kernels_py.thermal_cos_sum(coeff, omegas, ts)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


class TestFilonOracle:
    def test_gaussian_against_quadrature(self):
        # a smooth integrand on a fine grid: the piecewise-linear rule
        # converges to the true oscillatory integral
        x = np.linspace(-6.0, 6.0, 4801)
        y = np.exp(-x * x)
        for w in (0.5, 3.0, 12.0):
            ref, _ = quad(lambda s: np.exp(-s * s) * np.sin(w * s + w
                                                            * 0.0),
                          -6.0, 6.0, epsabs=1e-13, limit=400)
            got = filon_sine(y, x[0], x[1] - x[0], np.array([w]))[0]
            assert got == pytest.approx(ref, abs=1e-8)

    def test_odd_integrand_sine_moment(self):
        # y = x on [-L, L]: Int x sin(wx) dx
        #   = 2 (sin(wL) - wL cos(wL)) / w^2, exact for the rule
        L, n = 4.0, 801
        x = np.linspace(-L, L, n)
        w = 2.7
        exact = 2.0 * (np.sin(w * L) - w * L * np.cos(w * L)) / (w * w)
        got = filon_sine(x, -L, x[1] - x[0], np.array([w]))[0]
        assert got == pytest.approx(exact, rel=1e-12)

    def test_zero_frequency(self):
        y = np.ones(11)
        assert filon_sine(y, 0.0, 0.1, np.array([0.0]))[0] == 0.0

    def test_short_input(self):
        assert filon_sine(np.array([1.0]), 0.0, 0.1,
                          np.array([1.0]))[0] == 0.0


class TestSumsOracle:
    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-2.0, 2.0), min_size=1, max_size=8),
           st.floats(0.0, 10.0))
    def test_phase_exp_sum_matches_loop(self, coeffs, t):
        coeff = np.array(coeffs)
        omegas = np.linspace(0.5, 4.0, coeff.size)
        direct = sum(c * np.exp(-1j * w * t)
                     for c, w in zip(coeff, omegas))
        got = phase_exp_sum(coeff, omegas, np.array([t]))[0]
        assert got == pytest.approx(direct, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(0.0, 2.0), min_size=1, max_size=8),
           st.floats(0.0, 10.0))
    def test_thermal_cos_sum_matches_loop(self, coeffs, t):
        coeff = np.array(coeffs)
        omegas = np.linspace(0.5, 4.0, coeff.size)
        direct = sum(c * (1.0 - np.cos(w * t))
                     for c, w in zip(coeff, omegas))
        got = thermal_cos_sum(coeff, omegas, np.array([t]))[0]
        assert got == pytest.approx(direct, abs=1e-12)

    def test_thermal_cos_nonnegative_for_positive_coeff(self, rng):
        coeff = rng.uniform(0.0, 1.0, 40)
        omegas = rng.uniform(0.1, 20.0, 40)
        ts = np.linspace(0.0, 30.0, 500)
        assert np.all(thermal_cos_sum(coeff, omegas, ts) >= -1e-12)

    def test_phase_exp_at_t0(self, rng):
        coeff = rng.normal(size=30)
        omegas = rng.uniform(0.1, 20.0, 30)
        got = phase_exp_sum(coeff, omegas, np.array([0.0]))[0]
        assert got == pytest.approx(coeff.sum() + 0.0j, abs=1e-13)
