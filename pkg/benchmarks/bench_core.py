"""Time the compiled kernels against the numpy fallback.

Run as a script:

    python3 benchmarks/bench_core.py [--sizes small|large]

The backend is chosen at import time, so each variant runs in a
subprocess with PHOTON_INSTANTON_PURE_PYTHON set accordingly and the
parent collates the timings.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

CASES = {
    "small": {"n_grid": 2001, "n_omega": 400, "n_modes": 60, "n_t": 20001},
    "large": {"n_grid": 4001, "n_omega": 1601, "n_modes": 125, "n_t": 100001},
}


def run_case(sizes: dict, repeats: int = 5) -> dict:
    from photon_instanton._backend import (BACKEND, filon_sine,
                                           phase_exp_sum, thermal_cos_sum)

    rng = np.random.default_rng(0)
    y = rng.standard_normal(sizes["n_grid"])
    omegas = np.linspace(0.01, 48.0, sizes["n_omega"])
    coeff = rng.random(sizes["n_modes"])
    mode_w = np.linspace(0.08, 20.0, sizes["n_modes"])
    ts = np.linspace(0.0, 400.0, sizes["n_t"])

    out = {"backend": BACKEND}
    out["filon_sine"] = min(timeit.repeat(
        lambda: filon_sine(y, 0.0, 0.04, omegas), number=3,
        repeat=repeats)) / 3.0
    out["phase_exp_sum"] = min(timeit.repeat(
        lambda: phase_exp_sum(coeff, mode_w, ts), number=3,
        repeat=repeats)) / 3.0
    out["thermal_cos_sum"] = min(timeit.repeat(
        lambda: thermal_cos_sum(coeff, mode_w, ts), number=3,
        repeat=repeats)) / 3.0
    return out


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", choices=sorted(CASES), default="large")
    parser.add_argument("--worker", action="store_true",
                        help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        print(json.dumps(run_case(CASES[args.sizes])))
        return 0

    results = {}
    for label, flag in (("compiled", "0"), ("python", "1")):
        env = dict(os.environ, PHOTON_INSTANTON_PURE_PYTHON=flag)
        proc = subprocess.run(
            [sys.executable, __file__, "--sizes", args.sizes, "--worker"],
            env=env, capture_output=True, text=True, check=True)
        results[label] = json.loads(proc.stdout)

    if results["compiled"]["backend"] != "compiled":
        print("note: compiled extension unavailable, both runs use numpy")
    print(f"{'kernel':<18}{'compiled [ms]':>15}{'numpy [ms]':>15}"
          f"{'speedup':>10}")
    for name in ("filon_sine", "phase_exp_sum", "thermal_cos_sum"):
        tc = results["compiled"][name] * 1e3
        tp = results["python"][name] * 1e3
        print(f"{name:<18}{tc:>15.3f}{tp:>15.3f}{tp / tc:>10.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
