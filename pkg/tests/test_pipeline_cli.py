import json
from dataclasses import replace

import numpy as np
import pytest

from photon_instanton.cli import main
from photon_instanton.pipeline import (RunConfig, SweepResult,
                                       load_config, ratio_scan,
                                       solve_point, validate)

FAST = {"tau_max_omega0": 60.0, "dtau_omega0": 0.16}


def _fast_config(tmp_path, **kw):
    merged = {**FAST, "out_dir": str(tmp_path / "runs"), **kw}
    return RunConfig(**merged)


class TestRunConfig:
    def test_round_trip(self):
        cfg = RunConfig(gamma0_ratio=0.3, probes_omega0=(0.75, 1.0))
        assert RunConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown config"):
            RunConfig.from_dict({"gamma_zero": 0.1})

    def test_exclusive_impedance_inputs(self):
        with pytest.raises(ValueError, match="not both"):
            RunConfig(z=1.0, gamma0_ratio=0.2)

    def test_hash_stable_and_sensitive(self):
        a = RunConfig(gamma0_ratio=0.2)
        b = RunConfig(gamma0_ratio=0.2)
        c = RunConfig(gamma0_ratio=0.25)
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != c.config_hash()
        assert len(a.config_hash()) == 16

    def test_circuit_defaults(self):
        p = RunConfig(gamma0_ratio=0.2).circuit()
        assert p.gamma0 == pytest.approx(1.6)
        assert p.v == pytest.approx(50.0 * 8.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            RunConfig(workers=0)
        with pytest.raises(ValueError):
            RunConfig(sweep_points=1)
        with pytest.raises(ValueError):
            RunConfig(omega_c_frac=0.3)


class TestLoadConfig:
    def test_yaml_file(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("gamma0_ratio: 0.3\nprobes_omega0: [0.5, 1.0]\n")
        cfg = load_config(path, environ={})
        assert cfg.gamma0_ratio == 0.3
        assert cfg.probes_omega0 == (0.5, 1.0)

    def test_env_override_beats_file(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("omega0: 6.0\n")
        cfg = load_config(
            path, environ={"PHOTON_INSTANTON_OMEGA0": "7.5",
                           "PHOTON_INSTANTON_CACHE": "false"})
        assert cfg.omega0 == 7.5
        assert cfg.cache is False

    def test_explicit_override_wins(self, tmp_path):
        cfg = load_config(None, overrides={"omega0": 9.0},
                          environ={"PHOTON_INSTANTON_OMEGA0": "7.5"})
        assert cfg.omega0 == 9.0

    def test_non_mapping_file_rejected(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("- just\n- a list\n")
        with pytest.raises(ValueError):
            load_config(path, environ={})


class TestSolvePoint:
    def test_cache_round_trip(self, tmp_path):
        cfg = _fast_config(tmp_path, gamma0_ratio=0.2)
        first = solve_point(cfg)
        second = solve_point(cfg)
        assert not first.cached and second.cached
        assert np.array_equal(first.trajectory.delta_phi,
                              second.trajectory.delta_phi)
        assert np.array_equal(first.factors.f, second.factors.f)
        assert np.array_equal(first.rates.Gamma_in,
                              second.rates.Gamma_in)
        assert first.actions.dS1 == second.actions.dS1

    def test_no_cache(self, tmp_path):
        cfg = _fast_config(tmp_path, gamma0_ratio=0.2, cache=False)
        solve_point(cfg)
        assert solve_point(cfg).cached is False

    def test_cache_key_depends_on_physics(self, tmp_path):
        cfg = _fast_config(tmp_path, gamma0_ratio=0.2)
        solve_point(cfg)
        other = solve_point(replace(cfg, gamma0_ratio=0.25))
        assert not other.cached


class TestSweepResult:
    def test_band_validation(self):
        ax = np.array([1.0, 2.0])
        with pytest.raises(ValueError, match="band"):
            SweepResult("x", ax, {
                "Gamma_in_over_delta": np.array([1.0, 2.0]),
                "band_low": np.array([1.5, 1.0]),
                "band_high": np.array([2.0, 3.0])})

    def test_length_validation(self):
        with pytest.raises(ValueError, match="length"):
            SweepResult("x", np.array([1.0, 2.0]),
                        {"y": np.array([1.0])})

    def test_csv_format(self, tmp_path):
        sw = SweepResult("x", np.array([1.0]),
                         {"y": np.array([2.5])})
        path = tmp_path / "sweep.csv"
        sw.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "x,y"
        assert [float(v) for v in lines[1].split(",")] == [1.0, 2.5]


class TestRatioScan:
    def test_two_point_scan(self, tmp_path):
        cfg = _fast_config(tmp_path, scan_values=(0.1, 0.4))
        sw = ratio_scan(cfg)
        assert not sw.errors
        assert np.all(sw.columns["ratio"] > 1.0)
        assert sw.columns["ratio"][1] > sw.columns["ratio"][0]
        assert np.all(sw.columns["flags"] == 3.0)

    def test_domain(self, tmp_path):
        cfg = _fast_config(tmp_path)
        with pytest.raises(ValueError):
            ratio_scan(cfg, gamma_ratios=[0.9])

    def test_workers_agree_with_serial(self, tmp_path):
        cfg = _fast_config(tmp_path, scan_values=(0.1, 0.3))
        serial = ratio_scan(cfg)
        threaded = ratio_scan(replace(cfg, workers=2,
                                      out_dir=str(tmp_path / "r2")))
        assert np.array_equal(serial.columns["ratio"],
                              threaded.columns["ratio"])


class TestValidate:
    def test_all_checks_pass(self, tmp_path):
        cfg = _fast_config(tmp_path)
        checks, h = validate(cfg)
        names = [c.check_id for c in checks]
        assert names == ["kernel-oracle", "solver-agreement",
                         "antisymmetry", "limit-recovery",
                         "resummation-identity", "grid-convergence"]
        assert all(c.passed for c in checks)
        assert h == cfg.config_hash()

    def test_coarse_grid_flagged(self, tmp_path):
        cfg = _fast_config(tmp_path, dtau_omega0=0.64)
        checks, _ = validate(cfg)
        by_name = {c.check_id: c for c in checks}
        assert not by_name["grid-convergence"].passed
        assert by_name["kernel-oracle"].passed


class TestCli:
    def test_solve_artifacts(self, tmp_path):
        out = tmp_path / "out"
        cfgfile = tmp_path / "run.yaml"
        cfgfile.write_text(
            "gamma0_ratio: 0.2\ntau_max_omega0: 60.0\n"
            "dtau_omega0: 0.16\n")
        rc = main(["solve", "--config", str(cfgfile),
                   "--out", str(out)])
        assert rc == 0
        for name in ("trajectory.txt", "factors.txt", "rates.txt",
                     "solve.meta.json"):
            assert (out / name).exists()
        meta = json.loads((out / "solve.meta.json").read_text())
        assert meta["config_hash"]
        assert meta["flags"] == [3]

    def test_unknown_device_is_config_error(self, tmp_path):
        rc = main(["devices", "--device", "9z",
                   "--out", str(tmp_path / "o")])
        assert rc == 2

    def test_bad_config_is_config_error(self, tmp_path):
        cfgfile = tmp_path / "run.yaml"
        cfgfile.write_text("definitely_not_a_key: 1\n")
        rc = main(["solve", "--config", str(cfgfile),
                   "--out", str(tmp_path / "o")])
        assert rc == 2

    def test_missing_config_file(self, tmp_path):
        rc = main(["solve", "--config", str(tmp_path / "nope.yaml"),
                   "--out", str(tmp_path / "o")])
        assert rc == 2

    def test_ratio_scan_outputs_and_determinism(self, tmp_path):
        cfgfile = tmp_path / "run.yaml"
        cfgfile.write_text(
            "scan_values: [0.1, 0.3]\ntau_max_omega0: 60.0\n"
            "dtau_omega0: 0.16\n")
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            rc = main(["ratio-scan", "--config", str(cfgfile),
                       "--out", str(out), "--no-cache"])
            assert rc == 0
            outs.append(out)
        csv_a = (outs[0] / "ratio_scan.csv").read_bytes()
        csv_b = (outs[1] / "ratio_scan.csv").read_bytes()
        assert csv_a == csv_b
        meta = json.loads(
            (outs[0] / "ratio_scan.meta.json").read_text())
        assert meta["columns"][0] == "gamma0_over_omega0"
        assert "ratio" in meta["columns"]
        assert meta["errors"] == {}
        assert meta["versions"]["backend"] in ("compiled", "python")

    def test_validate_pass_and_report(self, tmp_path):
        cfgfile = tmp_path / "run.yaml"
        cfgfile.write_text("tau_max_omega0: 60.0\ndtau_omega0: 0.16\n")
        out = tmp_path / "v"
        rc = main(["validate", "--config", str(cfgfile),
                   "--out", str(out)])
        assert rc == 0
        report = json.loads((out / "validate.json").read_text())
        assert all(c["passed"] for c in report["checks"])

    def test_validate_failure_exit_code(self, tmp_path):
        cfgfile = tmp_path / "run.yaml"
        cfgfile.write_text("tau_max_omega0: 60.0\ndtau_omega0: 0.64\n")
        out = tmp_path / "v"
        rc = main(["validate", "--config", str(cfgfile),
                   "--out", str(out)])
        assert rc == 1
        report = json.loads((out / "validate.json").read_text())
        failed = {c["id"] for c in report["checks"]
                  if not c["passed"]}
        assert "grid-convergence" in failed
