import csv
import json

import numpy as np
import pytest

from selfdual.axisym import AxisymGrid, confined_profile
from selfdual.cli import main
from selfdual.snapshot import read_snapshot, write_snapshot

SMALL = """resolution = 8
nu = 0.1
dt = 0.01
t_end = 0.05
output.every = 1
initial.kind = random-band
initial.band = 2
initial.seed = 3
"""


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(SMALL)
    return p


class TestUsage:
    def test_missing_config(self, tmp_path):
        assert main(["--config", str(tmp_path / "missing.cfg"), "simulate-ns"]) == 1

    def test_unknown_command(self):
        assert main(["bogus"]) == 1

    def test_no_command(self):
        assert main([]) == 1

    def test_bad_config(self, tmp_path, capsys):
        p = tmp_path / "bad.cfg"
        p.write_text("nu = -1\nwhat = 3\n")
        assert main(["--config", str(p), "simulate-ns"]) == 1
        assert "line 2" in capsys.readouterr().err

    def test_bad_threads(self, cfg):
        assert main(["--threads", "0", "--config", str(cfg), "simulate-ns"]) == 1


class TestSimulate:
    def test_simulate_ns(self, tmp_path, cfg, capsys):
        out = tmp_path / "out"
        assert main(["--config", str(cfg), "--output-dir", str(out), "simulate-ns"]) == 0
        info = json.loads(capsys.readouterr().out)
        assert info["samples"] == 6 and info["seed"] == 3
        assert (out / "diagnostics.csv").exists()

    def test_simulate_ns_deterministic(self, tmp_path, cfg):
        for d in ("a", "b"):
            assert main(["--config", str(cfg), "--output-dir", str(tmp_path / d), "simulate-ns"]) == 0
        assert (tmp_path / "a" / "diagnostics.csv").read_bytes() == \
            (tmp_path / "b" / "diagnostics.csv").read_bytes()

    def test_seed_override(self, tmp_path, cfg, capsys):
        assert main(["--config", str(cfg), "--seed", "11", "--output-dir", str(tmp_path),
                     "simulate-ns"]) == 0
        assert json.loads(capsys.readouterr().out)["seed"] == 11

    def test_simulate_selfdual(self, tmp_path, cfg, capsys):
        assert main(["--config", str(cfg), "--output-dir", str(tmp_path), "simulate-selfdual"]) == 0
        info = json.loads(capsys.readouterr().out)
        assert info["max_abs_helicity"] <= 1e-10 * info["final_energy"] * 10
        assert read_snapshot(tmp_path / "final.sdns").kind == "scalar3d"

    def test_simulate_axisym(self, tmp_path):
        p = tmp_path / "ax.cfg"
        p.write_text("resolution = 32 32 16\nnu = 0.05\ndt = 0.01\nt_end = 0.03\n"
                     "initial.amplitude = 0.05\n")
        assert main(["--config", str(p), "--output-dir", str(tmp_path), "simulate-axisym"]) == 0
        with open(tmp_path / "axisym.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["t", "L2", "odd_L2", "even_L2", "tail_frac"] and len(rows) == 3
        snap = read_snapshot(tmp_path / "final.sdns")
        assert snap.kind == "axisym" and snap.values.shape == (32, 16)

    def test_divergence_exit(self, tmp_path):
        p = tmp_path / "blow.cfg"
        p.write_text("resolution = 8\nnu = 0\ndt = 5\nt_end = 50\ninitial.amplitude = 50\n"
                     "initial.band = 3\n")
        with pytest.warns(RuntimeWarning):
            assert main(["--config", str(p), "--output-dir", str(tmp_path), "simulate-ns"]) == 3


class TestVerify:
    def test_kernels_thousand_samples(self, capsys):
        code = main(["verify-kernels", "--samples", "1000", "--seed", "7"])
        assert capsys.readouterr().out.strip()
        assert code == 0

    def test_kernels_report_file(self, tmp_path):
        rep = tmp_path / "k.txt"
        code = main(["verify-kernels", "--samples", "50", "--seed", "1", "--report", str(rep)])
        assert code in (0, 2) and rep.read_text().strip()

    def test_equivalence(self, capsys):
        assert main(["verify-equivalence", "--resolution", "32", "--t-end", "0.02"]) == 0
        assert "max relative trajectory deviation" in capsys.readouterr().out

    def test_symmetry(self, capsys):
        assert main(["verify-symmetry", "--resolution", "16", "--t-end", "0.05"]) == 0
        assert "PASS" in capsys.readouterr().out

    def test_equivalence_tolerance_breach(self):
        assert main(["verify-equivalence", "--resolution", "16", "--t-end", "0.01",
                     "--tol", "0"]) == 2


class TestStationaryAndDiagnose:
    def test_find_stationary_zero(self, tmp_path, capsys):
        assert main(["--output-dir", str(tmp_path), "find-stationary", "--nr", "16", "--nz", "8"]) == 0
        info = json.loads(capsys.readouterr().out)
        assert info["converged"] and info["residual_norm"] == 0.0
        assert read_snapshot(tmp_path / "stationary.sdns", expect_kind="axisym").values.shape == (16, 8)

    def test_find_stationary_guess(self, tmp_path, capsys):
        g = AxisymGrid(32, 16)
        p = tmp_path / "guess.sdns"
        write_snapshot(p, confined_profile(g, 1e-3).values, g, kind="axisym")
        assert main(["find-stationary", "--guess", str(p), "--nu", "5"]) == 0
        assert json.loads(capsys.readouterr().out)["w_L2"] < 1e-8

    def test_find_stationary_wrong_kind(self, tmp_path, rng):
        from selfdual.spectral import make_grid
        p = tmp_path / "v.sdns"
        write_snapshot(p, rng.standard_normal((8, 8, 8)), make_grid(8), kind="scalar3d")
        assert main(["find-stationary", "--guess", str(p)]) == 1

    @pytest.mark.parametrize("kind", ["vector3d", "scalar3d", "axisym"])
    def test_diagnose(self, tmp_path, capsys, kind):
        from selfdual.navier_stokes import random_velocity
        from selfdual.spectral import make_grid
        p = tmp_path / "s.sdns"
        if kind == "axisym":
            g = AxisymGrid(16, 8)
            write_snapshot(p, confined_profile(g, 0.1).values, g, kind="axisym")
        elif kind == "vector3d":
            g = make_grid(8)
            u = random_velocity(g, np.random.default_rng(0), band=2)
            write_snapshot(p, u.to_physical(), g)
        else:
            g = make_grid(8)
            write_snapshot(p, np.cos(g.x[0]) * np.sin(g.x[2]), g, kind="scalar3d")
        assert main(["diagnose", str(p)]) == 0
        info = json.loads(capsys.readouterr().out)
        assert info["kind"] == kind

    def test_diagnose_truncated(self, tmp_path, capsys):
        p = tmp_path / "s.sdns"
        p.write_bytes(b"SDNS" + b"\0" * 100)
        assert main(["diagnose", str(p)]) == 1
