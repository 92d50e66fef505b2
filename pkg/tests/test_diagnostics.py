import numpy as np
import pytest

from selfdual.config import SimConfig
from selfdual.diagnostics import (CSV_COLUMNS, Accumulators, balance_drift, blowup_monitors,
                                  compute_record, critical_energy, critical_split, energy,
                                  helicity, read_csv, scaling_transform, tail_fraction, write_csv)
from selfdual.errors import InsufficientDataError, ScalingError
from selfdual.navier_stokes import (beltrami_shell, evolve, random_scalar, random_velocity,
                                    selfdual_initial, taylor_green)
from selfdual.spectral import SpectralVector, make_grid

from conftest import rel


class TestRecord:
    def test_beltrami_shell(self, grid16):
        a = 0.7
        u = beltrami_shell(grid16, amplitude=a)
        rec = compute_record(u, 0.0, Accumulators())
        # three unit-wavenumber shear pairs: |u|^2 averages to 3 a^2
        assert rec.E == pytest.approx(0.5 * 3 * a**2 * (2 * np.pi) ** 3, rel=1e-13)
        assert rec.H_inst == pytest.approx(rec.Ec_plus, rel=1e-13)
        assert rec.Ec_plus == pytest.approx(rec.E, rel=1e-13)
        assert abs(rec.Ec_minus) <= 1e-13 * rec.E

    def test_self_dual(self, basis16, grid16, rng):
        u = selfdual_initial(random_scalar(grid16, rng), basis16)
        rec = compute_record(u, 0.0, Accumulators())
        assert abs(rec.H_inst) <= 1e-12 * rec.E
        assert abs(rec.Ec_plus - rec.Ec_minus) <= 1e-12 * rec.Ec_plus
        assert rec.selfdual_res <= 1e-15

    def test_zero(self, grid8):
        rec = compute_record(SpectralVector.zeros(grid8), 0.0, Accumulators())
        assert all(x == 0 for x in rec.as_row())

    def test_helicity_split(self, grid16, rng):
        u = random_velocity(grid16, rng)
        ep, em = critical_split(u)
        assert abs(ep + em - critical_energy(u)) <= 1e-12 * critical_energy(u)
        assert abs(ep - em - helicity(u)) <= 1e-12 * critical_energy(u)

    def test_csv_round_trip(self, tmp_path, grid16, rng):
        u = random_velocity(grid16, rng)
        recs = [compute_record(u, t, Accumulators()) for t in (0.0, 0.5)]
        write_csv(tmp_path / "d.csv", recs)
        with open(tmp_path / "d.csv") as fh:
            assert fh.readline().strip().split(",") == list(CSV_COLUMNS)
        assert read_csv(tmp_path / "d.csv") == recs


class TestBalance:
    def test_beltrami_exact(self, grid16):
        cfg = SimConfig(resolution=(16,) * 3, nu=0.1, dt=0.01, t_end=0.5, output_every=10)
        traj = evolve(beltrami_shell(grid16), cfg)
        d = balance_drift(traj)
        assert d["energy_drift"] <= 1e-10 and d["helicity_drift"] <= 1e-10

    def test_euler_short(self, grid16, rng):
        u0 = random_velocity(grid16, rng)
        cfg = SimConfig(resolution=(16,) * 3, nu=0.0, dt=1e-3, t_end=0.05, output_every=10)
        assert balance_drift(evolve(u0, cfg))["energy_drift"] <= 1e-9

    def test_viscous_general(self, grid16, rng):
        u0 = random_velocity(grid16, rng)
        cfg = SimConfig(resolution=(16,) * 3, nu=0.05, dt=1e-3, t_end=0.1, output_every=20)
        d = balance_drift(evolve(u0, cfg))
        assert d["energy_drift"] <= 1e-8 and d["helicity_drift"] <= 1e-8

    def test_single_sample(self, grid8):
        rec = compute_record(SpectralVector.zeros(grid8), 0.0, Accumulators())
        with pytest.raises(InsufficientDataError):
            balance_drift([rec])


class TestScaling:
    def test_identity(self, grid16, rng):
        u = random_velocity(grid16, rng)
        assert rel(scaling_transform(u, 1), u) == 0.0

    def test_single_mode(self, grid16):
        c = np.zeros((3,) + grid16.n, complex)
        c[2, 1, 2, 0] = c[2, -1, -2, 0] = 0.5
        u = SpectralVector(grid16, c)
        s = scaling_transform(u, 2).coef
        assert s[2, 2, 4, 0] == 1.0 and s[2, -2, -4, 0] == 1.0
        assert np.count_nonzero(s) == 2

    def test_overflow(self, grid16, rng):
        with pytest.raises(ScalingError):
            scaling_transform(random_velocity(grid16, rng, band=6), 2)

    def test_bad_factor(self, grid16, rng):
        with pytest.raises(ScalingError):
            scaling_transform(random_velocity(grid16, rng), 1.5)

    def test_critical_energy_invariant(self, grid16, rng):
        u = random_velocity(grid16, rng, band=4)
        shrunk = make_grid(16, np.pi)
        s = scaling_transform(u, 2, target=shrunk)
        assert critical_energy(s) == pytest.approx(critical_energy(u), rel=1e-13)
        assert energy(s) == pytest.approx(energy(u) / 2, rel=1e-13)


class TestMonitors:
    def test_decaying_run(self, grid16):
        cfg = SimConfig(resolution=(16,) * 3, nu=0.2, dt=5e-3, t_end=1.0, output_every=20)
        traj = evolve(taylor_green(grid16), cfg)
        mon = blowup_monitors(traj)
        late = mon["max_vort"][len(mon["t"]) // 3:]
        assert np.all(np.diff(late) < 0)
        assert not mon["resolution_loss"] and mon["untrusted_from"] is None
        assert np.all(np.diff(mon["bkm"]) > 0)

    def test_under_resolved(self):
        g = make_grid(8)
        u0 = random_velocity(g, np.random.default_rng(0), band=4, amplitude=5.0)
        cfg = SimConfig(resolution=(8,) * 3, nu=0.0, dt=2e-3, t_end=0.2, output_every=10)
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            mon = blowup_monitors(evolve(u0, cfg))
        assert mon["resolution_loss"]
        assert mon["untrusted_from"] is not None

    def test_tail_fraction(self, grid16):
        c = np.zeros((3,) + grid16.n, complex)
        c[0, 5, 0, 0] = 1.0
        assert tail_fraction(grid16, c) == 1.0
        c[0, 5, 0, 0], c[0, 1, 0, 0] = 0.0, 1.0
        assert tail_fraction(grid16, c) == 0.0
