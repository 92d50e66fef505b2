import numpy as np
import pytest
import scipy.special

from selfdual.axisym import (DERIVED_TERMS, AxisymGrid, AxisymScalar, SECTORS, axisym_rhs, confined_profile,
                             evolve_axisym, is_confined, lambda_3d_pow_axisym, lambda_prime_pow,
                             laplacian, lift_to_3d, nonlinear_sum, odd_even_rhs, oddness_residual,
                             radial_derivative, sample_from_3d, swirl_free_rhs, term_coefs)
from selfdual.errors import ConfinementError, ConstraintError
from selfdual.helical import build_basis
from selfdual.scalar import scalar_rhs
from selfdual.spectral import SpectralScalar, make_grid

ODD = ((1, 0.0, 1.0), (2, 0.0, 0.3))
EVEN = ((1, 1.0, 0.0), (2, 0.4, 0.0))


@pytest.fixture(scope="module")
def ag():
    return AxisymGrid(48, 16)


class TestOperators:
    def test_j0_eigenfunction(self, ag):
        k0 = ag.kr[2]
        f = AxisymScalar.from_function(ag, lambda r, z: scipy.special.j0(k0 * r) + 0 * z)
        assert (lambda_prime_pow(f, 1) - f * k0).norm() <= 1e-8 * f.norm() * k0

    def test_lambda_prime_squared_analytic(self, ag):
        s = 0.6
        f = AxisymScalar.from_function(ag, lambda r, z: np.exp(-r**2 / s) * np.cos(z))
        lap_r = AxisymScalar.from_function(
            ag, lambda r, z: (4 * r**2 / s**2 - 4 / s) * np.exp(-r**2 / s) * np.cos(z))
        assert (lambda_prime_pow(f, 2) + lap_r).norm() <= 1e-6 * lap_r.norm()

    def test_lambda_prime_squared_fd(self, ag):
        s = 0.6
        f = AxisymScalar.from_function(ag, lambda r, z: np.exp(-r**2 / s) + 0 * z)
        r = ag.r
        h = 1e-4
        g = lambda x: np.exp(-x**2 / s)  # noqa: E731
        fd = -((g(r + h) - 2 * g(r) + g(r - h)) / h**2 + (g(r + h) - g(r - h)) / (2 * h * r))
        got = lambda_prime_pow(f, 2).values[:, 0]
        assert np.max(np.abs(got - fd)) <= 1e-6 * np.max(np.abs(fd))

    def test_inverse(self, ag):
        f = confined_profile(ag)
        back = lambda_prime_pow(lambda_prime_pow(f, -1), 1)
        assert (back - f).norm() <= 1e-12 * f.norm()

    def test_lambda_3d_eigen(self):
        j01 = scipy.special.jn_zeros(0, 1)[0]
        g = AxisymGrid(16, 16, R=j01 / 3)
        f = AxisymScalar.from_function(g, lambda r, z: scipy.special.j0(3 * r) * np.cos(4 * z))
        assert (lambda_3d_pow_axisym(f, 1) - f * 5.0).norm() <= 1e-10 * f.norm()

    def test_lambda_3d_split(self, ag):
        f = confined_profile(ag)
        lhs = lambda_3d_pow_axisym(f, 2)
        K3 = ag.K3
        rhs = lambda_prime_pow(f, 2) + AxisymScalar.from_coef(ag, K3**2 * f.coef)
        assert (lhs - rhs).norm() <= 1e-12 * lhs.norm()
        assert (laplacian(f) + lhs).norm() <= 1e-12 * lhs.norm()

    def test_radial_derivative(self, ag):
        s = 0.6
        f = AxisymScalar.from_function(ag, lambda r, z: np.exp(-r**2 / s) * np.sin(z))
        ex = -2 * ag.r[:, None] / s * np.exp(-ag.r[:, None]**2 / s) * np.sin(ag.z[None, :])
        assert np.max(np.abs(radial_derivative(f).values - ex)) <= 1e-8

    def test_not_confined(self, ag):
        f = AxisymScalar(ag, np.ones(ag.shape))
        assert not is_confined(f)
        with pytest.raises(ConfinementError):
            lambda_3d_pow_axisym(f, 1)

    def test_confined_profile(self, ag):
        assert is_confined(confined_profile(ag))


class TestRightHandSide:
    def test_zero(self, ag):
        assert axisym_rhs(AxisymScalar(ag, np.zeros(ag.shape)), 0.1).norm() == 0.0

    def test_even_input(self, ag):
        v = confined_profile(ag, 0.05, z_modes=EVEN)
        assert oddness_residual(v) == pytest.approx(2.0)
        terms = term_coefs(v)
        scale = max(np.max(np.abs(t)) for t in terms)
        for t, (_, _, f1, f2) in zip(terms, DERIVED_TERMS):
            if "M" in (f1[0], f2[0]):
                assert np.max(np.abs(t)) <= 1e-14 * scale
        dm, _ = odd_even_rhs(v, 0.0)
        c = v.coef
        pure_p = nonlinear_sum(ag, {"P": c + ag.reflect_coef(c), "M": 0 * c}, select=(1, 7, 8))
        assert (dm - AxisymScalar.from_coef(ag, pure_p / np.sqrt(2))).norm() <= 1e-13 * dm.norm()
        # the odd part is driven: the even sector alone is not invariant
        assert dm.norm() > 1e-3 * v.norm() ** 2

    def test_odd_input_keeps_parity(self, ag):
        v = confined_profile(ag, 0.05, z_modes=ODD)
        dm, dp = odd_even_rhs(v, 0.1)
        assert dp.norm() <= 1e-13 * dm.norm()

    def test_split_consistency(self, ag):
        v = confined_profile(ag, 0.05)
        dm, dp = odd_even_rhs(v, 0.1)
        full = axisym_rhs(v, 0.1)
        assert ((dm + dp) * 0.5 - full).norm() <= 1e-12 * full.norm()

    def test_sector_partition(self):
        for odd, even in SECTORS.values():
            assert sorted(odd + even) == list(range(1, 11))

    def test_swirl_free(self, ag):
        v = confined_profile(ag, 0.05, z_modes=ODD)
        V = v - v.reflect()
        dm, _ = odd_even_rhs(v, 0.1)
        assert (swirl_free_rhs(V, 0.1) - dm).norm() <= 1e-12 * dm.norm()

    def test_swirl_free_rejects_even(self, ag):
        with pytest.raises(ConstraintError):
            swirl_free_rhs(confined_profile(ag, 0.05, z_modes=EVEN), 0.1)

    @pytest.mark.parametrize("signs", ["derived", "printed"])
    def test_every_term_nonzero(self, ag, signs):
        terms = term_coefs(confined_profile(ag, 0.05), signs)
        assert len(terms) == 10
        assert all(np.max(np.abs(t)) > 1e-8 for t in terms)

    def test_printed_table_differs(self, ag):
        v = confined_profile(ag, 0.05)
        a, b = axisym_rhs(v, 0.0, "derived"), axisym_rhs(v, 0.0, "printed")
        assert (a - b).norm() > 0.1 * a.norm()


@pytest.fixture(scope="module")
def setup(ag):
    g = make_grid((128, 128, 16), (4 * np.pi, 4 * np.pi, 2 * np.pi))
    b = build_basis(g)
    v = confined_profile(ag, amplitude=0.05)
    V = SpectralScalar.from_physical(g, lift_to_3d(v, g))
    r3 = sample_from_3d(scalar_rhs(V, b, 0.0, True).coef, g, ag)
    return v, r3


class TestCrossDiscretization:

    def test_lift_sample_round_trip(self, ag, setup):
        v, _ = setup
        g = make_grid((128, 128, 16), (4 * np.pi, 4 * np.pi, 2 * np.pi))
        V = SpectralScalar.from_physical(g, lift_to_3d(v, g))
        assert (sample_from_3d(V.coef, g, ag) - v).norm() <= 1e-6 * v.norm()

    def test_rhs_matches_3d(self, setup):
        v, r3 = setup
        err = (axisym_rhs(v, 0.0) - r3).norm() / r3.norm()
        assert err <= 1e-4

    def test_derived_beats_printed(self, setup):
        v, r3 = setup
        d = (axisym_rhs(v, 0.0, "derived") - r3).norm()
        p = (axisym_rhs(v, 0.0, "printed") - r3).norm()
        assert d < 1e-2 * p


class TestEvolution:
    def test_odd_sector_invariant(self, ag):
        v = confined_profile(ag, 0.05, z_modes=ODD)
        for _, s in evolve_axisym(v, 0.05, 0.01, 0.1, output_every=1):
            assert oddness_residual(s) <= 1e-11

    def test_decay(self, ag):
        v = confined_profile(ag, 0.05)
        traj = evolve_axisym(v, 0.5, 0.01, 0.2)
        assert traj[-1][1].norm() < v.norm()
