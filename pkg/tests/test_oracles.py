import math

import numpy as np
import pytest

from nsk.errors import AmplitudeTooLarge, InvalidGrid, StabilityGuard
from nsk.oracles import (
    RadialProfile,
    direct_nonlinearity,
    radial_linear_norm,
    rk4_evolve_state,
    rk4_mode,
)
from nsk.pressure import critical_quadratic
from nsk.spectral import PhysParams, make_grid, single_mode_state, zero_state


@pytest.fixture
def params():
    return PhysParams(nu=1.0, nu_tilde=1.0, kappa=1.0, pressure=critical_quadratic(1.0))


class TestRk4Mode:
    def test_zero_frequency_constant(self, params):
        u0 = np.array([1.0 + 0.5j, 0.2, -0.1j, 0.7])
        out = rk4_mode(np.zeros(3), u0, t=3.0, dt=0.1, params=params)
        assert np.allclose(out, u0, rtol=0, atol=1e-14)

    def test_transverse_decay(self, params):
        xi = np.array([2.0, 0.0, 0.0])
        u0 = np.array([0.0, 0.0, 1.0, 0.0], dtype=complex)  # m orthogonal to xi
        out = rk4_mode(xi, u0, t=0.5, dt=1e-3, params=params)
        want = math.exp(-params.nu * 4.0 * 0.5)
        assert abs(out[2] - want) < 1e-10
        assert np.max(np.abs(np.delete(out, 2))) < 1e-12

    def test_matches_propagator(self, rng, params):
        from nsk.propagator import mode_propagator

        for _ in range(5):
            xi = rng.uniform(-2, 2, size=3)
            u0 = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            t = float(rng.uniform(0.2, 1.0))
            got = rk4_mode(xi, u0, t, dt=1e-4 * t, params=params)
            want = mode_propagator(xi, t, params).as_matrix() @ u0
            assert np.max(np.abs(got - want)) / np.max(np.abs(want)) < 1e-8

    def test_fourth_order_convergence(self, params):
        xi = np.array([1.5, -0.5, 1.0])
        u0 = np.array([0.3 - 0.2j, 0.1, 0.4j, -0.2], dtype=complex)
        from nsk.propagator import mode_propagator

        exact = mode_propagator(xi, 1.0, params).as_matrix() @ u0
        errs = []
        for dt in (0.02, 0.01, 0.005):
            out = rk4_mode(xi, u0, 1.0, dt, params)
            errs.append(np.max(np.abs(out - exact)))
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert all(3.7 <= o <= 4.3 for o in orders), orders

    def test_stability_guard(self, params):
        with pytest.raises(StabilityGuard):
            rk4_mode(np.array([10.0, 0, 0]), np.ones(4, dtype=complex), 1.0, 0.01, params)


class TestDirectNonlinearity:
    def test_zero(self, params):
        g = make_grid(3, 8, 2 * np.pi)
        out = direct_nonlinearity(zero_state(g), params)
        assert np.max(np.abs(out)) == 0.0

    def test_grid_limit(self, params):
        g = make_grid(3, 16, 2 * np.pi)
        with pytest.raises(InvalidGrid):
            direct_nonlinearity(zero_state(g), params)

    def test_amplitude_guard(self, params):
        g = make_grid(3, 8, 2 * np.pi)
        st = single_mode_state(g, (1, 0, 0), phi_amp=0.2 * g.L**3)
        with pytest.raises(AmplitudeTooLarge):
            direct_nonlinearity(st, params)

    def test_single_mode_hand_expansion(self):
        # phi = a cos(x1), m = 0: only pressure and capillary terms survive;
        # hand expansion gives F_1 = a^2 k (c + kappa k^2 / 2) sin(2 x1).
        g = make_grid(3, 8, 2 * np.pi)
        c = 2.0
        kappa = 1.3
        params = PhysParams(nu=1.0, nu_tilde=1.0, kappa=kappa, pressure=critical_quadratic(c))
        a = 0.05
        st = single_mode_state(g, (1, 0, 0), phi_amp=0.5 * a * g.L**3)
        out = direct_nonlinearity(st, params)
        x1 = g.dx * np.arange(g.N)
        mesh = np.meshgrid(x1, x1, x1, indexing="ij")[0]
        want_f1 = a**2 * 1.0 * (c + kappa / 2.0) * np.sin(2 * mesh)
        got_f1 = g.from_spectral(out[0])
        assert np.max(np.abs(got_f1 - want_f1)) < 1e-12 * max(np.max(np.abs(want_f1)), 1.0)
        assert np.max(np.abs(out[1])) < 1e-14
        assert np.max(np.abs(out[2])) < 1e-14


class TestRadialLinearNorm:
    def test_t0_matches_plancherel(self, params):
        profile = RadialProfile()
        got = radial_linear_norm(0.0, profile, 0, params, n=3)
        # ||phi0||^2 = (2pi)^-3 omega int f^2 r^2 dr; ||m0||^2 adds the xi_1^2 moment
        exp_phi = 1.0 / (8 * math.pi**1.5)
        exp_m = (2 * math.pi) ** -3 * (4 * math.pi / 3) * (3.0 / 8.0) * math.sqrt(math.pi)
        assert got == pytest.approx(math.sqrt(exp_phi + exp_m), rel=1e-8)

    def test_monotone_in_time(self, params):
        profile = RadialProfile()
        ts = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0]
        vals = [radial_linear_norm(t, profile, 0, params, n=3) for t in ts]
        assert all(b <= a * (1 + 1e-9) for a, b in zip(vals, vals[1:]))

    def test_kappa_rescale_same_exponent(self):
        profile = RadialProfile()
        ts = np.geomspace(100, 5000, 8)
        slopes = []
        for kap in (1.0, 4.0):
            p = PhysParams(nu=1.0, nu_tilde=1.0, kappa=kap)
            vals = [radial_linear_norm(t, profile, 0, p, n=3) for t in ts]
            slopes.append(np.polyfit(np.log1p(ts), np.log(vals), 1)[0])
        assert abs(slopes[0] - slopes[1]) < 0.02

    def test_rk4_full_state_guard(self, params):
        g = make_grid(3, 16, 2 * np.pi)
        with pytest.raises(StabilityGuard):
            rk4_evolve_state(zero_state(g), 1.0, 0.5, params)
