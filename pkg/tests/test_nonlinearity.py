import numpy as np
import pytest

from nsk.errors import InvalidPressure, VacuumApproach
from nsk.nonlinearity import eval_F, korteweg_divergence, p1_factor, p2_factor
from nsk.pressure import critical_quadratic, custom_pressure, van_der_waals
from nsk.spectral import (
    PhysParams,
    SpectralState,
    make_grid,
    random_state,
    single_mode_state,
    zero_state,
)


def spec_l2(arr) -> float:
    return float(np.sqrt(np.sum(np.abs(arr) ** 2)))


class TestPressureModels:
    def test_critical_quadratic_derivatives(self):
        m = critical_quadratic(3.0)
        assert m.p(1.0) == 0.0
        assert m.dp(1.0) == 0.0
        assert float(m.d2p(1.0)) == 6.0

    def test_noncritical_rejected(self):
        with pytest.raises(InvalidPressure):
            custom_pressure(
                p=lambda r: r, dp=lambda r: np.ones_like(np.asarray(r, dtype=float)),
                d2p=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
            )

    def test_van_der_waals_critical(self):
        m = van_der_waals(a=1.0, b=0.2)
        assert abs(float(m.dp(1.0))) < 1e-12
        # phase-transition regime: non-monotone pressure
        assert float(m.d2p(1.0)) < 0.0

    def test_noncritical_override(self):
        m = custom_pressure(
            p=lambda r: r,
            dp=lambda r: np.ones_like(np.asarray(r, dtype=float)),
            d2p=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
            allow_noncritical=True,
        )
        assert m.allow_noncritical
        assert float(m.dp(1.0)) == 1.0


class TestP1Factor:
    def test_zero_field(self):
        phi = np.zeros((8, 8))
        assert np.allclose(p1_factor(phi), -1.0)

    def test_value_vs_quadrature(self):
        # P1(phi) = int_0^1 -(1 + tau phi)^-2 dtau, checked by quadrature at phi = 1
        phi = np.full((4, 4), 1.0)
        taus, ws = np.polynomial.legendre.leggauss(32)
        taus = 0.5 * (taus + 1)
        ws = 0.5 * ws
        want = sum(w * -((1 + tau * 1.0) ** -2) for tau, w in zip(taus, ws))
        got = p1_factor(phi)[0, 0]
        assert got == pytest.approx(-0.5, rel=1e-13)
        assert got == pytest.approx(want, rel=1e-12)

    def test_identity(self, rng):
        phi = rng.uniform(-0.4, 0.4, size=(16, 16))
        lhs = 1.0 + phi * p1_factor(phi)
        assert np.max(np.abs(lhs - 1.0 / (1.0 + phi))) < 1e-13

    def test_vacuum(self):
        phi = np.zeros((4, 4))
        phi[0, 0] = -0.999
        with pytest.raises(VacuumApproach):
            p1_factor(phi, rho_min=0.01)


class TestP2Factor:
    def test_critical_quadratic_constant(self, rng):
        model = critical_quadratic(3.0)
        phi = rng.uniform(-0.3, 0.3, size=(8, 8))
        assert np.max(np.abs(p2_factor(phi, model) - 3.0)) < 1e-13

    def test_cubic_pressure_at_zero(self):
        # P = rho^3 - 3 rho has P'(1) = 0, P'' = 6 rho: P2(0) = P''(1)/2 = 3
        model = custom_pressure(
            p=lambda r: r**3 - 3 * r,
            dp=lambda r: 3 * r**2 - 3,
            d2p=lambda r: 6 * np.asarray(r, dtype=float),
            d2p_taylor=(6.0, 6.0),
        )
        phi = np.zeros((4, 4))
        assert np.max(np.abs(p2_factor(phi, model) - 3.0)) < 1e-13

    def test_cubic_pressure_vs_hand_integral(self, rng):
        # P'' = 6(1 + tau phi): P2 = 3 + phi int_0^1 6 tau (1-tau) dtau = 3 + phi
        model = custom_pressure(
            p=lambda r: r**3 - 3 * r,
            dp=lambda r: 3 * r**2 - 3,
            d2p=lambda r: 6 * np.asarray(r, dtype=float),
            d2p_taylor=(6.0, 6.0),
        )
        phi = rng.uniform(-0.3, 0.3, size=(8, 8))
        assert np.max(np.abs(p2_factor(phi, model) - (3.0 + phi))) < 1e-12

    def test_any_model_at_zero_is_half_second_derivative(self):
        model = van_der_waals(a=1.0, b=0.2)
        phi = np.zeros((4, 4))
        want = 0.5 * float(model.d2p(1.0))
        assert np.max(np.abs(p2_factor(phi, model) - want)) < 1e-12


class TestKortewegDivergence:
    def test_constant_field_zero(self):
        g = make_grid(3, 8, 2 * np.pi)
        fh = g.to_spectral(np.full(g.shape, 0.3))
        out = korteweg_divergence(g, fh, kappa=1.5)
        assert spec_l2(out) < 1e-12

    def test_kappa_zero(self, rng):
        g = make_grid(3, 8, 2 * np.pi)
        st = random_state(g, rng, amplitude=0.1)
        out = korteweg_divergence(g, st.phi_hat, kappa=0.0)
        assert spec_l2(out) == 0.0

    def test_identity_single_mode_32(self):
        # div Phi(phi) = kappa phi grad Lap phi for a quadratically dealiased mode
        g = make_grid(3, 32, 2 * np.pi)
        st = single_mode_state(g, (3, 2, -1), phi_amp=0.4 + 0.1j)
        kappa = 1.7
        lhs = korteweg_divergence(g, st.phi_hat, kappa)
        mask = g.dealias_mask
        ph = st.phi_hat * mask
        phi = g.from_spectral(ph)
        rhs = np.stack(
            [
                g.to_spectral(kappa * phi * g.from_spectral(1j * g.xi_vectors[i] * (-g.xi_sq) * ph))
                for i in range(3)
            ]
        ) * mask
        assert spec_l2(lhs - rhs) / spec_l2(rhs) < 1e-10


class TestEvalF:
    def params(self):
        return PhysParams(nu=1.0, nu_tilde=0.8, kappa=1.3, pressure=critical_quadratic(2.0))

    def test_zero_state(self):
        g = make_grid(3, 8, 2 * np.pi)
        f = eval_F(zero_state(g), self.params())
        assert spec_l2(f.f_m_hat) == 0.0

    def test_zero_mode_vanishes_exactly(self, rng):
        g = make_grid(3, 8, 2 * np.pi)
        st = random_state(g, rng, amplitude=0.05)
        f = eval_F(st, self.params())
        zero = g.mode_index((0, 0, 0))
        assert np.max(np.abs(f.f_m_hat[(slice(None), *zero)])) == 0.0

    def test_pure_convection_when_phi_zero(self, rng):
        g = make_grid(3, 8, 2 * np.pi)
        st = random_state(g, rng, amplitude=0.05)
        st = SpectralState(g, np.zeros_like(st.phi_hat), st.m_hat)
        f = eval_F(st, self.params()).f_m_hat
        # direct dense-convolution evaluation of -div(m x m)
        from nsk.oracles import direct_nonlinearity

        ref = direct_nonlinearity(st, self.params())
        assert spec_l2(f - ref) / spec_l2(ref) < 1e-10

    def test_full_vs_dense_convolution(self, rng):
        g = make_grid(3, 8, 2 * np.pi)
        from nsk.oracles import direct_nonlinearity

        for _ in range(3):
            st = random_state(g, rng, amplitude=1.0)
            st = st.scaled(0.02 / max(np.max(np.abs(st.phi_hat)), np.max(np.abs(st.m_hat))))
            f = eval_F(st, self.params()).f_m_hat
            ref = direct_nonlinearity(st, self.params())
            assert spec_l2(f - ref) / spec_l2(ref) < 1e-9

    def test_quadratic_smallness(self, rng):
        g = make_grid(3, 8, 2 * np.pi)
        st = random_state(g, rng, amplitude=1.0)
        params = self.params()
        ratios = []
        for eps in (1e-2, 1e-3, 1e-4):
            f = eval_F(st.scaled(eps), params).f_m_hat
            ratios.append(spec_l2(f) / eps**2)
        spread = (max(ratios) - min(ratios)) / min(ratios)
        assert spread < 0.05

    def test_vacuum_guard(self):
        g = make_grid(3, 8, 2 * np.pi)
        # physical phi = 0.6 cos(x1): density dips to 0.4
        st = single_mode_state(g, (1, 0, 0), phi_amp=0.3 * g.L**3)
        with pytest.raises(VacuumApproach):
            eval_F(st, self.params(), rho_min=0.5)

    def test_hermitian_output(self, rng):
        g = make_grid(3, 8, 2 * np.pi)
        st = random_state(g, rng, amplitude=0.05)
        f = eval_F(st, self.params())
        for i in range(3):
            comp = f.f_m_hat[i]
            asym = np.max(np.abs(comp - g.conj_flip(comp)))
            assert asym <= 1e-14 * max(np.max(np.abs(comp)), 1e-300)
