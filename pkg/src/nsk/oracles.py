"""Independent brute-force references for validating the closed-form paths.

Nothing here shares numerical machinery with the units it checks: the mode
ODE is integrated by plain RK4, products are explicit circular convolutions
with Taylor-expanded rational factors, and the continuum linear norms come
from 1-D radial quadrature of the longitudinal closed form.  Oracles are
meant for tiny grids and 1-D integrals, not production scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate as _integrate

from .errors import AmplitudeTooLarge, InvalidGrid, QuadratureFailure, StabilityGuard
from .spectral import Grid, PhysParams, SpectralState

__all__ = [
    "rk4_mode",
    "rk4_evolve_state",
    "rk4_nonlinear",
    "direct_nonlinearity",
    "RadialProfile",
    "radial_linear_norm",
]


# --------------------------------------------------------------------------
# Per-mode ODE integration.


def _mode_rhs(xi: np.ndarray, u: np.ndarray, params: PhysParams) -> np.ndarray:
    """RHS of d/dt (phi_hat, m_hat) at one frequency."""
    phi, m = u[0], u[1:]
    xi_sq = float(np.dot(xi, xi))
    xm = np.dot(xi, m)
    dphi = -1j * xm
    dm = -params.nu * xi_sq * m - params.nu_tilde * xi * xm - 1j * params.kappa * xi_sq * phi * xi
    return np.concatenate(([dphi], dm))


def rk4_mode(
    xi: np.ndarray,
    u0_mode: np.ndarray,
    t: float,
    dt: float,
    params: PhysParams,
) -> np.ndarray:
    """Classical RK4 on the single-mode linear ODE; global error O(dt^4)."""
    xi = np.asarray(xi, dtype=float)
    xi_sq = float(np.dot(xi, xi))
    rate = (params.nu + params.nu_tilde + math.sqrt(params.kappa)) * xi_sq
    if dt * rate >= 0.5:
        raise StabilityGuard(f"dt*rate = {dt * rate:.3f} >= 0.5 at |xi|^2 = {xi_sq:.3f}")
    steps = max(1, int(math.ceil(t / dt)))
    h = t / steps
    u = np.asarray(u0_mode, dtype=complex).copy()
    for _ in range(steps):
        k1 = _mode_rhs(xi, u, params)
        k2 = _mode_rhs(xi, u + 0.5 * h * k1, params)
        k3 = _mode_rhs(xi, u + 0.5 * h * k2, params)
        k4 = _mode_rhs(xi, u + h * k3, params)
        u = u + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return u


def _state_rhs(state: SpectralState, params: PhysParams):
    g = state.grid
    xi = g.xi_vectors
    xm = np.einsum("i...,i...->...", xi, state.m_hat)
    dphi = -1j * xm
    dm = (
        -params.nu * g.xi_sq * state.m_hat
        - params.nu_tilde * xi * xm
        - 1j * (params.kappa * g.xi_sq * state.phi_hat) * xi
    )
    return dphi, dm


def rk4_evolve_state(
    state: SpectralState, t: float, dt: float, params: PhysParams
) -> SpectralState:
    """RK4 over every retained mode simultaneously (linear system only)."""
    g = state.grid
    rate = (params.nu + params.nu_tilde + math.sqrt(params.kappa)) * float(np.max(g.xi_sq))
    if dt * rate >= 0.5:
        raise StabilityGuard(f"dt*rate = {dt * rate:.3f} >= 0.5 at the stiffest mode")
    steps = max(1, int(math.ceil(t / dt)))
    h = t / steps
    phi = state.phi_hat.astype(complex).copy()
    m = state.m_hat.astype(complex).copy()
    cur = SpectralState(g, phi, m)
    for _ in range(steps):
        p1, m1 = _state_rhs(cur, params)
        p2, m2 = _state_rhs(SpectralState(g, cur.phi_hat + 0.5 * h * p1, cur.m_hat + 0.5 * h * m1), params)
        p3, m3 = _state_rhs(SpectralState(g, cur.phi_hat + 0.5 * h * p2, cur.m_hat + 0.5 * h * m2), params)
        p4, m4 = _state_rhs(SpectralState(g, cur.phi_hat + h * p3, cur.m_hat + h * m3), params)
        cur = SpectralState(
            g,
            cur.phi_hat + (h / 6.0) * (p1 + 2 * p2 + 2 * p3 + p4),
            cur.m_hat + (h / 6.0) * (m1 + 2 * m2 + 2 * m3 + m4),
        )
    return cur


def rk4_nonlinear(
    state: SpectralState, t: float, dt: float, params: PhysParams, rho_min: float = 0.1
) -> SpectralState:
    """RK4 on the full nonlinear spectral ODE u' = -A u + F(u).

    Reference for the exponential stepper on small grids; reuses eval_F,
    which is itself validated against the dense-convolution oracle.
    """
    from .nonlinearity import eval_F

    g = state.grid
    rate = (params.nu + params.nu_tilde + math.sqrt(params.kappa)) * float(np.max(g.xi_sq))
    if dt * rate >= 0.5:
        raise StabilityGuard(f"dt*rate = {dt * rate:.3f} >= 0.5 at the stiffest mode")

    def rhs(u: SpectralState):
        dphi, dm = _state_rhs(u, params)
        dm = dm + eval_F(u, params, rho_min=rho_min).f_m_hat
        return dphi, dm

    steps = max(1, int(math.ceil(t / dt)))
    h = t / steps
    cur = state.copy()
    for _ in range(steps):
        p1, m1 = rhs(cur)
        p2, m2 = rhs(SpectralState(g, cur.phi_hat + 0.5 * h * p1, cur.m_hat + 0.5 * h * m1))
        p3, m3 = rhs(SpectralState(g, cur.phi_hat + 0.5 * h * p2, cur.m_hat + 0.5 * h * m2))
        p4, m4 = rhs(SpectralState(g, cur.phi_hat + h * p3, cur.m_hat + h * m3))
        cur = SpectralState(
            g,
            cur.phi_hat + (h / 6.0) * (p1 + 2 * p2 + 2 * p3 + p4),
            cur.m_hat + (h / 6.0) * (m1 + 2 * m2 + 2 * m3 + m4),
        )
    return cur


# --------------------------------------------------------------------------
# Dense-convolution nonlinearity on tiny grids.


class _ConvAlgebra:
    """Products as explicit circular convolutions in spectral space."""

    def __init__(self, grid: Grid):
        self.grid = grid
        shifts = np.meshgrid(*([np.arange(grid.N)] * grid.n), indexing="ij")
        self.shift_list = list(zip(*(s.ravel() for s in shifts)))

    def conv(self, f_hat: np.ndarray, g_hat: np.ndarray) -> np.ndarray:
        """(f*g)_hat(k) = sum_j f_hat(j) g_hat(k - j) / L^n."""
        out = np.zeros_like(f_hat)
        for j in self.shift_list:
            fj = f_hat[j]
            if fj == 0.0:
                continue
            out += fj * np.roll(g_hat, j, axis=tuple(range(self.grid.n)))
        return out / self.grid.L**self.grid.n

    def one(self) -> np.ndarray:
        """Spectral coefficients of the constant field 1."""
        out = np.zeros(self.grid.shape, dtype=complex)
        out[(0,) * self.grid.n] = self.grid.L**self.grid.n
        return out


def direct_nonlinearity(
    state: SpectralState,
    params: PhysParams,
    taylor_order: int = 14,
) -> np.ndarray:
    """Reference F(u) on grids of at most 8 points per axis.

    The rational factor 1/(1 + phi) is a truncated geometric series in phi
    (amplitude must satisfy ||phi||_inf <= 0.1, checked through the spectral
    L1 bound), P2 comes from the pressure model's polynomial Taylor data,
    and every product is an explicit circular convolution.  The same 2/3
    truncation as the production path is applied to inputs and output.
    """
    g = state.grid
    if g.N > 8:
        raise InvalidGrid("dense-convolution oracle is restricted to N <= 8")
    if params.pressure.d2p_taylor is None:
        raise AmplitudeTooLarge(
            "oracle needs polynomial Taylor data for P''; use a model providing d2p_taylor"
        )

    # Independent 2/3 mask from integer indices.
    k1d = np.fft.fftfreq(g.N, d=1.0 / g.N).astype(int)
    keep = np.abs(k1d) < g.N / 3.0
    mask = np.ones(g.shape, dtype=bool)
    for ax in range(g.n):
        shape = [1] * g.n
        shape[ax] = g.N
        mask &= keep.reshape(shape)

    ph = state.phi_hat * mask
    mh = state.m_hat * mask

    # Amplitude guard via the inversion-formula bound sup|phi| <= sum|phi_hat|/L^n.
    sup_bound = float(np.sum(np.abs(ph))) / g.L**g.n
    if sup_bound > 0.1:
        raise AmplitudeTooLarge(f"spectral L1 bound {sup_bound:.3f} exceeds 0.1")

    alg = _ConvAlgebra(g)
    xi = g.xi_vectors
    xi_sq = g.xi_sq

    # Powers of phi and the geometric series for 1/(1 + phi).
    powers = [alg.one(), ph]
    for _ in range(2, taylor_order + 1):
        powers.append(alg.conv(powers[-1], ph))
    inv_rho = np.zeros_like(ph)
    for p_ord, ph_pow in enumerate(powers):
        inv_rho += (-1.0) ** p_ord * ph_pow
    p1_phi = inv_rho - alg.one()          # P1(phi) phi = 1/(1+phi) - 1

    f_hat = np.zeros((g.n, *g.shape), dtype=complex)

    # Convection div((1/rho) m (x) m).
    for i in range(g.n):
        mi_rho = alg.conv(mh[i], inv_rho)
        for j_ax in range(g.n):
            t_hat = alg.conv(mi_rho, mh[j_ax])
            f_hat[i] += 1j * xi[j_ax] * t_hat

    # Pressure remainder grad(P2(phi) phi^2): P2 = sum_q a_q phi^q /((q+1)(q+2)).
    p2_hat = np.zeros_like(ph)
    for q, a_q in enumerate(params.pressure.d2p_taylor):
        if q >= len(powers):
            break
        p2_hat += (a_q / ((q + 1) * (q + 2))) * powers[q]
    p_hat = alg.conv(p2_hat, powers[2])
    f_hat += 1j * xi * p_hat

    # Viscous corrections on V = P1(phi) phi m.
    v_hat = np.stack([alg.conv(p1_phi, mh[i]) for i in range(g.n)])
    f_hat += params.nu * xi_sq * v_hat
    xv = np.einsum("i...,i...->...", xi, v_hat)
    f_hat += params.nu_tilde * xi * xv

    # Capillary stress divergence.
    grad = [1j * xi[i] * ph for i in range(g.n)]
    lap = -xi_sq * ph
    diag = alg.conv(ph, lap)
    gg = np.zeros_like(ph)
    for i in range(g.n):
        gg += alg.conv(grad[i], grad[i])
    diag = diag + 0.5 * gg
    div_phi_tensor = np.zeros((g.n, *g.shape), dtype=complex)
    for i in range(g.n):
        div_phi_tensor[i] = 1j * xi[i] * diag
        for j_ax in range(g.n):
            div_phi_tensor[i] -= 1j * xi[j_ax] * alg.conv(grad[i], grad[j_ax])
    f_hat -= params.kappa * div_phi_tensor

    return -f_hat * mask


# --------------------------------------------------------------------------
# Radial quadrature of the continuum linear norms (decay oracle).


@dataclass(frozen=True)
class RadialProfile:
    """Radial Gaussian data with known Fourier transforms.

    phi0_hat(r) = phi_amp exp(-(width r)^2 / 2) and the momentum is in
    derivative form m0 = d/dx_1 mtilde0 with mtilde0 = (gaussian, 0, ..., 0),
    i.e. mhat0(xi) = i xi_1 m_amp exp(-(width |xi|)^2 / 2) e_1.
    """

    phi_amp: float = 1.0
    m_amp: float = 1.0
    width: float = 1.0

    def fhat(self, r: np.ndarray) -> np.ndarray:
        return self.phi_amp * np.exp(-0.5 * (self.width * r) ** 2)

    def ghat(self, r: np.ndarray) -> np.ndarray:
        return self.m_amp * np.exp(-0.5 * (self.width * r) ** 2)


def _sphere_area(n: int) -> float:
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _long_blocks_radial(r: np.ndarray, t: float, params: PhysParams):
    """(s11, d1, e_long, heat) at radius r via direct real-form eigenvalue
    formulas (expm1 / sinc confluent fallbacks), independent of the
    production propagator."""
    A = params.A
    K = params.K
    r2 = r * r
    disc = 1.0 - K * K
    heat = np.exp(-params.nu * r2 * t)
    if disc > 0:
        root = math.sqrt(disc)
        lp = -A * (1.0 + root) * r2
        lm = -A * (1.0 - root) * r2
        gap = lp - lm
        gt = gap * t
        small = np.abs(gt) < 1e-6
        safe = np.where(small, 1.0, gap)
        elm = np.exp(lm * t)
        d1 = elm * np.where(small, t * (1.0 + 0.5 * gt + gt * gt / 6.0), np.expm1(gt) / safe)
        s11 = elm - lm * d1
        e_long = elm + lp * d1
    elif disc == 0:
        lam = -A * r2
        el = np.exp(lam * t)
        d1 = t * el
        s11 = el - lam * d1
        e_long = el + lam * d1
    else:
        # Conjugate pair: d1 = e^{-A r^2 t} sin(w t)/w with w = A sqrt(K^2-1) r^2,
        # s11/e_long = e^{-A r^2 t} cos(w t) +/- A r^2 d1.
        root = math.sqrt(-disc)
        w = A * root * r2
        damp = np.exp(-A * r2 * t)
        ws = np.where(w == 0.0, 1.0, w)
        d1 = damp * np.where(w == 0.0, t, np.sin(w * t) / ws)
        s11 = damp * np.cos(w * t) + A * r2 * d1
        e_long = damp * np.cos(w * t) - A * r2 * d1
    return s11, d1, e_long, heat


def radial_linear_norm(
    t: float,
    profile: RadialProfile,
    k: int,
    params: PhysParams,
    n: int = 3,
    rtol: float = 1e-8,
) -> float:
    """||grad^k u(t)||_L2 of the continuum linear solution from radial data.

    Plancherel reduces the R^n integral to one radial integral; the angular
    moments of xi_1^2 and xi_1^4 are inserted in closed form, so the n = 3
    decay test never touches a 3-D grid.
    """
    if k not in (0, 1, 2):
        raise ValueError("derivative order k in {0, 1, 2}")
    omega = _sphere_area(n)
    mu2 = 1.0 / n                      # mean of u1^2 over the unit sphere
    mu4 = 3.0 / (n * (n + 2.0))        # mean of u1^4
    kap = params.kappa

    def density(r: float) -> float:
        rr = np.asarray(r, dtype=float)
        s11, d1, e_long, heat = _long_blocks_radial(rr, t, params)
        f = profile.fhat(rr)
        gfun = profile.ghat(rr)
        r2 = rr * rr
        a_phi = s11**2 * f**2 + 2.0 * s11 * d1 * f * gfun * r2 * mu2 + d1**2 * gfun**2 * r2**2 * mu4
        a_m = (
            heat**2 * gfun**2 * r2 * (mu2 - mu4)
            + e_long**2 * gfun**2 * r2 * mu4
            - 2.0 * e_long * gfun * kap * d1 * f * r2**2 * mu2
            + kap**2 * d1**2 * f**2 * r2**3
        )
        return float(omega * rr ** (n - 1) * rr ** (2 * k) * (a_phi + a_m))

    # Breakpoints follow the diffusive concentration scale 1/sqrt(1 + A t).
    s = 1.0 / math.sqrt(1.0 + params.A * t)
    r_max = 40.0 / profile.width
    pts = sorted({min(p, r_max * 0.999) for p in (0.5 * s, s, 2 * s, 4 * s, 8 * s, 1.0, 2.0, 4.0)})
    val, err = _integrate.quad(
        density, 0.0, r_max, points=pts, limit=300, epsabs=1e-300, epsrel=rtol
    )
    if not np.isfinite(val) or (val > 0 and err > 10 * rtol * val + 1e-280):
        raise QuadratureFailure(f"radial quadrature error {err:.2e} for value {val:.2e}")
    return math.sqrt(val / (2.0 * math.pi) ** n)
