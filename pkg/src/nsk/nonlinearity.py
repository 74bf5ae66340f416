"""Pseudo-spectral evaluation of the full nonlinearity.

The momentum forcing is

    F(u) = -{ div((1 + P1(phi) phi) m (x) m) + grad(P2(phi) phi^2)
              - nu Lap(P1(phi) phi m) - nu_tilde grad div(P1(phi) phi m)
              - div Phi(phi) },

with P1(phi) = -1/(1 + phi) (the closed form of the integral remainder of
1/rho around rho = 1), P2(phi) the second-order pressure remainder, and the
capillary stress Phi(phi) = kappa{(phi Lap phi + |grad phi|^2 / 2) I
- grad phi (x) grad phi}, whose divergence collapses to kappa phi grad Lap
phi.  The density component of F is identically zero.

Products and rational factors are formed in physical space, derivatives as
spectral multipliers, with 2/3-rule truncation applied to the state inputs
and to the final result.  Rational factors cannot be exactly dealiased; runs
keep ||phi||_inf <= 0.5 so the residual aliasing stays below quadratic-term
accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, VacuumApproach
from .pressure import PressureModel
from .spectral import Grid, PhysParams, SpectralState

__all__ = [
    "ForcingField",
    "p1_factor",
    "p2_factor",
    "korteweg_divergence",
    "eval_F",
]

# 16-node Gauss-Legendre rule on [0, 1] for the P2 integral remainder.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class ForcingField:
    """Spectral momentum forcing; density forcing is identically zero."""

    grid: Grid
    f_m_hat: np.ndarray
    phi_phys: np.ndarray
    sup_abs_phi: float

    def as_state(self) -> SpectralState:
        return SpectralState(
            self.grid, np.zeros(self.grid.shape, dtype=complex), self.f_m_hat
        )


def p1_factor(phi: np.ndarray, rho_min: float = 0.1) -> np.ndarray:
    """P1(phi) = -1/(1 + phi); satisfies 1 + phi P1(phi) = 1/(1 + phi)."""
    low = float(np.min(1.0 + phi))
    if low <= rho_min:
        raise VacuumApproach(f"min density {low:.4f} at or below floor {rho_min}")
    return -1.0 / (1.0 + phi)


def p2_factor(phi: np.ndarray, pressure: PressureModel) -> np.ndarray:
    """P2(phi) = int_0^1 (1 - tau) P''(1 + tau phi) d tau, per point.

    Gauss-Legendre with 16 nodes; exact for pressure models whose P'' is a
    polynomial of degree <= 31 in the density.
    """
    low = float(np.min(1.0 + phi))
    if low <= pressure.rho_min:
        raise VacuumApproach(f"min density {low:.4f} at or below floor {pressure.rho_min}")
    if float(np.max(1.0 + phi)) >= pressure.rho_max:
        raise VacuumApproach(f"max density exceeds model window rho_max={pressure.rho_max}")
    out = np.zeros_like(phi)
    for tau, w in zip(_GL_X, _GL_W):
        out += w * (1.0 - tau) * pressure.d2p(1.0 + tau * phi)
    return out


def _grad_hat(grid: Grid, f_hat: np.ndarray) -> np.ndarray:
    return 1j * grid.xi_vectors * f_hat


def korteweg_divergence(grid: Grid, phi_hat: np.ndarray, kappa: float) -> np.ndarray:
    """div Phi(phi) in spectral form, dealiased.

    Phi is assembled in physical space from the dealiased phi; the result
    satisfies div Phi = kappa phi grad Lap phi up to dealiasing tolerance.
    """
    mask = grid.dealias_mask
    ph = phi_hat * mask
    phi = grid.from_spectral(ph)
    lap_phi = grid.from_spectral(-grid.xi_sq * ph)
    grad_hat = _grad_hat(grid, ph)
    grad_phi = np.stack([grid.from_spectral(grad_hat[i]) for i in range(grid.n)])

    # Diagonal part (phi Lap phi + |grad phi|^2 / 2) I and -grad phi (x) grad phi.
    diag = phi * lap_phi + 0.5 * np.sum(grad_phi**2, axis=0)
    diag_hat = grid.to_spectral(diag)
    xi = grid.xi_vectors
    out = 1j * xi * diag_hat
    for i in range(grid.n):
        for j_ax in range(grid.n):
            t_hat = grid.to_spectral(grad_phi[i] * grad_phi[j_ax])
            out[i] = out[i] - 1j * xi[j_ax] * t_hat
    return kappa * out * mask


def eval_F(state: SpectralState, params: PhysParams, rho_min: float = 0.1) -> ForcingField:
    """Momentum forcing F(u), dealiased, with vacuum and finiteness guards."""
    g = state.grid
    mask = g.dealias_mask
    xi = g.xi_vectors
    ph = state.phi_hat * mask
    mh = state.m_hat * mask

    phi = g.from_spectral(ph)
    m = np.stack([g.from_spectral(mh[i]) for i in range(g.n)])

    p1_phi = p1_factor(phi, rho_min) * phi
    inv_rho = 1.0 + p1_phi                 # = 1/(1 + phi)

    f_hat = np.zeros((g.n, *g.shape), dtype=complex)

    # Convection: div((1/rho) m (x) m); tensor is symmetric.
    for i in range(g.n):
        for j_ax in range(i, g.n):
            t_hat = g.to_spectral(m[i] * m[j_ax] * inv_rho)
            f_hat[i] += 1j * xi[j_ax] * t_hat
            if j_ax != i:
                f_hat[j_ax] += 1j * xi[i] * t_hat

    # Pressure remainder: grad(P2(phi) phi^2).
    p_hat = g.to_spectral(p2_factor(phi, params.pressure) * phi**2)
    f_hat += 1j * xi * p_hat

    # Viscous corrections: -nu Lap(V) - nu_tilde grad div(V), V = P1(phi) phi m.
    v_hat = np.stack([g.to_spectral(p1_phi * m[i]) for i in range(g.n)])
    f_hat += params.nu * g.xi_sq * v_hat
    xv = np.einsum("i...,i...->...", xi, v_hat)
    f_hat += params.nu_tilde * xi * xv

    # Capillary stress: -(-div Phi) = +div Phi inside the overall sign flip.
    f_hat -= korteweg_divergence(g, ph, params.kappa)

    f_hat = -f_hat * mask
    if not np.all(np.isfinite(f_hat)):
        raise NonFinite("nonlinearity produced non-finite coefficients")
    return ForcingField(
        grid=g, f_m_hat=f_hat, phi_phys=phi, sup_abs_phi=float(np.max(np.abs(phi)))
    )
