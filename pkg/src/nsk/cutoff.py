"""Smooth low/high frequency decomposition.

P1 and P_inf are Fourier multipliers built from a smooth partition of unity:
chi1 = 1 on |xi| <= r1, chi1 = 0 on |xi| >= r_inf, chi_inf = 1 - chi1.  They
are multipliers, not idempotent projections; only the partition-of-unity and
support properties are guaranteed (and tested).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidCutoff, SupportViolation
from .spectral import Grid, SpectralState, l2_norm, seminorm

__all__ = ["Cutoff", "make_cutoff", "smoothstep", "poincare_constant_check", "PoincareReport"]


def _bump_h(s: np.ndarray) -> np.ndarray:
    """exp(-1/s) for s > 0, else 0; the standard C-infinity glue."""
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smoothstep(s) -> np.ndarray:
    """g(s) = 1 for s <= 0, 0 for s >= 1, h(1-s)/(h(s)+h(1-s)) between."""
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    out = np.empty_like(s)
    out[s <= 0.0] = 1.0
    out[s >= 1.0] = 0.0
    mid = (s > 0.0) & (s < 1.0)
    if np.any(mid):
        sm = s[mid]
        hi = _bump_h(1.0 - sm)
        lo = _bump_h(sm)
        out[mid] = hi / (lo + hi)
    return out[0] if scalar else out


@dataclass(frozen=True)
class Cutoff:
    """Multiplier pair (chi1_hat, chi_inf_hat) on a fixed grid."""

    grid: Grid
    r1: float
    r_inf: float
    chi1_hat: np.ndarray

    @property
    def chi_inf_hat(self) -> np.ndarray:
        return 1.0 - self.chi1_hat

    def project_low(self, state: SpectralState) -> SpectralState:
        return SpectralState(
            state.grid, self.chi1_hat * state.phi_hat, self.chi1_hat * state.m_hat
        )

    def project_high(self, state: SpectralState) -> SpectralState:
        chi = self.chi_inf_hat
        return SpectralState(state.grid, chi * state.phi_hat, chi * state.m_hat)


def make_cutoff(grid: Grid, r1: float, r_inf: float) -> Cutoff:
    nyquist = np.pi * grid.N / grid.L
    if not (0 < r1 < r_inf):
        raise InvalidCutoff(f"need 0 < r1 < r_inf, got r1={r1}, r_inf={r_inf}")
    if r_inf > nyquist * (1 + 1e-12):
        raise InvalidCutoff(f"r_inf={r_inf} exceeds the resolvable radius pi*N/L={nyquist}")
    s = (grid.xi_abs - r1) / (r_inf - r1)
    return Cutoff(grid=grid, r1=float(r1), r_inf=float(r_inf), chi1_hat=smoothstep(s))


@dataclass(frozen=True)
class PoincareReport:
    ratio: float
    bound: float
    passed: bool
    low_mass_rel: float


def poincare_constant_check(state: SpectralState, cutoff: Cutoff) -> PoincareReport:
    """Verify ||u||_L2 <= (1/r1) ||grad u||_L2 on high-supported states.

    Raises SupportViolation when modes strictly below r1 carry more than
    1e-13 of the state's spectral mass.
    """
    g = state.grid
    low = g.xi_abs < cutoff.r1 * (1.0 - 1e-12)
    mass = np.sum(np.abs(state.phi_hat) ** 2) + np.sum(np.abs(state.m_hat) ** 2)
    low_mass = np.sum(np.abs(state.phi_hat[low]) ** 2) + np.sum(
        np.abs(state.m_hat[:, low]) ** 2
    )
    rel = float(low_mass / mass) if mass > 0 else 0.0
    if rel > 1e-13:
        raise SupportViolation(
            f"low-frequency mass fraction {rel:.3e} on a state declared high-supported"
        )
    num = l2_norm(state)
    den = seminorm(state, 1)
    ratio = num / den if den > 0 else 0.0
    bound = 1.0 / cutoff.r1
    return PoincareReport(
        ratio=float(ratio),
        bound=float(bound),
        passed=bool(ratio <= bound * (1.0 + 1e-12)),
        low_mass_rel=rel,
    )
