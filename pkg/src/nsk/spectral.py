"""Periodic-box discretization, spectral transforms, and discrete norms.

The box is [0, L)^n sampled on N points per axis.  Retained frequencies are
xi = (2*pi/L) * k with integer k in [-N/2, N/2), stored in FFT order, so the
mode at integer vector k and the mode at -k (index-wise: (-k) mod N) are
conjugate partners for real fields.

Normalization: `to_spectral` carries the dx^n factor, so coefficients
approximate the continuum Fourier transform of the represented field and
L1-data constants are grid independent.  Parseval then reads

    sum_x |f(x)|^2 dx^n  =  sum_xi |fhat(xi)|^2 / L^n.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as _fft

from .errors import InvalidGrid, ShapeMismatch
from .pressure import PressureModel, critical_quadratic

__all__ = [
    "Grid",
    "PhysParams",
    "SpectralState",
    "make_grid",
    "seminorm",
    "l2_norm",
    "l1_norm",
    "hermitian_asymmetry",
    "zero_state",
    "random_state",
    "gaussian_state",
    "single_mode_state",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with its spectral index maps."""

    n: int
    N: int
    L: float

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def mode_count(self) -> int:
        return self.N**self.n

    @cached_property
    def k_int(self) -> np.ndarray:
        """Integer wavenumbers per axis in FFT order: 0..N/2-1, -N/2..-1."""
        return np.fft.fftfreq(self.N, d=1.0 / self.N).astype(np.int64)

    @cached_property
    def xi_vectors(self) -> np.ndarray:
        """Frequency vectors, shape (n, N, ..., N)."""
        ax = 2.0 * np.pi / self.L * self.k_int.astype(float)
        mats = np.meshgrid(*([ax] * self.n), indexing="ij")
        return np.stack(mats, axis=0)

    @cached_property
    def xi_sq(self) -> np.ndarray:
        return np.sum(self.xi_vectors**2, axis=0)

    @cached_property
    def xi_abs(self) -> np.ndarray:
        return np.sqrt(self.xi_sq)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: keep |k_i| < N/3 on every axis."""
        keep1d = np.abs(self.k_int) < self.N / 3.0
        mask = np.ones(self.shape, dtype=bool)
        for axis in range(self.n):
            shape = [1] * self.n
            shape[axis] = self.N
            mask &= keep1d.reshape(shape)
        return mask

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True on modes with k_i = -N/2 on some axis (no conjugate partner)."""
        nyq1d = self.k_int == -self.N // 2
        mask = np.zeros(self.shape, dtype=bool)
        for axis in range(self.n):
            shape = [1] * self.n
            shape[axis] = self.N
            mask |= nyq1d.reshape(shape)
        return mask

    @cached_property
    def _reverse_index(self) -> tuple[np.ndarray, ...]:
        rev = np.concatenate(([0], np.arange(self.N - 1, 0, -1)))
        return np.ix_(*([rev] * self.n))

    def mode_index(self, k: tuple[int, ...]) -> tuple[int, ...]:
        """Array index of the mode with integer wavevector k."""
        if len(k) != self.n:
            raise ShapeMismatch(f"wavevector has {len(k)} components, grid is {self.n}-d")
        for ki in k:
            if not (-self.N // 2 <= ki < self.N // 2):
                raise ShapeMismatch(f"wavenumber {ki} outside [-N/2, N/2)")
        return tuple(int(ki) % self.N for ki in k)

    def conj_flip(self, arr: np.ndarray) -> np.ndarray:
        """conj(arr) sampled at -k; equals arr itself for a real field."""
        if arr.ndim != self.n:
            raise ShapeMismatch(f"conj_flip expects a rank-{self.n} mode array")
        return np.conj(arr[self._reverse_index])

    def to_spectral(self, field: np.ndarray) -> np.ndarray:
        """Forward transform with the dx^n (continuum FT) normalization."""
        if field.shape != self.shape:
            raise ShapeMismatch(f"field shape {field.shape}, expected {self.shape}")
        return _fft.fftn(field) * self.dx**self.n

    def from_spectral(self, coeffs: np.ndarray) -> np.ndarray:
        """Inverse transform back to real physical samples."""
        if coeffs.shape != self.shape:
            raise ShapeMismatch(f"coefficient shape {coeffs.shape}, expected {self.shape}")
        return np.real(_fft.ifftn(coeffs)) / self.dx**self.n

    @property
    def parseval_weight(self) -> float:
        """Weight w with ||f||_L2^2 = w * sum |fhat|^2."""
        return 1.0 / self.L**self.n


def make_grid(n: int, N: int, L: float) -> Grid:
    if n not in (1, 2, 3):
        raise InvalidGrid(f"dimension n={n} not in {{1, 2, 3}}")
    if N < 8 or N % 2 != 0:
        raise InvalidGrid(f"N={N} must be even and >= 8")
    if not (L > 0):
        raise InvalidGrid(f"box length L={L} must be positive")
    return Grid(n=int(n), N=int(N), L=float(L))


@dataclass(frozen=True)
class PhysParams:
    """Viscosities, capillarity, and the pressure model.

    A = (nu + nu_tilde)/2 and K = 2*sqrt(kappa)/(nu + nu_tilde) are always
    recomputed from the fields; K = 1 is the critically damped regime.
    """

    nu: float
    nu_tilde: float
    kappa: float
    pressure: PressureModel | None = None

    def __post_init__(self):
        if not (self.nu > 0):
            raise ValueError(f"nu={self.nu} must be positive")
        if not (self.kappa > 0):
            raise ValueError(f"kappa={self.kappa} must be positive")
        if not (self.nu + self.nu_tilde > 0):
            raise ValueError("nu + nu_tilde must be positive")
        if self.pressure is None:
            object.__setattr__(self, "pressure", critical_quadratic(1.0))

    @property
    def A(self) -> float:
        return 0.5 * (self.nu + self.nu_tilde)

    @property
    def K(self) -> float:
        return 2.0 * np.sqrt(self.kappa) / (self.nu + self.nu_tilde)


@dataclass(frozen=True)
class SpectralState:
    """Fourier coefficients of (phi, m) = (rho - 1, momentum) on a grid.

    Treated as an immutable snapshot; operations return new states.
    """

    grid: Grid
    phi_hat: np.ndarray
    m_hat: np.ndarray

    def __post_init__(self):
        g = self.grid
        if self.phi_hat.shape != g.shape:
            raise ShapeMismatch(f"phi_hat shape {self.phi_hat.shape}, expected {g.shape}")
        if self.m_hat.shape != (g.n, *g.shape):
            raise ShapeMismatch(f"m_hat shape {self.m_hat.shape}, expected {(g.n, *g.shape)}")

    def copy(self) -> "SpectralState":
        return SpectralState(self.grid, self.phi_hat.copy(), self.m_hat.copy())

    def __add__(self, other: "SpectralState") -> "SpectralState":
        return SpectralState(self.grid, self.phi_hat + other.phi_hat, self.m_hat + other.m_hat)

    def __sub__(self, other: "SpectralState") -> "SpectralState":
        return SpectralState(self.grid, self.phi_hat - other.phi_hat, self.m_hat - other.m_hat)

    def scaled(self, c: float) -> "SpectralState":
        return SpectralState(self.grid, c * self.phi_hat, c * self.m_hat)

    def phi_physical(self) -> np.ndarray:
        return self.grid.from_spectral(self.phi_hat)

    def m_physical(self) -> np.ndarray:
        return np.stack([self.grid.from_spectral(self.m_hat[i]) for i in range(self.grid.n)])


def seminorm(state: SpectralState, k: int, which: str = "both") -> float:
    """Discrete L2 norm of grad^k of the selected components.

    Computed as (sum_xi |xi|^(2k) |uhat|^2 * w)^(1/2) with the Parseval
    weight w = 1/L^n; k = 0 gives the plain L2 norm.
    """
    if k < 0 or k != int(k):
        raise ValueError(f"derivative order k={k} must be a nonnegative integer")
    g = state.grid
    mult = g.xi_sq**k if k > 0 else 1.0
    total = 0.0
    if which in ("phi", "both"):
        total += float(np.sum(mult * np.abs(state.phi_hat) ** 2))
    if which in ("m", "both"):
        total += float(np.sum(mult * np.abs(state.m_hat) ** 2))
    if which not in ("phi", "m", "both"):
        raise ValueError(f"unknown component selector {which!r}")
    return float(np.sqrt(total * g.parseval_weight))


def l2_norm(state: SpectralState, which: str = "both") -> float:
    return seminorm(state, 0, which)


def l1_norm(grid: Grid, field: np.ndarray) -> float:
    """Discrete L1 norm of a physical-space field."""
    return float(np.sum(np.abs(field)) * grid.dx**grid.n)


def hermitian_asymmetry(state: SpectralState) -> float:
    """Relative deviation from uhat(-k) = conj(uhat(k)); 0 for real fields."""
    g = state.grid
    scale = max(np.max(np.abs(state.phi_hat)), np.max(np.abs(state.m_hat)), 1e-300)
    d = np.max(np.abs(state.phi_hat - g.conj_flip(state.phi_hat)))
    for i in range(g.n):
        d = max(d, np.max(np.abs(state.m_hat[i] - g.conj_flip(state.m_hat[i]))))
    return float(d / scale)


def zero_state(grid: Grid) -> SpectralState:
    return SpectralState(
        grid,
        np.zeros(grid.shape, dtype=complex),
        np.zeros((grid.n, *grid.shape), dtype=complex),
    )


def random_state(grid: Grid, rng: np.random.Generator, amplitude: float = 1.0) -> SpectralState:
    """Hermitian-symmetric random state, Nyquist planes zeroed.

    Built by transforming white noise from physical space; Nyquist modes are
    removed so states stay real-representable under the odd-in-xi couplings
    of the propagator.
    """
    phi = rng.standard_normal(grid.shape)
    phi_hat = grid.to_spectral(phi)
    m_hat = np.stack([grid.to_spectral(rng.standard_normal(grid.shape)) for _ in range(grid.n)])
    keep = ~grid.nyquist_mask
    phi_hat *= keep
    m_hat *= keep
    scale = amplitude / max(np.max(np.abs(phi_hat)), np.max(np.abs(m_hat)))
    return SpectralState(grid, phi_hat * scale, m_hat * scale)


def gaussian_state(
    grid: Grid,
    amplitude: float,
    width: float | None = None,
    derivative_form: bool = True,
    derivative_axis: int = 0,
    mean_zero: bool = True,
) -> SpectralState:
    """Centered Gaussian bump data.

    phi0 = amplitude * exp(-|x - c|^2 / (2 width^2)) and the momentum is the
    matching bump put into derivative form m0 = d/dx_j mtilde0, realized
    spectrally as mhat0 = i xi_j mtildehat0 (with the Nyquist plane zeroed).
    """
    if width is None:
        width = grid.L / 16.0
    axes = [grid.dx * np.arange(grid.N) - grid.L / 2.0 for _ in range(grid.n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    r2 = sum(x**2 for x in mesh)
    bump = amplitude * np.exp(-r2 / (2.0 * width**2))
    phi = bump - bump.mean() if mean_zero else bump
    phi_hat = grid.to_spectral(phi)
    keep = ~grid.nyquist_mask
    phi_hat *= keep

    m_hat = np.zeros((grid.n, *grid.shape), dtype=complex)
    if derivative_form:
        tilde_hat = grid.to_spectral(bump)
        xi_j = grid.xi_vectors[derivative_axis]
        for i in range(grid.n):
            m_hat[i] = 1j * xi_j * tilde_hat * keep
        m_hat[:] *= ~grid.nyquist_mask
    else:
        for i in range(grid.n):
            m_hat[i] = phi_hat
    return SpectralState(grid, phi_hat, m_hat)


def single_mode_state(
    grid: Grid,
    k: tuple[int, ...],
    phi_amp: complex = 1.0,
    m_amp: tuple[complex, ...] | None = None,
) -> SpectralState:
    """State carrying one Fourier mode plus its conjugate partner."""
    st = zero_state(grid)
    idx = grid.mode_index(k)
    cidx = grid.mode_index(tuple(-ki for ki in k))
    st.phi_hat[idx] = phi_amp
    st.phi_hat[cidx] += np.conj(phi_amp)
    if m_amp is not None:
        for i, a in enumerate(m_amp):
            st.m_hat[i][idx] = a
            st.m_hat[i][cidx] += np.conj(a)
    return st
