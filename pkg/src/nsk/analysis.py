"""Quantitative monitors: energy functional, Z-norm, decay fits, K12 bound.

The high-frequency energy at Sobolev order s uses the rotation-invariant
weight W_s(xi) = sum_{j<=s} |xi|^(2j) in place of the multi-index sums (norm
equivalent; constants reported, never hidden):

    E = sum_xi W_s [ kappa1 kappa |xi|^2 |phi|^2 + kappa1 |m|^2
                     + Re(m . conj(i xi phi)) ] / L^n
    D = sum_xi W_s [ |xi|^4 |phi|^2 + |xi|^2 |m|^2 ] / L^n

The a priori constants below come from the two Cauchy-Schwarz absorptions
in the Fourier-space energy argument; the harness also fits the best
empirical constants on each run and reports both.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.integrate as _integrate

from .cutoff import Cutoff, smoothstep
from .errors import InsufficientWindow, QuadratureFailure
from .propagator import divided_difference, _lambda_pm
from .spectral import PhysParams, SpectralState, seminorm

__all__ = [
    "EnergyWeights",
    "DecayFit",
    "energy_functional",
    "energy_inequality_check",
    "EnergyCheckReport",
    "sobolev_pair_norm",
    "grad_pair_sq",
    "z_norm_records",
    "z_norm",
    "decay_fit",
    "k12_bound_check",
    "K12Report",
]


@dataclass(frozen=True)
class EnergyWeights:
    """Sobolev order and cross-term weight for the energy functional.

    kappa1 must dominate the cross term: kappa1 >= max(1, 1/kappa, 4 c3/nu,
    2 c3/nu_tilde) with c2 = kappa/2 and c3 = (nu+nu_tilde)^2/kappa + 1.
    """

    s: int
    kappa1: float
    nu: float
    nu_tilde: float
    kappa: float

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("Sobolev order s must be nonnegative")
        floor = max(1.0, 1.0 / self.kappa)
        if self.kappa1 < floor * (1 - 1e-12):
            raise ValueError(
                f"kappa1={self.kappa1} below max(1, 1/kappa)={floor}; "
                "the cross term would not be dominated and E could go negative"
            )
        full = self.kappa1_min(self.nu, self.nu_tilde, self.kappa)
        if self.kappa1 < full * (1 - 1e-12):
            warnings.warn(
                f"kappa1={self.kappa1} below {full:.3g}; the a priori dissipation "
                "rate d1 is not guaranteed at this weight",
                stacklevel=2,
            )

    @staticmethod
    def kappa1_min(nu: float, nu_tilde: float, kappa: float) -> float:
        c3 = (nu + nu_tilde) ** 2 / kappa + 1.0
        return max(1.0, 1.0 / kappa, 4.0 * c3 / nu, 2.0 * c3 / max(nu_tilde, 1e-300))

    @classmethod
    def from_params(cls, params: PhysParams, s: int, kappa1: float | None = None, n: int | None = None):
        if n is not None and s < n // 2 + 1:
            warnings.warn(
                f"s={s} below the theorem's floor [n/2]+1={n // 2 + 1}; "
                "run is outside the paper hypotheses",
                stacklevel=2,
            )
        k1 = cls.kappa1_min(params.nu, params.nu_tilde, params.kappa) if kappa1 is None else kappa1
        return cls(s=s, kappa1=k1, nu=params.nu, nu_tilde=params.nu_tilde, kappa=params.kappa)

    @property
    def c2(self) -> float:
        return self.kappa / 2.0

    @property
    def c3(self) -> float:
        return (self.nu + self.nu_tilde) ** 2 / self.kappa + 1.0

    @property
    def d1(self) -> float:
        """A priori dissipation rate: dE/dt + d1 D <= C ||F||^2.

        From the explicit absorptions: the phi dissipation keeps kappa/4 of
        the kappa/2 produced by the cross equation, the momentum dissipation
        keeps at least kappa1 nu of 2 kappa1 nu.
        """
        return min(self.kappa / 4.0, self.kappa1 * self.nu)

    @property
    def d1_linear(self) -> float:
        """Sharper rate valid when F = 0 (nothing eaten by forcing terms)."""
        return min(self.kappa / 2.0, self.kappa1 * self.nu)

    def forcing_constant(self, r1: float) -> float:
        """A priori C with dE/dt + d1 D <= C ||F||^2_{H^s x H^{s-1}}.

        The F2 (momentum forcing) share is (1 + 1/r1^2)^2 (2 kappa1/nu +
        2/kappa); the F1 share 8 kappa1^2 kappa + 1/(kappa1 nu) is carried
        for completeness although the system has no density forcing.
        """
        c = (1.0 + 1.0 / r1**2) ** 2
        c_f2 = c * (2.0 * self.kappa1 / self.nu + 2.0 / self.kappa)
        c_f1 = 8.0 * self.kappa1**2 * self.kappa + 1.0 / (self.kappa1 * self.nu)
        return max(c_f1, c_f2)

    def equivalence_constant(self, r1: float) -> float:
        """C with C^-1 ||u||^2_{H^{s+1} x H^s} <= E <= C ||u||^2 on |xi| >= r1."""
        upper = 1.5 * max(self.kappa1 * self.kappa, self.kappa1)
        lower_inv = 2.0 * (1.0 + 1.0 / r1**2) / min(self.kappa1 * self.kappa, self.kappa1)
        return max(upper, lower_inv)

    def sobolev_weight(self, xi_sq: np.ndarray) -> np.ndarray:
        w = np.ones_like(xi_sq)
        acc = np.ones_like(xi_sq)
        for _ in range(self.s):
            acc = acc * xi_sq
            w = w + acc
        return w


def energy_functional(
    state: SpectralState, w: EnergyWeights, r1: float | None = None
) -> tuple[float, float]:
    """(E, D) of a (high-frequency) state; E >= 0 by the kappa1 domination."""
    g = state.grid
    if r1 is not None:
        low = g.xi_abs < r1 * (1.0 - 1e-12)
        mass = float(np.sum(np.abs(state.phi_hat) ** 2) + np.sum(np.abs(state.m_hat) ** 2))
        low_mass = float(
            np.sum(np.abs(state.phi_hat[low]) ** 2) + np.sum(np.abs(state.m_hat[:, low]) ** 2)
        )
        if mass > 0 and low_mass / mass > 1e-10:
            warnings.warn(
                f"energy functional evaluated on a state with {low_mass / mass:.2e} "
                "relative mass below r1",
                stacklevel=2,
            )
    xi_sq = g.xi_sq
    ws = w.sobolev_weight(xi_sq)
    pw = g.parseval_weight
    phi2 = np.abs(state.phi_hat) ** 2
    m2 = np.sum(np.abs(state.m_hat) ** 2, axis=0)
    cross = np.real(
        np.einsum("i...,i...->...", state.m_hat, np.conj(1j * g.xi_vectors * state.phi_hat))
    )
    e_val = float(np.sum(ws * (w.kappa1 * w.kappa * xi_sq * phi2 + w.kappa1 * m2 + cross)) * pw)
    d_val = float(np.sum(ws * (xi_sq**2 * phi2 + xi_sq * m2)) * pw)
    return e_val, d_val


@dataclass(frozen=True)
class EnergyCheckReport:
    steps: int
    violations: int
    c_fit: float
    c_apriori: float
    d_used: float
    max_residual: float

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.c_fit <= 10.0 * self.c_apriori


def energy_inequality_check(
    times: np.ndarray,
    e_series: np.ndarray,
    d_series: np.ndarray,
    f_sq_series: np.ndarray,
    w: EnergyWeights,
    r1: float,
    d_margin: float = 0.5,
) -> EnergyCheckReport:
    """Discrete check of (E_{i+1} - E_i)/dt + d_margin*d1*D_i <= C ||F_i||^2.

    Steps with no forcing must satisfy the left side <= 0 up to round-off;
    C_fit is the smallest constant covering the forced steps and must stay
    within 10x the a priori constant for acceptance.
    """
    times = np.asarray(times, dtype=float)
    e_series = np.asarray(e_series, dtype=float)
    d_series = np.asarray(d_series, dtype=float)
    f_sq_series = np.asarray(f_sq_series, dtype=float)
    d_used = d_margin * w.d1
    c_ap = w.forcing_constant(r1)
    atol = 1e-12 * max(float(np.max(e_series)), 1e-300)
    f_floor = 1e-30 * max(float(np.max(f_sq_series)), 1e-300)

    violations = 0
    c_fit = 0.0
    max_res = -np.inf
    n_steps = len(times) - 1
    for i in range(n_steps):
        dt = times[i + 1] - times[i]
        lhs = (e_series[i + 1] - e_series[i]) / dt + d_used * d_series[i]
        max_res = max(max_res, lhs)
        if f_sq_series[i] > f_floor:
            c_fit = max(c_fit, lhs / f_sq_series[i])
        elif lhs > atol / dt:
            violations += 1
    return EnergyCheckReport(
        steps=n_steps,
        violations=violations,
        c_fit=float(max(c_fit, 0.0)),
        c_apriori=float(c_ap),
        d_used=float(d_used),
        max_residual=float(max_res),
    )


# --------------------------------------------------------------------------
# Z-norm machinery.


def sobolev_pair_norm(state: SpectralState, s: int) -> float:
    """|| (phi, m) ||_{H^{s+1} x H^s} with unit-weight order sums."""
    total = 0.0
    for j in range(s + 2):
        total += seminorm(state, j, "phi") ** 2
    for j in range(s + 1):
        total += seminorm(state, j, "m") ** 2
    return math.sqrt(total)


def grad_pair_sq(state: SpectralState, s: int) -> float:
    """||grad phi||^2_{H^{s+1}} + ||grad m||^2_{H^s}."""
    total = 0.0
    for j in range(1, s + 3):
        total += seminorm(state, j, "phi") ** 2
    for j in range(1, s + 2):
        total += seminorm(state, j, "m") ** 2
    return total


def z_norm_records(state: SpectralState, split: Cutoff, s: int) -> dict:
    """Per-sample norms consumed by the Z-norm quadrature."""
    low = split.project_low(state)
    high = split.project_high(state)
    return {
        "z_low_0": seminorm(low, 0),
        "z_low_1": seminorm(low, 1),
        "z_high_sob": sobolev_pair_norm(high, s),
        "z_high_grad_sq": grad_pair_sq(high, s),
    }


def z_norm(
    times: np.ndarray,
    records: list[dict],
    n: int,
    C2: float = 1.0,
) -> tuple[float, dict]:
    """Time-weighted norm of a sampled trajectory.

    Four components: weighted low-frequency sup, weighted high-frequency
    Sobolev sup, the L^2-in-time high dissipation integral, and the
    exponentially kernelled dissipation history; trapezoid in time.
    """
    times = np.asarray(times, dtype=float)
    w_low = np.array(
        [
            sum((1 + t) ** (n / 4.0 + j / 2.0) * rec[f"z_low_{j}"] for j in (0, 1))
            for t, rec in zip(times, records)
        ]
    )
    w_high = np.array(
        [(1 + t) ** (n / 4.0 + 0.5) * rec["z_high_sob"] for t, rec in zip(times, records)]
    )
    g = np.array([rec["z_high_grad_sq"] for rec in records])

    comp1 = float(np.max(w_low)) if len(times) else 0.0
    comp2 = float(np.max(w_high)) if len(times) else 0.0
    comp3 = float(math.sqrt(np.trapezoid(g, times))) if len(times) > 1 else 0.0

    # History term: I(t) = int_0^t e^{-C2 (t-tau)} (1+tau)^{-n/2-1} g dtau,
    # advanced by the exponentially weighted trapezoid recursion.
    kern = (1 + times) ** (-n / 2.0 - 1.0) * g
    comp4 = 0.0
    acc = 0.0
    for i in range(len(times)):
        if i > 0:
            dt = times[i] - times[i - 1]
            decay = math.exp(-C2 * dt)
            acc = acc * decay + 0.5 * dt * (decay * kern[i - 1] + kern[i])
        comp4 = max(comp4, (1 + times[i]) ** (n / 4.0 + 0.5) * math.sqrt(max(acc, 0.0)))

    comps = {"low_sup": comp1, "high_sup": comp2, "high_l2t": comp3, "history": comp4}
    return comp1 + comp2 + comp3 + comp4, comps


# --------------------------------------------------------------------------
# Decay fitting.


@dataclass(frozen=True)
class DecayFit:
    window: tuple[float, float]
    exponent: float
    half_width: float
    target: float
    tol: float
    samples: int

    @property
    def passed(self) -> bool:
        return abs(self.exponent - self.target) <= self.tol


def decay_fit(
    times,
    norms,
    k: int,
    n: int,
    window: tuple[float, float],
    tol: float = 0.05,
    box_limit: float | None = None,
) -> DecayFit:
    """Least-squares slope of log norm vs log(1+t) against -n/4 - k/2.

    The window must start at t >= 1 (the (1+t) regime) and, on periodic-box
    data, end before the spectral gap contaminates the fit
    (t_b <= 0.1 (L/2pi)^2, enforced when box_limit is given).
    """
    t_a, t_b = window
    if t_a < 1.0:
        raise InsufficientWindow(f"fit window must start at t >= 1, got {t_a}")
    if box_limit is not None and t_b > 0.1 * box_limit:
        raise InsufficientWindow(
            f"window end {t_b} beyond the spectral-gap limit 0.1*(L/2pi)^2 = {0.1 * box_limit}"
        )
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    sel = (times >= t_a) & (times <= t_b)
    if int(np.sum(sel)) < 10:
        raise InsufficientWindow(f"only {int(np.sum(sel))} samples inside {window}, need >= 10")
    if np.any(norms[sel] <= 0):
        raise InsufficientWindow("norms must be positive inside the fit window")
    x = np.log1p(times[sel])
    y = np.log(norms[sel])
    (slope, _), cov = np.polyfit(x, y, 1, cov=True)
    half = 1.96 * math.sqrt(max(float(cov[0, 0]), 0.0))
    return DecayFit(
        window=(float(t_a), float(t_b)),
        exponent=float(slope),
        half_width=float(half),
        target=-n / 4.0 - k / 2.0,
        tol=float(tol),
        samples=int(np.sum(sel)),
    )


# --------------------------------------------------------------------------
# K12 kernel bound (low-frequency convolution kernel of the momentum block).


@dataclass(frozen=True)
class K12Report:
    times: tuple[float, ...]
    norms: tuple[float, ...]
    exponent: float
    bound: float
    passed: bool


def k12_bound_check(
    t_list,
    params: PhysParams,
    n: int = 3,
    r_inf: float = 2.0,
    support_factor: float = 2.0,
    margin: float = 0.03,
) -> K12Report:
    """Fit the decay exponent of ||K12(t, .)||_L2 and compare to -n/4.

    ||K12||^2 = c_n int_0^{sf*r_inf} D1(t; r)^2 r^4 chi0(r)^2 r^{n-1} dr,
    where chi0 is the auxiliary cutoff equal to 1 on r <= r_inf and
    supported in r <= sf*r_inf.
    """
    c_n = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0) / (2.0 * math.pi) ** n
    r_top = support_factor * r_inf

    def chi0(r):
        return smoothstep((r - r_inf) / (r_top - r_inf))

    norms = []
    for t in t_list:
        def integrand(r: float) -> float:
            lp, lm = _lambda_pm(np.asarray(r * r, dtype=float), params)
            d1 = divided_difference(lp, lm, t)
            return float(np.real(d1) ** 2 * r**4 * chi0(r) ** 2 * r ** (n - 1))

        s = 1.0 / math.sqrt(1.0 + params.A * t)
        pts = sorted({min(p, r_top * 0.999) for p in (0.5 * s, s, 2 * s, 4 * s, r_inf)})
        val, err = _integrate.quad(
            integrand, 0.0, r_top, points=pts, limit=300, epsabs=1e-300, epsrel=1e-9
        )
        if not np.isfinite(val) or val <= 0:
            raise QuadratureFailure(f"K12 quadrature failed at t={t}")
        norms.append(math.sqrt(c_n * val))

    lt = np.log(np.asarray(t_list, dtype=float))
    ln = np.log(np.asarray(norms))
    slope = float(np.polyfit(lt, ln, 1)[0])
    bound = -n / 4.0 + margin
    return K12Report(
        times=tuple(float(t) for t in t_list),
        norms=tuple(norms),
        exponent=slope,
        bound=bound,
        passed=bool(slope <= bound),
    )
