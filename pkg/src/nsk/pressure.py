"""Pressure models satisfying the critical condition P'(1) = 0.

The background density is the constant state rho = 1; every model is
validated to have a vanishing pressure derivative there, which is the regime
where the linearized system loses its acoustic restoring term.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidPressure

__all__ = [
    "PressureModel",
    "critical_quadratic",
    "van_der_waals",
    "custom_pressure",
]

_CRITICAL_TOL = 1e-12


@dataclass(frozen=True)
class PressureModel:
    """Smooth pressure P(rho) with evaluators for P, P', P''."""

    tag: str
    p: Callable[[np.ndarray], np.ndarray]
    dp: Callable[[np.ndarray], np.ndarray]
    d2p: Callable[[np.ndarray], np.ndarray]
    rho_min: float = 0.1
    rho_max: float = 10.0
    # Taylor coefficients of P''(1 + x) in x, when the model is polynomial;
    # consumed only by the dense-convolution oracle.
    d2p_taylor: tuple[float, ...] | None = None
    # Non-critical pressures are outside the regime this harness targets;
    # they can be forced through for exploratory runs only.
    allow_noncritical: bool = False

    def __post_init__(self):
        if not (0 < self.rho_min < 1 < self.rho_max):
            raise InvalidPressure("density window must satisfy 0 < rho_min < 1 < rho_max")
        if self.allow_noncritical:
            return
        scale = max(1.0, abs(float(self.d2p(np.asarray(1.0)))))
        if abs(float(self.dp(np.asarray(1.0)))) > _CRITICAL_TOL * scale:
            raise InvalidPressure(
                f"model {self.tag!r} has P'(1) = {float(self.dp(np.asarray(1.0))):.3e}; "
                "the critical condition P'(1) = 0 is required "
                "(pass allow_noncritical=True to override)"
            )


def critical_quadratic(c: float) -> PressureModel:
    """P(rho) = c (rho - 1)^2, the minimal model with P'(1) = 0."""
    return PressureModel(
        tag="critical_quadratic",
        p=lambda rho: c * (rho - 1.0) ** 2,
        dp=lambda rho: 2.0 * c * (rho - 1.0),
        d2p=lambda rho: 2.0 * c * np.ones_like(np.asarray(rho, dtype=float)),
        d2p_taylor=(2.0 * c,),
    )


def van_der_waals(a: float, b: float, theta: float | None = None) -> PressureModel:
    """Van der Waals pressure P(rho) = rho*theta/(1 - b*rho) - a*rho^2.

    With theta omitted it is chosen as 2*a*(1-b)^2, which places the constant
    state rho = 1 exactly at P'(1) = 0 (the non-monotone, phase-transition
    regime for b < 1/3 gives P''(1) < 0).
    """
    if not (a > 0 and 0 < b < 1):
        raise InvalidPressure("van der Waals model needs a > 0 and 0 < b < 1")
    if theta is None:
        theta = 2.0 * a * (1.0 - b) ** 2
    rho_max = 0.99 / b

    def p(rho):
        return rho * theta / (1.0 - b * rho) - a * rho**2

    def dp(rho):
        return theta / (1.0 - b * rho) ** 2 - 2.0 * a * rho

    def d2p(rho):
        return 2.0 * b * theta / (1.0 - b * rho) ** 3 - 2.0 * a * np.ones_like(np.asarray(rho, dtype=float))

    return PressureModel(
        tag="van_der_waals", p=p, dp=dp, d2p=d2p, rho_max=min(10.0, rho_max)
    )


def custom_pressure(
    p: Callable,
    dp: Callable,
    d2p: Callable,
    rho_min: float = 0.1,
    rho_max: float = 10.0,
    d2p_taylor: tuple[float, ...] | None = None,
    allow_noncritical: bool = False,
) -> PressureModel:
    """Wrap user-supplied evaluators; rejected unless P'(1) = 0 (or the
    non-critical override is set explicitly)."""
    return PressureModel(
        tag="custom", p=p, dp=dp, d2p=d2p,
        rho_min=rho_min, rho_max=rho_max, d2p_taylor=d2p_taylor,
        allow_noncritical=allow_noncritical,
    )
