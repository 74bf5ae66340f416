"""Pseudo-spectral simulator and verification harness for the compressible
Navier-Stokes-Korteweg system linearized at a critical pressure state."""

from .analysis import DecayFit, EnergyWeights, decay_fit, energy_functional, k12_bound_check, z_norm
from .cutoff import Cutoff, make_cutoff, poincare_constant_check
from .nonlinearity import ForcingField, eval_F, korteweg_divergence, p1_factor, p2_factor
from .oracles import RadialProfile, direct_nonlinearity, radial_linear_norm, rk4_mode
from .pressure import PressureModel, critical_quadratic, custom_pressure, van_der_waals
from .propagator import (
    EigenPair,
    ModePropagator,
    apply_semigroup,
    divided_difference,
    eigenvalues,
    mode_propagator,
)
from .spectral import (
    Grid,
    PhysParams,
    SpectralState,
    gaussian_state,
    l2_norm,
    make_grid,
    random_state,
    seminorm,
    single_mode_state,
    zero_state,
)
from .stepping import StepperConfig, Trajectory, etd_step, picard_iterate, simulate

__version__ = "0.1.0"
