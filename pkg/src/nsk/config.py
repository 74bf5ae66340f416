"""Experiment configuration: TOML in, validated dataclasses out.

Unknown keys are rejected so silent typos cannot reconfigure a run.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .errors import ConfigError

__all__ = ["ExperimentConfig", "load_config", "default_config_dict"]


def default_config_dict() -> dict:
    return {
        "seed": 1234,
        "grid": {"n": 3, "N": 32, "L": 2 * 3.141592653589793},
        "params": {
            "nu": 1.0,
            "nu_tilde": 1.0,
            "kappa": 1.0,
            "pressure": {"tag": "critical_quadratic", "c": 1.0},
        },
        "cutoff": {"r1": 1.0, "r_inf": 2.0},
        "stepper": {
            "scheme": "etd_rk2",
            "dt": 0.02,
            "t_end": 50.0,
            "adapt": False,
            "adapt_target": 1e-8,
            "amplitude_guard": 0.5,
            "sample_every": 10,
        },
        "initial": {
            "profile": "gaussian",
            "amplitude": 1e-2,
            "width": 0.0,          # 0 -> L/16
            "derivative_form": True,
            "mean_zero": True,
            "mode_k": [1, 0, 0],
            "path": "",
            "e0_target": 0.0,      # 0 -> keep amplitude; else rescale to E0
        },
        "analysis": {
            "s": 2,
            "kappa1": 0.0,         # 0 -> admissible minimum
            "C2": 1.0,
            "fit_window": [100.0, 10000.0],
        },
        "picard": {"T": 10.0, "k_max": 12, "mesh_points": 40, "tol": 1e-12},
        "linear_decay": {"t_min": 50.0, "t_max": 10000.0, "points": 25},
        "validate": {
            "semigroup_tuples": 8,
            "semigroup_rtol": 1e-8,
            "composition_rtol": 1e-10,
            "korteweg_rtol": 1e-10,
            "projection_slack": 1e-13,
            "partition_tol": 1e-14,
            "k12_margin": 0.03,
            "grid_n": 16,
        },
        "output": {"dir": "out"},
    }


def _merge_strict(defaults: dict, user: dict, path: str = "") -> dict:
    out = {}
    for key, dval in defaults.items():
        if key in user:
            uval = user[key]
            if isinstance(dval, dict):
                if not isinstance(uval, dict):
                    raise ConfigError(f"section {path + key!r} must be a table")
                out[key] = _merge_strict(dval, uval, path + key + ".")
            else:
                out[key] = uval
        else:
            out[key] = dval
    for key in user:
        if key not in defaults:
            raise ConfigError(f"unknown configuration key {path + key!r}")
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict = field(repr=False)

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    def section(self, name: str) -> dict:
        return self.raw[name]

    def build_grid(self):
        from .spectral import make_grid

        g = self.raw["grid"]
        return make_grid(int(g["n"]), int(g["N"]), float(g["L"]))

    def build_params(self):
        import warnings

        from .pressure import critical_quadratic, van_der_waals
        from .spectral import PhysParams

        p = self.raw["params"]
        n = int(self.raw["grid"]["n"])
        if float(p["nu_tilde"]) < float(p["nu"]) * (1.0 - 2.0 / n):
            warnings.warn(
                "nu_tilde below nu*(1 - 2/n): the viscosity pair is outside "
                "the physically admissible range 2 mu/n + mu' >= 0",
                stacklevel=2,
            )
        pr = p["pressure"]
        tag = pr["tag"]
        if tag == "critical_quadratic":
            model = critical_quadratic(float(pr.get("c", 1.0)))
        elif tag == "van_der_waals":
            model = van_der_waals(float(pr["a"]), float(pr["b"]))
        else:
            raise ConfigError(f"unknown pressure tag {tag!r}")
        return PhysParams(
            nu=float(p["nu"]),
            nu_tilde=float(p["nu_tilde"]),
            kappa=float(p["kappa"]),
            pressure=model,
        )

    def build_cutoff(self, grid):
        from .cutoff import make_cutoff

        c = self.raw["cutoff"]
        if not (0 < float(c["r1"]) < float(c["r_inf"])):
            raise ConfigError("cutoff requires 0 < r1 < r_inf")
        return make_cutoff(grid, float(c["r1"]), float(c["r_inf"]))

    def build_stepper(self):
        from .stepping import StepperConfig

        st = self.raw["stepper"]
        return StepperConfig(
            dt=float(st["dt"]),
            t_end=float(st["t_end"]),
            scheme=str(st["scheme"]),
            adapt=bool(st["adapt"]),
            adapt_target=float(st["adapt_target"]),
            amplitude_guard=float(st["amplitude_guard"]),
            sample_every=int(st["sample_every"]),
        )

    def build_weights(self, params, grid):
        from .analysis import EnergyWeights

        a = self.raw["analysis"]
        kappa1 = float(a["kappa1"]) or None
        return EnergyWeights.from_params(params, int(a["s"]), kappa1, n=grid.n)

    def build_initial(self, grid, rng):
        from .errors import ConfigError as _CE
        from .spectral import gaussian_state, random_state, single_mode_state

        ini = self.raw["initial"]
        profile = ini["profile"]
        amp = float(ini["amplitude"])
        if profile == "gaussian":
            width = float(ini["width"]) or grid.L / 16.0
            return gaussian_state(
                grid,
                amp,
                width=width,
                derivative_form=bool(ini["derivative_form"]),
                mean_zero=bool(ini["mean_zero"]),
            )
        if profile == "mode":
            k = tuple(int(x) for x in ini["mode_k"][: grid.n])
            return single_mode_state(grid, k, phi_amp=amp, m_amp=(amp,) * grid.n)
        if profile == "random":
            return random_state(grid, rng, amplitude=amp)
        if profile == "file":
            import numpy as np

            from .spectral import SpectralState

            data = np.load(ini["path"])
            return SpectralState(grid, data["phi_hat"], data["m_hat"])
        raise _CE(f"unknown initial profile {profile!r}")


def load_config(path: str | Path | None, overrides: dict | None = None) -> ExperimentConfig:
    user: dict = {}
    if path is not None:
        with open(path, "rb") as fh:
            user = _toml.load(fh)
    merged = _merge_strict(default_config_dict(), user)
    if overrides:
        for key, val in overrides.items():
            merged[key] = val
    return ExperimentConfig(raw=merged)
