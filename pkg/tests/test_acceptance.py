"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Every tolerance is pinned here; nothing is deferred to later calibration.
Runtime budgets are asserted where the criterion states one.
"""

import math
import time

import numpy as np
import pytest

from nsk.analysis import (
    EnergyWeights,
    decay_fit,
    energy_functional,
    energy_inequality_check,
    k12_bound_check,
    sobolev_pair_norm,
)
from nsk.cutoff import make_cutoff
from nsk.nonlinearity import eval_F, korteweg_divergence
from nsk.oracles import RadialProfile, direct_nonlinearity, radial_linear_norm, rk4_evolve_state
from nsk.pressure import critical_quadratic
from nsk.propagator import apply_semigroup, mode_propagator
from nsk.spectral import (
    PhysParams,
    SpectralState,
    gaussian_state,
    l1_norm,
    l2_norm,
    make_grid,
    random_state,
    seminorm,
    single_mode_state,
)
from nsk.stepping import StepperConfig, picard_iterate, simulate

pytestmark = pytest.mark.acceptance


def report(name: str, ok: bool, detail: str):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def default_params():
    return PhysParams(nu=1.0, nu_tilde=1.0, kappa=1.0, pressure=critical_quadratic(1.0))


def test_semigroup_correctness():
    """apply_semigroup vs per-mode RK4 and the composition law, 16^3."""
    started = time.time()
    rng = np.random.default_rng(101)
    g = make_grid(3, 16, 2 * np.pi)
    worst_rk4 = 0.0
    worst_comp = 0.0
    for i in range(20):
        if i % 4 == 0:
            k_target = 1.0 + rng.uniform(-1e-6, 1e-6)  # |K - 1| < 1e-6
        else:
            k_target = float(rng.uniform(0.3, 2.5))
        nu = float(rng.uniform(0.5, 1.5))
        nu_tilde = float(rng.uniform(0.5, 1.5))
        kappa = (k_target * (nu + nu_tilde) / 2.0) ** 2
        p = PhysParams(nu=nu, nu_tilde=nu_tilde, kappa=kappa)
        st = random_state(g, rng)
        t = float(rng.uniform(0.2, 1.0))
        exact = apply_semigroup(st, t, p)
        ref = rk4_evolve_state(st, t, dt=5e-4 * t, params=p)
        worst_rk4 = max(worst_rk4, l2_norm(exact - ref) / l2_norm(ref))
        s = float(rng.uniform(0.1, 1.0))
        one = apply_semigroup(st, t + s, p)
        two = apply_semigroup(apply_semigroup(st, t, p), s, p)
        worst_comp = max(worst_comp, l2_norm(one - two) / l2_norm(one))
    elapsed = time.time() - started
    report(
        "semigroup-correctness",
        worst_rk4 < 1e-8 and worst_comp < 1e-10 and elapsed < 60.0,
        f"rk4 err {worst_rk4:.2e} (<1e-8), composition {worst_comp:.2e} (<1e-10), {elapsed:.0f}s (<60s)",
    )


def test_critical_regime_continuity():
    """Propagator blocks continuous through K = 1 under a kappa sweep."""
    xi = np.array([1.0, 1.0, 0.0])
    t = 0.8
    nu = nu_tilde = 1.0
    k_star = ((nu + nu_tilde) / 2.0) ** 2
    kappas = np.linspace(k_star * (1 - 1e-5), k_star * (1 + 1e-5), 4001)
    blocks = []
    for kap in kappas:
        prop = mode_propagator(xi, t, PhysParams(nu=nu, nu_tilde=nu_tilde, kappa=float(kap)))
        blocks.append([prop.s11, prop.d1, prop.s22_transverse, prop.s22_longitudinal])
    jumps = np.max(np.abs(np.diff(np.asarray(blocks), axis=0)), axis=0)
    worst = float(np.max(jumps))
    report("critical-regime-stability", worst < 1e-8, f"max block jump {worst:.2e} (<1e-8)")


def test_linear_decay_rates():
    """Theorem-rate check at k = 0, 1 (n = 3) via the radial oracle."""
    started = time.time()
    p = default_params()
    profile = RadialProfile()
    ts = np.geomspace(80.0, 1e4, 24)
    fits = {}
    for k in (0, 1):
        norms = [radial_linear_norm(float(t), profile, k, p, n=3) for t in ts]
        fits[k] = decay_fit(ts, norms, k=k, n=3, window=(1e2, 1e4), tol=0.03)
    elapsed = time.time() - started
    ok = fits[0].passed and fits[1].passed and elapsed < 60.0
    report(
        "linear-decay-rates",
        ok,
        f"k=0: {fits[0].exponent:.4f} (target -0.75 +/- 0.03), "
        f"k=1: {fits[1].exponent:.4f} (target -1.25 +/- 0.03), {elapsed:.0f}s (<60s)",
    )


def test_k12_kernel_bound():
    """||K12(t,.)||_L2 decays at least like t^(-n/4) on t in [10, 1e4]."""
    started = time.time()
    rep = k12_bound_check(np.geomspace(10.0, 1e4, 12), default_params(), n=3, r_inf=2.0)
    elapsed = time.time() - started
    report(
        "k12-kernel-bound",
        rep.passed and elapsed < 30.0,
        f"exponent {rep.exponent:.4f} <= {rep.bound:.4f}, {elapsed:.1f}s",
    )


def test_energy_estimates():
    """F = 0 monotonicity over 50 random data and the forced discrete
    inequality on a nonlinear 32^3 run."""
    started = time.time()
    p = default_params()

    # (a) linear high-frequency runs
    g = make_grid(3, 16, 2 * np.pi)
    w = EnergyWeights.from_params(p, s=2)
    cut = make_cutoff(g, 1.0, 2.0)
    rng = np.random.default_rng(2024)
    violations = 0
    for _ in range(50):
        st = cut.project_high(random_state(g, rng))
        e_prev, _ = energy_functional(st, w)
        cur = st
        for _ in range(12):
            cur = apply_semigroup(cur, 0.1, p)
            e_val, _ = energy_functional(cur, w)
            if e_val > e_prev * (1 + 1e-12):
                violations += 1
            e_prev = e_val

    # (b) nonlinear small-data 32^3 run
    g32 = make_grid(3, 32, 2 * np.pi)
    cut32 = make_cutoff(g32, 1.0, 2.0)
    u0 = gaussian_state(g32, 1e-2)
    rows = {"e": [], "d": [], "f_sq": [], "t": []}

    def monitor(t, state, forcing):
        high = cut32.project_high(state)
        e_val, d_val = energy_functional(high, w)
        f_high = cut32.project_high(forcing.as_state())
        f_norm = sobolev_pair_norm(
            SpectralState(g32, np.zeros_like(state.phi_hat), f_high.m_hat), w.s - 1
        )
        rows["t"].append(t)
        rows["e"].append(e_val)
        rows["d"].append(d_val)
        rows["f_sq"].append(f_norm**2)
        return {}

    cfg = StepperConfig(dt=1e-3, t_end=2.0, scheme="etd1", sample_every=1)
    simulate(u0, cfg, p, monitor=monitor)
    check = energy_inequality_check(
        np.asarray(rows["t"]), np.asarray(rows["e"]), np.asarray(rows["d"]),
        np.asarray(rows["f_sq"]), w, r1=cut32.r1, d_margin=0.5,
    )
    elapsed = time.time() - started
    ok = violations == 0 and check.violations == 0 and check.c_fit <= 10 * check.c_apriori and elapsed < 600.0
    report(
        "energy-estimates",
        ok,
        f"linear violations {violations}/50 runs, forced violations {check.violations}, "
        f"C_fit {check.c_fit:.3g} <= 10x a priori {check.c_apriori:.3g}, {elapsed:.0f}s (<600s)",
    )


def test_projection_bounds():
    """Bernstein and Poincare bounds exact on 100 random fields."""
    g = make_grid(3, 16, 2 * np.pi)
    cut = make_cutoff(g, 1.0, 2.0)
    rng = np.random.default_rng(31)
    worst_bern = 0.0
    worst_poin = 0.0
    worst_part = 0.0
    for _ in range(100):
        st = random_state(g, rng)
        low = cut.project_low(st)
        high = cut.project_high(st)
        n0 = l2_norm(st)
        for k in (1, 2, 3):
            worst_bern = max(worst_bern, seminorm(low, k) / (cut.r_inf**k * n0) - 1.0)
        worst_poin = max(worst_poin, l2_norm(high) / (seminorm(st, 1) / cut.r1) - 1.0)
        worst_part = max(worst_part, l2_norm(low + high - st) / n0)
    ok = worst_bern <= 1e-13 and worst_poin <= 1e-13 and worst_part < 1e-14
    report(
        "projection-bounds",
        ok,
        f"bernstein excess {worst_bern:.2e}, poincare excess {worst_poin:.2e}, "
        f"partition {worst_part:.2e} (<1e-14)",
    )


def test_nonlinearity_correctness():
    """eval_F vs dense convolution, the capillary identity, and F_hat(0)."""
    p = PhysParams(nu=1.0, nu_tilde=0.8, kappa=1.3, pressure=critical_quadratic(2.0))
    rng = np.random.default_rng(17)

    g8 = make_grid(3, 8, 2 * np.pi)
    worst = 0.0
    worst_zero = 0.0
    for _ in range(5):
        st = random_state(g8, rng, amplitude=1.0)
        st = st.scaled(0.02 / max(np.max(np.abs(st.phi_hat)), np.max(np.abs(st.m_hat))))
        f = eval_F(st, p).f_m_hat
        ref = direct_nonlinearity(st, p)
        num = math.sqrt(float(np.sum(np.abs(f - ref) ** 2)))
        den = math.sqrt(float(np.sum(np.abs(ref) ** 2)))
        worst = max(worst, num / den)
        scale = float(np.max(np.abs(f)))
        worst_zero = max(worst_zero, float(np.max(np.abs(f[:, 0, 0, 0]))) / scale)

    g32 = make_grid(3, 32, 2 * np.pi)
    st = single_mode_state(g32, (3, 2, -1), phi_amp=0.4 + 0.1j)
    kappa = 1.3
    lhs = korteweg_divergence(g32, st.phi_hat, kappa)
    mask = g32.dealias_mask
    ph = st.phi_hat * mask
    phi = g32.from_spectral(ph)
    rhs = np.stack(
        [
            g32.to_spectral(kappa * phi * g32.from_spectral(1j * g32.xi_vectors[i] * (-g32.xi_sq) * ph))
            for i in range(3)
        ]
    ) * mask
    kort = math.sqrt(float(np.sum(np.abs(lhs - rhs) ** 2)) / float(np.sum(np.abs(rhs) ** 2)))

    ok = worst < 1e-9 and kort < 1e-10 and worst_zero < 1e-14
    report(
        "nonlinearity-correctness",
        ok,
        f"dense-conv err {worst:.2e} (<1e-9), korteweg identity {kort:.2e} (<1e-10), "
        f"F_hat(0) {worst_zero:.2e} (<1e-14)",
    )


def test_picard_contraction():
    """Z-norm contraction with ratio <= 1/2 until d_k < 1e-12 (32^3)."""
    started = time.time()
    p = default_params()
    g = make_grid(3, 32, 2 * np.pi)
    u0 = gaussian_state(g, 1.0)
    e0 = sobolev_pair_norm(u0, 2) + 2 * l1_norm(g, g.from_spectral(u0.phi_hat))
    u0 = u0.scaled(1e-3 / e0)
    diag = picard_iterate(u0, T=10.0, k_max=12, params=p, mesh_points=40, s=2, tol=1e-12)
    elapsed = time.time() - started
    ok = (
        diag.converged
        and not diag.non_contracting
        and all(r <= 0.5 for r in diag.ratios)
        and elapsed < 900.0
    )
    ds = ", ".join(f"{d:.2e}" for d in diag.d)
    report(
        "picard-contraction",
        ok,
        f"d_k = [{ds}], ratios <= 0.5: {all(r <= 0.5 for r in diag.ratios)}, {elapsed:.0f}s (<900s)",
    )


def test_global_run_smoke():
    """32^3 nonlinear run to t = 50: no blowup, conservation, L2 decay."""
    started = time.time()
    p = default_params()
    g = make_grid(3, 32, 2 * np.pi)
    u0 = gaussian_state(g, 1e-2)
    zero = g.mode_index((0, 0, 0))
    mass0 = complex(u0.phi_hat[zero])
    mom0 = [complex(u0.m_hat[i][zero]) for i in range(3)]
    track = {"t": [], "l2": [], "mass": [], "mom": []}

    def monitor(t, state, forcing):
        track["t"].append(t)
        track["l2"].append(l2_norm(state))
        track["mass"].append(abs(complex(state.phi_hat[zero]) - mass0))
        track["mom"].append(
            max(abs(complex(state.m_hat[i][zero]) - mom0[i]) for i in range(3))
        )
        return {}

    cfg = StepperConfig(dt=0.02, t_end=50.0, scheme="etd_rk2", sample_every=25)
    traj = simulate(u0, cfg, p, monitor=monitor)

    drift = max(max(track["mass"]), max(track["mom"]))
    l2s = np.asarray(track["l2"])
    ts = np.asarray(track["t"])
    after = ts > 1.0
    idx = np.where(after)[0]
    monotone = all(l2s[j + 1] <= l2s[j] * (1 + 1e-12) for j in idx[:-1])
    elapsed = time.time() - started
    ok = traj.flags.get("completed", False) and drift < 1e-12 and monotone
    report(
        "global-run-smoke",
        ok,
        f"completed, mass/momentum drift {drift:.2e} (<1e-12), "
        f"L2 non-increasing after t=1: {monotone}, {elapsed:.0f}s",
    )
