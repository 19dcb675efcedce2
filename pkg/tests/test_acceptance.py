"""End-to-end acceptance criteria.

Each test appends one PASS/FAIL line to the terminal summary, so a plain
``pytest tests/test_acceptance.py`` shows the whole gate at a glance.
"""

import math
import time
import warnings

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from grwsim.config import ExperimentConfig
from grwsim.core import (
    ContinuousConfig,
    HittingConfig,
    ObservableSet,
    StateVector,
    apply_sharpening,
    continuous_step,
)
from grwsim.detectors import (
    DetectorParams,
    TwoLevelState,
    one_detector_step,
    reduced_from_full,
    stochastic_factors,
)
from grwsim.engine import FullModelParams, RunConfig, run_ensemble
from grwsim.io import plot_command, run_command
from grwsim.stats import (
    Conditioning,
    born_fraction,
    equivalence_test,
    median_first_passage,
    persistence_curve,
)

pytestmark = [pytest.mark.slow, pytest.mark.filterwarnings("ignore::UserWarning")]

NS = 1e-9
GAMMA_1 = DetectorParams(a=1.0, gamma=0.5e14)
GAMMA_2 = DetectorParams(a=0.1, gamma=0.5e11)


def report(number, name, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number}. {name}: {detail}")
    assert ok, detail


def run(params, p0=0.5, model="one_detector", n=1000, t_max=None, seed=1, **kw):
    t_max = t_max if t_max is not None else 200 * params.reduction_time
    return run_ensemble(RunConfig(model, params, p0, t_max=t_max, n_paths=n, master_seed=seed, **kw), threads=4)


def test_1_born_rule():
    parts, ok = [], True
    for k, p0 in enumerate((1 / 2, 2 / 3, 4 / 5, 1 / 20)):
        start = time.perf_counter()
        e = run_ensemble(RunConfig("one_detector", GAMMA_2, p0, t_max=60 * NS, n_paths=1000, master_seed=100 + k))
        elapsed = time.perf_counter() - start
        s = born_fraction(e)
        sigma = math.sqrt(p0 * (1 - p0) / s.n_resolved)
        good = abs(s.born_fraction_R - p0) <= 3 * sigma and elapsed < 60 and s.unresolved_count == 0
        ok &= good
        parts.append(f"p0={p0:.3g} -> {s.born_fraction_R:.3f} ({(s.born_fraction_R - p0) / sigma:+.1f} sigma, {elapsed:.1f} s)")
    report(1, "Born rule", ok, "; ".join(parts))


def test_2_timescales():
    m1 = median_first_passage(run(GAMMA_1)) / NS
    m2 = median_first_passage(run(GAMMA_2)) / NS
    ok = 1e-5 <= m1 <= 2e-4 and 0.5 <= m2 <= 10
    report(2, "convergence timescales", ok, f"gamma_1 median {m1:.3g} ns in [1e-5, 2e-4]; gamma_2 median {m2:.3g} ns in [0.5, 10]")


def test_3_activation_clustering():
    T = 1e-4 * NS
    t_max = 200 * GAMMA_1.reduction_time + 3 * T
    base = median_first_passage(run(GAMMA_1, t_max=t_max, seed=3))
    act = median_first_passage(run(GAMMA_1.with_activation(T), t_max=t_max, seed=3))
    ratio = act / base
    ok = ratio >= 5 and 0.3 * T <= act <= 3 * T
    report(
        3,
        "activation clustering",
        ok,
        f"median with activation {act / NS:.3g} ns = {act / T:.2f} T (window [0.3, 3] T), "
        f"ratio to no activation {ratio:.2f} (need >= 5)",
    )


def test_4_two_detector_speedup():
    one = median_first_passage(run(GAMMA_2, n=10**4, seed=4))
    two = median_first_passage(run(GAMMA_2, model="two_detector", n=10**4, seed=4))
    ratio = two / one
    report(4, "two-detector speedup", 0.4 <= ratio <= 0.6, f"median ratio {ratio:.3f} in [0.4, 0.6]")


def test_5_hitting_continuous_equivalence():
    obs = ObservableSet([[0.0, GAMMA_2.a]])
    tau = GAMMA_2.reduction_time
    common = dict(p0=0.5, t_max=tau, n_paths=10**4, epsilon=1e-4)

    def continuous(seed):
        cfg = RunConfig("full_continuous", FullModelParams(obs, gamma=GAMMA_2.gamma), master_seed=seed, **common)
        return run_ensemble(cfg, threads=4)

    def hitting(mult, seed):
        alpha = 1.0 / obs.spread**2 / mult
        lam = 2 * GAMMA_2.gamma / alpha
        cfg = RunConfig("full_hitting", FullModelParams(obs, hitting=HittingConfig(alpha, lam)),
                        master_seed=seed, dt=1e-3 * tau, **common)
        return run_ensemble(cfg, threads=4)

    ref = continuous(1)
    floor = equivalence_test(continuous(2), ref, tau)
    ladder = [equivalence_test(hitting(m, 10 + m), ref, tau) for m in (1, 10, 100)]
    ok = ladder[0] > ladder[1] > ladder[2] and ladder[2] < 2 * floor
    report(
        5,
        "hitting/continuous equivalence",
        ok,
        "KS x1, x10, x100 = " + ", ".join(f"{d:.4f}" for d in ladder) + f"; same-process floor {floor:.4f}",
    )


def test_6_exactness():
    rng = np.random.default_rng(6)
    checks = {}

    worst = 0.0
    for p, x in zip(rng.random(10**4), rng.normal(0, 0.5, 10**4)):
        up, down = stochastic_factors(p, 1.0, x)
        worst = max(worst, abs(p * up + (1 - p) * down - 1.0))
    checks["normalization"] = (worst <= 1e-14, f"max |p'+q'-1| {worst:.1e}")

    obs = ObservableSet([[0.0, GAMMA_2.a]])
    cfg = ContinuousConfig(GAMMA_2.gamma, 1e-3 * GAMMA_2.reduction_time)
    fixed = True
    for i in (0, 1):
        basis = StateVector.basis(2, i)
        fixed &= np.array_equal(continuous_step(basis, obs, cfg, [1e-6]).amplitudes, basis.amplitudes)
        fixed &= np.array_equal(apply_sharpening(basis, obs, [0.03], 100.0)[0].amplitudes, basis.amplitudes)
        fixed &= one_detector_step(TwoLevelState(float(i)), GAMMA_2, cfg.dt, 1e-6).p == float(i)
    checks["eigenstates"] = (bool(fixed), "fixed" if fixed else "moved")

    e = run(GAMMA_2, p0=2 / 3, n=10**4, t_max=10 * GAMMA_2.reduction_time, seed=6)
    drift = e.p[:, -1].mean() - 2 / 3
    se = e.p[:, -1].std(ddof=1) / math.sqrt(e.n_paths)
    checks["martingale"] = (abs(drift) <= 3 * se, f"drift {drift:+.2e} ({drift / se:+.1f} sigma)")

    p, dt = 0.3, cfg.dt
    params = GAMMA_2.with_activation(2 * dt)
    beta = 0.5
    state = TwoLevelState(p, t=dt)
    dp = np.array([one_detector_step(state, params, dt, z).p for z in math.sqrt(dt) * rng.standard_normal(10**5)]) - p
    expected = (2 * params.a * math.sqrt(params.gamma) * beta) ** 2 * p**2 * (1 - p) ** 2 * dt
    rel = dp.var() / expected - 1
    checks["variance"] = (abs(rel) <= 0.05, f"one-step variance off by {rel:+.2%}")

    ok = all(v[0] for v in checks.values())
    report(6, "exactness properties", ok, "; ".join(f"{k}: {v[1]}" for k, v in checks.items()))


def test_7_cross_model():
    obs = ObservableSet([[0.0, GAMMA_2.a]])
    dt = 1e-3 * GAMMA_2.reduction_time
    cfg = ContinuousConfig(GAMMA_2.gamma, dt)
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(700 + seed)
        p0 = rng.uniform(0.05, 0.95)
        s, full = TwoLevelState(p0), StateVector.two_level(p0, phase=rng.uniform(0, 2 * math.pi))
        for dB in math.sqrt(dt) * rng.standard_normal(1000):
            s = one_detector_step(s, GAMMA_2, dt, dB)
            full = continuous_step(full, obs, cfg, [dB])
            worst = max(worst, abs(s.p - reduced_from_full(full).p))
    bound = 10 * dt * GAMMA_2.rate
    report(7, "cross-model oracle", worst < bound, f"max |dp| {worst:.2e} = {worst / (dt * GAMMA_2.rate):.2f} dt*gamma*a^2 (limit 10)")


def _ordering(upper, lower, n_upper, n_lower, mask):
    """Count strict violations and those beyond three pooled binomial errors."""
    diff = lower - upper
    pooled = (upper * n_upper + lower * n_lower) / (n_upper + n_lower)
    se = np.sqrt(pooled * (1 - pooled) * (1 / n_upper + 1 / n_lower))
    strict = int(np.sum((diff > 0) & mask))
    significant = int(np.sum((diff > 3 * se) & mask))
    return strict, significant


def test_8_persistence_orderings():
    t_max = 100 * GAMMA_1.reduction_time
    half = run(GAMMA_1, p0=0.5, t_max=t_max, seed=8)
    twentieth = run(GAMMA_1, p0=1 / 20, t_max=t_max, seed=9)
    mask = half.times >= t_max / 100

    u_half, u_tw = persistence_curve(half).fraction, persistence_curve(twentieth).fraction
    s_u, x_u = _ordering(u_half, u_tw, half.n_paths, twentieth.n_paths, mask)

    r = Conditioning.CONVERGED_R_ONLY
    c_half, c_tw = persistence_curve(half, r).fraction, persistence_curve(twentieth, r).fraction
    n_half, n_tw = half.count("converged_R"), twentieth.count("converged_R")
    s_c, x_c = _ordering(c_tw, c_half, n_tw, n_half, mask)

    area = lambda f: float(np.sum(f[1:]) * (half.times[1] - half.times[0]) / NS)
    ok = x_u == 0 and x_c == 0 and area(u_half) > area(u_tw) and area(c_tw) > area(c_half)
    report(
        8,
        "persistence orderings",
        ok,
        f"all paths: 1/2 over 1/20, {s_u} strict / {x_u} significant violations; "
        f"converged to R ({n_half} vs {n_tw} paths): 1/20 over 1/2, {s_c} strict / {x_c} significant violations "
        f"of {int(mask.sum())} times",
    )


def test_9_determinism(tmp_path):
    cfg = ExperimentConfig(model="one_detector", p0=2 / 3, t_max=40 * NS, n_paths=500, seed=99,
                           preset="gamma_2", a=0.1, gamma=0.5e11, T=5 * NS)
    outputs = []
    for threads in (1, 4):
        d = tmp_path / f"t{threads}"
        run_command(cfg, d, threads=threads)
        blobs = {name: (d / name).read_bytes() for name in ("paths.csv", "summary.json")}
        for kind in ("paths", "histogram", "persistence"):
            blobs[f"{kind}.svg"] = plot_command(d, kind).encode()
        outputs.append(blobs)
    same = [name for name in outputs[0] if outputs[0][name] == outputs[1][name]]
    report(9, "determinism", len(same) == len(outputs[0]), f"{len(same)}/{len(outputs[0])} outputs byte-identical for 1 vs 4 threads")
