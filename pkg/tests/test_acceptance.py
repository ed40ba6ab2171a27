"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to watch them stream)."""

import math
import time

import numpy as np
import numpy.linalg as la
import pytest

from coulombgas import (
    IntegratorConfig,
    LyapunovParams,
    ParticleState,
    check_drift_bound,
    default_lyapunov_params,
    equipartition_stat,
    fit_drift_constants,
    lw_over_w_analytic,
    make_state_sampler,
    radial_law_distance,
    simulate,
    validate_params,
)
from coulombgas.cli import main
from coulombgas.integrators import STATUS_COMPLETED, supermartingale_check
from coulombgas.lyapunov import j_functional_batch, lemma_rhs_batch
from coulombgas.rng import make_generator
from coulombgas.samplers import (
    HmcConfig,
    disk_initial_positions,
    ginibre_preset,
    hmc_chain,
)
from coulombgas.system import potential_energy_batch

from conftest import make_system
from oracles import fd_generator_ratio


def _report(name, passed, detail=""):
    print(f"ACCEPTANCE {name}: {'PASS' if passed else 'FAIL'}  {detail}")
    assert passed, f"{name}: {detail}"


def test_acceptance_lemma_sweep():
    """10^4 mixed configurations, N in 2..8, d in {2,3,4}: the separation
    inequality holds to 1e-9 relative; the N=2 equality case is exact to
    1e-12; runtime under 10 s."""
    t0 = time.time()
    rng = make_generator(1001, 0)
    sizes = list(range(2, 9))
    dims = (2, 3, 4)
    per = 10000 // (len(sizes) * len(dims)) + 1
    worst_rel = math.inf
    count = 0
    for n in sizes:
        for d in dims:
            q = rng.standard_normal((per, n, d))
            near = per // 3
            sep = 10.0 ** rng.uniform(-3, -1, near)
            direction = rng.standard_normal((near, d))
            direction /= la.norm(direction, axis=-1, keepdims=True)
            q[:near, 1] = q[:near, 0] + sep[:, None] * direction
            j = j_functional_batch(q, float(d))
            rhs = lemma_rhs_batch(q, float(d))
            worst_rel = min(worst_rel, float(np.min((j - rhs) / rhs)))
            count += per
    # equality case
    eq_err = 0.0
    for r in (1e-3, 0.5, 2.0, 50.0):
        for d in dims:
            q = np.zeros((1, 2, d))
            q[0, 1, 0] = r
            j = float(j_functional_batch(q, float(d))[0])
            rhs = float(lemma_rhs_batch(q, float(d))[0])
            eq_err = max(eq_err, abs(j - rhs) / rhs)
    elapsed = time.time() - t0
    _report(
        "lemma-sweep",
        worst_rel >= -1e-9 and eq_err <= 1e-12 and elapsed < 10.0 and count >= 10000,
        f"{count} configs, worst rel slack {worst_rel:.2e}, "
        f"equality err {eq_err:.2e}, {elapsed:.1f}s",
    )


def test_acceptance_generator_oracle():
    """Closed-form L W / W matches the finite-difference generator applied
    to W within 1e-5 relative on 100 random admissible states."""
    t0 = time.time()
    rng = np.random.default_rng(1002)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 7))
        d = int(rng.choice([2, 3]))
        params = make_system(n, d, gamma=float(rng.uniform(0.5, 2.0)),
                             beta=float(rng.uniform(0.5, 2.0)))
        lp = LyapunovParams(a=0.4 * params.beta, b=1.0,
                            c=0.05 * params.gamma * params.beta,
                            eps1=0.01, eps2=0.01)
        while True:
            q = rng.uniform(-3.0, 3.0, (n, d))
            p = rng.uniform(-3.0, 3.0, (n, d))
            st = ParticleState(q, p)
            diffs = q[:, None] - q[None, :]
            dist = np.sqrt((diffs**2).sum(-1))
            dist[np.arange(n), np.arange(n)] = np.inf
            if dist.min() >= 0.2:
                break
        analytic = lw_over_w_analytic(params, lp, st)
        oracle = fd_generator_ratio(params, lp, st, h=1e-5)
        worst = max(worst, abs(analytic - oracle) / max(abs(analytic), abs(oracle)))
    elapsed = time.time() - t0
    _report("generator-oracle", worst < 1e-5 and elapsed < 5.0,
            f"worst rel err {worst:.2e}, {elapsed:.1f}s")


def test_acceptance_drift_condition():
    """For N in {2,4,8} and d in {2,3}: admissible parameters validate, the
    fitted coercivity coefficient is positive, and the fitted bound holds
    with zero violations on a disjoint 10^4-state test sample."""
    t0 = time.time()
    ok = True
    details = []
    for n in (2, 4, 8):
        for d in (2, 3):
            params = make_system(n, d)
            lp = default_lyapunov_params(params)
            validation = validate_params(params, lp, params.potential.constants)
            fit = fit_drift_constants(params, lp,
                                      make_state_sampler(params, 11), 10000)
            chk = check_drift_bound(params, lp, fit,
                                    make_state_sampler(params, 12), 10000)
            ok &= validation.passed and fit.alpha > 0 and chk.n_violations == 0
            details.append(f"N={n},d={d}: alpha={fit.alpha:.3f} "
                           f"viol={chk.n_violations}")
    elapsed = time.time() - t0
    _report("drift-condition", ok and elapsed < 60.0,
            "; ".join(details) + f", {elapsed:.1f}s")


def test_acceptance_supermartingale():
    """N=4, d=2, 256 replicas to T=10 from a high-certificate start: the
    replica average of W stays below exp(-lam t) W0 + C_exp/lam at every
    checkpoint."""
    t0 = time.time()
    params = make_system(4, 2)
    lp = default_lyapunov_params(params, b=0.1)
    fit = fit_drift_constants(params, lp, make_state_sampler(params, 11), 10000)
    ws = fit.details["slow_drift_state"]
    x0 = ParticleState(np.array(ws["q"]), np.array(ws["p"]))
    cfg = IntegratorConfig(dt=0.01, seed=3)
    report = supermartingale_check(params, lp, cfg, fit, x0, T=10.0,
                                   n_replicas=256, n_checkpoints=10)
    elapsed = time.time() - t0
    _report("supermartingale", report.overall == "pass" and elapsed < 300.0,
            f"verdicts={report.verdicts}, lam={fit.lam:.4f}, {elapsed:.1f}s")


def test_acceptance_equipartition():
    """N=16, d=2 kinetic run of length T=1000 per step size: the dt^2
    extrapolation of mean |p|^2/(N d) lands within 3 standard errors of
    1/beta."""
    t0 = time.time()
    params = make_system(16, 2)
    lp = default_lyapunov_params(params, b=0.1)
    q0 = 2.0 * disk_initial_positions(16, seed=9, radius=1.5)
    x0 = ParticleState(q0, np.zeros_like(q0))
    dts = (0.02, 0.01, 0.005)
    means, ses = [], []
    for dt in dts:
        cfg = IntegratorConfig(dt=dt, seed=21, eta=0.8)
        burn = simulate(params, lp, cfg, x0, T=20.0, stride=10**9)
        rec = simulate(params, lp, cfg, burn.final_state, T=1000.0, stride=10**9)
        assert rec.status == STATUS_COMPLETED
        mean, se = equipartition_stat(rec)
        means.append(mean)
        ses.append(se)
    x = np.array(dts) ** 2
    w = 1.0 / np.array(ses) ** 2
    design = np.column_stack([np.ones_like(x), x])
    cov = la.inv(design.T @ (w[:, None] * design))
    coef = cov @ design.T @ (w * np.array(means))
    m0, se0 = float(coef[0]), math.sqrt(cov[0, 0])
    target = 1.0 / params.beta
    elapsed = time.time() - t0
    _report("equipartition", abs(m0 - target) <= 3 * se0 and elapsed < 300.0,
            f"extrapolated {m0:.4f} +- {se0:.4f} vs {target}, {elapsed:.0f}s")


@pytest.mark.parametrize("d", [2, 3])
def test_acceptance_non_collision(d):
    """N=8 runs to T=100 stay collision-free with finite diagnostics and
    logged halvings."""
    t0 = time.time()
    params = make_system(8, d)
    lp = default_lyapunov_params(params, b=0.1)
    rng = make_generator(13, 77)
    x0 = ParticleState(rng.standard_normal((8, d)) * 1.5, np.zeros((8, d)))
    cfg = IntegratorConfig(dt=0.01, seed=17, eta=0.5)
    rec = simulate(params, lp, cfg, x0, T=100.0, stride=100)
    finite = bool(np.all(np.isfinite(rec.energy)) and np.all(np.isfinite(rec.log_w))
                  and np.all(np.isfinite(rec.min_dist)) and np.all(np.isfinite(rec.kinetic)))
    min_dist = float(np.min(rec.min_dist))
    logged = rec.n_halvings_total == sum(
        e["count"] for e in rec.events if e["kind"] == "halving")
    elapsed = time.time() - t0
    _report(f"non-collision(d={d})",
            rec.status == STATUS_COMPLETED and finite and min_dist > 0.0 and logged,
            f"min distance {min_dist:.2e}, halvings {rec.n_halvings_total}, "
            f"{elapsed:.0f}s")


def test_acceptance_circular_law():
    """Planar log gas at matrix scaling (N=64, beta = 2N): pooled thinned
    chain positions follow the uniform-disk radial law to within 0.1."""
    t0 = time.time()
    params = ginibre_preset(64, beta_tilde=2.0)
    q0 = disk_initial_positions(64, seed=7)
    cfg = HmcConfig(leapfrog_steps=10, leapfrog_dt=0.05, seed=11,
                    n_samples=1500, burn_in=300)
    res = hmc_chain(params, cfg, q0)
    pooled = res.positions[::10].reshape(-1, 2)
    stat = radial_law_distance(pooled)
    elapsed = time.time() - t0
    _report("circular-law", stat < 0.1 and elapsed < 600.0,
            f"radial distance {stat:.4f} over {len(pooled)} points, "
            f"accept {res.acceptance_rate:.2f}, {elapsed:.0f}s")


def test_acceptance_sampler_consistency():
    """Long HMC chain and long kinetic trajectory agree on mean |q|^2 and
    mean potential energy within 5 percent (same Gibbs target)."""
    t0 = time.time()
    params = make_system(16, 2)
    lp = default_lyapunov_params(params, b=0.1)
    q0 = 2.0 * disk_initial_positions(16, seed=9, radius=1.5)
    cfg = HmcConfig(leapfrog_steps=10, leapfrog_dt=0.1, seed=4,
                    n_samples=6000, burn_in=500)
    res = hmc_chain(params, cfg, q0)
    hmc_q2 = float(np.mean(np.sum(res.positions**2, axis=(1, 2))))
    hmc_u = float(np.mean([potential_energy_batch(params, q)
                           for q in res.positions[::5]]))
    x0 = ParticleState(q0, np.zeros_like(q0))
    icfg = IntegratorConfig(dt=0.01, seed=31, eta=0.8)
    burn = simulate(params, lp, icfg, x0, T=20.0, stride=10**9)
    rec = simulate(params, lp, icfg, burn.final_state, T=600.0, stride=5)
    lan_q2 = float(np.mean([np.sum(s.q**2) for s in rec.snapshots]))
    lan_u = float(np.mean(rec.energy - rec.kinetic))
    rel_q2 = abs(hmc_q2 - lan_q2) / abs(hmc_q2)
    rel_u = abs(hmc_u - lan_u) / abs(hmc_u)
    elapsed = time.time() - t0
    _report("sampler-consistency", rel_q2 < 0.05 and rel_u < 0.05,
            f"|q|^2: {hmc_q2:.2f} vs {lan_q2:.2f} ({100*rel_q2:.1f}%), "
            f"U: {hmc_u:.2f} vs {lan_u:.2f} ({100*rel_u:.1f}%), {elapsed:.0f}s")


def test_acceptance_determinism(tmp_path):
    """Re-running any CLI command from its manifest reproduces the CSV
    byte for byte."""
    cfg_path = tmp_path / "run.toml"
    cfg_path.write_text("""
seed = 99
[system]
N = 4
d = 2
[integrator]
dt = 0.01
[run]
T = 1.0
stride = 10
""")
    out1, out2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    code1 = main(["simulate", "--config", str(cfg_path), "--out", out1])
    code2 = main(["simulate", "--from-manifest", out1 + ".manifest.json",
                  "--out", out2])
    identical = open(out1, "rb").read() == open(out2, "rb").read()
    chain1, chain2 = str(tmp_path / "c1.csv"), str(tmp_path / "c2.csv")
    code3 = main(["sample-hmc", "--config", str(cfg_path), "--n", "100",
                  "--burn", "10", "--out", chain1])
    code4 = main(["sample-hmc", "--from-manifest", chain1 + ".manifest.json",
                  "--out", chain2])
    identical &= open(chain1, "rb").read() == open(chain2, "rb").read()
    _report("determinism",
            code1 == code2 == code3 == code4 == 0 and identical,
            "simulate and sample-hmc reruns byte-identical")
