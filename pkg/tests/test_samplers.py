import numpy as np
import pytest

from coulombgas import (
    InteractionKernel,
    InvalidConfig,
    SystemParams,
    zero_potential,
)
from coulombgas.diagnostics import equipartition_stat
from coulombgas.samplers import (
    HmcConfig,
    disk_initial_positions,
    ginibre_preset,
    hmc_chain,
    overdamped_chain,
)

from conftest import make_system


def test_free_particle_proposals_always_accepted():
    # H is exactly conserved by leapfrog when the force vanishes, so dH = 0
    params = SystemParams(N=1, d=2, gamma=1.0, beta=1.0,
                          kernel=InteractionKernel(dimension=2),
                          potential=zero_potential())
    cfg = HmcConfig(leapfrog_steps=5, leapfrog_dt=0.1, seed=1, n_samples=200)
    res = hmc_chain(params, cfg, np.zeros((1, 2)))
    assert res.acceptance_rate == 1.0
    np.testing.assert_allclose(res.delta_h, 0.0, atol=1e-12)


def test_violent_proposals_always_rejected():
    params = make_system(1, 2, beta=4.0, omega=50.0)
    cfg = HmcConfig(leapfrog_steps=8, leapfrog_dt=5.0, seed=2,
                    n_samples=200, burn_in=0)
    res = hmc_chain(params, cfg, np.array([[0.5, 0.0]]))
    assert res.acceptance_rate < 0.02


def test_gaussian_target_moments_exact():
    params = make_system(1, 2, beta=2.0, omega=0.7)
    cfg = HmcConfig(leapfrog_steps=7, leapfrog_dt=0.25, seed=42,
                    n_samples=40000, burn_in=500)
    res = hmc_chain(params, cfg, np.array([[0.3, -0.2]]))
    mean, se = equipartition_stat(res.momenta)
    assert abs(mean - 0.5) <= 3 * se
    eq2 = float(np.mean(np.sum(res.positions**2, axis=(1, 2))))
    se_q = float(np.std(np.sum(res.positions**2, axis=(1, 2)))) / np.sqrt(4000)
    assert abs(eq2 - 2 / (2 * 2.0 * 0.7)) <= 3 * se_q


def test_interacting_chain_momentum_marginal():
    params = make_system(16, 2)
    q0 = 2.0 * disk_initial_positions(16, seed=9, radius=1.5)
    cfg = HmcConfig(leapfrog_steps=10, leapfrog_dt=0.15, seed=8,
                    n_samples=4000, burn_in=400)
    res = hmc_chain(params, cfg, q0)
    assert 0.5 <= res.acceptance_rate <= 0.95
    mean, se = equipartition_stat(res.momenta)
    assert abs(mean - 1.0) <= 3 * se


def test_partial_momentum_refresh_still_exact():
    params = make_system(1, 2, beta=1.0, omega=1.0)
    cfg = HmcConfig(leapfrog_steps=5, leapfrog_dt=0.2, momentum_refresh=0.5,
                    seed=3, n_samples=40000, burn_in=500)
    res = hmc_chain(params, cfg, np.array([[1.0, 0.0]]))
    mean, se = equipartition_stat(res.momenta)
    assert abs(mean - 1.0) <= 3.5 * se


def test_acceptance_bookkeeping_consistent():
    params = make_system(8, 2)
    q0 = 2.0 * disk_initial_positions(8, seed=5)
    cfg = HmcConfig(leapfrog_steps=10, leapfrog_dt=0.2, seed=6,
                    n_samples=3000, burn_in=300)
    res = hmc_chain(params, cfg, q0)
    bound = np.minimum(1.0, np.exp(-params.beta * res.delta_h))
    se = float(np.std(bound)) / np.sqrt(len(bound))
    assert res.acceptance_rate >= float(np.mean(bound)) - 3 * se


def test_overdamped_free_diffusion_increments():
    params = SystemParams(N=1, d=2, gamma=1.0, beta=2.0,
                          kernel=InteractionKernel(dimension=2),
                          potential=zero_potential())
    chain = overdamped_chain(params, dt=0.02, n_steps=20000,
                             initial_q=np.zeros((1, 2)), seed=8)
    inc = np.diff(chain, axis=0).reshape(-1, 2)
    target = 2 * 0.02 / 2.0
    se = target * np.sqrt(2.0 / len(inc))
    np.testing.assert_allclose(inc.var(axis=0), target, atol=3 * se)
    np.testing.assert_allclose(inc.mean(axis=0), 0.0, atol=3 * np.sqrt(target / len(inc)))


def test_overdamped_log_gas_avoids_collision():
    params = make_system(2, 2)
    chain = overdamped_chain(params, dt=0.002, n_steps=100000,
                             initial_q=np.array([[0.0, 0.0], [1.0, 0.0]]),
                             seed=9)
    dists = np.sqrt(np.sum((chain[:, 0] - chain[:, 1]) ** 2, axis=-1))
    assert float(dists.min()) > 0.0


def test_overdamped_rejects_degenerate_step():
    params = make_system(2, 2)
    with pytest.raises(InvalidConfig):
        overdamped_chain(params, dt=0.0, n_steps=10,
                         initial_q=np.array([[0.0, 0.0], [1.0, 0.0]]))


def test_ginibre_preset_scaling():
    params = ginibre_preset(64, beta_tilde=2.0)
    assert params.d == 2
    assert params.beta == 128.0
    assert params.potential.omega == 0.5
    assert params.kernel.family.value == "coulomb"
    with pytest.raises(InvalidConfig):
        ginibre_preset(0)


def test_collision_start_rejected(quad_system):
    cfg = HmcConfig(leapfrog_steps=2, leapfrog_dt=0.1, seed=1, n_samples=10)
    with pytest.raises(Exception):
        hmc_chain(quad_system, cfg, np.zeros((2, 2)))
