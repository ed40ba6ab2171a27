"""Equilibrium samplers for the Gibbs measure pi ~ exp(-beta H).

The Hamiltonian Monte Carlo chain proposes with a leapfrog integration of
the second-order dynamics and accepts with probability min(1, exp(-beta dH)),
so the position marginal targets the steady interacting-gas measure

    Q(dq) ~ exp(-beta (sum_i V(q_i) + (1/2N) sum_{i != j} K(q_i - q_j))).

Momenta are (partially) refreshed from the Gaussian marginal N(0, 1/beta)
each iteration and negated on rejection, which keeps partial refresh exact.
The leapfrog is reversible and volume-preserving for any position-dependent
force, so the chain targets pi exactly under either kernel-gradient
convention; a non-exact convention only lowers the acceptance rate.

The overdamped chain is the Euler-Maruyama discretization of
dq = -grad U dt + sqrt(2/beta) dB with the same proximity-halving guard as
the kinetic integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig, StepFailure, ZeroSeparation
from .kernels import InteractionKernel, KernelFamily, Normalization
from .potentials import Quadratic
from .rng import STREAM_HMC, STREAM_OVERDAMPED, make_generator
from .system import (
    SystemParams,
    grad_U_batch,
    min_pair_distance_batch,
    potential_energy_batch,
)


@dataclass(frozen=True)
class HmcConfig:
    leapfrog_steps: int = 10
    leapfrog_dt: float = 0.05
    momentum_refresh: float = 1.0
    seed: int = 0
    n_samples: int = 1000
    burn_in: int = 100

    def __post_init__(self):
        if self.leapfrog_steps < 1:
            raise InvalidConfig("leapfrog_steps must be >= 1")
        if self.leapfrog_dt <= 0.0:
            raise InvalidConfig("leapfrog_dt must be strictly positive")
        if not 0.0 < self.momentum_refresh <= 1.0:
            raise InvalidConfig("momentum_refresh must lie in (0, 1]")
        if self.n_samples < 1:
            raise InvalidConfig("n_samples must be >= 1")
        if self.burn_in < 0:
            raise InvalidConfig("burn_in must be >= 0")


@dataclass
class HmcResult:
    positions: np.ndarray        # (n_samples, N, d), post-iteration states
    momenta: np.ndarray          # (n_samples, N, d)
    energies: np.ndarray         # H at the recorded states
    accepts: np.ndarray          # bool per recorded iteration
    delta_h: np.ndarray          # proposal energy change per iteration
    acceptance_rate: float
    n_collision_rejects: int
    events: list[dict] = field(default_factory=list)


def _hamiltonian(params, q, p):
    return float(potential_energy_batch(params, q) + 0.5 * np.sum(p * p))


def _leapfrog(params, q, p, n_steps, dt):
    f = -grad_U_batch(params, q)
    p = p + 0.5 * dt * f
    for k in range(n_steps):
        q = q + dt * p
        f = -grad_U_batch(params, q)
        if k < n_steps - 1:
            p = p + dt * f
    p = p + 0.5 * dt * f
    return q, p


def hmc_chain(params: SystemParams, cfg: HmcConfig,
              initial_q: np.ndarray) -> HmcResult:
    """Run HMC targeting exp(-beta H); returns the post-burn-in chain.

    A leapfrog trajectory that lands exactly on a collision rejects the
    proposal and logs the event rather than aborting the chain.
    """
    rng = make_generator(cfg.seed, STREAM_HMC)
    q = np.array(initial_q, dtype=float)
    if q.shape != (params.N, params.d):
        raise InvalidConfig("initial positions must have shape (N, d)")
    if float(min_pair_distance_batch(q)) <= 0.0:
        raise ZeroSeparation("initial positions contain a collision")
    beta = params.beta
    sigma = 1.0 / math.sqrt(beta)
    r = cfg.momentum_refresh
    keep = math.sqrt(max(0.0, 1.0 - r * r))

    p = sigma * rng.standard_normal(q.shape)
    total = cfg.burn_in + cfg.n_samples
    positions = np.empty((cfg.n_samples, params.N, params.d))
    momenta = np.empty_like(positions)
    energies = np.empty(cfg.n_samples)
    accepts = np.zeros(cfg.n_samples, dtype=bool)
    delta_h = np.empty(cfg.n_samples)
    events: list[dict] = []
    n_collision = 0

    for it in range(total):
        p = keep * p + r * sigma * rng.standard_normal(q.shape)
        h0 = _hamiltonian(params, q, p)
        try:
            q_prop, p_prop = _leapfrog(params, q, p, cfg.leapfrog_steps,
                                       cfg.leapfrog_dt)
            dh = _hamiltonian(params, q_prop, p_prop) - h0
        except ZeroSeparation:
            n_collision += 1
            events.append({"iteration": it, "kind": "collision_reject"})
            dh = math.inf
            q_prop = None
        accepted = math.isfinite(dh) and \
            rng.uniform() < math.exp(min(0.0, -beta * dh))
        if accepted:
            q, p = q_prop, p_prop
        else:
            p = -p
        if it >= cfg.burn_in:
            k = it - cfg.burn_in
            positions[k] = q
            momenta[k] = p
            energies[k] = _hamiltonian(params, q, p)
            accepts[k] = accepted
            delta_h[k] = dh
    return HmcResult(
        positions=positions,
        momenta=momenta,
        energies=energies,
        accepts=accepts,
        delta_h=delta_h,
        acceptance_rate=float(np.mean(accepts)),
        n_collision_rejects=n_collision,
        events=events,
    )


def overdamped_chain(params: SystemParams, dt: float, n_steps: int,
                     initial_q: np.ndarray, seed: int = 0,
                     eta: float = 0.25, max_halvings: int = 40) -> np.ndarray:
    """Euler-Maruyama positions chain for dq = -grad U dt + sqrt(2/beta) dB.

    Returns (n_steps + 1, N, d) positions.  Sub-steps shrinking the minimum
    pair distance too fast are halved as in the kinetic integrator; raises
    :class:`StepFailure` (carrying the partial chain) when the budget runs
    out.
    """
    if dt <= 0.0:
        raise InvalidConfig("dt must be strictly positive")
    if n_steps < 0:
        raise InvalidConfig("n_steps must be >= 0")
    rng = make_generator(seed, STREAM_OVERDAMPED)
    q = np.array(initial_q, dtype=float)
    noise_scale = math.sqrt(2.0 / params.beta)
    out = np.empty((n_steps + 1,) + q.shape)
    out[0] = q
    for k in range(1, n_steps + 1):
        done = 0.0
        h = dt
        halvings = 0  # consecutive halvings without an accepted sub-step
        while done < dt * (1.0 - 1e-12):
            h = min(h, dt - done)
            pre_min = float(min_pair_distance_batch(q))
            try:
                drift = -grad_U_batch(params, q)
            except ZeroSeparation:
                raise StepFailure("chain reached a collision",
                                  partial=out[:k]) from None
            q_new = q + h * drift + noise_scale * math.sqrt(h) * \
                rng.standard_normal(q.shape)
            ok = bool(np.all(np.isfinite(q_new)))
            if ok and math.isfinite(pre_min):
                disp = float(np.max(np.sqrt(np.sum((q_new - q) ** 2, axis=-1))))
                post_min = float(min_pair_distance_batch(q_new))
                ok = disp <= eta * pre_min and post_min >= (1.0 - eta) * pre_min
            if not ok:
                halvings += 1
                if halvings > max_halvings:
                    raise StepFailure(
                        f"no admissible sub-step after {max_halvings} halvings",
                        partial=out[:k])
                h *= 0.5
                continue
            q = q_new
            done += h
            halvings = 0
            h = min(2.0 * h, dt)
        out[k] = q
    return out


def ginibre_preset(n_particles: int, beta_tilde: float = 2.0) -> SystemParams:
    """Planar log gas in the random-matrix scaling window.

    d = 2, log kernel, V(q) = |q|^2 / 2 and beta = N * beta_tilde, so the
    position marginal has density proportional to

        prod_{i<j} |q_i - q_j|^beta_tilde * exp(-(N beta_tilde / 2) sum_i |q_i|^2).

    At beta_tilde = 2 this is the eigenvalue density of an N x N matrix of
    i.i.d. complex Gaussian entries with variance 1/N, whose empirical law
    approaches the uniform disk of radius 1 as N grows.  Only the shape is
    pinned down here; radial statistics rescale by an empirical quantile
    downstream, so the disk radius convention never enters.
    """
    if n_particles < 1:
        raise InvalidConfig("n_particles must be >= 1")
    if beta_tilde <= 0.0:
        raise InvalidConfig("beta_tilde must be strictly positive")
    kernel = InteractionKernel(family=KernelFamily.COULOMB, dimension=2,
                               normalization=Normalization.PAPER)
    return SystemParams(
        N=n_particles, d=2, gamma=1.0, beta=n_particles * beta_tilde,
        kernel=kernel, potential=Quadratic(0.5),
    )


def disk_initial_positions(n_particles: int, seed: int = 0,
                           radius: float = 1.0) -> np.ndarray:
    """Well-separated start for planar runs: uniform disk with a spacing floor."""
    rng = make_generator(seed, STREAM_HMC + 100)
    pts = np.empty((n_particles, 2))
    placed = 0
    floor = 0.2 * radius / math.sqrt(n_particles)
    while placed < n_particles:
        cand = radius * (2.0 * rng.uniform(size=2) - 1.0)
        if np.sum(cand * cand) > radius * radius:
            continue
        if placed and np.min(np.sqrt(np.sum((pts[:placed] - cand) ** 2,
                                            axis=-1))) < floor:
            continue
        pts[placed] = cand
        placed += 1
    return pts
