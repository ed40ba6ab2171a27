"""Particle states, energies, and O(N^2) interaction forces.

State arrays have shape (N, d).  All energy/force routines also accept
batched arrays of shape (..., N, d) and broadcast over the leading axes.
Pair sums run over ordered pairs (i, j) with i != j, so each unordered pair
is counted twice, matching the prefactors

    U(q)   = sum_i V(q_i) + (1/2N) sum_{i != j} K(q_i - q_j)
    H(q,p) = |p|^2 / 2 + U(q)
    dU/dq_i = grad V(q_i) + (1/N) sum_{j != i} grad K(q_i - q_j).

Summation order is fixed (lexicographic pairs), so results are bit-stable
across runs on the same platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroSeparation
from .kernels import InteractionKernel
from .potentials import ConfiningPotential


@dataclass(frozen=True)
class ParticleState:
    """Positions and momenta of N particles in R^d."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        p = np.array(self.p, dtype=float)
        if q.ndim != 2 or p.shape != q.shape:
            raise ValueError("q and p must be equal-shape (N, d) arrays")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValueError("state entries must be finite")
        q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n_particles(self) -> int:
        return self.q.shape[0]

    @property
    def dimension(self) -> int:
        return self.q.shape[1]


@dataclass(frozen=True)
class SystemParams:
    """Particle count, dimension, friction, temperature, kernel, potential."""

    N: int
    d: int
    gamma: float
    beta: float
    kernel: InteractionKernel
    potential: ConfiningPotential

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        # gamma = 0 is the noise-free Hamiltonian limit, useful for
        # integrator order checks; the drift certificate needs gamma > 0
        # and rejects it in validate_params
        if self.gamma < 0.0:
            raise ValueError("gamma must be nonnegative")
        if self.beta <= 0.0:
            raise ValueError("beta must be strictly positive")
        if self.kernel.dimension != self.d:
            raise ValueError("kernel dimension must equal system dimension")


def pair_separations(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Separation vectors (..., N, N, d) and distances (..., N, N).

    Diagonal distances are set to +inf so kernel terms vanish there without
    masking.  Raises :class:`ZeroSeparation` if any off-diagonal distance is
    exactly zero.
    """
    q = np.asarray(q, dtype=float)
    diff = q[..., :, None, :] - q[..., None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    n = q.shape[-2]
    idx = np.arange(n)
    dist[..., idx, idx] = np.inf
    if np.any(dist == 0.0):
        raise ZeroSeparation("two particles coincide")
    return diff, dist


def _pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=1)


def potential_energy_batch(params: SystemParams, q: np.ndarray) -> np.ndarray:
    """U(q) for batched positions (..., N, d)."""
    q = np.asarray(q, dtype=float)
    v_sum = np.sum(params.potential.value(q), axis=-1)
    if params.N < 2:
        return v_sum
    _, dist = pair_separations(q)
    iu, ju = _pair_indices(params.N)
    pair_vals = params.kernel.value_from_distance(dist[..., iu, ju])
    # factor 2 restores the ordered-pair sum from the upper triangle
    return v_sum + (2.0 / (2.0 * params.N)) * np.sum(pair_vals, axis=-1)


def potential_energy(params: SystemParams, state: ParticleState) -> float:
    """Total potential energy U = external + pairwise interaction."""
    return float(potential_energy_batch(params, state.q))


def kinetic_energy_batch(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return 0.5 * np.sum(p * p, axis=(-2, -1))


def total_energy_batch(params: SystemParams, q: np.ndarray, p: np.ndarray) -> np.ndarray:
    return kinetic_energy_batch(p) + potential_energy_batch(params, q)


def total_energy(params: SystemParams, state: ParticleState) -> float:
    """H = |p|^2/2 + U(q)."""
    return float(total_energy_batch(params, state.q, state.p))


def grad_U_batch(params: SystemParams, q: np.ndarray) -> np.ndarray:
    """Per-particle gradient of U, shape (..., N, d)."""
    q = np.asarray(q, dtype=float)
    grad = params.potential.gradient(q).astype(float, copy=True)
    if params.N < 2:
        return grad
    diff, dist = pair_separations(q)
    kgrad = params.kernel.gradient_from_parts(diff, dist)
    # dU/dq_i picks up +grad K(q_i - q_j) from each ordered pair at rate 1/N
    grad += np.sum(kgrad, axis=-2) / params.N
    return grad


def grad_U(params: SystemParams, state: ParticleState) -> np.ndarray:
    """Array of per-particle gradients dU/dq_i, shape (N, d)."""
    return grad_U_batch(params, state.q)


def min_pair_distance_batch(q: np.ndarray) -> np.ndarray:
    """Minimum pairwise distance; +inf for single-particle systems.

    Does not raise on coincident particles: callers use the returned zero to
    detect states outside the admissible domain.
    """
    q = np.asarray(q, dtype=float)
    n = q.shape[-2]
    if n < 2:
        return np.full(q.shape[:-2], np.inf)
    diff = q[..., :, None, :] - q[..., None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    idx = np.arange(n)
    dist[..., idx, idx] = np.inf
    return np.min(dist, axis=(-2, -1))


def min_pair_distance(state: ParticleState) -> float:
    out = min_pair_distance_batch(state.q)
    return float(out) if np.ndim(out) == 0 else math.inf
