import numpy as np
import pytest

from coulombgas import (
    InteractionKernel,
    LyapunovParams,
    ParticleState,
    Quadratic,
    SystemParams,
)


@pytest.fixture
def coulomb2d():
    return InteractionKernel(family="coulomb", dimension=2)


@pytest.fixture
def quad_system(coulomb2d):
    """N=2 planar system with unit quadratic confinement."""
    return SystemParams(N=2, d=2, gamma=1.0, beta=1.0, kernel=coulomb2d,
                        potential=Quadratic(1.0))


@pytest.fixture
def pair_state():
    """The recurring two-particle fixture: unit separation, one moving."""
    return ParticleState([[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]])


@pytest.fixture
def certificate_params():
    return LyapunovParams(a=0.5, b=1.0, c=0.0, eps1=0.05, eps2=0.05)


def make_system(N, d, gamma=1.0, beta=1.0, omega=1.0, normalization="paper"):
    kernel = InteractionKernel(family="coulomb", dimension=d,
                               normalization=normalization)
    return SystemParams(N=N, d=d, gamma=gamma, beta=beta, kernel=kernel,
                        potential=Quadratic(omega))


def separated_state(rng, n, d, scale=1.0, min_dist=0.2):
    """Random state with all pair distances at least min_dist."""
    while True:
        q = scale * rng.uniform(-3.0, 3.0, (n, d))
        p = scale * rng.uniform(-3.0, 3.0, (n, d))
        diffs = q[:, None] - q[None, :]
        dist = np.sqrt((diffs**2).sum(-1))
        dist[np.arange(n), np.arange(n)] = np.inf
        if dist.min() >= min_dist:
            return ParticleState(q, p)
