"""Confining external potentials.

Every potential is nonnegative with finite value and gradient at every finite
point.  A potential may carry dissipativity constants (c1, c2, c3, M) and a
finite table of (eps, M_eps) pairs, against which :func:`verify_assumption`
checks the three growth inequalities

    V(q) >= c1 |q|^2 - M
    c2 V(q) - M <= grad V(q) . q <= c3 V(q) + M
    |grad V(q)| <= eps V(q) + M_eps      (per tabulated eps)

on a quasi-random sample of a ball.  A pass is sampling evidence, not a
proof.  The shipped double-well constants were found by offline brute-force
minimization of the slack functions and are frozen below.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .errors import MissingConstants


@dataclass(frozen=True)
class AssumptionConstants:
    """Growth/dissipativity constants of a confining potential."""

    c1: float
    c2: float
    c3: float
    M: float
    eps_table: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if min(self.c1, self.c2, self.c3) <= 0.0:
            raise ValueError("c1, c2, c3 must be strictly positive")
        if self.M < 0.0:
            raise ValueError("M must be nonnegative")
        for eps, m_eps in self.eps_table:
            if eps <= 0.0 or m_eps <= 0.0:
                raise ValueError("eps table entries must be strictly positive")

    def M_for(self, eps: float) -> float:
        """Tabulated M_eps for a given eps (exact match up to rounding)."""
        for tab_eps, m_eps in self.eps_table:
            if abs(tab_eps - eps) <= 1e-12 * max(1.0, abs(eps)):
                return m_eps
        raise MissingConstants(f"no tabulated gradient bound for eps={eps!r}")


class ConfiningPotential:
    """Base interface: vectorized value and gradient over (..., d) arrays."""

    constants: AssumptionConstants | None = None

    def value(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Quadratic(ConfiningPotential):
    """V(q) = omega |q|^2 with omega > 0.

    Satisfies the growth inequalities with c1 = omega, c2 = c3 = 2 (the
    identity grad V . q = 2 V holds exactly) and M_eps = omega / eps.
    """

    _EPS_GRID = (0.01, 0.02, 0.05, 0.1, 0.2, 0.25, 0.5, 1.0, 2.0)

    def __init__(self, omega: float, constants: AssumptionConstants | None = None):
        if omega <= 0.0:
            raise ValueError("omega must be strictly positive")
        self.omega = float(omega)
        if constants is None:
            constants = AssumptionConstants(
                c1=self.omega, c2=2.0, c3=2.0, M=1e-2,
                eps_table=tuple((e, self.omega / e) for e in self._EPS_GRID),
            )
        self.constants = constants

    def value(self, q):
        q = np.asarray(q, dtype=float)
        return self.omega * np.sum(q * q, axis=-1)

    def gradient(self, q):
        q = np.asarray(q, dtype=float)
        return 2.0 * self.omega * q


# Frozen by offline brute force (slack minimization over r in [0, 20/eps+20]),
# rounded up so each inequality keeps positive margin.
DOUBLE_WELL_CONSTANTS = AssumptionConstants(
    c1=0.125, c2=1.0, c3=5.0, M=1.25,
    eps_table=(
        (0.05, 54030.0),
        (0.1, 6765.0),
        (0.25, 438.0),
        (0.5, 57.0),
        (1.0, 8.23),
        (2.0, 1.56),
    ),
)


class DoubleWell(ConfiningPotential):
    """V(q) = (1 - |q|^2)^2 / 4, minimized on the unit sphere."""

    def __init__(self, constants: AssumptionConstants | None = None):
        self.constants = DOUBLE_WELL_CONSTANTS if constants is None else constants

    def value(self, q):
        q = np.asarray(q, dtype=float)
        r2 = np.sum(q * q, axis=-1)
        return 0.25 * (1.0 - r2) ** 2

    def gradient(self, q):
        q = np.asarray(q, dtype=float)
        r2 = np.sum(q * q, axis=-1)
        return -(1.0 - r2)[..., None] * q


class UserTable(ConfiningPotential):
    """Caller-supplied vectorized value and gradient callables."""

    def __init__(
        self,
        value_fn: Callable[[np.ndarray], np.ndarray],
        gradient_fn: Callable[[np.ndarray], np.ndarray],
        constants: AssumptionConstants | None = None,
    ):
        self._value_fn = value_fn
        self._gradient_fn = gradient_fn
        self.constants = constants

    def value(self, q):
        return np.asarray(self._value_fn(np.asarray(q, dtype=float)), dtype=float)

    def gradient(self, q):
        return np.asarray(self._gradient_fn(np.asarray(q, dtype=float)), dtype=float)


def zero_potential() -> UserTable:
    """A potential that is identically zero (disables confinement)."""
    return UserTable(
        lambda q: np.zeros(q.shape[:-1]),
        lambda q: np.zeros_like(q),
    )


def potential_value(pot: ConfiningPotential, q) -> float | np.ndarray:
    """V(q) for a single point (d,) or a batch (..., d)."""
    out = pot.value(np.asarray(q, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def potential_gradient(pot: ConfiningPotential, q) -> np.ndarray:
    """grad V(q), same shape as ``q``."""
    return pot.gradient(np.asarray(q, dtype=float))


@dataclass(frozen=True)
class InequalityCheck:
    name: str
    passed: bool
    min_slack: float
    witness: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "min_slack": self.min_slack,
            "witness": list(self.witness),
        }


@dataclass(frozen=True)
class AssumptionReport:
    checks: tuple[InequalityCheck, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def _ball_sample(dimension: int, radius: float, n_samples: int) -> np.ndarray:
    """Quasi-random points covering the ball of the given radius."""
    sampler = qmc.Halton(d=dimension, scramble=False)
    pts = []
    need = n_samples
    while need > 0:
        cand = radius * (2.0 * sampler.random(max(4 * need, 16)) - 1.0)
        cand = cand[np.sum(cand * cand, axis=-1) <= radius * radius]
        pts.append(cand[:need])
        need -= len(cand[:need])
    out = np.concatenate(pts, axis=0)
    out[0] = 0.0  # always include the origin
    return out


def verify_assumption(
    pot: ConfiningPotential,
    sample_radius: float,
    n_samples: int,
    dimension: int = 2,
) -> AssumptionReport:
    """Sample the growth inequalities on a ball and report worst-case slacks.

    Raises :class:`MissingConstants` when the potential carries no constants.
    """
    if pot.constants is None:
        raise MissingConstants("potential carries no dissipativity constants")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    c = pot.constants
    q = _ball_sample(dimension, sample_radius, n_samples)
    v = pot.value(q)
    g = pot.gradient(q)
    gq = np.sum(g * q, axis=-1)
    gnorm = np.sqrt(np.sum(g * g, axis=-1))
    r2 = np.sum(q * q, axis=-1)

    def check(name, slack):
        i = int(np.argmin(slack))
        return InequalityCheck(name, bool(slack[i] >= 0.0), float(slack[i]),
                               tuple(q[i]))

    checks = [
        check("quadratic_growth", v - (c.c1 * r2 - c.M)),
        check("radial_dissipativity_lower", gq - (c.c2 * v - c.M)),
        check("radial_dissipativity_upper", (c.c3 * v + c.M) - gq),
    ]
    for eps, m_eps in c.eps_table:
        checks.append(check(f"gradient_bound[eps={eps:g}]", eps * v + m_eps - gnorm))
    return AssumptionReport(tuple(checks))
