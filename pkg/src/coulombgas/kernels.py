"""Pairwise repulsive interaction kernels.

Supported families, all singular at zero separation:

    coulomb   K(x) = -log|x|     (d = 2)      K(x) = |x|^(2-d)   (d >= 3)
    riesz     K(x) = |x|^(-s)    (0 < s < d)
    log1d     K(x) = -log|x|     (d = 1)

Two gradient conventions exist.  ``exact`` is the true gradient of the
kernel value, so that -gradient is the physical force.  ``paper`` drops the
positive prefactor (d-2 for Coulomb in d >= 3, s for Riesz) and returns
-x/|x|^d resp. -x/|x|^(s+2); this is the convention under which the drift
identities in :mod:`coulombgas.lyapunov` hold term by term, and it is the
default everywhere.  The two conventions coincide for the d = 2 Coulomb and
the 1D log kernels and differ by a positive scalar otherwise, so the force
direction never changes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import gamma as _gamma_fn, pi

import numpy as np

from .errors import ZeroSeparation


class KernelFamily(str, Enum):
    COULOMB = "coulomb"
    RIESZ = "riesz"
    LOG1D = "log1d"


class Normalization(str, Enum):
    EXACT = "exact"
    PAPER = "paper"


def poisson_constant(dimension: int) -> float:
    """Constant c_d with -laplacian(K) = c_d * delta_0 for the Coulomb kernel.

    Metadata only: no simulation or verification formula consumes it.
    """
    if dimension == 2:
        return 2.0 * pi
    if dimension >= 3:
        d = dimension
        return d * (d - 2) * pi ** (d / 2.0) / _gamma_fn(1.0 + d / 2.0)
    raise ValueError("the Coulomb kernel requires dimension >= 2")


@dataclass(frozen=True)
class InteractionKernel:
    """A kernel family together with its dimension and gradient convention."""

    family: KernelFamily = KernelFamily.COULOMB
    dimension: int = 2
    s: float | None = None
    normalization: Normalization = Normalization.PAPER

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        object.__setattr__(self, "normalization", Normalization(self.normalization))
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.family is KernelFamily.COULOMB:
            if self.dimension < 2:
                raise ValueError("Coulomb kernel requires dimension >= 2")
            if self.s is not None:
                raise ValueError("Coulomb kernel takes no exponent s")
        elif self.family is KernelFamily.RIESZ:
            if self.s is None or not 0.0 < self.s < self.dimension:
                raise ValueError("Riesz kernel requires 0 < s < dimension")
        elif self.family is KernelFamily.LOG1D:
            if self.dimension != 1:
                raise ValueError("log1d kernel requires dimension = 1")
            if self.s is not None:
                raise ValueError("log1d kernel takes no exponent s")

    @property
    def pair_exponent(self) -> float:
        """Effective dimension exponent entering the separation inequality.

        Coulomb uses d, Riesz uses s + 2, and the 1D log kernel uses 2;
        the singular pair sums then carry exponent ``pair_exponent - 1``.
        """
        if self.family is KernelFamily.COULOMB:
            return float(self.dimension)
        if self.family is KernelFamily.RIESZ:
            return self.s + 2.0
        return 2.0

    def value_from_distance(self, r: np.ndarray) -> np.ndarray:
        """Kernel value as a function of separation distance (r > 0)."""
        if self.family is KernelFamily.RIESZ:
            return r ** (-self.s)
        if self.family is KernelFamily.COULOMB and self.dimension >= 3:
            return r ** (2.0 - self.dimension)
        return -np.log(r)

    def gradient_from_parts(self, x: np.ndarray, r: np.ndarray) -> np.ndarray:
        """Gradient given the separation vectors and precomputed distances.

        ``r`` may contain +inf entries (used by callers to mask diagonals);
        those rows come out as exact zero vectors.
        """
        e = self.pair_exponent
        scale = r ** (-e)
        if self.normalization is Normalization.EXACT:
            if self.family is KernelFamily.COULOMB and self.dimension >= 3:
                scale = scale * (self.dimension - 2.0)
            elif self.family is KernelFamily.RIESZ:
                scale = scale * self.s
        return -x * scale[..., None]


def kernel_value(kernel: InteractionKernel, x) -> float | np.ndarray:
    """Interaction energy of a pair at separation vector ``x`` (x != 0).

    Accepts a single vector of length ``kernel.dimension`` or any batch with
    that trailing axis.  Raises :class:`ZeroSeparation` on a zero vector.
    """
    x = np.asarray(x, dtype=float)
    r = np.sqrt(np.sum(x * x, axis=-1))
    if np.any(r == 0.0):
        raise ZeroSeparation("kernel evaluated at zero separation")
    out = kernel.value_from_distance(r)
    return float(out) if out.ndim == 0 else out


def kernel_gradient(kernel: InteractionKernel, x) -> np.ndarray:
    """Gradient of the kernel at ``x`` under the kernel's convention."""
    x = np.asarray(x, dtype=float)
    r = np.sqrt(np.sum(x * x, axis=-1))
    if np.any(r == 0.0):
        raise ZeroSeparation("kernel gradient at zero separation")
    return kernel.gradient_from_parts(x, r)


def singularity_exponent(kernel: InteractionKernel) -> float:
    """Exponent e such that the near-collision drift term scales like r^(-e)."""
    return kernel.pair_exponent - 1.0
