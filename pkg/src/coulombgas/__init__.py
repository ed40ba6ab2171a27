"""Kinetic Langevin dynamics of Coulomb gases.

Simulation of the second-order interacting-particle SDE, numerical
verification of an exponential drift certificate W = exp(a H + Psi), and
equilibrium sampling of the Boltzmann-Gibbs measure with validated
statistics.
"""

__version__ = "0.1.0"

from .errors import (
    CapHit,
    CoulombGasError,
    DegenerateSeries,
    DimensionMismatch,
    EmptyEnsemble,
    FormatError,
    InfeasibleFit,
    InvalidConfig,
    MissingConstants,
    ParseError,
    StepFailure,
    TruncationError,
    ValidationError,
    ZeroSeparation,
)
from .kernels import (
    InteractionKernel,
    KernelFamily,
    Normalization,
    kernel_gradient,
    kernel_value,
    poisson_constant,
    singularity_exponent,
)
from .potentials import (
    AssumptionConstants,
    ConfiningPotential,
    DoubleWell,
    Quadratic,
    UserTable,
    potential_gradient,
    potential_value,
    verify_assumption,
    zero_potential,
)
from .system import (
    ParticleState,
    SystemParams,
    grad_U,
    min_pair_distance,
    potential_energy,
    total_energy,
)
from .lyapunov import (
    DriftBoundFit,
    LyapunovParams,
    check_drift_bound,
    coercivity_radii,
    default_lyapunov_params,
    drift_bound_rhs,
    fit_drift_constants,
    j_functional,
    lemma_check,
    log_lyapunov_W,
    lw_over_w_analytic,
    lyapunov_W,
    make_state_sampler,
    psi,
    validate_params,
)
from .integrators import (
    IntegratorConfig,
    TrajectoryRecord,
    simulate,
    step,
    supermartingale_check,
)
from .samplers import (
    HmcConfig,
    disk_initial_positions,
    ginibre_preset,
    hmc_chain,
    overdamped_chain,
)
from .diagnostics import (
    ObservableSeries,
    equipartition_stat,
    fit_exponential_rate,
    radial_law_distance,
    weighted_tv_proxy,
)
