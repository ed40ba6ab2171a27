"""Time integration of the kinetic Langevin system

    dq = p dt
    dp = -gamma p dt - grad U(q) dt + sqrt(2 gamma / beta) dB

with singularity-aware adaptive stepping.  The default scheme is BAOAB
(half kick, half drift, exact Ornstein-Uhlenbeck momentum update, half
drift, half kick); Euler-Maruyama is available for comparison.

A sub-step is admissible only if no particle moves farther than
eta * (pre-step minimum pair distance) and the minimum pair distance does
not drop below (1 - eta) times its pre-step value.  Inadmissible sub-steps
are halved and retried (refinement, not rejection) up to a budget; the
composition always covers the nominal dt.  An optional log-domain cap on
the certificate W truncates the trajectory when crossed, the discrete
counterpart of stopping at the first exit from {W <= R}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ZeroSeparation
from .lyapunov import DriftBoundFit, LyapunovParams, log_lyapunov_W_batch
from .rng import (
    REPLICA_BASE,
    STREAM_BOOTSTRAP,
    STREAM_SIMULATE,
    generator_state_bytes,
    make_generator,
)
from .system import (
    ParticleState,
    SystemParams,
    grad_U_batch,
    kinetic_energy_batch,
    min_pair_distance_batch,
    potential_energy_batch,
)

SCHEMES = ("baoab", "euler_maruyama")

STATUS_COMPLETED = "completed"
STATUS_STEP_FAILURE = "step_failure"
STATUS_CAP_HIT = "cap_hit"


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    scheme: str = "baoab"
    eta: float = 0.25
    w_cap_log: float = math.inf
    seed: int = 0
    max_halvings: int = 40

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.dt <= 0.0:
            raise ValueError("dt must be strictly positive")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")
        if self.max_halvings < 0:
            raise ValueError("max_halvings must be >= 0")


@dataclass
class StepReport:
    advanced: float = 0.0
    n_substeps: int = 0
    n_halvings: int = 0
    smallest_h: float = math.inf
    cap_hit: bool = False
    failed: bool = False
    message: str = ""


@dataclass
class TrajectoryRecord:
    """Per-step diagnostic series plus strided state snapshots."""

    times: np.ndarray
    energy: np.ndarray
    log_w: np.ndarray
    min_dist: np.ndarray
    kinetic: np.ndarray
    snapshot_times: list[float]
    snapshot_indices: list[int]
    snapshots: list[ParticleState]
    rng_checkpoints: list[bytes]
    events: list[dict] = field(default_factory=list)
    status: str = STATUS_COMPLETED
    n_halvings_total: int = 0

    @property
    def final_state(self) -> ParticleState:
        return self.snapshots[-1]


def _force(params, q):
    return -grad_U_batch(params, q)


def _substep_baoab(params, q, p, f0, h, rng):
    gamma, beta = params.gamma, params.beta
    p1 = p + 0.5 * h * f0
    q1 = q + 0.5 * h * p1
    decay = math.exp(-gamma * h)
    sigma = math.sqrt((1.0 - decay * decay) / beta)
    p2 = decay * p1 + sigma * rng.standard_normal(p.shape)
    q2 = q1 + 0.5 * h * p2
    f1 = _force(params, q2)
    p3 = p2 + 0.5 * h * f1
    return q2, p3, f1


def _substep_euler(params, q, p, f0, h, rng):
    gamma, beta = params.gamma, params.beta
    q1 = q + h * p
    noise = math.sqrt(2.0 * gamma * h / beta) * rng.standard_normal(p.shape)
    p1 = p + h * (-gamma * p + f0) + noise
    f1 = _force(params, q1)
    return q1, p1, f1


_SUBSTEPS = {"baoab": _substep_baoab, "euler_maruyama": _substep_euler}


def step(params: SystemParams, lp: LyapunovParams, cfg: IntegratorConfig,
         state: ParticleState, rng: np.random.Generator
         ) -> tuple[ParticleState, StepReport]:
    """Advance one nominal dt, refining sub-steps near close encounters.

    On guard-budget exhaustion the original state is returned with
    ``report.failed`` set.  When ``cfg.w_cap_log`` is finite and log W
    crosses it, integration stops at the crossing sub-step with
    ``report.cap_hit`` set; ``report.advanced`` then covers only the time
    actually integrated.
    """
    substep = _SUBSTEPS[cfg.scheme]
    report = StepReport()
    q, p = state.q, state.p
    f = _force(params, q)
    h = cfg.dt
    done = 0.0
    consecutive = 0  # the budget bounds halvings without progress
    while done < cfg.dt * (1.0 - 1e-12):
        h = min(h, cfg.dt - done)
        pre_min = float(min_pair_distance_batch(q))
        try:
            q_new, p_new, f_new = substep(params, q, p, f, h, rng)
        except ZeroSeparation:
            q_new = None
        admissible = q_new is not None and np.all(np.isfinite(q_new)) \
            and np.all(np.isfinite(p_new))
        if admissible and math.isfinite(pre_min):
            disp = float(np.max(np.sqrt(np.sum((q_new - q) ** 2, axis=-1))))
            post_min = float(min_pair_distance_batch(q_new))
            admissible = (disp <= cfg.eta * pre_min
                          and post_min >= (1.0 - cfg.eta) * pre_min)
        if not admissible:
            report.n_halvings += 1
            consecutive += 1
            if consecutive > cfg.max_halvings:
                report.failed = True
                report.advanced = done
                report.message = (
                    f"no admissible sub-step after {cfg.max_halvings} halvings "
                    f"(min pair distance {pre_min:.3e})"
                )
                return state, report
            h *= 0.5
            continue
        q, p, f = q_new, p_new, f_new
        done += h
        consecutive = 0
        report.n_substeps += 1
        report.smallest_h = min(report.smallest_h, h)
        if math.isfinite(cfg.w_cap_log):
            log_w = float(log_lyapunov_W_batch(params, lp, q, p))
            if log_w > cfg.w_cap_log:
                report.cap_hit = True
                report.advanced = done
                report.message = f"log W = {log_w:.3e} crossed the cap"
                return ParticleState(q, p), report
        h = min(2.0 * h, cfg.dt)  # regrow once the encounter is resolved
    report.advanced = done
    return ParticleState(q, p), report


def simulate(params: SystemParams, lp: LyapunovParams, cfg: IntegratorConfig,
             initial_state: ParticleState, T: float, stride: int = 1,
             rng: np.random.Generator | None = None) -> TrajectoryRecord:
    """Integrate to time T (rounded to a whole number of steps).

    Diagnostics (H, log W, min pair distance, kinetic energy) are recorded
    every step; full state snapshots every ``stride`` steps plus the first
    and last.  Fixed seed gives bit-identical records.
    """
    if T < 0.0:
        raise ValueError("T must be nonnegative")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if rng is None:
        rng = make_generator(cfg.seed, STREAM_SIMULATE)
    n_steps = int(round(T / cfg.dt))

    times = [0.0]
    state = initial_state

    def diagnostics(s):
        return (
            float(potential_energy_batch(params, s.q) + kinetic_energy_batch(s.p)),
            float(log_lyapunov_W_batch(params, lp, s.q, s.p)),
            float(min_pair_distance_batch(s.q)),
            float(kinetic_energy_batch(s.p)),
        )

    h0, w0, m0, k0 = diagnostics(state)
    energy, log_w, min_dist, kinetic = [h0], [w0], [m0], [k0]
    snapshot_times = [0.0]
    snapshot_indices = [0]
    snapshots = [state]
    rng_checkpoints = [generator_state_bytes(rng)]
    events: list[dict] = []
    status = STATUS_COMPLETED
    halvings_total = 0
    t = 0.0

    for k in range(1, n_steps + 1):
        state, rep = step(params, lp, cfg, state, rng)
        halvings_total += rep.n_halvings
        t = t + rep.advanced if (rep.failed or rep.cap_hit) else k * cfg.dt
        if rep.n_halvings:
            events.append({"t": t, "kind": "halving",
                           "count": rep.n_halvings,
                           "smallest_h": rep.smallest_h})
        # a failed step may not have advanced at all; keep times strictly
        # increasing by not duplicating the previous diagnostics row
        record_row = t > times[-1]
        if record_row:
            hh, ww, mm, kk = diagnostics(state)
            times.append(t)
            energy.append(hh)
            log_w.append(ww)
            min_dist.append(mm)
            kinetic.append(kk)
        take_snapshot = record_row and ((k % stride == 0) or (k == n_steps))
        if rep.failed:
            status = STATUS_STEP_FAILURE
            events.append({"t": t, "kind": "step_failure", "message": rep.message})
            take_snapshot = True
        elif rep.cap_hit:
            status = STATUS_CAP_HIT
            events.append({"t": t, "kind": "cap_hit", "message": rep.message})
            take_snapshot = True
        if take_snapshot and snapshot_times[-1] < t:
            snapshot_times.append(t)
            snapshot_indices.append(len(times) - 1)
            snapshots.append(state)
            rng_checkpoints.append(generator_state_bytes(rng))
        if status != STATUS_COMPLETED:
            break

    return TrajectoryRecord(
        times=np.asarray(times),
        energy=np.asarray(energy),
        log_w=np.asarray(log_w),
        min_dist=np.asarray(min_dist),
        kinetic=np.asarray(kinetic),
        snapshot_times=snapshot_times,
        snapshot_indices=snapshot_indices,
        snapshots=snapshots,
        rng_checkpoints=rng_checkpoints,
        events=events,
        status=status,
        n_halvings_total=halvings_total,
    )


@dataclass(frozen=True)
class SupermartingaleReport:
    times: np.ndarray
    log_mean_w: np.ndarray      # log of the replica average of W
    log_mean_w_lo: np.ndarray   # bootstrap 5th percentile
    log_mean_w_hi: np.ndarray   # bootstrap 95th percentile
    log_bound: np.ndarray       # log( exp(-lam t) W(x0) + C_exp / lam )
    verdicts: tuple[str, ...]   # per checkpoint: pass / inconclusive / fail
    overall: str

    def to_dict(self) -> dict:
        return {
            "times": self.times.tolist(),
            "log_mean_w": self.log_mean_w.tolist(),
            "log_mean_w_lo": self.log_mean_w_lo.tolist(),
            "log_mean_w_hi": self.log_mean_w_hi.tolist(),
            "log_bound": self.log_bound.tolist(),
            "verdicts": list(self.verdicts),
            "overall": self.overall,
        }


def _logmeanexp(values: np.ndarray, axis=None) -> np.ndarray:
    m = np.max(values, axis=axis, keepdims=True)
    out = m.squeeze(axis) + np.log(
        np.mean(np.exp(values - m), axis=axis))
    return out


def supermartingale_check(params: SystemParams, lp: LyapunovParams,
                          cfg: IntegratorConfig, fit: DriftBoundFit,
                          initial_state: ParticleState, T: float,
                          n_replicas: int, n_checkpoints: int = 20,
                          n_bootstrap: int = 1000) -> SupermartingaleReport:
    """Monte Carlo check of E[W(x_t)] <= exp(-lam t) W(x0) + C_exp/lam.

    Replica r uses the deterministic stream (cfg.seed, REPLICA_BASE + r).
    Averaging is done in the log domain.  A finite ``cfg.w_cap_log``
    localizes the check: a capped replica is frozen at its exit state and
    its later contributions carry the exp(lam (tau - t)) weight under which
    the stopped inequality is provable.  Verdicts compare the bound against
    the bootstrap band of the estimated mean; "fail" means even the 5th
    percentile exceeds the bound.
    """
    steps_per_leg = max(1, int(round(T / n_checkpoints / cfg.dt)))
    n_legs = n_checkpoints
    times = np.array([0.0] + [steps_per_leg * cfg.dt * (k + 1)
                              for k in range(n_legs)])

    log_w0 = float(log_lyapunov_W_batch(params, lp, initial_state.q,
                                        initial_state.p))
    samples = np.empty((n_replicas, n_legs + 1))
    samples[:, 0] = log_w0
    leg_T = steps_per_leg * cfg.dt
    for r in range(n_replicas):
        rng = make_generator(cfg.seed, REPLICA_BASE + r)
        state = initial_state
        stopped_at = None
        for leg in range(n_legs):
            if stopped_at is None:
                rec = simulate(params, lp, cfg, state, leg_T,
                               stride=max(1, steps_per_leg), rng=rng)
                state = rec.final_state
                value = float(rec.log_w[-1])
                if rec.status == STATUS_CAP_HIT:
                    stopped_at = float(times[leg] + rec.times[-1])
                    value -= fit.lam * (times[leg + 1] - stopped_at)
                elif rec.status == STATUS_STEP_FAILURE:
                    # freeze without discount: conservative for the check
                    stopped_at = math.inf
                samples[r, leg + 1] = value
            elif math.isfinite(stopped_at):
                # capped replica: exp(lam (tau - t)) discounting
                samples[r, leg + 1] = samples[r, leg] - fit.lam * leg_T
            else:
                samples[r, leg + 1] = samples[r, leg]

    log_mean = _logmeanexp(samples, axis=0)
    boot_rng = make_generator(cfg.seed, STREAM_BOOTSTRAP)
    idx = boot_rng.integers(0, n_replicas, size=(n_bootstrap, n_replicas))
    boot = _logmeanexp(samples[idx], axis=1)
    lo = np.quantile(boot, 0.05, axis=0)
    hi = np.quantile(boot, 0.95, axis=0)

    log_floor = fit.log_exponential_constant() - math.log(fit.lam)
    log_bound = np.logaddexp(log_w0 - fit.lam * times, log_floor)

    verdicts = []
    for k in range(len(times)):
        if log_mean[k] <= log_bound[k]:
            verdicts.append("pass")
        elif lo[k] <= log_bound[k]:
            verdicts.append("inconclusive")
        else:
            verdicts.append("fail")
    overall = ("fail" if "fail" in verdicts
               else "inconclusive" if "inconclusive" in verdicts else "pass")
    return SupermartingaleReport(
        times=times, log_mean_w=log_mean, log_mean_w_lo=lo, log_mean_w_hi=hi,
        log_bound=log_bound, verdicts=tuple(verdicts), overall=overall,
    )
