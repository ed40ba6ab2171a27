"""Observables and convergence diagnostics for trajectories and chains."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSeries,
    DimensionMismatch,
    EmptyEnsemble,
    InvalidConfig,
)
from .lyapunov import LyapunovParams, log_lyapunov_W_batch
from .system import (
    SystemParams,
    min_pair_distance_batch,
    total_energy_batch,
)

# weights above exp(700) saturate there: the proxy stays finite and monotone
_LOG_WEIGHT_CAP = 700.0


@dataclass(frozen=True)
class ObservableSeries:
    times: np.ndarray
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.shape != values.shape or times.ndim != 1:
            raise ValueError("times and values must be equal-length 1-D arrays")
        if len(times) > 1 and not np.all(np.diff(times) > 0.0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)


def _batch_means_se(values: np.ndarray) -> float:
    n = len(values)
    n_batches = max(2, int(math.sqrt(n)))
    m = n // n_batches
    if m == 0:
        return float(np.std(values, ddof=0) / math.sqrt(n))
    trimmed = values[: n_batches * m].reshape(n_batches, m)
    means = trimmed.mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(n_batches))


def equipartition_stat(source, n_particles: int | None = None,
                       dimension: int | None = None) -> tuple[float, float]:
    """Mean of |p|^2 / (N d) with a batch-means standard error.

    At equilibrium the target value is 1/beta.  ``source`` may be a
    trajectory record (its per-step kinetic series is used), an array of
    momenta with shape (n, N, d), or a precomputed 1-D series of
    |p|^2/(N d) values.
    """
    if hasattr(source, "kinetic") and hasattr(source, "snapshots"):
        state = source.snapshots[0]
        series = 2.0 * np.asarray(source.kinetic) / (
            state.n_particles * state.dimension)
    else:
        arr = np.asarray(source, dtype=float)
        if arr.ndim == 3:
            series = np.sum(arr * arr, axis=(-2, -1)) / (
                arr.shape[-2] * arr.shape[-1])
        elif arr.ndim == 1:
            series = arr
        else:
            raise ValueError("expected a record, (n, N, d) momenta, or a 1-D series")
    if len(series) < 2:
        raise InvalidConfig("need at least 2 samples")
    return float(np.mean(series)), _batch_means_se(series)


def radial_law_distance(positions: np.ndarray,
                        reference: str = "uniform_disk") -> float:
    """Sup distance between the rescaled radial CDF and the disk law r^2.

    Positions are rescaled by the empirical 95th-percentile radius divided
    by sqrt(0.95), the radius estimate under which a uniform disk maps to
    the unit disk; the statistic therefore tends to 0 (at KS rate) for disk
    samples instead of carrying a 5% rescaling floor.
    """
    if reference != "uniform_disk":
        raise InvalidConfig(f"unknown reference {reference!r}")
    pts = np.asarray(positions, dtype=float)
    if pts.shape[-1] != 2:
        raise DimensionMismatch("the disk law is two-dimensional")
    pts = pts.reshape(-1, 2)
    if len(pts) < 100:
        raise InvalidConfig("need at least 100 points")
    radii = np.sqrt(np.sum(pts * pts, axis=-1))
    scale = float(np.quantile(radii, 0.95)) / math.sqrt(0.95)
    if scale <= 0.0:
        return 1.0
    r = np.sort(radii / scale)
    n = len(r)
    ref = np.clip(r, 0.0, 1.0) ** 2
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    return float(np.max(np.maximum(np.abs(upper - ref), np.abs(lower - ref))))


@dataclass(frozen=True)
class RateFit:
    rate: float
    r_squared: float
    n_points: int


def fit_exponential_rate(series: ObservableSeries, floor: float,
                         min_r_squared: float = 0.2) -> RateFit:
    """Least-squares decay rate of log(values - floor) on the largest
    strictly-positive suffix.

    Raises :class:`DegenerateSeries` when fewer than three points remain,
    the fitted rate is nonpositive, or the fit explains almost nothing
    (noisy flat series).
    """
    excess = series.values - floor
    bad = np.nonzero(excess <= 0.0)[0]
    start = int(bad[-1]) + 1 if len(bad) else 0
    t = series.times[start:]
    y = excess[start:]
    if len(y) < 3:
        raise DegenerateSeries("no usable positive suffix")
    logy = np.log(y)
    design = np.column_stack([np.ones_like(t), t])
    coef, *_ = np.linalg.lstsq(design, logy, rcond=None)
    fitted = design @ coef
    ss_res = float(np.sum((logy - fitted) ** 2))
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 and ss_res == 0.0 else \
        (1.0 - ss_res / ss_tot if ss_tot > 0.0 else 0.0)
    rate = -float(coef[1])
    if rate <= 0.0 or r2 < min_r_squared:
        raise DegenerateSeries(
            f"no exponential decay: rate={rate:.3e}, r_squared={r2:.3f}")
    return RateFit(rate=rate, r_squared=r2, n_points=len(y))


def _ensemble_arrays(ensemble) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(ensemble, tuple) and len(ensemble) == 2:
        q, p = (np.asarray(a, dtype=float) for a in ensemble)
    else:
        states = list(ensemble)
        if not states:
            raise EmptyEnsemble("ensemble contains no states")
        q = np.stack([s.q for s in states])
        p = np.stack([s.p for s in states])
    if q.ndim != 3 or q.shape != p.shape or len(q) == 0:
        raise EmptyEnsemble("ensemble must be a nonempty batch of states")
    return q, p


def weighted_tv_proxy(ensemble_a, ensemble_b, lp: LyapunovParams,
                      params: SystemParams, bins: int = 6) -> float:
    """Histogram proxy for the certificate-weighted total variation metric.

    Both ensembles are binned over the coarse feature space (H, log W,
    minimum pair distance) with shared edges; the result is

        sum_bins |P_A - P_B| * (1 + exp(median log W of the bin))

    which reproduces the exact distance 2 + W(x) + W(y) between point
    masses in distinct bins.  This is an uncontrolled proxy (the true
    metric takes a supremum over test functions); use it only as a
    monotone diagnostic.
    """
    qa, pa = _ensemble_arrays(ensemble_a)
    qb, pb = _ensemble_arrays(ensemble_b)

    def features(q, p):
        return np.column_stack([
            total_energy_batch(params, q, p),
            log_lyapunov_W_batch(params, lp, q, p),
            min_pair_distance_batch(q),
        ])

    fa, fb = features(qa, pa), features(qb, pb)
    pooled = np.concatenate([fa, fb], axis=0)
    finite_cap = np.where(np.isfinite(pooled), pooled, np.nan)
    edges = []
    for j in range(3):
        col = finite_cap[:, j]
        lo = np.nanmin(col)
        hi = np.nanmax(col)
        if not np.isfinite(lo):
            lo, hi = 0.0, 1.0
        if hi <= lo:
            lo, hi = lo - 0.5, hi + 0.5
        edges.append(np.linspace(lo, hi, bins + 1))

    def bin_index(f):
        idx = np.zeros(len(f), dtype=np.int64)
        for j in range(3):
            col = np.where(np.isfinite(f[:, j]), f[:, j], edges[j][-1])
            k = np.clip(np.searchsorted(edges[j], col, side="right") - 1,
                        0, bins - 1)
            idx = idx * bins + k
        return idx

    ia, ib = bin_index(fa), bin_index(fb)
    n_flat = bins**3
    pa_mass = np.bincount(ia, minlength=n_flat) / len(fa)
    pb_mass = np.bincount(ib, minlength=n_flat) / len(fb)

    pooled_idx = np.concatenate([ia, ib])
    pooled_logw = np.concatenate([fa[:, 1], fb[:, 1]])
    total = 0.0
    for flat in np.nonzero(np.abs(pa_mass - pb_mass) > 0.0)[0]:
        members = pooled_logw[pooled_idx == flat]
        logw_med = float(np.median(members)) if len(members) else -math.inf
        weight = math.exp(min(logw_med, _LOG_WEIGHT_CAP))
        total += abs(pa_mass[flat] - pb_mass[flat]) * (1.0 + weight)
    return float(total)
