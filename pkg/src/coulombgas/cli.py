"""Command-line interface.

Subcommands: simulate, sample-hmc, verify-lyapunov, verify-lemma, diagnose,
checkpoint-inspect.  Exit codes: 0 success, 2 configuration/validation
failure, 3 numerical failure, 4 I/O failure.

Every run that consumes a configuration writes ``<out>.manifest.json`` with
the fully resolved config; ``--from-manifest`` re-runs it byte-identically.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .config import (
    RunConfig,
    build_run_config,
    initial_state,
    load_config,
    load_manifest,
    write_manifest,
)
from .diagnostics import (
    ObservableSeries,
    equipartition_stat,
    fit_exponential_rate,
    radial_law_distance,
)
from .errors import (
    CapHit,
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
from .integrators import STATUS_COMPLETED, simulate
from .lyapunov import (
    check_drift_bound,
    fit_drift_constants,
    lemma_check,
    make_state_sampler,
    validate_params,
)
from .potentials import verify_assumption
from .persist import (
    read_checkpoint,
    read_table_csv,
    write_checkpoint,
    write_histogram_csv,
    write_hmc_csv,
    write_lemma_csv,
    write_trajectory_csv,
)
from .rng import STREAM_VERIFY, make_generator
from .samplers import disk_initial_positions, ginibre_preset, hmc_chain
from .system import ParticleState, min_pair_distance

_CONFIG_ERRORS = (ParseError, ValidationError, InvalidConfig, MissingConstants)
_NUMERIC_ERRORS = (StepFailure, CapHit, InfeasibleFit, ZeroSeparation,
                   DegenerateSeries, EmptyEnsemble, DimensionMismatch)
_IO_ERRORS = (FormatError, TruncationError, OSError)


def _resolve_config(args, overrides: dict) -> RunConfig:
    if getattr(args, "from_manifest", None):
        _, cfg = load_manifest(args.from_manifest)
        base = cfg.resolved
    elif getattr(args, "config", None):
        base = load_config(args.config).resolved
    else:
        base = {}
    merged = json.loads(json.dumps(base))
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = merged
        parts = dotted.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return build_run_config(merged)


def _add_config_args(sub):
    sub.add_argument("--config", help="TOML configuration file")
    sub.add_argument("--from-manifest", help="re-run from a manifest")


def _cmd_simulate(args) -> int:
    cfg = _resolve_config(args, {
        "integrator.scheme": args.scheme,
        "integrator.dt": args.dt,
        "integrator.eta": args.eta,
        "run.T": args.T,
        "run.stride": args.stride,
        "seed": args.seed,
    })
    state0 = initial_state(cfg)
    record = simulate(cfg.system, cfg.lyapunov, cfg.integrator, state0,
                      cfg.run.T, cfg.run.stride)
    write_trajectory_csv(args.out, record)
    if args.checkpoint:
        write_checkpoint(args.checkpoint, record.final_state,
                         record.rng_checkpoints[-1])
    write_manifest(args.out + ".manifest.json", cfg, "simulate")
    summary = {
        "status": record.status,
        "steps": int(len(record.times) - 1),
        "final_time": float(record.times[-1]),
        "halvings": record.n_halvings_total,
        "min_pair_distance": float(np.min(record.min_dist)),
        "out": args.out,
    }
    print(json.dumps(summary, sort_keys=True))
    return 0 if record.status == STATUS_COMPLETED else 3


def _cmd_sample_hmc(args) -> int:
    overrides = {
        "sampler.leapfrog_dt": args.dt,
        "sampler.leapfrog_steps": args.L,
        "sampler.burn_in": args.burn,
        "seed": args.seed,
    }
    if args.preset:
        overrides["sampler.preset"] = args.preset
    if args.n is not None and args.steps is not None:
        raise ValidationError("give either --n or --steps, not both")
    if args.n is not None:
        overrides["sampler.n_samples"] = args.n
    cfg = _resolve_config(args, overrides)
    if args.steps is not None:
        n = args.steps - cfg.sampler.burn_in
        if n < 1:
            raise ValidationError("--steps must exceed the burn-in")
        cfg = _resolve_config(args, dict(overrides, **{
            "sampler.n_samples": n}))
    if cfg.preset == "ginibre":
        params = ginibre_preset(cfg.system.N, cfg.beta_tilde)
        q0 = disk_initial_positions(params.N, seed=cfg.seed)
    else:
        params = cfg.system
        q0 = initial_state(cfg).q
    result = hmc_chain(params, cfg.sampler, q0)
    write_hmc_csv(args.out, result)
    write_manifest(args.out + ".manifest.json", cfg, "sample-hmc")
    print(json.dumps({
        "acceptance_rate": result.acceptance_rate,
        "n_samples": int(len(result.positions)),
        "collision_rejects": result.n_collision_rejects,
        "out": args.out,
    }, sort_keys=True))
    return 0


def _cmd_verify_lyapunov(args) -> int:
    cfg = _resolve_config(args, {"seed": args.seed})
    params, lp = cfg.system, cfg.lyapunov
    validation = validate_params(params, lp, params.potential.constants)
    report: dict = {
        "lyapunov_params": cfg.resolved["lyapunov"],
        "validation": validation.to_dict(),
        "assumption_check": verify_assumption(
            params.potential, sample_radius=10.0, n_samples=2000,
            dimension=params.d).to_dict(),
    }
    exit_code = 0
    if not validation.passed:
        exit_code = 2
    else:
        train = make_state_sampler(params, cfg.seed)
        test = make_state_sampler(params, cfg.seed + 1)
        fit = fit_drift_constants(params, lp, train, args.n)
        check = check_drift_bound(params, lp, fit, test, args.n)
        report["fit"] = {
            "alpha": fit.alpha, "C": fit.C, "lambda": fit.lam,
            "log_r": fit.log_r,
            "alpha_max": fit.details["alpha_max"],
            "lambda_raw": fit.details["lam_raw"],
            "n_train": args.n,
        }
        report["test_check"] = check.to_dict()
        report["witnesses"] = {
            "worst_quadratic_state": fit.details["worst_quadratic_state"],
            "slow_drift_state": fit.details["slow_drift_state"],
        }
        if not check.passed:
            exit_code = 3
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        write_manifest(args.out + ".manifest.json", cfg, "verify-lyapunov",
                       extra={"n_samples": args.n})
    else:
        print(text)
    return exit_code


def _cmd_verify_lemma(args) -> int:
    cfg = _resolve_config(args, {"seed": args.seed})
    sizes = [int(x) for x in args.sizes.split(",")]
    dims = [int(x) for x in args.dims.split(",")]
    if any(n < 2 for n in sizes):
        raise ValidationError("--sizes entries must be >= 2")
    if any(d < 1 for d in dims):
        raise ValidationError("--dims entries must be >= 1")
    rng = make_generator(cfg.seed, STREAM_VERIFY)
    combos = [(n, d) for n in sizes for d in dims]
    per = max(1, args.n // len(combos))
    rows = []
    worst = math.inf
    for n, d in combos:
        for _ in range(per):
            q = rng.standard_normal((n, d))
            if rng.uniform() < 0.3:
                q[1] = q[0] + 10.0 ** rng.uniform(-3, -1) * \
                    _unit_direction(rng, d)
            check = lemma_check(ParticleState(q, np.zeros_like(q)), float(d))
            rel = check.slack / check.rhs if check.rhs else 0.0
            worst = min(worst, rel)
            rows.append({"N": n, "d": d, "exponent": float(d),
                         "j_value": check.j_value, "rhs": check.rhs,
                         "slack": check.slack, "rel_slack": rel})
    write_lemma_csv(args.out, rows)
    write_manifest(args.out + ".manifest.json", cfg, "verify-lemma",
                   extra={"n_samples": len(rows)})
    print(json.dumps({"n_samples": len(rows), "worst_rel_slack": worst,
                      "out": args.out}, sort_keys=True))
    return 0 if worst >= -1e-9 else 3


def _unit_direction(rng, d):
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


def _infer_shape(columns) -> tuple[int, int]:
    n = d = 0
    for name in columns:
        if name.startswith("q") and "_" in name:
            i, k = name[1:].split("_")
            n = max(n, int(i) + 1)
            d = max(d, int(k) + 1)
    return n, d


def _cmd_diagnose(args) -> int:
    columns, data = read_table_csv(args.infile)
    n, d = _infer_shape(columns)
    if n == 0:
        raise FormatError("input table has no position columns")
    col = {name: j for j, name in enumerate(columns)}
    report: dict = {"input": args.infile, "n_rows": int(len(data)),
                    "N": n, "d": d}
    q_cols = [col[f"q{i}_{k}"] for i in range(n) for k in range(d)]
    positions = data[:, q_cols].reshape(len(data), n, d)
    report["moments"] = {
        "mean_sq_position": float(np.mean(np.sum(positions**2, axis=(1, 2)))),
    }
    if "kinetic" in col:
        kin = data[:, col["kinetic"]]
        series = 2.0 * kin / (n * d)
        mean, se = equipartition_stat(series)
        report["equipartition"] = {"mean": mean, "standard_error": se}
        if "H" in col:
            report["moments"]["mean_potential"] = float(
                np.mean(data[:, col["H"]] - kin))
    if d == 2 and positions.shape[0] * n >= 100:
        report["radial"] = {
            "uniform_disk_distance": radial_law_distance(positions)}
    if args.rate_column:
        if args.rate_column not in col:
            raise FormatError(f"no column {args.rate_column!r} in input")
        series = ObservableSeries(data[:, col["t"]] if "t" in col
                                  else np.arange(len(data), dtype=float),
                                  data[:, col[args.rate_column]],
                                  name=args.rate_column)
        fitted = fit_exponential_rate(series, args.floor)
        report["rate"] = {"lambda_hat": fitted.rate,
                          "r_squared": fitted.r_squared,
                          "n_points": fitted.n_points,
                          "column": args.rate_column,
                          "floor": args.floor}
    if args.hist_prefix:
        radii = np.sqrt(np.sum(positions**2, axis=-1)).ravel()
        counts, edges = np.histogram(radii, bins=args.bins)
        write_histogram_csv(args.hist_prefix + "_radial.csv", edges, counts)
        if "minDist" in col:
            finite = data[:, col["minDist"]]
            finite = finite[np.isfinite(finite)]
            if len(finite):
                counts, edges = np.histogram(finite, bins=args.bins)
                write_histogram_csv(args.hist_prefix + "_mindist.csv",
                                    edges, counts)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_checkpoint_inspect(args) -> int:
    state, blob = read_checkpoint(args.infile)
    print(json.dumps({
        "N": state.n_particles,
        "d": state.dimension,
        "min_pair_distance": min_pair_distance(state),
        "sq_position_norm": float(np.sum(state.q**2)),
        "sq_momentum_norm": float(np.sum(state.p**2)),
        "rng_state_bytes": len(blob),
    }, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coulombgas",
        description="Kinetic Langevin dynamics of Coulomb gases",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="integrate the kinetic SDE")
    _add_config_args(sim)
    sim.add_argument("--scheme", choices=("baoab", "euler_maruyama"))
    sim.add_argument("--dt", type=float)
    sim.add_argument("--eta", type=float)
    sim.add_argument("--T", type=float)
    sim.add_argument("--stride", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out", default="trajectory.csv")
    sim.add_argument("--checkpoint", help="write the final state here")
    sim.set_defaults(func=_cmd_simulate)

    hmc = subs.add_parser("sample-hmc", help="sample the Gibbs measure")
    _add_config_args(hmc)
    hmc.add_argument("--steps", type=int,
                     help="total iterations (burn-in included)")
    hmc.add_argument("--dt", type=float, help="leapfrog step size")
    hmc.add_argument("--L", type=int, help="leapfrog steps per proposal")
    hmc.add_argument("--n", type=int, help="retained samples")
    hmc.add_argument("--burn", type=int, help="burn-in iterations")
    hmc.add_argument("--seed", type=int)
    hmc.add_argument("--preset", choices=("ginibre",))
    hmc.add_argument("--out", default="chain.csv")
    hmc.set_defaults(func=_cmd_sample_hmc)

    ver = subs.add_parser("verify-lyapunov",
                          help="fit and test the drift certificate")
    _add_config_args(ver)
    ver.add_argument("--n", type=int, default=10000,
                     help="training/test sample size")
    ver.add_argument("--seed", type=int)
    ver.add_argument("--out", help="JSON report path (default: stdout)")
    ver.set_defaults(func=_cmd_verify_lyapunov)

    lem = subs.add_parser("verify-lemma",
                          help="sweep the pairwise separation inequality")
    _add_config_args(lem)
    lem.add_argument("--n", type=int, default=10000)
    lem.add_argument("--sizes", default="2,3,4,5,6,7,8")
    lem.add_argument("--dims", default="2,3,4")
    lem.add_argument("--seed", type=int)
    lem.add_argument("--out", default="lemma_slack.csv")
    lem.set_defaults(func=_cmd_verify_lemma)

    diag = subs.add_parser("diagnose", help="post-process CSV outputs")
    diag.add_argument("--in", dest="infile", required=True)
    diag.add_argument("--out", help="JSON summary path (default: stdout)")
    diag.add_argument("--hist-prefix", help="write histogram CSVs here")
    diag.add_argument("--bins", type=int, default=40)
    diag.add_argument("--rate-column",
                      help="fit an exponential decay rate to this column")
    diag.add_argument("--floor", type=float, default=0.0)
    diag.set_defaults(func=_cmd_diagnose)

    ins = subs.add_parser("checkpoint-inspect", help="describe a checkpoint")
    ins.add_argument("--in", dest="infile", required=True)
    ins.set_defaults(func=_cmd_checkpoint_inspect)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except _IO_ERRORS as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
