"""Run configuration: parsing, validation, defaults, and manifests.

Configuration is TOML.  Parsing is fail-closed: unknown sections or keys are
errors, so a typo can never silently fall back to a default.  All randomness
derives from the single top-level ``seed``; per-role streams are split off
it deterministically.

    seed = 0

    [system]      N, d, gamma, beta, deterministic
    [kernel]      family (coulomb|riesz|log1d), s, normalization (exact|paper)
    [potential]   form (quadratic|double_well), omega
    [potential.constants]  c1, c2, c3, M        # optional overrides
    [lyapunov]    a, b, c, eps1, eps2           # defaults derived if absent
    [integrator]  scheme, dt, eta, w_cap_log, max_halvings
    [sampler]     leapfrog_steps, leapfrog_dt, momentum_refresh, n_samples,
                  burn_in, preset, beta_tilde
    [initial]     kind (gaussian|grid|checkpoint), scale, path
    [run]         T, stride

Every CLI run writes a manifest holding the fully resolved configuration;
re-running from the manifest reproduces the outputs byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import tomli

from . import __version__
from .errors import ParseError, ValidationError
from .integrators import IntegratorConfig
from .kernels import InteractionKernel
from .lyapunov import LyapunovParams, default_lyapunov_params, validate_params
from .persist import read_checkpoint
from .potentials import AssumptionConstants, DoubleWell, Quadratic
from .rng import STREAM_INITIAL, make_generator
from .samplers import HmcConfig
from .system import ParticleState, SystemParams, min_pair_distance_batch


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "gaussian"
    scale: float = 1.0
    path: str | None = None


@dataclass(frozen=True)
class RunSection:
    T: float = 10.0
    stride: int = 10


@dataclass(frozen=True)
class RunConfig:
    seed: int
    deterministic: bool
    system: SystemParams
    lyapunov: LyapunovParams
    integrator: IntegratorConfig
    sampler: HmcConfig
    initial: InitialSpec
    run: RunSection
    preset: str | None
    beta_tilde: float
    resolved: dict


_SCHEMA = {
    "seed": ("int", 0),
    "system": {
        "N": ("int", 4),
        "d": ("int", 2),
        "gamma": ("float", 1.0),
        "beta": ("float", 1.0),
        "deterministic": ("bool", True),
    },
    "kernel": {
        "family": ("str", "coulomb"),
        "s": ("float_or_none", None),
        "normalization": ("str", "paper"),
    },
    "potential": {
        "form": ("str", "quadratic"),
        "omega": ("float", 1.0),
        "constants": {
            "c1": ("float_or_none", None),
            "c2": ("float_or_none", None),
            "c3": ("float_or_none", None),
            "M": ("float_or_none", None),
        },
    },
    "lyapunov": {
        "a": ("float_or_none", None),
        "b": ("float", 1.0),
        "c": ("float_or_none", None),
        "eps1": ("float_or_none", None),
        "eps2": ("float_or_none", None),
    },
    "integrator": {
        "scheme": ("str", "baoab"),
        "dt": ("float", 0.01),
        "eta": ("float", 0.25),
        "w_cap_log": ("float_or_none", None),
        "max_halvings": ("int", 40),
    },
    "sampler": {
        "leapfrog_steps": ("int", 10),
        "leapfrog_dt": ("float", 0.05),
        "momentum_refresh": ("float", 1.0),
        "n_samples": ("int", 1000),
        "burn_in": ("int", 100),
        "preset": ("str_or_none", None),
        "beta_tilde": ("float", 2.0),
    },
    "initial": {
        "kind": ("str", "gaussian"),
        "scale": ("float", 1.0),
        "path": ("str_or_none", None),
    },
    "run": {
        "T": ("float", 10.0),
        "stride": ("int", 10),
    },
}


def _coerce(kind: str, value, path: str):
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{path}: expected an integer, got {value!r}")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if kind == "bool":
        if not isinstance(value, bool):
            raise ValidationError(f"{path}: expected a boolean, got {value!r}")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ValidationError(f"{path}: expected a string, got {value!r}")
        return value
    if kind == "float_or_none":
        if value is None:
            return None
        return _coerce("float", value, path)
    if kind == "str_or_none":
        if value is None:
            return None
        return _coerce("str", value, path)
    raise AssertionError(kind)


def _walk(schema: dict, data: dict, prefix: str = "") -> dict:
    out = {}
    for key in data:
        if key not in schema:
            raise ValidationError(f"unknown key {prefix}{key}")
    for key, spec in schema.items():
        path = f"{prefix}{key}"
        if isinstance(spec, dict):
            sub = data.get(key, {})
            if not isinstance(sub, dict):
                raise ValidationError(f"{path}: expected a table")
            out[key] = _walk(spec, sub, prefix=path + ".")
        else:
            kind, default = spec
            out[key] = _coerce(kind, data[key], path) if key in data else default
    return out


def parse_config(text: str) -> RunConfig:
    """Parse TOML text into a fully validated, fully resolved RunConfig."""
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ParseError(f"config is not valid TOML: {exc}") from None
    return build_run_config(data)


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def build_run_config(data: dict) -> RunConfig:
    """Validate a (possibly partial) config mapping and fill defaults.

    Idempotent on its own ``resolved`` output, which is what manifests store.
    """
    cfg = _walk(_SCHEMA, data)
    sys_c, ker_c, pot_c = cfg["system"], cfg["kernel"], cfg["potential"]
    lya_c, int_c, sam_c = cfg["lyapunov"], cfg["integrator"], cfg["sampler"]

    try:
        kernel = InteractionKernel(
            family=ker_c["family"], dimension=sys_c["d"], s=ker_c["s"],
            normalization=ker_c["normalization"],
        )
    except ValueError as exc:
        raise ValidationError(f"kernel: {exc}") from None

    overrides = {k: v for k, v in pot_c["constants"].items() if v is not None}
    try:
        if pot_c["form"] == "quadratic":
            potential = Quadratic(pot_c["omega"])
        elif pot_c["form"] == "double_well":
            potential = DoubleWell()
        else:
            raise ValidationError(
                f"potential.form: unknown form {pot_c['form']!r}")
        if overrides:
            base = potential.constants
            potential.constants = AssumptionConstants(
                c1=overrides.get("c1", base.c1),
                c2=overrides.get("c2", base.c2),
                c3=overrides.get("c3", base.c3),
                M=overrides.get("M", base.M),
                eps_table=base.eps_table,
            )
    except ValueError as exc:
        raise ValidationError(f"potential: {exc}") from None

    try:
        system = SystemParams(
            N=sys_c["N"], d=sys_c["d"], gamma=sys_c["gamma"],
            beta=sys_c["beta"], kernel=kernel, potential=potential,
        )
    except ValueError as exc:
        raise ValidationError(f"system: {exc}") from None

    defaults = default_lyapunov_params(system, potential.constants,
                                       b=lya_c["b"])
    try:
        lyapunov = LyapunovParams(
            a=lya_c["a"] if lya_c["a"] is not None else defaults.a,
            b=lya_c["b"],
            c=lya_c["c"] if lya_c["c"] is not None else defaults.c,
            eps1=lya_c["eps1"] if lya_c["eps1"] is not None else defaults.eps1,
            eps2=lya_c["eps2"] if lya_c["eps2"] is not None else defaults.eps2,
        )
    except ValueError as exc:
        raise ValidationError(f"lyapunov: {exc}") from None
    validation = validate_params(system, lyapunov, potential.constants)
    if not validation.passed:
        failing = ", ".join(c.name for c in validation.conditions
                            if not c.passed)
        raise ValidationError(
            f"lyapunov: inadmissible parameters (failing: {failing}); "
            "the certificate requires 0 < a < beta, b > 0, "
            "c + eps1 + eps2 < gamma a (1 - a/beta), and "
            "gamma^2 c^2 (2a/beta - 1)^2 / (4 eps1) < c (c1 c2 / 2 - 2c)"
        )

    try:
        integrator = IntegratorConfig(
            dt=int_c["dt"], scheme=int_c["scheme"], eta=int_c["eta"],
            w_cap_log=(math.inf if int_c["w_cap_log"] is None
                       else int_c["w_cap_log"]),
            seed=cfg["seed"], max_halvings=int_c["max_halvings"],
        )
    except ValueError as exc:
        raise ValidationError(f"integrator: {exc}") from None

    if sam_c["preset"] is not None and sam_c["preset"] != "ginibre":
        raise ValidationError(
            f"sampler.preset: unknown preset {sam_c['preset']!r}")
    try:
        sampler = HmcConfig(
            leapfrog_steps=sam_c["leapfrog_steps"],
            leapfrog_dt=sam_c["leapfrog_dt"],
            momentum_refresh=sam_c["momentum_refresh"],
            seed=cfg["seed"],
            n_samples=sam_c["n_samples"],
            burn_in=sam_c["burn_in"],
        )
    except Exception as exc:
        raise ValidationError(f"sampler: {exc}") from None

    ini_c = cfg["initial"]
    if ini_c["kind"] not in ("gaussian", "grid", "checkpoint"):
        raise ValidationError(f"initial.kind: unknown kind {ini_c['kind']!r}")
    if ini_c["kind"] == "checkpoint" and not ini_c["path"]:
        raise ValidationError("initial.path: required for checkpoint starts")
    if ini_c["scale"] <= 0.0:
        raise ValidationError("initial.scale: must be strictly positive")
    initial = InitialSpec(kind=ini_c["kind"], scale=ini_c["scale"],
                          path=ini_c["path"])

    run_c = cfg["run"]
    if run_c["T"] < 0.0:
        raise ValidationError("run.T: must be nonnegative")
    if run_c["stride"] < 1:
        raise ValidationError("run.stride: must be >= 1")
    run = RunSection(T=run_c["T"], stride=run_c["stride"])

    resolved = json.loads(json.dumps(cfg))  # deep copy, JSON-safe
    resolved["lyapunov"] = {
        "a": lyapunov.a, "b": lyapunov.b, "c": lyapunov.c,
        "eps1": lyapunov.eps1, "eps2": lyapunov.eps2,
    }
    return RunConfig(
        seed=cfg["seed"],
        deterministic=sys_c["deterministic"],
        system=system,
        lyapunov=lyapunov,
        integrator=integrator,
        sampler=sampler,
        initial=initial,
        run=run,
        preset=sam_c["preset"],
        beta_tilde=sam_c["beta_tilde"],
        resolved=resolved,
    )


def initial_state(cfg: RunConfig) -> ParticleState:
    """Build the starting state named by the config's [initial] section.

    For d = 1 systems, positions are sorted so the ordered-domain constraint
    holds from the first step.
    """
    system, spec = cfg.system, cfg.initial
    if spec.kind == "checkpoint":
        state, _ = read_checkpoint(spec.path)
        if state.q.shape != (system.N, system.d):
            raise ValidationError(
                f"initial.path: checkpoint shape {state.q.shape} does not "
                f"match system ({system.N}, {system.d})")
        return state
    rng = make_generator(cfg.seed, STREAM_INITIAL)
    sigma_p = 1.0 / math.sqrt(system.beta)
    if spec.kind == "grid":
        per_axis = max(1, math.ceil(system.N ** (1.0 / system.d)))
        axes = [np.arange(per_axis, dtype=float)] * system.d
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        pts = mesh.reshape(-1, system.d)[: system.N]
        q = spec.scale * (pts - pts.mean(axis=0))
    else:
        for _ in range(100):
            q = spec.scale * rng.standard_normal((system.N, system.d))
            if float(min_pair_distance_batch(q)) > 1e-6 * spec.scale:
                break
        else:
            raise ValidationError("initial: could not draw a collision-free start")
    if system.d == 1:
        q = np.sort(q, axis=0)
    p = sigma_p * rng.standard_normal((system.N, system.d))
    return ParticleState(q, p)


def manifest_dict(cfg: RunConfig, command: str, extra: dict | None = None) -> dict:
    out = {
        "artifact": "coulombgas",
        "version": __version__,
        "command": command,
        "seed": cfg.seed,
        "deterministic": cfg.deterministic,
        "config": cfg.resolved,
    }
    if extra:
        out.update(extra)
    return out


def write_manifest(path, cfg: RunConfig, command: str,
                   extra: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest_dict(cfg, command, extra), fh, indent=2,
                  sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> tuple[str, RunConfig]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"manifest is not valid JSON: {exc}") from None
    if "config" not in data:
        raise ParseError("manifest carries no config block")
    return data.get("command", ""), build_run_config(data["config"])
