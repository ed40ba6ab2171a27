"""Shared schema readers and the render dispatcher.

Input schemas (produced by the coulombgas CLI):

  trajectory CSV   t, H, logW, minDist, kinetic, q0_0 .. p{N-1}_{d-1}
  chain CSV        iteration, H, accept, q0_0 .. q{N-1}_{d-1}
  slack CSV        sample, N, d, exponent, j_value, rhs, slack, rel_slack
  diagnostics JSON the "rate" block must hold lambda_hat for decay overlays

Rendering is deterministic: fixed figure size, no timestamps, axis ranges
derived only from the data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIGSIZE = (7.0, 4.5)
DPI = 120


class SchemaError(Exception):
    """An input file does not match its documented schema."""


def read_table(path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", newline="") as fh:
        header = fh.readline().strip()
        if not header:
            raise SchemaError(f"{path}: empty file")
        columns = header.split(",")
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise SchemaError(f"{path}: non-numeric row ({exc})") from None
    if data.size == 0:
        raise SchemaError(f"{path}: no data rows")
    if data.shape[1] != len(columns):
        raise SchemaError(f"{path}: row width does not match header")
    return columns, data


def require_columns(path, columns, names) -> dict[str, int]:
    index = {name: j for j, name in enumerate(columns)}
    for name in names:
        if name not in index:
            raise SchemaError(f"{path}: missing column {name!r}")
    return index


def position_block(path, columns, data) -> np.ndarray:
    """Pooled positions (rows, N, d) from the flattened q columns."""
    n = d = 0
    for name in columns:
        if name.startswith("q") and "_" in name[1:]:
            i, k = name[1:].split("_", 1)
            if i.isdigit() and k.isdigit():
                n = max(n, int(i) + 1)
                d = max(d, int(k) + 1)
    if n == 0:
        raise SchemaError(f"{path}: missing column 'q0_0'")
    index = require_columns(path, columns,
                            [f"q{i}_{k}" for i in range(n) for k in range(d)])
    cols = [index[f"q{i}_{k}"] for i in range(n) for k in range(d)]
    return data[:, cols].reshape(len(data), n, d)


def read_rate(path) -> float:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: not a readable JSON report ({exc})") from None
    rate = payload.get("rate", {})
    if "lambda_hat" not in rate:
        raise SchemaError(f"{path}: missing column 'rate.lambda_hat'")
    return float(rate["lambda_hat"])


def new_axes(title: str):
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    if title:
        ax.set_title(title)
    return fig, ax


def save(fig, out_path) -> None:
    fig.savefig(out_path, bbox_inches="tight")
    plt.close(fig)


@dataclass(frozen=True)
class PlotSpec:
    kind: str                   # radial_law | w_decay | min_distance | lemma_slack
    inputs: tuple[str, ...]     # CSV path, plus the JSON report for w_decay
    out: str
    title: str = ""


def render(spec: PlotSpec) -> dict:
    """Render one figure; returns a small summary of what was drawn."""
    from . import lemma_slack, min_distance, radial_law, w_decay

    kinds = {
        "radial_law": radial_law.render,
        "w_decay": w_decay.render,
        "min_distance": min_distance.render,
        "lemma_slack": lemma_slack.render,
    }
    if spec.kind not in kinds:
        raise SchemaError(f"unknown figure kind {spec.kind!r}")
    return kinds[spec.kind](spec)


def run_script(kind, argv, extra_args=()):
    """Shared argv handling for the one-script-per-kind entry points."""
    import argparse
    import sys

    parser = argparse.ArgumentParser(description=f"render the {kind} figure")
    parser.add_argument("--in", dest="infile", required=True)
    for flag, help_text in extra_args:
        parser.add_argument(flag, required=True, help=help_text)
    parser.add_argument("--out", required=True)
    parser.add_argument("--title", default="")
    args = parser.parse_args(argv)
    inputs = [args.infile]
    for flag, _ in extra_args:
        inputs.append(getattr(args, flag.lstrip("-").replace("-", "_")))
    try:
        render(PlotSpec(kind=kind, inputs=tuple(inputs), out=args.out,
                        title=args.title))
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    return 0
