"""Minimum pairwise distance along a trajectory (log scale)."""

from __future__ import annotations

import sys

import numpy as np

from .common import PlotSpec, SchemaError, new_axes, read_table, require_columns, save


def render(spec: PlotSpec) -> dict:
    path = spec.inputs[0]
    columns, data = read_table(path)
    index = require_columns(path, columns, ["t", "minDist"])
    t = data[:, index["t"]]
    dist = data[:, index["minDist"]]
    finite = np.isfinite(dist)
    if not np.any(finite):
        raise SchemaError(f"{path}: minDist has no finite entries")

    fig, ax = new_axes(spec.title)
    ax.plot(t[finite], dist[finite], lw=1.2)
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("min pair distance")
    save(fig, spec.out)
    return {"n_points": int(finite.sum()),
            "min_distance": float(np.min(dist[finite])), "out": spec.out}


def main(argv=None) -> int:
    from .common import run_script
    return run_script("min_distance", argv)


if __name__ == "__main__":
    sys.exit(main())
