"""Radial distribution of pooled positions against the uniform-disk law.

Radii are rescaled by the empirical 95th-percentile radius divided by
sqrt(0.95) (the disk-radius estimate under which a uniform disk maps to the
unit disk), then the empirical radial CDF is drawn over the r^2 reference.
"""

from __future__ import annotations

import math
import sys

import numpy as np

from .common import PlotSpec, SchemaError, new_axes, position_block, read_table, save


def render(spec: PlotSpec) -> dict:
    path = spec.inputs[0]
    columns, data = read_table(path)
    positions = position_block(path, columns, data)
    if positions.shape[-1] != 2:
        raise SchemaError(f"{path}: radial law needs d = 2 positions")
    radii = np.sqrt((positions**2).sum(-1)).ravel()
    scale = float(np.quantile(radii, 0.95)) / math.sqrt(0.95)
    if scale <= 0.0:
        raise SchemaError(f"{path}: degenerate positions (all at the origin)")
    r = np.sort(radii / scale)
    cdf = np.arange(1, len(r) + 1) / len(r)

    fig, ax = new_axes(spec.title)
    ax.step(r, cdf, where="post", label="empirical radial CDF", lw=1.5)
    grid = np.linspace(0.0, max(1.05, float(r[-1])), 400)
    ax.plot(grid, np.clip(grid, 0.0, 1.0) ** 2, "--", color="black",
            label="uniform disk: $r^2$")
    ax.set_xlabel("rescaled radius")
    ax.set_ylabel("CDF")
    ax.set_xlim(0.0, grid[-1])
    ax.set_ylim(0.0, 1.02)
    ax.legend(loc="lower right")
    save(fig, spec.out)
    sup_dist = float(np.max(np.abs(cdf - np.clip(r, 0.0, 1.0) ** 2)))
    return {"n_points": int(len(r)), "sup_distance": sup_dist, "out": spec.out}


def main(argv=None) -> int:
    from .common import run_script
    return run_script("radial_law", argv)


if __name__ == "__main__":
    sys.exit(main())
