"""Histogram of relative slacks from the separation-inequality sweep."""

from __future__ import annotations

import sys

import numpy as np

from .common import PlotSpec, new_axes, read_table, require_columns, save


def render(spec: PlotSpec) -> dict:
    path = spec.inputs[0]
    columns, data = read_table(path)
    index = require_columns(path, columns, ["rel_slack"])
    slack = data[:, index["rel_slack"]]

    fig, ax = new_axes(spec.title)
    counts, edges, _ = ax.hist(slack, bins=60, color="#31708f")
    ax.axvline(0.0, color="black", lw=1.0)
    ax.set_xlabel("relative slack of the separation inequality")
    ax.set_ylabel("count")
    save(fig, spec.out)
    # the inequality is exact in reals; anything beyond rounding noise
    # (1e-9 relative, the producer's own tolerance) counts as a violation
    return {
        "n_points": int(len(slack)),
        "min_slack": float(np.min(slack)),
        "negative_mass": int(np.sum(slack < -1e-9)),
        "out": spec.out,
    }


def main(argv=None) -> int:
    from .common import run_script
    return run_script("lemma_slack", argv)


if __name__ == "__main__":
    sys.exit(main())
