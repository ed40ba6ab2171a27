"""Certificate decay along a trajectory with the fitted rate overlaid.

Inputs: a trajectory CSV (t and logW columns) and a diagnostics JSON whose
rate block carries lambda_hat; the overlay is log W(0) - lambda_hat * t,
the log-domain version of the exp(-lambda t) envelope.
"""

from __future__ import annotations

import sys

from .common import (
    PlotSpec,
    new_axes,
    read_rate,
    read_table,
    require_columns,
    save,
)


def render(spec: PlotSpec) -> dict:
    csv_path = spec.inputs[0]
    if len(spec.inputs) < 2:
        raise ValueError("w_decay needs (trajectory CSV, diagnostics JSON)")
    rate = read_rate(spec.inputs[1])
    columns, data = read_table(csv_path)
    index = require_columns(csv_path, columns, ["t", "logW"])
    t = data[:, index["t"]]
    log_w = data[:, index["logW"]]

    fig, ax = new_axes(spec.title)
    ax.plot(t, log_w, lw=1.2, label="log W along trajectory")
    ax.plot(t, log_w[0] - rate * t, "--", color="black",
            label=rf"decay envelope, $\hat\lambda$={rate:.3g}")
    ax.set_xlabel("t")
    ax.set_ylabel("log W")
    ax.legend(loc="upper right")
    save(fig, spec.out)
    return {"n_points": int(len(t)), "rate": rate, "out": spec.out}


def main(argv=None) -> int:
    from .common import run_script
    return run_script("w_decay", argv,
                      extra_args=(("--rates", "diagnostics JSON with rate.lambda_hat"),))


if __name__ == "__main__":
    sys.exit(main())
