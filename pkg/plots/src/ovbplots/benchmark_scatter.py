"""Observed-covariate benchmark scatter with the robustness threshold."""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, parse_float, read_rows


def plot_benchmark_scatter(benchmark_csv: str, rv: float | None, out_image: str) -> None:
    """Scatter each covariate's two partial R-squareds against the threshold.

    The dashed hyperbola marks parameter pairs whose product equals the
    sign-reversal robustness value; covariates beyond it are strong enough to
    flip the conclusion.  ``rv`` falls back to the CSV's ``rv_reference``
    column; a zero threshold degenerates onto the axes and is not drawn.
    """
    rows = read_rows(benchmark_csv, ("covariate", "r2_s_z", "r2_tau_z"))
    if rv is None:
        if "rv_reference" not in rows[0]:
            raise SchemaError(f"{benchmark_csv} lacks rv_reference; pass --rv")
        rv = parse_float(rows[0], "rv_reference", benchmark_csv)

    xs = [parse_float(r, "r2_s_z", benchmark_csv) for r in rows]
    ys = [parse_float(r, "r2_tau_z", benchmark_csv) for r in rows]

    fig, ax = plt.subplots(figsize=(5.2, 4.6))
    ax.scatter(xs, ys, color="#1f6fb4", zorder=3)
    for row, x, y in zip(rows, xs, ys):
        ax.annotate(row["covariate"], (x, y), textcoords="offset points",
                    xytext=(4, 4), fontsize=8)

    limit = max(0.05, 1.1 * max(xs + ys))
    if np.isfinite(rv) and 0.0 < rv <= 1.0:
        limit = max(limit, 1.1 * float(np.sqrt(rv)))
    limit = min(limit, 1.0)
    if np.isfinite(rv) and 0.0 < rv < limit**2:
        # hyperbola r2_s * r2_tau = rv, clipped to the visible square
        grid = np.linspace(rv / limit, limit, 200)
        ax.plot(grid, rv / grid, linestyle="--", color="#c23b22",
                gid="rv-threshold", label=f"sign-reversal threshold ({rv:.3g})")
        ax.legend(loc="upper right", fontsize=8)

    ax.set_xlim(0, limit)
    ax.set_ylim(0, limit)
    ax.set_xlabel("partial R2 with trial membership")
    ax.set_ylabel("partial R2 with treatment effect")
    fig.tight_layout()
    fig.savefig(out_image)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=plot_benchmark_scatter.__doc__)
    parser.add_argument("benchmark_csv")
    parser.add_argument("out_image")
    parser.add_argument("--rv", type=float, default=None,
                        help="robustness value (default: rv_reference column)")
    args = parser.parse_args(argv)
    try:
        plot_benchmark_scatter(args.benchmark_csv, args.rv, args.out_image)
    except SchemaError as exc:
        print(f"SchemaError: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out_image}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
