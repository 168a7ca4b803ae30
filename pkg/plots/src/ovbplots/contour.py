"""Bias-bound contour over the sensitivity-parameter square."""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, parse_float, read_rows


def plot_contour(contour_csv: str, out_image: str) -> None:
    """Filled contour of the bias bound with the sign-reversal region shaded.

    Expects the long-format grid written by the analysis CLI: one row per
    (r2_tau, r2_s) cell with the bound value and reversal flag.
    """
    rows = read_rows(contour_csv, ("r2_tau", "r2_s", "bound", "reversal"))
    taus = sorted({parse_float(r, "r2_tau", contour_csv) for r in rows})
    ss = sorted({parse_float(r, "r2_s", contour_csv) for r in rows})
    if len(rows) != len(taus) * len(ss):
        raise SchemaError(
            f"{contour_csv} is not a complete grid: {len(rows)} rows "
            f"for {len(taus)} x {len(ss)} cells"
        )
    tau_index = {v: i for i, v in enumerate(taus)}
    s_index = {v: j for j, v in enumerate(ss)}
    bound = np.zeros((len(taus), len(ss)))
    reversal = np.zeros((len(taus), len(ss)), dtype=bool)
    for row in rows:
        i = tau_index[parse_float(row, "r2_tau", contour_csv)]
        j = s_index[parse_float(row, "r2_s", contour_csv)]
        bound[i, j] = parse_float(row, "bound", contour_csv)
        reversal[i, j] = row["reversal"].strip().lower() in ("true", "1")

    fig, ax = plt.subplots(figsize=(5.6, 4.6))
    mesh_s, mesh_tau = np.meshgrid(ss, taus)
    filled = ax.contourf(mesh_s, mesh_tau, bound, levels=12, cmap="Blues")
    fig.colorbar(filled, ax=ax, label="bias bound")
    if reversal.any() and not reversal.all():
        ax.contourf(mesh_s, mesh_tau, reversal.astype(float), levels=[0.5, 1.5],
                    colors=["#c23b22"], alpha=0.25)
        ax.contour(mesh_s, mesh_tau, reversal.astype(float), levels=[0.5],
                   colors=["#c23b22"], linewidths=1.2)
    ax.set_xlabel("partial R2 of selection vs moderator")
    ax.set_ylabel("partial R2 of effect vs moderator")
    fig.tight_layout()
    fig.savefig(out_image)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=plot_contour.__doc__)
    parser.add_argument("contour_csv")
    parser.add_argument("out_image")
    args = parser.parse_args(argv)
    try:
        plot_contour(args.contour_csv, args.out_image)
    except SchemaError as exc:
        print(f"SchemaError: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out_image}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
