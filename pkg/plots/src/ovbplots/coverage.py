"""Coverage-versus-moderation-bound curves from ``coverage.csv``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import SchemaError, parse_float, read_rows

SERIES_STYLE = {
    "coverage_envelope": dict(label="bias envelope", color="#1f6fb4", marker="o"),
    "coverage_full_ci": dict(label="full CI", color="#c23b22", marker="s",
                             linestyle="--"),
}


def plot_coverage(coverage_csv: str, out_image: str, manifest: str | None = None) -> None:
    """Line plot of each interval type's coverage along the gamma grid.

    Draws the nominal 0.95 reference and, when a run manifest with an oracle
    moderation strength is supplied (or found next to the CSV), a vertical
    line at that value.
    """
    rows = read_rows(coverage_csv, ("gamma", "metric", "value"))
    series: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        gamma = parse_float(row, "gamma", coverage_csv)
        value = parse_float(row, "value", coverage_csv)
        series.setdefault(row["metric"], []).append((gamma, value))

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for metric, points in series.items():
        points.sort()
        style = SERIES_STYLE.get(metric, dict(label=metric, marker="."))
        ax.plot([p[0] for p in points], [p[1] for p in points], **style)

    ax.axhline(0.95, color="gray", linewidth=0.8, linestyle=":", label="0.95")
    gamma_star = _oracle_gamma(manifest, coverage_csv)
    if gamma_star is not None:
        ax.axvline(gamma_star, color="green", linewidth=0.8, linestyle="--",
                   label="oracle moderation strength")

    ax.set_xlabel("moderation bound")
    ax.set_ylabel("Monte Carlo coverage")
    ax.set_ylim(-0.03, 1.05)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_image)
    plt.close(fig)


def _oracle_gamma(manifest: str | None, coverage_csv: str) -> float | None:
    path = Path(manifest) if manifest else Path(coverage_csv).parent / "manifest.json"
    if not path.is_file():
        return None
    try:
        payload = json.loads(path.read_text())
        return float(payload["oracle"]["gamma_star"])
    except (ValueError, KeyError, TypeError):
        return None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=plot_coverage.__doc__)
    parser.add_argument("coverage_csv")
    parser.add_argument("out_image")
    parser.add_argument("--manifest", default=None)
    args = parser.parse_args(argv)
    try:
        plot_coverage(args.coverage_csv, args.out_image, args.manifest)
    except SchemaError as exc:
        print(f"SchemaError: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out_image}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
