"""Command-line front end.

Subcommands: ``analyze`` runs the full sensitivity workflow on a pair of
CSV files, ``simulate`` runs the Monte Carlo coverage experiments,
``benchmark`` emits the per-covariate calibration table, and ``contour``
tabulates the bias bound over the sensitivity-parameter grid.

Exit codes: 0 success, 2 input/usage validation failure (the error class
name is printed to stderr), 3 numerical failure.  All CSV and JSON outputs
are deterministic given the flags and seed: numbers are written with 12
significant digits and no timestamps or machine state are recorded.
"""

from __future__ import annotations

import argparse
import csv
import functools
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import benchmark_table
from .errors import (
    InvalidConfig,
    InvalidInput,
    MissingColumn,
    NumericError,
    SchemaMismatch,
    SingleCovariate,
    ValidationError,
)
from .model import (
    SensitivityParamsR2,
    SensitivityParamsRaw,
    validate_ingest,
    pool,
)
from .numerics import add_intercept, logistic_fit, logistic_pseudo_r2, ols_fit
from .sensitivity import (
    SigmaTauMode,
    contour_grid,
    inflate_interval,
    r2_bias_bound,
    raw_bias_bound,
    robustness_value,
    sigma_tau_upper,
)
from .simulate import (
    Dgp1Config,
    Dgp2Config,
    Dgp3Config,
    coverage_experiment,
    gen_dgp1,
    gen_dgp2,
    gen_dgp3,
)
from .transport import bootstrap_ci, fit_outcome_models, gformula_tate

# ----------------------------------------------------------------------
# deterministic formatting


def _fmt(value) -> str:
    """Fixed 12-significant-digit rendering for CSV cells."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12g}"
    return str(value)


def _json_ready(obj):
    """Round floats to 12 significant digits; map infinities to strings."""
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(f"{v:.12g}")
    return obj


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    print(f"wrote {path}")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(_json_ready(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {path}")


def _versions() -> dict:
    return {
        "ovbgen": __version__,
        "numpy": np.__version__,
        "python": ".".join(str(v) for v in sys.version_info[:3]),
    }


# ----------------------------------------------------------------------
# CSV input and one-hot encoding


def _read_table(path: str) -> tuple[list[str], dict[str, list]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValidationError(f"{path} is empty") from None
            rows = list(reader)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    if len(set(header)) != len(header):
        raise SchemaMismatch(f"{path} has duplicate column names")
    table = {name: [] for name in header}
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise SchemaMismatch(f"{path} row {i} has {len(row)} cells, expected {len(header)}")
        for name, cell in zip(header, row):
            table[name].append(cell)
    return header, table


def _apply_one_hot(headers_tables: list, columns: list[str]):
    """Expand string-valued columns into leave-first-out indicator columns.

    Levels are pooled across all provided tables so trial and target agree on
    the encoding; the first (sorted) level is dropped to keep designs with an
    intercept full rank.
    """
    for col in columns:
        levels = set()
        for header, table in headers_tables:
            if col in table:
                levels.update(v.strip() for v in table[col])
        if not levels:
            raise MissingColumn(f"one-hot column '{col}' not found in any table")
        ordered = sorted(levels)[1:]
        for header, table in headers_tables:
            if col not in table:
                continue
            at = header.index(col)
            values = [v.strip() for v in table.pop(col)]
            new_names = [f"{col}={level}" for level in ordered]
            header[at : at + 1] = new_names
            for level, name in zip(ordered, new_names):
                table[name] = [1.0 if v == level else 0.0 for v in values]


def _load_datasets(args):
    trial_header, trial_table = _read_table(args.trial)
    target_header, target_table = _read_table(args.target)
    if args.one_hot:
        _apply_one_hot(
            [[trial_header, trial_table], [target_header, target_table]],
            args.one_hot,
        )
    if not args.outcome:
        raise MissingColumn("--outcome is required for trial data")
    if not args.treatment:
        raise MissingColumn("--treatment is required for trial data")
    if args.covariates:
        covariates = args.covariates
    else:
        in_target = set(target_header)
        covariates = [
            c for c in trial_header
            if c in in_target and c not in (args.outcome, args.treatment)
        ]
    roles = {
        "covariates": covariates,
        "treatment": args.treatment,
        "outcome": args.outcome,
    }
    return validate_ingest(trial_table, target_table, roles)


# ----------------------------------------------------------------------
# shared estimation steps


def _selection_r2(pooled, method: str) -> float:
    design = add_intercept(pooled.covariates)
    if method == "logistic":
        fit = logistic_fit(design, pooled.selection)
        return logistic_pseudo_r2(design, pooled.selection, fit)
    return ols_fit(design, pooled.selection).r_squared


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("OVB_THREADS")
    return max(1, int(env)) if env else 1


def _data_manifest(args, ingest, command: str) -> dict:
    return {
        "command": command,
        "trial_file": args.trial,
        "target_file": args.target,
        "covariates": list(ingest.trial.covariate_names),
        "n_trial": ingest.trial.n,
        "n_target": ingest.target.n,
        "dropped_rows": {
            "trial": ingest.n_dropped_trial,
            "target": ingest.n_dropped_target,
        },
        "seed": args.seed,
        "versions": _versions(),
    }


# ----------------------------------------------------------------------
# analyze


def cmd_analyze(args) -> int:
    raw_mode = args.gamma is not None or args.lam is not None
    r2_mode = args.r2_tau is not None or args.r2_s is not None
    if raw_mode == r2_mode:
        raise InvalidInput(
            "provide exactly one sensitivity parameterization: "
            "--gamma/--lambda or --r2-tau/--r2-s"
        )
    if raw_mode and (args.gamma is None or args.lam is None):
        raise InvalidInput("--gamma and --lambda must be given together")
    if r2_mode and (args.r2_tau is None or args.r2_s is None):
        raise InvalidInput("--r2-tau and --r2-s must be given together")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ingest = _load_datasets(args)
    trial, target = ingest.trial, ingest.target
    pooled = pool(trial, target)

    models = fit_outcome_models(trial)
    if args.sigma_tau is not None:
        sigma_headline = max(args.sigma_tau)
        sigma_mode = SigmaTauMode.USER_SUPPLIED
        sigma_values = list(args.sigma_tau)
    else:
        est = sigma_tau_upper(models)
        sigma_headline = est.value
        sigma_mode = est.mode
        sigma_values = [est.value]

    estimate = bootstrap_ci(
        args.estimator, trial, target,
        n_boot=args.boot, alpha=args.alpha, seed=args.seed,
    )
    r2_s_x = _selection_r2(pooled, args.selection_r2)
    var_s = pooled.var_s
    rv = robustness_value(abs(estimate.tau_x_hat), sigma_headline, var_s, r2_s_x)

    bounds_meta = {}
    if raw_mode:
        headline = raw_bias_bound(SensitivityParamsRaw(max(args.gamma), max(args.lam)))
        bounds_meta["raw"] = {
            "gamma": max(args.gamma),
            "lambda": max(args.lam),
            "bound": headline,
            "assumptions": [
                "linear effect modification",
                "bounded moderation strength and bounded imbalance",
            ],
        }
    else:
        headline = r2_bias_bound(SensitivityParamsR2(
            r2_tau_u=max(args.r2_tau), r2_s_u=max(args.r2_s),
            sigma_tau=sigma_headline, var_s=var_s, r2_s_x=r2_s_x,
        ))
        bounds_meta["r2"] = {
            "r2_tau_u": max(args.r2_tau),
            "r2_s_u": max(args.r2_s),
            "sigma_tau": sigma_headline,
            "var_s": var_s,
            "r2_s_x": r2_s_x,
            "bound": headline,
            "assumptions": [
                "linear effect modification",
                "linear projection structure after covariate adjustment",
                "constant covariate-adjusted imbalance",
            ],
        }

    report = inflate_interval(
        estimate, headline,
        sigma_tau=sigma_headline, var_s=var_s, r2_s_x=r2_s_x,
    )

    benchmark_rows = None
    benchmark_note = None
    if trial.p >= 2:
        entries = benchmark_table(trial, pooled, rv)
        benchmark_rows = [
            {
                "covariate": e.covariate,
                "r2_s_z": e.r2_s_z,
                "r2_tau_z": e.r2_tau_z,
                "product": e.product,
                "exceeds_rv": e.exceeds_rv,
            }
            for e in entries
        ]
    else:
        benchmark_note = "benchmarking needs at least two covariates"

    manifest = _data_manifest(args, ingest, "analyze")
    manifest.update({
        "estimator": estimate.method.value,
        "n_boot": args.boot,
        "alpha": args.alpha,
        "selection_r2_method": args.selection_r2,
        "weight_clip": args.weight_clip,
    })

    payload = {
        "estimate": {
            "tau_x_hat": estimate.tau_x_hat,
            "ci_lower": estimate.ci_lower,
            "ci_upper": estimate.ci_upper,
            "method": estimate.method.value,
            "n_boot": estimate.n_boot,
            "alpha": estimate.alpha,
        },
        "bias_bound": report.bias_bound,
        "envelope": [report.envelope_lower, report.envelope_upper],
        "full_interval": [report.full_lower, report.full_upper],
        "rv_sign_reversal": report.rv_sign_reversal,
        "rv_equal_strength": math.sqrt(rv) if math.isfinite(rv) else math.inf,
        "sigma_tau": {"value": sigma_headline, "mode": sigma_mode.value},
        "var_s": var_s,
        "r2_s_x": r2_s_x,
        "bounds": bounds_meta,
        "benchmark": benchmark_rows,
        "benchmark_note": benchmark_note,
        "manifest": manifest,
    }
    _write_json(out / "report.json", payload)

    gridded = (raw_mode and (len(args.gamma) > 1 or len(args.lam) > 1)) or (
        r2_mode and (len(args.r2_tau) > 1 or len(args.r2_s) > 1 or len(sigma_values) > 1)
    )
    if gridded:
        rows = []
        if raw_mode:
            header = ["gamma", "lambda", "bias_bound",
                      "envelope_lower", "envelope_upper", "full_lower", "full_upper"]
            for g in args.gamma:
                for lam in args.lam:
                    b = raw_bias_bound(SensitivityParamsRaw(g, lam))
                    rep = inflate_interval(estimate, b)
                    rows.append([g, lam, b, rep.envelope_lower, rep.envelope_upper,
                                 rep.full_lower, rep.full_upper])
        else:
            header = ["r2_tau", "r2_s", "sigma_tau", "bias_bound",
                      "envelope_lower", "envelope_upper", "full_lower", "full_upper"]
            for rt in args.r2_tau:
                for rs in args.r2_s:
                    for sig in sigma_values:
                        b = r2_bias_bound(SensitivityParamsR2(
                            r2_tau_u=rt, r2_s_u=rs, sigma_tau=sig,
                            var_s=var_s, r2_s_x=r2_s_x,
                        ))
                        rep = inflate_interval(estimate, b)
                        rows.append([rt, rs, sig, b, rep.envelope_lower,
                                     rep.envelope_upper, rep.full_lower, rep.full_upper])
        _write_csv(out / "envelope.csv", header, rows)

    if args.contour_resolution:
        grid = contour_grid(sigma_headline, var_s, r2_s_x,
                            estimate.tau_x_hat, args.contour_resolution)
        _write_contour_csv(out / "contour.csv", grid)
    return 0


def _write_contour_csv(path: Path, grid) -> None:
    rows = []
    for i, rt in enumerate(grid.r2_tau_axis):
        for j, rs in enumerate(grid.r2_s_axis):
            rows.append([rt, rs, grid.bound[i, j], bool(grid.reversal_mask[i, j])])
    _write_csv(path, ["r2_tau", "r2_s", "bound", "reversal"], rows)


# ----------------------------------------------------------------------
# simulate


_DGP_TABLE = {
    1: (Dgp1Config, gen_dgp1),
    2: (Dgp2Config, gen_dgp2),
    3: (Dgp3Config, gen_dgp3),
}

_OVERRIDE_FLAGS = [
    "n_trial", "n_target", "p", "mu_shift", "gamma_r", "gamma_o",
    "beta_u", "tau0", "sigma", "beta_base", "beta_x_mod",
]


def _build_config(args):
    config_cls, generator = _DGP_TABLE[args.dgp]
    fields = set(config_cls.__dataclass_fields__)
    overrides = {}
    for name in _OVERRIDE_FLAGS:
        value = getattr(args, name)
        if value is None:
            continue
        if name not in fields:
            raise InvalidConfig(f"--{name.replace('_', '-')} does not apply to DGP {args.dgp}")
        overrides[name] = value
    return config_cls(**overrides), generator


def cmd_simulate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.reps < 100:
        print(f"warning: {args.reps} reps is below the 100-rep reporting threshold",
              file=sys.stderr)
    config, generator = _build_config(args)
    # a partial of the module-level generator stays picklable for worker processes
    bound_generator = functools.partial(generator, config)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # reporting-threshold warning already printed
        curve = coverage_experiment(
            bound_generator, args.gamma_grid, args.reps, args.seed,
            n_boot=args.boot, alpha=args.alpha,
            threads=_threads(args), estimator=args.estimator,
        )
    oracle = generator(config, 0)[2]

    rows = []
    for gamma, env, full in zip(curve.gamma_grid, curve.coverage_envelope,
                                curve.coverage_full_ci):
        rows.append([gamma, "coverage_envelope", env])
        rows.append([gamma, "coverage_full_ci", full])
    _write_csv(out / "coverage.csv", ["gamma", "metric", "value"], rows)

    config_dict = {k: getattr(config, k) for k in config.__dataclass_fields__}
    if isinstance(config_dict.get("beta_x"), tuple):
        config_dict["beta_x"] = list(config_dict["beta_x"])
    _write_json(out / "manifest.json", {
        "command": "simulate",
        "dgp": args.dgp,
        "config": config_dict,
        "seed": args.seed,
        "reps_requested": args.reps,
        "reps_completed": curve.n_reps,
        "failures": curve.n_failures,
        "gamma_grid": list(curve.gamma_grid),
        "n_boot": args.boot,
        "alpha": args.alpha,
        "estimator": args.estimator,
        "oracle": {
            "tau_star": oracle.tau_star,
            "tau_x": oracle.tau_x,
            "gamma_star": oracle.gamma_star,
            "delta_u_star": oracle.delta_u_star,
            "bias": oracle.bias,
        },
        "versions": _versions(),
    })
    return 0


# ----------------------------------------------------------------------
# benchmark


def cmd_benchmark(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ingest = _load_datasets(args)
    trial, target = ingest.trial, ingest.target
    if trial.p < 2:
        raise SingleCovariate("benchmarking needs at least two covariates")
    if args.hide is not None and args.hide not in trial.covariate_names:
        raise MissingColumn(f"--hide column '{args.hide}' is not a covariate")

    pooled = pool(trial, target)
    models = fit_outcome_models(trial)
    tau_hat = gformula_tate(models, target)
    sigma = args.sigma_tau[0] if args.sigma_tau else sigma_tau_upper(models).value
    r2_s_x = _selection_r2(pooled, args.selection_r2)
    rv = robustness_value(abs(tau_hat), sigma, pooled.var_s, r2_s_x)

    entries = benchmark_table(trial, pooled, rv)
    _write_csv(
        out / "benchmark.csv",
        ["covariate", "r2_s_z", "r2_tau_z", "product", "exceeds_rv", "rv_reference"],
        [[e.covariate, e.r2_s_z, e.r2_tau_z, e.product, e.exceeds_rv, rv]
         for e in entries],
    )

    if args.hide is not None:
        from .simulate import drop_covariate

        k = trial.covariate_names.index(args.hide)
        r2_s_z = next(e.r2_s_z for e in entries if e.covariate == args.hide)
        r2_tau_z = next(e.r2_tau_z for e in entries if e.covariate == args.hide)
        hid_trial, hid_target = drop_covariate(trial, target, k)
        hid_models = fit_outcome_models(hid_trial)
        hid_tau = gformula_tate(hid_models, hid_target)
        hid_pooled = pool(hid_trial, hid_target)
        hid_r2_s_x = _selection_r2(hid_pooled, args.selection_r2)
        hid_sigma = sigma_tau_upper(hid_models).value
        bound = r2_bias_bound(SensitivityParamsR2(
            r2_tau_u=r2_tau_z, r2_s_u=r2_s_z,
            sigma_tau=hid_sigma, var_s=hid_pooled.var_s, r2_s_x=hid_r2_s_x,
        ))
        manifest = _data_manifest(args, ingest, "benchmark")
        _write_json(out / "hide_report.json", {
            "hidden_covariate": args.hide,
            "pre_hiding": {"r2_s_z": r2_s_z, "r2_tau_z": r2_tau_z},
            "tau_x_hat_without": hid_tau,
            "tau_x_hat_with": tau_hat,
            "sigma_tau_upper_without": hid_sigma,
            "bias_bound": bound,
            "envelope": [hid_tau - bound, hid_tau + bound],
            "manifest": manifest,
        })
    return 0


# ----------------------------------------------------------------------
# contour


def cmd_contour(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = contour_grid(args.sigma_tau, args.var_s, args.r2_s_x,
                        args.tau_x, args.resolution)
    _write_contour_csv(out / "contour.csv", grid)
    return 0


# ----------------------------------------------------------------------
# parser


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}")


def _str_list(text: str) -> list[str]:
    return [tok.strip() for tok in text.split(",") if tok.strip() != ""]


def _add_data_flags(sub):
    sub.add_argument("--trial", required=True, help="trial CSV: covariates + treatment + outcome")
    sub.add_argument("--target", required=True, help="target CSV: covariates only")
    sub.add_argument("--outcome", help="trial outcome column")
    sub.add_argument("--treatment", help="trial treatment column")
    sub.add_argument("--covariates", type=_str_list,
                     help="comma-separated covariate columns (default: shared columns)")
    sub.add_argument("--one-hot", type=_str_list, default=None,
                     help="comma-separated categorical columns to expand")
    sub.add_argument("--selection-r2", choices=["lpm", "logistic"], default="lpm",
                     help="selection R^2 estimator (linear probability or McFadden)")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", default=".", help="output directory")
    sub.add_argument("--threads", type=int, default=None,
                     help="worker cap (default: OVB_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ovbgen",
        description="Trial generalization with omitted-variable-bias sensitivity analysis",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="subcommand", required=True)

    analyze = subs.add_parser("analyze", help="full sensitivity workflow on CSV data")
    _add_data_flags(analyze)
    analyze.add_argument("--gamma", type=_float_list, default=None,
                         help="moderation-strength bound(s)")
    analyze.add_argument("--lambda", dest="lam", type=_float_list, default=None,
                         help="imbalance bound(s)")
    analyze.add_argument("--r2-tau", type=_float_list, default=None,
                         help="partial R^2 of effect vs moderator")
    analyze.add_argument("--r2-s", type=_float_list, default=None,
                         help="partial R^2 of selection vs moderator")
    analyze.add_argument("--sigma-tau", type=_float_list, default=None,
                         help="residual heterogeneity scale(s); default: upper bound")
    analyze.add_argument("--boot", type=int, default=1000)
    analyze.add_argument("--alpha", type=float, default=0.05)
    analyze.add_argument("--estimator", choices=["gformula", "ipw"], default="gformula")
    analyze.add_argument("--weight-clip", type=float, default=50.0)
    analyze.add_argument("--contour-resolution", type=int, default=None,
                         help="also write contour.csv at this resolution")
    analyze.set_defaults(func=cmd_analyze)

    simulate = subs.add_parser("simulate", help="Monte Carlo coverage experiments")
    simulate.add_argument("--dgp", type=int, choices=[1, 2, 3], required=True)
    simulate.add_argument("--reps", type=int, default=500)
    simulate.add_argument("--gamma-grid", type=_float_list,
                          default=[0.0, 0.25, 0.5, 0.75, 1.0])
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--boot", type=int, default=1000)
    simulate.add_argument("--alpha", type=float, default=0.05)
    simulate.add_argument("--estimator", choices=["gformula", "ipw"], default="gformula")
    simulate.add_argument("--threads", type=int, default=None)
    simulate.add_argument("--out", default=".")
    for name in _OVERRIDE_FLAGS:
        flag = "--" + name.replace("_", "-")
        kind = int if name in ("n_trial", "n_target", "p") else float
        simulate.add_argument(flag, type=kind, default=None)
    simulate.set_defaults(func=cmd_simulate)

    bench = subs.add_parser("benchmark", help="per-covariate sensitivity benchmarks")
    _add_data_flags(bench)
    bench.add_argument("--sigma-tau", type=_float_list, default=None)
    bench.add_argument("--hide", default=None,
                       help="treat this covariate as unobserved and bound the damage")
    bench.set_defaults(func=cmd_benchmark)

    contour = subs.add_parser("contour", help="bias bound over the sensitivity grid")
    contour.add_argument("--sigma-tau", type=float, required=True)
    contour.add_argument("--var-s", type=float, required=True)
    contour.add_argument("--r2-s-x", type=float, required=True)
    contour.add_argument("--tau-x", type=float, required=True)
    contour.add_argument("--resolution", type=int, default=101)
    contour.add_argument("--out", default=".")
    contour.set_defaults(func=cmd_contour)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
