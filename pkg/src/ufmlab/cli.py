"""Command-line entry point.

Subcommands: solve, optimize, spectrum, sweep, calibrate, check.
Configs are YAML trees; matrices are headerless CSV (one row per line);
label files hold one 1-based class index per line; reports are JSON.
Exit codes: 0 success, 1 failed checks, 2 config/validation error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np
import yaml

from . import calibration, descent, nc_metrics, spectral, theory
from .closed_form import (
    class_mean_matrix,
    class_probabilities,
    global_minimizer,
    logit_scale,
    mean_logit_matrix,
    optimal_loss,
    partial_orthogonal,
)
from .config import OptimizerConfig, ProblemConfig
from .core import ModelState, gradient_norm, softmax_cols, ufm_loss
from .descent import DivergenceError

FORMAT_VERSION = 1

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


def load_config(path: str, seed_override: int | None = None):
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    prob_raw = raw.get("problem", {})
    opt_raw = dict(raw.get("optimizer", {}))
    if seed_override is not None:
        opt_raw["seed"] = seed_override
    try:
        cfg = ProblemConfig(
            K=int(prob_raw["k"]),
            n=int(prob_raw["n"]),
            d=int(prob_raw["d"]),
            delta=float(prob_raw.get("delta", 0.0)),
            lambda_w=float(prob_raw.get("lambda_w", 5e-3)),
            lambda_h=float(prob_raw.get("lambda_h", 5e-3)),
            lambda_b=float(prob_raw.get("lambda_b", 5e-3)),
        )
        opt = OptimizerConfig(**{k: v for k, v in opt_raw.items()})
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
    return cfg, opt, raw


def resolved_config_dict(cfg: ProblemConfig, opt: OptimizerConfig) -> dict:
    return {
        "problem": {
            "k": cfg.K,
            "n": cfg.n,
            "d": cfg.d,
            "delta": cfg.delta,
            "lambda_w": cfg.lambda_w,
            "lambda_h": cfg.lambda_h,
            "lambda_b": cfg.lambda_b,
        },
        "optimizer": asdict(opt),
    }


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_report(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def read_matrix(path: str) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read matrix file {path}: {exc}") from exc


def read_labels(path: str) -> np.ndarray:
    """Label file: one 1-based class index per line; returned 0-based."""
    try:
        labels = np.loadtxt(path, dtype=int, ndmin=1)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read label file {path}: {exc}") from exc
    if np.any(labels < 1):
        raise ConfigError("labels must be 1-based positive integers")
    return labels - 1


def cmd_solve(args) -> int:
    cfg, opt, _ = load_config(args.config, args.seed)
    out = Path(args.out)
    a = logit_scale(cfg)
    p_t, p_n = class_probabilities(cfg)
    state = global_minimizer(cfg)
    h_bar = class_mean_matrix(cfg)
    report = {
        "format_version": FORMAT_VERSION,
        "config": resolved_config_dict(cfg, opt),
        "a_delta": a,
        "p_t": p_t,
        "p_n": p_n,
        "w_norm": float(np.linalg.norm(state.W)),
        "h_bar_norm": float(np.linalg.norm(h_bar)),
        "optimal_loss": optimal_loss(cfg),
        "mean_logit_matrix": mean_logit_matrix(cfg).tolist(),
        "stationarity_residual": gradient_norm(state, cfg),
    }
    write_report(out / "solve.json", report)
    print(f"wrote {out / 'solve.json'}")
    return EXIT_OK


TRAJECTORY_COLUMNS = [
    "iter", "loss", "nc1", "nc2", "nc3",
    "w_norm", "h_mean_norm", "grad_norm", "loss_gap",
]


def cmd_optimize(args) -> int:
    cfg, opt, _ = load_config(args.config, args.seed)
    out = Path(args.out)
    traj = descent.run(cfg, opt)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "trajectory.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for row in traj.rows:
            writer.writerow([getattr(row, c) for c in TRAJECTORY_COLUMNS])
    final = traj.rows[-1]
    summary = {
        "format_version": FORMAT_VERSION,
        "config": resolved_config_dict(cfg, opt),
        "converged": traj.converged,
        "iterations": final.iter,
        "final_loss": final.loss,
        "optimal_loss": traj.optimal_value,
        "final_loss_gap": final.loss_gap,
        "final_grad_norm": final.grad_norm,
        "final_nc1": final.nc1,
        "final_nc2": final.nc2,
        "final_nc3": final.nc3,
        "mean_logit_distance": descent.mean_logit_distance(traj.final_state, cfg),
    }
    write_report(out / "optimize.json", summary)
    print(f"wrote {out / 'trajectory.csv'} and {out / 'optimize.json'}")
    return EXIT_OK


def _spectrum_dict(report: spectral.SpectrumReport) -> dict:
    return {
        "eigenpairs": [
            {"value": v, "multiplicity": m} for v, m in sorted(report.eigenpairs)
        ],
        "condition_number": report.condition_number,
        "source": report.source,
        "degenerate": report.degenerate,
        "notes": report.notes,
    }


def cmd_spectrum(args) -> int:
    cfg, opt, _ = load_config(args.config, args.seed)
    out = Path(args.out)
    state = global_minimizer(cfg)
    ana_h = spectral.analytic_feature_hessian_spectrum(cfg)
    num_h_vals = np.linalg.eigvalsh(spectral.numeric_hessian_features(state, cfg)[0])
    dev_h, mults_h = spectral.compare_to_analytic(ana_h, num_h_vals)
    payload = {
        "format_version": FORMAT_VERSION,
        "config": resolved_config_dict(cfg, opt),
        "feature_hessian": {
            "analytic": _spectrum_dict(ana_h),
            "numeric": _spectrum_dict(spectral.numeric_feature_spectrum(state, cfg)),
            "max_relative_deviation": dev_h,
            "multiplicities_match": mults_h,
        },
    }
    if cfg.K >= 3:
        ana_w = spectral.analytic_classifier_hessian_spectrum(cfg)
        num_w_vals = np.linalg.eigvalsh(spectral.numeric_hessian_classifier(state, cfg))
        dev_w, mults_w = spectral.compare_to_analytic(ana_w, num_w_vals)
        payload["classifier_hessian"] = {
            "analytic": _spectrum_dict(ana_w),
            "numeric": _spectrum_dict(spectral.numeric_classifier_spectrum(state, cfg)),
            "max_relative_deviation": dev_w,
            "multiplicities_match": mults_w,
        }
    else:
        payload["classifier_hessian"] = {"skipped": "requires K >= 3"}
    write_report(out / "spectrum.json", payload)
    print(f"wrote {out / 'spectrum.json'}")
    return EXIT_OK


SWEEP_COLUMNS = [
    "delta", "a_delta", "w_norm", "kappa_h", "kappa_w",
    "iters_to_eps", "nc1", "nc2", "nc3",
]


def cmd_sweep(args) -> int:
    cfg, opt, raw = load_config(args.config, args.seed)
    out = Path(args.out)
    if args.deltas:
        deltas = [float(x) for x in args.deltas.split(",")]
    else:
        deltas = [float(x) for x in raw.get("sweep", {}).get("deltas", [])]
    if not deltas:
        raise ConfigError("no deltas given (use --deltas or sweep.deltas in config)")
    rows = descent.delta_sweep(cfg, deltas, opt)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow(
                ["" if getattr(row, c) is None else getattr(row, c) for c in SWEEP_COLUMNS]
            )
    summary = {
        "format_version": FORMAT_VERSION,
        "config": resolved_config_dict(cfg, opt),
        "deltas": deltas,
        "degenerate_deltas": [r.delta for r in rows if r.degenerate],
    }
    write_report(out / "sweep.json", summary)
    print(f"wrote {out / 'sweep.csv'} and {out / 'sweep.json'}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    out = Path(args.out)
    logits = read_matrix(args.logits)
    labels = read_labels(args.labels)
    try:
        ds = calibration.LogitDataset(logits, labels)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report = calibration.calibration_report(
        ds,
        bins=args.bins,
        fit_T=args.fit_temperature,
        holdout_fraction=args.holdout_fraction,
        seed=args.seed if args.seed is not None else 0,
    )
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "reliability.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_lower", "bin_upper", "confidence", "accuracy", "count"])
        for b in report.bins:
            writer.writerow([b.lower, b.upper, b.mean_confidence, b.accuracy, b.count])
    payload = {
        "format_version": FORMAT_VERSION,
        "bins": args.bins,
        "ece": report.ece,
        "accuracy": report.accuracy,
        "mean_entropy": report.mean_entropy,
        "temperature": report.temperature,
        "nll_before": report.nll_before,
        "nll_after": report.nll_after,
        "temperature_flag": report.temperature_flag,
        "samples": ds.M,
    }
    write_report(out / "calibration.json", payload)
    print(f"wrote {out / 'reliability.csv'} and {out / 'calibration.json'}")
    return EXIT_OK


def run_property_checks(perturb: float = 0.0, seed: int = 0):
    """Named numerical property suites; returns list of (name, ok, detail)."""
    rng = np.random.default_rng(seed)
    results = []

    a, b = rng.standard_normal(10_000), rng.standard_normal(10_000)
    slack = a * a / 2 + b * b / 2 - np.abs(a * b)
    results.append(
        ("youngs-inequality", bool(np.all(slack >= -1e-12)),
         f"min slack {slack.min():.3e}")
    )

    Z = rng.standard_normal((4, 7))
    W, H = theory.balanced_factorization(Z, 3.0)
    recon = float(np.linalg.norm(W.T @ H - Z))
    gap = theory.factorization_gap(W, H, 3.0)
    results.append(
        ("nuclear-norm-identity", recon < 1e-10 * np.linalg.norm(Z) and abs(gap) < 1e-10,
         f"reconstruction {recon:.3e}, gap {gap:.3e}")
    )

    worst = 0.0
    for _ in range(1000):
        k, n, r = rng.integers(2, 5), rng.integers(2, 6), rng.integers(1, 5)
        Wr = rng.standard_normal((r, k))
        Hr = rng.standard_normal((r, n))
        worst = min(worst, theory.factorization_gap(Wr, Hr, float(rng.uniform(0.1, 5.0))))
    results.append(
        ("factorization-lower-bound", worst >= -1e-10, f"min gap {worst:.3e}")
    )

    cfg = ProblemConfig(K=4, n=3, d=6, delta=0.1)
    state = global_minimizer(cfg)
    if perturb:
        state.W = state.W + perturb * rng.standard_normal(state.W.shape)
    fs = nc_metrics.FeatureSet.from_state(state, cfg)
    dual = theory.duality_gap(state.W, nc_metrics.centered_class_means(fs), cfg)
    results.append(("self-duality", dual < 1e-10, f"gap {dual:.3e}"))

    resid = gradient_norm(state, cfg)
    results.append(("stationarity", resid < 1e-8, f"residual {resid:.3e}"))

    opt = OptimizerConfig(learning_rate=0.5, momentum=0.9, max_iters=20_000,
                          loss_tol=1e-9, record_every=500, seed=seed)
    traj = descent.run(ProblemConfig(K=3, n=2, d=4, delta=0.1), opt,
                       compute_metrics=False)
    spread = theory.logit_spread(traj.final_state.logits(), 3, 2)
    results.append(("logit-collapse", spread < 1e-3, f"spread {spread:.3e}"))

    return results


def cmd_check(args) -> int:
    results = run_property_checks(perturb=args.perturb, seed=args.seed or 0)
    ok = True
    for name, passed, detail in results:
        ok &= passed
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ufmlab",
        description="Unconstrained-feature-model laboratory for label smoothing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="YAML run config")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override optimizer seed")

    p = sub.add_parser("solve", help="closed-form minimizer report")
    add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("optimize", help="gradient-descent run with trajectory CSV")
    add_common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("spectrum", help="analytic vs numeric Hessian spectra")
    add_common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", help="smoothing-parameter sweep table")
    add_common(p)
    p.add_argument("--deltas", help="comma-separated smoothing values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("calibrate", help="calibration report for (logits, labels)")
    p.add_argument("logits", help="headerless CSV, K rows x M columns")
    p.add_argument("labels", help="one 1-based class index per line")
    p.add_argument("--out", default="out")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--fit-temperature", action="store_true")
    p.add_argument("--holdout-fraction", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("check", help="run the numerical property suites")
    p.add_argument("--perturb", type=float, default=0.0,
                   help="inject a perturbation into the closed-form checks")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
