"""Command-line interface: simulate | fit | evaluate | spectrum | acf.

Artifact conventions: CSV for series and predictions, TSV for plot data,
JSON (sorted keys) for structured results, so reruns with the same seed are
byte-identical. Exit codes: 0 success, 2 usage, 3 data error, 4 numeric
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .baselines import arma_one_step, fit_ar_yule_walker, fit_arma_css
from .datasets import load_lake_huron, load_series_a, synthetic_oxygen
from .errors import DataFormatError, FouError
from .estimator import FitConfig, FitResult, empirical_acf, fit, preprocess
from .foucore import AcfEvaluator, FouModel, SpectralDensity, acf
from .metrics import EvalReport, WillmottVariant, mae, rmse, rolling_curves, willmott_d, willmott_d1
from .predictor import one_step_predictions
from .sampler import sample_exact, simulate_operator

__all__ = ["main", "run_evaluation", "load_series_csv", "fit_result_to_dict",
           "eval_report_to_dict"]


# ---------------------------------------------------------------------------
# ingestion and serialization


def load_series_csv(path: str) -> np.ndarray:
    """One numeric column, optional single header line, UTF-8, LF or CRLF."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise DataFormatError(f"{path}: {e.strerror or e}") from e
    vals = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        if "," in text or "\t" in text:
            raise DataFormatError(
                f"{path}: line {lineno}: expected one numeric column, got {text!r}")
        try:
            vals.append(float(text))
        except ValueError:
            if lineno == 1:
                continue  # header
            raise DataFormatError(
                f"{path}: line {lineno}: not a number: {text!r}") from None
    if not vals:
        raise DataFormatError(f"{path}: no numeric rows")
    return np.asarray(vals, dtype=float)


def _write_json(obj, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def fit_result_to_dict(res: FitResult) -> dict:
    m = res.model
    return {
        "model": {"lambdas": [float(r) for r in m.rate_values],
                  "multiplicities": [int(x) for x in m.multiplicities],
                  "sigma": float(m.sigma), "hurst": float(m.H)},
        "objective": float(res.objective),
        "matched_lags": [[t, e, g] for t, e, g in res.matched_lags],
        "converged": bool(res.converged),
        "status": res.status,
        "seed": int(res.seed),
    }


def eval_report_to_dict(report: EvalReport) -> dict:
    return {"per_model": report.per_model, "rolling": report.rolling,
            "m_max": report.m_max, "metadata": report.metadata}


def _write_forecast_csv(path: str, result) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("index,target,prediction\n")
        n0 = len(result.targets)
        for i, (t, p) in enumerate(zip(result.targets, result.predictions)):
            fh.write(f"{i},{float(t)!r},{float(p)!r}\n")


# ---------------------------------------------------------------------------
# shared argument plumbing


def _add_model_args(sp, with_sigma_hurst=True):
    sp.add_argument("--lambdas", required=True,
                    help="comma-separated distinct rates, e.g. 1.0,0.3")
    sp.add_argument("--structure", default=None,
                    help="comma-separated multiplicities matching --lambdas (default all 1)")
    if with_sigma_hurst:
        sp.add_argument("--sigma", type=float, default=1.0)
        sp.add_argument("--hurst", type=float, default=0.75)


def _parse_model(parser, args) -> FouModel:
    try:
        rates = [float(s) for s in args.lambdas.split(",") if s.strip()]
    except ValueError:
        parser.error(f"--lambdas: not numeric: {args.lambdas!r}")
    if len(set(rates)) != len(rates):
        parser.error("--lambdas has a duplicate rate; repeated rates are "
                     "expressed with --structure multiplicities, e.g. "
                     "--lambdas 1.0 --structure 2")
    mults = None
    if args.structure:
        try:
            mults = [int(s) for s in args.structure.split(",") if s.strip()]
        except ValueError:
            parser.error(f"--structure: not integers: {args.structure!r}")
        if len(mults) != len(rates):
            parser.error("--structure length must match --lambdas")
    try:
        return FouModel.from_rates(rates, mults, sigma=args.sigma, hurst=args.hurst)
    except ValueError as e:
        parser.error(str(e))


def _parse_structure(parser, text: str) -> tuple[int, ...]:
    try:
        out = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        parser.error(f"--structure: not integers: {text!r}")
    if not out or any(v < 1 for v in out):
        parser.error("--structure needs positive multiplicities")
    return out


def _fou_label(structure) -> str:
    parts = []
    for i, m in enumerate(structure, start=1):
        parts.append(f"l{i}" + (f"^{m}" if m > 1 else ""))
    return "FOU(" + ",".join(parts) + ")"


# ---------------------------------------------------------------------------
# evaluation protocol (importable; the CLI and scripts share it)


def run_evaluation(values, *, structure=(1, 1), horizon_T=20.0, h_lags=10,
                   holdout=20, seed=0, detrend=False,
                   variant=WillmottVariant.STANDARD, ar_orders=(),
                   arma_orders=(), restarts=32, threads=1,
                   extra_metadata=None):
    """Fit FOU + baselines on one series, predict the last `holdout` points
    one step ahead, and score everything on original units.

    Every model sees the identical preprocessed series and the identical
    holdout indices; predictions only condition on strictly earlier
    observations. Returns (EvalReport, forecasts dict, FitResult).
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    if not 1 <= holdout < n:
        raise ValueError("holdout must be in 1..n-1")
    series = preprocess(values, detrend=detrend, horizon_T=horizon_T)

    jobs: dict[str, object] = {}
    fou_label = _fou_label(structure)

    def fit_fou():
        cfg = FitConfig(h_lags=h_lags, structure=tuple(structure),
                        restarts=restarts, seed=seed)
        return fit(series, cfg)

    def fit_ar(p):
        return lambda: fit_ar_yule_walker(series, p)

    def fit_arma(p, q):
        return lambda: fit_arma_css(series, p, q, restarts=max(4, restarts // 4),
                                    seed=seed)

    jobs[fou_label] = fit_fou
    for p in ar_orders:
        jobs[f"AR({p})"] = fit_ar(p)
    for p, q in arma_orders:
        jobs[f"ARMA({p},{q})"] = fit_arma(p, q)

    labels = list(jobs)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            futures = {lab: ex.submit(jobs[lab]) for lab in labels}
            fitted = {lab: futures[lab].result() for lab in labels}
    else:
        fitted = {lab: jobs[lab]() for lab in labels}

    fit_res: FitResult = fitted[fou_label]
    forecasts = {}
    per_model = {}
    rolling = {}
    for lab in labels:
        mod = fitted[lab]
        if lab == fou_label:
            fc = one_step_predictions(fit_res.model, series, holdout)
        else:
            fc = arma_one_step(mod, series, holdout)
        forecasts[lab] = fc
        t, p = fc.targets, fc.predictions
        per_model[lab] = {"rmse": rmse(t, p), "mae": mae(t, p),
                          "d": willmott_d(t, p, variant),
                          "d1": willmott_d1(t, p, variant)}
        rolling[lab] = rolling_curves(t, p, holdout, variant)

    meta = {
        "n": int(n), "horizon_T": float(horizon_T), "h_lags": int(h_lags),
        "holdout_indices": list(range(n - holdout, n)),
        "preprocessing": {"detrended": bool(detrend), "centered": True},
        "fitted_on": "full-series",
        "variant": WillmottVariant(variant).value,
        "seed": int(seed),
        "fou_fit": fit_result_to_dict(fit_res),
    }
    if extra_metadata:
        meta.update(extra_metadata)
    report = EvalReport(per_model=per_model, rolling=rolling, m_max=holdout,
                        metadata=meta)
    return report, forecasts, fit_res


def _write_table_tsv(path: str, report: EvalReport) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("Model\td\tRMSE\td1\tMAE\n")
        for label, d, r, d1, m in report.table_rows():
            fh.write(f"{label}\t{d:.4f}\t{r:.4f}\t{d1:.4f}\t{m:.4f}\n")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_simulate(parser, args) -> int:
    model = _parse_model(parser, args)
    if args.n < 1:
        parser.error("--n must be positive")
    if args.method == "exact":
        path = sample_exact(model, args.n, args.dt, args.seed)
    else:
        path = simulate_operator(model, args.n, args.dt, args.seed)
    g0 = acf(model, 0.0)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("value\n")
        for v in path.values:
            fh.write(f"{float(v)!r}\n")
    print(f"wrote {args.n} values to {args.out}; theoretical gamma(0) = {g0:.12g}")
    return 0


def _cmd_fit(parser, args) -> int:
    values = load_series_csv(args.input)
    structure = _parse_structure(parser, args.structure)
    series = preprocess(values, detrend=args.detrend, horizon_T=args.T)
    cfg = FitConfig(h_lags=args.h, structure=structure, restarts=args.restarts,
                    seed=args.seed, include_lag0=args.include_lag0)
    res = fit(series, cfg)
    _write_json(fit_result_to_dict(res), args.out)
    if args.acf_out:
        maxlag = args.acf_lags if args.acf_lags else max(2 * args.h, 20)
        maxlag = min(maxlag, series.n - 1)
        emp = empirical_acf(series, maxlag)
        ev = AcfEvaluator(res.model)
        with open(args.acf_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("lag_time\tempirical\tfitted\n")
            for i in range(maxlag + 1):
                t = i * series.dt
                fh.write(f"{float(t)!r}\t{float(emp[i])!r}\t{float(ev(t))!r}\n")
    lam = ", ".join(f"{r:.6g}" for r in res.model.rate_values)
    print(f"fit: lambdas=({lam}) sigma={res.model.sigma:.6g} "
          f"H={res.model.H:.6g} objective={res.objective:.6g} "
          f"converged={res.converged} -> {args.out}")
    return 0


def _parse_arma_grid(parser, text: str) -> list[tuple[int, int]]:
    out = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        bits = part.split(",")
        if len(bits) != 2:
            parser.error(f"--arma: expected p,q pairs separated by ';', got {part!r}")
        try:
            out.append((int(bits[0]), int(bits[1])))
        except ValueError:
            parser.error(f"--arma: not integers: {part!r}")
    return out


def _cmd_evaluate(parser, args) -> int:
    if args.holdout < 1:
        parser.error("--holdout must be >= 1")
    extra = {}
    if args.dataset:
        if args.dataset == "lake-huron":
            values = load_lake_huron()
        elif args.dataset == "series-a":
            values = load_series_a()
        else:
            values, meta = synthetic_oxygen(args.seed)
            extra["dataset_metadata"] = meta
        extra["dataset"] = args.dataset
    else:
        values = load_series_csv(args.input)
        extra["dataset"] = args.input
    ar_orders = [int(s) for s in args.ar.split(",") if s.strip()] if args.ar else []
    arma_orders = _parse_arma_grid(parser, args.arma) if args.arma else []
    structure = _parse_structure(parser, args.structure)
    variant = WillmottVariant(args.variant)
    report, forecasts, _ = run_evaluation(
        values, structure=structure, horizon_T=args.T, h_lags=args.h,
        holdout=args.holdout, seed=args.seed, detrend=args.detrend,
        variant=variant, ar_orders=ar_orders, arma_orders=arma_orders,
        restarts=args.restarts, threads=args.threads, extra_metadata=extra)
    _write_json(eval_report_to_dict(report), args.out)
    if args.table:
        _write_table_tsv(args.table, report)
    if args.predictions_dir:
        import os
        os.makedirs(args.predictions_dir, exist_ok=True)
        for label, fc in forecasts.items():
            safe = label.replace("(", "_").replace(")", "").replace(",", "-")
            safe = safe.replace("^", "x")
            _write_forecast_csv(os.path.join(args.predictions_dir, safe + ".csv"), fc)
    for label, d, r, d1, m in report.table_rows():
        print(f"{label}\td={d:.4f}\tRMSE={r:.4f}\td1={d1:.4f}\tMAE={m:.4f}")
    return 0


def _cmd_spectrum(parser, args) -> int:
    model = _parse_model(parser, args)
    dens = SpectralDensity(model)
    if args.points < 3 or args.xmax <= 0:
        parser.error("--points >= 3 and --xmax > 0 required")
    grid = np.linspace(-args.xmax, args.xmax, args.points)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        if dens.singular_at_zero:
            fh.write("# x=0 is a singularity of the spectral density for this model\n")
        fh.write("x\tdensity\n")
        for x in grid:
            if x == 0.0 and dens.singular_at_zero:
                fh.write("0.0\tsingular\n")
            else:
                fh.write(f"{float(x)!r}\t{float(dens(x))!r}\n")
    print(f"wrote spectral density on [{-args.xmax}, {args.xmax}] to {args.out}")
    return 0


def _cmd_acf(parser, args) -> int:
    model = _parse_model(parser, args)
    if args.points < 2 or args.tmax <= 0:
        parser.error("--points >= 2 and --tmax > 0 required")
    ev = AcfEvaluator(model)
    grid = np.linspace(0.0, args.tmax, args.points)
    vals = ev.grid(grid)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t\tacf\n")
        for t, g in zip(grid, vals):
            fh.write(f"{float(t)!r}\t{float(g)!r}\n")
    print(f"wrote acf on [0, {args.tmax}] to {args.out}; gamma(0) = {vals[0]:.12g}")
    return 0


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fou",
                                 description="Fractional iterated Ornstein-Uhlenbeck "
                                             "processes: simulation, fitting, "
                                             "prediction benchmarks.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="draw a path and write it as CSV")
    _add_model_args(sp)
    sp.add_argument("--n", type=int, default=512)
    sp.add_argument("--dt", type=float, default=0.05)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--method", choices=["exact", "operator"], default="exact")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("fit", help="fit a model to a CSV series")
    sp.add_argument("--input", required=True)
    sp.add_argument("--structure", default="1",
                    help="multiplicities, e.g. 1,1 for two distinct rates")
    sp.add_argument("--T", type=float, default=20.0)
    sp.add_argument("--h", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--restarts", type=int, default=32)
    sp.add_argument("--detrend", action="store_true")
    sp.add_argument("--include-lag0", action="store_true", dest="include_lag0")
    sp.add_argument("--out", required=True)
    sp.add_argument("--acf-out", dest="acf_out", default=None,
                    help="optional TSV of empirical vs fitted ACF")
    sp.add_argument("--acf-lags", dest="acf_lags", type=int, default=0)
    sp.set_defaults(func=_cmd_fit)

    sp = sub.add_parser("evaluate", help="holdout comparison against baselines")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--input")
    src.add_argument("--dataset",
                     choices=["lake-huron", "series-a", "synthetic-oxygen"])
    sp.add_argument("--structure", default="1,1")
    sp.add_argument("--T", type=float, default=20.0)
    sp.add_argument("--h", type=int, default=10)
    sp.add_argument("--holdout", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--restarts", type=int, default=32)
    sp.add_argument("--detrend", action="store_true")
    sp.add_argument("--variant", choices=["standard", "paper-literal"],
                    default="standard")
    sp.add_argument("--ar", default="", help="AR orders, e.g. 2 or 2,7")
    sp.add_argument("--arma", default="", help="ARMA orders, e.g. 1,1;3,3")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.add_argument("--table", default=None, help="optional TSV metrics table")
    sp.add_argument("--predictions-dir", dest="predictions_dir", default=None)
    sp.set_defaults(func=_cmd_evaluate)

    sp = sub.add_parser("spectrum", help="tabulate the spectral density")
    _add_model_args(sp)
    sp.add_argument("--xmax", type=float, default=10.0)
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_spectrum)

    sp = sub.add_parser("acf", help="tabulate the autocovariance")
    _add_model_args(sp)
    sp.add_argument("--tmax", type=float, default=5.0)
    sp.add_argument("--points", type=int, default=51)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_acf)
    return ap


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(parser, args)
    except DataFormatError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        # shape/constraint violations from the library (series too short,
        # h_lags vs n, ...) are data problems, not crashes
        print(f"data error: {e}", file=sys.stderr)
        return 3
    except FouError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
