"""Command-line interface: ``commsir {limits,rf,simulate,curves,approx,compare}``.

Exit codes: 0 on success, 2 on invalid input, 3 when ``compare`` finds a
metric outside its threshold.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import approx, embed, runner
from .analytic import AnalyticDomainError, limit_quantities, p_rf
from .periods import PeriodDomainError, parse_period
from .reedfrost import ReedFrostError, rf_brute_pmf, rf_pmf
from .runner import ConfigError, ExperimentConfig
from .stats import Condition, binned_tv, discrete_tv, equal_width_bins

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_COMPARE_FAILED = 3

# default comparison thresholds
TV_RF = 0.05
TV_MIXTURE = 0.10
TOL_MEAN = 0.01
TOL_VAR_REL = 0.25
TV_BOREL = 0.05


class UsageError(ValueError):
    pass


def _grid(text: str) -> np.ndarray:
    try:
        a, b, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected START:STOP:STEP") from None
    if step <= 0 or b < a:
        raise UsageError(f"bad grid {text!r}; need STEP > 0 and STOP >= START")
    k = int(math.floor((b - a) / step + 1e-9))
    return np.round(a + step * np.arange(k + 1), 12)


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config; flags override its fields")
    p.add_argument("--n", type=int, help="community size")
    p.add_argument("--m", type=int, help="number of communities besides community 0")
    p.add_argument("--lw", type=float, dest="lambda_W", help="lambda_W = n beta_W")
    p.add_argument("--lg", type=float, dest="lambda_G", help="lambda_G = n^2 m beta_G")
    p.add_argument("--bw", type=float, dest="beta_W", help="per-pair within-community rate")
    p.add_argument("--bg", type=float, dest="beta_G", help="per-pair global rate")
    p.add_argument("--period", help="exp:RATE, const:VALUE or gamma:SHAPE,RATE")
    p.add_argument("--seed", type=int, dest="master_seed")
    p.add_argument("--workers", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--out", dest="outputs", help="output directory")
    p.add_argument("--condition", choices=[c.value for c in Condition])
    p.add_argument("--engine", choices=list(runner.ENGINES))
    p.add_argument("--bins", type=int)
    p.add_argument("--kernel", choices=["bfs", "chain"])


_CONFIG_KEYS = ("n", "m", "lambda_W", "lambda_G", "beta_W", "beta_G", "period", "master_seed", "workers",
                "replicates", "outputs", "condition", "engine", "bins", "kernel")


def _config(args) -> ExperimentConfig:
    overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    if args.config:
        # a flag for one rate family replaces the other family from the file
        data = json.loads(Path(args.config).read_text()) if Path(args.config).exists() else None
        if data is None:
            raise ConfigError("config", f"no such file: {args.config}")
        if not isinstance(data, dict):
            raise ConfigError("config", "expected a JSON object")
        if overrides["lambda_W"] is not None or overrides["lambda_G"] is not None:
            data.pop("beta_W", None)
            data.pop("beta_G", None)
        if overrides["beta_W"] is not None or overrides["beta_G"] is not None:
            data.pop("lambda_W", None)
            data.pop("lambda_G", None)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return ExperimentConfig.from_dict(data)
    return ExperimentConfig.from_dict({k: v for k, v in overrides.items() if v is not None})


def _emit(text: str, out: str | None, name: str) -> None:
    if out:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        (path / name).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_limits(args) -> int:
    if args.config:
        cfg = _config(args)
        period, (lw, lg), m = cfg.period, cfg.rates(), cfg.m
    else:
        if args.lambda_W is None or args.lambda_G is None:
            raise UsageError("limits needs --lw and --lg (or --config)")
        period, lw, lg, m = parse_period(args.period or "exp:1"), args.lambda_W, args.lambda_G, args.m
    print(json.dumps(runner.limits_dict(period, lw, lg, m), indent=2))
    return EXIT_OK


def cmd_rf(args) -> int:
    if args.p is None:
        if args.lambda_W is None or args.lambda_G is None:
            raise UsageError("rf needs --p, or --lw and --lg to derive it")
        q = limit_quantities(parse_period(args.period or "exp:1"), args.lambda_W, args.lambda_G)
        p = p_rf(q.lambda_G, q.pi_W, q.z_inf, q.mu_I, args.m)
    else:
        p = args.p
    pmf = rf_brute_pmf(args.m, p) if args.brute else rf_pmf(args.m, p)
    rows = [(int(k), repr(float(v))) for k, v in zip(pmf.support, pmf.probs)]
    _emit(_csv_text(("k", "prob"), rows), args.out, "rf.csv")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    paths = runner.run_experiment(cfg)
    summ = json.loads(paths["summaries"].read_text())
    print(json.dumps({
        "outputs": {k: str(v) for k, v in paths.items()},
        "replicates": cfg.replicates,
        "conditioned_counts": {c.value: summ[c.value]["count"] for c in Condition},
    }, indent=2))
    return EXIT_OK


def _curve_point(cfg: ExperimentConfig, g: int, t: float, replicates: int):
    est = embed.estimate_curves(cfg.params, [t], replicates, runner.replicate_rng(cfg.master_seed, g), cfg.kernel)
    return est.x[0], est.z[0], est.a[0], est.se_x[0], est.se_z[0], est.se_a[0]


def cmd_curves(args) -> int:
    cfg = _config(args)
    grid = _grid(args.grid)
    reps = cfg.replicates
    jobs = list(range(grid.size))
    if cfg.workers > 1 and grid.size > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            vals = list(pool.map(_curve_point, [cfg] * grid.size, jobs, grid, [reps] * grid.size))
    else:
        vals = [_curve_point(cfg, g, t, reps) for g, t in zip(jobs, grid)]
    arr = np.array(vals)
    tau_hat = embed.first_crossing(grid, arr[:, 2])
    rows = [[repr(float(t))] + [repr(float(v)) for v in row] for t, row in zip(grid, arr)]
    text = _csv_text(("t", "x", "z", "a", "se_x", "se_z", "se_a"), rows)
    footer = {"tau_hat": None if math.isnan(tau_hat) else tau_hat, "replicates": reps}
    text += "# " + json.dumps(footer) + "\n"
    _emit(text, args.outputs, "curves.csv")
    return EXIT_OK


def cmd_approx(args) -> int:
    cfg = _config(args)
    lw, lg = cfg.rates()
    q = limit_quantities(cfg.period, lw, lg)
    if args.law == "mixture":
        mix = approx.fixed_m_mixture(cfg.n, cfg.m, q)
        doc = {"law": "mixture", "components": [dict(weight=w, mean=mu, variance=v) for w, mu, v in mix.components]}
        pdf = mix.pdf
    elif args.law == "normal":
        mean, cov = approx.global_normal(cfg.n, cfg.m, q)
        zmean, zvar = approx.final_size_normal(cfg.n, cfg.m, q)
        doc = {"law": "normal", "mean": mean.tolist(), "cov": cov.tolist(),
               "final_size_mean": zmean, "final_size_variance": zvar}
        pdf = lambda x: approx.normal_pdf(zmean, zvar, x)  # noqa: E731
    else:
        k_max = args.k_max or cfg.m + 1
        pmf = approx.minor_outbreak_pmf(q, k_max, args.condition_on_extinction)
        doc = {"law": "minor", "condition_on_extinction": args.condition_on_extinction, "pmf": pmf.tolist()}
        pdf = None
    if args.pdf:
        if pdf is None:
            raise UsageError("--pdf needs a continuous law (mixture or normal)")
        if not args.grid:
            raise UsageError("--pdf needs --grid START:STOP:STEP")
        x = _grid(args.grid)
        rows = [(repr(float(a)), repr(float(b))) for a, b in zip(x, np.atleast_1d(pdf(x)))]
        _emit(_csv_text(("x", "density"), rows), cfg.outputs if args.outputs else None, f"{args.law}_pdf.csv")
    else:
        _emit(json.dumps(doc, indent=2) + "\n", cfg.outputs if args.outputs else None, f"{args.law}.json")
    return EXIT_OK


def _metric(name, value, threshold):
    return (name, float(value), float(threshold), bool(value <= threshold))


def comparison_metrics(cols: dict[str, np.ndarray], cfg: ExperimentConfig, bins: int | None = None) -> list:
    """Every comparison whose conditioning event occurred and whose law exists here.

    ``cols`` maps outcome column names to arrays (see :func:`runner.read_outcomes_csv`).
    """
    n, m = cfg.n, cfg.m
    p = cfg.params
    lw, lg = cfg.rates()
    q = limit_quantities(cfg.period, lw, lg)
    out = []
    major = cols["community0_major"].astype(bool)
    glob = cols["global_epidemic"].astype(bool)
    if major.any() and q.R0 > 1.0 and m >= 1:
        rf = rf_pmf(m, p_rf(lg, q.pi_W, q.z_inf, q.mu_I, m))
        out.append(_metric("tv_Z_C_vs_reed_frost", discrete_tv(cols["Z_C"][major], rf.probs, 1), TV_RF))
        zt = cols["Z_T"][major].astype(float)
        edges = equal_width_bins(zt, bins or cfg.bins)
        mix = approx.rf_mixture(n, rf, q)
        out.append(_metric("binned_tv_Z_T_vs_mixture", binned_tv(zt, mix.cdf, edges), TV_MIXTURE))
    if glob.any() and q.R_star > 1.0 and m >= 1:
        scale = n * m
        zt = cols["Z_T"][glob] / scale
        out.append(_metric("abs_err_mean_Ztilde_T", abs(zt.mean() - q.z_tau), TOL_MEAN))
        if zt.size > 1:
            var = m * zt.var(ddof=1)
            s22 = q.Sigma_N[1, 1]
            out.append(_metric("rel_err_m_var_Ztilde_T", abs(var - s22) / s22, TOL_VAR_REL))
        out.append(_metric("abs_err_mean_Zbar_C", abs((cols["Z_C"][glob] / m).mean() - q.x_tau), TOL_MEAN))
        out.append(_metric("abs_err_mean_Atilde", abs((cols["A_T"][glob] / scale).mean() - q.tau), TOL_MEAN))
    if (~glob).any() and q.R_star > 1.0 and math.isfinite(p.global_epidemic_threshold):
        borel = approx.minor_outbreak_pmf(q, m + 1, condition_on_extinction=True)
        out.append(_metric("tv_Z_C_not_global_vs_borel", discrete_tv(cols["Z_C"][~glob], borel, 0), TV_BOREL))
    return out


def cmd_compare(args) -> int:
    cfg = _config(args)
    if args.outcomes:
        cols = runner.read_outcomes_csv(args.outcomes)
    else:
        outcomes = runner.run_replicates(cfg)
        cols = runner.outcome_columns(outcomes)
    mask = condition_mask_cols(cols, cfg.condition)
    cols = {k: v[mask] for k, v in cols.items()}
    metrics = comparison_metrics(cols, cfg)
    if not metrics:
        raise UsageError("no comparison applies: no replicate satisfies any conditioning event with a known law")
    rows = [(name, repr(v), repr(t), str(ok).lower()) for name, v, t, ok in metrics]
    _emit(_csv_text(("metric", "value", "threshold", "pass"), rows), args.outputs, "compare.csv")
    return EXIT_OK if all(r[3] for r in metrics) else EXIT_COMPARE_FAILED


def condition_mask_cols(cols: dict[str, np.ndarray], condition: str) -> np.ndarray:
    cond = Condition(condition)
    if cond is Condition.NONE:
        return np.ones(cols["Z_T"].size, dtype=bool)
    if cond is Condition.COMMUNITY0_MAJOR:
        return cols["community0_major"].astype(bool)
    glob = cols["global_epidemic"].astype(bool)
    return glob if cond is Condition.GLOBAL_EPIDEMIC else ~glob


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="commsir", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("limits", help="limiting quantities as JSON")
    p.add_argument("--config")
    p.add_argument("--period")
    p.add_argument("--lw", type=float, dest="lambda_W")
    p.add_argument("--lg", type=float, dest="lambda_G")
    p.add_argument("--m", type=int, help="also report p_RF for this many communities")
    p.set_defaults(func=cmd_limits)

    p = sub.add_parser("rf", help="Reed-Frost final-size pmf as CSV (k, prob)")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--lw", type=float, dest="lambda_W")
    p.add_argument("--lg", type=float, dest="lambda_G")
    p.add_argument("--period")
    p.add_argument("--brute", action="store_true", help="use the chain-binomial recursion")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rf)

    p = sub.add_parser("simulate", help="run replicates and write all artifacts")
    _add_model_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("curves", help="Monte Carlo x(t), z(t), a(t) as CSV")
    _add_model_args(p)
    p.add_argument("--grid", default="0:2:0.05")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("approx", help="approximating laws as JSON, or densities as CSV")
    _add_model_args(p)
    p.add_argument("--law", choices=["mixture", "normal", "minor"], default="mixture")
    p.add_argument("--pdf", action="store_true")
    p.add_argument("--grid")
    p.add_argument("--k-max", type=int, dest="k_max")
    p.add_argument("--condition-on-extinction", action="store_true")
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("compare", help="compare simulated outcomes with the approximating laws")
    _add_model_args(p)
    p.add_argument("--outcomes", help="reuse an outcomes CSV instead of simulating")
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError, AnalyticDomainError, PeriodDomainError, ReedFrostError, ValueError) as exc:
        print(f"commsir {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
