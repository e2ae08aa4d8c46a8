"""Configuration-driven experiment runner.

Every subcommand reads one INI config and writes CSV artifacts into the
output directory; rerunning with the same config byte-reproduces every
CSV.  Exit codes: 0 success, 2 validation, 3 numeric or embedding
failure, 4 memory budget.
"""

import argparse
import csv
import os
import sys

from . import asymptotics, covariance, report
from .config import ExperimentConfig, load_config
from .errors import BudgetError, SuptailError, ValidationError
from .montecarlo import estimate_sup_tail, lemma43_check, regime_sweep
from .pickands import ExtrapolationPolicy, cache_store, estimate_pickands, resolve_h_alpha

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_BUDGET = 4


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: str, fieldnames, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(row[name]) for name in fieldnames])
    return path


def _stamp(config: ExperimentConfig) -> dict:
    return {
        "seed": config.seed,
        "a_coef": config.policy.a_coef,
        "step_cap": config.policy.step_cap,
        "t_cap": config.horizon.t_cap if config.horizon.t_cap else 0.0,
        "config_hash": config.config_hash,
    }

_STAMP_FIELDS = ["seed", "a_coef", "step_cap", "t_cap", "config_hash"]


def _cache_path(config: ExperimentConfig) -> str:
    if os.path.isabs(config.pickands_cache):
        return config.pickands_cache
    return os.path.join(config.out_dir, config.pickands_cache)


def _resolve_h(config: ExperimentConfig) -> float:
    return resolve_h_alpha(config.model.alpha, cache_path=_cache_path(config))


def cmd_check_model(config: ExperimentConfig) -> int:
    result = covariance.check_assumptions(config.model, config.t_max_check,
                                          config.n_probe)
    stamp = _stamp(config)
    word = {True: "consistent", False: "violated"}
    rows = [{"assumption": name, "status": word[flag], **stamp}
            for name, flag in (("A1", result.a1_consistent),
                               ("A2", result.a2_consistent),
                               ("A3", result.a3_consistent))]
    path = _write_csv(os.path.join(config.out_dir, "check_model.csv"),
                      ["assumption", "status"] + _STAMP_FIELDS, rows)
    probe_rows = []
    diag = result.diagnostics
    for kind, tkey, vkey in (("a1_ratio", "a1_lags", "a1_ratios"),
                             ("a2_value", "a2_lags", "a2_values"),
                             ("a3_value", "a3_lags", "a3_values")):
        for t, v in zip(diag[tkey], diag[vkey]):
            probe_rows.append({"probe": kind, "t": float(t),
                               "value": float(v), **stamp})
    _write_csv(os.path.join(config.out_dir, "check_model_probes.csv"),
               ["probe", "t", "value"] + _STAMP_FIELDS, probe_rows)
    print(f"{result.summary()} -> {path}")
    return EXIT_OK if result.all_consistent else EXIT_OK


def cmd_pickands(config: ExperimentConfig) -> int:
    policy: ExtrapolationPolicy = config.pickands_policy
    cache = _cache_path(config)
    rows = []
    stamp = _stamp(config)
    for alpha in config.pickands_alphas:
        estimate = estimate_pickands(alpha, policy, config.seed,
                                     threads=config.threads)
        cache_store(cache, alpha, policy, estimate, config.seed)
        for s_val, rate in zip(policy.s_values, estimate.ladder):
            rows.append({"alpha": alpha, "s": s_val, "h_rate": rate,
                         "std_error": estimate.std_error,
                         "n_paths": estimate.n_paths,
                         "grid_step": estimate.grid_step,
                         "is_final": int(s_val == policy.s_values[-1]),
                         **stamp})
        print(f"alpha={alpha:g}: h_rate={estimate.h_rate:.6f} "
              f"+- {estimate.std_error:.6f} (ladder "
              f"{', '.join(f'{v:.4f}' for v in estimate.ladder)})")
    path = _write_csv(os.path.join(config.out_dir, "pickands.csv"),
                      ["alpha", "s", "h_rate", "std_error", "n_paths",
                       "grid_step", "is_final"] + _STAMP_FIELDS, rows)
    print(f"cache updated: {cache}; table: {path}")
    return EXIT_OK


def cmd_asymptotics(config: ExperimentConfig) -> int:
    h_alpha = _resolve_h(config)
    rows = []
    stamp = _stamp(config)
    for u in config.require_u_values():
        result = asymptotics.dispatch(u, config.model, config.horizon, h_alpha)
        ratio = (result.value / result.remark_value
                 if result.remark_value > 0 else float("nan"))
        rows.append({"u": u, "formula": result.formula, "value": result.value,
                     "log_value": result.log_value,
                     "remark_form_value": result.remark_value,
                     "ratio": ratio, **stamp})
    path = _write_csv(os.path.join(config.out_dir, "asymptotics.csv"),
                      ["u", "formula", "value", "log_value",
                       "remark_form_value", "ratio"] + _STAMP_FIELDS, rows)
    print(f"wrote {len(rows)} rows -> {path}")
    return EXIT_OK


def cmd_simulate(config: ExperimentConfig) -> int:
    h_alpha = _resolve_h(config)
    rows = []
    stamp = _stamp(config)
    for u in config.require_u_values():
        est = estimate_sup_tail(config.model, config.horizon, u,
                                config.n_trials, config.policy, config.seed,
                                threads=config.threads,
                                max_points_per_path=config.max_points_per_path)
        target = asymptotics.dispatch(u, config.model, config.horizon,
                                      h_alpha).remark_value
        ratio = est.probability / target if target > 0 else float("nan")
        rows.append({"u": u, "horizon": config.horizon.kind,
                     "estimate": est.probability,
                     "ci95_half_width": est.ci95_half_width,
                     "target": target, "ratio": ratio, "hits": est.hits,
                     "n_trials": est.n_trials,
                     "grid_step": est.grid_step_used,
                     "truncated_mass": est.truncated_mass, **stamp})
        print(f"u={u:g}: p={est.probability:.6g} "
              f"(+-{est.ci95_half_width:.2g}), target {target:.6g}")
    path = _write_csv(os.path.join(config.out_dir, "simulate.csv"),
                      ["u", "horizon", "estimate", "ci95_half_width",
                       "target", "ratio", "hits", "n_trials", "grid_step",
                       "truncated_mass"] + _STAMP_FIELDS, rows)
    print(f"wrote {len(rows)} rows -> {path}")
    return EXIT_OK


def cmd_lemma43(config: ExperimentConfig) -> int:
    h_alpha = _resolve_h(config)
    rows = []
    stamp = _stamp(config)
    for u in config.require_u_values():
        for x, est, target in lemma43_check(
                config.model, u, config.x_values, config.n_trials,
                config.policy, config.seed, h_alpha,
                threads=config.threads,
                max_points_per_path=config.max_points_per_path):
            rows.append({"u": u, "x": x, "estimate": est.probability,
                         "ci95_half_width": est.ci95_half_width,
                         "target": target,
                         "ratio": est.probability / target,
                         "deviation": abs(est.probability - target),
                         "hits": est.hits, "n_trials": est.n_trials,
                         "grid_step": est.grid_step_used, **stamp})
    path = _write_csv(os.path.join(config.out_dir, "lemma43.csv"),
                      ["u", "x", "estimate", "ci95_half_width", "target",
                       "ratio", "deviation", "hits", "n_trials",
                       "grid_step"] + _STAMP_FIELDS, rows)
    figure = report.render_lemma43_figure(
        rows, os.path.join(config.out_dir, "lemma43.png"))
    print(f"wrote {len(rows)} rows -> {path}; figure -> {figure}")
    return EXIT_OK


def cmd_report(config: ExperimentConfig) -> int:
    h_alpha = _resolve_h(config)
    rows = regime_sweep(config.model, config.horizon,
                        config.require_u_values(), config.n_trials,
                        config.policy, config.seed, h_alpha,
                        threads=config.threads,
                        max_points_per_path=config.max_points_per_path)
    stamp = _stamp(config)
    csv_rows = [{**row, **stamp} for row in rows]
    fields = ["u", "regime", "formula", "mc", "mc_lower", "mc_upper",
              "ci95_half_width", "asymptotic", "remark_form",
              "ratio_mc_to_asymptotic", "hits", "n_trials", "grid_step",
              "truncated_mass"] + _STAMP_FIELDS
    path = _write_csv(os.path.join(config.out_dir, "report.csv"),
                      fields, csv_rows)
    figure = report.render_ratio_figure(
        rows, os.path.join(config.out_dir, "report_ratio.png"))
    md = report.write_markdown(os.path.join(config.out_dir, "report.md"),
                               config, rows, "report.csv",
                               [os.path.basename(figure)])
    print(f"wrote {path}, {figure}, {md}")
    return EXIT_OK


_COMMANDS = {
    "check-model": cmd_check_model,
    "pickands": cmd_pickands,
    "asymptotics": cmd_asymptotics,
    "simulate": cmd_simulate,
    "lemma43": cmd_lemma43,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="suptail",
        description="Simulation and validation of supremum tail asymptotics "
                    "over random horizons")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", required=True, help="INI experiment file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads; never changes results")
        p.add_argument("--out", default=None,
                       help="override the output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, seed_override=args.seed,
                             threads_override=args.threads,
                             out_override=args.out)
        os.makedirs(config.out_dir, exist_ok=True)
        return _COMMANDS[args.command](config)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except SuptailError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
