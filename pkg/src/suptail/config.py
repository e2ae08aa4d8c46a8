"""Experiment configuration: one INI file, fully determining every run.

Sections and keys are documented in the README.  The seed is mandatory so
no run ever depends on the wall clock; the config hash stamped into every
CSV is the git-blob SHA-1 of the file bytes.
"""

import configparser
import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import covariance, horizons
from .errors import ValidationError
from .montecarlo import DEFAULT_MAX_POINTS, GridPolicy
from .pickands import ExtrapolationPolicy

_FAMILY_ALIASES = {
    "stable_exp": covariance.STABLE_EXP,
    "stable-exp": covariance.STABLE_EXP,
    "ornstein_uhlenbeck": "ou",
    "ornstein-uhlenbeck": "ou",
    "ou": "ou",
    "custom": covariance.CUSTOM,
}

_HORIZON_KINDS = {
    "deterministic": horizons.DETERMINISTIC,
    "exponential": horizons.EXPONENTIAL,
    "pareto": horizons.PARETO,
    "log_pareto": horizons.LOG_PARETO,
    "log-pareto": horizons.LOG_PARETO,
    "custom_tail": horizons.CUSTOM_TAIL,
    "custom-tail": horizons.CUSTOM_TAIL,
}


def blob_sha1(data: bytes) -> str:
    """Git-style blob hash of raw bytes, truncated for stamping."""
    h = hashlib.sha1(b"blob %d\x00" % len(data) + data)
    return h.hexdigest()[:12]


@dataclass
class ExperimentConfig:
    """Validated experiment description built from one INI file."""

    model: covariance.CovarianceModel
    horizon: horizons.HorizonDistribution
    policy: GridPolicy
    pickands_policy: ExtrapolationPolicy
    pickands_alphas: tuple
    pickands_cache: str
    u_values: tuple
    x_values: tuple
    n_trials: int
    seed: int
    threads: int
    out_dir: str
    max_points_per_path: int
    config_hash: str
    source_path: str = ""
    t_max_check: float = 100.0
    n_probe: int = 50
    extras: dict = field(default_factory=dict)

    def require_u_values(self):
        if not self.u_values:
            raise ValidationError("at least one level is required",
                                  field="run.u_values")
        return self.u_values


def _floats(raw: str, fieldname: str) -> tuple:
    parts = [p for p in raw.replace(",", " ").split() if p]
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ValidationError(f"could not parse number list: {exc}",
                              field=fieldname)


def _get(cp, section, key, cast, default=None, required=False):
    fieldname = f"{section}.{key}"
    if not cp.has_option(section, key):
        if required:
            raise ValidationError("missing required key", field=fieldname)
        return default
    raw = cp.get(section, key).strip()
    try:
        return cast(raw)
    except ValidationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad value {raw!r}: {exc}", field=fieldname)


def _load_two_columns(path: str, fieldname: str):
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2)
    except OSError as exc:
        raise ValidationError(f"cannot read table: {exc}", field=fieldname)
    if data.shape[1] != 2:
        raise ValidationError("table must have exactly two columns",
                              field=fieldname)
    return data[:, 0], data[:, 1]


def _build_model(cp) -> covariance.CovarianceModel:
    family = _get(cp, "model", "family", str, required=True).lower()
    if family not in _FAMILY_ALIASES:
        raise ValidationError(f"unknown family {family!r}",
                              field="model.family")
    family = _FAMILY_ALIASES[family]
    c_coef = _get(cp, "model", "c_coef", float, default=1.0)
    if family == "ou":
        return covariance.ornstein_uhlenbeck(c_coef)
    alpha = _get(cp, "model", "alpha", float, required=True)
    if family == covariance.CUSTOM:
        path = _get(cp, "model", "table", str, required=True)
        knots, values = _load_two_columns(path, "model.table")
        return covariance.custom(knots, values, alpha, c_coef)
    return covariance.stable_exp(alpha, c_coef)


def _build_horizon(cp) -> horizons.HorizonDistribution:
    kind = _get(cp, "horizon", "kind", str, required=True).lower()
    if kind not in _HORIZON_KINDS:
        raise ValidationError(f"unknown horizon kind {kind!r}",
                              field="horizon.kind")
    kind = _HORIZON_KINDS[kind]
    t_cap = _get(cp, "horizon", "t_cap", float)
    if kind == horizons.DETERMINISTIC:
        t0 = _get(cp, "horizon", "t0", float, required=True)
        return horizons.deterministic(t0, t_cap=t_cap)
    if kind == horizons.EXPONENTIAL:
        mean = _get(cp, "horizon", "mean", float, required=True)
        return horizons.exponential(mean, t_cap=t_cap)
    if kind == horizons.PARETO:
        lam = _get(cp, "horizon", "lambda_tail", float, required=True)
        t_min = _get(cp, "horizon", "t_min", float, default=1.0)
        return horizons.pareto(lam, t_min=t_min, t_cap=t_cap)
    if kind == horizons.LOG_PARETO:
        return horizons.log_pareto(t_cap=t_cap)
    path = _get(cp, "horizon", "table", str, required=True)
    knots, values = _load_two_columns(path, "horizon.table")
    regime = _get(cp, "horizon", "regime", str, required=True).upper()
    lam = _get(cp, "horizon", "lambda_tail", float)
    mean = _get(cp, "horizon", "mean", float)
    return horizons.custom_tail(knots, values, regime, lambda_tail=lam,
                                mean=mean, t_cap=t_cap)


def load_config(path: str, seed_override: int = None,
                threads_override: int = None,
                out_override: str = None) -> ExperimentConfig:
    """Parse, validate, and assemble the experiment configuration."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read config: {exc}", field="config")
    cp = configparser.ConfigParser()
    try:
        cp.read_string(raw.decode("utf-8"))
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ValidationError(f"config does not parse: {exc}", field="config")
    for section in ("model", "horizon", "run"):
        if not cp.has_section(section):
            raise ValidationError("missing section", field=section)

    model = _build_model(cp)
    horizon = _build_horizon(cp)
    policy = GridPolicy(
        a_coef=_get(cp, "grid", "a_coef", float, default=0.25)
        if cp.has_section("grid") else 0.25,
        step_cap=_get(cp, "grid", "step_cap", float, default=0.05)
        if cp.has_section("grid") else 0.05)

    seed = seed_override
    if seed is None:
        seed = _get(cp, "run", "seed", int, required=True)
    u_values = _get(cp, "run", "u_values",
                    lambda raw: _floats(raw, "run.u_values"), default=())
    n_trials = _get(cp, "run", "n_trials", int, default=10_000)
    threads = threads_override
    if threads is None:
        threads = _get(cp, "run", "threads", int, default=1)
    if threads < 1:
        raise ValidationError("threads must be at least 1",
                              field="run.threads")
    out_dir = out_override or _get(cp, "run", "out_dir", str, default="runs")
    budget = _get(cp, "run", "max_points_per_path", int,
                  default=DEFAULT_MAX_POINTS)

    if cp.has_section("pickands"):
        ladder = ExtrapolationPolicy(
            s_values=_get(cp, "pickands", "s_values",
                          lambda raw: _floats(raw, "pickands.s_values"),
                          default=(2.0, 4.0, 8.0)),
            grid_steps=_get(cp, "pickands", "steps",
                            lambda raw: _floats(raw, "pickands.steps"),
                            default=(0.02, 0.01)),
            n_paths=_get(cp, "pickands", "n_paths", int, default=200_000),
            cauchy_tol=_get(cp, "pickands", "cauchy_tol", float, default=0.1))
        alphas = _get(cp, "pickands", "alphas",
                      lambda raw: _floats(raw, "pickands.alphas"),
                      default=(model.alpha,))
        cache = _get(cp, "pickands", "cache", str, default="pickands_cache.csv")
    else:
        ladder = ExtrapolationPolicy()
        alphas = (model.alpha,)
        cache = "pickands_cache.csv"

    x_values = (_get(cp, "lemma43", "x_values",
                     lambda raw: _floats(raw, "lemma43.x_values"),
                     default=(0.5, 1.0, 2.0))
                if cp.has_section("lemma43") else (0.5, 1.0, 2.0))

    return ExperimentConfig(
        model=model, horizon=horizon, policy=policy,
        pickands_policy=ladder, pickands_alphas=alphas,
        pickands_cache=cache, u_values=u_values, x_values=x_values,
        n_trials=n_trials, seed=seed, threads=threads, out_dir=out_dir,
        max_points_per_path=budget, config_hash=blob_sha1(raw),
        source_path=path,
        t_max_check=_get(cp, "model", "t_max_check", float, default=100.0),
        n_probe=_get(cp, "model", "n_probe", int, default=50))
