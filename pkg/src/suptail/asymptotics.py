"""Closed-form tail approximations, the critical scale, and regime dispatch.

Every evaluator for the heavy regimes works in log-space internally: the
critical scale grows like exp(u^2/2), so slowly varying factors receive the
logarithm of their argument and results carry an exact ``log_value``
alongside the (possibly underflowing) plain value.

The u exponent in the fixed-interval rate is 2/alpha, the same power that
appears in the critical scale m(u) and in the integrable-horizon constant;
a 1/alpha variant seen in some prints of the classical fixed-interval
result is intentionally not used.
"""

import math
from dataclasses import dataclass

from scipy.special import erfc, gammaln, log_ndtr

from . import horizons
from .covariance import CovarianceModel
from .errors import RegimeError, ValidationError
from .pickands import resolve_h_alpha

FIXED_INTERVAL = "fixed-interval"

PICKANDS = "pickands"
THM31 = "thm31"
THM32 = "thm32"
THM32_REMARK = "thm32-remark"
THM33 = "thm33"
THM33_REMARK = "thm33-remark"

LOG_2PI = math.log(2.0 * math.pi)


def psi(u):
    """Standard normal upper tail, exact via the complementary error function."""
    out = 0.5 * erfc(u / math.sqrt(2.0))
    return float(out) if getattr(out, "ndim", 0) == 0 else out


def psi_asymptotic(u: float) -> float:
    """Leading-order tail exp(-u^2/2) / (sqrt(2 pi) u); requires u > 0."""
    if u <= 0.0:
        raise ValidationError("asymptotic tail needs u > 0", field="u")
    return math.exp(-0.5 * u * u) / (math.sqrt(2.0 * math.pi) * u)


def log_psi(u: float) -> float:
    """ln of the normal upper tail, stable for large u."""
    return float(log_ndtr(-u))


def log_m_scale(u: float, model: CovarianceModel, h_alpha: float = None) -> float:
    """ln m(u) for the critical scale m(u) = 1 / (C^(1/a) H u^(2/a) Psi(u))."""
    if u <= 0.0:
        raise ValidationError("critical scale needs u > 0", field="u")
    h = resolve_h_alpha(model.alpha) if h_alpha is None else h_alpha
    if h <= 0.0:
        raise ValidationError("h_alpha must be positive", field="h_alpha")
    a = model.alpha
    return -(math.log(model.c_coef) / a + math.log(h)
             + (2.0 / a) * math.log(u) + log_psi(u))


def m_scale(u: float, model: CovarianceModel, h_alpha: float = None) -> float:
    """Critical horizon scale; intervals of length x*m(u) have
    non-exceedance probability about exp(-x)."""
    if u <= 0.0:
        raise ValidationError("critical scale needs u > 0", field="u")
    h = resolve_h_alpha(model.alpha) if h_alpha is None else h_alpha
    if h <= 0.0:
        raise ValidationError("h_alpha must be positive", field="h_alpha")
    a = model.alpha
    return 1.0 / (model.c_coef ** (1.0 / a) * h * u ** (2.0 / a) * psi(u))


@dataclass(frozen=True)
class AsymptoticResult:
    """Value of one closed-form approximation with provenance."""

    value: float
    log_value: float
    regime: str
    formula: str
    u: float
    alpha: float
    c_coef: float
    h_alpha: float
    horizon_kind: str = None
    remark_value: float = None
    remark_log_value: float = None


def pickands_fixed_interval(u: float, model: CovarianceModel, t_len: float,
                            h_alpha: float = None) -> AsymptoticResult:
    """Fixed-interval exceedance rate: t_len * C^(1/a) H u^(2/a) Psi(u).

    Identically t_len / m_scale(u); the interval of length m(u) has unit
    hazard.
    """
    if t_len <= 0.0:
        raise ValidationError("t_len must be positive", field="t_len")
    h = resolve_h_alpha(model.alpha) if h_alpha is None else h_alpha
    value = t_len / m_scale(u, model, h)
    log_value = math.log(t_len) - log_m_scale(u, model, h)
    return AsymptoticResult(value, log_value, FIXED_INTERVAL, PICKANDS,
                            u, model.alpha, model.c_coef, h,
                            remark_value=value, remark_log_value=log_value)


def thm31(u: float, model: CovarianceModel, mean_t: float,
          h_alpha: float = None) -> AsymptoticResult:
    """Integrable-horizon asymptotic: mean_t times the unit-interval rate."""
    if mean_t < 0.0:
        raise ValidationError("mean_t must be nonnegative", field="mean_t")
    h = resolve_h_alpha(model.alpha) if h_alpha is None else h_alpha
    unit = pickands_fixed_interval(u, model, 1.0, h)
    value = mean_t * unit.value
    log_value = (-math.inf if mean_t == 0.0
                 else math.log(mean_t) + unit.log_value)
    return AsymptoticResult(value, log_value, horizons.D1, THM31,
                            u, model.alpha, model.c_coef, h,
                            remark_value=value, remark_log_value=log_value)


def _log_arg(u: float, alpha: float) -> float:
    """ln of the slowly-varying argument u^((a-2)/a) * exp(u^2/2)."""
    return (alpha - 2.0) / alpha * math.log(u) + 0.5 * u * u


def thm32(u: float, model: CovarianceModel,
          horizon: horizons.HorizonDistribution,
          h_alpha: float = None) -> AsymptoticResult:
    """Regularly-varying-horizon asymptotic (index lambda in (0, 1)).

    log value = ln Gamma(1-lambda) + lambda ln H + (lambda/a) ln C
                - (lambda/2) ln 2 pi + ln L(arg)
                + lambda (2-a)/a * ln u - lambda u^2 / 2,

    with the slowly varying factor evaluated at the log-argument.  The
    companion remark form Gamma(1-lambda) * P(T > m(u)) differs by the
    Mills-ratio error [Psi_asym(u)/Psi(u)]^lambda -> 1.
    """
    if horizon.regime != horizons.D2:
        raise RegimeError("this evaluator applies to D2 horizons",
                          field="horizon.regime")
    if u <= 0.0:
        raise ValidationError("u must be positive", field="u")
    lam = horizon.lambda_tail
    if not 0.0 < lam < 1.0:
        raise ValidationError("lambda_tail must lie in (0, 1)",
                              field="horizon.lambda_tail")
    h = resolve_h_alpha(model.alpha) if h_alpha is None else h_alpha
    a = model.alpha
    log_value = (float(gammaln(1.0 - lam)) + lam * math.log(h)
                 + (lam / a) * math.log(model.c_coef) - 0.5 * lam * LOG_2PI
                 + horizon.log_slowly_varying_from_log(_log_arg(u, a))
                 + lam * (2.0 - a) / a * math.log(u) - 0.5 * lam * u * u)
    log_remark = (float(gammaln(1.0 - lam))
                  + horizon.log_tail_from_log(log_m_scale(u, model, h)))
    return AsymptoticResult(math.exp(log_value), log_value, horizons.D2,
                            THM32, u, model.alpha, model.c_coef, h,
                            horizon_kind=horizon.kind,
                            remark_value=math.exp(log_remark),
                            remark_log_value=log_remark)


def thm32_remark_form(u: float, model: CovarianceModel,
                      horizon: horizons.HorizonDistribution,
                      h_alpha: float = None) -> AsymptoticResult:
    """Gamma(1 - lambda) * P(T > m(u)) as a first-class result."""
    full = thm32(u, model, horizon, h_alpha)
    return AsymptoticResult(full.remark_value, full.remark_log_value,
                            horizons.D2, THM32_REMARK, u, model.alpha,
                            model.c_coef, full.h_alpha,
                            horizon_kind=horizon.kind,
                            remark_value=full.remark_value,
                            remark_log_value=full.remark_log_value)


def thm33(u: float, model: CovarianceModel,
          horizon: horizons.HorizonDistribution,
          h_alpha: float = None) -> AsymptoticResult:
    """Slowly-varying-horizon asymptotic: L evaluated at the log-argument.

    The remark form is P(T > m(u)); both are tail probabilities in [0, 1].
    """
    if horizon.regime != horizons.D3:
        raise RegimeError("this evaluator applies to D3 horizons",
                          field="horizon.regime")
    if u <= 0.0:
        raise ValidationError("u must be positive", field="u")
    h = resolve_h_alpha(model.alpha) if h_alpha is None else h_alpha
    log_value = horizon.log_slowly_varying_from_log(_log_arg(u, model.alpha))
    log_remark = horizon.log_tail_from_log(log_m_scale(u, model, h))
    return AsymptoticResult(math.exp(log_value), log_value, horizons.D3,
                            THM33, u, model.alpha, model.c_coef, h,
                            horizon_kind=horizon.kind,
                            remark_value=math.exp(log_remark),
                            remark_log_value=log_remark)


def thm33_remark_form(u: float, model: CovarianceModel,
                      horizon: horizons.HorizonDistribution,
                      h_alpha: float = None) -> AsymptoticResult:
    """P(T > m(u)) as a first-class result."""
    full = thm33(u, model, horizon, h_alpha)
    return AsymptoticResult(full.remark_value, full.remark_log_value,
                            horizons.D3, THM33_REMARK, u, model.alpha,
                            model.c_coef, full.h_alpha,
                            horizon_kind=horizon.kind,
                            remark_value=full.remark_value,
                            remark_log_value=full.remark_log_value)


def dispatch(u: float, model: CovarianceModel,
             horizon: horizons.HorizonDistribution,
             h_alpha: float = None) -> AsymptoticResult:
    """Route to the evaluator selected by the horizon's heaviness regime.

    Deterministic horizons use the fixed-interval form directly; other
    integrable horizons contribute through their mean.
    """
    if horizon.kind == horizons.DETERMINISTIC:
        result = pickands_fixed_interval(u, model, horizon.t0, h_alpha)
        return AsymptoticResult(result.value, result.log_value,
                                FIXED_INTERVAL, PICKANDS, u, model.alpha,
                                model.c_coef, result.h_alpha,
                                horizon_kind=horizon.kind,
                                remark_value=result.value,
                                remark_log_value=result.log_value)
    if horizon.regime == horizons.D1:
        result = thm31(u, model, horizon.mean(), h_alpha)
        return AsymptoticResult(result.value, result.log_value, horizons.D1,
                                THM31, u, model.alpha, model.c_coef,
                                result.h_alpha, horizon_kind=horizon.kind,
                                remark_value=result.value,
                                remark_log_value=result.log_value)
    if horizon.regime == horizons.D2:
        return thm32(u, model, horizon, h_alpha)
    if horizon.regime == horizons.D3:
        return thm33(u, model, horizon, h_alpha)
    raise RegimeError(f"horizon regime {horizon.regime!r} is unclassified",
                      field="horizon.regime")
