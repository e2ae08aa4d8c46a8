"""Random-horizon laws: samplers, exact tails, and heaviness regimes.

The regime tag drives which closed-form evaluator applies downstream:
``D1`` integrable horizons, ``D2`` regularly varying tails with index
lambda in (0, 1), ``D3`` slowly varying tails.  Tail functions are exposed
both at plain arguments and at log-arguments, because the critical scale
the evaluators feed in grows like exp(u^2 / 2).
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import NumericError, RegimeError, TableRangeError, ValidationError
from .streams import _U_FLOOR

D1, D2, D3 = "D1", "D2", "D3"

DETERMINISTIC = "deterministic"
EXPONENTIAL = "exponential"
PARETO = "pareto"
LOG_PARETO = "log-pareto"
CUSTOM_TAIL = "custom-tail"


@dataclass(frozen=True)
class HorizonDistribution:
    """A nonnegative horizon law with regime tag and optional cap.

    Sampling is by inverse transform of one uniform.  When ``t_cap`` is set,
    draws are truncated at the cap and flagged; the exact truncated mass
    P(T > t_cap) is available as ``tail(t_cap)``.
    """

    kind: str
    regime: str
    t0: float = None
    mean_value: float = None
    lambda_tail: float = None
    t_min: float = 1.0
    table: tuple = field(default=None, repr=False)
    t_cap: float = None

    def __post_init__(self):
        if self.regime not in (D1, D2, D3):
            raise ValidationError(f"unknown regime {self.regime!r}",
                                  field="horizon.regime")
        if self.t_cap is not None and self.t_cap <= 0:
            raise ValidationError("t_cap must be positive",
                                  field="horizon.t_cap")
        if self.kind == PARETO or (self.kind == CUSTOM_TAIL and self.regime == D2):
            if self.lambda_tail is None or not 0.0 < self.lambda_tail < 1.0:
                raise ValidationError("lambda_tail must lie in (0, 1)",
                                      field="horizon.lambda_tail")

    # -- tail functions ----------------------------------------------------

    def tail(self, t):
        """Exact P(T > t) for nonnegative t (scalar or array)."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValidationError("t must be nonnegative", field="t")
        if self.kind == DETERMINISTIC:
            out = (t < self.t0).astype(float)
        elif self.kind == EXPONENTIAL:
            out = np.exp(-t / self.mean_value)
        elif self.kind == PARETO:
            out = np.minimum(1.0, (np.maximum(t, self.t_min) / self.t_min)
                             ** -self.lambda_tail)
        elif self.kind == LOG_PARETO:
            with np.errstate(divide="ignore"):
                out = np.where(t >= math.e, 1.0 / np.log(np.maximum(t, math.e)),
                               1.0)
        else:
            knots, values = self.table
            if np.any(t > knots[-1]):
                raise TableRangeError(
                    f"tail queried at t={float(np.max(t)):g} beyond table "
                    f"end {knots[-1]:g}")
            out = np.interp(t, knots, values)
        return out if out.ndim else float(out)

    def log_tail_from_log(self, log_t: float) -> float:
        """ln P(T > exp(log_t)); usable when exp(log_t) overflows."""
        if self.kind == DETERMINISTIC:
            return 0.0 if log_t < math.log(self.t0) else -math.inf
        if self.kind == EXPONENTIAL:
            return -math.exp(log_t) / self.mean_value if log_t < 709 else -math.inf
        if self.kind == PARETO:
            return min(0.0, -self.lambda_tail * (log_t - math.log(self.t_min)))
        if self.kind == LOG_PARETO:
            return -math.log(log_t) if log_t > 1.0 else 0.0
        if log_t > 709 or math.exp(log_t) > self.table[0][-1]:
            raise TableRangeError(
                f"tail queried at log t = {log_t:g} beyond table end")
        return math.log(self.tail(math.exp(log_t)))

    def slowly_varying_part(self, t):
        """L(t): tail(t) * t**lambda for D2, tail(t) for D3."""
        if self.regime == D2:
            return self.tail(t) * np.asarray(t, dtype=float) ** self.lambda_tail
        if self.regime == D3:
            return self.tail(t)
        raise RegimeError("slowly varying part defined only for D2/D3 horizons",
                          field="horizon.regime")

    def log_slowly_varying_from_log(self, log_t: float) -> float:
        """ln L(exp(log_t)) in log-argument form."""
        if self.regime == D2:
            return self.log_tail_from_log(log_t) + self.lambda_tail * log_t
        if self.regime == D3:
            return self.log_tail_from_log(log_t)
        raise RegimeError("slowly varying part defined only for D2/D3 horizons",
                          field="horizon.regime")

    # -- sampling ----------------------------------------------------------

    @property
    def support_floor(self) -> float:
        if self.kind == PARETO:
            return self.t_min
        if self.kind == LOG_PARETO:
            return math.e
        if self.kind == CUSTOM_TAIL:
            return float(self.table[0][0])
        return 0.0

    def mean(self) -> float:
        """Declared or tabulated mean; defined for D1 horizons only."""
        if self.regime != D1:
            raise RegimeError("mean is used only for D1 horizons",
                              field="horizon.regime")
        if self.kind == DETERMINISTIC:
            return self.t0
        if self.kind == EXPONENTIAL:
            return self.mean_value
        if self.mean_value is not None:
            return self.mean_value
        knots, values = self.table
        return float(np.trapezoid(values, knots))

    def _inverse_tail(self, u: np.ndarray) -> np.ndarray:
        """Solve tail(T) = u for T; u in (0, 1]."""
        if self.kind == DETERMINISTIC:
            return np.full_like(u, float(self.t0))
        if self.kind == EXPONENTIAL:
            return -self.mean_value * np.log(u)
        if self.kind == PARETO:
            return self.t_min * u ** (-1.0 / self.lambda_tail)
        if self.kind == LOG_PARETO:
            return np.exp(1.0 / u)
        knots, values = self.table
        t = np.interp(u, values[::-1], knots[::-1])
        below = u < values[-1]
        if np.any(below):
            if self.t_cap is None:
                raise TableRangeError(
                    "inverse-transform draw fell beyond the tabulated tail "
                    "and no t_cap is configured")
            t = np.where(below, np.inf, t)
        return t

    def sample_batch(self, rng: np.random.Generator, n: int):
        """Draw n horizons; returns (values, capped_flags)."""
        u = np.maximum(rng.random(n), _U_FLOOR)
        t = self._inverse_tail(u)
        if self.t_cap is not None:
            capped = t > self.t_cap
            return np.minimum(t, self.t_cap), capped
        return t, np.zeros(n, dtype=bool)

    def sample(self, rng: np.random.Generator):
        """Draw one horizon; returns (value, capped_flag)."""
        t, capped = self.sample_batch(rng, 1)
        return float(t[0]), bool(capped[0])

    def truncated_mass(self) -> float:
        """Exact mass beyond the cap, 0 when uncapped."""
        return 0.0 if self.t_cap is None else float(self.tail(self.t_cap))


def deterministic(t0: float, t_cap: float = None) -> HorizonDistribution:
    if t0 < 0:
        raise ValidationError("t0 must be nonnegative", field="horizon.t0")
    return HorizonDistribution(DETERMINISTIC, D1, t0=float(t0), t_cap=t_cap)


def exponential(mean: float, t_cap: float = None) -> HorizonDistribution:
    if mean <= 0:
        raise ValidationError("mean must be positive", field="horizon.mean")
    return HorizonDistribution(EXPONENTIAL, D1, mean_value=float(mean),
                               t_cap=t_cap)


def pareto(lambda_tail: float, t_min: float = 1.0,
           t_cap: float = None) -> HorizonDistribution:
    """P(T > t) = (t / t_min)**(-lambda_tail) above t_min; index in (0, 1)."""
    if t_min <= 0:
        raise ValidationError("t_min must be positive", field="horizon.t_min")
    return HorizonDistribution(PARETO, D2, lambda_tail=float(lambda_tail),
                               t_min=float(t_min), t_cap=t_cap)


def log_pareto(t_cap: float = None) -> HorizonDistribution:
    """P(T > t) = 1 / ln t for t >= e; slowly varying (D3)."""
    return HorizonDistribution(LOG_PARETO, D3, t_cap=t_cap)


def custom_tail(t_knots, tail_values, regime: str, lambda_tail: float = None,
                mean: float = None, t_cap: float = None) -> HorizonDistribution:
    """Tabulated tail with declared regime; screened, not inferred."""
    t = np.asarray(t_knots, dtype=float)
    v = np.asarray(tail_values, dtype=float)
    if t.ndim != 1 or t.shape != v.shape or t.size < 2:
        raise ValidationError("table must be two equal 1-D columns",
                              field="horizon.table")
    if np.any(np.diff(t) <= 0):
        raise ValidationError("table knots must be strictly increasing",
                              field="horizon.table")
    if np.any(np.diff(v) > 0) or np.any(v < 0) or np.any(v > 1):
        raise ValidationError("tail must be non-increasing within [0, 1]",
                              field="horizon.table")
    return HorizonDistribution(CUSTOM_TAIL, regime, lambda_tail=lambda_tail,
                               mean_value=mean, table=(t, v), t_cap=t_cap)


def karamata_check(h: HorizonDistribution, x: float) -> float:
    """Ratio of the integrated tail on [0, x] to x * tail(x) / (1 - lambda).

    Tends to 1 as x grows for any D2 horizon; the integral is adaptive
    quadrature at relative tolerance 1e-8.
    """
    if h.regime != D2:
        raise RegimeError("karamata check applies to D2 horizons only",
                          field="horizon.regime")
    if x <= h.support_floor:
        raise ValidationError("x must exceed the support floor", field="x")
    breaks = [h.support_floor] if h.support_floor > 0 else None
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            integral, _ = integrate.quad(h.tail, 0.0, x, points=breaks,
                                         epsrel=1e-8, limit=200)
        except integrate.IntegrationWarning as exc:
            raise NumericError(f"tail quadrature did not converge: {exc}")
    return integral / (x * h.tail(x) / (1.0 - h.lambda_tail))
