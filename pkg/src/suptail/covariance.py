"""Stationary covariance models with local power behaviour at the origin.

The built-in family is r(t) = exp(-C |t|^alpha), which for every
alpha in (0, 2] and C > 0 is strictly decreasing, equals 1 - C|t|^alpha
+ o(|t|^alpha) near 0, and has r(t) log t -> 0 at infinity.  Tabulated
covariances may be supplied with declared (alpha, C); the declared values
are screened, not estimated.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import TableRangeError, ValidationError

STABLE_EXP = "stable-exp"
CUSTOM = "custom"

# Relative tolerance of the local-shape ratio test; overridable per call.
A1_DEFAULT_TOL = 0.01


@dataclass(frozen=True)
class CovarianceModel:
    """Stationary unit-variance covariance with shape (alpha, c_coef) at 0.

    Parameters
    ----------
    family : str
        ``"stable-exp"`` for r(t) = exp(-c_coef * t**alpha), or
        ``"custom"`` for a tabulated covariance.
    alpha : float
        Local-shape exponent, in (0, 2].
    c_coef : float
        Local-shape coefficient, positive.
    table : tuple of ndarray, optional
        For custom models, (t_knots, r_values) with t_knots[0] == 0 and
        r_values[0] == 1; evaluation interpolates linearly between knots.
    """

    family: str
    alpha: float
    c_coef: float
    table: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if self.family not in (STABLE_EXP, CUSTOM):
            raise ValidationError(f"unknown covariance family {self.family!r}",
                                  field="model.family")
        if not 0.0 < self.alpha <= 2.0:
            raise ValidationError("alpha must lie in (0, 2]", field="model.alpha")
        if self.c_coef <= 0.0:
            raise ValidationError("c_coef must be positive", field="model.c_coef")
        if self.family == CUSTOM:
            if self.table is None:
                raise ValidationError("custom model requires a table",
                                      field="model.table")
            t, r = self.table
            t = np.asarray(t, dtype=float)
            r = np.asarray(r, dtype=float)
            if t.ndim != 1 or t.shape != r.shape or t.size < 2:
                raise ValidationError("table must be two equal 1-D columns",
                                      field="model.table")
            if t[0] != 0.0 or abs(r[0] - 1.0) > 1e-12:
                raise ValidationError("table must start at (0, 1)",
                                      field="model.table")
            if np.any(np.diff(t) <= 0):
                raise ValidationError("table knots must be strictly increasing",
                                      field="model.table")
            if np.any(np.abs(r) > 1.0 + 1e-12):
                raise ValidationError("|r| must not exceed 1", field="model.table")
            object.__setattr__(self, "table", (t, r))

    def __call__(self, t):
        return evaluate(self, t)


def stable_exp(alpha: float, c_coef: float = 1.0) -> CovarianceModel:
    """r(t) = exp(-c_coef * t**alpha)."""
    return CovarianceModel(STABLE_EXP, alpha, c_coef)


def ornstein_uhlenbeck(c_coef: float = 1.0) -> CovarianceModel:
    """Exponential covariance, the alpha = 1 member of the family."""
    return stable_exp(1.0, c_coef)


def custom(t_knots, r_values, alpha: float, c_coef: float) -> CovarianceModel:
    """Tabulated covariance with declared local shape (alpha, c_coef)."""
    return CovarianceModel(CUSTOM, alpha, c_coef, table=(t_knots, r_values))


def evaluate(model: CovarianceModel, t):
    """Evaluate r(t) at nonnegative lag(s) t.

    Custom models raise :class:`TableRangeError` beyond their last knot.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("lags must be nonnegative", field="t")
    if model.family == STABLE_EXP:
        out = np.exp(-model.c_coef * t ** model.alpha)
    else:
        knots, values = model.table
        if np.any(t > knots[-1]):
            raise TableRangeError(
                f"lag {float(np.max(t)):g} beyond tabulated range "
                f"[0, {knots[-1]:g}]")
        out = np.interp(t, knots, values)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class AssumptionReport:
    """Screen of the three covariance assumptions; necessary conditions only.

    ``a1``: (1 - r(t)) / (C t^alpha) -> 1 along a probe sequence t -> 0.
    ``a2``: r(t) < 1 at every positive probe lag.
    ``a3``: |r(t) log t| decreasing toward 0 on a geometric grid.
    """

    a1_consistent: bool
    a2_consistent: bool
    a3_consistent: bool
    diagnostics: dict = field(repr=False, default_factory=dict)

    @property
    def all_consistent(self) -> bool:
        return self.a1_consistent and self.a2_consistent and self.a3_consistent

    def summary(self) -> str:
        word = {True: "consistent", False: "violated"}
        return (f"A1 {word[self.a1_consistent]}, "
                f"A2 {word[self.a2_consistent]}, "
                f"A3 {word[self.a3_consistent]}")


def check_assumptions(model: CovarianceModel, t_max: float, n_probe: int = 50,
                      a1_tol: float = A1_DEFAULT_TOL) -> AssumptionReport:
    """Probe the model for consistency with the three shape assumptions.

    The A1 probe starts where C t^alpha <= 0.02 so the first-order ratio
    test is meaningful for any (alpha, C), and descends geometrically.
    Numerical screens cannot prove the assumptions; the report only says
    whether the probes are consistent with them.
    """
    if t_max <= 1.0:
        raise ValidationError("t_max must exceed 1", field="t_max")
    if n_probe < 10:
        raise ValidationError("n_probe must be at least 10", field="n_probe")

    # A1: ratio test on decreasing lags.
    t_hi = min(1e-2, (0.02 / model.c_coef) ** (1.0 / model.alpha))
    t1 = np.geomspace(t_hi, t_hi * 1e-4, 9)
    try:
        r1 = np.asarray(evaluate(model, t1))
        ratio = (1.0 - r1) / (model.c_coef * t1 ** model.alpha)
        a1 = bool(abs(ratio[-1] - 1.0) <= a1_tol
                  and np.all(np.abs(ratio - 1.0) <= 10 * a1_tol))
    except TableRangeError:
        ratio = np.array([])
        a1 = False

    # A2: strict r < 1 on positive lags spread over (0, t_max].
    t2 = np.geomspace(t_hi, t_max, n_probe)
    try:
        r2 = np.asarray(evaluate(model, t2))
        a2 = bool(np.all(r2 < 1.0))
    except TableRangeError:
        r2 = np.array([])
        a2 = False

    # A3: |r log t| shrinking along a geometric grid above t = 2.
    t3 = np.geomspace(2.0, t_max, max(10, n_probe // 2))
    try:
        v3 = np.abs(np.asarray(evaluate(model, t3)) * np.log(t3))
        decreasing = np.all(np.diff(v3) <= 1e-12 + 0.05 * v3[:-1])
        a3 = bool(decreasing and v3[-1] <= 0.5 * max(v3[0], 1e-300))
    except TableRangeError:
        v3 = np.array([])
        a3 = False

    diag = {"a1_lags": t1, "a1_ratios": ratio,
            "a2_lags": t2, "a2_values": r2,
            "a3_lags": t3, "a3_values": v3}
    return AssumptionReport(a1, a2, a3, diag)
