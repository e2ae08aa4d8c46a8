"""Tail asymptotics of suprema of stationary Gaussian processes over
random horizons: closed forms, exact simulation, and Monte Carlo
validation."""

from .asymptotics import (AsymptoticResult, dispatch, log_m_scale, m_scale,
                          pickands_fixed_interval, psi, psi_asymptotic,
                          thm31, thm32, thm32_remark_form, thm33,
                          thm33_remark_form)
from .covariance import (AssumptionReport, CovarianceModel,
                         check_assumptions, custom, evaluate,
                         ornstein_uhlenbeck, stable_exp)
from .horizons import (HorizonDistribution, custom_tail, deterministic,
                       exponential, karamata_check, log_pareto, pareto)
from .montecarlo import (GridPolicy, McEstimate, estimate_sup_tail,
                         lemma43_check, regime_sweep)
from .pickands import (ExtrapolationPolicy, PickandsEstimate,
                       estimate_h_of_s, estimate_h_of_s_ladder,
                       estimate_pickands, resolve_h_alpha)
from .sampling import (EmbeddingRecord, GridSpec, PathSample,
                       plan_embedding, sample_fbm, sample_fbm_batch,
                       sample_path, sample_path_reference, sample_paths)

__version__ = "0.1.0"

__all__ = [
    "AssumptionReport", "AsymptoticResult", "CovarianceModel",
    "EmbeddingRecord", "ExtrapolationPolicy", "GridPolicy", "GridSpec",
    "HorizonDistribution", "McEstimate", "PathSample", "PickandsEstimate",
    "check_assumptions", "custom", "custom_tail", "deterministic",
    "dispatch", "estimate_h_of_s", "estimate_h_of_s_ladder",
    "estimate_pickands", "estimate_sup_tail", "evaluate", "exponential",
    "karamata_check", "lemma43_check", "log_m_scale", "log_pareto",
    "m_scale", "ornstein_uhlenbeck", "pareto", "pickands_fixed_interval",
    "plan_embedding", "psi", "psi_asymptotic", "regime_sweep",
    "resolve_h_alpha", "sample_fbm", "sample_fbm_batch", "sample_path",
    "sample_path_reference", "sample_paths", "stable_exp", "thm31",
    "thm32", "thm32_remark_form", "thm33", "thm33_remark_form",
]
