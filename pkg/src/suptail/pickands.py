"""Monte Carlo estimation of the high-excursion rate constant.

The estimator follows the defining functional: h(S) is the expectation of
exp(max over a grid of [0, S] of sqrt(2) * B(t) - t**alpha), with B
fractional Brownian motion of Hurst alpha/2.  Because h(S) behaves like
rate * S + const for large S, the limiting rate is read off as the slope
between successive ladder rungs rather than as h(S)/S, which carries a
const/S bias that does not vanish at desk-scale S.  Discretization bias is
one-sided (a grid maximum undershoots the continuous one); each rung pairs
two nested grids and applies Richardson extrapolation in the step, with
bias order taken as step**(alpha/2) (heuristic, matching the local
increment scale).

Common random numbers: all rungs and both grids are evaluated on the same
simulated fine paths, so ladder differences and extrapolation combos are
low-variance and the S-monotonicity of h(S) holds pathwise.
"""

import csv
import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DependencyError, NonConvergenceError, ValidationError
from .sampling import GridSpec, sample_fbm_batch
from .streams import OP_PICKANDS, chunk_sizes, substream

SQRT2 = math.sqrt(2.0)

# Closed forms: alpha = 1 gives 1, alpha = 2 gives 1/sqrt(pi).
CLOSED_FORMS = {1.0: 1.0, 2.0: 1.0 / math.sqrt(math.pi)}

DEFAULT_CHUNK = 4096


@dataclass(frozen=True)
class ExtrapolationPolicy:
    """Ladder of horizons and nested grid steps for the rate estimate."""

    s_values: tuple = (2.0, 4.0, 8.0)
    grid_steps: tuple = (0.02, 0.01)
    n_paths: int = 200_000
    cauchy_tol: float = 0.1

    def __post_init__(self):
        s = tuple(float(v) for v in self.s_values)
        steps = tuple(float(v) for v in self.grid_steps)
        if not s or any(b <= a for a, b in zip(s, s[1:])):
            raise ValidationError("s_values must be strictly increasing",
                                  field="pickands.s_values")
        if len(steps) not in (1, 2):
            raise ValidationError("grid_steps takes one or two steps",
                                  field="pickands.steps")
        if len(steps) == 2 and abs(steps[0] / steps[1] - 2.0) > 1e-9:
            raise ValidationError("coarse step must be twice the fine step",
                                  field="pickands.steps")
        coarse = steps[0]
        for sv in s:
            if abs(sv / coarse - round(sv / coarse)) > 1e-9:
                raise ValidationError(
                    f"S={sv:g} is not a multiple of the coarse step {coarse:g}",
                    field="pickands.s_values")
        object.__setattr__(self, "s_values", s)
        object.__setattr__(self, "grid_steps", steps)

    def fingerprint(self) -> str:
        key = repr((self.s_values, self.grid_steps, self.n_paths))
        return hashlib.sha1(key.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class PickandsEstimate:
    """Estimate of the rate constant at one ladder state."""

    alpha: float
    s_horizon: float
    grid_step: float
    n_paths: int
    h_of_s: float
    h_rate: float
    std_error: float
    ladder: tuple = ()
    ladder_diffs: tuple = ()
    monotone_trend: bool = None
    single_point_ladder: bool = False


def _ladder_sums(alpha: float, s_values, fine_step: float, stride: int,
                 n_paths: int, seed: int, threads: int, chunk: int,
                 rich_denom: float):
    """Accumulate per-path sums for every ladder cell.

    Returns (n, sum/sumsq of the extrapolated h values per rung, sum/sumsq
    of the per-path slope combinations per rung).  Chunks are combined in
    schedule order so the result is independent of thread count.
    """
    s = np.asarray(s_values, dtype=float)
    n_fine = int(round(s[-1] / fine_step))
    cuts = np.rint(s / fine_step).astype(int)
    if np.any(np.abs(cuts * fine_step - s) > 1e-9):
        raise ValidationError("every S must sit on the fine grid",
                              field="pickands.s_values")
    grid = GridSpec(fine_step, n_fine + 1)
    times = grid.times()
    drift = times ** alpha
    ds = np.diff(np.concatenate(([0.0], s)))
    hurst = alpha / 2.0

    def run_chunk(args):
        index, size = args
        rng = substream(seed, OP_PICKANDS, index)
        paths = sample_fbm_batch(hurst, grid, rng, size)
        z = SQRT2 * paths - drift
        run = np.maximum.accumulate(z, axis=1)
        vals = np.exp(run[:, cuts])
        if stride > 1:
            run_c = np.maximum.accumulate(z[:, ::stride], axis=1)
            vals_c = np.exp(run_c[:, cuts // stride])
            vals = vals + (vals - vals_c) / rich_denom
        slopes = np.diff(vals, axis=1, prepend=0.0) / ds
        return (size,
                vals.sum(axis=0), (vals ** 2).sum(axis=0),
                slopes.sum(axis=0), (slopes ** 2).sum(axis=0))

    schedule = list(enumerate(chunk_sizes(n_paths, chunk)))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_chunk, schedule))
    else:
        results = [run_chunk(job) for job in schedule]

    k = len(s)
    total = 0
    sums = [np.zeros(k) for _ in range(4)]
    for size, *parts in results:
        total += size
        for acc, part in zip(sums, parts):
            acc += part
    return total, *sums


def _mean_se(n: int, total: np.ndarray, total_sq: np.ndarray):
    mean = total / n
    var = np.maximum(total_sq - n * mean ** 2, 0.0) / max(n - 1, 1)
    return mean, np.sqrt(var / n)


def estimate_h_of_s(alpha: float, s_horizon: float, grid_step: float,
                    n_paths: int, seed: int, threads: int = 1,
                    chunk: int = DEFAULT_CHUNK) -> PickandsEstimate:
    """Estimate h(S) = E exp(sup over the grid of sqrt(2) B(t) - t**alpha).

    The reported ``h_rate`` is the definitional h(S)/S; see the module
    docstring for why the limiting constant is better read from ladder
    slopes.  A horizon below one grid step degenerates to the single point
    {0}, where the value is exactly 1.
    """
    if not 0.0 < alpha <= 2.0:
        raise ValidationError("alpha must lie in (0, 2]", field="alpha")
    if grid_step > 0.05:
        raise ValidationError("grid_step must be at most 0.05",
                              field="grid_step")
    if s_horizon <= 0.0:
        raise ValidationError("s_horizon must be positive", field="s_horizon")
    if n_paths < 100:
        raise ValidationError("n_paths must be at least 100", field="n_paths")
    if int(s_horizon / grid_step + 1e-9) == 0:
        return PickandsEstimate(alpha, s_horizon, grid_step, n_paths,
                                h_of_s=1.0, h_rate=1.0 / s_horizon,
                                std_error=0.0)
    k_pts = int(s_horizon / grid_step + 1e-9)
    span = k_pts * grid_step
    n, tot, tot_sq, _, _ = _ladder_sums(alpha, [span], grid_step, 1,
                                        n_paths, seed, threads, chunk, 1.0)
    mean, se = _mean_se(n, tot, tot_sq)
    return PickandsEstimate(alpha, s_horizon, grid_step, n_paths,
                            h_of_s=float(mean[0]),
                            h_rate=float(mean[0] / s_horizon),
                            std_error=float(se[0]))


def estimate_h_of_s_ladder(alpha: float, s_values, grid_step: float,
                           n_paths: int, seed: int, threads: int = 1,
                           chunk: int = DEFAULT_CHUNK):
    """h(S) estimates at several S from one common set of paths.

    Shared paths make the estimates comparable pathwise: h(S) is
    non-decreasing in S by construction.
    """
    n, tot, tot_sq, _, _ = _ladder_sums(alpha, s_values, grid_step, 1,
                                        n_paths, seed, threads, chunk, 1.0)
    means, ses = _mean_se(n, tot, tot_sq)
    return [PickandsEstimate(alpha, float(sv), grid_step, n,
                             h_of_s=float(m), h_rate=float(m / sv),
                             std_error=float(se))
            for sv, m, se in zip(s_values, means, ses)]


def estimate_pickands(alpha: float, policy: ExtrapolationPolicy, seed: int,
                      threads: int = 1,
                      chunk: int = DEFAULT_CHUNK) -> PickandsEstimate:
    """Rate-constant estimate from the ladder, with a Cauchy stability gate.

    The ladder entries are slope estimates between successive rungs (the
    first entry is h(S_1)/S_1).  The returned ``h_rate`` is the slope at
    the largest S; the run fails with :class:`NonConvergenceError` when the
    last two ladder entries differ by more than ``cauchy_tol``.
    """
    if not 0.0 < alpha <= 2.0:
        raise ValidationError("alpha must lie in (0, 2]", field="alpha")
    if policy.n_paths < 100:
        raise ValidationError("n_paths must be at least 100",
                              field="pickands.n_paths")
    fine = policy.grid_steps[-1]
    stride = 2 if len(policy.grid_steps) == 2 else 1
    rich_denom = 2.0 ** (alpha / 2.0) - 1.0
    n, tot_r, tot_r_sq, tot_y, tot_y_sq = _ladder_sums(
        alpha, policy.s_values, fine, stride, policy.n_paths, seed,
        threads, chunk, rich_denom)
    h_mean, _ = _mean_se(n, tot_r, tot_r_sq)
    y_mean, y_se = _mean_se(n, tot_y, tot_y_sq)

    ladder = tuple(float(v) for v in y_mean)
    diffs = tuple(float(b - a) for a, b in zip(ladder, ladder[1:]))
    estimate = PickandsEstimate(
        alpha, float(policy.s_values[-1]), fine, n,
        h_of_s=float(h_mean[-1]), h_rate=ladder[-1],
        std_error=float(y_se[-1]), ladder=ladder, ladder_diffs=diffs,
        monotone_trend=bool(all(abs(b) <= abs(a) + 1e-12
                                for a, b in zip(diffs, diffs[1:]))),
        single_point_ladder=len(ladder) == 1)
    if len(ladder) >= 2 and abs(diffs[-1]) > policy.cauchy_tol:
        raise NonConvergenceError(
            f"ladder not stabilizing: last gap {diffs[-1]:+.4f} exceeds "
            f"tolerance {policy.cauchy_tol:g}; ladder {ladder}",
            ladder=ladder)
    return estimate


# --- closed forms and the on-disk cache ------------------------------------

CACHE_COLUMNS = ["alpha", "ladder_hash", "s", "step", "n_paths",
                 "h_rate", "std_error", "seed"]


def closed_form(alpha: float):
    """Known exact rate constants, or None."""
    return CLOSED_FORMS.get(float(alpha))


def cache_store(path: str, alpha: float, policy: ExtrapolationPolicy,
                estimate: PickandsEstimate, seed: int) -> None:
    """Insert or replace the cache rows of (alpha, ladder)."""
    fingerprint = policy.fingerprint()
    rows = []
    if os.path.exists(path):
        with open(path, newline="") as fh:
            rows = [r for r in csv.DictReader(fh)
                    if not (float(r["alpha"]) == alpha
                            and r["ladder_hash"] == fingerprint)]
    for s_val, rate in zip(policy.s_values, estimate.ladder):
        rows.append({"alpha": repr(float(alpha)), "ladder_hash": fingerprint,
                     "s": repr(float(s_val)), "step": repr(estimate.grid_step),
                     "n_paths": str(estimate.n_paths),
                     "h_rate": repr(float(rate)),
                     "std_error": repr(estimate.std_error),
                     "seed": str(seed)})
    rows.sort(key=lambda r: (float(r["alpha"]), r["ladder_hash"],
                             float(r["s"])))
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CACHE_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def cache_lookup(path: str, alpha: float):
    """Rate at the largest cached S for this alpha, or None."""
    if not path or not os.path.exists(path):
        return None
    best = None
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            if float(row["alpha"]) == float(alpha):
                key = float(row["s"])
                if best is None or key > best[0]:
                    best = (key, float(row["h_rate"]))
    return None if best is None else best[1]


def resolve_h_alpha(alpha: float, cache_path: str = None) -> float:
    """Closed form if known, otherwise the cache; error with instructions."""
    value = closed_form(alpha)
    if value is not None:
        return value
    value = cache_lookup(cache_path, alpha)
    if value is not None:
        return value
    raise DependencyError(
        f"no rate constant available for alpha={alpha:g}; run the "
        f"`pickands` subcommand to populate the cache")
