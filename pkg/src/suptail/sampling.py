"""Exact-in-law Gaussian path simulation on uniform grids.

Stationary paths are drawn by circulant embedding: the covariance sequence
r(k * step), k = 0..M-1 (wrapped symmetrically), is diagonalized by the FFT,
and one real path of M points costs one length-M/2+1 inverse real FFT plus M
standard normals.  Fractional Brownian motion comes from cumulated
fractional Gaussian noise generated the same way.  A dense application of
the identical spectral factorization and a Cholesky sampler are provided as
small-n references.

Spectral construction (M even, lam = FFT eigenvalues of the embedded row,
g = i.i.d. standard normals):

    A[0]    = sqrt(M * lam[0])     * g[0]
    A[M/2]  = sqrt(M * lam[M/2])   * g[1]
    A[k]    = sqrt(M * lam[k] / 2) * (g[2k] + 1j * g[2k+1]),  0 < k < M/2
    path    = irfft(A, M)[:n_points]

which gives E[path_j path_l] = (1/M) sum_k lam_k cos(2 pi k (j-l) / M),
the embedded circulant covariance, exactly.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, toeplitz

from . import covariance as cov
from .errors import EmbeddingError, ValidationError
from .streams import normals

# Negative-eigenvalue policy: clip when the relative clipped mass is below
# CLIP_TOL, otherwise pad (doubling the circulant) up to MAX_CIRCULANT.
CLIP_TOL = 1e-6
MAX_CIRCULANT = 2 ** 26

# Cholesky reference is a test oracle, not a production path.
CHOLESKY_MAX_POINTS = 512


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid: points k * step for k = 0..n_points-1."""

    step: float
    n_points: int

    def __post_init__(self):
        if self.step <= 0.0:
            raise ValidationError("step must be positive", field="grid.step")
        if self.n_points < 2:
            raise ValidationError("n_points must be at least 2",
                                  field="grid.n_points")

    @property
    def duration(self) -> float:
        return self.step * (self.n_points - 1)

    def times(self) -> np.ndarray:
        return self.step * np.arange(self.n_points)


@dataclass(eq=False)
class PathSample:
    """One discretized path with its running supremum."""

    grid: GridSpec
    values: np.ndarray
    running_max: float

    @classmethod
    def from_values(cls, grid: GridSpec, values: np.ndarray) -> "PathSample":
        return cls(grid, values, float(np.max(values)))


@dataclass(eq=False)
class EmbeddingRecord:
    """Planned circulant embedding of a covariance sequence.

    ``coef`` holds the half-spectrum scale factors of the construction in
    the module docstring; sampling is exact up to ``clipped_mass``.
    """

    n_points: int
    circulant_size: int
    min_eigenvalue: float
    clipped_mass: float
    eigenvalues: np.ndarray
    coef: np.ndarray
    label: str = ""

    @property
    def exact(self) -> bool:
        return self.min_eigenvalue >= -1e-12 * float(np.max(self.eigenvalues))


def _next_pow2(m: int) -> int:
    return 1 << max(1, (m - 1).bit_length())


def _plan_circulant(cov_at_lag, n_points: int, label: str,
                    clip_tol: float = CLIP_TOL,
                    max_size: int = MAX_CIRCULANT) -> EmbeddingRecord:
    """Embed the sequence cov_at_lag(0..) into a nonnegative circulant.

    cov_at_lag maps an integer ndarray of lags to covariance values.  The
    circulant size starts at the smallest power of two >= 2*(n_points-1)
    and doubles while the clipped spectral mass exceeds clip_tol.
    """
    size = _next_pow2(max(2, 2 * (n_points - 1)))
    while True:
        k = np.arange(size)
        row = cov_at_lag(np.minimum(k, size - k))
        lam = np.fft.fft(row).real
        min_eig = float(lam.min())
        total = float(np.abs(lam).sum())
        clipped = float(-lam[lam < 0].sum()) / total if total > 0 else 0.0
        if clipped <= clip_tol:
            lam_used = np.maximum(lam, 0.0)
            half = size // 2
            coef = np.sqrt(size * lam_used[:half + 1])
            coef[1:half] /= np.sqrt(2.0)
            return EmbeddingRecord(n_points, size, min_eig, clipped,
                                   lam, coef, label)
        if size >= max_size:
            raise EmbeddingError(
                f"circulant embedding of {label} not nonnegative definite: "
                f"clipped mass {clipped:.3e} > {clip_tol:g} at size {size}")
        size *= 2


def plan_embedding(model: cov.CovarianceModel, grid: GridSpec,
                   clip_tol: float = CLIP_TOL,
                   max_size: int = MAX_CIRCULANT) -> EmbeddingRecord:
    """Plan the embedding for a stationary path on ``grid``."""
    label = (f"{model.family}(alpha={model.alpha:g}, C={model.c_coef:g}) "
             f"at step={grid.step:g}, n={grid.n_points}")
    return _plan_circulant(lambda k: cov.evaluate(model, k * grid.step),
                           grid.n_points, label, clip_tol, max_size)


def paths_from_normals(record: EmbeddingRecord, g: np.ndarray) -> np.ndarray:
    """Apply the spectral square root to standard normals g (batch, M)."""
    m = record.circulant_size
    half = m // 2
    g = np.atleast_2d(g)
    if g.shape[1] != m:
        raise ValidationError(f"need {m} normals per path, got {g.shape[1]}")
    spec = np.empty((g.shape[0], half + 1), dtype=complex)
    spec[:, 0] = record.coef[0] * g[:, 0]
    spec[:, half] = record.coef[half] * g[:, 1]
    if half > 1:
        spec[:, 1:half] = record.coef[1:half] * (g[:, 2::2] + 1j * g[:, 3::2])
    return np.fft.irfft(spec, n=m, axis=1)[:, :record.n_points]


def paths_from_normals_dense(record: EmbeddingRecord,
                             g: np.ndarray) -> np.ndarray:
    """Same linear map as :func:`paths_from_normals`, applied densely.

    O(M^2) per path; reference implementation used to verify the FFT route
    pathwise on identical noise.
    """
    m = record.circulant_size
    half = m // 2
    j = np.arange(m)[:, None]
    b = np.zeros((m, m))
    b[:, 0] = record.coef[0] / m
    b[:, 1] = record.coef[half] / m * np.cos(np.pi * j[:, 0])
    for k in range(1, half):
        theta = 2.0 * np.pi * k * j[:, 0] / m
        b[:, 2 * k] = 2.0 * record.coef[k] / m * np.cos(theta)
        b[:, 2 * k + 1] = -2.0 * record.coef[k] / m * np.sin(theta)
    out = np.atleast_2d(g) @ b.T
    return out[:, :record.n_points]


def sample_paths(record: EmbeddingRecord, rng: np.random.Generator,
                 n_paths: int) -> np.ndarray:
    """Draw n_paths stationary paths, (n_paths, n_points)."""
    g = normals(rng, (n_paths, record.circulant_size))
    return paths_from_normals(record, g)


def sample_path(model: cov.CovarianceModel, grid: GridSpec,
                rng: np.random.Generator) -> PathSample:
    """Draw one path of the stationary process on ``grid``."""
    record = plan_embedding(model, grid)
    values = sample_paths(record, rng, 1)[0]
    return PathSample.from_values(grid, values)


def sample_path_reference(model: cov.CovarianceModel, grid: GridSpec,
                          rng: np.random.Generator) -> PathSample:
    """Cholesky-factorization sampler; law-level oracle for small grids."""
    if grid.n_points > CHOLESKY_MAX_POINTS:
        raise ValidationError(
            f"reference sampler limited to {CHOLESKY_MAX_POINTS} points")
    sigma = toeplitz(cov.evaluate(model, grid.times()))
    lower = cholesky(sigma, lower=True)
    values = lower @ normals(rng, grid.n_points)
    return PathSample.from_values(grid, values)


# --- fractional Gaussian noise / fractional Brownian motion ---------------

def fgn_autocovariance(hurst: float, lags: np.ndarray) -> np.ndarray:
    """Autocovariance of unit-step fractional Gaussian noise."""
    k = np.abs(lags).astype(float)
    h2 = 2.0 * hurst
    return 0.5 * ((k + 1.0) ** h2 + np.abs(k - 1.0) ** h2 - 2.0 * k ** h2)


def plan_fgn(hurst: float, n_increments: int,
             clip_tol: float = CLIP_TOL,
             max_size: int = MAX_CIRCULANT) -> EmbeddingRecord:
    """Plan the embedding for n_increments of unit-step fGn."""
    if not 0.0 < hurst < 1.0:
        raise ValidationError("hurst must lie in (0, 1) for fGn embedding",
                              field="hurst")
    return _plan_circulant(lambda k: fgn_autocovariance(hurst, k),
                           n_increments, f"fgn(hurst={hurst:g})",
                           clip_tol, max_size)


def sample_fbm_batch(hurst: float, grid: GridSpec, rng: np.random.Generator,
                     n_paths: int) -> np.ndarray:
    """Fractional Brownian paths B with B(0) = 0, (n_paths, n_points).

    Var B(t) = t**(2*hurst) holds exactly at the grid points.  hurst = 1 is
    the degenerate perfectly-correlated case B(t) = t * N.
    """
    if not 0.0 < hurst <= 1.0:
        raise ValidationError("hurst must lie in (0, 1]", field="hurst")
    out = np.zeros((n_paths, grid.n_points))
    if hurst == 1.0:
        out[:, :] = normals(rng, (n_paths, 1)) * grid.times()
        return out
    record = plan_fgn(hurst, grid.n_points - 1)
    unit = sample_paths(record, rng, n_paths)
    np.cumsum(unit, axis=1, out=unit)
    out[:, 1:] = grid.step ** hurst * unit
    return out


def sample_fbm(hurst: float, grid: GridSpec,
               rng: np.random.Generator) -> PathSample:
    """Draw one fractional Brownian path on ``grid``."""
    values = sample_fbm_batch(hurst, grid, rng, 1)[0]
    return PathSample.from_values(grid, values)
