"""Initial precision-matrix estimators and debiasing corrections.

The l1-penalized Gaussian likelihood solver minimizes

    tr(S @ Theta) - logdet(Theta) + lam * sum_{i != j} |Theta_ij|

(diagonal unpenalized) by block coordinate descent over columns, each
column a coordinate-descent lasso against the inverse of the remaining
block; the hot sweep lives in ``_kernels``. Debiasing applies the
one-step correction 2*Est - Est@S@Est so that thresholding the result is
meaningful. A ridge route and an entrywise-quantile support comparator
round out the set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, ndtri

from ._kernels import glasso_sweep
from .errors import (ConvergenceError, DegenerateDiagonalError,
                     DimensionMismatchError, EmptySampleError)
from .matcore import as_sym_matrix, spd_inverse, symmetrize
from .metrics import SupportMask


@dataclass
class CovarianceEstimate:
    matrix: np.ndarray
    n: int
    centered: bool

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass
class PrecisionEstimate:
    matrix: np.ndarray
    kind: str
    lam: float
    normalized: bool = False

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass
class GlassoSettings:
    """`lam` is the off-diagonal l1 weight; zero is accepted only for
    positive definite input. Convergence is declared when the max entry
    change of the precision iterate over a sweep drops below `tol`."""

    lam: float
    tol: float = 1e-5
    max_sweeps: int = 100

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"penalty must be nonnegative, got {self.lam}")
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_sweeps < 1:
            raise ValueError(f"max_sweeps must be >= 1, got {self.max_sweeps}")


def empirical_covariance(x, center: bool = False) -> CovarianceEstimate:
    """Second-moment matrix with divisor n (not n-1); optional centering."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"data must be an n x p matrix, got shape {a.shape}")
    n, p = a.shape
    if n < 1 or p < 1:
        raise EmptySampleError(f"need at least one row and one column, got {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("data contains non-finite entries")
    if center:
        a = a - a.mean(axis=0)
    s = symmetrize(a.T @ a / n)
    return CovarianceEstimate(matrix=s, n=n, centered=center)


def glasso_objective(s, theta, lam: float) -> float:
    """Penalized negative log-likelihood evaluated at theta."""
    s = np.asarray(s, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    sign, logdet = np.linalg.slogdet(theta)
    if sign <= 0:
        return math.inf
    off = np.abs(theta).sum() - np.abs(np.diag(theta)).sum()
    return float(np.sum(s * theta) - logdet + lam * off)


def _dual_gap(s, theta, lam: float) -> float:
    off = np.abs(theta).sum() - np.abs(np.diag(theta)).sum()
    return float(np.sum(s * theta) - s.shape[0] + lam * off)


def glasso_kkt_residual(s, theta, lam: float) -> float:
    """Max violation of the stationarity conditions at theta.

    On nonzero off-diagonals the residual is |S - inv(Theta) + lam*sign|;
    on zero entries, the excess of |S - inv(Theta)| over lam; on the
    diagonal, |S - inv(Theta)| itself.
    """
    s = np.asarray(s, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    w = symmetrize(np.linalg.inv(theta))
    diff = s - w
    offmask = ~np.eye(s.shape[0], dtype=bool)
    nonzero = offmask & (theta != 0)
    zero = offmask & (theta == 0)
    res = np.abs(np.diag(diff)).max()
    if nonzero.any():
        res = max(res, np.abs(diff[nonzero] + lam * np.sign(theta[nonzero])).max())
    if zero.any():
        res = max(res, max(0.0, np.abs(diff[zero]).max() - lam))
    return float(res)


def graphical_lasso(cov: CovarianceEstimate, settings: GlassoSettings,
                    return_diagnostics: bool = False):
    """Solve the penalized likelihood problem for the precision matrix.

    Raises ConvergenceError (carrying the last duality gap) if the sweep
    budget runs out. With `return_diagnostics` a dict with the per-sweep
    objective path, sweep count and final KKT residual is also returned.
    """
    s = as_sym_matrix(cov.matrix, "covariance")
    diag = np.diag(s)
    bad = np.flatnonzero(diag <= 0)
    if bad.size:
        i = int(bad[0])
        raise DegenerateDiagonalError(
            f"covariance diagonal entry {diag[i]!r} at index {i} must be positive", index=i)
    lam = float(settings.lam)

    if lam == 0.0:
        theta = spd_inverse(s)
        est = PrecisionEstimate(matrix=theta, kind="glasso", lam=0.0)
        if return_diagnostics:
            diags = {"sweeps": 0, "objective_path": [glasso_objective(s, theta, 0.0)],
                     "kkt_residual": glasso_kkt_residual(s, theta, 0.0)}
            return est, diags
        return est

    s = np.ascontiguousarray(s)
    theta = np.diag(1.0 / diag)
    w = np.diag(diag.copy())
    inner_tol = settings.tol * 0.1
    inner_max_passes = 1000
    objective_path = []
    converged = False
    sweeps = 0
    for sweeps in range(1, settings.max_sweeps + 1):
        delta = glasso_sweep(s, theta, w, lam, inner_tol, inner_max_passes)
        if return_diagnostics:
            objective_path.append(glasso_objective(s, theta, lam))
        if delta < settings.tol:
            converged = True
            break
    if not converged:
        raise ConvergenceError(
            f"no convergence after {settings.max_sweeps} sweeps "
            f"(last max entry change {delta:.3e})", gap=_dual_gap(s, theta, lam))

    est = PrecisionEstimate(matrix=theta, kind="glasso", lam=lam)
    if return_diagnostics:
        diags = {"sweeps": sweeps, "objective_path": objective_path,
                 "kkt_residual": glasso_kkt_residual(s, theta, lam)}
        return est, diags
    return est


def debias_glasso(est: PrecisionEstimate, cov: CovarianceEstimate) -> PrecisionEstimate:
    """One-step bias correction 2*Est - Est@S@Est, symmetrized."""
    if est.dim != cov.dim:
        raise DimensionMismatchError(
            f"estimate dim {est.dim} != covariance dim {cov.dim}")
    omega = est.matrix
    out = symmetrize(2.0 * omega - omega @ cov.matrix @ omega)
    return PrecisionEstimate(matrix=out, kind="glasso_debiased", lam=est.lam)


def ridge_precision(cov: CovarianceEstimate, lam: float) -> PrecisionEstimate:
    """Closed form inverse of (S + lam*I); lam > 0 guarantees existence
    even for rank-deficient S."""
    if lam < 0:
        raise ValueError(f"ridge penalty must be nonnegative, got {lam}")
    s = as_sym_matrix(cov.matrix, "covariance")
    out = spd_inverse(s + lam * np.eye(s.shape[0]))
    return PrecisionEstimate(matrix=out, kind="ridge", lam=lam)


def debias_ridge(ridge: PrecisionEstimate, x, aux: PrecisionEstimate) -> PrecisionEstimate:
    """Ridge bias correction through the data's right singular subspace.

    P0 is the projection onto the row space of the data with its diagonal
    zeroed; the output is ridge + P0 @ aux, symmetrized. Singular values
    below 1e-12 of the largest are truncated. When the data has full
    column rank the projection is the identity and P0 vanishes.
    """
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"data must be an n x p matrix, got shape {a.shape}")
    p = a.shape[1]
    if ridge.dim != p or aux.dim != p:
        raise DimensionMismatchError(
            f"dims disagree: ridge {ridge.dim}, aux {aux.dim}, data p {p}")
    _, svals, vt = np.linalg.svd(a, full_matrices=False)
    if svals.size and svals[0] > 0:
        keep = svals >= 1e-12 * svals[0]
        vt = vt[keep]
    proj = vt.T @ vt
    p0 = proj - np.diag(np.diag(proj))
    out = symmetrize(ridge.matrix + p0 @ aux.matrix)
    return PrecisionEstimate(matrix=out, kind="ridge_debiased", lam=ridge.lam)


def normal_quantile(q: float) -> float:
    """Standard normal quantile: rational approximation plus one Newton
    step against the error-function tail (stable for q near one)."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile argument must be in (0,1), got {q}")
    x = float(ndtri(q))
    tail = 1.0 - q
    pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    if pdf > 0.0:
        x += (0.5 * erfc(x / math.sqrt(2.0)) - tail) / pdf
    return x


def jankova_support(debiased: PrecisionEstimate, cov: CovarianceEstimate,
                    n: int, alpha: float) -> SupportMask:
    """Entrywise-threshold support comparator.

    Off-diagonal (i,j) is kept when |Omega_ij| >= quantile * |S_ij| / sqrt(n)
    with quantile = normal_quantile(1 - alpha/(p(p-1))). The covariance
    entry is taken in absolute value so the cut point is nonnegative.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if debiased.dim != cov.dim:
        raise DimensionMismatchError(
            f"estimate dim {debiased.dim} != covariance dim {cov.dim}")
    p = debiased.dim
    quantile = normal_quantile(1.0 - alpha / (p * (p - 1)))
    cut = quantile * np.abs(cov.matrix) / math.sqrt(n)
    mask = np.abs(debiased.matrix) >= cut
    np.fill_diagonal(mask, True)
    return SupportMask(mask=mask & mask.T)
