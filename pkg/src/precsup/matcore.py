"""Dense symmetric-matrix numerics: norms, factorizations, thresholding,
normalization, and the two CSV matrix formats used across the package.

Matrices are plain float64 numpy arrays, symmetric by construction.
Spectral quantities for small matrices go through LAPACK directly; large
matrices use a Lanczos solve (deterministic start vector) with a dense
fallback, and a seeded power-iteration path is kept available for
cross-checking and benchmarks.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from ._kernels import power_norm
from .errors import DegenerateDiagonalError, NotPositiveDefiniteError

# Below this dimension a full symmetric eigensolve is cheaper than any
# iterative scheme, and it doubles as the test oracle.
DENSE_EIG_CUTOFF = 64

# Fixed start-vector seed: spectral norms must be bit-reproducible.
_START_SEED = 0x5EED

_POWER_TOL = 1e-10
_LANCZOS_TOL = 1e-11


def as_sym_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate and return `m` as a square, finite, symmetric float64 array."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError(f"{name} must have dimension >= 1")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    if not np.array_equal(a, a.T):
        raise ValueError(f"{name} is not symmetric")
    return a


def symmetrize(m: np.ndarray) -> np.ndarray:
    """(M + M') / 2, removing floating-point asymmetry from products."""
    return (m + m.T) / 2.0


@dataclass
class EigenResult:
    """Full symmetric eigendecomposition, eigenvalues sorted descending."""

    values: np.ndarray
    vectors: np.ndarray | None = None


def full_eigen(m, with_vectors: bool = False) -> EigenResult:
    a = as_sym_matrix(m)
    if with_vectors:
        vals, vecs = np.linalg.eigh(a)
        order = np.argsort(vals)[::-1]
        return EigenResult(values=vals[order], vectors=vecs[:, order])
    vals = np.linalg.eigvalsh(a)
    return EigenResult(values=vals[::-1].copy())


def _check_finite(m: np.ndarray) -> None:
    if not np.isfinite(m).all():
        raise ValueError("matrix contains non-finite entries")


def _dense_abs_max_eig(m: np.ndarray) -> float:
    vals = np.linalg.eigvalsh(m)
    return float(max(abs(vals[0]), abs(vals[-1])))


def _power_norm_guarded(m: np.ndarray) -> float:
    """Seeded power iteration with a second independent start as a guard
    against an unlucky start vector; dense fallback on non-convergence."""
    p = m.shape[0]
    max_iter = 10 * p
    rng = np.random.default_rng(_START_SEED)
    best = 0.0
    converged = False
    for _ in range(2):
        v0 = rng.standard_normal(p)
        est, iters = power_norm(np.ascontiguousarray(m), v0, _POWER_TOL, max_iter)
        if iters > 0:
            converged = True
            best = max(best, est)
    if not converged:
        return _dense_abs_max_eig(m)
    return best


def _lanczos_norm(m: np.ndarray) -> float:
    v0 = np.random.default_rng(_START_SEED).standard_normal(m.shape[0])
    try:
        vals = eigsh(m, k=1, which="LM", v0=v0, tol=_LANCZOS_TOL,
                     return_eigenvectors=False)
    except (ArpackNoConvergence, ArpackError):
        return _dense_abs_max_eig(m)
    return float(abs(vals[0]))


def operator_norm(m, method: str = "auto") -> float:
    """Largest absolute eigenvalue of a symmetric matrix.

    method:
      * "auto"   — dense eigensolve up to DENSE_EIG_CUTOFF, Lanczos above it.
      * "dense"  — full eigensolve (the oracle path).
      * "power"  — seeded power iteration, dense fallback on non-convergence.
    """
    a = np.asarray(m, dtype=np.float64)
    _check_finite(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"operator_norm needs a square matrix, got {a.shape}")
    if not a.any():
        return 0.0
    p = a.shape[0]
    if method == "dense" or (method == "auto" and p <= DENSE_EIG_CUTOFF):
        return _dense_abs_max_eig(a)
    if method == "power":
        return _power_norm_guarded(a)
    if method == "auto":
        return _lanczos_norm(a)
    raise ValueError(f"unknown operator_norm method {method!r}")


def schatten_norm(m, order: str) -> float:
    """Schatten norms of a symmetric matrix.

    order "trace" sums |eigenvalues|, "hilbert_schmidt" is the entrywise
    root-sum-of-squares, "operator" is the largest |eigenvalue|.
    """
    a = np.asarray(m, dtype=np.float64)
    _check_finite(a)
    if order == "trace":
        return float(np.sum(np.abs(np.linalg.eigvalsh(a))))
    if order == "hilbert_schmidt":
        return float(np.sqrt(np.sum(a * a)))
    if order == "operator":
        return operator_norm(a)
    raise ValueError(f"unknown Schatten order {order!r}")


def hard_threshold(m, t: float) -> np.ndarray:
    """Zero every entry with magnitude strictly below t; entries with
    |entry| >= t survive unchanged (the boundary is kept)."""
    if t < 0:
        raise ValueError(f"threshold must be nonnegative, got {t}")
    a = np.asarray(m, dtype=np.float64)
    return np.where(np.abs(a) >= t, a, 0.0)


def unit_diagonal_normalize(m) -> np.ndarray:
    """Two-sided diagonal scaling D^{-1/2} M D^{-1/2}.

    Preserves the sign pattern and positive definiteness; the output
    diagonal is exactly one. Raises DegenerateDiagonalError naming the
    first nonpositive diagonal position.
    """
    a = np.asarray(m, dtype=np.float64)
    diag = np.diag(a)
    bad = np.flatnonzero(diag <= 0)
    if bad.size:
        i = int(bad[0])
        raise DegenerateDiagonalError(
            f"diagonal entry {diag[i]!r} at index {i} is not strictly positive", index=i)
    d = np.sqrt(diag)
    out = a / np.outer(d, d)
    np.fill_diagonal(out, 1.0)
    return out


def spd_cholesky(m) -> np.ndarray:
    """Lower-triangular L with L L' = M for symmetric positive definite M.

    Raises NotPositiveDefiniteError carrying the 1-based failing pivot."""
    a = np.asarray(m, dtype=np.float64)
    _check_finite(a)
    c, info = lapack.dpotrf(a, lower=1)
    if info > 0:
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite: leading minor {info} failed", pivot=int(info))
    if info < 0:
        raise ValueError(f"invalid input to Cholesky (argument {-info})")
    return np.tril(c)


def spd_inverse(m) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix, symmetrized."""
    a = np.asarray(m, dtype=np.float64)
    _check_finite(a)
    c, info = lapack.dpotrf(a, lower=1)
    if info > 0:
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite: leading minor {info} failed", pivot=int(info))
    inv, info = lapack.dpotri(c, lower=1)
    if info != 0:
        raise ValueError(f"Cholesky-based inversion failed (info={info})")
    lower = np.tril(inv)
    return lower + np.tril(lower, -1).T


# ---------------------------------------------------------------------------
# CSV formats.
#
# Dense: p rows of p comma-separated decimal fields, no header.
# Sparse triplet: header "i,j,value", 1-based indices, upper triangle only,
# diagonal implied 1 unless a diagonal triplet is present.
# ---------------------------------------------------------------------------

_FLOAT_FMT = "%.17g"


def write_dense_csv(path, m) -> None:
    np.savetxt(path, np.atleast_2d(np.asarray(m, dtype=np.float64)),
               fmt=_FLOAT_FMT, delimiter=",")


def read_dense_csv(path) -> np.ndarray:
    out = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    if not np.isfinite(out).all():
        raise ValueError(f"{path}: non-finite entries")
    return out


def write_triplet_csv(path, m) -> None:
    """Write the strict upper triangle's nonzero entries as i,j,value rows."""
    a = as_sym_matrix(m)
    rows, cols = np.triu_indices(a.shape[0], k=1)
    keep = a[rows, cols] != 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "value"])
        for i, j in zip(rows[keep], cols[keep]):
            writer.writerow([i + 1, j + 1, _FLOAT_FMT % a[i, j]])


def read_triplet_csv(path, dim: int) -> np.ndarray:
    """Read a sparse triplet CSV into a dense symmetric matrix.

    The diagonal defaults to 1. Lower-triangle triplets, out-of-range or
    duplicate indices, and non-finite values are rejected.
    """
    out = np.eye(dim)
    seen = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["i", "j", "value"]:
            raise ValueError(f"{path}: expected header 'i,j,value', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            i, j = int(row[0]), int(row[1])
            value = float(row[2])
            if not (1 <= i <= dim and 1 <= j <= dim):
                raise ValueError(f"{path}:{lineno}: index ({i},{j}) out of range for dim {dim}")
            if i > j:
                raise ValueError(
                    f"{path}:{lineno}: lower-triangle triplet ({i},{j}); upper triangle only")
            if not np.isfinite(value):
                raise ValueError(f"{path}:{lineno}: non-finite value")
            if (i, j) in seen:
                raise ValueError(f"{path}:{lineno}: duplicate triplet ({i},{j})")
            seen.add((i, j))
            out[i - 1, j - 1] = value
            out[j - 1, i - 1] = value
    return out
