"""Split-and-vote support recovery.

The sample is randomly partitioned into k equal disjoint blocks, the full
recovery pipeline runs on each block at a relaxed per-block rate, and an
off-diagonal entry survives only when at least d of the k block supports
agree. The chance that a given false positive survives d-of-k voting is a
binomial tail, bounded above by 2^k * alpha^d, so solving
2^k * alpha_sub^d = target gives the per-block rate.

Keeping the block count small relative to n matters in practice: blocks
of fewer than ~20 rows starve the covariance estimate. k is not capped
here; choose it so that n/k stays comfortable.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (DimensionMismatchError, InfeasibleSchemeError,
                     InsufficientSampleError)
from .metrics import SupportMask, support_of
from .pipeline import recover_support
from .support_search import RecoveryTrace, steps_for_alpha


@dataclass
class SubsampleScheme:
    """k disjoint blocks, d votes required, targeting `target_alpha`
    after combination."""

    k: int
    d: int
    seed: int
    target_alpha: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"need k >= 1 blocks, got {self.k}")
        if not 1 <= self.d <= self.k:
            raise ValueError(f"need 1 <= d <= k, got d={self.d}, k={self.k}")
        if not 0 < self.target_alpha < 1:
            raise ValueError(f"target_alpha must be in (0,1), got {self.target_alpha}")


def partition_sample(x, k: int, seed: int) -> list[np.ndarray]:
    """Split the rows of x into k disjoint blocks of size floor(n/k) after
    a seeded uniform shuffle; the n mod k leftover rows are discarded so
    the blocks stay exchangeable."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"data must be an n x p matrix, got shape {a.shape}")
    n = a.shape[0]
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    block = n // k
    if block < 2:
        raise InsufficientSampleError(
            f"k={k} leaves blocks of {block} < 2 rows from n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return [a[np.sort(perm[i * block:(i + 1) * block])] for i in range(k)]


def per_subsample_alpha(target_alpha: float, k: int, d: int) -> float:
    """Per-block rate alpha_sub solving 2^k * alpha_sub^d = target_alpha."""
    if not 0 < target_alpha < 1:
        raise ValueError(f"target_alpha must be in (0,1), got {target_alpha}")
    if not 1 <= d <= k:
        raise ValueError(f"need 1 <= d <= k, got d={d}, k={k}")
    alpha_sub = (target_alpha * 2.0 ** -k) ** (1.0 / d)
    if alpha_sub >= 1:
        raise InfeasibleSchemeError(
            f"target {target_alpha} with k={k}, d={d} needs per-block rate "
            f"{alpha_sub:.4g} >= 1")
    return alpha_sub


def binomial_fp_bound(k: int, d: int, alpha: float) -> float:
    """Closed-form cap min(1, 2^k * alpha^d) on the d-of-k survival chance."""
    if not 1 <= d <= k:
        raise ValueError(f"need 1 <= d <= k, got d={d}, k={k}")
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must be in [0,1], got {alpha}")
    return min(1.0, 2.0 ** k * alpha ** d)


def binomial_tail_exact(k: int, d: int, alpha: float) -> float:
    """Exact tail P(Binomial(k, alpha) >= d), for verifying the bound."""
    if not 1 <= d <= k:
        raise ValueError(f"need 1 <= d <= k, got d={d}, k={k}")
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must be in [0,1], got {alpha}")
    return float(sum(math.comb(k, i) * alpha ** i * (1 - alpha) ** (k - i)
                     for i in range(d, k + 1)))


@dataclass
class CombinedSupport:
    mask: SupportMask
    vote_counts: np.ndarray
    per_subsample_alpha: float | None = None
    # Mean of the per-block estimates over the blocks that selected each
    # surviving entry; identity diagonal. None unless a numeric combination
    # was requested.
    values: np.ndarray | None = None


def combine_supports(masks: list[SupportMask], d: int) -> CombinedSupport:
    """d-of-k vote over block supports; diagonal always selected."""
    if not masks:
        raise ValueError("need at least one mask")
    k = len(masks)
    if not 1 <= d <= k:
        raise ValueError(f"need 1 <= d <= k, got d={d}, k={k}")
    dim = masks[0].dim
    for m in masks[1:]:
        if m.dim != dim:
            raise DimensionMismatchError(f"mask dims disagree: {m.dim} vs {dim}")
    votes = np.zeros((dim, dim), dtype=np.int64)
    for m in masks:
        votes += m.mask
    combined = votes >= d
    np.fill_diagonal(combined, True)
    return CombinedSupport(mask=SupportMask(mask=combined), vote_counts=votes)


def subsampled_recovery(x, scheme: SubsampleScheme, lam: float, gamma: float, *,
                        center: bool = False, glasso_tol: float = 1e-5,
                        max_sweeps: int = 100, strict: bool = False,
                        norm_method: str = "auto",
                        keep_step_supports: bool = False
                        ) -> tuple[CombinedSupport, list[RecoveryTrace]]:
    """Run the pipeline independently on each block and vote.

    Each block is searched to ceil(log_gamma(1/alpha_sub)) steps, where
    alpha_sub is the per-block rate for the scheme's target. The block
    runs are independent pure pipelines; their order does not affect the
    combined output.
    """
    alpha_sub = per_subsample_alpha(scheme.target_alpha, scheme.k, scheme.d)
    steps = steps_for_alpha(alpha_sub, gamma)
    blocks = partition_sample(x, scheme.k, scheme.seed)
    traces = [recover_support(block, lam, gamma, steps, center=center,
                              glasso_tol=glasso_tol, max_sweeps=max_sweeps,
                              strict=strict, norm_method=norm_method,
                              keep_step_supports=keep_step_supports)
              for block in blocks]
    masks = [support_of(t.final.matrix) for t in traces]
    combined = combine_supports(masks, scheme.d)
    combined.per_subsample_alpha = alpha_sub

    dim = masks[0].dim
    total = np.zeros((dim, dim))
    for t in traces:
        total += t.final.matrix
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(combined.mask.mask & (combined.vote_counts > 0),
                          total / np.maximum(combined.vote_counts, 1), 0.0)
    np.fill_diagonal(values, 1.0)
    combined.values = values
    return combined, traces


def write_votes_csv(path, combined: CombinedSupport) -> None:
    """Upper-triangle vote counts as i,j,votes rows (1-based, nonzero only)."""
    votes = combined.vote_counts
    rows, cols = np.triu_indices(votes.shape[0], k=1)
    keep = votes[rows, cols] > 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "votes"])
        for i, j in zip(rows[keep], cols[keep]):
            writer.writerow([i + 1, j + 1, int(votes[i, j])])


def scheme_summary_json(scheme: SubsampleScheme) -> str:
    alpha_sub = per_subsample_alpha(scheme.target_alpha, scheme.k, scheme.d)
    return json.dumps({
        "k": scheme.k,
        "d": scheme.d,
        "alpha_sub": alpha_sub,
        "target_alpha": scheme.target_alpha,
        "bound": binomial_fp_bound(scheme.k, scheme.d, alpha_sub),
    }, indent=2)
