"""Support extraction and false/true positive accounting.

Rates are computed over unordered off-diagonal pairs; the diagonal never
counts. A false positive is a pair selected by the estimate whose truth
entry is zero, relative to all truth-zero pairs; true positives are the
symmetric counterpart.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, UndefinedRateError


@dataclass
class SupportMask:
    """Symmetric boolean selection pattern with a True diagonal."""

    mask: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"mask must be square, got shape {m.shape}")
        if not np.array_equal(m, m.T):
            raise ValueError("mask must be symmetric")
        m = m.copy()
        np.fill_diagonal(m, True)
        self.mask = m

    @property
    def dim(self) -> int:
        return self.mask.shape[0]

    def pair_count(self) -> int:
        """Number of selected unordered off-diagonal pairs."""
        return int(np.triu(self.mask, k=1).sum())

    def offdiag_cells(self) -> int:
        """Number of selected off-diagonal cells (twice the pair count)."""
        return 2 * self.pair_count()

    def __eq__(self, other):
        return isinstance(other, SupportMask) and np.array_equal(self.mask, other.mask)


def support_of(m, tol: float = 0.0) -> SupportMask:
    """Support pattern of a symmetric matrix: off-diagonal (i,j) is
    selected iff |entry| > tol (strict, so exact zeros never select)."""
    if tol < 0:
        raise ValueError(f"tol must be nonnegative, got {tol}")
    a = np.asarray(m, dtype=np.float64)
    return SupportMask(mask=np.abs(a) > tol)


def _upper(mask: SupportMask) -> np.ndarray:
    iu = np.triu_indices(mask.dim, k=1)
    return mask.mask[iu]


def fp_rate(est: SupportMask, truth: SupportMask) -> float:
    """Fraction of truth-zero pairs selected by the estimate."""
    if est.dim != truth.dim:
        raise DimensionMismatchError(f"dims disagree: {est.dim} vs {truth.dim}")
    e, t = _upper(est), _upper(truth)
    negatives = int((~t).sum())
    if negatives == 0:
        raise UndefinedRateError("truth is a complete graph; no negative pairs")
    return float((e & ~t).sum() / negatives)


def tp_rate(est: SupportMask, truth: SupportMask) -> float:
    """Fraction of truth pairs recovered by the estimate."""
    if est.dim != truth.dim:
        raise DimensionMismatchError(f"dims disagree: {est.dim} vs {truth.dim}")
    e, t = _upper(est), _upper(truth)
    positives = int(t.sum())
    if positives == 0:
        raise UndefinedRateError("truth has no off-diagonal pairs")
    return float((e & t).sum() / positives)


@dataclass
class MetricsRecord:
    target_alpha: float
    empirical_fpr: float
    empirical_tpr: float
    fp_count: int
    tp_count: int
    negatives: int
    positives: int


def _counts(est: SupportMask, truth: SupportMask):
    e, t = _upper(est), _upper(truth)
    return int((e & ~t).sum()), int((e & t).sum()), int((~t).sum()), int(t.sum())


def roc_table(runs) -> list[MetricsRecord]:
    """Build records for (target_alpha, est, truth) triples, sorted by
    target alpha descending."""
    if not runs:
        raise ValueError("need at least one run")
    records = []
    for alpha, est, truth in runs:
        fp, tp, neg, pos = _counts(est, truth)
        if neg == 0:
            raise UndefinedRateError("truth is a complete graph; no negative pairs")
        if pos == 0:
            raise UndefinedRateError("truth has no off-diagonal pairs")
        records.append(MetricsRecord(
            target_alpha=float(alpha), empirical_fpr=fp / neg, empirical_tpr=tp / pos,
            fp_count=fp, tp_count=tp, negatives=neg, positives=pos))
    records.sort(key=lambda r: -r.target_alpha)
    return records


ROC_HEADER = ["alpha", "fpr", "tpr", "fp", "tp", "neg", "pos"]


def write_roc_csv(path, records: list[MetricsRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ROC_HEADER)
        for r in records:
            writer.writerow(["%.10g" % r.target_alpha, "%.10g" % r.empirical_fpr,
                             "%.10g" % r.empirical_tpr, r.fp_count, r.tp_count,
                             r.negatives, r.positives])


def roc_records_json(records: list[MetricsRecord]) -> list[dict]:
    """JSON mirror of the CSV with identical field names."""
    return [{"alpha": r.target_alpha, "fpr": r.empirical_fpr, "tpr": r.empirical_tpr,
             "fp": r.fp_count, "tp": r.tp_count, "neg": r.negatives, "pos": r.positives}
            for r in records]
