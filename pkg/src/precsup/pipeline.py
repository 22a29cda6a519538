"""End-to-end recovery pipeline: covariance -> penalized precision ->
debiasing -> radius-shrinking support search."""

from __future__ import annotations

import numpy as np

from .estimators import (GlassoSettings, debias_glasso, empirical_covariance,
                         graphical_lasso)
from .support_search import RecoveryTrace, SearchConfig, error_controlled_estimate


def recover_support(x, lam: float, gamma: float, steps: int, *,
                    center: bool = False, glasso_tol: float = 1e-5,
                    max_sweeps: int = 100, strict: bool = False,
                    norm_method: str = "auto",
                    keep_step_supports: bool = False) -> RecoveryTrace:
    """Run the full pipeline on an n x p data matrix.

    `steps` shrink iterations at ratio gamma give a target false positive
    rate of gamma^(-steps). With `keep_step_supports` the trace carries
    the support mask after normalization and after every step, so one run
    serves every dyadic rate up to the target.
    """
    x = np.asarray(x, dtype=np.float64)
    cov = empirical_covariance(x, center=center)
    settings = GlassoSettings(lam=lam, tol=glasso_tol, max_sweeps=max_sweeps)
    initial = graphical_lasso(cov, settings)
    debiased = debias_glasso(initial, cov)
    return error_controlled_estimate(
        debiased, SearchConfig(gamma=gamma, steps=steps), strict=strict,
        norm_method=norm_method, keep_step_supports=keep_step_supports)
