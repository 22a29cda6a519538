"""Sparse precision-matrix support recovery with finite-sample
false-positive-rate control."""

from ._kernels import ACTIVE_BACKEND
from .estimators import (CovarianceEstimate, GlassoSettings, PrecisionEstimate,
                         debias_glasso, debias_ridge, empirical_covariance,
                         glasso_kkt_residual, glasso_objective, graphical_lasso,
                         jankova_support, normal_quantile, ridge_precision)
from .matcore import (hard_threshold, operator_norm, schatten_norm,
                      spd_cholesky, spd_inverse, unit_diagonal_normalize)
from .metrics import (MetricsRecord, SupportMask, fp_rate, roc_table,
                      support_of, tp_rate)
from .pipeline import recover_support
from .subsampling import (CombinedSupport, SubsampleScheme, binomial_fp_bound,
                          binomial_tail_exact, combine_supports, partition_sample,
                          per_subsample_alpha, subsampled_recovery)
from .support_search import (REMOVE_ALL, RecoveryTrace, SearchConfig, StepRecord,
                             calibrated_steps_for_alpha, error_controlled_estimate,
                             min_threshold_for_radius, shrink_step, steps_for_alpha)
from .synthdata import (GraphModel, SampleSet, make_binary_tree,
                        make_block_diagonal, make_tridiagonal, sample_gaussian,
                        sample_laplace)
from .theory_lab import (TrialReport, lazy_hoeffding_tail, shrink_ratio_experiment,
                         sparse_opnorm_scaling)

__version__ = "0.1.0"
