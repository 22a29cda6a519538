"""Initial estimators: covariance, penalized precision solver, debiasing,
ridge, and the entrywise-quantile comparator."""

import math

import numpy as np
import pytest

from precsup.errors import ConvergenceError, DimensionMismatchError, EmptySampleError
from precsup.estimators import (CovarianceEstimate, GlassoSettings, debias_glasso,
                                debias_ridge, empirical_covariance,
                                glasso_kkt_residual, glasso_objective,
                                graphical_lasso, jankova_support, normal_quantile,
                                ridge_precision)
from precsup.matcore import spd_inverse
from precsup.synthdata import make_tridiagonal, sample_gaussian

from conftest import random_spd


def _cov(matrix, n=10):
    return CovarianceEstimate(matrix=np.asarray(matrix, dtype=float), n=n, centered=False)


class TestEmpiricalCovariance:
    def test_single_basis_row(self):
        x = np.array([[1.0, 0.0, 0.0]])
        cov = empirical_covariance(x)
        expected = np.zeros((3, 3))
        expected[0, 0] = 1.0
        assert np.array_equal(cov.matrix, expected)

    def test_two_rows_univariate(self):
        cov = empirical_covariance(np.array([[1.0], [-1.0]]))
        assert cov.matrix[0, 0] == pytest.approx(1.0)

    def test_divisor_is_n(self):
        cov = empirical_covariance(np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert np.allclose(cov.matrix, 0.5 * np.eye(2))

    def test_centering(self, rng):
        x = rng.standard_normal((20, 3)) + 5.0
        cov = empirical_covariance(x, center=True)
        xc = x - x.mean(axis=0)
        assert np.allclose(cov.matrix, xc.T @ xc / 20)

    def test_empty_rejected(self):
        with pytest.raises(EmptySampleError):
            empirical_covariance(np.empty((0, 3)))

    def test_psd(self, rng):
        x = rng.standard_normal((5, 12))
        cov = empirical_covariance(x)
        vals = np.linalg.eigvalsh(cov.matrix)
        assert vals[0] >= -1e-10 * np.abs(vals).max()


class TestGraphicalLasso:
    def test_lambda_zero_is_inverse(self, rng):
        s = random_spd(rng, 4)
        est = graphical_lasso(_cov(s), GlassoSettings(lam=0.0))
        assert np.allclose(est.matrix, spd_inverse(s), atol=1e-6)

    def test_diagonal_covariance(self):
        s = np.diag([1.0, 3.0, 0.5])
        est = graphical_lasso(_cov(s), GlassoSettings(lam=0.7))
        assert np.allclose(est.matrix, np.diag([1.0, 1 / 3, 2.0]), atol=1e-12)

    def test_large_penalty_gives_diagonal(self, rng):
        s = random_spd(rng, 5)
        c = np.abs(s - np.diag(np.diag(s))).max()
        est = graphical_lasso(_cov(s), GlassoSettings(lam=c * 1.0001))
        off = est.matrix[~np.eye(5, dtype=bool)]
        assert np.all(off == 0)
        assert np.allclose(np.diag(est.matrix), 1 / np.diag(s), atol=1e-12)

    def test_brute_force_objective_p2(self, rng):
        # Grid scan over 2x2 candidates cannot beat the solver.
        s = np.array([[1.2, 0.4], [0.4, 0.9]])
        lam = 0.15
        est = graphical_lasso(_cov(s), GlassoSettings(lam=lam, tol=1e-9))
        best = glasso_objective(s, est.matrix, lam)
        for t12 in np.linspace(-1.5, 1.5, 241):
            for d1 in np.linspace(0.5, 3.0, 41):
                for d2 in np.linspace(0.5, 3.0, 41):
                    theta = np.array([[d1, t12], [t12, d2]])
                    if d1 * d2 - t12 * t12 <= 1e-9:
                        continue
                    assert glasso_objective(s, theta, lam) >= best - 1e-9

    def test_kkt_residual(self, rng):
        for lam in (0.05, 0.2, 0.6):
            s = random_spd(rng, 12)
            est, diags = graphical_lasso(_cov(s), GlassoSettings(lam=lam, tol=1e-7),
                                         return_diagnostics=True)
            assert diags["kkt_residual"] < 1e-5
            assert glasso_kkt_residual(s, est.matrix, lam) == diags["kkt_residual"]

    def test_positive_definite_output(self, rng):
        for _ in range(50):
            p = int(rng.integers(2, 31))
            s = random_spd(rng, p)
            lam = float(rng.uniform(0.01, 0.8))
            est = graphical_lasso(_cov(s), GlassoSettings(lam=lam))
            assert np.linalg.eigvalsh(est.matrix)[0] > 0

    def test_beats_reference_points(self, rng):
        for _ in range(10):
            s = random_spd(rng, 8)
            lam = 0.1
            est = graphical_lasso(_cov(s), GlassoSettings(lam=lam, tol=1e-8))
            obj = glasso_objective(s, est.matrix, lam)
            ridge_ref = spd_inverse(s + 1e-3 * np.eye(8))
            diag_ref = np.diag(1 / np.diag(s))
            assert obj <= glasso_objective(s, ridge_ref, lam) + 1e-9
            assert obj <= glasso_objective(s, diag_ref, lam) + 1e-9

    def test_objective_nonincreasing(self, rng):
        s = random_spd(rng, 15)
        _, diags = graphical_lasso(_cov(s), GlassoSettings(lam=0.05, tol=1e-8),
                                   return_diagnostics=True)
        path = diags["objective_path"]
        assert all(path[i + 1] <= path[i] + 1e-9 for i in range(len(path) - 1))

    def test_convergence_error_carries_gap(self, rng):
        s = random_spd(rng, 10)
        with pytest.raises(ConvergenceError) as err:
            graphical_lasso(_cov(s), GlassoSettings(lam=0.05, tol=1e-14, max_sweeps=1))
        assert np.isfinite(err.value.gap)

    def test_settings_validation(self):
        with pytest.raises(ValueError):
            GlassoSettings(lam=-0.1)
        with pytest.raises(ValueError):
            GlassoSettings(lam=0.1, tol=0.0)
        with pytest.raises(ValueError):
            GlassoSettings(lam=0.1, max_sweeps=0)


class TestDebiasGlasso:
    def test_inverse_fixed_point(self, rng):
        s = random_spd(rng, 6)
        est = graphical_lasso(_cov(s), GlassoSettings(lam=0.0))
        deb = debias_glasso(est, _cov(s))
        assert np.abs(deb.matrix - est.matrix).max() < 1e-12

    def test_identity_fixed_point(self):
        from precsup.estimators import PrecisionEstimate
        est = PrecisionEstimate(matrix=np.eye(3), kind="glasso", lam=0.5)
        deb = debias_glasso(est, _cov(np.eye(3)))
        assert np.array_equal(deb.matrix, np.eye(3))
        assert deb.kind == "glasso_debiased"

    def test_hand_case_2x2(self):
        from precsup.estimators import PrecisionEstimate
        est = PrecisionEstimate(matrix=np.eye(2), kind="glasso", lam=0.5)
        s = np.array([[1.0, 0.5], [0.5, 1.0]])
        deb = debias_glasso(est, _cov(s))
        assert np.allclose(deb.matrix, [[1.0, -0.5], [-0.5, 1.0]])

    def test_dimension_mismatch(self):
        from precsup.estimators import PrecisionEstimate
        est = PrecisionEstimate(matrix=np.eye(3), kind="glasso", lam=0.5)
        with pytest.raises(DimensionMismatchError):
            debias_glasso(est, _cov(np.eye(4)))

    def test_reduces_offdiagonal_bias(self):
        # The point of the correction: on simulated data the debiased
        # estimate has smaller mean absolute off-diagonal error than the
        # penalized estimate itself.
        model = make_tridiagonal(50)
        x = sample_gaussian(model, 200, seed=3).X
        cov = empirical_covariance(x)
        est = graphical_lasso(cov, GlassoSettings(lam=0.4))
        deb = debias_glasso(est, cov)
        off = ~np.eye(50, dtype=bool)
        err_raw = np.abs(est.matrix - model.matrix)[off].mean()
        err_deb = np.abs(deb.matrix - model.matrix)[off].mean()
        assert err_deb < err_raw


class TestRidge:
    def test_identity(self):
        est = ridge_precision(_cov(np.eye(3)), 1.0)
        assert np.allclose(est.matrix, 0.5 * np.eye(3))

    def test_zero_covariance(self):
        est = ridge_precision(_cov(np.zeros((4, 4))), 2.0)
        assert np.allclose(est.matrix, 0.5 * np.eye(4))

    def test_diagonal(self):
        est = ridge_precision(_cov(np.diag([1.0, 3.0])), 1.0)
        assert np.allclose(est.matrix, np.diag([0.5, 0.25]))

    def test_solve_contract(self, rng):
        s = random_spd(rng, 20)
        lam = 0.3
        est = ridge_precision(_cov(s), lam)
        assert np.abs((s + lam * np.eye(20)) @ est.matrix - np.eye(20)).max() < 1e-8


class TestDebiasRidge:
    def test_full_rank_projection_vanishes(self, rng):
        x = rng.standard_normal((30, 5))
        cov = empirical_covariance(x)
        ridge = ridge_precision(cov, 0.5)
        aux = graphical_lasso(cov, GlassoSettings(lam=0.3))
        out = debias_ridge(ridge, x, aux)
        assert np.abs(out.matrix - ridge.matrix).max() < 1e-10
        assert out.kind == "ridge_debiased"

    def test_zero_aux_is_noop(self, rng):
        from precsup.estimators import PrecisionEstimate
        x = rng.standard_normal((4, 9))
        cov = empirical_covariance(x)
        ridge = ridge_precision(cov, 0.5)
        aux = PrecisionEstimate(matrix=np.zeros((9, 9)), kind="glasso", lam=0.0)
        out = debias_ridge(ridge, x, aux)
        assert np.abs(out.matrix - ridge.matrix).max() < 1e-14

    def test_rank_one_hand_case(self):
        from precsup.estimators import PrecisionEstimate
        x = np.array([[1.0, 1.0, 0.0]]) / math.sqrt(2)
        cov = empirical_covariance(x)
        ridge = ridge_precision(cov, 1.0)
        aux = PrecisionEstimate(matrix=np.eye(3), kind="glasso", lam=0.0)
        out = debias_ridge(ridge, x, aux)
        p0 = np.array([[0.0, 0.5, 0.0], [0.5, 0.0, 0.0], [0.0, 0.0, 0.0]])
        assert np.allclose(out.matrix, ridge.matrix + p0, atol=1e-12)


class TestNormalQuantile:
    def test_median(self):
        assert normal_quantile(0.5) == pytest.approx(0.0, abs=1e-12)

    def test_against_bisection_oracle(self):
        # Frozen from a bisection solve of the erfc tail equation.
        p, alpha = 496, 2.0 ** -5
        q = 1 - alpha / (p * (p - 1))
        assert normal_quantile(q) == pytest.approx(5.154313513528319, abs=1e-10)

    def test_symmetry(self):
        assert normal_quantile(0.975) == pytest.approx(-normal_quantile(0.025), rel=1e-12)
        assert normal_quantile(0.975) == pytest.approx(1.959963984540054, abs=1e-10)

    def test_domain(self):
        for bad in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ValueError):
                normal_quantile(bad)


class TestJankovaSupport:
    def _setup(self, rng, p=6):
        from precsup.estimators import PrecisionEstimate
        m = random_spd(rng, p)
        np.fill_diagonal(m, 1.0)
        deb = PrecisionEstimate(matrix=(m + m.T) / 2, kind="glasso_debiased", lam=0.5)
        return deb

    def test_loose_alpha_keeps_nearly_all(self, rng):
        deb = self._setup(rng, p=2)
        cov = _cov(np.array([[1.0, 0.01], [0.01, 1.0]]), n=50)
        mask = jankova_support(deb, cov, n=50, alpha=0.999999)
        assert mask.mask.all()

    def test_zero_covariance_offdiag_keeps_all_nonzero(self, rng):
        deb = self._setup(rng)
        cov = _cov(np.eye(6), n=50)
        mask = jankova_support(deb, cov, n=50, alpha=0.01)
        off = ~np.eye(6, dtype=bool)
        assert np.array_equal(mask.mask[off], deb.matrix[off] != 0)

    def test_monotone_in_alpha(self, rng):
        deb = self._setup(rng, p=8)
        cov = _cov(random_spd(rng, 8), n=40)
        prev = None
        for alpha in (1e-4, 1e-2, 0.3, 0.9):
            mask = jankova_support(deb, cov, n=40, alpha=alpha)
            if prev is not None:
                assert np.all(prev.mask <= mask.mask)
            prev = mask

    def test_alpha_domain(self, rng):
        deb = self._setup(rng)
        cov = _cov(np.eye(6))
        for bad in (0.0, 1.0, 1.5):
            with pytest.raises(ValueError):
                jankova_support(deb, cov, n=10, alpha=bad)
