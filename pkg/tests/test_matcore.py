"""Norms, thresholding, normalization, factorizations, and matrix CSV IO."""

import math

import numpy as np
import pytest

from precsup.errors import DegenerateDiagonalError, NotPositiveDefiniteError
from precsup.matcore import (EigenResult, full_eigen, hard_threshold, operator_norm,
                             read_dense_csv, read_triplet_csv, schatten_norm,
                             spd_cholesky, spd_inverse, unit_diagonal_normalize,
                             write_dense_csv, write_triplet_csv)

from conftest import random_spd, random_symmetric


class TestOperatorNorm:
    def test_identity(self):
        assert operator_norm(np.eye(3)) == 1.0

    def test_zero(self):
        assert operator_norm(np.zeros((4, 4))) == 0.0

    def test_tridiagonal_closed_form(self):
        # Toeplitz eigenvalues 1 + (2/3) cos(k pi / (p+1)), p = 3.
        m = np.eye(3) + np.diag([1 / 3, 1 / 3], 1) + np.diag([1 / 3, 1 / 3], -1)
        expected = 1 + (2 / 3) * math.cos(math.pi / 4)
        assert operator_norm(m) == pytest.approx(expected, rel=1e-10)

    def test_non_finite_rejected(self):
        m = np.eye(2)
        m[0, 1] = m[1, 0] = np.nan
        with pytest.raises(ValueError):
            operator_norm(m)

    def test_matches_dense_oracle_small(self, rng):
        for p in range(1, 9):
            m = random_symmetric(rng, p)
            dense = np.abs(np.linalg.eigvalsh(m)).max()
            assert operator_norm(m, method="dense") == pytest.approx(dense, abs=1e-10)

    @pytest.mark.parametrize("method", ["power", "auto"])
    def test_large_methods_match_dense(self, rng, method):
        m = random_symmetric(rng, 150)
        dense = np.abs(np.linalg.eigvalsh(m)).max()
        assert operator_norm(m, method=method) == pytest.approx(dense, rel=1e-8)

    def test_deterministic(self, rng):
        m = random_symmetric(rng, 120)
        assert operator_norm(m) == operator_norm(m.copy())


class TestSchattenNorms:
    def test_identity_trace(self):
        assert schatten_norm(np.eye(3), "trace") == pytest.approx(3.0)

    def test_identity_hilbert_schmidt(self):
        assert schatten_norm(np.eye(3), "hilbert_schmidt") == pytest.approx(math.sqrt(3))

    def test_signed_diag_trace(self):
        assert schatten_norm(np.diag([2.0, -1.0]), "trace") == pytest.approx(3.0)

    def test_operator_order(self):
        assert schatten_norm(np.diag([2.0, -1.0]), "operator") == pytest.approx(2.0)

    def test_norm_ordering(self, rng):
        for _ in range(20):
            m = random_symmetric(rng, 7)
            op = schatten_norm(m, "operator")
            hs = schatten_norm(m, "hilbert_schmidt")
            tr = schatten_norm(m, "trace")
            assert op <= hs + 1e-12
            assert hs <= tr + 1e-12

    def test_unknown_order(self):
        with pytest.raises(ValueError):
            schatten_norm(np.eye(2), "nuclear")


class TestHardThreshold:
    def test_zero_threshold_is_identity_map(self, rng):
        m = random_symmetric(rng, 5)
        assert np.array_equal(hard_threshold(m, 0.0), m)

    def test_simple_cut(self):
        m = np.array([[1.0, 0.2], [0.2, 1.0]])
        assert np.array_equal(hard_threshold(m, 0.3), np.eye(2))

    def test_boundary_kept(self):
        m = np.array([[1.0, 0.2], [0.2, 1.0]])
        assert np.array_equal(hard_threshold(m, 0.2), m)

    def test_negative_threshold(self):
        with pytest.raises(ValueError):
            hard_threshold(np.eye(2), -0.1)

    def test_idempotent_and_nested(self, rng):
        m = random_symmetric(rng, 8)
        t1, t2 = 0.3, 0.7
        once = hard_threshold(m, t1)
        assert np.array_equal(hard_threshold(once, t1), once)
        assert np.array_equal(hard_threshold(once, t2), hard_threshold(m, t2))


class TestUnitDiagonalNormalize:
    def test_identity_fixed(self):
        assert np.array_equal(unit_diagonal_normalize(np.eye(4)), np.eye(4))

    def test_rank_one(self):
        out = unit_diagonal_normalize(np.array([[4.0, 2.0], [2.0, 1.0]]))
        assert np.allclose(out, np.ones((2, 2)))

    def test_diagonal_input(self):
        assert np.array_equal(unit_diagonal_normalize(np.diag([9.0, 4.0, 25.0])), np.eye(3))

    def test_degenerate_diagonal_named(self):
        m = np.diag([1.0, -2.0, 3.0])
        with pytest.raises(DegenerateDiagonalError) as err:
            unit_diagonal_normalize(m)
        assert err.value.index == 1

    def test_idempotent_and_pd_preserving(self, rng):
        for _ in range(100):
            p = int(rng.integers(2, 21))
            m = random_spd(rng, p)
            out = unit_diagonal_normalize(m)
            assert np.allclose(np.diag(out), 1.0)
            assert np.array_equal(unit_diagonal_normalize(out), out)
            assert np.linalg.eigvalsh(out)[0] > 0
            assert np.array_equal(np.sign(out), np.sign(m))


class TestFactorizations:
    def test_cholesky_identity(self):
        assert np.array_equal(spd_cholesky(np.eye(3)), np.eye(3))

    def test_cholesky_diagonal(self):
        assert np.allclose(spd_cholesky(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_cholesky_hand_case(self):
        l = spd_cholesky(np.array([[2.0, 1.0], [1.0, 2.0]]))
        expected = np.array([[math.sqrt(2), 0.0],
                             [1 / math.sqrt(2), math.sqrt(1.5)]])
        assert np.allclose(l, expected, atol=1e-12)
        assert np.allclose(l @ l.T, [[2, 1], [1, 2]], rtol=1e-10)

    def test_cholesky_rejects_with_pivot(self):
        m = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(NotPositiveDefiniteError) as err:
            spd_cholesky(m)
        assert err.value.pivot == 3

    def test_inverse_identity(self):
        assert np.allclose(spd_inverse(np.eye(5)), np.eye(5))

    def test_inverse_diagonal(self):
        assert np.allclose(spd_inverse(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))

    def test_inverse_hand_case(self):
        out = spd_inverse(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert np.allclose(out, np.array([[2, -1], [-1, 2]]) / 3.0, atol=1e-12)

    def test_inverse_involution(self, rng):
        for _ in range(10):
            m = random_spd(rng, 9)
            assert np.allclose(spd_inverse(spd_inverse(m)), m, atol=1e-6)

    def test_inverse_contract(self, rng):
        m = random_spd(rng, 12)
        assert np.abs(m @ spd_inverse(m) - np.eye(12)).max() < 1e-8

    def test_inverse_rejects_non_pd(self):
        with pytest.raises(NotPositiveDefiniteError):
            spd_inverse(np.diag([1.0, 0.0]))


class TestEigenResult:
    def test_reconstruction(self, rng):
        m = random_symmetric(rng, 10)
        res = full_eigen(m, with_vectors=True)
        assert isinstance(res, EigenResult)
        assert np.all(np.diff(res.values) <= 0)
        recon = res.vectors @ np.diag(res.values) @ res.vectors.T
        scale = max(np.abs(res.values).max(), 1e-30)
        assert np.abs(recon - m).max() <= 1e-8 * scale

    def test_values_only(self, rng):
        m = random_symmetric(rng, 6)
        res = full_eigen(m)
        assert res.vectors is None
        assert np.allclose(res.values, np.sort(np.linalg.eigvalsh(m))[::-1])


class TestCsvFormats:
    def test_dense_roundtrip(self, tmp_path, rng):
        m = random_symmetric(rng, 6)
        path = tmp_path / "m.csv"
        write_dense_csv(path, m)
        assert np.array_equal(read_dense_csv(path), m)

    def test_triplet_roundtrip_implied_diagonal(self, tmp_path):
        m = np.eye(4)
        m[0, 2] = m[2, 0] = 0.5
        m[1, 3] = m[3, 1] = -0.25
        path = tmp_path / "t.csv"
        write_triplet_csv(path, m)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "i,j,value"
        assert len(lines) == 3
        assert np.array_equal(read_triplet_csv(path, 4), m)

    def test_triplet_rejects_lower_triangle(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("i,j,value\n3,1,0.5\n")
        with pytest.raises(ValueError, match="lower-triangle"):
            read_triplet_csv(path, 4)

    def test_triplet_rejects_duplicates(self, tmp_path):
        path = tmp_path / "dup.csv"
        path.write_text("i,j,value\n1,2,0.5\n1,2,0.25\n")
        with pytest.raises(ValueError, match="duplicate"):
            read_triplet_csv(path, 3)

    def test_triplet_rejects_out_of_range(self, tmp_path):
        path = tmp_path / "oob.csv"
        path.write_text("i,j,value\n1,9,0.5\n")
        with pytest.raises(ValueError, match="out of range"):
            read_triplet_csv(path, 3)

    def test_triplet_diagonal_override(self, tmp_path):
        path = tmp_path / "diag.csv"
        path.write_text("i,j,value\n2,2,3.5\n")
        out = read_triplet_csv(path, 2)
        assert out[1, 1] == 3.5
        assert out[0, 0] == 1.0
