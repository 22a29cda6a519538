"""Backend equivalence: the numba kernels and the uncompiled numpy path
must produce matching numerics on identical inputs."""

import numpy as np
import pytest

from precsup import _kernels

from conftest import random_spd

NUMBA_ACTIVE = _kernels.ACTIVE_BACKEND == "numba"


def _lasso_problem(rng, n):
    a = random_spd(rng, n)
    b = rng.standard_normal(n)
    u0 = np.zeros(n)
    return np.ascontiguousarray(a), b, u0


def test_backend_reported():
    assert _kernels.ACTIVE_BACKEND in ("numba", "numpy")


def test_lasso_cd_solves_kkt(rng):
    a, b, u = _lasso_problem(rng, 25)
    g = a @ u + b
    passes = _kernels.lasso_cd(a, g, u, 0.3, 1e-12, 10_000)
    assert passes > 0
    # KKT of 0.5 u'Au + b'u + lam ||u||_1.
    grad = a @ u + b
    on = u != 0
    assert np.abs(grad[on] + 0.3 * np.sign(u[on])).max() < 1e-8
    assert np.all(np.abs(grad[~on]) <= 0.3 + 1e-8)


@pytest.mark.skipif(not NUMBA_ACTIVE, reason="numba backend unavailable")
def test_lasso_cd_backends_agree(rng):
    for n in (5, 40):
        a, b, u0 = _lasso_problem(rng, n)
        u1, u2 = u0.copy(), u0.copy()
        g1, g2 = a @ u1 + b, a @ u2 + b
        _kernels.lasso_cd_numba(a, g1, u1, 0.2, 1e-11, 5000)
        _kernels.lasso_cd_numpy(a, g2, u2, 0.2, 1e-11, 5000)
        assert np.allclose(u1, u2, atol=1e-12)


@pytest.mark.skipif(not NUMBA_ACTIVE, reason="numba backend unavailable")
def test_glasso_sweep_backends_agree(rng):
    p = 15
    s = random_spd(rng, p)
    theta1 = np.diag(1.0 / np.diag(s))
    w1 = np.diag(np.diag(s).copy())
    theta2, w2 = theta1.copy(), w1.copy()
    d1 = _kernels.glasso_sweep_numba(np.ascontiguousarray(s), theta1, w1, 0.1, 1e-9, 1000)
    d2 = _kernels.glasso_sweep_numpy(np.ascontiguousarray(s), theta2, w2, 0.1, 1e-9, 1000)
    assert np.allclose(theta1, theta2, atol=1e-10)
    assert np.allclose(w1, w2, atol=1e-10)
    assert d1 == pytest.approx(d2, rel=1e-9)


def test_glasso_sweep_maintains_inverse(rng):
    p = 12
    s = random_spd(rng, p)
    theta = np.diag(1.0 / np.diag(s))
    w = np.diag(np.diag(s).copy())
    for _ in range(30):
        delta = _kernels.glasso_sweep(np.ascontiguousarray(s), theta, w, 0.05, 1e-10, 2000)
        if delta < 1e-9:
            break
    assert np.abs(theta @ w - np.eye(p)).max() < 1e-8


def test_power_norm_converges(rng):
    m = np.ascontiguousarray(random_spd(rng, 80))
    v0 = np.random.default_rng(3).standard_normal(80)
    est, iters = _kernels.power_norm(m, v0, 1e-12, 2000)
    assert iters > 0
    assert est == pytest.approx(np.abs(np.linalg.eigvalsh(m)).max(), rel=1e-9)


def test_power_norm_sign_symmetric_spectrum(rng):
    # Eigenvalues come in +/- pairs; squared-operator iteration must not stall.
    a = rng.standard_normal((30, 30))
    m = np.zeros((60, 60))
    m[:30, 30:] = a
    m[30:, :30] = a.T
    m = np.ascontiguousarray(m)
    v0 = np.random.default_rng(5).standard_normal(60)
    est, iters = _kernels.power_norm(m, v0, 1e-12, 5000)
    assert iters > 0
    assert est == pytest.approx(np.abs(np.linalg.eigvalsh(m)).max(), rel=1e-8)


def test_power_norm_zero_matrix():
    est, _ = _kernels.power_norm(np.zeros((4, 4)), np.ones(4), 1e-10, 100)
    assert est == 0.0


def test_env_flag_selects_numpy(tmp_path):
    import subprocess
    import sys

    code = ("import precsup._kernels as k; print(k.ACTIVE_BACKEND); "
            "print(k.glasso_sweep is k.glasso_sweep_numpy)")
    out = subprocess.run([sys.executable, "-c", code],
                         env={"PATH": "/usr/bin:/bin", "PRECSUP_NO_NUMBA": "1"},
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert out.stdout.splitlines() == ["numpy", "True"]
