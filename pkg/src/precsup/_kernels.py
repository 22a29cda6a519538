"""Hot numeric kernels with two interchangeable backends.

The coordinate-descent sweep of the penalized precision solver and the
power-iteration spectral norm dominate runtime at p in the hundreds to
thousands. Each kernel is written once in numba-compatible numpy: the
numba backend compiles that source with ``@njit``, the fallback runs the
identical source uncompiled (vectorized slicing plus a cheap scalar
coordinate loop), so both paths share arithmetic exactly.

Backend selection, fixed at import time:
  * ``PRECSUP_NO_NUMBA`` set to a non-empty value -> numpy fallback.
  * numba missing or failing to import -> numpy fallback.
  * otherwise -> numba.

``ACTIVE_BACKEND`` reports the choice; both variants stay importable for
benchmarks (``benchmarks/bench_kernels.py``) and equivalence tests.
"""

from __future__ import annotations

import os

import numpy as np


def _lasso_cd_impl(a, g, u, lam, tol, max_passes):
    """Cyclic coordinate descent for  min_u 0.5 u'Au + b'u + lam*||u||_1.

    `a` is symmetric positive definite; `g` must hold a@u + b for the warm
    start `u` on entry and is maintained incrementally. `g` and `u` are
    updated in place. Returns the number of passes taken, negated when the
    pass budget ran out before the max coordinate step fell below tol.
    """
    n = u.shape[0]
    for it in range(max_passes):
        max_step = 0.0
        for i in range(n):
            aii = a[i, i]
            ui = u[i]
            ci = g[i] - aii * ui
            if ci > lam:
                x = (lam - ci) / aii
            elif ci < -lam:
                x = (-lam - ci) / aii
            else:
                x = 0.0
            d = x - ui
            if d != 0.0:
                u[i] = x
                g += d * a[i]
                ad = abs(d)
                if ad > max_step:
                    max_step = ad
        if max_step <= tol:
            return it + 1
    return -max_passes


def _glasso_sweep_impl(s, theta, w, lam, inner_tol, inner_max_passes):
    """One full block-coordinate sweep of the penalized precision solver.

    For each column j the (column, diagonal) block of `theta` is minimized
    with the off-diagonal l1 penalty `lam` (inner coordinate descent to
    `inner_tol`, inlined below so the whole sweep compiles as one kernel),
    while `w` is maintained as the inverse of `theta` through rank-one
    block formulas. Both matrices are updated in place; returns the max
    absolute entry change of theta over the sweep.
    """
    p = s.shape[0]
    pm = p - 1
    max_delta = 0.0
    sub = np.empty((pm, pm))
    w12 = np.empty(pm)
    b = np.empty(pm)
    u = np.empty(pm)
    for j in range(p):
        sub[:j, :j] = w[:j, :j]
        sub[:j, j:] = w[:j, j + 1:]
        sub[j:, :j] = w[j + 1:, :j]
        sub[j:, j:] = w[j + 1:, j + 1:]
        w12[:j] = w[:j, j]
        w12[j:] = w[j + 1:, j]
        u[:j] = theta[:j, j]
        u[j:] = theta[j + 1:, j]
        s22 = s[j, j]
        # sub becomes the inverse of the (p-1)-block of theta.
        sub -= (w12.reshape(pm, 1) * w12.reshape(1, pm)) / w[j, j]
        # Scaling the block objective by 1/s22 leaves its minimizer unchanged.
        b[:j] = s[:j, j]
        b[j:] = s[j + 1:, j]
        b /= s22
        g = np.dot(sub, u) + b
        lam_eff = lam / s22
        for it in range(inner_max_passes):
            max_step = 0.0
            for i in range(pm):
                aii = sub[i, i]
                ui = u[i]
                ci = g[i] - aii * ui
                if ci > lam_eff:
                    x = (lam_eff - ci) / aii
                elif ci < -lam_eff:
                    x = (-lam_eff - ci) / aii
                else:
                    x = 0.0
                d = x - ui
                if d != 0.0:
                    u[i] = x
                    g += d * sub[i]
                    ad = abs(d)
                    if ad > max_step:
                        max_step = ad
            if max_step <= inner_tol:
                break

        su = np.dot(sub, u)
        theta22 = 1.0 / s22 + np.dot(u, su)
        d = abs(theta22 - theta[j, j])
        if d > max_delta:
            max_delta = d
        for i in range(pm):
            r = i if i < j else i + 1
            di = abs(u[i] - theta[r, j])
            if di > max_delta:
                max_delta = di
        theta[:j, j] = u[:j]
        theta[j + 1:, j] = u[j:]
        theta[j, :j] = u[:j]
        theta[j, j + 1:] = u[j:]
        theta[j, j] = theta22

        w12n = -s22 * su
        w[j, j] = s22
        w[:j, j] = w12n[:j]
        w[j + 1:, j] = w12n[j:]
        w[j, :j] = w12n[:j]
        w[j, j + 1:] = w12n[j:]
        sub += s22 * (su.reshape(pm, 1) * su.reshape(1, pm))
        w[:j, :j] = sub[:j, :j]
        w[:j, j + 1:] = sub[:j, j:]
        w[j + 1:, :j] = sub[j:, :j]
        w[j + 1:, j + 1:] = sub[j:, j:]
    return max_delta


def _power_norm_impl(m, v0, tol, max_iter):
    """Spectral norm (max |eigenvalue|) of symmetric `m` by power iteration.

    Iterates on m@m so eigenvalue-sign ties cannot stall convergence.
    Returns (estimate, iterations); iterations is negative when the
    successive-estimate tolerance was not reached within max_iter.
    """
    nv = np.sqrt(np.dot(v0, v0))
    if nv == 0.0:
        return 0.0, 0
    v = v0 / nv
    est_prev = -1.0
    est = 0.0
    for it in range(max_iter):
        mv = np.dot(m, v)
        est = np.sqrt(np.dot(mv, mv))
        if est == 0.0:
            return 0.0, it + 1
        if abs(est - est_prev) <= tol * est:
            return est, it + 1
        est_prev = est
        m2v = np.dot(m, mv)
        nrm = np.sqrt(np.dot(m2v, m2v))
        if nrm == 0.0:
            return est, it + 1
        v = m2v / nrm
    return est, -max_iter


def _pick_backend():
    if os.environ.get("PRECSUP_NO_NUMBA"):
        return "numpy", None
    try:
        from numba import njit
    except ImportError:
        return "numpy", None
    return "numba", njit


ACTIVE_BACKEND, _njit = _pick_backend()

lasso_cd_numpy = _lasso_cd_impl
glasso_sweep_numpy = _glasso_sweep_impl
power_norm_numpy = _power_norm_impl

if ACTIVE_BACKEND == "numba":
    lasso_cd_numba = _njit(cache=True)(_lasso_cd_impl)
    glasso_sweep_numba = _njit(cache=True)(_glasso_sweep_impl)
    power_norm_numba = _njit(cache=True)(_power_norm_impl)
    lasso_cd = lasso_cd_numba
    glasso_sweep = glasso_sweep_numba
    power_norm = power_norm_numba
else:
    lasso_cd = lasso_cd_numpy
    glasso_sweep = glasso_sweep_numpy
    power_norm = power_norm_numpy
