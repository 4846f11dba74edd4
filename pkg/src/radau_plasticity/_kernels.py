"""Compiled per-point stage solve and tangent (Mandel basis).

Same equations, Newton strategy and active-set rule as the numpy path in
:mod:`stage_solver`; used there for batches without strain coupling.  Loops
over points are plain Python-style loops that numba compiles.
"""

import numpy as np
from numba import njit

OK, NOT_CONVERGED, DEGENERATE, SINGULAR = 0, 1, 2, 3

_SQRT23 = np.sqrt(2.0 / 3.0)


@njit(cache=True)
def _radius(mat, lam):
    sy, sinf, H, delta = mat[1], mat[2], mat[3], mat[4]
    return _SQRT23 * (sy + H * lam - sinf * np.expm1(-delta * lam))


@njit(cache=True)
def _slope(mat, lam):
    sinf, H, delta = mat[2], mat[3], mat[4]
    return H + sinf * delta * np.exp(-delta * lam)


@njit(cache=True)
def _flow(Ehat, Ep, s, N, nx):
    """Unit directions ``N_i`` and norms of ``dev(Ehat_i) - Ep_i``; False if a norm vanishes."""
    for i in range(s):
        m = (Ehat[i, 0] + Ehat[i, 1] + Ehat[i, 2]) / 3.0
        acc = 0.0
        for k in range(6):
            v = Ehat[i, k] - Ep[i, k]
            if k < 3:
                v -= m
            N[i, k] = v
            acc += v * v
        nx[i] = np.sqrt(acc)
        if nx[i] == 0.0:
            return False
        for k in range(6):
            N[i, k] /= nx[i]
    return True


@njit(cache=True)
def _system(A, mat, Ep_n, alpha_n, Ehat, Ep, dG, active, N, nx, R, J):
    s = A.shape[0]
    inv2mu = 0.5 / mat[0]
    m = 6 * s
    for i in range(s):
        lam = alpha_n
        for j in range(s):
            lam += _SQRT23 * A[i, j] * dG[j]
        for k in range(6):
            v = Ep[i, k] - Ep_n[k]
            for j in range(s):
                v -= A[i, j] * dG[j] * N[j, k]
            R[6 * i + k] = v
        if active[i]:
            R[m + i] = nx[i] - _radius(mat, lam) * inv2mu
        else:
            R[m + i] = dG[i]
        k2 = _slope(mat, lam)
        for j in range(s):
            # dR_Ep_i / dEp_j = delta_ij I + a_ij dG_j (I - N_j N_j) / |x_j|
            c = A[i, j] * dG[j] / nx[j]
            for k in range(6):
                for l in range(6):
                    v = c * ((1.0 if k == l else 0.0) - N[j, k] * N[j, l])
                    if i == j and k == l:
                        v += 1.0
                    J[6 * i + k, 6 * j + l] = v
                J[6 * i + k, m + j] = -A[i, j] * N[j, k]
            for l in range(6):
                J[m + i, 6 * j + l] = -N[i, l] if (active[i] and i == j) else 0.0
            if active[i]:
                J[m + i, m + j] = -(2.0 / 3.0) * k2 * A[i, j] * inv2mu
            else:
                J[m + i, m + j] = 1.0 if i == j else 0.0


@njit(cache=True)
def _newton(A, mat, Ep_n, alpha_n, Ehat, Ep, dG, active, tol, max_iter):
    """Returns ``(status, iterations)``; updates ``Ep``, ``dG`` in place."""
    s = A.shape[0]
    n7 = 7 * s
    N = np.empty((s, 6))
    nx = np.empty(s)
    R = np.empty(n7)
    J = np.empty((n7, n7))
    it = 0
    while True:
        if not _flow(Ehat, Ep, s, N, nx):
            return DEGENERATE, it
        _system(A, mat, Ep_n, alpha_n, Ehat, Ep, dG, active, N, nx, R, J)
        rn = 0.0
        for k in range(n7):
            rn += R[k] * R[k]
        rn = np.sqrt(rn)
        if not np.isfinite(rn):
            return NOT_CONVERGED, it
        if rn >= tol and it >= max_iter:
            return NOT_CONVERGED, it
        delta = np.linalg.solve(J, -R)
        for i in range(s):
            for k in range(6):
                Ep[i, k] += delta[6 * i + k]
            dG[i] += delta[6 * s + i]
        it += 1
        if rn < tol:
            # the update after reaching tol polishes to round-off
            return OK, it


@njit(cache=True)
def stage_update(A, mat, Ep_n, alpha_n, Ehat, G, clamp, tol, max_iter, want_tangent):
    """Solve the stage systems of ``n`` points and their tangents.

    ``mat = (mu, sigma_Y, sigma_inf - sigma_Y, H, delta, kappa)``.  Returns
    ``(Ep_end, alpha_end, dG, active, iterations, tangent, status)`` with the
    tangent in the Mandel basis.
    """
    n = Ehat.shape[0]
    s = A.shape[0]
    n7 = 7 * s
    mu = mat[0]
    kappa = mat[5]
    Ep_out = np.empty((n, 6))
    alpha_out = np.empty(n)
    dG_out = np.zeros((n, s))
    act_out = np.ones((n, s), dtype=np.bool_)
    iters = np.zeros(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.int64)
    C = np.zeros((n, 6, 6))
    N = np.empty((s, 6))
    nx = np.empty(s)
    R = np.empty(n7)
    J = np.empty((n7, n7))
    for p in range(n):
        Ep = np.empty((s, 6))
        for i in range(s):
            Ep[i] = Ep_n[p]
        dG = np.zeros(s)
        active = np.ones(s, dtype=np.bool_)
        st, it = _newton(A, mat, Ep_n[p], alpha_n[p], Ehat[p], Ep, dG, active, tol, max_iter)
        iters[p] = it
        if clamp and s > 1:
            for _ in range(2 * s):
                if st != OK:
                    break
                if not _flow(Ehat[p], Ep, s, N, nx):
                    st = DEGENERATE
                    break
                changed = False
                for i in range(s - 1):
                    lam = alpha_n[p]
                    for j in range(s):
                        lam += _SQRT23 * A[i, j] * dG[j]
                    f = nx[i] - _radius(mat, lam) * 0.5 / mu
                    if active[i] and dG[i] < -1e-15:
                        active[i] = False
                        dG[i] = 0.0
                        changed = True
                    elif not active[i] and f > 1e-13:
                        active[i] = True
                        changed = True
                if not changed:
                    break
                st, it = _newton(A, mat, Ep_n[p], alpha_n[p], Ehat[p], Ep, dG, active, tol, max_iter)
                iters[p] += it
        status[p] = st
        if st != OK:
            continue
        Ep_out[p] = Ep[s - 1]
        lam = alpha_n[p]
        for j in range(s):
            lam += _SQRT23 * A[s - 1, j] * dG[j]
        alpha_out[p] = lam
        dG_out[p] = dG
        act_out[p] = active
        if not want_tangent:
            continue
        if not _flow(Ehat[p], Ep, s, N, nx):
            status[p] = DEGENERATE
            continue
        _system(A, mat, Ep_n[p], alpha_n[p], Ehat[p], Ep, dG, active, N, nx, R, J)
        rhs = np.zeros((n7, 6))
        for i in range(s):
            for j in range(s):
                c = -A[i, j] * dG[j] / nx[j]
                if c == 0.0:
                    continue
                # c (I - N_j N_j) P G_j
                PG = G[p, j].copy()
                for l in range(6):
                    m3 = (PG[0, l] + PG[1, l] + PG[2, l]) / 3.0
                    for k in range(3):
                        PG[k, l] -= m3
                for k in range(6):
                    for l in range(6):
                        v = PG[k, l]
                        for q in range(6):
                            v -= N[j, k] * N[j, q] * PG[q, l]
                        rhs[6 * i + k, l] += c * v
            if active[i]:
                for l in range(6):
                    v = 0.0
                    for q in range(6):
                        v += N[i, q] * G[p, i, q, l]
                    rhs[6 * s + i, l] = v
        dX = np.linalg.solve(J, -rhs)
        for k in range(6):
            for l in range(6):
                dev_kl = (1.0 if k == l else 0.0) - (1.0 / 3.0 if (k < 3 and l < 3) else 0.0)
                vol_kl = 1.0 if (k < 3 and l < 3) else 0.0
                C[p, k, l] = kappa * vol_kl + 2.0 * mu * (dev_kl - dX[6 * (s - 1) + k, l])
    return Ep_out, alpha_out, dG_out, act_out, iters, C, status
