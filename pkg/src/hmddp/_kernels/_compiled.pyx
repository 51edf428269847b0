# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled backward-recursion kernel; mirrors reference.backward_recursion."""

import numpy as np

cimport numpy as cnp
from libc.math cimport isfinite, sqrt

ctypedef cnp.float64_t f64


cdef int _cholesky(f64[:, ::1] M, f64[:, ::1] L, int m) noexcept nogil:
    """Lower Cholesky factor of M into L; 1 if M is not positive definite."""
    cdef int i, j, p
    cdef f64 s
    for i in range(m):
        for j in range(m):
            L[i, j] = 0.0
    for j in range(m):
        s = M[j, j]
        for p in range(j):
            s -= L[j, p] * L[j, p]
        if not (s > 0.0) or not isfinite(s):
            return 1
        L[j, j] = sqrt(s)
        for i in range(j + 1, m):
            s = M[i, j]
            for p in range(j):
                s -= L[i, p] * L[j, p]
            L[i, j] = s / L[j, j]
    return 0


cdef void _cho_solve(f64[:, ::1] L, f64[::1] b, f64[::1] x, f64[::1] y, int m) noexcept nogil:
    """Solve L L^T x = b given the lower factor L."""
    cdef int i, p
    cdef f64 s
    for i in range(m):
        s = b[i]
        for p in range(i):
            s -= L[i, p] * y[p]
        y[i] = s / L[i, i]
    for i in range(m - 1, -1, -1):
        s = y[i]
        for p in range(i + 1, m):
            s -= L[p, i] * x[p]
        x[i] = s / L[i, i]


def backward_recursion(
    f64[:, :, ::1] A,
    f64[:, :, ::1] B,
    f64[:, ::1] lx,
    f64[:, ::1] lu,
    f64[:, :, ::1] lxx,
    f64[:, :, ::1] luu,
    f64[:, :, ::1] lux,
    f64[:, ::1] defects,
    f64[::1] lfx,
    f64[:, ::1] lfxx,
    double mu_v,
    f64[:, ::1] kff,
    f64[:, :, ::1] Kfb,
    f64[:, ::1] vx,
    f64[:, :, ::1] vxx,
    f64[:, ::1] qx,
    f64[:, ::1] qu,
    f64[:, :, ::1] qxx,
    f64[:, :, ::1] quu,
    f64[:, :, ::1] qux,
):
    cdef int N = A.shape[0]
    cdef int n = A.shape[1]
    cdef int m = B.shape[2]
    cdef int k, i, j, a, b, p
    cdef double dv1 = 0.0, dv2 = 0.0, s
    cdef int fail = -1

    scratch = {
        "vxp": np.empty(n),
        "va": np.empty((n, n)),
        "vb": np.empty((n, m)),
        "quu_t": np.empty((m, m)),
        "qux_t": np.empty((m, n)),
        "L": np.empty((m, m)),
        "yv": np.empty(m),
        "xv": np.empty(m),
        "rhs": np.empty(m),
        "w": np.empty(m),
        "kq": np.empty((m, n)),
        "vnew": np.empty((n, n)),
    }
    cdef f64[::1] vxp = scratch["vxp"]
    cdef f64[:, ::1] va = scratch["va"]
    cdef f64[:, ::1] vb = scratch["vb"]
    cdef f64[:, ::1] quu_t = scratch["quu_t"]
    cdef f64[:, ::1] qux_t = scratch["qux_t"]
    cdef f64[:, ::1] L = scratch["L"]
    cdef f64[::1] yv = scratch["yv"]
    cdef f64[::1] xv = scratch["xv"]
    cdef f64[::1] rhs = scratch["rhs"]
    cdef f64[::1] w = scratch["w"]
    cdef f64[:, ::1] kq = scratch["kq"]
    cdef f64[:, ::1] vnew = scratch["vnew"]

    with nogil:
        for i in range(n):
            vx[N, i] = lfx[i]
            for j in range(n):
                vxx[N, i, j] = 0.5 * (lfxx[i, j] + lfxx[j, i])

        for k in range(N - 1, -1, -1):
            # vxp = Vx' + Vxx' d_k
            for i in range(n):
                s = vx[k + 1, i]
                for j in range(n):
                    s += vxx[k + 1, i, j] * defects[k, j]
                vxp[i] = s
            # va = Vxx' A_k, vb = Vxx' B_k
            for i in range(n):
                for j in range(n):
                    s = 0.0
                    for p in range(n):
                        s += vxx[k + 1, i, p] * A[k, p, j]
                    va[i, j] = s
                for a in range(m):
                    s = 0.0
                    for p in range(n):
                        s += vxx[k + 1, i, p] * B[k, p, a]
                    vb[i, a] = s
            # Q-coefficients
            for i in range(n):
                s = lx[k, i]
                for p in range(n):
                    s += A[k, p, i] * vxp[p]
                qx[k, i] = s
            for a in range(m):
                s = lu[k, a]
                for p in range(n):
                    s += B[k, p, a] * vxp[p]
                qu[k, a] = s
            for i in range(n):
                for j in range(n):
                    s = lxx[k, i, j]
                    for p in range(n):
                        s += A[k, p, i] * va[p, j]
                    qxx[k, i, j] = s
            for a in range(m):
                for b in range(m):
                    s = luu[k, a, b]
                    for p in range(n):
                        s += B[k, p, a] * vb[p, b]
                    quu[k, a, b] = s
                for j in range(n):
                    s = lux[k, a, j]
                    for p in range(n):
                        s += B[k, p, a] * va[p, j]
                    qux[k, a, j] = s
            # regularized control Hessian / cross term
            for a in range(m):
                for b in range(m):
                    s = 0.0
                    for p in range(n):
                        s += B[k, p, a] * B[k, p, b]
                    quu_t[a, b] = quu[k, a, b] + mu_v * s
                for j in range(n):
                    s = 0.0
                    for p in range(n):
                        s += B[k, p, a] * A[k, p, j]
                    qux_t[a, j] = qux[k, a, j] + mu_v * s
            for a in range(m):
                for b in range(a + 1, m):
                    s = 0.5 * (quu_t[a, b] + quu_t[b, a])
                    quu_t[a, b] = s
                    quu_t[b, a] = s
            if _cholesky(quu_t, L, m) != 0:
                fail = k
                break
            # gains
            for a in range(m):
                rhs[a] = qu[k, a]
            _cho_solve(L, rhs, xv, yv, m)
            for a in range(m):
                kff[k, a] = -xv[a]
            for j in range(n):
                for a in range(m):
                    rhs[a] = qux_t[a, j]
                _cho_solve(L, rhs, xv, yv, m)
                for a in range(m):
                    Kfb[k, a, j] = -xv[a]
            # expected-reduction terms (unregularized Quu)
            for a in range(m):
                s = 0.0
                for b in range(m):
                    s += quu[k, a, b] * kff[k, b]
                w[a] = s
            for a in range(m):
                dv1 += kff[k, a] * qu[k, a]
                dv2 += kff[k, a] * w[a]
            # value update: policy substituted into the quadratic model
            for a in range(m):
                for j in range(n):
                    s = 0.0
                    for b in range(m):
                        s += quu[k, a, b] * Kfb[k, b, j]
                    kq[a, j] = s
            for i in range(n):
                s = qx[k, i]
                for a in range(m):
                    s += Kfb[k, a, i] * (w[a] + qu[k, a]) + qux[k, a, i] * kff[k, a]
                vx[k, i] = s
            for i in range(n):
                for j in range(n):
                    s = qxx[k, i, j]
                    for a in range(m):
                        s += Kfb[k, a, i] * kq[a, j] + Kfb[k, a, i] * qux[k, a, j] \
                            + qux[k, a, i] * Kfb[k, a, j]
                    vnew[i, j] = s
            for i in range(n):
                for j in range(n):
                    vxx[k, i, j] = 0.5 * (vnew[i, j] + vnew[j, i])

    if fail >= 0:
        return False, fail, dv1, dv2
    return True, -1, dv1, dv2
