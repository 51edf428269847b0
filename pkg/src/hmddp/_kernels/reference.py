"""Pure-Python backward-recursion kernel (numpy/scipy reference)."""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve


def backward_recursion(
    A: np.ndarray,
    B: np.ndarray,
    lx: np.ndarray,
    lu: np.ndarray,
    lxx: np.ndarray,
    luu: np.ndarray,
    lux: np.ndarray,
    defects: np.ndarray,
    lfx: np.ndarray,
    lfxx: np.ndarray,
    mu_v: float,
    kff: np.ndarray,
    Kfb: np.ndarray,
    vx: np.ndarray,
    vxx: np.ndarray,
    qx: np.ndarray,
    qu: np.ndarray,
    qxx: np.ndarray,
    quu: np.ndarray,
    qux: np.ndarray,
) -> tuple[bool, int, float, float]:
    """Run the value recursion backwards over the horizon.

    Inputs are per-step derivative stacks (time along axis 0); `defects`
    holds the gap to the next node state at segment-boundary steps and
    zero rows elsewhere. Output arrays are filled in place. Returns
    (ok, fail_step, dv1, dv2); on a Cholesky failure ok is False and
    fail_step is the offending step, with outputs valid above it only.
    """
    N = A.shape[0]
    vx[N] = lfx
    vxx[N] = 0.5 * (lfxx + lfxx.T)
    dv1 = 0.0
    dv2 = 0.0
    for k in range(N - 1, -1, -1):
        Ak, Bk = A[k], B[k]
        Vx1 = vx[k + 1]
        Vxx1 = vxx[k + 1]
        # Defect-corrected value gradient at the next step.
        Vxp = Vx1 + Vxx1 @ defects[k]
        Qx = lx[k] + Ak.T @ Vxp
        Qu = lu[k] + Bk.T @ Vxp
        VA = Vxx1 @ Ak
        VB = Vxx1 @ Bk
        Qxx = lxx[k] + Ak.T @ VA
        Quu = luu[k] + Bk.T @ VB
        Qux = lux[k] + Bk.T @ VA
        # State-value regularization enters only the gain computation.
        Quu_t = Quu + mu_v * (Bk.T @ Bk)
        Qux_t = Qux + mu_v * (Bk.T @ Ak)
        Quu_t = 0.5 * (Quu_t + Quu_t.T)
        try:
            factor = cho_factor(Quu_t, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            return False, k, dv1, dv2
        k_k = -cho_solve(factor, Qu, check_finite=False)
        K_k = -cho_solve(factor, Qux_t, check_finite=False)
        kff[k] = k_k
        Kfb[k] = K_k
        dv1 += float(k_k @ Qu)
        dv2 += float(k_k @ Quu @ k_k)
        # Policy substituted into the quadratic model; reduces to the
        # plain recursion when mu_v = 0.
        Vx_new = Qx + K_k.T @ (Quu @ k_k) + K_k.T @ Qu + Qux.T @ k_k
        Vxx_new = Qxx + K_k.T @ Quu @ K_k + K_k.T @ Qux + Qux.T @ K_k
        vx[k] = Vx_new
        vxx[k] = 0.5 * (Vxx_new + Vxx_new.T)
        qx[k] = Qx
        qu[k] = Qu
        qxx[k] = Qxx
        quu[k] = Quu
        qux[k] = Qux
    return True, -1, dv1, dv2
