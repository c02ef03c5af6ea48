# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels (see ``_pykernels`` for the reference twin)."""

from libc.math cimport isfinite


def ldl_factor(const double[::1] diag, const double[::1] off,
               double[::1] pivots, double[::1] lower):
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t k
    cdef double p = diag[0]
    cdef double lk
    pivots[0] = p
    if not (p > 0.0 and isfinite(p)):
        return 0
    for k in range(n - 1):
        lk = off[k] / p
        lower[k] = lk
        p = diag[k + 1] - lk * off[k]
        pivots[k + 1] = p
        if not (p > 0.0 and isfinite(p)):
            return k + 1
    return -1


def ldl_solve(const double[::1] pivots, const double[::1] lower, double[:, :] rhs):
    cdef Py_ssize_t n = pivots.shape[0]
    cdef Py_ssize_t m = rhs.shape[1]
    cdef Py_ssize_t j, k
    for j in range(m):
        for k in range(1, n):
            rhs[k, j] -= lower[k - 1] * rhs[k - 1, j]
        for k in range(n):
            rhs[k, j] /= pivots[k]
        for k in range(n - 2, -1, -1):
            rhs[k, j] -= lower[k] * rhs[k + 1, j]


def ldl_inverse_diagonal(const double[::1] pivots, const double[::1] lower,
                         double[::1] out):
    cdef Py_ssize_t n = pivots.shape[0]
    cdef Py_ssize_t k
    out[n - 1] = 1.0 / pivots[n - 1]
    for k in range(n - 2, -1, -1):
        out[k] = 1.0 / pivots[k] + lower[k] * lower[k] * out[k + 1]


def tv1d_denoise(const double[::1] y, double lam, double[::1] x):
    cdef Py_ssize_t n = y.shape[0]
    if n == 0:
        return
    cdef double twolam = 2.0 * lam
    cdef double minlam = -lam
    cdef Py_ssize_t k = 0, k0 = 0, kplus = 0, kminus = 0
    cdef double umin = lam, umax = minlam
    cdef double vmin = y[0] - lam, vmax = y[0] + lam
    while True:
        while k == n - 1:
            if umin < 0.0:
                while True:
                    x[k0] = vmin
                    k0 += 1
                    if k0 > kminus:
                        break
                k = k0
                kminus = k0
                vmin = y[k]
                umin = lam
                umax = vmin + umin - vmax
            elif umax > 0.0:
                while True:
                    x[k0] = vmax
                    k0 += 1
                    if k0 > kplus:
                        break
                k = k0
                kplus = k0
                vmax = y[k]
                umax = minlam
                umin = vmax + umax - vmin
            else:
                vmin += umin / (k - k0 + 1)
                while k0 <= k:
                    x[k0] = vmin
                    k0 += 1
                return
        umin += y[k + 1] - vmin
        if umin < minlam:
            while True:
                x[k0] = vmin
                k0 += 1
                if k0 > kminus:
                    break
            k = k0
            kplus = k0
            kminus = k0
            vmin = y[k]
            vmax = vmin + twolam
            umin = lam
            umax = minlam
            continue
        umax += y[k + 1] - vmax
        if umax > lam:
            while True:
                x[k0] = vmax
                k0 += 1
                if k0 > kplus:
                    break
            k = k0
            kplus = k0
            kminus = k0
            vmax = y[k]
            vmin = vmax - twolam
            umin = lam
            umax = minlam
            continue
        k += 1
        if umin >= lam:
            kminus = k
            vmin += (umin - lam) / (kminus - k0 + 1)
            umin = lam
        if umax <= minlam:
            kplus = k
            vmax += (umax + lam) / (kplus - k0 + 1)
            umax = minlam
