"""Pure-Python numerical kernels.

Same call signatures as the compiled ``_ckernels`` extension. Inputs are
float64 numpy arrays; outputs are written in place. Loops run over plain
Python lists, which is several times faster than indexing numpy scalars.
"""

__all__ = ["ldl_factor", "ldl_solve", "ldl_inverse_diagonal", "tv1d_denoise"]


def ldl_factor(diag, off, pivots, lower):
    """Factor a symmetric tridiagonal matrix as L D L^T.

    ``diag`` has length n and ``off`` length n-1. On return ``pivots`` holds
    D and ``lower`` the subdiagonal of the unit lower bidiagonal L.

    Returns -1 on success, otherwise the first index whose pivot is not
    strictly positive (or not finite).
    """
    d = diag.tolist()
    e = off.tolist()
    n = len(d)
    piv = [0.0] * n
    low = [0.0] * (n - 1)
    p = d[0]
    piv[0] = p
    if not p > 0.0 or p == float("inf"):
        return 0
    for k in range(n - 1):
        lk = e[k] / p
        low[k] = lk
        p = d[k + 1] - lk * e[k]
        piv[k + 1] = p
        if not p > 0.0 or p == float("inf"):
            return k + 1
    pivots[:] = piv
    lower[:] = low
    return -1


def ldl_solve(pivots, lower, rhs):
    """Overwrite ``rhs`` (n, m) with the solution of L D L^T x = rhs."""
    piv = pivots.tolist()
    low = lower.tolist()
    n = len(piv)
    for j in range(rhs.shape[1]):
        b = rhs[:, j].tolist()
        for k in range(1, n):
            b[k] -= low[k - 1] * b[k - 1]
        for k in range(n):
            b[k] /= piv[k]
        for k in range(n - 2, -1, -1):
            b[k] -= low[k] * b[k + 1]
        rhs[:, j] = b


def ldl_inverse_diagonal(pivots, lower, out):
    """Diagonal of (L D L^T)^-1 by the backward recurrence.

    z[n-1] = 1/D[n-1];  z[k] = 1/D[k] + L[k]^2 z[k+1]
    """
    piv = pivots.tolist()
    low = lower.tolist()
    n = len(piv)
    z = [0.0] * n
    z[n - 1] = 1.0 / piv[n - 1]
    for k in range(n - 2, -1, -1):
        z[k] = 1.0 / piv[k] + low[k] * low[k] * z[k + 1]
    out[:] = z


def tv1d_denoise(signal, lam, out):
    """Exact 1D total-variation denoising (direct taut-string style method).

    Minimizes 0.5*||u - y||^2 + lam * sum |u[k+1] - u[k]| in one pass with
    occasional backtracking; O(n) in practice.
    """
    y = signal.tolist()
    n = len(y)
    if n == 0:
        return
    x = [0.0] * n
    twolam = 2.0 * lam
    minlam = -lam
    k = k0 = 0
    kplus = kminus = 0
    umin = lam
    umax = minlam
    vmin = y[0] - lam
    vmax = y[0] + lam
    while True:
        while k == n - 1:
            if umin < 0.0:
                while True:
                    x[k0] = vmin
                    k0 += 1
                    if k0 > kminus:
                        break
                k = kminus = k0
                vmin = y[k]
                umin = lam
                umax = vmin + umin - vmax
            elif umax > 0.0:
                while True:
                    x[k0] = vmax
                    k0 += 1
                    if k0 > kplus:
                        break
                k = kplus = k0
                vmax = y[k]
                umax = minlam
                umin = vmax + umax - vmin
            else:
                vmin += umin / (k - k0 + 1)
                while k0 <= k:
                    x[k0] = vmin
                    k0 += 1
                out[:] = x
                return
        umin += y[k + 1] - vmin
        if umin < minlam:
            while True:
                x[k0] = vmin
                k0 += 1
                if k0 > kminus:
                    break
            k = kplus = kminus = k0
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
            k = kplus = kminus = k0
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
