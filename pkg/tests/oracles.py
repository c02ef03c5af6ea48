"""Independent reference implementations used to check the library.

Each oracle takes a different route from the code under test: dense
matrices instead of banded factorizations, a dual iterative solver instead
of the direct TV method, exhaustive search instead of sliding windows.
"""

import numpy as np


def difference_matrix(n):
    """(n-1, n) forward difference matrix, row k is e_{k+1} - e_k."""
    D = np.zeros((n - 1, n))
    for k in range(n - 1):
        D[k, k] = -1.0
        D[k, k + 1] = 1.0
    return D


def full_pivot_inverse(A):
    """Gauss-Jordan inversion with complete pivoting."""
    A = np.array(A, dtype=float)
    n = len(A)
    M = np.hstack([A, np.eye(n)])
    cols = np.arange(n)
    for k in range(n):
        sub = np.abs(M[k:, k:n])
        r, c = np.unravel_index(np.argmax(sub), sub.shape)
        r += k
        c += k
        if M[r, c] == 0.0:
            raise ZeroDivisionError("singular matrix")
        M[[k, r]] = M[[r, k]]
        M[:, [k, c]] = M[:, [c, k]]
        cols[[k, c]] = cols[[c, k]]
        M[k] /= M[k, k]
        others = np.arange(n) != k
        M[others] -= M[others, k : k + 1] * M[k]
    # undo the column swaps, which permute rows of the inverse
    inv = np.empty((n, n))
    inv[cols] = M[:, n:]
    return inv


def dense_fusion(P, v, beta_p, beta_i):
    """Hybrid position and variance via an explicit dense inverse."""
    P = np.atleast_2d(np.asarray(P, dtype=float).T).T
    v = np.atleast_2d(np.asarray(v, dtype=float).T).T
    n = len(P)
    D = difference_matrix(n)
    precision = np.diag(beta_p) + D.T @ np.diag(beta_i) @ D
    cov = full_pivot_inverse(precision)
    rhs = beta_p[:, None] * P + D.T @ (beta_i[:, None] * v)
    return cov @ rhs, np.diag(cov).copy()


def tv_dual(y, lam, iters=200000, tol=1e-15):
    """TV denoising by projected gradient on the dual box problem.

    u = y - D^T z with |z| <= lam; the step 1/4 is 1/||D D^T||.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < 2:
        return y.copy()
    z = np.zeros(n - 1)
    u = y.copy()
    for _ in range(iters):
        u = y.copy()
        u[:-1] += z
        u[1:] -= z
        grad = -np.diff(u)
        z_new = np.clip(z - 0.25 * grad, -lam, lam)
        if np.max(np.abs(z_new - z)) < tol:
            z = z_new
            break
        z = z_new
    u = y.copy()
    u[:-1] += z
    u[1:] -= z
    return u


def tv_objective(u, y, lam):
    return 0.5 * np.sum((u - y) ** 2) + lam * np.sum(np.abs(np.diff(u)))


def kasa_normal_equations(points):
    """Algebraic circle fit from the 3x3 normal equations of x^2+y^2 + D x + E y + F = 0."""
    x, y = np.asarray(points, dtype=float).T
    A = np.column_stack([x, y, np.ones_like(x)])
    b = -(x * x + y * y)
    D, E, F = np.linalg.solve(A.T @ A, A.T @ b)
    cx, cy = -D / 2, -E / 2
    return cx, cy, np.sqrt(cx * cx + cy * cy - F)


def brute_fixation_window(xy, first, stop, length):
    """Exhaustive least-dispersion window search; earliest on ties."""
    best, best_disp = None, np.inf
    for s in range(first, stop - length + 1):
        w = xy[s : s + length]
        disp = (w[:, 0].max() - w[:, 0].min()) + (w[:, 1].max() - w[:, 1].min())
        if disp < best_disp:
            best, best_disp = s, disp
    return best, best + length


def grid_circle_center(points, half_width=20.0, levels=12, steps=41):
    """Centre minimising the algebraic circle loss by repeated grid refinement.

    For a fixed centre the best squared radius is the mean squared distance,
    so the loss reduces to the variance of squared distances.
    """
    pts = np.asarray(points, dtype=float)
    cx, cy = pts.mean(axis=0)
    h = half_width
    for _ in range(levels):
        xs = cx + np.linspace(-h, h, steps)
        ys = cy + np.linspace(-h, h, steps)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        d2 = (pts[:, 0, None, None] - X) ** 2 + (pts[:, 1, None, None] - Y) ** 2
        loss = d2.var(axis=0)
        i, j = np.unravel_index(np.argmin(loss), loss.shape)
        cx, cy = xs[i], ys[j]
        h *= 4.0 / steps
    return cx, cy
