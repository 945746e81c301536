"""Pure numpy/scipy versions of the compiled GP kernels."""

import numpy as np
from scipy.linalg import solve_triangular


def kernel_vector(X, m, x, inv_ls, s2, out):
    d = (X[:m] - x) * inv_ls
    np.multiply(s2, np.exp(-0.5 * np.einsum("ij,ij->i", d, d)), out=out[:m])


def posterior_solve(L, X, w, m, x, inv_ls, s2, v):
    """Fill ``v[:m] = L^{-1} k(X, x)`` and return ``(v . w, v . v)``."""
    if m == 0:
        return 0.0, 0.0
    kernel_vector(X, m, x, inv_ls, s2, v)
    sol = solve_triangular(L[:m, :m], v[:m], lower=True, check_finite=False)
    v[:m] = sol
    return float(sol @ w[:m]), float(sol @ sol)
