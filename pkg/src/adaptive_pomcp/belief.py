"""Gaussian-process belief over the workspace.

The posterior is kept as a lower Cholesky factor ``L`` of the Gram matrix
plus ``w = L^{-1} y``, so that the posterior at a new point needs one
forward substitution and adding that point as an observation reuses it:

    v = L^{-1} k(X, x)
    mean = v . w,   var = s2 - v . v
    new row of L: [v, sqrt(var + noise)],   new w entry: (y - mean) / sqrt(var + noise)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import gpkernel

#: Pivots (Schur complements of a new point) below this fraction of the
#: signal variance are treated as numerically singular.
PIVOT_FLOOR = 1e-8

#: Tolerance used for workspace-bound checks.
BOUNDS_TOL = 1e-9


class ConditioningError(ArithmeticError):
    """The Gram matrix would become numerically singular."""


class DomainError(ValueError):
    """A point lies outside the workspace."""


@dataclass(frozen=True)
class KernelParams:
    """Squared-exponential kernel hyperparameters.

    ``time_lengthscale`` applies to the last input coordinate when the
    belief has a time axis.
    """

    lengthscale: float = 1.0
    signal_variance: float = 1.0
    noise_variance: float = 0.0
    time_lengthscale: Optional[float] = None

    def __post_init__(self):
        if not self.lengthscale > 0:
            raise ValueError(f"lengthscale must be > 0, got {self.lengthscale}")
        if not self.signal_variance > 0:
            raise ValueError(f"signal_variance must be > 0, got {self.signal_variance}")
        if not self.noise_variance >= 0:
            raise ValueError(f"noise_variance must be >= 0, got {self.noise_variance}")
        if self.time_lengthscale is not None and not self.time_lengthscale > 0:
            raise ValueError(f"time_lengthscale must be > 0, got {self.time_lengthscale}")

    def inverse_lengthscales(self, dim: int, time_axis: bool) -> np.ndarray:
        inv = np.full(dim, 1.0 / self.lengthscale)
        if time_axis:
            tl = self.time_lengthscale if self.time_lengthscale is not None else self.lengthscale
            inv[-1] = 1.0 / tl
        return inv

    def __call__(self, a, b, time_axis: bool = False) -> float:
        """Kernel value between two points."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        d = (a - b) * self.inverse_lengthscales(a.size, time_axis)
        return float(self.signal_variance * math.exp(-0.5 * float(d @ d)))


@dataclass(frozen=True)
class PosteriorStats:
    mean: float
    std: float


def objective_reward(stats: PosteriorStats, c: float) -> float:
    """Upper-confidence sampling reward ``mean + c * std``."""
    return stats.mean + c * stats.std


class GPBelief:
    """Immutable GP posterior; every update returns a new belief.

    Parameters
    ----------
    kernel : KernelParams
    bounds : sequence of (lo, hi)
        Per-input-dimension bounds; points outside raise :class:`DomainError`.
    time_axis : bool
        Whether the last input coordinate is time (uses ``time_lengthscale``).
    """

    __slots__ = ("kernel", "bounds", "time_axis", "_inv_ls", "_X", "_y", "_L", "_w")

    def __init__(self, kernel: KernelParams, bounds: Sequence[Sequence[float]], time_axis: bool = False):
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        if not bounds:
            raise ValueError("bounds must have at least one dimension")
        for lo, hi in bounds:
            if not lo < hi:
                raise ValueError(f"invalid bound ({lo}, {hi})")
        self.kernel = kernel
        self.bounds = bounds
        self.time_axis = time_axis
        dim = len(bounds)
        self._inv_ls = kernel.inverse_lengthscales(dim, time_axis)
        self._X = np.empty((0, dim))
        self._y = np.empty(0)
        self._L = np.empty((0, 0))
        self._w = np.empty(0)

    # -- construction -------------------------------------------------
    def _derive(self, X, y, L, w) -> "GPBelief":
        out = object.__new__(GPBelief)
        out.kernel = self.kernel
        out.bounds = self.bounds
        out.time_axis = self.time_axis
        out._inv_ls = self._inv_ls
        out._X, out._y, out._L, out._w = X, y, L, w
        return out

    @classmethod
    def from_data(cls, kernel, bounds, X, y, time_axis=False) -> "GPBelief":
        """Build a belief from a batch of observations with one full factorization."""
        base = cls(kernel, bounds, time_axis)
        X = np.array(X, dtype=float, ndmin=2)
        y = np.array(y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} inputs but {y.shape[0]} targets")
        if X.shape[0] == 0:
            return base
        if X.shape[1] != len(base.bounds):
            raise ValueError(f"inputs have dimension {X.shape[1]}, bounds have {len(base.bounds)}")
        for row in X:
            base._check(row)
        K = base.gram(X)
        try:
            L = np.linalg.cholesky(K)
        except np.linalg.LinAlgError as exc:
            raise ConditioningError("Gram matrix is not numerically positive definite") from exc
        if np.min(np.diag(L)) ** 2 < PIVOT_FLOOR * kernel.signal_variance:
            raise ConditioningError("Gram matrix is numerically singular")
        from scipy.linalg import solve_triangular

        w = solve_triangular(L, y, lower=True)
        return base._derive(np.ascontiguousarray(X), y, np.ascontiguousarray(L), w)

    # -- queries ------------------------------------------------------
    @property
    def size(self) -> int:
        return self._y.shape[0]

    def __len__(self) -> int:
        return self.size

    @property
    def inputs(self) -> np.ndarray:
        return self._X.copy()

    @property
    def targets(self) -> np.ndarray:
        return self._y.copy()

    @property
    def factor(self) -> np.ndarray:
        """Copy of the lower Cholesky factor of ``K + noise * I``."""
        return self._L.copy()

    def gram(self, X=None) -> np.ndarray:
        X = self._X if X is None else np.asarray(X, dtype=float)
        d = (X[:, None, :] - X[None, :, :]) * self._inv_ls
        K = self.kernel.signal_variance * np.exp(-0.5 * np.einsum("ijk,ijk->ij", d, d))
        K[np.diag_indices_from(K)] += self.kernel.noise_variance
        return K

    def _check(self, point) -> np.ndarray:
        x = np.asarray(point, dtype=float).ravel()
        if x.size != len(self.bounds):
            raise DomainError(f"point has dimension {x.size}, workspace has {len(self.bounds)}")
        for xi, (lo, hi) in zip(x, self.bounds):
            if not (lo - BOUNDS_TOL <= xi <= hi + BOUNDS_TOL):
                raise DomainError(f"point {tuple(x)} outside workspace bounds {self.bounds}")
        return x

    def _solve(self, x):
        v = np.empty(self.size)
        vw, vv = gpkernel.posterior_solve(
            self._L, self._X, self._w, self.size, x, self._inv_ls, self.kernel.signal_variance, v
        )
        return v, vw, vv

    def posterior(self, point) -> PosteriorStats:
        x = self._check(point)
        s2 = self.kernel.signal_variance
        if self.size == 0:
            return PosteriorStats(0.0, math.sqrt(s2))
        _, mean, vv = self._solve(x)
        return PosteriorStats(mean, math.sqrt(max(s2 - vv, 0.0)))

    def posterior_mean_batch(self, points) -> np.ndarray:
        """Posterior means at many points (no bounds check)."""
        P = np.asarray(points, dtype=float)
        if self.size == 0:
            return np.zeros(len(P))
        from scipy.linalg import solve_triangular

        d = (P[:, None, :] - self._X[None, :, :]) * self._inv_ls
        Ks = self.kernel.signal_variance * np.exp(-0.5 * np.einsum("ijk,ijk->ij", d, d))
        alpha = solve_triangular(self._L.T, self._w, lower=False)
        return Ks @ alpha

    # -- updates ------------------------------------------------------
    def add_observation(self, point, value: float) -> "GPBelief":
        """Return a new belief that also conditions on ``(point, value)``."""
        x = self._check(point)
        n = self.size
        s2 = self.kernel.signal_variance
        if n:
            v, mean, vv = self._solve(x)
        else:
            v, mean, vv = np.empty(0), 0.0, 0.0
        pivot = s2 + self.kernel.noise_variance - vv
        if not pivot > PIVOT_FLOOR * s2:
            raise ConditioningError(
                f"observation at {tuple(x)} makes the Gram matrix singular (pivot {pivot:.3e}); "
                "duplicate point with zero noise?"
            )
        diag = math.sqrt(pivot)
        L = np.zeros((n + 1, n + 1))
        L[:n, :n] = self._L
        L[n, :n] = v
        L[n, n] = diag
        X = np.vstack([self._X, x[None, :]])
        y = np.append(self._y, float(value))
        w = np.append(self._w, (float(value) - mean) / diag)
        return self._derive(X, y, L, w)

    def fork(self) -> "GPBelief":
        """Independent copy."""
        return self._derive(self._X.copy(), self._y.copy(), self._L.copy(), self._w.copy())

    def scratch(self, extra: int) -> "ScratchBelief":
        """Mutable simulation-local extension with room for ``extra`` observations."""
        return ScratchBelief(self, extra)

    def __repr__(self) -> str:
        return f"GPBelief(size={self.size}, kernel={self.kernel})"


def add_observation(belief: GPBelief, point, value: float) -> GPBelief:
    return belief.add_observation(point, value)


def posterior(belief: GPBelief, point) -> PosteriorStats:
    return belief.posterior(point)


def fork(belief: GPBelief) -> GPBelief:
    return belief.fork()


class ScratchBelief:
    """Resettable belief used inside rollouts.

    Holds the base belief's factor in a preallocated buffer; simulated
    observations are appended after it and :meth:`reset` drops them again,
    so each simulation costs no copying. The base belief is never touched.
    Skips bounds checks: callers generate points from legal moves.
    """

    __slots__ = ("base_size", "size", "capacity", "s2", "noise", "_inv_ls",
                 "_L", "_X", "_w", "_v", "_last_x", "_last_mean", "_last_vv")

    def __init__(self, base: GPBelief, extra: int):
        n = base.size
        cap = n + max(int(extra), 0)
        dim = len(base.bounds)
        self.base_size = n
        self.size = n
        self.capacity = cap
        self.s2 = base.kernel.signal_variance
        self.noise = base.kernel.noise_variance
        self._inv_ls = base._inv_ls
        self._L = np.zeros((cap, cap))
        self._L[:n, :n] = base._L
        self._X = np.zeros((cap, dim))
        self._X[:n] = base._X
        self._w = np.zeros(cap)
        self._w[:n] = base._w
        self._v = np.zeros(cap)
        self._last_x = None
        self._last_mean = 0.0
        self._last_vv = 0.0

    def reset(self) -> None:
        self.size = self.base_size
        self._last_x = None

    def query(self, x: np.ndarray):
        """Posterior ``(mean, std)`` at ``x``; cached for a following :meth:`absorb`."""
        mean, vv = gpkernel.posterior_solve(self._L, self._X, self._w, self.size, x,
                                            self._inv_ls, self.s2, self._v)
        self._last_x = x
        self._last_mean = mean
        self._last_vv = vv
        var = self.s2 - vv
        return mean, math.sqrt(var) if var > 0.0 else 0.0

    def absorb(self, x: np.ndarray, value: float) -> bool:
        """Condition on ``(x, value)``; ``x`` must be the last queried point.

        Returns False (and leaves the belief unchanged) when the point is
        numerically redundant or the buffer is full.
        """
        if self._last_x is not x:
            self.query(x)
        m = self.size
        pivot = self.s2 + self.noise - self._last_vv
        if m >= self.capacity or not pivot > PIVOT_FLOOR * self.s2:
            return False
        diag = math.sqrt(pivot)
        self._L[m, :m] = self._v[:m]
        self._L[m, m] = diag
        self._X[m] = x
        self._w[m] = (value - self._last_mean) / diag
        self.size = m + 1
        self._last_x = None
        return True
