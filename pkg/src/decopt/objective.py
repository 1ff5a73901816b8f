"""Decentralized objectives ``f(x) = (1/m) sum_i f_i(x)`` and their constants.

Block conventions: for an ``(m, d)`` block ``X``, ``grad_block(X)`` stacks the
local gradients ``grad f_i(X[i])`` row by row, with no ``1/m`` factor, so the
row average of ``grad_block`` at a consensus block is ``grad f``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ConvergenceError, ProblemError
from .linalg import eigvalsh, extreme_eigenvalues
from .trace import Reference

_ORDER_SLACK = 1e-12


@dataclass(frozen=True)
class ProblemConstants:
    """Smoothness and strong convexity constants.

    ``L``/``mu``: global smoothness and strong convexity of ``f``.
    ``M``: smoothness of every ``f_i``. ``nu``: strong convexity shared by
    every ``f_i``, or ``None`` when some ``f_i`` is not strongly convex.
    """

    L: float
    mu: float
    M: float
    nu: float | None = None

    def __post_init__(self):
        if not self.mu > 0.0:
            raise ProblemError(f"global strong convexity must be positive, got mu={self.mu}")
        tol = _ORDER_SLACK * max(1.0, self.M)
        if self.mu > self.L + tol or self.L > self.M + tol:
            raise ProblemError(f"constants violate mu <= L <= M: mu={self.mu}, L={self.L}, M={self.M}")
        if self.nu is not None and not 0.0 < self.nu <= self.mu + tol:
            raise ProblemError(f"local strong convexity nu={self.nu} must lie in (0, mu]")

    @property
    def kappa_g(self) -> float:
        return self.L / self.mu

    @property
    def kappa_l(self) -> float | None:
        return None if self.nu is None else self.M / self.nu

    def as_dict(self) -> dict:
        return {
            "L": self.L,
            "mu": self.mu,
            "M": self.M,
            "nu": self.nu,
            "kappa_g": self.kappa_g,
            "kappa_l": self.kappa_l,
        }


class Problem:
    """Interface shared by the objective families.

    Subclasses implement ``local_value``, ``local_grad``, ``grad_block``,
    ``value`` and ``grad``; the rest derives from those.
    """

    m: int
    d: int
    constants: ProblemConstants

    def local_value(self, i: int, x) -> float:
        raise NotImplementedError

    def local_grad(self, i: int, x) -> np.ndarray:
        raise NotImplementedError

    def grad_block(self, X) -> np.ndarray:
        raise NotImplementedError

    def value(self, x) -> float:
        raise NotImplementedError

    def grad(self, x) -> np.ndarray:
        raise NotImplementedError

    def value_block(self, X) -> np.ndarray:
        X = self._check_block(X)
        return np.array([self.local_value(i, X[i]) for i in range(self.m)])

    def aggregate_value(self, X) -> float:
        """``F(X) = (1/m) sum_i f_i(X[i])``."""
        return float(self.value_block(X).mean())

    def _check_block(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape != (self.m, self.d):
            raise ProblemError(f"expected a ({self.m}, {self.d}) block, got {X.shape}")
        return X

    def _check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.d,):
            raise ProblemError(f"expected a point of dimension {self.d}, got shape {x.shape}")
        return x


class QuadraticProblem(Problem):
    """``f_i(x) = x^T H_i x / 2 - c_i^T x`` with symmetric ``H_i``."""

    def __init__(self, hessians, shifts):
        H = np.asarray(hessians, dtype=np.float64)
        C = np.asarray(shifts, dtype=np.float64)
        if H.ndim != 3 or H.shape[1] != H.shape[2]:
            raise ProblemError(f"hessians must have shape (m, d, d), got {H.shape}")
        if C.shape != H.shape[:2]:
            raise ProblemError(f"shifts must have shape {H.shape[:2]}, got {C.shape}")
        if not np.allclose(H, np.transpose(H, (0, 2, 1)), rtol=0, atol=1e-12 * (1 + np.abs(H).max())):
            raise ProblemError("every H_i must be symmetric")
        self.m, self.d = C.shape
        self.hessians = H
        self.shifts = C
        self.mean_hessian = H.mean(axis=0)
        self.mean_shift = C.mean(axis=0)

        mu, L = extreme_eigenvalues(self.mean_hessian)
        if not mu > 0.0:
            raise ProblemError(f"average Hessian is not positive definite (min eigenvalue {mu})")
        local = [extreme_eigenvalues(h) for h in H]
        M = max(max(abs(lo), abs(hi)) for lo, hi in local)
        nu = min(lo for lo, _ in local)
        self.constants = ProblemConstants(L=L, mu=mu, M=max(M, L), nu=nu if nu > 0.0 else None)

    def local_value(self, i, x):
        x = self._check_point(x)
        return float(0.5 * x @ self.hessians[i] @ x - self.shifts[i] @ x)

    def local_grad(self, i, x):
        x = self._check_point(x)
        return self.hessians[i] @ x - self.shifts[i]

    def value_block(self, X):
        X = self._check_block(X)
        return 0.5 * np.einsum("ij,ijk,ik->i", X, self.hessians, X) - np.einsum("ij,ij->i", self.shifts, X)

    def grad_block(self, X):
        X = self._check_block(X)
        return np.einsum("ijk,ik->ij", self.hessians, X) - self.shifts

    def value(self, x):
        x = self._check_point(x)
        return float(0.5 * x @ self.mean_hessian @ x - self.mean_shift @ x)

    def grad(self, x):
        x = self._check_point(x)
        return self.mean_hessian @ x - self.mean_shift

    def exact_minimizer(self) -> np.ndarray:
        return np.linalg.solve(self.mean_hessian, self.mean_shift)


def quadratic_problem(hessians, shifts) -> QuadraticProblem:
    return QuadraticProblem(hessians, shifts)


def _log1pexp_neg(z):
    # log(1 + exp(-z)), stable for both signs
    return np.logaddexp(0.0, -z)


def _sigmoid_neg(z):
    # 1 / (1 + exp(z))
    return np.exp(-np.logaddexp(0.0, z))


class LogisticProblem(Problem):
    """Regularized logistic loss per agent.

    ``f_i(x) = (1/n_i) sum_j log(1 + exp(-b_j <a_j, x>)) + sigma_i ||x||^2 / 2``.
    ``sigma_i`` may be negative, making ``f_i`` non-convex, as long as the
    average is positive.
    """

    def __init__(self, datasets, sigmas):
        datasets = list(datasets)
        sigmas = np.asarray(sigmas, dtype=np.float64)
        if not datasets:
            raise ProblemError("no agent data")
        if sigmas.shape != (len(datasets),):
            raise ProblemError(f"{sigmas.size} regularizers for {len(datasets)} agents")
        for i, ds in enumerate(datasets):
            if not isinstance(ds, Dataset):
                raise ProblemError(f"agent {i}: expected a Dataset")
            if ds.n < 1:
                raise ProblemError(f"agent {i} has no samples")
        dims = {ds.d for ds in datasets}
        if len(dims) != 1:
            raise ProblemError(f"agents disagree on the dimension: {sorted(dims)}")
        self.m = len(datasets)
        self.d = dims.pop()
        self.datasets = datasets
        self.sigmas = sigmas
        sizes = {ds.n for ds in datasets}
        if len(sizes) == 1:
            self._A = np.stack([ds.features for ds in datasets])
            self._b = np.stack([ds.labels for ds in datasets])
        else:
            self._A = self._b = None

        mean_sigma = float(sigmas.mean())
        if not mean_sigma > 0.0:
            raise ProblemError(f"average regularizer must be positive, got {mean_sigma}")
        grams = [ds.features.T @ ds.features / (4.0 * ds.n) for ds in datasets]
        data_M = np.array([eigvalsh(g)[-1] for g in grams])
        L = float(eigvalsh(sum(grams) / self.m)[-1]) + mean_sigma
        M = float(np.max(data_M + np.abs(sigmas)))
        nu = float(sigmas.min()) if sigmas.min() > 0.0 else None
        # mu = mean(sigma) is certified: the data term is convex
        self.constants = ProblemConstants(L=L, mu=mean_sigma, M=max(M, L), nu=nu)

    def local_value(self, i, x):
        x = self._check_point(x)
        ds = self.datasets[i]
        z = ds.labels * (ds.features @ x)
        return float(_log1pexp_neg(z).mean() + 0.5 * self.sigmas[i] * (x @ x))

    def local_grad(self, i, x):
        x = self._check_point(x)
        ds = self.datasets[i]
        z = ds.labels * (ds.features @ x)
        coef = -ds.labels * _sigmoid_neg(z)
        return ds.features.T @ coef / ds.n + self.sigmas[i] * x

    def value_block(self, X):
        X = self._check_block(X)
        if self._A is None:
            return super().value_block(X)
        z = self._b * np.einsum("ijk,ik->ij", self._A, X)
        return _log1pexp_neg(z).mean(axis=1) + 0.5 * self.sigmas * np.einsum("ij,ij->i", X, X)

    def grad_block(self, X):
        X = self._check_block(X)
        if self._A is None:
            return np.stack([self.local_grad(i, X[i]) for i in range(self.m)])
        z = self._b * np.einsum("ijk,ik->ij", self._A, X)
        coef = -self._b * _sigmoid_neg(z)
        n = self._A.shape[1]
        return np.einsum("ijk,ij->ik", self._A, coef) / n + self.sigmas[:, None] * X

    def value(self, x):
        x = self._check_point(x)
        return float(self.value_block(np.broadcast_to(x, (self.m, self.d))).mean())

    def grad(self, x):
        x = self._check_point(x)
        return self.grad_block(np.broadcast_to(x, (self.m, self.d))).mean(axis=0)


def logistic_problem(data, sigmas) -> LogisticProblem:
    return LogisticProblem(data, sigmas)


# -- regularizer schedules ---------------------------------------------------

def uniform_sigmas(m: int, sigma: float) -> np.ndarray:
    return np.full(m, float(sigma))


def nonconvex_sigmas(m: int, a: float, b: float) -> np.ndarray:
    """``sigma_i = a`` for the first ``m - 1`` agents and ``b`` for the last."""
    s = np.full(m, float(a))
    s[-1] = float(b)
    return s


def matched_last_sigma(m: int, a: float, mean_sigma: float) -> float:
    """The ``b`` that makes ``nonconvex_sigmas(m, a, b)`` average to ``mean_sigma``."""
    return m * mean_sigma - (m - 1) * a


# -- centralized reference ---------------------------------------------------

def solve_reference(p: Problem, tol: float = 1e-10, max_iter: int = 200_000) -> Reference:
    """Minimize ``f`` centrally with Nesterov's method until ``||grad f|| <= tol``."""
    from .baselines import nesterov_minimize

    c = p.constants
    x, iters = nesterov_minimize(p.grad, np.zeros(p.d), c.L, c.mu, tol, max_iter)
    g = float(np.linalg.norm(p.grad(x)))
    if not g <= tol:
        raise ConvergenceError(f"reference solver stopped at ||grad f|| = {g:.3e} > tol = {tol:.1e} after {iters} iterations")
    return Reference(x_star=x, f_star=p.value(x), grad_norm=g, iterations=iters)


def gradient_check(p: Problem, x, i: int, step: float | None = None) -> float:
    """Relative error between ``local_grad`` and central finite differences."""
    x = np.asarray(x, dtype=np.float64)
    h = step if step is not None else 1e-6 * (1.0 + float(np.linalg.norm(x)))
    g = p.local_grad(i, x)
    fd = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        fd[k] = (p.local_value(i, x + e) - p.local_value(i, x - e)) / (2.0 * h)
    return float(np.linalg.norm(fd - g) / max(1.0, np.linalg.norm(g)))


def random_quadratic(
    m: int,
    d: int,
    kappa: float,
    seed: int,
    heterogeneity: float = 0.5,
    mu: float = 1.0,
) -> QuadraticProblem:
    """Seeded quadratic family with prescribed global condition number.

    The average Hessian has spectrum spread over ``[mu, kappa * mu]``; the
    local Hessians add zero-sum symmetric perturbations of spectral norm
    about ``heterogeneity * kappa * mu``, so locals may be indefinite.
    """
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    spectrum = mu * np.geomspace(1.0, kappa, d) if d > 1 else np.array([mu])
    h_bar = (q * spectrum) @ q.T
    h_bar = 0.5 * (h_bar + h_bar.T)
    pert = rng.standard_normal((m, d, d))
    pert = 0.5 * (pert + np.transpose(pert, (0, 2, 1)))
    pert -= pert.mean(axis=0)
    if m > 1 and heterogeneity > 0.0:
        scale = max(np.linalg.norm(pk, 2) for pk in pert)
        pert *= heterogeneity * kappa * mu / scale
    else:
        pert[:] = 0.0
    H = h_bar + pert
    x_star = rng.standard_normal(d)
    c_bar = h_bar @ x_star
    C = rng.standard_normal((m, d))
    C += c_bar - C.mean(axis=0)
    return QuadraticProblem(H, C)
