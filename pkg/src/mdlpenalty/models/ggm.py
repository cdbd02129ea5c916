"""Gaussian conditional-dependence estimation with a weighted quadratic penalty.

The RERM problem over positive-definite precision matrices is

    min_Theta  0.5 tr(S Theta) - (n/2) log det(2 pi Theta) + sum_{i != j} lam_ij Theta_ij^2

with ``S = X^T X``.  Penalty weights are tied symmetrically, so the free
weights are the ``m (m - 1) / 2`` unordered pairs ``i < j`` (row-major upper
triangle order).  The smoothness constant is ``h0 = m n R^2``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..convex_step import update_tikhonov
from ..core import Box, DomainError, InvalidInputError, Lambda, RermProblem, Tikhonov, UpperSmoothness

log = logging.getLogger(__name__)

LOG_2PI = np.log(2 * np.pi)


@dataclass(frozen=True)
class PrecisionEstimate:
    theta: np.ndarray
    objective: float
    converged: bool = True
    grad_norm: float = 0.0
    iterations: int = 0


def _chol(a: np.ndarray):
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None


def _logdet_pd(a: np.ndarray) -> float:
    L = _chol(a)
    if L is None:
        raise DomainError("matrix is not positive definite")
    return 2.0 * float(np.log(np.diag(L)).sum())


class GgmProblem(RermProblem):
    def __init__(self, scatter, n: int, radius: float | None = None):
        S = np.asarray(scatter, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise InvalidInputError("scatter must be a square matrix")
        if not np.allclose(S, S.T, rtol=1e-10, atol=1e-12 * max(1.0, np.abs(S).max())):
            raise InvalidInputError("scatter must be symmetric")
        if int(n) < 1:
            raise InvalidInputError("n must be >= 1")
        if np.any(np.diag(S) <= 0):
            raise InvalidInputError("scatter has a zero diagonal entry (degenerate variable)")
        self.scatter = 0.5 * (S + S.T)
        self.n = int(n)
        self.m = S.shape[0]
        self.radius = float(10.0 * np.diag(S).max() / self.n) if radius is None else float(radius)
        if not self.radius > 0:
            raise InvalidInputError("radius must be positive")
        self.h0 = self.m * self.n * self.radius**2
        self.pairs = np.triu_indices(self.m, 1)
        self.dim_lambda = self.pairs[0].size
        self.dim_theta = self.m * self.m

    @classmethod
    def from_data(cls, X, radius: float | None = None) -> "GgmProblem":
        X = np.asarray(X, dtype=float)
        return cls(X.T @ X, X.shape[0], radius)

    # -- weight layout --------------------------------------------------------
    def weight_matrix(self, lam) -> np.ndarray:
        """Symmetric weight matrix with zero diagonal from pair weights (or pass a matrix through)."""
        w = lam.weights if isinstance(lam, Lambda) else np.asarray(lam, dtype=float)
        if w.ndim == 2:
            if w.shape != (self.m, self.m):
                raise InvalidInputError("weight matrix has the wrong shape")
            out = 0.5 * (w + w.T)
            np.fill_diagonal(out, 0.0)
            return out
        if w.size == 1:
            w = np.full(self.dim_lambda, float(w.ravel()[0]))
        if w.size != self.dim_lambda:
            raise InvalidInputError(f"expected {self.dim_lambda} pair weights, got {w.size}")
        out = np.zeros((self.m, self.m))
        out[self.pairs] = w
        return out + out.T

    def pair_values(self, mat: np.ndarray) -> np.ndarray:
        return np.asarray(mat)[self.pairs]

    # -- objective ------------------------------------------------------------
    def nll(self, theta: np.ndarray) -> float:
        return 0.5 * float(np.sum(self.scatter * theta)) - 0.5 * self.n * (self.m * LOG_2PI + _logdet_pd(theta))

    def penalized_objective(self, theta: np.ndarray, wmat: np.ndarray) -> float:
        return self.nll(theta) + float(np.sum(wmat * theta * theta))

    def gradient(self, theta: np.ndarray, wmat: np.ndarray, theta_inv: np.ndarray | None = None) -> np.ndarray:
        if theta_inv is None:
            theta_inv = np.linalg.inv(theta)
        return 0.5 * self.scatter - 0.5 * self.n * theta_inv + 2.0 * wmat * theta

    def solve(self, lam, warm=None, tol: float | None = None, max_iter: int = 5000) -> PrecisionEstimate:
        """Damped Newton iterations with backtracking that rejects non-PD trial points."""
        wmat = self.weight_matrix(lam)
        tol = 1e-6 * self.n if tol is None else tol
        if warm is not None:
            theta = np.array(warm.theta if isinstance(warm, PrecisionEstimate) else warm, dtype=float)
            if _chol(theta) is None:
                theta = np.diag(self.n / np.diag(self.scatter))
        else:
            theta = np.diag(self.n / np.diag(self.scatter))
        f = self.penalized_objective(theta, wmat)
        m = self.m
        penalty_diag = np.diag(2.0 * wmat.ravel())
        grad_norm = np.inf
        it = 0
        converged = False
        for it in range(1, max_iter + 1):
            W = np.linalg.inv(theta)
            W = 0.5 * (W + W.T)
            G = self.gradient(theta, wmat, W)
            grad_norm = float(np.abs(G).max())
            if grad_norm < tol:
                converged = True
                break
            H = 0.5 * self.n * np.kron(W, W) + penalty_diag
            D = np.linalg.solve(H, -G.ravel()).reshape(m, m)
            D = 0.5 * (D + D.T)
            slope = float(np.sum(G * D))
            if slope >= 0:
                D, slope = -G, -float(np.sum(G * G))
            step = 1.0
            accepted = False
            for _ in range(60):
                trial = theta + step * D
                if _chol(trial) is not None:
                    ft = self.penalized_objective(trial, wmat)
                    if ft <= f + 1e-4 * step * slope:
                        accepted = True
                        break
                step *= 0.5
            if not accepted:
                # no further decrease is representable; the iterate is as good as it gets
                converged = grad_norm < 1e3 * tol
                break
            theta, f = 0.5 * (trial + trial.T), ft
        else:
            W = np.linalg.inv(theta)
            grad_norm = float(np.abs(self.gradient(theta, wmat, W)).max())
            converged = grad_norm < tol
        if not converged:
            log.warning("precision solve stopped with gradient max-norm %.3g (tol %.3g)", grad_norm, tol)
        return PrecisionEstimate(theta, f, converged, grad_norm, it)

    # -- RERM contract --------------------------------------------------------
    def loss(self, theta) -> float:
        return self.nll(theta.theta if isinstance(theta, PrecisionEstimate) else theta)

    def penalty_features(self, theta) -> np.ndarray:
        mat = theta.theta if isinstance(theta, PrecisionEstimate) else theta
        return 2.0 * self.pair_values(mat) ** 2

    def smoothness(self) -> UpperSmoothness:
        return UpperSmoothness(np.array([self.h0]))

    def penalty_kind(self):
        # per ordered entry: lam_ij Theta_ij^2 = (2/2) lam_ij Theta_ij^2
        return Tikhonov(2.0)

    def log_normalizer(self, lam: Lambda) -> float:
        # sum over ordered pairs i != j of 0.5 log((h0 + lam)/lam), tied weights
        return float(np.log1p(self.h0 / lam.weights).sum())

    def convex_step(self, theta, lam: Lambda) -> Lambda:
        mat = theta.theta if isinstance(theta, PrecisionEstimate) else theta
        return pair_update(self.pair_values(mat), self.h0, lam.box)

    def radius_ok(self, estimate: PrecisionEstimate) -> bool:
        return bool(np.all(np.diag(np.linalg.inv(estimate.theta)) <= self.radius))


def pair_update(theta_pairs, h0: float, box: Box) -> Lambda:
    """Minimize ``2 lam Theta_ij^2 + log((h0 + lam)/lam)`` per pair.

    Half of this objective is the scale-2 Tikhonov form
    ``lam Theta^2 + 0.5 log((2 h0 + 2 lam)/(2 lam))``.
    """
    return update_tikhonov(theta_pairs, 2.0 * h0, 2.0, box)


def solve_ggm(problem: GgmProblem, lam) -> PrecisionEstimate:
    return problem.solve(lam)


def ggm_ulnml(problem: GgmProblem, lam: Lambda) -> float:
    est = problem.solve(lam)
    return est.objective + problem.log_normalizer(lam)


def ggm_convex_step(estimate: PrecisionEstimate, problem: GgmProblem, box: Box) -> np.ndarray:
    """Pair-wise weight update returned as a symmetric weight matrix."""
    lam = pair_update(problem.pair_values(estimate.theta), problem.h0, box)
    return problem.weight_matrix(lam)


def double_ring_precision(m: int, coef: float = 0.25) -> np.ndarray:
    """Circulant precision with unit diagonal and ``coef`` at ring distance 1 and 2."""
    if m < 5:
        raise InvalidInputError("double-ring model needs m >= 5")
    theta = np.eye(m)
    for i in range(m):
        for k in (1, 2):
            theta[i, (i + k) % m] = coef
            theta[(i + k) % m, i] = coef
    return theta


def double_ring_sample(m: int, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. rows from ``N(0, Theta*^-1)`` for the double-ring precision."""
    theta = double_ring_precision(m)
    L = _chol(theta)
    if L is None:
        raise DomainError("double-ring precision is not positive definite")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, m))
    # x = L^-T z has covariance (L L^T)^-1
    return np.linalg.solve(L.T, z.T).T


def kl_gaussian(theta_true, theta_hat) -> float:
    """``KL(N(0, Theta_true^-1) || N(0, Theta_hat^-1))``."""
    a = np.asarray(theta_true, dtype=float)
    b = np.asarray(theta_hat, dtype=float)
    if a.shape != b.shape or a.ndim != 2:
        raise InvalidInputError("precision matrices must be square with equal shapes")
    La, Lb = _chol(a), _chol(b)
    if La is None or Lb is None:
        raise DomainError("KL divergence needs positive-definite precisions")
    m = a.shape[0]
    Ai = np.linalg.solve(La, np.eye(m))
    tr = float(np.sum((Ai @ b) * Ai))  # tr(La^-1 b La^-T)
    logdet = 2.0 * float(np.log(np.diag(La)).sum() - np.log(np.diag(Lb)).sum())
    return 0.5 * (tr - m + logdet)


def gaussian_nll(scatter, n: int, theta) -> float:
    """Zero-mean Gaussian negative log-likelihood of data with scatter ``S`` under precision ``theta``."""
    S = np.asarray(scatter, dtype=float)
    m = S.shape[0]
    return 0.5 * float(np.sum(S * theta)) - 0.5 * n * (m * LOG_2PI + _logdet_pd(theta))
