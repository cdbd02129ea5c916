"""Variable-temperature ridge regression.

The RERM problem is

    min_{sigma2 in [a, b], beta}  ||y - X beta||^2 / (2 sigma2) + (n/2) log(2 pi sigma2)
                                  + sum_j lam_j beta_j^2 / (2 sigma2)

and its uLNML adds ``0.5 * log det(C + diag lam) / det(diag lam)`` with
``C = X^T X``.  ``normalizer="diag"`` replaces ``C`` by its diagonal, which
turns the weight update into the per-coordinate closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..convex_step import tikhonov_root
from ..core import (
    Box,
    DomainError,
    InvalidInputError,
    Lambda,
    RermProblem,
    Tikhonov,
    UpperSmoothness,
    project_box,
)

LOG_2PI = np.log(2 * np.pi)


@dataclass(frozen=True)
class RidgeSolution:
    beta: np.ndarray
    sigma2: float
    rerm_objective: float


def _cholesky(a: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise DomainError(f"factorization failed: {exc}") from exc


class RidgeProblem(RermProblem):
    def __init__(self, X, y, sigma_bounds=(1e-4, 1e4), normalizer: str = "full"):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != y.size or X.shape[0] < 1 or X.shape[1] < 1:
            raise InvalidInputError(f"design {X.shape} and target {y.shape} are inconsistent")
        a, b = map(float, sigma_bounds)
        if not 0 < a <= b < np.inf:
            raise InvalidInputError("sigma_bounds must satisfy 0 < a <= b < inf")
        if normalizer not in ("full", "diag"):
            raise InvalidInputError("normalizer must be 'full' or 'diag'")
        self.X, self.y = X, y
        self.n, self.p = X.shape
        self.sigma_bounds = (a, b)
        self.normalizer = normalizer
        self.gram = X.T @ X
        self.xty = X.T @ y
        self.yty = float(y @ y)
        self.dim_theta = self.p + 1
        self.dim_lambda = self.p

    # -- RERM pieces -------------------------------------------------------
    def rerm_objective(self, beta, sigma2: float, lam: Lambda) -> float:
        beta = np.asarray(beta, dtype=float)
        r = self.y - self.X @ beta
        return float((r @ r + lam.weights @ beta**2) / (2 * sigma2) + 0.5 * self.n * (LOG_2PI + np.log(sigma2)))

    def solve(self, lam: Lambda, warm=None) -> RidgeSolution:
        self._check_lam(lam)
        L = _cholesky(self.gram + np.diag(lam.weights))
        beta = np.linalg.solve(L.T, np.linalg.solve(L, self.xty))
        r = self.y - self.X @ beta
        scaled = float(r @ r + lam.weights @ beta**2)
        a, b = self.sigma_bounds
        sigma2 = float(np.clip(scaled / self.n, a, b))
        obj = scaled / (2 * sigma2) + 0.5 * self.n * (LOG_2PI + np.log(sigma2))
        return RidgeSolution(beta, sigma2, float(obj))

    def loss(self, theta: RidgeSolution) -> float:
        r = self.y - self.X @ theta.beta
        return float(r @ r / (2 * theta.sigma2) + 0.5 * self.n * (LOG_2PI + np.log(theta.sigma2)))

    def penalty_features(self, theta: RidgeSolution) -> np.ndarray:
        return theta.beta**2 / (2 * theta.sigma2)

    def smoothness(self) -> UpperSmoothness:
        return UpperSmoothness(np.diag(self.gram).copy())

    def penalty_kind(self):
        # In terms of beta / sigma the penalty is (1/2) sum lam_j (beta_j / sigma)^2.
        return Tikhonov(1.0)

    # -- normalizer and weight update ---------------------------------------
    def log_normalizer(self, lam: Lambda) -> float:
        self._check_lam(lam)
        if self.normalizer == "diag":
            return float(0.5 * np.log1p(np.diag(self.gram) / lam.weights).sum())
        return log_det_ratio(self.gram, lam.weights)

    def convex_step(self, theta: RidgeSolution, lam: Lambda) -> Lambda:
        if self.normalizer == "diag":
            return super().convex_step(theta, lam)
        return ridge_convex_step(theta, self, lam)

    def _check_lam(self, lam: Lambda):
        if lam.dim != self.p:
            raise InvalidInputError(f"lambda has {lam.dim} entries, design has {self.p} columns")


def log_det_ratio(gram: np.ndarray, lam: np.ndarray) -> float:
    """``0.5 * log(det(C + diag lam) / det(diag lam))`` via ``det(I + D^-1/2 C D^-1/2)``."""
    s = 1.0 / np.sqrt(lam)
    m = gram * s[:, None] * s[None, :]
    m[np.diag_indices_from(m)] += 1.0
    L = _cholesky(m)
    return float(np.log(np.diag(L)).sum())


def solve_ridge(problem: RidgeProblem, lam: Lambda) -> RidgeSolution:
    return problem.solve(lam)


def ridge_ulnml(problem: RidgeProblem, lam: Lambda) -> float:
    sol = problem.solve(lam)
    return sol.rerm_objective + problem.log_normalizer(lam)


def ridge_convex_step(
    solution: RidgeSolution,
    problem: RidgeProblem,
    lam: Lambda,
    box: Box | None = None,
    max_sweeps: int = 50,
    tol: float = 1e-8,
) -> Lambda:
    """Cyclic exact coordinate minimization of the full log-det weight objective.

    With the other weights fixed, ``log det(C + diag lam)`` as a function of
    ``lam_j`` is ``log(k_j + lam_j)`` plus a constant, where ``k_j`` is the
    Schur complement ``1/[A^-1]_jj - lam_j`` of ``A = C + diag lam``.  Each
    coordinate problem is therefore the scalar Tikhonov problem with
    smoothness ``k_j`` and parameter ``beta_j / sigma``.  Sweeps stop when no
    weight moves by more than ``tol * max(1, lam_j)``.
    """
    box = lam.box if box is None else box
    w = project_box(lam.weights, box).weights.copy()
    lo, hi = box.lower, box.upper
    theta_abs = np.abs(solution.beta) / np.sqrt(solution.sigma2)
    C = problem.gram
    for _ in range(max_sweeps):
        L = _cholesky(C + np.diag(w))
        Linv = np.linalg.inv(L)
        Ainv = Linv.T @ Linv
        moved = 0.0
        for j in range(w.size):
            m = Ainv[j, j]
            k = max(1.0 / m - w[j], 0.0)
            if theta_abs[j] == 0:
                new = hi[j]
            elif k == 0:
                new = lo[j]
            else:
                new = float(tikhonov_root(np.array(theta_abs[j]), np.array(k)))
                new = hi[j] if not np.isfinite(new) else min(max(new, lo[j]), hi[j])
            delta = new - w[j]
            if delta != 0.0:
                col = Ainv[:, j].copy()
                Ainv -= np.outer(col, col) * (delta / (1.0 + delta * m))
                w[j] = new
                moved = max(moved, abs(delta) / max(1.0, abs(new)))
        if moved <= tol:
            break
    return project_box(w, box)


def predict(beta, X_new) -> np.ndarray:
    X_new = np.asarray(X_new, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if X_new.shape[-1] != beta.size:
        raise InvalidInputError(f"X_new has {X_new.shape[-1]} columns, beta has {beta.size} entries")
    return X_new @ beta


def rmse(y_hat, y_true) -> float:
    y_hat = np.asarray(y_hat, dtype=float).ravel()
    y_true = np.asarray(y_true, dtype=float).ravel()
    if y_hat.shape != y_true.shape:
        raise InvalidInputError(f"length mismatch: {y_hat.size} predictions for {y_true.size} targets")
    return float(np.sqrt(np.mean((y_hat - y_true) ** 2)))
