"""Scalar penalty-weight grid search: K-fold cross validation, AIC and BIC.

A *family* wraps one dataset and knows how to fit the model on a subset of
rows for a scalar grid value, score held-out rows and count effective
degrees of freedom.  Grid values are per-sample: a value ``ell`` fitted on
``n`` rows becomes the weight ``n * ell`` in the summed-loss objectives
(ridge, precision matrix) and ``ell`` in the lasso's mean-loss objective.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np
from sklearn.linear_model import lars_path

from .core import Box, InvalidInputError, Lambda
from .models.ggm import GgmProblem, gaussian_nll
from .models.ridge import LOG_2PI, RidgeProblem


@dataclass(frozen=True)
class GridSpec:
    lo: float = 1e-4
    hi: float = 1.0
    count: int = 20
    spacing: str = "logarithmic"

    def __post_init__(self):
        if not 0 < self.lo < self.hi:
            raise InvalidInputError("grid needs 0 < lo < hi")
        if int(self.count) < 2:
            raise InvalidInputError("grid needs at least two points")
        if self.spacing != "logarithmic":
            raise InvalidInputError("only logarithmic spacing is supported")


def grid_points(gs: GridSpec) -> np.ndarray:
    pts = np.logspace(np.log10(gs.lo), np.log10(gs.hi), int(gs.count))
    pts[0], pts[-1] = gs.lo, gs.hi
    return pts


def kfold_indices(n: int, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded shuffled split of ``range(n)`` into ``k`` near-equal folds."""
    if k < 2:
        raise InvalidInputError("k must be >= 2")
    if n < k:
        raise InvalidInputError(f"cannot split {n} rows into {k} non-empty folds")
    perm = np.random.default_rng(seed).permutation(n)
    folds = np.array_split(perm, k)
    out = []
    for i, test in enumerate(folds):
        if test.size == 0:
            raise InvalidInputError("empty fold")
        train = np.concatenate([f for j, f in enumerate(folds) if j != i])
        out.append((np.sort(train), np.sort(test)))
    return out


class ScalarFamily(Protocol):
    n: int

    def fit(self, idx: np.ndarray, ell: float, warm=None): ...

    def nll(self, est, idx: np.ndarray) -> float: ...

    def df(self, est, idx: np.ndarray, ell: float) -> float: ...


class RidgeFamily:
    def __init__(self, X, y, sigma_bounds=(1e-4, 1e4)):
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.n, self.p = self.X.shape
        self.sigma_bounds = sigma_bounds

    def fit(self, idx, ell, warm=None):
        prob = RidgeProblem(self.X[idx], self.y[idx], self.sigma_bounds, normalizer="diag")
        box = Box.uniform(len(idx) * ell, len(idx) * ell, self.p)
        return prob.solve(Lambda(box.lower, box))

    def nll(self, est, idx):
        r = self.y[idx] - self.X[idx] @ est.beta
        return float(r @ r / (2 * est.sigma2) + 0.5 * len(idx) * (LOG_2PI + np.log(est.sigma2)))

    def df(self, est, idx, ell):
        s = np.linalg.svd(self.X[idx], compute_uv=False)
        return float(np.sum(s**2 / (s**2 + len(idx) * ell)))


@dataclass(frozen=True)
class LassoFit:
    beta: np.ndarray
    sigma2: float


def lasso_path(X, y) -> tuple[np.ndarray, np.ndarray]:
    """Exact knots of the path of ``(1/2n) ||y - X beta||^2 + ell ||beta||_1``.

    Returns decreasing knot values and coefficients of shape ``(p, knots)``.
    """
    ells, _, coefs = lars_path(np.asarray(X, dtype=float), np.asarray(y, dtype=float), method="lasso")
    return ells, coefs


def lasso_at(ells: np.ndarray, coefs: np.ndarray, ell: float) -> np.ndarray:
    """Coefficients at ``ell`` by linear interpolation between knots (the path is piecewise linear)."""
    if ell >= ells[0]:
        return np.zeros(coefs.shape[0])
    if ell <= ells[-1]:
        return coefs[:, -1].copy()
    k = int(np.searchsorted(-ells, -ell))  # ells[k-1] > ell >= ells[k]
    w = (ells[k - 1] - ell) / (ells[k - 1] - ells[k])
    return (1 - w) * coefs[:, k - 1] + w * coefs[:, k]


class LassoFamily:
    def __init__(self, X, y, sigma_floor: float = 1e-4):
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.n, self.p = self.X.shape
        self.sigma_floor = sigma_floor
        self._path_key, self._path = None, None

    def fit(self, idx, ell, warm=None):
        Xs, ys = self.X[idx], self.y[idx]
        key = np.asarray(idx).tobytes()
        if self._path_key != key:
            self._path_key, self._path = key, lasso_path(Xs, ys)
        beta = lasso_at(*self._path, ell)
        r = ys - Xs @ beta
        return LassoFit(beta, max(float(r @ r) / len(idx), self.sigma_floor))

    def nll(self, est, idx):
        r = self.y[idx] - self.X[idx] @ est.beta
        return float(r @ r / (2 * est.sigma2) + 0.5 * len(idx) * (LOG_2PI + np.log(est.sigma2)))

    def df(self, est, idx, ell):
        return float(np.count_nonzero(est.beta))


class GgmFamily:
    def __init__(self, X, edge_threshold: float = 1e-3):
        self.X = np.asarray(X, dtype=float)
        self.n, self.m = self.X.shape
        self.edge_threshold = edge_threshold

    def problem(self, idx) -> GgmProblem:
        return GgmProblem.from_data(self.X[idx])

    def fit(self, idx, ell, warm=None):
        prob = self.problem(idx)
        return prob.solve(np.full(prob.dim_lambda, len(idx) * ell), warm=warm)

    def nll(self, est, idx):
        Xs = self.X[idx]
        return gaussian_nll(Xs.T @ Xs, len(idx), est.theta)

    def edges(self, est) -> int:
        iu = np.triu_indices(self.m, 1)
        return int(np.sum(np.abs(est.theta[iu]) > self.edge_threshold))

    def df(self, est, idx, ell):
        return float(self.edges(est) + self.m)

    @property
    def candidate_edges(self) -> int:
        return self.m * (self.m - 1) // 2


def _fit_path(family, idx, grid):
    # increasing grid order, warm-started
    ests, warm = [], None
    for ell in grid:
        warm = family.fit(idx, float(ell), warm)
        ests.append(warm)
    return ests


def kfold_cv_scores(family, grid: Sequence[float], k: int = 10, seed: int = 0) -> np.ndarray:
    """Mean held-out negative log-likelihood per held-out row for every grid value."""
    grid = np.asarray(grid, dtype=float)
    total = np.zeros(grid.size)
    for train, test in kfold_indices(family.n, k, seed):
        for i, est in enumerate(_fit_path(family, train, grid)):
            total[i] += family.nll(est, test)
    return total / family.n


def kfold_cv_select(family, grid: Sequence[float], k: int = 10, seed: int = 0) -> float:
    """Grid value with the lowest cross-validated held-out NLL (ties go to the smaller value)."""
    grid = np.sort(np.asarray(grid, dtype=float))
    if grid.size == 1:
        return float(grid[0])
    return float(grid[int(np.argmin(kfold_cv_scores(family, grid, k, seed)))])


class Criterion(enum.Enum):
    AIC = "aic"
    BIC = "bic"
    EBIC = "ebic"


def ic_scores(family, grid: Sequence[float], criterion: Criterion, gamma: float = 0.5) -> np.ndarray:
    """``2 NLL + pen * df``; EBIC adds ``2 gamma * (selected edges) * log(candidate edges)``."""
    criterion = Criterion(criterion)
    idx = np.arange(family.n)
    scores = []
    for ell, est in zip(grid, _fit_path(family, idx, grid)):
        df = family.df(est, idx, float(ell))
        pen = 2.0 if criterion is Criterion.AIC else np.log(family.n)
        s = 2.0 * family.nll(est, idx) + pen * df
        if criterion is Criterion.EBIC:
            cand = getattr(family, "candidate_edges", None)
            if cand is None:
                raise InvalidInputError("extended BIC needs a family with candidate edges")
            s += 2.0 * gamma * family.edges(est) * np.log(cand)
        scores.append(s)
    return np.array(scores)


def ic_select(family, grid: Sequence[float], criterion: Criterion, gamma: float = 0.5) -> float:
    grid = np.sort(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise InvalidInputError("grid must be non-empty")
    if grid.size == 1:
        return float(grid[0])
    return float(grid[int(np.argmin(ic_scores(family, grid, criterion, gamma)))])
