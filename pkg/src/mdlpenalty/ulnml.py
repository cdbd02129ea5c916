"""Analytic upper bound of the LNML normalizer and the uLNML objective.

All returned normalizer values drop terms that do not depend on the penalty
weights (``exp(c0)``, ``R(H0; U)`` and the variable-temperature constant), so
they are only meaningful up to an additive constant in ``lam``.  With
``c0 = 0`` and ``r = 0`` nothing is dropped for the Tikhonov bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvalidInputError, Lambda, Lasso, RermProblem, Tikhonov, UpperSmoothness

_LASSO_CONST = 0.5 * np.log(np.e / (2 * np.pi))


@dataclass(frozen=True)
class NormalizerBound:
    value: float
    per_coord: np.ndarray


def _check(h_diag, lam: Lambda) -> np.ndarray:
    h = np.atleast_1d(np.asarray(h_diag, dtype=float))
    if h.size == 1 and lam.dim > 1:
        h = np.full(lam.dim, h[0])
    if h.shape != lam.weights.shape:
        raise InvalidInputError(f"h_diag has {h.size} entries but lambda has {lam.dim}")
    if np.any(h < 0) or not np.all(np.isfinite(h)):
        raise InvalidInputError("h_diag must be finite and nonnegative")
    return h


def log_normalizer_tikhonov(h_diag, lam: Lambda, scale: float = 1.0) -> NormalizerBound:
    """``sum_j 0.5 * log((h_j + s*lam_j) / (s*lam_j))`` for the penalty ``(s/2) sum lam_j theta_j^2``."""
    if not scale > 0:
        raise InvalidInputError("scale must be positive")
    h = _check(h_diag, lam)
    per = 0.5 * np.log1p(h / (scale * lam.weights))
    return NormalizerBound(float(per.sum()), per)


def log_normalizer_lasso(h_diag, lam: Lambda) -> NormalizerBound:
    """``p/2 * log(e/2pi) + sum_j 0.5 * log((h_j + lam_j^2) / lam_j^2)`` for ``sum lam_j |theta_j|``.

    The constant is spread evenly over ``per_coord`` so that the entries still sum to ``value``.
    """
    h = _check(h_diag, lam)
    per = _LASSO_CONST + 0.5 * np.log1p(h / lam.weights**2)
    return NormalizerBound(float(per.sum()), per)


def log_normalizer(smoothness: UpperSmoothness, kind, lam: Lambda) -> NormalizerBound:
    h = smoothness.broadcast(lam.dim)
    if isinstance(kind, Tikhonov):
        return log_normalizer_tikhonov(h, lam, kind.scale)
    if isinstance(kind, Lasso):
        return log_normalizer_lasso(h, lam)
    raise InvalidInputError(f"unsupported penalty kind {kind!r}")


def ulnml_objective(problem: RermProblem, theta, lam: Lambda) -> float:
    """``f_X(theta) + g(theta, lam) + log Zbar(lam)``.

    At ``theta = problem.solve(lam)`` this is the uLNML code length of the data.
    """
    return problem.objective(theta, lam) + problem.log_normalizer(lam)


def ulnml(problem: RermProblem, lam: Lambda) -> float:
    """uLNML at ``lam`` (solves the RERM problem)."""
    return ulnml_objective(problem, problem.solve(lam), lam)
