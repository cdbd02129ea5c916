"""Shared domain types and the RERM problem contract.

A regularized empirical risk minimization (RERM) problem is a loss ``f_X(theta)``
plus a penalty that is linear in the penalty weights,
``g(theta, lam) = sum_j lam_j * g_j(theta)``.  Every model plugged into the
alternating selection loop implements :class:`RermProblem`.
"""

from __future__ import annotations

import abc
import enum
from dataclasses import dataclass, field
from typing import Any, List, Optional

import numpy as np


class InvalidInputError(ValueError):
    """Raised for malformed arguments (non-finite values, bad shapes, bad boxes)."""


class DomainError(ArithmeticError):
    """Raised when a quantity leaves its mathematical domain (e.g. a non-PD matrix)."""


class SolveError(RuntimeError):
    """An inner RERM solve failed inside the selection loop."""

    def __init__(self, message: str, iteration: Optional[int] = None):
        super().__init__(message if iteration is None else f"iteration {iteration}: {message}")
        self.iteration = iteration


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Box:
    """Per-coordinate closed intervals ``[lower_j, upper_j]`` with ``0 < lower <= upper < inf``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size == 0:
            raise InvalidInputError(f"box bounds must be matching non-empty vectors, got {lo.shape} and {hi.shape}")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InvalidInputError("box bounds must be finite")
        if np.any(lo <= 0) or np.any(lo > hi):
            raise InvalidInputError("box bounds must satisfy 0 < lower <= upper")
        object.__setattr__(self, "lower", _readonly(lo))
        object.__setattr__(self, "upper", _readonly(hi))

    @classmethod
    def uniform(cls, lo: float, hi: float, d: int) -> "Box":
        return cls(np.full(d, float(lo)), np.full(d, float(hi)))

    @property
    def dim(self) -> int:
        return self.lower.size

    def geometric_center(self) -> np.ndarray:
        return np.sqrt(self.lower * self.upper)


@dataclass(frozen=True)
class Lambda:
    """Positive penalty-weight vector stored together with its box domain.

    Construct through :func:`project_box` (or :meth:`Lambda.at`) to get a
    projected value; direct construction validates but does not clamp.
    """

    weights: np.ndarray
    box: Box

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if w.shape != self.box.lower.shape:
            raise InvalidInputError(f"weights of shape {w.shape} do not match box of dimension {self.box.dim}")
        if not np.all(np.isfinite(w)):
            raise InvalidInputError("penalty weights must be finite")
        if np.any(w < self.box.lower) or np.any(w > self.box.upper):
            raise InvalidInputError("penalty weights must lie inside their box")
        object.__setattr__(self, "weights", _readonly(w))

    @classmethod
    def at(cls, raw, box: Box) -> "Lambda":
        return project_box(raw, box)

    @classmethod
    def center(cls, box: Box) -> "Lambda":
        """Geometric midpoint of the box, the default starting point."""
        return project_box(box.geometric_center(), box)

    @property
    def dim(self) -> int:
        return self.weights.size

    def __len__(self) -> int:
        return self.weights.size


def project_box(raw, box: Box) -> Lambda:
    """Clamp ``raw`` coordinate-wise into ``box``."""
    r = np.atleast_1d(np.asarray(raw, dtype=float))
    if r.shape != box.lower.shape:
        raise InvalidInputError(f"raw weights of shape {r.shape} do not match box of dimension {box.dim}")
    if not np.all(np.isfinite(r)):
        raise InvalidInputError("cannot project non-finite penalty weights")
    return Lambda(np.clip(r, box.lower, box.upper), box)


class ResidualKind(enum.Enum):
    ZERO = "zero"
    BOUNDED_RESIDUAL = "bounded-residual"


@dataclass(frozen=True)
class UpperSmoothness:
    """Upper-smoothness constants ``(H0, c0, r)`` of a loss.

    ``h_diag`` is the diagonal of H0 (a scalar is broadcast by the consumer).
    Only ``r = 0`` is supported, which makes the Gaussian-mass factor R(H0; R^p) equal to one.
    """

    h_diag: np.ndarray
    c0: float = 0.0
    r_kind: ResidualKind = ResidualKind.ZERO

    def __post_init__(self):
        h = np.atleast_1d(np.asarray(self.h_diag, dtype=float))
        if np.any(~np.isfinite(h)) or np.any(h < 0):
            raise InvalidInputError("h_diag entries must be finite and nonnegative")
        if not np.isfinite(self.c0) or self.c0 < 0:
            raise InvalidInputError("c0 must be finite and nonnegative")
        if self.r_kind is not ResidualKind.ZERO:
            raise NotImplementedError("only r = 0 upper smoothness is supported")
        object.__setattr__(self, "h_diag", _readonly(h))

    def broadcast(self, d: int) -> np.ndarray:
        if self.h_diag.size == 1:
            return np.full(d, self.h_diag[0])
        if self.h_diag.size != d:
            raise InvalidInputError(f"h_diag has {self.h_diag.size} entries, expected {d}")
        return np.array(self.h_diag)


@dataclass(frozen=True)
class Tikhonov:
    """Penalty ``(scale/2) * sum_j lam_j theta_j**2``."""

    scale: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise InvalidInputError("Tikhonov scale must be positive")


@dataclass(frozen=True)
class Lasso:
    """Penalty ``sum_j lam_j |theta_j|``."""


PenaltyKind = Any  # Tikhonov | Lasso


class RermProblem(abc.ABC):
    """Abstract RERM problem ``min_theta f_X(theta) + sum_j lam_j g_j(theta)``.

    Subclasses supply the solver and the loss/penalty pieces.  The normalizer
    bound and the penalty-weight update default to the closed forms for the
    declared penalty kind and diagonal smoothness; models with richer
    structure override :meth:`log_normalizer` and :meth:`convex_step`.
    """

    dim_theta: int
    dim_lambda: int

    @abc.abstractmethod
    def solve(self, lam: Lambda, warm: Any = None) -> Any:
        """Return a minimizer of ``loss + penalty`` at ``lam``.

        ``warm`` is the previous iterate; when given, the returned point must
        not have a larger objective than ``warm``.
        """

    @abc.abstractmethod
    def loss(self, theta) -> float:
        ...

    @abc.abstractmethod
    def penalty_features(self, theta) -> np.ndarray:
        """Vector ``(g_1(theta), ..., g_d(theta))``."""

    @abc.abstractmethod
    def smoothness(self) -> UpperSmoothness:
        ...

    @abc.abstractmethod
    def penalty_kind(self) -> PenaltyKind:
        ...

    def penalty(self, theta, lam: Lambda) -> float:
        return float(np.dot(lam.weights, self.penalty_features(theta)))

    def objective(self, theta, lam: Lambda) -> float:
        return self.loss(theta) + self.penalty(theta, lam)

    def log_normalizer(self, lam: Lambda) -> float:
        from .ulnml import log_normalizer

        return log_normalizer(self.smoothness(), self.penalty_kind(), lam).value

    def convex_step(self, theta, lam: Lambda) -> Lambda:
        """Minimize ``g(theta, .) + log Zbar(.)`` over the box of ``lam``."""
        from .convex_step import update_from_features

        return update_from_features(
            self.penalty_features(theta), self.smoothness().broadcast(self.dim_lambda), self.penalty_kind(), lam.box
        )


@dataclass(frozen=True)
class IterationRecord:
    lam: Lambda
    theta: Any
    ulnml: float
    rerm_objective: float


class StopReason(enum.Enum):
    TOLERANCE = "tolerance"
    MAX_ITER = "max_iter"


@dataclass
class FitTrace:
    """Per-iteration history of the alternating loop.

    Record ``t`` holds ``theta_t = solve(lam_{t-1})``, the updated ``lam_t``,
    the value ``h(theta_t, lam_t) = loss + penalty + log Zbar`` and the RERM
    objective ``f(theta_t) + g(theta_t, lam_{t-1})`` that the solve minimized.
    """

    iterations: List[IterationRecord] = field(default_factory=list)
    converged: bool = False
    stop_reason: Optional[StopReason] = None

    @property
    def final(self) -> IterationRecord:
        return self.iterations[-1]

    @property
    def lam(self) -> Lambda:
        return self.final.lam

    @property
    def theta(self):
        return self.final.theta

    @property
    def ulnml(self) -> float:
        return self.final.ulnml

    @property
    def ulnml_values(self) -> np.ndarray:
        return np.array([r.ulnml for r in self.iterations])

    def __len__(self) -> int:
        return len(self.iterations)
