"""MDL regularization selection: alternating minimization of uLNML.

Each iteration solves the RERM problem at the current penalty weights (the
concave part of uLNML as a function of the weights) and then minimizes the
linear majorizer plus the convex normalizer bound over the weights.  The
recorded values ``h(theta_t, lam_t)`` never increase as long as each solve
does not increase the objective from its warm start.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import FitTrace, IterationRecord, Lambda, RermProblem, SolveError, StopReason

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StopRule:
    max_iter: int = 200
    rel_tol: float = 1e-8

    def __post_init__(self):
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")


def fit(problem: RermProblem, lambda0: Lambda | None = None, stop: StopRule = StopRule(), box=None) -> FitTrace:
    """Run the alternating loop from ``lambda0``.

    If ``lambda0`` is omitted, start from the geometric center of ``box``.
    Stops when ``|u_t - u_{t-1}| / (1 + |u_{t-1}|) < stop.rel_tol`` or after
    ``stop.max_iter`` iterations.
    """
    if lambda0 is None:
        if box is None:
            raise ValueError("either lambda0 or box is required")
        lambda0 = Lambda.center(box)
    trace = FitTrace()
    lam = lambda0
    theta = None
    prev = None
    for t in range(1, int(stop.max_iter) + 1):
        try:
            theta = problem.solve(lam, warm=theta)
            rerm = problem.objective(theta, lam)
            lam = problem.convex_step(theta, lam)
            value = problem.objective(theta, lam) + problem.log_normalizer(lam)
        except SolveError as exc:
            raise SolveError(str(exc), iteration=t) from exc
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            raise SolveError(f"{type(exc).__name__}: {exc}", iteration=t) from exc
        trace.iterations.append(IterationRecord(lam=lam, theta=theta, ulnml=value, rerm_objective=rerm))
        if prev is not None and abs(value - prev) / (1.0 + abs(prev)) < stop.rel_tol:
            trace.converged = True
            trace.stop_reason = StopReason.TOLERANCE
            return trace
        prev = value
    trace.stop_reason = StopReason.MAX_ITER
    return trace


class MultiStartError(RuntimeError):
    def __init__(self, failures):
        self.failures = failures
        lines = "; ".join(f"init {i}: {e}" for i, e in failures)
        super().__init__(f"all {len(failures)} starts failed: {lines}")


def fit_multistart(problem: RermProblem, inits: Sequence[Lambda], stop: StopRule = StopRule()) -> FitTrace:
    """Run :func:`fit` from every initial point and keep the lowest final uLNML."""
    if len(inits) == 0:
        raise ValueError("inits must be non-empty")
    best = None
    failures = []
    for i, lam0 in enumerate(inits):
        try:
            trace = fit(problem, lam0, stop)
        except SolveError as exc:
            log.warning("start %d failed: %s", i, exc)
            failures.append((i, exc))
            continue
        if best is None or trace.ulnml < best.ulnml:
            best = trace
    if best is None:
        raise MultiStartError(failures)
    return best


def stationarity_residual(problem: RermProblem, trace: FitTrace) -> float:
    """Max-norm change of the weights under one more solve + update step."""
    lam = trace.lam
    theta = problem.solve(lam, warm=trace.theta)
    nxt = problem.convex_step(theta, lam)
    return float(np.max(np.abs(nxt.weights - lam.weights)))
