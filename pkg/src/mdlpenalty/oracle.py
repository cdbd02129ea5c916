"""Brute-force ground truth on the one-dimensional Gaussian location model.

Model: one observation ``x``, loss ``f_x(theta) = (x - theta)^2 / 2 + log(2 pi) / 2``,
penalty ``lam theta^2 / 2``, parameter domain ``[-B, B]`` or the real line.
The penalized maximizer is ``clamp(x / (1 + lam), -B, B)``, so the LNML
normalizer ``Z(lam)`` is a one-dimensional integral over ``x`` that we
evaluate by composite Gauss-Legendre quadrature split at the kinks
``x = +-B (1 + lam)``.

Everything the bound theorems need is available here in closed form or by
quadrature: the upper bound with neighbor ``U = [-u, u]``, the strong-convexity
lower bound with set ``V = Omega + U`` and the interior-mass function ``T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import Box, InvalidInputError, Lambda, RermProblem, Tikhonov, UpperSmoothness

HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


class QuadratureError(RuntimeError):
    pass


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    rtol: float = 1e-10,
    max_levels: int = 30,
    initial_panels: int = 4,
) -> tuple[float, float]:
    """Composite 10-point Gauss-Legendre over consecutive breakpoints.

    The panel count is doubled until two successive estimates agree to
    ``rtol`` (relative, with an absolute floor of ``1e-300``).  Returns the
    finest estimate and the last difference.
    """
    pts = np.asarray(sorted(set(float(b) for b in breakpoints)))
    if pts.size < 2:
        return 0.0, 0.0

    def rule(panels: int) -> float:
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            edges = np.linspace(a, b, panels + 1)
            mid = 0.5 * (edges[1:] + edges[:-1])
            half = 0.5 * (edges[1:] - edges[:-1])
            x = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
            w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
            total += float(np.dot(w, f(x)))
        return total

    panels = initial_panels
    prev = rule(panels)
    for _ in range(max_levels):
        panels *= 2
        cur = rule(panels)
        diff = abs(cur - prev)
        if diff <= rtol * abs(cur) or diff < 1e-300:
            return cur, diff
        prev = cur
    raise QuadratureError(f"no convergence after {max_levels} refinements (last change {diff:.3g})")


@dataclass(frozen=True)
class Scalar1DModel:
    """Gaussian location model; ``bound=None`` means an unbounded parameter domain."""

    bound: float | None = None
    tail_sds: float = 12.0

    def __post_init__(self):
        if self.bound is not None and not (self.bound > 0 and math.isfinite(self.bound)):
            raise InvalidInputError("bound must be positive and finite (or None)")

    @property
    def bounded(self) -> bool:
        return self.bound is not None

    def theta_hat(self, x, lam: float):
        th = np.asarray(x, dtype=float) / (1.0 + lam)
        return np.clip(th, -self.bound, self.bound) if self.bounded else th

    def rerm_min(self, x, lam: float):
        th = self.theta_hat(x, lam)
        x = np.asarray(x, dtype=float)
        return 0.5 * (x - th) ** 2 + HALF_LOG_2PI + 0.5 * lam * th**2

    def x_max(self, lam: float) -> float:
        # interior integrand is a centered Gaussian with sd sqrt((1+lam)/lam);
        # boundary tails are unit-sd Gaussians centered at +-B
        return (self.bound or 0.0) + self.tail_sds * math.sqrt((1.0 + lam) / lam)

    def breakpoints(self, lam: float) -> list[float]:
        xm = self.x_max(lam)
        pts = [-xm, 0.0, xm]
        if self.bounded:
            k = self.bound * (1.0 + lam)
            pts += [p for p in (-k, k) if -xm < p < xm]
        return pts


def _check_lam(lam: float) -> float:
    lam = float(lam)
    if not (lam > 0 and math.isfinite(lam)):
        raise InvalidInputError(f"lambda must be positive and finite, got {lam}")
    return lam


def z_quadrature(model: Scalar1DModel, lam: float, rtol: float = 1e-11) -> float:
    """``Z(lam) = int max_theta exp(-f_x(theta) - g(theta, lam)) dx``."""
    lam = _check_lam(lam)
    val, _ = integrate(lambda x: np.exp(-model.rerm_min(x, lam)), model.breakpoints(lam), rtol=rtol)
    return val


def lnml_quadrature(model: Scalar1DModel, x: float, lam: float) -> float:
    return float(model.rerm_min(x, lam)) + math.log(z_quadrature(model, lam))


def gaussian_mass(u: float) -> float:
    """``R(1; [-u, u]) = P(|N(0, 1)| <= u)``; one for ``u = inf``."""
    return 1.0 if math.isinf(u) else math.erf(u / math.sqrt(2.0))


def penalty_mass(lam: float, half_width: float) -> float:
    """``int_{-c}^{c} exp(-lam theta^2 / 2) d theta``."""
    full = math.sqrt(2 * math.pi / lam)
    return full if math.isinf(half_width) else full * math.erf(half_width * math.sqrt(lam / 2.0))


def log_upper_bound(model: Scalar1DModel, lam: float, neighbor: float = math.inf) -> float:
    """Log of the normalizer upper bound with ``U = [-u, u]`` (``c0 = 0``, ``H0 = 1``, ``r = 0``).

    For ``u = inf`` this is ``0.5 log((1 + lam)/lam)``, the Tikhonov closed form.
    """
    lam = _check_lam(lam)
    reach = math.inf if (not model.bounded or math.isinf(neighbor)) else model.bound + neighbor
    return (
        0.5 * math.log1p(lam)
        - HALF_LOG_2PI
        - math.log(gaussian_mass(neighbor))
        + math.log(penalty_mass(lam, reach))
    )


def interior_mass(model: Scalar1DModel, psi: float, lambda_star: float) -> float:
    """``T(psi)``: probability under ``N(psi, 1)`` of data whose estimate at ``lambda_star`` is interior."""
    if not model.bounded:
        return 1.0
    k = model.bound * (1.0 + lambda_star)
    dens = lambda x: np.exp(-0.5 * (x - psi) ** 2) / math.sqrt(2 * math.pi)
    lo, hi = max(-k, psi - 40.0), min(k, psi + 40.0)
    if lo >= hi:
        return 0.0
    val, _ = integrate(dens, [lo, min(max(psi, lo), hi), hi], rtol=1e-12)
    return val


def inf_interior_mass(model: Scalar1DModel, lambda_star: float, neighbor: float, grid: int = 201) -> float:
    """Brute-force infimum of ``T`` over ``V = Omega + [-u, u]`` (symmetric, so ``psi >= 0``)."""
    if not model.bounded:
        return 1.0
    if math.isinf(neighbor):
        return 0.0
    reach = model.bound + neighbor
    return min(interior_mass(model, float(p), lambda_star) for p in np.linspace(0.0, reach, grid))


def log_lower_bound(model: Scalar1DModel, lam: float, lambda_star: float, neighbor: float = math.inf) -> float:
    """Log of the strong-convexity lower bound of ``Z(lam)`` with ``V = Omega + U``.

    ``sqrt(1 + lam) / sqrt(2 pi) * inf_V T * int_V exp(-lam theta^2 / 2)``.
    """
    lam = _check_lam(lam)
    tinf = inf_interior_mass(model, lambda_star, neighbor)
    if tinf <= 0:
        return -math.inf
    reach = math.inf if (not model.bounded or math.isinf(neighbor)) else model.bound + neighbor
    return 0.5 * math.log1p(lam) - HALF_LOG_2PI + math.log(tinf) + math.log(penalty_mass(lam, reach))


def gap_constant(model: Scalar1DModel, lambda_star: float, neighbor: float = math.inf) -> float:
    """Uniform gap bound ``c0 + 0.5 log(H0 / H0_lower) - log R(H0; U) - log inf_V T`` (first two vanish)."""
    tinf = inf_interior_mass(model, lambda_star, neighbor)
    if tinf <= 0:
        return math.inf
    return -math.log(gaussian_mass(neighbor)) - math.log(tinf)


def best_neighbor(model: Scalar1DModel, lambda_star: float, candidates=None) -> float:
    """Neighbor half-width minimizing :func:`gap_constant` (``inf`` when there is no boundary)."""
    if not model.bounded:
        return math.inf
    if candidates is None:
        candidates = np.linspace(0.1, 4.0, 40)
    return float(min(candidates, key=lambda u: gap_constant(model, lambda_star, float(u))))


@dataclass
class GapReport:
    lambdas: np.ndarray
    gaps: np.ndarray
    bound: float
    neighbor: float
    lambda_star: float
    slack: float = 1e-8
    log_z: np.ndarray = field(default_factory=lambda: np.array([]))
    log_zbar: np.ndarray = field(default_factory=lambda: np.array([]))

    @property
    def passed(self) -> np.ndarray:
        return self.gaps <= self.bound + self.slack

    @property
    def ok(self) -> bool:
        return bool(np.all(self.passed))


def gap_check(
    model: Scalar1DModel,
    lambdas: Sequence[float],
    neighbor: float | None = None,
    lambda_star: float | None = None,
    slack: float = 1e-8,
) -> GapReport:
    """Compare ``log Zbar_U(lam) - log Z(lam)`` with the uniform gap constant.

    The data-dependent RERM minimum cancels in uLNML - LNML, so the gap is the
    difference of log normalizers.  ``lambda_star`` defaults to the smallest
    tested weight; ``neighbor`` defaults to :func:`best_neighbor`.
    """
    lams = np.array([_check_lam(v) for v in lambdas])
    lam_star = float(lams.min()) if lambda_star is None else _check_lam(lambda_star)
    if lam_star > lams.min():
        raise InvalidInputError("lambda_star must not exceed the tested weights")
    u = best_neighbor(model, lam_star) if neighbor is None else float(neighbor)
    log_z = np.array([math.log(z_quadrature(model, v)) for v in lams])
    log_zbar = np.array([log_upper_bound(model, v, u) for v in lams])
    return GapReport(lams, log_zbar - log_z, gap_constant(model, lam_star, u), u, lam_star, slack, log_z, log_zbar)


def minimize_1d(
    objective: Callable[[float], float],
    bracket: tuple[float, float],
    tol: float = 1e-10,
    derivative: Callable[[float], float] | None = None,
) -> float:
    """Minimizer of a unimodal function on ``[lo, hi]``.

    Golden-section search narrows the bracket to ``1e-6`` of its width; value
    comparisons cannot resolve the minimizer much further (the function is
    flat to rounding there), so the rest is bisection on the sign of
    ``derivative`` or, if none is given, of a short central difference.  The
    better endpoint wins if it beats the interior point.
    """
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise InvalidInputError("bracket must satisfy lo < hi")
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = objective(c), objective(d)
    coarse = max(tol, 1e-6 * (hi - lo))
    while b - a > coarse:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = objective(d)
    if derivative is None:
        def derivative(x):
            e = 1e-5 * max(1.0, abs(x))
            return objective(x + e) - objective(x - e)
    for _ in range(200):
        if b - a <= tol:
            break
        mid = 0.5 * (a + b)
        if derivative(mid) > 0:
            b = mid
        else:
            a = mid
    x = 0.5 * (a + b)
    return min((x, lo, hi), key=objective)


class GaussianLocation(RermProblem):
    """Independent Gaussian locations ``x_j`` with per-coordinate Tikhonov weights.

    ``f_x(theta) = sum_j (x_j - theta_j)^2 / 2 + (p/2) log 2 pi`` with an optional
    box ``[-B, B]`` on every coordinate; ``H0 = I`` and ``c0 = 0``.
    """

    def __init__(self, x, bound: float | None = None):
        self.x = np.atleast_1d(np.asarray(x, dtype=float))
        self.bound = bound
        self.dim_theta = self.dim_lambda = self.x.size

    def solve(self, lam: Lambda, warm=None) -> np.ndarray:
        th = self.x / (1.0 + lam.weights)
        return np.clip(th, -self.bound, self.bound) if self.bound is not None else th

    def loss(self, theta) -> float:
        return float(0.5 * np.sum((self.x - theta) ** 2) + self.x.size * HALF_LOG_2PI)

    def penalty_features(self, theta) -> np.ndarray:
        return 0.5 * np.asarray(theta, dtype=float) ** 2

    def smoothness(self) -> UpperSmoothness:
        return UpperSmoothness(np.ones(self.x.size))

    def penalty_kind(self):
        return Tikhonov(1.0)


def default_box(d: int, lo: float = 1e-6, hi: float = 1e6) -> Box:
    return Box.uniform(lo, hi, d)
