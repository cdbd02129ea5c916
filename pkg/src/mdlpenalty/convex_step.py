"""Penalty-weight half of the alternating loop.

For fixed parameters ``theta`` each update minimizes
``g(theta, lam) + log Zbar(lam)`` over the box.  Both the penalty and the
diagonal normalizer bound separate over coordinates, so every coordinate is
a one-dimensional convex problem whose unconstrained minimizer is clamped.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .core import Box, InvalidInputError, Lambda, Lasso, Tikhonov, project_box


def _prep(theta, h_diag, box: Box):
    t = np.abs(np.atleast_1d(np.asarray(theta, dtype=float)))
    h = np.atleast_1d(np.asarray(h_diag, dtype=float))
    if h.size == 1 and t.size > 1:
        h = np.full(t.size, h[0])
    if t.shape != h.shape or t.shape != box.lower.shape:
        raise InvalidInputError(f"shape mismatch: theta {t.shape}, h {h.shape}, box {box.lower.shape}")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(h))) or np.any(h < 0):
        raise InvalidInputError("theta must be finite and h_diag finite and nonnegative")
    return t, h


def _finish(raw: np.ndarray, t: np.ndarray, h: np.ndarray, box: Box) -> Lambda:
    # theta_j = 0: the penalty feature vanishes and the bound decreases without limit -> upper corner.
    # h_j = 0: only the increasing penalty term remains -> lower corner.
    raw = np.where(h == 0, box.lower, raw)
    raw = np.where(t == 0, box.upper, raw)
    return project_box(raw, box)


def tikhonov_root(theta_abs: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Positive root ``mu`` of ``theta^2 = h / (mu (h + mu))`` (requires theta, h > 0).

    Written as ``2h / (sqrt(t (t + 4)) + t)`` with ``t = theta^2 h``, which equals
    ``(h/2) (sqrt(1 + 4/t) - 1)`` without the cancellation at large ``t``.
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t = theta_abs**2 * h
        return 2.0 * h / (np.sqrt(t) * np.sqrt(t + 4.0) + t)


def update_tikhonov(theta, h_diag, scale: float, box: Box) -> Lambda:
    """Minimize ``(s/2) lam theta^2 + 0.5 log((h + s lam)/(s lam))`` per coordinate and project."""
    if not scale > 0:
        raise InvalidInputError("scale must be positive")
    t, h = _prep(theta, h_diag, box)
    raw = tikhonov_root(t, h) / scale
    return _finish(np.where(np.isfinite(raw), raw, box.upper), t, h, box)


def lasso_root(theta_abs: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Positive real root of ``lam^3 + h lam - h/|theta| = 0``.

    This cubic is the first-order condition of ``lam |theta| + 0.5 log((h + lam^2)/lam^2)``.
    Cardano's two cube roots ``u + v`` (``uv = -h/3``) are recombined as
    ``2a / (u^2 + h/3 + v^2)`` with ``a = h / (2|theta|)`` to avoid cancellation.
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        a = h / (2.0 * theta_abs)
        third = h / 3.0
        u = np.cbrt(a + np.sqrt(a * a + third**3))
        return 2.0 * a / (u * u + third + third * third / (u * u))


def update_lasso(theta, h_diag, box: Box) -> Lambda:
    """Minimize ``lam |theta| + 0.5 log((h + lam^2)/lam^2)`` per coordinate and project."""
    t, h = _prep(theta, h_diag, box)
    raw = lasso_root(t, h)
    return _finish(np.where(np.isfinite(raw), raw, box.upper), t, h, box)


def tikhonov_bound_derivative(h_diag, scale: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    h = np.asarray(h_diag, dtype=float)
    return lambda lam: -h / (2.0 * lam * (h + scale * lam))


def lasso_bound_derivative(h_diag) -> Callable[[np.ndarray], np.ndarray]:
    h = np.asarray(h_diag, dtype=float)
    return lambda lam: -h / (lam * (h + lam * lam))


def update_numeric(
    penalty_features,
    bound_derivative: Callable[[np.ndarray], np.ndarray],
    box: Box,
    xtol: float | None = None,
    max_iter: int = 4000,
) -> Lambda:
    """Per-coordinate bisection on the sign of ``g_j + d/dlam_j log Zbar``.

    ``bound_derivative`` maps a weight vector to the vector of per-coordinate
    derivatives of the (separable) bound.  Bisection runs on geometric
    midpoints while the bracket spans more than a factor of two, then on
    arithmetic midpoints until the bracket is narrower than ``xtol``.  With
    ``xtol=None`` it runs to floating-point resolution, which is well below
    ``1e-10 * (b - a)``.
    """
    g = np.atleast_1d(np.asarray(penalty_features, dtype=float))
    if g.shape != box.lower.shape:
        raise InvalidInputError("penalty feature vector does not match box")
    lo, hi = box.lower.copy(), box.upper.copy()
    d_lo = g + bound_derivative(lo)
    d_hi = g + bound_derivative(hi)
    if not (np.all(np.isfinite(d_lo)) and np.all(np.isfinite(d_hi))):
        raise InvalidInputError("derivative is not finite at the box corners")
    out = np.where(d_lo >= 0, box.lower, np.where(d_hi <= 0, box.upper, np.nan))
    active = np.isnan(out)
    if np.any(active):
        lo, hi = lo[active], hi[active]
        ga = g[active]
        idx = np.flatnonzero(active)
        tol = 0.0 if xtol is None else xtol * np.ones_like(lo)

        def deriv(x):
            full = box.upper.copy()
            full[idx] = x
            return ga + bound_derivative(full)[idx]

        for _ in range(max_iter):
            mid = np.where(hi > 2.0 * lo, np.sqrt(lo * hi), 0.5 * (lo + hi))
            stuck = (mid <= lo) | (mid >= hi) | (hi - lo <= tol)
            if np.all(stuck):
                break
            d = deriv(mid)
            go_up = (d < 0) & ~stuck
            go_down = (d >= 0) & ~stuck
            lo = np.where(go_up, mid, lo)
            hi = np.where(go_down, mid, hi)
        out[idx] = 0.5 * (lo + hi)
    return project_box(out, box)


def update_from_features(features, h_diag, kind, box: Box) -> Lambda:
    """Dispatch the closed-form update from penalty features ``g_j(theta)``."""
    g = np.asarray(features, dtype=float)
    if isinstance(kind, Tikhonov):
        # g_j = (s/2) theta_j^2
        return update_tikhonov(np.sqrt(np.maximum(2.0 * g / kind.scale, 0.0)), h_diag, kind.scale, box)
    if isinstance(kind, Lasso):
        return update_lasso(g, h_diag, box)
    raise InvalidInputError(f"unsupported penalty kind {kind!r}")
