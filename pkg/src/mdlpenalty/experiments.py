"""Experiment cells for the regression and precision-matrix comparisons.

A cell is one (method, n, seed) triple.  Cells are pure functions of their
configuration, so they can run in any order or in worker processes; results
are sorted before they are written.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .baselines import (
    Criterion,
    GgmFamily,
    GridSpec,
    LassoFamily,
    RidgeFamily,
    grid_points,
    ic_select,
    kfold_cv_select,
)
from .core import Box, InvalidInputError
from .data import gen_synth_regression, load_csv, standardize, column_stats, train_test_split
from .mdlrs import StopRule, fit
from .models.ggm import GgmProblem, double_ring_precision, double_ring_sample, kl_gaussian
from .models.ridge import RidgeProblem, rmse

CSV_HEADER = "method,n,dim,seed,metric,wall_time_ms,extra_json"

RIDGE_METHODS = ("mdlrs-full", "mdlrs-diag", "cv-ridge", "bic-ridge", "cv-lasso")
GGM_METHODS = ("mdlrs", "cv", "aic", "bic", "ebic")


class UnknownMethodError(InvalidInputError):
    def __init__(self, name: str, registered: Sequence[str]):
        super().__init__(f"unknown method {name!r}; registered methods: {', '.join(registered)}")


def check_methods(methods: Sequence[str], registered: Sequence[str]) -> tuple[str, ...]:
    for m in methods:
        if m not in registered:
            raise UnknownMethodError(m, registered)
    return tuple(methods)


@dataclass(frozen=True)
class ExperimentResult:
    method: str
    n: int
    dim: int
    seed: int
    metric: float
    wall_time_ms: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.metric >= 0:
            raise InvalidInputError(f"metric must be non-negative, got {self.metric}")

    def sort_key(self):
        return (self.method, self.n, self.dim, self.seed)

    def csv_row(self) -> str:
        extra = json.dumps(self.extra, sort_keys=True, separators=(",", ":"))
        extra = '"' + extra.replace('"', '""') + '"'
        return f"{self.method},{self.n},{self.dim},{self.seed},{self.metric!r},{self.wall_time_ms!r},{extra}"


def format_csv(results: Sequence[ExperimentResult]) -> str:
    rows = sorted(results, key=ExperimentResult.sort_key)
    return "".join(line + "\n" for line in [CSV_HEADER] + [r.csv_row() for r in rows])


def write_csv(results: Sequence[ExperimentResult], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(results))


def summarize(results: Sequence[ExperimentResult]) -> dict:
    """Median metric per (method, dim, n), keyed as nested plain dicts for JSON output."""
    groups: dict = {}
    for r in results:
        groups.setdefault((r.method, r.dim, r.n), []).append(r.metric)
    out: dict = {}
    for (method, dim, n), vals in sorted(groups.items()):
        out.setdefault(method, {}).setdefault(str(dim), {})[str(n)] = {
            "median": float(np.median(vals)),
            "count": len(vals),
        }
    return out


def worker_count(default: int = 1) -> int:
    raw = os.environ.get("ULNML_THREADS")
    if raw is None or raw.strip() == "":
        return default
    try:
        k = int(raw)
    except ValueError:
        raise InvalidInputError(f"ULNML_THREADS must be a positive integer, got {raw!r}") from None
    if k < 1:
        raise InvalidInputError(f"ULNML_THREADS must be a positive integer, got {raw!r}")
    return k


def run_cells(fn: Callable, cells: Sequence, workers: int = 1) -> list[ExperimentResult]:
    if workers <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


def _lam_summary(weights: np.ndarray) -> dict:
    lw = np.log10(weights)
    return {
        "log10_lambda_min": round(float(lw.min()), 6),
        "log10_lambda_median": round(float(np.median(lw)), 6),
        "log10_lambda_max": round(float(lw.max()), 6),
    }


# -- regression ---------------------------------------------------------------


@dataclass(frozen=True)
class RidgeConfig:
    n_values: tuple = (30, 60, 120, 240)
    seeds: int = 10
    methods: tuple = RIDGE_METHODS
    synthetic: str = "uncorrelated"
    csv_path: str | None = None
    target: str | None = None
    test_size: int = 1000
    test_fraction: float = 0.1
    informative: int = 5
    irrelevant: int = 45
    noise_sd: float = 1.0
    box: tuple = (1e-6, 1e6)
    grid: GridSpec = GridSpec()
    folds: int = 10
    max_iter: int = 200
    timing: bool = False


def _regression_split(cfg: RidgeConfig, n: int, seed: int):
    """Training and test arrays for one cell; CSV targets are centered with the training mean."""
    if cfg.csv_path is None:
        ds = gen_synth_regression(
            n + cfg.test_size,
            informative=cfg.informative,
            irrelevant=cfg.irrelevant,
            correlated=cfg.synthetic == "correlated",
            noise_sd=cfg.noise_sd,
            seed=seed,
        )
        return ds.X[:n], ds.y[:n], ds.X[n:], ds.y[n:]
    ds = load_csv(cfg.csv_path, cfg.target)
    train, test = train_test_split(ds.n, cfg.test_fraction, seed)
    if n > train.size:
        raise InvalidInputError(f"n = {n} exceeds the {train.size} training rows available")
    train = np.sort(np.random.default_rng(seed).permutation(train)[:n])
    stats = column_stats(ds.X[train])
    Xtr, Xte = standardize(ds.X[train], stats), standardize(ds.X[test], stats)
    ybar = ds.y[train].mean()
    return Xtr, ds.y[train] - ybar, Xte, ds.y[test] - ybar


def ridge_cell(cfg: RidgeConfig, method: str, n: int, seed: int) -> ExperimentResult:
    t0 = time.perf_counter()
    X, y, Xt, yt = _regression_split(cfg, n, seed)
    p = X.shape[1]
    extra: dict = {}
    if method.startswith("mdlrs"):
        prob = RidgeProblem(X, y, normalizer="full" if method == "mdlrs-full" else "diag")
        trace = fit(prob, box=Box.uniform(*cfg.box, p), stop=StopRule(max_iter=cfg.max_iter))
        beta = trace.theta.beta
        extra.update(_lam_summary(trace.lam.weights))
        extra.update(iterations=len(trace), converged=trace.converged, sigma2=round(float(trace.theta.sigma2), 9))
    else:
        grid = grid_points(cfg.grid)
        full = np.arange(n)
        if method == "cv-lasso":
            fam = LassoFamily(X, y)
            ell = kfold_cv_select(fam, grid, cfg.folds, seed)
        else:
            fam = RidgeFamily(X, y)
            if method == "cv-ridge":
                ell = kfold_cv_select(fam, grid, cfg.folds, seed)
            else:
                ell = ic_select(fam, grid, Criterion.BIC)
        beta = fam.fit(full, ell).beta
        extra["selected_lambda"] = ell
    metric = rmse(Xt @ beta, yt)
    ms = round((time.perf_counter() - t0) * 1e3, 3) if cfg.timing else 0.0
    return ExperimentResult(method, n, p, seed, metric, ms, extra)


def _ridge_job(args):
    return ridge_cell(*args)


def run_ridge(cfg: RidgeConfig, workers: int = 1) -> list[ExperimentResult]:
    check_methods(cfg.methods, RIDGE_METHODS)
    cells = [(cfg, m, int(n), s) for m in cfg.methods for n in cfg.n_values for s in range(cfg.seeds)]
    return sorted(run_cells(_ridge_job, cells, workers), key=ExperimentResult.sort_key)


# -- precision matrices -------------------------------------------------------


@dataclass(frozen=True)
class GgmConfig:
    m_values: tuple = (10, 20)
    n_values: tuple = (100, 400, 1600)
    seeds: int = 10
    methods: tuple = GGM_METHODS
    box: tuple = (1e-6, 1e6)
    grid: GridSpec = GridSpec()
    folds: int = 10
    gamma: float = 0.5
    max_iter: int = 200
    timing: bool = False


def ggm_cell(cfg: GgmConfig, method: str, m: int, n: int, seed: int) -> ExperimentResult:
    t0 = time.perf_counter()
    truth = double_ring_precision(m)
    X = double_ring_sample(m, n, seed)
    extra: dict = {}
    if method == "mdlrs":
        prob = GgmProblem.from_data(X)
        trace = fit(prob, box=Box.uniform(*cfg.box, prob.dim_lambda), stop=StopRule(max_iter=cfg.max_iter))
        theta = trace.theta.theta
        extra.update(_lam_summary(trace.lam.weights))
        extra.update(
            iterations=len(trace),
            converged=trace.converged,
            radius=round(prob.radius, 9),
            radius_ok=prob.radius_ok(trace.theta),
        )
    else:
        fam = GgmFamily(X)
        grid = grid_points(cfg.grid)
        if method == "cv":
            ell = kfold_cv_select(fam, grid, cfg.folds, seed)
        else:
            ell = ic_select(fam, grid, Criterion(method), cfg.gamma)
        est = fam.fit(np.arange(n), ell)
        theta = est.theta
        extra.update(selected_lambda=ell, edges=fam.edges(est), baseline_penalty="quadratic")
    metric = kl_gaussian(truth, theta)
    ms = round((time.perf_counter() - t0) * 1e3, 3) if cfg.timing else 0.0
    return ExperimentResult(method, n, m, seed, max(metric, 0.0), ms, extra)


def _ggm_job(args):
    return ggm_cell(*args)


def run_ggm(cfg: GgmConfig, workers: int = 1) -> list[ExperimentResult]:
    check_methods(cfg.methods, GGM_METHODS)
    for m in cfg.m_values:
        if int(m) < 5:
            raise InvalidInputError(f"the double-ring model needs m >= 5, got m = {m}")
    cells = [
        (cfg, meth, int(m), int(n), s)
        for meth in cfg.methods
        for m in cfg.m_values
        for n in cfg.n_values
        for s in range(cfg.seeds)
    ]
    return sorted(run_cells(_ggm_job, cells, workers), key=ExperimentResult.sort_key)


def median_metric(results: Sequence[ExperimentResult], method: str, n: int, dim: int | None = None) -> float:
    vals = [r.metric for r in results if r.method == method and r.n == n and (dim is None or r.dim == dim)]
    if not vals:
        raise KeyError(f"no results for {method} at n = {n}")
    return float(np.median(vals))


def loglog_slope(ns: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of ``log value`` against ``log n``."""
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)[0])
