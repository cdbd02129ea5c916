"""Synthetic regression generators and CSV ingestion."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import InvalidInputError


@dataclass(frozen=True)
class RegressionDataset:
    X: np.ndarray
    y: np.ndarray
    meta: dict = field(default_factory=dict)
    feature_names: tuple = ()

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[0] != self.y.size:
            raise InvalidInputError(f"inconsistent dataset shapes {self.X.shape} and {self.y.shape}")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "RegressionDataset":
        return RegressionDataset(self.X[idx], self.y[idx], dict(self.meta), self.feature_names)


def gen_synth_regression(
    n: int,
    informative: int = 5,
    irrelevant: int = 45,
    correlated: bool = False,
    noise_sd: float = 1.0,
    seed: int = 0,
    latent_dim: int = 10,
) -> RegressionDataset:
    """Linear data with unit coefficients on the first ``informative`` features.

    Uncorrelated features are i.i.d. standard normal.  Correlated features are
    ``Z @ A`` with ``Z`` of shape ``(n, latent_dim)`` and a seeded mixing matrix
    ``A``, so the design has rank at most ``latent_dim``.
    """
    if n < 2:
        raise InvalidInputError("n must be >= 2")
    p = informative + irrelevant
    rng = np.random.default_rng(seed)
    if correlated:
        A = rng.standard_normal((latent_dim, p)) / np.sqrt(latent_dim)
        X = rng.standard_normal((n, latent_dim)) @ A
    else:
        X = rng.standard_normal((n, p))
    beta = np.zeros(p)
    beta[:informative] = 1.0
    y = X @ beta + noise_sd * rng.standard_normal(n)
    meta = {
        "informative_count": informative,
        "irrelevant_count": irrelevant,
        "correlated": bool(correlated),
        "noise_sd": float(noise_sd),
        "seed": seed,
        "standardized": False,
        "beta_true": beta,
    }
    return RegressionDataset(X, y, meta)


def column_stats(X: np.ndarray):
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    return mean, np.where(sd > 0, sd, 1.0)


def standardize(X, stats=None) -> np.ndarray:
    """Zero-mean unit-variance columns; constant columns are only centered."""
    X = np.asarray(X, dtype=float)
    mean, sd = column_stats(X) if stats is None else stats
    return (X - mean) / sd


def load_csv(path, target_column: str, standardize_features: bool = False) -> RegressionDataset:
    """Read a headered, comma-separated numeric file.

    Every column except ``target_column`` becomes a feature.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InvalidInputError(f"{path} is empty") from None
        if target_column not in header:
            raise KeyError(f"target column {target_column!r} not found in {path} (columns: {', '.join(header)})")
        rows = []
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InvalidInputError(f"row {lineno} has {len(row)} fields, expected {len(header)}")
            vals = []
            for name, cell in zip(header, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise InvalidInputError(f"row {lineno}, column {name!r}: non-numeric value {cell!r}") from None
                if not math.isfinite(v):
                    raise InvalidInputError(f"row {lineno}, column {name!r}: non-finite value {cell!r}")
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise InvalidInputError(f"{path} has no data rows")
    data = np.array(rows)
    t = header.index(target_column)
    feats = [i for i in range(len(header)) if i != t]
    X = data[:, feats]
    if standardize_features:
        X = standardize(X)
    names = tuple(header[i] for i in feats)
    return RegressionDataset(X, data[:, t], {"source": str(path), "standardized": bool(standardize_features)}, names)


def train_test_split(n: int, test_fraction: float, seed: int):
    """Seeded shuffled split; at least one row on each side."""
    if not 0 < test_fraction < 1:
        raise InvalidInputError("test_fraction must lie in (0, 1)")
    n_test = min(max(1, int(round(test_fraction * n))), n - 1)
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])
