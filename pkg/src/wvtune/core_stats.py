"""Data model, Gaussian-mixture sampling and sample statistics.

Matrices follow the column convention: a class sample matrix has shape
``(p, n_i)`` with one observation per column.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefiniteError, ParameterError

# Relative pivot threshold for declaring a Cholesky factorization singular.
PIVOT_RTOL = 1e-12
SYMMETRY_RTOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def cholesky_factor(a, role="matrix"):
    """Lower Cholesky factor of ``a``.

    Raises NotPositiveDefiniteError when a pivot falls below
    ``PIVOT_RTOL * max(diag(a))``; ``role`` names the matrix in the message.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError(f"{role} must be square, got shape {a.shape}")
    scale = float(np.max(np.abs(np.diag(a)))) if a.size else 0.0
    if not np.all(np.isfinite(a)):
        raise NotPositiveDefiniteError(f"{role} has non-finite entries", role=role)
    if scale == 0.0:
        raise NotPositiveDefiniteError(
            f"{role} is singular or indefinite (not positive definite): zero diagonal",
            role=role,
        )
    try:
        L = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(
            f"{role} is singular or indefinite (not positive definite)", role=role
        ) from None
    if np.min(np.diag(L)) ** 2 <= PIVOT_RTOL * scale:
        raise NotPositiveDefiniteError(
            f"{role} is singular or indefinite (not positive definite): "
            f"pivot below {PIVOT_RTOL:g} x max diagonal",
            role=role,
        )
    return L


def spd_solve(a, b, role="matrix"):
    """Solve ``a @ x = b`` for symmetric positive definite ``a``."""
    L = cholesky_factor(a, role)
    return scipy.linalg.cho_solve((L, True), np.asarray(b, dtype=float))


def _check_symmetric(a, name):
    scale = max(float(np.max(np.abs(a))), 1.0)
    if np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * scale:
        raise ParameterError(f"{name} is not symmetric")


@dataclass(frozen=True, eq=False)
class GaussianClassModel:
    """True statistics of a two-class Gaussian mixture."""

    mu0: np.ndarray
    mu1: np.ndarray
    sigma0: np.ndarray
    sigma1: np.ndarray
    pi0: float = 0.5
    pi1: float = 0.5

    def __post_init__(self):
        for name in ("mu0", "mu1", "sigma0", "sigma1"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        p = self.mu0.shape[0]
        if self.mu0.ndim != 1 or self.mu1.shape != (p,):
            raise ParameterError("mu0 and mu1 must be vectors of equal length")
        for name in ("sigma0", "sigma1"):
            s = getattr(self, name)
            if s.shape != (p, p):
                raise ParameterError(f"{name} must have shape ({p}, {p}), got {s.shape}")
            _check_symmetric(s, name)
        if not (0.0 < self.pi0 < 1.0 and 0.0 < self.pi1 < 1.0):
            raise ParameterError("class priors must lie in (0, 1)")
        if abs(self.pi0 + self.pi1 - 1.0) > 1e-12:
            raise ParameterError("class priors must sum to 1")
        # fail fast on non-PD covariances
        self.chol0, self.chol1  # noqa: B018

    @property
    def p(self):
        return self.mu0.shape[0]

    @property
    def mu(self):
        """Mean difference ``mu1 - mu0``."""
        return self.mu1 - self.mu0

    @property
    def center(self):
        return 0.5 * (self.mu0 + self.mu1)

    @cached_property
    def chol0(self):
        return cholesky_factor(self.sigma0, "sigma0")

    @cached_property
    def chol1(self):
        return cholesky_factor(self.sigma1, "sigma1")

    def is_common_covariance(self, atol=1e-10):
        return bool(np.max(np.abs(self.sigma0 - self.sigma1)) <= atol)

    @classmethod
    def common(cls, mu0, mu1, sigma, pi0=0.5):
        return cls(mu0, mu1, sigma, sigma, pi0, 1.0 - pi0)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Per-class sample matrices, each of shape ``(p, n_i)``."""

    x0: np.ndarray
    x1: np.ndarray

    def __post_init__(self):
        x0, x1 = _frozen(self.x0), _frozen(self.x1)
        if x0.ndim != 2 or x1.ndim != 2:
            raise ParameterError("class sample matrices must be 2-D (p x n_i)")
        if x0.shape[0] != x1.shape[0]:
            raise ParameterError(
                f"feature dimension mismatch: {x0.shape[0]} vs {x1.shape[0]}"
            )
        if x0.shape[1] < 2 or x1.shape[1] < 2:
            raise ParameterError("each class needs at least 2 samples")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "x1", x1)

    @property
    def p(self):
        return self.x0.shape[0]

    @property
    def n0(self):
        return self.x0.shape[1]

    @property
    def n1(self):
        return self.x1.shape[1]

    @property
    def n(self):
        return self.n0 + self.n1

    def features_and_labels(self):
        """Stack into ``(n, p)`` features and an int label vector."""
        X = np.concatenate([self.x0.T, self.x1.T], axis=0)
        y = np.concatenate([np.zeros(self.n0, dtype=int), np.ones(self.n1, dtype=int)])
        return X, y

    @classmethod
    def from_features(cls, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        bad = ~np.isin(y, (0, 1))
        if np.any(bad):
            raise ParameterError(f"labels must be 0 or 1, found {y[bad][0]!r}")
        return cls(X[y == 0].T, X[y == 1].T)


@dataclass(frozen=True, eq=False)
class SampleStatistics:
    mu0_hat: np.ndarray
    mu1_hat: np.ndarray
    sigma0_hat: np.ndarray
    sigma1_hat: np.ndarray
    sigma_pooled: np.ndarray
    n0: int
    n1: int

    def __post_init__(self):
        for name in ("mu0_hat", "mu1_hat", "sigma0_hat", "sigma1_hat", "sigma_pooled"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def p(self):
        return self.mu0_hat.shape[0]

    @property
    def n(self):
        return self.n0 + self.n1

    @property
    def pi0_hat(self):
        return self.n0 / self.n

    @property
    def pi1_hat(self):
        return self.n1 / self.n

    @property
    def mu_hat(self):
        """Sample mean difference ``mu1_hat - mu0_hat``."""
        return self.mu1_hat - self.mu0_hat

    @property
    def center(self):
        return 0.5 * (self.mu0_hat + self.mu1_hat)

    @property
    def log_prior_ratio(self):
        return math.log(self.n1 / self.n0)

    @cached_property
    def pooled_chol(self):
        return cholesky_factor(self.sigma_pooled, "pooled sample covariance")

    def pooled_solve(self, b):
        """Apply the inverse pooled covariance to ``b``."""
        return scipy.linalg.cho_solve((self.pooled_chol, True), np.asarray(b, dtype=float))


def _class_rng(seed, label):
    # independent substream per (seed, class)
    return np.random.default_rng([int(seed), int(label)])


def sample_class(mu, chol, n, rng):
    z = rng.standard_normal((mu.shape[0], n))
    return mu[:, None] + chol @ z


def sample_dataset(model, n0, n1, seed):
    """Draw ``n0`` and ``n1`` i.i.d. columns from the two class Gaussians.

    Class ``i`` uses its own generator seeded by ``(seed, i)``, so changing
    ``n1`` never perturbs the class-0 draws.
    """
    if n0 < 2 or n1 < 2:
        raise ParameterError("n0 and n1 must be at least 2")
    x0 = sample_class(model.mu0, model.chol0, int(n0), _class_rng(seed, 0))
    x1 = sample_class(model.mu1, model.chol1, int(n1), _class_rng(seed, 1))
    return LabeledDataset(x0, x1)


def sample_points(model, n, label, rng):
    """Test points from one class, shape ``(p, n)``."""
    if label == 0:
        return sample_class(model.mu0, model.chol0, n, rng)
    return sample_class(model.mu1, model.chol1, n, rng)


def _covariance(x, mean):
    xc = x - mean[:, None]
    s = xc @ xc.T / (x.shape[1] - 1)
    return 0.5 * (s + s.T)


def compute_sample_statistics(data):
    mu0 = data.x0.mean(axis=1)
    mu1 = data.x1.mean(axis=1)
    s0 = _covariance(data.x0, mu0)
    s1 = _covariance(data.x1, mu1)
    pooled = ((data.n0 - 1) * s0 + (data.n1 - 1) * s1) / (data.n - 2)
    return SampleStatistics(mu0, mu1, s0, s1, pooled, data.n0, data.n1)


# Synthetic class statistics used throughout the experiments.

def benchmark_mean(p):
    """Class-0 mean: ones on the first ceil(sqrt(p)) entries, two 2's at the end, scaled by p^(-1/4)."""
    k = math.ceil(math.sqrt(p))
    if p < k + 2:
        raise ParameterError(f"p={p} too small for the mean layout")
    v = np.zeros(p)
    v[:k] = 1.0
    v[-2:] = 2.0
    return v / p ** 0.25


def spiked_covariance(p):
    """(10/p) 1 1^T + 0.1 I."""
    return 10.0 / p * np.ones((p, p)) + 0.1 * np.eye(p)


def ar1_covariance(p, r=0.9):
    idx = np.arange(p)
    return r ** np.abs(idx[:, None] - idx[None, :])


def benchmark_common_model(p):
    return GaussianClassModel.common(benchmark_mean(p), np.zeros(p), spiked_covariance(p))


def benchmark_distinct_model(p):
    return GaussianClassModel(benchmark_mean(p), np.zeros(p), ar1_covariance(p), spiked_covariance(p))


# CSV interchange: label in the first column, features after; optional header.

def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_csv_dataset(path):
    """Load a labeled CSV file into a LabeledDataset.

    Raises ParameterError naming the offending line for malformed rows.
    """
    rows, labels = [], []
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1 and not _is_number(row[0].strip()):
                continue  # header
            cells = [c.strip() for c in row]
            if width is None:
                width = len(cells)
                if width < 2:
                    raise ParameterError(f"{path}:{lineno}: need a label and at least one feature")
            if len(cells) != width:
                raise ParameterError(
                    f"{path}:{lineno}: expected {width} columns, found {len(cells)}"
                )
            try:
                label = float(cells[0])
                feats = [float(c) for c in cells[1:]]
            except ValueError:
                raise ParameterError(f"{path}:{lineno}: non-numeric value") from None
            if label not in (0.0, 1.0):
                raise ParameterError(f"{path}:{lineno}: label must be 0 or 1, got {cells[0]}")
            labels.append(int(label))
            rows.append(feats)
    if not rows:
        raise ParameterError(f"{path}: no data rows")
    y = np.array(labels)
    for c in (0, 1):
        if np.count_nonzero(y == c) < 2:
            raise ParameterError(f"{path}: class {c} has fewer than 2 samples")
    return LabeledDataset.from_features(np.array(rows), y)


def write_csv_dataset(data, path, header=True):
    X, y = data.features_and_labels()
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow(["label"] + [f"x{j}" for j in range(data.p)])
        for label, row in zip(y, X):
            w.writerow([int(label)] + [repr(float(v)) for v in row])
