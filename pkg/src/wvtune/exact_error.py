"""Misclassification probability of linear rules under Gaussian classes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .classifiers import classify
from .errors import ConstantClassifierError, ParameterError

FLAVORS = ("exact", "deterministic-equivalent", "g-estimate")


def norm_cdf(x):
    """Standard normal CDF through erfc, accurate deep in both tails."""
    return 0.5 * erfc(-np.asarray(x, dtype=float) / np.sqrt(2.0))


@dataclass(frozen=True)
class MomentQuadruple:
    """Class-conditional mean and variance of the discriminant."""

    m0: float
    m1: float
    s0_sq: float
    s1_sq: float
    flavor: str = "exact"

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ParameterError(f"unknown moment flavor {self.flavor!r}")
        if not (self.s0_sq > 0 and self.s1_sq > 0):
            raise ParameterError(
                f"discriminant variances must be positive, got {self.s0_sq}, {self.s1_sq}"
            )


def error_from_moments(m, pi0, pi1):
    """``pi0 Phi(m0/s0) + pi1 Phi(-m1/s1)``."""
    if not (m.s0_sq > 0 and m.s1_sq > 0):
        raise ParameterError("non-positive discriminant variance")
    return float(
        pi0 * norm_cdf(m.m0 / np.sqrt(m.s0_sq)) + pi1 * norm_cdf(-m.m1 / np.sqrt(m.s1_sq))
    )


def constant_rule_error(disc, model):
    """Error of a rule that ignores x: it always outputs ``1{w0 > 0}``."""
    return model.pi0 if disc.w0 > 0 else model.pi1


def expected_error_exact(disc, model):
    """Exact test error of ``1{b^T x + b0 > 0}`` when class i is N(mu_i, Sigma_i)."""
    if disc.is_constant:
        raise ConstantClassifierError("constant classifier: weight vector is zero")
    w = disc.w
    s0 = np.sqrt(w @ model.sigma0 @ w)
    s1 = np.sqrt(w @ model.sigma1 @ w)
    e0 = norm_cdf((w @ model.mu0 + disc.w0) / s0)
    e1 = norm_cdf(-(w @ model.mu1 + disc.w0) / s1)
    return float(model.pi0 * e0 + model.pi1 * e1)


def alpha_lda_direction(stats, alpha):
    """Row vector ``rho mu_hat^T + alpha mu_hat^T S^{-1} P`` of the alpha-LDA discriminant."""
    mu_hat = stats.mu_hat
    s_inv_mu = stats.pooled_solve(mu_hat)
    rho = float(mu_hat @ s_inv_mu) / float(mu_hat @ mu_hat)
    projected = s_inv_mu - rho * mu_hat  # P S^{-1} mu_hat
    return rho * mu_hat + alpha * projected


def conditional_moments_exact(alpha_disc, stats, model):
    """True conditional moments of the alpha-LDA discriminant for one training set.

    ``alpha_disc`` must come from the LDA weight vector; only its ``alpha`` is
    read, the direction is rebuilt from ``stats``.
    """
    v = alpha_lda_direction(stats, alpha_disc.alpha)
    c = stats.center
    return MomentQuadruple(
        m0=float(v @ (model.mu0 - c)),
        m1=float(v @ (model.mu1 - c)),
        s0_sq=float(v @ model.sigma0 @ v),
        s1_sq=float(v @ model.sigma1 @ v),
        flavor="exact",
    )


def empirical_error(disc, data):
    """Fraction of misclassified columns of a labeled dataset."""
    if data.n == 0:
        raise ParameterError("empty dataset")
    wrong = np.count_nonzero(classify(disc, data.x0) != 0)
    wrong += np.count_nonzero(classify(disc, data.x1) != 1)
    return wrong / data.n
