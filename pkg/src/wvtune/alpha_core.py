"""Splitting a discriminant into informative and noisy parts, and tuning alpha.

Any weight vector ``w`` splits along the mean difference ``mu`` as
``w = (w^T mu / mu^T mu) mu + P w`` with ``P = I - mu mu^T / mu^T mu``.
Only the second part is scaled by ``alpha``; alpha = 1 returns ``w``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifiers import LinearDiscriminant
from .errors import ConstantClassifierError, DegenerateError, ParameterError
from .exact_error import constant_rule_error, empirical_error, expected_error_exact, norm_cdf

COMMON_COV_ATOL = 1e-10
# realized weights this small relative to w are rounding residue of P w
DEGENERATE_RTOL = 1e-12
DEFAULT_GRID = (-0.5, 2.0, 0.005)


def alpha_grid(lo=DEFAULT_GRID[0], hi=DEFAULT_GRID[1], step=DEFAULT_GRID[2]):
    """Inclusive grid ``lo, lo+step, ..., hi``, rounded to kill float drift."""
    if not step > 0:
        raise ParameterError(f"grid step must be positive, got {step}")
    if hi < lo:
        raise ParameterError(f"empty grid: alpha max {hi} < alpha min {lo}")
    k = int(np.floor((hi - lo) / step + 1e-9))
    return np.round(lo + step * np.arange(k + 1), 12)


def _split(w, mu):
    mm = float(mu @ mu)
    if mm == 0.0:
        raise DegenerateError("zero mean difference: projector P_mu undefined")
    coef = float(w @ mu) / mm
    return coef, w - coef * mu


@dataclass(frozen=True)
class DecompositionTerms:
    i1: float
    n1: float
    second_term: float

    @property
    def total(self):
        return self.i1 + self.n1 + self.second_term


def decompose_known_means(w, model, x, true_class):
    """Information / noise terms of ``w^T (x - (mu0 + mu1)/2)`` for a test point."""
    if true_class not in (0, 1):
        raise ParameterError(f"class label must be 0 or 1, got {true_class}")
    w = np.asarray(w, dtype=float)
    mu = model.mu
    coef, pw = _split(w, mu)
    x_t = np.asarray(x, dtype=float) - model.center
    sign = 1.0 if true_class == 1 else -1.0
    return DecompositionTerms(
        i1=sign * float(w @ mu) / 2.0,
        n1=coef * float(mu @ (x_t - sign * mu / 2.0)),
        second_term=float(pw @ x_t),
    )


def _common_sigma(model):
    if not model.is_common_covariance(COMMON_COV_ATOL):
        raise ParameterError("alpha_mmse needs a common covariance (sigma0 == sigma1)")
    return model.sigma0


def alpha_mmse(w, model):
    """Closed-form alpha minimizing the mean-square noise under known statistics."""
    sigma = _common_sigma(model)
    w = np.asarray(w, dtype=float)
    mu = model.mu
    coef, pw = _split(w, mu)
    denom = float(pw @ sigma @ pw)
    if denom <= 1e-14 * np.linalg.norm(sigma, 2) * float(w @ w):
        raise DegenerateError("w lies in the mu direction; alpha is irrelevant")
    return -coef * float(mu @ sigma @ pw) / denom


def modified_discriminant_known_means(w, model):
    w = np.asarray(w, dtype=float)
    a = alpha_mmse(w, model)
    coef, pw = _split(w, model.mu)
    w_new = coef * model.mu + a * pw
    return LinearDiscriminant(w_new, -0.5 * float(w_new @ (model.mu0 + model.mu1)))


@dataclass(frozen=True, eq=False)
class AlphaDiscriminant:
    base_w: np.ndarray
    alpha: float
    mu_hat_diff: np.ndarray
    center: np.ndarray
    realized: LinearDiscriminant

    @property
    def degenerate(self):
        """Realized weight vector is zero: the rule is constant."""
        return self.realized.is_constant


def parameterize(w, stats, alpha):
    """The alpha-scaled discriminant built from ``w`` and the sample means."""
    w = np.asarray(w, dtype=float)
    if w.shape != (stats.p,):
        raise ParameterError(f"weight vector must have shape ({stats.p},), got {w.shape}")
    mu_hat = stats.mu_hat
    try:
        coef, pw = _split(w, mu_hat)
    except DegenerateError:
        raise DegenerateError("sample means coincide: mu_hat = 0") from None
    alpha = float(alpha)
    # at alpha = 1 the split would only reproduce w up to rounding
    w_new = w.copy() if alpha == 1.0 else coef * mu_hat + alpha * pw
    if np.linalg.norm(w_new) <= DEGENERATE_RTOL * np.linalg.norm(w):
        w_new = np.zeros_like(w)
    center = stats.center
    return AlphaDiscriminant(
        base_w=w,
        alpha=alpha,
        mu_hat_diff=mu_hat,
        center=center,
        realized=LinearDiscriminant(w_new, -float(w_new @ center)),
    )


def select_alpha(grid, values):
    """Grid minimizer; ties go to the alpha closest to 1, then the smaller one."""
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if grid.shape != values.shape or grid.size == 0:
        raise ParameterError("grid and values must be nonempty and of equal length")
    if np.all(np.isnan(values)):
        raise DegenerateError("objective is NaN on the whole grid")
    best = np.nanmin(values)
    cand = np.flatnonzero(values == best)
    order = sorted(cand, key=lambda k: (abs(grid[k] - 1.0), grid[k]))
    return float(grid[order[0]])


class ExactErrorObjective:
    """Exact test error of the realized rule under a known Gaussian model."""

    def __init__(self, model):
        self.model = model

    def __call__(self, ad):
        try:
            return expected_error_exact(ad.realized, self.model)
        except ConstantClassifierError:
            return constant_rule_error(ad.realized, self.model)

    def curve(self, w, stats, grid):
        """Same values as calling on each alpha, vectorized over the grid.

        With ``w(alpha) = a + alpha b`` both the Phi arguments' numerators and
        the variances are polynomials in alpha.
        """
        m = self.model
        coef, b = _split(np.asarray(w, dtype=float), stats.mu_hat)
        a = coef * stats.mu_hat
        c = stats.center
        grid = np.asarray(grid, dtype=float)
        out = np.empty(grid.shape)
        parts = []
        for mu_i, sig in ((m.mu0, m.sigma0), (m.mu1, m.sigma1)):
            d = mu_i - c
            sa, sb = sig @ a, sig @ b
            num = float(a @ d) + grid * float(b @ d)
            var = float(a @ sa) + 2 * grid * float(a @ sb) + grid**2 * float(b @ sb)
            parts.append((num, var))
        (num0, var0), (num1, var1) = parts
        # a and b are orthogonal, so |w(alpha)|^2 = |a|^2 + alpha^2 |b|^2
        norm_sq = float(a @ a) + grid**2 * float(b @ b)
        tiny = norm_sq <= (DEGENERATE_RTOL * np.linalg.norm(w)) ** 2
        if 1.0 in grid:
            tiny[grid == 1.0] = False
        ok = (var0 > 0) & (var1 > 0) & ~tiny
        out[ok] = m.pi0 * norm_cdf(num0[ok] / np.sqrt(var0[ok])) + m.pi1 * norm_cdf(
            -num1[ok] / np.sqrt(var1[ok])
        )
        # a zero weight vector has zero bias too: always predicts class 0
        out[~ok] = m.pi1
        return out


class EmpiricalErrorObjective:
    """Error rate of the realized rule on a holdout set."""

    def __init__(self, data):
        self.data = data

    def __call__(self, ad):
        return empirical_error(ad.realized, self.data)


def grid_search_alpha(w, stats, grid, objective):
    """Evaluate ``objective`` along the alpha grid and pick its minimizer.

    Returns ``(alpha_star, curve)`` with ``curve`` a list of (alpha, value).
    Objectives with a ``curve`` method are evaluated in one vectorized pass.
    """
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ParameterError("empty alpha grid")
    if hasattr(objective, "curve"):
        values = np.asarray(objective.curve(w, stats, grid), dtype=float)
    else:
        values = np.empty(grid.size)
        for k, a in enumerate(grid):
            try:
                values[k] = objective(parameterize(w, stats, a))
            except Exception as exc:
                exc.alpha = float(a)
                raise
    curve = [(float(a), float(v)) for a, v in zip(grid, values)]
    return select_alpha(grid, values), curve
