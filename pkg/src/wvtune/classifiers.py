"""Binary linear classifiers reduced to a common (w, w0) representation.

Every fitter returns a :class:`LinearDiscriminant`; the decision rule is
``1{w^T x + w0 > 0}`` with ties going to class 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import expit

from .core_stats import cholesky_factor, compute_sample_statistics
from .errors import ConvergenceError, NotPositiveDefiniteError, ParameterError


@dataclass(frozen=True, eq=False)
class LinearDiscriminant:
    w: np.ndarray
    w0: float

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.ndim != 1:
            raise ParameterError("weight vector must be 1-D")
        if not (np.all(np.isfinite(w)) and np.isfinite(self.w0)):
            raise ParameterError("discriminant has non-finite entries")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "w0", float(self.w0))

    @property
    def p(self):
        return self.w.shape[0]

    @property
    def is_constant(self):
        """True when w is the zero vector, i.e. the rule ignores x."""
        return not np.any(self.w)

    def decision(self, x):
        """``w^T x + w0`` for a vector or a ``(p, m)`` matrix of columns."""
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.p:
            raise ParameterError(f"dimension mismatch: discriminant has p={self.p}, x has {x.shape[0]}")
        return self.w @ x + self.w0

    def negated(self):
        return LinearDiscriminant(-self.w, -self.w0)

    def scaled(self, c):
        return LinearDiscriminant(c * self.w, c * self.w0)


def classify(disc, x):
    """Label(s) in {0, 1}; strict inequality so a zero discriminant gives 0."""
    d = disc.decision(x)
    if np.ndim(d) == 0:
        return int(d > 0)
    return (d > 0).astype(int)


def _centered(w, stats, log_prior=True):
    w0 = -float(w @ stats.center)
    if log_prior:
        w0 += stats.log_prior_ratio
    return LinearDiscriminant(w, w0)


class SingularCovarianceError(NotPositiveDefiniteError):
    pass


def fit_lda(stats):
    """Plug-in LDA: ``w = S^{-1} mu_hat`` with the log prior-ratio bias."""
    try:
        w = stats.pooled_solve(stats.mu_hat)
    except NotPositiveDefiniteError as exc:
        raise SingularCovarianceError(
            f"{exc}; LDA needs n - 2 > p (n={stats.n}, p={stats.p}), "
            "use fit_rlda or fit_rplda instead",
            role=exc.role,
        ) from None
    return _centered(w, stats)


def fit_nearest_centroid(stats):
    """Assign to the closer sample mean. Coincident means give the zero rule."""
    return _centered(stats.mu_hat.copy(), stats, log_prior=False)


def fit_rlda(stats, gamma):
    if not gamma > 0:
        raise ParameterError(f"ridge parameter gamma must be positive, got {gamma}")
    a = stats.sigma_pooled + gamma * np.eye(stats.p)
    L = cholesky_factor(a, "regularized pooled covariance")
    w = scipy.linalg.cho_solve((L, True), stats.mu_hat)
    return _centered(w, stats)


@dataclass(frozen=True)
class RpLdaConfig:
    d: int
    m: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ParameterError("projection dimension d must be >= 1")
        if self.m < 1:
            raise ParameterError("ensemble size m must be >= 1")


def rplda_max_dim(stats):
    return int(np.linalg.matrix_rank(stats.sigma_pooled)) - 2


def _projected_weight(stats, R):
    """``R^T (R S R^T)^{-1} R mu_hat``."""
    L = cholesky_factor(R @ stats.sigma_pooled @ R.T, "projected covariance")
    return R.T @ scipy.linalg.cho_solve((L, True), R @ stats.mu_hat)


def rplda_weight(stats, projections):
    """Average of the per-projection LDA weight vectors, mapped back to R^p."""
    return np.mean([_projected_weight(stats, R) for R in projections], axis=0)


def fit_rplda(data, cfg, stats=None):
    """Random-projection LDA ensemble with Gaussian projection matrices.

    A projection whose reduced covariance is singular is redrawn once.
    """
    stats = compute_sample_statistics(data) if stats is None else stats
    d_max = rplda_max_dim(stats)
    if not 1 <= cfg.d <= d_max:
        raise ParameterError(f"d={cfg.d} outside [1, rank(S) - 2 = {d_max}]")
    rng = np.random.default_rng(cfg.seed)
    total = np.zeros(stats.p)
    for _ in range(cfg.m):
        R = rng.standard_normal((cfg.d, stats.p))
        try:
            w_i = _projected_weight(stats, R)
        except NotPositiveDefiniteError:
            R = rng.standard_normal((cfg.d, stats.p))
            w_i = _projected_weight(stats, R)
        total += w_i
    return _centered(total / cfg.m, stats)


HESSIAN_JITTER = 1e-8


def fit_logistic(data, max_iter=100, tol=1e-8):
    """Maximum-likelihood logistic regression by IRLS (Newton's method).

    Raises ConvergenceError (with the last iterate) when the iteration cap is
    hit or the data are separable and the likelihood has no maximizer.
    """
    X, y = data.features_and_labels()
    n, p = X.shape
    Xa = np.hstack([X, np.ones((n, 1))])
    beta = np.zeros(p + 1)
    for it in range(max_iter):
        eta = Xa @ beta
        prob = expit(eta)
        weights = prob * (1.0 - prob)
        grad = Xa.T @ (y - prob)
        H = (Xa * weights[:, None]).T @ Xa + HESSIAN_JITTER * np.eye(p + 1)
        step = scipy.linalg.solve(H, grad, assume_a="pos")
        beta = beta + step
        if not np.all(np.isfinite(beta)):
            raise ConvergenceError("IRLS diverged to non-finite weights", last=beta - step)
        if np.max(np.abs(step)) <= tol:
            margins = (2 * y - 1) * (Xa @ beta)
            if np.all(margins > 30.0):
                raise ConvergenceError(
                    "training data are linearly separable; logistic MLE does not exist",
                    last=beta,
                    residual=float(np.max(np.abs(step))),
                )
            return LinearDiscriminant(beta[:p], beta[p])
    raise ConvergenceError(
        f"IRLS did not converge in {max_iter} iterations (weights may diverge on separable data)",
        last=beta,
        residual=float(np.max(np.abs(step))),
    )


def _svm_bias(alpha, y, G, C, m, M):
    free = (alpha > 0) & (alpha < C)
    if np.any(free):
        return float(np.mean(-y[free] * G[free]))
    return 0.5 * (m + M)


def svm_duality_gap(X, y, w, b, alpha, C):
    hinge = np.maximum(0.0, 1.0 - y * (X @ w + b))
    primal = 0.5 * w @ w + C * hinge.sum()
    dual = alpha.sum() - 0.5 * w @ w
    return float(primal - dual)


def fit_linear_svm(data, penalty=1.0, tol=1e-3, max_iter=200_000):
    """Soft-margin linear SVM, objective ``1/2 |w|^2 + C sum(hinge)``.

    Solved in the dual by two-coordinate descent with maximal-violating-pair
    selection (SMO); the bias is not regularized. Stops when the KKT
    violation ``m(alpha) - M(alpha)`` drops to ``tol``.
    """
    if not penalty > 0:
        raise ParameterError(f"penalty must be positive, got {penalty}")
    C = float(penalty)
    X, labels = data.features_and_labels()
    y = 2.0 * labels - 1.0
    K = X @ X.T
    diag = np.diag(K).copy()
    n = len(y)
    alpha = np.zeros(n)
    G = -np.ones(n)
    for _ in range(max_iter):
        score = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        m, M = score[i], score[j]
        if m - M <= tol:
            break
        curv = max(diag[i] + diag[j] - 2.0 * K[i, j], 1e-12)
        # alpha_i moves by y_i t and alpha_j by -y_j t; keep both in [0, C]
        room_i = C - alpha[i] if y[i] > 0 else alpha[i]
        room_j = alpha[j] if y[j] > 0 else C - alpha[j]
        t = min((m - M) / curv, room_i, room_j)
        alpha[i] += y[i] * t
        alpha[j] -= y[j] * t
        if t == room_i:
            alpha[i] = C if y[i] > 0 else 0.0
        if t == room_j:
            alpha[j] = 0.0 if y[j] > 0 else C
        G += t * y * (K[:, i] - K[:, j])
    else:
        w = X.T @ (alpha * y)
        b = _svm_bias(alpha, y, G, C, m, M)
        gap = svm_duality_gap(X, y, w, b, alpha, C)
        raise ConvergenceError(
            f"SMO hit max_iter={max_iter} with KKT violation {m - M:.3g}, duality gap {gap:.3g}",
            last=LinearDiscriminant(w, b),
            residual=float(m - M),
        )
    w = X.T @ (alpha * y)
    return LinearDiscriminant(w, _svm_bias(alpha, y, G, C, m, M))
