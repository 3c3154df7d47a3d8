"""Large-dimensional limits of the alpha-LDA misclassification probability.

Two families of formulas, both keeping ``n - 2`` rather than ``n`` for
finite-size accuracy:

* deterministic equivalents (DE), which need the true class statistics and
  go through the two-covariance fixed-point system for (delta, nu);
* G-estimators (GE), consistent estimates built from sample statistics only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .alpha_core import COMMON_COV_ATOL, select_alpha
from .core_stats import cholesky_factor
from .errors import ConvergenceError, DegenerateError, ParameterError
from .exact_error import MomentQuadruple, error_from_moments, norm_cdf

FP_TOL = 1e-10
FP_MAX_ITER = 2000


def _check_regime(p, n0, n1):
    n = n0 + n1
    if not p < n - 2:
        raise ParameterError(
            f"need p < n - 2 (p={p}, n={n}); the pooled covariance is singular, collect more data"
        )


@dataclass(frozen=True)
class FixedPointSolution:
    delta_tilde: float
    nu_tilde: float
    iterations: int
    residual: float


def _fp_map(sigma0, sigma1, n0, n1, delta, nu):
    """One application of the trace map; also returns the Cholesky factor of M."""
    n = n0 + n1
    M = (n0 - 1) / (n - 2) / (1 + delta) * sigma0 + (n1 - 1) / (n - 2) / (1 + nu) * sigma1
    L = cholesky_factor(M, "fixed-point matrix")
    d = np.trace(scipy.linalg.cho_solve((L, True), sigma0)) / (n - 2)
    v = np.trace(scipy.linalg.cho_solve((L, True), sigma1)) / (n - 2)
    return float(d), float(v), L


def fixed_point_residual(sigma0, sigma1, n0, n1, delta, nu):
    """Max relative mismatch of (delta, nu) in the two trace equations."""
    d, v, _ = _fp_map(sigma0, sigma1, n0, n1, delta, nu)
    return max(abs(d - delta) / abs(d), abs(v - nu) / abs(v))


def solve_fixed_point(sigma0, sigma1, n0, n1, tol=FP_TOL, max_iter=FP_MAX_ITER):
    """Iterate the trace equations from delta = nu = 1 until the relative step is below tol."""
    sigma0 = np.asarray(sigma0, dtype=float)
    sigma1 = np.asarray(sigma1, dtype=float)
    _check_regime(sigma0.shape[0], n0, n1)
    cholesky_factor(sigma0, "sigma0")
    cholesky_factor(sigma1, "sigma1")
    delta = nu = 1.0
    residual = np.inf
    for it in range(1, max_iter + 1):
        d, v, _ = _fp_map(sigma0, sigma1, n0, n1, delta, nu)
        residual = max(abs(d - delta) / d, abs(v - nu) / v)
        delta, nu = d, v
        if residual <= tol:
            break
    else:
        raise ConvergenceError(
            f"fixed point not reached in {max_iter} iterations", last=(delta, nu), residual=residual
        )
    # report the residual of the returned pair, not of the previous iterate
    residual = fixed_point_residual(sigma0, sigma1, n0, n1, delta, nu)
    return FixedPointSolution(delta, nu, it, residual)


def _tau(p, n):
    return 1.0 / (1.0 - p / (n - 2))


@dataclass(frozen=True, eq=False)
class DeterministicEquivalentContext:
    q_bar: np.ndarray
    omega: np.ndarray
    r: np.ndarray
    a0: np.ndarray
    a1: np.ndarray
    q_tilde0: np.ndarray
    q_tilde1: np.ndarray
    kappa: float
    eta: float | None
    tau: float


def build_de_context(model, n0, n1, fp):
    p = model.p
    n = n0 + n1
    _check_regime(p, n0, n1)
    sig = (model.sigma0, model.sigma1)
    cnt = (n0 - 1, n1 - 1)
    dn = (fp.delta_tilde, fp.nu_tilde)
    M = sum(cnt[i] / (n - 2) / (1 + dn[i]) * sig[i] for i in range(2))
    L = cholesky_factor(M, "fixed-point matrix")
    q_bar = scipy.linalg.cho_solve((L, True), np.eye(p))
    q_bar = 0.5 * (q_bar + q_bar.T)
    a = (sig[0] @ q_bar, sig[1] @ q_bar)

    omega = np.empty((2, 2))
    for row in range(2):
        for j in range(2):
            # tr(S_row Q S_j Q) = sum((S_row Q) * (S_j Q)^T)
            tr = float(np.sum(a[row] * a[j].T))
            omega[row, j] = cnt[j] / (n - 2) / (1 + dn[row]) ** 2 * tr / (n - 2)
    radius = float(np.max(np.abs(np.linalg.eigvals(omega))))
    if radius >= 1.0:
        raise DegenerateError(f"spectral radius of Omega is {radius:.4g} >= 1")
    core = np.linalg.solve(np.eye(2) - omega, omega)
    r = np.array([[cnt[i] / cnt[j] * core[i, j] for j in range(2)] for i in range(2)])
    # 1-based R_{1(i+1)}, R_{2(i+1)} are r[0, i], r[1, i] here
    q_tilde = tuple(q_bar @ (a[i] + r[0, i] * a[0] + r[1, i] * a[1]) for i in range(2))

    mu = model.mu
    num = float(mu @ q_bar @ mu) + np.trace(a[0]) / n0 + np.trace(a[1]) / n1
    den = float(mu @ mu) + np.trace(sig[0]) / n0 + np.trace(sig[1]) / n1
    kappa = float(num / den)
    tau = _tau(p, n)
    eta = None
    if model.is_common_covariance(COMMON_COV_ATOL):
        s_inv_mu = scipy.linalg.cho_solve((model.chol0, True), mu)
        eta = float(
            tau * (mu @ s_inv_mu + p / n0 + p / n1)
            / (mu @ mu + (1 / n0 + 1 / n1) * np.trace(sig[0]))
        )
    return DeterministicEquivalentContext(
        q_bar, omega, r, a[0], a[1], q_tilde[0], q_tilde[1], kappa, eta, tau
    )


@dataclass(frozen=True)
class AlphaMoments:
    """Class moments of the alpha-LDA discriminant as polynomials in alpha.

    ``m_i(alpha) = (1 - alpha) m_lo[i] + alpha m_hi[i]`` and
    ``s_i(alpha) = (1-alpha)^2 s_aa[i] + 2 alpha (1-alpha) s_ab[i] + alpha^2 s_bb[i]``.
    """

    m_lo: tuple
    m_hi: tuple
    s_aa: tuple
    s_ab: tuple
    s_bb: tuple
    pi0: float
    pi1: float
    flavor: str

    def _eval(self, alpha):
        m = [(1 - alpha) * self.m_lo[i] + alpha * self.m_hi[i] for i in range(2)]
        s = [
            (1 - alpha) ** 2 * self.s_aa[i]
            + 2 * alpha * (1 - alpha) * self.s_ab[i]
            + alpha**2 * self.s_bb[i]
            for i in range(2)
        ]
        return m, s

    def quadruple(self, alpha):
        m, s = self._eval(float(alpha))
        if not (s[0] > 0 and s[1] > 0):
            raise DegenerateError(f"estimated discriminant variance is not positive at alpha={alpha}")
        return MomentQuadruple(float(m[0]), float(m[1]), float(s[0]), float(s[1]), self.flavor)

    def error(self, alpha):
        q = self.quadruple(alpha)
        return q, error_from_moments(q, self.pi0, self.pi1)

    def error_curve(self, grid):
        """Vectorized error over a grid; NaN where a variance is not positive."""
        grid = np.asarray(grid, dtype=float)
        m, s = self._eval(grid)
        ok = (s[0] > 0) & (s[1] > 0)
        out = np.full(grid.shape, np.nan)
        out[ok] = self.pi0 * norm_cdf(m[0][ok] / np.sqrt(s[0][ok])) + self.pi1 * norm_cdf(
            -m[1][ok] / np.sqrt(s[1][ok])
        )
        return out


def _common_sigma(model):
    if not model.is_common_covariance(COMMON_COV_ATOL):
        raise ParameterError("common-covariance formulas need sigma0 == sigma1")
    return model.sigma0


def de_moments(model, n0, n1, assume_common=False, ctx=None):
    """Deterministic-equivalent moments, reusable across alpha."""
    p = model.p
    _check_regime(p, n0, n1)
    mu = model.mu
    mm = float(mu @ mu)
    sign = (-1.0, 1.0)
    if assume_common:
        sigma = _common_sigma(model)
        n = n0 + n1
        tau = _tau(p, n)
        s_inv_mu = scipy.linalg.cho_solve((model.chol0, True), mu)
        q = float(mu @ s_inv_mu)
        tr = float(np.trace(sigma))
        tr2 = float(np.sum(sigma * sigma))
        inv_sum = 1 / n0 + 1 / n1
        eta = tau * (q + p / n0 + p / n1) / (mm + inv_sum * tr)
        lo = tuple(eta * (sign[i] * mm / 2 + 0.5 * (1 / n0 - 1 / n1) * tr) for i in range(2))
        hi = tuple(tau / 2 * (sign[i] * q + p / n0 - p / n1) for i in range(2))
        s_aa = eta**2 * (float(mu @ sigma @ mu) + inv_sum * tr2)
        s_bb = tau**3 * (q + p / n0 + p / n1)
        s_ab = tau * eta * (mm + inv_sum * tr)
        return AlphaMoments(lo, hi, (s_aa,) * 2, (s_ab,) * 2, (s_bb,) * 2,
                            model.pi0, model.pi1, "deterministic-equivalent")

    if ctx is None:
        fp = solve_fixed_point(model.sigma0, model.sigma1, n0, n1)
        ctx = build_de_context(model, n0, n1, fp)
    sig = (model.sigma0, model.sigma1)
    a = (ctx.a0, ctx.a1)
    qt = (ctx.q_tilde0, ctx.q_tilde1)
    k = ctx.kappa
    t0, t1 = np.trace(sig[0]) / n0, np.trace(sig[1]) / n1
    ta0, ta1 = np.trace(a[0]) / n0, np.trace(a[1]) / n1
    mqm = float(mu @ ctx.q_bar @ mu)
    lo = tuple(k * (sign[i] * mm / 2 + 0.5 * (t0 - t1)) for i in range(2))
    hi = tuple(sign[i] * mqm / 2 + 0.5 * (ta0 - ta1) for i in range(2))

    def tr(x, y):
        return float(np.sum(x * y.T))

    s_aa, s_ab, s_bb = [], [], []
    for i in range(2):
        s_aa.append(k**2 * (float(mu @ sig[i] @ mu) + tr(sig[0], sig[i]) / n0 + tr(sig[1], sig[i]) / n1))
        s_ab.append(k * (float(mu @ a[i] @ mu) + tr(sig[i], a[0]) / n0 + tr(sig[i], a[1]) / n1))
        s_bb.append(float(mu @ qt[i] @ mu) + tr(sig[0], qt[i]) / n0 + tr(sig[1], qt[i]) / n1)
    return AlphaMoments(lo, hi, tuple(s_aa), tuple(s_ab), tuple(s_bb),
                        model.pi0, model.pi1, "deterministic-equivalent")


def de_misclassification(model, n0, n1, alpha, assume_common=False):
    """``(MomentQuadruple, eps_bar)`` for the alpha-LDA rule trained on n0 + n1 samples."""
    return de_moments(model, n0, n1, assume_common).error(alpha)


@dataclass(frozen=True)
class GEstimatorContext:
    rho: float
    lambda0: float
    lambda1: float
    tau_hat: float


def build_ge_context(stats):
    p, n = stats.p, stats.n
    _check_regime(p, stats.n0, stats.n1)
    mu = stats.mu_hat
    mm = float(mu @ mu)
    if mm == 0.0:
        raise DegenerateError("sample means coincide: mu_hat = 0")
    rho = float(mu @ stats.pooled_solve(mu)) / mm
    lam = []
    for s in (stats.sigma0_hat, stats.sigma1_hat):
        x = float(np.trace(stats.pooled_solve(s))) / (n - 2)
        if not 1.0 - x > 0:
            raise DegenerateError("trace correction undefined; p too close to n")
        lam.append(x / (1.0 - x))
    return GEstimatorContext(rho, lam[0], lam[1], _tau(p, n))


def ge_moments(stats, assume_common=True, ctx=None):
    """G-estimated moments from sample statistics only, reusable across alpha."""
    ctx = build_ge_context(stats) if ctx is None else ctx
    p, n = stats.p, stats.n
    ns = (stats.n0, stats.n1)
    mu = stats.mu_hat
    s_inv_mu = stats.pooled_solve(mu)
    q = float(mu @ s_inv_mu)
    mm = float(mu @ mu)
    rho, tau = ctx.rho, ctx.tau_hat
    sign = (-1.0, 1.0)
    if assume_common:
        sp = stats.sigma_pooled
        tr = float(np.trace(sp))
        lo = tuple(sign[i] * (q / 2 - rho * tr / ns[i]) for i in range(2))
        hi = tuple(sign[i] * (q / 2 - p / ns[i] * tau) for i in range(2))
        s_aa = rho**2 * float(mu @ sp @ mu)
        s_ab = rho * tau * mm
        s_bb = tau**2 * q
        return AlphaMoments(lo, hi, (s_aa,) * 2, (s_ab,) * 2, (s_bb,) * 2,
                            stats.pi0_hat, stats.pi1_hat, "g-estimate")

    lam = (ctx.lambda0, ctx.lambda1)
    sig = (stats.sigma0_hat, stats.sigma1_hat)
    lo, hi, s_aa, s_ab, s_bb = [], [], [], [], []
    for i in range(2):
        lo.append(sign[i] * rho * (mm / 2 - np.trace(sig[i]) / ns[i]))
        hi.append(sign[i] * (q / 2 - (n - 2) * lam[i] / ns[i]))
        si_mu = sig[i] @ mu
        s_aa.append(rho**2 * float(mu @ si_mu))
        s_ab.append(rho * (1 + lam[i]) * float(si_mu @ s_inv_mu))
        s_bb.append((1 + lam[i]) ** 2 * float(s_inv_mu @ sig[i] @ s_inv_mu))
    return AlphaMoments(tuple(map(float, lo)), tuple(map(float, hi)), tuple(s_aa), tuple(s_ab),
                        tuple(s_bb), stats.pi0_hat, stats.pi1_hat, "g-estimate")


def ge_misclassification(stats, alpha, assume_common=True):
    """``(MomentQuadruple, eps_hat)`` estimated from the training statistics alone."""
    return ge_moments(stats, assume_common).error(alpha)


class GEObjective:
    """G-estimated error as a grid-search objective (for LDA-based alpha rules)."""

    def __init__(self, stats, assume_common=True):
        self.moments = ge_moments(stats, assume_common)

    def __call__(self, ad):
        return self.moments.error(ad.alpha)[1]

    def curve(self, w, stats, grid):
        return self.moments.error_curve(grid)


def tune_alpha_via_ge(stats, grid, assume_common=True):
    """Grid minimizer of the G-estimated error, plus the (alpha, eps_hat) curve."""
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ParameterError("empty alpha grid")
    values = ge_moments(stats, assume_common).error_curve(grid)
    curve = [(float(a), float(v)) for a, v in zip(grid, values)]
    return select_alpha(grid, values), curve
