"""Ordinary-kriging Gaussian process with one-point updates.

The prior mean is an unknown constant, profiled out in closed form. All
linear algebra goes through the Cholesky factor ``L`` of
``K_obs = K + noise_var * I`` (plus jitter when needed).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import log, pi

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import minimize
from scipy.spatial.distance import pdist, squareform

from .kernels import KernelSpec, correlation_matrix, cross_covariance
from .prob import Gaussian1D, std_normal_cdf

__all__ = [
    "GPModel",
    "FitError",
    "condition",
    "fit_hyperparams",
    "log_marginal_likelihood",
    "predict",
    "predict_observational",
    "posterior_cov",
    "update",
    "update_mean",
    "update_variance",
    "alpha_n",
    "excursion_prob",
    "classify",
]

logger = logging.getLogger(__name__)

_LOG_2PI = log(2.0 * pi)
JITTER_START = 1e-10
JITTER_MAX = 1e-4
DEGENERATE_REL = 1e-12


class FitError(RuntimeError):
    """Hyperparameter estimation failed at every start."""


def _cholesky_jitter(K):
    """Lower Cholesky factor of ``K`` with adaptive diagonal jitter.

    Returns ``(L, jitter)``. Jitter starts at 1e-10 times the mean diagonal
    and grows tenfold up to 1e-4 before giving up.
    """
    try:
        return np.linalg.cholesky(K), 0.0
    except np.linalg.LinAlgError:
        pass
    scale = float(np.mean(np.diag(K)))
    jitter = JITTER_START * scale
    eye = np.eye(K.shape[0])
    while jitter <= JITTER_MAX * scale * (1 + 1e-9):
        try:
            return np.linalg.cholesky(K + jitter * eye), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise np.linalg.LinAlgError("covariance matrix is not positive definite even with maximal jitter")


def _as_rows(X):
    X = np.asarray(X)
    return X[None, :] if X.ndim == 1 else X


@dataclass(frozen=True, eq=False)
class GPModel:
    """Conditioned ordinary-kriging model. Immutable; see :func:`condition`."""

    kernel: KernelSpec
    noise_var: float
    X: np.ndarray
    z: np.ndarray
    chol: np.ndarray
    jitter: float = 0.0
    noise_estimated: bool = False
    _u: np.ndarray = field(init=False, repr=False)
    _w: np.ndarray = field(init=False, repr=False)
    beta: float = field(init=False)
    one_kinv_one: float = field(init=False)

    def __post_init__(self):
        u = solve_triangular(self.chol, np.ones(len(self.z)), lower=True)
        v = solve_triangular(self.chol, self.z, lower=True)
        uu = float(u @ u)
        beta = float(u @ v) / uu
        object.__setattr__(self, "_u", u)
        object.__setattr__(self, "one_kinv_one", uu)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "_w", v - beta * u)

    @property
    def n(self) -> int:
        return len(self.z)

    @property
    def degenerate_var(self) -> float:
        """Variance at or below which a prediction counts as a point mass."""
        return DEGENERATE_REL * self.kernel.variance

    def _project(self, X):
        Kc = cross_covariance(self.kernel, self.X, _as_rows(X))
        return solve_triangular(self.chol, Kc, lower=True)

    def predict(self, X, full_cov=False):
        """Latent posterior mean and variance (or covariance) at the rows of ``X``.

        Returns ``(mean, var)`` arrays; with ``full_cov=True`` the second
        item is the posterior covariance matrix. Variances are clamped at 0.
        """
        X = _as_rows(X)
        A = self._project(X)
        mean = self.beta + A.T @ self._w
        r = 1.0 - A.T @ self._u
        if full_cov:
            cov = cross_covariance(self.kernel, X, X) - A.T @ A + np.outer(r, r) / self.one_kinv_one
            cov = 0.5 * (cov + cov.T)
            np.fill_diagonal(cov, np.maximum(np.diag(cov), 0.0))
            return mean, cov
        var = self.kernel.variance - np.einsum("ij,ij->j", A, A) + r * r / self.one_kinv_one
        return mean, np.maximum(var, 0.0)

    def raw_variance(self, X):
        """Posterior variance before clamping (for diagnostics)."""
        A = self._project(X)
        r = 1.0 - A.T @ self._u
        return self.kernel.variance - np.einsum("ij,ij->j", A, A) + r * r / self.one_kinv_one

    def covariance(self, XA, XB):
        """Posterior cross-covariance matrix ``k_n(a_i, b_j)``."""
        XA, XB = _as_rows(XA), _as_rows(XB)
        A = self._project(XA)
        B = self._project(XB)
        ra = 1.0 - A.T @ self._u
        rb = 1.0 - B.T @ self._u
        return cross_covariance(self.kernel, XA, XB) - A.T @ B + np.outer(ra, rb) / self.one_kinv_one

    def log_likelihood(self) -> float:
        return float(-0.5 * (self._w @ self._w) - np.log(np.diag(self.chol)).sum() - 0.5 * self.n * _LOG_2PI)


def condition(kernel: KernelSpec, X, z, noise_var: float = 0.0, noise_estimated: bool = False) -> GPModel:
    """Condition an ordinary-kriging GP on observations ``z`` at the rows of ``X``."""
    X = _as_rows(X)
    z = np.asarray(z, dtype=float).ravel()
    if X.shape[0] != z.shape[0]:
        raise ValueError("X and z disagree on the number of points")
    if noise_var < 0:
        raise ValueError("noise variance must be >= 0")
    K = cross_covariance(kernel, X, X)
    K[np.diag_indices_from(K)] += noise_var
    L, jitter = _cholesky_jitter(K)
    return GPModel(kernel, float(noise_var), X, z, L, jitter, noise_estimated)


def log_marginal_likelihood(model: GPModel) -> float:
    """Gaussian log-density of the observations with the constant mean profiled out."""
    return model.log_likelihood()


def _profile_nll(R, z, variance, noise_var):
    K = variance * R
    K[np.diag_indices_from(K)] += noise_var
    try:
        L, _ = _cholesky_jitter(K)
    except np.linalg.LinAlgError:
        return np.inf
    u = solve_triangular(L, np.ones(len(z)), lower=True)
    v = solve_triangular(L, z, lower=True)
    beta = (u @ v) / (u @ u)
    w = v - beta * u
    return 0.5 * (w @ w) + np.log(np.diag(L)).sum() + 0.5 * len(z) * _LOG_2PI


def fit_hyperparams(
    X,
    z,
    template: KernelSpec,
    fit_noise: bool = True,
    noise_var: float | None = None,
    n_starts: int = 5,
) -> GPModel:
    """Maximum-likelihood kernel (and optionally noise) hyperparameters.

    Optimizes the profiled log-likelihood over log-variance, log-lengthscale
    (stationary kernels) and log-noise (when ``fit_noise``) with bounded
    L-BFGS-B from ``n_starts`` log-spaced starting points.

    Parameters
    ----------
    X : array_like, shape (n, d)
    z : array_like, shape (n,)
    template : KernelSpec
        Family to fit; its parameter values are ignored.
    fit_noise : bool
        Estimate the noise variance. If False, ``noise_var`` must be given.
    noise_var : float, optional
        Fixed noise variance when ``fit_noise`` is False.

    Raises
    ------
    FitError
        If the likelihood is non-finite at every start.
    """
    X = _as_rows(X)
    z = np.asarray(z, dtype=float).ravel()
    n = len(z)
    if n < 2:
        raise ValueError("need at least two training points")
    if fit_noise == (noise_var is not None):
        raise ValueError("give a fixed noise_var exactly when fit_noise is False")
    zvar = float(np.var(z))
    scale = zvar if zvar > 0 else 1.0

    if template.stationary:
        dist = squareform(pdist(X.astype(float)))
        pos = dist[dist > 0]
        dscale = float(np.median(pos)) if pos.size else 1.0
        if template.family == "exponential":
            def corr(theta):
                return np.exp(-dist / theta)
        else:
            dist2 = dist * dist

            def corr(theta):
                return np.exp(-0.5 * dist2 / theta**2)
        R_fixed = None
    else:
        R_fixed = correlation_matrix(template, X)
        dscale = None

    names = ["log_variance"]
    bounds = [(log(1e-6 * scale), log(1e8 * scale))]
    grid = np.linspace(-1.0, 1.0, n_starts) if n_starts > 1 else np.zeros(1)
    starts = [[log(scale) + g * log(10.0)] for g in grid]
    if template.stationary:
        names.append("log_lengthscale")
        bounds.append((log(1e-2 * dscale), log(1e2 * dscale)))
        for s, g in zip(starts, grid):
            s.append(log(dscale) + 0.5 * g * log(10.0))
    if fit_noise:
        names.append("log_noise")
        bounds.append((log(1e-8 * scale), log(scale)))
        for s, g in zip(starts, np.linspace(-3.0, -0.5, len(starts))):
            s.append(log(scale) + g * log(10.0))

    def unpack(p):
        i = 1
        theta = None
        if template.stationary:
            theta = float(np.exp(p[i]))
            i += 1
        nv = float(np.exp(p[i])) if fit_noise else float(noise_var)
        return float(np.exp(p[0])), theta, nv

    def objective(p):
        variance, theta, nv = unpack(p)
        R = R_fixed if theta is None else corr(theta)
        val = _profile_nll(R, z, variance, nv)
        return val if np.isfinite(val) else 1e300

    best = None
    diagnostics = []
    for s in starts:
        s = np.clip(s, [b[0] for b in bounds], [b[1] for b in bounds])
        res = minimize(objective, s, method="L-BFGS-B", bounds=bounds)
        diagnostics.append((list(np.round(s, 3)), float(res.fun), res.message))
        if res.fun < 1e299 and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise FitError(f"log-likelihood non-finite at every start: {diagnostics}")

    variance, theta, nv = unpack(best.x)
    kernel = template.with_params(variance=variance, lengthscale=theta)
    logger.debug("fitted %s noise=%.4g nll=%.6g", kernel, nv, best.fun)
    return condition(kernel, X, z, nv, noise_estimated=fit_noise)


def predict(model: GPModel, x) -> Gaussian1D:
    """Latent predictive distribution at a single point."""
    m, v = model.predict(np.asarray(x)[None, :])
    return Gaussian1D(float(m[0]), float(v[0]))


def predict_observational(model: GPModel, x) -> Gaussian1D:
    """Predictive distribution of a noisy observation at a single point."""
    g = predict(model, x)
    return Gaussian1D(g.mean, g.variance + model.noise_var)


def posterior_cov(model: GPModel, x, xp) -> float:
    """Posterior covariance ``k_n(x, x')`` between two single points."""
    return float(model.covariance(np.asarray(x)[None, :], np.asarray(xp)[None, :])[0, 0])


def update(model: GPModel, x_new, z_new: float) -> GPModel:
    """Model conditioned on one more observation, hyperparameters unchanged.

    The Cholesky factor is extended by one row rather than recomputed.
    """
    x_new = np.asarray(x_new)
    kc = cross_covariance(model.kernel, model.X, x_new[None, :])[:, 0]
    ell = solve_triangular(model.chol, kc, lower=True)
    diag = model.kernel.variance + model.noise_var + model.jitter
    d2 = diag - ell @ ell
    floor = JITTER_START * diag
    d = np.sqrt(max(d2, floor))
    n = model.n
    L = np.zeros((n + 1, n + 1))
    L[:n, :n] = model.chol
    L[n, :n] = ell
    L[n, n] = d
    X = np.vstack([model.X, x_new[None, :]])
    z = np.append(model.z, float(z_new))
    return GPModel(model.kernel, model.noise_var, X, z, L, model.jitter, model.noise_estimated)


def update_mean(model: GPModel, x_new, z_new: float, X):
    """Posterior mean at the rows of ``X`` after observing ``z_new`` at ``x_new``.

    Uses the one-point kriging update ``m + k_n(x_new, .) (z_new - m(x_new)) / (k_n(x_new, x_new) + tau^2)``.
    """
    x_new = np.asarray(x_new)[None, :]
    m_new, v_new = model.predict(x_new)
    m, _ = model.predict(X)
    denom = v_new[0] + model.noise_var
    if denom <= 0:
        return m
    kx = model.covariance(x_new, X)[0]
    return m + kx * (float(z_new) - m_new[0]) / denom


def update_variance(model: GPModel, x_new, X):
    """Posterior variance at the rows of ``X`` after observing at ``x_new``."""
    x_new = np.asarray(x_new)[None, :]
    _, v_new = model.predict(x_new)
    _, v = model.predict(X)
    denom = v_new[0] + model.noise_var
    if denom <= 0:
        return v
    kx = model.covariance(x_new, X)[0]
    return np.maximum(v - kx * kx / denom, 0.0)


def alpha_n(model: GPModel, x, xp) -> float:
    """Sensitivity of the mean at ``x'`` to the standardized observation at ``x``.

    ``k_n(x, x') / sqrt(k_n(x, x) + tau^2)``; 0 when the denominator vanishes.
    """
    x = np.asarray(x)[None, :]
    _, v = model.predict(x)
    denom = v[0] + model.noise_var
    if denom <= 0:
        return 0.0
    return float(model.covariance(x, np.asarray(xp)[None, :])[0, 0] / np.sqrt(denom))


def excursion_prob(model: GPModel, X, t: float):
    """Posterior probability that the latent function is >= ``t``.

    Accepts a single point or rows of points; point-mass predictions give 0/1.
    """
    X = np.asarray(X)
    single = X.ndim == 1
    m, v = model.predict(X)
    deg = v <= model.degenerate_var
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(deg, (m >= t).astype(float), std_normal_cdf((m - t) / np.sqrt(np.where(deg, 1.0, v))))
    return float(p[0]) if single else p


def classify(model: GPModel, X, t: float):
    """Plug-in excursion-set membership ``m_n(x) >= t``."""
    X = np.asarray(X)
    m, _ = model.predict(X)
    out = m >= t
    return bool(out[0]) if X.ndim == 1 else out
