"""Pointwise and stepwise-uncertainty-reduction (SUR) acquisition criteria.

Pointwise criteria score each candidate from its marginal predictive
distribution and are maximized. SUR criteria average, over an integration
set, the expected uncertainty left at each integration point after a
hypothetical observation at the candidate, and are minimized.

For a candidate ``x`` and integration point ``x'`` the one-step look-ahead
only needs ``alpha = k_n(x, x') / sqrt(k_n(x, x) + tau^2)``: the future mean
at ``x'`` is ``m_n(x') + alpha V`` with ``V ~ N(0, 1)`` and the future
variance is ``k_n(x', x') - alpha^2``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import entr

from .gp import GPModel, excursion_prob
from .prob import orthant_prob, std_normal_pdf
from .scoring import expected_twcrps_gaussian_weight, expected_twcrps_indicator

__all__ = [
    "POINTWISE",
    "SUR",
    "CRITERIA",
    "CriterionSpec",
    "pointwise_score",
    "pointwise_scores",
    "lookahead_integrand",
    "sur_integrand",
    "sur_integrands",
    "sur_criterion",
    "sur_criteria",
    "integrated_uncertainty",
    "draw_mc_block",
    "select_next",
]

POINTWISE = ("pw_twcrps_g1", "pw_twcrps_g2", "pw_tmse", "pw_entropy", "pw_variance")
SUR = ("sur_icrps_g1", "sur_icrps_g2", "sur_timse", "sur_ibv", "sur_ivariance")
CRITERIA = POINTWISE + SUR + ("random",)
_NEEDS_SIGMA = ("pw_twcrps_g2", "sur_icrps_g2")

# elements per Monte Carlo chunk (candidates x integration points x samples)
_MC_CHUNK = 4_000_000


@dataclass(frozen=True)
class CriterionSpec:
    """Acquisition criterion and its parameters.

    ``sigma_gamma`` is only meaningful (and only accepted) for the two
    Gaussian-weight criteria; it may be left ``None`` and filled in later
    with :meth:`with_sigma`.
    """

    kind: str
    sigma_gamma: Optional[float] = None
    zeta: float = 0.0
    mc_samples: int = 512

    def __post_init__(self):
        if self.kind not in CRITERIA:
            raise ValueError(f"unknown criterion {self.kind!r}; valid names: {', '.join(CRITERIA)}")
        if self.sigma_gamma is not None:
            if self.kind not in _NEEDS_SIGMA:
                raise ValueError(f"criterion {self.kind} takes no sigma_gamma")
            if not self.sigma_gamma > 0:
                raise ValueError("sigma_gamma must be > 0")
        if self.zeta < 0:
            raise ValueError("zeta must be >= 0")
        if self.mc_samples <= 0:
            raise ValueError("mc_samples must be > 0")

    @property
    def is_pointwise(self) -> bool:
        return self.kind in POINTWISE

    @property
    def is_sur(self) -> bool:
        return self.kind in SUR

    @property
    def needs_sigma(self) -> bool:
        return self.kind in _NEEDS_SIGMA

    def with_sigma(self, sigma_gamma: float) -> "CriterionSpec":
        """Copy with ``sigma_gamma`` set (no-op for criteria that ignore it)."""
        return replace(self, sigma_gamma=float(sigma_gamma)) if self.needs_sigma else self

    def _sigma(self) -> float:
        if self.sigma_gamma is None:
            raise ValueError(f"criterion {self.kind} needs sigma_gamma")
        return self.sigma_gamma


def _tmse_weight(mean, var, t, zeta, eps):
    s2 = var + zeta * zeta
    ok = s2 > eps
    s = np.sqrt(np.where(ok, s2, 1.0))
    return np.where(ok, std_normal_pdf((mean - t) / s) / s, 0.0)


def pointwise_scores(c: CriterionSpec, model: GPModel, X, t: float) -> np.ndarray:
    """Pointwise criterion at every row of ``X`` (higher is better)."""
    if not c.is_pointwise:
        raise ValueError(f"{c.kind} is not a pointwise criterion")
    mean, var = model.predict(X)
    if c.kind == "pw_twcrps_g1":
        return np.asarray(expected_twcrps_indicator(mean, var, t))
    if c.kind == "pw_twcrps_g2":
        return np.asarray(expected_twcrps_gaussian_weight(mean, var, t, c._sigma()))
    if c.kind == "pw_tmse":
        return var * _tmse_weight(mean, var, t, c.zeta, model.degenerate_var)
    if c.kind == "pw_entropy":
        p = excursion_prob(model, np.atleast_2d(X), t)
        return entr(p) + entr(1.0 - p)
    return var


def pointwise_score(c: CriterionSpec, model: GPModel, x, t: float) -> float:
    """Pointwise criterion at a single point."""
    return float(pointwise_scores(c, model, np.asarray(x)[None, :], t)[0])


def draw_mc_block(c: CriterionSpec, stream: Optional[np.random.Generator]):
    """Standard-normal triples ``(N, N~, V)`` shared by all candidates in one call."""
    if c.kind != "sur_icrps_g1":
        return None
    if stream is None:
        raise ValueError("sur_icrps_g1 needs a random stream")
    return stream.standard_normal((3, c.mc_samples))


def _icrps_g1_flat(mean, var_next, alpha, t, block, eps):
    """Monte Carlo look-ahead of the expected indicator-weighted CRPS.

    Averages ``(s N - max(s N~, t - mu - alpha V))_+`` over the shared
    sample block, ``s`` being the future standard deviation.
    """
    N, Nt, V = block
    s = np.sqrt(var_next).ravel()
    cut0 = (t - mean).ravel()
    a = alpha.ravel()
    out = np.empty(s.shape)
    step = max(1, _MC_CHUNK // len(N))
    for lo in range(0, s.size, step):
        hi = min(s.size, lo + step)
        sc = s[lo:hi, None]
        cut = cut0[lo:hi, None] - a[lo:hi, None] * V
        out[lo:hi] = np.maximum(sc * N - np.maximum(sc * Nt, cut), 0.0).mean(axis=1)
    out = out.reshape(var_next.shape)
    return np.where(var_next > eps, out, 0.0)


def lookahead_integrand(c: CriterionSpec, mean, var, alpha, t: float, eps: float = 0.0, block=None) -> np.ndarray:
    """SUR integrand from the current marginal at ``x'`` and the look-ahead sensitivity.

    Parameters
    ----------
    mean, var : array_like
        Current posterior mean and variance at the integration points.
    alpha : array_like
        ``k_n(x, x') / sqrt(k_n(x, x) + tau^2)``, broadcast against ``mean``
        (typically shape ``(n_candidates, n_integration)``).
    eps : float
        Variances at or below ``eps`` count as zero.
    block : ndarray, shape (3, S), optional
        Shared standard-normal samples for ``sur_icrps_g1``.
    """
    if not c.is_sur:
        raise ValueError(f"{c.kind} is not a SUR criterion")
    mean, var, alpha = np.broadcast_arrays(
        np.asarray(mean, dtype=float), np.asarray(var, dtype=float), np.asarray(alpha, dtype=float)
    )
    alpha2 = alpha * alpha
    var_next = np.maximum(var - alpha2, 0.0)
    if c.kind == "sur_ivariance":
        return var_next
    if c.kind == "sur_timse":
        return var_next * _tmse_weight(mean, var, t, c.zeta, eps)
    d = mean - t
    if c.kind == "sur_icrps_g2":
        sg2 = c._sigma() ** 2
        tot = var_next + alpha2 + sg2
        return orthant_prob(d, -d, tot, tot, -(alpha2 + sg2))
    if c.kind == "sur_ibv":
        tot = var_next + alpha2
        val = orthant_prob(d, -d, tot, tot, -alpha2)
        return np.where(tot > eps, val, 0.0)
    if block is None:
        raise ValueError("sur_icrps_g1 needs a Monte Carlo sample block")
    return _icrps_g1_flat(mean, var_next, alpha, t, block, eps)


def sur_integrands(
    c: CriterionSpec,
    model: GPModel,
    Xcand,
    Xint,
    t: float,
    stream: Optional[np.random.Generator] = None,
    block=None,
) -> np.ndarray:
    """SUR integrand for every (candidate, integration point) pair.

    Returns an array of shape ``(len(Xcand), len(Xint))``.
    """
    if not c.is_sur:
        raise ValueError(f"{c.kind} is not a SUR criterion")
    Xcand = np.atleast_2d(Xcand)
    Xint = np.atleast_2d(Xint)
    _, var_c = model.predict(Xcand)
    mean_I, var_I = model.predict(Xint)
    kxc = model.covariance(Xcand, Xint)
    denom = var_c + model.noise_var
    pos = denom > 0
    alpha = np.where(pos[:, None], kxc / np.sqrt(np.where(pos, denom, 1.0))[:, None], 0.0)
    if block is None:
        block = draw_mc_block(c, stream)
    return lookahead_integrand(c, mean_I[None, :], var_I[None, :], alpha, t, model.degenerate_var, block)


def sur_integrand(c: CriterionSpec, model: GPModel, x, xp, t: float, stream=None) -> float:
    """SUR integrand for one candidate ``x`` and one integration point ``x'``."""
    return float(sur_integrands(c, model, np.asarray(x)[None, :], np.asarray(xp)[None, :], t, stream)[0, 0])


def sur_criteria(c: CriterionSpec, model: GPModel, Xcand, Xint, t: float, stream=None, block=None) -> np.ndarray:
    """SUR criterion (mean integrand over ``Xint``) for each candidate; lower is better."""
    Xint = np.atleast_2d(Xint)
    if Xint.shape[0] == 0:
        raise ValueError("integration set is empty")
    return sur_integrands(c, model, Xcand, Xint, t, stream, block).mean(axis=1)


def sur_criterion(c: CriterionSpec, model: GPModel, x, Xint, t: float, stream=None) -> float:
    """SUR criterion for a single candidate ``x``."""
    return float(sur_criteria(c, model, np.asarray(x)[None, :], Xint, t, stream)[0])


def integrated_uncertainty(c: CriterionSpec, model: GPModel, Xint, t: float) -> float:
    """Current value of the uncertainty functional a SUR criterion looks ahead on."""
    if not c.is_sur:
        raise ValueError(f"{c.kind} is not a SUR criterion")
    mean, var = model.predict(Xint)
    if c.kind == "sur_ivariance":
        vals = var
    elif c.kind == "sur_timse":
        vals = var * _tmse_weight(mean, var, t, c.zeta, model.degenerate_var)
    elif c.kind == "sur_icrps_g1":
        vals = expected_twcrps_indicator(mean, var, t)
    elif c.kind == "sur_icrps_g2":
        vals = expected_twcrps_gaussian_weight(mean, var, t, c._sigma())
    else:
        p = excursion_prob(model, np.atleast_2d(Xint), t)
        vals = p * (1.0 - p)
    return float(np.mean(vals))


def select_next(
    c: CriterionSpec,
    model: GPModel,
    candidates,
    integration_set,
    t: float,
    stream: Optional[np.random.Generator] = None,
) -> int:
    """Index into ``candidates`` of the next point to evaluate.

    Ties go to the lowest index. ``random`` draws uniformly from ``stream``.
    """
    candidates = np.atleast_2d(candidates)
    n = candidates.shape[0]
    if n == 0:
        raise ValueError("no candidates to select from")
    if c.kind == "random":
        if stream is None:
            raise ValueError("random selection needs a random stream")
        return int(stream.integers(n))
    if n == 1:
        return 0
    if c.is_pointwise:
        return int(np.argmax(pointwise_scores(c, model, candidates, t)))
    return int(np.argmin(sur_criteria(c, model, candidates, integration_set, t, stream)))
