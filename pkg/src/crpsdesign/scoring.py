"""CRPS and threshold-weighted CRPS for Gaussian forecasts.

Scores are negatively oriented. Every closed form broadcasts over numpy
arrays of means, variances and outcomes. A zero variance is a point-mass
forecast and has a defined score everywhere.

Two weighting measures are supported: ``indicator`` (Lebesgue measure
restricted to ``[t, inf)``) and ``gaussian`` (normal density centred at
``t`` with scale ``sigma_gamma``).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import pi, sqrt
from typing import Optional

import numpy as np
from scipy import integrate

from .prob import orthant_prob, std_normal_cdf, std_normal_pdf

__all__ = [
    "WeightSpec",
    "crps_gaussian",
    "twcrps_indicator",
    "twcrps_gaussian_weight",
    "expected_crps",
    "expected_twcrps_indicator",
    "expected_twcrps_gaussian_weight",
    "twcrps_numeric_oracle",
]

_INV_SQRT_PI = 1.0 / sqrt(pi)
_SQRT2 = sqrt(2.0)


@dataclass(frozen=True)
class WeightSpec:
    """Weighting measure for the threshold-weighted CRPS."""

    kind: str = "unweighted"
    threshold: float = 0.0
    sigma_gamma: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("unweighted", "indicator", "gaussian"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "gaussian" and not (self.sigma_gamma is not None and self.sigma_gamma > 0):
            raise ValueError("gaussian weight needs sigma_gamma > 0")


def _prep(mean, var):
    mean = np.asarray(mean, dtype=float)
    var = np.asarray(var, dtype=float)
    if np.any(var < 0):
        raise ValueError("variance must be >= 0")
    sd = np.sqrt(var)
    pos = sd > 0
    safe = np.where(pos, sd, 1.0)
    return mean, sd, pos, safe


def _scalar(x):
    return x[()] if isinstance(x, np.ndarray) and x.ndim == 0 else x


def crps_gaussian(mean, var, y):
    """CRPS of ``N(mean, var)`` at outcome ``y``; ``|y - mean|`` for a point mass."""
    mean, sd, pos, safe = _prep(mean, var)
    y = np.asarray(y, dtype=float)
    yt = (y - mean) / safe
    val = sd * (yt * (2.0 * std_normal_cdf(yt) - 1.0) + 2.0 * std_normal_pdf(yt) - _INV_SQRT_PI)
    return _scalar(np.where(pos, val, np.abs(y - mean)))


def twcrps_indicator(mean, var, y, t):
    """Threshold-weighted CRPS with weight ``1{u >= t} du``."""
    mean, sd, pos, safe = _prep(mean, var)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    tt = (t - mean) / safe
    yt = (np.maximum(y, t) - mean) / safe
    Pt = std_normal_cdf(tt)
    val = sd * (
        -tt * Pt * Pt
        + yt * (2.0 * std_normal_cdf(yt) - 1.0)
        + 2.0 * std_normal_pdf(yt)
        - 2.0 * std_normal_pdf(tt) * Pt
        - _INV_SQRT_PI * (1.0 - std_normal_cdf(tt * _SQRT2))
    )
    point = np.abs(np.maximum(y, t) - np.maximum(mean, t))
    return _scalar(np.maximum(np.where(pos, val, point), 0.0))


def twcrps_gaussian_weight(mean, var, y, t, sigma_gamma):
    """Threshold-weighted CRPS with a ``N(t, sigma_gamma^2)`` weight density."""
    mean = np.asarray(mean, dtype=float)
    var = np.asarray(var, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    sg2 = np.asarray(sigma_gamma, dtype=float) ** 2
    if np.any(sg2 <= 0):
        raise ValueError("sigma_gamma must be > 0")
    if np.any(var < 0):
        raise ValueError("variance must be >= 0")
    d = mean - t
    first = orthant_prob(d, d, sg2 + var, sg2 + var, sg2)
    second = orthant_prob(d, y - t, sg2 + var, sg2, sg2)
    third = std_normal_cdf((t - y) / np.sqrt(sg2))
    return _scalar(np.clip(first - 2.0 * second + third, 0.0, 1.0))


def expected_crps(mean, var):
    """Expected CRPS of ``N(mean, var)`` under itself: ``sigma / sqrt(pi)``."""
    _, sd, _, _ = _prep(mean, var)
    return _scalar(sd * _INV_SQRT_PI)


def expected_twcrps_indicator(mean, var, t):
    """Expected indicator-weighted CRPS of ``N(mean, var)`` under itself."""
    mean, sd, pos, safe = _prep(mean, var)
    tt = (np.asarray(t, dtype=float) - mean) / safe
    P = std_normal_cdf(tt)
    ph = std_normal_pdf(tt)
    val = sd * (
        tt * P * P - tt * P + _INV_SQRT_PI - _INV_SQRT_PI * std_normal_cdf(tt * _SQRT2) + 2.0 * ph * P - ph
    )
    return _scalar(np.where(pos, np.maximum(val, 0.0), 0.0))


def expected_twcrps_gaussian_weight(mean, var, t, sigma_gamma):
    """Expected Gaussian-weighted CRPS of ``N(mean, var)`` under itself."""
    mean = np.asarray(mean, dtype=float)
    var = np.asarray(var, dtype=float)
    sg2 = np.asarray(sigma_gamma, dtype=float) ** 2
    if np.any(sg2 <= 0):
        raise ValueError("sigma_gamma must be > 0")
    if np.any(var < 0):
        raise ValueError("variance must be >= 0")
    d = mean - np.asarray(t, dtype=float)
    val = orthant_prob(d, -d, sg2 + var, sg2 + var, -sg2)
    return _scalar(np.where(var > 0, val, 0.0))


def twcrps_numeric_oracle(mean: float, var: float, y: Optional[float], weight: WeightSpec, tol: float = 1e-8) -> float:
    """Direct quadrature of the (threshold-weighted) CRPS definition.

    With ``y=None`` integrates ``F(u) (1 - F(u))`` against the weight, which
    is the expected score. Slow; intended for verification only.

    Raises
    ------
    RuntimeError
        If the adaptive quadrature does not reach ``tol``.
    """
    mean = float(mean)
    sd = sqrt(float(var))
    t = weight.threshold

    if sd > 0:
        def F(u):
            return float(std_normal_cdf((u - mean) / sd))
    else:
        def F(u):
            return 1.0 if u >= mean else 0.0

    if y is None:
        def bracket(u):
            Fu = F(u)
            return Fu * (1.0 - Fu)
    else:
        def bracket(u):
            return (F(u) - (1.0 if y <= u else 0.0)) ** 2

    spread = 10.0 * sd
    anchors = [mean - spread, mean + spread] + ([] if y is None else [y])
    if weight.kind == "gaussian":
        sg = weight.sigma_gamma
        anchors += [t - 10.0 * sg, t + 10.0 * sg]
        lo, hi = min(anchors), max(anchors)

        def integrand(u):
            return bracket(u) * float(std_normal_pdf((u - t) / sg)) / sg
    else:
        lo, hi = min(anchors), max(anchors)
        if weight.kind == "indicator":
            lo = t
            hi = max(hi, t)
        integrand = bracket

    if hi <= lo:
        return 0.0
    breaks = [p for p in ([mean, t] + ([] if y is None else [y])) if lo < p < hi]
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(integrand, lo, hi, points=breaks or None, epsabs=tol, epsrel=0.0, limit=500)
        except integrate.IntegrationWarning as exc:
            raise RuntimeError(f"quadrature did not converge: {exc}") from exc
    if err > tol * 10:
        raise RuntimeError(f"quadrature error estimate {err:.2e} exceeds tolerance")
    return val
