"""Scalar Gaussian helpers, the bivariate normal CDF and seeded random streams.

All functions broadcast over numpy arrays; scalar inputs return numpy scalars.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtr

__all__ = [
    "Gaussian1D",
    "std_normal_pdf",
    "std_normal_cdf",
    "bvn_cdf_std",
    "bvn_cdf_at_origin",
    "orthant_prob",
    "rng_stream",
]

_INV_SQRT_2PI = 1.0 / sqrt(2.0 * pi)
_TWO_PI = 2.0 * pi
_RHO_TOL = 1e-9
_DEGENERATE_REL = 1e-12

# 20-point Gauss-Legendre rule mapped to [0, 2], as used by Genz's BVNU
_GL_NODES, _GL_WEIGHTS = leggauss(20)
_GL_NODES = 1.0 + _GL_NODES


@dataclass(frozen=True)
class Gaussian1D:
    """Univariate Gaussian predictive distribution.

    ``variance == 0`` is a point mass at ``mean``.
    """

    mean: float
    variance: float

    def __post_init__(self):
        if not self.variance >= 0:
            raise ValueError(f"variance must be >= 0, got {self.variance}")

    @property
    def std(self) -> float:
        return sqrt(self.variance)


def std_normal_pdf(z):
    """Standard normal density."""
    z = np.asarray(z, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * z * z)


def std_normal_cdf(z):
    """Standard normal CDF (``scipy.special.ndtr``)."""
    return ndtr(np.asarray(z, dtype=float))


def _bvnu(h, k, r):
    """Upper orthant P(X > h, Y > k), Drezner-Wesolowsky/Genz scheme.

    Inputs are finite 1-d arrays of equal length with ``|r| <= 1``.
    """
    out = np.empty_like(h)
    hk = h * k

    low = np.abs(r) < 0.925
    if np.any(low):
        hl, kl, rl, hkl = h[low], k[low], r[low], hk[low]
        hs = 0.5 * (hl * hl + kl * kl)
        asr = 0.5 * np.arcsin(rl)
        sn = np.sin(asr[:, None] * _GL_NODES)
        val = np.exp((sn * hkl[:, None] - hs[:, None]) / (1.0 - sn * sn)) @ _GL_WEIGHTS
        out[low] = val * asr / _TWO_PI + ndtr(-hl) * ndtr(-kl)

    high = ~low
    if np.any(high):
        hh, rh = h[high], r[high]
        kh = np.where(rh < 0, -k[high], k[high])
        hkh = np.where(rh < 0, -hk[high], hk[high])
        bvn = np.zeros_like(hh)

        inner = np.abs(rh) < 1.0
        if np.any(inner):
            hi, ki, hki, ri = hh[inner], kh[inner], hkh[inner], rh[inner]
            a_s = 1.0 - ri * ri
            a = np.sqrt(a_s)
            bs = (hi - ki) ** 2
            c = (4.0 - hki) / 8.0
            d = (12.0 - hki) / 80.0
            asr = -0.5 * (bs / a_s + hki)
            b_in = np.where(
                asr > -100.0,
                a * np.exp(asr) * (1.0 - c * (bs - a_s) * (1.0 - d * bs) / 3.0 + c * d * a_s * a_s),
                0.0,
            )
            b = np.sqrt(bs)
            sp = sqrt(_TWO_PI) * ndtr(-b / a)
            keep = hki > -100.0
            b_in = b_in - np.where(
                keep,
                np.exp(-0.5 * np.where(keep, hki, 0.0)) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0),
                0.0,
            )
            a = 0.5 * a
            xs = (a[:, None] * _GL_NODES) ** 2
            asr2 = -0.5 * (bs[:, None] / xs + hki[:, None])
            ok = asr2 > -100.0
            c2, d2 = c[:, None], d[:, None]
            sp2 = 1.0 + c2 * xs * (1.0 + 5.0 * d2 * xs)
            rs = np.sqrt(1.0 - xs)
            ep = np.exp(-0.5 * hki[:, None] * xs / (1.0 + rs) ** 2) / rs
            terms = np.where(ok, np.exp(np.where(ok, asr2, 0.0)) * (sp2 - ep), 0.0)
            bvn[inner] = (a * (terms @ _GL_WEIGHTS) - b_in) / _TWO_PI

        pos = rh > 0
        bvn = np.where(pos, bvn + ndtr(-np.maximum(hh, kh)), bvn)
        neg = ~pos
        lower = np.where(hh < 0, ndtr(kh) - ndtr(hh), ndtr(-hh) - ndtr(-kh))
        bvn = np.where(neg & (hh >= kh), -bvn, bvn)
        bvn = np.where(neg & (hh < kh), lower - bvn, bvn)
        out[high] = bvn

    return out


def bvn_cdf_std(h, k, rho):
    """P(X <= h, Y <= k) for a standard bivariate normal with correlation rho.

    Accurate to about 1e-15 in double precision for moderate arguments;
    infinite limits are supported. The result is exactly symmetric in
    ``(h, k)``.

    Raises
    ------
    ValueError
        If any ``|rho|`` exceeds 1 by more than 1e-9.
    """
    h, k, rho = np.broadcast_arrays(
        np.asarray(h, dtype=float), np.asarray(k, dtype=float), np.asarray(rho, dtype=float)
    )
    shape = h.shape
    if np.any(np.abs(rho) > 1.0 + _RHO_TOL) or np.any(np.isnan(rho)):
        raise ValueError("correlation must lie in [-1, 1]")
    lo = np.minimum(h, k).ravel()
    hi = np.maximum(h, k).ravel()
    r = np.clip(rho.ravel(), -1.0, 1.0)

    out = np.empty(lo.shape)
    finite = np.isfinite(lo) & np.isfinite(hi)
    # lo == -inf -> 0; hi == +inf -> marginal of lo
    out[~finite] = np.where(lo[~finite] == -np.inf, 0.0, ndtr(lo[~finite]))
    if np.any(finite):
        out[finite] = _bvnu(-lo[finite], -hi[finite], r[finite])
    out = np.clip(out, 0.0, 1.0)
    return out.reshape(shape) if shape else out[0]


def orthant_prob(m1, m2, v1, v2, c12):
    """P(X1 <= 0, X2 <= 0) for X ~ N((m1, m2), [[v1, c12], [c12, v2]]).

    Elementwise over broadcast arrays. A coordinate whose variance is at
    most ``1e-12`` times the larger diagonal entry is treated as a point
    mass at its mean.
    """
    m1, m2, v1, v2, c12 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (m1, m2, v1, v2, c12)))
    shape = m1.shape
    m1, m2, v1, v2, c12 = (a.ravel() for a in (m1, m2, v1, v2, c12))
    eps = _DEGENERATE_REL * np.maximum(np.maximum(v1, v2), np.finfo(float).tiny)
    deg1 = v1 <= eps
    deg2 = v2 <= eps
    out = np.empty(m1.shape)

    both = deg1 & deg2
    out[both] = ((m1[both] <= 0) & (m2[both] <= 0)).astype(float)
    only1 = deg1 & ~deg2
    out[only1] = (m1[only1] <= 0) * ndtr(-m2[only1] / np.sqrt(v2[only1]))
    only2 = deg2 & ~deg1
    out[only2] = (m2[only2] <= 0) * ndtr(-m1[only2] / np.sqrt(v1[only2]))

    reg = ~(deg1 | deg2)
    if np.any(reg):
        s1 = np.sqrt(v1[reg])
        s2 = np.sqrt(v2[reg])
        rho = c12[reg] / (s1 * s2)
        rho = np.where(np.abs(rho) <= 1.0 + _RHO_TOL, np.clip(rho, -1.0, 1.0), rho)
        out[reg] = bvn_cdf_std(-m1[reg] / s1, -m2[reg] / s2, rho)
    return out.reshape(shape) if shape else out[0]


def bvn_cdf_at_origin(mean, cov):
    """Bivariate normal CDF evaluated at (0, 0).

    Parameters
    ----------
    mean : array_like, shape (2,)
    cov : array_like, shape (2, 2)
        Symmetric covariance with nonnegative diagonal.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if mean.shape != (2,) or cov.shape != (2, 2):
        raise ValueError("expected mean of shape (2,) and cov of shape (2, 2)")
    if not np.isclose(cov[0, 1], cov[1, 0], rtol=1e-12, atol=0.0):
        raise ValueError("covariance must be symmetric")
    if cov[0, 0] < 0 or cov[1, 1] < 0:
        raise ValueError("covariance diagonal must be nonnegative")
    return float(orthant_prob(mean[0], mean[1], cov[0, 0], cov[1, 1], cov[0, 1]))


def rng_stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Independent, reproducible generator for ``(seed, stream_id)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.PCG64(ss))
