"""Covariance kernels on binary fingerprints and Euclidean inputs."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

__all__ = ["KernelSpec", "FAMILIES", "kernel_eval", "correlation_matrix", "cross_covariance", "gram_matrix"]

FAMILIES = ("tanimoto", "gaussian", "exponential")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family with its variance and (stationary kernels only) lengthscale."""

    family: str
    variance: float = 1.0
    lengthscale: Optional[float] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if not self.variance > 0:
            raise ValueError("kernel variance must be > 0")
        if self.family == "tanimoto":
            if self.lengthscale is not None:
                raise ValueError("the Tanimoto kernel has no lengthscale")
        elif self.lengthscale is None or not self.lengthscale > 0:
            raise ValueError(f"{self.family} kernel needs a lengthscale > 0")

    @property
    def stationary(self) -> bool:
        return self.family != "tanimoto"

    def with_params(self, variance=None, lengthscale=None) -> "KernelSpec":
        kw = {}
        if variance is not None:
            kw["variance"] = float(variance)
        if lengthscale is not None:
            kw["lengthscale"] = float(lengthscale)
        return replace(self, **kw)


def _as_2d(X):
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError("inputs must be a vector or a 2-d array of row vectors")
    return X


def _check_binary(X):
    if not np.all((X == 0) | (X == 1)):
        raise ValueError("the Tanimoto kernel requires binary (0/1) inputs")


def _tanimoto(A, B):
    # integer counts up to d are exact in float64
    Af = A.astype(np.float64, copy=False)
    Bf = B.astype(np.float64, copy=False)
    inner = Af @ Bf.T
    na = Af.sum(axis=1)
    nb = Bf.sum(axis=1)
    denom = na[:, None] + nb[None, :] - inner
    with np.errstate(invalid="ignore", divide="ignore"):
        sim = np.where(denom > 0, inner / np.where(denom > 0, denom, 1.0), 1.0)
    return sim


def correlation_matrix(spec: KernelSpec, A, B=None) -> np.ndarray:
    """Unit-variance kernel matrix ``k(a_i, b_j) / variance``."""
    A = _as_2d(A)
    B = A if B is None else _as_2d(B)
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if spec.family == "tanimoto":
        _check_binary(A)
        if B is not A:
            _check_binary(B)
        return _tanimoto(A, B)
    Af = A.astype(np.float64, copy=False)
    Bf = B.astype(np.float64, copy=False)
    if spec.family == "exponential":
        return np.exp(-cdist(Af, Bf, "euclidean") / spec.lengthscale)
    return np.exp(-0.5 * cdist(Af, Bf, "sqeuclidean") / spec.lengthscale**2)


def cross_covariance(spec: KernelSpec, A, B) -> np.ndarray:
    """Matrix ``[k(a_i, b_j)]``."""
    return spec.variance * correlation_matrix(spec, A, B)


def gram_matrix(spec: KernelSpec, X) -> np.ndarray:
    """Symmetric Gram matrix ``[k(x_i, x_j)]`` of a nonempty point set."""
    X = _as_2d(X)
    if X.shape[0] == 0:
        raise ValueError("gram_matrix needs at least one point")
    K = cross_covariance(spec, X, X)
    # exact symmetry regardless of BLAS summation order
    K = np.triu(K) + np.triu(K, 1).T
    return K


def kernel_eval(spec: KernelSpec, x, xp) -> float:
    """Kernel value ``k(x, x')`` for two single points."""
    x = np.asarray(x)
    xp = np.asarray(xp)
    if x.ndim != 1 or xp.ndim != 1:
        raise ValueError("kernel_eval takes two 1-d points")
    if x.shape != xp.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {xp.shape[0]}")
    if spec.family == "tanimoto":
        _check_binary(x)
        _check_binary(xp)
        inner = float(np.dot(x.astype(float), xp.astype(float)))
        denom = float(x.sum()) + float(xp.sum()) - inner
        return spec.variance if denom == 0 else spec.variance * inner / denom
    diff = x.astype(float) - xp.astype(float)
    if spec.family == "exponential":
        return spec.variance * float(np.exp(-np.sqrt(diff @ diff) / spec.lengthscale))
    return spec.variance * float(np.exp(-0.5 * (diff @ diff) / spec.lengthscale**2))
