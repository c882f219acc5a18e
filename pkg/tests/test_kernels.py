import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from crpsdesign.kernels import KernelSpec, correlation_matrix, cross_covariance, gram_matrix, kernel_eval
from conftest import random_fingerprints


def test_tanimoto_example():
    k = KernelSpec("tanimoto", 2.0)
    x = np.array([1, 1, 0, 1, 0])
    xp = np.array([1, 0, 1, 1, 0])
    # overlap 2, union 4
    assert kernel_eval(k, x, xp) == pytest.approx(2.0 * 0.5)
    assert kernel_eval(k, x, x) == 2.0
    assert kernel_eval(k, np.zeros(5), np.zeros(5)) == 2.0
    assert kernel_eval(k, np.array([1, 0, 0]), np.array([0, 1, 0])) == 0.0


def test_stationary_examples():
    x = np.array([0.0, 0.0])
    xp = np.array([3.0, 4.0])
    g = KernelSpec("gaussian", 1.5, 2.0)
    e = KernelSpec("exponential", 1.5, 2.0)
    assert kernel_eval(g, x, xp) == pytest.approx(1.5 * np.exp(-25 / 8))
    assert kernel_eval(e, x, xp) == pytest.approx(1.5 * np.exp(-5 / 2))
    assert kernel_eval(g, x, x) == 1.5


def test_validation():
    with pytest.raises(ValueError):
        KernelSpec("matern", 1.0, 1.0)
    with pytest.raises(ValueError):
        KernelSpec("gaussian", 1.0)
    with pytest.raises(ValueError):
        KernelSpec("tanimoto", -1.0)
    with pytest.raises(ValueError):
        correlation_matrix(KernelSpec("tanimoto"), np.array([[0, 2]]))
    with pytest.raises(ValueError):
        correlation_matrix(KernelSpec("tanimoto"), np.ones((2, 3)), np.ones((2, 4)))


@pytest.mark.parametrize("family", ["tanimoto", "gaussian", "exponential"])
def test_gram_psd_and_symmetric(family, rng):
    spec = KernelSpec(family, 3.0, None if family == "tanimoto" else 2.5)
    for _ in range(10):
        X = random_fingerprints(rng, 40, 32, rng.uniform(0.05, 0.5))
        if spec.stationary:
            X = X.astype(float)
        K = gram_matrix(spec, X)
        assert np.array_equal(K, K.T)
        assert np.linalg.eigvalsh(K).min() > -1e-10 * np.trace(K)
        assert np.allclose(np.diag(K), 3.0)


@settings(max_examples=100, deadline=None)
@given(
    arrays(np.uint8, (2, 16), elements=st.integers(0, 1)),
    st.floats(1e-3, 1e3),
)
def test_tanimoto_bounds_and_scaling(X, var):
    k1 = KernelSpec("tanimoto", 1.0)
    kv = KernelSpec("tanimoto", var)
    a = kernel_eval(k1, X[0], X[1])
    assert 0.0 <= a <= 1.0
    assert a == kernel_eval(k1, X[1], X[0])
    assert kernel_eval(kv, X[0], X[1]) == pytest.approx(var * a, rel=1e-12)


def test_cross_covariance_shape(rng):
    A = random_fingerprints(rng, 5, 16)
    B = random_fingerprints(rng, 3, 16)
    C = cross_covariance(KernelSpec("tanimoto", 2.0), A, B)
    assert C.shape == (5, 3)
    assert C[1, 2] == pytest.approx(kernel_eval(KernelSpec("tanimoto", 2.0), A[1], B[2]))
