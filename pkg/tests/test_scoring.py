import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crpsdesign.scoring import (
    WeightSpec,
    crps_gaussian,
    expected_crps,
    expected_twcrps_gaussian_weight,
    expected_twcrps_indicator,
    twcrps_gaussian_weight,
    twcrps_indicator,
    twcrps_numeric_oracle,
)

# closed form of the standard-normal CRPS at y = mean: 2 phi(0) - 1/sqrt(pi)
CRPS_STD_AT_MEAN = 2 * 0.3989422804014327 - 1 / np.sqrt(np.pi)


def test_crps_standard_example():
    got = crps_gaussian(0.0, 1.0, 0.0)
    assert got == pytest.approx(CRPS_STD_AT_MEAN, abs=1e-15)
    assert got == pytest.approx(twcrps_numeric_oracle(0.0, 1.0, 0.0, WeightSpec("unweighted")), abs=1e-9)
    # value to seven places
    assert round(got, 7) == 0.233695


def test_crps_degenerate_and_symmetric():
    assert crps_gaussian(1.5, 0.0, 1.5) == 0.0
    assert crps_gaussian(1.5, 0.0, -0.5) == 2.0
    assert crps_gaussian(2.0, 3.0, -1.0) == pytest.approx(crps_gaussian(-2.0, 3.0, 1.0), abs=1e-15)


def test_twcrps_indicator_asymmetry():
    # overestimating a low value costs less than underestimating a high one
    low = twcrps_indicator(3.0, 4.0, -3.0, 0.0)
    high = twcrps_indicator(-3.0, 4.0, 3.0, 0.0)
    assert high > low
    assert low == pytest.approx(twcrps_numeric_oracle(3.0, 4.0, -3.0, WeightSpec("indicator", 0.0)), abs=1e-8)
    assert high == pytest.approx(twcrps_numeric_oracle(-3.0, 4.0, 3.0, WeightSpec("indicator", 0.0)), abs=1e-8)


def test_twcrps_indicator_no_disagreement_region():
    assert twcrps_indicator(-50.0, 0.01, -2.0, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_twcrps_gaussian_weight_symmetric_pair():
    a = twcrps_gaussian_weight(3.0, 4.0, -3.0, 0.0, 1.5)
    b = twcrps_gaussian_weight(-3.0, 4.0, 3.0, 0.0, 1.5)
    assert a == pytest.approx(b, abs=1e-14)


def test_twcrps_gaussian_weight_wide_limit():
    mu, var, y = 0.7, 2.25, -0.4
    sg = 1e4 * np.sqrt(var)
    scaled = twcrps_gaussian_weight(mu, var, y, 0.0, sg) * sg * np.sqrt(2 * np.pi)
    assert scaled == pytest.approx(crps_gaussian(mu, var, y), rel=1e-3)


def random_cases(seed, n):
    rng = np.random.default_rng(seed)
    mu = rng.uniform(-5, 5, n)
    sd = rng.uniform(0.1, 3, n)
    y = mu + sd * rng.normal(0, 1.5, n)
    t = rng.uniform(-4, 4, n)
    sg = rng.uniform(0.2, 3, n)
    return mu, sd, y, t, sg


def test_closed_forms_vs_quadrature():
    mu, sd, y, t, sg = random_cases(1, 60)
    for i in range(60):
        v = sd[i] ** 2
        assert crps_gaussian(mu[i], v, y[i]) == pytest.approx(
            twcrps_numeric_oracle(mu[i], v, y[i], WeightSpec("unweighted")), abs=1e-6)
        w1 = WeightSpec("indicator", t[i])
        w2 = WeightSpec("gaussian", t[i], sg[i])
        assert twcrps_indicator(mu[i], v, y[i], t[i]) == pytest.approx(
            twcrps_numeric_oracle(mu[i], v, y[i], w1), abs=1e-6)
        assert twcrps_gaussian_weight(mu[i], v, y[i], t[i], sg[i]) == pytest.approx(
            twcrps_numeric_oracle(mu[i], v, y[i], w2), abs=1e-6)
        assert expected_twcrps_indicator(mu[i], v, t[i]) == pytest.approx(
            twcrps_numeric_oracle(mu[i], v, None, w1), abs=1e-6)
        assert expected_twcrps_gaussian_weight(mu[i], v, t[i], sg[i]) == pytest.approx(
            twcrps_numeric_oracle(mu[i], v, None, w2), abs=1e-6)


def test_expected_score_is_average_score():
    # E_Y[S(F, Y)] for Y ~ F equals the F(1-F) integral
    rng = np.random.default_rng(3)
    for _ in range(5):
        mu, sd, t, sg = rng.uniform(-2, 2), rng.uniform(0.5, 2), rng.uniform(-1, 1), rng.uniform(0.3, 2)
        y = mu + sd * rng.standard_normal(200_000)
        s1 = twcrps_indicator(mu, sd**2, y, t)
        s2 = twcrps_gaussian_weight(mu, sd**2, y, t, sg)
        se1 = s1.std() / np.sqrt(y.size)
        se2 = s2.std() / np.sqrt(y.size)
        assert abs(s1.mean() - expected_twcrps_indicator(mu, sd**2, t)) < 4 * se1
        assert abs(s2.mean() - expected_twcrps_gaussian_weight(mu, sd**2, t, sg)) < 4 * se2


def test_expected_indicator_examples():
    assert expected_twcrps_indicator(1.0, 0.0, 0.0) == 0.0
    # far-below threshold: the unweighted expected CRPS sigma / sqrt(pi)
    assert expected_twcrps_indicator(0.0, 4.0, -1e3) == pytest.approx(2 / np.sqrt(np.pi), abs=1e-12)
    assert expected_crps(0.0, 4.0) == pytest.approx(2 / np.sqrt(np.pi), abs=1e-15)


def test_expected_indicator_monte_carlo():
    rng = np.random.default_rng(11)
    for _ in range(20):
        mu, sd, t = rng.uniform(-3, 3), rng.uniform(0.2, 3), rng.uniform(-3, 3)
        N, Nt = rng.standard_normal((2, 1_000_000))
        s = sd * np.maximum(Nt - np.maximum(N, (t - mu) / sd), 0.0)
        se = s.std() / 1000
        assert abs(s.mean() - expected_twcrps_indicator(mu, sd**2, t)) < 4 * se + 1e-12


def test_expected_gaussian_weight_examples():
    assert expected_twcrps_gaussian_weight(2.0, 1.5**2, 2.0, 1.5) == pytest.approx(1 / 6, abs=1e-14)
    assert expected_twcrps_gaussian_weight(2.0, 0.0, 0.0, 1.0) == 0.0


@settings(max_examples=200, deadline=None)
@given(st.integers(-40, 40), st.integers(0, 64), st.floats(0.01, 10), st.floats(0.05, 5))
def test_expected_gaussian_weight_mirror(t_q, d_q, sd, sg):
    # dyadic values so that t + d and t - d are exact
    t, d = t_q / 4, d_q / 8
    a = expected_twcrps_gaussian_weight(t + d, sd**2, t, sg)
    b = expected_twcrps_gaussian_weight(t - d, sd**2, t, sg)
    assert a == b


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 5), st.floats(-3, 3))
def test_expected_indicator_increasing_in_mean(sd, t):
    grid = np.linspace(t - 6 * sd, t + 6 * sd, 200)
    vals = expected_twcrps_indicator(grid, sd**2, t)
    assert np.all(np.diff(vals) >= -1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 3))
def test_expected_scores_increase_with_sigma_at_threshold(t, sg):
    sds = np.linspace(0.01, 5, 100)
    e1 = expected_twcrps_indicator(np.full(100, t), sds**2, t)
    e2 = expected_twcrps_gaussian_weight(np.full(100, t), sds**2, t, sg)
    assert np.all(np.diff(e1) > 0)
    assert np.all(np.diff(e2) > 0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-5, 5), st.floats(0.01, 5), st.floats(-10, 10), st.floats(-5, 5), st.floats(0.05, 5))
def test_scores_nonnegative(mu, sd, y, t, sg):
    assert crps_gaussian(mu, sd**2, y) >= 0
    assert twcrps_indicator(mu, sd**2, y, t) >= 0
    assert twcrps_gaussian_weight(mu, sd**2, y, t, sg) >= 0
    assert twcrps_indicator(mu, sd**2, y, t) <= crps_gaussian(mu, sd**2, y) + 1e-12


def test_vectorized_matches_scalar():
    mu, sd, y, t, sg = random_cases(5, 20)
    vec = twcrps_gaussian_weight(mu, sd**2, y, t, sg)
    for i in range(20):
        assert vec[i] == pytest.approx(twcrps_gaussian_weight(mu[i], sd[i] ** 2, y[i], t[i], sg[i]), abs=1e-14)


def test_oracle_self_check():
    mu, sd, y, _, _ = random_cases(9, 100)
    for i in range(100):
        assert twcrps_numeric_oracle(mu[i], sd[i] ** 2, y[i], WeightSpec("unweighted")) == pytest.approx(
            crps_gaussian(mu[i], sd[i] ** 2, y[i]), abs=1e-6)
    assert twcrps_numeric_oracle(-30.0, 1.0, -35.0, WeightSpec("indicator", 0.0)) == pytest.approx(0.0, abs=1e-10)


def test_weight_spec_validation():
    with pytest.raises(ValueError):
        WeightSpec("gaussian", 0.0)
    with pytest.raises(ValueError):
        WeightSpec("gaussian", 0.0, -1.0)
    with pytest.raises(ValueError):
        WeightSpec("cdf")


def test_gaussian_weight_propriety():
    """The true forecast minimizes the average score over perturbed alternatives."""
    rng = np.random.default_rng(21)
    mu0, sd0, t, sg = 1.0, 1.5, 1.5, 1.0
    y = mu0 + sd0 * rng.standard_normal(100_000)
    best = twcrps_gaussian_weight(mu0, sd0**2, y, t, sg)
    for dm in (-0.5, -0.2, 0.2, 0.5):
        for fs in (0.7, 1.0, 1.4):
            if dm == 0 and fs == 1.0:
                continue
            alt = twcrps_gaussian_weight(mu0 + dm, (fs * sd0) ** 2, y, t, sg)
            diff = alt - best
            assert diff.mean() > -4 * diff.std() / np.sqrt(y.size)
