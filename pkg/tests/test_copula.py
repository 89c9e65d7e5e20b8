import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (generalized_inverse_by_enumeration, ks_statistic_normal,
                     quantile_by_bisection)
from spectral_cggm.copula import (fit_cdf, gaussian_cdf, gaussian_quantile, inverse_cdf,
                                  to_gaussian, to_gaussian_panel)
from spectral_cggm.errors import NonFiniteInput, OutOfRange, TooFewSamples


def test_fit_cdf_sorts():
    f = fit_cdf([3, 1, 2])
    np.testing.assert_array_equal(f.sorted_samples, [1, 2, 3])
    assert f.n == 3


def test_cdf_counting_and_bounds():
    f = fit_cdf([1, 2, 3])
    assert f(2) == pytest.approx(2 / 3)
    assert f(-10) == 0.0
    assert f(10) == 1.0


def test_fit_cdf_errors():
    with pytest.raises(TooFewSamples):
        fit_cdf([1.0])
    with pytest.raises(NonFiniteInput):
        fit_cdf([1.0, np.nan])


@pytest.mark.parametrize("y", [1e-9, 0.2, 1 / 3, 0.5, 0.6, 2 / 3, 0.99, 1.0])
def test_inverse_cdf_matches_enumeration(y):
    samples = [1.0, 2.0, 3.0]
    assert inverse_cdf(fit_cdf(samples), y) == generalized_inverse_by_enumeration(samples, y)


def test_inverse_cdf_examples():
    f = fit_cdf([1, 2, 3])
    assert inverse_cdf(f, 0.5) == 2
    assert inverse_cdf(f, 1.0) == 3
    assert inverse_cdf(f, 1e-9) == 1


@pytest.mark.parametrize("y", [0.0, -0.1, 1.0000001])
def test_inverse_cdf_out_of_range(y):
    with pytest.raises(OutOfRange):
        inverse_cdf(fit_cdf([1, 2, 3]), y)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=2, max_size=30), st.floats(1e-6, 1.0))
def test_inverse_cdf_fuzz_against_enumeration(samples, y):
    samples = [float(s) for s in samples]
    assert inverse_cdf(fit_cdf(samples), y) == generalized_inverse_by_enumeration(samples, y)


def test_gaussian_cdf_zero():
    assert gaussian_cdf(0.0) == 0.5


def test_quantile_matches_bisection():
    assert gaussian_quantile(0.975) == pytest.approx(quantile_by_bisection(0.975), abs=1e-10)
    assert gaussian_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)


@pytest.mark.parametrize("p", [1e-12, 1e-6, 0.001, 0.02425, 0.3, 0.5, 0.7, 0.97575, 0.999999])
def test_quantile_accuracy(p):
    assert gaussian_quantile(p) == pytest.approx(quantile_by_bisection(p), abs=1e-10)


def test_quantile_round_trip():
    p = np.linspace(0.01, 0.99, 99)
    assert np.abs(gaussian_cdf(gaussian_quantile(p)) - p).max() < 1e-9


@pytest.mark.parametrize("p", [0.0, 1.0, -0.5, 2.0])
def test_quantile_out_of_range(p):
    with pytest.raises(OutOfRange):
        gaussian_quantile(p)


def test_to_gaussian_all_ties_is_zero():
    np.testing.assert_array_equal(to_gaussian([5.0, 5.0]), [0.0, 0.0])


def test_to_gaussian_monotone_on_increasing_input():
    out = to_gaussian(np.arange(20.0))
    assert np.all(np.diff(out) > 0)


def test_to_gaussian_exponential_ks():
    x = np.random.default_rng(0).exponential(size=10_000)
    z = to_gaussian(x)
    stat = ks_statistic_normal(z)
    assert stat == pytest.approx(scipy.stats.kstest(z, "norm").statistic, abs=1e-12)
    assert stat < 0.02


def test_to_gaussian_too_few():
    with pytest.raises(TooFewSamples):
        to_gaussian([1.0])


def test_panel_transform_pools_trials():
    rng = np.random.default_rng(3)
    data = rng.exponential(size=(4, 50, 2))
    out = to_gaussian_panel(data)
    np.testing.assert_array_equal(out[..., 1].ravel(), to_gaussian(data[..., 1].ravel()))


samples = st.lists(st.integers(-20, 20), min_size=2, max_size=60).map(
    lambda v: np.array(v, dtype=float))


@settings(max_examples=100, deadline=None)
@given(samples)
def test_rank_preservation(x):
    z = to_gaussian(x)
    np.testing.assert_array_equal(scipy.stats.rankdata(z), scipy.stats.rankdata(x))


@settings(max_examples=100, deadline=None)
@given(samples)
def test_monotone_invariance_bit_exact(x):
    for g in (np.exp, lambda v: v ** 3 + 2 * v, lambda v: np.arctan(v / 7)):
        assert np.array_equal(to_gaussian(g(x)), to_gaussian(x))


@settings(max_examples=100, deadline=None)
@given(samples)
def test_idempotent(x):
    once = to_gaussian(x)
    assert np.abs(to_gaussian(once) - once).max() <= 1e-12
