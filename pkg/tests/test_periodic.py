import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gapwalk import (
    InvalidInputError,
    SampledLipschitz,
    TrigPolynomial,
    function_from_json,
    function_to_json,
    mean_zero_project,
)


def brute_autocorr(f, t, n=1 << 16):
    u = (np.arange(n) + 0.5) / n
    return float(np.mean(f.evaluate(u) * f.evaluate(u + t)))


class TestEvaluate:
    def test_cos_at_zero(self):
        assert TrigPolynomial([1.0]).evaluate(0.0) == 1.0

    def test_zero_polynomial(self):
        f = TrigPolynomial([0.0])
        for t in (-3.7, 0.0, 0.25, 11.0):
            assert f.evaluate(t) == 0.0

    def test_periodic_reduction(self):
        # cos(2 pi * 7.25) = cos(pi/2) = 0
        assert abs(TrigPolynomial([1.0]).evaluate(7.25)) < 1e-12

    def test_array_input(self):
        f = TrigPolynomial([1.0])
        t = np.array([0.0, 0.25, 0.5])
        np.testing.assert_allclose(f.evaluate(t), [1.0, 0.0, -1.0], atol=1e-12)


class TestNormAndAutocorrelation:
    def test_l2_single_cos(self):
        assert TrigPolynomial([1.0]).l2_norm_sq() == pytest.approx(0.5)

    def test_l2_zero(self):
        assert TrigPolynomial([0.0]).l2_norm_sq() == 0.0

    def test_l2_orthogonal_sum(self):
        f = TrigPolynomial([1.0], [0.0, 1.0])  # cos 2pi t + sin 4pi t
        assert f.l2_norm_sq() == pytest.approx(1.0)

    def test_autocorr_at_zero_is_norm(self):
        f = TrigPolynomial([1.0])
        assert f.autocorrelation(0.0) == pytest.approx(f.l2_norm_sq())

    def test_autocorr_half_period(self):
        assert TrigPolynomial([1.0]).autocorrelation(0.5) == pytest.approx(-0.5)

    def test_autocorr_mixed_vs_quadrature(self):
        # frozen from the brute-force quadrature oracle at 2^16 points
        f = TrigPolynomial([1.0], [0.0, 1.0])
        assert f.autocorrelation(0.25) == pytest.approx(-0.5, abs=1e-12)
        assert brute_autocorr(f, 0.25) == pytest.approx(-0.5, abs=1e-6)


class TestMeanZeroProject:
    def test_constant_becomes_zero(self):
        f = mean_zero_project([3.0, 3.0, 3.0, 3.0])
        assert f.l2_norm_sq() == 0.0
        assert f.evaluate(0.37) == 0.0

    def test_already_centered(self):
        f = mean_zero_project([1.0, -1.0])
        assert f.mean_correction == 0.0

    def test_sawtooth_norm(self):
        # exact piecewise integral: each segment contributes 1/12, norm 1/3
        f = mean_zero_project([0.0, 1.0, 0.0, -1.0])
        assert f.mean_correction == 0.0
        assert f.l2_norm_sq() == pytest.approx(1.0 / 3.0)
        assert f.lipschitz_constant == 4.0  # steepest segment slope

    def test_too_few_samples(self):
        with pytest.raises(InvalidInputError):
            mean_zero_project([1.0])

    def test_interpolant_mean_is_zero(self):
        rng = np.random.default_rng(7)
        f = mean_zero_project(rng.normal(size=17))
        # exact integral: trapezoid per sample cell is exact for the
        # piecewise-linear interpolant
        wrapped = np.append(f.values, f.values[0])
        exact = np.sum(0.5 * (wrapped[:-1] + wrapped[1:])) / f.grid_size
        assert abs(exact) < 1e-15
        u = (np.arange(1 << 12) + 0.5) / (1 << 12)
        assert abs(np.mean(f.evaluate(u))) < 1e-6


@given(
    coeffs=st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=4),
    t=st.floats(-50, 50, allow_nan=False),
)
@settings(max_examples=200, deadline=None)
def test_periodicity_property(coeffs, t):
    f = TrigPolynomial(coeffs, coeffs[::-1])
    assert abs(f.evaluate(t) - f.evaluate(t + 1.0)) <= 1e-12


@given(data=st.lists(st.floats(-3, 3, allow_nan=False), min_size=2, max_size=12),
       t=st.floats(-2, 2, allow_nan=False))
@settings(max_examples=60, deadline=None)
def test_sampled_periodicity_property(data, t):
    f = mean_zero_project(data)
    assert abs(f.evaluate(t) - f.evaluate(t + 1.0)) <= 1e-12


def test_periodicity_thousand_random_pairs():
    rng = np.random.default_rng(41)
    for _ in range(500):
        f = TrigPolynomial(rng.normal(size=3), rng.normal(size=3))
        t = rng.uniform(-20, 20)
        assert abs(f.evaluate(t) - f.evaluate(t + 1.0)) <= 1e-12
    for _ in range(500):
        f = mean_zero_project(rng.normal(size=rng.integers(2, 40)))
        t = rng.uniform(-20, 20)
        assert abs(f.evaluate(t) - f.evaluate(t + 1.0)) <= 1e-12


@pytest.mark.parametrize("seed", range(4))
def test_autocorr_symmetry_both_families(seed):
    rng = np.random.default_rng(seed)
    trig = TrigPolynomial(rng.normal(size=3), rng.normal(size=3))
    samp = mean_zero_project(rng.normal(size=24))
    for t in rng.uniform(-1, 1, size=8):
        assert trig.autocorrelation(t) == pytest.approx(
            trig.autocorrelation(-t), abs=1e-12
        )
        assert samp.autocorrelation(t) == pytest.approx(
            samp.autocorrelation(-t), abs=1e-12
        )


@pytest.mark.parametrize("seed", range(4))
def test_autocorr_cauchy_schwarz(seed):
    rng = np.random.default_rng(100 + seed)
    f = mean_zero_project(rng.normal(size=31))
    bound = f.l2_norm_sq() + 1e-12
    for t in rng.uniform(0, 1, size=16):
        assert abs(f.autocorrelation(t)) <= bound


def test_sampled_autocorr_matches_quadrature():
    rng = np.random.default_rng(3)
    f = mean_zero_project(rng.normal(size=13))
    for t in (0.1, 0.37, 0.5):
        assert f.autocorrelation(t) == pytest.approx(
            brute_autocorr(f, t), abs=5e-5
        )


def test_family_agreement_dense_sampling():
    f = TrigPolynomial([0.7, -0.3], [0.2, 0.5])
    g = f.sampled(1 << 14)
    assert g.l2_norm_sq() == pytest.approx(f.l2_norm_sq(), abs=1e-4)
    for t in (0.0, 0.21, 0.5, 0.83):
        assert g.autocorrelation(t) == pytest.approx(
            f.autocorrelation(t), abs=1e-4
        )


def test_json_round_trip():
    f = function_from_json({"type": "trig", "cos": [1.0], "sin": [0.5]})
    assert isinstance(f, TrigPolynomial)
    assert function_to_json(f) == {"type": "trig", "cos": [1.0], "sin": [0.5]}

    g = function_from_json('{"type": "sampled", "values": [1.0, 2.0, 3.0]}')
    assert isinstance(g, SampledLipschitz)
    back = function_to_json(g)
    np.testing.assert_allclose(back["values"], [1.0, 2.0, 3.0])

    with pytest.raises(InvalidInputError):
        function_from_json({"type": "fourier"})
