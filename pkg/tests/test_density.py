import numpy as np
import pytest

from gapwalk import (
    DegenerateFitError,
    InvalidInputError,
    TriangularGaps,
    UniformGaps,
    decay_fit,
    mod1_density,
    uniformity_gap,
)
from gapwalk.density import gap_sequence, initial_masses

G = 1 << 12


class TestInitialDensity:
    def test_uniform_full_period_is_flat(self):
        d = mod1_density(UniformGaps(0.0, 1.0), 1.0, 1, G)
        assert uniformity_gap(d) < 1e-12

    def test_uniform_half_period_step_one(self):
        d = mod1_density(UniformGaps(0.0, 0.5), 1.0, 1, G)
        np.testing.assert_allclose(d.values[: G // 2], 2.0, atol=1e-10)
        np.testing.assert_allclose(d.values[G // 2 :], 0.0, atol=1e-10)

    def test_negative_x_mirrors(self):
        a = initial_masses(UniformGaps(0.1, 0.4), 1.0, G)
        b = initial_masses(UniformGaps(0.1, 0.4), -1.0, G)
        # law of -Y mod 1 is the reflection of the law of Y mod 1
        np.testing.assert_allclose(a, b[::-1], atol=1e-12)

    def test_grid_validation(self):
        with pytest.raises(InvalidInputError):
            mod1_density(UniformGaps(0, 1), 1.0, 1, 100)
        with pytest.raises(InvalidInputError):
            mod1_density(UniformGaps(0, 1), 1.0, 1, 1 << 7)
        with pytest.raises(InvalidInputError):
            mod1_density(UniformGaps(0, 1), 0.0, 1, G)


class TestConvolutionPowers:
    def test_uniform_is_fixed_point(self):
        for n in (1, 3, 10):
            d = mod1_density(UniformGaps(0.0, 1.0), 1.0, n, G)
            assert uniformity_gap(d) < 1e-10

    def test_mass_conservation(self):
        for n in (1, 2, 7, 40):
            d = mod1_density(UniformGaps(0.0, 0.5), 1.0, n, G)
            assert abs(np.mean(d.values) - 1.0) < 1e-10

    def test_nonnegative_values(self):
        for n in (1, 2, 3, 10, 50):
            d = mod1_density(TriangularGaps(0.0, 0.25, 0.5), 1.0, n, G)
            assert d.values.min() > -1e-12

    def test_decay_magnitude_at_step_10(self):
        # leading Fourier mode has modulus 2/pi for uniform(0, 0.5), x=1
        d = mod1_density(UniformGaps(0.0, 0.5), 1.0, 10, G)
        ref = (2.0 / np.pi) ** 10
        assert ref / 3.0 <= uniformity_gap(d) <= 3.0 * ref

    def test_decay_magnitude_at_step_20(self):
        d = mod1_density(UniformGaps(0.0, 0.5), 1.0, 20, G)
        ref = (2.0 / np.pi) ** 20
        assert ref / 3.0 <= uniformity_gap(d) <= 3.0 * ref

    def test_against_fine_grid_oracle(self):
        # direct convolution on a 16x finer grid as an independent check
        coarse = mod1_density(UniformGaps(0.0, 0.5), 1.0, 8, G)
        fine = mod1_density(UniformGaps(0.0, 0.5), 1.0, 8, 1 << 16)
        assert uniformity_gap(coarse) == pytest.approx(
            uniformity_gap(fine), rel=1e-3
        )

    def test_monotone_mixing(self):
        gaps = gap_sequence(UniformGaps(0.0, 0.5), 1.0, 40, G)
        assert np.all(gaps[1:] <= gaps[:-1] * (1.0 + 1e-6))

    def test_grid_stability(self):
        for n in (5, 10, 15):
            g1 = uniformity_gap(mod1_density(UniformGaps(0.0, 0.5), 1.0, n, G))
            g2 = uniformity_gap(mod1_density(UniformGaps(0.0, 0.5), 1.0, n, 2 * G))
            if g1 > 1e-10:
                assert abs(g2 - g1) / g1 < 0.05


class TestUniformityGap:
    def test_constant_density(self):
        d = mod1_density(UniformGaps(0.0, 1.0), 1.0, 1, G)
        assert uniformity_gap(d) < 1e-12

    def test_half_mass_density(self):
        d = mod1_density(UniformGaps(0.0, 0.5), 1.0, 1, G)
        assert uniformity_gap(d) == pytest.approx(1.0, abs=1e-10)


class TestDecayFit:
    def test_uniform_half_rate(self):
        fit = decay_fit(UniformGaps(0.0, 0.5), 1.0, 30, G)
        assert 0.55 <= fit.w <= 0.72
        assert fit.r_squared >= 0.98

    def test_degenerate_for_instant_mixing(self):
        with pytest.raises(DegenerateFitError):
            decay_fit(UniformGaps(0.0, 1.0), 1.0, 30, G)

    def test_triangular_fit_quality(self):
        fit = decay_fit(TriangularGaps(0.0, 0.25, 0.5), 1.0, 30, G)
        assert fit.r_squared >= 0.98
        assert 0.0 < fit.w < 1.0

    def test_needs_enough_steps(self):
        with pytest.raises(InvalidInputError):
            decay_fit(UniformGaps(0.0, 0.5), 1.0, 5, G)

    def test_underflow_points_dropped(self):
        fit = decay_fit(UniformGaps(0.0, 0.5), 1.0, 120, G)
        assert all(g >= 1e-14 for g in fit.gaps)
        # 120 steps decay far below the underflow threshold
        assert max(fit.steps) < 120
