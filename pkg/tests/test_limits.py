import math

import numpy as np
import pytest
from scipy import stats

from gapwalk import (
    InvalidInputError,
    TrigPolynomial,
    UniformGaps,
    brownian_band_medians,
    chung_statistic,
    clt_test,
    fourth_moment_ratio,
    gaussian_trajectory,
    kefp_classify,
    lil_statistic,
    simulate_trajectory,
)
from gapwalk.limits import checkpoint_grid

COS = TrigPolynomial([1.0])
U01 = UniformGaps(0.0, 1.0)


class TestTrajectory:
    def test_checkpoint_grid(self):
        ns = checkpoint_grid(1000, 2.0)
        assert list(ns) == [2, 4, 8, 16, 32, 64, 128, 256, 512, 1000]
        with pytest.raises(InvalidInputError):
            checkpoint_grid(1000, 1.0)

    def test_zero_function(self):
        traj = simulate_trajectory(TrigPolynomial([0.0]), U01, 0.5, 10**4, 1.2, 1)
        assert np.all(traj.partial_sums == 0.0)
        assert np.all(traj.running_max_abs == 0.0)

    def test_bit_identical_reruns(self):
        a = simulate_trajectory(COS, U01, 0.5, 10**4, 1.2, 99)
        b = simulate_trajectory(COS, U01, 0.5, 10**4, 1.2, 99)
        np.testing.assert_array_equal(a.partial_sums, b.partial_sums)
        np.testing.assert_array_equal(a.running_max_abs, b.running_max_abs)

    def test_streaming_matches_direct(self):
        # block-streamed checkpoints equal a one-shot computation
        from gapwalk import walk_phases

        n = 3 * (1 << 16) + 1234  # forces several blocks
        traj = simulate_trajectory(COS, U01, 0.5, n, 1.5, 5)
        path = walk_phases(U01, 0.5, n, 5)
        fv = np.asarray(COS.evaluate(path.phases))
        cs = np.cumsum(fv)
        pm = np.maximum.accumulate(np.abs(cs))
        for i, ncp in enumerate(traj.ns):
            assert traj.partial_sums[i] == pytest.approx(cs[ncp - 1], abs=1e-9)
            assert traj.running_max_abs[i] == pytest.approx(pm[ncp - 1], abs=1e-9)

    def test_running_max_invariants(self):
        traj = simulate_trajectory(COS, U01, 0.5, 10**4, 1.2, 7)
        assert np.all(np.diff(traj.running_max_abs) >= 0.0)
        assert np.all(np.abs(traj.partial_sums) <= traj.running_max_abs + 1e-12)

    def test_rejects_zero_x_and_short_runs(self):
        with pytest.raises(InvalidInputError):
            simulate_trajectory(COS, U01, 0.0, 10**4, 1.2, 1)
        with pytest.raises(InvalidInputError):
            simulate_trajectory(COS, U01, 0.5, 100, 1.2, 1)

    def test_envelope_six_sigma(self):
        # |S_N| / sqrt(N) stays below 6 sqrt(V) at every checkpoint for
        # at least 63 of 64 seeds (union-bounded Gaussian tail)
        from gapwalk import variance

        v = variance.closed_form(COS, U01, 0.5)
        bad = 0
        for seed in range(64):
            traj = simulate_trajectory(COS, U01, 0.5, 10**4, 1.3, seed)
            ratio = np.abs(traj.partial_sums) / np.sqrt(traj.ns.astype(float))
            if np.any(ratio > 6.0 * math.sqrt(v)):
                bad += 1
        assert bad <= 1


class TestLimitStatistics:
    def test_zero_function_zero_stats(self):
        traj = simulate_trajectory(TrigPolynomial([0.0]), U01, 0.5, 10**4, 1.2, 1)
        lil = lil_statistic(traj)
        chung = chung_statistic(traj)
        assert np.all(lil.values == 0.0)
        assert np.all(chung.values == 0.0)

    def test_running_extremes_monotone(self):
        traj = simulate_trajectory(COS, U01, 0.5, 10**5, 1.2, 3)
        lil = lil_statistic(traj)
        chung = chung_statistic(traj)
        assert np.all(np.diff(lil.running_extreme) >= 0.0)
        assert np.all(np.diff(chung.running_extreme) <= 0.0)
        assert np.all(lil.ns >= 16)

    def test_negation_symmetry(self):
        neg = TrigPolynomial([-1.0])
        a = simulate_trajectory(COS, U01, 0.5, 10**4, 1.2, 11)
        b = simulate_trajectory(neg, U01, 0.5, 10**4, 1.2, 11)
        # even functional: running |sum| max identical
        np.testing.assert_array_equal(
            chung_statistic(a).values, chung_statistic(b).values
        )
        # odd functional: the signed statistic flips
        np.testing.assert_array_equal(
            lil_statistic(a).values, -lil_statistic(b).values
        )

    def test_brownian_oracle_reasonable(self):
        lil_med, chung_med = brownian_band_medians(10**5, 1.2, 16, 1)
        assert 0.4 <= lil_med <= 1.3
        assert 0.4 <= chung_med <= 1.6


class TestClt:
    def test_rejects_zero_variance(self):
        with pytest.raises(InvalidInputError):
            clt_test(TrigPolynomial([0.0]), U01, 0.5, 256, 600, 1)

    def test_small_scale_pass(self):
        rep = clt_test(COS, U01, 0.5, 1024, 600, seed=2)
        assert rep.p_value > 0.001
        assert rep.verdict in ("pass", "fail")
        assert rep.details["N"] == 1024

    def test_worker_independence(self):
        a = clt_test(COS, U01, 0.5, 512, 600, seed=5, workers=1)
        b = clt_test(COS, U01, 0.5, 512, 600, seed=5, workers=4)
        assert a == b

    def test_doubling_n_does_not_worsen_fit(self):
        # the finite-N tolerance is justified by the KS distance not
        # degrading as the horizon doubles
        d_small = clt_test(COS, U01, 0.5, 256, 1500, seed=4).statistic
        d_large = clt_test(COS, U01, 0.5, 1024, 1500, seed=4).statistic
        assert d_large <= 2.0 * d_small
        assert d_large < 0.05

    def test_ks_machinery_p_value_uniformity(self):
        # feed the KS stage genuine standard normals: p-values over 100
        # batteries must look uniform (chi-square at level 0.001)
        rng = np.random.default_rng(123)
        pvals = [stats.kstest(rng.standard_normal(500), "norm").pvalue
                 for _ in range(100)]
        counts, _ = np.histogram(pvals, bins=10, range=(0.0, 1.0))
        assert stats.chisquare(counts).pvalue > 0.001


class TestKefp:
    @pytest.mark.parametrize("a,verdict", [
        (0, "diverges"), (1, "diverges"), (2, "diverges"), (3, "diverges"),
        (4, "converges"), (5, "converges"), (10, "converges"),
    ])
    def test_analytic_rule(self, a, verdict):
        assert kefp_classify(a, 10**6).verdict == verdict

    def test_partial_integral_monotone(self):
        vals = [kefp_classify(1.0, t).partial_integral
                for t in (10**2, 10**4, 10**6, 10**8)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("a", [1.0, 5.0])
    def test_matches_substitution_oracle(self, a):
        # independent oracle: substitute u = loglog t, which turns the
        # integrand into phi(u) u^{-a/2} du with phi = sqrt(2u + a ln u)
        from scipy import integrate

        v1 = kefp_classify(a, 10**6).partial_integral
        v2 = kefp_classify(a, 10**12).partial_integral
        u1 = math.log(math.log(10**6))
        u2 = math.log(math.log(10**12))
        oracle, _ = integrate.quad(
            lambda u: math.sqrt(2 * u + a * math.log(u)) * u ** (-a / 2), u1, u2
        )
        assert (v2 - v1) == pytest.approx(oracle, rel=1e-9)

    def test_rejects_tiny_horizon(self):
        with pytest.raises(InvalidInputError):
            kefp_classify(1.0, 10.0)


class TestFourthMoment:
    def test_zero_function(self):
        r, se = fourth_moment_ratio(TrigPolynomial([0.0]), U01, 1.0, [1.0], 10**4, 1)
        assert r == 0.0 and se == 0.0

    def test_single_weight_exact_moment(self):
        # E cos^4(2 pi U) = 3/8 with exactly uniform phases
        r, se = fourth_moment_ratio(COS, U01, 1.0, [1.0], 2 * 10**4, seed=6)
        assert abs(r - 0.375) <= 3.0 * se

    def test_zero_weights_rejected(self):
        with pytest.raises(InvalidInputError):
            fourth_moment_ratio(COS, U01, 0.5, [0.0, 0.0], 10**4, 1)

    def test_reps_precondition(self):
        with pytest.raises(InvalidInputError):
            fourth_moment_ratio(COS, U01, 0.5, [1.0], 100, 1)

    def test_worker_independence(self):
        a = fourth_moment_ratio(COS, U01, 0.5, np.ones(16), 10**4, 3, workers=1)
        b = fourth_moment_ratio(COS, U01, 0.5, np.ones(16), 10**4, 3, workers=4)
        assert a == b
