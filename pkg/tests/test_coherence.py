import numpy as np
import pytest

from spinbath import (
    CorrelationKind,
    NoiseParams,
    SequenceSpec,
    coherence_closed_form,
    coherence_freq_oracle,
    coherence_time_oracle,
    control_function,
    filter_function,
    log_coherence_closed_form,
    slow_noise_echo,
    slow_noise_fid,
    slow_noise_t2,
    slow_noise_t2star,
)
from spinbath._quadrature import checked_quad


class TestControlFunction:
    def test_sign_before_and_after_pulse(self):
        assert control_function(0.2 * 10.0, 10.0, alpha=0.3) == 1.0
        assert control_function(0.5 * 10.0, 10.0, alpha=0.3) == -1.0

    def test_boundary_convention(self):
        assert control_function(3.0, 10.0, alpha=0.3) == 1.0

    def test_no_flip_without_pulse(self):
        t = np.linspace(0.0, 10.0, 11)
        assert np.all(control_function(t, 10.0, alpha=1.0) == 1.0)

    def test_outside_window_rejected(self):
        with pytest.raises(ValueError):
            control_function(-0.1, 10.0, alpha=0.5)
        with pytest.raises(ValueError):
            control_function(10.1, 10.0, alpha=0.5)


class TestFilterFunction:
    def test_balanced_pulse_reduces_to_quartic_sine(self):
        w = np.linspace(0.01, 40.0, 200)
        T = 1.0
        np.testing.assert_allclose(filter_function(w, T, 0.5),
                                   8.0 * np.sin(w * T / 4.0) ** 4, rtol=0, atol=1e-12)

    @pytest.mark.parametrize("alpha", [0.0, 1.0])
    def test_free_decay_reduces_to_squared_sine(self, alpha):
        w = np.linspace(0.01, 40.0, 200)
        np.testing.assert_allclose(filter_function(w, 1.0, alpha),
                                   2.0 * np.sin(w / 2.0) ** 2, rtol=0, atol=1e-12)

    def test_matches_quadrature_of_fourier_magnitude(self):
        # Independent route: F = (w^2/2) |int_0^T f(t) e^{iwt} dt|^2 with the
        # transform integrals done numerically on each constant segment.
        T = 7.0
        for alpha in (0.0, 0.25, 0.37, 0.5, 0.8):
            tp = alpha * T
            for w in (0.3, 1.7, 4.2, 9.9):
                re = (checked_quad(lambda t: np.cos(w * t), 0.0, tp)
                      - checked_quad(lambda t: np.cos(w * t), tp, T))
                im = (checked_quad(lambda t: np.sin(w * t), 0.0, tp)
                      - checked_quad(lambda t: np.sin(w * t), tp, T))
                expected = 0.5 * w * w * (re * re + im * im)
                assert filter_function(w, T, alpha) == pytest.approx(expected, abs=1e-9)

    def test_dc_limit_quartic_for_echo(self):
        # the echo filter opens as z^4/... : F(z)/z^2 -> 0 as z -> 0
        z = np.array([1e-3, 1e-2])
        f = filter_function(z, 1.0, 0.5)
        np.testing.assert_allclose(f, z ** 4 / 32.0, rtol=1e-4)
        assert filter_function(0.0, 1.0, 0.5) == 0.0


class TestClosedForm:
    def test_unity_at_zero_time(self, params):
        for alpha in (0.0, 0.3, 0.5, 1.0):
            assert coherence_closed_form(0.0, alpha, params) == 1.0

    def test_echo_value_at_one_tau(self, params):
        assert coherence_closed_form(100.0, 0.5, params) == pytest.approx(
            0.985544696365079, rel=1e-10)

    def test_fid_value_at_one_tau(self, params):
        assert coherence_closed_form(100.0, 0.0, params) == pytest.approx(
            0.9121326405414613, rel=1e-10)

    def test_log_form_finite_when_w_underflows(self):
        p = NoiseParams(b=500.0, tau_c=1000.0)  # b*tau_c = 500
        T = 1e6
        assert coherence_closed_form(T, 0.5, p) == 0.0
        assert np.isfinite(log_coherence_closed_form(T, 0.5, p))

    def test_symmetry_exact_for_dyadic_fractions(self, params):
        T = np.linspace(1.0, 2000.0, 50)
        for alpha in (0.0, 0.125, 0.25, 0.375, 0.5):
            a = coherence_closed_form(T, alpha, params)
            b = coherence_closed_form(T, 1.0 - alpha, params)
            assert np.array_equal(a, b)

    def test_monotone_decay_in_time(self, params):
        T = np.linspace(0.0, 5000.0, 2000)
        for alpha in (0.0, 0.2, 0.5):
            w = coherence_closed_form(T, alpha, params)
            assert np.all(np.diff(w) <= 0)

    def test_echo_never_below_fid(self, params):
        T = np.linspace(1.0, 3000.0, 500)
        assert np.all(coherence_closed_form(T, 0.5, params)
                      >= coherence_closed_form(T, 0.0, params))


class TestTimeOracle:
    def test_matches_closed_form_echo(self, params):
        w = coherence_time_oracle(100.0, 0.5, params)
        assert w == pytest.approx(coherence_closed_form(100.0, 0.5, params), rel=1e-6)

    def test_matches_closed_form_generic_alpha(self, params):
        w = coherence_time_oracle(250.0, 0.3, params)
        assert w == pytest.approx(coherence_closed_form(250.0, 0.3, params), rel=1e-6)

    def test_unity_at_zero_time(self, params):
        for kind in CorrelationKind:
            assert coherence_time_oracle(0.0, 0.5, params, kind) == 1.0

    def test_gaussian_fid_against_lag_weighted_reduction(self, params):
        # For alpha=0 the double integral collapses to a single integral over
        # the lag: chi = b^2 int_0^T (T-u) exp(-(u/tau_c)^2) du.
        T = params.tau_c
        chi = params.b_per_us ** 2 * checked_quad(
            lambda u: (T - u) * np.exp(-((u / params.tau_c) ** 2)), 0.0, T,
            epsabs=1e-14, epsrel=1e-11)
        w = coherence_time_oracle(T, 0.0, params, CorrelationKind.GAUSSIAN)
        assert w == pytest.approx(np.exp(-chi), rel=1e-8)

    def test_gaussian_asymmetric_against_lag_weighted_reduction(self, params):
        # Generic alpha: reduce each rectangular panel to a lag integral with
        # the trapezoidal overlap weight of the two intervals.
        def panel(a1, b1, a2, b2):
            # int_{a1}^{b1} dt1 int_{a2}^{b2} dt2 s(t1-t2)
            #   = int s(u) * len([a1,b1] inter [a2+u, b2+u]) du
            def weight(u):
                return max(0.0, min(b1, b2 + u) - max(a1, a2 + u))

            def integrand(u):
                return weight(u) * np.exp(-((u / params.tau_c) ** 2))

            return checked_quad(integrand, a1 - b2, b1 - a2,
                                epsabs=1e-14, epsrel=1e-11, limit=300)

        T, alpha = 150.0, 0.3
        tp = alpha * T
        b2 = params.b_per_us ** 2
        chi = 0.5 * b2 * (panel(0, tp, 0, tp) + panel(tp, T, tp, T)
                          - 2.0 * panel(0, tp, tp, T))
        w = coherence_time_oracle(T, alpha, params, CorrelationKind.GAUSSIAN)
        assert w == pytest.approx(np.exp(-chi), rel=1e-7)


class TestFreqOracle:
    def test_matches_closed_form_echo(self, params):
        assert coherence_freq_oracle(100.0, 0.5, params) == pytest.approx(
            0.985544696365079, rel=1e-6)

    def test_matches_closed_form_fid(self, params):
        assert coherence_freq_oracle(100.0, 0.0, params) == pytest.approx(
            0.9121326405414613, rel=1e-6)

    def test_short_time_limit(self, params):
        assert coherence_freq_oracle(1e-4 * params.tau_c, 0.5, params) == pytest.approx(
            1.0, abs=1e-8)


class TestSlowNoise:
    def test_characteristic_point(self):
        assert slow_noise_echo(300.0, 300.0) == pytest.approx(np.exp(-1.0), rel=1e-15)
        assert slow_noise_fid(300.0, 300.0) == pytest.approx(np.exp(-1.0), rel=1e-15)

    def test_decay_time_conversions(self, params):
        assert slow_noise_t2(params) == pytest.approx(363.4241185664278, rel=1e-12)
        assert slow_noise_t2star(params) == pytest.approx(282.842712474619, rel=1e-12)

    def test_echo_exponent_agrees_at_small_x(self, params):
        # x = 0.05: cubic limit is within ~2% of the exact exponent
        T = 0.05 * params.tau_c
        exact = -log_coherence_closed_form(T, 0.5, params)
        approx = (T / slow_noise_t2(params)) ** 3
        assert approx == pytest.approx(exact, rel=0.02)

    def test_fid_exponent_agrees_at_small_x(self, params):
        T = 0.05 * params.tau_c
        exact = -log_coherence_closed_form(T, 0.0, params)
        approx = (T / slow_noise_t2star(params)) ** 2
        assert approx == pytest.approx(exact, rel=0.02)

    def test_motional_narrowing_tail(self, params):
        # For the balanced pulse at large x the exponent approaches
        # (b tau_c)^2 (x - 3) with an exp(-x/2) correction envelope.
        bt2 = params.b_tau ** 2
        for x in (50.0, 70.0, 100.0):
            T = x * params.tau_c
            lhs = abs(log_coherence_closed_form(T, 0.5, params) + bt2 * (x - 3.0))
            assert lhs <= 4.0 * bt2 * np.exp(-x / 2.0) + 1e-12


class TestSequenceSpec:
    def test_valid_spec(self):
        seq = SequenceSpec(alpha=0.5, times=np.array([1.0, 2.0, 3.0]))
        assert len(seq) == 3

    def test_rejects_bad_alpha_and_times(self):
        with pytest.raises(ValueError):
            SequenceSpec(alpha=1.5, times=np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            SequenceSpec(alpha=0.5, times=np.array([2.0, 1.0]))
        with pytest.raises(ValueError):
            SequenceSpec(alpha=0.5, times=np.array([0.0, 1.0]))
