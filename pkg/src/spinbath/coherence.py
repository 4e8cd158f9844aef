"""Coherence of a spin qubit under a single refocusing pulse at fractional time alpha.

The pulse sequence applies one pi-pulse at ``t = alpha * T`` during a total
free evolution ``T``. ``alpha = 0`` or ``1`` is free induction decay,
``alpha = 1/2`` is the conventional Hahn echo, and intermediate values mix
refocused and free dynamics.

For an exponentially correlated (Ornstein-Uhlenbeck) bath the coherence has
the closed form

    W(T, alpha) = exp[-(b tau_c)^2 (x - 3 + 2 e^{-a x} + 2 e^{-(1-a) x} - e^{-x})]

with ``x = T / tau_c``. This module computes W three independent ways:

* :func:`coherence_closed_form` evaluates the expression above,
* :func:`coherence_time_oracle` integrates the correlation function over the
  time-domain double integral by 2D adaptive quadrature,
* :func:`coherence_freq_oracle` integrates the spectral density against the
  analytic filter function of the sequence.

The two oracles are deliberately independent of the closed form so they can
serve as cross checks (and, for the Gaussian correlation kind, the time
oracle is the primary evaluator since no closed form is used).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._quadrature import QuadratureError, checked_quad
from ._validation import (
    as_float_array,
    check_nonnegative,
    check_positive,
    check_strictly_increasing,
    check_unit_interval,
)
from .noise import CorrelationKind, NoiseParams, correlation

__all__ = [
    "SequenceSpec",
    "coherence_closed_form",
    "coherence_freq_oracle",
    "coherence_time_oracle",
    "control_function",
    "filter_function",
    "log_coherence_closed_form",
    "slow_noise_echo",
    "slow_noise_fid",
    "slow_noise_t2",
    "slow_noise_t2star",
]


@dataclass(frozen=True)
class SequenceSpec:
    """A pulse fraction together with the measured time grid.

    alpha is the dimensionless pulse position in [0, 1]; times is a strictly
    increasing grid of positive total evolution times in us.
    """

    alpha: float
    times: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        check_unit_interval(self.alpha, "alpha")
        times = as_float_array(self.times, "times")
        if times.size == 0:
            raise ValueError("times must not be empty")
        if times[0] <= 0.0:
            raise ValueError("times must be positive")
        check_strictly_increasing(times, "times")
        object.__setattr__(self, "times", times)

    def __len__(self) -> int:
        return self.times.size


def _alpha_split(alpha: float) -> tuple[float, float]:
    """Canonical (min, max) pair of the pulse fractions {alpha, 1 - alpha}.

    Evaluating the exponent through the ordered pair makes the alpha <-> 1-alpha
    symmetry hold bitwise whenever both fractions are exactly representable.
    """
    a = check_unit_interval(alpha, "alpha")
    other = 1.0 - a
    return (a, other) if a <= other else (other, a)


def _exponent_shape(x, lo: float, hi: float):
    """Dimensionless decay exponent per (b tau_c)^2 as a function of x = T/tau_c."""
    x = np.asarray(x, dtype=float)
    out = x - 3.0 + 2.0 * np.exp(-lo * x) + 2.0 * np.exp(-hi * x) - np.exp(-x)
    # The exact expression is nonnegative; clamp float cancellation residue.
    return np.maximum(out, 0.0)


def _exponent_shape_derivative(x, lo: float, hi: float):
    x = np.asarray(x, dtype=float)
    return 1.0 - 2.0 * lo * np.exp(-lo * x) - 2.0 * hi * np.exp(-hi * x) + np.exp(-x)


def log_coherence_closed_form(T, alpha: float, params: NoiseParams):
    """Natural log of the closed-form coherence; always finite.

    Use this instead of ``log(coherence_closed_form(...))`` in regimes where
    W underflows (large b*tau_c or long T).
    """
    lo, hi = _alpha_split(alpha)
    T = np.asarray(T, dtype=float)
    if np.any(T < 0) or not np.all(np.isfinite(T)):
        raise ValueError("T must be finite and >= 0")
    x = T / params.tau_c
    out = -(params.b_tau ** 2) * _exponent_shape(x, lo, hi)
    return out if out.ndim else float(out)


def coherence_closed_form(T, alpha: float, params: NoiseParams):
    """Closed-form coherence W(T, alpha) in (0, 1] for an OU bath.

    Exactly 1 at T = 0. Underflows to 0.0 for extremely large exponents; use
    :func:`log_coherence_closed_form` there.
    """
    out = np.exp(log_coherence_closed_form(T, alpha, params))
    return out if np.ndim(out) else float(out)


def control_function(t, T: float, alpha: float):
    """Sign of the accumulated phase at time t: +1 before the pulse, -1 after.

    The boundary value at exactly t = alpha*T is defined as +1 (a set of
    measure zero, fixed for determinism).
    """
    T = check_positive(T, "T")
    check_unit_interval(alpha, "alpha")
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0.0) or np.any(tt > T) or not np.all(np.isfinite(tt)):
        raise ValueError("t must lie in [0, T]")
    out = np.where(tt <= alpha * T, 1.0, -1.0)
    return out if out.ndim else float(out)


def filter_function(omega, T: float, alpha: float):
    """Dimensionless filter function F(omega T) of the single-pulse sequence.

    Computed from the analytic Fourier transform of the piecewise-constant
    control function:

        F(z) = 3 + cos z - 2 cos(a z) - 2 cos((1-a) z),   z = omega T.

    Reduces to ``8 sin^4(z/4)`` for alpha = 1/2 and ``2 sin^2(z/2)`` for
    alpha = 0 or 1; vanishes as z^2 (2 alpha - 1)^2 / 2 for z -> 0.
    """
    T = check_positive(T, "T")
    lo, hi = _alpha_split(alpha)
    z = np.asarray(omega, dtype=float) * T
    if not np.all(np.isfinite(z)):
        raise ValueError("omega must be finite")
    # Half-angle form of 3 + cos z - 2 cos(a z) - 2 cos((1-a) z); each term is
    # computed without the 1 - cos cancellation, which matters for z -> 0.
    out = (4.0 * np.square(np.sin(0.5 * lo * z))
           + 4.0 * np.square(np.sin(0.5 * hi * z))
           - 2.0 * np.square(np.sin(0.5 * z)))
    out = np.maximum(out, 0.0)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# time-domain oracle
# ---------------------------------------------------------------------------

def _panel_integral(a1: float, b1: float, a2: float, b2: float,
                    params: NoiseParams, kind: CorrelationKind) -> float:
    """Double integral of s(t1 - t2) over the rectangle [a1,b1] x [a2,b2].

    Nested adaptive quadrature. For the exponential kernel the inner integral
    is split at t2 = t1 where |t1 - t2| has a kink.
    """
    if b1 <= a1 or b2 <= a2:
        return 0.0
    has_kink = CorrelationKind.from_string(kind) is CorrelationKind.EXPONENTIAL
    label = f"time-oracle panel [{a1:g},{b1:g}]x[{a2:g},{b2:g}]"

    def inner(t1: float) -> float:
        pts = [t1] if (has_kink and a2 < t1 < b2) else None
        return checked_quad(lambda t2: correlation(t1 - t2, params, kind), a2, b2,
                            label=label, points=pts, epsabs=1e-13, epsrel=1e-11, limit=200)

    return checked_quad(inner, a1, b1, label=label, epsabs=1e-13, epsrel=1e-11, limit=200)


def coherence_time_oracle(T: float, alpha: float, params: NoiseParams,
                          kind: CorrelationKind = CorrelationKind.EXPONENTIAL) -> float:
    """Coherence from the time-domain double integral of the correlation function.

    Evaluates ``exp[- (1/2) int_0^T int_0^T f(t1) f(t2) s(t1-t2) dt1 dt2]`` by
    2D adaptive quadrature, split at the pulse time into rectangular panels so
    the control function is constant on each. The two off-diagonal panels are
    equal by symmetry of s and are computed once.

    For the exponential kind this must agree with the closed form; for the
    Gaussian kind it is the primary evaluator.
    """
    T = check_nonnegative(T, "T")
    check_unit_interval(alpha, "alpha")
    if T == 0.0:
        return 1.0
    tp = alpha * T
    chi = 0.5 * (_panel_integral(0.0, tp, 0.0, tp, params, kind)
                 + _panel_integral(tp, T, tp, T, params, kind)
                 - 2.0 * _panel_integral(0.0, tp, tp, T, params, kind))
    return float(np.exp(-chi))


# ---------------------------------------------------------------------------
# frequency-domain oracle
# ---------------------------------------------------------------------------

def _lorentzian_transform(omega: float, params: NoiseParams) -> float:
    # Two-sided Fourier transform of the exponential correlation function,
    # 2 b^2 tau_c / (1 + (omega tau_c)^2); equals 2*pi*lorentzian_psd(omega).
    b = params.b_per_us
    return 2.0 * b * b * params.tau_c / (1.0 + (omega * params.tau_c) ** 2)


def _paired_cosine_integral(u: float, params: NoiseParams) -> float:
    """J(u) = int_0^inf S(w) (1 - cos(w u)) / w^2 dw for the Lorentzian transform.

    Split at the spectral knee c = 1/tau_c. Below it the paired integrand is
    finite at w = 0 and handled by plain adaptive quadrature. Above it the
    strategy depends on how many cosine cycles fit under the w^-4 decay:

    * few cycles (slowly oscillating): plain quadrature up to a cutoff W
      where the analytic remainder bound 4 b^2 / (3 tau_c W^3) drops below
      1e-13 (QAWF is unreliable when the weight barely oscillates),
    * many cycles: decaying smooth part on [c, inf) minus a Fourier cosine
      integral handled by QAWF, which is built for exactly that regime.
    """
    if u <= 0.0:
        return 0.0
    c = 1.0 / params.tau_c
    b = params.b_per_us

    def paired(w: float) -> float:
        if w == 0.0:
            return _lorentzian_transform(0.0, params) * 0.5 * u * u
        return _lorentzian_transform(w, params) * (1.0 - np.cos(w * u)) / (w * w)

    def smooth(w: float) -> float:
        return _lorentzian_transform(w, params) / (w * w)

    head = checked_quad(paired, 0.0, c, label=f"freq-oracle head(u={u:g})",
                        epsabs=1e-13, epsrel=1e-11, limit=400)
    w_cut = max((4.0 * b * b / (3.0 * params.tau_c * 1e-13)) ** (1.0 / 3.0), 100.0 * c)
    if u * (w_cut - c) / (2.0 * np.pi) <= 30.0:
        tail = checked_quad(paired, c, w_cut, label=f"freq-oracle tail(u={u:g})",
                            epsabs=1e-13, epsrel=1e-11, limit=800)
        return head + tail
    tail = checked_quad(smooth, c, np.inf, label=f"freq-oracle tail(u={u:g})",
                        epsabs=1e-13, epsrel=1e-11, limit=400)
    osc = checked_quad(smooth, c, np.inf, label=f"freq-oracle cosine tail(u={u:g})",
                       weight="cos", wvar=u, epsabs=1e-13, limlst=300, limit=400)
    return head + tail - osc


def coherence_freq_oracle(T: float, alpha: float, params: NoiseParams) -> float:
    """Coherence from the spectral integral ``exp[-int_0^inf dw/pi S(w) F(wT)/w^2]``.

    S(w) is the two-sided transform of the exponential correlation function
    (Lorentzian bath only). The filter function is decomposed into its three
    ``1 - cos`` components so each piece is integrable at w = 0:

        F(wT)/w^2 = [-(1-cos wT) + 2(1-cos(a wT)) + 2(1-cos((1-a) wT))] / w^2.

    Must agree with the closed form.
    """
    T = check_nonnegative(T, "T")
    lo, hi = _alpha_split(alpha)
    if T == 0.0:
        return 1.0
    chi = (-_paired_cosine_integral(T, params)
           + 2.0 * _paired_cosine_integral(lo * T, params)
           + 2.0 * _paired_cosine_integral(hi * T, params)) / np.pi
    if not np.isfinite(chi):
        raise QuadratureError(f"freq-oracle produced non-finite exponent {chi}")
    return float(np.exp(-chi))


# ---------------------------------------------------------------------------
# slow-noise (T << tau_c) limits
# ---------------------------------------------------------------------------

def slow_noise_echo(T, t2: float):
    """Echo coherence in the slow-noise limit: exp[-(T/T2)^3]."""
    t2 = check_positive(t2, "t2")
    out = np.exp(-np.power(np.asarray(T, dtype=float) / t2, 3))
    return out if out.ndim else float(out)


def slow_noise_fid(T, t2star: float):
    """FID coherence in the slow-noise limit: exp[-(T/T2*)^2]."""
    t2star = check_positive(t2star, "t2star")
    out = np.exp(-np.square(np.asarray(T, dtype=float) / t2star))
    return out if out.ndim else float(out)


def slow_noise_t2(params: NoiseParams) -> float:
    """Slow-noise echo decay time (12 tau_c / b^2)^(1/3) in us."""
    return float((12.0 * params.tau_c / params.b_per_us ** 2) ** (1.0 / 3.0))


def slow_noise_t2star(params: NoiseParams) -> float:
    """Slow-noise FID decay time sqrt(2)/b in us."""
    return float(np.sqrt(2.0) / params.b_per_us)
