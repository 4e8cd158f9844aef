"""Parameter extraction from coherence curves.

Two sklearn-style estimators cover the fitting routes:

* :class:`ClosedFormCoherenceFit` fits the closed-form coherence of the
  OU bath directly, with analytic derivatives and a multi-start damped
  least-squares search (the surface has a long curved valley where a single
  start can stall).
* :class:`StretchedExponentialFit` fits ``exp[-(T/t_char)^p]``, the common
  slow-noise analysis; :func:`slow_noise_params` converts its decay times
  into bath parameters through the slow-noise relations
  ``b = sqrt(2)/T2*`` and ``tau_c = T2^3 b^2 / 12``.

Both follow the fit/predict/get_params convention so they compose with the
wider ecosystem; thin functional wrappers mirror them for pipeline use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import as_float_array, check_positive
from .coherence import (
    _alpha_split,
    _exponent_shape,
    _exponent_shape_derivative,
    coherence_closed_form,
)
from .noise import KHZ_TO_PER_US, NoiseParams
from .simulate import CoherenceCurve

__all__ = [
    "ClosedFormCoherenceFit",
    "FitError",
    "FitResult",
    "SlowNoiseEstimate",
    "SlowNoiseFit",
    "StretchedExponentialFit",
    "chi2_nu",
    "fit_closed_form",
    "fit_stretched_exponential",
    "slow_noise_params",
]

#: Number of model parameters fitted against a curve (b, tau_c) or (t_char, p).
N_FITTED_PARAMS = 2


class FitError(RuntimeError):
    """Least-squares fit failed to converge; carries the best point found."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class FitResult:
    """Outcome of a closed-form fit."""

    params: NoiseParams
    sigma_b: float
    sigma_tau: float
    chi2nu_min: float
    converged: bool
    n_dof: int


@dataclass(frozen=True)
class SlowNoiseFit:
    """Stretched-exponential fit: characteristic time, exponent, 1-sigma errors."""

    t_char: float
    p: float
    sigma_t: float
    sigma_p: float


@dataclass(frozen=True)
class SlowNoiseEstimate:
    """Bath parameters inferred through the slow-noise relations."""

    params: NoiseParams
    sigma_b: float
    sigma_tau: float


def chi2_nu(curve: CoherenceCurve, params: NoiseParams) -> float:
    """Reduced chi-squared of the closed-form model against a curve.

    nu = n_points - 2 (two fitted parameters). Requires strictly positive
    per-point sigmas.
    """
    if np.any(curve.sigmas <= 0.0):
        raise ValueError("chi2_nu requires strictly positive sigmas")
    nu = len(curve) - N_FITTED_PARAMS
    if nu <= 0:
        raise ValueError(f"need more than {N_FITTED_PARAMS} points, got {len(curve)}")
    model = coherence_closed_form(curve.times, curve.alpha, params)
    resid = (curve.values - model) / curve.sigmas
    return float(np.dot(resid, resid) / nu)


def _coherence_and_jacobian(T: np.ndarray, alpha: float, b_khz: float, tau_c: float):
    """Model values and analytic partials with respect to (b in kHz, tau_c)."""
    lo, hi = _alpha_split(alpha)
    b = b_khz * KHZ_TO_PER_US
    x = T / tau_c
    g = _exponent_shape(x, lo, hi)
    gp = _exponent_shape_derivative(x, lo, hi)
    w = np.exp(-(b * tau_c) ** 2 * g)
    dw_db = w * (-2.0 * b * tau_c * tau_c * g) * KHZ_TO_PER_US
    dw_dtau = w * (-(b * b) * (2.0 * tau_c * g - T * gp))
    return w, dw_db, dw_dtau


class ClosedFormCoherenceFit(BaseEstimator):
    """Least-squares fit of the closed-form OU-bath coherence.

    Parameters
    ----------
    alpha : float
        Pulse fraction of the curve being fitted.
    init : tuple (b_khz, tau_c_us), optional
        Starting point. Derived from the data when omitted.
    bounds : ((b_lo, b_hi), (tau_lo, tau_hi)), optional
        Box constraints in kHz and us. Defaults to [0.2, 5] x init on each
        axis.
    n_starts : int
        The fit restarts from an n_starts x n_starts log-spaced grid spanning
        the bounds (plus init) and keeps the best optimum.

    Attributes
    ----------
    b_, tau_c_ : fitted parameters (kHz, us)
    sigma_b_, sigma_tau_ : 1-sigma uncertainties from the local curvature
    chi2nu_, n_dof_, converged_ : fit quality
    result_ : FitResult
    """

    def __init__(self, alpha: float = 0.5, init=None, bounds=None, n_starts: int = 5):
        self.alpha = alpha
        self.init = init
        self.bounds = bounds
        self.n_starts = n_starts

    def _default_init(self, T: np.ndarray, w: np.ndarray) -> tuple[float, float]:
        # Crude scale guess from the 1/e crossing; the multi-start grid does
        # the real work of escaping the valley.
        target = np.exp(-1.0)
        below = np.nonzero(w <= target)[0]
        t_e = T[below[0]] if below.size else T[-1]
        b0 = np.sqrt(2.0) / t_e / KHZ_TO_PER_US
        return float(b0), float(t_e)

    def fit(self, T, w, sigma=None):
        T = as_float_array(T, "T")
        w = as_float_array(w, "w")
        if T.size != w.size:
            raise ValueError("T and w must have equal length")
        n_dof = T.size - N_FITTED_PARAMS
        if n_dof <= 0:
            raise ValueError("need at least 3 points to fit two parameters")

        weighted = sigma is not None
        if weighted:
            sigma = as_float_array(sigma, "sigma")
            if sigma.size != T.size:
                raise ValueError("sigma must match T in length")
            if np.all(sigma == 0.0):
                weighted = False  # exact curve: plain least squares
            elif np.any(sigma <= 0.0):
                raise ValueError("sigma must be strictly positive (or all zero)")
        inv_sigma = 1.0 / sigma if weighted else np.ones_like(T)

        init = tuple(self.init) if self.init is not None else self._default_init(T, w)
        b0, t0 = check_positive(init[0], "init b"), check_positive(init[1], "init tau_c")
        if self.bounds is not None:
            (b_lo, b_hi), (t_lo, t_hi) = self.bounds
        else:
            b_lo, b_hi = 0.2 * b0, 5.0 * b0
            t_lo, t_hi = 0.2 * t0, 5.0 * t0
        if not (b_lo <= b0 <= b_hi and t_lo <= t0 <= t_hi):
            raise ValueError("init must lie within bounds")

        alpha = self.alpha

        def residuals(theta):
            model, _, _ = _coherence_and_jacobian(T, alpha, theta[0], theta[1])
            return (model - w) * inv_sigma

        def jacobian(theta):
            _, db, dtau = _coherence_and_jacobian(T, alpha, theta[0], theta[1])
            return np.stack([db * inv_sigma, dtau * inv_sigma], axis=1)

        starts = [(b0, t0)]
        for bb in np.geomspace(b_lo, b_hi, self.n_starts):
            for tt in np.geomspace(t_lo, t_hi, self.n_starts):
                starts.append((bb, tt))

        best = None
        for start in starts:
            res = least_squares(residuals, x0=np.asarray(start), jac=jacobian,
                                bounds=([b_lo, t_lo], [b_hi, t_hi]),
                                method="trf", xtol=1e-14, ftol=1e-14, gtol=1e-14)
            if best is None or res.cost < best.cost:
                best = res
        if best is None or not np.all(np.isfinite(best.x)):
            raise FitError("closed-form fit failed from every start", best)

        jtj = best.jac.T @ best.jac
        cov = np.linalg.pinv(jtj)
        if not weighted:
            # Unweighted fit: scale the curvature by the residual variance.
            cov = cov * (2.0 * best.cost / n_dof)
        chi2nu = 2.0 * best.cost / n_dof if weighted else float("nan")

        self.b_, self.tau_c_ = float(best.x[0]), float(best.x[1])
        self.sigma_b_ = float(np.sqrt(max(cov[0, 0], 0.0)))
        self.sigma_tau_ = float(np.sqrt(max(cov[1, 1], 0.0)))
        self.chi2nu_ = float(chi2nu)
        self.n_dof_ = int(n_dof)
        self.converged_ = bool(best.success)
        self.result_ = FitResult(
            params=NoiseParams(b=self.b_, tau_c=self.tau_c_),
            sigma_b=self.sigma_b_, sigma_tau=self.sigma_tau_,
            chi2nu_min=self.chi2nu_, converged=self.converged_, n_dof=self.n_dof_,
        )
        if not self.converged_:
            raise FitError("closed-form fit did not converge", self.result_)
        return self

    def predict(self, T):
        if not hasattr(self, "result_"):
            raise NotFittedError("ClosedFormCoherenceFit is not fitted yet")
        return coherence_closed_form(np.asarray(T, dtype=float), self.alpha,
                                     self.result_.params)


class StretchedExponentialFit(BaseEstimator):
    """Unweighted least-squares fit of ``exp[-(T/t_char)^p]`` with amplitude fixed at 1.

    t_char > 0 and p constrained to ``p_bounds`` (default [0.5, 4]).
    Uncertainties come from the local curvature scaled by the residual
    variance, so a systematic model mismatch shows up as nonzero errors even
    on noiseless data.
    """

    def __init__(self, p_bounds=(0.5, 4.0)):
        self.p_bounds = p_bounds

    def fit(self, T, w):
        T = as_float_array(T, "T")
        w = as_float_array(w, "w")
        if T.size != w.size:
            raise ValueError("T and w must have equal length")
        n_dof = T.size - N_FITTED_PARAMS
        if n_dof <= 0:
            raise ValueError("need at least 3 points to fit two parameters")
        if np.any(T <= 0.0):
            raise ValueError("T must be positive")
        p_lo, p_hi = self.p_bounds

        def residuals(theta):
            t_char, p = theta
            return np.exp(-np.power(T / t_char, p)) - w

        def jacobian(theta):
            t_char, p = theta
            u = np.power(T / t_char, p)
            model = np.exp(-u)
            d_t = model * u * p / t_char
            d_p = -model * u * np.log(T / t_char)
            return np.stack([d_t, d_p], axis=1)

        below = np.nonzero(w <= np.exp(-1.0))[0]
        t_e = T[below[0]] if below.size else T[-1]
        best = None
        for p0 in (1.0, 1.5, 2.0, 3.0):
            res = least_squares(residuals, x0=np.array([t_e, p0]), jac=jacobian,
                                bounds=([1e-9, p_lo], [np.inf, p_hi]),
                                method="trf", xtol=1e-14, ftol=1e-14, gtol=1e-14)
            if best is None or res.cost < best.cost:
                best = res
        if best is None or not best.success:
            raise FitError("stretched-exponential fit did not converge", best)

        cov = np.linalg.pinv(best.jac.T @ best.jac) * (2.0 * best.cost / n_dof)
        self.t_char_, self.p_ = float(best.x[0]), float(best.x[1])
        self.sigma_t_char_ = float(np.sqrt(max(cov[0, 0], 0.0)))
        self.sigma_p_ = float(np.sqrt(max(cov[1, 1], 0.0)))
        self.result_ = SlowNoiseFit(t_char=self.t_char_, p=self.p_,
                                    sigma_t=self.sigma_t_char_, sigma_p=self.sigma_p_)
        return self

    def predict(self, T):
        if not hasattr(self, "result_"):
            raise NotFittedError("StretchedExponentialFit is not fitted yet")
        return np.exp(-np.power(np.asarray(T, dtype=float) / self.t_char_, self.p_))


def fit_closed_form(curve: CoherenceCurve, init=None, bounds=None) -> FitResult:
    """Fit the closed-form coherence to a curve; see ClosedFormCoherenceFit."""
    est = ClosedFormCoherenceFit(alpha=curve.alpha, init=init, bounds=bounds)
    est.fit(curve.times, curve.values, sigma=curve.sigmas)
    return est.result_


def fit_stretched_exponential(curve: CoherenceCurve) -> SlowNoiseFit:
    """Fit a stretched exponential to a curve; see StretchedExponentialFit."""
    est = StretchedExponentialFit()
    est.fit(curve.times, curve.values)
    return est.result_


def slow_noise_params(echo_fit: SlowNoiseFit, fid_fit: SlowNoiseFit) -> SlowNoiseEstimate:
    """Convert slow-noise decay times into bath parameters.

    ``b = sqrt(2) / T2*`` from the FID fit and ``tau_c = T2^3 b^2 / 12`` from
    the echo fit, with first-order propagation of the fit uncertainties.
    """
    t2 = check_positive(echo_fit.t_char, "echo t_char")
    t2star = check_positive(fid_fit.t_char, "fid t_char")
    b_us = np.sqrt(2.0) / t2star
    tau_c = t2 ** 3 * b_us ** 2 / 12.0
    sigma_b_us = np.sqrt(2.0) / t2star ** 2 * fid_fit.sigma_t
    # tau_c depends on t2 directly and on t2* through b.
    d_tau_d_t2 = 3.0 * tau_c / t2
    d_tau_d_t2star = -2.0 * tau_c / t2star
    sigma_tau = float(np.hypot(d_tau_d_t2 * echo_fit.sigma_t,
                               d_tau_d_t2star * fid_fit.sigma_t))
    return SlowNoiseEstimate(
        params=NoiseParams(b=b_us / KHZ_TO_PER_US, tau_c=float(tau_c)),
        sigma_b=float(sigma_b_us / KHZ_TO_PER_US),
        sigma_tau=sigma_tau,
    )
