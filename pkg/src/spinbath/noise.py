"""Bath noise models: spectral densities and correlation functions.

Unit conventions used throughout the package:

* time in microseconds (us),
* the coupling strength ``b`` is carried in kHz and interpreted as
  ``10^3 s^-1`` with no factor of 2*pi, i.e. ``b = 5 kHz`` is an angular
  rate of ``5e-3 us^-1``,
* correlation functions are in ``us^-2`` and spectral densities in ``us^-1``.

With these conventions the dimensionless coupling ``b * tau_c`` for
``b = 5 kHz, tau_c = 100 us`` is exactly 0.5.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._quadrature import checked_quad
from ._validation import as_float_array, check_positive

__all__ = [
    "CorrelationKind",
    "NoiseParams",
    "correlation",
    "lorentzian_psd",
    "psd_from_correlation",
]

#: kHz -> us^-1
KHZ_TO_PER_US = 1e-3

#: The correlation kernel is truncated at this many correlation times when
#: Fourier transformed numerically; the exponential kernel is below 1e-17 of
#: its peak there.
_KERNEL_CUTOFF_TAUS = 40.0


class CorrelationKind(str, enum.Enum):
    """Functional form of the bath correlation function."""

    EXPONENTIAL = "exponential"  # Ornstein-Uhlenbeck bath, Lorentzian spectrum
    GAUSSIAN = "gaussian"        # Gaussian kernel with the same width parameter

    @classmethod
    def from_string(cls, value: "str | CorrelationKind") -> "CorrelationKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            options = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown correlation kind {value!r}; expected one of: {options}")


@dataclass(frozen=True)
class NoiseParams:
    """Bath parameters: coupling strength and correlation time.

    Parameters
    ----------
    b : float
        Coupling strength in kHz (interpreted as 1e3 s^-1, no 2*pi factor).
    tau_c : float
        Bath correlation time in us.
    """

    b: float
    tau_c: float

    def __post_init__(self) -> None:
        check_positive(self.b, "b")
        check_positive(self.tau_c, "tau_c")

    @property
    def b_per_us(self) -> float:
        """Coupling strength in us^-1."""
        return self.b * KHZ_TO_PER_US

    @property
    def b_tau(self) -> float:
        """Dimensionless product b * tau_c (0.5 for 5 kHz, 100 us)."""
        return self.b_per_us * self.tau_c


def lorentzian_psd(omega, params: NoiseParams):
    """Lorentzian spectral density ``b^2 tau_c / pi / ((omega tau_c)^2 + 1)``.

    This is the textbook normalization commonly quoted for an
    Ornstein-Uhlenbeck bath. Note that the plain two-sided Fourier transform
    of the exponential correlation function is ``2 pi`` times this value; see
    :func:`psd_from_correlation`.

    Parameters
    ----------
    omega : float or array
        Angular frequency in us^-1. The function is even in omega.
    params : NoiseParams

    Returns
    -------
    float or ndarray
        Spectral density in us^-1, strictly positive.
    """
    w = np.asarray(omega, dtype=float)
    if not np.all(np.isfinite(w)):
        raise ValueError("omega must be finite")
    b = params.b_per_us
    out = (b * b * params.tau_c / np.pi) / (np.square(w * params.tau_c) + 1.0)
    return out if out.ndim else float(out)


def correlation(t, params: NoiseParams, kind: CorrelationKind = CorrelationKind.EXPONENTIAL):
    """Bath correlation function s(t) in us^-2.

    ``b^2 exp(-|t|/tau_c)`` for the exponential (OU) kind and
    ``b^2 exp(-(t/tau_c)^2)`` for the Gaussian kind. Even in t, maximal at 0.
    """
    tt = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(tt)):
        raise ValueError("t must be finite")
    kind = CorrelationKind.from_string(kind)
    b2 = params.b_per_us ** 2
    if kind is CorrelationKind.EXPONENTIAL:
        out = b2 * np.exp(-np.abs(tt) / params.tau_c)
    else:
        out = b2 * np.exp(-np.square(tt / params.tau_c))
    return out if out.ndim else float(out)


def psd_from_correlation(params: NoiseParams, kind: CorrelationKind, omega_grid):
    """Two-sided Fourier transform of the correlation function, sampled on a grid.

    Evaluates ``S(omega) = integral e^{i omega t} s(t) dt`` by adaptive
    cosine-weighted quadrature over ``t in [0, 40 tau_c]``, exploiting the
    evenness of s(t):  ``S = 2 * int_0^inf cos(omega t) s(t) dt``.

    For the exponential kind this equals ``2 pi * lorentzian_psd(omega)``;
    for the Gaussian kind ``S(0) = b^2 tau_c sqrt(pi)``.

    Parameters
    ----------
    params : NoiseParams
    kind : CorrelationKind
    omega_grid : array
        Angular frequencies (us^-1), any sign.

    Returns
    -------
    ndarray
        Sampled spectral density, same shape as omega_grid.

    Raises
    ------
    QuadratureError
        If the Fourier quadrature fails to converge for some frequency.
    """
    kind = CorrelationKind.from_string(kind)
    grid = as_float_array(omega_grid, "omega_grid")
    upper = _KERNEL_CUTOFF_TAUS * params.tau_c

    def kernel(t: float) -> float:
        return correlation(t, params, kind)

    out = np.empty_like(grid)
    for i, w in enumerate(grid):
        w = abs(float(w))  # even in omega
        if w == 0.0:
            val = checked_quad(kernel, 0.0, upper, label="psd_from_correlation(omega=0)",
                               epsabs=1e-12, epsrel=1e-9, limit=400)
        else:
            val = checked_quad(kernel, 0.0, upper, label=f"psd_from_correlation(omega={w:g})",
                               weight="cos", wvar=w, epsabs=1e-12, epsrel=1e-9, limit=400)
        out[i] = 2.0 * val
    return out
