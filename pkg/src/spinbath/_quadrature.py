"""Checked wrapper around scipy's adaptive quadrature.

All numerical integrals in this package go through :func:`checked_quad`, so a
quadrature that fails to converge surfaces as a :class:`QuadratureError`
carrying the integrator's error estimate instead of a silent warning.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy import integrate


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not converge to a usable tolerance."""


def checked_quad(func, a, b, *, label: str = "integral", **kwargs) -> float:
    """scipy.integrate.quad with an explicit convergence contract.

    QUADPACK's round-off warnings are advisory; what matters downstream is
    the absolute-error estimate. The call fails (QuadratureError with the
    `label` diagnostic) when the estimate exceeds
    ``max(1e4 * epsabs, 1e-8 * |value|)``, far above healthy estimates
    (~epsabs) but far below what any test tolerance here can absorb.
    """
    epsabs = kwargs.setdefault("epsabs", 1e-12)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, abserr = integrate.quad(func, a, b, **kwargs)
    tol = max(1e4 * epsabs, 1e-8 * abs(val))
    if not np.isfinite(val) or abserr > tol:
        raise QuadratureError(
            f"{label}: quadrature on [{a}, {b}] did not converge "
            f"(value={val:.6e}, abserr={abserr:.3e}, tolerance={tol:.3e})")
    return val
