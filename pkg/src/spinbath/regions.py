"""Reduced chi-squared maps over a (b, tau_c) grid and their intersections.

A scan evaluates the closed-form coherence at every grid pair against a
measured curve, accepts the pairs within ``delta`` of the minimum reduced
chi-squared (default 0.14, one standard deviation of a chi2_nu statistic
with ~100 degrees of freedom), and summarizes the accepted set by the
midpoint and half the extent along each axis.

Scans of the same curve model at several pulse fractions can be intersected
cell-wise; parameter pairs must then be consistent with every curve at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import check_positive
from .coherence import _alpha_split, _exponent_shape, coherence_closed_form
from .estimators import N_FITTED_PARAMS
from .noise import KHZ_TO_PER_US, NoiseParams
from .simulate import CoherenceCurve

__all__ = [
    "ChiSquaredRegionScan",
    "GridSpec",
    "RegionEstimate",
    "RegionMap",
    "coherence_model_grid",
    "intersect_regions",
    "scan_region",
]

#: Default acceptance offset above the minimum reduced chi-squared.
DEFAULT_DELTA = 0.14

#: Cap on elements of a model block held in memory at once during a scan.
_CHUNK_ELEMENTS = 20_000_000


@dataclass(frozen=True)
class GridSpec:
    """Rectangular scan grid: b in kHz, tau_c in us, linear spacing."""

    b_min: float
    b_max: float
    n_b: int
    tau_min: float
    tau_max: float
    n_tau: int

    def __post_init__(self) -> None:
        check_positive(self.b_min, "b_min")
        check_positive(self.tau_min, "tau_min")
        if self.b_max <= self.b_min or self.tau_max <= self.tau_min:
            raise ValueError("grid maxima must exceed minima")
        if self.n_b < 2 or self.n_tau < 2:
            raise ValueError("grids need at least 2 points per axis")

    @property
    def b_grid(self) -> np.ndarray:
        return np.linspace(self.b_min, self.b_max, self.n_b)

    @property
    def tau_grid(self) -> np.ndarray:
        return np.linspace(self.tau_min, self.tau_max, self.n_tau)

    @classmethod
    def from_params(cls, params: NoiseParams, lo: float = 0.2, hi: float = 5.0,
                    n: int = 200) -> "GridSpec":
        """Default grid spanning [lo, hi] x the initial guess on each axis."""
        return cls(b_min=lo * params.b, b_max=hi * params.b, n_b=n,
                   tau_min=lo * params.tau_c, tau_max=hi * params.tau_c, n_tau=n)


@dataclass(frozen=True)
class RegionEstimate:
    """Center and half-width of the accepted region along each axis."""

    b_center: float
    b_halfwidth: float
    tau_center: float
    tau_halfwidth: float

    def contains(self, params: NoiseParams) -> bool:
        return (abs(params.b - self.b_center) <= self.b_halfwidth
                and abs(params.tau_c - self.tau_center) <= self.tau_halfwidth)


@dataclass(frozen=True)
class RegionMap:
    """Chi-squared map, acceptance mask and derived estimate over a grid.

    For scan results ``mask[i, j] <=> chi2nu[i, j] <= threshold``. For
    intersections the mask is the cell-wise AND of the inputs while chi2nu
    keeps the worst case (element-wise max) for reporting, so the equivalence
    holds per input rather than against the stored threshold.
    """

    b_grid: np.ndarray = field(repr=False)
    tau_grid: np.ndarray = field(repr=False)
    chi2nu: np.ndarray = field(repr=False)
    threshold: float
    mask: np.ndarray = field(repr=False)
    estimate: Optional[RegionEstimate]
    delta: float
    alpha: Optional[float] = None
    empty: bool = False
    min_on_boundary: bool = False

    def accepted_points(self) -> tuple[np.ndarray, np.ndarray]:
        """(b, tau_c) coordinates of every accepted cell."""
        bi, ti = np.nonzero(self.mask)
        return self.b_grid[bi], self.tau_grid[ti]

    @property
    def n_accepted(self) -> int:
        return int(self.mask.sum())


def coherence_model_grid(alpha: float, times: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Closed-form coherence for every grid pair, shape (n_b, n_tau, n_times).

    Precompute this once per (alpha, time grid) when scanning many curves on
    a shared grid; pass it to :func:`scan_region` as ``model``.
    """
    lo, hi = _alpha_split(alpha)
    b = grid.b_grid[:, None, None] * KHZ_TO_PER_US
    tau = grid.tau_grid[None, :, None]
    x = np.asarray(times, dtype=float)[None, None, :] / tau
    return np.exp(-np.square(b * tau) * _exponent_shape(x, lo, hi))


def _estimate_from_mask(mask: np.ndarray, b_grid: np.ndarray,
                        tau_grid: np.ndarray) -> Optional[RegionEstimate]:
    if not mask.any():
        return None
    bi, ti = np.nonzero(mask)
    b_lo, b_hi = b_grid[bi.min()], b_grid[bi.max()]
    t_lo, t_hi = tau_grid[ti.min()], tau_grid[ti.max()]
    return RegionEstimate(
        b_center=0.5 * (b_lo + b_hi), b_halfwidth=0.5 * (b_hi - b_lo),
        tau_center=0.5 * (t_lo + t_hi), tau_halfwidth=0.5 * (t_hi - t_lo),
    )


def scan_region(curve: CoherenceCurve, grid: GridSpec, delta: float = DEFAULT_DELTA,
                model: Optional[np.ndarray] = None) -> RegionMap:
    """Reduced chi-squared scan of a curve over a (b, tau_c) grid.

    threshold = min(chi2nu) + delta; the accepted mask is never empty since
    the minimizing cell always qualifies. ``min_on_boundary`` flags a minimum
    on the grid edge (the grid probably does not contain the optimum).

    Parameters
    ----------
    model : ndarray, optional
        Precomputed output of :func:`coherence_model_grid` for this curve's
        alpha and time grid; avoids rebuilding the model when scanning many
        seeds on one grid.
    """
    check_positive(delta, "delta")
    if np.any(curve.sigmas <= 0.0):
        raise ValueError("scan requires strictly positive sigmas")
    nu = len(curve) - N_FITTED_PARAMS
    if nu <= 0:
        raise ValueError("curve has too few points for a two-parameter scan")

    n_b, n_tau, n_t = grid.n_b, grid.n_tau, len(curve)
    w = curve.values
    inv_sigma = 1.0 / curve.sigmas
    chi2 = np.empty((n_b, n_tau))
    if model is not None:
        if model.shape != (n_b, n_tau, n_t):
            raise ValueError(f"model shape {model.shape} does not match "
                             f"({n_b}, {n_tau}, {n_t})")
        resid = (w - model) * inv_sigma
        np.einsum("ijk,ijk->ij", resid, resid, out=chi2)
        chi2 /= nu
    else:
        lo, hi = _alpha_split(curve.alpha)
        rows_per_chunk = max(1, _CHUNK_ELEMENTS // (n_tau * n_t))
        tau = grid.tau_grid[None, :, None]
        x = curve.times[None, None, :] / tau
        b_grid = grid.b_grid
        g = _exponent_shape(x, lo, hi)  # (1, n_tau, n_t), shared across b rows
        for i0 in range(0, n_b, rows_per_chunk):
            i1 = min(i0 + rows_per_chunk, n_b)
            b = b_grid[i0:i1, None, None] * KHZ_TO_PER_US
            block = np.exp(-np.square(b * tau) * g)
            resid = (w - block) * inv_sigma
            chi2[i0:i1] = np.einsum("ijk,ijk->ij", resid, resid) / nu

    i_min, j_min = np.unravel_index(np.argmin(chi2), chi2.shape)
    threshold = float(chi2[i_min, j_min] + delta)
    mask = chi2 <= threshold
    return RegionMap(
        b_grid=grid.b_grid, tau_grid=grid.tau_grid, chi2nu=chi2,
        threshold=threshold, mask=mask,
        estimate=_estimate_from_mask(mask, grid.b_grid, grid.tau_grid),
        delta=float(delta), alpha=float(curve.alpha),
        empty=False,
        min_on_boundary=bool(i_min in (0, n_b - 1) or j_min in (0, n_tau - 1)),
    )


def intersect_regions(regions: Sequence[RegionMap]) -> RegionMap:
    """Cell-wise intersection of acceptance regions on identical grids.

    The result keeps the worst-case chi2nu (element-wise max) and the
    smallest input threshold for reporting. An empty intersection is returned
    as an explicit empty region (``empty=True``, no estimate), not raised.
    """
    if len(regions) == 0:
        raise ValueError("need at least one region")
    first = regions[0]
    if len(regions) == 1:
        return replace(first)
    for other in regions[1:]:
        if not (np.array_equal(first.b_grid, other.b_grid)
                and np.array_equal(first.tau_grid, other.tau_grid)):
            raise ValueError("regions must share identical (b, tau_c) grids")
    mask = first.mask.copy()
    chi2 = first.chi2nu.copy()
    for other in regions[1:]:
        mask &= other.mask
        np.maximum(chi2, other.chi2nu, out=chi2)
    estimate = _estimate_from_mask(mask, first.b_grid, first.tau_grid)
    return RegionMap(
        b_grid=first.b_grid, tau_grid=first.tau_grid, chi2nu=chi2,
        threshold=float(min(r.threshold for r in regions)), mask=mask,
        estimate=estimate, delta=float(min(r.delta for r in regions)),
        alpha=None, empty=estimate is None,
        min_on_boundary=any(r.min_on_boundary for r in regions),
    )


class ChiSquaredRegionScan(BaseEstimator):
    """Estimator-style front end to :func:`scan_region`.

    fit(T, w, sigma) scans the configured grid and exposes the region as
    ``region_`` with the usual fitted-attribute convention.
    """

    def __init__(self, alpha: float = 0.5, grid: Optional[GridSpec] = None,
                 delta: float = DEFAULT_DELTA):
        self.alpha = alpha
        self.grid = grid
        self.delta = delta

    def fit(self, T, w, sigma):
        if self.grid is None:
            raise ValueError("ChiSquaredRegionScan requires an explicit GridSpec")
        curve = CoherenceCurve(times=np.asarray(T, dtype=float),
                               values=np.asarray(w, dtype=float),
                               sigmas=np.asarray(sigma, dtype=float),
                               alpha=self.alpha)
        self.region_ = scan_region(curve, self.grid, delta=self.delta)
        self.estimate_ = self.region_.estimate
        return self

    def predict(self, T):
        """Closed-form coherence at the region center."""
        if not hasattr(self, "region_"):
            raise NotFittedError("ChiSquaredRegionScan is not fitted yet")
        est = self.region_.estimate
        return coherence_closed_form(np.asarray(T, dtype=float), self.alpha,
                                     NoiseParams(b=est.b_center, tau_c=est.tau_center))
