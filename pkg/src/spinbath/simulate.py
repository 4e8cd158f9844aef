"""Synthetic noisy coherence measurements with reproducible seeding.

The measurement model is additive Gaussian noise on the coherence value with
a per-point standard deviation

    sigma_eff = sqrt(sigma0^2 / n_avg + r^2)

combining shot noise (reduced by averaging) with a signal-proportional
technical noise floor ``r`` that averaging cannot remove. Values are not
clipped to [0, 1], so residuals remain exactly Gaussian and chi-squared
statistics are textbook-valid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import brentq

from ._validation import (
    as_float_array,
    check_nonnegative,
    check_positive,
    check_strictly_increasing,
    check_unit_interval,
)
from .coherence import SequenceSpec, coherence_closed_form, log_coherence_closed_form
from .noise import NoiseParams

__all__ = [
    "CoherenceCurve",
    "MeasurementModel",
    "build_time_grid",
    "effective_sigma",
    "simulate_curve",
]

#: Resolution with which alpha is folded into the RNG key (1e-4 in alpha).
_ALPHA_KEY_SCALE = 10_000


@dataclass(frozen=True)
class MeasurementModel:
    """Shot-noise scale, noise-floor fraction and number of averages.

    sigma0 is the relative noise of a single average (1.0 means a
    signal-to-noise ratio of 1 per shot), noise_floor is the fraction r of
    the signal contributed by drifts, n_avg the number of averages.
    """

    sigma0: float = 1.0
    noise_floor: float = 0.0
    n_avg: int = 1

    def __post_init__(self) -> None:
        check_nonnegative(self.sigma0, "sigma0")
        check_nonnegative(self.noise_floor, "noise_floor")
        if int(self.n_avg) != self.n_avg or self.n_avg < 1:
            raise ValueError(f"n_avg must be a positive integer, got {self.n_avg}")
        object.__setattr__(self, "n_avg", int(self.n_avg))

    @property
    def sigma_eff(self) -> float:
        """Effective per-point standard deviation sqrt(sigma0^2/n_avg + r^2)."""
        return float(np.hypot(self.sigma0 / np.sqrt(self.n_avg), self.noise_floor))


def effective_sigma(model: MeasurementModel) -> float:
    """Per-point standard deviation of the measurement model."""
    return model.sigma_eff


@dataclass(frozen=True)
class CoherenceCurve:
    """Measured or simulated coherence values with per-point uncertainties.

    sigmas may be all zero only for exact (noiseless) curves; chi-squared
    evaluation requires strictly positive sigmas.
    """

    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    sigmas: np.ndarray = field(repr=False)
    alpha: float = 0.5
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        times = as_float_array(self.times, "times")
        values = as_float_array(self.values, "values")
        sigmas = as_float_array(self.sigmas, "sigmas")
        if not (times.size == values.size == sigmas.size):
            raise ValueError("times, values and sigmas must have equal length")
        if times.size and times[0] <= 0.0:
            raise ValueError("times must be positive")
        check_strictly_increasing(times, "times")
        if np.any(sigmas < 0.0):
            raise ValueError("sigmas must be >= 0")
        check_unit_interval(self.alpha, "alpha")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sigmas", sigmas)

    def __len__(self) -> int:
        return self.times.size


def build_time_grid(params: NoiseParams, alpha: float, n_points: int = 100,
                    decay_target: float = 3.0, t_max: float | None = None) -> np.ndarray:
    """Linearly spaced measurement times from T_max/n_points to T_max.

    By default T_max is the time at which the closed-form coherence first
    drops to ``exp(-decay_target)`` (bisection on the monotone decay). Pass
    ``t_max`` to override the window explicitly.
    """
    if n_points < 10:
        raise ValueError(f"n_points must be >= 10, got {n_points}")
    if t_max is None:
        check_positive(decay_target, "decay_target")

        def excess(T: float) -> float:
            return -log_coherence_closed_form(T, alpha, params) - decay_target

        hi = params.tau_c
        for _ in range(200):
            if excess(hi) > 0.0:
                break
            hi *= 2.0
        else:
            raise RuntimeError("failed to bracket the decay target")
        t_max = brentq(excess, 0.0, hi, xtol=1e-12, rtol=1e-14)
    t_max = check_positive(t_max, "t_max")
    return np.linspace(t_max / n_points, t_max, n_points)


def _noise_stream(seed: int, alpha: float, n: int) -> np.ndarray:
    """Unit-variance Gaussian noise, deterministic per (seed, alpha).

    Counter-based Philox generator keyed by seed and the alpha fraction, so
    curves at different alpha (or seeds) use independent streams and the i-th
    draw is reproducible regardless of how many curves were generated before.
    The number of averages is deliberately not part of the key: averaging
    ladders on one seed rescale the same underlying draws.
    """
    if int(seed) != seed or not 0 <= seed < 2 ** 32:
        raise ValueError(f"seed must be an integer in [0, 2^32), got {seed}")
    alpha_key = int(round(alpha * _ALPHA_KEY_SCALE))
    key = (int(seed) << 32) ^ alpha_key
    gen = np.random.Generator(np.random.Philox(key=key))
    return gen.standard_normal(n)


def simulate_curve(seq: SequenceSpec, params: NoiseParams, model: MeasurementModel,
                   seed: int) -> CoherenceCurve:
    """Simulate one noisy coherence curve.

    Values are ``W_closed(T_i) + eps_i`` with eps_i i.i.d. Gaussian of
    standard deviation ``model.sigma_eff`` (no clipping). Fully determined by
    the inputs and the seed.
    """
    sigma = model.sigma_eff
    exact = coherence_closed_form(seq.times, seq.alpha, params)
    noise = _noise_stream(seed, seq.alpha, len(seq))
    values = exact + sigma * noise
    meta = {
        "seed": int(seed),
        "alpha": float(seq.alpha),
        "b_khz": params.b,
        "tau_c_us": params.tau_c,
        "sigma0": model.sigma0,
        "noise_floor": model.noise_floor,
        "n_avg": model.n_avg,
        "sigma_eff": sigma,
        "rng": "philox(seed<<32 ^ round(alpha*1e4))",
    }
    return CoherenceCurve(times=seq.times, values=values,
                          sigmas=np.full(len(seq), sigma), alpha=seq.alpha, meta=meta)
