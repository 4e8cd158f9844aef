"""Invariant checks shared by the property suite and the acceptance gate.

Each check returns (ok, detail) so the acceptance module can bundle them into
a single reported line while the property tests assert them individually.
All stochastic checks run on fixed seeds recorded here.
"""

import numpy as np

from spinbath import (
    CorrelationKind,
    GridSpec,
    MeasurementModel,
    NoiseParams,
    SequenceSpec,
    build_time_grid,
    chi2_nu,
    coherence_closed_form,
    coherence_model_grid,
    intersect_regions,
    lorentzian_psd,
    psd_from_correlation,
    scan_region,
    simulate_curve,
)

HEADLINE = NoiseParams(b=5.0, tau_c=100.0)


def check_normalization():
    params_list = [HEADLINE, NoiseParams(b=1.0, tau_c=10.0), NoiseParams(b=20.0, tau_c=500.0)]
    for params in params_list:
        for alpha in np.linspace(0.0, 1.0, 11):
            if coherence_closed_form(0.0, float(alpha), params) != 1.0:
                return False, f"W(0, {alpha}) != 1 for {params}"
    return True, "W(0, alpha) = 1 exactly"


def check_alpha_symmetry():
    T = np.linspace(1.0, 3000.0, 64)
    for k in range(0, 33):
        alpha = k / 64.0  # dyadic: both alpha and 1-alpha exactly representable
        a = coherence_closed_form(T, alpha, HEADLINE)
        b = coherence_closed_form(T, 1.0 - alpha, HEADLINE)
        if not np.array_equal(a, b):
            return False, f"dyadic alpha symmetry broken at {alpha}"
    rng = np.random.default_rng(42)
    for alpha in rng.uniform(0.0, 1.0, 50):
        a = coherence_closed_form(T, float(alpha), HEADLINE)
        b = coherence_closed_form(T, 1.0 - float(alpha), HEADLINE)
        if not np.allclose(a, b, rtol=5e-15, atol=0):
            return False, f"alpha symmetry beyond float fuzz at {alpha}"
    return True, "alpha <-> 1-alpha symmetry (bitwise on dyadic fractions)"


def check_monotone_decay():
    T = np.linspace(0.0, 8000.0, 4000)
    for params in (HEADLINE, NoiseParams(b=1.0, tau_c=1000.0), NoiseParams(b=20.0, tau_c=10.0)):
        for alpha in (0.0, 0.1, 0.3, 0.5):
            w = coherence_closed_form(T, alpha, params)
            if not np.all(np.diff(w) <= 0.0):
                return False, f"non-monotone decay at alpha={alpha}, {params}"
    return True, "W non-increasing in T on dense grids"


def check_echo_ge_fid():
    T = np.linspace(1.0, 5000.0, 1000)
    for params in (HEADLINE, NoiseParams(b=2.0, tau_c=300.0)):
        if not np.all(coherence_closed_form(T, 0.5, params)
                      >= coherence_closed_form(T, 0.0, params)):
            return False, f"echo fell below FID for {params}"
    return True, "refocusing helps: W(T, 1/2) >= W(T, 0)"


def check_wiener_khinchin():
    # numeric transform of the exponential kernel against the closed
    # Lorentzian shape (the plain two-sided transform is 2*pi of it)
    omega = np.linspace(0.0, 20.0 / HEADLINE.tau_c, 21)
    numeric = psd_from_correlation(HEADLINE, CorrelationKind.EXPONENTIAL, omega)
    closed = 2.0 * np.pi * lorentzian_psd(omega, HEADLINE)
    rel = np.max(np.abs(numeric / closed - 1.0))
    return rel <= 1e-8, f"max relative transform mismatch {rel:.2e} (<= 1e-8)"


def check_shot_noise_scaling():
    times = np.linspace(1.0, 1500.0, 10_000)
    seq = SequenceSpec(alpha=0.5, times=times)
    exact = coherence_closed_form(times, 0.5, HEADLINE)
    worst = 0.0
    for i, n_avg in enumerate((25, 100, 400, 10_000, 40_000, 250_000)):
        curve = simulate_curve(seq, HEADLINE,
                               MeasurementModel(sigma0=1.0, noise_floor=0.0, n_avg=n_avg),
                               seed=300 + i)
        ratio = np.std(curve.values - exact) * np.sqrt(n_avg)
        worst = max(worst, abs(ratio - 1.0))
        if abs(ratio - 1.0) >= 0.05:
            return False, f"1/sqrt(N) scaling off by {ratio - 1.0:+.3f} at N={n_avg}"
    return True, f"residual spread follows 1/sqrt(N) (worst dev {worst:.3f})"


def check_floor_convergence():
    times = np.linspace(1.0, 1500.0, 100_000)
    seq = SequenceSpec(alpha=0.5, times=times)
    exact = coherence_closed_form(times, 0.5, HEADLINE)
    for i, n_avg in enumerate((40_000, 250_000)):
        curve = simulate_curve(seq, HEADLINE,
                               MeasurementModel(sigma0=1.0, noise_floor=0.05, n_avg=n_avg),
                               seed=400 + i)
        dev = abs(np.std(curve.values - exact) - 0.05) / 0.05
        if dev >= 0.01:
            return False, f"floor residual off by {dev:.3%} at N={n_avg}"
    return True, "residual spread pinned to the 5% floor beyond 4e4 averages"


def check_chi2nu_expectation():
    seq = SequenceSpec(alpha=0.5, times=build_time_grid(HEADLINE, 0.5))
    model = MeasurementModel(sigma0=1.0, noise_floor=0.05, n_avg=250_000)
    values = [chi2_nu(simulate_curve(seq, HEADLINE, model, seed=s), HEADLINE)
              for s in range(1000)]
    mean = float(np.mean(values))
    target = 100.0 / 98.0
    return abs(mean - target) < 0.015, \
        f"mean chi2_nu {mean:.4f} vs n/nu = {target:.4f} over 1000 draws"


def check_region_anticorrelation():
    # shot-noise-only echo scans: the accepted set tilts to negative b-tau_c
    # correlation (denser baths couple harder but forget faster)
    grid = GridSpec(b_min=1.0, b_max=25.0, n_b=120, tau_min=20.0, tau_max=500.0,
                    n_tau=120)
    times = build_time_grid(HEADLINE, 0.5)
    seq = SequenceSpec(alpha=0.5, times=times)
    model_grid = coherence_model_grid(0.5, times, grid)
    corrs = []
    for seed in (1, 2, 3):
        for n_avg in (100, 400, 10_000):
            curve = simulate_curve(seq, HEADLINE,
                                   MeasurementModel(1.0, 0.0, n_avg), seed)
            region = scan_region(curve, grid, model=model_grid)
            b_pts, tau_pts = region.accepted_points()
            if b_pts.size < 3:
                continue
            corrs.append(float(np.corrcoef(b_pts, tau_pts)[0, 1]))
    ok = bool(corrs) and all(c < 0.0 for c in corrs)
    return ok, f"accepted-set correlations all negative (range {min(corrs):+.2f}..{max(corrs):+.2f})"


def check_region_shrinkage():
    grid = GridSpec(b_min=1.0, b_max=25.0, n_b=120, tau_min=20.0, tau_max=500.0,
                    n_tau=120)
    times = build_time_grid(HEADLINE, 0.5)
    seq = SequenceSpec(alpha=0.5, times=times)
    model_grid = coherence_model_grid(0.5, times, grid)
    for seed in (1, 2, 3):
        cells = []
        for n_avg in (25, 100, 400, 10_000, 40_000, 250_000):
            curve = simulate_curve(seq, HEADLINE, MeasurementModel(1.0, 0.0, n_avg), seed)
            cells.append(scan_region(curve, grid, model=model_grid).n_accepted)
        if not all(a >= b for a, b in zip(cells, cells[1:])):
            return False, f"acceptance count not shrinking for seed {seed}: {cells}"
    return True, "accepted-cell counts shrink monotonically along the averaging ladder"


def check_intersection_algebra():
    grid = GridSpec(b_min=1.0, b_max=9.0, n_b=60, tau_min=25.0, tau_max=500.0, n_tau=60)
    regions = []
    for alpha in (0.0, 0.3, 0.5):
        times = build_time_grid(HEADLINE, alpha)
        curve = simulate_curve(SequenceSpec(alpha=alpha, times=times), HEADLINE,
                               MeasurementModel(1.0, 0.05, 250_000), seed=5)
        regions.append(scan_region(curve, grid))
    combined = intersect_regions(regions)
    for region in regions:
        if not np.all(~combined.mask | region.mask):
            return False, "intersection escaped an input region"
    self_both = intersect_regions([regions[0], regions[0]])
    if not np.array_equal(self_both.mask, regions[0].mask):
        return False, "self-intersection not idempotent"
    return True, "intersection is a subset of every input and idempotent"


def check_region_coverage():
    # the true pair stays inside the single-echo acceptance region for at
    # least 70% of realizations at the floor-saturated settings
    grid = GridSpec(b_min=3.0, b_max=7.0, n_b=150, tau_min=30.0, tau_max=450.0,
                    n_tau=150)
    times = np.linspace(6.0, 600.0, 100)
    seq = SequenceSpec(alpha=0.5, times=times)
    model_grid = coherence_model_grid(0.5, times, grid)
    model = MeasurementModel(sigma0=1.0, noise_floor=0.05, n_avg=250_000)
    i = int(np.argmin(np.abs(grid.b_grid - 5.0)))
    j = int(np.argmin(np.abs(grid.tau_grid - 100.0)))
    hits = 0
    n_seeds = 50
    for seed in range(1, n_seeds + 1):
        curve = simulate_curve(seq, HEADLINE, model, seed)
        region = scan_region(curve, grid, model=model_grid)
        hits += bool(region.mask[i, j])
    return hits >= 0.7 * n_seeds, f"true pair inside region in {hits}/{n_seeds} seeds (>= 70% required)"


ALL_CHECKS = [
    check_normalization,
    check_alpha_symmetry,
    check_monotone_decay,
    check_echo_ge_fid,
    check_wiener_khinchin,
    check_shot_noise_scaling,
    check_floor_convergence,
    check_chi2nu_expectation,
    check_region_anticorrelation,
    check_region_shrinkage,
    check_intersection_algebra,
    check_region_coverage,
]
