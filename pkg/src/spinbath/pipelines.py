"""Reproducible pipeline commands behind the CLI.

Each command turns a :class:`~spinbath.config.PipelineConfig` into data files
whose bytes depend only on the config (hash embedded in every file). The
four commands regenerate the data behind the reference figures: exact curves
with their slow-noise misfits, chi-squared region scans over averaging
ladders, multi-alpha region intersections, and the slow-noise comparison
table.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.optimize import brentq

from .config import FEASIBILITY_RATIO, ConfigError, PipelineConfig
from .coherence import (
    SequenceSpec,
    coherence_closed_form,
    coherence_time_oracle,
    slow_noise_t2,
    slow_noise_t2star,
)
from .estimators import (
    ClosedFormCoherenceFit,
    StretchedExponentialFit,
    slow_noise_params,
)
from .io import (
    curve_to_csv,
    curve_to_json,
    format_float,
    region_to_csv,
    region_to_json,
    write_json,
    write_table,
)
from .noise import CorrelationKind
from .regions import RegionMap, coherence_model_grid, intersect_regions, scan_region
from .simulate import CoherenceCurve, build_time_grid, simulate_curve

__all__ = ["PipelineResult", "run_curve", "run_intersect", "run_scan", "run_slownoise"]


@dataclass
class PipelineResult:
    """Written paths plus status flags the CLI maps to exit codes."""

    paths: list[Path] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)
    empty_intersection: bool = False
    feasibility_warning: bool = False


def _feasibility_check(cfg: PipelineConfig) -> bool:
    """Warn when the echo/FID time-scale ratio makes pulse timing impractical."""
    ratio = slow_noise_t2(cfg.noise) / slow_noise_t2star(cfg.noise)
    if ratio >= FEASIBILITY_RATIO:
        warnings.warn(
            f"T2(alpha=0.5)/T2* = {ratio:.1f} >= {FEASIBILITY_RATIO:g}: pulse "
            "placement would need timing resolution finer than ~1/100 of the "
            "experiment duration", UserWarning, stacklevel=3)
        return True
    return False


def _times_for(cfg: PipelineConfig, alpha: float) -> np.ndarray:
    if cfg.kind is CorrelationKind.GAUSSIAN and cfg.t_max is None:
        return _gaussian_time_grid(cfg, alpha)
    return build_time_grid(cfg.noise, alpha, n_points=cfg.n_points,
                           decay_target=cfg.decay_target, t_max=cfg.t_max)


def _gaussian_time_grid(cfg: PipelineConfig, alpha: float) -> np.ndarray:
    # Same decay-target window rule, but on the Gaussian-kernel coherence,
    # which only the quadrature evaluator provides.
    def excess(T: float) -> float:
        w = coherence_time_oracle(T, alpha, cfg.noise, CorrelationKind.GAUSSIAN)
        return -np.log(w) - cfg.decay_target

    hi = cfg.noise.tau_c
    for _ in range(200):
        if excess(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise RuntimeError("failed to bracket the decay target")
    t_max = brentq(excess, 1e-9, hi, xtol=1e-6, rtol=1e-10)
    return np.linspace(t_max / cfg.n_points, t_max, cfg.n_points)


def _exact_values(cfg: PipelineConfig, alpha: float, times: np.ndarray) -> np.ndarray:
    if cfg.kind is CorrelationKind.GAUSSIAN:
        return np.array([coherence_time_oracle(t, alpha, cfg.noise,
                                               CorrelationKind.GAUSSIAN)
                         for t in times])
    return coherence_closed_form(times, alpha, cfg.noise)


def _require_exponential(cfg: PipelineConfig, command: str) -> None:
    if cfg.kind is not CorrelationKind.EXPONENTIAL:
        raise ConfigError([
            f"noise.kind: the {command} pipeline fits the closed-form model, "
            "which exists for the exponential correlation kind only"])


def _alpha_tag(alpha: float) -> str:
    return format_float(alpha).replace(".", "p")


def run_curve(cfg: PipelineConfig) -> PipelineResult:
    """Coherence curves with their stretched-exponential fits and residuals.

    The exponential kind uses the closed form; the Gaussian kind uses the
    time-domain quadrature evaluator, including for the window rule.
    """
    result = PipelineResult(feasibility_warning=_feasibility_check(cfg))
    chash = cfg.hash()
    for alpha in cfg.alphas:
        times = _times_for(cfg, alpha)
        exact = _exact_values(cfg, alpha, times)
        fit = StretchedExponentialFit().fit(times, exact)
        fitted = fit.predict(times)
        comments = {"config_sha256": chash, "alpha": format_float(alpha),
                    "t_char_us": format_float(fit.t_char_), "p": format_float(fit.p_)}
        if cfg.write_csv:
            path = cfg.out_dir / f"curve_alpha{_alpha_tag(alpha)}.csv"
            write_table(path, comments, ["T_us", "W_exact", "W_stretched_fit", "residual"],
                        [times, exact, fitted, exact - fitted])
            result.paths.append(path)
        if cfg.write_json:
            path = cfg.out_dir / f"curve_alpha{_alpha_tag(alpha)}.json"
            write_json(path, {
                "schema_version": 1, "kind": "exact_curve", "config_sha256": chash,
                "correlation_kind": cfg.kind.value,
                "alpha": alpha, "times_us": times, "w_exact": exact,
                "stretched_fit": {"t_char_us": fit.t_char_, "p": fit.p_,
                                  "sigma_t_char_us": fit.sigma_t_char_,
                                  "sigma_p": fit.sigma_p_},
            })
            result.paths.append(path)
    return result


def _scan_one(cfg: PipelineConfig, alpha: float, seed: int, n_avg: int,
              times: np.ndarray, model: np.ndarray | None) -> tuple[CoherenceCurve, RegionMap]:
    seq = SequenceSpec(alpha=alpha, times=times)
    curve = simulate_curve(seq, cfg.noise, cfg.model_for(n_avg), seed)
    region = scan_region(curve, cfg.resolved_grid(), delta=cfg.delta, model=model)
    return curve, region


def _estimate_row(region: RegionMap) -> dict[str, Any]:
    est = region.estimate
    return {
        "empty": region.empty,
        "min_on_boundary": region.min_on_boundary,
        "n_accepted": region.n_accepted,
        "chi2nu_min": region.threshold - region.delta,
        "b_center_khz": None if est is None else est.b_center,
        "b_halfwidth_khz": None if est is None else est.b_halfwidth,
        "tau_center_us": None if est is None else est.tau_center,
        "tau_halfwidth_us": None if est is None else est.tau_halfwidth,
    }


def run_scan(cfg: PipelineConfig) -> PipelineResult:
    """Simulate and scan every (alpha, seed, n_avg) combination."""
    _require_exponential(cfg, "scan")
    result = PipelineResult(feasibility_warning=_feasibility_check(cfg))
    chash = cfg.hash()
    grid = cfg.resolved_grid()
    rows: list[dict[str, Any]] = []
    for alpha in cfg.alphas:
        times = _times_for(cfg, alpha)
        model = coherence_model_grid(alpha, times, grid)
        for seed in cfg.seeds:
            for n_avg in cfg.n_avgs():
                curve, region = _scan_one(cfg, alpha, seed, n_avg, times, model)
                tag = f"alpha{_alpha_tag(alpha)}_seed{seed}_navg{n_avg}"
                comments = {"config_sha256": chash, "alpha": format_float(alpha),
                            "seed": seed, "n_avg": n_avg}
                if cfg.write_csv:
                    path = cfg.out_dir / f"sim_curve_{tag}.csv"
                    curve_to_csv(curve, path, comments)
                    result.paths.append(path)
                    path = cfg.out_dir / f"scan_{tag}.csv"
                    region_to_csv(region, path, comments)
                    result.paths.append(path)
                if cfg.write_json:
                    path = cfg.out_dir / f"sim_curve_{tag}.json"
                    curve_to_json(curve, path, {"config_sha256": chash})
                    result.paths.append(path)
                    path = cfg.out_dir / f"region_{tag}.json"
                    region_to_json(region, path, {"config_sha256": chash,
                                                  "seed": seed, "n_avg": n_avg})
                    result.paths.append(path)
                row = {"alpha": alpha, "seed": seed, "n_avg": n_avg}
                row.update(_estimate_row(region))
                rows.append(row)
    summary = {"schema_version": 1, "kind": "scan_summary", "config_sha256": chash,
               "config": cfg.to_dict(include_output=False), "rows": rows,
               "feasibility_warning": result.feasibility_warning}
    path = cfg.out_dir / "scan_summary.json"
    write_json(path, summary)
    result.paths.append(path)
    result.summary = summary
    return result


def run_intersect(cfg: PipelineConfig) -> PipelineResult:
    """Per-alpha scans on a shared grid, intersected seed by seed.

    Also records the echo-only (largest alpha) estimate and the improvement
    ratios of the intersection over it: the tau_c-axis ratio (the axis whose
    uncertainty the noise floor saturates) and the geometric mean over both
    axes.
    """
    _require_exponential(cfg, "intersect")
    result = PipelineResult(feasibility_warning=_feasibility_check(cfg))
    chash = cfg.hash()
    grid = cfg.resolved_grid()
    echo_alpha = max(cfg.alphas)
    n_avg = cfg.measurement.n_avg

    models = {}
    times = {}
    for alpha in cfg.alphas:
        times[alpha] = _times_for(cfg, alpha)
        models[alpha] = coherence_model_grid(alpha, times[alpha], grid)

    rows: list[dict[str, Any]] = []
    for seed in cfg.seeds:
        regions = {}
        for alpha in cfg.alphas:
            _, regions[alpha] = _scan_one(cfg, alpha, seed, n_avg,
                                          times[alpha], models[alpha])
            if cfg.write_json:
                path = cfg.out_dir / f"region_alpha{_alpha_tag(alpha)}_seed{seed}.json"
                region_to_json(regions[alpha], path,
                               {"config_sha256": chash, "seed": seed, "n_avg": n_avg})
                result.paths.append(path)
        combined = intersect_regions([regions[a] for a in cfg.alphas])
        if cfg.write_json:
            path = cfg.out_dir / f"intersection_seed{seed}.json"
            region_to_json(combined, path, {"config_sha256": chash, "seed": seed,
                                            "n_avg": n_avg,
                                            "alphas": list(cfg.alphas)})
            result.paths.append(path)
        row: dict[str, Any] = {"seed": seed}
        row.update({f"intersect_{k}": v for k, v in _estimate_row(combined).items()})
        row.update({f"echo_{k}": v for k, v in _estimate_row(regions[echo_alpha]).items()})
        if combined.empty:
            result.empty_intersection = True
            row["ratio_tau"] = None
            row["ratio_geomean"] = None
        else:
            e, c = regions[echo_alpha].estimate, combined.estimate
            ratio_tau = e.tau_halfwidth / c.tau_halfwidth if c.tau_halfwidth > 0 else np.inf
            ratio_b = e.b_halfwidth / c.b_halfwidth if c.b_halfwidth > 0 else np.inf
            row["ratio_tau"] = float(ratio_tau)
            row["ratio_geomean"] = float(np.sqrt(ratio_tau * ratio_b))
        rows.append(row)

    finite_tau = [r["ratio_tau"] for r in rows if r["ratio_tau"] is not None]
    nonempty = [r for r in rows if not r["intersect_empty"]]

    def _median_over_seeds(key: str):
        return float(np.median([r[key] for r in nonempty])) if nonempty else None

    summary = {
        "schema_version": 1, "kind": "intersect_summary", "config_sha256": chash,
        "config": cfg.to_dict(include_output=False), "echo_alpha": echo_alpha, "rows": rows,
        "final_estimate": {
            "b_center_khz": _median_over_seeds("intersect_b_center_khz"),
            "b_halfwidth_khz": _median_over_seeds("intersect_b_halfwidth_khz"),
            "tau_center_us": _median_over_seeds("intersect_tau_center_us"),
            "tau_halfwidth_us": _median_over_seeds("intersect_tau_halfwidth_us"),
            "statistic": "median over seeds",
        },
        "median_ratio_tau": float(np.median(finite_tau)) if finite_tau else None,
        "any_empty_intersection": result.empty_intersection,
        "feasibility_warning": result.feasibility_warning,
    }
    path = cfg.out_dir / "intersect_summary.json"
    write_json(path, summary)
    result.paths.append(path)
    result.summary = summary
    return result


def run_slownoise(cfg: PipelineConfig) -> PipelineResult:
    """Slow-noise pipeline versus explicit fitting on noiseless exact curves."""
    _require_exponential(cfg, "slownoise")
    result = PipelineResult(feasibility_warning=_feasibility_check(cfg))
    chash = cfg.hash()
    params = cfg.noise

    stretched = {}
    explicit = {}
    for alpha in (0.5, 0.0):
        t = build_time_grid(params, alpha, n_points=cfg.n_points,
                            decay_target=cfg.decay_target, t_max=cfg.t_max)
        w = coherence_closed_form(t, alpha, params)
        stretched[alpha] = StretchedExponentialFit().fit(t, w).result_
        explicit[alpha] = ClosedFormCoherenceFit(alpha=alpha, init=(params.b, params.tau_c)) \
            .fit(t, w).result_
    slow = slow_noise_params(stretched[0.5], stretched[0.0])

    tbl = {
        "true": {"b_khz": params.b, "tau_c_us": params.tau_c},
        "slow_noise": {"b_khz": slow.params.b, "sigma_b_khz": slow.sigma_b,
                       "tau_c_us": slow.params.tau_c, "sigma_tau_us": slow.sigma_tau,
                       "echo_fit": {"t_char_us": stretched[0.5].t_char,
                                    "p": stretched[0.5].p},
                       "fid_fit": {"t_char_us": stretched[0.0].t_char,
                                   "p": stretched[0.0].p},
                       "slow_noise_t2_us": slow_noise_t2(params),
                       "slow_noise_t2star_us": slow_noise_t2star(params)},
        "explicit_fit": {
            "echo": {"b_khz": explicit[0.5].params.b,
                     "tau_c_us": explicit[0.5].params.tau_c,
                     "sigma_b_khz": explicit[0.5].sigma_b,
                     "sigma_tau_us": explicit[0.5].sigma_tau},
            "fid": {"b_khz": explicit[0.0].params.b,
                    "tau_c_us": explicit[0.0].params.tau_c,
                    "sigma_b_khz": explicit[0.0].sigma_b,
                    "sigma_tau_us": explicit[0.0].sigma_tau},
        },
    }
    summary = {"schema_version": 1, "kind": "slow_noise_comparison",
               "config_sha256": chash, "config": cfg.to_dict(include_output=False),
               "comparison": tbl,
               "feasibility_warning": result.feasibility_warning}
    path = cfg.out_dir / "slownoise_comparison.json"
    write_json(path, summary)
    result.paths.append(path)

    if cfg.write_csv:
        rows = [
            ("true", params.b, 0.0, params.tau_c, 0.0),
            ("slow_noise", slow.params.b, slow.sigma_b, slow.params.tau_c, slow.sigma_tau),
            ("explicit_echo", explicit[0.5].params.b, explicit[0.5].sigma_b,
             explicit[0.5].params.tau_c, explicit[0.5].sigma_tau),
            ("explicit_fid", explicit[0.0].params.b, explicit[0.0].sigma_b,
             explicit[0.0].params.tau_c, explicit[0.0].sigma_tau),
        ]
        path = cfg.out_dir / "slownoise_comparison.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# config_sha256={chash}\n")
            fh.write("method,b_khz,sigma_b_khz,tau_c_us,sigma_tau_us\n")
            for name, b, sb, tau, stau in rows:
                fh.write(",".join([name] + [format_float(v) for v in (b, sb, tau, stau)]) + "\n")
        result.paths.append(path)
    result.summary = summary
    return result
