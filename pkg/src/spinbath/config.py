"""Pipeline configuration: a single versioned JSON document.

A config fully determines a pipeline run; its canonical resolved form is
hashed into every output file, so identical configs reproduce identical
bytes. Validation collects every failure before raising, so a bad config
reports all of its problems at once.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .io import config_hash
from .noise import CorrelationKind, NoiseParams
from .regions import DEFAULT_DELTA, GridSpec
from .simulate import MeasurementModel

__all__ = ["ConfigError", "PipelineConfig", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1

#: T2(alpha=0.5)/T2* ratios at or above this trip the feasibility warning
#: (pulse timing would need better than ~1/100 of the experiment duration).
FEASIBILITY_RATIO = 100.0


class ConfigError(ValueError):
    """Invalid pipeline configuration; collects every validation failure."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid config: " + "; ".join(self.errors))


def _fold_alpha(alpha: float) -> float:
    # round keeps 1 - 0.7 from surfacing as 0.30000000000000004
    return round(min(alpha, 1.0 - alpha), 12)


@dataclass
class PipelineConfig:
    """Everything a pipeline command needs, with defaults resolved.

    alphas are folded to min(alpha, 1-alpha) and deduplicated (the coherence
    is exactly symmetric under alpha <-> 1-alpha), with a warning when the
    input list changes.
    """

    noise: NoiseParams = field(default_factory=lambda: NoiseParams(b=5.0, tau_c=100.0))
    kind: CorrelationKind = CorrelationKind.EXPONENTIAL
    alphas: tuple[float, ...] = (0.5,)
    n_points: int = 100
    t_max: float | None = None
    decay_target: float = 3.0
    measurement: MeasurementModel = field(default_factory=MeasurementModel)
    n_avg_ladder: tuple[int, ...] | None = None
    grid: GridSpec | None = None
    delta: float = DEFAULT_DELTA
    seeds: tuple[int, ...] = (1,)
    out_dir: Path = Path("spinbath_out")
    write_csv: bool = True
    write_json: bool = True

    def __post_init__(self) -> None:
        folded: list[float] = []
        changed = False
        for a in self.alphas:
            fa = _fold_alpha(float(a))
            changed = changed or fa != a
            if any(abs(fa - x) <= 1e-12 for x in folded):
                changed = True
            else:
                folded.append(fa)
        if changed:
            warnings.warn(
                "alpha list folded to min(alpha, 1-alpha) and deduplicated: "
                f"{list(self.alphas)} -> {folded}", UserWarning, stacklevel=2)
        self.alphas = tuple(folded)
        self.seeds = tuple(int(s) for s in self.seeds)
        self.out_dir = Path(self.out_dir)
        if self.n_avg_ladder is not None:
            self.n_avg_ladder = tuple(int(n) for n in self.n_avg_ladder)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "PipelineConfig":
        errors: list[str] = []

        def grab(section: Mapping[str, Any], key: str, default, convert, label: str):
            try:
                value = section.get(key, default)
                return convert(value) if value is not None else None
            except Exception as exc:
                errors.append(f"{label}: {exc}")
                return None

        version = raw.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            errors.append(f"schema_version must be {SCHEMA_VERSION}, got {version}")

        noise_raw = raw.get("noise", {})
        b = grab(noise_raw, "b_khz", 5.0, float, "noise.b_khz")
        tau = grab(noise_raw, "tau_c_us", 100.0, float, "noise.tau_c_us")
        noise = None
        if b is not None and tau is not None:
            try:
                noise = NoiseParams(b=b, tau_c=tau)
            except Exception as exc:
                errors.append(f"noise: {exc}")
        kind = grab(noise_raw, "kind", "exponential", CorrelationKind.from_string,
                    "noise.kind")

        seq_raw = raw.get("sequence", {})
        alphas = grab(seq_raw, "alphas", [0.5],
                      lambda v: tuple(float(a) for a in v), "sequence.alphas")
        if alphas is not None:
            for a in alphas:
                if not 0.0 <= a <= 1.0:
                    errors.append(f"sequence.alphas: {a} outside [0, 1]")
        n_points = grab(seq_raw, "n_points", 100, int, "sequence.n_points")
        if n_points is not None and n_points < 10:
            errors.append(f"sequence.n_points must be >= 10, got {n_points}")
        t_max = grab(seq_raw, "t_max_us", None, float, "sequence.t_max_us")
        if t_max is not None and t_max <= 0:
            errors.append(f"sequence.t_max_us must be > 0, got {t_max}")
        decay_target = grab(seq_raw, "decay_target", 3.0, float, "sequence.decay_target")
        if decay_target is not None and decay_target <= 0:
            errors.append(f"sequence.decay_target must be > 0, got {decay_target}")

        meas_raw = raw.get("measurement", {})
        measurement = None
        ladder = None
        try:
            n_avg = meas_raw.get("n_avg", 1)
            if isinstance(n_avg, (list, tuple)):
                ladder = tuple(int(n) for n in n_avg)
                first = ladder[0]
            else:
                first = int(n_avg)
            measurement = MeasurementModel(
                sigma0=float(meas_raw.get("sigma0", 1.0)),
                noise_floor=float(meas_raw.get("noise_floor", 0.0)),
                n_avg=first,
            )
        except Exception as exc:
            errors.append(f"measurement: {exc}")

        scan_raw = raw.get("scan", {})
        grid = None
        if "grid" in scan_raw and scan_raw["grid"] is not None:
            try:
                g = scan_raw["grid"]
                grid = GridSpec(
                    b_min=float(g["b_min_khz"]), b_max=float(g["b_max_khz"]),
                    n_b=int(g.get("n_b", 200)),
                    tau_min=float(g["tau_min_us"]), tau_max=float(g["tau_max_us"]),
                    n_tau=int(g.get("n_tau", 200)),
                )
            except Exception as exc:
                errors.append(f"scan.grid: {exc}")
        delta = grab(scan_raw, "delta", DEFAULT_DELTA, float, "scan.delta")
        if delta is not None and delta <= 0:
            errors.append(f"scan.delta must be > 0, got {delta}")

        seeds = grab(raw, "seeds", [1], lambda v: tuple(int(s) for s in v), "seeds")
        if seeds is not None:
            for s in seeds:
                if not 0 <= s < 2 ** 32:
                    errors.append(f"seeds: {s} outside [0, 2^32)")

        out_raw = raw.get("output", {})
        out_dir = grab(out_raw, "dir", "spinbath_out", Path, "output.dir")
        write_csv = grab(out_raw, "csv", True, bool, "output.csv")
        write_json = grab(out_raw, "json", True, bool, "output.json")

        if errors:
            raise ConfigError(errors)
        return cls(noise=noise, kind=kind, alphas=alphas, n_points=n_points,
                   t_max=t_max, decay_target=decay_target, measurement=measurement,
                   n_avg_ladder=ladder, grid=grid, delta=delta, seeds=seeds,
                   out_dir=out_dir, write_csv=write_csv, write_json=write_json)

    @classmethod
    def from_json_file(cls, path: Path) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    # -- derived quantities --------------------------------------------------

    def resolved_grid(self) -> GridSpec:
        """Configured grid, or the default [0.2, 5] x noise-params grid."""
        return self.grid if self.grid is not None else GridSpec.from_params(self.noise)

    def n_avgs(self) -> tuple[int, ...]:
        return self.n_avg_ladder if self.n_avg_ladder else (self.measurement.n_avg,)

    def model_for(self, n_avg: int) -> MeasurementModel:
        return MeasurementModel(sigma0=self.measurement.sigma0,
                                noise_floor=self.measurement.noise_floor, n_avg=n_avg)

    def to_dict(self, include_output: bool = True) -> dict[str, Any]:
        """Canonical resolved form.

        The output section (destination and format flags) does not affect any
        number, so it is excluded from the config hash: re-running the same
        numerical configuration into a different directory reproduces
        byte-identical files.
        """
        grid = self.resolved_grid()
        out: dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "noise": {"b_khz": self.noise.b, "tau_c_us": self.noise.tau_c,
                      "kind": self.kind.value},
            "sequence": {"alphas": list(self.alphas), "n_points": self.n_points,
                         "t_max_us": self.t_max, "decay_target": self.decay_target},
            "measurement": {"sigma0": self.measurement.sigma0,
                            "noise_floor": self.measurement.noise_floor,
                            "n_avg": list(self.n_avgs()) if self.n_avg_ladder
                                     else self.measurement.n_avg},
            "scan": {"grid": {"b_min_khz": grid.b_min, "b_max_khz": grid.b_max,
                              "n_b": grid.n_b, "tau_min_us": grid.tau_min,
                              "tau_max_us": grid.tau_max, "n_tau": grid.n_tau},
                     "delta": self.delta},
            "seeds": list(self.seeds),
        }
        if include_output:
            out["output"] = {"dir": str(self.out_dir), "csv": self.write_csv,
                             "json": self.write_json}
        return out

    def hash(self) -> str:
        return config_hash(self.to_dict(include_output=False))
