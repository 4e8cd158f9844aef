"""Deterministic CSV and JSON emission.

All numeric output uses 9 significant digits with '.' as the decimal
separator and LF line endings, so re-running a pipeline with the same config
reproduces files byte for byte. Every file carries the config hash and
seed(s) that produced it.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .regions import RegionEstimate, RegionMap
from .simulate import CoherenceCurve

__all__ = [
    "canonical_json",
    "config_hash",
    "curve_to_csv",
    "curve_to_json",
    "format_float",
    "mask_from_rle",
    "mask_to_rle",
    "region_to_csv",
    "region_to_json",
    "write_json",
    "write_table",
]

_FLOAT_FMT = "%.9g"


def format_float(x: float) -> str:
    """Decimal text with 9 significant digits ('%.9g')."""
    return _FLOAT_FMT % float(x)


def canonical_json(obj: Any) -> str:
    """JSON with sorted keys and fixed separators; floats at 9 significant digits."""
    return json.dumps(_round_floats(obj), sort_keys=True, separators=(",", ":"),
                      allow_nan=False)


def _round_floats(obj: Any) -> Any:
    if isinstance(obj, Mapping):
        return {str(k): _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(format_float(float(obj)))
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _round_floats(obj.tolist())
    return obj


def config_hash(config_dict: Mapping[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a (resolved) config."""
    return hashlib.sha256(canonical_json(config_dict).encode("utf-8")).hexdigest()


def write_table(path: Path, comments: Mapping[str, Any], header: Sequence[str],
                columns: Sequence[np.ndarray]) -> None:
    """Write '# key=value' provenance lines followed by CSV columns (LF endings)."""
    columns = [np.asarray(c) for c in columns]
    n = columns[0].size if columns else 0
    if any(c.size != n for c in columns):
        raise ValueError("all columns must have equal length")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in comments.items():
            fh.write(f"# {key}={value}\n")
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fh.write(",".join(format_float(c[i]) for c in columns) + "\n")


def write_json(path: Path, payload: Mapping[str, Any]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(canonical_json(payload))
        fh.write("\n")


def curve_to_csv(curve: CoherenceCurve, path: Path,
                 comments: Mapping[str, Any] | None = None) -> None:
    """Columns T_us, W, sigma plus provenance comments."""
    base = dict(comments or {})
    base.setdefault("alpha", format_float(curve.alpha))
    if "seed" in curve.meta:
        base.setdefault("seed", curve.meta["seed"])
    write_table(path, base, ["T_us", "W", "sigma"],
                [curve.times, curve.values, curve.sigmas])


def curve_to_json(curve: CoherenceCurve, path: Path,
                  extra: Mapping[str, Any] | None = None) -> None:
    """Full provenance record: grid, values, sigmas, alpha, meta."""
    payload: dict[str, Any] = {
        "schema_version": 1,
        "kind": "coherence_curve",
        "alpha": curve.alpha,
        "times_us": curve.times,
        "values": curve.values,
        "sigmas": curve.sigmas,
        "meta": dict(curve.meta),
    }
    if extra:
        payload.update(extra)
    write_json(path, payload)


def mask_to_rle(mask: np.ndarray) -> dict[str, Any]:
    """Run-length encode a boolean matrix in row-major order."""
    flat = np.asarray(mask, dtype=bool).ravel(order="C")
    if flat.size == 0:
        return {"order": "row-major", "first": 0, "runs": []}
    change = np.nonzero(np.diff(flat))[0]
    edges = np.concatenate([[-1], change, [flat.size - 1]])
    runs = np.diff(edges).astype(int).tolist()
    return {"order": "row-major", "first": int(flat[0]), "runs": runs}


def mask_from_rle(rle: Mapping[str, Any], shape: tuple[int, int]) -> np.ndarray:
    """Inverse of :func:`mask_to_rle`."""
    total = int(np.prod(shape))
    flat = np.empty(total, dtype=bool)
    value = bool(rle["first"])
    pos = 0
    for run in rle["runs"]:
        flat[pos:pos + int(run)] = value
        pos += int(run)
        value = not value
    if pos != total:
        raise ValueError(f"run lengths cover {pos} cells, expected {total}")
    return flat.reshape(shape)


def _estimate_dict(est: RegionEstimate | None) -> Any:
    if est is None:
        return None
    return {
        "b_center_khz": est.b_center, "b_halfwidth_khz": est.b_halfwidth,
        "tau_center_us": est.tau_center, "tau_halfwidth_us": est.tau_halfwidth,
    }


def region_to_json(region: RegionMap, path: Path,
                   extra: Mapping[str, Any] | None = None) -> None:
    """Grids, chi2nu matrix (row-major), threshold, RLE mask and estimate."""
    payload: dict[str, Any] = {
        "schema_version": 1,
        "kind": "region_map",
        "alpha": region.alpha,
        "b_grid_khz": region.b_grid,
        "tau_grid_us": region.tau_grid,
        "chi2nu_row_major": region.chi2nu.ravel(order="C"),
        "threshold": region.threshold,
        "delta": region.delta,
        "mask_rle": mask_to_rle(region.mask),
        "estimate": _estimate_dict(region.estimate),
        "empty": region.empty,
        "min_on_boundary": region.min_on_boundary,
        "n_accepted": region.n_accepted,
    }
    if extra:
        payload.update(extra)
    write_json(path, payload)


def region_to_csv(region: RegionMap, path: Path,
                  comments: Mapping[str, Any] | None = None) -> None:
    """Heat-map triplets (b_khz, tau_c_us, chi2nu), row-major over the grid."""
    bb, tt = np.meshgrid(region.b_grid, region.tau_grid, indexing="ij")
    write_table(path, dict(comments or {}), ["b_khz", "tau_c_us", "chi2nu"],
                [bb.ravel(order="C"), tt.ravel(order="C"),
                 region.chi2nu.ravel(order="C")])
