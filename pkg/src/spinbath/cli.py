"""Command-line interface.

Subcommands: curve, scan, intersect, slownoise. Options mirror the config
schema; a JSON config file supplies defaults and individual flags override
it. The output directory resolves as: --out flag, then the SPINBATH_OUTDIR
environment variable, then the config value.

Exit codes: 0 success, 2 invalid configuration, 3 numeric failure,
4 empty intersection.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from ._quadrature import QuadratureError
from .config import ConfigError, PipelineConfig
from .estimators import FitError
from .pipelines import run_curve, run_intersect, run_scan, run_slownoise

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_EMPTY_INTERSECTION = 4


def _csv_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _csv_ints(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _grid_triple(text: str) -> tuple[float, float, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected MIN,MAX,N")
    return float(parts[0]), float(parts[1]), int(parts[2])


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--b", type=float, help="coupling strength in kHz")
    parser.add_argument("--tau-c", type=float, help="correlation time in us")
    parser.add_argument("--kind", choices=["exponential", "gaussian"],
                        help="bath correlation kind")
    parser.add_argument("--alphas", type=_csv_floats, metavar="A1,A2,...",
                        help="pulse fractions in [0, 1]")
    parser.add_argument("--n-points", type=int, help="points per curve (default 100)")
    parser.add_argument("--t-max", type=float,
                        help="measurement window in us (overrides the decay rule)")
    parser.add_argument("--decay-target", type=float,
                        help="window ends where -ln W reaches this (default 3)")
    parser.add_argument("--sigma0", type=float, help="per-average relative noise")
    parser.add_argument("--noise-floor", type=float, help="floor fraction r")
    parser.add_argument("--n-avg", type=_csv_ints, metavar="N1,N2,...",
                        help="number of averages (a list runs a ladder)")
    parser.add_argument("--seeds", type=_csv_ints, metavar="S1,S2,...", help="RNG seeds")
    parser.add_argument("--delta", type=float,
                        help="chi2_nu acceptance offset above the minimum (default 0.14)")
    parser.add_argument("--grid-b", type=_grid_triple, metavar="MIN,MAX,N",
                        help="b scan grid in kHz")
    parser.add_argument("--grid-tau", type=_grid_triple, metavar="MIN,MAX,N",
                        help="tau_c scan grid in us")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--no-csv", action="store_true", help="skip CSV outputs")
    parser.add_argument("--no-json", action="store_true", help="skip JSON outputs")


def _raw_config(args: argparse.Namespace) -> dict[str, Any]:
    raw: dict[str, Any] = {}
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)

    def section(name: str) -> dict[str, Any]:
        return raw.setdefault(name, {})

    if args.b is not None:
        section("noise")["b_khz"] = args.b
    if args.tau_c is not None:
        section("noise")["tau_c_us"] = args.tau_c
    if args.kind is not None:
        section("noise")["kind"] = args.kind
    if args.alphas is not None:
        section("sequence")["alphas"] = args.alphas
    if args.n_points is not None:
        section("sequence")["n_points"] = args.n_points
    if args.t_max is not None:
        section("sequence")["t_max_us"] = args.t_max
    if args.decay_target is not None:
        section("sequence")["decay_target"] = args.decay_target
    if args.sigma0 is not None:
        section("measurement")["sigma0"] = args.sigma0
    if args.noise_floor is not None:
        section("measurement")["noise_floor"] = args.noise_floor
    if args.n_avg is not None:
        section("measurement")["n_avg"] = (
            args.n_avg[0] if len(args.n_avg) == 1 else args.n_avg)
    if args.seeds is not None:
        raw["seeds"] = args.seeds
    if args.delta is not None:
        section("scan")["delta"] = args.delta
    if args.grid_b is not None or args.grid_tau is not None:
        if args.grid_b is None or args.grid_tau is None:
            raise ConfigError(["--grid-b and --grid-tau must be given together"])
        b_min, b_max, n_b = args.grid_b
        t_min, t_max, n_tau = args.grid_tau
        section("scan")["grid"] = {
            "b_min_khz": b_min, "b_max_khz": b_max, "n_b": n_b,
            "tau_min_us": t_min, "tau_max_us": t_max, "n_tau": n_tau,
        }
    env_dir = os.environ.get("SPINBATH_OUTDIR")
    if env_dir:
        section("output")["dir"] = env_dir
    if args.out is not None:
        section("output")["dir"] = str(args.out)
    if args.no_csv:
        section("output")["csv"] = False
    if args.no_json:
        section("output")["json"] = False
    return raw


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinbath",
        description="Asymmetric Hahn-echo noise spectroscopy: simulate coherence "
                    "curves and extract spin-bath parameters (b, tau_c).")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("curve", "exact coherence curves with stretched-exponential fits"),
        ("scan", "chi2_nu region scans of simulated noisy curves"),
        ("intersect", "multi-alpha region intersection with improvement report"),
        ("slownoise", "slow-noise extraction versus explicit fitting"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    runners = {"curve": run_curve, "scan": run_scan,
               "intersect": run_intersect, "slownoise": run_slownoise}
    try:
        cfg = PipelineConfig.from_dict(_raw_config(args))
        result = runners[args.command](cfg)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, FitError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    for path in result.paths:
        print(path)
    if result.empty_intersection:
        print("empty intersection: no parameter pair consistent with every curve",
              file=sys.stderr)
        return EXIT_EMPTY_INTERSECTION
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
