"""Command-line entry point.

Usage:
    kickedgas <experiment-kind> [--config FILE] [overrides...]

Every config field can be overridden on the command line. Exit codes:
0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dopri import IntegratorError
from .harness import (EXPERIMENT_KINDS, ConfigError, ExperimentConfig, run)
from .quantum import GridTooSmallError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kickedgas",
        description="Pulsed-standing-wave gas simulator: quantum Floquet and "
                    "pseudoclassical Monte Carlo engines.",
    )
    parser.add_argument("kind", choices=EXPERIMENT_KINDS,
                        help="experiment kind to run")
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON config file (CLI flags override it)")
    parser.add_argument("--engine",
                        choices=("quantum", "pseudoclassical", "both"))
    parser.add_argument("--epsilon", type=float,
                        help="scaled pulse duration")
    parser.add_argument("--phi-d", dest="phi_d", type=float,
                        help="kick strength")
    parser.add_argument("--ell", type=int,
                        help="pulse period in half Talbot times (even)")
    parser.add_argument("--beta", type=float, help="quasimomentum subspace")
    parser.add_argument("--w", type=float, help="thermal momentum width")
    parser.add_argument("--n-kicks", dest="n_kicks", type=int)
    parser.add_argument("--n-particles", dest="n_particles", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--reversal-at", dest="reversal_at", type=int,
                        help="flip the potential sign after this kick")
    parser.add_argument("--k-max", dest="k_max", type=int,
                        help="momentum grid half width (quantum engine)")
    parser.add_argument("--n-substeps", dest="n_substeps", type=int,
                        help="split-step count per pulse (quantum engine)")
    parser.add_argument("--cutoff", type=float,
                        help="display floor for distribution files")
    parser.add_argument("--n-points", dest="n_points", type=int,
                        help="initial points for poincare sections")
    parser.add_argument("--epsilons", type=str,
                        help="JSON list overriding the epsilon sweep grid")
    parser.add_argument("--betas", type=str,
                        help="JSON list overriding the beta sweep grid")
    parser.add_argument("--ws", type=str,
                        help="JSON list overriding the thermal width grid")
    parser.add_argument("--v-tildes", dest="v_tildes", type=str,
                        help="JSON list of driving strengths for poincare")
    parser.add_argument("--out", type=str, help="output directory")
    return parser


_JSON_LIST_FLAGS = ("epsilons", "betas", "ws", "v_tildes")


def _parse_json_list(name: str, text: str):
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--{name} must be a JSON list: {exc}") from exc
    if not isinstance(value, list) or not value:
        raise ConfigError(f"--{name} must be a non-empty JSON list")
    return [float(v) for v in value]


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data = {}
    if args.config is not None:
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        data.update(raw)
    data["kind"] = args.kind
    for key, value in vars(args).items():
        if key in ("kind", "config") or value is None:
            continue
        if key in _JSON_LIST_FLAGS:
            value = _parse_json_list(key.replace("_", "-"), value)
        data[key] = value
    return ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        paths = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GridTooSmallError, IntegratorError) as exc:
        print(f"numerical failure in {cfg.kind} "
              f"(epsilon={cfg.effective_epsilon}, beta={cfg.beta}, "
              f"w={cfg.w}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
