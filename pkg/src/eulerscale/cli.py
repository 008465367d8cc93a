"""Command line entry point.

Exit codes: 0 ok, 1 a check failed, 2 configuration error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .bump import bump_from_dict, derivative_table
from .config import PRESETS, ConfigError, ScenarioConfig, load_config, parse_config, preset
from .export import csv_text, export_modes, write_csv

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

SUBCOMMAND_STEPS = {
    "verify": ["structure", "residuals", "oracle"],
    "analyze": ["dq", "sobolev"],
    "oracle": ["contrast"],
}


def _resolve(source: Optional[str]) -> ScenarioConfig:
    if source is None:
        return parse_config("")
    if source in PRESETS:
        return preset(source)
    path = Path(source)
    if not path.exists():
        raise ConfigError(f"{source!r} is neither a preset ({', '.join(sorted(PRESETS))}) "
                          f"nor a readable file")
    return load_config(path)


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    if getattr(args, "precision", None):
        cfg.precision = args.precision
    if getattr(args, "out", None):
        cfg.output = args.out
    return cfg


def _parse_ints(spec: str) -> List[int]:
    out = []
    for part in spec.split(","):
        if "-" in part.strip()[1:]:
            a, b = part.split("-", 1)
            out += list(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def _report(result) -> None:
    for c in result.checks:
        val = "" if c.value is None else f" value={c.value:.3e}"
        thr = "" if c.threshold is None else f" threshold={c.threshold:.1e}"
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}{val}{thr} {c.detail}".rstrip())
    print(f"{result.name}: {'ok' if result.ok else 'FAILED'}; files in "
          f"{', '.join(sorted(result.files))}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario YAML file or preset name")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--precision", choices=("exact", "double"))
    common.add_argument("--threads", type=int, default=1, help="worker processes for the build")
    common.add_argument("--seed", type=int, default=0,
                        help="accepted for interface stability; every computation is deterministic")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="eulerscale",
                                description="Explicit Fourier-side Euler solutions and their numerical checks.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("build", parents=[common], help="build the solution and write modes.json")
    sub.add_parser("verify", parents=[common], help="structure, residual and oracle checks")
    sub.add_parser("analyze", parents=[common], help="Renyi entropy, D_q fits, Sobolev sums")
    sub.add_parser("oracle", parents=[common], help="Galerkin integration and branch contrast")
    b = sub.add_parser("bump", parents=[common], help="bump derivative table (n, t, f^(n)(t))")
    b.add_argument("--orders", default="0-5", help="e.g. 0-5 or 0,2,4")
    b.add_argument("--times", default="1.5,2,3", help="comma separated sample times")
    r = sub.add_parser("run", parents=[common], help="run a preset or config file end to end")
    r.add_argument("scenario", help=f"preset ({', '.join(sorted(PRESETS))}) or YAML path")
    e = sub.add_parser("export", parents=[common], help="export the built modes")
    e.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve(args.scenario if args.command == "run" else args.config)
        cfg = _apply_overrides(cfg, args)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    from .scenario import build_from_config, run_scenario

    try:
        if args.command == "bump":
            bump = bump_from_dict(cfg.bump)
            rows = derivative_table(bump, _parse_ints(args.orders),
                                    [float(x) for x in args.times.split(",")])
            header = ("n", "t", "value")
            if args.out:
                print(write_csv(Path(args.out) / "bump.csv", header, rows))
            else:
                sys.stdout.write(csv_text(header, rows))
            return EXIT_OK
        if args.command in ("build", "export"):
            sol = build_from_config(cfg, args.threads)
            fmt = "json" if args.command == "build" else args.format
            path = export_modes(sol, Path(cfg.output) / f"modes.{fmt}", fmt)
            print(f"{len(sol.nonzero_points())} nonzero modes in box K={sol.K}, M={sol.M}; wrote {path}")
            return EXIT_OK
        steps = SUBCOMMAND_STEPS.get(args.command)
        if steps is not None and args.command == "analyze" and cfg.complex2d is not None:
            steps = steps + ["complex2d"]
        result = run_scenario(cfg, steps=steps, workers=args.threads)
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - last-resort runtime failure
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _report(result)
    return EXIT_OK if result.ok else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
