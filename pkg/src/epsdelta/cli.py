"""Command-line front end.

Exit codes: 0 success, 2 usage/parse error, 3 f'(x) = 0 at the requested
point, 4 bracket or other numerical failure, 5 output write failure, 6 the
f'(x)f''(x) != 0 check failed, 7 validation deviation above tolerance.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass
from typing import Optional

from . import catalog
from .errors import EpsDeltaError, ExprError, HypothesisViolation
from .expr import parse
from .manifold import GridSpec, default_workers, sample_manifold, write_csv, write_json
from .numerics import RealFunction
from .solver import check_hypotheses, default_window, solve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3
EXIT_BRACKET = 4
EXIT_WRITE = 5
EXIT_CHECK = 6
EXIT_VALIDATE = 7


@dataclass
class CliConfig:
    subcommand: str
    function_spec: Optional[str] = None
    force_expr: bool = False
    x: Optional[float] = None
    epsilon: Optional[float] = None
    grid: Optional[GridSpec] = None
    omega_sol: float = 1e-6
    window_radius: float = 1.0
    output_path: Optional[str] = None
    format: str = "csv"
    workers: int = 1
    verbose: bool = False


def resolve_function(spec: str, force_expr: bool = False) -> RealFunction:
    """Catalog names win over expressions unless ``force_expr`` is set."""
    if not force_expr and spec in catalog.ENTRIES:
        return catalog.get(spec).function
    expr = parse(spec)
    return RealFunction(expr, label=spec)


def _err(msg: str):
    print(f"epsdelta: {msg}", file=sys.stderr)


def _g17(v: float) -> str:
    return format(v, ".17g")


def run_solve(config: CliConfig) -> int:
    try:
        f = resolve_function(config.function_spec, config.force_expr)
        window = default_window(f, config.x, config.window_radius)
    except (ExprError, EpsDeltaError, ValueError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    try:
        rep = solve(f, config.x, config.epsilon, config.omega_sol, window)
    except HypothesisViolation as exc:
        _err(f"{exc}")
        return EXIT_HYPOTHESIS
    except EpsDeltaError as exc:
        _err(str(exc))
        return EXIT_BRACKET
    if config.verbose:
        for w in rep.warnings:
            _err(f"warning: {w}")
    print(f"delta={_g17(rep.delta)} residual={_g17(rep.residual)} "
          f"iters_binary={rep.binary_iterations} iters_ternary={rep.ternary_iterations_total}")
    return EXIT_OK


def run_manifold(config: CliConfig) -> int:
    try:
        f = resolve_function(config.function_spec, config.force_expr)
    except (EpsDeltaError, ValueError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    samples = sample_manifold(f, config.grid, config.omega_sol, config.workers)
    writer = write_json if config.format == "json" else write_csv
    try:
        if config.output_path:
            with open(config.output_path, "w", encoding="utf-8", newline="\n") as fh:
                writer(samples, fh)
        else:
            writer(samples, sys.stdout)
            sys.stdout.flush()
    except OSError as exc:
        _err(f"cannot write output: {exc}")
        return EXIT_WRITE
    skipped = sum(1 for s in samples if not s.ok)
    if skipped:
        _err(f"{skipped} of {len(samples)} grid points skipped")
    return EXIT_OK


def run_check(config: CliConfig) -> int:
    try:
        f = resolve_function(config.function_spec, config.force_expr)
        window = default_window(f, config.x, config.window_radius)
    except (EpsDeltaError, ValueError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    try:
        rep = check_hypotheses(f, config.x, window)
    except EpsDeltaError as exc:
        _err(str(exc))
        return EXIT_BRACKET
    print(f"f1_at_x={_g17(rep.f1_at_x)}")
    print(f"f2_at_x={_g17(rep.f2_at_x)}")
    print(f"lagrange_ok={str(rep.lagrange_ok).lower()}")
    print(f"transversal_ok={str(rep.transversal_ok).lower()}")
    print(f"unimodal_ok={str(rep.unimodal_ok).lower()}")
    for d in rep.diagnostics:
        print(f"diagnostic={d}")
    return EXIT_OK if rep.lagrange_ok else EXIT_CHECK


VALIDATION_MATRIX = {
    "exp1": ([-1.0, -0.5, 0.0, 0.5, 1.0], [0.1, 0.25, 0.5, 0.75, 1.0]),
    "rational30": ([27.0, 29.0, 31.0, 33.0], [0.1, 0.25]),
    "affine21": ([-1e6, 0.0, 1e6], [0.01, 1.0, 10.0]),
    "log": ([0.5, 1.0, 2.0], [0.1, 1.0]),
    "quad11": ([-4.0, -2.0, 0.0, 2.0, 4.0], [0.05, 0.1, 0.5]),
}
ORACLE_GRID = 10 ** 5


def validate(omega_sol: float = 1e-6, entries: Optional[dict] = None) -> list:
    """Solver deviation per catalog entry: (name, max_deviation, tolerance).

    Entries with a closed form are compared against it with tolerance
    2 * omega_sol; the others against the brute-force oracle with tolerance
    omega_sol + 2 oracle pitches. ``entries`` maps names to CatalogEntry and
    defaults to the built-in catalog.
    """
    if entries is None:
        entries = {name: catalog.get(name) for name in VALIDATION_MATRIX}
    results = []
    for name, entry in entries.items():
        xs, epsilons = VALIDATION_MATRIX[name]
        worst, tol = 0.0, 2 * omega_sol
        for x in xs:
            window = default_window(entry.function, x)
            for e in epsilons:
                delta = solve(entry.function, x, e, omega_sol, window).delta
                if entry.closed_form_pi is not None:
                    ref = entry.closed_form_pi(x, e)
                else:
                    ref = catalog.brute_force_delta(entry.function, x, e, window, ORACLE_GRID)
                    pitch = min(x - window.lo, window.hi - x) / ORACLE_GRID
                    tol = omega_sol + 2 * pitch
                worst = max(worst, abs(delta - ref))
        results.append((name, worst, tol))
    return results


def run_validate(config: CliConfig, entries: Optional[dict] = None) -> int:
    try:
        results = validate(config.omega_sol, entries)
    except EpsDeltaError as exc:
        _err(str(exc))
        return EXIT_VALIDATE
    failed = False
    for name, worst, tol in results:
        ok = worst < tol and math.isfinite(worst)
        failed |= not ok
        print(f"{name}: max_deviation={worst:.3e} tolerance={tol:.3e} {'PASS' if ok else 'FAIL'}")
    return EXIT_VALIDATE if failed else EXIT_OK


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="epsdelta",
                                description="Maximal delta of the eps-delta continuity relation.")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def add_function(sp):
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--fn", help=f"catalog name ({', '.join(catalog.ENTRIES)}) or expression in y")
        src.add_argument("--expr", help="expression in one variable, never a catalog name")
        sp.add_argument("--omega-sol", type=_positive, default=1e-6, help="root tolerance")
        sp.add_argument("--window-radius", type=_positive, default=1.0)
        sp.add_argument("-v", "--verbose", action="store_true")

    s = sub.add_parser("solve", help="solve one (f, x, eps) triplet")
    add_function(s)
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--eps", type=_positive, required=True)

    m = sub.add_parser("manifold", help="sample delta over an (x, eps) grid")
    add_function(m)
    m.add_argument("--x-min", type=float, default=-1.0)
    m.add_argument("--x-max", type=float, default=1.0)
    m.add_argument("--x-count", type=int, default=50)
    m.add_argument("--eps-min", type=float, default=0.02)
    m.add_argument("--eps-max", type=float, default=1.0)
    m.add_argument("--eps-count", type=int, default=50)
    m.add_argument("--output", "-o")
    m.add_argument("--format", choices=("csv", "json"), default="csv")
    m.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: $EPSDELTA_WORKERS or all cores)")

    c = sub.add_parser("check", help="check the solver's sufficient conditions at x")
    add_function(c)
    c.add_argument("--x", type=float, required=True)

    v = sub.add_parser("validate", help="compare the solver with closed forms and the oracle")
    v.add_argument("--omega-sol", type=_positive, default=1e-6)
    v.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> CliConfig:
    cfg = CliConfig(args.subcommand, omega_sol=args.omega_sol, verbose=args.verbose)
    if args.subcommand == "validate":
        return cfg
    cfg.function_spec = args.fn if args.fn is not None else args.expr
    cfg.force_expr = args.expr is not None
    cfg.window_radius = args.window_radius
    if args.subcommand in ("solve", "check"):
        cfg.x = args.x
    if args.subcommand == "solve":
        cfg.epsilon = args.eps
    if args.subcommand == "manifold":
        cfg.grid = GridSpec(args.x_min, args.x_max, args.x_count,
                            args.eps_min, args.eps_max, args.eps_count)
        cfg.output_path = args.output
        cfg.format = args.format
        cfg.workers = args.workers if args.workers is not None else default_workers()
        if cfg.workers < 1:
            raise ValueError("--workers must be at least 1")
    return cfg


RUNNERS = {"solve": run_solve, "manifold": run_manifold, "check": run_check,
           "validate": run_validate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    return RUNNERS[config.subcommand](config)


if __name__ == "__main__":
    sys.exit(main())
