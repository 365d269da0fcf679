"""Command-line entry point ``agler-hadamard``.

Subcommands: ``verify`` (reproduction suite), ``norm``, ``star``, ``search``
and ``example`` (writes the named polynomials and multipliers as JSON).
Exit codes: 0 success, 1 a check failed, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import multipliers as mm
from . import norms as nm
from . import tuples as tp
from .polyalg import dumps_poly, loads_poly
from .verify import REPORT_VERSION, crabb_davie_poly, holbrook_poly, run_verify

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _sizes(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not sizes or min(sizes) < 1:
        raise argparse.ArgumentTypeError("sizes must be positive")
    return sizes


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--torus-grid", type=int, default=64)
    p.add_argument("--refine", type=int, default=50)
    p.add_argument("--agler-trials", type=int, default=200)
    p.add_argument("--agler-size", type=_sizes, default=(2, 3, 4, 6))
    p.add_argument("--pool", choices=["named", "generic", "torus", "all"], default="all")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path)
    p.add_argument("--format", choices=["json"], default="json")


def _read_poly(path: Path):
    try:
        return loads_poly(path.read_text())
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _read_multiplier(path: Path):
    try:
        return mm.loads_multiplier(path.read_text())
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except (ValueError, TypeError, KeyError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _dump_report(report: dict) -> str:
    return json.dumps(report, indent=1, sort_keys=False) + "\n"


def _search_inputs(args) -> dict:
    return {"seed": args.seed, "torus_grid": args.torus_grid, "refine": args.refine,
            "agler_trials": args.agler_trials, "agler_size": list(args.agler_size), "pool": args.pool}


def cmd_verify(args) -> int:
    rep = run_verify(args.seed, args.torus_grid, args.refine, args.agler_trials, args.agler_size,
                     args.pool, args.workers)
    _emit(_dump_report(rep.to_dict()), args.out)
    for name in rep.failures:
        print(f"FAILED: {name}", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_norm(args) -> int:
    f = _read_poly(args.poly)
    torus = nm.sup_norm_torus(f, args.torus_grid, args.refine)
    pool = nm.TuplePool.from_name(args.pool, sizes=args.agler_size)
    if args.pool in ("torus", "all"):
        pool = pool.with_points([_theta_to_point(torus.witness["theta"])])
    report = {"version": REPORT_VERSION, "command": "norm", "inputs": {"poly": str(args.poly), **_search_inputs(args)}}
    try:
        agler = nm.agler_lower_bound(f, pool, args.agler_trials, args.seed, args.workers).to_dict()
    except ValueError as exc:
        agler = {"error": str(exc)}
    report["results"] = {
        "sup_norm_torus": torus.to_dict(),
        "torus_upper_bound": nm.torus_upper_bound(f, args.torus_grid),
        "agler_lower_bound": agler,
        "coefficient_upper_bound": nm.coefficient_upper_bound(f),
    }
    _emit(_dump_report(report), args.out)
    return EXIT_OK


def _theta_to_point(theta):
    return np.exp(1j * np.array(theta))


def cmd_star(args) -> int:
    f = _read_poly(args.poly)
    F = _read_multiplier(args.multiplier)
    try:
        g = mm.apply(F, f)
    except (ValueError, mm.TruncationError) as exc:
        raise InputError(str(exc)) from exc
    _emit(dumps_poly(g), args.out)
    return EXIT_OK


def cmd_search(args) -> int:
    f = _read_poly(args.poly)
    if not f.is_scalar:
        raise InputError("search expects a scalar polynomial")
    pool = nm.TuplePool.from_name(args.pool, sizes=args.agler_size)
    found = nm.vn_violation_search(f, pool, args.agler_trials, args.seed, args.torus_grid, args.refine,
                                   args.margin, args.workers)
    report = {"version": REPORT_VERSION, "command": "search",
              "inputs": {"poly": str(args.poly), "margin": args.margin, **_search_inputs(args)},
              "results": found.to_dict() if found else {"kind": "none found"}}
    _emit(_dump_report(report), args.out)
    return EXIT_OK


EXAMPLES = {
    "holbrook-poly": lambda: dumps_poly(holbrook_poly()),
    "crabb-davie-poly": lambda: dumps_poly(crabb_davie_poly()),
    "holbrook-multiplier": lambda: mm.dumps_multiplier(mm.from_moments(tp.holbrook())),
    "crabb-davie-multiplier": lambda: mm.dumps_multiplier(mm.from_moments(tp.crabb_davie())),
}


def cmd_example(args) -> int:
    _emit(EXAMPLES[args.name](), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agler-hadamard", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the reproduction suite")
    _add_search_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("norm", help="torus, Agler and coefficient norms of a polynomial file")
    p.add_argument("poly", type=Path)
    _add_search_flags(p)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("star", help="Hadamard product of a polynomial file with a multiplier file")
    p.add_argument("poly", type=Path)
    p.add_argument("multiplier", type=Path)
    p.add_argument("--out", type=Path)
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_star)

    p = sub.add_parser("search", help="look for a von Neumann inequality violation")
    p.add_argument("poly", type=Path)
    _add_search_flags(p)
    p.add_argument("--margin", type=float, default=1e-6)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("example", help="write a named polynomial or multiplier file")
    p.add_argument("name", choices=sorted(EXAMPLES))
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_example)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
