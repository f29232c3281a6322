"""Command-line front end.

    varcomp check <file>
    varcomp complete <file> [--reduce-order] [--via-helmholtz] [--format F]
    varcomp verify-gr <scenario> [--seed N] [--points K]
    varcomp eval <file> --point <point-file>

Exit codes: 0 success or variational, 1 usage or input error, 3 non-variational
or failed check, 4 divergent homotopy integral.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from typing import Optional

from .calculus import euler_lagrange
from .dsl import parse_file, parse_point
from .errors import DivergentHomotopy, DSLSyntaxError, SemanticError, VarcompError
from .numjet import JetPoint, eval_expr
from .render import render
from .report import FD_TOL, analyze, to_json, to_text

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_VARIATIONAL = 3
EXIT_DIVERGENT = 4


@dataclass
class RunConfig:
    command: str
    path: str
    fmt: str = "plain"
    seed: Optional[int] = None
    points: Optional[int] = None
    fd_tol: float = FD_TOL
    reduce: bool = False
    via_helmholtz: bool = False
    numeric_only: bool = False
    point_file: Optional[str] = None
    timings: bool = False

    def __post_init__(self):
        if self.points is not None and self.points < 1:
            raise VarcompError("--points must be >= 1")
        if not self.fd_tol > 0:
            raise VarcompError("--fd-tol must be positive")


def _render_fmt(fmt):
    # json reports carry plain-format expressions
    return "plain" if fmt == "json" else fmt


def _emit(rep: dict, fmt: str, out):
    out.write(to_json(rep) if fmt == "json" else to_text(rep))


def cmd_check(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    pf = parse_file(cfg.path)
    rep = analyze(pf, "check", numeric_only=cfg.numeric_only, seed=cfg.seed,
                  points=cfg.points, fmt=_render_fmt(cfg.fmt), fd_tol=cfg.fd_tol)
    _emit(rep, cfg.fmt, out)
    return EXIT_OK if rep["verdict"] == "variational" else EXIT_NOT_VARIATIONAL


def cmd_complete(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    pf = parse_file(cfg.path)
    rep = analyze(pf, "complete", reduce=cfg.reduce, via_helmholtz=cfg.via_helmholtz,
                  numeric_only=cfg.numeric_only, seed=cfg.seed, points=cfg.points,
                  fmt=_render_fmt(cfg.fmt), fd_tol=cfg.fd_tol)
    _emit(rep, cfg.fmt, out)
    failed = [c for c in rep["numeric_checks"] if c["status"] == "fail"]
    return EXIT_NOT_VARIATIONAL if failed else EXIT_OK


def cmd_verify_gr(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    from .scenario import load_scenario, run

    sc = load_scenario(cfg.path)
    timings = {} if cfg.timings else None
    t0 = time.perf_counter()
    rep = run(sc, seed=cfg.seed, points=cfg.points, timings=timings)
    if cfg.fmt == "json":
        out.write(json.dumps(rep, indent=2) + "\n")
    else:
        out.write(f"scenario: {rep['scenario']} (n={rep['n']}, seed={rep['seed']}, "
                  f"kappa={rep['kappa']})\n")
        for c in rep["checks"]:
            bound = f"min={c['min']:.1e}" if "min" in c else f"tol={c['tol']:.1e}"
            out.write(f"  {c['name']:32s} {c['status']:4s} residual={c['residual']:.3e} "
                      f"{bound} points={c['points']}\n")
        out.write(f"verdict: {rep['verdict']}\n")
    if timings is not None:
        for name in sorted(timings):
            print(f"time {name}: {timings[name]:.2f}s", file=sys.stderr)
        print(f"time total: {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return EXIT_OK if rep["verdict"] == "pass" else EXIT_NOT_VARIATIONAL


def cmd_eval(cfg: RunConfig, out=None) -> int:
    """Evaluate the source form (or the Lagrangian and its Euler-Lagrange
    form) at a point given as ``coordinate = value`` lines."""
    out = out or sys.stdout
    pf = parse_file(cfg.path)
    kind = pf.require_one()
    with open(cfg.point_file, encoding="utf-8") as fh:
        try:
            vals = parse_point(fh.read(), pf.spec)
        except (DSLSyntaxError, SemanticError) as exc:
            exc.path = cfg.point_file
            raise
    p = JetPoint.from_mapping(pf.spec, vals)
    spec = pf.spec
    rows = []
    if kind == "lagrangian":
        rows.append(("lagrangian", render(pf.lagrangian.density, "plain", spec),
                     eval_expr(pf.lagrangian.density, p)))
        eps = euler_lagrange(pf.lagrangian)
    else:
        eps = pf.source
    for c, e in zip(spec.fields, eps.components):
        rows.append((f"{kind if kind == 'source' else 'euler_lagrange'}[{c!r}]",
                     render(e, "plain", spec), eval_expr(e, p)))
    if cfg.fmt == "json":
        out.write(json.dumps({"values": [{"name": n, "expr": s, "value": v}
                                         for n, s, v in rows]}, indent=2) + "\n")
    else:
        for n, s, v in rows:
            out.write(f"{n} = {v!r}    # {s}\n")
    return EXIT_OK


COMMANDS = {"check": cmd_check, "complete": cmd_complete,
            "verify-gr": cmd_verify_gr, "eval": cmd_eval}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="varcomp", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fd=True):
        p.add_argument("--format", choices=("plain", "latex", "json"), default="plain")
        p.add_argument("--seed", type=int, default=None, help="override the file's seed")
        p.add_argument("--points", type=int, default=None, help="sample points for numeric checks")
        if fd:
            p.add_argument("--fd-tol", type=float, default=FD_TOL,
                           help="tolerance of finite-difference checks (default %(default)g)")
            p.add_argument("--numeric-only", action="store_true",
                           help="skip symbolic Helmholtz; decide from the numeric oracle")

    p = sub.add_parser("check", help="Helmholtz coefficients and variationality verdict")
    p.add_argument("file")
    common(p)
    p = sub.add_parser("complete", help="Vainberg-Tonti Lagrangian and variational completion")
    p.add_argument("file")
    p.add_argument("--reduce-order", action="store_true", help="also print the reduced Lagrangian")
    p.add_argument("--via-helmholtz", action="store_true",
                   help="compute the completion from the Helmholtz coefficients")
    common(p)
    p = sub.add_parser("verify-gr", help="run a gravity / electromagnetism scenario")
    p.add_argument("file", metavar="scenario")
    p.add_argument("--timings", action="store_true", help="per-check wall time on stderr")
    common(p, fd=False)
    p = sub.add_parser("eval", help="evaluate the file's expressions at a point")
    p.add_argument("file")
    p.add_argument("--point", required=True, help="file of 'coordinate = value' lines")
    p.add_argument("--format", choices=("plain", "json"), default="plain")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command, path=args.file, fmt=args.format,
            seed=getattr(args, "seed", None), points=getattr(args, "points", None),
            fd_tol=getattr(args, "fd_tol", FD_TOL),
            reduce=getattr(args, "reduce_order", False),
            via_helmholtz=getattr(args, "via_helmholtz", False),
            numeric_only=getattr(args, "numeric_only", False),
            point_file=getattr(args, "point", None), timings=getattr(args, "timings", False),
        )
        return COMMANDS[cfg.command](cfg)
    except DivergentHomotopy as exc:
        w = exc.weight if exc.weight is not None else "unknown"
        print(f"error: divergent homotopy integral (weight {w}): {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    except DSLSyntaxError as exc:
        where = f"{getattr(exc, 'path', args.file)}:{exc.line}:{exc.col}"
        found = "" if exc.found is None else f", found {exc.found!r}"
        print(f"{where}: syntax error: expected {exc.expected}{found}", file=sys.stderr)
        return EXIT_ERROR
    except SemanticError as exc:
        where = getattr(exc, "path", args.file)
        print(f"{where}: semantic error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (VarcompError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
