"""``powheat`` command line.

Exit codes: 0 success, 1 a verification failed, 2 bad usage or input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import special_functions as sf
from .errors import PowheatError
from .flows import FlowStep, in_reach, point_map, reach_interval
from .grid import GridSpec
from .lie_algebra import Generator, PowerLawParameter, classify, invariants
from .solutions import (
    Transformed,
    evaluate_grid,
    format_csv,
    from_dict,
    make_projective,
    make_scale_invariant,
    make_separable,
    make_stationary,
)
from .verify import (
    FdConfig,
    convergence_study,
    format_convergence_csv,
    reflection_residual,
    residual_report,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _floats(text: str, n: int | None = None, sep: str = ",") -> list[float]:
    try:
        vals = [float(v) for v in text.split(sep)]
    except ValueError:
        raise UsageError(f"expected numbers separated by {sep!r}, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} values, got {text!r}")
    return vals


def _axis(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"axis must be lo:hi:n, got {text!r}")
    lo, hi = _floats(":".join(parts[:2]), 2, ":")
    try:
        n = int(parts[2])
    except ValueError:
        raise UsageError(f"node count must be an integer, got {parts[2]!r}") from None
    return lo, hi, n


def _grid(args) -> GridSpec:
    if args.t is None or args.x is None:
        raise UsageError("both --t and --x are required (lo:hi:n)")
    t0, t1, nt = _axis(args.t)
    x0, x1, nx = _axis(args.x)
    return GridSpec(t0, t1, nt, x0, x1, nx)


def _flow(text: str, param: PowerLawParameter) -> FlowStep:
    """``i:eps`` for a basis generator or ``k1,k2,k3,k4:eps`` for a mixture."""
    head, sep, eps = text.rpartition(":")
    if not sep:
        raise UsageError(f"flow must be i:eps or k1,k2,k3,k4:eps, got {text!r}")
    (eps,) = _floats(eps, 1)
    if "," in head:
        return FlowStep(Generator(tuple(_floats(head, 4)), param), eps)
    try:
        i = int(head)
    except ValueError:
        raise UsageError(f"bad generator index {head!r}") from None
    return FlowStep.basis(i, eps, param)


def _read_json(path: str) -> dict:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read descriptor {path!r}: {exc}") from None


def _descriptor(args):
    if args.descriptor is not None:
        sol = from_dict(_read_json(args.descriptor))
    else:
        if args.a is None or args.variant is None:
            raise UsageError("give --descriptor or inline --a and --variant")
        p = PowerLawParameter(args.a)
        v = args.variant
        if v == "Stationary":
            sol = make_stationary(p, args.C1, args.C2)
        elif v == "Separable":
            if args.kappa is None:
                raise UsageError("Separable needs --kappa")
            sol = make_separable(p, args.sign, args.kappa, args.c_reg, args.c_irr)
        elif v in ("ScaleInvariant", "Projective"):
            if args.mu is None:
                raise UsageError(f"{v} needs --mu")
            make = make_scale_invariant if v == "ScaleInvariant" else make_projective
            sol = make(p, args.mu, args.c_reg, args.c_irr)
        else:
            raise UsageError(f"unknown variant {v!r}")
    flows = tuple(_flow(f, sol.param) for f in getattr(args, "flow", None) or ())
    if flows:
        base, prev = (sol.base, sol.steps) if isinstance(sol, Transformed) else (sol, ())
        sol = Transformed(base, prev + flows)
    return sol


def _emit(text: str, path: str):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _json(obj: dict, args) -> str:
    if getattr(args, "stamp", False):
        obj = dict(obj, stamp=datetime.now(timezone.utc).isoformat())
    return json.dumps(obj, indent=2) + "\n"


# --------------------------------------------------------------------------
# subcommands


def cmd_classify(args) -> int:
    X = Generator(tuple(_floats(args.k, 4)), PowerLawParameter(args.a))
    cls, amap = classify(X, args.tol)
    inv = invariants(X)
    out = {
        "class": cls.tag,
        "mu": cls.mu,
        "phi1": inv.phi1,
        "phi2": inv.phi2,
        "invariants": {"phi1": inv.phi1, "phi2": inv.phi2},
        "adjoint_map": amap.to_dict(),
    }
    _emit(_json(out, args), args.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    sol = _descriptor(args)
    grid = _grid(args)
    table = evaluate_grid(sol, grid)
    _emit(format_csv(table), args.output)
    if args.check:
        report = residual_report(sol, grid, args.tol)
        if not report.passed:
            print(
                f"residual check failed: rel_norm={report.rel_norm:.3g} > tol={args.tol:g}",
                file=sys.stderr,
            )
            return EXIT_FAIL
    return EXIT_OK


def _check_window(sol: Transformed, window):
    """Every flow must be defined on the closed base window, carried forward step by step."""
    lo, hi = window
    if not lo <= hi:
        raise UsageError("--t-range needs LO <= HI")
    ts = np.array([lo, hi])
    for step in sol.steps:
        if not np.all(in_reach(step, ts)):
            rlo, rhi = reach_interval(step)
            raise UsageError(
                f"flow {step.to_dict()} undefined on t in [{ts[0]:.17g}, {ts[1]:.17g}]"
                f" (needs t in ({rlo}, {rhi}); for X3 this is eps*t < 1)"
            )
        ts = point_map(step, ts, np.ones(2))[0]


def cmd_transform(args) -> int:
    if not args.flow:
        raise UsageError("transform needs at least one --flow")
    sol = _descriptor(args)
    if args.t_range is not None:
        _check_window(sol, _floats(args.t_range, 2, ":"))
    _emit(json.dumps(sol.to_dict(), indent=2) + "\n", args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    grid = _grid(args)
    sol = _descriptor(args)
    check = reflection_residual if args.reflect else residual_report
    report = check(sol, grid, args.tol)
    _emit(_json(report.to_dict(), args), args.output)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_convergence(args) -> int:
    sol = _descriptor(args)
    t0, t1 = _floats(args.t_range, 2, ":")
    x0, x1 = _floats(args.x_range, 2, ":")
    cfg = FdConfig(sol, args.theta, args.n, args.n)
    rows = convergence_study(cfg, sol.param, args.refinements, (t0, t1), (x0, x1))
    _emit(format_convergence_csv(rows), args.output)
    return EXIT_OK


def cmd_sf(args) -> int:
    params = _floats(args.params)
    family = {
        "J": sf.BESSEL_ORDINARY,
        "I": sf.BESSEL_MODIFIED,
        "kummer": sf.KUMMER,
        "coulomb": sf.COULOMB,
    }[args.family]
    spec = sf.OdeBasisSpec(family, tuple(params))
    xs = np.array(_floats(args.x))
    fn = sf.regular_solution if args.branch == "regular" else sf.second_solution
    v = fn(spec, xs)
    lines = ["x,value,abs_error"]
    lines += [f"{x:.17g},{y:.17g},{e:.17g}" for x, y, e in zip(xs, v.value, v.abs_error)]
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _positive(text: str) -> float:
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return v


def _add_descriptor(p, flows=True):
    g = p.add_argument_group("solution")
    g.add_argument("--descriptor", "-d", help="solution JSON file, '-' for stdin")
    g.add_argument("--a", type=float)
    g.add_argument(
        "--variant", choices=["Stationary", "Separable", "ScaleInvariant", "Projective"]
    )
    g.add_argument("--mu", type=float)
    g.add_argument("--kappa", type=float)
    g.add_argument("--sign", choices=["+", "-"], default="-")
    g.add_argument("--c-reg", dest="c_reg", type=float, default=1.0)
    g.add_argument("--c-irr", dest="c_irr", type=float, default=0.0)
    g.add_argument("--C1", type=float, default=0.0)
    g.add_argument("--C2", type=float, default=0.0)
    if flows:
        g.add_argument(
            "--flow",
            action="append",
            metavar="I:EPS",
            help="apply exp(eps X_i); repeat to compose left to right (k1,k2,k3,k4:eps also accepted)",
        )


def _add_grid(p):
    p.add_argument("--t", metavar="LO:HI:N", help="time axis")
    p.add_argument("--x", metavar="LO:HI:N", help="space axis (LO > 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powheat",
        description="Symmetries and exact solutions of u_t = x**(2-1/a) u_xx.",
    )
    sub = parser.add_subparsers(
        dest="command", required=True, metavar="{classify,solve,transform,verify,convergence}"
    )

    p = sub.add_parser("classify", help="optimal-system class of a generator")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--k", required=True, metavar="K1,K2,K3,K4")
    p.add_argument("--tol", type=_positive, default=1e-12)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("solve", help="evaluate a solution on a grid (CSV)")
    _add_descriptor(p)
    _add_grid(p)
    p.add_argument("--check", action="store_true", help="exit 1 if the PDE residual fails")
    p.add_argument("--tol", type=_positive, default=1e-6)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("transform", help="push a solution along flows (JSON)")
    _add_descriptor(p)
    p.add_argument("--t-range", dest="t_range", metavar="LO:HI", help="base time window the flows must be defined on")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("verify", help="PDE residual report (JSON)")
    _add_descriptor(p)
    _add_grid(p)
    p.add_argument("--tol", type=_positive, default=1e-6)
    p.add_argument("--reflect", action="store_true", help="check the x -> 1/x, a -> -a image")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("convergence", help="finite-difference convergence table (CSV)")
    _add_descriptor(p, flows=True)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--refinements", type=int, default=4)
    p.add_argument("--n", type=int, default=16, help="cells on the coarsest level")
    p.add_argument("--t-range", dest="t_range", default="1:2")
    p.add_argument("--x-range", dest="x_range", default="0.5:2")
    p.set_defaults(func=cmd_convergence)

    # debugging aid, deliberately left out of the top-level help
    sf_parser = sub.add_parser("sf")
    sf_sub = sf_parser.add_subparsers(dest="sf_command", required=True)
    p = sf_sub.add_parser("eval", help="point values of a reduced-ODE basis function (CSV)")
    p.add_argument("family", choices=["J", "I", "kummer", "coulomb"])
    p.add_argument("--params", required=True, help="nu | alpha,beta | l,eta")
    p.add_argument("--x", required=True, help="comma-separated arguments")
    p.add_argument("--branch", choices=["regular", "irregular"], default="regular")
    p.set_defaults(func=cmd_sf)

    leaves = [p for name, p in sub.choices.items() if name != "sf"] + [p]
    for p in leaves:
        p.add_argument("-o", "--output", default="-", help="output path, '-' for stdout")
        p.add_argument("--stamp", action="store_true", help="add a UTC timestamp to JSON reports")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, PowheatError, ValueError, KeyError, TypeError) as exc:
        print(f"powheat {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
