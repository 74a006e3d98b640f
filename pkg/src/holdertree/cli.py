"""Command-line front end.

Exit status: 0 on success, 1 on invalid input, 2 when the computation
certifies a negative result (a Property (T) violation or a quotient that
is not a tree).
"""
import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import fixtures
from .curves import SampledCurve
from .exceptions import InvalidInputError, NotATreeError
from .heisenberg import horizontal_lift, lifting_identity_residuals, shoelace_area
from .io import (
    graph_to_dict,
    read_curve_csv,
    read_field_csv,
    read_graph_json,
    tree_to_dict,
    write_curve_csv,
    write_field_csv,
    write_json,
    write_winding_csv,
)
from .surface import (
    MAX_DEPTH,
    get_test_function,
    surface_integral_first_order,
    surface_integral_second_order,
)
from .tree import build_quotient_tree, property_t_check
from .winding import winding_field, winding_moments
from .young import SampledFunction, young_integral

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NEGATIVE = 2

FIXTURES = ("circle", "figure-eight", "weierstrass", "star", "cycle", "lifted-circle")


def _positive(flag):
    def parse(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag} expects a number, got {text!r}") from None
        if not (v > 0 and math.isfinite(v)):
            raise argparse.ArgumentTypeError(f"{flag} must be > 0, got {text}")
        return v

    return parse


def _nonnegative(flag):
    def parse(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag} expects a number, got {text!r}") from None
        if not (v >= 0 and math.isfinite(v)):
            raise argparse.ArgumentTypeError(f"{flag} must be >= 0, got {text}")
        return v

    return parse


def _alpha(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--alpha expects a number, got {text!r}") from None
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError(f"--alpha must lie in (0, 1], got {text}")
    return v


def _level(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--level expects an integer, got {text!r}") from None
    if not 0 <= v <= MAX_DEPTH:
        raise argparse.ArgumentTypeError(f"--level must lie in [0, {MAX_DEPTH}], got {v}")
    return v


def _threads(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--threads expects an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("--threads must be >= 1")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="holdertree", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, needs_input=True):
        if needs_input:
            sp.add_argument("--input", required=True, help="input file")
        sp.add_argument("--output", help="output path (JSON report); stdout when omitted")
        sp.add_argument("--rtol", type=_positive("--rtol"), default=1e-9)
        sp.add_argument("--threads", type=_threads, default=None)

    sp = sub.add_parser("young", help="left-point Young integral of x1 against x2 along a curve CSV")
    common(sp)

    sp = sub.add_parser("winding", help="winding field and moments of a closed planar curve CSV")
    common(sp)
    sp.add_argument("--cell", type=_positive("--cell"), default=0.01)
    sp.add_argument("--grid", help="also write the winding field CSV here")

    sp = sub.add_parser("surface", help="dyadic surface sums of a square field CSV")
    common(sp)
    sp.add_argument("--order", type=int, choices=(1, 2), default=1)
    sp.add_argument("--f", choices=("one", "qx", "qy", "quad", "gauss"), default="one")
    sp.add_argument("--level", type=_level, default=None, help="deepest summation level")

    sp = sub.add_parser("tree", help="quotient tree of a graph JSON")
    common(sp)
    sp.add_argument("--epsilon", type=_nonnegative("--epsilon"), default=0.0)

    sp = sub.add_parser("heis", help="horizontal lift and lifting identities of a curve CSV")
    common(sp)
    sp.add_argument("--z0", type=float, default=0.0)
    sp.add_argument("--lift", help="write the lifted curve CSV here (planar input only)")

    sp = sub.add_parser("check-t", help="winding-moment Property (T) check of a planar graph JSON")
    common(sp)
    sp.add_argument("--cell", type=_positive("--cell"), default=0.01)
    sp.add_argument("--moments", choices=("full", "area"), default="full")

    sp = sub.add_parser("gen", help="write a fixture")
    sp.add_argument("name", choices=FIXTURES)
    sp.add_argument("--output", required=True)
    sp.add_argument("--alpha", type=_alpha, default=0.6)
    sp.add_argument("--level", type=_level, default=10)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--samples", type=int, default=None)
    return p


def _emit(obj, path):
    text = write_json(obj, path)
    if path is None:
        print(text)


def _cmd_young(args):
    curve = read_curve_csv(args.input)
    if curve.dim < 2:
        raise InvalidInputError("young needs a curve with at least two coordinates")
    f = SampledFunction(curve.times, curve.points[:, 0])
    g = SampledFunction(curve.times, curve.points[:, 1])
    r = young_integral(f, g, args.rtol)
    _emit({"value": r.value, "levels": r.levels, "tail_bound": r.tail_bound, "converged": r.converged}, args.output)
    return EXIT_OK


def _cmd_winding(args):
    curve = read_curve_csv(args.input)
    field = winding_field(curve, args.cell, threads=args.threads)
    m = winding_moments(field)
    _emit(m.as_dict(), args.output)
    if args.grid:
        write_winding_csv(field, args.grid)
    return EXIT_OK


def _truncate(field, level):
    if level is None or level >= field.N:
        return field
    from .surface import SquareField

    s = 2 ** (field.N - level)
    return SquareField(field.origin, field.side, field.phi1[::s, ::s], field.phi2[::s, ::s])


def _cmd_surface(args):
    field = _truncate(read_field_csv(args.input), args.level)
    f = get_test_function(args.f)
    run = surface_integral_second_order if args.order == 2 else surface_integral_first_order
    rep = run(field, f, rtol=args.rtol)
    out = rep.as_dict()
    out["order"] = args.order
    out["f"] = args.f
    _emit(out, args.output)
    return EXIT_OK


def _cmd_tree(args):
    gmap = read_graph_json(args.input)
    try:
        tree = build_quotient_tree(gmap, args.epsilon)
    except NotATreeError as e:
        _emit({"verdict": "not-a-tree", "message": str(e), "cycle": e.cycle, "vertex_cycle": e.vertex_cycle},
              args.output)
        return EXIT_NEGATIVE
    out = tree_to_dict(tree)
    out["verdict"] = "tree"
    _emit(out, args.output)
    return EXIT_OK


def _cmd_heis(args):
    curve = read_curve_csv(args.input)
    out = {}
    if curve.dim == 2:
        if not curve.closed:
            raise InvalidInputError("planar input must be a closed curve")
        lifted = horizontal_lift(curve, args.z0)
        out["z_gain"] = float(lifted.points[-1, 2] - lifted.points[0, 2])
        out["shoelace_area"] = shoelace_area(curve.points)
        if args.lift:
            write_curve_csv(lifted, args.lift)
        curve = lifted
    elif curve.dim == 3:
        out["z_gain"] = float(curve.points[-1, 2] - curve.points[0, 2])
    else:
        raise InvalidInputError(f"heis needs a curve with 2 or 3 coordinates, got {curve.dim}")
    r = lifting_identity_residuals(curve)
    out.update(r._asdict())
    _emit(out, args.output)
    return EXIT_OK


def _cmd_check_t(args):
    gmap = read_graph_json(args.input)
    cert = property_t_check(gmap, cell=args.cell, rtol=args.rtol, moments=args.moments, threads=args.threads)
    out = {"verdict": cert.verdict, "cycles_checked": cert.cycles_checked, "witness": cert.witness}
    if cert.moments is not None:
        out["moments"] = cert.moments.as_dict()
        out["tolerance"] = list(cert.tolerance)
    _emit(out, args.output)
    return cert.exit_code


def _cmd_gen(args):
    path = Path(args.output)
    name = args.name
    if name == "circle":
        write_curve_csv(fixtures.circle(args.samples or 1024), path)
    elif name == "figure-eight":
        write_curve_csv(fixtures.figure_eight(args.samples or 512), path)
    elif name == "lifted-circle":
        write_curve_csv(fixtures.lifted_circle(args.samples or 8192), path)
    elif name == "weierstrass":
        if args.level < 2:
            raise InvalidInputError("--level must be >= 2 for weierstrass")
        write_field_csv(fixtures.weierstrass_field(args.alpha, args.level, args.seed), path)
    elif name == "star":
        write_json(graph_to_dict(fixtures.star_graph(args.samples or 4)), path)
    elif name == "cycle":
        write_json(graph_to_dict(fixtures.cycle_graph(args.samples or 16)), path)
    return EXIT_OK


COMMANDS = {
    "young": _cmd_young,
    "winding": _cmd_winding,
    "surface": _cmd_surface,
    "tree": _cmd_tree,
    "heis": _cmd_heis,
    "check-t": _cmd_check_t,
    "gen": _cmd_gen,
}


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InvalidInputError as e:
        print(f"holdertree {args.command}: error: {e}", file=sys.stderr)
        return EXIT_INVALID


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
