"""Command-line front end: ``minkball <command> ...``.

Exit codes: 0 success, 1 input error, 2 infeasible problem / failed
certificate / negative decision, 3 solver soft failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as mio
from .majorization import inclusion_up_to_translation, majorizes
from .measures import (
    GridMeasure,
    blaschke_sum,
    body_from_measure,
    integral_breadth,
    mixed_volume,
    pairing,
    surface_measure,
    symmetrize_measure,
    volume,
)
from .render import RenderSpec, render_svg
from .rotation import RevolutionBody, axial_breadth, revolve_mean_width, revolve_volume
from .solvers.certificates import (
    check_external_certificate,
    check_external_flatten_certificate,
    check_internal_certificate,
)
from .solvers.problems import (
    FlatteningProblem,
    solve_external_urysohn,
    solve_external_urysohn_flatten,
    solve_internal_urysohn_flatten,
    solve_vector_isoperimetric,
    trace_pareto_frontier,
)
from .solvers.region import InfeasibleRegion, UnboundedRegion
from .support_core import (
    GeometryError,
    SupportVector,
    canonical_translate,
    convex_envelope,
    disk_support,
    is_even,
    is_valid_support,
    minkowski_combine,
    reconstruct_polygon,
    regular_polygon,
    steiner_point,
    support_of_polygon,
    symmetrize_support,
)

EXIT_OK, EXIT_INPUT, EXIT_FAIL, EXIT_SOFT = 0, 1, 2, 3

logger = logging.getLogger("minkball")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _emit(text: str, out: str | None) -> None:
    if out:
        mio.atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _num(v: float) -> str:
    """Scalar for terminal output: 15 significant digits, printed as a float."""
    return repr(float(f"{float(v):.15g}") + 0.0)  # + 0.0 turns -0.0 into 0.0


# -- body / measure commands ---------------------------------------------------

def _parse_points(text: str) -> np.ndarray:
    try:
        pts = [[float(c) for c in p.split(",")] for p in text.split(";") if p.strip()]
        arr = np.asarray(pts, dtype=float)
    except ValueError as exc:
        raise mio.InputError(f"cannot parse points {text!r}: {exc}") from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise mio.InputError("points must look like 'x,y;x,y;...'")
    return arr


def cmd_body_make(args) -> int:
    grid = mio.grid_of(args.n if args.n else mio.default_grid_n())
    centre = _parse_points(args.center)[0] if args.center else np.zeros(2)
    if args.disk is not None:
        if args.disk < 0:
            raise mio.InputError("disk radius must be nonnegative")
        h = SupportVector(grid, disk_support(grid, args.disk).values + grid.directions @ centre)
    elif args.regular is not None:
        if args.regular < 2:
            raise mio.InputError("a regular polygon needs at least 2 vertices")
        pts = regular_polygon(args.regular, args.radius, np.deg2rad(args.phase), centre)
        h = support_of_polygon(pts, grid)
    elif args.square is not None:
        s = 0.5 * args.square
        pts = np.array([[s, s], [-s, s], [-s, -s], [s, -s]]) + centre
        h = support_of_polygon(pts, grid)
    elif args.vertices is not None:
        h = support_of_polygon(_parse_points(args.vertices) + centre, grid)
    elif args.from_file is not None:
        h = mio.load_body(args.from_file, grid.n)
    else:
        raise mio.InputError("choose a shape: --disk, --regular, --square, --vertices or --from-file")
    _emit(mio.dumps(mio.body_to_dict(h)), args.output)
    return EXIT_OK


def body_info(h: SupportVector) -> dict:
    valid = is_valid_support(h)
    info = {"grid_n": h.n, "valid": valid, "even": is_even(h, 1e-12)}
    if valid:
        poly = reconstruct_polygon(h)
        info.update({
            "area": volume(h),
            "integral_breadth": integral_breadth(h),
            "perimeter": surface_measure(h).mass,
            "steiner_point": steiner_point(h),
            "vertices": poly.vertices,
        })
    return info


def cmd_body_info(args) -> int:
    h = mio.load_body(args.body)
    _emit(mio.dumps(body_info(h)), args.output)
    return EXIT_OK if is_valid_support(h) else EXIT_FAIL


def cmd_body_sum(args) -> int:
    a, b = mio.load_body(args.a), mio.load_body(args.b)
    if a.n != b.n:
        raise mio.InputError("bodies live on different grids")
    _emit(mio.dumps(mio.body_to_dict(minkowski_combine(args.wa, a, args.wb, b))), args.output)
    return EXIT_OK


def cmd_body_sym(args) -> int:
    _emit(mio.dumps(mio.body_to_dict(symmetrize_support(mio.load_body(args.body)))), args.output)
    return EXIT_OK


def cmd_body_envelope(args) -> int:
    h = mio.load_body(args.body)
    _emit(mio.dumps(mio.body_to_dict(convex_envelope(h.values, h.grid))), args.output)
    return EXIT_OK


def cmd_measure_of(args) -> int:
    _emit(mio.dumps(mio.measure_to_dict(surface_measure(mio.load_body(args.body)))), args.output)
    return EXIT_OK


def cmd_measure_blaschke(args) -> int:
    a, b = mio.load_measure(args.a), mio.load_measure(args.b)
    _emit(mio.dumps(mio.measure_to_dict(blaschke_sum(a, b))), args.output)
    return EXIT_OK


def cmd_measure_sym(args) -> int:
    _emit(mio.dumps(mio.measure_to_dict(symmetrize_measure(mio.load_measure(args.measure)))), args.output)
    return EXIT_OK


def cmd_measure_from(args) -> int:
    _emit(mio.dumps(mio.body_to_dict(body_from_measure(mio.load_measure(args.measure)))), args.output)
    return EXIT_OK


def _measure_or_body(path) -> GridMeasure:
    data = mio.read_json(path)
    if "weights" in data:
        return mio.measure_from_dict(data)
    return surface_measure(mio.body_from_dict(data))


def cmd_pair(args) -> int:
    h = mio.load_body(args.body)
    w = _measure_or_body(args.measure)
    if h.n != w.n:
        raise mio.InputError("body and measure live on different grids")
    print(_num(pairing(h, w)))
    return EXIT_OK


def cmd_mixed_volume(args) -> int:
    a, b = mio.load_body(args.a), mio.load_body(args.b)
    if a.n != b.n:
        raise mio.InputError("bodies live on different grids")
    print(_num(mixed_volume(a, b)))
    return EXIT_OK


def cmd_majorize(args) -> int:
    mu, nu = _measure_or_body(args.mu), _measure_or_body(args.nu)
    if mu.n != nu.n:
        raise mio.InputError("measures live on different grids")
    res = majorizes(mu, nu, want_violator=True)
    if res.dominated:
        print(f"dominated (defect {res.defect + 0.0:.3e})")
        return EXIT_OK
    print(f"not dominated (defect {res.defect + 0.0:.3e})")
    if res.violator is not None:
        p = res.violator
        print("violating sublinear function p(x) = max_k <a_k, x> with")
        for a in p.vectors:
            print(f"  a = ({_num(a[0])}, {_num(a[1])})")
        print(f"  int p dmu = {_num(p.integral(mu))} < int p dnu = {_num(p.integral(nu))}")
    return EXIT_FAIL


def cmd_include(args) -> int:
    outer, inner = mio.load_body(args.outer), mio.load_body(args.inner)
    if outer.n != inner.n:
        raise mio.InputError("bodies live on different grids")
    fits, t = inclusion_up_to_translation(outer, inner)
    if fits:
        print(f"fits after translation by ({_num(t[0])}, {_num(t[1])})")
        return EXIT_OK
    print("does not fit")
    return EXIT_FAIL


# -- solvers ---------------------------------------------------------------------

def _cert_dict(cert) -> dict:
    return {"alpha": cert.alpha, "beta": cert.beta, "residual": cert.residual,
            "contact_violation": cert.contact_violation, "pass": cert.passed, "kind": cert.kind}


def solve_problem(spec: dict) -> tuple[dict, int]:
    kind = spec["problem"]
    if kind == "iso":
        w, cert, alpha = solve_vector_isoperimetric(spec["bodies"], spec["lambda"], spec["volume"])
        h = body_from_measure(w)
        lam = spec["lambda"]
        objective = sum(l * mixed_volume(y, h) for l, y in zip(lam, spec["bodies"]))
        result = {"problem": kind, "grid_n": h.n, "support": h.values, "measure": w.weights,
                  "coefficients": alpha, "certificate": _cert_dict(cert),
                  "objectives": {"weighted_mixed_volume": objective, "volume": volume(h)}}
        return result, (EXIT_OK if cert.passed else EXIT_FAIL)
    x0 = spec["x0"]
    if kind == "urysohn-ext":
        h, cert = solve_external_urysohn(x0, spec["breadth"])
        status = cert.details.get("status", "ok")
        objectives = {"volume": volume(h), "integral_breadth": integral_breadth(h)}
    else:
        solver = solve_internal_urysohn_flatten if kind == "urysohn-int" else solve_external_urysohn_flatten
        point, cert = solver(x0, spec["z_index"], spec["breadth"], spec["beta_cap"])
        h, status = point.h, point.status
        objectives = {"volume": point.objective_values[0], "breadth_z": point.objective_values[1],
                      "integral_breadth": integral_breadth(h)}
    result = {"problem": kind, "grid_n": h.n, "support": h.values, "certificate": _cert_dict(cert),
              "objectives": objectives, "status": status}
    if status == "max-iter":
        return result, EXIT_SOFT
    return result, (EXIT_OK if cert.passed else EXIT_FAIL)


def cmd_solve(args) -> int:
    spec = mio.load_problem(args.spec)
    result, code = solve_problem(spec)
    _emit(mio.dumps(result), args.output)
    print(f"certificate {'PASS' if result['certificate']['pass'] else 'FAIL'}: "
          f"residual {result['certificate']['residual']:.3e}", file=sys.stderr)
    return code


def certify(h: SupportVector, spec: dict):
    kind = spec["problem"]
    if kind == "urysohn-int":
        return check_internal_certificate(h, spec["x0"], spec["z_index"])
    if kind == "urysohn-ext":
        return check_external_certificate(h, spec["x0"])
    if kind == "urysohn-ext-flat":
        return check_external_flatten_certificate(h, spec["x0"], spec["z_index"])
    raise mio.InputError("certify supports the Urysohn problems; iso solutions are certified by `solve`")


def cmd_certify(args) -> int:
    spec = mio.load_problem(args.spec)
    h = mio.load_body(args.body, spec["grid_n"])
    if h.n != spec["grid_n"]:
        raise mio.InputError("body and problem live on different grids")
    cert = certify(h, spec)
    print(mio.dumps(_cert_dict(cert)), end="")
    print(cert.summary(), file=sys.stderr)
    return EXIT_OK if cert.passed else EXIT_FAIL


def _parse_caps(text: str) -> list:
    try:
        a, b, steps = text.split(":")
        a, b, steps = float(a), float(b), int(steps)
    except ValueError as exc:
        raise mio.InputError("--caps expects a:b:steps") from exc
    if steps < 1:
        raise mio.InputError("--caps needs at least one step")
    return [a] if steps == 1 else list(np.linspace(a, b, steps))


def cmd_frontier(args) -> int:
    spec = mio.load_problem(args.spec)
    kinds = {"urysohn-int": "internal", "urysohn-ext-flat": "external-flatten"}
    if spec["problem"] not in kinds:
        raise mio.InputError("frontier needs a flattening problem (urysohn-int or urysohn-ext-flat)")
    problem = FlatteningProblem(kinds[spec["problem"]], spec["x0"], spec["z_index"], spec["breadth"])
    frontier = trace_pareto_frontier(problem, _parse_caps(args.caps))
    rows = [(p.scalarization["cap"], p.objective_values[0], p.objective_values[1], c.alpha, c.beta, c.residual)
            for p, c in zip(frontier.points, frontier.certificates)]
    _emit(mio.frontier_csv(rows), args.output)
    for cap, reason in frontier.skipped:
        print(f"cap {cap:.17g} skipped: {reason}", file=sys.stderr)
    if any(p.status == "max-iter" for p in frontier.points):
        return EXIT_SOFT
    return EXIT_OK if all(c.passed for c in frontier.certificates) else EXIT_FAIL


def cmd_render(args) -> int:
    bodies = [mio.load_body(p) for p in args.bodies]
    contacts = []
    if args.contact:
        other = mio.load_body(args.contact, bodies[0].n)
        contacts = [(0, other, 1e-6)]
    spec = RenderSpec(args.width, args.height, [(b, None) for b in bodies],
                      contact_highlight=bool(contacts), measure_glyphs=args.glyphs, contacts=contacts)
    _emit(render_svg(spec), args.output)
    return EXIT_OK


def cmd_revolve(args) -> int:
    data = mio.read_json(args.body)
    h = mio.body_from_dict(data)
    axis = args.axis if args.axis is not None else data.get("axis_index")
    if axis is None:
        raise mio.InputError("give --axis or an 'axis_index' entry in the body file")
    b = RevolutionBody(h, int(axis))
    print(mio.dumps({"axis_index": b.axis_index, "volume": revolve_volume(b),
                     "mean_width": revolve_mean_width(b), "axial_breadth": axial_breadth(b)}), end="")
    return EXIT_OK


# -- figures ------------------------------------------------------------------------

def figure1(n: int, breadth: float):
    """Triangle of circumradius 1/2 (vertex up) and its external Urysohn body."""
    grid = mio.grid_of(n)
    tri = support_of_polygon(regular_polygon(3, 0.5), grid)
    h, cert = solve_external_urysohn(tri, breadth)
    return tri, h, cert


def figure2(n: int, breadth: float, cap: float):
    """Symmetric body of largest area inside a triangle (circumradius 1), vertical flattening."""
    grid = mio.grid_of(n)
    tri = support_of_polygon(regular_polygon(3, 1.0), grid)
    point, cert = solve_internal_urysohn_flatten(tri, grid.n // 4, breadth, cap)
    return tri, point, cert


def cmd_figure1(args) -> int:
    n = args.n or mio.default_grid_n()
    tri, h, cert = figure1(n, args.breadth)
    spec = RenderSpec(args.width, args.height, [(tri, None), (h, None)], contact_highlight=True,
                      contacts=[(1, tri, 1e-6)], caption=cert.summary())
    _emit(render_svg(spec), args.output)
    print(cert.summary(), file=sys.stderr)
    print(f"equation residual {cert.details.get('equation_residual', float('nan')):.3e}", file=sys.stderr)
    return EXIT_OK if cert.passed else EXIT_FAIL


def cmd_figure2(args) -> int:
    n = args.n or mio.default_grid_n()
    tri, point, cert = figure2(n, args.breadth, args.cap)
    spec = RenderSpec(args.width, args.height, [(tri, None), (point.h, None)], contact_highlight=True,
                      contacts=[(1, tri, 1e-6)], caption=cert.summary())
    _emit(render_svg(spec), args.output)
    print(cert.summary(), file=sys.stderr)
    if point.status == "max-iter":
        return EXIT_SOFT
    return EXIT_OK if cert.passed else EXIT_FAIL


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="minkball", description="Support-function calculus and Minkowski-ball solvers.")
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = p.add_subparsers(dest="command", required=True)

    def out(sp):
        sp.add_argument("-o", "--output", help="output file (default: stdout)")

    body = sub.add_parser("body", help="build and inspect bodies")
    bsub = body.add_subparsers(dest="action", required=True)
    mk = bsub.add_parser("make", help="support vector of a shape")
    mk.add_argument("--n", type=int, help="grid size (default: $MINKBALL_GRID_N or 360)")
    mk.add_argument("--disk", type=float, metavar="R")
    mk.add_argument("--regular", type=int, metavar="M")
    mk.add_argument("--radius", type=float, default=1.0, help="circumradius for --regular")
    mk.add_argument("--phase", type=float, default=90.0, help="first vertex angle in degrees for --regular")
    mk.add_argument("--square", type=float, metavar="SIDE")
    mk.add_argument("--vertices", metavar="'x,y;x,y;...'")
    mk.add_argument("--from-file", metavar="JSON", help="body file with vertices to resample")
    mk.add_argument("--center", metavar="'x,y'")
    out(mk)
    mk.set_defaults(func=cmd_body_make)
    for name, func, helptext in (("info", cmd_body_info, "area, breadth, vertices"),
                                 ("sym", cmd_body_sym, "central symmetral (h(u) + h(-u)) / 2"),
                                 ("envelope", cmd_body_envelope, "convex envelope of raw support values")):
        sp = bsub.add_parser(name, help=helptext)
        sp.add_argument("body")
        out(sp)
        sp.set_defaults(func=func)
    sm = bsub.add_parser("sum", help="Minkowski combination wa*a + wb*b")
    sm.add_argument("a")
    sm.add_argument("b")
    sm.add_argument("--wa", type=float, default=1.0)
    sm.add_argument("--wb", type=float, default=1.0)
    out(sm)
    sm.set_defaults(func=cmd_body_sum)

    meas = sub.add_parser("measure", help="surface measures")
    msub = meas.add_subparsers(dest="action", required=True)
    sp = msub.add_parser("of", help="surface measure of a body")
    sp.add_argument("body")
    out(sp)
    sp.set_defaults(func=cmd_measure_of)
    sp = msub.add_parser("blaschke", help="Blaschke sum of two measures")
    sp.add_argument("a")
    sp.add_argument("b")
    out(sp)
    sp.set_defaults(func=cmd_measure_blaschke)
    sp = msub.add_parser("sym", help="symmetrized measure")
    sp.add_argument("measure")
    out(sp)
    sp.set_defaults(func=cmd_measure_sym)
    sp = msub.add_parser("from", help="body with a given measure (Minkowski problem)")
    sp.add_argument("measure")
    out(sp)
    sp.set_defaults(func=cmd_measure_from)

    sp = sub.add_parser("pair", help="<h, mu> = (1/2) sum h_i w_i")
    sp.add_argument("--body", required=True)
    sp.add_argument("--measure", required=True, help="measure file or body file")
    sp.set_defaults(func=cmd_pair)
    sp = sub.add_parser("mixed-volume", help="mixed area V1(a, b)")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.set_defaults(func=cmd_mixed_volume)
    sp = sub.add_parser("majorize", help="decide mu >> nu; prints a violator when not")
    sp.add_argument("--mu", required=True, help="measure file or body file")
    sp.add_argument("--nu", required=True, help="measure file or body file")
    sp.set_defaults(func=cmd_majorize)
    sp = sub.add_parser("include", help="does INNER fit in OUTER after a translation")
    sp.add_argument("outer")
    sp.add_argument("inner")
    sp.set_defaults(func=cmd_include)

    sp = sub.add_parser("solve", help="solve a problem spec")
    sp.add_argument("spec")
    out(sp)
    sp.set_defaults(func=cmd_solve)
    sp = sub.add_parser("certify", help="check the optimality certificate of a body")
    sp.add_argument("body")
    sp.add_argument("spec")
    sp.set_defaults(func=cmd_certify)
    sp = sub.add_parser("frontier", help="epsilon-constraint sweep over flattening caps")
    sp.add_argument("spec")
    sp.add_argument("--caps", required=True, metavar="a:b:steps")
    out(sp)
    sp.set_defaults(func=cmd_frontier)
    sp = sub.add_parser("render", help="SVG drawing of bodies")
    sp.add_argument("bodies", nargs="+")
    sp.add_argument("--contact", help="mark where the first body touches this one")
    sp.add_argument("--glyphs", action="store_true", help="draw measure ticks")
    sp.add_argument("--width", type=int, default=480)
    sp.add_argument("--height", type=int, default=480)
    out(sp)
    sp.set_defaults(func=cmd_render)
    sp = sub.add_parser("revolve", help="volume and mean width of the solid of revolution")
    sp.add_argument("body")
    sp.add_argument("--axis", type=int, help="direction index of the axis")
    sp.set_defaults(func=cmd_revolve)

    figures = (("figure1", cmd_figure1, "largest body of given breadth around a triangle (SVG)", {"breadth": 1.5}),
               ("figure2", cmd_figure2, "flattened largest body inside a triangle (SVG)", {"breadth": 1.6, "cap": 1.2}))
    for name, func, text, extra in figures:
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--n", type=int, help="grid size (default: $MINKBALL_GRID_N or 360)")
        sp.add_argument("--breadth", type=float, default=extra["breadth"], help="integral breadth level")
        if "cap" in extra:
            sp.add_argument("--cap", type=float, default=extra["cap"], help="cap on the vertical breadth")
        sp.add_argument("--width", type=int, default=480)
        sp.add_argument("--height", type=int, default=480)
        out(sp)
        sp.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return int(args.func(args))
    except (mio.InputError, GeometryError, UnboundedRegion) as exc:
        print(f"minkball: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleRegion as exc:
        print(f"minkball: infeasible: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"minkball: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def run(argv=None) -> int:
    try:
        return main(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
