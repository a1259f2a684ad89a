"""Command-line interface: ``curvedlink SUBCOMMAND [options]``.

Reports are JSON on stdout (or ``--output FILE``); ``sweep`` writes CSV rows
``resolution,value,delta,order``.  Exit codes: 0 success, 2 invalid input,
3 computation rejected on geometric grounds, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import electro, linking
from .curves import make_framing, resample
from .errors import CurvedLinkError, InvalidInput, TagMismatch
from .fields import FieldSpec, eval_field
from .helicity import ball_radius_for_volume, ball_volume, bound_N, helicity
from .io import Report, load_curve, load_field, load_scalar, write_report
from .kernels import SHIFT_KERNEL, get_kernel
from .quadrature import PolarGrid, S3Grid, convergence_sweep, estimated_order
from .space import SpaceTag, geometry

SUBCOMMANDS = ("link", "writhe", "twist", "ltw", "bs", "green", "helicity", "maxwell-check", "keylemma", "bounds",
               "sweep")


def _ints(text):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", choices=["r3", "s3", "h3"])
    common.add_argument("--format", dest="fmt", choices=["left", "parallel", "euclidean"])
    common.add_argument("--samples", type=int, help="curve nodes, sample points or configurations")
    common.add_argument("--grid", type=_ints, help="volume grid shape n1,n2,n3")
    common.add_argument("--out", choices=["json", "csv"], help="report format")
    common.add_argument("--output", help="write the report to this file")
    common.add_argument("--workers", type=int, help="threads for double sums (values do not depend on it)")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="curvedlink", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("link", parents=[common], help="linking number of two closed curves")
    s.add_argument("--curve", required=True)
    s.add_argument("--curve2", required=True)

    s = sub.add_parser("writhe", parents=[common], help="writhe of a closed curve")
    s.add_argument("--curve", required=True)

    for name, text in (("twist", "twist of a framed curve"), ("ltw", "compare Lk with Tw + Wr for a ribbon")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("--curve", required=True)
        s.add_argument("--framing", default="parallel_corrected",
                       help="right_j, parallel, parallel_corrected, constant_angle or file (framing from the curve file)")
        s.add_argument("--theta", type=float, default=0.0, help="angle for constant_angle framings")
        s.add_argument("--order", type=int, default=4, choices=[2, 4], help="finite-difference order")
        if name == "ltw":
            s.add_argument("--eps", type=float, default=1e-2)

    for name, text in (("bs", "Biot-Savart field at sample points"), ("green", "Green's operator at sample points")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("--field", required=True)
        s.add_argument("--at", type=_floats, help="evaluate at this point instead of random samples")

    s = sub.add_parser("helicity", parents=[common], help="helicity of a field")
    s.add_argument("--field", required=True)
    s.add_argument("--route", choices=["double_integral", "bs_pairing"], default="bs_pairing")

    s = sub.add_parser("maxwell-check", parents=[common], help="Maxwell residuals for a current")
    s.add_argument("--field", required=True)
    s.add_argument("--density", help="charge density registry:NAME (default: -div J)")
    s.add_argument("--at", type=_floats, help="evaluate at this point instead of random samples")

    s = sub.add_parser("keylemma", parents=[common], help="key lemma residuals at random configurations")
    s.add_argument("--kernel", help="kernel id (default: the shifted kernel of the space)")

    s = sub.add_parser("bounds", parents=[common], help="Biot-Savart bound N(R) for a ball")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--volume", type=float)
    g.add_argument("--radius", type=float)

    s = sub.add_parser("sweep", parents=[common], help="convergence sweep written as CSV")
    s.add_argument("--quantity", choices=["link", "writhe", "bs", "helicity"], required=True)
    s.add_argument("--sweep", type=_floats, required=True, help="resolutions r1,r2,...")
    s.add_argument("--curve")
    s.add_argument("--curve2")
    s.add_argument("--field")
    s.add_argument("--route", choices=["double_integral", "bs_pairing"], default="double_integral")
    return p


# ---------------------------------------------------------------------------
# helpers


def _curve(ref, space, n=None):
    curve, framing = load_curve(ref)
    if space is not None and curve.tag is not SpaceTag(space):
        raise TagMismatch(f"curve {ref} lives on {curve.tag.value}, not {space}")
    if n is not None and n != curve.n:
        if framing is not None:
            framing = linking.resample_framing(framing, n)
            curve = framing.curve
        else:
            curve = resample(curve, n)
    return curve, framing


def _field(args) -> FieldSpec:
    spec = load_field(args.field, args.space)
    if args.space is not None and spec.tag is not SpaceTag(args.space):
        raise TagMismatch(f"field {args.field} lives on {spec.tag.value}, not {args.space}")
    return spec


def _grid(spec: FieldSpec, shape):
    if shape is None:
        return electro.volume_grid(spec)
    if len(shape) != 3 or min(shape) < 2:
        raise InvalidInput("--grid needs three sizes of at least 2")
    if spec.tag is SpaceTag.S3 and spec.support_radius() is None:
        if shape[2] % 2:
            raise InvalidInput("the last S^3 grid size must be even")
        return S3Grid.build(*shape)
    R = spec.support_radius()
    if R is None:
        raise InvalidInput("fields on R^3 and H^3 need compact support")
    return PolarGrid.build(spec.tag, spec.center_point, R, *shape)


def _points(args, spec):
    if args.at is not None:
        g = geometry(spec.tag)
        p = np.asarray(args.at, dtype=float)
        if p.shape != (g.dim,):
            raise InvalidInput(f"--at needs {g.dim} coordinates on {spec.tag.value}")
        if abs(float(g.membership(p))) > 1e-8:
            raise InvalidInput("--at point is not on the manifold")
        return g.reproject(p)[None]
    n = 4 if args.samples is None else args.samples
    return electro.sample_points(spec, n, np.random.default_rng(args.seed))


def _framing(args, curve, file_framing):
    if args.framing == "file":
        if file_framing is None:
            raise InvalidInput("--framing file needs a curve file with a framing")
        return file_framing
    return make_framing(curve, args.framing, theta0=args.theta)


# ---------------------------------------------------------------------------
# commands


def cmd_link(args):
    k1, _ = _curve(args.curve, args.space, args.samples)
    k2, _ = _curve(args.curve2, args.space, args.samples)
    r = linking.linking_number(k1, k2, args.fmt, workers=args.workers)
    fmt = linking.resolve_format(k1.tag, args.fmt).value
    return Report("link", {"curve": args.curve, "curve2": args.curve2, "space": k1.tag.value, "format": fmt},
                  {"samples": [r.n_outer, r.n_inner]},
                  {"value": r.value, "first": r.first, "second": r.second, "min_distance": r.min_distance},
                  r.integer_gap, r.error_estimate)


def cmd_writhe(args):
    c, _ = _curve(args.curve, args.space, args.samples)
    r = linking.writhe(c, args.fmt, workers=args.workers)
    fmt = linking.resolve_format(c.tag, args.fmt).value
    return Report("writhe", {"curve": args.curve, "space": c.tag.value, "format": fmt}, {"samples": r.n},
                  {"value": r.value, "first": r.first, "second": r.second, "length": c.length},
                  None, r.error_estimate)


def cmd_twist(args):
    c, ff = _curve(args.curve, args.space, args.samples)
    fr = _framing(args, c, ff)
    fmt = linking.resolve_format(c.tag, args.fmt)
    flavor = "parallel" if fmt is linking.Format.EUCLIDEAN else fmt.value
    r = linking.twist(fr, flavor, order=args.order)
    return Report("twist", {"curve": args.curve, "framing": args.framing, "space": c.tag.value, "format": flavor},
                  {"samples": c.n, "method": r.method}, {"value": r.value, "length": c.length})


def cmd_ltw(args):
    c, ff = _curve(args.curve, args.space, args.samples)
    fr = _framing(args, c, ff)
    r = linking.ltw_check(fr, args.eps, args.fmt, order=args.order, workers=args.workers)
    values = {"lk": r.lk, "tw": r.tw, "wr": r.wr, "residual": r.residual, "length": r.length}
    if r.fmt == "left":
        # left-format writhe and twist each sit L / 2 pi below their parallel versions
        values["length_offset"] = r.length / np.pi
        values["residual_after_offset"] = r.residual - r.length / np.pi
    return Report("ltw", {"curve": args.curve, "framing": args.framing, "space": c.tag.value, "format": r.fmt,
                          "eps": args.eps}, {"samples": r.n}, values, r.integer_gap,
                  max(r.lk_error, r.wr_error))


def _bs_like(args, name):
    spec = _field(args)
    grid = _grid(spec, args.grid)
    P = _points(args, spec)
    if name == "bs":
        vals = electro.biot_savart_many(spec, P, args.fmt, grid)
        fmt = linking.resolve_format(spec.tag, args.fmt).value
    else:
        vals = np.stack([electro.greens_operator(spec, p, grid) for p in P])
        fmt = "left"
    g = geometry(spec.tag)
    V = eval_field(spec, P)
    return Report(name, {"field": args.field, "space": spec.tag.value, "format": fmt, "seed": args.seed},
                  {"grid": list(grid.shape), "points": len(P)},
                  {"points": P, "values": vals, "field": V, "norms": g.norm(vals)})


def cmd_bs(args):
    return _bs_like(args, "bs")


def cmd_green(args):
    return _bs_like(args, "green")


def cmd_helicity(args):
    spec = _field(args)
    grid = None if args.grid is None else _grid(spec, args.grid)
    r = helicity(spec, args.fmt, grid, args.route, workers=args.workers)
    return Report("helicity", {"field": args.field, "space": spec.tag.value, "format": r.fmt, "route": r.route},
                  {"grid": None if grid is None else list(grid.shape), "nodes": r.n_nodes},
                  {"value": r.value, "value_over_pi2": r.value / np.pi**2}, None, r.error_estimate)


def cmd_maxwell(args):
    spec = _field(args)
    grid = _grid(spec, args.grid)
    rho = None if args.density is None else load_scalar(args.density, spec.tag)
    if rho is not None:
        electro.check_charge(rho, grid)
    P = _points(args, spec)
    reps = [electro.maxwell_residuals(spec, p, grid, rho, args.fmt) for p in P]
    keys = ("div_e_minus_rho", "rho", "curl_e", "div_b", "ampere", "j_norm")
    values = {k: [getattr(r, k) for r in reps] for k in keys}
    values["max_ampere_relative"] = max(r.ampere / r.j_norm if r.j_norm > 0 else r.ampere for r in reps)
    return Report("maxwell-check", {"field": args.field, "density": args.density, "space": spec.tag.value,
                                    "seed": args.seed}, {"grid": list(grid.shape), "points": len(P)}, values)


def cmd_keylemma(args):
    tag = SpaceTag(args.space or "s3")
    if tag is SpaceTag.R3:
        raise InvalidInput("the key lemma is checked on s3 and h3")
    kid = SHIFT_KERNEL[tag] if args.kernel is None else args.kernel
    k = get_kernel(kid)
    if k.tag is not tag:
        raise TagMismatch(f"kernel {k.id.value} lives on {k.tag.value}")
    rng = np.random.default_rng(args.seed)
    n = 100 if args.samples is None else args.samples
    res = [electro.key_lemma_residual(*electro.key_lemma_sample(tag, rng), k.id) for _ in range(n)]
    return Report("keylemma", {"space": tag.value, "kernel": k.id.value, "seed": args.seed}, {"configurations": n},
                  {"max_residual": max(res), "mean_residual": float(np.mean(res))})


def cmd_bounds(args):
    tag = SpaceTag(args.space or "s3")
    R = ball_radius_for_volume(tag, args.volume) if args.volume is not None else args.radius
    N = bound_N(tag, R)
    return Report("bounds", {"space": tag.value, "volume": args.volume, "radius": args.radius}, {},
                  {"R": R, "N": N, "curl_eigen_bound": 1.0 / N, "ball_volume": ball_volume(tag, R)})


def cmd_sweep(args):
    q = args.quantity
    if q == "link":
        if not (args.curve and args.curve2):
            raise InvalidInput("link sweeps need --curve and --curve2")
        k1, _ = _curve(args.curve, args.space)
        k2, _ = _curve(args.curve2, args.space)

        def comp(r):
            return linking.linking_number(resample(k1, int(r)), resample(k2, int(r)), args.fmt,
                                          workers=args.workers).value
    elif q == "writhe":
        if not args.curve:
            raise InvalidInput("writhe sweeps need --curve")
        c, _ = _curve(args.curve, args.space)

        def comp(r):
            return linking.writhe(resample(c, int(r)), args.fmt, workers=args.workers).value
    else:
        if not args.field:
            raise InvalidInput(f"{q} sweeps need --field")
        spec = _field(args)
        if q == "bs":
            y = electro.sample_points(spec, 1, np.random.default_rng(args.seed))[0]
            V = eval_field(spec, y)
            g = geometry(spec.tag)

            def comp(r):
                B = electro.biot_savart(spec, y, args.fmt, electro.volume_grid(spec, scale=r)).value
                return float(g.inner(B, V))
        else:
            def comp(r):
                return helicity(spec, args.fmt, electro.volume_grid(spec, scale=r), args.route,
                                    workers=args.workers).value
    rows = convergence_sweep(comp, args.sweep)
    return Report("sweep", {"quantity": q, "curve": args.curve, "curve2": args.curve2, "field": args.field,
                            "format": args.fmt, "route": args.route if q == "helicity" else None},
                  {"resolutions": list(args.sweep)}, {"order": estimated_order(rows)},
                  rows=[{"resolution": r.resolution, "value": r.value, "delta": r.delta, "order": r.order}
                        for r in rows])


COMMANDS = {"link": cmd_link, "writhe": cmd_writhe, "twist": cmd_twist, "ltw": cmd_ltw, "bs": cmd_bs,
            "green": cmd_green, "helicity": cmd_helicity, "maxwell-check": cmd_maxwell, "keylemma": cmd_keylemma,
            "bounds": cmd_bounds, "sweep": cmd_sweep}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        with np.errstate(all="ignore"):
            report = COMMANDS[args.command](args)
    except CurvedLinkError as exc:
        print(json.dumps({"command": args.command, "error": type(exc).__name__, "message": str(exc)}), file=stderr)
        return exc.exit_code
    except (ValueError, KeyError) as exc:
        print(json.dumps({"command": args.command, "error": type(exc).__name__, "message": str(exc)}), file=stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(json.dumps({"command": args.command, "error": type(exc).__name__, "message": str(exc)}), file=stderr)
        return 4
    report.runtime = time.perf_counter() - t0
    out = args.out or ("csv" if args.command == "sweep" else "json")
    text = write_report(report, args.output, out)
    if args.output is None:
        stdout.write(text if text.endswith("\n") else text + "\n")
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
