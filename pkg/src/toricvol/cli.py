"""Command-line front end.

    toricvol validate      --polytope P | --cone C
    toricvol soliton       --polytope P [--tol T]
    toricvol ckem-critical --polytope P [--starts N --seed S]
    toricvol ckem-ode      --m M --c C [--tol T]
    toricvol sasaki-reeb   --cone C [--tol T]
    toricvol eh-landscape  --polytope P [--grid N]

Geometry arguments are file paths or names of bundled examples (a leading
``examples/`` and trailing ``.json`` are accepted).  Exit codes: 0 success,
2 geometric precondition failure, 3 solver non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, catalog
from ._backend import BACKEND
from .ckem import eh_landscape, find_critical_points
from .errors import ConvergenceError, GeometryError
from .ode import solve_product_ode
from .polytope import (MomentCone, Polytope, cone_from_dict, polytope_from_dict,
                       validate_delzant, validate_reflexive)
from .sasaki import minimize_reeb_volume, sasaki_futaki, slice_center
from .soliton import soliton_gradient, solve_soliton_field

EXIT_OK, EXIT_GEOMETRY, EXIT_SOLVER = 0, 2, 3


def _read_document(ref: str, param=None) -> dict:
    path = Path(ref)
    if path.is_file():
        try:
            return json.loads(path.read_text(), parse_float=Fraction)
        except json.JSONDecodeError as exc:
            raise GeometryError("%s: malformed JSON (%s)" % (ref, exc)) from exc
    stem = path.name[:-5] if path.name.endswith(".json") else path.name
    return catalog.load_document(stem, param)


def parse_geometry(ref: str, param=None) -> Polytope | MomentCone:
    """Load and validate a polytope or cone document."""
    doc = _read_document(ref, param)
    if not isinstance(doc, dict):
        raise GeometryError("%s: top level must be a JSON object" % ref)
    try:
        if "fan_rays" in doc:
            return cone_from_dict(doc)
        return polytope_from_dict(doc)
    except GeometryError as exc:
        raise GeometryError("%s: %s" % (ref, exc)) from exc


def input_digest(obj) -> str:
    payload = json.dumps(obj.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _need(obj, kind, flag):
    if not isinstance(obj, kind):
        raise GeometryError("%s must name a %s document" % (flag, kind.__name__))
    return obj


def _cmd_validate(args):
    if args.polytope:
        P = _need(parse_geometry(args.polytope, args.param), Polytope, "--polytope")
        rep = validate_delzant(P)
        return P, {
            "kind": "polytope",
            "name": P.name,
            "dim": P.dim,
            "n_vertices": len(P.vertices),
            "n_facets": len(P.facets),
            "volume": P.volume,
            "boundary_measure": P.boundary_measure,
            "delzant": rep.delzant,
            "non_delzant_vertices": list(rep.offending_vertices),
            "reflexive": validate_reflexive(P),
            "origin_interior": P.contains_origin_strictly(),
        }
    if args.cone:
        C = _need(parse_geometry(args.cone), MomentCone, "--cone")
        return C, {"kind": "cone", **C.to_dict(), "determinants": list(C.determinants)}
    raise GeometryError("validate needs --polytope or --cone")


def _cmd_soliton(args):
    P = _need(parse_geometry(args.polytope, args.param), Polytope, "--polytope")
    sol = solve_soliton_field(P, tol=args.tol)
    return P, {
        "c": list(sol.c),
        "W": sol.potential_value,
        "gradient_norm": sol.gradient_norm,
        "hessian_condition": sol.hessian_condition,
        "iterations": sol.iterations,
        "futaki_at_zero": soliton_gradient(P, np.zeros(P.dim)).tolist(),
    }


def _cmd_ckem_critical(args):
    P = _need(parse_geometry(args.polytope, args.param), Polytope, "--polytope")
    report = find_critical_points(P, n_starts=args.starts, seed=args.seed)
    return P, report.to_dict()


def _cmd_ckem_ode(args):
    sol = solve_product_ode(args.m, args.c, tol=args.tol)
    return None, sol.to_dict()


def _cmd_sasaki(args):
    C = _need(parse_geometry(args.cone), MomentCone, "--cone")
    res = minimize_reeb_volume(C, tol=args.tol)
    center = slice_center(C)
    futaki = [sasaki_futaki(C, center, e) for e in np.eye(C.dim)[1:]]
    return C, {**res.to_dict(), "slice_center": center.tolist(), "futaki_at_center": futaki}


COMMANDS = {
    "validate": _cmd_validate,
    "soliton": _cmd_soliton,
    "ckem-critical": _cmd_ckem_critical,
    "ckem-ode": _cmd_ckem_ode,
    "sasaki-reeb": _cmd_sasaki,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toricvol", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, geometry=True, cone=False):
        if geometry:
            p.add_argument("--polytope", help="polytope JSON file or bundled name")
            p.add_argument("--param", help="parameter for product_p / blowup_p")
        if cone:
            p.add_argument("--cone", help="cone JSON file or bundled name")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--no-timing", action="store_true", help="omit the timing field")

    p = sub.add_parser("validate", help="validate a polytope or cone")
    common(p, cone=True)
    p = sub.add_parser("soliton", help="soliton vector field of a toric Fano polytope")
    common(p)
    p.add_argument("--tol", type=float, default=1e-10)
    p = sub.add_parser("ckem-critical", help="critical points of the Einstein-Hilbert functional")
    common(p)
    p.add_argument("--starts", type=int, default=200)
    p.add_argument("--seed", type=int, default=42)
    p = sub.add_parser("ckem-ode", help="product-construction ODE")
    common(p, geometry=False)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p = sub.add_parser("sasaki-reeb", help="minimize the Reeb volume on the charge slice")
    common(p, geometry=False, cone=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p = sub.add_parser("eh-landscape", help="CSV of EH over the admissible sphere patch")
    common(p)
    p.add_argument("--grid", type=int, default=200)
    return parser


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run(command: str, args) -> dict:
    """Execute a command and return its report (not for ``eh-landscape``)."""
    start = time.perf_counter()
    geometry, result = COMMANDS[command](args)
    report = {
        "command": command,
        "args": {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "no_timing")},
        "input_digest": input_digest(geometry) if geometry is not None else None,
        "version": __version__,
        "backend": BACKEND,
        "seed": getattr(args, "seed", None),
        "result": result,
    }
    if not getattr(args, "no_timing", False):
        report["timing_s"] = time.perf_counter() - start
    return _jsonable(report)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "eh-landscape":
            P = _need(parse_geometry(args.polytope, args.param), Polytope, "--polytope")
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(["theta", "phi", "eh"])
            for row in eh_landscape(P, args.grid):
                writer.writerow(["%.17g" % v for v in row])
            _emit(buf.getvalue(), args.out)
            return EXIT_OK
        report = run(args.command, args)
    except GeometryError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_GEOMETRY
    except ConvergenceError as exc:
        print("error: %s" % exc, file=sys.stderr)
        if exc.diagnostics:
            print(json.dumps(_jsonable(exc.diagnostics)), file=sys.stderr)
        return EXIT_SOLVER
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
