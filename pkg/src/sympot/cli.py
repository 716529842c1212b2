"""Command line front end over the cone, potential and curvature modules.

Output is deterministic: JSON is emitted with sorted keys, CSV floats
with 17 significant digits, and all sampling is seeded (--seed, default
0).  With --out FILE the payload goes to FILE and a manifest with
sha256 digests of inputs and outputs is written to FILE.manifest.json.

Exit codes: 0 success or verified, 1 verified false, 2 precondition or
parse failure, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import re
import sys
from fractions import Fraction

from . import __version__
from .calabi import (
    CalabiError,
    CalabiTolerances,
    calabi_potential,
    classify_reeb,
    equivalence_to_ckm,
    solve_A,
)
from .cone import (
    ConeError,
    build_cone,
    c_km,
    c_pq,
    cone_from_dict,
    cone_to_dict,
    dual_cone,
    is_good,
    orthant_cone,
    simplex_cone,
    standard_cone,
    t_km,
    verify_equivalence,
)
from .curvature import CurvatureError, einstein_verify, write_curvature_csv
from .latlin import IntMatrix, RatMatrix, cokernel_order
from .polytope import polytope_from_dict, polytope_to_dict, transform_polytope
from .potential import (
    BoothbyWangPotential,
    DomainError,
    potential_from_dict,
    reeb_vector,
)
from .sampling import bw_points, cone_interior_points, polytope_interior_points


class CLIError(Exception):
    """User-facing failure with an explicit exit code."""

    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


def _sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _load_json(path: str):
    with open(path, "r") as fh:
        return json.load(fh)


def _dump_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _emit(args, argv, text: str, inputs: dict[str, str]):
    out = getattr(args, "out", None)
    if not out:
        sys.stdout.write(text)
        return
    with open(out, "w") as fh:
        fh.write(text)
    manifest = {
        "command": ["sympot"] + list(argv),
        "version": __version__,
        "inputs": inputs,
        "configuration": {
            "seed": getattr(args, "seed", None),
            "tol": getattr(args, "tol", None),
            "grid": getattr(args, "grid", None),
        },
        "outputs": [{"path": out, "sha256": _sha256_bytes(text.encode())}],
    }
    with open(out + ".manifest.json", "w") as fh:
        fh.write(_dump_json(manifest))


def _record_input(args, inputs: dict[str, str]):
    path = getattr(args, "input", None)
    if path:
        with open(path, "rb") as fh:
            inputs[path] = _sha256_bytes(fh.read())


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise CLIError("missing required flag(s): "
                       + ", ".join("--" + n for n in missing))


def _cone_from_args(args):
    if getattr(args, "input", None):
        return cone_from_dict(_load_json(args.input))
    family = getattr(args, "family", None)
    if family == "ckm":
        _require(args, "n", "k", "m")
        return c_km(args.n, args.k, args.m)
    if family == "ypq":
        _require(args, "p", "q")
        return c_pq(args.p, args.q)
    if family == "orthant":
        _require(args, "n")
        return orthant_cone(args.n)
    if family == "simplex":
        _require(args, "n")
        return simplex_cone(args.n)
    raise CLIError("provide --input FILE or --family ckm|ypq|orthant|simplex")


def _parse_grid(spec: str, dim: int):
    """Either a sample count ("64") or explicit points ("x,y;x,y")."""
    if re.fullmatch(r"\d+", spec):
        count = int(spec)
        if count < 1:
            raise CLIError("grid count must be positive")
        return count
    points = []
    for chunk in spec.split(";"):
        try:
            coords = tuple(float(c) for c in chunk.split(","))
        except ValueError:
            raise CLIError(f"cannot parse grid point {chunk!r}") from None
        if len(coords) != dim:
            raise CLIError(
                f"grid point {chunk!r} has {len(coords)} coordinates, expected {dim}")
        points.append(coords)
    if not points:
        raise CLIError("empty grid specification")
    return points


def _sample_points(s, count: int, seed: int):
    if isinstance(s, BoothbyWangPotential):
        base_domain = getattr(s.base, "domain", None)
        if base_domain is None:
            raise CLIError("lifted potential has no base domain to sample; "
                           "pass explicit grid points")
        return bw_points(base_domain, count, seed=seed)
    domain = getattr(s, "domain", None)
    if domain is None:
        raise CLIError("potential has no domain to sample; pass explicit grid points")
    if s.cone_domain:
        return cone_interior_points(domain, count, seed=seed)
    return polytope_interior_points(domain, count, seed=seed)


def _resolve_grid(args, s, default_count: int):
    spec = getattr(args, "grid", None) or str(default_count)
    parsed = _parse_grid(spec, s.dim)
    if isinstance(parsed, int):
        return _sample_points(s, parsed, args.seed)
    return parsed


def _parse_matrix(text: str, exact: bool):
    try:
        rows = json.loads(text)
    except json.JSONDecodeError as e:
        raise CLIError(f"cannot parse --matrix: {e.msg} at column {e.colno}") from None
    if (not isinstance(rows, list) or not rows
            or any(not isinstance(r, list) for r in rows)):
        raise CLIError("--matrix must be a JSON list of rows")
    parsed = []
    for r in rows:
        prow = []
        for e in r:
            if isinstance(e, bool):
                raise CLIError("matrix entries must be numbers")
            if isinstance(e, int):
                prow.append(e)
            elif isinstance(e, str):
                prow.append(Fraction(e))
            elif isinstance(e, float) and not exact:
                prow.append(e)
            else:
                raise CLIError(
                    "matrix entries must be integers or rational strings like \"1/2\"")
        parsed.append(prow)
    return parsed


# ---------------------------------------------------------------- commands

def cmd_good_cone(args, argv) -> int:
    inputs: dict[str, str] = {}
    _record_input(args, inputs)
    C = _cone_from_args(args)
    cert = is_good(C)
    payload = cert.to_dict()
    payload["normals"] = [list(nu) for nu in C.normals]
    failing = cert.failing
    payload["failing_face"] = None if failing is None else {
        "facets": list(failing.facets),
        "codim": failing.codim,
        "invariant_factors": list(failing.invariant_factors),
    }
    _emit(args, argv, _dump_json(payload), inputs)
    return 0 if cert.verdict else 1


def cmd_dual_cone(args, argv) -> int:
    inputs: dict[str, str] = {}
    _record_input(args, inputs)
    C = _cone_from_args(args)
    _emit(args, argv, _dump_json(cone_to_dict(dual_cone(C))), inputs)
    return 0


def cmd_std_cone(args, argv) -> int:
    inputs: dict[str, str] = {}
    _require(args, "input")
    _record_input(args, inputs)
    P = polytope_from_dict(_load_json(args.input))
    _emit(args, argv, _dump_json(cone_to_dict(standard_cone(P))), inputs)
    return 0


def cmd_transform(args, argv) -> int:
    inputs: dict[str, str] = {}
    _require(args, "input", "matrix")
    _record_input(args, inputs)
    data = _load_json(args.input)
    offsets = [f.get("offset", 0) for f in data.get("facets", [])]
    conelike = all(Fraction(str(o)) == 0 for o in offsets)
    if conelike:
        rows = _parse_matrix(args.matrix, exact=True)
        if any(not isinstance(e, int) for r in rows for e in r):
            raise CLIError("cone transforms need integer matrix entries")
        if args.acts_on == "points":
            rows = [list(col) for col in zip(*rows)]
        M = IntMatrix(rows)
        C = cone_from_dict(data)
        transformed = build_cone([tuple(M.mul_vec(nu)) for nu in C.normals])
        _emit(args, argv, _dump_json(cone_to_dict(transformed)), inputs)
        return 0
    P = polytope_from_dict(data)
    rows = _parse_matrix(args.matrix, exact=P.exact)
    if args.acts_on == "normals":
        rows = [list(col) for col in zip(*rows)]
    T = RatMatrix(rows)
    _emit(args, argv, _dump_json(polytope_to_dict(transform_polytope(P, T))), inputs)
    return 0


def cmd_ypq_check(args, argv) -> int:
    _require(args, "p", "q")
    p, q = args.p, args.q
    if not (0 < q < p):
        raise CLIError(f"need 0 < q < p, got (p, q) = ({p}, {q})")
    k, m = p - 1, p + q - 2
    T = t_km(k, m)
    det = T.matrix.det()
    integer = all(isinstance(e, int) for row in T.matrix.rows for e in row)
    ok, pairing = verify_equivalence(c_km(2, k, m), c_pq(p, q), T)
    g = math.gcd(p, q)
    verified = bool(ok and det == 1 and integer)
    payload = {
        "p": p,
        "q": q,
        "k": k,
        "m": m,
        "determinant": int(det),
        "integer_entries": integer,
        "normal_bijection": bool(ok),
        "pairing": None if pairing is None else [list(pr) for pr in pairing],
        "gcd_pq": g,
        "simply_connected": g == 1,
        "verified": verified,
    }
    _emit(args, argv, _dump_json(payload), {})
    return 0 if verified else 1


def cmd_pi1(args, argv) -> int:
    inputs: dict[str, str] = {}
    _record_input(args, inputs)
    C = _cone_from_args(args)
    order = cokernel_order(IntMatrix([list(nu) for nu in C.normals]))
    payload = {
        "normals": [list(nu) for nu in C.normals],
        "cokernel_order": order,
        "simply_connected": order == 1,
    }
    _emit(args, argv, _dump_json(payload), inputs)
    return 0


def cmd_potential_eval(args, argv) -> int:
    inputs: dict[str, str] = {}
    _require(args, "input")
    _record_input(args, inputs)
    s = potential_from_dict(_load_json(args.input))
    points = _resolve_grid(args, s, default_count=8)
    for pt in points:
        if not s.contains(pt):
            raise CLIError(f"grid point {list(pt)} is outside the domain")
    rows = []
    for pt in points:
        entry = {
            "point": [float(c) for c in pt],
            "value": float(s.value(pt)),
            "gradient": [float(g) for g in s.gradient(pt)],
            "hessian": [[float(e) for e in row] for row in s.hessian_matrix(pt)],
        }
        if s.cone_domain:
            entry["reeb"] = [float(v) for v in reeb_vector(s, pt)]
        rows.append(entry)
    payload = {
        "dim": s.dim,
        "cone_domain": bool(s.cone_domain),
        "value_up_to_affine": bool(getattr(s, "value_up_to_affine", False)),
        "samples": rows,
    }
    _emit(args, argv, _dump_json(payload), inputs)
    return 0


def cmd_curvature_grid(args, argv) -> int:
    inputs: dict[str, str] = {}
    _require(args, "input")
    _record_input(args, inputs)
    s = potential_from_dict(_load_json(args.input))
    points = _resolve_grid(args, s, default_count=16)
    good = []
    for pt in points:
        if s.contains(pt):
            good.append(pt)
        else:
            print(f"skipped exterior grid point: {list(pt)}", file=sys.stderr)
    if not good:
        raise CLIError("no interior grid points to evaluate")
    buf = io.StringIO()
    write_curvature_csv(s, good, buf)
    _emit(args, argv, buf.getvalue(), inputs)
    return 0


def cmd_einstein_verify(args, argv) -> int:
    inputs: dict[str, str] = {}
    _require(args, "input")
    _record_input(args, inputs)
    s = potential_from_dict(_load_json(args.input))
    points = _resolve_grid(args, s, default_count=32)
    tol = args.tol if args.tol is not None else 1e-4
    report = einstein_verify(s, points=points, target=args.target, tolerance=tol)
    _emit(args, argv, _dump_json(report.to_dict()), inputs)
    return 0 if report.verdict else 1


def cmd_calabi(args, argv) -> int:
    _require(args, "n", "k", "m")
    tolerances = (CalabiTolerances(sc=args.tol) if args.tol is not None
                  else CalabiTolerances())
    solution = solve_A(args.n, args.k, args.m, tolerances)
    equivalence = equivalence_to_ckm(solution, tolerances)
    s_A = calabi_potential(args.n, solution.A, tolerances)
    spec = getattr(args, "grid", None) or "32"
    parsed = _parse_grid(spec, args.n)
    if isinstance(parsed, int):
        points = polytope_interior_points(s_A.domain, parsed, seed=args.seed)
    else:
        points = parsed
    target = 2 * args.n * (args.n + 1)
    report = einstein_verify(s_A, points=points, target=target,
                             tolerance=tolerances.sc)
    payload = {
        "solution": solution.to_dict(),
        "classification": classify_reeb(solution),
        "equivalence": {
            "acts_on": equivalence.acts_on,
            "matrix": [[float(e) for e in row] for row in equivalence.matrix],
            "pairing": [list(pr) for pr in equivalence.pairing],
            "target_cone": cone_to_dict(c_km(args.n, args.k, args.m)),
            "verified": True,
        },
        "einstein": report.to_dict(),
    }
    _emit(args, argv, _dump_json(payload), {})
    return 0 if report.verdict else 1


def cmd_calabi_sweep(args, argv) -> int:
    _require(args, "n")
    kmax = args.k if args.k is not None else 3
    if kmax < 1:
        raise CLIError("--k (maximum k) must be at least 1")
    buf = io.StringIO()
    buf.write("n,k,m,A,a,b,lambda,gamma,classification\n")
    rows = 0
    for k in range(1, kmax + 1):
        for m in range(1, k * args.n):
            if not (k - 1) * args.n < 2 * m:
                continue
            sol = solve_A(args.n, k, m)
            cls = classify_reeb(sol)
            floats = ",".join("%.17g" % v
                              for v in (sol.A, sol.a, sol.b, sol.lam, sol.gamma))
            buf.write(f"{args.n},{k},{m},{floats},{cls}\n")
            rows += 1
    if rows == 0:
        raise CLIError(f"no admissible (k, m) with k <= {kmax} for n = {args.n}")
    _emit(args, argv, buf.getvalue(), {})
    return 0


# ----------------------------------------------------------------- parser

def _add_common(sp, *, family=False, params=False, pq=False, grid=False,
                target=False, matrix=False, tol=False):
    sp.add_argument("--input", help="input JSON file")
    if family:
        sp.add_argument("--family", choices=["ckm", "ypq", "orthant", "simplex"],
                        help="built-in cone family instead of --input")
    if params:
        sp.add_argument("--n", type=int)
        sp.add_argument("--k", type=int)
        sp.add_argument("--m", type=int)
    if pq:
        sp.add_argument("--p", type=int)
        sp.add_argument("--q", type=int)
    if grid:
        sp.add_argument("--grid",
                        help="sample count or explicit points \"x,y;x,y\"")
    if target:
        sp.add_argument("--target", type=float, default=0.0,
                        help="scalar curvature target (default 0)")
    if matrix:
        sp.add_argument("--matrix", help="JSON matrix, e.g. \"[[1,-1],[0,1]]\"")
        sp.add_argument("--acts-on", dest="acts_on",
                        choices=["points", "normals"], default="points")
    if tol:
        sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="write output here plus a .manifest.json")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sympot",
        description="Toric symplectic potentials, moment cones, curvature checks.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("good-cone", help="goodness certificate for a cone")
    _add_common(sp, family=True, params=True, pq=True)
    sp.set_defaults(func=cmd_good_cone)

    sp = sub.add_parser("dual-cone", help="dual cone normals")
    _add_common(sp, family=True, params=True, pq=True)
    sp.set_defaults(func=cmd_dual_cone)

    sp = sub.add_parser("std-cone", help="standard cone over a labeled polytope")
    _add_common(sp)
    sp.set_defaults(func=cmd_std_cone)

    sp = sub.add_parser("transform", help="apply a linear map to cone/polytope data")
    _add_common(sp, matrix=True)
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("ypq-check", help="verify the (p,q) cone correspondence")
    _add_common(sp, pq=True)
    sp.set_defaults(func=cmd_ypq_check)

    sp = sub.add_parser("pi1", help="cokernel order of the normal lattice span")
    _add_common(sp, family=True, params=True, pq=True)
    sp.set_defaults(func=cmd_pi1)

    sp = sub.add_parser("potential-eval", help="evaluate a potential on a grid")
    _add_common(sp, grid=True)
    sp.set_defaults(func=cmd_potential_eval)

    sp = sub.add_parser("curvature-grid", help="CSV of scalar curvature samples")
    _add_common(sp, grid=True)
    sp.set_defaults(func=cmd_curvature_grid)

    sp = sub.add_parser("einstein-verify",
                        help="check Sc against a constant target")
    _add_common(sp, grid=True, target=True, tol=True)
    sp.set_defaults(func=cmd_einstein_verify)

    sp = sub.add_parser("calabi", help="solve one (n,k,m) Einstein case")
    _add_common(sp, params=True, grid=True, tol=True)
    sp.set_defaults(func=cmd_calabi)

    sp = sub.add_parser("calabi-sweep", help="CSV sweep over admissible (k,m)")
    _add_common(sp, params=True, tol=True)
    sp.set_defaults(func=cmd_calabi_sweep)

    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    try:
        return args.func(args, argv)
    except CLIError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except json.JSONDecodeError as e:
        print(f"parse error: {e.msg} at line {e.lineno}, column {e.colno}",
              file=sys.stderr)
        return 2
    except CurvatureError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3
    except CalabiError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
