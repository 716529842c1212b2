"""Labeled polytopes as finite lists of affine facet functionals.

A facet is the pair (nu, lam) defining l(x) = <x, nu> + lam; the polytope
is the locus where every l is nonnegative, with scaled normals encoding
integer labels.  Exact polytopes carry int/Fraction data and all
certification (simplicity, boundedness, facet support) is exact; float
data is accepted for irrational slices and handled with tolerances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .latlin import RatMatrix, exact_rank, kernel_vector, rat_inverse, solve_square_exact

__all__ = [
    "FacetFunctional",
    "LabeledPolytope",
    "PolytopeError",
    "build_polytope",
    "interior_contains",
    "transform_polytope",
    "hirzebruch_polytope",
    "is_delzant",
    "polytope_to_dict",
    "polytope_from_dict",
]

FLOAT_TOL = 1e-9


class PolytopeError(ValueError):
    """Raised when facet data does not define a valid labeled polytope."""


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


@dataclass(frozen=True)
class FacetFunctional:
    """Affine functional l(x) = <x, normal> + offset, one per facet."""

    normal: tuple
    offset: object

    def __post_init__(self):
        if all(e == 0 for e in self.normal):
            raise PolytopeError("facet normal must be nonzero")

    @property
    def exact(self) -> bool:
        return all(_is_exact(e) for e in self.normal) and _is_exact(self.offset)

    def value(self, x):
        return sum(a * b for a, b in zip(self.normal, x)) + self.offset


@dataclass(frozen=True)
class LabeledPolytope:
    dim: int
    facets: tuple[FacetFunctional, ...]
    vertices: tuple[tuple, ...]
    exact: bool

    def facet_vertices(self, r: int) -> tuple[tuple, ...]:
        """Vertices lying on facet r."""
        out = []
        for v in self.vertices:
            val = self.facets[r].value(v)
            if (val == 0) if self.exact else (abs(val) <= FLOAT_TOL * _facet_scale(self.facets[r], v)):
                out.append(v)
        return tuple(out)

    def centroid(self) -> tuple:
        k = len(self.vertices)
        if self.exact:
            return tuple(sum(v[i] for v in self.vertices) * Fraction(1, k) for i in range(self.dim))
        return tuple(sum(v[i] for v in self.vertices) / k for i in range(self.dim))


def _facet_scale(f: FacetFunctional, x) -> float:
    return max(1.0, abs(float(f.offset)), max(abs(float(e)) for e in f.normal) * max((abs(float(c)) for c in x), default=0.0))


def _coerce_facets(facets) -> tuple[tuple[FacetFunctional, ...], bool]:
    fs = []
    for f in facets:
        if isinstance(f, FacetFunctional):
            fs.append(f)
        else:
            normal, offset = f
            fs.append(FacetFunctional(tuple(normal), offset))
    if not fs:
        raise PolytopeError("no facets given")
    n = len(fs[0].normal)
    if any(len(f.normal) != n for f in fs):
        raise PolytopeError("facet normals have inconsistent dimension")
    exact = all(f.exact for f in fs)
    if not exact:
        fs = [FacetFunctional(tuple(float(e) for e in f.normal), float(f.offset)) for f in fs]
    return tuple(fs), exact


def _rows_to_int(rows):
    """Clear denominators row by row; kernels are unchanged."""
    out = []
    for r in rows:
        fr = [Fraction(e) for e in r]
        mult = math.lcm(*(f.denominator for f in fr))
        out.append(tuple(int(f * mult) for f in fr))
    return out


def _float_rank(rows, tol=FLOAT_TOL) -> int:
    import numpy as np

    m = np.array(rows, dtype=float)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    return int((s > tol * max(1.0, s[0])).sum())


def _rank(rows, exact: bool) -> int:
    return exact_rank(rows) if exact else _float_rank(rows)


def _recession_ray(normals, exact: bool):
    """A nonzero x with <x, nu> >= 0 for every normal, or None.

    The normals are assumed to span (rank n), so the recession cone is
    pointed and any nonzero element leads to an extreme ray supported on
    n-1 independent normals; those candidate lines are enumerated.
    """
    n = len(normals[0])
    if n == 1:
        candidates = [(1,), (-1,)] if exact else [(1.0,), (-1.0,)]
    else:
        candidates = []
        if exact:
            int_rows = _rows_to_int(normals)
            for sub in itertools.combinations(range(len(normals)), n - 1):
                try:
                    w = kernel_vector([int_rows[i] for i in sub])
                except ValueError:
                    continue
                candidates.extend([w, tuple(-e for e in w)])
        else:
            import numpy as np

            arr = np.array(normals, dtype=float)
            for sub in itertools.combinations(range(len(normals)), n - 1):
                m = arr[list(sub)]
                _, s, vt = np.linalg.svd(m)
                if (s > FLOAT_TOL * max(1.0, s[0])).sum() != n - 1:
                    continue
                w = vt[-1]
                candidates.extend([tuple(w), tuple(-w)])
    for w in candidates:
        if exact:
            if all(sum(a * b for a, b in zip(w, nu)) >= 0 for nu in normals):
                return w
        else:
            scale = max(abs(e) for e in w)
            if all(sum(a * b for a, b in zip(w, nu)) >= -FLOAT_TOL * scale for nu in normals):
                return w
    return None


def build_polytope(facets: Iterable) -> LabeledPolytope:
    """Certify facet data and enumerate vertices.

    Raises PolytopeError when the data is unbounded, not simple, has a
    non-supporting (redundant) facet, or has empty interior.
    """
    fs, exact = _coerce_facets(facets)
    n = len(fs[0].normal)
    d = len(fs)
    if d < n + 1:
        raise PolytopeError(f"need at least {n + 1} facets in dimension {n}, got {d}")

    normals = [f.normal for f in fs]
    if _rank(normals, exact) < n:
        raise PolytopeError("unbounded: facet normals do not span")

    # candidate vertices from all n-fold facet intersections
    verts = []
    for sub in itertools.combinations(range(d), n):
        A = [normals[i] for i in sub]
        b = [-fs[i].offset for i in sub]
        if exact:
            x = solve_square_exact(A, b)
        else:
            x = _solve_square_float(A, b)
        if x is None:
            continue
        if _feasible(fs, x, exact) and not any(_same_point(x, v, exact) for v in verts):
            verts.append(tuple(x))
    if not verts:
        raise PolytopeError("empty polytope: no feasible vertex")

    ray = _recession_ray(normals, exact)
    if ray is not None:
        raise PolytopeError(f"unbounded: recession direction {ray}")

    verts.sort(key=lambda v: tuple(float(c) for c in v))
    poly = LabeledPolytope(dim=n, facets=fs, vertices=tuple(verts), exact=exact)

    # every facet must support the polytope at a vertex
    for r in range(d):
        if not poly.facet_vertices(r):
            raise PolytopeError(f"facet {r} does not support the polytope (redundant)")

    c = poly.centroid()
    if not _strictly_interior(fs, c, exact):
        raise PolytopeError("empty interior: vertex centroid is not interior")

    # simplicity: exactly n facets through each vertex, independent normals
    for v in verts:
        active = _active_facets(fs, v, exact)
        if len(active) != n:
            raise PolytopeError(
                f"not simple: vertex {v} lies on {len(active)} facets (expected {n})")
        if _rank([normals[i] for i in active], exact) != n:
            raise PolytopeError(f"not simple: dependent active normals at vertex {v}")
    return poly


def _solve_square_float(A, b):
    import numpy as np

    m = np.array(A, dtype=float)
    s = np.linalg.svd(m, compute_uv=False)
    if s[-1] <= FLOAT_TOL * max(1.0, s[0]):
        return None
    return tuple(np.linalg.solve(m, np.array(b, dtype=float)))


def _feasible(fs, x, exact) -> bool:
    if exact:
        return all(f.value(x) >= 0 for f in fs)
    return all(f.value(x) >= -FLOAT_TOL * _facet_scale(f, x) for f in fs)


def _active_facets(fs, x, exact):
    if exact:
        return [i for i, f in enumerate(fs) if f.value(x) == 0]
    return [i for i, f in enumerate(fs) if abs(f.value(x)) <= FLOAT_TOL * _facet_scale(f, x)]


def _strictly_interior(fs, x, exact, margin=1e-12) -> bool:
    if exact and all(_is_exact(c) for c in x):
        return all(f.value(x) > 0 for f in fs)
    return all(float(f.value(tuple(float(c) for c in x))) > margin for f in fs)


def _same_point(x, y, exact) -> bool:
    if exact:
        return all(a == b for a, b in zip(x, y))
    scale = max(1.0, max(abs(float(a)) for a in x))
    return all(abs(float(a) - float(b)) <= FLOAT_TOL * scale for a, b in zip(x, y))


def interior_contains(P: LabeledPolytope, x: Sequence, margin: float = 1e-12) -> bool:
    """Strict interior test; exact when both polytope and point are exact."""
    if len(x) != P.dim:
        raise ValueError(f"point has dimension {len(x)}, polytope has {P.dim}")
    return _strictly_interior(P.facets, tuple(x), P.exact, margin)


def transform_polytope(P: LabeledPolytope, T) -> LabeledPolytope:
    """Pull back by x |-> Tx: normals map by T^t, offsets are unchanged.

    The result is T^{-1}(P); vertices transform by T^{-1}.
    """
    if isinstance(T, RatMatrix):
        tm = T
    elif hasattr(T, "to_rational"):
        tm = T.to_rational()
    else:
        tm = RatMatrix(T)
    if tm.nrows != P.dim or tm.ncols != P.dim:
        raise ValueError("transform dimension mismatch")
    if not P.exact:
        raise PolytopeError("transform_polytope requires exact polytope data")
    rat_inverse(tm)  # raises SingularMatrixError when not invertible
    tt = tm.transpose()
    facets = []
    for f in P.facets:
        nu = tt.mul_vec([Fraction(e) for e in f.normal])
        nu = tuple(int(e) if Fraction(e).denominator == 1 else Fraction(e) for e in nu)
        facets.append(FacetFunctional(nu, f.offset))
    return build_polytope(facets)


def hirzebruch_polytope(n: int, m: int) -> LabeledPolytope:
    """The trapezoidal polytope with all offsets 1 used for H^2_m-type spaces."""
    if not (isinstance(n, int) and isinstance(m, int) and 0 < m < n):
        raise ValueError("need integers 0 < m < n")
    facets = []
    for i in range(n - 1):
        nu = [0] * n
        nu[i] = 1
        facets.append(FacetFunctional(tuple(nu), 1))
    # slanted facet normal (m+1)e_n - (1,...,1)
    last = [-1] * n
    last[n - 1] = m
    facets.append(FacetFunctional(tuple(last), 1))
    en = [0] * n
    en[n - 1] = 1
    facets.append(FacetFunctional(tuple(en), 1))
    facets.append(FacetFunctional(tuple(-e for e in en), 1))
    return build_polytope(facets)


def is_delzant(P: LabeledPolytope) -> bool:
    """True when every vertex basis of normals is unimodular over Z."""
    from .latlin import completes_to_lattice_basis

    if not P.exact:
        raise PolytopeError("Delzant check requires exact data")
    for v in P.vertices:
        active = _active_facets(P.facets, v, exact=True)
        rows = []
        for i in active:
            nu = P.facets[i].normal
            if any(Fraction(e).denominator != 1 for e in nu):
                return False
            rows.append(tuple(int(e) for e in nu))
        if not completes_to_lattice_basis(rows):
            return False
    return True


def _fraction_str(q) -> str:
    f = Fraction(q)
    return f"{f.numerator}/{f.denominator}"


def polytope_to_dict(P: LabeledPolytope) -> dict:
    if P.exact:
        facets = []
        for f in P.facets:
            if any(Fraction(e).denominator != 1 for e in f.normal):
                raise ValueError("cannot serialize non-integer normals to the exact schema")
            facets.append({"normal": [int(e) for e in f.normal],
                           "offset": _fraction_str(f.offset)})
        return {"dim": P.dim, "facets": facets}
    return {
        "dim": P.dim,
        "exact": False,
        "facets": [{"normal": [float(e) for e in f.normal], "offset": float(f.offset)}
                   for f in P.facets],
    }


def polytope_from_dict(d: dict) -> LabeledPolytope:
    try:
        facets = []
        for f in d["facets"]:
            off = f["offset"]
            if isinstance(off, str):
                off = Fraction(off)
            facets.append((tuple(f["normal"]), off))
        P = build_polytope(facets)
    except KeyError as e:
        raise PolytopeError(f"missing field {e} in polytope data") from e
    if "dim" in d and P.dim != d["dim"]:
        raise PolytopeError(f"declared dim {d['dim']} does not match normals of length {P.dim}")
    return P
