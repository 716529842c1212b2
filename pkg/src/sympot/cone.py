"""Strongly convex rational polyhedral cones and their certification.

A moment cone is stored by its primitive inward facet normals together
with the extreme rays computed on construction.  Goodness in the sense
required for smooth toric contact structures (every codimension-k face
cut by exactly k facets whose normals extend to a lattice basis) is
certified exactly, face by face.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .latlin import (
    IntMatrix,
    RatMatrix,
    approx_rational,
    exact_rank,
    kernel_vector,
    primitive_vector,
    smith_normal_form,
)
from .polytope import FacetFunctional, LabeledPolytope, build_polytope

__all__ = [
    "MomentCone",
    "QuasiCone",
    "ConeError",
    "GoodnessCertificate",
    "FaceCheck",
    "LinearEquivalence",
    "CharacteristicSlice",
    "build_cone",
    "is_good",
    "dual_cone",
    "standard_cone",
    "c_km",
    "c_pq",
    "t_km",
    "orthant_cone",
    "simplex_cone",
    "verify_equivalence",
    "characteristic_polytope",
    "reeb_admissible",
    "cone_faces",
    "cone_to_dict",
    "cone_from_dict",
]


class ConeError(ValueError):
    """Raised when normal data does not define a usable moment cone."""


@dataclass(frozen=True)
class MomentCone:
    """H-description (primitive integer normals) plus extreme rays."""

    dim: int
    normals: tuple[tuple[int, ...], ...]
    rays: tuple[tuple[int, ...], ...]

    def functional_values(self, x):
        return tuple(sum(a * b for a, b in zip(nu, x)) for nu in self.normals)

    def contains_interior(self, x, margin=1e-12) -> bool:
        exact = all(isinstance(c, (int, Fraction)) and not isinstance(c, bool) for c in x)
        vals = self.functional_values(x)
        if exact:
            return all(v > 0 for v in vals)
        return all(float(v) > margin for v in vals)


@dataclass(frozen=True)
class QuasiCone:
    """Cone with float normals; no lattice certification is attempted.

    Used for cones over irrational polytopes, where the facet data is
    genuinely not rational.
    """

    dim: int
    normals: tuple[tuple[float, ...], ...]

    @classmethod
    def standard_over(cls, P: LabeledPolytope) -> "QuasiCone":
        normals = tuple(
            tuple(float(e) for e in f.normal) + (float(f.offset),) for f in P.facets
        )
        return cls(dim=P.dim + 1, normals=normals)

    def functional_values(self, x):
        return tuple(sum(a * float(b) for a, b in zip(nu, x)) for nu in self.normals)

    def contains_interior(self, x, margin=1e-12) -> bool:
        return all(v > margin for v in self.functional_values(x))


def _extreme_rays(normals: Sequence[tuple[int, ...]], dim: int) -> tuple[tuple[int, ...], ...]:
    # candidate rays lie on dim-1 independent facets; sign-fix into the cone
    rays = []
    if dim == 1:
        candidates = [(1,), (-1,)]
    else:
        candidates = []
        for sub in itertools.combinations(range(len(normals)), dim - 1):
            try:
                w = kernel_vector([normals[i] for i in sub])
            except ValueError:
                continue
            candidates.extend([w, tuple(-e for e in w)])
    for w in candidates:
        if all(sum(a * b for a, b in zip(w, nu)) >= 0 for nu in normals) and w not in rays:
            rays.append(w)
    rays.sort()
    return tuple(rays)


def build_cone(normals: Sequence[Sequence[int]]) -> MomentCone:
    """Validate a normal list and compute the extreme rays.

    Requirements: integer primitive normals, at least dim of them, no
    duplicates, spanning (strong convexity of the cone), each one
    supporting a genuine facet, and a full-dimensional result.
    """
    ns = []
    for i, nu in enumerate(normals):
        t = tuple(int(e) for e in nu)
        if tuple(nu) != t:
            raise ConeError(f"normal {i} is not an integer vector")
        if all(e == 0 for e in t):
            raise ConeError(f"normal {i} is zero")
        if primitive_vector(t) != t:
            raise ConeError(f"normal {i} = {t} is not primitive")
        ns.append(t)
    if not ns:
        raise ConeError("no normals given")
    dim = len(ns[0])
    if any(len(nu) != dim for nu in ns):
        raise ConeError("normals have inconsistent dimension")
    if len(ns) < dim:
        raise ConeError(f"need at least {dim} normals in dimension {dim}")
    if len(set(ns)) != len(ns):
        raise ConeError("duplicate normal (redundant)")
    if exact_rank(ns) < dim:
        raise ConeError("not strongly convex: normals do not span, cone contains a line")

    rays = _extreme_rays(ns, dim)
    if exact_rank(rays) < dim:
        raise ConeError("cone is not full-dimensional")

    for a, nu in enumerate(ns):
        on_facet = [r for r in rays if sum(x * y for x, y in zip(r, nu)) == 0]
        if exact_rank(on_facet) != dim - 1:
            raise ConeError(f"redundant normal {a} = {nu}: does not support a facet")

    return MomentCone(dim=dim, normals=tuple(ns), rays=rays)


@dataclass(frozen=True)
class Face:
    rays: tuple[int, ...]
    active: tuple[int, ...]
    codim: int


def cone_faces(C: MomentCone) -> tuple[Face, ...]:
    """Proper faces of codimension 1..dim-1, each listed once.

    Faces are identified with their extreme-ray index sets; the active
    set records every facet vanishing on the face.
    """
    seen: dict[tuple[int, ...], Face] = {}
    order: list[tuple[int, ...]] = []
    nrays = len(C.rays)
    dots = [[sum(a * b for a, b in zip(r, nu)) for nu in C.normals] for r in C.rays]
    for size in range(1, C.dim):
        for sub in itertools.combinations(range(len(C.normals)), size):
            ridx = tuple(i for i in range(nrays) if all(dots[i][a] == 0 for a in sub))
            if not ridx or ridx in seen:
                continue
            active = tuple(a for a in range(len(C.normals))
                           if all(dots[i][a] == 0 for i in ridx))
            codim = C.dim - exact_rank([C.rays[i] for i in ridx])
            if 1 <= codim <= C.dim - 1:
                seen[ridx] = Face(rays=ridx, active=active, codim=codim)
                order.append(ridx)
    return tuple(seen[k] for k in order)


@dataclass(frozen=True)
class FaceCheck:
    facets: tuple[int, ...]
    rays: tuple[int, ...]
    codim: int
    invariant_factors: tuple[int, ...]
    ok: bool


@dataclass(frozen=True)
class GoodnessCertificate:
    verdict: bool
    faces: tuple[FaceCheck, ...]

    @property
    def failing(self) -> FaceCheck | None:
        return next((f for f in self.faces if not f.ok), None)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "faces": [
                {
                    "facets": list(f.facets),
                    "rays": list(f.rays),
                    "codim": f.codim,
                    "invariant_factors": list(f.invariant_factors),
                    "ok": f.ok,
                }
                for f in self.faces
            ],
        }


def is_good(C: MomentCone) -> GoodnessCertificate:
    """Check the lattice condition face by face.

    A codimension-k face must be cut by exactly k facets whose normals
    have Smith invariant factors (1, ..., 1); any failure is recorded
    with the offending face's facet set and factors.
    """
    checks = []
    for face in cone_faces(C):
        stack = IntMatrix([C.normals[a] for a in face.active])
        factors = smith_normal_form(stack).invariant_factors
        ok = (len(face.active) == face.codim
              and len(factors) == face.codim
              and all(f == 1 for f in factors))
        checks.append(FaceCheck(facets=face.active, rays=face.rays, codim=face.codim,
                                invariant_factors=factors, ok=ok))
    return GoodnessCertificate(verdict=all(c.ok for c in checks), faces=tuple(checks))


def dual_cone(C: MomentCone) -> MomentCone:
    """Dual cone: the extreme rays of C become the facet normals."""
    return build_cone(C.rays)


def standard_cone(P: LabeledPolytope) -> MomentCone:
    """Cone over P x {1}: facet data (nu_a, lambda_a), primitivized."""
    if not P.exact:
        raise ConeError("standard_cone requires an exact (rational) polytope")
    normals = []
    for f in P.facets:
        row = [Fraction(e) for e in f.normal] + [Fraction(f.offset)]
        mult = math.lcm(*(e.denominator for e in row))
        normals.append(primitive_vector([int(e * mult) for e in row]))
    return build_cone(normals)


def c_km(n: int, k: int, m: int) -> MomentCone:
    """Family cone in R^{n+1} with n+2 facets indexed by (k, m)."""
    if not (n >= 2 and k >= 1 and 0 <= m < k * n):
        raise ConeError(f"parameters out of range: need n >= 2, k >= 1, 0 <= m < kn, "
                        f"got (n, k, m) = ({n}, {k}, {m})")
    rows = []
    for i in range(n - 1):
        e = [0] * n
        e[i] = 1
        rows.append(e + [1])
    last = [-1] * n
    last[n - 1] = m  # (m+1)e_n - (1,...,1)
    rows.append(last + [1])
    rows.append([0] * (n - 1) + [k, 1])
    rows.append([0] * (n - 1) + [-1, 1])
    return build_cone(rows)


def orthant_cone(dim: int) -> MomentCone:
    """First orthant: normals the standard basis of Z^dim."""
    if not (isinstance(dim, int) and dim >= 1):
        raise ConeError(f"dimension must be a positive integer, got {dim!r}")
    return build_cone([tuple(1 if j == i else 0 for j in range(dim))
                       for i in range(dim)])


def simplex_cone(n: int) -> MomentCone:
    """Cone over the standard n-simplex, in R^{n+1}.

    Normals (e_i, 0) for i = 1..n together with (-1, ..., -1, 1); their
    sum is (0, ..., 0, 1).
    """
    if not (isinstance(n, int) and n >= 1):
        raise ConeError(f"n must be a positive integer, got {n!r}")
    normals = [tuple(1 if j == i else 0 for j in range(n + 1)) for i in range(n)]
    normals.append(tuple([-1] * n + [1]))
    return build_cone(normals)


def c_pq(p: int, q: int) -> MomentCone:
    """Four-faceted cone in R^3 indexed by 0 < q < p."""
    if not (isinstance(p, int) and isinstance(q, int) and 0 < q < p):
        raise ConeError(f"need integers 0 < q < p, got (p, q) = ({p}, {q})")
    return build_cone([
        (1, p - q - 1, p - q),
        (1, 1, 0),
        (1, 0, 0),
        (1, p, p),
    ])


@dataclass(frozen=True)
class LinearEquivalence:
    """Invertible map identifying two cones.

    ``acts_on`` records the convention: "normals" means the matrix is
    applied to normal vectors directly, "points" means it acts on
    points, so normals transform by the transpose.
    """

    matrix: object
    acts_on: str
    pairing: tuple[tuple[int, int], ...] | None = None


def t_km(k: int, m: int) -> LinearEquivalence:
    """The SL(3, Z) change of basis pairing C(k, m) with the (p, q) model."""
    mat = IntMatrix([
        [0, 0, 1],
        [k - m - 1, -1, k],
        [k - m, -1, k],
    ])
    assert mat.det() == 1
    return LinearEquivalence(matrix=mat, acts_on="normals")


def verify_equivalence(C1, C2, T, acts_on: str | None = None,
                       tol: float = 0.0) -> tuple[bool, tuple[tuple[int, int], ...]]:
    """Check that T maps the normals of C1 bijectively onto those of C2.

    Returns (verdict, pairing) where pairing[i] = (i, j) matches normal
    i of C1 to normal j of C2.  With tol = 0 the comparison is exact
    (all data must be rational); pass a positive tol for float data.
    """
    if isinstance(T, LinearEquivalence):
        matrix = T.matrix
        acts_on = acts_on or T.acts_on
    else:
        matrix = T
        acts_on = acts_on or "normals"
    rows = matrix.rows if isinstance(matrix, (IntMatrix, RatMatrix)) else \
        tuple(tuple(r) for r in matrix)
    if acts_on == "points":
        rows = tuple(zip(*rows))  # normals transform by the transpose
    elif acts_on != "normals":
        raise ValueError(f"unknown acts_on = {acts_on!r}")

    if len(C1.normals) != len(C2.normals):
        return False, ()
    exact = tol <= 0

    def apply(nu):
        if exact:
            return tuple(sum(Fraction(a) * Fraction(x) for a, x in zip(row, nu))
                         for row in rows)
        return tuple(sum(float(a) * float(x) for a, x in zip(row, nu)) for row in rows)

    pairing = []
    used = set()
    for i, nu in enumerate(C1.normals):
        img = apply(nu)
        match = None
        for j, target in enumerate(C2.normals):
            if j in used:
                continue
            if exact:
                if all(Fraction(a) == Fraction(b) for a, b in zip(img, target)):
                    match = j
                    break
            elif all(abs(float(a) - float(b)) <= tol for a, b in zip(img, target)):
                match = j
                break
        if match is None:
            return False, tuple(pairing)
        used.add(match)
        pairing.append((i, match))
    return True, tuple(pairing)


def reeb_admissible(C: MomentCone, b: Sequence) -> bool:
    """True iff b pairs strictly positively with every extreme ray."""
    if len(b) != C.dim:
        raise ValueError("Reeb vector dimension mismatch")
    exact = all(isinstance(e, (int, Fraction)) and not isinstance(e, bool) for e in b)
    for r in C.rays:
        v = sum(a * x for a, x in zip(r, b))
        if (v <= 0) if exact else (float(v) <= 0.0):
            return False
    return True


@dataclass(frozen=True)
class CharacteristicSlice:
    """The polytope cut on the hyperplane <x, b> = 1/2, with its frame.

    ``base_point`` + u . ``frame`` embeds slice coordinates u back into
    the ambient space of the cone.
    """

    polytope: LabeledPolytope
    base_point: tuple
    frame: tuple[tuple, ...]
    rational: bool

    def ambient_point(self, u) -> tuple:
        return tuple(x0 + sum(uc * f[i] for uc, f in zip(u, self.frame))
                     for i, x0 in enumerate(self.base_point))

    def ambient_vertices(self) -> tuple[tuple, ...]:
        return tuple(self.ambient_point(v) for v in self.polytope.vertices)


def characteristic_polytope(C, b: Sequence) -> CharacteristicSlice:
    """Slice the cone by the half-level set of an admissible Reeb vector."""
    if isinstance(C, MomentCone) and not reeb_admissible(C, b):
        raise ConeError("Reeb vector is not admissible: characteristic slice "
                        "would be unbounded")
    exact = all(isinstance(e, (int, Fraction)) and not isinstance(e, bool) for e in b)
    dim = C.dim
    if all(e == 0 for e in b):
        raise ConeError("zero Reeb vector")
    if exact:
        b = tuple(Fraction(e) for e in b)
        norm2 = sum(e * e for e in b)
        x0 = tuple(e / (2 * norm2) for e in b)
        p = max(range(dim), key=lambda i: abs(b[i]))
        frame = []
        for j in range(dim):
            if j == p:
                continue
            f = [Fraction(0)] * dim
            f[j] = Fraction(1)
            f[p] = -b[j] / b[p]
            frame.append(tuple(f))
        rational = True
    else:
        b = tuple(float(e) for e in b)
        norm2 = sum(e * e for e in b)
        x0 = tuple(e / (2 * norm2) for e in b)
        p = max(range(dim), key=lambda i: abs(b[i]))
        frame = []
        for j in range(dim):
            if j == p:
                continue
            f = [0.0] * dim
            f[j] = 1.0
            f[p] = -b[j] / b[p]
            frame.append(tuple(f))
        ratios = [approx_rational(b[j] / b[p]) for j in range(dim)]
        rational = all(r is not None for r in ratios)
    facets = []
    for nu in C.normals:
        normal = tuple(sum(fc * nc for fc, nc in zip(f, nu)) for f in frame)
        offset = sum(a * c for a, c in zip(x0, nu))
        if all((e == 0) if exact else (abs(float(e)) <= 1e-12) for e in normal):
            continue  # facet parallel to the slice: constant positive there
        facets.append(FacetFunctional(normal, offset))
    poly = build_polytope(facets)
    return CharacteristicSlice(polytope=poly, base_point=x0, frame=tuple(frame),
                               rational=rational)


def cone_to_dict(C: MomentCone) -> dict:
    return {
        "dim": C.dim,
        "facets": [{"normal": list(nu), "offset": "0/1"} for nu in C.normals],
    }


def cone_from_dict(d: dict) -> MomentCone:
    try:
        normals = []
        for f in d["facets"]:
            off = f.get("offset", "0/1")
            if Fraction(off) != 0:
                raise ConeError("cone facet offsets must be zero")
            normals.append(tuple(f["normal"]))
        C = build_cone(normals)
    except KeyError as e:
        raise ConeError(f"missing field {e} in cone data") from e
    if "dim" in d and C.dim != d["dim"]:
        raise ConeError(f"declared dim {d['dim']} does not match normals of length {C.dim}")
    return C
