"""Symplectic potentials in action-angle coordinates.

A potential is a smooth convex function on the interior of a polytope
or cone, exposed through exact-formula value/gradient/Hessian.  The
combinatorial potential of a labeled polytope, its cone analogue, the
Reeb-changing log correction, homogeneous callback terms, sums,
pullbacks by linear maps, the one-higher-dimensional circle-bundle lift
and slicing back down are all composable and JSON-serializable (except
callbacks).

Hessians are analytic throughout: numerical differentiation is reserved
for the curvature layer, which differentiates these Hessians once more.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .cone import MomentCone, QuasiCone, standard_cone
from .polytope import LabeledPolytope, interior_contains

__all__ = [
    "DomainError",
    "HessianSample",
    "Potential",
    "LogAffinePotential",
    "CallbackPotential",
    "SumPotential",
    "PullbackPotential",
    "BoothbyWangPotential",
    "SliceRestrictionPotential",
    "guillemin_potential",
    "canonical_cone_potential",
    "reeb_correction_potential",
    "evaluate",
    "gradient",
    "hessian",
    "reeb_vector",
    "homogeneity_defect",
    "boundary_validity_scan",
    "restrict_to_slice",
    "BoundaryScanReport",
    "BoundaryScanEntry",
    "potential_to_dict",
    "potential_from_dict",
]


class DomainError(ValueError):
    """Point lies outside the domain of definition."""


def _is_exact_seq(x) -> bool:
    return all(isinstance(c, (int, Fraction)) and not isinstance(c, bool) for c in x)


@dataclass(frozen=True)
class HessianSample:
    point: np.ndarray
    gradient: np.ndarray
    matrix: np.ndarray
    positive_definite: bool


def _is_pd(S: np.ndarray) -> bool:
    try:
        np.linalg.cholesky((S + S.T) / 2.0)
        return True
    except np.linalg.LinAlgError:
        return False


class Potential:
    """Base class; subclasses fill in _value/_gradient/_hessian."""

    dim: int
    cone_domain: bool = False

    def contains(self, x, margin: float = 1e-12) -> bool:
        raise NotImplementedError

    def domain_cone(self):
        """The cone this potential lives on, when one can be named."""
        return None

    def _check(self, x):
        if len(x) != self.dim:
            raise DomainError(f"point has dimension {len(x)}, potential has {self.dim}")
        if not self.contains(x):
            raise DomainError(f"point {tuple(x)} is outside the domain")

    def value(self, x) -> float:
        self._check(x)
        return float(self._value(np.asarray(x, dtype=float)))

    def gradient(self, x) -> np.ndarray:
        self._check(x)
        return np.asarray(self._gradient(np.asarray(x, dtype=float)), dtype=float)

    def hessian_matrix(self, x) -> np.ndarray:
        self._check(x)
        S = np.asarray(self._hessian(np.asarray(x, dtype=float)), dtype=float)
        return (S + S.T) / 2.0

    def hessian(self, x) -> HessianSample:
        xf = np.asarray(x, dtype=float)
        S = self.hessian_matrix(x)
        return HessianSample(point=xf, gradient=self.gradient(x), matrix=S,
                             positive_definite=_is_pd(S))

    def to_dict(self) -> dict:
        raise NotImplementedError(f"{type(self).__name__} is not serializable")


class LogAffinePotential(Potential):
    """Weighted sum of l log l over affine functionals l(x) = <x,nu> + c.

    The combinatorial potential of a polytope uses weight 1/2 on every
    facet; cones do the same with zero offsets; the Reeb log correction
    is a difference of two such terms.
    """

    def __init__(self, terms, domain=None, cone_domain=False, origin=None):
        terms = tuple((w, tuple(nu), c) for w, nu, c in terms)
        if not terms:
            raise ValueError("no terms")
        self.dim = len(terms[0][1])
        if any(len(nu) != self.dim for _, nu, _ in terms):
            raise ValueError("inconsistent term dimensions")
        self.exact = all(
            _is_exact_seq(nu) and _is_exact_seq((w, c)) for w, nu, c in terms)
        self.terms = terms
        self._weights = np.array([float(w) for w, _, _ in terms])
        self._normals = np.array([[float(e) for e in nu] for _, nu, _ in terms])
        self._offsets = np.array([float(c) for _, _, c in terms])
        self.domain = domain
        self.cone_domain = cone_domain
        self.origin = origin

    def _ell(self, x: np.ndarray) -> np.ndarray:
        return self._normals @ x + self._offsets

    def contains(self, x, margin: float = 1e-12) -> bool:
        # The domain can be strictly smaller than where the logs are
        # defined (the Reeb correction has only two functionals), so a
        # named domain wins over the term-positivity test.
        if isinstance(self.domain, LabeledPolytope):
            return interior_contains(self.domain, tuple(x), margin)
        if isinstance(self.domain, (MomentCone, QuasiCone)):
            return self.domain.contains_interior(tuple(x), margin)
        if self.exact and _is_exact_seq(x):
            for _, nu, c in self.terms:
                if sum(Fraction(a) * Fraction(b) for a, b in zip(nu, x)) + Fraction(c) <= 0:
                    return False
            return True
        ell = self._ell(np.asarray(x, dtype=float))
        return bool(np.all(ell > margin))

    def domain_cone(self):
        return self.domain if isinstance(self.domain, (MomentCone, QuasiCone)) else None

    def _value(self, x):
        ell = self._ell(x)
        return float(np.dot(self._weights, ell * np.log(ell)))

    def _gradient(self, x):
        ell = self._ell(x)
        return (self._weights * (np.log(ell) + 1.0)) @ self._normals

    def _hessian(self, x):
        ell = self._ell(x)
        return self._normals.T @ ((self._weights / ell)[:, None] * self._normals)

    def to_dict(self) -> dict:
        from .cone import cone_to_dict
        from .polytope import polytope_to_dict

        if self.origin == "guillemin":
            return {"type": "guillemin", "polytope": polytope_to_dict(self.domain)}
        if self.origin == "canonical_cone" and isinstance(self.domain, MomentCone):
            return {"type": "canonical_cone", "cone": cone_to_dict(self.domain)}
        if (isinstance(self.origin, tuple) and self.origin[0] == "reeb_correction"
                and isinstance(self.domain, MomentCone)):
            return {"type": "reeb_correction", "cone": cone_to_dict(self.domain),
                    "b": [_num_to_json(e) for e in self.origin[1]]}
        return {
            "type": "log_affine",
            "cone_domain": self.cone_domain,
            "terms": [
                {"weight": _num_to_json(w), "normal": [_num_to_json(e) for e in nu],
                 "offset": _num_to_json(c)}
                for w, nu, c in self.terms
            ],
        }


def guillemin_potential(P: LabeledPolytope) -> LogAffinePotential:
    """Half the sum of l log l over the facets of P."""
    terms = [(Fraction(1, 2) if P.exact else 0.5, f.normal, f.offset) for f in P.facets]
    return LogAffinePotential(terms, domain=P, cone_domain=False, origin="guillemin")


def canonical_cone_potential(C) -> LogAffinePotential:
    """The cone analogue: offsets vanish, domain is the open cone."""
    exact = isinstance(C, MomentCone)
    terms = [(Fraction(1, 2) if exact else 0.5, nu, Fraction(0) if exact else 0.0)
             for nu in C.normals]
    return LogAffinePotential(terms, domain=C, cone_domain=True, origin="canonical_cone")


def reeb_correction_potential(C, b) -> LogAffinePotential:
    """Log correction moving the Reeb vector of the canonical potential to b.

    s_b = (1/2)(<x,b> log <x,b> - <x,K> log <x,K>), K the sum of the
    cone normals.  Adding this to the canonical cone potential yields a
    potential whose Reeb vector is exactly b at every interior point.
    """
    if len(b) != C.dim:
        raise ValueError("Reeb vector dimension mismatch")
    exact = isinstance(C, MomentCone) and _is_exact_seq(b)
    K = tuple(sum(nu[i] for nu in C.normals) for i in range(C.dim))
    if exact:
        terms = [(Fraction(1, 2), tuple(b), Fraction(0)),
                 (Fraction(-1, 2), K, Fraction(0))]
    else:
        terms = [(0.5, tuple(float(e) for e in b), 0.0),
                 (-0.5, tuple(float(e) for e in K), 0.0)]
    return LogAffinePotential(terms, domain=C, cone_domain=True,
                              origin=("reeb_correction", tuple(b)))


class CallbackPotential(Potential):
    """User-supplied smooth term with analytic derivative callbacks.

    When ``degree`` is given, Euler's identity <x, grad> = degree * value
    is verified at the supplied check points on construction.
    """

    def __init__(self, dim: int, value: Callable, gradient: Callable, hessian: Callable,
                 domain=None, cone_domain: bool = False, degree: float | None = None,
                 check_points: Sequence | None = None):
        self.dim = dim
        self._value_fn = value
        self._gradient_fn = gradient
        self._hessian_fn = hessian
        self.domain = domain
        self.cone_domain = cone_domain
        self.degree = degree
        if degree is not None:
            if not check_points:
                raise ValueError("declaring a homogeneity degree requires check points")
            for p in check_points:
                p = np.asarray(p, dtype=float)
                v = float(value(p))
                resid = abs(float(np.dot(p, gradient(p))) - degree * v)
                if resid > 1e-8 * max(1.0, abs(v)):
                    raise ValueError(
                        f"Euler identity fails at {tuple(p)}: residual {resid:.3e}")

    def contains(self, x, margin: float = 1e-12) -> bool:
        if self.domain is None:
            return True
        if isinstance(self.domain, LabeledPolytope):
            return interior_contains(self.domain, tuple(x), margin)
        return self.domain.contains_interior(tuple(x), margin)

    def domain_cone(self):
        return self.domain if isinstance(self.domain, (MomentCone, QuasiCone)) else None

    def _value(self, x):
        return self._value_fn(x)

    def _gradient(self, x):
        return self._gradient_fn(x)

    def _hessian(self, x):
        return self._hessian_fn(x)


class SumPotential(Potential):
    def __init__(self, parts: Sequence[Potential]):
        parts = tuple(parts)
        if not parts:
            raise ValueError("empty sum")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise ValueError(f"summands live in different dimensions: {sorted(dims)}")
        self.dim = parts[0].dim
        self.parts = parts
        self.cone_domain = all(p.cone_domain for p in parts)

    def contains(self, x, margin: float = 1e-12) -> bool:
        return all(p.contains(x, margin) for p in self.parts)

    @property
    def domain(self):
        doms = [d for d in (getattr(p, "domain", None) for p in self.parts)
                if d is not None]
        if not doms:
            return None
        first = doms[0]
        for d in doms[1:]:
            if d is not first and d != first:
                return None
        return first

    def domain_cone(self):
        cones = [c for c in (p.domain_cone() for p in self.parts) if c is not None]
        if not cones:
            return None
        first = cones[0]
        for c in cones[1:]:
            if _cone_key(c) != _cone_key(first):
                return None
        return first

    def _value(self, x):
        return sum(p._value(x) for p in self.parts)

    def _gradient(self, x):
        return sum(p._gradient(x) for p in self.parts)

    def _hessian(self, x):
        return sum(np.asarray(p._hessian(x), dtype=float) for p in self.parts)

    def to_dict(self) -> dict:
        return {"type": "sum", "parts": [p.to_dict() for p in self.parts]}


class PullbackPotential(Potential):
    """s(T x) for an invertible linear T; Hessian transforms as T^t S T."""

    def __init__(self, base: Potential, T):
        self.base = base
        self.dim = base.dim
        self.cone_domain = base.cone_domain
        if hasattr(T, "rows"):
            self.exact_matrix = T
            self.matrix = np.array([[float(e) for e in r] for r in T.rows])
        else:
            self.exact_matrix = None
            self.matrix = np.asarray(T, dtype=float)
        if self.matrix.shape != (self.dim, self.dim):
            raise ValueError("transform shape mismatch")
        if abs(np.linalg.det(self.matrix)) < 1e-12:
            raise ValueError("transform is singular")

    def contains(self, x, margin: float = 1e-12) -> bool:
        if self.exact_matrix is not None and _is_exact_seq(x):
            tx = self.exact_matrix.mul_vec([Fraction(c) for c in x])
            return self.base.contains(tx, margin)
        return self.base.contains(self.matrix @ np.asarray(x, dtype=float), margin)

    def _value(self, x):
        return self.base._value(self.matrix @ x)

    def _gradient(self, x):
        return self.matrix.T @ self.base._gradient(self.matrix @ x)

    def _hessian(self, x):
        inner = np.asarray(self.base._hessian(self.matrix @ x), dtype=float)
        return self.matrix.T @ inner @ self.matrix

    def to_dict(self) -> dict:
        if self.exact_matrix is not None:
            rows = [[_num_to_json(e) for e in r] for r in self.exact_matrix.rows]
        else:
            rows = [[float(e) for e in r] for r in self.matrix]
        return {"type": "pullback", "matrix": rows, "base": self.base.to_dict()}


class BoothbyWangPotential(Potential):
    """Lift of a polytope potential to the cone over the polytope.

    s~(x, z) = z s(x/z) + (z log z)/2.  The lift is homogeneous of
    degree 1 and its Reeb vector is (0, ..., 0, 1) wherever defined.
    """

    def __init__(self, base: Potential):
        if base.cone_domain:
            raise ValueError("Boothby-Wang lift expects a polytope-domain potential")
        self.base = base
        self.dim = base.dim + 1
        self.cone_domain = True

    def contains(self, x, margin: float = 1e-12) -> bool:
        z = x[-1]
        if _is_exact_seq(x):
            if z <= 0:
                return False
            u = tuple(Fraction(c) / Fraction(z) for c in x[:-1])
            return self.base.contains(u, margin)
        z = float(z)
        if z <= margin:
            return False
        u = np.asarray(x[:-1], dtype=float) / z
        return self.base.contains(u, margin)

    def domain_cone(self):
        dom = getattr(self.base, "domain", None)
        if isinstance(dom, LabeledPolytope):
            return QuasiCone.standard_over(dom)
        return None

    def _split(self, xz):
        z = xz[-1]
        return xz[:-1] / z, z

    def _value(self, xz):
        u, z = self._split(xz)
        return z * self.base._value(u) + 0.5 * z * math.log(z)

    def _gradient(self, xz):
        u, z = self._split(xz)
        g = np.asarray(self.base._gradient(u), dtype=float)
        last = self.base._value(u) - float(np.dot(u, g)) + 0.5 * math.log(z) + 0.5
        return np.concatenate([g, [last]])

    def _hessian(self, xz):
        u, z = self._split(xz)
        S = np.asarray(self.base._hessian(u), dtype=float)
        Su = S @ u
        corner = float(u @ Su) + 0.5
        top = np.hstack([S, -Su[:, None]])
        bottom = np.concatenate([-Su, [corner]])
        return np.vstack([top, bottom[None, :]]) / z

    def to_dict(self) -> dict:
        return {"type": "boothby_wang", "base": self.base.to_dict()}


class SliceRestrictionPotential(Potential):
    """Restriction of a cone potential to the height-one slice of P."""

    def __init__(self, base: Potential, P: LabeledPolytope):
        if not base.cone_domain:
            raise ValueError("slice restriction expects a cone-domain potential")
        if base.dim != P.dim + 1:
            raise DomainError("slice/cone mismatch: dimensions differ")
        dc = base.domain_cone()
        if dc is not None:
            target = standard_cone(P) if P.exact else QuasiCone.standard_over(P)
            if _cone_key(dc) != _cone_key(target):
                raise DomainError("slice/cone mismatch: the cone is not the standard "
                                  "cone over the polytope")
        self.base = base
        self.polytope = P
        self.dim = P.dim
        self.cone_domain = False
        self.domain = P

    def contains(self, x, margin: float = 1e-12) -> bool:
        one = 1 if _is_exact_seq(x) else 1.0
        return (interior_contains(self.polytope, tuple(x), margin)
                and self.base.contains(tuple(x) + (one,), margin))

    def _embed(self, x):
        return np.concatenate([x, [1.0]])

    def _value(self, x):
        return self.base._value(self._embed(x))

    def _gradient(self, x):
        return np.asarray(self.base._gradient(self._embed(x)), dtype=float)[:-1]

    def _hessian(self, x):
        full = np.asarray(self.base._hessian(self._embed(x)), dtype=float)
        return full[:-1, :-1]


def _cone_key(C) -> frozenset:
    """Scale-invariant fingerprint of a cone's facet normals."""
    out = []
    for nu in C.normals:
        vals = [float(e) for e in nu]
        scale = max(abs(v) for v in vals)
        out.append(tuple(round(v / scale, 9) for v in vals))
    return frozenset(out)


def evaluate(s: Potential, x) -> float:
    return s.value(x)


def gradient(s: Potential, x) -> np.ndarray:
    return s.gradient(x)


def hessian(s: Potential, x) -> HessianSample:
    return s.hessian(x)


def reeb_vector(s: Potential, x) -> np.ndarray:
    """2 S(x) x; constant on cone potentials of Reeb type."""
    if not s.cone_domain:
        raise DomainError("Reeb vector is defined for cone-domain potentials")
    xf = np.asarray(x, dtype=float)
    return 2.0 * (s.hessian_matrix(x) @ xf)


def homogeneity_defect(s: Potential, x, t: float) -> float:
    """Max-norm failure of S(e^{2t} x) = e^{-2t} S(x)."""
    r = math.exp(2.0 * t)
    xf = np.asarray(x, dtype=float)
    a = s.hessian_matrix(r * xf)
    b = s.hessian_matrix(xf) / r
    return float(np.max(np.abs(a - b)))


@dataclass(frozen=True)
class BoundaryScanEntry:
    facet: int
    values: tuple[float, ...]
    verdict: str
    positive_definite: bool


@dataclass(frozen=True)
class BoundaryScanReport:
    ok: bool
    entries: tuple[BoundaryScanEntry, ...]


def boundary_validity_scan(s: Potential, domain=None, steps: int = 10) -> BoundaryScanReport:
    """Probe det(S) x (product of facet functionals) toward each facet.

    For a potential inducing a metric with the right boundary behavior
    the product tends to a positive constant along inward normals; a
    nonpositive or blowing-up product flags an invalid potential.
    """
    if domain is None:
        domain = getattr(s, "domain", None)
    if domain is None:
        raise ValueError("no domain to scan")
    if isinstance(domain, LabeledPolytope):
        facets = [(tuple(float(e) for e in f.normal), float(f.offset)) for f in domain.facets]
        verts = np.array([[float(c) for c in v] for v in domain.vertices])
        base = verts.mean(axis=0)
        targets = []
        for r in range(len(domain.facets)):
            on = np.array([[float(c) for c in v] for v in domain.facet_vertices(r)])
            targets.append(on.mean(axis=0))
    else:
        if not hasattr(domain, "rays"):
            raise ValueError("boundary scan over a cone needs its extreme rays")
        facets = [(tuple(float(e) for e in nu), 0.0) for nu in domain.normals]
        rays = np.array([[float(c) for c in r] for r in domain.rays])
        base = rays.sum(axis=0)
        targets = []
        for nu in domain.normals:
            nuf = np.array([float(e) for e in nu])
            on = rays[np.abs(rays @ nuf) == 0]
            targets.append(on.sum(axis=0))

    entries = []
    for r, target in enumerate(targets):
        values = []
        pd_all = True
        for i in range(steps):
            x = target + (base - target) * 0.5 ** (i + 1)
            S = s.hessian_matrix(x)
            pd_all = pd_all and _is_pd(S)
            prod = 1.0
            for nu, c in facets:
                prod *= float(np.dot(nu, x)) + c
            values.append(float(np.linalg.det(S)) * prod)
        tail = values[-3:]
        if any(v <= 0 for v in values):
            verdict = "nonpositive"
        elif max(tail) - min(tail) <= 0.05 * max(abs(tail[-1]), 1e-300):
            verdict = "converges_positive"
        elif abs(values[-1]) > 50.0 * max(abs(values[0]), 1e-300):
            verdict = "diverges"
        else:
            verdict = "inconclusive"
        entries.append(BoundaryScanEntry(facet=r, values=tuple(values), verdict=verdict,
                                         positive_definite=pd_all))
    ok = all(e.verdict == "converges_positive" and e.positive_definite for e in entries)
    return BoundaryScanReport(ok=ok, entries=tuple(entries))


def restrict_to_slice(s: Potential, P: LabeledPolytope) -> SliceRestrictionPotential:
    return SliceRestrictionPotential(s, P)


def _num_to_json(v):
    if isinstance(v, float):
        return v
    f = Fraction(v)
    if f.denominator == 1:
        return int(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def _num_from_json(v):
    return Fraction(v) if isinstance(v, str) else v


def potential_to_dict(s: Potential) -> dict:
    return s.to_dict()


def potential_from_dict(d: dict) -> Potential:
    from .cone import cone_from_dict
    from .polytope import polytope_from_dict

    kind = d.get("type")
    try:
        if kind == "guillemin":
            return guillemin_potential(polytope_from_dict(d["polytope"]))
        if kind == "canonical_cone":
            return canonical_cone_potential(cone_from_dict(d["cone"]))
        if kind == "reeb_correction":
            b = tuple(_num_from_json(e) for e in d["b"])
            return reeb_correction_potential(cone_from_dict(d["cone"]), b)
        if kind == "log_affine":
            terms = [
                (_num_from_json(t["weight"]),
                 tuple(_num_from_json(e) for e in t["normal"]),
                 _num_from_json(t["offset"]))
                for t in d["terms"]
            ]
            return LogAffinePotential(terms, cone_domain=d.get("cone_domain", False))
        if kind == "sum":
            return SumPotential([potential_from_dict(p) for p in d["parts"]])
        if kind == "pullback":
            rows = [[_num_from_json(e) for e in r] for r in d["matrix"]]
            if all(not isinstance(e, float) for r in rows for e in r):
                from .latlin import RatMatrix

                return PullbackPotential(potential_from_dict(d["base"]), RatMatrix(rows))
            return PullbackPotential(potential_from_dict(d["base"]), rows)
        if kind == "boothby_wang":
            return BoothbyWangPotential(potential_from_dict(d["base"]))
        if kind == "calabi":
            from .calabi import calabi_potential

            return calabi_potential(d["n"], d["A"])
    except KeyError as e:
        raise ValueError(f"missing field {e} in potential data") from e
    raise ValueError(f"unknown potential type {kind!r}")
