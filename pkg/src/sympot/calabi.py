"""One-parameter family of U(n)-invariant Kähler-Einstein potentials.

For 0 < A < n^n/(n+1)^(n+1) the potential

    s_A(x) = (1/2) (sum_i (x_i + 1/(n+1)) log(x_i + 1/(n+1)) + h_A(r)),

with r = x_1 + ... + x_n and h_A'' determined by the polynomial p_A,
has constant scalar curvature 2n(n+1) on the (generally irrational)
polytope P_A.  When the auxiliary parameter lambda_A hits (kn-m)/(n+m)
the standard cone over P_A becomes linearly equivalent to the integral
good cone C(k,m), with an explicit GL(n+1,R) matrix built from a single
scalar gamma; the Reeb vector it induces decides regularity by its
rationality.  This module solves for A, assembles all of that data, and
exposes s_A as a potential whose Hessian is analytic (values and
gradients need one quadrature of h_A'' and are only defined up to an
affine term, which no curvature quantity sees).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .cone import (
    LinearEquivalence,
    MomentCone,
    QuasiCone,
    c_km,
    cone_faces,
    verify_equivalence,
)
from .latlin import approx_rational, completes_to_lattice_basis, primitive_vector
from .polytope import LabeledPolytope, build_polytope, interior_contains
from .potential import Potential

__all__ = [
    "CalabiError",
    "CalabiTolerances",
    "CalabiSolution",
    "CalabiPotential",
    "p_A",
    "p_A_prime",
    "solve_roots",
    "lambda_of_A",
    "solve_A",
    "calabi_potential",
    "p_A_polytope",
    "equivalence_to_ckm",
    "classify_reeb",
    "classify_reeb_vector",
]


class CalabiError(RuntimeError):
    """Parameter outside the family or a pipeline consistency failure."""


@dataclass(frozen=True)
class CalabiTolerances:
    """Pinned tolerances so runs are reproducible."""

    root: float = 1e-13
    gamma: float = 1e-8
    sc: float = 1e-4


def a_max(n: int) -> float:
    """Upper end of the parameter interval, n^n/(n+1)^(n+1)."""
    return n ** n / float((n + 1) ** (n + 1))


def _check_n(n: int):
    if not isinstance(n, int) or n < 1:
        raise CalabiError(f"n must be a positive integer, got {n!r}")


def _check_A(n: int, A: float):
    if not (0.0 < A < a_max(n)):
        raise CalabiError(
            f"A = {A!r} outside the open interval (0, {a_max(n)!r}) for n = {n}")


def p_A(n: int, A: float, r: float) -> float:
    """(r + n/(n+1))^n (1/(n+1) - r) - A."""
    c0 = n / (n + 1.0)
    return (r + c0) ** n * (1.0 / (n + 1) - r) - A


def p_A_prime(n: int, r: float) -> float:
    """-(n+1) r (r + n/(n+1))^(n-1); independent of A."""
    return -(n + 1.0) * r * (r + n / (n + 1.0)) ** (n - 1)


def solve_roots(n: int, A: float, tolerances: CalabiTolerances = CalabiTolerances()):
    """First negative and positive zeros of p_A, returned as (a, b) > 0.

    p_A is strictly increasing on (-n/(n+1), 0) and strictly decreasing
    on (0, 1/(n+1)) with p_A(0) > 0 and negative endpoint values, so each
    interval holds exactly one zero and a bracket solver finds it.
    """
    _check_n(n)
    _check_A(n, A)
    f = lambda r: p_A(n, A, r)
    lo = -n / (n + 1.0)
    hi = 1.0 / (n + 1)
    neg = brentq(f, lo, 0.0, xtol=1e-16, rtol=8.9e-16)
    pos = brentq(f, 0.0, hi, xtol=1e-16, rtol=8.9e-16)
    a, b = -neg, pos
    if not (0.0 < a < -lo and 0.0 < b < hi):
        raise CalabiError(f"roots ({a}, {b}) escaped their brackets")
    if abs(f(-a)) > tolerances.root or abs(f(b)) > tolerances.root:
        raise CalabiError(
            f"root residuals ({f(-a):.3e}, {f(b):.3e}) above {tolerances.root}")
    return a, b


def lambda_of_A(n: int, A: float) -> float:
    """(b/a) (n - (n+1)a) / (n + (n+1)b); sweeps (0, 1) over the A range."""
    a, b = solve_roots(n, A)
    return (b / a) * (n - (n + 1) * a) / (n + (n + 1) * b)


def p_A_polytope(n: int, A: float) -> LabeledPolytope:
    """P_A: x_i + 1/(n+1) >= 0, (r+a)/((n+1)a) >= 0, (b-r)/((n+1)b) >= 0.

    The a/b facet data is irrational for generic A, so the polytope is
    carried in floats (exact = False).
    """
    _check_n(n)
    _check_A(n, A)
    a, b = solve_roots(n, A)
    c = 1.0 / (n + 1)
    facets = [(tuple(1.0 if j == i else 0.0 for j in range(n)), c) for i in range(n)]
    facets.append((tuple(1.0 / ((n + 1) * a) for _ in range(n)), c))
    facets.append((tuple(-1.0 / ((n + 1) * b) for _ in range(n)), c))
    return build_polytope(facets)


class CalabiPotential(Potential):
    """s_A on the interior of P_A.

    The Hessian is analytic and separable: S_ij = (1/2)(delta_ij/(x_i +
    1/(n+1)) + h_A''(r)).  Values and gradients integrate h_A'' from 0
    numerically and are defined up to an affine term only; curvature
    and metric quantities never consume them.
    """

    value_up_to_affine = True

    def __init__(self, n: int, A: float,
                 tolerances: CalabiTolerances = CalabiTolerances()):
        _check_n(n)
        _check_A(n, A)
        self.n = n
        self.A = float(A)
        self.a, self.b = solve_roots(n, A, tolerances)
        self.dim = n
        self.cone_domain = False
        self.domain = p_A_polytope(n, A)
        self._c = 1.0 / (n + 1)
        self._c0 = n / (n + 1.0)

    def h_second(self, r: float) -> float:
        """h_A''(r) = -1/(r + n/(n+1)) + (r + n/(n+1))^(n-1)/p_A(r)."""
        c0 = self._c0
        return -1.0 / (r + c0) + (r + c0) ** (self.n - 1) / p_A(self.n, self.A, r)

    def _h_prime(self, r: float) -> float:
        val, _ = quad(self.h_second, 0.0, r, epsabs=1e-13, epsrel=1e-12, limit=200)
        return val

    def _h_value(self, r: float) -> float:
        # h(r) with h(0) = h'(0) = 0, via the one-integral kernel form
        val, _ = quad(lambda t: (r - t) * self.h_second(t), 0.0, r,
                      epsabs=1e-13, epsrel=1e-12, limit=200)
        return val

    def contains(self, x, margin: float = 1e-12) -> bool:
        return interior_contains(self.domain, tuple(x), margin)

    def _value(self, x):
        xs = x + self._c
        return 0.5 * (float(np.dot(xs, np.log(xs))) + self._h_value(float(x.sum())))

    def _gradient(self, x):
        hp = self._h_prime(float(x.sum()))
        return 0.5 * (np.log(x + self._c) + 1.0 + hp)

    def _hessian(self, x):
        h2 = self.h_second(float(x.sum()))
        return 0.5 * (np.diag(1.0 / (x + self._c)) + h2)

    def to_dict(self) -> dict:
        return {"type": "calabi", "n": self.n, "A": self.A}


def calabi_potential(n: int, A: float,
                     tolerances: CalabiTolerances = CalabiTolerances()) -> CalabiPotential:
    return CalabiPotential(n, A, tolerances)


@dataclass(frozen=True)
class CalabiSolution:
    """Everything solve_A produces for one (n, k, m)."""

    n: int
    k: int
    m: int
    A: float
    a: float
    b: float
    lam: float
    gamma: float
    polytope: LabeledPolytope
    cone: QuasiCone
    equivalence: LinearEquivalence
    reeb: tuple

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "m": self.m,
            "A": self.A,
            "a": self.a,
            "b": self.b,
            "lambda": self.lam,
            "gamma": self.gamma,
            "reeb": list(self.reeb),
            "equivalence": {
                "acts_on": self.equivalence.acts_on,
                "matrix": [list(map(float, row)) for row in self.equivalence.matrix],
            },
            "polytope_facets": [
                {"normal": [float(e) for e in f.normal], "offset": float(f.offset)}
                for f in self.polytope.facets
            ],
        }


def _gammas(n: int, k: int, m: int, a: float, b: float) -> tuple[float, float]:
    g1 = (k * (n + 1) * a - m) / ((n + 1) * a - n)
    g2 = (m - (n + 1) * b) / (n + (n + 1) * b)
    return g1, g2


def _t_rows(n: int, m: int, gamma: float) -> tuple:
    """Rows of the point map T; its transpose carries C_A normals to C(k,m).

    The transpose's columns are (e_i - gamma e_n, 0), ((m+1-gamma)e_n -
    d, 0) and ((n+1)gamma e_n, n+1), so those are exactly the rows here.
    """
    rows = []
    for i in range(n - 1):
        row = [0.0] * (n + 1)
        row[i] = 1.0
        row[n - 1] = -gamma
        rows.append(tuple(row))
    row = [-1.0] * n + [0.0]
    row[n - 1] += m + 1.0 - gamma
    rows.append(tuple(row))
    row = [0.0] * (n + 1)
    row[n - 1] = (n + 1.0) * gamma
    row[n] = float(n + 1)
    rows.append(tuple(row))
    return tuple(rows)


def _condition_ok(n: int, k: int, m: int) -> bool:
    return (k - 1) * n < 2 * m and m < k * n


def solve_A(n: int, k: int, m: int,
            tolerances: CalabiTolerances = CalabiTolerances(),
            grid_size: int = 1024) -> CalabiSolution:
    """Find A with lambda_A = (kn-m)/(n+m) and assemble the full solution.

    The target is bracketed by scanning lambda_A on a log-spaced A-grid
    and bisecting every sign change; no monotonicity in A is assumed.
    Zero brackets or more than one root abort with the full list rather
    than guessing.
    """
    _check_n(n)
    if not (isinstance(k, int) and isinstance(m, int) and k >= 1 and m >= 1):
        raise CalabiError(f"k, m must be positive integers, got ({k!r}, {m!r})")
    if not _condition_ok(n, k, m):
        raise CalabiError(
            f"(k-1)n/2 < m < kn fails for (n, k, m) = ({n}, {k}, {m})")
    target = (k * n - m) / float(n + m)

    top = a_max(n) * (1.0 - 1e-12)
    exps = np.linspace(-12.0, 0.0, grid_size)
    grid = np.minimum(a_max(n) * 10.0 ** exps, top)
    f = lambda A: lambda_of_A(n, A) - target
    values = [f(A) for A in grid]

    roots = []
    for i in range(len(grid) - 1):
        lo, hi = float(grid[i]), float(grid[i + 1])
        flo, fhi = values[i], values[i + 1]
        if flo == 0.0:
            roots.append(lo)
        elif flo * fhi < 0.0:
            roots.append(brentq(f, lo, hi, xtol=1e-16, rtol=8.9e-16))
    if values[-1] == 0.0:
        roots.append(float(grid[-1]))
    deduped = []
    for root in roots:
        if not any(abs(root - other) <= 1e-12 * max(1.0, abs(other))
                   for other in deduped):
            deduped.append(root)
    if not deduped:
        raise CalabiError(
            f"no bracket for lambda_A = {target} over (0, {a_max(n)}); "
            f"lambda range sampled: [{min(values) + target}, {max(values) + target}]")
    if len(deduped) > 1:
        raise CalabiError(
            "multiple A solve the target lambda; refusing to choose among "
            + ", ".join(repr(r) for r in deduped))

    A = deduped[0]
    a, b = solve_roots(n, A, tolerances)
    lam = (b / a) * (n - (n + 1) * a) / (n + (n + 1) * b)
    g1, g2 = _gammas(n, k, m, a, b)
    if abs(g1 - g2) > tolerances.gamma:
        raise CalabiError(
            f"gamma formulas disagree: {g1!r} vs {g2!r} (|diff| = {abs(g1 - g2):.3e})")
    gamma = 0.5 * (g1 + g2)

    polytope = p_A_polytope(n, A)
    cone = QuasiCone.standard_over(polytope)
    equivalence = LinearEquivalence(matrix=_t_rows(n, m, gamma), acts_on="points")
    reeb = tuple([0.0] * (n - 1) + [(n + 1.0) * gamma, float(n + 1)])
    return CalabiSolution(n=n, k=k, m=m, A=float(A), a=a, b=b, lam=lam,
                          gamma=gamma, polytope=polytope, cone=cone,
                          equivalence=equivalence, reeb=reeb)


def equivalence_to_ckm(solution: CalabiSolution,
                       tolerances: CalabiTolerances = CalabiTolerances()) -> LinearEquivalence:
    """Verified linear equivalence carrying C_A onto C(k, m).

    Re-derives T from gamma and checks that its transpose maps every
    C_A normal onto a distinct C(k, m) normal within the gamma
    tolerance.
    """
    n, k, m = solution.n, solution.k, solution.m
    g1, g2 = _gammas(n, k, m, solution.a, solution.b)
    if abs(g1 - g2) > tolerances.gamma:
        raise CalabiError(f"gamma formulas disagree: {g1!r} vs {g2!r}")
    gamma = 0.5 * (g1 + g2)
    T = LinearEquivalence(matrix=_t_rows(n, m, gamma), acts_on="points")
    ok, pairing = verify_equivalence(solution.cone, c_km(n, k, m), T,
                                     tol=tolerances.gamma)
    if not ok:
        raise CalabiError(
            f"normal map verification failed for (n, k, m) = ({n}, {k}, {m})")
    return LinearEquivalence(matrix=T.matrix, acts_on="points", pairing=pairing)


def _rationalize(values, max_denominator: int) -> tuple | None:
    out = []
    for v in values:
        if isinstance(v, (int, Fraction)):
            out.append(Fraction(v))
            continue
        f = approx_rational(float(v), max_denominator=max_denominator)
        if f is None:
            return None
        out.append(f)
    return tuple(out)


def classify_reeb_vector(C: MomentCone, b, max_denominator: int = 10 ** 6) -> str:
    """regular | quasi-regular | irregular for a Reeb vector on a good cone.

    Rationality is decided heuristically by continued fractions with a
    denominator bound.  A rational direction gives at least a locally
    free circle action (quasi-regular); it is upgraded to regular when
    the primitive Reeb generator extends every face's normal set to a
    lattice basis, which certifies freeness for good cones.
    """
    rational = _rationalize(b, max_denominator)
    if rational is None:
        return "irregular"
    den = math.lcm(*(f.denominator for f in rational))
    K = primitive_vector(tuple(int(f * den) for f in rational))
    for face in cone_faces(C):
        stack = [C.normals[i] for i in face.active] + [K]
        if not completes_to_lattice_basis(stack):
            return "quasi-regular"
    if not completes_to_lattice_basis([K]):
        return "quasi-regular"
    return "regular"


def classify_reeb(solution: CalabiSolution, max_denominator: int = 10 ** 6) -> str:
    """Regularity of the induced Reeb vector, by the rationality of gamma."""
    gamma = approx_rational(solution.gamma, max_denominator=max_denominator)
    if gamma is None:
        return "irregular"
    n = solution.n
    K = tuple([Fraction(0)] * (n - 1) + [(n + 1) * gamma, Fraction(n + 1)])
    return classify_reeb_vector(c_km(n, solution.k, solution.m), K,
                                max_denominator=max_denominator)
