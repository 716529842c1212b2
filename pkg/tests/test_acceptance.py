"""Top-level acceptance checks, one test per criterion.

Each test prints a single [acceptance] PASS/FAIL line (visible with -s
or in failure output) and asserts every pinned tolerance, including the
runtime bounds where stated.
"""

import math
import time

import numpy as np

from sympot.calabi import calabi_potential, equivalence_to_ckm, solve_A
from sympot.cone import (
    build_cone,
    c_km,
    c_pq,
    dual_cone,
    is_good,
    orthant_cone,
    reeb_admissible,
    simplex_cone,
    standard_cone,
    t_km,
    verify_equivalence,
)
from sympot.curvature import einstein_verify, scalar_curvature
from sympot.latlin import IntMatrix, cokernel_order
from sympot.polytope import build_polytope, transform_polytope
from sympot.potential import (
    BoothbyWangPotential,
    CallbackPotential,
    PullbackPotential,
    SliceRestrictionPotential,
    SumPotential,
    canonical_cone_potential,
    guillemin_potential,
    homogeneity_defect,
    reeb_correction_potential,
    reeb_vector,
)
from sympot.sampling import bw_points, cone_interior_points, polytope_interior_points

from oracles import fd_jacobian, minor_gcd_invariant_factors

P1 = build_polytope([((1, 0), 1), ((-1, 1), 1), ((0, 1), 1), ((0, -1), 1)])
SEGMENT = build_polytope([((1,), 0), ((-1,), 1)])


def _report(name: str, ok: bool, detail: str):
    print(f"[acceptance] {'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_criterion_01_flat_model():
    t0 = time.perf_counter()
    worst_reeb = 0.0
    worst_sc = 0.0
    for n in (1, 2, 3):
        C = orthant_cone(n + 1)
        s = canonical_cone_potential(C)
        for x in cone_interior_points(C, 10, seed=n):
            r = np.asarray(reeb_vector(s, x), dtype=float)
            worst_reeb = max(worst_reeb, float(np.max(np.abs(r - 1.0))))
            worst_sc = max(worst_sc, abs(scalar_curvature(s, x)))
    elapsed = time.perf_counter() - t0
    ok = worst_reeb < 1e-9 and worst_sc < 1e-6 and elapsed < 1.0
    _report("criterion 1 (flat model)", ok,
            f"max|reeb-1| = {worst_reeb:.2e}, max|Sc| = {worst_sc:.2e}, "
            f"{elapsed:.2f}s")


def test_criterion_02_simplex_cone():
    t0 = time.perf_counter()
    worst = 0.0
    k_ok = True
    for n in (1, 2, 3):
        C = simplex_cone(n)
        K = tuple(map(sum, zip(*C.normals)))
        k_ok = k_ok and K == tuple([0] * n + [1])
        s = canonical_cone_potential(C)
        for x in cone_interior_points(C, 4, seed=n):
            for t in (0.1, 0.3, 1.0):
                worst = max(worst, homogeneity_defect(s, x, t))
    elapsed = time.perf_counter() - t0
    ok = k_ok and worst < 1e-10 and elapsed < 1.0
    _report("criterion 2 (simplex cone)", ok,
            f"K check {k_ok}, max homogeneity defect = {worst:.2e}, {elapsed:.2f}s")


def test_criterion_03_cp1():
    s = guillemin_potential(SEGMENT)
    devs = [abs(scalar_curvature(s, x) - 4.0)
            for x in polytope_interior_points(SEGMENT, 50, seed=3)]
    lift = BoothbyWangPotential(s)
    lifted_max = 0.0
    relation_max = 0.0
    for (x, z) in bw_points(SEGMENT, 50, seed=4):
        sc_lift = scalar_curvature(lift, (x, z))
        sc_base = scalar_curvature(s, (x / z,))
        lifted_max = max(lifted_max, abs(sc_lift))
        relation_max = max(relation_max, abs(sc_lift * z - (sc_base - 4.0)))
    ok = max(devs) < 1e-6 and lifted_max < 1e-4 and relation_max < 1e-4
    _report("criterion 3 (CP^1)", ok,
            f"max|Sc-4| = {max(devs):.2e}, lift max|Sc~| = {lifted_max:.2e}, "
            f"relation defect = {relation_max:.2e}")


def test_criterion_04_reeb_family():
    C = c_km(2, 1, 1)
    dual = dual_cone(C)
    worst = 0.0
    admissible_ok = True
    for i, b in enumerate(cone_interior_points(dual, 5, seed=5)):
        b = tuple(float(v) for v in b)
        admissible_ok = admissible_ok and reeb_admissible(C, b)
        s = SumPotential([canonical_cone_potential(C),
                          reeb_correction_potential(C, b)])
        for x in cone_interior_points(C, 10, seed=10 + i):
            r = np.asarray(reeb_vector(s, x), dtype=float)
            worst = max(worst, float(np.max(np.abs(r - np.asarray(b)))))
    ok = admissible_ok and worst < 1e-8
    _report("criterion 4 (Reeb family)", ok,
            f"admissible {admissible_ok}, max|reeb-b| = {worst:.2e}")


def test_criterion_05_good_cone_suite():
    t0 = time.perf_counter()
    checked = 0
    all_good = True
    for n in (2, 3):
        for k in (1, 2, 3):
            for m in range(1, k * n):
                if not (k - 1) * n < 2 * m:
                    continue
                all_good = all_good and is_good(c_km(n, k, m)).verdict
                checked += 1
    square = build_cone([(1, 1, 1), (1, -1, 1), (-1, 1, 1), (-1, -1, 1)])
    cert = is_good(square)
    failing = cert.failing
    oracle = minor_gcd_invariant_factors([square.normals[a] for a in failing.facets])
    square_ok = (not cert.verdict
                 and failing.codim == 2
                 and tuple(failing.invariant_factors) == (1, 2)
                 and oracle == (1, 2))
    elapsed = time.perf_counter() - t0
    ok = all_good and square_ok and elapsed < 5.0
    _report("criterion 5 (good-cone suite)", ok,
            f"{checked} family cones good, square cone rejected with factors "
            f"(1,2) at adjacent pair {tuple(failing.facets)}, {elapsed:.2f}s")


def test_criterion_06_pi1_orders():
    mismatches = []
    for k in range(1, 6):
        for m in range(0, 2 * k):
            C = c_km(2, k, m)
            M = IntMatrix([list(nu) for nu in C.normals])
            order = cokernel_order(M)
            oracle = math.prod(minor_gcd_invariant_factors(
                [list(nu) for nu in C.normals]))
            expected = math.gcd(m + 2, k + 1)
            if not (order == expected == oracle):
                mismatches.append((k, m, order, oracle, expected))
    _report("criterion 6 (pi1 orders)", not mismatches,
            f"cokernel order == gcd(m+2, k+1) == minor-gcd oracle for k <= 5, "
            f"mismatches: {mismatches}")


def test_criterion_07_ypq():
    t0 = time.perf_counter()
    failures = []
    for p in range(2, 8):
        for q in range(1, p):
            if math.gcd(p, q) != 1:
                continue
            k, m = p - 1, p + q - 2
            T = t_km(k, m)
            det = T.matrix.det()
            integer = all(isinstance(e, int) for row in T.matrix.rows for e in row)
            bijective, pairing = verify_equivalence(c_km(2, k, m), c_pq(p, q), T)
            if not (det == 1 and integer and bijective
                    and len(pairing) == 4
                    and len({j for _, j in pairing}) == 4):
                failures.append((p, q))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 1.0
    _report("criterion 7 (Y^{p,q})", ok,
            f"all coprime 0<q<p<=7 verified, failures: {failures}, {elapsed:.2f}s")


def test_criterion_08_calabi_pipeline():
    t0 = time.perf_counter()
    details = []
    ok = True
    for (n, k, m) in ((2, 1, 1), (2, 2, 3), (3, 1, 2)):
        sol = solve_A(n, k, m)
        c0 = n / (n + 1.0)
        res_a = abs((c0 - sol.a) ** n * (1.0 / (n + 1) + sol.a) - sol.A)
        res_b = abs((sol.b + c0) ** n * (1.0 / (n + 1) - sol.b) - sol.A)
        g1 = (k * (n + 1) * sol.a - m) / ((n + 1) * sol.a - n)
        g2 = (m - (n + 1) * sol.b) / (n + (n + 1) * sol.b)
        s = calabi_potential(n, sol.A)
        grid = polytope_interior_points(s.domain, 100, seed=8)
        report = einstein_verify(s, points=grid, target=2 * n * (n + 1),
                                 tolerance=1e-4)
        lift = BoothbyWangPotential(s)
        lift_max = max(abs(scalar_curvature(lift, pt))
                       for pt in bw_points(s.domain, 50, seed=9))
        equivalence = equivalence_to_ckm(sol)  # raises above 1e-8
        pair_ok, _ = verify_equivalence(sol.cone, c_km(n, k, m), equivalence,
                                        tol=1e-8)
        case_ok = (res_a < 1e-12 and res_b < 1e-12 and abs(g1 - g2) < 1e-8
                   and report.verdict and lift_max < 1e-3 and pair_ok)
        ok = ok and case_ok
        details.append(f"({n},{k},{m}): |p_A| {max(res_a, res_b):.1e}, "
                       f"Sc dev {report.max_abs_deviation:.1e}, "
                       f"lift {lift_max:.1e}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 30.0
    _report("criterion 8 (Calabi pipeline)", ok,
            "; ".join(details) + f", {elapsed:.1f}s")


def test_criterion_09_derivative_hygiene():
    C = c_km(2, 1, 1)
    b = (0.2, 0.5, 3.0)
    trap = build_polytope([((-1, 0), 1), ((0, -1), 1), ((0, 1), 1), ((1, 1), 1)])
    T = IntMatrix([[1, -1], [0, 1]])
    sol = solve_A(2, 1, 1)
    square = build_polytope([((1, 0), 0), ((0, 1), 0), ((-1, 0), 1), ((0, -1), 1)])
    variants = {
        "guillemin": guillemin_potential(P1),
        "canonical_cone": canonical_cone_potential(C),
        "reeb_correction": reeb_correction_potential(C, b),
        "sum": SumPotential([canonical_cone_potential(C),
                             reeb_correction_potential(C, b)]),
        "pullback": PullbackPotential(guillemin_potential(trap), T),
        "boothby_wang": BoothbyWangPotential(guillemin_potential(P1)),
        "slice": SliceRestrictionPotential(canonical_cone_potential(C), P1),
        "callback": CallbackPotential(
            2,
            value=lambda x: 0.5 * float(x @ x),
            gradient=lambda x: np.asarray(x, dtype=float),
            hessian=lambda x: np.eye(2),
            domain=square),
        "calabi": calabi_potential(2, sol.A),
    }
    worst = {}
    for name, s in variants.items():
        if name in ("canonical_cone", "reeb_correction", "sum"):
            points = cone_interior_points(C, 20, seed=11)
        elif name == "boothby_wang":
            points = bw_points(P1, 20, seed=12)
        elif name == "pullback":
            points = polytope_interior_points(transform_polytope(trap, T), 20,
                                              seed=13)
        else:
            points = polytope_interior_points(s.domain, 20, seed=14)
        rel = 0.0
        for x in points:
            x = np.asarray(x, dtype=float)
            H = s.hessian_matrix(x)
            H_fd = fd_jacobian(lambda y: s.gradient(y), x)
            rel = max(rel, float(np.max(np.abs(H - H_fd))
                                 / max(1.0, np.max(np.abs(H)))))
        worst[name] = rel
    ok = all(v < 1e-6 for v in worst.values())
    _report("criterion 9 (derivative hygiene)", ok,
            ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_criterion_10_transform_covariance():
    base = guillemin_potential(P1)
    worst = 0.0
    for m in (1, 2, 3):
        T = IntMatrix([[m, -1], [0, 1]])
        pulled = PullbackPotential(base, T)
        domain = transform_polytope(P1, T)
        for x in polytope_interior_points(domain, 12, seed=20 + m):
            x = np.asarray(x, dtype=float)
            image = np.array([m * x[0] - x[1], x[1]])
            # step 1e-3: the 1e-6 bound is on the difference of two FD
            # values, so rounding noise (eps/h^2 per stencil term) has to
            # sit well below it; truncation is still ~1e-10 here
            diff = abs(scalar_curvature(pulled, x, step=1e-3)
                       - scalar_curvature(base, image, step=1e-3))
            worst = max(worst, diff)
    ok = worst < 1e-6
    _report("criterion 10 (transform covariance)", ok,
            f"max|Sc(s o T)(x) - Sc(s)(Tx)| = {worst:.2e} over m in {{1,2,3}}")
