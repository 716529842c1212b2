import math
import random
from fractions import Fraction

import pytest

from oracles import adjugate_inverse, minor_gcd_invariant_factors, random_unimodular
from sympot.latlin import (
    IntMatrix,
    RatMatrix,
    SingularMatrixError,
    approx_rational,
    cokernel_order,
    completes_to_lattice_basis,
    exact_rank,
    kernel_vector,
    primitive_vector,
    rat_inverse,
    smith_normal_form,
    solve_square_exact,
)


def ckm_normals(n, k, m):
    # facet normals of the family cone C(k, m) in R^{n+1}
    rows = []
    for i in range(n - 1):
        e = [0] * n
        e[i] = 1
        rows.append(e + [1])
    last = [-1] * n
    last[n - 1] = m
    rows.append(last + [1])
    rows.append([0] * (n - 1) + [k, 1])
    rows.append([0] * (n - 1) + [-1, 1])
    return rows


def test_snf_identity():
    snf = smith_normal_form(IntMatrix.identity(2))
    assert snf.D == IntMatrix.identity(2)
    assert snf.invariant_factors == (1, 1)
    assert snf.verify(IntMatrix.identity(2))


def test_snf_square_cone_pair():
    m = IntMatrix([[1, 1, 1], [-1, 1, 1]])
    snf = smith_normal_form(m)
    assert snf.invariant_factors == (1, 2)
    assert snf.invariant_factors == minor_gcd_invariant_factors(m.rows)
    assert snf.verify(m)


def test_snf_ckm_normals_unimodular_stack():
    m = IntMatrix(ckm_normals(2, 1, 1))
    assert m.rows == ((1, 0, 1), (-1, 1, 1), (0, 1, 1), (0, -1, 1))
    snf = smith_normal_form(m)
    assert snf.invariant_factors == (1, 1, 1)
    assert snf.invariant_factors == minor_gcd_invariant_factors(m.rows)


def test_snf_divisibility_chain_and_recomposition_random():
    rng = random.Random(7)
    for _ in range(60):
        rows = [[rng.randrange(-9, 10) for _ in range(rng.randrange(1, 5))]]
        ncols = len(rows[0])
        for _ in range(rng.randrange(0, 4)):
            rows.append([rng.randrange(-9, 10) for _ in range(ncols)])
        m = IntMatrix(rows)
        snf = smith_normal_form(m)
        assert snf.verify(m)
        diag = [snf.D.rows[i][i] for i in range(min(m.nrows, m.ncols))]
        assert all(d >= 0 for d in diag)
        for a, b in zip(diag, diag[1:]):
            if a != 0 and b != 0:
                assert b % a == 0
            if a == 0:
                assert b == 0
        # off-diagonal must vanish
        for i in range(m.nrows):
            for j in range(m.ncols):
                if i != j:
                    assert snf.D.rows[i][j] == 0
        assert snf.invariant_factors == minor_gcd_invariant_factors(rows)


def test_snf_invariants_stable_under_unimodular_multipliers():
    rng = random.Random(21)
    base = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    ref = smith_normal_form(IntMatrix(base)).invariant_factors
    for _ in range(25):
        u = IntMatrix(random_unimodular(3, rng))
        v = IntMatrix(random_unimodular(3, rng))
        assert abs(u.det()) == 1 and abs(v.det()) == 1
        m = u @ IntMatrix(base) @ v
        assert smith_normal_form(m).invariant_factors == ref


def test_completes_to_lattice_basis_examples():
    assert completes_to_lattice_basis([(1, 0, 1)])
    assert completes_to_lattice_basis([(1, 0, 1), (0, 1, 1)])
    assert not completes_to_lattice_basis([(1, 1, 1), (-1, 1, 1)])  # index 2 sublattice
    assert not completes_to_lattice_basis([(2, 0)])
    assert not completes_to_lattice_basis([(0, 0, 0)])
    assert not completes_to_lattice_basis([(1, 0), (0, 1), (1, 1)])  # too many rows
    assert not completes_to_lattice_basis([(1, 0, 0), (2, 0, 0)])  # rank deficient
    assert completes_to_lattice_basis([])


def test_completes_invariant_under_unimodular_row_ops():
    rng = random.Random(5)
    samples = [
        [(1, 0, 1), (0, 1, 1)],
        [(1, 1, 1), (-1, 1, 1)],
        [(2, 3, 5), (1, 1, 1)],
        [(1, 2, 3), (4, 5, 6)],
    ]
    for vecs in samples:
        ref = completes_to_lattice_basis(vecs)
        k = len(vecs)
        for _ in range(20):
            u = random_unimodular(k, rng)
            mixed = IntMatrix(u) @ IntMatrix(vecs)
            got = completes_to_lattice_basis(mixed.rows)
            zero_row = any(all(e == 0 for e in r) for r in mixed.rows)
            if not zero_row:
                assert got == ref


def test_rat_inverse_hirzebruch_shear():
    t = RatMatrix([[2, -1], [0, 1]])
    inv = rat_inverse(t)
    assert inv == RatMatrix([[Fraction(1, 2), Fraction(1, 2)], [0, 1]])
    assert inv.rows == tuple(tuple(r) for r in adjugate_inverse([[2, -1], [0, 1]]))
    assert t @ inv == RatMatrix.identity(2)


def test_rat_inverse_matches_adjugate_random():
    rng = random.Random(11)
    done = 0
    while done < 30:
        n = rng.randrange(1, 5)
        rows = [[Fraction(rng.randrange(-6, 7), rng.randrange(1, 4)) for _ in range(n)]
                for _ in range(n)]
        m = RatMatrix(rows)
        if m.det() == 0:
            continue
        inv = rat_inverse(m)
        assert inv.rows == tuple(tuple(r) for r in adjugate_inverse(rows))
        assert m @ inv == RatMatrix.identity(n)
        done += 1


def test_rat_inverse_singular_raises():
    with pytest.raises(SingularMatrixError):
        rat_inverse(RatMatrix([[1, 2], [2, 4]]))


def test_cokernel_order_examples():
    assert cokernel_order(IntMatrix(ckm_normals(2, 1, 1))) == 1
    assert cokernel_order(IntMatrix(ckm_normals(2, 1, 2))) == 2
    assert cokernel_order(IntMatrix([[1, 0], [0, 1]])) == 1
    assert cokernel_order(IntMatrix([[2, 0], [0, 3]])) == 6
    assert cokernel_order(IntMatrix([[1, 2, 3]])) is None  # rank 1 < 3


def test_cokernel_order_gcd_law_for_family_cones():
    # order of the quotient lattice matches gcd(m + n, k + 1) for n = 2
    for k in range(1, 6):
        for m in range(k, 2 * k):
            rows = ckm_normals(2, k, m)
            order = cokernel_order(IntMatrix(rows))
            assert order == math.gcd(m + 2, k + 1)
            factors = minor_gcd_invariant_factors(rows)
            assert math.prod(factors) == order


def test_primitive_vector_and_kernel():
    assert primitive_vector((2, -4, 6)) == (1, -2, 3)
    assert primitive_vector((0, 5)) == (0, 1)
    with pytest.raises(ValueError):
        primitive_vector((0, 0))
    v = kernel_vector([(1, 0, 1), (-1, 1, 1)])
    assert all(a * 1 + b * 0 + c * 1 == 0 for a, b, c in [v])
    assert sum(x * y for x, y in zip(v, (-1, 1, 1))) == 0
    g = math.gcd(*(abs(e) for e in v))
    assert g == 1


def test_exact_rank_and_solve():
    assert exact_rank([(1, 0, 1), (-1, 1, 1), (0, 1, 2)]) == 2
    assert exact_rank([(1, 0), (0, 1)]) == 2
    assert exact_rank([]) == 0
    x = solve_square_exact([(2, 0), (0, 4)], (1, 1))
    assert x == (Fraction(1, 2), Fraction(1, 4))
    assert solve_square_exact([(1, 1), (2, 2)], (1, 1)) is None


def test_approx_rational():
    assert approx_rational(0.5) == Fraction(1, 2)
    assert approx_rational(1 / 3) == Fraction(1, 3)
    assert approx_rational(math.sqrt(2)) is None
    assert approx_rational(2.0) == 2
