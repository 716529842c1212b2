import itertools
import random
from fractions import Fraction

import pytest

from oracles import det_cofactor
from sympot.latlin import RatMatrix
from sympot.polytope import (
    FacetFunctional,
    LabeledPolytope,
    PolytopeError,
    build_polytope,
    hirzebruch_polytope,
    interior_contains,
    is_delzant,
    polytope_from_dict,
    polytope_to_dict,
    transform_polytope,
)


def vertices_by_cramer(facets):
    # independent 2d oracle: all facet pairs, Cramer solve, feasibility filter
    verts = set()
    for (n1, o1), (n2, o2) in itertools.combinations(facets, 2):
        d = det_cofactor([list(n1), list(n2)])
        if d == 0:
            continue
        x = Fraction(det_cofactor([[-o1, n1[1]], [-o2, n2[1]]]), d)
        y = Fraction(det_cofactor([[n1[0], -o1], [n2[0], -o2]]), d)
        if all(n[0] * x + n[1] * y + o >= 0 for n, o in facets):
            verts.add((x, y))
    return verts


P1_FACETS = [((1, 0), 1), ((-1, 1), 1), ((0, 1), 1), ((0, -1), 1)]


def test_segment():
    p = build_polytope([((1,), 0), ((-1,), 1)])
    assert p.vertices == ((Fraction(0),), (Fraction(1),))
    assert p.exact


def test_triangle_vertices():
    facets = [((1, 0), 0), ((0, 1), 0), ((-1, -1), 1)]
    p = build_polytope(facets)
    assert set(p.vertices) == vertices_by_cramer(facets)
    assert len(p.vertices) == 3


def test_p1_polytope_vertices_and_euler_count():
    p = build_polytope(P1_FACETS)
    assert set(p.vertices) == vertices_by_cramer(P1_FACETS)
    assert len(p.vertices) == 4  # n=2 simple: as many vertices as facets
    assert set(p.vertices) == {(-1, -1), (-1, 1), (0, -1), (2, 1)}


def test_random_2d_euler_count():
    rng = random.Random(3)
    built = 0
    while built < 10:
        facets = [((1, 0), rng.randrange(1, 4)), ((0, 1), rng.randrange(1, 4)),
                  ((-1, 0), rng.randrange(1, 4)), ((0, -1), rng.randrange(1, 4)),
                  ((-1, -1), rng.randrange(3, 7))]
        try:
            p = build_polytope(facets)
        except PolytopeError:
            continue
        assert len(p.vertices) == len(p.facets)
        assert set(p.vertices) == vertices_by_cramer(facets)
        built += 1


def test_unbounded_rejected():
    with pytest.raises(PolytopeError, match="unbounded"):
        build_polytope([((1, 0), 0), ((0, 1), 0), ((1, 1), 1)])
    # normals spanning but recession cone nontrivial
    with pytest.raises(PolytopeError, match="unbounded"):
        build_polytope([((1, 0), 0), ((0, 1), 0), ((-1, 1), 1)])


def test_redundant_facet_rejected():
    with pytest.raises(PolytopeError, match="redundant|not simple"):
        build_polytope([((1, 0), 0), ((0, 1), 0), ((-1, 0), 1), ((0, -1), 1),
                        ((1, 1), 5)])


def test_not_simple_rejected():
    # square pyramid over apex: 4 facets through one vertex in R^3
    with pytest.raises(PolytopeError, match="not simple"):
        build_polytope([
            ((1, 0, 1), 0), ((-1, 0, 1), 0), ((0, 1, 1), 0), ((0, -1, 1), 0),
            ((0, 0, -1), 1),
        ])


def test_empty_interior_rejected():
    with pytest.raises(PolytopeError, match="empty"):
        build_polytope([((1,), 0), ((-1,), 0)])


def test_interior_contains():
    p = build_polytope(P1_FACETS)
    assert interior_contains(p, (Fraction(-1, 2), Fraction(1, 2)))
    assert interior_contains(p, (-0.5, 0.5))
    assert not interior_contains(p, (-1, 0))  # on a facet
    assert not interior_contains(p, (5, 0))
    with pytest.raises(ValueError):
        interior_contains(p, (0, 0, 0))


def test_fraction_offsets():
    p = build_polytope([((1,), Fraction(1, 3)), ((-1,), Fraction(2, 3))])
    assert p.vertices == ((Fraction(-1, 3),), (Fraction(2, 3),))


def test_float_mode_triangle():
    import math

    s = math.sqrt(2)
    p = build_polytope([((1.0, 0.0), 0.0), ((0.0, 1.0), 0.0), ((-1.0, -1.0), s)])
    assert not p.exact
    assert len(p.vertices) == 3
    vs = {tuple(round(c, 9) for c in v) for v in p.vertices}
    assert (0.0, round(s, 9)) in vs


def test_hirzebruch_polytope_is_delzant():
    p = hirzebruch_polytope(2, 1)
    assert [f.normal for f in p.facets] == [(1, 0), (-1, 1), (0, 1), (0, -1)]
    assert all(f.offset == 1 for f in p.facets)
    assert is_delzant(p)
    with pytest.raises(ValueError):
        hirzebruch_polytope(2, 2)


def test_transform_hirzebruch_pair():
    # shear sending the standard Delzant trapezoid to the all-offsets-1 model
    m = 1
    t = RatMatrix([[m, -1], [0, 1]])
    delzant = build_polytope([((-1, 0), 1), ((0, -1), 1), ((0, 1), 1), ((1, 1), 1)])
    p = transform_polytope(delzant, t)
    assert {f.normal for f in p.facets} == {(1, 0), (-1, 1), (0, 1), (0, -1)}
    assert all(f.offset == 1 for f in p.facets)
    # vertices map by t^{-1}
    tinv = RatMatrix([[1, 1], [0, 1]])
    assert set(p.vertices) == {tinv.mul_vec(v) for v in delzant.vertices}


def test_transform_preserves_interior_membership():
    rng = random.Random(9)
    t = RatMatrix([[2, -1], [0, 1]])
    delzant = build_polytope([((-1, 0), 1), ((0, -1), 1), ((0, 1), 1), ((1, 2), 3)])
    p = transform_polytope(delzant, t)
    for _ in range(40):
        x = (Fraction(rng.randrange(-40, 40), 20), Fraction(rng.randrange(-40, 40), 20))
        tx = t.mul_vec(x)
        assert interior_contains(p, x) == interior_contains(delzant, tx)


def test_json_roundtrip():
    p = build_polytope(P1_FACETS)
    d = polytope_to_dict(p)
    assert d["dim"] == 2
    assert d["facets"][0]["offset"] == "1/1"
    q = polytope_from_dict(d)
    assert q.vertices == p.vertices
    assert [f.normal for f in q.facets] == [f.normal for f in p.facets]


def test_json_bad_dim():
    d = polytope_to_dict(build_polytope(P1_FACETS))
    d["dim"] = 3
    with pytest.raises(PolytopeError, match="dim"):
        polytope_from_dict(d)


def test_json_dim_field_is_optional():
    p = build_polytope(P1_FACETS)
    d = polytope_to_dict(p)
    del d["dim"]
    assert polytope_from_dict(d).vertices == p.vertices


def test_facet_vertices():
    p = build_polytope(P1_FACETS)
    on0 = p.facet_vertices(0)
    assert set(on0) == {(-1, -1), (-1, 1)}
