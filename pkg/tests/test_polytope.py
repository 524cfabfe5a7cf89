from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toricvol import catalog
from toricvol.errors import GeometryError
from toricvol.polytope import (boundary_pieces, build_moment_cone, build_polytope,
                               cone_from_dict, polytope_from_dict, triangulate,
                               validate_delzant, validate_reflexive)

from oracles import delzant_table, shoelace

UNIT_SIMPLEX = [(0, 0), (1, 0), (0, 1)]
BLOWUP = [(-1, -1), (2, -1), (-1, 2)]


def test_hull_orders_vertices_and_drops_interior_points():
    P = build_polytope(2, [(1, 1), (0, 0), (2, 0), (0, 2), (2, 2), (1, 0)])
    assert len(P.vertices) == 4
    assert P.volume == 4
    for facet in P.facets:
        assert all(facet.value(v) >= 0 for v in P.vertices)


def test_inward_primitive_normals_of_simplex():
    P = build_polytope(2, UNIT_SIMPLEX)
    normals = sorted(f.normal for f in P.facets)
    assert normals == [(-1, -1), (0, 1), (1, 0)]
    offsets = {f.normal: f.offset for f in P.facets}
    assert offsets[(-1, -1)] == 1 and offsets[(1, 0)] == 0


def test_exact_volume_and_lattice_boundary_measure():
    P = build_polytope(2, UNIT_SIMPLEX)
    assert P.volume == Fraction(1, 2)
    # each edge has lattice length 1
    assert P.boundary_measure == 3
    R = build_polytope(2, [(0, 0), (Fraction(5, 2), 0), (Fraction(5, 2), 1), (0, 1)])
    assert R.boundary_measure == 7


def test_rational_coordinates_are_kept_exact():
    P = build_polytope(2, [(0, 0), ("1/3", 0), (0, "1/3")])
    assert P.volume == Fraction(1, 18)


@pytest.mark.parametrize("verts", [UNIT_SIMPLEX, BLOWUP,
                                   [(0, 0), (3, 0), (3, 1), (0, 2)],
                                   [(0, 0), (4, 0), (3, 2), (1, 3), (-1, 1)]])
def test_triangulation_volume_matches_shoelace(verts):
    P = build_polytope(2, verts)
    assert float(sum(s.weight for s in triangulate(P))) == pytest.approx(shoelace(verts), rel=1e-15)
    assert float(P.volume) == pytest.approx(shoelace(verts), rel=1e-15)


def test_cube_triangulation_and_boundary():
    P = polytope_from_dict(catalog.load_document("cube3"))
    assert P.volume == 8
    assert P.boundary_measure == 24
    assert sum(s.weight for s in boundary_pieces(P)) == 24


def test_delzant_examples_match_bruteforce_table():
    for verts in (UNIT_SIMPLEX, BLOWUP, [(0, 0), (2, 0), (0, 1)], [(0, 0), (1, 0), (1, 1), (0, 2)]):
        P = build_polytope(2, verts)
        table = delzant_table(P.vertices, [(f.normal, f.offset) for f in P.facets])
        rep = validate_delzant(P)
        assert rep.delzant == all(abs(d) == 1 for d in table)
        assert [i for i, d in enumerate(table) if abs(d) != 1] == list(rep.offending_vertices)


def test_non_delzant_triangle_reports_vertex():
    P = build_polytope(2, [(0, 0), (2, 0), (0, 1)])
    rep = validate_delzant(P)
    assert not rep.delzant
    bad = [P.vertices[i] for i in rep.offending_vertices]
    assert bad == [(0, 1)]


def test_reflexive():
    assert validate_reflexive(build_polytope(2, BLOWUP))
    assert not validate_reflexive(build_polytope(2, UNIT_SIMPLEX))


def test_non_primitive_normal_names_facet():
    doc = {"dim": 2, "vertices": [[0, 0], [1, 0], [0, 1]],
           "facets": [{"normal": [1, 0], "offset": 0}, {"normal": [0, 2], "offset": 0},
                      {"normal": [-1, -1], "offset": 1}]}
    with pytest.raises(GeometryError, match=r"facets\[1\]"):
        polytope_from_dict(doc)


@pytest.mark.parametrize("verts", [[(0, 0), (1, 1), (2, 2)], [(0, 0), (1, 0)]])
def test_degenerate_input_rejected(verts):
    with pytest.raises(GeometryError):
        build_polytope(2, verts)


def test_catalog_polytopes_all_load():
    for name in catalog.names():
        doc = catalog.load_document(name, "3" if name == "product_p" else "1/2")
        if "fan_rays" in doc:
            C = cone_from_dict(doc)
            assert all(d > 0 for d in C.determinants)
        else:
            P = polytope_from_dict(doc)
            assert P.volume > 0


def test_moment_cone_rejects_wrong_first_coordinate():
    with pytest.raises(GeometryError):
        build_moment_cone([(1, 0, 0), (2, 1, 0), (1, 0, 1)])


def test_moment_cone_rejects_bad_cyclic_order():
    with pytest.raises(GeometryError):
        build_moment_cone([(1, 0, 0), (1, 1, 1), (1, 1, 0), (1, 0, 1)])


def test_conifold_duals_are_inward():
    C = cone_from_dict(catalog.load_document("conifold"))
    for u in C.dual_array:
        assert np.all(C.fan_array @ u >= 0)
    assert sum(C.determinants) > 0


_unimodular = st.sampled_from([
    ((1, 0), (0, 1)), ((0, 1), (1, 0)), ((1, 1), (0, 1)), ((1, 0), (-2, 1)),
    ((2, 1), (1, 1)), ((0, -1), (1, 0)), ((3, 2), (1, 1)),
])


@settings(max_examples=40, deadline=None)
@given(_unimodular, st.tuples(st.integers(-3, 3), st.integers(-3, 3)),
       st.sampled_from([UNIT_SIMPLEX, BLOWUP, [(0, 0), (2, 0), (2, 1), (0, 3)]]))
def test_lattice_invariants_under_affine_unimodular_maps(A, b, verts):
    P = build_polytope(2, verts)
    Q = P.transformed(A, b)
    assert Q.volume == P.volume
    assert Q.boundary_measure == P.boundary_measure
    assert validate_delzant(Q).delzant == validate_delzant(P).delzant
    assert sorted(f.offset for f in Q.facets if b == (0, 0)) == sorted(
        f.offset for f in P.facets if b == (0, 0))


BLOWUP_QUAD = [(-1, 0), (0, -1), (2, -1), (-1, 2)]


def test_blowup_quadrilateral():
    P = build_polytope(2, BLOWUP_QUAD)
    assert validate_reflexive(P) and validate_delzant(P).delzant
    assert sum(s.weight for s in triangulate(P)) == 4


def test_square_and_rectangle_boundary_measure():
    assert build_polytope(2, [(0, 0), (1, 0), (1, 1), (0, 1)]).boundary_measure == 4
    for p in (Fraction(3, 2), 3, 5):
        R = build_polytope(2, [(0, 0), (p, 0), (p, 1), (0, 1)])
        assert R.boundary_measure == 2 * p + 2


@pytest.mark.parametrize("verts", [UNIT_SIMPLEX, BLOWUP_QUAD, [(0, 0), (4, 0), (3, 2), (1, 3), (-1, 1)]])
def test_minkowski_relation(verts):
    P = build_polytope(2, verts)
    total = np.zeros(2)
    for facet in P.facets:
        on = [np.array(v, dtype=float) for v in P.vertices if facet.value(v) == 0]
        u = np.array(facet.normal, dtype=float)
        total += np.linalg.norm(on[1] - on[0]) * u / np.linalg.norm(u)
    np.testing.assert_allclose(total, 0, atol=1e-12)


def test_unimodular_scaling_of_volume():
    P = build_polytope(2, BLOWUP_QUAD)
    Q = P.transformed(((2, 1), (0, 3)), (1, 1))
    assert Q.volume == 6 * P.volume


def test_dual_rays_of_catalog_cones():
    c3 = cone_from_dict(catalog.load_document("c3"))
    assert c3.dual_rays == ((0, 0, 1), (1, -1, -1), (0, 1, 0))
    assert c3.determinants == (1,)
    con = cone_from_dict(catalog.load_document("conifold"))
    assert con.dual_rays == ((0, 0, 1), (1, -1, 0), (1, 0, -1), (0, 1, 0))
    assert con.determinants == (1, 1)
    for C in (c3, con):
        assert np.all(C.fan_array @ C.dual_array.T >= 0)
