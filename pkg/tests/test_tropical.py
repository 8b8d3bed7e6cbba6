from __future__ import annotations

import pytest

from support import E1, ORIGIN, k3, p2curve, plane_weight, s2, s2_weights
from tropcycles.errors import NonConvexLambda, NonUnimodular, NotATriangulation, SchemaError
from tropcycles.lattice import MultiVector
from tropcycles.minkowski import MinkowskiWeight, ones
from tropcycles.polytope import LatticePolytope, face_for_cone, normal_fan
from tropcycles.tropical import (
    TropicalInput,
    cycle_boundary,
    cycle_from_weight,
    dual_cell,
    fan_at,
    flags,
    interior_points,
    validate,
)

K3_POINTS = [(-1, -1, -1), (1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 0, 0)]


def n_vector(coeffs):
    return MultiVector(3, 1, {(i,): c for i, c in coeffs.items()}, "N")


def test_quartic_triangulation_cones_origin_over_facets():
    tri = validate(k3())
    assert len(tri.simplices) == 4
    assert all(4 in s for s in tri.simplices)


def test_flat_heights_are_rejected():
    inp = TropicalInput(K3_POINTS, [0] * 5)
    with pytest.raises(NotATriangulation):
        validate(inp)


def test_explicit_triangulation_checks():
    good = tuple(tuple(sorted(s)) for s in validate(k3()).simplices)
    validate(TropicalInput(K3_POINTS, [1, 0, 0, 0, 0], triangulation=good))
    with pytest.raises(NotATriangulation):
        validate(TropicalInput(K3_POINTS, [1, 0, 0, 0, 0], triangulation=good[:3]))
    # heights making the origin a non-vertex of the lower hull
    with pytest.raises(NonConvexLambda):
        validate(TropicalInput(K3_POINTS, [0, 0, 0, 0, 1], triangulation=good))


def test_non_unimodular_simplex_rejected():
    pts = [(0, 0), (2, 0), (0, 2), (1, 0), (0, 1), (1, 1)]
    # a single big triangle would be non-unimodular; ask for it explicitly
    with pytest.raises((NonUnimodular, NotATriangulation)):
        validate(TropicalInput(pts, [0] * 6, triangulation=((0, 1, 2),)))


def test_missing_lattice_point_is_a_schema_error():
    with pytest.raises(SchemaError):
        validate(TropicalInput([(0, 0), (2, 0), (0, 2)], [0, 0, 0]))


def test_interior_points():
    assert interior_points(k3()) == [ORIGIN]
    assert sorted(interior_points(s2())) == sorted([E1, ORIGIN])
    assert interior_points(p2curve()) == [(0, 0)]


def test_star_fans():
    fan = fan_at(k3(), ORIGIN)
    assert sorted(fan.rays) == sorted(K3_POINTS[:4])
    assert fan.complete and fan.unimodular
    cube = fan_at(s2(), ORIGIN)
    assert sorted(cube.rays) == sorted([(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)])


def test_dual_cell_of_the_quartic():
    cell = dual_cell(k3(), ORIGIN)
    assert cell == LatticePolytope([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert sorted(normal_fan(cell).rays) == sorted(fan_at(k3(), ORIGIN).rays)


@pytest.mark.parametrize("name,w", [("k3", ORIGIN), ("s2", ORIGIN), ("s2", E1), ("p2curve", (0, 0))])
def test_duality_is_dimension_complementary(name, w):
    inp = {"k3": k3, "s2": s2, "p2curve": p2curve}[name]()
    fan = fan_at(inp, w)
    cell = dual_cell(inp, w)
    for cone in fan.all_cones():
        face = face_for_cone(cell, cone, fan)
        assert face.dim + len(cone) == fan.rank


def test_adjacent_dual_cells_share_the_edge_dual():
    inp = s2()
    f0, f1 = fan_at(inp, ORIGIN), fan_at(inp, E1)
    c0 = face_for_cone(dual_cell(inp, ORIGIN), {f0.ray_index[E1]}, f0)
    c1 = face_for_cone(dual_cell(inp, E1), {f1.ray_index[(-1, 0, 0)]}, f1)
    assert c0 == c1 and c0.dim == 2


def test_flag_counts_on_the_quartic():
    assert [len(flags(k3(), ORIGIN, q)) for q in range(3)] == [4, 12, 24]


def test_cycle_of_the_hyperplane_weight():
    fan = fan_at(k3(), ORIGIN)
    c = cycle_from_weight(k3(), ORIGIN, ones(fan, 1))
    assert len(c.entries) == 12
    s1 = next(f for f in c.entries if f.gens == (0, 1))
    assert c.entries[s1] == n_vector({1: -1, 2: 1})
    assert cycle_boundary(c) == {}
    # the three flags leaving cone(e0) have coefficients summing to zero
    total = sum((c.entries[f] for f in c.entries if f.gens[0] == 0), MultiVector(3, 1, {}, "N"))
    assert total.is_zero()


def test_zero_weight_gives_empty_cycle():
    fan = fan_at(k3(), ORIGIN)
    assert cycle_from_weight(k3(), ORIGIN, MinkowskiWeight(fan, 1, {})).entries == {}


def test_perturbed_weight_leaves_a_boundary():
    fan = fan_at(k3(), ORIGIN)
    a = ones(fan, 1)
    cone = sorted(a.values, key=sorted)[0]
    bad = MinkowskiWeight(fan, 1, {**a.values, cone: 2}, check=False)
    assert cycle_boundary(cycle_from_weight(k3(), ORIGIN, bad, check=False)) != {}


def test_red_loop_cycle_is_closed():
    a1, _ = s2_weights()
    c = cycle_from_weight(s2(), E1, a1)
    assert cycle_boundary(c) == {}
    assert {f.top for f in c.entries} == set(a1.values)


def test_plane_weight_helper_selects_four_cones():
    fan = fan_at(s2(), ORIGIN)
    assert len(plane_weight(fan, (0, 1)).values) == 4
