import json

import pytest

from conftest import fixture, object_case
from hybridcoat.lattice import Direction, add, sub
from hybridcoat.surface import (
    ARRANGEMENTS,
    FIXTURES,
    SurfaceError,
    SurfaceGraph,
    boundary_is_chordless,
    build_g_diamond,
    check_triangulation_assumptions,
    classify_arrangements,
    from_faces,
    rotation_order,
    tetragon_orientation,
    triangulate,
)
from hybridcoat.world import ObjectSpec, coating_layer, generate_object, default_p0

V = lambda d: Direction[d].vector


def diamond(kind, size, seed=0):
    o, p0, L, *_ = object_case(kind, size, seed)
    return build_g_diamond(o, L)


def test_single_node_diamond_is_cuboctahedron():
    gd = diamond("ball", 1)
    tris = [f for f in gd.faces if not f.is_tetragon]
    quads = [f for f in gd.faces if f.is_tetragon]
    assert len(gd.nodes) == 12 and len(gd.edges) == 24
    assert len(tris) == 8 and len(quads) == 6
    assert sorted(f.orientation for f in quads) == [1, 1, 2, 2, 3, 3]


def test_tetragons_match_the_three_orientation_patterns():
    patterns = {1: ("NE", "USE"), 2: ("NW", "UNE"), 3: ("N", "UW")}
    for kind, size in (("ball", 3), ("line", 4), ("torus", 1)):
        for f in diamond(kind, size).faces:
            if not f.is_tetragon:
                continue
            a, b = patterns[f.orientation]
            corners = set(f.nodes)
            assert any(
                corners == {v, add(v, V(a)), add(add(v, V(a)), V(b)), add(v, V(b))}
                for v in f.nodes
            )
            orient, (p, q) = tetragon_orientation(f.nodes)
            assert orient == f.orientation
            # the diagonal joins the base corner to the opposite one
            assert sub(q, p) == add(V(a), V(b))


def test_diagonals_have_endpoint_distance_two():
    o, p0, L, report, sg, _ = object_case("ball", 3)
    for u in sg.nodes():
        for v in sg.rotation[u]:
            vec = sg.vector(u, v)
            if (u, v) in sg.via:
                assert sorted(map(abs, vec)) == [0, 0, 2]
                m = sg.via[(u, v)]
                assert sg.physical_moves(u, v) == [m, v]
            else:
                assert vec in {d.vector for d in Direction}


def test_triangulated_cuboctahedron_has_twenty_faces():
    *_, sg, _ = object_case("ball", 1)
    assert sg.n == 12 and len(sg.faces) == 20 and len(sg.edges()) == 30


def test_all_triangle_diamond_is_unchanged():
    sg = fixture("icosahedron")
    again = from_faces(sg.n, sg.faces, oriented=True)
    assert again.rotation == sg.rotation


@pytest.mark.parametrize("size", [1, 2, 3, 4])
def test_balls_are_smooth(size):
    _, _, _, report, sg, _ = object_case("ball", size)
    assert report.smooth
    rep = check_triangulation_assumptions(sg, True)
    assert rep.ok and rep.max_degree <= 6


@pytest.mark.parametrize("size", [4, 8, 16])
def test_lines_are_smooth(size):
    _, _, _, report, sg, _ = object_case("line", size)
    assert report.smooth and sg.max_degree <= 6


def test_non_smooth_surfaces_still_satisfy_emulation_assumptions():
    for kind, size in (("notched_slab", 1), ("torus", 1)):
        _, _, _, report, sg, _ = object_case(kind, size)
        assert not report.smooth
        rep = check_triangulation_assumptions(sg, False)
        assert rep.ok and 6 < rep.max_degree <= 8
        assert not check_triangulation_assumptions(sg, True).degree_ok


@pytest.mark.parametrize("name", FIXTURES)
def test_fixtures_pass_direct_use(name):
    rep = check_triangulation_assumptions(fixture(name), True)
    assert rep.ok and rep.genus == 0


def test_degree_seven_fails_direct_use_only():
    # a pentagonal bipyramid subdivided so that one apex has degree seven
    n = 9
    ring = list(range(1, 8))
    faces = []
    for i in range(7):
        a, b = ring[i], ring[(i + 1) % 7]
        faces.append((0, a, b))
        faces.append((8, b, a))
    sg = from_faces(n, faces)
    assert sg.degree(0) == 7
    assert not check_triangulation_assumptions(sg, True).ok
    assert check_triangulation_assumptions(sg, False).ok


def test_catalogue_smoothness_is_the_degree_bound():
    for word, smooth in ARRANGEMENTS.items():
        degree = len(word) + word.count("D")
        assert smooth == (degree <= 6), word


def test_classifier_is_exhaustive_on_a_random_corpus():
    seen = set()
    for seed in range(40):
        o = generate_object("blob", 5 + seed % 20, seed)
        L = coating_layer(o, default_p0(o))
        report = classify_arrangements(build_g_diamond(o, L))
        seen |= {a.case_id for a in report.arrangements}
    assert seen <= set(ARRANGEMENTS)
    assert any(not ARRANGEMENTS[w] for w in seen)


def test_rotation_is_a_chordless_cycle_everywhere():
    for kind, size in (("ball", 3), ("line", 8), ("notched_slab", 2)):
        *_, sg, _ = object_case(kind, size)
        for v in sg.nodes():
            r = rotation_order(sg, v)
            assert len(r) == sg.degree(v)
            assert boundary_is_chordless(sg, v)


def test_rotation_orders_are_coherent():
    # u -> v consecutive with w around u means (u, v, w) is a face
    *_, sg, _ = object_case("ball", 2)
    faces = set()
    for f in sg.faces:
        for i in range(3):
            faces.add(tuple(f[i:] + f[:i]))
    for u in sg.nodes():
        for v in sg.rotation[u]:
            assert (u, v, sg.ccw_next(u, v)) in faces


def test_faces_point_away_from_the_object():
    o, p0, L, report, sg, _ = object_case("ball", 2)
    for a, b, c in sg.faces:
        pa, pb, pc = (sg.coords[x] for x in (a, b, c))
        u, w = sub(pb, pa), sub(pc, pa)
        normal = (u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0])
        centre = [sum(x) for x in zip(pa, pb, pc)]
        assert sum(n * x for n, x in zip(normal, centre)) > 0


def test_euler_characteristic():
    for kind, size, genus in (("ball", 2, 0), ("line", 8, 0), ("torus", 1, 1)):
        *_, sg, _ = object_case(kind, size)
        chi = sg.n - len(sg.edges()) + len(sg.faces)
        assert chi == 2 - 2 * genus == 2 - 2 * sg.genus()


def test_triangulation_is_deterministic():
    o = generate_object("blob", 25, 4)
    p0 = default_p0(o)
    a = triangulate(build_g_diamond(o, coating_layer(o, p0)))
    b = triangulate(build_g_diamond(ObjectSpec.of(sorted(o.nodes, reverse=True), o.label), coating_layer(o, p0)))
    assert json.dumps(a.to_json()) == json.dumps(b.to_json())


def test_json_round_trip_and_mirror():
    *_, sg, _ = object_case("line", 4)
    again = SurfaceGraph.from_json(json.loads(json.dumps(sg.to_json())))
    assert again.rotation == sg.rotation and again.via == sg.via and again.coords == sg.coords
    m = sg.mirrored()
    assert all(m.rotation[v] == tuple(reversed(sg.rotation[v])) for v in sg.nodes())
    assert m.mirrored().rotation == sg.rotation


def test_non_triangle_faces_rejected():
    with pytest.raises(SurfaceError):
        from_faces(4, [(0, 1, 2, 3)])
