import random

import pytest

from conftest import fixture, object_case
from hybridcoat.engine import CoatingRun
from hybridcoat.oracles import (
    Snapshot,
    brute_generator,
    brute_link,
    brute_links,
    check_invariants,
    check_no_split,
    cut_nodes,
    empty_connected,
    hand_move,
    literal_range,
    literal_segment,
    scaling_fit,
    walk_sigma_tau,
)
from hybridcoat.suites import (
    Surface,
    appendix_suite,
    default_corpus,
    invariant_suite,
    octahedron_states,
    oracle_suite,
    random_run,
    run_suite,
    sampled_states,
)

# octahedron node ids: 0=+X 1=-X 2=+Y 3=-Y 4=+Z 5=-Z


def octa(tiled):
    return Snapshot(fixture("octahedron"), tiled)


def test_brute_link_examples():
    s = octa({0, 1})
    assert brute_links(s) == {2, 3, 4, 5}
    s = octa({0})
    assert brute_links(s) == set()
    with pytest.raises(ValueError):
        brute_link(s, 0)


def test_brute_generator_examples():
    s = octa({0})
    # tiling -X next to +X splits every equator node
    assert brute_generator(s, 1)
    assert not brute_generator(s, 2)


def test_cut_nodes_are_links():
    s = octa({0, 1, 2})
    # 4 and 5 form a path 4-3-5 through the empty part
    assert cut_nodes(s) == {3}
    assert cut_nodes(s) <= brute_links(s)


def test_hand_move_directions():
    s = octa({0})
    sg = fixture("octahedron")
    r = sg.rotation[2]
    i = r.index(0)
    assert hand_move(s, 2, 0, clockwise=True) == (r[i - 1], 0)
    assert hand_move(s, 2, 0, clockwise=False) == (r[(i + 1) % len(r)], 0)


def test_segment_is_the_whole_ring_around_a_single_tile():
    s = octa({0})
    assert literal_segment(s, 2, 0) == {2, 3, 4, 5}


def test_segment_of_an_enclosed_node_is_itself():
    s = octa({0, 2, 3, 4, 5})
    assert literal_segment(s, 1, 2) == {1}


def test_range_skips_the_tiled_centre():
    s = octa({0})
    # agent standing on the tiled depot
    assert literal_range(s, 0, 2, 3) == {3, 4, 5, 1}


def test_single_tile_walk():
    s = octa({0})
    w = walk_sigma_tau(s, 2, 0)
    assert w.sigma[0] == w.sigma[-1] == 2
    assert set(w.tau) == {2, 3, 4, 5}
    assert set(w.anchors) == {0}


def test_octahedron_two_tile_walk():
    w = walk_sigma_tau(octa({0, 1}), 2, 0)
    assert w.sigma == [2, 4, 3, 5, 2]
    assert w.anchors == [0] * 5
    assert w.tau == [2, 4, 3, 5]


def test_walk_visits_a_link_twice_with_different_anchors():
    o, p0c, L, rep, sg, p0 = object_case("ball", 2)
    coords = [
        (-2, 0, 0), (-2, 1, -1), (-2, 1, 1), (-1, 1, 2), (0, 2, 0),
        (0, 2, 2), (1, 1, 2), (2, 1, 1), (2, 2, 0),
    ]
    tiled = {sg.index_of(c) for c in coords}
    assert p0 in tiled
    s = Snapshot(sg, tiled)
    s0 = CoatingRun(sg, p0, tiled=tiled).s0
    w = walk_sigma_tau(s, s0, p0)
    v = sg.index_of((-2, 2, 0))
    assert brute_link(s, v)
    visits = [i for i, x in enumerate(w.sigma) if x == v]
    assert len(visits) == 2
    assert len({w.anchors[i] for i in visits}) == 2
    assert len(w.sigma) == 22 and len(w.tau) == 18
    assert brute_links(s) <= set(w.tau)
    assert check_invariants(s, s0, p0).ok


def test_initial_states_satisfy_invariants():
    for surface in default_corpus():
        rng = random.Random(surface.name)
        for _ in range(5):
            make, tiled = random_run(surface, rng)
            run = make()
            rep = check_invariants(Snapshot(surface.graph, tiled), run.s0, surface.p0)
            assert rep.ok, (surface.name, sorted(tiled), rep.failed())


def _states(count, seed=0):
    rng = random.Random(seed)
    out = []
    for kind, size in (("ball", 2), ("ball", 3), ("line", 8)):
        *_, sg, p0 = object_case(kind, size)
        surface = Surface(kind, sg, p0)
        for _ in range(count):
            make, _ = random_run(surface, rng)
            for run, s in sampled_states(make, 10, rng):
                if run.s0 not in s.tiled:
                    out.append((run.s0, run.p0, s))
    return out


def test_corrupted_state_is_detected():
    # a tile dropped on a link behind the agent's back
    rng = random.Random(1)
    tried = caught = 0
    cut_tried = 0
    for s0, p0, s in _states(6):
        links = sorted(brute_links(s) - {s0})
        if not links:
            continue
        v = rng.choice(links)
        bad = s.with_tile(v)
        tried += 1
        caught += not check_invariants(bad, s0, p0).ok
        cuts = cut_nodes(s) - {s0}
        if cuts:
            c = min(cuts)
            cut_tried += 1
            assert not empty_connected(s.with_tile(c))
            assert "e_connected" in check_invariants(s.with_tile(c), s0, p0).failed()
    assert tried >= 20 and cut_tried >= 5
    assert caught / tried >= 0.9


def test_no_split_exhaustive_on_octahedron():
    states = octahedron_states()
    assert len(states) == 53
    for s in states:
        assert check_no_split(s) == []


def test_no_split_on_sampled_fcc_states():
    for _, _, s in _states(2, seed=3):
        assert check_no_split(s) == []


def test_scaling_fit_values():
    rows = [(10, 100), (20, 400), (40, 1600)]
    fit = scaling_fit(rows)
    assert fit.band == pytest.approx(1.0)
    assert fit.largest_doubling == pytest.approx(4.0)
    assert fit.exponent == pytest.approx(2.0)
    fit = scaling_fit([(40, 1600), (10, 100)])
    assert fit.sizes == [10, 40]
    assert fit.largest_doubling is None


def test_scaling_fit_needs_two_rows():
    with pytest.raises(ValueError):
        scaling_fit([(10, 100)])


def test_oracle_suite_passes_and_is_deterministic():
    a = oracle_suite(60, seed=5)
    b = oracle_suite(60, seed=5)
    assert a.ok, a.failures
    assert a.samples >= 60
    assert a.to_json() == b.to_json()
    assert a.checks["link"] > 0 and a.checks["segment"] > 0 and a.checks["range"] > 0


def test_invariant_and_appendix_suites_pass():
    rep = invariant_suite(100)
    assert rep.ok, rep.failures
    assert rep.checks["gathers"] >= 100
    rep = appendix_suite(200)
    assert rep.ok, rep.failures


@pytest.mark.parametrize("name", ["oracles", "invariants", "appendix-fixtures"])
def test_zero_budget_checks_nothing(name):
    rep = run_suite(name, 0)
    assert rep.samples == 0 and rep.ok
    assert rep.lines()[0] == f"{name}: PASS (0 samples, 0 failures)"


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("nope", 1)


def test_broken_link_detection_fails_the_invariant_suite(monkeypatch):
    # an engine that treats only s0 as special places tiles on links
    monkeypatch.setattr(CoatingRun, "_link_or_s0", lambda self, v: v == self.s0)
    rep = invariant_suite(300)
    assert not rep.ok
    assert any("disconnected" in f or "invariants" in f for f in rep.failures)
