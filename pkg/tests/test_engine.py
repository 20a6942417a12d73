import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fixture, object_case
from hybridcoat.engine import CoatingRun, Phase, RunAborted, TraceEvent, replay, run_to_completion
from hybridcoat.oracles import brute_generator
from hybridcoat.surface import from_faces
from hybridcoat.suites import Surface, random_run, sampled_states

# octahedron node ids: 0=+X 1=-X 2=+Y 3=-Y 4=+Z 5=-Z


def octa(tiled, p0=0):
    return CoatingRun(fixture("octahedron"), p0, tiled=tiled)


def test_coatable_examples():
    assert octa({0}).check_coatable().coatable
    assert CoatingRun(fixture("tetrahedron"), 0).check_coatable().coatable
    assert CoatingRun(fixture("icosahedron"), 3).check_coatable().coatable


def test_degree_seven_is_not_coatable():
    faces = []
    for i in range(7):
        a, b = 1 + i, 1 + (i + 1) % 7
        faces += [(0, a, b), (8, b, a)]
    run = CoatingRun(from_faces(9, faces), 1)
    verdict = run.check_coatable()
    assert not verdict.coatable and not verdict.degree_ok
    assert 0 in verdict.high_degree


def test_links_on_the_octahedron():
    run = octa({0, 1})
    assert all(run.is_link(v) for v in (2, 3, 4, 5))
    assert not octa({0}).is_link(2)
    with pytest.raises(ValueError):
        run.is_link(0)


def test_link_needs_non_adjacent_tiles_on_the_boundary():
    # +Y and +Z are adjacent on the boundary of +X: one empty arc remains
    assert not octa({0, 2, 4}, p0=2).is_link(1)
    # +Y and -Y are opposite on the boundary of +X: two arcs
    assert octa({2, 3}, p0=2).is_link(0)


def test_generator_examples():
    assert octa({0}).is_generator(1)
    tet = fixture("tetrahedron")
    for r in range(3):
        for extra in itertools.combinations([1, 2, 3], r):
            run = CoatingRun(tet, 0, tiled={0, *extra})
            assert not any(run.is_generator(v) for v in run.empty)


def test_segment_full_cycle_wraps_from_v():
    run = octa({0})
    seg = run.segment(2, 0)
    assert seg[0] == 2 and sorted(seg) == [2, 3, 4, 5]
    # the last element precedes v in the LHR order
    assert seg == [2, 4, 3, 5] or seg == [2, 5, 3, 4]
    assert run.head(2, 0) == seg[-1]


def test_segment_arc_and_idempotent_ends():
    *_, sg, p0 = object_case("ball", 1)
    r = sg.rotation[p0]
    # tile two neighbours of p0 that are two apart on its boundary
    run = CoatingRun(sg, p0, tiled={p0, r[0]}, s0=r[1])
    seg = run.segment(r[2], p0)
    assert r[0] not in seg and len(seg) == len(r) - 1
    h = run.head(r[2], p0)
    assert run.head(h, p0) == h
    t = run.tail(r[2], p0)
    assert run.tail(t, p0) == t
    with pytest.raises(ValueError):
        run.segment(r[2], r[3])


def test_scan_moves_to_first_empty_and_updates_anchor():
    sg = fixture("octahedron")
    run = CoatingRun(sg, 0, tiled={0, 2})
    # around +Z the counter-clockwise order is (+X, +Y, -X, -Y)
    assert sg.rotation[4] == (0, 2, 1, 3)
    assert run.scan(4, 0, clockwise=True) == (3, 0)
    assert run.scan(4, 0, clockwise=False) == (1, 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_lhr_then_rhr_returns(seed):
    *_, sg, p0 = object_case("ball", 2)
    rng = random.Random(seed)
    make, _ = random_run(Surface("ball", sg, p0), rng)
    for run, s in sampled_states(make, 5, rng):
        p, a = run.agent.position, run.agent.anchor
        if a is None or run.is_tiled(p) or not any(run.is_empty(w) for w in sg.rotation[p]):
            # the last empty node has nowhere to move
            continue
        x, a2 = run.lhr_target(p, a)
        assert run.rhr_target(x, a2)[0] == p
        y, a3 = run.rhr_target(p, a)
        assert run.lhr_target(y, a3)[0] == p


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_range_lies_within_radius_plus_two(seed):
    *_, sg, p0 = object_case("line", 8)
    rng = random.Random(seed)
    make, _ = random_run(Surface("line", sg, p0), rng)
    for run, s in sampled_states(make, 4, rng):
        p = run.agent.position
        ball = {p}
        for _ in range(5):
            ball |= {w for u in ball for w in sg.rotation[u]}
        for q in sg.rotation[p]:
            if run.is_empty(q):
                assert run.range(p, q, 3) <= ball


def test_init_phase():
    *_, sg, p0 = object_case("ball", 2)
    run = CoatingRun(sg, p0)
    events = [run.step() for _ in range(3)]
    assert [e.action for e in events] == ["gather", "move", "move"]
    a = run.agent
    assert a.phase is Phase.COAT and a.carried == 1 and not a.skip
    assert events[1].node == run.s0
    target, anchor = CoatingRun(sg, p0).lhr_target(run.s0, p0)
    assert a.position == target and a.anchor == anchor


def test_s0_is_the_lowest_ranked_empty_neighbour():
    *_, sg, p0 = object_case("ball", 3)
    run = CoatingRun(sg, p0)
    assert run.s0 == min(sg.rotation[p0], key=lambda v: sg.edge_rank(p0, v))


def test_skip_forces_immediate_placement():
    *_, sg, p0 = object_case("ball", 2)
    run = CoatingRun(sg, p0)
    for _ in range(3):
        run.step()
    run.agent.skip = True
    pos = run.agent.position
    ev = run.step()
    assert ev.action == "place" and ev.node == pos and ev.annotation == "skipped-check"
    assert not run.agent.skip and run.agent.phase is Phase.FETCH


def test_terminates_when_s0_is_enclosed():
    sg = fixture("octahedron")
    run = CoatingRun(sg, 0, tiled={0, 1, 3, 4, 5})  # only +Y empty
    assert run.s0 == 2
    events = [e for e in run.run().trace if e.action != "probe"]
    assert events[-1].action == "place" and events[-1].annotation == "terminate"
    assert run.terminated and run.n_tiled == 6


@pytest.mark.parametrize("name,n", [("tetrahedron", 4), ("octahedron", 6), ("icosahedron", 12)])
def test_fixtures_complete(name, n):
    out = run_to_completion(fixture(name), 0)
    assert out.complete and len(out.tiled) == n


def test_single_node_object_completes():
    *_, sg, p0 = object_case("ball", 1)
    out = run_to_completion(sg, p0)
    assert out.complete and sg.n == 12


def test_step_accounting_and_trace_format():
    *_, sg, p0 = object_case("ball", 2)
    run = CoatingRun(sg, p0).run()
    real = [e for e in run.trace if e.action != "probe"]
    assert [e.step for e in real] == list(range(1, run.steps + 1))
    assert not any(e.action == "remove" for e in run.trace)
    probes = sum(int(e.annotation.split("cost=")[1]) for e in run.trace if e.action == "probe")
    assert probes == run.probe_steps
    assert run.trace_lines()[0] == "1 gather " + run.node_name(p0) + " Init"
    assert run.placements == sg.n - 1
    assert run.depot_initial - run.depot_units == run.placements


def test_probe_charging_flag_only_changes_probe_totals():
    *_, sg, p0 = object_case("line", 8)
    a = CoatingRun(sg, p0, count_probes=True).run()
    b = CoatingRun(sg, p0, count_probes=False).run()
    assert a.steps == b.steps and b.total_steps == b.steps
    assert a.total_steps == a.steps + a.probe_steps > a.steps


def test_replay_reproduces_final_configuration():
    *_, sg, p0 = object_case("line", 4)
    run = CoatingRun(sg, p0).run()
    assert replay(sg, {p0}, run.trace) == run.tiled == set(sg.nodes())
    with pytest.raises(ValueError):
        replay(sg, {p0}, run.trace + [TraceEvent(0, "place", p0, Phase.FETCH)])


def test_step_limit_aborts():
    *_, sg, p0 = object_case("ball", 2)
    with pytest.raises(RunAborted) as exc:
        CoatingRun(sg, p0, max_steps=10).run()
    assert exc.value.reason == "step limit exceeded"


def test_depot_underfill_aborts():
    run = CoatingRun(fixture("octahedron"), 0, depot_units=2)
    with pytest.raises(RunAborted) as exc:
        run.run()
    assert exc.value.reason == "depot exhausted"


def test_invalid_construction():
    sg = fixture("octahedron")
    with pytest.raises(ValueError):
        CoatingRun(sg, 0, tiled={1})
    with pytest.raises(ValueError):
        CoatingRun(sg, 0, tiled=set(range(6)))


class HandsSwapped(CoatingRun):
    """The algorithm with clockwise and counter-clockwise exchanged."""

    def scan(self, p, anchor, clockwise):
        return super().scan(p, anchor, not clockwise)

    def segment(self, v, anchor, excluded=-1):
        seg = super().segment(v, anchor, excluded)
        if len(seg) == self.surface.degree(anchor):
            return seg[:1] + seg[1:][::-1]
        return seg[::-1]


@pytest.mark.parametrize("case", [("ball", 2), ("line", 8), ("ball", 3)])
def test_mirrored_chirality_equals_swapped_hands(case):
    *_, sg, p0 = object_case(*case)
    mirrored = CoatingRun(sg.mirrored(), p0).run()
    swapped = HandsSwapped(sg, p0).run()
    assert mirrored.trace_lines() == swapped.trace_lines()
    assert mirrored.trace_lines() != CoatingRun(sg, p0).run().trace_lines()


def test_generator_predicate_matches_hypothetical_placement():
    *_, sg, p0 = object_case("ball", 2)
    rng = random.Random(5)
    make, _ = random_run(Surface("ball", sg, p0), rng)
    for run, s in sampled_states(make, 10, rng):
        for v in sorted(run.empty):
            assert run.is_generator(v) == brute_generator(s, v)
