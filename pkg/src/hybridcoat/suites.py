"""Differential and invariant verification suites behind ``hybridcoat verify``.

Each suite draws reachable states from real runs, compares the engine's
predicates with the brute-force references in :mod:`hybridcoat.oracles` or
checks invariants along runs, and reports pass/fail counts.  ``budget``
caps the number of sampled states or checkpoints; a zero budget checks
nothing and says so.
"""

from __future__ import annotations

import itertools
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import networkx as nx

from .engine import CoatingRun, RunAborted
from .oracles import (
    AccountingMonitor,
    InvariantMonitor,
    InvariantViolation,
    Snapshot,
    brute_generator,
    brute_link,
    brute_links,
    check_no_split,
    cut_nodes,
    generator_shape_ok,
    literal_range,
    literal_segment,
    random_initial_tiling,
    to_networkx,
)
from .surface import FIXTURES, SurfaceGraph, load_fixture, surface_of
from .world import default_p0, generate_object

SUITES = ("oracles", "invariants", "appendix-fixtures")


def step_guard(sg: SurfaceGraph) -> int:
    """Generous step limit so that a broken engine cannot loop forever."""
    return 10 * sg.n * sg.n + 200


@dataclass
class SuiteReport:
    suite: str
    samples: int = 0
    checks: Counter = field(default_factory=Counter)
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, msg: str) -> None:
        self.failures.append(msg)

    def to_json(self) -> Dict:
        return {
            "suite": self.suite,
            "ok": self.ok,
            "samples": self.samples,
            "checks": dict(sorted(self.checks.items())),
            "failures": self.failures,
        }

    def lines(self) -> List[str]:
        status = "PASS" if self.ok else "FAIL"
        out = [f"{self.suite}: {status} ({self.samples} samples, {len(self.failures)} failures)"]
        for name, count in sorted(self.checks.items()):
            out.append(f"  {name}: {count}")
        for msg in self.failures[:20]:
            out.append(f"  witness: {msg}")
        return out


@dataclass
class Surface:
    name: str
    graph: SurfaceGraph
    p0: int
    _dist: Optional[Dict[int, Dict[int, int]]] = None

    @property
    def dist(self) -> Dict[int, Dict[int, int]]:
        if self._dist is None:
            self._dist = dict(nx.all_pairs_shortest_path_length(to_networkx(self.graph)))
        return self._dist


def object_surface(kind: str, size: int, seed: int = 0) -> Surface:
    o = generate_object(kind, size, seed)
    p0 = default_p0(o)
    sg = surface_of(o, p0)[3]
    return Surface(f"{kind}-{size}-{seed}", sg, sg.index_of(p0))


def default_corpus() -> List[Surface]:
    """Small smooth surfaces: the fixtures, a single node, a ball and lines."""
    out = [Surface(name, load_fixture(name), 0) for name in FIXTURES]
    for kind, size in (("ball", 1), ("ball", 2), ("line", 4), ("line", 8)):
        out.append(object_surface(kind, size))
    return out


def random_run(
    surface: Surface, rng: random.Random, multi: bool = True, **kwargs
) -> Tuple[Callable[[], CoatingRun], frozenset]:
    """Factory for a coatable run from a random start (or the depot alone)."""
    tiled = {surface.p0}
    if multi:
        cand = random_initial_tiling(surface.graph, surface.p0, rng, surface.dist)
        if CoatingRun(surface.graph, surface.p0, tiled=cand).check_coatable().coatable:
            tiled = cand
    frozen = frozenset(tiled)

    def make() -> CoatingRun:
        return CoatingRun(
            surface.graph,
            surface.p0,
            tiled=frozen,
            count_probes=False,
            max_steps=step_guard(surface.graph),
            **kwargs,
        )

    return make, frozen


def sampled_states(make_run, k: int, rng: random.Random) -> Iterator[Tuple[CoatingRun, Snapshot]]:
    """Pause one run at ``k`` random steps and yield the live run each time."""
    probe = make_run().run()
    total = probe.steps
    if total < 2 or k <= 0:
        return
    points = sorted(rng.sample(range(1, total), min(k, total - 1)))
    run = make_run()
    graph = to_networkx(run.surface)
    for pt in points:
        while run.steps < pt:
            run.step()
        yield run, Snapshot(run.surface, run.tiled, graph)


def compare_predicates(run: CoatingRun, s: Snapshot, rep: SuiteReport, rng: random.Random) -> None:
    """Engine predicates against the brute-force references on one state."""
    sg = run.surface
    empty = sorted(run.empty)
    for v in empty:
        rep.checks["link"] += 1
        if run.is_link(v) != brute_link(s, v):
            rep.fail(f"{sg.label}: is_link({v}) disagrees, tiled={sorted(s.tiled)}")
        for w in sg.rotation[v]:
            if run.is_tiled(w):
                rep.checks["segment"] += 1
                if set(run.segment(v, w)) != literal_segment(s, v, w):
                    rep.fail(f"{sg.label}: segment({v}, anchor {w}) disagrees")
    rep.checks["cut-nodes"] += 1
    cuts = cut_nodes(s)
    if not cuts <= brute_links(s):
        rep.fail(f"{sg.label}: cut nodes {sorted(cuts - brute_links(s))} are not links")
    p = run.agent.position
    for q in sg.rotation[p]:
        if run.is_empty(q):
            rep.checks["range"] += 1
            if run.range(p, q, 3) != literal_range(s, p, q, 3):
                rep.fail(f"{sg.label}: range({p}, {q}, 3) disagrees, tiled={sorted(s.tiled)}")
    for v in rng.sample(empty, min(3, len(empty))):
        rep.checks["generator"] += 1
        if run.is_generator(v) != brute_generator(s, v):
            rep.fail(f"{sg.label}: is_generator({v}) disagrees")


def oracle_suite(budget: int, seed: int = 0, corpus: Optional[Sequence[Surface]] = None) -> SuiteReport:
    """is_link, segments, ranges and generators on ``budget`` sampled states."""
    rep = SuiteReport("oracles")
    corpus = list(corpus or default_corpus())
    rng = random.Random(seed)
    for i in itertools.count():
        if rep.samples >= budget:
            break
        surface = corpus[i % len(corpus)]
        make, _ = random_run(surface, rng)
        try:
            for run, s in sampled_states(make, min(25, budget - rep.samples), rng):
                compare_predicates(run, s, rep, rng)
                rep.samples += 1
        except RunAborted as exc:
            rep.fail(f"{surface.name}: {exc}")
            rep.samples += 1
    return rep


def split_and_shape(s: Snapshot, rep: SuiteReport, links: Optional[set] = None) -> None:
    """No tiling raises the empty-arc count of a node sharing a tiled neighbour,
    and links that are generators have the expected neighbourhood."""
    rep.checks["split-states"] += 1
    bad = check_no_split(s)
    if bad:
        rep.fail(f"{s.sg.label}: tiling {bad[0][0]} splits the boundary of {bad[0][1]}")
    for v in sorted(brute_links(s) if links is None else links):
        if brute_generator(s, v):
            rep.checks["link-generators"] += 1
            if not generator_shape_ok(s, v):
                rep.fail(f"{s.sg.label}: link generator {v} has an unexpected neighbourhood")


def monitored_run(make_run, rep: SuiteReport) -> Optional[CoatingRun]:
    """Run to completion under the invariant and accounting monitors."""
    inv = InvariantMonitor(strict=False)
    acc = AccountingMonitor()
    run = make_run()
    run.monitors = [inv, acc]
    name = run.surface.label or "surface"
    try:
        run.run()
    except (RunAborted, InvariantViolation) as exc:
        rep.fail(f"{name}: {exc}")
        return None
    rep.checks["gathers"] += inv.gathers_checked
    rep.checks["placements"] += inv.placements_checked
    rep.checks["tolerated-p2"] += inv.tolerated_p2
    rep.checks["observed-link-generators"] += inv.generator_links
    for msg in inv.violations:
        rep.fail(f"{name}: {msg}")
    if run.n_tiled != run.surface.n:
        rep.fail(f"{name}: run ended with {run.n_tiled}/{run.surface.n} tiled")
    used = run.depot_initial - run.depot_units
    if used != run.surface.n - len(run.tiled0) or acc.removals:
        rep.fail(f"{name}: depot used {used} units for {run.surface.n - len(run.tiled0)} placements")
    return run


def invariant_suite(budget: int, seed: int = 0, corpus: Optional[Sequence[Surface]] = None) -> SuiteReport:
    """Monitored runs until ``budget`` gather checkpoints have been checked,
    plus no-split and link-generator checks on sampled states."""
    rep = SuiteReport("invariants")
    corpus = list(corpus or default_corpus())
    rng = random.Random(seed)
    for i in itertools.count():
        if rep.samples >= budget:
            break
        surface = corpus[i % len(corpus)]
        make, _ = random_run(surface, rng, multi=i >= len(corpus))
        run = monitored_run(make, rep)
        if run is None:
            rep.samples += 1
            continue
        rep.samples += run.gathers
        for _, s in sampled_states(make, 2, rng):
            split_and_shape(s, rep)
    return rep


def octahedron_states(limit: Optional[int] = None) -> List[Snapshot]:
    """Every distinct tiled set reached by any run on the octahedron, over all
    depots and all coatable starting sets."""
    sg = load_fixture("octahedron")
    graph = to_networkx(sg)
    seen = {}
    for p0 in sg.nodes():
        others = [v for v in sg.nodes() if v != p0]
        for r in range(len(others) + 1):
            for extra in itertools.combinations(others, r):
                try:
                    run = CoatingRun(sg, p0, tiled={p0, *extra}, count_probes=False, max_steps=step_guard(sg))
                    if not run.check_coatable().coatable:
                        continue
                except ValueError:
                    continue
                seen.setdefault(frozenset(run.tiled), None)
                while not run.terminated:
                    run.step()
                    seen.setdefault(frozenset(run.tiled), None)
    states = [Snapshot(sg, t, graph) for t in sorted(seen, key=lambda t: (len(t), sorted(t)))]
    return states if limit is None else states[:limit]


def appendix_suite(budget: int, seed: int = 0) -> SuiteReport:
    """The bundled fixtures under monitors and exhaustive no-split checks on
    octahedron states."""
    rep = SuiteReport("appendix-fixtures")
    if budget <= 0:
        return rep
    for name in FIXTURES:
        sg = load_fixture(name)
        for p0 in sg.nodes():
            run = monitored_run(
                lambda: CoatingRun(sg, p0, count_probes=False, max_steps=step_guard(sg)), rep
            )
            rep.samples += run.gathers if run else 1
            if rep.samples >= budget:
                return rep
    for s in octahedron_states():
        split_and_shape(s, rep)
        rep.samples += 1
        if rep.samples >= budget:
            break
    return rep


def run_suite(name: str, budget: int, seed: int = 0) -> SuiteReport:
    if name == "oracles":
        return oracle_suite(budget, seed)
    if name == "invariants":
        return invariant_suite(budget, seed)
    if name == "appendix-fixtures":
        return appendix_suite(budget, seed)
    raise ValueError(f"unknown suite {name!r}")
