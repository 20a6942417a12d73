"""Finite-automaton coating agent on a triangulated surface.

The agent follows the boundary of the tiled region with the left-hand rule
(LHR: scan the neighbours of ``p`` clockwise starting at the anchor) or the
right-hand rule (RHR: counter-clockwise), places tiles so that the empty
region stays connected, and returns to the depot after every placement.

Everything the automaton "knows" beyond its own node and neighbours is
computed here directly from the surface state.  What a physical agent would
have to walk to learn is charged as probe steps, so that step totals reflect
the cost of exploring ranges and segments.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from .surface import SurfaceGraph


class Phase(enum.Enum):
    INIT = "Init"
    COAT = "Coat"
    FETCH = "Fetch"
    TERMINATED = "Terminated"


class RunAborted(RuntimeError):
    """A run stopped before coating the surface."""

    def __init__(self, reason: str, step: int, detail: str = ""):
        super().__init__(f"{reason} at step {step}" + (f": {detail}" if detail else ""))
        self.reason = reason
        self.step = step
        self.detail = detail


class NoLegalMove(RuntimeError):
    pass


@dataclass
class AgentState:
    phase: Phase
    position: int
    anchor: Optional[int] = None
    skip: bool = False
    home_dir: object = None
    carried: int = 0


@dataclass(frozen=True)
class TraceEvent:
    step: int
    action: str  # gather | move | place | probe
    node: int
    phase: Phase
    annotation: str = ""

    def format(self, name: Callable[[int], str] = str) -> str:
        line = f"{self.step} {self.action} {name(self.node)} {self.phase.value}"
        return f"{line} {self.annotation}" if self.annotation else line


@dataclass
class CoatabilityVerdict:
    degree_ok: bool
    depot_has_empty_neighbor: bool
    no_links: bool
    empty_connected: bool
    high_degree: List[int] = field(default_factory=list)
    links: List[int] = field(default_factory=list)

    @property
    def coatable(self) -> bool:
        return (
            self.degree_ok
            and self.depot_has_empty_neighbor
            and self.no_links
            and self.empty_connected
        )

    def failures(self) -> List[str]:
        out = []
        if not self.degree_ok:
            out.append(f"empty nodes with more than six neighbours: {self.high_degree[:5]}")
        if not self.depot_has_empty_neighbor:
            out.append("depot has no empty neighbour")
        if not self.no_links:
            out.append(f"initial links: {self.links[:5]}")
        if not self.empty_connected:
            out.append("empty nodes are disconnected")
        return out


class CoatingRun:
    """One execution of the coating algorithm on a surface.

    ``tiled`` holds the initially tiled nodes and must contain the depot
    ``p0``.  ``monitors`` are objects with optional ``on_event``,
    ``on_gather``, ``on_place`` and ``on_generator`` hooks; they observe the
    run and raise to abort it.
    """

    RANGE_RADIUS = 3

    def __init__(
        self,
        surface: SurfaceGraph,
        p0: int,
        tiled: Optional[Iterable[int]] = None,
        depot_units: Optional[int] = None,
        count_probes: bool = True,
        monitors: Sequence = (),
        max_steps: Optional[int] = None,
        s0: Optional[int] = None,
    ):
        self.surface = surface
        self.p0 = p0
        tiled = {p0} if tiled is None else set(tiled)
        if p0 not in tiled:
            raise ValueError("the depot node must be tiled initially")
        if surface.n < 2:
            raise ValueError("surface needs at least two nodes")
        self.tiled0 = frozenset(tiled)
        self._tiled = bytearray(surface.n)
        for v in tiled:
            self._tiled[v] = 1
        self.n_tiled = len(tiled)
        self.depot_units = (
            surface.n - len(tiled) + 1 if depot_units is None else depot_units
        )
        self.depot_initial = self.depot_units
        self.count_probes = count_probes
        self.monitors = list(monitors)
        self.max_steps = max_steps
        self.steps = 0
        self.probe_steps = 0
        self.placements = 0
        self.gathers = 0
        self.trace: List[TraceEvent] = []
        self.s0 = self._choose_s0() if s0 is None else s0
        self.agent = AgentState(phase=Phase.INIT, position=p0)
        self._links: Dict[int, bool] = {}
        self._n5: Dict[int, int] = {}
        self._program = self._algorithm()

    # ------------------------------------------------------------------
    # configuration queries

    def is_tiled(self, v: int) -> bool:
        return bool(self._tiled[v])

    def is_empty(self, v: int) -> bool:
        return not self._tiled[v]

    @property
    def tiled(self) -> Set[int]:
        return {v for v in self.surface.nodes() if self._tiled[v]}

    @property
    def empty(self) -> Set[int]:
        return {v for v in self.surface.nodes() if not self._tiled[v]}

    @property
    def terminated(self) -> bool:
        return self.agent.phase is Phase.TERMINATED

    @property
    def total_steps(self) -> int:
        return self.steps + (self.probe_steps if self.count_probes else 0)

    def _choose_s0(self) -> int:
        sg = self.surface
        free = [v for v in sg.rotation[self.p0] if not self._tiled[v]]
        if not free:
            raise ValueError("depot has no empty neighbour")
        return min(free, key=lambda v: sg.edge_rank(self.p0, v))

    # ------------------------------------------------------------------
    # predicates

    def empty_arcs(self, v: int, extra_tiled: Iterable[int] = ()) -> List[List[int]]:
        """Maximal runs of empty nodes along the boundary cycle of ``v``."""
        r = self.surface.rotation[v]
        extra = set(extra_tiled)
        flags = [not self._tiled[u] and u not in extra for u in r]
        k = len(r)
        if all(flags):
            return [list(r)]
        start = flags.index(False)
        arcs, cur = [], []
        for i in range(1, k + 1):
            j = (start + i) % k
            if flags[j]:
                cur.append(r[j])
            elif cur:
                arcs.append(cur)
                cur = []
        return arcs

    def _arc_count(self, v: int, extra: int = -1) -> int:
        r = self.surface.rotation[v]
        tiled = self._tiled
        k = len(r)
        count = 0
        prev_empty = not tiled[r[-1]] and r[-1] != extra
        any_tiled = not prev_empty
        for u in r:
            e = not tiled[u] and u != extra
            if e and not prev_empty:
                count += 1
            if not e:
                any_tiled = True
            prev_empty = e
        if not any_tiled:
            return 1 if k else 0
        return count

    def is_link(self, v: int) -> bool:
        if self._tiled[v]:
            raise ValueError(f"node {v} is tiled")
        cached = self._links.get(v)
        if cached is None:
            cached = self._links[v] = self._arc_count(v) >= 2
        return cached

    def _link_or_s0(self, v: int) -> bool:
        return v == self.s0 or (not self._tiled[v] and self.is_link(v))

    def is_generator(self, v: int) -> bool:
        """True if tiling ``v`` would turn some empty neighbour into a link."""
        if self._tiled[v]:
            raise ValueError(f"node {v} is tiled")
        for w in self.surface.rotation[v]:
            if self._tiled[w] or self.is_link(w):
                continue
            if self._arc_count(w, extra=v) >= 2:
                return True
        return False

    def links(self) -> Set[int]:
        return {v for v in self.surface.nodes() if not self._tiled[v] and self.is_link(v)}

    def segment(self, v: int, anchor: int, excluded: int = -1) -> List[int]:
        """Empty arc of the anchor's boundary containing ``v``, in LHR order.

        The first element is the tail and the last the head.  If the whole
        boundary of the anchor is empty the arc wraps once, starting at ``v``.
        ``excluded`` is treated as tiled.
        """
        sg = self.surface
        if not self._tiled[anchor] and anchor != excluded:
            raise ValueError(f"anchor {anchor} is not tiled")
        if not sg.is_adjacent(anchor, v):
            raise ValueError(f"{v} is not adjacent to anchor {anchor}")
        r = sg.rotation[anchor]
        k = len(r)
        i = sg.position(anchor, v)
        free = lambda u: not self._tiled[u] and u != excluded
        if not free(v):
            return []
        if all(free(u) for u in r):
            return [r[(i + j) % k] for j in range(k)]
        lo = i
        while free(r[(lo - 1) % k]):
            lo -= 1
        hi = i
        while free(r[(hi + 1) % k]):
            hi += 1
        return [r[j % k] for j in range(lo, hi + 1)]

    def successors(self, v: int, anchor: int) -> List[int]:
        seg = self.segment(v, anchor)
        return seg[seg.index(v) + 1 :]

    def head(self, v: int, anchor: int) -> int:
        return self.segment(v, anchor)[-1]

    def tail(self, v: int, anchor: int) -> int:
        return self.segment(v, anchor)[0]

    def scan(self, p: int, anchor: int, clockwise: bool) -> Tuple[int, int]:
        """First empty node around ``p`` from ``anchor`` and the new anchor."""
        sg = self.surface
        step = sg.cw_next if clockwise else sg.ccw_next
        last = anchor
        x = step(p, anchor)
        for _ in range(sg.degree(p)):
            if not self._tiled[x]:
                return x, last
            last = x
            x = step(p, x)
        raise NoLegalMove(f"node {p} has no empty neighbour")

    def lhr_target(self, p: int, anchor: int) -> Tuple[int, int]:
        return self.scan(p, anchor, clockwise=True)

    def rhr_target(self, p: int, anchor: int) -> Tuple[int, int]:
        return self.scan(p, anchor, clockwise=False)

    def neighborhood(self, p: int, radius: int, excluded: int = -1) -> Set[int]:
        """Empty nodes within ``radius`` of ``p`` avoiding ``excluded``."""
        seen = {p}
        frontier = [p]
        for _ in range(radius):
            nxt = []
            for u in frontier:
                for w in self.surface.rotation[u]:
                    if w not in seen and w != excluded and not self._tiled[w]:
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt
        return seen

    def range(self, p: int, q: int, radius: int) -> Set[int]:
        """The ``radius``-range of ``p`` computed as if ``q`` were tiled."""
        if not self.surface.is_adjacent(p, q):
            raise ValueError(f"{q} is not adjacent to {p}")
        out: Set[int] = set()
        for v in self.neighborhood(p, radius, excluded=q):
            for w in self.surface.rotation[v]:
                if self._tiled[w] or w == q:
                    out.update(self.segment(v, w, excluded=q))
        return out

    def n_ball(self, p: int, radius: int) -> int:
        """|N_radius(p)| in the full surface, ignoring tiles."""
        if radius == self.RANGE_RADIUS + 2 and p in self._n5:
            return self._n5[p]
        seen = {p}
        frontier = [p]
        for _ in range(radius):
            nxt = []
            for u in frontier:
                for w in self.surface.rotation[u]:
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt
        if radius == self.RANGE_RADIUS + 2:
            self._n5[p] = len(seen)
        return len(seen)

    def check_coatable(self) -> CoatabilityVerdict:
        sg = self.surface
        empty = [v for v in sg.nodes() if not self._tiled[v]]
        high = [v for v in empty if sg.degree(v) > 6]
        links = [v for v in empty if self.is_link(v)]
        has_free = any(not self._tiled[v] for v in sg.rotation[self.p0])
        return CoatabilityVerdict(
            degree_ok=not high,
            depot_has_empty_neighbor=has_free,
            no_links=not links,
            empty_connected=_connected(sg, empty),
            high_degree=high,
            links=links,
        )

    # ------------------------------------------------------------------
    # atomic actions

    def _event(self, action: str, node: int, annotation: str = "") -> TraceEvent:
        if action != "probe":
            self.steps += 1
            if self.max_steps is not None and self.steps > self.max_steps:
                raise RunAborted("step limit exceeded", self.steps, f"max_steps={self.max_steps}")
        ev = TraceEvent(self.steps, action, node, self.agent.phase, annotation)
        self.trace.append(ev)
        if action != "probe":
            for m in self.monitors:
                hook = getattr(m, "on_event", None)
                if hook:
                    hook(self, ev)
        return ev

    def _probe(self, cost: int, what: str) -> None:
        self.probe_steps += cost
        self._event("probe", self.agent.position, f"{what} cost={cost}")

    def _move(self, target: int, anchor: Optional[int]) -> TraceEvent:
        a = self.agent
        if not self.surface.is_adjacent(a.position, target):
            raise RunAborted("illegal move", self.steps, f"{a.position}->{target}")
        a.position = target
        a.anchor = anchor
        return self._event("move", target)

    def _move_l(self) -> TraceEvent:
        a = self.agent
        target, anchor = self.lhr_target(a.position, a.anchor)
        return self._move(target, anchor)

    def _move_r(self) -> TraceEvent:
        a = self.agent
        target, anchor = self.rhr_target(a.position, a.anchor)
        return self._move(target, anchor)

    def _gather(self) -> TraceEvent:
        a = self.agent
        if a.position != self.p0:
            raise RunAborted("gather away from depot", self.steps, str(a.position))
        if self.depot_units < 1:
            raise RunAborted(
                "depot exhausted",
                self.steps,
                f"initial={self.depot_initial} placements={self.placements}",
            )
        if a.carried:
            raise RunAborted("agent already carries material", self.steps)
        self.depot_units -= 1
        a.carried = 1
        self.gathers += 1
        ev = self._event("gather", self.p0)
        for m in self.monitors:
            hook = getattr(m, "on_gather", None)
            if hook:
                hook(self)
        return ev

    def _place(self, annotation: str = "") -> TraceEvent:
        a = self.agent
        v = a.position
        if self._tiled[v]:
            raise RunAborted("placement on a tiled node", self.steps, str(v))
        if not a.carried:
            raise RunAborted("placement without material", self.steps, str(v))
        self._tiled[v] = 1
        self.n_tiled += 1
        a.carried = 0
        self.placements += 1
        self._links.pop(v, None)
        for w in self.surface.rotation[v]:
            self._links.pop(w, None)
        ev = self._event("place", v, annotation)
        for m in self.monitors:
            hook = getattr(m, "on_place", None)
            if hook:
                hook(self, v)
        return ev

    def _at_s0(self) -> bool:
        a = self.agent
        sg = self.surface
        if sg.coords is not None:
            target = tuple(c + d for c, d in zip(sg.coords[a.position], a.home_dir))
            return sg.coords[self.p0] == target and sg.is_adjacent(a.position, self.p0)
        return a.position == self.s0

    def _observe_generator(self, v: int) -> bool:
        g = self.is_generator(v)
        for m in self.monitors:
            hook = getattr(m, "on_generator", None)
            if hook:
                hook(self, v, g)
        return g

    # ------------------------------------------------------------------
    # the algorithm, one yield per atomic action

    def _algorithm(self) -> Iterator[TraceEvent]:
        a = self.agent
        sg = self.surface
        s0, p0 = self.s0, self.p0

        # Init
        yield self._gather()
        if sg.coords is not None:
            a.home_dir = sg.vector(s0, p0)
            home = "home=dir:" + ",".join(map(str, a.home_dir))
        else:
            a.home_dir = p0
            home = "home=adjacency"
        a.skip = False
        ev = self._move(s0, anchor=p0)
        self.trace[-1] = TraceEvent(ev.step, ev.action, ev.node, ev.phase, home)
        yield self.trace[-1]
        if all(self._tiled[v] for v in sg.rotation[s0]):
            # s0 is the only empty node: nothing to walk around
            a.phase = Phase.TERMINATED
            yield self._place("terminate")
            return
        ev = self._move_l()
        a.phase = Phase.COAT
        yield ev

        while True:
            # Coat
            p = a.position
            q, _ = self.rhr_target(p, a.anchor)
            if a.skip:
                hit = False
            else:
                if self.count_probes:
                    self._probe(2 * self.n_ball(p, self.RANGE_RADIUS + 2), "range")
                hit = any(self._link_or_s0(v) for v in self.range(p, q, self.RANGE_RADIUS))
            if a.skip or not hit:
                note = "skipped-check" if a.skip else ""
                a.skip = False
                a.phase = Phase.FETCH
                yield self._place(note)
            else:
                yield self._move_r()
                note = "link"
                if self.count_probes:
                    self._probe(2 * sg.degree(a.position), "gen")
                if self._observe_generator(a.position):
                    note = "link-gen"
                    yield self._move_r()
                    if self.count_probes:
                        self._probe(2 * sg.degree(a.position), "gen")
                    if self._observe_generator(a.position):
                        nxt, _ = self.rhr_target(a.position, a.anchor)
                        if self.count_probes:
                            self._probe(2, "link")
                        if not self._link_or_s0(nxt):
                            a.skip = True
                a.phase = Phase.FETCH
                yield self._place("set-skip" if a.skip else note)

            # Fetch
            while not self._at_s0():
                yield self._move_r()
            yield self._move(p0, anchor=None)
            yield self._gather()
            yield self._move(s0, anchor=p0)
            if all(self._tiled[v] for v in sg.rotation[s0]):
                a.phase = Phase.TERMINATED
                yield self._place("terminate")
                return
            while True:
                p = a.position
                if self._link_or_s0(p):
                    yield self._move_l()
                    continue
                succ = self.successors(p, a.anchor)
                if self.count_probes and succ:
                    self._probe(2 * len(succ), "segment")
                if any(self.is_link(v) for v in succ):
                    yield self._move_l()
                    continue
                break
            a.phase = Phase.COAT

    def step(self) -> TraceEvent:
        """Execute exactly one atomic action."""
        if self.terminated:
            raise RuntimeError("run already terminated")
        try:
            return next(self._program)
        except NoLegalMove as exc:
            raise RunAborted("no legal move", self.steps, str(exc)) from None

    def run(self) -> "CoatingRun":
        while not self.terminated:
            self.step()
        return self

    # ------------------------------------------------------------------

    def node_name(self, v: int) -> str:
        if self.surface.coords is not None:
            return "[" + ",".join(map(str, self.surface.coords[v])) + "]"
        return str(v)

    def trace_lines(self) -> List[str]:
        return [ev.format(self.node_name) for ev in self.trace]


def _connected(sg: SurfaceGraph, nodes: Iterable[int]) -> bool:
    nodes = set(nodes)
    if len(nodes) <= 1:
        return True
    start = next(iter(nodes))
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in sg.rotation[u]:
            if w in nodes and w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == len(nodes)


@dataclass
class Outcome:
    tiled: Set[int]
    steps: int
    probe_steps: int
    trace: List[TraceEvent]
    terminated: bool
    run: CoatingRun

    @property
    def complete(self) -> bool:
        return self.terminated and len(self.tiled) == self.run.surface.n

    @property
    def total_steps(self) -> int:
        return self.run.total_steps


def check_coatable(run: CoatingRun) -> CoatabilityVerdict:
    return run.check_coatable()


def run_to_completion(
    surface: SurfaceGraph,
    p0: int,
    tiled: Optional[Iterable[int]] = None,
    max_steps: Optional[int] = None,
    count_probes: bool = True,
    monitors: Sequence = (),
    require_coatable: bool = True,
) -> Outcome:
    run = CoatingRun(
        surface, p0, tiled=tiled, count_probes=count_probes, monitors=monitors, max_steps=max_steps
    )
    if require_coatable:
        verdict = run.check_coatable()
        if not verdict.coatable:
            raise ValueError("configuration is not coatable: " + "; ".join(verdict.failures()))
    run.run()
    return Outcome(run.tiled, run.steps, run.probe_steps, run.trace, run.terminated, run)


def replay(surface: SurfaceGraph, tiled0: Iterable[int], events: Iterable[TraceEvent]) -> Set[int]:
    """Apply the placements of a trace to an initial tiled set."""
    tiled = set(tiled0)
    for ev in events:
        if ev.action == "place":
            if ev.node in tiled:
                raise ValueError(f"trace places twice at {ev.node}")
            tiled.add(ev.node)
        elif ev.action == "remove":
            tiled.discard(ev.node)
    return tiled
