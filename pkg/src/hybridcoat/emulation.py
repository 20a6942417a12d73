"""Coating arbitrary triangulations through a ninefold-subdivided virtual graph.

Every face of the physical triangulation is split into nine triangles.  The
virtual graph has one node per physical node (all tiled from the start), two
per edge and one per face.  Every virtual node except the node copies maps to
a physical node, and the physical tile at ``u`` stores one occupancy bit per
virtual node mapped to ``u``.  The coating agent runs unchanged on the
virtual graph while each of its actions is mirrored physically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .engine import CoatingRun, TraceEvent
from .surface import SurfaceError, SurfaceGraph, check_triangulation_assumptions, from_faces


@dataclass(frozen=True)
class VirtualNode:
    kind: str  # node | edge | face
    key: Tuple[int, ...]

    def __str__(self) -> str:
        return f"{self.kind}({','.join(map(str, self.key))})"


class EmulationError(RuntimeError):
    """The virtual run and its physical mirror disagree."""

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (virtual step {step})")
        self.step = step


@dataclass
class VirtualGraph:
    base: SurfaceGraph
    surface: SurfaceGraph
    nodes: List[VirtualNode]
    index: Dict[VirtualNode, int]
    image: List[Optional[int]]  # physical node, None for node copies
    slot: List[Optional[int]]  # bit position within the image's code
    delta: int

    @property
    def code_width(self) -> int:
        return 2 * self.delta

    def node_copy(self, u: int) -> int:
        return self.index[VirtualNode("node", (u,))]

    def node_copies(self) -> List[int]:
        return [i for i, v in enumerate(self.nodes) if v.kind == "node"]

    def preimages(self, u: int) -> List[int]:
        return [i for i, x in enumerate(self.image) if x == u]

    def full_code(self, u: int) -> int:
        code = 0
        for i in self.preimages(u):
            code |= 1 << self.slot[i]
        return code

    def format_code(self, code: int) -> str:
        return "".join("1" if code >> i & 1 else "0" for i in range(self.code_width))


def face_image(sg: SurfaceGraph, face: Sequence[int]) -> int:
    """Corner ``u_i`` of a face minimising the rank of ``u_i - u_j``."""
    best = None
    for ui in face:
        for uj in face:
            if ui != uj:
                key = (sg.edge_rank(uj, ui), ui)
                if best is None or key < best:
                    best = key
    return best[1]


def build_virtual(sg: SurfaceGraph) -> VirtualGraph:
    if any(len(f) != 3 for f in sg.faces):
        raise SurfaceError("emulation needs a triangulation")
    nodes: List[VirtualNode] = [VirtualNode("node", (u,)) for u in sg.nodes()]
    for u in sg.nodes():
        for w in sorted(sg.rotation[u]):
            nodes.append(VirtualNode("edge", (u, w)))
    faces = [tuple(f) for f in sg.faces]
    for f in faces:
        nodes.append(VirtualNode("face", f))
    index = {v: i for i, v in enumerate(nodes)}

    def e(u: int, w: int) -> int:
        return index[VirtualNode("edge", (u, w))]

    tris = []
    for f in faces:
        u1, u2, u3 = f
        c = index[VirtualNode("face", f)]
        for a, b, d in ((u1, u2, u3), (u2, u3, u1), (u3, u1, u2)):
            tris.append((index[VirtualNode("node", (a,))], e(a, b), e(a, d)))
            tris.append((e(a, b), e(b, a), c))
            tris.append((e(a, d), e(a, b), c))
    surface = from_faces(len(nodes), tris, label=f"{sg.label}*" if sg.label else "virtual", oriented=True)

    delta = sg.max_degree
    image: List[Optional[int]] = [None] * len(nodes)
    slot: List[Optional[int]] = [None] * len(nodes)
    by_face: Dict[int, List[Tuple[Tuple[int, int], int]]] = {}
    for i, v in enumerate(nodes):
        if v.kind == "edge":
            u, w = v.key
            image[i] = u
            ranked = sorted(sg.rotation[u], key=lambda x: sg.edge_rank(u, x))
            slot[i] = ranked.index(w)
        elif v.kind == "face":
            u = face_image(sg, v.key)
            image[i] = u
            others = [x for x in v.key if x != u]
            key = tuple(sorted(sg.edge_rank(u, x) for x in others))
            by_face.setdefault(u, []).append((key, i))
    for u, items in by_face.items():
        for k, (_, i) in enumerate(sorted(items)):
            slot[i] = delta + k
    return VirtualGraph(sg, surface, nodes, index, image, slot, delta)


@dataclass
class VirtualConfig:
    graph: VirtualGraph
    tiled: Set[int]
    p0: int
    depot_units: int

    def run(self, **kwargs) -> CoatingRun:
        return CoatingRun(
            self.graph.surface, self.p0, tiled=self.tiled, depot_units=self.depot_units, **kwargs
        )


def initial_virtual_config(sg: SurfaceGraph, p0: int, graph: Optional[VirtualGraph] = None) -> VirtualConfig:
    if not 0 <= p0 < sg.n:
        raise ValueError(f"depot {p0} is not a node")
    vg = graph or build_virtual(sg)
    tiled = set(vg.node_copies())
    return VirtualConfig(vg, tiled, vg.node_copy(p0), vg.surface.n - len(tiled) + 1)


@dataclass
class PhysicalState:
    codes: Dict[int, int]
    position: int
    carried: int = 0
    depot_units: int = 0
    moves: int = 0
    places: int = 0
    type_changes: int = 0
    gathers: int = 0
    used_codes: Set[int] = field(default_factory=set)

    @property
    def steps(self) -> int:
        return self.moves + self.places + self.type_changes + self.gathers


@dataclass(frozen=True)
class PhysicalEvent:
    action: str  # move | place | retype | gather
    node: int
    code: Optional[int] = None


class Emulation:
    """Lockstep virtual run plus physical mirror on the base triangulation."""

    def __init__(
        self,
        sg: SurfaceGraph,
        p0: int,
        max_steps: Optional[int] = None,
        count_probes: bool = True,
        monitors: Sequence = (),
    ):
        self.sg = sg
        self.config = initial_virtual_config(sg, p0)
        self.vg = self.config.graph
        self.run = self.config.run(max_steps=max_steps, count_probes=count_probes, monitors=monitors)
        self.physical = PhysicalState(codes={p0: 0}, position=p0, depot_units=sg.n)
        self.physical.used_codes.add(0)
        self.p0 = p0
        self.dual: List[Tuple[TraceEvent, List[PhysicalEvent]]] = []

    @property
    def terminated(self) -> bool:
        return self.run.terminated

    def step(self) -> Tuple[TraceEvent, List[PhysicalEvent]]:
        ev = self.run.step()
        mirror = apply_physical(self, ev)
        self.dual.append((ev, mirror))
        return ev, mirror

    def run_all(self) -> "Emulation":
        while not self.terminated:
            self.step()
        return self

    def consistent_end_state(self) -> List[str]:
        problems = []
        for u in self.sg.nodes():
            code = self.physical.codes.get(u)
            if code is None:
                problems.append(f"node {u} is not tiled")
            elif code != self.vg.full_code(u):
                problems.append(
                    f"node {u} has code {self.vg.format_code(code)},"
                    f" expected {self.vg.format_code(self.vg.full_code(u))}"
                )
        return problems

    def dual_trace_lines(self) -> List[str]:
        lines = []
        for ev, mirror in self.dual:
            line = ev.format(lambda i: str(self.vg.nodes[i]))
            if mirror:
                parts = []
                for m in mirror:
                    s = f"{m.action}:{self._name(m.node)}"
                    if m.code is not None:
                        s += f":{self.vg.format_code(m.code)}"
                    parts.append(s)
                line += " | " + " ".join(parts)
            lines.append(line)
        return lines

    def _name(self, u: int) -> str:
        if self.sg.coords is not None:
            return "[" + ",".join(map(str, self.sg.coords[u])) + "]"
        return str(u)


def apply_physical(emu: Emulation, ev: TraceEvent) -> List[PhysicalEvent]:
    """Mirror one virtual event on the physical triangulation."""
    if ev.action == "probe":
        return []
    phys = emu.physical
    vg = emu.vg
    sg = emu.sg
    out: List[PhysicalEvent] = []
    if ev.action == "gather":
        if phys.position != emu.p0:
            raise EmulationError("physical agent is away from the depot at a gather", ev.step)
        if phys.carried == 0:
            if phys.depot_units < 1:
                raise EmulationError("physical depot exhausted", ev.step)
            phys.depot_units -= 1
            phys.carried = 1
            phys.gathers += 1
            out.append(PhysicalEvent("gather", emu.p0))
        return out

    target = vg.image[ev.node]
    if ev.action == "move":
        if target is None:
            target = vg.nodes[ev.node].key[0]
        if target != phys.position:
            if not sg.is_adjacent(phys.position, target):
                raise EmulationError(
                    f"virtual move to {vg.nodes[ev.node]} has no physical counterpart"
                    f" from {phys.position}",
                    ev.step,
                )
            for x in sg.physical_moves(phys.position, target):
                phys.moves += 1
                out.append(PhysicalEvent("move", x))
            phys.position = target
        return out

    if ev.action == "place":
        if target is None:
            raise EmulationError("placement on a node copy", ev.step)
        if target != phys.position:
            raise EmulationError("virtual and physical positions diverged", ev.step)
        bit = 1 << vg.slot[ev.node]
        code = phys.codes.get(target)
        if code is None:
            if phys.carried != 1:
                raise EmulationError("physical placement without material", ev.step)
            phys.carried = 0
            phys.codes[target] = bit
            phys.places += 1
            out.append(PhysicalEvent("place", target, bit))
        else:
            if code & bit:
                raise EmulationError(f"bit for {vg.nodes[ev.node]} already set", ev.step)
            phys.codes[target] = code | bit
            phys.type_changes += 1
            out.append(PhysicalEvent("retype", target, code | bit))
        phys.used_codes.add(phys.codes[target])
        return out
    raise EmulationError(f"unexpected virtual action {ev.action}", ev.step)


@dataclass
class EmulationOutcome:
    emulation: Emulation
    virtual_complete: bool
    physical_complete: bool
    problems: List[str]

    @property
    def consistent(self) -> bool:
        return not self.problems

    @property
    def ok(self) -> bool:
        return self.virtual_complete and self.physical_complete and self.consistent


def emulate(
    sg: SurfaceGraph,
    p0: int,
    max_steps: Optional[int] = None,
    count_probes: bool = True,
    monitors: Sequence = (),
) -> EmulationOutcome:
    emu = Emulation(sg, p0, max_steps=max_steps, count_probes=count_probes, monitors=monitors)
    emu.run_all()
    problems = emu.consistent_end_state()
    run = emu.run
    virtual_complete = run.terminated and run.n_tiled == emu.vg.surface.n
    physical_complete = len(emu.physical.codes) == sg.n
    return EmulationOutcome(emu, virtual_complete, physical_complete, problems)


def virtual_eligibility(vg: VirtualGraph):
    """Triangulation check of the virtual graph, exempting the node copies."""
    return check_triangulation_assumptions(vg.surface, True, initially_tiled=vg.node_copies())
