"""Objects, configurations, the coating layer and deterministic test objects."""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional, Set, Tuple

from .lattice import DIRECTIONS, Coord, add, is_node, iter_neighbors, sub

INF = math.inf


class ValidationError(ValueError):
    """Raised when an object or scenario violates a model assumption."""


@dataclass(frozen=True)
class ObjectSpec:
    nodes: FrozenSet[Coord]
    label: str = ""

    @classmethod
    def of(cls, nodes: Iterable[Iterable[int]], label: str = "") -> "ObjectSpec":
        return cls(frozenset(tuple(int(v) for v in c) for c in nodes), label)

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass
class ObjectReport:
    connected: bool
    hole_width_violations: List[Tuple[Coord, Coord]] = field(default_factory=list)
    bad_nodes: List[Coord] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.connected and not self.hole_width_violations and not self.bad_nodes

    def describe(self) -> str:
        if self.valid:
            return "valid"
        parts = []
        if self.bad_nodes:
            parts.append(f"not lattice nodes: {self.bad_nodes[:5]}")
        if not self.connected:
            parts.append("disconnected")
        if self.hole_width_violations:
            v, w = self.hole_width_violations[0]
            parts.append(
                f"hole-width violation between {list(v)} and {list(w)}"
                f" ({len(self.hole_width_violations)} pair(s))"
            )
        return "; ".join(parts)


@dataclass
class Configuration:
    """Tiled set, object, agent position and depot bookkeeping."""

    object: ObjectSpec
    tiled: Set[Coord]
    agent_pos: Coord
    depot_pos: Coord
    depot_units: int
    carried: int = 0

    def is_valid(self) -> bool:
        nodes = set(self.tiled) | set(self.object.nodes) | {self.agent_pos}
        return is_connected(nodes)


def components(nodes: Iterable[Coord]) -> List[Set[Coord]]:
    """Connected components of the induced subgraph G(nodes)."""
    todo = set(nodes)
    out = []
    while todo:
        start = todo.pop()
        comp = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in iter_neighbors(u):
                if w in todo:
                    todo.discard(w)
                    comp.add(w)
                    queue.append(w)
        out.append(comp)
    return out


def is_connected(nodes: Iterable[Coord]) -> bool:
    nodes = set(nodes)
    return len(nodes) <= 1 or len(components(nodes)) == 1


def graph_distance(W: Optional[Iterable[Coord]], v: Coord, w: Coord) -> float:
    """Hop distance between ``v`` and ``w`` in G(W); ``W=None`` means all of G.

    Returns ``math.inf`` when no path exists.
    """
    if W is not None:
        W = W if isinstance(W, (set, frozenset)) else set(W)
        if v not in W or w not in W:
            raise ValueError("both endpoints must belong to W")
    if v == w:
        return 0
    if W is None:
        return _lattice_norm(sub(w, v))
    seen = {v}
    frontier = [v]
    dist = 0
    while frontier:
        dist += 1
        nxt = []
        for u in frontier:
            for x in iter_neighbors(u):
                if x == w:
                    return dist
                if x in seen or x not in W:
                    continue
                seen.add(x)
                nxt.append(x)
        frontier = nxt
    return INF


def ball2_offsets() -> List[Coord]:
    """Offsets at lattice distance exactly 2."""
    one = {d.value for d in DIRECTIONS}
    two = set()
    for a in one:
        for b in one:
            c = add(a, b)
            if c != (0, 0, 0) and c not in one:
                two.add(c)
    return sorted(two)


_BALL2 = ball2_offsets()


def validate_object(o: ObjectSpec) -> ObjectReport:
    if not o.nodes:
        raise ValidationError("object has no nodes")
    bad = sorted(c for c in o.nodes if not is_node(c))
    if bad:
        return ObjectReport(connected=False, bad_nodes=bad)
    theta = o.nodes
    report = ObjectReport(connected=is_connected(theta))
    for v in sorted(theta):
        for off in _BALL2:
            w = add(v, off)
            if w not in theta or w < v:
                continue
            # distance two in G: need a common object neighbour
            if not any(x in theta for x in iter_neighbors(v) if _adjacent(x, w)):
                report.hole_width_violations.append((v, w))
    return report


def _adjacent(a: Coord, b: Coord) -> bool:
    d = (b[0] - a[0], b[1] - a[1], b[2] - a[2])
    return d in _UNIT


_UNIT = frozenset(d.value for d in DIRECTIONS)


def layer_candidates(theta: FrozenSet[Coord]) -> Set[Coord]:
    """All non-object nodes with an object neighbour."""
    out = set()
    for v in theta:
        for w in iter_neighbors(v):
            if w not in theta:
                out.add(w)
    return out


def coating_layer(o: ObjectSpec, p0: Coord) -> Set[Coord]:
    """Nodes adjacent to the object that are reachable from ``p0`` inside the layer."""
    theta = o.nodes
    if p0 in theta:
        raise ValidationError(f"p0 {list(p0)} lies inside the object")
    cand = layer_candidates(theta)
    if p0 not in cand:
        raise ValidationError(f"p0 {list(p0)} is not adjacent to the object")
    seen = {p0}
    queue = deque([p0])
    while queue:
        u = queue.popleft()
        for w in iter_neighbors(u):
            if w in cand and w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def exterior(theta: FrozenSet[Coord]) -> Set[Coord]:
    """Free nodes in the bounding box (padded by two) connected to its corner."""
    lo = [min(c[i] for c in theta) - 2 for i in range(3)]
    hi = [max(c[i] for c in theta) + 2 for i in range(3)]
    if sum(lo) % 2:
        lo[0] -= 1
    start = tuple(lo)

    def inside(c: Coord) -> bool:
        return all(lo[i] <= c[i] <= hi[i] for i in range(3))

    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in iter_neighbors(u):
            if w not in seen and w not in theta and inside(w):
                seen.add(w)
                queue.append(w)
    return seen


def default_p0(o: ObjectSpec) -> Coord:
    """Deterministic depot position on the outer surface.

    Minimises (direction rank, coordinate) over pairs of an object node and a
    direction leading to a free exterior node.
    """
    theta = o.nodes
    if not theta:
        raise ValidationError("object has no nodes")
    outside = exterior(theta)
    best = None
    for v in theta:
        for d in DIRECTIONS:
            w = add(v, d.value)
            if w in outside:
                key = (d.rank, w)
                if best is None or key < best:
                    best = key
    if best is None:
        raise ValidationError("object has no free exterior neighbour")
    return best[1]


def close_object(nodes: Iterable[Coord]) -> Set[Coord]:
    """Add common neighbours until every distance-two object pair has one."""
    theta = set(nodes)
    while True:
        report = validate_object(ObjectSpec(frozenset(theta)))
        if report.valid or not report.hole_width_violations:
            return theta
        for v, w in report.hole_width_violations:
            theta.add(min(x for x in iter_neighbors(v) if _adjacent(x, w)))


def _box(a: int, b: int, c: int, off: Coord = (0, 0, 0)) -> Set[Coord]:
    return {
        (x + off[0], y + off[1], z + off[2])
        for x in range(a)
        for y in range(b)
        for z in range(c)
        if (x + y + z + sum(off)) % 2 == 0
    }


def _ball(radius: int) -> Set[Coord]:
    r2 = 2 * radius
    out = set()
    for x in range(-r2, r2 + 1):
        for y in range(-r2, r2 + 1):
            for z in range(-r2, r2 + 1):
                if (x + y + z) % 2 == 0 and _lattice_norm((x, y, z)) <= radius:
                    out.add((x, y, z))
    return out


def _lattice_norm(c: Coord) -> int:
    """Hop distance from the origin in the FCC graph."""
    a = sorted(abs(v) for v in c)
    return max(a[2], (a[0] + a[1] + a[2]) // 2)


def _torus(size: int) -> Set[Coord]:
    r = size + 2
    out = set()
    for x in range(-r, r + 1):
        for y in range(-r, r + 1):
            for z in (0, 1):
                if (x + y + z) % 2 == 0 and max(abs(x), abs(y)) == r:
                    out.add((x, y, z))
    return out


def _notched_slab(size: int, seed: int) -> Set[Coord]:
    a = size + 3
    rng = random.Random(seed)
    cx, cy = rng.choice([(0, 0), (a - 2, 0), (0, a - 2), (a - 2, a - 2)])
    return _box(a, a, 2) - _box(2, 2, 2, (cx, cy, 0))


def _blob(size: int, seed: int) -> Set[Coord]:
    rng = random.Random(seed)
    theta = {(0, 0, 0)}
    order = [(0, 0, 0)]
    while len(theta) < size:
        v = rng.choice(order)
        w = add(v, rng.choice(DIRECTIONS).value)
        if w not in theta:
            theta.add(w)
            order.append(w)
    return theta


GENERATORS = ("ball", "line", "torus", "notched_slab", "blob")


def generate_object(kind: str, size: int, seed: int = 0) -> ObjectSpec:
    """Deterministic test objects.

    ``ball`` has lattice radius ``size - 1``; ``line`` is ``size`` nodes along
    UNE; ``torus`` is a square ring of side ``2 size + 5``; ``notched_slab``
    is a two-layer slab with a corner notch picked by ``seed``; ``blob`` grows
    ``size`` random nodes from the origin.  Shapes other than balls and lines
    are closed under common neighbours so they satisfy the hole-width rule.
    """
    if size < 1:
        raise ValidationError("size must be at least 1")
    if kind == "ball":
        nodes = _ball(size - 1)
    elif kind == "line":
        nodes = {(i, i, 0) for i in range(size)}
    elif kind == "torus":
        nodes = close_object(_torus(size))
    elif kind == "notched_slab":
        nodes = close_object(_notched_slab(size, seed))
    elif kind == "blob":
        nodes = close_object(_blob(size, seed))
    else:
        raise ValidationError(f"unknown object kind {kind!r}; expected one of {GENERATORS}")
    o = ObjectSpec(frozenset(nodes), f"{kind}-{size}-{seed}")
    report = validate_object(o)
    if not report.valid:
        raise ValidationError(f"generated {kind} is invalid: {report.describe()}")
    return o
