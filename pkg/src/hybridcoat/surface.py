"""Surface graphs: the object surface graph, its triangulation and rotation systems.

An FCC object is wrapped by its coating layer ``L``.  Faces of the layer
graph come from the interstitial holes of the lattice that touch the object:
every tetrahedral or octahedral hole whose node set is split between object
and layer contributes one polygon (the ring of layer nodes around the object
part of the hole).  Rings are cut along layer-graph chords, leaving triangles
and axis-aligned tetragons; tetragons are then split by one diagonal chosen
uniformly per orientation class.

``SurfaceGraph`` is the common currency of the engine: integer node ids, an
optional lattice embedding and a counter-clockwise (outward normal) rotation
at every node.
"""

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations, product
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .lattice import Coord, adjacent, iter_neighbors, sub, vector_rank
from .world import ObjectSpec, ValidationError


class SurfaceError(ValueError):
    """The input does not describe a closed, orientable triangulated surface."""


class UnclassifiableArrangement(SurfaceError):
    """A local face arrangement outside the known catalogue."""


# --------------------------------------------------------------------------
# SurfaceGraph


@dataclass
class SurfaceGraph:
    rotation: List[Tuple[int, ...]]
    faces: List[Tuple[int, int, int]]
    coords: Optional[List[Coord]] = None
    # ordered diagonal (a, b) -> intermediate node of its two-move realisation
    via: Dict[Tuple[int, int], int] = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        self._nbrs = [frozenset(r) for r in self.rotation]
        self._pos = [{v: i for i, v in enumerate(r)} for r in self.rotation]
        self._index = (
            {c: i for i, c in enumerate(self.coords)} if self.coords is not None else None
        )

    @property
    def n(self) -> int:
        return len(self.rotation)

    @property
    def max_degree(self) -> int:
        return max((len(r) for r in self.rotation), default=0)

    @property
    def embedded(self) -> bool:
        return self.coords is not None

    def nodes(self) -> range:
        return range(len(self.rotation))

    def degree(self, v: int) -> int:
        return len(self.rotation[v])

    def neighbors(self, v: int) -> FrozenSet[int]:
        return self._nbrs[v]

    def is_adjacent(self, u: int, v: int) -> bool:
        return v in self._nbrs[u]

    def ccw_next(self, u: int, v: int) -> int:
        r = self.rotation[u]
        return r[(self._pos[u][v] + 1) % len(r)]

    def cw_next(self, u: int, v: int) -> int:
        r = self.rotation[u]
        return r[(self._pos[u][v] - 1) % len(r)]

    def position(self, u: int, v: int) -> int:
        return self._pos[u][v]

    def index_of(self, c: Coord) -> int:
        if self._index is None:
            raise ValueError("surface has no lattice embedding")
        return self._index[tuple(c)]

    def edges(self) -> List[Tuple[int, int]]:
        return [(u, v) for u in self.nodes() for v in self.rotation[u] if u < v]

    def vector(self, u: int, v: int) -> Coord:
        return sub(self.coords[v], self.coords[u])

    def edge_rank(self, u: int, v: int) -> int:
        """Rank of edge u->v in the fixed order used for tie-breaking and bit slots."""
        if self.coords is not None:
            return vector_rank(self.vector(u, v))
        return v

    def genus(self) -> int:
        chi = self.n - len(self.edges()) + len(self.faces)
        return (2 - chi) // 2

    def physical_moves(self, u: int, v: int) -> List[int]:
        """Node sequence realising the move u->v on the underlying layer graph."""
        mid = self.via.get((u, v))
        return [v] if mid is None else [mid, v]

    def mirrored(self) -> "SurfaceGraph":
        """Same surface with the opposite chirality at every node."""
        return SurfaceGraph(
            rotation=[tuple(reversed(r)) for r in self.rotation],
            faces=[(a, c, b) for a, b, c in self.faces],
            coords=self.coords,
            via=dict(self.via),
            label=self.label,
        )

    # JSON schema shared by export and fixture import
    def to_json(self) -> dict:
        out = {
            "label": self.label,
            "nodes": [
                {"id": v, **({"coord": list(self.coords[v])} if self.coords else {})}
                for v in self.nodes()
            ],
            "rotation": [list(r) for r in self.rotation],
            "faces": [list(f) for f in self.faces],
        }
        if self.via:
            out["via"] = [[a, b, m] for (a, b), m in sorted(self.via.items())]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "SurfaceGraph":
        nodes = data["nodes"]
        n = len(nodes)
        if sorted(nd["id"] for nd in nodes) != list(range(n)):
            raise SurfaceError("node ids must be 0..n-1")
        coords = None
        if nodes and all("coord" in nd and len(nd["coord"]) == 3 for nd in nodes):
            if all(isinstance(x, int) for nd in nodes for x in nd["coord"]):
                coords = [None] * n
                for nd in nodes:
                    coords[nd["id"]] = tuple(nd["coord"])
        faces = [tuple(f) for f in data["faces"]]
        if "rotation" in data:
            sg = cls(
                rotation=[tuple(r) for r in data["rotation"]],
                faces=faces,
                coords=coords,
                via={(a, b): m for a, b, m in data.get("via", [])},
                label=data.get("label", ""),
            )
            _check_rotation_matches_faces(sg)
            return sg
        return from_faces(n, faces, coords=coords, label=data.get("label", ""))


def _check_rotation_matches_faces(sg: SurfaceGraph) -> None:
    for a, b, c in sg.faces:
        for u, v, w in ((a, b, c), (b, c, a), (c, a, b)):
            if v not in sg.neighbors(u) or sg.ccw_next(u, v) != w:
                raise SurfaceError(f"rotation at {u} disagrees with face {(a, b, c)}")


def orient_faces(faces: Sequence[Sequence[int]]) -> List[Tuple[int, ...]]:
    """Propagate the orientation of the first face of every component.

    Adjacent faces must traverse their shared edge in opposite directions.
    Raises ``SurfaceError`` for non-orientable or non-manifold input.
    """
    faces = [tuple(f) for f in faces]
    by_edge: Dict[FrozenSet[int], List[int]] = {}
    for i, f in enumerate(faces):
        for j in range(len(f)):
            by_edge.setdefault(frozenset((f[j], f[(j + 1) % len(f)])), []).append(i)
    for e, fs in by_edge.items():
        if len(fs) != 2:
            raise SurfaceError(f"edge {sorted(e)} lies in {len(fs)} faces")
    out: List[Optional[Tuple[int, ...]]] = [None] * len(faces)
    for seed in range(len(faces)):
        if out[seed] is not None:
            continue
        out[seed] = faces[seed]
        queue = deque([seed])
        while queue:
            i = queue.popleft()
            f = out[i]
            for j in range(len(f)):
                a, b = f[j], f[(j + 1) % len(f)]
                for k in by_edge[frozenset((a, b))]:
                    if k == i:
                        continue
                    g = faces[k]
                    # k must contain the edge as b->a
                    want = g if _has_directed(g, b, a) else tuple(reversed(g))
                    if out[k] is None:
                        out[k] = want
                        queue.append(k)
                    elif not _has_directed(out[k], b, a):
                        raise SurfaceError("surface is not orientable")
    return out


def _has_directed(f: Sequence[int], a: int, b: int) -> bool:
    k = len(f)
    return any(f[i] == a and f[(i + 1) % k] == b for i in range(k))


def rotation_from_faces(n: int, faces: Sequence[Tuple[int, int, int]]) -> List[Tuple[int, ...]]:
    succ: List[Dict[int, int]] = [dict() for _ in range(n)]
    for a, b, c in faces:
        for u, v, w in ((a, b, c), (b, c, a), (c, a, b)):
            if v in succ[u]:
                raise SurfaceError(f"orientation conflict at node {u} (edge to {v})")
            succ[u][v] = w
    rotation = []
    for u in range(n):
        d = succ[u]
        if not d:
            raise SurfaceError(f"node {u} lies in no face")
        start = min(d)
        cyc = [start]
        x = d[start]
        while x != start:
            if x not in d or len(cyc) > len(d):
                raise SurfaceError(f"faces around node {u} do not close up")
            cyc.append(x)
            x = d[x]
        if len(cyc) != len(d):
            raise SurfaceError(f"node {u} has a pinched neighbourhood")
        rotation.append(tuple(cyc))
    return rotation


def from_faces(
    n: int,
    faces: Sequence[Sequence[int]],
    coords: Optional[List[Coord]] = None,
    label: str = "",
    oriented: bool = False,
) -> SurfaceGraph:
    faces = [tuple(f) for f in faces]
    if any(len(f) != 3 for f in faces):
        raise SurfaceError("all faces must be triangles")
    if not oriented:
        faces = orient_faces(faces)
    rotation = rotation_from_faces(n, faces)
    return SurfaceGraph(rotation=rotation, faces=list(faces), coords=coords, label=label)


def rotation_order(sg: SurfaceGraph, v: int) -> Tuple[int, ...]:
    """Counter-clockwise neighbour order of ``v`` (outward normal convention)."""
    return sg.rotation[v]


# --------------------------------------------------------------------------
# Abstract fixtures


def load_fixture(name: str) -> SurfaceGraph:
    """Load one of the bundled abstract triangulations (platonic solids)."""
    path = resources.files("hybridcoat") / "data" / f"{name}.json"
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ValueError(f"unknown fixture {name!r}") from None
    return SurfaceGraph.from_json(json.loads(text))


FIXTURES = ("tetrahedron", "octahedron", "icosahedron")


# --------------------------------------------------------------------------
# Layer graph with triangles and tetragons


@dataclass
class DiamondFace:
    nodes: Tuple[Coord, ...]  # counter-clockwise seen from outside
    orientation: Optional[int] = None  # 1..3 for tetragons
    hole: Tuple = ()

    @property
    def is_tetragon(self) -> bool:
        return len(self.nodes) == 4


@dataclass
class DiamondGraph:
    object: ObjectSpec
    nodes: List[Coord]
    edges: Set[FrozenSet[Coord]]
    faces: List[DiamondFace]

    def tetragons(self) -> List[DiamondFace]:
        return [f for f in self.faces if f.is_tetragon]


def _object_neighbors(theta: FrozenSet[Coord], v: Coord) -> List[Coord]:
    return [w for w in iter_neighbors(v) if w in theta]


def diamond_edges(theta: FrozenSet[Coord], L: Set[Coord]) -> Set[FrozenSet[Coord]]:
    """Layer edges whose endpoints have equal or adjacent object neighbours."""
    edges = set()
    objn = {v: _object_neighbors(theta, v) for v in L}
    for v in L:
        for w in iter_neighbors(v):
            if w in L and v < w:
                if any(a == b or adjacent(a, b) for a in objn[v] for b in objn[w]):
                    edges.add(frozenset((v, w)))
    return edges


def _holes_touching(theta: FrozenSet[Coord]):
    """Tetrahedral and octahedral holes with at least one object node.

    Hole centres are stored doubled so they stay integral.
    """
    seen = set()
    for v in theta:
        x, y, z = v
        for dx, dy, dz in product((-1, 1), repeat=3):
            seen.add(("T", (2 * x + dx, 2 * y + dy, 2 * z + dz)))
        for ax in range(3):
            for s in (-1, 1):
                c = [2 * x, 2 * y, 2 * z]
                c[ax] += 2 * s
                seen.add(("O", tuple(c)))
    for kind, c2 in sorted(seen):
        yield kind, c2, _hole_nodes(kind, c2)


def _hole_nodes(kind: str, c2: Coord) -> List[Coord]:
    if kind == "T":
        out = []
        for dx, dy, dz in product((-1, 1), repeat=3):
            p = ((c2[0] + dx) // 2, (c2[1] + dy) // 2, (c2[2] + dz) // 2)
            if sum(p) % 2 == 0:
                out.append(p)
        return out
    c = (c2[0] // 2, c2[1] // 2, c2[2] // 2)
    out = []
    for ax in range(3):
        for s in (-1, 1):
            p = list(c)
            p[ax] += s
            out.append(tuple(p))
    return out


def _hole_faces(kind: str, c2: Coord, nodes: List[Coord]):
    if kind == "T":
        return list(combinations(nodes, 3))
    c = (c2[0] // 2, c2[1] // 2, c2[2] // 2)
    return [
        ((c[0] + sx, c[1], c[2]), (c[0], c[1] + sy, c[2]), (c[0], c[1], c[2] + sz))
        for sx, sy, sz in product((-1, 1), repeat=3)
    ]


def _rings(kind, c2, nodes, theta) -> List[List[Coord]]:
    """Cyclic sequences of free hole nodes around the object part of a hole."""
    cut_faces: Dict[FrozenSet[Coord], list] = {}
    for f in _hole_faces(kind, c2, nodes):
        inside = [n in theta for n in f]
        if all(inside) or not any(inside):
            continue
        cuts = [frozenset((a, b)) for a, b in combinations(f, 2) if (a in theta) != (b in theta)]
        for e in cuts:
            cut_faces.setdefault(e, []).append((f, cuts))
    rings = []
    seen = set()
    for e0 in sorted(cut_faces, key=sorted):
        if e0 in seen:
            continue
        cycle = [e0]
        seen.add(e0)
        prev, e = None, e0
        while True:
            (f1, c1), (f2, c2_) = cut_faces[e]
            f, cuts = (f1, c1) if f1 != prev else (f2, c2_)
            nxt = cuts[0] if cuts[1] == e else cuts[1]
            prev = f
            if nxt == e0:
                break
            cycle.append(nxt)
            seen.add(nxt)
            e = nxt
        seq = [next(n for n in ed if n not in theta) for ed in cycle]
        merged: List[Coord] = []
        for n in seq:
            if not merged or merged[-1] != n:
                merged.append(n)
        while len(merged) > 1 and merged[0] == merged[-1]:
            merged.pop()
        rings.append(_drop_spurs(merged))
    return rings


def _drop_spurs(ring: List[Coord]) -> List[Coord]:
    """Collapse back-and-forth steps ``a, b, a`` of a cyclic ring.

    A ring retraces itself where a free path is pinched between object nodes
    of the same hole; such stretches enclose no area.
    """
    ring = list(ring)
    changed = True
    while changed and len(ring) >= 3:
        changed = False
        k = len(ring)
        for i in range(k):
            if ring[i - 1] == ring[(i + 1) % k]:
                drop = {i, (i + 1) % k}
                ring = [n for j, n in enumerate(ring) if j not in drop]
                changed = True
                break
    return ring


def _newell(points: Sequence[Coord]) -> Tuple[float, float, float]:
    nx = ny = nz = 0.0
    k = len(points)
    for i in range(k):
        x1, y1, z1 = points[i]
        x2, y2, z2 = points[(i + 1) % k]
        nx += (y1 - y2) * (z1 + z2)
        ny += (z1 - z2) * (x1 + x2)
        nz += (x1 - x2) * (y1 + y2)
    return nx, ny, nz


def _split_by_chords(ring: List[Coord], edges) -> List[List[Coord]]:
    pieces, done = [ring], []
    while pieces:
        pc = pieces.pop()
        k = len(pc)
        chord = None
        for i in range(k):
            for j in range(i + 2, k):
                if i == 0 and j == k - 1:
                    continue
                if frozenset((pc[i], pc[j])) in edges:
                    chord = (i, j)
                    break
            if chord:
                break
        if chord is None:
            done.append(pc)
        else:
            i, j = chord
            pieces.append(pc[i : j + 1])
            pieces.append(pc[j:] + pc[: i + 1])
    return done


def tetragon_orientation(nodes: Sequence[Coord]) -> Tuple[int, Tuple[Coord, Coord]]:
    """Orientation class (1..3) of an axis-aligned tetragon and its chosen diagonal.

    (1) v, v+NE, v+NE+USE, v+USE lies in a plane of constant y,
    (2) v, v+NW, v+NW+UNE, v+UNE in a plane of constant z,
    (3) v, v+N, v+N+UW, v+UW in a plane of constant x.
    The diagonal always joins the base corner v to v+A+B.
    """
    pts = list(nodes)
    sx = [sum(p[i] for p in pts) for i in range(3)]
    if any(s % 4 for s in sx):
        raise SurfaceError(f"tetragon {pts} is not centred on an octahedral hole")
    c = tuple(s // 4 for s in sx)
    normals = [ax for ax in range(3) if all(p[ax] == c[ax] for p in pts)]
    if len(normals) != 1:
        raise SurfaceError(f"tetragon {pts} is not axis aligned")
    normal = normals[0]
    orientation, diag_axis = {1: (1, 0), 2: (2, 1), 0: (3, 1)}[normal]
    a = list(c)
    b = list(c)
    a[diag_axis] -= 1
    b[diag_axis] += 1
    a, b = tuple(a), tuple(b)
    if a not in pts or b not in pts:
        raise SurfaceError(f"tetragon {pts} has unexpected corners")
    return orientation, (a, b)


def build_g_diamond(o: ObjectSpec, L: Set[Coord]) -> DiamondGraph:
    if not L:
        raise ValidationError("coating layer is empty")
    theta = o.nodes
    edges = diamond_edges(theta, L)
    faces: List[DiamondFace] = []
    for kind, c2, nodes in _holes_touching(theta):
        inside = [n for n in nodes if n in theta]
        if len(inside) == len(nodes):
            continue
        for ring in _rings(kind, c2, nodes, theta):
            in_layer = [n in L for n in ring]
            if not any(in_layer):
                continue
            if not all(in_layer):
                raise SurfaceError(f"hole {kind}{c2} mixes layer and unreachable nodes: {ring}")
            if len(ring) < 3:
                continue
            if len(set(ring)) != len(ring):
                raise SurfaceError(f"hole {kind}{c2} wraps a layer node twice: {ring}")
            normal = _newell(ring)
            rc = [sum(p[i] for p in inside) / len(inside) for i in range(3)]
            fc = [sum(p[i] for p in ring) / len(ring) for i in range(3)]
            if sum(normal[i] * (fc[i] - rc[i]) for i in range(3)) < 0:
                ring = ring[::-1]
            for piece in _split_by_chords(ring, edges):
                if len(piece) == 3:
                    faces.append(DiamondFace(tuple(piece), None, (kind, c2)))
                elif len(piece) == 4:
                    orientation, _ = tetragon_orientation(piece)
                    faces.append(DiamondFace(tuple(piece), orientation, (kind, c2)))
                else:
                    raise SurfaceError(f"hole {kind}{c2} yields a {len(piece)}-gon: {piece}")
    gd = DiamondGraph(object=o, nodes=sorted(L), edges=edges, faces=faces)
    _check_diamond(gd)
    return gd


def _check_diamond(gd: DiamondGraph) -> None:
    count: Counter = Counter()
    for f in gd.faces:
        k = len(f.nodes)
        for i in range(k):
            count[frozenset((f.nodes[i], f.nodes[(i + 1) % k]))] += 1
    for e in count:
        if e not in gd.edges:
            a, b = sorted(e)
            raise SurfaceError(f"face edge {list(a)}-{list(b)} is not a layer-graph edge")
    for e in gd.edges:
        if count[e] != 2:
            a, b = sorted(e)
            raise SurfaceError(f"edge {list(a)}-{list(b)} lies in {count[e]} faces")


# --------------------------------------------------------------------------
# Arrangement classification


@dataclass(frozen=True)
class FaceArrangement:
    """Local face pattern around one layer node.

    ``case_id`` is the canonical cyclic word of incident faces: ``T`` for a
    triangle, ``Q`` for a tetragon whose chosen diagonal avoids the node and
    ``D`` for one whose diagonal ends at it.
    """

    case_id: str
    center: Coord

    @property
    def degree_after_triangulation(self) -> int:
        return len(self.case_id) + self.case_id.count("D")

    @property
    def smooth(self) -> bool:
        return ARRANGEMENTS[self.case_id]


# canonical word -> smooth?  Closed catalogue; anything else is a hard failure.
ARRANGEMENTS: Dict[str, bool] = {
    "QTQT": True,
    "DTQT": True,
    "QTTTT": True,
    "DQDQ": True,
    "DQTTQ": True,
    "DQTTT": True,
    "DTDT": True,
    "DTTTT": True,
    "QTTQTT": True,
    "QTTTTT": True,
    "TTTTTT": True,
    "DQDTT": False,
    "DTTQTT": False,
    "DTTTTT": False,
    "DTTDTT": False,
    "DQTTTT": False,
    "QTTTTTT": False,
    "TTTTTTT": False,
    "DTTTTTT": False,
    "TTTTTTTT": False,
}


@dataclass
class ArrangementReport:
    arrangements: List[FaceArrangement]
    smooth: bool
    witnesses: List[FaceArrangement]

    def histogram(self) -> Dict[str, int]:
        return dict(sorted(Counter(a.case_id for a in self.arrangements).items()))


def _canonical_word(word: str) -> str:
    cands = []
    for w in (word, word[::-1]):
        cands.extend(w[i:] + w[:i] for i in range(len(w)))
    return min(cands)


def _diagonal(face: DiamondFace) -> Tuple[Coord, Coord]:
    return tetragon_orientation(face.nodes)[1]


def classify_arrangements(gd: DiamondGraph) -> ArrangementReport:
    succ: Dict[Coord, Dict[Coord, DiamondFace]] = {}
    for f in gd.faces:
        k = len(f.nodes)
        for i in range(k):
            succ.setdefault(f.nodes[i], {})[f.nodes[(i + 1) % k]] = f
    out = []
    for v in gd.nodes:
        d = succ.get(v)
        if not d:
            raise UnclassifiableArrangement(f"node {list(v)} lies in no face")
        start = min(d)
        word = []
        x = start
        for _ in range(len(d) + 1):
            f = d[x]
            if f.is_tetragon:
                word.append("D" if v in _diagonal(f) else "Q")
            else:
                word.append("T")
            k = len(f.nodes)
            x = f.nodes[(f.nodes.index(v) - 1) % k]
            if x == start:
                break
        else:
            raise UnclassifiableArrangement(f"faces around {list(v)} do not close up")
        if len(word) != len(d):
            raise UnclassifiableArrangement(f"node {list(v)} has a pinched neighbourhood")
        case = _canonical_word("".join(word))
        if case not in ARRANGEMENTS:
            raise UnclassifiableArrangement(
                f"node {list(v)} has unknown arrangement {case!r}; incident faces: "
                + json.dumps([[list(p) for p in d[y].nodes] for y in sorted(d)])
            )
        out.append(FaceArrangement(case, v))
    witnesses = [a for a in out if not ARRANGEMENTS[a.case_id]]
    return ArrangementReport(out, not witnesses, witnesses)


# --------------------------------------------------------------------------
# Triangulation


def triangulate(gd: DiamondGraph) -> SurfaceGraph:
    coords = list(gd.nodes)
    index = {c: i for i, c in enumerate(coords)}
    tris: List[Tuple[int, int, int]] = []
    via: Dict[Tuple[int, int], int] = {}
    for f in gd.faces:
        ids = [index[c] for c in f.nodes]
        if not f.is_tetragon:
            tris.append(tuple(ids))
            continue
        a, b = _diagonal(f)
        i = f.nodes.index(a)
        r = ids[i:] + ids[:i]  # a, x, b, y in face order
        tris.append((r[0], r[1], r[2]))
        tris.append((r[2], r[3], r[0]))
        ia, ib, x, y = r[0], r[2], r[1], r[3]
        for s, t in ((ia, ib), (ib, ia)):
            via[(s, t)] = min((x, y), key=lambda m: vector_rank(sub(coords[m], coords[s])))
    tris = _canonical_faces(tris)
    rotation = rotation_from_faces(len(coords), tris)
    return SurfaceGraph(rotation=rotation, faces=tris, coords=coords, via=via, label=gd.object.label)


def _canonical_faces(tris):
    out = []
    for f in tris:
        i = f.index(min(f))
        out.append(tuple(f[i:] + f[:i]))
    return sorted(out)


def surface_of(o: ObjectSpec, p0: Coord):
    """Layer, layer graph, arrangement report and triangulation of an object."""
    from .world import coating_layer

    L = coating_layer(o, p0)
    gd = build_g_diamond(o, L)
    report = classify_arrangements(gd)
    return L, gd, report, triangulate(gd)


# --------------------------------------------------------------------------
# Assumption checks


@dataclass
class TriangulationReport:
    closed: bool
    orientable: bool
    chordless: bool
    degree_ok: bool
    max_degree: int
    degree_bound: int
    edge_orientations: Optional[int]
    genus: Optional[int]
    problems: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.closed and self.orientable and self.chordless and self.degree_ok


def boundary_is_chordless(sg: SurfaceGraph, v: int) -> bool:
    r = sg.rotation[v]
    k = len(r)
    if k < 3:
        return False
    for i in range(k):
        if not sg.is_adjacent(r[i], r[(i + 1) % k]):
            return False
        for j in range(i + 2, k):
            if i == 0 and j == k - 1:
                continue
            if sg.is_adjacent(r[i], r[j]):
                return False
    return True


def check_triangulation_assumptions(
    sg: SurfaceGraph, for_direct_use: bool, initially_tiled: Iterable[int] = ()
) -> TriangulationReport:
    """Closedness, orientation, chordless boundaries and the degree bound.

    Nodes in ``initially_tiled`` never become empty, so the degree bound is
    not applied to them.
    """
    problems = []
    count: Counter = Counter()
    directed = Counter()
    for a, b, c in sg.faces:
        for u, v in ((a, b), (b, c), (c, a)):
            count[frozenset((u, v))] += 1
            directed[(u, v)] += 1
    edges = {frozenset(e) for e in sg.edges()}
    closed = all(count[e] == 2 for e in edges) and set(count) == edges
    if not closed:
        problems.append("some edge does not lie in exactly two faces")
    orientable = all(c == 1 for c in directed.values())
    if not orientable:
        problems.append("faces are not coherently oriented")
    bad = [v for v in sg.nodes() if not boundary_is_chordless(sg, v)]
    if bad:
        problems.append(f"non-chordless boundary at {bad[:5]}")
    bound = 6 if for_direct_use else 8
    fixed = set(initially_tiled)
    emptiable = max((sg.degree(v) for v in sg.nodes() if v not in fixed), default=0)
    if emptiable > bound:
        problems.append(f"max degree {emptiable} exceeds {bound}")
    orient = None
    if sg.coords is not None:
        orient = len({sg.vector(u, v) for u in sg.nodes() for v in sg.rotation[u]})
    genus = None
    chi = sg.n - len(edges) + len(sg.faces)
    if closed and chi % 2 == 0 and chi <= 2:
        genus = (2 - chi) // 2
    elif closed:
        problems.append(f"Euler characteristic {chi} is not that of a closed orientable surface")
    return TriangulationReport(
        closed=closed and genus is not None,
        orientable=orientable,
        chordless=not bad,
        degree_ok=emptiable <= bound,
        max_degree=sg.max_degree,
        degree_bound=bound,
        edge_orientations=orient,
        genus=genus,
        problems=problems,
    )
