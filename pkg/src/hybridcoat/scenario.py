"""Scenario files: parsing and validation, then preparation of a run.

A scenario is a JSON document::

    {"object": [[x, y, z], ...] | {"generator": {"kind": ..., "size": ..., "seed": ...}},
     "p0": [x, y, z] | "auto",
     "mode": "direct" | "emulated" | "auto",
     "limits": {"max_steps": N},
     "tiled": [[x, y, z], ...],
     "monitors": {"invariants": false, "count_probes": true}}

``"fixture": name`` may replace ``"object"`` to run on one of the bundled
abstract triangulations; ``p0`` is then a node id.  ``tiled`` lists extra
initially tiled layer nodes besides ``p0``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from .lattice import Coord
from .surface import (
    FIXTURES,
    ArrangementReport,
    SurfaceError,
    SurfaceGraph,
    TriangulationReport,
    check_triangulation_assumptions,
    load_fixture,
    surface_of,
)
from .world import GENERATORS, ObjectSpec, ValidationError, default_p0, generate_object, validate_object

MODES = ("direct", "emulated", "auto")


@dataclass
class Scenario:
    object: Optional[List[Coord]] = None
    generator: Optional[Dict[str, Any]] = None
    fixture: Optional[str] = None
    p0: Any = "auto"
    mode: str = "auto"
    max_steps: Optional[int] = None
    tiled: List[Any] = field(default_factory=list)
    check_invariants: bool = False
    count_probes: bool = True
    seed: int = 0

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Scenario":
        if not isinstance(data, dict):
            raise ValidationError("scenario must be a JSON object")
        known = {"object", "fixture", "p0", "mode", "limits", "tiled", "monitors", "seed"}
        extra = sorted(set(data) - known)
        if extra:
            raise ValidationError(f"unknown scenario keys: {extra}")
        sc = cls(seed=int(data.get("seed", 0)))
        if ("object" in data) == ("fixture" in data):
            raise ValidationError("scenario needs exactly one of 'object' and 'fixture'")
        if "fixture" in data:
            if data["fixture"] not in FIXTURES:
                raise ValidationError(f"unknown fixture {data['fixture']!r}; choose from {list(FIXTURES)}")
            sc.fixture = data["fixture"]
        else:
            obj = data["object"]
            if isinstance(obj, dict):
                gen = obj.get("generator")
                if not isinstance(gen, dict) or "kind" not in gen or "size" not in gen:
                    raise ValidationError("generator spec needs 'kind' and 'size'")
                if gen["kind"] not in GENERATORS:
                    raise ValidationError(f"unknown generator {gen['kind']!r}; choose from {list(GENERATORS)}")
                sc.generator = {
                    "kind": gen["kind"],
                    "size": int(gen["size"]),
                    "seed": int(gen.get("seed", sc.seed)),
                }
            elif isinstance(obj, list):
                sc.object = [_coord(c, "object") for c in obj]
            else:
                raise ValidationError("'object' must be a node list or a generator spec")
        p0 = data.get("p0", "auto")
        if p0 != "auto":
            p0 = int(p0) if sc.fixture else _coord(p0, "p0")
        sc.p0 = p0
        sc.mode = data.get("mode", "auto")
        if sc.mode not in MODES:
            raise ValidationError(f"mode must be one of {list(MODES)}")
        limits = data.get("limits", {}) or {}
        if limits.get("max_steps") is not None:
            sc.max_steps = int(limits["max_steps"])
            if sc.max_steps < 0:
                raise ValidationError("max_steps must be non-negative")
        sc.tiled = [int(t) if sc.fixture else _coord(t, "tiled") for t in data.get("tiled", [])]
        mon = data.get("monitors", {}) or {}
        sc.check_invariants = bool(mon.get("invariants", False))
        sc.count_probes = bool(mon.get("count_probes", True))
        return sc

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str) -> "Scenario":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def _coord(c: Any, what: str) -> Coord:
    if not isinstance(c, (list, tuple)) or len(c) != 3 or not all(isinstance(x, int) for x in c):
        raise ValidationError(f"{what}: expected [x, y, z] integers, got {c!r}")
    return (c[0], c[1], c[2])


@dataclass
class Prepared:
    """Everything a run needs, derived once from a scenario."""

    scenario: Scenario
    surface: SurfaceGraph
    p0: int
    tiled: List[int]
    mode: str
    object: Optional[ObjectSpec] = None
    layer: Optional[set] = None
    arrangements: Optional[ArrangementReport] = None
    triangulation: Optional[TriangulationReport] = None

    @property
    def smooth(self) -> bool:
        if self.arrangements is not None:
            return self.arrangements.smooth
        return self.surface.max_degree <= 6

    def node_name(self, v: int) -> str:
        if self.surface.coords is not None:
            return "[" + ",".join(map(str, self.surface.coords[v])) + "]"
        return str(v)


def prepare(sc: Scenario) -> Prepared:
    """Build the surface, resolve p0 and the mode; raise ValidationError."""
    try:
        if sc.fixture:
            return _prepare_fixture(sc)
        return _prepare_object(sc)
    except SurfaceError as exc:
        raise ValidationError(str(exc)) from None


def _prepare_fixture(sc: Scenario) -> Prepared:
    sg = load_fixture(sc.fixture)
    p0 = 0 if sc.p0 == "auto" else sc.p0
    if not 0 <= p0 < sg.n:
        raise ValidationError(f"p0 {p0} is not a node of {sc.fixture}")
    tiled = sorted({p0, *sc.tiled})
    for t in tiled:
        if not 0 <= t < sg.n:
            raise ValidationError(f"tiled node {t} is not a node of {sc.fixture}")
    rep = check_triangulation_assumptions(sg, True, initially_tiled=tiled)
    mode = _resolve_mode(sc, sg.max_degree <= 6)
    return Prepared(sc, sg, p0, tiled, mode, triangulation=rep)


def _prepare_object(sc: Scenario) -> Prepared:
    if sc.generator:
        g = sc.generator
        o = generate_object(g["kind"], g["size"], g["seed"])
    else:
        o = ObjectSpec.of(sc.object)
        if not o.nodes:
            raise ValidationError("object is empty")
        rep = validate_object(o)
        if not rep.valid:
            raise ValidationError(rep.describe())
    p0c = default_p0(o) if sc.p0 == "auto" else sc.p0
    L, gd, arr, sg = surface_of(o, p0c)
    if sg.n < 2:
        raise ValidationError("coating layer has fewer than two nodes")
    p0 = sg.index_of(p0c)
    tiled = {p0}
    for c in sc.tiled:
        if c not in L:
            raise ValidationError(f"tiled node {list(c)} is not in the coating layer")
        tiled.add(sg.index_of(c))
    mode = _resolve_mode(sc, arr.smooth)
    tri = check_triangulation_assumptions(sg, mode == "direct", initially_tiled=tiled)
    return Prepared(sc, sg, p0, sorted(tiled), mode, o, L, arr, tri)


def _resolve_mode(sc: Scenario, smooth: bool) -> str:
    if sc.mode == "auto":
        return "direct" if smooth else "emulated"
    if sc.mode == "emulated" and sc.tiled:
        raise ValidationError("emulated mode starts from the depot alone; drop 'tiled'")
    return sc.mode


def inspect_report(pr: Prepared) -> Dict[str, Any]:
    """Summary statistics for a prepared scenario."""
    from .engine import CoatingRun

    sg = pr.surface
    run = CoatingRun(sg, pr.p0, tiled=pr.tiled)
    verdict = run.check_coatable()
    out: Dict[str, Any] = {
        "label": sg.label or pr.scenario.fixture or "",
        "theta": len(pr.object) if pr.object is not None else 0,
        "n": sg.n,
        "max_degree": sg.max_degree,
        "smooth": pr.smooth,
        "genus": sg.genus(),
        "coatable": verdict.coatable,
        "coatability_problems": verdict.failures(),
        "recommended_mode": "direct" if pr.smooth else "emulated",
        "mode": pr.mode,
        "p0": pr.node_name(pr.p0),
        "s0": pr.node_name(run.s0),
    }
    if pr.arrangements is not None:
        out["arrangements"] = pr.arrangements.histogram()
    if pr.triangulation is not None:
        out["triangulation_problems"] = pr.triangulation.problems
    return out
