"""Executing prepared scenarios and collecting their artifacts."""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from .emulation import Emulation, EmulationError
from .engine import CoatingRun, RunAborted
from .oracles import AccountingMonitor, InvariantMonitor, InvariantViolation
from .scenario import Prepared

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUN = 3
EXIT_VERIFY = 4


@dataclass
class RunResult:
    mode: str
    complete: bool
    steps: int
    probe_steps: int
    total_steps: int
    placements: int
    trace: List[str]
    frames: List[Dict[str, Any]] = field(default_factory=list)
    failure: Optional[Dict[str, Any]] = None
    type_changes: int = 0
    codes_used: int = 0
    physical_steps: int = 0
    consistent: Optional[bool] = None
    invariant_checks: int = 0

    @property
    def exit_code(self) -> int:
        if self.failure is None:
            return EXIT_OK if self.complete else EXIT_RUN
        return EXIT_VERIFY if self.failure["kind"] == "verification" else EXIT_RUN

    def summary(self) -> Dict[str, Any]:
        out = {
            "status": "ok" if self.exit_code == EXIT_OK else "failed",
            "mode": self.mode,
            "complete": self.complete,
            "steps": self.steps,
            "probe_steps": self.probe_steps,
            "total_steps": self.total_steps,
            "placements": self.placements,
        }
        if self.mode == "emulated":
            out.update(
                physical_steps=self.physical_steps,
                type_changes=self.type_changes,
                codes_used=self.codes_used,
                consistent=self.consistent,
            )
        else:
            out["type_changes"] = self.type_changes
        if self.invariant_checks:
            out["invariant_checks"] = self.invariant_checks
        if self.failure is not None:
            out["failure"] = self.failure
        return out


class _FrameRecorder:
    """Snapshot frames, one per placement or one per step."""

    def __init__(self, pr: Prepared, every_step: bool, emu: Optional[Emulation] = None):
        self.pr = pr
        self.every_step = every_step
        self.emu = emu
        self.frames: List[Dict[str, Any]] = []

    def record(self, run: CoatingRun, step: int) -> None:
        pr = self.pr
        name = pr.node_name
        frame: Dict[str, Any] = {"frame": len(self.frames), "step": step}
        if self.emu is None:
            agent = run.agent.position
            frame["object"] = (
                [list(c) for c in sorted(pr.object.nodes)] if pr.object is not None else []
            )
            frame["tiled"] = [name(v) for v in sorted(run.tiled) if v != agent]
            frame["empty"] = [name(v) for v in sorted(run.empty) if v != agent]
            frame["agent"] = name(agent)
        else:
            phys = self.emu.physical
            agent = phys.position
            frame["object"] = (
                [list(c) for c in sorted(pr.object.nodes)] if pr.object is not None else []
            )
            frame["tiled"] = [name(v) for v in sorted(phys.codes) if v != agent]
            frame["empty"] = [
                name(v) for v in pr.surface.nodes() if v not in phys.codes and v != agent
            ]
            frame["agent"] = name(agent)
            frame["codes"] = {
                name(v): self.emu.vg.format_code(c) for v, c in sorted(phys.codes.items())
            }
            vnames = self.emu.vg.nodes
            va = run.agent.position
            frame["virtual"] = {
                "tiled": [str(vnames[v]) for v in sorted(run.tiled) if v != va],
                "empty": [str(vnames[v]) for v in sorted(run.empty) if v != va],
                "agent": str(vnames[va]),
            }
        self.frames.append(frame)


def execute(
    pr: Prepared,
    check_invariants: Optional[bool] = None,
    count_probes: Optional[bool] = None,
    max_steps: Optional[int] = None,
    snapshots: bool = False,
    every_step: bool = False,
) -> RunResult:
    """Run a prepared scenario; never raises for run or monitor failures."""
    sc = pr.scenario
    check = sc.check_invariants if check_invariants is None else check_invariants
    probes = sc.count_probes if count_probes is None else count_probes
    limit = sc.max_steps if max_steps is None else max_steps
    inv = InvariantMonitor() if check else None
    monitors = [AccountingMonitor()] + ([inv] if inv else [])
    if pr.mode == "emulated":
        return _execute_emulated(pr, monitors, inv, probes, limit, snapshots, every_step)

    run = CoatingRun(
        pr.surface, pr.p0, tiled=pr.tiled, count_probes=probes, monitors=monitors, max_steps=limit
    )
    verdict = run.check_coatable()
    failure = None
    rec = _FrameRecorder(pr, every_step) if snapshots else None
    if not verdict.coatable:
        failure = {"kind": "run", "check": "coatability", "step": 0, "detail": verdict.failures()}
    else:
        if rec:
            rec.record(run, 0)
        failure = _drive(run, rec, every_step, lambda: run.step())
    trace = run.trace_lines()
    complete = run.terminated and run.n_tiled == pr.surface.n
    return RunResult(
        "direct",
        complete and failure is None,
        run.steps,
        run.probe_steps,
        run.total_steps,
        run.placements,
        trace,
        rec.frames if rec else [],
        _with_prefix(failure, trace),
        invariant_checks=inv.gathers_checked if inv else 0,
    )


def _drive(run: CoatingRun, rec, every_step: bool, step) -> Optional[Dict[str, Any]]:
    try:
        while not run.terminated:
            ev = step()
            if rec and (every_step or ev.action == "place"):
                rec.record(run, ev.step)
    except InvariantViolation as exc:
        return {"kind": "verification", "check": "invariant", "step": run.steps, "detail": str(exc)}
    except RunAborted as exc:
        return {"kind": "run", "check": exc.reason, "step": exc.step, "detail": exc.detail}
    except EmulationError as exc:
        return {"kind": "verification", "check": "emulation", "step": exc.step, "detail": str(exc)}
    return None


def _with_prefix(failure, trace: List[str], keep: int = 50):
    if failure is not None:
        failure["trace_tail"] = trace[-keep:]
    return failure


def _execute_emulated(pr, monitors, inv, probes, limit, snapshots, every_step) -> RunResult:
    emu = Emulation(pr.surface, pr.p0, max_steps=limit, count_probes=probes, monitors=monitors)
    run = emu.run
    rec = _FrameRecorder(pr, every_step, emu) if snapshots else None
    verdict = run.check_coatable()
    if not verdict.coatable:
        failure = {"kind": "run", "check": "coatability", "step": 0, "detail": verdict.failures()}
    else:
        if rec:
            rec.record(run, 0)
        failure = _drive(run, rec, every_step, lambda: emu.step()[0])
    problems = emu.consistent_end_state() if failure is None else []
    if failure is None and problems:
        failure = {"kind": "verification", "check": "consistency", "step": run.steps, "detail": problems}
    phys = emu.physical
    complete = run.terminated and run.n_tiled == run.surface.n and len(phys.codes) == pr.surface.n
    trace = emu.dual_trace_lines()
    return RunResult(
        "emulated",
        complete and failure is None,
        run.steps,
        run.probe_steps,
        run.total_steps,
        phys.places,
        trace,
        rec.frames if rec else [],
        _with_prefix(failure, trace),
        type_changes=phys.type_changes,
        codes_used=len(phys.used_codes),
        physical_steps=phys.steps,
        consistent=not problems if failure is None or failure["check"] == "consistency" else None,
        invariant_checks=inv.gathers_checked if inv else 0,
    )


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
