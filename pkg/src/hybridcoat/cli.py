"""Command-line interface: inspect, coat, bench and verify.

Exit codes: 0 success, 2 validation failure, 3 run failure, 4 verification
failure.
"""

from __future__ import annotations

import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Any, Dict, List, Optional, Sequence

import click

from .oracles import scaling_fit
from .runner import EXIT_OK, EXIT_RUN, EXIT_VALIDATION, EXIT_VERIFY, execute, write_atomic
from .scenario import MODES, Scenario, inspect_report, prepare
from .suites import SUITES, run_suite
from .world import GENERATORS, ValidationError


def _load(path: str, mode: Optional[str] = None):
    try:
        sc = Scenario.load(path)
        if mode is not None:
            sc = replace(sc, mode=mode)
        pr = prepare(sc)
        if pr.mode == "direct" and not pr.smooth:
            raise ValidationError("object is not smooth; direct mode needs a smooth object")
        return pr
    except (ValidationError, OSError) as exc:
        _fail_validation(path, exc)


def _fail_validation(path: str, exc: Exception):
    click.echo(json.dumps({"status": "invalid", "scenario": path, "error": str(exc)}), err=True)
    sys.exit(EXIT_VALIDATION)


@click.group()
@click.version_option(package_name="artifact")
def main() -> None:
    """Simulate and verify a tile-carrying agent coating objects on the FCC lattice."""


@main.command()
@click.argument("scenario", type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Print the report as JSON.")
def inspect(scenario: str, as_json: bool) -> None:
    """Report layer size, smoothness and coatability of a scenario."""
    pr = _load(scenario)
    rep = inspect_report(pr)
    if as_json:
        click.echo(json.dumps(rep, indent=2, sort_keys=True))
        return
    click.echo(f"object nodes: {rep['theta']}")
    click.echo(f"layer nodes (n): {rep['n']}")
    click.echo(f"max degree: {rep['max_degree']}")
    click.echo(f"smooth: {'yes' if rep['smooth'] else 'no'}")
    click.echo(f"genus: {rep['genus']}")
    if "arrangements" in rep:
        hist = ", ".join(f"{k}={v}" for k, v in rep["arrangements"].items())
        click.echo(f"arrangements: {hist}")
    click.echo(f"coatable: {'yes' if rep['coatable'] else 'no'}")
    for msg in rep["coatability_problems"]:
        click.echo(f"  {msg}")
    click.echo(f"recommended mode: {rep['recommended_mode']}")
    click.echo(f"depot p0: {rep['p0']}, first step s0: {rep['s0']}")


@main.command()
@click.argument("scenario", type=click.Path(dir_okay=False))
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), help="Write the event trace here.")
@click.option("--snapshots", "snap_path", type=click.Path(dir_okay=False), help="Write snapshot frames (JSON lines).")
@click.option("--every-step", is_flag=True, help="One snapshot per step instead of per placement.")
@click.option("--summary", "summary_path", type=click.Path(dir_okay=False), help="Write the run summary as JSON.")
@click.option("--check-invariants/--no-check-invariants", default=None, help="Run the invariant monitors.")
@click.option("--count-probes", type=bool, default=None, help="Charge probe walks as steps (true/false).")
@click.option("--max-steps", type=int, default=None, help="Abort after this many steps.")
@click.option("--mode", type=click.Choice(MODES), default=None, help="Override the scenario mode.")
def coat(
    scenario: str,
    trace_path: Optional[str],
    snap_path: Optional[str],
    every_step: bool,
    summary_path: Optional[str],
    check_invariants: Optional[bool],
    count_probes: Optional[bool],
    max_steps: Optional[int],
    mode: Optional[str],
) -> None:
    """Run the coating algorithm on a scenario."""
    pr = _load(scenario, mode)
    res = execute(
        pr,
        check_invariants=check_invariants,
        count_probes=count_probes,
        max_steps=max_steps,
        snapshots=snap_path is not None,
        every_step=every_step,
    )
    summary = res.summary()
    summary["n"] = pr.surface.n
    code = res.exit_code
    if code == EXIT_OK:
        if trace_path:
            write_atomic(trace_path, "".join(line + "\n" for line in res.trace))
        if snap_path:
            write_atomic(snap_path, "".join(json.dumps(f, sort_keys=True) + "\n" for f in res.frames))
    if summary_path:
        write_atomic(summary_path, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if code == EXIT_OK:
        click.echo(
            f"coated {pr.surface.n} nodes in {res.mode} mode:"
            f" {res.steps} steps, {res.probe_steps} probe steps, {res.total_steps} total"
        )
        if res.mode == "emulated":
            click.echo(
                f"physical: {res.physical_steps} steps, {res.type_changes} type changes,"
                f" {res.codes_used} distinct codes, consistent: {res.consistent}"
            )
    else:
        click.echo(json.dumps(summary, sort_keys=True), err=True)
    sys.exit(code)


BENCH_FIELDS = [
    "kind", "size", "seed", "mode", "n", "steps", "probe_steps", "total_steps",
    "steps_per_n2", "total_per_n2", "type_changes", "complete", "status",
]


def bench_row(kind: str, size: int, seed: int, mode: str, timing: bool = False) -> Dict[str, Any]:
    """One benchmark run with probe charging on."""
    row: Dict[str, Any] = {"kind": kind, "size": size, "seed": seed, "mode": mode}
    t0 = time.perf_counter()
    try:
        sc = Scenario.from_dict(
            {"object": {"generator": {"kind": kind, "size": size, "seed": seed}}, "mode": mode}
        )
        pr = prepare(sc)
    except ValidationError as exc:
        row.update(status=f"invalid: {exc}", complete=False)
        return row
    res = execute(pr, count_probes=True)
    n = pr.surface.n
    row.update(
        mode=res.mode,
        n=n,
        steps=res.steps,
        probe_steps=res.probe_steps,
        total_steps=res.total_steps,
        steps_per_n2=f"{res.steps / n**2:.6f}",
        total_per_n2=f"{res.total_steps / n**2:.6f}",
        type_changes=res.type_changes,
        complete=res.complete,
        status="ok" if res.exit_code == EXIT_OK else res.failure["check"] if res.failure else "incomplete",
    )
    if timing:
        row["wall_time_s"] = f"{time.perf_counter() - t0:.3f}"
    return row


def _bench_job(args):
    return bench_row(*args)


def bench_csv(rows: Sequence[Dict[str, Any]], timing: bool = False) -> str:
    buf = io.StringIO()
    fields = BENCH_FIELDS + (["wall_time_s"] if timing else [])
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _sizes(ctx, param, value: str) -> List[int]:
    try:
        sizes = [int(x) for x in value.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter("comma-separated integers expected")
    if not sizes or sizes != sorted(sizes) or min(sizes) < 1:
        raise click.BadParameter("sizes must be positive and ascending")
    return sizes


@main.command()
@click.option("--kind", "kinds", multiple=True, type=click.Choice(GENERATORS), default=("line",), show_default=True)
@click.option("--sizes", callback=_sizes, default="8,16,32,64", show_default=True, help="Ascending sizes.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--mode", type=click.Choice(MODES), default="auto", show_default=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="CSV path (default: stdout).")
@click.option("--jobs", type=int, default=1, show_default=True, help="Parallel worker processes.")
@click.option("--timing", is_flag=True, help="Add a wall-time column (makes output non-reproducible).")
def bench(kinds, sizes, seed, mode, output, jobs, timing) -> None:
    """Step counts over a family of generated objects, one CSV row per run."""
    jobs_list = [(k, s, seed, mode, timing) for k in kinds for s in sizes]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_bench_job, jobs_list))
    else:
        rows = [_bench_job(j) for j in jobs_list]
    text = bench_csv(rows, timing)
    if output:
        write_atomic(output, text)
    else:
        click.echo(text, nl=False)
    for k in kinds:
        pts = [(r["n"], r["total_steps"]) for r in rows if r["kind"] == k and r.get("status") == "ok"]
        if len(pts) >= 2:
            fit = scaling_fit(pts)
            doubling = f"{fit.largest_doubling:.2f}" if fit.largest_doubling else "n/a"
            click.echo(
                f"{k}: total/n^2 band {fit.band:.2f}, largest doubling x{doubling},"
                f" log-log slope {fit.exponent:.2f}",
                err=True,
            )
    failed = [r for r in rows if r.get("status") != "ok"]
    sys.exit(EXIT_RUN if failed else EXIT_OK)


@main.command()
@click.option("--suite", "suites", multiple=True, type=click.Choice(SUITES), help="Suites to run (default: all).")
@click.option("--budget", type=int, default=200, show_default=True, help="Sampled states or checkpoints per suite.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False), help="Write a JSON report here.")
def verify(suites, budget, seed, report_path) -> None:
    """Differential oracle checks and invariant suites."""
    ok = True
    reports = []
    for name in suites or SUITES:
        rep = run_suite(name, budget, seed)
        reports.append(rep.to_json())
        for line in rep.lines():
            click.echo(line)
        if rep.samples == 0:
            click.echo(f"{name}: 0 samples")
        ok = ok and rep.ok
    if report_path:
        doc = {"ok": ok, "budget": budget, "seed": seed, "suites": reports}
        write_atomic(report_path, json.dumps(doc, indent=2) + "\n")
    sys.exit(EXIT_OK if ok else EXIT_VERIFY)


if __name__ == "__main__":
    main()
