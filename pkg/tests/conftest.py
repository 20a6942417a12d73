import functools

from hybridcoat.surface import load_fixture, surface_of
from hybridcoat.world import default_p0, generate_object


@functools.lru_cache(maxsize=None)
def object_case(kind, size, seed=0):
    """(object, p0 coordinate, layer, arrangement report, surface, p0 index)."""
    o = generate_object(kind, size, seed)
    p0 = default_p0(o)
    L, gd, report, sg = surface_of(o, p0)
    return o, p0, L, report, sg, sg.index_of(p0)


@functools.lru_cache(maxsize=None)
def fixture(name):
    return load_fixture(name)


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def record_criterion(number, title, ok, detail=""):
    ACCEPTANCE[number] = (title, bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        status = "PASS" if ok else "FAIL"
        line = f"criterion {number:2d} {status}: {title}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)
