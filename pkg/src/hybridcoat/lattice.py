"""Integer geometry of the face-centred cubic adjacency graph.

Nodes live at integer points whose coordinate sum is even; every node has
twelve neighbours reached by the compass directions below.  The listing
order of ``DIRECTIONS`` is the canonical order used everywhere a fixed but
arbitrary order is needed (neighbour enumeration, tie-breaking, bit slots).
"""

from __future__ import annotations

from enum import Enum
from typing import Iterable, Iterator, Tuple

Coord = Tuple[int, int, int]


class Direction(Enum):
    UNE = (1, 1, 0)
    UW = (0, 1, 1)
    USE = (1, 0, 1)
    N = (0, 1, -1)
    NW = (-1, 1, 0)
    SW = (-1, 0, 1)
    S = (0, -1, 1)
    SE = (1, -1, 0)
    NE = (1, 0, -1)
    DNW = (-1, 0, -1)
    DSW = (-1, -1, 0)
    DE = (0, -1, -1)

    @property
    def vector(self) -> Coord:
        return self.value

    @property
    def opposite(self) -> "Direction":
        x, y, z = self.value
        return Direction((-x, -y, -z))

    @property
    def rank(self) -> int:
        return _RANK[self]

    @classmethod
    def from_vector(cls, vec: Iterable[int]) -> "Direction":
        return cls(tuple(vec))


DIRECTIONS: Tuple[Direction, ...] = tuple(Direction)
_RANK = {d: i for i, d in enumerate(DIRECTIONS)}
_BY_VECTOR = {d.value: d for d in DIRECTIONS}

# Two-step vectors used by tetragon diagonals of the surface triangulation.
# They extend the canonical order when edge vectors are ranked.
DIAGONAL_VECTORS: Tuple[Coord, ...] = (
    (2, 0, 0), (0, 2, 0), (0, 0, 2), (-2, 0, 0), (0, -2, 0), (0, 0, -2),
)


def is_node(c: Iterable[int]) -> bool:
    c = tuple(c)
    return len(c) == 3 and all(isinstance(v, int) for v in c) and sum(c) % 2 == 0


def direction_vector(d: Direction) -> Coord:
    return d.value


def add(c: Coord, v: Coord) -> Coord:
    return (c[0] + v[0], c[1] + v[1], c[2] + v[2])


def sub(a: Coord, b: Coord) -> Coord:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def neighbor(c: Coord, d: Direction) -> Coord:
    """Return ``c + d``."""
    return add(c, d.value)


def neighbors12(c: Coord) -> list:
    return [add(c, d.value) for d in DIRECTIONS]


def iter_neighbors(c: Coord) -> Iterator[Coord]:
    x, y, z = c
    for dx, dy, dz in _VECTORS:
        yield (x + dx, y + dy, z + dz)


_VECTORS = tuple(d.value for d in DIRECTIONS)


def adjacent(a: Coord, b: Coord) -> bool:
    return sub(b, a) in _BY_VECTOR


def direction_between(a: Coord, b: Coord) -> Direction:
    """Direction ``d`` with ``a + d == b``; raises ``ValueError`` if not adjacent."""
    try:
        return _BY_VECTOR[sub(b, a)]
    except KeyError:
        raise ValueError(f"{a} and {b} are not adjacent") from None


def vector_rank(vec: Coord) -> int:
    """Position of an edge vector in the extended canonical order.

    The twelve unit directions come first in listing order, then the six
    two-step axis vectors.  Any other vector is not an edge of a surface
    built on the lattice.
    """
    vec = tuple(vec)
    d = _BY_VECTOR.get(vec)
    if d is not None:
        return _RANK[d]
    try:
        return len(DIRECTIONS) + DIAGONAL_VECTORS.index(vec)
    except ValueError:
        raise ValueError(f"{vec} is not a surface edge vector") from None


def to_json(c: Coord) -> list:
    return [int(c[0]), int(c[1]), int(c[2])]


def from_json(data) -> Coord:
    c = tuple(int(v) for v in data)
    if not is_node(c):
        raise ValueError(f"{list(data)} is not an FCC node (need 3 ints, even sum)")
    return c
