"""Word-parallel HPP engine on direction bit planes.

Each direction (E, S, W, N) gets one plane holding one bit per cell. The
2^n rows are packed back to back into a single arbitrary-precision
integer, 2^n bits per row, so bit r*2^n + c is cell (row r, col c) and
the machine operates on whole rows of packed words at once:

* collision is one bitwise expression over the four planes,
* E/W propagation is a masked shift that rotates every row by one bit,
* N/S propagation is a shift by a whole row (with the edge row wrapped),
* velocity inversion just swaps plane references.

Results are bit-identical to the per-cell engine in
:mod:`hppcrypt.lattice`; the test suite proves it primitive by primitive.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

from .errors import ParameterError
from .lattice import Lattice, block_size, check_walls


class Geometry(NamedTuple):
    side: int
    size: int  # side * side, bits per plane
    full: int  # (1 << size) - 1
    row0: int  # bits of the top row
    col_first: int  # bits of column 0 in every row
    col_last: int  # bits of column side-1 in every row
    not_col_first: int
    not_col_last: int


@lru_cache(maxsize=None)
def geometry(n: int) -> Geometry:
    if n < 1:
        raise ParameterError(f"lattice exponent must be >= 1, got {n}")
    side = 1 << n
    size = side * side
    full = (1 << size) - 1
    row0 = (1 << side) - 1
    col_first = sum(1 << (r * side) for r in range(side))
    col_last = col_first << (side - 1)
    return Geometry(
        side, size, full, row0,
        col_first, col_last,
        full ^ col_first, full ^ col_last,
    )


class BitPlaneLattice:
    """Four direction planes for one lattice, packed as integers."""

    __slots__ = ("n", "east", "south", "west", "north")

    def __init__(self, n: int, east: int, south: int, west: int, north: int):
        geom = geometry(n)
        if (east | south | west | north) >> geom.size:
            raise ParameterError("plane bits outside the lattice")
        self.n = n
        self.east = east
        self.south = south
        self.west = west
        self.north = north

    def planes(self) -> tuple[int, int, int, int]:
        return self.east, self.south, self.west, self.north

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitPlaneLattice)
            and self.n == other.n
            and self.planes() == other.planes()
        )

    def __hash__(self) -> int:
        return hash((self.n, self.planes()))


def _pack_plane(bits: np.ndarray) -> int:
    return int.from_bytes(
        np.packbits(bits, bitorder="little").tobytes(), "little"
    )


def _unpack_plane(plane: int, size: int) -> np.ndarray:
    raw = plane.to_bytes((size + 7) // 8, "little")
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[:size]


def _planes_from_cells(cells: np.ndarray) -> tuple[int, int, int, int]:
    return tuple(_pack_plane((cells >> shift) & 1) for shift in (3, 2, 1, 0))


def _cells_from_planes(planes: tuple[int, int, int, int], size: int) -> np.ndarray:
    cells = np.zeros(size, dtype=np.uint8)
    for shift, plane in zip((3, 2, 1, 0), planes):
        cells |= _unpack_plane(plane, size) << shift
    return cells


def to_bitplanes(lat: Lattice) -> BitPlaneLattice:
    cells = np.frombuffer(lat.cells, dtype=np.uint8)
    return BitPlaneLattice(lat.n, *_planes_from_cells(cells))


def from_bitplanes(bp: BitPlaneLattice) -> Lattice:
    size = geometry(bp.n).size
    return Lattice(bp.n, _cells_from_planes(bp.planes(), size).tobytes())


def planes_from_block(block: bytes, n: int) -> tuple[int, int, int, int]:
    """Straight from the two-cells-per-byte serialization to planes."""
    pairs = np.frombuffer(block, dtype=np.uint8)
    cells = np.empty(pairs.size * 2, dtype=np.uint8)
    cells[0::2] = pairs >> 4
    cells[1::2] = pairs & 0xF
    return _planes_from_cells(cells)


def planes_to_block(planes: tuple[int, int, int, int], n: int) -> bytes:
    cells = _cells_from_planes(planes, geometry(n).size)
    return ((cells[0::2] << 4) | cells[1::2]).astype(np.uint8).tobytes()


def wall_mask(walls: Iterable[tuple[int, int]], n: int) -> int:
    """Plane mask with one bit set per wall cell."""
    walls = check_walls(walls, n)
    side = 1 << n
    mask = 0
    for row, col in walls:
        mask |= 1 << (row * side + col)
    return mask


# Low-level plane arithmetic. These take and return bare plane tuples so
# the cipher's round loop can run without constructing objects.

def collide_planes(e: int, s: int, w: int, n: int) -> tuple[int, int, int, int]:
    # A colliding cell (exactly E+W or exactly S+N) toggles all four bits.
    flip = (e & w & ~(s | n)) | (s & n & ~(e | w))
    return e ^ flip, s ^ flip, w ^ flip, n ^ flip


def propagate_planes(
    e: int, s: int, w: int, n: int, geom: Geometry
) -> tuple[int, int, int, int]:
    side = geom.side
    tail = geom.size - side
    e = ((e & geom.not_col_last) << 1) | ((e & geom.col_last) >> (side - 1))
    w = ((w & geom.not_col_first) >> 1) | ((w & geom.col_first) << (side - 1))
    s = ((s << side) & geom.full) | (s >> tail)
    n = (n >> side) | ((n & geom.row0) << tail)
    return e, s, w, n


def reflect_planes(
    e: int, s: int, w: int, n: int, mask: int
) -> tuple[int, int, int, int]:
    keep = ~mask
    return (
        (e & keep) | (w & mask),
        (s & keep) | (n & mask),
        (w & keep) | (e & mask),
        (n & keep) | (s & mask),
    )


def invert_planes(e: int, s: int, w: int, n: int) -> tuple[int, int, int, int]:
    return w, n, e, s


# Whole-lattice wrappers mirroring the reference engine's operations.

def collide(bp: BitPlaneLattice) -> BitPlaneLattice:
    return BitPlaneLattice(bp.n, *collide_planes(*bp.planes()))


def propagate(bp: BitPlaneLattice) -> BitPlaneLattice:
    return BitPlaneLattice(bp.n, *propagate_planes(*bp.planes(), geometry(bp.n)))


def reflect(bp: BitPlaneLattice, walls: Iterable[tuple[int, int]]) -> BitPlaneLattice:
    return BitPlaneLattice(
        bp.n, *reflect_planes(*bp.planes(), wall_mask(walls, bp.n))
    )


def invert_all(bp: BitPlaneLattice) -> BitPlaneLattice:
    return BitPlaneLattice(bp.n, *invert_planes(*bp.planes()))


def hpp_step(bp: BitPlaneLattice) -> BitPlaneLattice:
    e, s, w, n = collide_planes(*bp.planes())
    return BitPlaneLattice(bp.n, *propagate_planes(e, s, w, n, geometry(bp.n)))
