"""The involutive HPP block cipher.

The secret key is a set of wall positions. One block fills a 2^n x 2^n
lattice; encryption runs the schedule

    M, (P then M) x rounds, J

where M is the cell-local mixing step (collide, then reflect on wall
cells; the two commute), P is the propagation step and J is the global
velocity inversion. The schedule is palindromic around the propagations,
which makes the whole map an exact involution: running it twice with the
same parameters returns the input, so decryption is literally the same
function. Propagation and the cell-local maps both preserve the particle
count, so the ciphertext always has exactly as many 1-bits as the
plaintext; :func:`ones_density` exists to diagnose that leak.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import lru_cache

from . import bitplane, lattice
from .errors import FormatError, ParameterError
from .lattice import block_size

MAGIC = b"HPPC"
VERSION = 1
_HEADER = struct.Struct(">4sBBIQ")  # magic, version, n, rounds, original length


def default_rounds(n: int) -> int:
    """Recommended round count 2^(n+1): twice the lattice's maximal
    toroidal Manhattan distance, so every wall can reach every cell with
    margin."""
    return 1 << (n + 1)


def min_recommended_rounds(n: int) -> int:
    """Below 2^n rounds a wall cannot influence the whole lattice."""
    return 1 << n


def derive_walls(key: bytes, n: int) -> frozenset:
    """Decode a key into wall positions.

    The key is read as a bitstring, most significant bit first, and split
    into consecutive 2n-bit groups: n row bits, then n column bits.
    Trailing bits that do not fill a group are discarded, and duplicate
    coordinates collapse (a cell either is a wall or is not).
    """
    group = 2 * n
    bits = 8 * len(key)
    if bits < group:
        raise ParameterError(
            f"key yields no walls: need at least {group} bits, got {bits}"
        )
    value = int.from_bytes(key, "big") >> (bits % group)
    coord_mask = (1 << n) - 1
    walls = set()
    for _ in range(bits // group):
        g = value & ((1 << group) - 1)
        walls.add((g >> n, g & coord_mask))
        value >>= group
    return frozenset(walls)


def raw_wall_count(key: bytes, n: int) -> int:
    """Number of 2n-bit groups in the key, before duplicates collapse."""
    return (8 * len(key)) // (2 * n)


@dataclass(frozen=True)
class CipherParams:
    """Everything needed to encrypt or decrypt: lattice exponent, round
    count and the wall set."""

    n: int
    rounds: int
    walls: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"lattice exponent must be >= 1, got {self.n}")
        if self.rounds < 0:
            raise ParameterError(f"rounds must be >= 0, got {self.rounds}")
        object.__setattr__(self, "walls", lattice.check_walls(self.walls, self.n))

    @classmethod
    def from_key(cls, key: bytes, n: int, rounds: int | None = None) -> "CipherParams":
        return cls(n, default_rounds(n) if rounds is None else rounds,
                   derive_walls(key, n))


@lru_cache(maxsize=1024)
def _cached_wall_mask(walls: frozenset, n: int) -> int:
    return bitplane.wall_mask(walls, n)


def encrypt_block(block: bytes, params: CipherParams, engine: str = "bitplane") -> bytes:
    """Encrypt (equivalently, decrypt) one 2^(2n-1)-byte block.

    The map is an involution for every choice of parameters and preserves
    the number of set bits exactly.
    """
    if len(block) != block_size(params.n):
        raise FormatError(
            f"block must be {block_size(params.n)} bytes for n={params.n}, "
            f"got {len(block)}"
        )
    if engine == "bitplane":
        return _encrypt_bitplane(block, params)
    if engine == "reference":
        return _encrypt_reference(block, params)
    raise ParameterError(f"unknown engine {engine!r}")


def _encrypt_bitplane(block: bytes, params: CipherParams) -> bytes:
    geom = bitplane.geometry(params.n)
    mask = _cached_wall_mask(params.walls, params.n)
    e, s, w, n = bitplane.planes_from_block(block, params.n)

    e, s, w, n = bitplane.collide_planes(e, s, w, n)
    if mask:
        e, s, w, n = bitplane.reflect_planes(e, s, w, n, mask)
    for _ in range(params.rounds):
        e, s, w, n = bitplane.propagate_planes(e, s, w, n, geom)
        e, s, w, n = bitplane.collide_planes(e, s, w, n)
        if mask:
            e, s, w, n = bitplane.reflect_planes(e, s, w, n, mask)
    e, s, w, n = bitplane.invert_planes(e, s, w, n)
    return bitplane.planes_to_block((e, s, w, n), params.n)


def _encrypt_reference(block: bytes, params: CipherParams) -> bytes:
    lat = lattice.from_bytes(block, params.n)
    lat = lattice.reflect(lattice.collide(lat), params.walls)
    for _ in range(params.rounds):
        lat = lattice.propagate(lat)
        lat = lattice.reflect(lattice.collide(lat), params.walls)
    return lattice.to_bytes(lattice.invert_all(lat))


decrypt_block = encrypt_block


@dataclass(frozen=True)
class CipherContainer:
    """File envelope for an encrypted stream. Header fields travel in the
    clear; only the wall positions are secret."""

    n: int
    rounds: int
    original_length: int
    payload: bytes

    def __post_init__(self):
        bs = block_size(self.n)
        if len(self.payload) % bs:
            raise FormatError(
                f"payload length {len(self.payload)} is not a multiple of "
                f"the {bs}-byte block size"
            )
        if self.original_length > len(self.payload):
            raise FormatError("original length exceeds payload length")

    def to_bytes(self) -> bytes:
        return _HEADER.pack(
            MAGIC, VERSION, self.n, self.rounds, self.original_length
        ) + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "CipherContainer":
        if len(data) < _HEADER.size:
            raise FormatError("container shorter than its header")
        magic, version, n, rounds, original_length = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}")
        if version != VERSION:
            raise FormatError(f"unsupported container version {version}")
        if n < 1:
            raise FormatError(f"bad lattice exponent {n} in header")
        return cls(n, rounds, original_length, data[_HEADER.size:])

    def block_count(self) -> int:
        return len(self.payload) // block_size(self.n)


def encrypt_stream(
    data: bytes,
    key: bytes | None,
    n: int,
    rounds: int | None = None,
    walls: frozenset | None = None,
) -> CipherContainer:
    """Encrypt arbitrary-length data: zero-pad to whole blocks, encrypt
    each block independently, record the true length in the header.

    Walls come from the key unless an explicit wall set is given.
    """
    params = _resolve_params(key, n, rounds, walls)
    bs = block_size(n)
    padded = data + bytes(-len(data) % bs)
    payload = b"".join(
        encrypt_block(padded[i:i + bs], params) for i in range(0, len(padded), bs)
    )
    return CipherContainer(n, params.rounds, len(data), payload)


def decrypt_stream(
    container: CipherContainer,
    key: bytes | None,
    walls: frozenset | None = None,
) -> bytes:
    """Decrypt a container; lattice exponent and rounds come from its
    header."""
    params = _resolve_params(key, container.n, container.rounds, walls)
    bs = block_size(container.n)
    payload = container.payload
    plain = b"".join(
        decrypt_block(payload[i:i + bs], params)
        for i in range(0, len(payload), bs)
    )
    return plain[: container.original_length]


def _resolve_params(
    key: bytes | None, n: int, rounds: int | None, walls: frozenset | None
) -> CipherParams:
    if walls is None:
        if key is None:
            raise ParameterError("either a key or an explicit wall set is required")
        walls = derive_walls(key, n)
    return CipherParams(n, default_rounds(n) if rounds is None else rounds, walls)


def keyspace_count(n: int, k: int) -> int:
    """Number of distinct wall configurations for K walls on a 2^n lattice:
    the number of size-K multisets over the 2^(2n) cells,
    C(2^(2n) + K - 1, K), computed exactly."""
    if n < 1:
        raise ParameterError(f"lattice exponent must be >= 1, got {n}")
    if k < 0:
        raise ParameterError(f"wall count must be >= 0, got {k}")
    cells = 1 << (2 * n)
    return math.comb(cells + k - 1, k)


def approx_scientific(value: int) -> str:
    """Two leading digits of a positive integer in scientific notation,
    truncated: 2002... with 727 digits renders as "2.0e726"."""
    if value < 0:
        raise ParameterError("expected a non-negative integer")
    digits = str(value)
    if len(digits) == 1:
        return f"{digits}.0e0"
    return f"{digits[0]}.{digits[1]}e{len(digits) - 1}"


def ones_density(block: bytes) -> float:
    """Fraction of set bits. The cipher preserves it exactly, so ciphertext
    density equals plaintext density; values far from 0.5 leak."""
    if not block:
        return 0.0
    return int.from_bytes(block, "little").bit_count() / (8 * len(block))
