"""Seeded avalanche and strict-avalanche protocols, plus report emitters.

Every protocol is deterministic: randomness comes from a counter-based
Philox generator keyed by (seed, trial index), so trials are independent
sub-streams and a report is reproducible bit for bit from its config no
matter how trials are scheduled.

Avalanche curves measure, per round count r, the average fraction of
ciphertext bits inverted when a single input bit (key or plaintext) is
flipped. Strict-avalanche protocols measure that probability separately
for every ciphertext bit at a fixed round count. Plaintext flips can only
ever reach half of the cells: a flipped cell influences only the
checkerboard class of parity (row+col+rounds) mod 2, which caps the text
avalanche near 0.25 where the key avalanche approaches 0.5.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import lattice as _lattice
from .cipher import CipherParams, derive_walls, encrypt_block
from .errors import ParameterError
from .imaging import GrayImage, image_to_lattice, lattice_to_image
from .lattice import block_size

PROTOCOLS = (
    "avalanche-key",
    "avalanche-text",
    "avalanche-key-concentrated",
    "strict-key",
    "strict-text",
    "single-bit",
)

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class ExperimentConfig:
    protocol: str
    n: int
    rounds_range: tuple[int, int, int]  # start, step, stop (inclusive)
    trials: int
    seed: int
    key_len: int  # bytes
    block_len: int  # bytes, always 2^(2n-1)
    wall_region: tuple[int, int, int] | None = None  # row0, col0, side

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ParameterError(f"unknown protocol {self.protocol!r}")
        if self.n < 1:
            raise ParameterError(f"lattice exponent must be >= 1, got {self.n}")
        if self.block_len != block_size(self.n):
            raise ParameterError(
                f"block length {self.block_len} does not match n={self.n} "
                f"(expected {block_size(self.n)})"
            )
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")
        if self.key_len < 1:
            raise ParameterError(f"key length must be >= 1, got {self.key_len}")
        start, step, stop = self.rounds_range
        if start < 0 or step < 1 or stop < start:
            raise ParameterError(f"empty rounds range {self.rounds_range}")
        if self.wall_region is not None:
            row0, col0, size = self.wall_region
            side = 1 << self.n
            if size < 2 or size & (size - 1):
                raise ParameterError(
                    f"wall region side must be a power of two >= 2, got {size}"
                )
            if row0 < 0 or col0 < 0 or row0 + size > side or col0 + size > side:
                raise ParameterError(
                    f"wall region {self.wall_region} does not fit a "
                    f"{side}x{side} lattice"
                )

    def round_values(self) -> tuple[int, ...]:
        start, step, stop = self.rounds_range
        return tuple(range(start, stop + 1, step))


# Paper-scale defaults per protocol; any field can be overridden.
_DEFAULTS = {
    "avalanche-key": dict(n=6, trials=5, rounds_range=(10, 10, 200)),
    "avalanche-text": dict(n=4, trials=20, rounds_range=(10, 2, 208)),
    "avalanche-key-concentrated": dict(
        n=6, trials=5, rounds_range=(10, 10, 200), wall_region=(0, 0, 8)
    ),
    "strict-key": dict(n=4, trials=1000, rounds_range=(64, 1, 64)),
    "strict-text": dict(n=4, trials=1000, rounds_range=(64, 1, 64)),
    "single-bit": dict(n=4, trials=1000, rounds_range=(64, 1, 64)),
}


def default_key_len(n: int) -> int:
    """Key bytes encoding 2^(n-1) walls of 2n bits each."""
    bits = 2 * n * (1 << (n - 1))
    if bits % 8:
        raise ParameterError(f"no whole-byte default key for n={n}")
    return bits // 8


def default_config(protocol: str, **overrides) -> ExperimentConfig:
    if protocol not in _DEFAULTS:
        raise ParameterError(f"unknown protocol {protocol!r}")
    fields = dict(_DEFAULTS[protocol])
    fields.update(overrides)
    n = fields["n"]
    fields.setdefault("seed", 0)
    fields.setdefault("key_len", default_key_len(n))
    fields.setdefault("block_len", block_size(n))
    return ExperimentConfig(protocol=protocol, **fields)


@dataclass(frozen=True)
class ExperimentReport:
    """Per-point results: x is a round count (curves) or a ciphertext bit
    index (strict protocols), y the mean inversion fraction across trials,
    stddev the population spread across trials."""

    config: ExperimentConfig
    xs: tuple[int, ...]
    ys: tuple[float, ...]
    stddevs: tuple[float, ...]

    def mean_y(self) -> float:
        return sum(self.ys) / len(self.ys)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, trial & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def flip_bit(data: bytes, index: int) -> bytes:
    """Flip bit `index` of the MSB-first bitstream view of `data`."""
    out = bytearray(data)
    out[index >> 3] ^= 0x80 >> (index & 7)
    return bytes(out)


def inverted_fraction(a: bytes, b: bytes) -> float:
    if len(a) != len(b):
        raise ParameterError("blocks must have equal length")
    diff = int.from_bytes(a, "big") ^ int.from_bytes(b, "big")
    return diff.bit_count() / (8 * len(a))


def _region_walls(key: bytes, n: int, region: tuple[int, int, int] | None) -> frozenset:
    """Wall set for a key, optionally confined to a sub-square.

    With a region of side 2^m the key is reread as 2m-bit groups giving
    region-relative coordinates, and cells drawn an even number of times
    cancel (reflecting a cell twice is a no-op). Together these keep every
    key bit live even though the region is tiny: one flipped bit always
    toggles exactly two cells' wall status.
    """
    if region is None:
        return derive_walls(key, n)
    row0, col0, size = region
    m = size.bit_length() - 1
    group = 2 * m
    bits = 8 * len(key)
    if bits < group:
        raise ParameterError(
            f"key yields no walls: need at least {group} bits, got {bits}"
        )
    value = int.from_bytes(key, "big") >> (bits % group)
    coord_mask = (1 << m) - 1
    counts: dict[tuple[int, int], int] = {}
    for _ in range(bits // group):
        g = value & ((1 << group) - 1)
        cell = (row0 + (g >> m), col0 + (g & coord_mask))
        counts[cell] = counts.get(cell, 0) + 1
        value >>= group
    return frozenset(cell for cell, k in counts.items() if k & 1)


def _report(config, xs, per_trial: np.ndarray) -> ExperimentReport:
    # per_trial has shape (len(xs), trials)
    ys = per_trial.mean(axis=1)
    stddevs = per_trial.std(axis=1)
    return ExperimentReport(
        config, tuple(int(x) for x in xs),
        tuple(float(y) for y in ys), tuple(float(s) for s in stddevs),
    )


def _avalanche_curve(config: ExperimentConfig, flip_key: bool) -> ExperimentReport:
    rounds = config.round_values()
    block_bits = 8 * config.block_len
    key_bits = 8 * config.key_len
    per_trial = np.zeros((len(rounds), config.trials))
    for t in range(config.trials):
        rng = trial_rng(config.seed, t)
        text = rng.bytes(config.block_len)
        key = rng.bytes(config.key_len)
        walls = _region_walls(key, config.n, config.wall_region)
        if flip_key:
            flipped_walls = [
                _region_walls(flip_bit(key, i), config.n, config.wall_region)
                for i in range(key_bits)
            ]
        else:
            flipped_texts = [flip_bit(text, i) for i in range(block_bits)]
        for ri, r in enumerate(rounds):
            params = CipherParams(config.n, r, walls)
            c_ref = encrypt_block(text, params)
            total = 0.0
            if flip_key:
                for w in flipped_walls:
                    c2 = encrypt_block(text, CipherParams(config.n, r, w))
                    total += inverted_fraction(c_ref, c2)
                per_trial[ri, t] = total / key_bits
            else:
                for text2 in flipped_texts:
                    c2 = encrypt_block(text2, params)
                    total += inverted_fraction(c_ref, c2)
                per_trial[ri, t] = total / block_bits
    return _report(config, rounds, per_trial)


def _check_key_splits(config: ExperimentConfig) -> None:
    m = config.n
    if config.wall_region is not None:
        m = config.wall_region[2].bit_length() - 1
    if (8 * config.key_len) % (2 * m):
        raise ParameterError(
            f"key of {config.key_len} bytes does not split into "
            f"{2 * m}-bit wall coordinates"
        )


def avalanche_key(config: ExperimentConfig) -> ExperimentReport:
    """Mean fraction of ciphertext bits inverted per single key-bit flip,
    as a function of the round count."""
    _check_key_splits(config)
    return _avalanche_curve(config, flip_key=True)


def avalanche_text(config: ExperimentConfig) -> ExperimentReport:
    """Mean fraction of ciphertext bits inverted per single plaintext-bit
    flip. Plateaus near 0.24, not 0.5: a text flip only reaches one
    checkerboard class."""
    return _avalanche_curve(config, flip_key=False)


def avalanche_key_concentrated(config: ExperimentConfig) -> ExperimentReport:
    """Key avalanche with all walls drawn inside a sub-square of the
    lattice (the key is reread as region-relative coordinates)."""
    if config.wall_region is None:
        raise ParameterError("avalanche-key-concentrated needs a wall region")
    _check_key_splits(config)
    return _avalanche_curve(config, flip_key=True)


def _single_round_count(config: ExperimentConfig) -> int:
    rounds = config.round_values()
    if len(rounds) != 1:
        raise ParameterError(
            "strict-avalanche protocols use a single round count, "
            f"got range {config.rounds_range}"
        )
    return rounds[0]


def _strict(config: ExperimentConfig, flips: list[int], flip_key: bool) -> ExperimentReport:
    r = _single_round_count(config)
    block_bits = 8 * config.block_len
    per_trial = np.zeros((block_bits, config.trials))
    acc = np.zeros(block_bits, dtype=np.int64)
    for t in range(config.trials):
        rng = trial_rng(config.seed, t)
        text = rng.bytes(config.block_len)
        key = rng.bytes(config.key_len)
        params = CipherParams(config.n, r, derive_walls(key, config.n))
        c_ref = np.frombuffer(encrypt_block(text, params), dtype=np.uint8)
        acc[:] = 0
        for i in flips:
            if flip_key:
                p2 = CipherParams(config.n, r, derive_walls(flip_bit(key, i), config.n))
                c2 = encrypt_block(text, p2)
            else:
                c2 = encrypt_block(flip_bit(text, i), params)
            diff = c_ref ^ np.frombuffer(c2, dtype=np.uint8)
            acc += np.unpackbits(diff)
        per_trial[:, t] = acc / len(flips)
    return _report(config, range(block_bits), per_trial)


def strict_avalanche_key(config: ExperimentConfig) -> ExperimentReport:
    """Per-ciphertext-bit inversion probability over all single key-bit
    flips; every bit should sit near 0.5 (observed around 0.47)."""
    return _strict(config, list(range(8 * config.key_len)), flip_key=True)


def strict_avalanche_text(config: ExperimentConfig) -> ExperimentReport:
    """Per-ciphertext-bit inversion probability over all single
    plaintext-bit flips; clusters near 0.25 because each flip reaches only
    one checkerboard class."""
    return _strict(config, list(range(8 * config.block_len)), flip_key=False)


def strict_avalanche_single_bit(config: ExperimentConfig, bit_index: int) -> ExperimentReport:
    """Per-ciphertext-bit inversion probability when only one fixed
    plaintext bit is flipped: exactly the opposite-parity half of the bits
    never inverts, the rest invert about half the time."""
    if not 0 <= bit_index < 8 * config.block_len:
        raise ParameterError(f"bit index {bit_index} outside the block")
    return _strict(config, [bit_index], flip_key=False)


def reachable_bits(n: int, bit_index: int, rounds: int) -> np.ndarray:
    """Boolean mask over ciphertext bits that a flip of plaintext
    `bit_index` can influence: cells whose (row+col) parity equals the
    flipped cell's parity plus the round count, mod 2."""
    side = 1 << n
    cell = bit_index // 4
    target = (cell // side + cell % side + rounds) & 1
    cells = np.arange(side * side)
    cell_parity = (cells // side + cells % side) & 1
    return np.repeat(cell_parity == target, 4)


_POPCOUNT4 = np.array([bin(v).count("1") for v in range(16)], dtype=np.uint8)


@dataclass(frozen=True)
class LeakDemoResult:
    """Encrypt-with-full-key then decrypt-with-deficient-key round trip.

    `tile_diff[i][j]` is the fraction of bits that differ from the
    original plaintext inside the (tile_size x tile_size) tile at tile row
    i, tile column j of the decoded lattice."""

    encrypted: GrayImage
    decrypted: GrayImage
    tile_size: int
    tile_diff: tuple[tuple[float, ...], ...]


def partial_key_leak_demo(
    image: GrayImage,
    full_walls: frozenset,
    missing_walls: frozenset,
    rounds: int,
    tile_size: int = 8,
) -> LeakDemoResult:
    """Encrypt an image with one wall set and decrypt with another
    (typically a subset). Regions farther than `rounds` from every
    dropped wall decode exactly; the tile map quantifies the leak."""
    lat = image_to_lattice(image)
    side = lat.side
    if tile_size < 1 or side % tile_size:
        raise ParameterError(
            f"tile size {tile_size} does not divide the {side}-cell side"
        )
    block = _lattice.to_bytes(lat)
    ct = encrypt_block(block, CipherParams(lat.n, rounds, full_walls))
    back = encrypt_block(ct, CipherParams(lat.n, rounds, missing_walls))

    original = np.frombuffer(lat.cells, dtype=np.uint8).reshape(side, side)
    decoded_lat = _lattice.from_bytes(back, lat.n)
    decoded = np.frombuffer(decoded_lat.cells, dtype=np.uint8).reshape(side, side)

    tiles = side // tile_size
    diff_bits = _POPCOUNT4[original ^ decoded]
    tile_diff = tuple(
        tuple(
            float(
                diff_bits[
                    i * tile_size:(i + 1) * tile_size,
                    j * tile_size:(j + 1) * tile_size,
                ].sum()
            ) / (4 * tile_size * tile_size)
            for j in range(tiles)
        )
        for i in range(tiles)
    )
    return LeakDemoResult(
        lattice_to_image(_lattice.from_bytes(ct, lat.n)),
        lattice_to_image(decoded_lat),
        tile_size,
        tile_diff,
    )


def emit_csv(report: ExperimentReport, path: str | Path) -> None:
    """Write the report as UTF-8 CSV with an x,y,stddev header. Output is
    byte-deterministic for a given report."""
    if not report.xs:
        raise ParameterError("cannot emit an empty report")
    lines = ["x,y,stddev"]
    lines.extend(
        f"{x},{y!r},{s!r}"
        for x, y, s in zip(report.xs, report.ys, report.stddevs)
    )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


_SVG_W, _SVG_H = 640, 480
_ML, _MR, _MT, _MB = 64, 16, 40, 48


def emit_svg_plot(report: ExperimentReport, path: str | Path) -> None:
    """Render the report as a static SVG 1.1 chart: axes, dashed reference
    lines at 0.25 and 0.5, a polyline for round-count curves or a scatter
    for per-bit protocols. Byte-deterministic for a given report."""
    if not report.xs:
        raise ParameterError("cannot emit an empty report")
    curve = not report.config.protocol.startswith(("strict", "single"))
    y_max = 0.6 if curve else 1.0
    x_max = max(max(report.xs), 1)
    plot_w = _SVG_W - _ML - _MR
    plot_h = _SVG_H - _MT - _MB

    def px(x: float) -> float:
        return _ML + plot_w * x / x_max

    def py(y: float) -> float:
        return _MT + plot_h * (1 - y / y_max)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<text x="{_SVG_W / 2:.2f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">'
        f"{report.config.protocol} (n={report.config.n}, "
        f"trials={report.config.trials}, seed={report.config.seed})</text>",
        # axes
        f'<line x1="{_ML}" y1="{py(0):.2f}" x2="{_SVG_W - _MR}" '
        f'y2="{py(0):.2f}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{py(0):.2f}" '
        f'stroke="black"/>',
        f'<text x="{_ML + plot_w / 2:.2f}" y="{_SVG_H - 12}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="12">'
        f'{"number of rounds" if curve else "ciphertext bit"}</text>',
    ]
    for frac in range(0, 5):
        y = y_max * frac / 4
        out.append(
            f'<text x="{_ML - 6}" y="{py(y) + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{y:.2f}</text>'
        )
        out.append(
            f'<line x1="{_ML - 4}" y1="{py(y):.2f}" x2="{_ML}" '
            f'y2="{py(y):.2f}" stroke="black"/>'
        )
    for frac in range(0, 5):
        x = x_max * frac / 4
        out.append(
            f'<text x="{px(x):.2f}" y="{py(0) + 16:.2f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{x:.0f}</text>'
        )
        out.append(
            f'<line x1="{px(x):.2f}" y1="{py(0):.2f}" x2="{px(x):.2f}" '
            f'y2="{py(0) + 4:.2f}" stroke="black"/>'
        )
    for ref in (0.25, 0.5):
        out.append(
            f'<line x1="{_ML}" y1="{py(ref):.2f}" x2="{_SVG_W - _MR}" '
            f'y2="{py(ref):.2f}" stroke="gray" stroke-dasharray="6,4"/>'
        )
    if curve:
        points = " ".join(
            f"{px(x):.2f},{py(y):.2f}" for x, y in zip(report.xs, report.ys)
        )
        out.append(
            f'<polyline points="{points}" fill="none" stroke="black" '
            f'stroke-width="1.5"/>'
        )
        for x, y in zip(report.xs, report.ys):
            out.append(
                f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="black"/>'
            )
    else:
        for x, y in zip(report.xs, report.ys):
            out.append(
                f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="1" fill="black"/>'
            )
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def run_protocol(config: ExperimentConfig, bit_index: int = 0) -> ExperimentReport:
    """Dispatch a config to its protocol implementation."""
    if config.protocol == "avalanche-key":
        return avalanche_key(config)
    if config.protocol == "avalanche-text":
        return avalanche_text(config)
    if config.protocol == "avalanche-key-concentrated":
        return avalanche_key_concentrated(config)
    if config.protocol == "strict-key":
        return strict_avalanche_key(config)
    if config.protocol == "strict-text":
        return strict_avalanche_text(config)
    if config.protocol == "single-bit":
        return strict_avalanche_single_bit(config, bit_index)
    raise ParameterError(f"unknown protocol {config.protocol!r}")
