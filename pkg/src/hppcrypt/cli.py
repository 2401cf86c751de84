"""Command-line interface.

Subcommands: encrypt, decrypt, keyspace, experiment, img2block, block2img,
bench. Diagnostics go to stderr; exit status is 0 on success, 2 for bad
parameters or usage, 1 for I/O and data-format failures.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from .cipher import (
    MAGIC,
    CipherContainer,
    CipherParams,
    approx_scientific,
    decrypt_stream,
    default_rounds,
    encrypt_block,
    encrypt_stream,
    keyspace_count,
    min_recommended_rounds,
    ones_density,
)
from .errors import FormatError, ParameterError
from .experiments import PROTOCOLS, default_config, emit_csv, emit_svg_plot, run_protocol
from .lattice import block_size, from_bytes, parse_walls_text, to_bytes
from .imaging import image_to_lattice, lattice_to_image, read_pgm, write_pgm


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _exponent(value: str) -> int:
    n = int(value)
    if not 2 <= n <= 12:
        raise argparse.ArgumentTypeError(f"n must be in [2, 12], got {n}")
    return n


def _resolve_key(args) -> bytes | None:
    if args.key_hex is not None:
        try:
            return bytes.fromhex(args.key_hex)
        except ValueError:
            raise ParameterError(f"invalid hex key {args.key_hex!r}") from None
    if args.key_file is not None:
        return Path(args.key_file).read_bytes()
    return None


def _resolve_walls(args) -> frozenset | None:
    if args.walls_file is None:
        return None
    return parse_walls_text(Path(args.walls_file).read_text(encoding="utf-8"))


def _resolve_seed(args, file_conf=None) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    if file_conf and "seed" in file_conf:
        return int(file_conf["seed"])
    return int(os.environ.get("HPP_SEED", "0"))


def cmd_encrypt(args) -> int:
    data = Path(args.infile).read_bytes()
    key = _resolve_key(args)
    walls = _resolve_walls(args)
    if key is None and walls is None:
        raise ParameterError("encrypt needs --key-hex, --key-file or --walls-file")
    n = args.n
    rounds = default_rounds(n) if args.rounds is None else args.rounds
    if rounds < min_recommended_rounds(n):
        _warn(
            f"{rounds} rounds is below 2^n={min_recommended_rounds(n)}: "
            "wall influence may not cover the lattice"
        )
    density = ones_density(data)
    if abs(density - 0.5) > 0.1:
        _warn(
            f"bit density {density:.3f} is far from 0.5 and is preserved "
            "exactly by the cipher; consider compressing the input first"
        )
    container = encrypt_stream(data, key, n, rounds, walls=walls)
    Path(args.outfile).write_bytes(container.to_bytes())
    print(
        f"encrypted {len(data)} bytes into {container.block_count()} "
        f"block(s) of {block_size(n)} bytes (n={n}, rounds={rounds})"
    )
    return 0


def cmd_decrypt(args) -> int:
    raw = Path(args.infile).read_bytes()
    key = _resolve_key(args)
    walls = _resolve_walls(args)
    if key is None and walls is None:
        raise ParameterError("decrypt needs --key-hex, --key-file or --walls-file")
    container = CipherContainer.from_bytes(raw)
    plain = decrypt_stream(container, key, walls=walls)
    Path(args.outfile).write_bytes(plain)
    print(
        f"decrypted {container.block_count()} block(s) to {len(plain)} bytes "
        f"(n={container.n}, rounds={container.rounds})"
    )
    return 0


def cmd_keyspace(args) -> int:
    count = keyspace_count(args.n, args.walls)
    print(count)
    print(f"≈ {approx_scientific(count)}")
    return 0


def _parse_rounds_range(text: str) -> tuple[int, int, int]:
    parts = text.split(":")
    try:
        if len(parts) == 1:
            r = int(parts[0])
            return (r, 1, r)
        if len(parts) == 3:
            return (int(parts[0]), int(parts[1]), int(parts[2]))
    except ValueError:
        pass
    raise ParameterError(f"rounds must be an integer or start:step:stop, got {text!r}")


def _parse_region(text: str) -> tuple[int, int, int]:
    try:
        row0, col0, size = (int(p) for p in text.split(","))
        return (row0, col0, size)
    except ValueError:
        raise ParameterError(f"region must be row0,col0,size, got {text!r}") from None


def _parse_config_file(path: str) -> dict:
    conf = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"bad config line {lineno}: {line!r}")
        key, _, value = line.partition("=")
        conf[key.strip()] = value.strip()
    return conf


def cmd_experiment(args) -> int:
    file_conf = _parse_config_file(args.config) if args.config else {}
    protocol = args.protocol or file_conf.get("protocol")
    if protocol is None:
        raise ParameterError("experiment needs --protocol (or protocol= in --config)")
    if protocol not in PROTOCOLS:
        raise ParameterError(f"unknown protocol {protocol!r}")

    overrides: dict = {"seed": _resolve_seed(args, file_conf)}
    if args.n is not None:
        overrides["n"] = args.n
    elif "n" in file_conf:
        overrides["n"] = int(file_conf["n"])
    if args.trials is not None:
        overrides["trials"] = args.trials
    elif "trials" in file_conf:
        overrides["trials"] = int(file_conf["trials"])
    if args.rounds is not None:
        overrides["rounds_range"] = _parse_rounds_range(args.rounds)
    elif "rounds" in file_conf:
        overrides["rounds_range"] = _parse_rounds_range(file_conf["rounds"])
    if args.key_len is not None:
        overrides["key_len"] = args.key_len
    elif "key_len" in file_conf:
        overrides["key_len"] = int(file_conf["key_len"])
    if args.region is not None:
        overrides["wall_region"] = _parse_region(args.region)
    elif "region" in file_conf:
        overrides["wall_region"] = _parse_region(file_conf["region"])
    bit_index = args.bit if args.bit is not None else int(file_conf.get("bit", "0"))

    config = default_config(protocol, **overrides)
    report = run_protocol(config, bit_index=bit_index)

    if args.csv:
        emit_csv(report, args.csv)
        print(f"wrote {args.csv}")
    if args.svg:
        emit_svg_plot(report, args.svg)
        print(f"wrote {args.svg}")

    print(f"protocol={protocol} n={config.n} trials={config.trials} seed={config.seed}")
    if protocol.startswith("avalanche"):
        for x, y, s in zip(report.xs, report.ys, report.stddevs):
            print(f"r={x} p={y:.5f} stddev={s:.5f}")
    elif protocol == "single-bit":
        zero = sum(1 for y in report.ys if y == 0.0)
        hot = [y for y in report.ys if y > 0.0]
        mean_hot = sum(hot) / len(hot) if hot else 0.0
        print(
            f"bit={bit_index}: {zero}/{len(report.ys)} ciphertext bits never "
            f"invert; the other {len(hot)} invert with mean probability "
            f"{mean_hot:.4f}"
        )
    else:
        ys = report.ys
        print(
            f"bits={len(ys)} mean={report.mean_y():.4f} "
            f"min={min(ys):.4f} max={max(ys):.4f}"
        )
    return 0


def cmd_img2block(args) -> int:
    image = read_pgm(args.infile)
    block = to_bytes(image_to_lattice(image))
    Path(args.outfile).write_bytes(block)
    print(f"wrote {len(block)}-byte block from {image.width}x{image.height} image")
    return 0


def _infer_exponent(length: int) -> int:
    n = 1
    while block_size(n) < length:
        n += 1
    if block_size(n) != length:
        raise FormatError(f"{length} bytes is not a 2^(2n-1) block size")
    return n


def cmd_block2img(args) -> int:
    block = Path(args.infile).read_bytes()
    if block[:4] == MAGIC:
        # single-block containers render directly, so an encrypted image
        # can be viewed without decrypting it
        container = CipherContainer.from_bytes(block)
        if container.block_count() != 1:
            raise FormatError(
                f"container holds {container.block_count()} blocks, "
                "can only render exactly one"
            )
        block = container.payload
        n = container.n
    else:
        n = args.n if args.n is not None else _infer_exponent(len(block))
    image = lattice_to_image(from_bytes(block, n))
    write_pgm(image, args.outfile)
    print(f"wrote {image.width}x{image.height} PGM")
    return 0


def cmd_bench(args) -> int:
    print(f"{'n':>3} {'rounds':>6} {'engine':>10} {'blocks/s':>10} {'kB/s':>10}")
    for n in (4, 5, 6):
        rounds = default_rounds(n)
        rng = np.random.Generator(np.random.Philox(key=np.uint64(n)))
        key = rng.bytes(16)
        block = rng.bytes(block_size(n))
        params = CipherParams.from_key(key, n, rounds)
        if encrypt_block(block, params, "reference") != encrypt_block(block, params):
            print("error: engine checksum mismatch, aborting", file=sys.stderr)
            return 1
        for engine in ("reference", "bitplane"):
            count = 0
            start = time.perf_counter()
            while True:
                encrypt_block(block, params, engine)
                count += 1
                elapsed = time.perf_counter() - start
                if elapsed >= args.min_time:
                    break
            rate = count / elapsed
            print(
                f"{n:>3} {rounds:>6} {engine:>10} {rate:>10.2f} "
                f"{rate * block_size(n) / 1000:>10.1f}"
            )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hppcrypt",
        description="HPP lattice-gas block cipher, key-space calculator, "
        "avalanche experiments and PGM bridge",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_key_flags(p):
        p.add_argument("--key-hex", help="secret key as a hex string")
        p.add_argument("--key-file", help="secret key as a raw bytes file")
        p.add_argument(
            "--walls-file",
            help="explicit wall list (row,col per line), overrides the key",
        )

    p = sub.add_parser("encrypt", help="encrypt a file into a container")
    p.add_argument("--n", type=_exponent, required=True, help="lattice exponent")
    p.add_argument("--rounds", type=int, help="default 2^(n+1)")
    add_key_flags(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt a container file")
    add_key_flags(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("keyspace", help="count wall configurations")
    p.add_argument("--n", type=_exponent, required=True)
    p.add_argument("-K", "--walls", type=int, required=True, help="wall count")
    p.set_defaults(func=cmd_keyspace)

    p = sub.add_parser("experiment", help="run an avalanche protocol")
    p.add_argument("--protocol", choices=PROTOCOLS)
    p.add_argument("--n", type=_exponent)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="default: HPP_SEED env var, then 0")
    p.add_argument("--rounds", help="round count or start:step:stop range")
    p.add_argument("--key-len", type=int, help="key length in bytes")
    p.add_argument("--region", help="row0,col0,size wall restriction")
    p.add_argument("--bit", type=int, help="plaintext bit for single-bit")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--csv", help="write points as CSV")
    p.add_argument("--svg", help="write a chart as SVG")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("img2block", help="PGM image to raw lattice block")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(func=cmd_img2block)

    p = sub.add_parser("block2img", help="raw lattice block to PGM image")
    p.add_argument("--n", type=_exponent, help="inferred from size if omitted")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(func=cmd_block2img)

    p = sub.add_parser("bench", help="compare engine throughput")
    p.add_argument("--min-time", type=float, default=0.25, help="seconds per engine")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
