"""Batch command-line surface: simulate, verify, compress, decompress.

``simulate`` writes one CSV row per checkpoint (exact chain when the state
space fits the cap, Monte Carlo otherwise); ``verify`` runs the invariant
suite and exits nonzero on any failure; ``compress``/``decompress`` wrap the
adaptive coder for whole files, treating bytes as an alphabet of 256 or bits
as an alphabet of 2.  The ISW_STATE_CAP environment variable overrides the
exact-chain state cap.
"""

from __future__ import annotations

import argparse
import sys

from . import analysis, verify
from .coder import CoderConfig, CorruptStreamError, StreamHeader, decode_with_header, encode


def _parse_probabilities(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise ValueError(f"could not parse probability vector {text!r}") from exc
    if any(v < 0 for v in values):
        raise ValueError("probabilities must be nonnegative")
    if abs(sum(values) - 1.0) > 1e-9:
        raise ValueError("probabilities must sum to 1")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isw",
        description="Randomized frequency windows: simulation, verification, compression.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="emit CSV of divergence/bound/mean-count rows")
    sim.add_argument("--m", type=int, required=True)
    sim.add_argument("--w", type=int, required=True)
    sim.add_argument("--mu", type=int, default=0, help="must be 0; chain analysis is memoryless")
    sim.add_argument("--p", type=str, required=True, help="comma-separated probabilities")
    sim.add_argument("--t-max", dest="t_max", type=int, required=True)
    sim.add_argument("--trials", type=int, default=0, help="0 = exact chain, >0 = Monte Carlo")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument(
        "--regime-change",
        dest="regime",
        type=str,
        default=None,
        help="pre-switch probabilities; the chain starts from their limit law",
    )
    sim.add_argument("--points", type=int, default=48, help="checkpoint count (geometric)")
    sim.add_argument("--out", type=str, default="-")

    ver = sub.add_parser("verify", help="run the invariant suite")
    ver.add_argument("--only", type=str, default=None, choices=sorted(verify.FAMILIES))

    for name in ("compress", "decompress"):
        c = sub.add_parser(name, help=f"{name} a file")
        c.add_argument("--in", dest="in_path", type=str, required=True)
        c.add_argument("--out", dest="out_path", type=str, required=True)
        if name == "compress":
            c.add_argument("--m", type=int, default=256, choices=(2, 256),
                           help="symbol width: 256 codes bytes, 2 codes bits")
            c.add_argument("--mu", type=int, default=0)
            c.add_argument("--w", type=int, default=4096)
            c.add_argument("--rng-mode", dest="rng_mode", type=str,
                           default="seeded-prng", choices=("seeded-prng", "self-feed"))
            c.add_argument("--seed", type=int, default=0)
    return parser


def run_simulate(args) -> int:
    if args.mu != 0:
        raise ValueError("simulate supports --mu 0 only (memoryless chain analysis)")
    if args.m < 2 or args.w < 1 or args.t_max < 1 or args.points < 1 or args.trials < 0:
        raise ValueError("invalid simulate parameters")
    p = _parse_probabilities(args.p)
    if len(p) != args.m:
        raise ValueError(f"--p must have {args.m} entries")
    regime = _parse_probabilities(args.regime) if args.regime else None
    if regime is not None and len(regime) != args.m:
        raise ValueError(f"--regime-change must have {args.m} entries")
    checkpoints = analysis.geometric_checkpoints(args.t_max, args.points)
    rows = analysis.simulate_chain(
        args.m, args.w, p, checkpoints, trials=args.trials, seed=args.seed, regime_p=regime
    )
    if args.out == "-":
        analysis.emit_csv(sys.stdout, rows, args.m)
    else:
        with open(args.out, "w", newline="") as fp:
            analysis.emit_csv(fp, rows, args.m)
    return 0


def run_verify(args) -> int:
    timings: dict[str, float] = {}
    results = verify.run(args.only, timings)
    for check in results:
        print(check.line())
    failed = [c for c in results if not c.passed]
    total = sum(timings.values())
    print(f"verify: {len(results)} checks, {len(results) - len(failed)} passed, "
          f"{len(failed)} failed  [{total:.1f}s]")
    return 1 if failed else 0


def _bytes_to_symbols(data: bytes, m: int) -> list[int]:
    if m == 256:
        return [b + 1 for b in data]
    return [((byte >> (7 - i)) & 1) + 1 for byte in data for i in range(8)]


def _symbols_to_bytes(symbols: list[int], m: int) -> bytes:
    if m == 256:
        return bytes(s - 1 for s in symbols)
    if len(symbols) % 8:
        raise CorruptStreamError("bit stream length is not a whole number of bytes")
    out = bytearray()
    for i in range(0, len(symbols), 8):
        byte = 0
        for s in symbols[i : i + 8]:
            byte = (byte << 1) | (s - 1)
        out.append(byte)
    return bytes(out)


def run_compress(args) -> int:
    with open(args.in_path, "rb") as fp:
        data = fp.read()
    symbols = _bytes_to_symbols(data, args.m)
    config = CoderConfig(m=args.m, mu=args.mu, w=args.w, rng_mode=args.rng_mode, seed=args.seed)
    stream = encode(symbols, config)
    with open(args.out_path, "wb") as fp:
        fp.write(stream)
    bps = 8 * len(stream) / max(1, len(symbols))
    print(f"{args.in_path}: {len(data)} bytes -> {len(stream)} bytes, "
          f"{bps:.4f} bits/symbol over {len(symbols)} symbols")
    return 0


def run_decompress(args) -> int:
    with open(args.in_path, "rb") as fp:
        stream = fp.read()
    header, offset = StreamHeader.parse(stream)
    if header.config.m not in (2, 256):
        raise CorruptStreamError(f"cannot map alphabet of {header.config.m} back to a file")
    symbols = decode_with_header(stream, header, offset)
    data = _symbols_to_bytes(symbols, header.config.m)
    with open(args.out_path, "wb") as fp:
        fp.write(data)
    print(f"{args.in_path}: {len(stream)} bytes -> {len(data)} bytes")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": run_simulate,
        "verify": run_verify,
        "compress": run_compress,
        "decompress": run_decompress,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
