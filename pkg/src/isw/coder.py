"""Adaptive arithmetic coder driven by per-context imaginary windows.

Symbol probabilities come from the smoothed counts (2*count+1 out of 2w+m)
of a :class:`~isw.context.ContextModel`; after each coded symbol both sides
perform the same eviction step, so the models never need to be transmitted.
The eviction randomness is shared either through a common seed
("seeded-prng") or by recycling bytes of the code stream itself
("self-feed"): each side shifts a payload byte into the feedback register
the moment that byte is fully determined on both sides, i.e. at the symbol
boundary where the encoder has resolved it.

Stream layout (all multi-byte integers big-endian):

    magic "ISW1" | version u8 | m u16 | mu u8 | w u32 | rng_mode u8 |
    seed u64 | symbol_count u64 | mu literal symbols (ceil(log2 m) bits
    each, zero-padded to a byte) | arithmetic-coded payload
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Sequence

from . import _kernel
from .bits import BitSource, SeededBitSource, SelfFeedBitSource
from .context import ContextModel

MAGIC = b"ISW1"
VERSION = 1
MAX_CODING_TOTAL = 1 << 24

RNG_MODES = {"seeded-prng": 0, "self-feed": 1}
_RNG_NAMES = {v: k for k, v in RNG_MODES.items()}

_HEADER = struct.Struct(">4sBHBIBQQ")


class CorruptStreamError(ValueError):
    """Raised when a stream fails structural checks or runs out of bits."""


@dataclass(frozen=True)
class CoderConfig:
    m: int
    mu: int = 0
    w: int = 1024
    rng_mode: str = "seeded-prng"
    seed: int = 0

    def __post_init__(self):
        if not 2 <= self.m <= 0xFFFF:
            raise ValueError("m must be in [2, 65535]")
        if not 0 <= self.mu <= 0xFF:
            raise ValueError("mu must be in [0, 255]")
        if self.w < 1:
            raise ValueError("w must be positive")
        if 2 * self.w + self.m > MAX_CODING_TOTAL:
            raise ValueError(f"2*w + m must not exceed {MAX_CODING_TOTAL}")
        if self.rng_mode not in RNG_MODES:
            raise ValueError(f"rng_mode must be one of {sorted(RNG_MODES)}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def make_bit_source(self) -> BitSource:
        if self.rng_mode == "self-feed":
            return SelfFeedBitSource(self.seed)
        return SeededBitSource(self.seed)


@dataclass(frozen=True)
class StreamHeader:
    config: CoderConfig
    symbol_count: int
    literals: tuple[int, ...]

    def to_bytes(self) -> bytes:
        c = self.config
        head = _HEADER.pack(
            MAGIC, VERSION, c.m, c.mu, c.w, RNG_MODES[c.rng_mode], c.seed, self.symbol_count
        )
        return head + _pack_symbols(self.literals, c.m)

    @classmethod
    def parse(cls, stream: bytes) -> tuple["StreamHeader", int]:
        """Returns (header, payload offset); raises CorruptStreamError."""
        if len(stream) < _HEADER.size:
            raise CorruptStreamError("stream shorter than header")
        magic, version, m, mu, w, mode_code, seed, symbol_count = _HEADER.unpack_from(stream)
        if magic != MAGIC:
            raise CorruptStreamError("bad magic")
        if version != VERSION:
            raise CorruptStreamError(f"unsupported version {version}")
        if mode_code not in _RNG_NAMES:
            raise CorruptStreamError(f"unknown rng mode {mode_code}")
        try:
            config = CoderConfig(m, mu, w, _RNG_NAMES[mode_code], seed)
        except ValueError as exc:
            raise CorruptStreamError(str(exc)) from exc
        if symbol_count < mu:
            raise CorruptStreamError("symbol count smaller than context order")
        lit_bytes = _literal_block_size(mu, m)
        if len(stream) < _HEADER.size + lit_bytes:
            raise CorruptStreamError("stream truncated inside literal block")
        literals = _unpack_symbols(
            stream[_HEADER.size : _HEADER.size + lit_bytes], mu, m
        )
        return cls(config, symbol_count, literals), _HEADER.size + lit_bytes


def _bits_per_symbol(m: int) -> int:
    return (m - 1).bit_length()


def _literal_block_size(mu: int, m: int) -> int:
    return (mu * _bits_per_symbol(m) + 7) // 8


def _pack_symbols(symbols: Sequence[int], m: int) -> bytes:
    width = _bits_per_symbol(m)
    acc = 0
    nbits = 0
    out = bytearray()
    for s in symbols:
        acc = (acc << width) | (s - 1)
        nbits += width
        while nbits >= 8:
            nbits -= 8
            out.append((acc >> nbits) & 0xFF)
    if nbits:
        out.append((acc << (8 - nbits)) & 0xFF)
    return bytes(out)


def _unpack_symbols(data: bytes, count: int, m: int) -> tuple[int, ...]:
    width = _bits_per_symbol(m)
    acc = int.from_bytes(data, "big")
    total_bits = 8 * len(data)
    out = []
    for i in range(count):
        shift = total_bits - (i + 1) * width
        value = (acc >> shift) & ((1 << width) - 1)
        if value >= m:
            raise CorruptStreamError("literal symbol out of range")
        out.append(value + 1)
    return tuple(out)


def _validate_symbols(symbols: Sequence[int], m: int) -> None:
    for s in symbols:
        if not 1 <= s <= m:
            raise ValueError(f"symbol {s} out of range 1..{m}")


def encode(symbols: Sequence[int], config: CoderConfig) -> bytes:
    """Code a 1-based symbol sequence into a self-describing byte stream.

    The first mu symbols are stored literally (they seed the context); each
    later symbol is arithmetic-coded from its context window, after which the
    window takes one eviction step using the shared bit source.
    """
    symbols = list(symbols)
    _validate_symbols(symbols, config.m)
    if len(symbols) < config.mu:
        raise ValueError("sequence shorter than the context order")
    header = StreamHeader(config, len(symbols), tuple(symbols[: config.mu]))
    out = bytearray(header.to_bytes())

    coded = symbols[config.mu :]
    if coded:
        model = ContextModel(config.m, config.mu, config.w, header.literals)
        bits = config.make_bit_source()
        self_feed = config.rng_mode == "self-feed"
        enc = _kernel.Encoder32()
        total = 2 * config.w + config.m
        fed = 0
        for sym in coded:
            tree = model.window()
            lo, hi = tree.coding_interval(sym)
            enc.encode(lo, hi, total)
            if self_feed:
                ready = enc.emitted_bytes
                if ready > fed:
                    bits.feed_bytes(enc.buffer_slice(fed, ready))
                    fed = ready
            model.step(sym, bits)
        out += enc.finish()
    return bytes(out)


def decode(stream: bytes) -> list[int]:
    """Inverse of :func:`encode`; the stream carries its own configuration."""
    header, offset = StreamHeader.parse(stream)
    return decode_with_header(stream, header, offset)


def decode_with_header(stream: bytes, header: StreamHeader, offset: int) -> list[int]:
    config = header.config
    symbols = list(header.literals)
    n_coded = header.symbol_count - config.mu
    if n_coded == 0:
        return symbols

    model = ContextModel(config.m, config.mu, config.w, header.literals)
    bits = config.make_bit_source()
    self_feed = config.rng_mode == "self-feed"
    payload = stream[offset:]
    total = 2 * config.w + config.m
    try:
        dec = _kernel.Decoder32(payload)
        fed = 0
        for _ in range(n_coded):
            target = dec.decode_target(total)
            sym, lo, hi = model.window().coding_find(target)
            dec.decode_update(lo, hi, total)
            if self_feed:
                ready = dec.emitted_bytes
                if ready > fed:
                    bits.feed_bytes(payload[fed:ready])
                    fed = ready
            model.step(sym, bits)
            symbols.append(sym)
    except EOFError as exc:
        raise CorruptStreamError("truncated payload") from exc
    return symbols
