#!/usr/bin/env python3
"""Throughput comparison of the pure-Python and compiled kernels.

Three views: raw tree eviction steps, raw coder interval updates, and an
end-to-end encode/decode of one stream per backend (run in subprocesses so
each sees its own ISW_KERNEL selection).
"""

import argparse
import os
import subprocess
import sys
import time
from array import array

import numpy as np

from isw._kernel import pyref

try:
    from isw._kernel import _speedups
except ImportError:
    _speedups = None


def heap_array(counts):
    m = len(counts)
    m_pad = 1 << (m - 1).bit_length() if m > 1 else 1
    arr = array("q", bytes(16 * m_pad))
    arr[0] = m_pad
    arr[m_pad : m_pad + m] = array("q", counts)
    for node in range(m_pad - 1, 0, -1):
        arr[node] = arr[2 * node] + arr[2 * node + 1]
    return arr


def bench_tree_steps(impl, steps, m=256, w=4096, seed=1):
    rng = np.random.default_rng(seed)
    arr = heap_array(rng.multinomial(w, np.full(m, 1 / m)).tolist())
    zs = rng.integers(0, w, size=steps).tolist()
    syms = rng.integers(0, m, size=steps).tolist()
    tree_step = impl.tree_step
    start = time.perf_counter()
    for z, sym in zip(zs, syms):
        tree_step(arr, z, sym)
    return steps / (time.perf_counter() - start)


def bench_coder_symbols(impl, symbols, m=256, w=4096, seed=2):
    rng = np.random.default_rng(seed)
    total = 2 * w + m
    los = rng.integers(0, total - 1, size=symbols).tolist()
    his = [lo + int(h) for lo, h in zip(los, rng.integers(1, 64, size=symbols))]
    his = [min(h, total) for h in his]
    enc = impl.Encoder32()
    start = time.perf_counter()
    for lo, hi in zip(los, his):
        enc.encode(lo, hi, total)
    enc_rate = symbols / (time.perf_counter() - start)
    blob = enc.finish()
    dec = impl.Decoder32(blob)
    start = time.perf_counter()
    for lo, hi in zip(los, his):
        dec.decode_target(total)
        dec.decode_update(lo, hi, total)
    dec_rate = symbols / (time.perf_counter() - start)
    return enc_rate, dec_rate, len(blob)


_E2E_SNIPPET = """
import time
import numpy as np
import isw
rng = np.random.default_rng(5)
symbols = (rng.integers(0, 256, size={n}) + 1).tolist()
config = isw.CoderConfig(m=256, mu=1, w=4096, rng_mode="self-feed", seed=9)
start = time.perf_counter()
stream = isw.encode(symbols, config)
t_enc = time.perf_counter() - start
start = time.perf_counter()
assert isw.decode(stream) == symbols
t_dec = time.perf_counter() - start
print(isw.KERNEL_BACKEND, t_enc, t_dec)
"""


def bench_end_to_end(backend, n):
    env = dict(os.environ, ISW_KERNEL=backend)
    out = subprocess.run(
        [sys.executable, "-c", _E2E_SNIPPET.format(n=n)],
        capture_output=True, text=True, env=env, check=True,
    ).stdout.split()
    assert out[0] == backend, f"expected backend {backend}, got {out[0]}"
    return n / float(out[1]), n / float(out[2])


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=300_000)
    parser.add_argument("--symbols", type=int, default=300_000)
    parser.add_argument("--stream", type=int, default=200_000)
    args = parser.parse_args()

    backends = [("py", pyref)] + ([("c", _speedups)] if _speedups else [])
    if _speedups is None:
        print("compiled kernel not available; benchmarking the pure backend only")

    rows = []
    for name, impl in backends:
        tree = bench_tree_steps(impl, args.steps)
        enc, dec, size = bench_coder_symbols(impl, args.symbols)
        rows.append((name, tree, enc, dec))
    print(f"{'backend':<8} {'tree step/s':>14} {'encode sym/s':>14} {'decode sym/s':>14}")
    for name, tree, enc, dec in rows:
        print(f"{name:<8} {tree:>14,.0f} {enc:>14,.0f} {dec:>14,.0f}")
    if len(rows) == 2:
        print(f"{'speedup':<8} {rows[1][1]/rows[0][1]:>13.1f}x "
              f"{rows[1][2]/rows[0][2]:>13.1f}x {rows[1][3]/rows[0][3]:>13.1f}x")

    print(f"\nend-to-end coder, m=256 mu=1 w=4096 self-feed, {args.stream:,} symbols:")
    e2e = {}
    for name, _ in backends:
        enc_rate, dec_rate = bench_end_to_end(name, args.stream)
        e2e[name] = (enc_rate, dec_rate)
        print(f"{name:<8} encode {enc_rate:>12,.0f} sym/s   decode {dec_rate:>12,.0f} sym/s")
    if len(e2e) == 2:
        print(f"{'speedup':<8} encode {e2e['c'][0]/e2e['py'][0]:>11.1f}x   "
              f"decode {e2e['c'][1]/e2e['py'][1]:>11.1f}x")


if __name__ == "__main__":
    main()
