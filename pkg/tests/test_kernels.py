"""Backend equivalence: the compiled kernels must match the pure twins bit
for bit, on tree operations and on whole coder streams."""

from array import array

import numpy as np
import pytest

from isw._kernel import pyref

speedups = pytest.importorskip("isw._kernel._speedups")


def heap_array(counts):
    m = len(counts)
    m_pad = 1 << (m - 1).bit_length() if m > 1 else 1
    arr = array("q", bytes(16 * m_pad))
    arr[0] = m_pad
    arr[m_pad : m_pad + m] = array("q", counts)
    for node in range(m_pad - 1, 0, -1):
        arr[node] = arr[2 * node] + arr[2 * node + 1]
    return arr


@pytest.mark.parametrize("m,w", [(2, 3), (3, 9), (17, 100), (256, 4096)])
def test_tree_ops_agree(m, w):
    rng = np.random.default_rng(m + w)
    counts = rng.multinomial(w, np.full(m, 1 / m)).tolist()
    a, b = heap_array(counts), heap_array(counts)

    for z in rng.integers(0, w, size=200):
        assert pyref.tree_select(a, int(z)) == speedups.tree_select(b, int(z))
    for leaf in range(m):
        assert pyref.tree_prefix(a, leaf) == speedups.tree_prefix(b, leaf)
        assert pyref.tree_code_interval(a, m, leaf) == tuple(
            speedups.tree_code_interval(b, m, leaf)
        )
    total = 2 * w + m
    for v in rng.integers(0, total, size=200):
        assert pyref.tree_code_find(a, m, int(v)) == speedups.tree_code_find(b, m, int(v))
    for _ in range(300):
        z = int(rng.integers(0, w))
        sym = int(rng.integers(0, m))
        assert pyref.tree_step(a, z, sym) == speedups.tree_step(b, z, sym)
    assert list(a) == list(b)


def test_updates_agree():
    a, b = heap_array([5, 0, 2, 9]), heap_array([5, 0, 2, 9])
    for leaf, delta in [(0, 1), (3, -1), (2, 1), (1, 1), (0, -1)]:
        pyref.tree_update(a, leaf, delta)
        speedups.tree_update(b, leaf, delta)
    assert list(a) == list(b)


def test_coder_streams_byte_identical():
    rng = np.random.default_rng(123)
    total = 2 * 512 + 11
    intervals = []
    for _ in range(20_000):
        lo = int(rng.integers(0, total - 1))
        hi = int(rng.integers(lo + 1, total + 1))
        intervals.append((lo, hi))

    enc_py, enc_c = pyref.Encoder32(), speedups.Encoder32()
    for lo, hi in intervals:
        enc_py.encode(lo, hi, total)
        enc_c.encode(lo, hi, total)
        assert enc_py.emitted_bytes == enc_c.emitted_bytes
    blob_py, blob_c = enc_py.finish(), enc_c.finish()
    assert blob_py == blob_c

    dec_py, dec_c = pyref.Decoder32(blob_py), speedups.Decoder32(blob_py)
    for lo, hi in intervals:
        t_py, t_c = dec_py.decode_target(total), dec_c.decode_target(total)
        assert t_py == t_c and lo <= t_py < hi
        dec_py.decode_update(lo, hi, total)
        dec_c.decode_update(lo, hi, total)
        assert dec_py.emitted_bytes == dec_c.emitted_bytes


@pytest.mark.parametrize("impl_pair", [(pyref, speedups), (speedups, pyref)])
def test_cross_backend_decode(impl_pair):
    enc_impl, dec_impl = impl_pair
    total = 100
    seq = [(i % 99, i % 99 + 1) for i in range(5000)]
    enc = enc_impl.Encoder32()
    for lo, hi in seq:
        enc.encode(lo, hi, total)
    dec = dec_impl.Decoder32(enc.finish())
    for lo, hi in seq:
        assert lo <= dec.decode_target(total) < hi
        dec.decode_update(lo, hi, total)


@pytest.mark.parametrize("impl", [pyref, speedups])
def test_kernel_interval_guards(impl):
    enc = impl.Encoder32()
    with pytest.raises(ValueError):
        enc.encode(3, 3, 10)
    with pytest.raises(ValueError):
        enc.encode(0, 11, 10)
    with pytest.raises(ValueError):
        enc.encode(0, 1, impl.MAX_KERNEL_TOTAL + 1)


@pytest.mark.parametrize("impl", [pyref, speedups])
def test_decoder_exhaustion_raises(impl):
    with pytest.raises(EOFError):
        impl.Decoder32(b"\x00")  # cannot even prime 32 bits
