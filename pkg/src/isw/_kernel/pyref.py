"""Pure-Python kernels; the compiled extension mirrors these bit for bit.

Tree layout: a flat heap in an ``array('q')`` of length 2*M where M is the
leaf count padded to a power of two.  Slot 0 stores M, slot 1 is the root,
children of node n are 2n and 2n+1, leaf i lives at M+i.  Padded leaves hold
count 0, are never selected, and never receive updates.

The coder kernels are a 32-bit low/high arithmetic coder with deferred
("pending") renormalization bits, so emitted bytes are final the moment they
are appended — nothing is ever carried back into the output buffer.  After
renormalization the interval width exceeds 2**30, so cumulative totals up to
2**30 stay exact; callers enforce tighter caps.
"""

from __future__ import annotations

BACKEND = "py"

_MASK32 = 0xFFFFFFFF
_TOP = 0x80000000
_SECOND = 0x40000000
_LOW31 = 0x7FFFFFFF

MAX_KERNEL_TOTAL = 1 << 30


def tree_select(arr, z):
    """Leaf index (0-based) for z in [0, root-1]: descend, going right
    subtracts the left child's sum from z."""
    m_pad = arr[0]
    node = 1
    while node < m_pad:
        node <<= 1
        left = arr[node]
        if z >= left:
            z -= left
            node |= 1
    return node - m_pad


def tree_update(arr, leaf, delta):
    """Add delta to a leaf and every ancestor up to the root."""
    node = arr[0] + leaf
    while node >= 1:
        arr[node] += delta
        node >>= 1


def tree_prefix(arr, leaf):
    """Sum of leaves strictly before ``leaf``."""
    node = arr[0] + leaf
    total = 0
    while node > 1:
        if node & 1:
            total += arr[node ^ 1]
        node >>= 1
    return total


def tree_step(arr, z, leaf_in):
    """Eviction step: select by z, decrement that leaf, increment leaf_in.

    Returns the evicted leaf (0-based).
    """
    evicted = tree_select(arr, z)
    tree_update(arr, evicted, -1)
    tree_update(arr, leaf_in, 1)
    return evicted


def tree_code_interval(arr, m, leaf):
    """(cum_lo, cum_hi) of the smoothed weight 2*count+1 for one leaf.

    Cumulative weights run over the m real leaves only; the total is
    2*root + m.
    """
    lo = 2 * tree_prefix(arr, leaf) + leaf
    return lo, lo + 2 * arr[arr[0] + leaf] + 1


def tree_code_find(arr, m, value):
    """Leaf whose smoothed cumulative interval contains ``value``.

    Descends with left-subtree weight 2*sum + (number of real leaves under
    the left child); valid for 0 <= value < 2*root + m.
    """
    m_pad = arr[0]
    node = 1
    lo = 0
    size = m_pad
    while node < m_pad:
        size >>= 1
        node <<= 1
        boundary = lo + size
        real = (m if m < boundary else boundary) - lo
        if real < 0:
            real = 0
        weight = 2 * arr[node] + real
        if value >= weight:
            value -= weight
            node |= 1
            lo = boundary
    return node - m_pad


class Encoder32:
    """Arithmetic encoder over integer cumulative frequencies.

    ``emitted_bytes`` grows only with fully resolved bits, so both coder
    sides can agree on which payload bytes exist at each symbol boundary.
    """

    def __init__(self):
        self.low = 0
        self.high = _MASK32
        self.pending = 0
        self.shifts = 0
        self._out = bytearray()
        self._bitbuf = 0
        self._nbits = 0

    def _emit(self, bit):
        self._bitbuf = (self._bitbuf << 1) | bit
        self._nbits += 1
        if self._nbits == 8:
            self._out.append(self._bitbuf)
            self._bitbuf = 0
            self._nbits = 0

    def encode(self, cum_lo, cum_hi, total):
        if not 0 <= cum_lo < cum_hi <= total <= MAX_KERNEL_TOTAL:
            raise ValueError("bad cumulative interval")
        low = self.low
        span = self.high - low + 1
        self.high = low + cum_hi * span // total - 1
        self.low = low + cum_lo * span // total
        low = self.low
        high = self.high
        while ((low ^ high) & _TOP) == 0:
            bit = low >> 31
            self._emit(bit)
            flip = bit ^ 1
            while self.pending:
                self._emit(flip)
                self.pending -= 1
            low = (low << 1) & _MASK32
            high = ((high << 1) & _MASK32) | 1
            self.shifts += 1
        while (low & (high ^ _MASK32) & _SECOND) != 0:
            self.pending += 1
            low = (low << 1) & _LOW31
            high = ((high << 1) & _LOW31) | _TOP | 1
            self.shifts += 1
        self.low = low
        self.high = high

    @property
    def emitted_bytes(self):
        return len(self._out)

    def buffer_slice(self, start, stop):
        return bytes(self._out[start:stop])

    def finish(self):
        """Disambiguate the final interval and pad so a decoder of the same
        symbol sequence never reads past the end (32 priming bits plus one
        bit per renormalization shift)."""
        self._emit(1)
        target = self.shifts + 32
        while len(self._out) * 8 + self._nbits < target:
            self._emit(0)
        while self._nbits:
            self._emit(0)
        return bytes(self._out)


class Decoder32:
    """Mirror of :class:`Encoder32`; tracks the same low/high trajectory.

    Reading past the end of the payload raises EOFError — with the encoder's
    padding rule that only happens on a truncated or corrupt stream.
    """

    def __init__(self, payload):
        self._data = bytes(payload)
        self._pos = 0
        self.low = 0
        self.high = _MASK32
        self.pending = 0
        self._resolved = 0
        code = 0
        for _ in range(32):
            code = (code << 1) | self._read_bit()
        self.code = code

    def _read_bit(self):
        i = self._pos >> 3
        if i >= len(self._data):
            raise EOFError("code stream exhausted")
        bit = (self._data[i] >> (7 - (self._pos & 7))) & 1
        self._pos += 1
        return bit

    def decode_target(self, total):
        span = self.high - self.low + 1
        return ((self.code - self.low + 1) * total - 1) // span

    def decode_update(self, cum_lo, cum_hi, total):
        if not 0 <= cum_lo < cum_hi <= total <= MAX_KERNEL_TOTAL:
            raise ValueError("bad cumulative interval")
        low = self.low
        span = self.high - low + 1
        self.high = low + cum_hi * span // total - 1
        self.low = low + cum_lo * span // total
        low = self.low
        high = self.high
        code = self.code
        while ((low ^ high) & _TOP) == 0:
            self._resolved += 1 + self.pending
            self.pending = 0
            code = ((code << 1) & _MASK32) | self._read_bit()
            low = (low << 1) & _MASK32
            high = ((high << 1) & _MASK32) | 1
        while (low & (high ^ _MASK32) & _SECOND) != 0:
            self.pending += 1
            code = (code & _TOP) | ((code << 1) & _LOW31) | self._read_bit()
            low = (low << 1) & _LOW31
            high = ((high << 1) & _LOW31) | _TOP | 1
        self.low = low
        self.high = high
        self.code = code

    @property
    def emitted_bytes(self):
        return self._resolved >> 3
