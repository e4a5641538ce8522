# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; semantics are defined by isw._kernel.pyref.

Every function and class here must produce bit-identical results to the pure
twin — the test suite replays both backends against each other.
"""

BACKEND = "c"

MAX_KERNEL_TOTAL = 1 << 30

cdef unsigned long long _MASK32 = 0xFFFFFFFFULL
cdef unsigned long long _TOP = 0x80000000ULL
cdef unsigned long long _SECOND = 0x40000000ULL
cdef unsigned long long _LOW31 = 0x7FFFFFFFULL
cdef unsigned long long _MAX_TOTAL = 1ULL << 30


def tree_select(object arr, long long z):
    cdef long long[::1] a = arr
    cdef Py_ssize_t m_pad = <Py_ssize_t> a[0]
    cdef Py_ssize_t node = 1
    cdef long long left
    while node < m_pad:
        node <<= 1
        left = a[node]
        if z >= left:
            z -= left
            node |= 1
    return node - m_pad


def tree_update(object arr, Py_ssize_t leaf, long long delta):
    cdef long long[::1] a = arr
    cdef Py_ssize_t node = (<Py_ssize_t> a[0]) + leaf
    while node >= 1:
        a[node] += delta
        node >>= 1


def tree_prefix(object arr, Py_ssize_t leaf):
    cdef long long[::1] a = arr
    cdef Py_ssize_t node = (<Py_ssize_t> a[0]) + leaf
    cdef long long total = 0
    while node > 1:
        if node & 1:
            total += a[node ^ 1]
        node >>= 1
    return total


def tree_step(object arr, long long z, Py_ssize_t leaf_in):
    cdef long long[::1] a = arr
    cdef Py_ssize_t m_pad = <Py_ssize_t> a[0]
    cdef Py_ssize_t node = 1
    cdef long long left
    while node < m_pad:
        node <<= 1
        left = a[node]
        if z >= left:
            z -= left
            node |= 1
    cdef Py_ssize_t evicted = node - m_pad
    while node >= 1:
        a[node] -= 1
        node >>= 1
    node = m_pad + leaf_in
    while node >= 1:
        a[node] += 1
        node >>= 1
    return evicted


def tree_code_interval(object arr, Py_ssize_t m, Py_ssize_t leaf):
    cdef long long[::1] a = arr
    cdef Py_ssize_t m_pad = <Py_ssize_t> a[0]
    cdef Py_ssize_t node = m_pad + leaf
    cdef long long total = 0
    while node > 1:
        if node & 1:
            total += a[node ^ 1]
        node >>= 1
    cdef long long lo = 2 * total + leaf
    return lo, lo + 2 * a[m_pad + leaf] + 1


def tree_code_find(object arr, Py_ssize_t m, long long value):
    cdef long long[::1] a = arr
    cdef Py_ssize_t m_pad = <Py_ssize_t> a[0]
    cdef Py_ssize_t node = 1
    cdef Py_ssize_t lo = 0, size = m_pad, boundary, real
    cdef long long weight
    while node < m_pad:
        size >>= 1
        node <<= 1
        boundary = lo + size
        real = (m if m < boundary else boundary) - lo
        if real < 0:
            real = 0
        weight = 2 * a[node] + real
        if value >= weight:
            value -= weight
            node |= 1
            lo = boundary
    return node - m_pad


cdef class Encoder32:
    cdef public unsigned long long low
    cdef public unsigned long long high
    cdef public unsigned long long pending
    cdef public unsigned long long shifts
    cdef bytearray _out
    cdef unsigned int _bitbuf
    cdef int _nbits

    def __init__(self):
        self.low = 0
        self.high = _MASK32
        self.pending = 0
        self.shifts = 0
        self._out = bytearray()
        self._bitbuf = 0
        self._nbits = 0

    cdef inline void _emit(self, unsigned int bit):
        self._bitbuf = (self._bitbuf << 1) | bit
        self._nbits += 1
        if self._nbits == 8:
            self._out.append(self._bitbuf)
            self._bitbuf = 0
            self._nbits = 0

    def encode(self, long long cum_lo, long long cum_hi, long long total):
        if not (0 <= cum_lo < cum_hi <= total <= <long long> _MAX_TOTAL):
            raise ValueError("bad cumulative interval")
        cdef unsigned long long low = self.low
        cdef unsigned long long span = self.high - low + 1
        cdef unsigned long long high = low + (<unsigned long long> cum_hi) * span / total - 1
        low = low + (<unsigned long long> cum_lo) * span / total
        cdef unsigned int bit
        while ((low ^ high) & _TOP) == 0:
            bit = <unsigned int> (low >> 31)
            self._emit(bit)
            bit ^= 1
            while self.pending:
                self._emit(bit)
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

    def buffer_slice(self, Py_ssize_t start, Py_ssize_t stop):
        return bytes(self._out[start:stop])

    def finish(self):
        self._emit(1)
        cdef unsigned long long target = self.shifts + 32
        while len(self._out) * 8 + self._nbits < <long long> target:
            self._emit(0)
        while self._nbits:
            self._emit(0)
        return bytes(self._out)


cdef class Decoder32:
    cdef public unsigned long long low
    cdef public unsigned long long high
    cdef public unsigned long long code
    cdef public unsigned long long pending
    cdef bytes _data
    cdef Py_ssize_t _pos
    cdef Py_ssize_t _len
    cdef const unsigned char* _buf
    cdef unsigned long long _resolved

    def __init__(self, payload):
        self._data = bytes(payload)
        self._buf = self._data
        self._len = len(self._data)
        self._pos = 0
        self.low = 0
        self.high = _MASK32
        self.pending = 0
        self._resolved = 0
        cdef unsigned long long code = 0
        cdef int i
        for i in range(32):
            code = (code << 1) | self._read_bit()
        self.code = code

    cdef inline unsigned int _read_bit(self) except? 0xFFFF:
        cdef Py_ssize_t i = self._pos >> 3
        if i >= self._len:
            raise EOFError("code stream exhausted")
        cdef unsigned int bit = (self._buf[i] >> (7 - (self._pos & 7))) & 1
        self._pos += 1
        return bit

    def decode_target(self, long long total):
        cdef unsigned long long span = self.high - self.low + 1
        return <long long> (((self.code - self.low + 1) * (<unsigned long long> total) - 1) / span)

    def decode_update(self, long long cum_lo, long long cum_hi, long long total):
        if not (0 <= cum_lo < cum_hi <= total <= <long long> _MAX_TOTAL):
            raise ValueError("bad cumulative interval")
        cdef unsigned long long low = self.low
        cdef unsigned long long span = self.high - low + 1
        cdef unsigned long long high = low + (<unsigned long long> cum_hi) * span / total - 1
        low = low + (<unsigned long long> cum_lo) * span / total
        cdef unsigned long long code = self.code
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
