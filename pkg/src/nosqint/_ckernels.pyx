# cython: language_level=3
"""Compiled twins of :mod:`nosqint._kernels_py` for contexts with at most 64 attributes."""

from libc.stdint cimport uint64_t
from libc.stdlib cimport free, malloc

MAX_ATTRS = 64


def levenshtein(str a, str b):
    cdef Py_ssize_t la = len(a), lb = len(b), i, j
    cdef Py_ssize_t *prev
    cdef Py_ssize_t *cur
    cdef Py_ssize_t *tmp
    cdef Py_ssize_t best, cost
    cdef Py_UCS4 ca
    if la < lb:
        a, b = b, a
        la, lb = lb, la
    prev = <Py_ssize_t *> malloc((lb + 1) * sizeof(Py_ssize_t))
    cur = <Py_ssize_t *> malloc((lb + 1) * sizeof(Py_ssize_t))
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()
    try:
        for j in range(lb + 1):
            prev[j] = j
        for i in range(1, la + 1):
            ca = a[i - 1]
            cur[0] = i
            for j in range(1, lb + 1):
                cost = 0 if ca == b[j - 1] else 1
                best = prev[j] + 1
                if cur[j - 1] + 1 < best:
                    best = cur[j - 1] + 1
                if prev[j - 1] + cost < best:
                    best = prev[j - 1] + cost
                cur[j] = best
            tmp = prev
            prev = cur
            cur = tmp
        return prev[lb]
    finally:
        free(prev)
        free(cur)


cdef inline uint64_t _full(int n) nogil:
    if n >= 64:
        return <uint64_t> 0xFFFFFFFFFFFFFFFF
    return ((<uint64_t> 1) << n) - 1


cdef inline uint64_t _close(const uint64_t *rows, Py_ssize_t n_rows, uint64_t full, uint64_t mask) nogil:
    cdef uint64_t out = full
    cdef Py_ssize_t i
    for i in range(n_rows):
        if rows[i] & mask == mask:
            out &= rows[i]
    return out


cdef uint64_t *_pack(rows, Py_ssize_t *n_out) except NULL:
    cdef Py_ssize_t n = len(rows), i
    cdef uint64_t *buf = <uint64_t *> malloc((n + 1) * sizeof(uint64_t))
    if buf == NULL:
        raise MemoryError()
    for i in range(n):
        buf[i] = rows[i]
    n_out[0] = n
    return buf


def closure(rows, int n_attrs, mask):
    if n_attrs > MAX_ATTRS:
        raise ValueError("compiled kernels handle at most 64 attributes")
    cdef Py_ssize_t n
    cdef uint64_t *buf = _pack(rows, &n)
    try:
        return _close(buf, n, _full(n_attrs), <uint64_t> mask)
    finally:
        free(buf)


def extent(rows, mask):
    cdef uint64_t m = mask
    out = 0
    for i, r in enumerate(rows):
        if (<uint64_t> r) & m == m:
            out |= 1 << i
    return out


def next_closure_intents(rows, int n_attrs):
    if n_attrs > MAX_ATTRS:
        raise ValueError("compiled kernels handle at most 64 attributes")
    cdef Py_ssize_t n
    cdef uint64_t *buf = _pack(rows, &n)
    cdef uint64_t full = _full(n_attrs)
    cdef uint64_t current, candidate, bit, low
    cdef int i
    cdef bint advanced
    out = []
    try:
        current = _close(buf, n, full, 0)
        out.append(current)
        while current != full:
            advanced = False
            for i in range(n_attrs - 1, -1, -1):
                bit = (<uint64_t> 1) << i
                if current & bit:
                    continue
                low = bit - 1
                candidate = _close(buf, n, full, (current & low) | bit)
                if candidate & low == current & low:
                    current = candidate
                    advanced = True
                    break
            if not advanced:
                break
            out.append(current)
        return out
    finally:
        free(buf)


def cover_pairs(intents):
    cdef Py_ssize_t n, lo, u, k
    cdef uint64_t a, b, c
    cdef uint64_t *buf = _pack(intents, &n)
    cdef bint covered
    pairs = []
    try:
        for lo in range(n):
            a = buf[lo]
            for u in range(n):
                b = buf[u]
                if u == lo or b & a != b or b == a:
                    continue
                covered = True
                for k in range(n):
                    c = buf[k]
                    if k != u and c & a == c and c != a and b & c == b and c != b:
                        covered = False
                        break
                if covered:
                    pairs.append((lo, u))
        return pairs
    finally:
        free(buf)
