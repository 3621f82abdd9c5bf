# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled incremental GF(2) eliminator.

Rows are packed little-endian into uint64 words. The stored rows are kept in
reduced row echelon form, so a variable is determined exactly when its pivot
row is a singleton.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, uint8_t, int32_t

cnp.import_array()


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef class Eliminator:
    cdef readonly int nvars
    cdef readonly int nwords
    cdef int nrows
    cdef uint64_t[:, ::1] rows
    cdef uint8_t[::1] rhs
    cdef int32_t[::1] row_of_pivot
    cdef uint64_t[::1] pivmask
    cdef uint64_t[::1] known
    cdef uint64_t[::1] vals
    cdef uint64_t[::1] work

    def __cinit__(self, int nvars):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        self.nvars = nvars
        self.nwords = max(1, (nvars + 63) // 64)
        self.nrows = 0
        self.rows = np.zeros((max(1, nvars), self.nwords), dtype=np.uint64)
        self.rhs = np.zeros(max(1, nvars), dtype=np.uint8)
        self.row_of_pivot = np.full(max(1, nvars), -1, dtype=np.int32)
        self.pivmask = np.zeros(self.nwords, dtype=np.uint64)
        self.known = np.zeros(self.nwords, dtype=np.uint64)
        self.vals = np.zeros(self.nwords, dtype=np.uint64)
        self.work = np.zeros(self.nwords, dtype=np.uint64)

    @property
    def rank(self):
        return self.nrows

    cdef inline void _mark_if_singleton(self, int r) nogil:
        cdef int w, cnt = 0, wlast = -1
        for w in range(self.nwords):
            if self.rows[r, w]:
                cnt += __builtin_popcountll(self.rows[r, w])
                if cnt > 1:
                    return
                wlast = w
        if cnt == 1:
            self.known[wlast] |= self.rows[r, wlast]
            if self.rhs[r]:
                self.vals[wlast] |= self.rows[r, wlast]

    cdef int _insert(self, int rhs) nogil:
        # self.work holds the candidate row
        cdef int w, k, b, v, r, nw = self.nwords
        cdef uint64_t m, x, bit
        cdef int par = 0
        for w in range(nw):
            x = self.work[w] & self.known[w]
            if x:
                par ^= __builtin_popcountll(x & self.vals[w]) & 1
                self.work[w] &= ~self.known[w]
        rhs ^= par
        for w in range(nw):
            m = self.work[w] & self.pivmask[w]
            while m:
                b = __builtin_ctzll(m)
                v = w * 64 + b
                r = self.row_of_pivot[v]
                for k in range(nw):
                    self.work[k] ^= self.rows[r, k]
                rhs ^= self.rhs[r]
                m &= m - 1
        v = -1
        for w in range(nw):
            if self.work[w]:
                v = w * 64 + __builtin_ctzll(self.work[w])
                break
        if v < 0:
            return -1 if rhs else 0
        w = v >> 6
        bit = (<uint64_t>1) << (v & 63)
        for r in range(self.nrows):
            if self.rows[r, w] & bit:
                for k in range(nw):
                    self.rows[r, k] ^= self.work[k]
                self.rhs[r] ^= rhs
                self._mark_if_singleton(r)
        r = self.nrows
        for k in range(nw):
            self.rows[r, k] = self.work[k]
        self.rhs[r] = rhs
        self.row_of_pivot[v] = r
        self.pivmask[w] |= bit
        self.nrows += 1
        self._mark_if_singleton(r)
        return 1

    def add_row(self, const uint64_t[::1] row, int rhs):
        """Insert a packed row; 1 if independent, 0 if redundant, -1 if inconsistent."""
        if row.shape[0] != self.nwords:
            raise ValueError("row has %d words, expected %d" % (row.shape[0], self.nwords))
        cdef int k
        for k in range(self.nwords):
            self.work[k] = row[k]
        return self._insert(rhs & 1)

    def add_unit(self, int var, int rhs):
        if var < 0 or var >= self.nvars:
            raise IndexError(var)
        cdef int k
        for k in range(self.nwords):
            self.work[k] = 0
        self.work[var >> 6] = (<uint64_t>1) << (var & 63)
        return self._insert(rhs & 1)

    def add_pair(self, int u, int v, int rhs):
        if u < 0 or u >= self.nvars or v < 0 or v >= self.nvars:
            raise IndexError((u, v))
        cdef int k
        for k in range(self.nwords):
            self.work[k] = 0
        self.work[u >> 6] ^= (<uint64_t>1) << (u & 63)
        self.work[v >> 6] ^= (<uint64_t>1) << (v & 63)
        return self._insert(rhs & 1)

    def is_known(self, int var):
        return bool((self.known[var >> 6] >> (var & 63)) & 1)

    def value(self, int var):
        return int((self.vals[var >> 6] >> (var & 63)) & 1)

    def covers(self, const uint64_t[::1] mask):
        cdef int k
        for k in range(self.nwords):
            if mask[k] & ~self.known[k]:
                return False
        return True

    def known_words(self):
        return np.asarray(self.known).copy()

    def value_words(self):
        return np.asarray(self.vals).copy()
