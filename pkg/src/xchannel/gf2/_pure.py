"""Pure-Python eliminator with the same interface as the compiled kernel.

Rows are Python integers used as bitsets; results are bit-identical to the
compiled backend because both apply the same pivot rule (lowest set bit).
"""

from __future__ import annotations

import numpy as np


def _to_int(words: np.ndarray) -> int:
    return int.from_bytes(np.ascontiguousarray(words, dtype="<u8").tobytes(), "little")


def _to_words(x: int, nwords: int) -> np.ndarray:
    return np.frombuffer(x.to_bytes(nwords * 8, "little"), dtype="<u8").astype(np.uint64)


class Eliminator:
    def __init__(self, nvars: int):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        self.nvars = nvars
        self.nwords = max(1, (nvars + 63) // 64)
        self._rows: list[int] = []
        self._rhs: list[int] = []
        self._row_of_pivot: dict[int, int] = {}
        self._pivmask = 0
        self._known = 0
        self._vals = 0

    @property
    def rank(self) -> int:
        return len(self._rows)

    def _mark_if_singleton(self, r: int) -> None:
        row = self._rows[r]
        if row & (row - 1) == 0:
            self._known |= row
            if self._rhs[r]:
                self._vals |= row

    def _insert(self, row: int, rhs: int) -> int:
        hit = row & self._known
        if hit:
            rhs ^= (hit & self._vals).bit_count() & 1
            row &= ~self._known
        m = row & self._pivmask
        while m:
            low = m & -m
            r = self._row_of_pivot[low.bit_length() - 1]
            row ^= self._rows[r]
            rhs ^= self._rhs[r]
            m ^= low
        if row == 0:
            return -1 if rhs else 0
        low = row & -row
        v = low.bit_length() - 1
        rows, rhss = self._rows, self._rhs
        for r in range(len(rows)):
            if rows[r] & low:
                rows[r] ^= row
                rhss[r] ^= rhs
                self._mark_if_singleton(r)
        rows.append(row)
        rhss.append(rhs)
        self._row_of_pivot[v] = len(rows) - 1
        self._pivmask |= low
        self._mark_if_singleton(len(rows) - 1)
        return 1

    def add_row(self, row: np.ndarray, rhs: int) -> int:
        if len(row) != self.nwords:
            raise ValueError(f"row has {len(row)} words, expected {self.nwords}")
        return self._insert(_to_int(row), rhs & 1)

    def add_unit(self, var: int, rhs: int) -> int:
        if not 0 <= var < self.nvars:
            raise IndexError(var)
        return self._insert(1 << var, rhs & 1)

    def add_pair(self, u: int, v: int, rhs: int) -> int:
        if not (0 <= u < self.nvars and 0 <= v < self.nvars):
            raise IndexError((u, v))
        return self._insert((1 << u) ^ (1 << v), rhs & 1)

    def is_known(self, var: int) -> bool:
        return bool((self._known >> var) & 1)

    def value(self, var: int) -> int:
        return (self._vals >> var) & 1

    def covers(self, mask: np.ndarray) -> bool:
        return _to_int(mask) & ~self._known == 0

    def known_words(self) -> np.ndarray:
        return _to_words(self._known, self.nwords)

    def value_words(self) -> np.ndarray:
        return _to_words(self._vals, self.nwords)
