"""Dense GF(2) linear algebra: packed bit vectors and incremental elimination.

The hot loop lives in a compiled extension (``_kernel``). When it is missing,
or when ``XCHANNEL_PURE_PYTHON=1`` is set, the bit-identical pure-Python
eliminator is used instead.
"""

from __future__ import annotations

import os
from collections.abc import Iterable, Mapping

import numpy as np

from . import _pure

try:
    if os.environ.get("XCHANNEL_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend forced")
    from . import _kernel  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on the build
    _kernel = None

BACKENDS = {"python": _pure.Eliminator}
if _kernel is not None:
    BACKENDS["compiled"] = _kernel.Eliminator
DEFAULT_BACKEND = "compiled" if _kernel is not None else "python"


def make_eliminator(nvars: int, backend: str | None = None):
    return BACKENDS[backend or DEFAULT_BACKEND](nvars)


class InconsistentSystemError(RuntimeError):
    """A reduced row read 0 = 1: the simulated observations contradict each other."""


def nwords(length: int) -> int:
    return max(1, (length + 63) // 64)


def pack_bits(bits: np.ndarray, length: int | None = None) -> np.ndarray:
    """Pack a 0/1 array into little-endian uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    length = len(bits) if length is None else length
    out = np.zeros(nwords(length) * 8, dtype=np.uint8)
    packed = np.packbits(bits, bitorder="little")
    out[: len(packed)] = packed
    return out.view("<u8").astype(np.uint64)


def unpack_bits(words: np.ndarray, length: int) -> np.ndarray:
    raw = np.ascontiguousarray(words, dtype="<u8").view(np.uint8)
    return np.unpackbits(raw, bitorder="little")[:length]


def parity(words: np.ndarray) -> int:
    return int(np.bitwise_xor.reduce(words, initial=np.uint64(0))).bit_count() & 1


def popcount(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum())


def mask_from_indices(indices: Iterable[int], length: int) -> np.ndarray:
    words = np.zeros(nwords(length), dtype=np.uint64)
    for i in indices:
        if not 0 <= i < length:
            raise IndexError(i)
        words[i >> 6] ^= np.uint64(1) << np.uint64(i & 63)
    return words


def tail_mask(length: int) -> np.ndarray:
    """Words with exactly the first ``length`` bits set."""
    words = np.zeros(nwords(length), dtype=np.uint64)
    full, rest = divmod(length, 64)
    words[:full] = np.uint64(0xFFFFFFFFFFFFFFFF)
    if rest:
        words[full] = np.uint64((1 << rest) - 1)
    return words


class BitVector:
    """Fixed-length packed binary vector."""

    __slots__ = ("words", "length")

    def __init__(self, length: int, words: np.ndarray | None = None):
        self.length = length
        if words is None:
            words = np.zeros(nwords(length), dtype=np.uint64)
        elif len(words) != nwords(length):
            raise ValueError("word count does not match length")
        self.words = np.asarray(words, dtype=np.uint64)

    @classmethod
    def from_bits(cls, bits) -> BitVector:
        bits = np.asarray(bits, dtype=np.uint8)
        return cls(len(bits), pack_bits(bits))

    @classmethod
    def from_indices(cls, indices: Iterable[int], length: int) -> BitVector:
        return cls(length, mask_from_indices(indices, length))

    def bits(self) -> np.ndarray:
        return unpack_bits(self.words, self.length)

    def indices(self) -> list[int]:
        return np.flatnonzero(self.bits()).tolist()

    def popcount(self) -> int:
        return popcount(self.words)

    def dot(self, other: BitVector) -> int:
        return parity(self.words & other.words)

    def __xor__(self, other: BitVector) -> BitVector:
        if other.length != self.length:
            raise ValueError("length mismatch")
        return BitVector(self.length, self.words ^ other.words)

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return int((self.words[i >> 6] >> np.uint64(i & 63)) & np.uint64(1))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitVector)
            and other.length == self.length
            and bool(np.array_equal(self.words, other.words))
        )

    def __len__(self) -> int:
        return self.length

    def __repr__(self) -> str:
        return f"BitVector({''.join(map(str, self.bits()))})"


class EquationSystem:
    """A receiver's accumulated GF(2) equations over a fixed variable universe.

    Rows are kept fully reduced, with already-resolved variables substituted
    out, so ``resolved`` always lists every variable with a unique value.
    """

    def __init__(self, universe: int, backend: str | None = None):
        self.universe = universe
        self.backend = backend or DEFAULT_BACKEND
        self._elim = make_eliminator(universe, self.backend)

    @property
    def rank(self) -> int:
        return self._elim.rank

    @property
    def nwords(self) -> int:
        return self._elim.nwords

    def _check(self, status: int) -> bool:
        if status < 0:
            raise InconsistentSystemError("equation reduced to 0 = 1")
        return status == 1

    def add_equation(self, coeffs: BitVector | np.ndarray, rhs: int) -> bool:
        """Insert one equation; returns True if it raised the rank."""
        if isinstance(coeffs, BitVector):
            if coeffs.length != self.universe:
                raise ValueError("coefficient length does not match universe")
            coeffs = coeffs.words
        return self._check(self._elim.add_row(np.ascontiguousarray(coeffs, dtype=np.uint64), rhs))

    def add_unit(self, var: int, rhs: int) -> bool:
        return self._check(self._elim.add_unit(var, rhs))

    def add_pair(self, u: int, v: int, rhs: int) -> bool:
        return self._check(self._elim.add_pair(u, v, rhs))

    def substitute_known(self, assignments: Mapping[int, int]) -> None:
        for var, bit in assignments.items():
            if not 0 <= var < self.universe:
                raise IndexError(var)
            if self._elim.is_known(var) and self._elim.value(var) != (bit & 1):
                raise InconsistentSystemError(f"variable {var} already resolved to the other value")
            self.add_unit(var, bit)

    def is_known(self, var: int) -> bool:
        return self._elim.is_known(var)

    def is_determined(self, targets: Iterable[int] | np.ndarray) -> bool:
        if isinstance(targets, np.ndarray) and targets.dtype == np.uint64:
            return self._elim.covers(targets)
        return all(self._elim.is_known(t) for t in targets)

    def covers(self, mask: np.ndarray) -> bool:
        return self._elim.covers(mask)

    def extract(self, targets: Iterable[int]) -> dict[int, int]:
        targets = list(targets)
        missing = [t for t in targets if not self._elim.is_known(t)]
        if missing:
            raise LookupError(f"{len(missing)} target variable(s) undetermined, first {missing[0]}")
        return {t: self._elim.value(t) for t in targets}

    def known_words(self) -> np.ndarray:
        return self._elim.known_words()

    def value_words(self) -> np.ndarray:
        return self._elim.value_words()

    @property
    def resolved(self) -> dict[int, int]:
        known = unpack_bits(self._elim.known_words(), self.universe)
        vals = unpack_bits(self._elim.value_words(), self.universe)
        return {int(i): int(vals[i]) for i in np.flatnonzero(known)}


__all__ = [
    "BACKENDS",
    "DEFAULT_BACKEND",
    "BitVector",
    "EquationSystem",
    "InconsistentSystemError",
    "make_eliminator",
    "mask_from_indices",
    "nwords",
    "pack_bits",
    "parity",
    "popcount",
    "tail_mask",
    "unpack_bits",
]
