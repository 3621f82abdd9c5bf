import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xchannel.gf2 import (
    BACKENDS,
    BitVector,
    EquationSystem,
    InconsistentSystemError,
    mask_from_indices,
    pack_bits,
    parity,
    popcount,
    tail_mask,
    unpack_bits,
)

backends = pytest.mark.parametrize("backend", sorted(BACKENDS))


def vec(bits):
    return BitVector.from_bits(bits)


def test_compiled_backend_built():
    assert "compiled" in BACKENDS


def test_bitvector_basics():
    v = BitVector.from_indices([0, 3, 70], 80)
    assert v.indices() == [0, 3, 70]
    assert v.popcount() == 3
    assert (v ^ v).popcount() == 0
    assert v[70] == 1 and v[69] == 0
    assert v.dot(BitVector.from_indices([3, 70], 80)) == 0
    with pytest.raises(ValueError):
        _ = v ^ BitVector(79)
    with pytest.raises(IndexError):
        v[80]


@given(st.lists(st.integers(0, 1), min_size=1, max_size=300))
def test_pack_round_trip(bits):
    words = pack_bits(np.array(bits, dtype=np.uint8))
    assert unpack_bits(words, len(bits)).tolist() == bits
    assert popcount(words) == sum(bits)
    assert parity(words) == sum(bits) % 2


def test_tail_mask():
    assert unpack_bits(tail_mask(70), 128).tolist() == [1] * 70 + [0] * 58
    assert popcount(tail_mask(0)) == 0


@backends
def test_spec_examples(backend):
    s = EquationSystem(3, backend)
    s.add_equation(vec([1, 0, 0]), 1)
    assert s.resolved == {0: 1}
    assert not s.add_equation(vec([1, 0, 0]), 1)
    assert s.rank == 1

    s = EquationSystem(2, backend)
    s.add_equation(vec([1, 1]), 1)
    s.add_equation(vec([0, 1]), 0)
    assert s.resolved == {0: 1, 1: 0}

    s = EquationSystem(2, backend)
    s.add_equation(vec([1, 1]), 1)
    s.substitute_known({1: 1})
    assert s.resolved[0] == 0
    s.substitute_known({1: 1})
    with pytest.raises(InconsistentSystemError):
        s.substitute_known({1: 0})

    s = EquationSystem(3, backend)
    s.substitute_known({})
    assert s.rank == 0

    s = EquationSystem(2, backend)
    s.add_equation(vec([1, 1]), 0)
    assert not s.is_determined([0])
    with pytest.raises(LookupError):
        s.extract([0])


@backends
def test_inconsistent_row(backend):
    s = EquationSystem(2, backend)
    s.add_equation(vec([1, 1]), 0)
    with pytest.raises(InconsistentSystemError):
        s.add_equation(vec([1, 1]), 1)


@backends
def test_identity_round_trip(backend):
    for plant in itertools.product([0, 1], repeat=3):
        s = EquationSystem(3, backend)
        for i in range(3):
            s.add_unit(i, plant[i])
        assert s.is_determined(range(3))
        assert s.extract(range(3)) == dict(enumerate(plant))


def _unique_by_brute_force(rows):
    sols = [x for x in itertools.product([0, 1], repeat=3) if all(sum(a * b for a, b in zip(r, x)) % 2 == 0 for r in rows)]
    return len(sols) == 1


@backends
def test_invertible_3x3_count(backend):
    solvable = oracle = 0
    for entries in itertools.product([0, 1], repeat=9):
        rows = [entries[0:3], entries[3:6], entries[6:9]]
        s = EquationSystem(3, backend)
        for r in rows:
            s.add_equation(vec(r), 0)
        solvable += s.is_determined(range(3))
        oracle += _unique_by_brute_force(rows)
    assert solvable == oracle == 168


@backends
@pytest.mark.parametrize("k", [1, 63, 64, 65, 200, 512])
def test_planted_solution(backend, k):
    rng = np.random.default_rng(k)
    plant = rng.integers(0, 2, k, dtype=np.uint8)
    pw = pack_bits(plant, k)
    s = EquationSystem(k, backend)
    while s.rank < k:
        row = rng.integers(0, np.iinfo(np.uint64).max, len(pw), dtype=np.uint64, endpoint=True) & tail_mask(k)
        s.add_equation(row, parity(row & pw))
    assert s.is_determined(tail_mask(k))
    assert [s.extract([i])[i] for i in range(k)] == plant.tolist()


rows_strategy = st.lists(st.lists(st.integers(0, 1), min_size=10, max_size=10), max_size=25)


@given(rows_strategy, st.lists(st.integers(0, 1), min_size=10, max_size=10), st.randoms())
def test_confluence_and_monotone_rank(rows, plant, rnd):
    """Same row multiset in any order gives the same resolved set; rank never drops."""
    eqs = [(r, sum(a * b for a, b in zip(r, plant)) % 2) for r in rows]
    results = []
    for _ in range(2):
        s = EquationSystem(10)
        last = 0
        for r, y in eqs:
            s.add_equation(vec(r), y)
            assert s.rank >= last
            assert s.rank <= 10
            last = s.rank
        results.append(s.resolved)
        rnd.shuffle(eqs)
    assert results[0] == results[1]
    assert all(plant[k] == v for k, v in results[0].items())


@given(rows_strategy, rows_strategy)
def test_rank_subadditive(a, b):
    def rank(rows):
        s = EquationSystem(10)
        for r in rows:
            s.add_equation(vec(r), 0)
        return s.rank

    assert rank(a + b) <= rank(a) + rank(b)
    assert rank(a + b) >= max(rank(a), rank(b))


@given(st.lists(st.tuples(st.integers(0, 129), st.integers(0, 129), st.integers(0, 1)), max_size=120), st.integers(0, 2**32 - 1))
def test_backends_bit_identical(pairs, seed):
    rng = np.random.default_rng(seed)
    plant = rng.integers(0, 2, 130, dtype=np.uint8)
    pw = pack_bits(plant, 130)
    systems = [EquationSystem(130, b) for b in sorted(BACKENDS)]
    for u, v, dense in pairs:
        if dense:
            row = rng.integers(0, np.iinfo(np.uint64).max, len(pw), dtype=np.uint64, endpoint=True) & tail_mask(130)
            for s in systems:
                s.add_equation(row, parity(row & pw))
        elif u == v:
            for s in systems:
                s.add_unit(u, int(plant[u]))
        else:
            for s in systems:
                s.add_pair(u, v, int(plant[u] ^ plant[v]))
    ref = systems[0]
    for s in systems[1:]:
        assert s.rank == ref.rank
        assert np.array_equal(s.known_words(), ref.known_words())
        assert np.array_equal(s.value_words(), ref.value_words())


def test_mask_queries():
    s = EquationSystem(100)
    s.add_unit(3, 1)
    s.add_unit(99, 0)
    assert s.covers(mask_from_indices([3, 99], 100))
    assert s.is_determined(mask_from_indices([3], 100))
    assert not s.covers(mask_from_indices([3, 4], 100))
    with pytest.raises(IndexError):
        mask_from_indices([100], 100)
    with pytest.raises(ValueError):
        s.add_equation(BitVector(99), 0)
