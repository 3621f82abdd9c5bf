import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xchannel.channel import (
    DOMAIN_CHANNEL,
    ChannelModel,
    ChannelState,
    Trace,
    apply_channel,
    delayed_view,
    generate_trace,
    make_rng,
    sample_state,
)


def test_model_constants():
    m = ChannelModel(0.3)
    assert m.q == 1 - 0.3
    assert m.beta == 2 - 0.3
    assert 1 <= m.beta <= 2
    assert m.mac_capacity == pytest.approx(1 - 0.7**2)
    for bad in (-0.1, 1.1):
        with pytest.raises(ValueError):
            ChannelModel(bad)


@pytest.mark.parametrize("p,expected", [(1.0, (1, 1, 1, 1)), (0.0, (0, 0, 0, 0))])
def test_sample_state_degenerate(p, expected):
    rng = make_rng(1, DOMAIN_CHANNEL)
    assert all(sample_state(ChannelModel(p), rng) == expected for _ in range(50))


def test_sample_state_frequency():
    rng = make_rng(7, DOMAIN_CHANNEL)
    draws = np.array([sample_state(ChannelModel(0.5), rng) for _ in range(20_000)])
    assert np.all(np.abs(draws.mean(axis=0) - 0.5) <= 3 * math.sqrt(0.25 / len(draws)))


def test_trace_statistics():
    n = 100_000
    tr = generate_trace(ChannelModel(0.5), n, seed=3)
    g = tr.gains.astype(float)
    se = 3 * math.sqrt(0.25 / n)
    assert np.all(np.abs(g.mean(axis=0) - 0.5) <= se)
    corr = np.corrcoef(g.T)
    off = corr[~np.eye(4, dtype=bool)]
    assert np.all(np.abs(off) <= 3 / math.sqrt(n))
    heard = np.mean((tr.gains[:, 0] | tr.gains[:, 2]) == 1)
    assert abs(heard - 0.75) <= 0.005


def test_trace_determinism_and_empty():
    m = ChannelModel(0.4)
    a, b = generate_trace(m, 500, 11), generate_trace(m, 500, 11)
    assert np.array_equal(a.gains, b.gains)
    assert not np.array_equal(a.gains, generate_trace(m, 500, 12).gains)
    assert len(generate_trace(m, 0, 1)) == 0
    with pytest.raises(ValueError):
        generate_trace(m, -1, 1)


def test_delayed_view():
    tr = generate_trace(ChannelModel(0.5), 3, 5)
    assert delayed_view(tr, 1) == []
    assert delayed_view(tr, 2) == [tr[0]]
    assert delayed_view(tr, 4) == tr.states
    for t in (0, 5):
        with pytest.raises(IndexError):
            delayed_view(tr, t)


@pytest.mark.parametrize(
    "state,x,y",
    [((1, 1, 1, 1), (1, 1), (0, 0)), ((1, 0, 0, 1), (1, 1), (1, 1)), ((0, 1, 1, 0), (1, 0), (0, 1))],
)
def test_apply_channel_examples(state, x, y):
    assert apply_channel(ChannelState(*state), *x) == y


@given(st.tuples(*[st.integers(0, 1)] * 4), st.integers(0, 1), st.integers(0, 1), st.integers(0, 1), st.integers(0, 1))
def test_apply_channel_linear(s, a1, a2, b1, b2):
    ya = apply_channel(s, a1, a2)
    yb = apply_channel(s, b1, b2)
    assert apply_channel(s, a1 ^ b1, a2 ^ b2) == (ya[0] ^ yb[0], ya[1] ^ yb[1])


def test_state_gain_convention():
    s = ChannelState(1, 0, 0, 1)
    assert s.gain(1, 1) == 1 and s.gain(1, 2) == 0 and s.gain(2, 1) == 0 and s.gain(2, 2) == 1


def test_csv_round_trip(tmp_path):
    tr = generate_trace(ChannelModel(0.5), 40, 9)
    path = tmp_path / "trace.csv"
    tr.to_csv(path)
    assert path.read_text().splitlines()[0] == "t,g11,g12,g21,g22"
    assert np.array_equal(Trace.from_csv(path).gains, tr.gains)


def test_swapped_receivers():
    tr = generate_trace(ChannelModel(0.5), 20, 2)
    sw = tr.swapped_receivers()
    assert [tuple(s) for s in sw.states] == [(s.g21, s.g22, s.g11, s.g12) for s in tr.states]


def test_generator_domains_independent():
    a = make_rng(1, 0).random(5)
    b = make_rng(1, 1).random(5)
    assert not np.allclose(a, b)
    assert np.array_equal(make_rng(1, 2, 3).random(4), make_rng(1, 2, 3).random(4))
