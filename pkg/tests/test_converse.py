import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xchannel.channel import ChannelModel
from xchannel.converse import (
    CheckResult,
    EncoderTable,
    all_tables_n1,
    batch_gaps,
    claim_gap,
    curated_tables,
    exhaustive_check,
    identity_residual,
    joint_distribution,
    sampled_check,
    split_message,
    state_code,
    state_probs,
)

TOL = 1e-12
HALF = ChannelModel(0.5)


def w11_only(n=1):
    return EncoderTable.from_function(n, lambda m, h: m[1])


def silent(n=1):
    return EncoderTable.silent(n)


def _random_pair(seed, n, widths=((1, 1, 1), (1, 1, 1))):
    rng = np.random.default_rng(seed)
    return EncoderTable.random(n, rng, widths[0]), EncoderTable.random(n, rng, widths[1])


# --- distribution -----------------------------------------------------------------


def test_state_probs_sum_to_one():
    for p in (0.0, 0.3, 1.0):
        assert math.isclose(state_probs(ChannelModel(p)).sum(), 1.0, abs_tol=1e-15)
    assert state_code(1, 0, 0, 1) == 9
    assert split_message(0b110, (1, 1, 1)) == (0, 1, 1)


@pytest.mark.parametrize("n", [1, 2])
def test_probabilities_sum_to_one(n):
    a, b = _random_pair(0, n)
    d = joint_distribution(a, b, ChannelModel(0.3), n)
    assert abs(d.prob.sum() - 1.0) <= 1e-12


def test_single_message_output_probability():
    d = joint_distribution(w11_only(), silent(), HALF, 1)
    assert d.marginal(("y1",))[(1,)] == pytest.approx(0.25, abs=1e-15)


def test_silent_encoders_give_point_masses():
    d = joint_distribution(silent(2), silent(2), HALF, 2)
    assert d.marginal(("y1",)) == pytest.approx({(0,): 1.0})
    assert d.marginal(("y2",)) == pytest.approx({(0,): 1.0})


def test_no_links_give_point_masses():
    a, b = _random_pair(1, 2)
    d = joint_distribution(a, b, ChannelModel(0.0), 2)
    assert d.entropy(("y1",)) == 0 and d.entropy(("y2",)) == 0


def test_budget_errors():
    a, b = _random_pair(2, 2)
    with pytest.raises(ValueError):
        joint_distribution(a, b, HALF, 3)
    wide = EncoderTable.silent(1, (2, 1, 1))
    with pytest.raises(ValueError):
        joint_distribution(wide, silent(), HALF, 1)
    with pytest.raises(ValueError):
        EncoderTable((1, 1, 1), (np.zeros((8, 2), np.uint8),))


def test_table_json_roundtrip():
    a, _ = _random_pair(3, 2)
    b = EncoderTable.from_dict(json.loads(json.dumps(a.to_dict())))
    assert all(np.array_equal(x, y) for x, y in zip(a.slots, b.slots))


# --- gap examples --------------------------------------------------------------------


def test_single_message_gap():
    g = claim_gap(w11_only(), silent(), 2, HALF, 1)
    assert g.h1 == pytest.approx(0.5, abs=1e-15)
    assert g.h2 == pytest.approx(0.5, abs=1e-15)
    assert g.gap == pytest.approx(-0.25, abs=1e-15)


@pytest.mark.parametrize("claim", [1, 2])
def test_silent_gap_zero(claim):
    assert claim_gap(silent(2), silent(2), claim, HALF, 2).gap == 0


@pytest.mark.parametrize("seed", range(4))
def test_full_links_gap_zero(seed):
    a, b = _random_pair(seed, 2)
    for claim in (1, 2):
        assert abs(claim_gap(a, b, claim, ChannelModel(1.0), 2).gap) <= TOL


def test_repetition_encoder_nonpositive():
    rep = EncoderTable.from_function(2, lambda m, h: m[0] ^ m[1])
    other = EncoderTable.from_function(2, lambda m, h: m[2])
    for claim in (1, 2):
        assert claim_gap(rep, other, claim, HALF, 2).gap <= TOL


# --- batch kernel vs enumerator ----------------------------------------------------------


def _batch_of(pairs):
    n = pairs[0][0].n
    t1 = [np.stack([a.slots[t] for a, _ in pairs]) for t in range(n)]
    t2 = [np.stack([b.slots[t] for _, b in pairs]) for t in range(n)]
    t1[0], t2[0] = t1[0][:, :, 0], t2[0][:, :, 0]
    return t1, t2


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("claim", [1, 2])
def test_batch_matches_enumerator(n, claim):
    model = ChannelModel(0.35)
    pairs = [_random_pair(10 + s, n) for s in range(6)]
    pairs.append((w11_only(n), silent(n)))
    fast = batch_gaps(*_batch_of(pairs), claim, model)
    slow = [claim_gap(a, b, claim, model, n).gap for a, b in pairs]
    assert np.max(np.abs(fast - slow)) <= TOL


def test_curated_tables_shapes():
    for tx in (1, 2):
        tabs = curated_tables(tx)
        assert len(tabs) > 256
        assert all(t[0].shape == (8,) and t[1].shape == (8, 16) for t in tabs)
        # the first 256 are repetition encoders: slot 2 copies slot 1 for every history
        assert all(np.array_equal(t[1], np.repeat(t[0][:, None], 16, 1)) for t in tabs[:256])


# --- searches ---------------------------------------------------------------------------------


def test_exhaustive_half():
    res = exhaustive_check(HALF, 2)
    assert res.pairs_evaluated == 65_536
    assert res.max_gap <= TOL
    assert res.passed


def test_exhaustive_argmax_replays():
    res = exhaustive_check(ChannelModel(0.25), 1)
    enc = [EncoderTable.from_dict(res.argmax_encoder[k]) for k in ("tx1", "tx2")]
    again = claim_gap(enc[0], enc[1], 1, ChannelModel(0.25), 1).gap
    assert again == pytest.approx(res.max_gap, abs=TOL)


@pytest.mark.parametrize("p", [0.0, 1.0])
def test_exhaustive_degenerate_is_exactly_zero(p):
    res = exhaustive_check(ChannelModel(p), 2)
    assert abs(res.max_gap) <= TOL


def test_exhaustive_rejects_n2():
    with pytest.raises(ValueError):
        exhaustive_check(HALF, 2, n=2)


def test_sampled_small():
    res = sampled_check(HALF, 2, samples=2000, seed=1, curated=2000)
    assert res.passed
    assert res.extra["uniform_pairs"] == 2000
    assert res.extra["curated_pairs"] >= 2000
    d = json.loads(res.to_json())
    assert set(d) >= {"claim", "p", "n", "mode", "pairs_evaluated", "max_gap", "argmax_encoder"}


def test_sampled_reproducible():
    a = sampled_check(ChannelModel(0.75), 1, samples=600, seed=5, curated=300)
    b = sampled_check(ChannelModel(0.75), 1, samples=600, seed=5, curated=300)
    assert a.to_json() == b.to_json()


def test_sampled_empty_is_minus_infinity():
    res = sampled_check(HALF, 2, samples=0, seed=0, curated=0)
    assert res.max_gap == -math.inf
    assert res.pairs_evaluated == 0
    assert json.loads(res.to_json())["max_gap"] is None
    assert isinstance(res, CheckResult)


def test_all_tables_distinct():
    tabs = all_tables_n1()
    assert tabs.shape == (256, 8)
    assert len({t.tobytes() for t in tabs}) == 256


# --- properties ------------------------------------------------------------------------------------

probs = st.sampled_from([0.1, 0.25, 0.5, 0.75, 0.9, 1.0]) | st.floats(0.0, 1.0)


@settings(max_examples=25)
@given(seed=st.integers(0, 2**32 - 1), p=probs)
def test_gap_nonpositive_n1(seed, p):
    a, b = _random_pair(seed, 1)
    for claim in (1, 2):
        assert claim_gap(a, b, claim, ChannelModel(p), 1).gap <= TOL


@settings(max_examples=8)
@given(seed=st.integers(0, 2**32 - 1), p=probs)
def test_gap_nonpositive_n2(seed, p):
    a, b = _random_pair(seed, 2)
    for claim in (1, 2):
        assert claim_gap(a, b, claim, ChannelModel(p), 2).gap <= TOL


@settings(max_examples=10)
@given(seed=st.integers(0, 2**32 - 1), p=probs, n=st.sampled_from([1, 2]))
def test_identity_residual(seed, p, n):
    a, b = _random_pair(seed, n)
    assert abs(identity_residual(a, b, ChannelModel(p), n)) <= TOL


@settings(max_examples=15)
@given(seed=st.integers(0, 2**32 - 1), p=probs)
def test_extra_conditioning_never_increases_entropy(seed, p):
    a, b = _random_pair(seed, 1)
    model = ChannelModel(p)
    assert claim_gap(a, b, 1, model, 1).h1 <= claim_gap(a, b, 2, model, 1).h1 + TOL


@settings(max_examples=10)
@given(seed=st.integers(0, 2**32 - 1), p=probs)
def test_wider_messages(seed, p):
    a, b = _random_pair(seed, 1, widths=((2, 0, 1), (1, 1, 0)))
    for claim in (1, 2):
        assert claim_gap(a, b, claim, ChannelModel(p), 1).gap <= TOL
    assert abs(identity_residual(a, b, ChannelModel(p), 1)) <= TOL
