"""Rateless random-linear codes: point-to-point, multicast and MAC corner."""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator

import numpy as np

from ..channel import DOMAIN_CODING, ChannelModel, Trace, apply_channel, generate_trace, make_rng
from ..gf2 import EquationSystem, nwords, pack_bits, parity, tail_mask, unpack_bits
from .common import (
    MARGIN,
    MessageSet,
    SchemeReport,
    check_model,
    default_generation_size,
    generation_count,
    random_combination,
    receive,
)


class UndeterminedError(LookupError):
    """Fewer independent equations than payload bits."""


def p2p_erasure_encode(k: int, payload, rng: np.random.Generator) -> Iterator[tuple[np.ndarray, int]]:
    """Endless stream of (coefficient words, symbol) over the k payload bits."""
    if k < 1:
        raise ValueError("k must be at least 1")
    payload = np.asarray(payload, dtype=np.uint8)
    if len(payload) != k:
        raise ValueError("payload length differs from k")
    words = pack_bits(payload, k)
    full = tail_mask(k)
    while True:
        c = random_combination(rng, full)
        yield c, parity(c & words)


def p2p_erasure_decode(equations: Iterable[tuple[np.ndarray, int]], k: int, backend: str | None = None) -> np.ndarray:
    sys = EquationSystem(k, backend)
    for c, y in equations:
        sys.add_equation(c, y)
    if sys.rank < k:
        raise UndeterminedError(f"rank {sys.rank} < {k}")
    return unpack_bits(sys.value_words(), k).copy()


def _stream(
    name: str,
    model: ChannelModel,
    bits: tuple[np.ndarray, np.ndarray],
    messages: tuple[str, str],
    listeners: tuple[int, ...],
    seed: int,
    n: int,
    trace: Trace | None,
    tag: int,
    gen_size: int | None,
    backend: str | None,
    record: list | None = None,
) -> SchemeReport:
    """Both transmitters stream random combinations of their own bits every slot.

    A generation ends when every receiver in ``listeners`` has solved it.
    No channel state is used by the transmitters.
    """
    budget = math.ceil(n * (1 + MARGIN))
    trace = trace if trace is not None else generate_trace(model, budget, seed)
    budget = min(budget, len(trace))
    gains = trace.gains
    report = SchemeReport(name, model.p, n, seed)
    for m, b in zip(messages, bits):
        report.target_bits[m] = len(b)
    sizes = [len(b) for b in bits]
    gen_size = gen_size or default_generation_size(max(sizes))
    count = generation_count(sizes, gen_size)
    parts = [np.array_split(b, count) for b in bits] if count else []
    rng = make_rng(seed, DOMAIN_CODING, tag)
    t = 0
    for g in range(count):
        a, b = parts[0][g], parts[1][g]
        U = len(a) + len(b)
        vals = pack_bits(np.concatenate([a, b]), U)
        masks = (_range_mask(0, len(a), U), _range_mask(len(a), U, U))
        rx = {i: EquationSystem(U, backend) for i in listeners}
        full = tail_mask(U)
        while not all(s.covers(full) for s in rx.values()):
            if t >= budget:
                break
            c1 = random_combination(rng, masks[0]) if len(a) else None
            c2 = random_combination(rng, masks[1]) if len(b) else None
            x1 = parity(c1 & vals) if c1 is not None else 0
            x2 = parity(c2 & vals) if c2 is not None else 0
            if record is not None:
                record.append((x1, x2))
            s = gains[t]
            y = apply_channel(s, x1, x2)
            for i, sys in rx.items():
                receive(sys, (int(s[2 * i - 2]), int(s[2 * i - 1])), (c1, c2), y[i - 1])
            t += 1
        ok = True
        for i, sys in rx.items():
            decoded = sys.covers(full)
            if np.any((sys.value_words() ^ vals) & sys.known_words()):
                report.stats["wrong_bits"] = True
                decoded = False
            if not decoded:
                report.success[f"rx{i}"] = False
                ok = False
        if not ok:
            report.stats["failure"] = f"generation {g}: budget"
            break
        report.delivered_bits[messages[0]] += len(a)
        report.delivered_bits[messages[1]] += len(b)
    report.slots.update(phase1=t, phase2=0, total=t)
    for i in listeners:
        report.errors[f"rx{i}"] = 0.0 if report.success[f"rx{i}"] else 1.0
    report.stats.update(generations=count, generation_size=gen_size)
    return report


def _range_mask(lo: int, hi: int, length: int) -> np.ndarray:
    """Words with bits lo..hi-1 set, sized for ``length`` bits."""
    out = np.zeros(nwords(length), dtype=np.uint64)
    hi_words = tail_mask(hi)
    out[: len(hi_words)] = hi_words
    lo_words = tail_mask(lo)
    out[: len(lo_words)] &= ~lo_words
    return out


def multicast_run(
    model, kA: int, kB: int, seed: int, n: int | None = None, *, trace=None, gen_size=None, backend=None, record=None
) -> SchemeReport:
    """Common messages: Tx1 sends W01, Tx2 sends W02, both receivers decode both."""
    model = check_model(model)
    n = n or max(1, math.ceil((kA + kB) / (model.mac_capacity * (1 - MARGIN))))
    msgs = MessageSet.generate({"w01": kA, "w02": kB}, seed)
    return _stream("multicast", model, (msgs["w01"], msgs["w02"]), ("w01", "w02"), (1, 2), seed, n, trace, 10, gen_size, backend, record)


def mac_corner_run(
    model, kA: int, kB: int, seed: int, n: int | None = None, *, trace=None, gen_size=None, backend=None, record=None
) -> SchemeReport:
    """Both transmitters serve Rx1 only (W11 and W12): the multiple-access corner."""
    model = check_model(model)
    n = n or max(1, math.ceil((kA + kB) / (model.mac_capacity * (1 - MARGIN))))
    msgs = MessageSet.generate({"w11": kA, "w12": kB}, seed)
    return _stream("mac-corner", model, (msgs["w11"], msgs["w12"]), ("w11", "w12"), (1,), seed, n, trace, 11, gen_size, backend, record)
