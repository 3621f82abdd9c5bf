"""Delayed-CSIT broadcast, interference and low-p schemes on top of the engine."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..channel import DOMAIN_CODING, ChannelModel, Trace, generate_trace, make_rng
from ..region import bc_polygon
from .common import (
    MARGIN,
    MessageSet,
    SchemeReport,
    check_model,
    default_generation_size,
    generation_count,
)
from .engine import IC_TABLE, SAME_RX_TABLE, Generation, bc_rule, run_generation, table_rule

INTENDED = {"w11": 1, "w12": 1, "w21": 2, "w22": 2}
OWNER = {"w11": 1, "w21": 1, "w12": 2, "w22": 2}


@dataclass(frozen=True)
class Layout:
    """Which messages a segment carries and in which phase-1 sub-phase each goes."""

    name: str
    tag: int
    phases: tuple[tuple[tuple[str, ...], object], ...]  # ((messages...), rule factory)

    @property
    def messages(self) -> tuple[str, ...]:
        return tuple(m for ms, _ in self.phases for m in ms)


IC = Layout("ic", 1, ((("w11", "w22"), lambda intended: table_rule(IC_TABLE)),))
SWAPPED_IC = Layout("swapped-ic", 2, ((("w21", "w12"), lambda intended: table_rule(IC_TABLE, swapped=True)),))
MODIFIED = Layout(
    "ic-two-subphase",
    3,
    (
        (("w11", "w12"), lambda intended: table_rule(SAME_RX_TABLE)),
        (("w21", "w22"), lambda intended: table_rule(SAME_RX_TABLE, swapped=True)),
    ),
)


def bc_layout(tx: int) -> Layout:
    msgs = (f"w1{tx}", f"w2{tx}")
    return Layout(f"bc{tx}", 3 + tx, ((msgs, lambda intended: bc_rule(tx, intended)),))


def ic_symmetric_rate(model: ChannelModel) -> float:
    return model.beta * model.mac_capacity / (1 + model.beta)


def _budget(n: int) -> int:
    return math.ceil(n * (1 + MARGIN))


def _build(layout: Layout, chunks: dict[str, np.ndarray]) -> Generation:
    order = [m for m in layout.messages if OWNER[m] == 1] + [m for m in layout.messages if OWNER[m] == 2]
    start, offsets, values, intended = 0, {}, [], []
    for m in order:
        offsets[m] = start
        values.append(chunks[m])
        intended.append(np.full(len(chunks[m]), INTENDED[m], dtype=np.uint8))
        start += len(chunks[m])
    values = np.concatenate(values) if values else np.zeros(0, np.uint8)
    intended = np.concatenate(intended) if intended else np.zeros(0, np.uint8)
    n1 = sum(len(chunks[m]) for m in order if OWNER[m] == 1)
    phases = []
    for ms, factory in layout.phases:
        queues = ([], [])
        for m in ms:
            queues[OWNER[m] - 1].extend(range(offsets[m], offsets[m] + len(chunks[m])))
        phases.append((queues[0], queues[1], factory(intended)))
    segments = [(m, offsets[m], len(chunks[m])) for m in order]
    return Generation(values, n1, intended, phases, segments)


def run_layout(
    layout: Layout,
    model: ChannelModel,
    bits: dict[str, np.ndarray],
    seed: int,
    gains: list,
    t0: int,
    t_end: int,
    *,
    n: int,
    gen_size: int | None = None,
    mask: np.ndarray | None = None,
    backend: str | None = None,
    check_mirror: bool = False,
    record: list | None = None,
) -> tuple[SchemeReport, int]:
    """Run every generation of ``layout`` from slot ``t0``; return the report and next free slot."""
    report = SchemeReport(layout.name, model.p, n, seed)
    sizes = [len(bits.get(m, ())) for m in layout.messages]
    gen_size = gen_size or default_generation_size(max(sizes, default=0))
    count = generation_count(sizes, gen_size)
    splits = {m: np.array_split(np.asarray(bits.get(m, np.zeros(0, np.uint8))), max(count, 1)) for m in layout.messages}
    for m in layout.messages:
        report.target_bits[m] = len(bits.get(m, ()))
    rng = make_rng(seed, DOMAIN_CODING, layout.tag)
    events: Counter = Counter()
    pools = [0, 0]
    known = [0, 0]
    wrong = [False, False]
    t = t0
    for g in range(count):
        gen = _build(layout, {m: splits[m][g] for m in layout.messages})
        res = run_generation(
            gen, gains, t, t_end, rng, mask=mask, backend=backend, check_mirror=check_mirror, record=record
        )
        t += res.phase1 + res.phase2
        report.slots["phase1"] += res.phase1
        report.slots["phase2"] += res.phase2
        events.update(res.events)
        pools[0] += res.pool_sizes[0]
        pools[1] += res.pool_sizes[1]
        known[0] += int(res.known_at[:, 0].sum())
        known[1] += int(res.known_at[:, 1].sum())
        for m, _, size in gen.segments:
            if res.decoded[INTENDED[m] - 1]:
                report.delivered_bits[m] += size
        for i in range(2):
            wrong[i] = wrong[i] or res.wrong[i]
        if not res.success:
            for i, key in enumerate(("rx1", "rx2")):
                report.success[key] = report.success[key] and res.decoded[i]
            report.stats["failure"] = f"generation {g}: {res.failure or 'undetermined'}"
            break
    report.slots["total"] = report.slots["phase1"] + report.slots["phase2"]
    for i, key in enumerate(("rx1", "rx2")):
        if report.target_bits and not any(report.target_bits[m] for m in layout.messages if INTENDED[m] == i + 1):
            continue
        report.errors[key] = 0.0 if report.success[key] else 1.0
    report.stats.update(
        generations=count,
        generation_size=gen_size,
        events=dict(sorted(events.items())),
        pool_sizes={"tx1": pools[0], "tx2": pools[1]},
        side_info={"rx1": known[0], "rx2": known[1]},
        wrong_bits={"rx1": wrong[0], "rx2": wrong[1]},
    )
    return report, t


def _standalone(
    layout: Layout,
    model,
    bits: dict[str, np.ndarray],
    seed: int,
    n: int,
    trace: Trace | None,
    **kw,
) -> SchemeReport:
    model = check_model(model)
    trace = trace if trace is not None else generate_trace(model, _budget(n), seed)
    budget = min(len(trace), _budget(n))
    report, _ = run_layout(layout, model, bits, seed, trace.gains.tolist(), 0, budget, n=n, **kw)
    return report


def _default_n(k: int, rate: float) -> int:
    return max(1, math.ceil(k / max(rate * (1 - MARGIN), 1e-12)))


def _bits(seed: int, sizes: dict[str, int]) -> dict[str, np.ndarray]:
    msgs = MessageSet.generate(sizes, seed)
    return {m: msgs[m] for m in sizes}


def ic_delayed_run(model, k1: int, k2: int, seed: int, n: int | None = None, *, trace=None, **kw) -> SchemeReport:
    """Tx1 -> Rx1 and Tx2 -> Rx2 with delayed CSIT."""
    model = check_model(model)
    n = n or _default_n(max(k1, k2), ic_symmetric_rate(model))
    return _standalone(IC, model, _bits(seed, {"w11": k1, "w22": k2}), seed, n, trace, **kw)


def swapped_ic_run(model, k1: int, k2: int, seed: int, n: int | None = None, *, trace=None, **kw) -> SchemeReport:
    """Tx1 -> Rx2 and Tx2 -> Rx1: the IC table on receiver-swapped states."""
    model = check_model(model)
    n = n or _default_n(max(k1, k2), ic_symmetric_rate(model))
    return _standalone(SWAPPED_IC, model, _bits(seed, {"w21": k1, "w12": k2}), seed, n, trace, **kw)


def two_subphase_run(
    model, k11: int, k12: int, k21: int, k22: int, seed: int, n: int | None = None, *, trace=None, **kw
) -> SchemeReport:
    """All four private messages; sub-phase A serves Rx1 from both sides, then B serves Rx2."""
    model = check_model(model)
    sizes = {"w11": k11, "w12": k12, "w21": k21, "w22": k22}
    n = n or _default_n(max(k11 + k12, k21 + k22), ic_symmetric_rate(model))
    return _standalone(MODIFIED, model, _bits(seed, sizes), seed, n, trace, **kw)


def bc_delayed_run(
    model,
    j: int,
    k1: int,
    k2: int,
    seed: int,
    n: int | None = None,
    *,
    trace=None,
    reception_mask: np.ndarray | None = None,
    **kw,
) -> SchemeReport:
    """Transmitter ``j`` alone serves both receivers; the other transmitter is silent.

    ``reception_mask`` (shape (slots, 2)) marks which slots each receiver may
    use; a masked slot behaves as an erasure for classification as well.
    """
    if j not in (1, 2):
        raise ValueError("transmitting side must be 1 or 2")
    model = check_model(model)
    if n is None:
        corner = bc_polygon(0.0, model)
        sym = max(min(v) for v in corner) if corner else 0.0
        n = _default_n(max(k1, k2), sym)
    sizes = {f"w1{j}": k1, f"w2{j}": k2}
    return _standalone(bc_layout(j), model, _bits(seed, sizes), seed, n, trace, mask=reception_mask, **kw)
