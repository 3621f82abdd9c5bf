"""Time-shared X-Channel scheme: multicast for W0, then the private messages."""

from __future__ import annotations

import math

from ..channel import Trace, generate_trace
from ..region import needs_split_phase
from .codes import multicast_run
from .common import MARGIN, MessageSet, SchemeReport, check_model
from .delayed import IC, MODIFIED, SWAPPED_IC, ic_symmetric_rate, run_layout


def xc_composite_run(
    model,
    r0: float,
    seed: int,
    n: int = 300_000,
    *,
    trace: Trace | None = None,
    gen_size: int | None = None,
    backend: str | None = None,
    record: list | None = None,
) -> SchemeReport:
    """A fraction r0/(1-q^2) of the block carries W01 and W02; the rest the four private messages.

    For p above the crossover the private part runs the IC scheme and its
    receiver-swapped twin back to back. Below it, one two-sub-phase run
    carries all four messages so a receiver can draw from both transmitters.
    """
    model = check_model(model)
    mac = model.mac_capacity
    if not 0 <= r0 <= mac + 1e-12:
        raise ValueError(f"common rate {r0} outside [0, {mac}]")
    gamma = min(1.0, r0 / mac) if mac else 0.0
    budget = math.ceil(n * (1 + MARGIN))
    trace = trace if trace is not None else generate_trace(model, budget, seed)
    budget = min(budget, len(trace))
    report = SchemeReport("xc", model.p, n, seed)
    report.stats["gamma"] = gamma
    t = 0
    keep = 1 - MARGIN

    if gamma > 0:
        n0 = math.ceil(gamma * n)
        k0 = math.floor(n * r0 / 2 * keep)
        seg = multicast_run(model, k0, k0, seed, n0, trace=Trace(trace.gains[t:budget]), gen_size=gen_size, backend=backend, record=record)
        report.absorb(seg, "multicast")
        t += seg.slots["total"]
        if not seg.ok:
            return _close(report)

    if gamma < 1:
        c = ic_symmetric_rate(model)
        half = (1 - gamma) * n / 2
        k = math.floor(half * c * keep)
        gains = trace.gains.tolist()
        if needs_split_phase(model):
            segments = [(MODIFIED, {"w11": k, "w12": k, "w21": k, "w22": k}, 2 * half)]
        else:
            segments = [(IC, {"w11": k, "w22": k}, half), (SWAPPED_IC, {"w21": k, "w12": k}, half)]
        for layout, sizes, n_seg in segments:
            msgs = MessageSet.generate(sizes, seed)
            bits = {m: msgs[m] for m in sizes}
            seg, t = run_layout(
                layout, model, bits, seed, gains, t, budget, n=math.ceil(n_seg), gen_size=gen_size, backend=backend, record=record
            )
            report.absorb(seg, layout.name)
            if not seg.ok:
                break
    return _close(report)


def _close(report: SchemeReport) -> SchemeReport:
    report.slots["total"] = report.slots["phase1"] + report.slots["phase2"]
    return report
