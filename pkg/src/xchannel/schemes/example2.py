"""Common stream from Tx1 coexisting with a broadcast from Tx2.

Tx1 streams random combinations of W01 in every slot. Tx2 serves W12 (Rx1)
and W22 (Rx2) with a delayed-CSIT scheme that treats each receiver's view of
a Tx2 symbol as clean (Tx2 on, Tx1 off), collided (both on) or off.
A receiver decodes in three steps:

1. solve the Tx2 bits from clean slots only;
2. rebuild Tx2's contribution to every collided slot and cancel it;
3. solve W01 from its clean and cleaned slots.

Every pooled Tx2 bit is one both receivers end up knowing, so collided
phase-2 slots can always be cleaned.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from ..channel import DOMAIN_CODING, ChannelModel, Trace, generate_trace, make_rng
from ..gf2 import EquationSystem, nwords, pack_bits, parity, tail_mask
from .common import MARGIN, MessageSet, SchemeReport, check_model, default_generation_size, random_combination

CLEAN, COLLIDED, OFF = 0, 1, 2


def reception_mask(trace: Trace) -> np.ndarray:
    """Per slot and receiver: Tx2 heard with Tx1's link off."""
    g = trace.gains.astype(bool)
    return np.stack([g[:, 1] & ~g[:, 0], g[:, 3] & ~g[:, 2]], axis=1)


def inner_rate(model: ChannelModel, common: bool = True) -> float:
    """Expected per-message rate of the Tx2 scheme, from its classification rules."""
    p, q = model.p, model.q
    if common:
        c, x, o = p * q, p * p, q
    else:
        c, x, o = p, 0.0, q
    s = 1 - (x + o) * o
    if c == 0 or s == 0:
        return 0.0
    needed = ((x + o) * p + x) / s
    return 1 / (2 / s + needed / c)


def _view(s, i: int, tx1_on: bool) -> int:
    g1, g2 = s[2 * i], s[2 * i + 1]
    if not g2:
        return OFF
    return COLLIDED if (g1 and tx1_on) else CLEAN


def _classify(r: int, o: int) -> str:
    if r == CLEAN:
        return "DP" if o == COLLIDED else "D"
    if o == OFF:
        return "F"
    return "P"


def _support(c, length: int) -> np.ndarray:
    if isinstance(c, int):
        w = np.zeros(nwords(length), dtype=np.uint64)
        w[c >> 6] = np.uint64(1) << np.uint64(c & 63)
        return w
    return c


class _Receiver:
    def __init__(self, g01: int, u2: int, own: np.ndarray, backend):
        self.w01 = EquationSystem(max(g01, 1), backend)
        self.tx2 = EquationSystem(max(u2, 1), backend)
        self.target = own.copy()
        self.u2 = u2
        self.g01 = g01
        self.held: list[tuple[np.ndarray, object, int]] = []
        self.full01 = tail_mask(g01)

    def observe(self, s, i, c1, c2, y):
        g1 = s[2 * i] and c1 is not None
        g2 = s[2 * i + 1] and c2 is not None
        if g2 and not g1:
            if isinstance(c2, int):
                self.tx2.add_unit(c2, y)
            else:
                self.tx2.add_equation(c2, y)
        elif g2:
            self.target |= _support(c2, self.u2)
            self.held.append((c1, c2, y))
        elif g1:
            self.w01.add_equation(c1, y)

    def tx2_done(self) -> bool:
        return self.tx2.covers(self.target)

    def cancel(self) -> None:
        if not self.held or not self.tx2_done():
            return
        est = self.tx2.value_words()
        for c1, c2, y in self.held:
            x2 = (int(est[c2 >> 6]) >> (c2 & 63)) & 1 if isinstance(c2, int) else parity(c2 & est)
            self.w01.add_equation(c1, y ^ x2)
        self.held.clear()

    def done(self) -> bool:
        self.cancel()
        return self.tx2_done() and not self.held and (self.g01 == 0 or self.w01.covers(self.full01))


def example2_run(
    model,
    seed: int,
    n: int = 300_000,
    *,
    common: bool = True,
    trace: Trace | None = None,
    gen_size: int | None = None,
    backend: str | None = None,
    record: list | None = None,
) -> SchemeReport:
    """W01 from Tx1 alongside W12 and W22 from Tx2; ``common=False`` silences Tx1."""
    model = check_model(model)
    p = model.p
    budget = math.ceil(n * (1 + MARGIN))
    trace = trace if trace is not None else generate_trace(model, budget, seed)
    budget = min(budget, len(trace))
    gains = trace.gains.tolist()
    rate2 = inner_rate(model, common)
    if rate2 == 0:
        rate2 = 0.5 * model.beta * p / (1 + model.beta)  # nominal; the run will fail
    k01 = math.floor(n * p * (1 - MARGIN)) if common else 0
    if common:
        g01 = gen_size or default_generation_size(k01)
        rounds = max(1, math.ceil(k01 / g01)) if k01 else 1
        k2 = round(k01 * rate2 / p) if p else 0
    else:
        k2 = math.floor(n * rate2 * (1 - MARGIN))
        g2 = gen_size or default_generation_size(k2)
        rounds = max(1, math.ceil(k2 / g2))
    msgs = MessageSet.generate({"w01": k01, "w12": k2, "w22": k2}, seed)
    parts = {m: np.array_split(msgs[m], rounds) for m in ("w01", "w12", "w22")}
    report = SchemeReport("example2" if common else "example2-silent-tx1", p, n, seed)
    for m in ("w01", "w12", "w22"):
        report.target_bits[m] = len(msgs[m])
    rng = make_rng(seed, DOMAIN_CODING, 20)
    pool_total = 0
    t = 0
    for rnd in range(rounds):
        w01, w12, w22 = parts["w01"][rnd], parts["w12"][rnd], parts["w22"][rnd]
        g01, a, b = len(w01), len(w12), len(w22)
        u2 = a + b
        v01 = pack_bits(w01, g01)
        v2 = pack_bits(np.concatenate([w12, w22]), u2)
        bits2 = np.concatenate([w12, w22])
        intended = [1] * a + [2] * b
        own = [np.zeros(nwords(u2), np.uint64), np.zeros(nwords(u2), np.uint64)]
        for v in range(u2):
            own[intended[v] - 1][v >> 6] |= np.uint64(1) << np.uint64(v & 63)
        rx = [_Receiver(g01, u2, own[0], backend), _Receiver(g01, u2, own[1], backend)]
        full01 = tail_mask(g01)
        queue = deque(range(u2))
        pool = np.zeros(nwords(u2), np.uint64)
        pooled = 0
        while not (rx[0].done() and rx[1].done()):
            if t >= budget:
                break
            c1 = random_combination(rng, full01) if g01 else None
            x1 = parity(c1 & v01) if c1 is not None else 0
            bit = None
            if queue:
                bit = queue.popleft()
                c2, x2 = bit, int(bits2[bit])
                report.slots["phase1"] += 1
            elif pooled and not (rx[0].tx2_done() and rx[1].tx2_done()):
                c2 = random_combination(rng, pool)
                x2 = parity(c2 & v2)
                report.slots["phase2"] += 1
            else:
                c2, x2 = None, 0
                report.slots["phase2"] += 1
            if record is not None:
                record.append((x1, x2))
            s = gains[t]
            for i in range(2):
                y = (s[2 * i] & x1 if c1 is not None else 0) ^ (s[2 * i + 1] & x2 if c2 is not None else 0)
                rx[i].observe(s, i, c1, c2, y)
            if bit is not None:
                r = intended[bit] - 1
                act = _classify(_view(s, r, c1 is not None), _view(s, 1 - r, c1 is not None))
                if act == "F":
                    queue.append(bit)
                elif act in ("P", "DP"):
                    pool[bit >> 6] |= np.uint64(1) << np.uint64(bit & 63)
                    pooled += 1
            t += 1
        pool_total += pooled
        stage = None
        for i in range(2):
            r = rx[i]
            wrong2 = bool(np.any((r.tx2.value_words() ^ v2) & r.tx2.known_words() & own[i]))
            wrong1 = bool(np.any((r.w01.value_words() ^ v01) & r.w01.known_words()))
            if wrong1 or wrong2:
                report.stats["wrong_bits"] = True
            if not r.tx2_done() or wrong2:
                stage = stage or f"rx{i + 1} stage 1 (Tx2 bits)"
                report.success[f"rx{i + 1}"] = False
            elif r.held or (g01 and not r.w01.covers(full01)) or wrong1:
                stage = stage or f"rx{i + 1} stage 3 (W01)"
                report.success[f"rx{i + 1}"] = False
        if stage:
            report.stats["failure"] = f"round {rnd}: {stage}"
            break
        report.delivered_bits["w01"] += g01
        report.delivered_bits["w12"] += a
        report.delivered_bits["w22"] += b
    report.slots["total"] = t
    for key in ("rx1", "rx2"):
        report.errors[key] = 0.0 if report.success[key] else 1.0
    report.stats.update(rounds=rounds, inner_rate=rate2, pool_size=pool_total)
    return report
