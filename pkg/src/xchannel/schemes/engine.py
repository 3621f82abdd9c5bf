"""Two-phase delayed-CSIT engine shared by the BC, IC and low-p schemes.

One generation is a small block of message bits from both transmitters.
Phase 1 sends them uncoded; after every slot the fed-back state sorts each
bit into delivered, retry, pool or pending. Phase 2 streams random linear
combinations of each transmitter's pool until both receivers can solve for
every bit they want. Receivers keep every observation as a GF(2) equation.
"""

from __future__ import annotations

from collections import Counter, deque
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from ..channel import apply_channel
from ..gf2 import EquationSystem, mask_from_indices, nwords, pack_bits, parity
from .common import random_combination, receive


class BitStatus(IntEnum):
    FRESH = 0
    DELIVERED = 1
    COMMON_POOL = 2
    ONESIDED_POOL = 3
    PENDING = 4  # resolvable once the other bit of the same XOR is learned


# Slot outcomes for one in-flight bit.
DELIVER, RETRY, POOL, PENDING, DELIVER_POOL = "D", "F", "P", "R", "DP"

State = tuple[int, int, int, int]
Rule = Callable[[State, int, "int | None", "int | None"], tuple[str, str]]


class MirrorMismatch(RuntimeError):
    """A transmitter-side replica disagrees with the receiver it tracks."""


# Tx1 sends a for Rx1, Tx2 sends b for Rx2. Keyed on (g11, g12, g21, g22).
# None marks the all-on state, where the two bits take turns being pooled.
IC_TABLE: dict[State, tuple[str, str] | None] = {
    (0, 0, 0, 0): (RETRY, RETRY),
    (0, 0, 0, 1): (RETRY, DELIVER),
    (0, 0, 1, 0): (POOL, RETRY),
    (0, 0, 1, 1): (POOL, PENDING),
    (0, 1, 0, 0): (RETRY, POOL),
    (0, 1, 0, 1): (RETRY, DELIVER),
    (0, 1, 1, 0): (POOL, POOL),
    (0, 1, 1, 1): (POOL, PENDING),
    (1, 0, 0, 0): (DELIVER, RETRY),
    (1, 0, 0, 1): (DELIVER, DELIVER),
    (1, 0, 1, 0): (DELIVER, RETRY),
    (1, 0, 1, 1): (DELIVER_POOL, PENDING),
    (1, 1, 0, 0): (PENDING, POOL),
    (1, 1, 0, 1): (PENDING, DELIVER_POOL),
    (1, 1, 1, 0): (PENDING, POOL),
    (1, 1, 1, 1): None,
}

# Both bits are for Rx1 (a from Tx1, a' from Tx2). A pooled bit is always
# one the other receiver saw in the clear, so it costs that receiver nothing.
SAME_RX_TABLE: dict[State, tuple[str, str] | None] = {
    (0, 0, 0, 0): (RETRY, RETRY),
    (0, 0, 0, 1): (RETRY, POOL),
    (0, 0, 1, 0): (POOL, RETRY),
    (0, 0, 1, 1): (RETRY, RETRY),
    (0, 1, 0, 0): (RETRY, DELIVER),
    (0, 1, 0, 1): (RETRY, DELIVER),
    (0, 1, 1, 0): (POOL, DELIVER),
    (0, 1, 1, 1): (RETRY, DELIVER),
    (1, 0, 0, 0): (DELIVER, RETRY),
    (1, 0, 0, 1): (DELIVER, POOL),
    (1, 0, 1, 0): (DELIVER, RETRY),
    (1, 0, 1, 1): (DELIVER, RETRY),
    (1, 1, 0, 0): None,
    (1, 1, 0, 1): (PENDING, POOL),
    (1, 1, 1, 0): (POOL, PENDING),
    (1, 1, 1, 1): None,
}

_ALTERNATES = {
    id(IC_TABLE): ((POOL, PENDING), (PENDING, POOL)),
    id(SAME_RX_TABLE): ((PENDING, RETRY), (RETRY, PENDING)),
}


def swap_receivers(s: State) -> State:
    return (s[2], s[3], s[0], s[1])


def table_rule(table: dict, swapped: bool = False) -> Rule:
    """Classification by table lookup; ``swapped`` relabels the receivers."""
    alt = _ALTERNATES[id(table)]

    def rule(s, t, a, b):
        key = swap_receivers(s) if swapped else s
        out = table[key]
        return alt[t & 1] if out is None else out

    return rule


def bc_rule(tx: int, intended: np.ndarray) -> Rule:
    """Single transmitter: keep until someone hears it; pool if only the other did."""
    col = tx - 1

    def classify(s, v):
        r = int(intended[v]) - 1
        if s[2 * r + col]:
            return DELIVER
        if s[2 * (1 - r) + col]:
            return POOL
        return RETRY

    def rule(s, t, a, b):
        v = a if col == 0 else b
        out = classify(s, v)
        return (out, RETRY) if col == 0 else (RETRY, out)

    return rule


@dataclass
class Generation:
    """Variables ``0..n1-1`` belong to Tx1, the rest to Tx2."""

    values: np.ndarray
    n1: int
    intended: np.ndarray
    phases: list[tuple[Sequence[int], Sequence[int], Rule]]
    segments: list[tuple[str, int, int]] = field(default_factory=list)

    @property
    def universe(self) -> int:
        return len(self.values)


@dataclass
class GenerationResult:
    success: bool
    decoded: tuple[bool, bool]
    wrong: tuple[bool, bool]
    phase1: int
    phase2: int
    status: np.ndarray
    known_at: np.ndarray
    pool_sizes: tuple[int, int]
    events: Counter
    failure: str | None = None
    rx: tuple[EquationSystem, EquationSystem] | None = None


def run_generation(
    gen: Generation,
    gains: list[State],
    t0: int,
    t_end: int,
    rng: np.random.Generator,
    *,
    mask: np.ndarray | None = None,
    backend: str | None = None,
    check_mirror: bool = False,
    record: list | None = None,
) -> GenerationResult:
    """Run one generation starting at absolute slot ``t0``; never touch slot ``t_end``.

    ``mask[t, i]`` false hides slot t from receiver i (and from the
    classification, since the transmitters learn the mask with the state).
    """
    U = gen.universe
    vals = gen.values
    valwords = pack_bits(vals, U)
    rx = (EquationSystem(U, backend), EquationSystem(U, backend))
    mirror = (EquationSystem(U, backend), EquationSystem(U, backend)) if check_mirror else None
    watch = mirror or rx
    targets = [mask_from_indices(np.flatnonzero(gen.intended == i + 1), U) for i in range(2)]
    status = np.zeros(U, dtype=np.int8)
    known_at = np.zeros((U, 2), dtype=bool)
    pools = [np.zeros(nwords(U), dtype=np.uint64), np.zeros(nwords(U), dtype=np.uint64)]
    pool_count = [0, 0]
    events: Counter = Counter()
    t = t0
    phase1 = phase2 = 0

    def finish(failure=None):
        wrong = tuple(
            bool(np.any((rx[i].value_words() ^ valwords) & targets[i] & rx[i].known_words())) for i in range(2)
        )
        decoded = tuple(rx[i].covers(targets[i]) and not wrong[i] for i in range(2))
        if all(decoded):
            status[:] = BitStatus.DELIVERED
        return GenerationResult(
            all(decoded), decoded, wrong, phase1, phase2, status, known_at,
            tuple(pool_count), events, failure, rx,
        )

    def observe(s, c1, c2, x1, x2):
        y = apply_channel(s, x1, x2)
        for i in range(2):
            if mask is not None and not mask[t, i]:
                continue
            g = (s[2 * i], s[2 * i + 1])
            receive(rx[i], g, (c1, c2), y[i])
            if mirror is not None:
                receive(mirror[i], g, (c1, c2), 0)
                if mirror[i].rank != rx[i].rank:
                    raise MirrorMismatch(f"slot {t}: replica rank {mirror[i].rank} != receiver rank {rx[i].rank}")
        if record is not None:
            record.append((x1, x2))

    def effective(s, a, b):
        g11, g12, g21, g22 = s
        if a is None:
            g11 = g21 = 0
        if b is None:
            g12 = g22 = 0
        if mask is not None:
            if not mask[t, 0]:
                g11 = g12 = 0
            if not mask[t, 1]:
                g21 = g22 = 0
        return (g11, g12, g21, g22)

    for q1_init, q2_init, rule in gen.phases:
        queues = (deque(q1_init), deque(q2_init))
        while queues[0] or queues[1]:
            if t >= t_end:
                return finish("phase1 budget")
            a = queues[0].popleft() if queues[0] else None
            b = queues[1].popleft() if queues[1] else None
            x1 = int(vals[a]) if a is not None else 0
            x2 = int(vals[b]) if b is not None else 0
            s = gains[t]  # revealed only after the symbols are fixed
            observe(s, a, b, x1, x2)
            e = effective(s, a, b)
            acts = rule(e, t, a, b)
            for j, (v, act) in enumerate(((a, acts[0]), (b, acts[1]))):
                if v is None:
                    continue
                events[act] += 1
                other = b if j == 0 else a
                for i in range(2):
                    if e[2 * i + j] and not (other is not None and e[2 * i + 1 - j]):
                        known_at[v, i] = True
                if act == RETRY:
                    queues[j].append(v)
                elif act == DELIVER:
                    status[v] = BitStatus.DELIVERED
                elif act == PENDING:
                    status[v] = BitStatus.PENDING
                else:
                    status[v] = BitStatus.DELIVERED if act == DELIVER_POOL else BitStatus.COMMON_POOL
                    pools[j][v >> 6] |= np.uint64(1) << np.uint64(v & 63)
                    pool_count[j] += 1
            t += 1
            phase1 += 1

    while not (watch[0].covers(targets[0]) and watch[1].covers(targets[1])):
        if t >= t_end:
            return finish("phase2 budget")
        c1 = random_combination(rng, pools[0]) if pool_count[0] else None
        c2 = random_combination(rng, pools[1]) if pool_count[1] else None
        x1 = parity(c1 & valwords) if c1 is not None else 0
        x2 = parity(c2 & valwords) if c2 is not None else 0
        observe(gains[t], c1, c2, x1, x2)
        t += 1
        phase2 += 1
    return finish()
