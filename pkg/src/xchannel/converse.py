"""Exact entropy evaluation of the extremal inequalities for small block lengths.

For encoder pairs over n <= 2 slots we compute

    gap = H(Y1^n | S, G^n) - beta * H(Y2^n | S, G^n)

where S is (W01, W02, W21, W22) for claim 2, plus W12 for claim 1. The
inequalities predict gap <= 0 for every causal encoder pair. Two evaluators
exist: a dictionary-based enumerator for single pairs (any message widths),
and a batched numpy kernel used by the exhaustive and sampled searches.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .channel import DOMAIN_ENCODERS, ChannelModel, make_rng

MESSAGE_NAMES = (("w01", "w11", "w21"), ("w02", "w12", "w22"))
CONDITIONING = {
    1: ("w01", "w02", "w12", "w21", "w22"),
    2: ("w01", "w02", "w21", "w22"),
}
MAX_MESSAGE_BITS = 6
MAX_N = 2
TOL = 1e-12

# state code c <-> (g11, g12, g21, g22) with g11 as the high bit
STATES = np.array([[(c >> 3) & 1, (c >> 2) & 1, (c >> 1) & 1, c & 1] for c in range(16)], dtype=np.uint8)


def state_code(g11: int, g12: int, g21: int, g22: int) -> int:
    return (g11 << 3) | (g12 << 2) | (g21 << 1) | g22


def state_probs(model: ChannelModel) -> np.ndarray:
    ones = STATES.sum(axis=1)
    return model.p**ones * model.q ** (4 - ones)


@dataclass(frozen=True)
class EncoderTable:
    """Deterministic causal encoder of one transmitter.

    ``slots[t][m, h]`` is the bit sent in slot t+1 for message index ``m`` and
    history index ``h`` (the first t states in base 16, slot 1 least
    significant). Message index packs (w0j, w1j, w2j) little-endian with the
    given widths. Slot t only sees t states, so causality holds by shape.
    """

    widths: tuple[int, int, int]
    slots: tuple[np.ndarray, ...]

    def __post_init__(self):
        m = 1 << sum(self.widths)
        for t, s in enumerate(self.slots):
            if s.shape != (m, 16**t):
                raise ValueError(f"slot {t + 1} table has shape {s.shape}, expected {(m, 16**t)}")

    @property
    def n(self) -> int:
        return len(self.slots)

    @classmethod
    def from_function(cls, n: int, fn, widths=(1, 1, 1)) -> EncoderTable:
        """``fn(messages, history) -> bit`` with messages (w0, w1, w2) and history a list of states."""
        slots = []
        for t in range(n):
            tab = np.zeros((1 << sum(widths), 16**t), dtype=np.uint8)
            for m in range(tab.shape[0]):
                msgs = split_message(m, widths)
                for h in range(16**t):
                    hist = [tuple(STATES[(h >> (4 * s)) & 15]) for s in range(t)]
                    tab[m, h] = int(fn(msgs, hist)) & 1
            slots.append(tab)
        return cls(tuple(widths), tuple(slots))

    @classmethod
    def silent(cls, n: int, widths=(1, 1, 1)) -> EncoderTable:
        return cls.from_function(n, lambda m, h: 0, widths)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, widths=(1, 1, 1)) -> EncoderTable:
        m = 1 << sum(widths)
        return cls(tuple(widths), tuple(rng.integers(0, 2, (m, 16**t), dtype=np.uint8) for t in range(n)))

    def to_dict(self) -> dict:
        return {"widths": list(self.widths), "slots": [s.tolist() for s in self.slots]}

    @classmethod
    def from_dict(cls, d: dict) -> EncoderTable:
        return cls(tuple(d["widths"]), tuple(np.asarray(s, dtype=np.uint8) for s in d["slots"]))


def split_message(m: int, widths) -> tuple[int, int, int]:
    out = []
    for w in widths:
        out.append(m & ((1 << w) - 1))
        m >>= w
    return tuple(out)


# --- exact single-pair evaluator -------------------------------------------


@dataclass
class JointDistribution:
    """Atoms over (messages, G^n, Y1^n, Y2^n) with their probabilities."""

    n: int
    prob: np.ndarray
    columns: dict[str, np.ndarray]

    def marginal(self, names) -> dict[tuple, float]:
        out: dict[tuple, float] = defaultdict(float)
        cols = [self.columns[k] for k in names]
        for i in range(len(self.prob)):
            if self.prob[i]:
                out[tuple(int(c[i]) for c in cols)] += self.prob[i]
        return out

    def entropy(self, names) -> float:
        return -math.fsum(p * math.log2(p) for p in self.marginal(names).values() if p > 0)

    def conditional_entropy(self, target: str, given) -> float:
        given = tuple(given)
        joint = self.marginal((target, *given))
        cond = self.marginal(given)
        return math.fsum(p * math.log2(cond[k[1:]] / p) for k, p in joint.items() if p > 0)

    def mutual_information(self, a, b, given) -> float:
        """I(A; B | C) straight from the joint law, not via entropy differences."""
        a, b, given = tuple(a), tuple(b), tuple(given)
        abc = self.marginal(a + b + given)
        ac = self.marginal(a + given)
        bc = self.marginal(b + given)
        c = self.marginal(given)
        na, nb = len(a), len(b)
        terms = []
        for key, pabc in abc.items():
            if pabc > 0:
                ka, kb, kc = key[:na], key[na : na + nb], key[na + nb :]
                terms.append(pabc * math.log2(pabc * c[kc] / (ac[ka + kc] * bc[kb + kc])))
        return math.fsum(terms)


def joint_distribution(enc1: EncoderTable, enc2: EncoderTable, model: ChannelModel, n: int) -> JointDistribution:
    if n > MAX_N or enc1.n < n or enc2.n < n:
        raise ValueError(f"enumeration budget: n must be <= {MAX_N} and covered by both tables")
    if sum(enc1.widths) + sum(enc2.widths) > MAX_MESSAGE_BITS:
        raise ValueError(f"enumeration budget: more than {MAX_MESSAGE_BITS} message bits")
    sp = state_probs(model)
    m1s, m2s = 1 << sum(enc1.widths), 1 << sum(enc2.widths)
    rows = []
    probs = []
    weight = 1.0 / (m1s * m2s)
    for m1 in range(m1s):
        for m2 in range(m2s):
            for hist in itertools.product(range(16), repeat=n):
                pg = math.prod(sp[c] for c in hist)
                y1 = y2 = 0
                for t, c in enumerate(hist):
                    h = sum(hist[s] << (4 * s) for s in range(t))
                    x1 = int(enc1.slots[t][m1, h])
                    x2 = int(enc2.slots[t][m2, h])
                    g11, g12, g21, g22 = STATES[c]
                    y1 = (y1 << 1) | ((g11 & x1) ^ (g12 & x2))
                    y2 = (y2 << 1) | ((g21 & x1) ^ (g22 & x2))
                g = sum(c << (4 * s) for s, c in enumerate(hist))
                rows.append((*split_message(m1, enc1.widths), *split_message(m2, enc2.widths), g, y1, y2))
                probs.append(weight * pg)
    arr = np.array(rows, dtype=np.int64)
    names = ("w01", "w11", "w21", "w02", "w12", "w22", "g", "y1", "y2")
    return JointDistribution(n, np.array(probs), {k: arr[:, i] for i, k in enumerate(names)})


@dataclass
class GapResult:
    claim: int
    gap: float
    h1: float
    h2: float
    beta: float
    pair: str = ""


def claim_gap(enc1: EncoderTable, enc2: EncoderTable, claim: int, model: ChannelModel, n: int) -> GapResult:
    dist = joint_distribution(enc1, enc2, model, n)
    given = (*CONDITIONING[claim], "g")
    h1 = dist.conditional_entropy("y1", given)
    h2 = dist.conditional_entropy("y2", given)
    return GapResult(claim, h1 - model.beta * h2, h1, h2, model.beta)


def identity_residual(enc1: EncoderTable, enc2: EncoderTable, model: ChannelModel, n: int) -> float:
    """H(Y2|W2,G) - I(W0;Y2|W2,G) - H(Y2|W0,W2,G); zero up to rounding."""
    dist = joint_distribution(enc1, enc2, model, n)
    w0, w2 = ("w01", "w02"), ("w21", "w22")
    lhs = dist.conditional_entropy("y2", (*w2, "g")) - dist.mutual_information(w0, ("y2",), (*w2, "g"))
    return lhs - dist.conditional_entropy("y2", (*w0, *w2, "g"))


# --- batched kernel (1-bit messages) ---------------------------------------


def _outputs(t1: list[np.ndarray], t2: list[np.ndarray], rx: int) -> np.ndarray:
    """Y_rx^n for a batch, shape (B, 8 [m1], 8 [m2], 16, ... n history axes), as integers."""
    a, b = 2 * rx, 2 * rx + 1
    n = len(t1)
    B = t1[0].shape[0]
    ga = STATES[:, a]
    gb = STATES[:, b]
    y = np.zeros((B, 8, 8) + (16,) * n, dtype=np.uint8)
    for t in range(n):
        x1 = t1[t].reshape((B, 8) + (16,) * t)  # history axes for slots 1..t
        x2 = t2[t].reshape((B, 8) + (16,) * t)
        shape1 = (B, 8, 1) + (16,) * t + (1,) + (1,) * (n - t - 1)
        shape2 = (B, 1, 8) + (16,) * t + (1,) + (1,) * (n - t - 1)
        gshape = (1, 1, 1) + (1,) * t + (16,) + (1,) * (n - t - 1)
        # history index stores slot 1 in the low nibble: reverse axes to match
        x1 = _history_axes(x1, t).reshape(shape1)
        x2 = _history_axes(x2, t).reshape(shape2)
        bit = (ga.reshape(gshape) & x1) ^ (gb.reshape(gshape) & x2)
        y = (y << 1) | bit
    return y


def _history_axes(x: np.ndarray, t: int) -> np.ndarray:
    if t < 2:
        return x
    lead = x.ndim - t
    return np.transpose(x, tuple(range(lead)) + tuple(range(x.ndim - 1, lead - 1, -1)))


def _batch_entropy(y: np.ndarray, claim: int, n: int, gw: np.ndarray) -> np.ndarray:
    B = y.shape[0]
    # m index = w0 + 2 w1 + 4 w2  ->  axes (w2, w1, w0)
    y = y.reshape((B, 2, 2, 2, 2, 2, 2) + (16,) * n)
    free = (2, 5) if claim == 2 else (2,)
    size = 1 << len(free)
    h = np.zeros(np.delete(np.array(y.shape), free).tolist(), dtype=np.float64)
    for v in range(1 << n):
        pv = (y == v).sum(axis=free) / size
        with np.errstate(divide="ignore", invalid="ignore"):
            h -= np.where(pv > 0, pv * np.log2(np.where(pv > 0, pv, 1)), 0.0)
    msg_axes = tuple(range(1, 1 + 6 - len(free)))
    h = h.mean(axis=msg_axes)
    return (h * gw).reshape(B, -1).sum(axis=1)


def _history_weights(model: ChannelModel, n: int) -> np.ndarray:
    sp = state_probs(model)
    w = np.ones((16,) * n)
    for t in range(n):
        w = w * sp.reshape((1,) * t + (16,) + (1,) * (n - t - 1))
    return w[None]


def batch_gaps(t1: list[np.ndarray], t2: list[np.ndarray], claim: int, model: ChannelModel) -> np.ndarray:
    """Gap for every pair in a batch; ``t1[t]`` has shape (B, 8, 16**t)."""
    n = len(t1)
    gw = _history_weights(model, n)
    h1 = _batch_entropy(_outputs(t1, t2, 0), claim, n, gw)
    h2 = _batch_entropy(_outputs(t1, t2, 1), claim, n, gw)
    return h1 - model.beta * h2


def all_tables_n1() -> np.ndarray:
    """Every slot-1 table over three 1-bit messages: (256, 8)."""
    idx = np.arange(256)
    return ((idx[:, None] >> np.arange(8)) & 1).astype(np.uint8)


@dataclass
class CheckResult:
    claim: int
    p: float
    n: int
    mode: str
    pairs_evaluated: int
    max_gap: float
    argmax_encoder: dict | None = None
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_gap <= TOL

    def to_dict(self) -> dict:
        return {
            "claim": self.claim,
            "p": self.p,
            "n": self.n,
            "mode": self.mode,
            "pairs_evaluated": self.pairs_evaluated,
            "max_gap": self.max_gap if math.isfinite(self.max_gap) else None,
            "argmax_encoder": self.argmax_encoder,
            **self.extra,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


def _pair_dict(t1: list[np.ndarray], t2: list[np.ndarray], i: int) -> dict:
    enc = [EncoderTable((1, 1, 1), tuple(s[i].reshape(8, 16**k) for k, s in enumerate(t))) for t in (t1, t2)]
    return {"tx1": enc[0].to_dict(), "tx2": enc[1].to_dict()}


class _Tracker:
    def __init__(self):
        self.best = -math.inf
        self.arg = None
        self.count = 0

    def update(self, gaps, t1, t2):
        self.count += len(gaps)
        if len(gaps):
            i = int(np.argmax(gaps))
            if gaps[i] > self.best:
                self.best = float(gaps[i])
                self.arg = _pair_dict(t1, t2, i)


def exhaustive_check(model: ChannelModel, claim: int, n: int = 1, batch: int = 4096) -> CheckResult:
    """Maximum gap over all 65,536 deterministic encoder pairs at n = 1."""
    if n != 1:
        raise ValueError("exhaustive enumeration is only feasible for n = 1")
    tabs = all_tables_n1()
    i1, i2 = np.meshgrid(np.arange(256), np.arange(256), indexing="ij")
    i1, i2 = i1.ravel(), i2.ravel()
    tr = _Tracker()
    for lo in range(0, len(i1), batch):
        a = [tabs[i1[lo : lo + batch]]]
        b = [tabs[i2[lo : lo + batch]]]
        tr.update(batch_gaps(a, b, claim, model), a, b)
    return CheckResult(claim, model.p, 1, "exhaustive", tr.count, tr.best, tr.arg)


# --- curated adversarial encoders (n = 2) ------------------------------------

_LINEAR = [m for m in range(1, 8)]  # nonzero masks over (w0, w1, w2)


def _predicates(tx: int):
    j = tx - 1
    return [
        lambda s: s[j],  # g1j: Rx1 heard this transmitter
        lambda s: s[2 + j],  # g2j
        lambda s: s[j] & (1 - s[2 + j]),
        lambda s: (1 - s[j]) & s[2 + j],
        lambda s: s[j] & s[1 - j],  # collision at Rx1
        lambda s: s[2 + j] & s[3 - j],  # collision at Rx2
    ]


def curated_tables(tx: int) -> list[list[np.ndarray]]:
    """Repetition encoders and feedback encoders that switch on the fed-back state."""
    msgs = np.arange(8)
    lin = {m: np.array([bin(k & m).count("1") & 1 for k in msgs], dtype=np.uint8) for m in _LINEAR}
    out = []
    for f in all_tables_n1():
        out.append([f.copy(), np.repeat(f[:, None], 16, axis=1)])
    for a in _LINEAR:
        for b in _LINEAR:
            for pred in _predicates(tx):
                sel = np.array([pred(STATES[c]) for c in range(16)], dtype=bool)
                second = np.where(sel[None, :], lin[a][:, None], lin[b][:, None]) ^ 0
                out.append([lin[a].copy(), second.astype(np.uint8)])
                out.append([lin[a].copy(), (second ^ lin[b][:, None]).astype(np.uint8)])
    return out


def _stack(tables: list[list[np.ndarray]], idx: np.ndarray) -> list[np.ndarray]:
    return [np.stack([tables[i][t] for i in idx]) for t in range(2)]


def sampled_check(
    model: ChannelModel,
    claim: int,
    samples: int,
    seed: int,
    *,
    curated: int | None = 20_000,
    batch: int = 512,
) -> CheckResult:
    """Max gap at n = 2 over uniform random tables plus curated pairs.

    ``curated`` caps the number of curated pairs (drawn from the product of
    the two curated families); ``0`` disables them.
    """
    rng = make_rng(seed, DOMAIN_ENCODERS, claim)
    tr = _Tracker()
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        t1 = [rng.integers(0, 2, (b, 8), dtype=np.uint8), rng.integers(0, 2, (b, 8, 16), dtype=np.uint8)]
        t2 = [rng.integers(0, 2, (b, 8), dtype=np.uint8), rng.integers(0, 2, (b, 8, 16), dtype=np.uint8)]
        tr.update(batch_gaps(t1, t2, claim, model), t1, t2)
        done += b
    uniform = tr.count
    if curated:
        c1, c2 = curated_tables(1), curated_tables(2)
        total = len(c1) * len(c2)
        pick = rng.choice(total, size=min(curated, total), replace=False)
        # always keep the plain repetition pairs (same slot-1 function on both sides)
        reps = np.arange(256) * len(c2) + np.arange(256)
        pick = np.unique(np.concatenate([pick, reps]))
        for lo in range(0, len(pick), batch):
            part = pick[lo : lo + batch]
            t1, t2 = _stack(c1, part // len(c2)), _stack(c2, part % len(c2))
            tr.update(batch_gaps(t1, t2, claim, model), t1, t2)
    return CheckResult(
        claim, model.p, 2, "sampled", tr.count, tr.best, tr.arg,
        {"uniform_pairs": uniform, "curated_pairs": tr.count - uniform, "seed": seed},
    )
