"""Message sets, scheme reports and the per-slot linear receive step."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..channel import DOMAIN_MESSAGES, ChannelModel, make_rng
from ..gf2 import EquationSystem, nwords

MESSAGES = ("w01", "w02", "w11", "w12", "w21", "w22")
MARGIN = 0.05


@dataclass
class MessageSet:
    """Uniform, mutually independent message bits, one uint8 array per message."""

    bits: dict[str, np.ndarray]

    @classmethod
    def generate(cls, sizes: dict[str, int], seed: int) -> MessageSet:
        out = {}
        for k, name in enumerate(MESSAGES):
            rng = make_rng(seed, DOMAIN_MESSAGES, k)
            out[name] = rng.integers(0, 2, int(sizes.get(name, 0)), dtype=np.uint8)
        return cls(out)

    @classmethod
    def for_rates(cls, n: int, rates: dict[str, float], seed: int) -> MessageSet:
        return cls.generate({k: math.ceil(n * r) for k, r in rates.items()}, seed)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.bits[name]

    def sizes(self) -> dict[str, int]:
        return {k: int(len(v)) for k, v in self.bits.items()}


@dataclass
class SchemeReport:
    scheme: str
    p: float
    n: int
    seed: int
    slots: dict[str, int] = field(default_factory=lambda: {"phase1": 0, "phase2": 0, "total": 0})
    delivered_bits: dict[str, int] = field(default_factory=lambda: {m: 0 for m in MESSAGES})
    target_bits: dict[str, int] = field(default_factory=lambda: {m: 0 for m in MESSAGES})
    success: dict[str, bool] = field(default_factory=lambda: {"rx1": True, "rx2": True})
    errors: dict[str, float] = field(default_factory=lambda: {"rx1": 0.0, "rx2": 0.0})
    stats: dict = field(default_factory=dict)
    trials: int = 1

    @property
    def rates(self) -> dict[str, float]:
        total = self.slots["total"]
        r = {m: (self.delivered_bits[m] / total if total else 0.0) for m in MESSAGES}
        r["r0"] = r["w01"] + r["w02"]
        r["r1"] = r["w11"] + r["w12"]
        r["r2"] = r["w21"] + r["w22"]
        r["sum"] = r["r0"] + r["r1"] + r["r2"]
        return r

    @property
    def ok(self) -> bool:
        return all(self.success.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rates"] = self.rates
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    @classmethod
    def from_dict(cls, d: dict) -> SchemeReport:
        d = dict(d)
        d.pop("rates", None)
        return cls(**d)

    def absorb(self, other: SchemeReport, prefix: str | None = None) -> None:
        """Add another segment's slots and deliveries into this report."""
        for k in ("phase1", "phase2", "total"):
            self.slots[k] = self.slots.get(k, 0) + other.slots.get(k, 0)
        for m in MESSAGES:
            self.delivered_bits[m] += other.delivered_bits[m]
            self.target_bits[m] += other.target_bits[m]
        for rx in ("rx1", "rx2"):
            self.success[rx] = self.success[rx] and other.success[rx]
            self.errors[rx] = max(self.errors[rx], other.errors[rx])
        if prefix:
            self.stats[prefix] = {"slots": dict(other.slots), **other.stats}


class BudgetExhausted(RuntimeError):
    pass


def split_generations(k: int, count: int) -> list[np.ndarray]:
    return np.array_split(np.arange(k), count) if count else []


def generation_count(sizes, gen_size: int) -> int:
    biggest = max(sizes) if sizes else 0
    return math.ceil(biggest / gen_size) if biggest else 0


def default_generation_size(k: int) -> int:
    """Bits per message per generation: grows like sqrt(k), capped for speed."""
    return int(min(max(k, 1), max(256, min(2048, 8 * math.isqrt(max(k, 1))))))


def random_combination(rng: np.random.Generator, mask: np.ndarray) -> np.ndarray:
    return rng.integers(0, np.iinfo(np.uint64).max, size=len(mask), dtype=np.uint64, endpoint=True) & mask


def new_systems(universe: int, backend: str | None = None) -> tuple[EquationSystem, EquationSystem]:
    return EquationSystem(universe, backend), EquationSystem(universe, backend)


def receive(sys: EquationSystem, gains: tuple[int, int], coeffs: tuple, y: int) -> None:
    """Add one slot's observation at a receiver.

    ``coeffs[j]`` is what transmitter j sent: ``None`` (silent), an ``int``
    (one uncoded variable) or packed coefficient words.
    """
    parts = [c for g, c in zip(gains, coeffs) if g and c is not None]
    if not parts:
        return
    if all(isinstance(c, int) for c in parts):
        if len(parts) == 1:
            sys.add_unit(parts[0], y)
        elif parts[0] != parts[1]:
            sys.add_pair(parts[0], parts[1], y)
        return
    row = np.zeros(sys.nwords, dtype=np.uint64)
    for c in parts:
        if isinstance(c, int):
            row[c >> 6] ^= np.uint64(1) << np.uint64(c & 63)
        else:
            row ^= c
    sys.add_equation(row, y)


def check_model(model: ChannelModel | float) -> ChannelModel:
    return model if isinstance(model, ChannelModel) else ChannelModel(float(model))


def empty_words(universe: int) -> np.ndarray:
    return np.zeros(nwords(universe), dtype=np.uint64)
