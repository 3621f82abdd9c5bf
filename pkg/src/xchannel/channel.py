"""Binary fading X-Channel: link statistics, traces, XOR superposition.

Link ``g[i][j]`` is the gain from transmitter ``j`` to receiver ``i`` (both
1-based in names, 0-based in arrays). A slot state is stored as the tuple
``(g11, g12, g21, g22)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

# Generator domains. Each consumer of randomness draws from its own stream so
# that adding draws in one place never shifts another.
DOMAIN_CHANNEL = 0
DOMAIN_MESSAGES = 1
DOMAIN_CODING = 2
DOMAIN_SCHEME = 3
DOMAIN_ENCODERS = 4


def make_rng(seed: int, domain: int, *extra: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, domain, *extra)."""
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(domain, *extra))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class ChannelModel:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"link on-probability must lie in [0, 1], got {self.p}")

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def beta(self) -> float:
        return 2.0 - self.p

    @property
    def mac_capacity(self) -> float:
        """Probability that at least one of two links into a receiver is on."""
        return 1.0 - self.q * self.q


class ChannelState(NamedTuple):
    g11: int
    g12: int
    g21: int
    g22: int

    def gain(self, rx: int, tx: int) -> int:
        return self[2 * (rx - 1) + (tx - 1)]


@dataclass
class Trace:
    """Length-n sequence of channel states as an (n, 4) uint8 array."""

    gains: np.ndarray
    seed: int | None = None
    p: float | None = None

    def __post_init__(self):
        self.gains = np.ascontiguousarray(self.gains, dtype=np.uint8).reshape(-1, 4)

    def __len__(self) -> int:
        return len(self.gains)

    def __getitem__(self, t):
        if isinstance(t, slice):
            return [ChannelState(*map(int, row)) for row in self.gains[t]]
        return ChannelState(*map(int, self.gains[t]))

    @property
    def states(self) -> list[ChannelState]:
        return self[:]

    def swapped_receivers(self) -> Trace:
        """The same trace with receiver labels exchanged: (g21, g22, g11, g12)."""
        return Trace(self.gains[:, [2, 3, 0, 1]], seed=self.seed, p=self.p)

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "g11", "g12", "g21", "g22"])
            for t, row in enumerate(self.gains, start=1):
                w.writerow([t, *map(int, row)])

    @classmethod
    def from_csv(cls, path) -> Trace:
        with open(Path(path), newline="") as fh:
            rows = list(csv.DictReader(fh))
        gains = np.array([[int(r[k]) for k in ("g11", "g12", "g21", "g22")] for r in rows], dtype=np.uint8)
        return cls(gains.reshape(-1, 4))


def sample_state(model: ChannelModel, rng: np.random.Generator) -> ChannelState:
    return ChannelState(*map(int, (rng.random(4) < model.p)))


def generate_trace(model: ChannelModel, n: int, seed: int) -> Trace:
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = make_rng(seed, DOMAIN_CHANNEL)
    gains = (rng.random((n, 4)) < model.p).astype(np.uint8)
    return Trace(gains, seed=seed, p=model.p)


def delayed_view(trace: Trace, t: int) -> list[ChannelState]:
    """States 1..t-1: everything a transmitter may use when choosing slot t."""
    if not 1 <= t <= len(trace) + 1:
        raise IndexError(f"slot {t} outside 1..{len(trace) + 1}")
    return trace[: t - 1]


def apply_channel(state, x1: int, x2: int) -> tuple[int, int]:
    g11, g12, g21, g22 = state
    return (g11 & x1) ^ (g12 & x2), (g21 & x1) ^ (g22 & x2)
