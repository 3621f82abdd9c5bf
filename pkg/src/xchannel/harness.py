"""Experiment configuration, trial orchestration, verification and exports."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .channel import ChannelModel
from .region import (
    RateTuple,
    bc_polygon,
    ic_sum_capacity,
    ic_xc_crossover,
    is_achievable,
    polyline_svg,
    region_slice,
    sum_capacity,
    xc_sum_capacity,
)
from .schemes import (
    bc_delayed_run,
    example2_run,
    ic_delayed_run,
    mac_corner_run,
    multicast_run,
    swapped_ic_run,
    xc_composite_run,
)
from .schemes.common import MARGIN, MESSAGES, SchemeReport
from .schemes.delayed import ic_symmetric_rate
from .schemes.example2 import inner_rate

SCHEMES = ("multicast", "ic", "swapped-ic", "bc", "xc", "example2", "mac-corner")


def theory_targets(scheme: str, model: ChannelModel, r0: float | None = None) -> dict[str, float]:
    """Asymptotic per-message rates each scheme is built to approach."""
    p, b, mac = model.p, model.beta, model.mac_capacity
    c = ic_symmetric_rate(model)
    if scheme == "multicast":
        return {"w01": mac / 2, "w02": mac / 2}
    if scheme == "ic":
        return {"w11": c, "w22": c}
    if scheme == "swapped-ic":
        return {"w21": c, "w12": c}
    if scheme == "bc":
        corner = max(min(v) for v in bc_polygon(0.0, model))
        return {"w11": corner, "w21": corner}
    if scheme == "mac-corner":
        return {"w11": mac / 2, "w12": mac / 2}
    if scheme == "example2":
        return {"w01": p, "w12": 0.5 * b * p / (1 + b), "w22": 0.5 * b * p / (1 + b)}
    if scheme == "xc":
        r0 = r0 or 0.0
        private = (sum_capacity(r0, model) - r0) / 4
        return {"w01": r0 / 2, "w02": r0 / 2, **{m: private for m in ("w11", "w12", "w21", "w22")}}
    raise ValueError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}")


@dataclass
class ExperimentConfig:
    scheme: str
    p: float
    n: int
    trials: int = 1
    seed: int = 0
    seeds: list[int] | None = None
    targets: dict[str, float] | None = None
    r0: float | None = None
    tol: float = 0.02
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.tol < 0:
            raise ValueError("tolerance must be non-negative")
        model = ChannelModel(self.p)
        if self.scheme == "xc":
            r0 = self.r0 or 0.0
            if not 0 <= r0 <= model.mac_capacity + 1e-12:
                raise ValueError(f"r0 = {r0} violates 0 <= r0 <= 1 - q^2 = {model.mac_capacity}")
        if self.targets:
            unknown = set(self.targets) - set(MESSAGES)
            if unknown:
                raise ValueError(f"unknown target message(s): {', '.join(sorted(unknown))}")
            member = is_achievable(RateTuple.from_message_rates(self.targets), model)
            if not member:
                bad = min(member.slack, key=member.slack.get)
                raise ValueError(f"targets outside the capacity region: bound {bad} violated by {-member.slack[bad]:.6g}")

    @property
    def model(self) -> ChannelModel:
        return ChannelModel(self.p)

    @property
    def seed_list(self) -> list[int]:
        return sorted(self.seeds) if self.seeds else [self.seed + i for i in range(self.trials)]

    def resolved_targets(self) -> dict[str, float]:
        return dict(self.targets) if self.targets else theory_targets(self.scheme, self.model, self.r0)


def _k(n: int, rate: float) -> int:
    return math.floor(n * rate * (1 - MARGIN))


def run_trial(cfg: ExperimentConfig, seed: int) -> SchemeReport:
    m, n = cfg.model, cfg.n
    t = cfg.resolved_targets()
    s = cfg.scheme
    if s == "multicast":
        return multicast_run(m, _k(n, t.get("w01", 0)), _k(n, t.get("w02", 0)), seed, n)
    if s == "ic":
        return ic_delayed_run(m, _k(n, t.get("w11", 0)), _k(n, t.get("w22", 0)), seed, n)
    if s == "swapped-ic":
        return swapped_ic_run(m, _k(n, t.get("w21", 0)), _k(n, t.get("w12", 0)), seed, n)
    if s == "bc":
        return bc_delayed_run(m, 1, _k(n, t.get("w11", 0)), _k(n, t.get("w21", 0)), seed, n)
    if s == "mac-corner":
        return mac_corner_run(m, _k(n, t.get("w11", 0)), _k(n, t.get("w12", 0)), seed, n)
    if s == "example2":
        return example2_run(m, seed, n)
    return xc_composite_run(m, cfg.r0 or 0.0, seed, n)


@dataclass
class ExperimentResult:
    config: dict
    targets: dict[str, float]
    reports: list[SchemeReport]
    mean_rates: dict[str, float] = field(default_factory=dict)
    success_fraction: float = 0.0
    error_rate: dict[str, float] = field(default_factory=dict)

    @classmethod
    def aggregate(cls, cfg: ExperimentConfig, reports: list[SchemeReport]) -> ExperimentResult:
        reports = sorted(reports, key=lambda r: r.seed)
        keys = reports[0].rates.keys() if reports else ()
        mean = {k: sum(r.rates[k] for r in reports) / len(reports) for k in keys}
        ok = sum(r.ok for r in reports) / len(reports) if reports else 0.0
        err = {rx: sum(r.errors[rx] for r in reports) / len(reports) for rx in ("rx1", "rx2")} if reports else {}
        return cls(asdict(cfg), cfg.resolved_targets(), reports, mean, ok, err)

    @property
    def rates(self) -> dict[str, float]:
        return self.mean_rates

    @property
    def p(self) -> float:
        return self.config["p"]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "targets": self.targets,
            "mean_rates": self.mean_rates,
            "success_fraction": self.success_fraction,
            "error_rate": self.error_rate,
            "reports": [r.to_dict() for r in self.reports],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentResult:
        return cls(
            d["config"], d.get("targets", {}), [SchemeReport.from_dict(r) for r in d.get("reports", [])],
            d.get("mean_rates", {}), d.get("success_fraction", 0.0), d.get("error_rate", {}),
        )


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    seeds = cfg.seed_list
    if cfg.workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            reports = list(pool.map(run_trial, [cfg] * len(seeds), seeds))
    else:
        reports = [run_trial(cfg, s) for s in seeds]
    result = ExperimentResult.aggregate(cfg, reports)
    if cfg.out:
        Path(cfg.out).write_text(result.to_json())
    return result


@dataclass
class Criterion:
    name: str
    target: float
    measured: float
    tol: float
    passed: bool


@dataclass
class VerificationVerdict:
    criteria: list[Criterion]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    def lines(self) -> list[str]:
        return [
            f"{'PASS' if c.passed else 'FAIL'} {c.name}: measured {c.measured:.6g}, target {c.target:.6g}, tol {c.tol:g}"
            for c in self.criteria
        ]


def verify(
    report,
    model: ChannelModel,
    tol: float,
    targets: dict[str, float] | None = None,
    region_tol: float | None = None,
) -> VerificationVerdict:
    """(i) measured rates inside the capacity region; (ii) measured rates near ``targets``."""
    rates = report.rates
    region_tol = tol if region_tol is None else region_tol
    member = is_achievable(RateTuple.from_message_rates(rates), model, tol=region_tol)
    criteria = [Criterion("inside capacity region (min slack)", 0.0, member.min_slack, region_tol, member.achievable)]
    for m, target in sorted((targets or {}).items()):
        got = rates.get(m, 0.0)
        criteria.append(Criterion(f"rate {m}", target, got, tol, abs(got - target) <= tol))
    return VerificationVerdict(criteria)


def _fmt(x: float) -> str:
    return repr(round(float(x), 12))


def export_region(r0: float | None, p: float, out, svg=None, r01: float | None = None, r02: float | None = None):
    """Write the (R1, R2) slice; an unspecified split divides r0 evenly."""
    model = ChannelModel(p)
    if r01 is None or r02 is None:
        r01 = r02 = (r0 or 0.0) / 2
    sl = region_slice(r01, r02, model)
    sl.to_csv(out)
    if svg:
        sl.to_svg(svg)
    return sl


def export_sumcap_sweep(p: float, r0_grid, out, svg=None) -> list[tuple[float, float]]:
    model = ChannelModel(p)
    rows = [(float(r0), sum_capacity(float(r0), model)) for r0 in r0_grid]
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r0", "c_sum"])
        for r0, c in rows:
            w.writerow([_fmt(r0), _fmt(c)])
    if svg:
        Path(svg).write_text(polyline_svg({"C_SUM": rows}))
    return rows


def export_ic_comparison(p_grid, out, svg=None) -> list[tuple[float, float, float]]:
    """X-Channel and IC sum capacities over p, with the crossover as a marked row."""
    rows = [(float(p), xc_sum_capacity(ChannelModel(float(p))), ic_sum_capacity(ChannelModel(float(p)))) for p in p_grid]
    star = ic_xc_crossover()
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "xc_sum", "ic_sum", "marker"])
        marked = False
        for p, xc, ic in rows:
            if not marked and p >= star:
                m = ChannelModel(star)
                w.writerow([_fmt(star), _fmt(xc_sum_capacity(m)), _fmt(ic_sum_capacity(m)), "crossover"])
                marked = True
            w.writerow([_fmt(p), _fmt(xc), _fmt(ic), ""])
    if svg:
        series = {"X-Channel": [(p, xc) for p, xc, _ in rows], "IC": [(p, ic) for p, _, ic in rows]}
        Path(svg).write_text(polyline_svg(series, marker=star))
    return rows


def parse_grid(spec: str) -> list[float]:
    """``start:stop:step`` inclusive of stop (within rounding)."""
    try:
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError as exc:
        raise ValueError(f"grid must look like start:stop:step, got {spec!r}") from exc
    if step <= 0 or stop < start:
        raise ValueError(f"grid {spec!r} needs step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]
