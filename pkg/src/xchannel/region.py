"""Capacity region of the two-user binary fading X-Channel with delayed CSIT.

A rate tuple is achievable iff it is non-negative and satisfies

* four per-transmitter bounds  r_ij + beta * (r_{i'j} + r_0j) <= beta * p
* two per-receiver bounds      r_i  + beta * (r_{i'} + r_0)   <= beta * (1 - q^2)

with beta = 2 - p and i' the other receiver.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

from .channel import ChannelModel

TOL = 1e-9


@dataclass(frozen=True)
class RateTuple:
    r01: float = 0.0
    r02: float = 0.0
    r11: float = 0.0
    r12: float = 0.0
    r21: float = 0.0
    r22: float = 0.0

    @property
    def r0(self) -> float:
        return self.r01 + self.r02

    @property
    def r1(self) -> float:
        return self.r11 + self.r12

    @property
    def r2(self) -> float:
        return self.r21 + self.r22

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in ("r01", "r02", "r11", "r12", "r21", "r22")}

    def scaled(self, factor: float) -> RateTuple:
        return RateTuple(**{k: v * factor for k, v in self.as_dict().items()})

    @classmethod
    def from_message_rates(cls, rates: dict) -> RateTuple:
        """Build from a report's ``{"w01": .., "w11": ..}`` style mapping."""
        return cls(**{"r" + k[1:]: float(rates.get(k, 0.0)) for k in ("w01", "w02", "w11", "w12", "w21", "w22")})


@dataclass
class Membership:
    achievable: bool
    slack: dict[str, float]

    def __bool__(self) -> bool:
        return self.achievable

    @property
    def min_slack(self) -> float:
        return min(self.slack.values())


def bound_slacks(r: RateTuple, model: ChannelModel) -> dict[str, float]:
    """Slack (bound minus left-hand side) of each of the six region bounds."""
    b, p = model.beta, model.p
    own = {(1, 1): r.r11, (1, 2): r.r12, (2, 1): r.r21, (2, 2): r.r22}
    common = {1: r.r01, 2: r.r02}
    slack = {}
    for j in (1, 2):
        for i in (1, 2):
            lhs = own[(i, j)] + b * (own[(3 - i, j)] + common[j])
            slack[f"bc_{i}{j}"] = b * p - lhs
    per_rx = {1: r.r1, 2: r.r2}
    for i in (1, 2):
        lhs = per_rx[i] + b * (per_rx[3 - i] + r.r0)
        slack[f"xc_{i}"] = b * model.mac_capacity - lhs
    return slack


def is_achievable(r: RateTuple, model: ChannelModel, tol: float = TOL) -> Membership:
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    negative = [k for k, v in r.as_dict().items() if v < 0]
    if negative:
        raise ValueError(f"negative rate component(s): {', '.join(negative)}")
    slack = bound_slacks(r, model)
    return Membership(all(s >= -tol for s in slack.values()), slack)


def _check_r0(r0: float, model: ChannelModel) -> None:
    if not -TOL <= r0 <= model.mac_capacity + TOL:
        raise ValueError(f"common rate {r0} outside [0, {model.mac_capacity}]")


def symmetric_corner(r0: float, model: ChannelModel) -> tuple[float, float]:
    _check_r0(r0, model)
    b = model.beta
    r = b * (model.mac_capacity - r0) / (1 + b)
    return r, r


def sum_capacity(r0: float, model: ChannelModel) -> float:
    """Common rate plus the largest achievable R1 + R2 at that common rate."""
    r1, r2 = symmetric_corner(r0, model)
    return r0 + r1 + r2


def ic_sum_capacity(model: ChannelModel) -> float:
    b = model.beta
    return min(2 * model.p, 2 * b * model.mac_capacity / (1 + b))


def xc_sum_capacity(model: ChannelModel) -> float:
    return sum_capacity(0.0, model)


def ic_xc_crossover() -> float:
    """Fading level below which the X-Channel sum capacity beats the IC's.

    Equating 2p with 2(2-p)(2p-p^2)/(3-p) gives p^2 - 3p + 1 = 0.
    """
    return (3 - math.sqrt(5)) / 2


def needs_split_phase(model: ChannelModel) -> bool:
    """True when the symmetric private rate exceeds the point-to-point cap p."""
    b = model.beta
    return 2 * b * model.mac_capacity / (1 + b) > 2 * model.p + TOL


# --- 2-D geometry --------------------------------------------------------


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> list[tuple[float, float]]:
    """Counterclockwise hull (monotone chain), collinear points dropped."""
    pts = sorted(set((round(x, 12) + 0.0, round(y, 12) + 0.0) for x, y in points))
    if len(pts) <= 2:
        return pts
    lower: list = []
    for pt in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], pt) <= 1e-15:
            lower.pop()
        lower.append(pt)
    upper: list = []
    for pt in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], pt) <= 1e-15:
            upper.pop()
        upper.append(pt)
    return lower[:-1] + upper[:-1]


def clip_halfplane(poly, a: float, b: float, c: float) -> list[tuple[float, float]]:
    """Keep the part of a convex polygon with a*x + b*y <= c."""
    out = []
    n = len(poly)
    for k in range(n):
        cur, nxt = poly[k], poly[(k + 1) % n]
        fc = a * cur[0] + b * cur[1] - c
        fn = a * nxt[0] + b * nxt[1] - c
        if fc <= TOL:
            out.append(cur)
        if (fc < -TOL and fn > TOL) or (fc > TOL and fn < -TOL):
            s = fc / (fc - fn)
            out.append((cur[0] + s * (nxt[0] - cur[0]), cur[1] + s * (nxt[1] - cur[1])))
    return out


def _start_at_origin(poly) -> list[tuple[float, float]]:
    if not poly:
        return poly
    k = min(range(len(poly)), key=lambda i: (abs(poly[i][0]) + abs(poly[i][1]), poly[i]))
    return [(x + 0.0, y + 0.0) for x, y in poly[k:] + poly[:k]]


@dataclass
class RegionSlice:
    """Convex polygon in a 2-D rate plane, vertices counterclockwise from the origin."""

    p: float
    fixed: dict[str, float]
    vertices: list[tuple[float, float]]
    axes: tuple[str, str] = ("r1", "r2")

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.axes)
            for x, y in self.vertices:
                w.writerow([repr(float(x)), repr(float(y))])

    def to_svg(self, path, size: int = 320) -> None:
        Path(path).write_text(polygon_svg(self.vertices, self.axes, size=size))


def bc_polygon(r0j: float, model: ChannelModel) -> list[tuple[float, float]]:
    """Rates (r_1j, r_2j) one transmitter supports alongside common rate r0j."""
    if r0j < -TOL or r0j > model.p + TOL:
        raise ValueError(f"common rate {r0j} exceeds the single-transmitter limit p = {model.p}")
    b, p = model.beta, model.p
    cap = b * p - b * r0j
    if cap <= TOL:
        return [(0.0, 0.0)]
    poly = [(0.0, 0.0), (cap, 0.0), (0.0, cap)]
    # r1 + b*r2 <= cap and r2 + b*r1 <= cap
    poly = clip_halfplane(poly, 1.0, b, cap)
    poly = clip_halfplane(poly, b, 1.0, cap)
    return _start_at_origin(convex_hull(poly))


def bc_slice(j: int, r0j: float, model: ChannelModel) -> RegionSlice:
    if j not in (1, 2):
        raise ValueError("transmitter id must be 1 or 2")
    return RegionSlice(model.p, {f"r0{j}": r0j}, bc_polygon(r0j, model), axes=(f"r1{j}", f"r2{j}"))


def region_slice(r01: float, r02: float, model: ChannelModel) -> RegionSlice:
    """(R1, R2) polygon at a fixed common split, optimised over private splits.

    The per-transmitter bounds involve only that transmitter's rates, so the
    set of reachable (R1, R2) is the Minkowski sum of the two transmitters'
    polygons, cut by the two per-receiver bounds.
    """
    if r01 < -TOL or r02 < -TOL:
        raise ValueError("common rates must be non-negative")
    r0 = r01 + r02
    _check_r0(r0, model)
    b = model.beta
    poly1, poly2 = bc_polygon(r01, model), bc_polygon(r02, model)
    summed = convex_hull([(x1 + x2, y1 + y2) for x1, y1 in poly1 for x2, y2 in poly2])
    cap = b * (model.mac_capacity - r0)
    if cap <= TOL or len(summed) < 3:
        verts = [(0.0, 0.0)] if cap <= TOL else summed
    else:
        verts = clip_halfplane(summed, 1.0, b, cap)
        verts = clip_halfplane(verts, b, 1.0, cap)
        verts = convex_hull(verts)
    verts = [(x, y) for x, y in verts]
    return RegionSlice(model.p, {"r01": r01, "r02": r02}, _start_at_origin(verts) or [(0.0, 0.0)])


def polygon_svg(vertices, axes=("r1", "r2"), size: int = 320, extent: float | None = None) -> str:
    pad = 40
    ext = extent or max([1e-9] + [max(x, y) for x, y in vertices]) * 1.1
    span = size - 2 * pad

    def tx(x, y):
        return pad + span * x / ext, size - pad - span * y / ext

    pts = " ".join(f"{a:.2f},{c:.2f}" for a, c in (tx(x, y) for x, y in vertices))
    ox, oy = tx(0, 0)
    xe, _ = tx(ext, 0)
    _, ye = tx(0, ext)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">\n'
        f'  <line x1="{ox:.2f}" y1="{oy:.2f}" x2="{xe:.2f}" y2="{oy:.2f}" stroke="black"/>\n'
        f'  <line x1="{ox:.2f}" y1="{oy:.2f}" x2="{ox:.2f}" y2="{ye:.2f}" stroke="black"/>\n'
        f'  <text x="{xe:.2f}" y="{oy + 20:.2f}">{axes[0]}</text>\n'
        f'  <text x="{ox - 30:.2f}" y="{ye:.2f}">{axes[1]}</text>\n'
        f'  <polygon points="{pts}" fill="#9ecae1" stroke="#08519c"/>\n'
        "</svg>\n"
    )


def polyline_svg(series: dict[str, list[tuple[float, float]]], size: int = 360, marker: float | None = None) -> str:
    pad = 40
    xs = [x for pts in series.values() for x, _ in pts] or [1.0]
    ys = [y for pts in series.values() for _, y in pts] or [1.0]
    xmax, ymax = max(xs) or 1.0, (max(ys) or 1.0) * 1.1
    span = size - 2 * pad
    colors = ["#08519c", "#a50f15", "#006d2c", "#54278f"]

    def tx(x, y):
        return pad + span * x / xmax, size - pad - span * y / ymax

    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">']
    ox, oy = tx(0, 0)
    lines.append(f'  <line x1="{ox:.2f}" y1="{oy:.2f}" x2="{size - pad}" y2="{oy:.2f}" stroke="black"/>')
    lines.append(f'  <line x1="{ox:.2f}" y1="{oy:.2f}" x2="{ox:.2f}" y2="{pad}" stroke="black"/>')
    for k, (name, pts) in enumerate(series.items()):
        coords = " ".join(f"{a:.2f},{c:.2f}" for a, c in (tx(x, y) for x, y in pts))
        col = colors[k % len(colors)]
        lines.append(f'  <polyline points="{coords}" fill="none" stroke="{col}"/>')
        lines.append(f'  <text x="{size - pad - 80}" y="{pad + 15 * k}" fill="{col}">{name}</text>')
    if marker is not None:
        mx, _ = tx(marker, 0)
        lines.append(f'  <line x1="{mx:.2f}" y1="{oy:.2f}" x2="{mx:.2f}" y2="{pad}" stroke="gray" stroke-dasharray="4"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
