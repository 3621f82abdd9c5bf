import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from xchannel.channel import ChannelModel
from xchannel.region import (
    RateTuple,
    bc_polygon,
    bc_slice,
    bound_slacks,
    convex_hull,
    ic_sum_capacity,
    ic_xc_crossover,
    is_achievable,
    needs_split_phase,
    region_slice,
    sum_capacity,
    symmetric_corner,
    xc_sum_capacity,
)

HALF = ChannelModel(0.5)


def lp_support(model, r01, r02, direction):
    """max d1*R1 + d2*R2 over private rates (r11, r12, r21, r22) under every bound."""
    b, p, mac = model.beta, model.p, model.mac_capacity
    # variables r11, r12, r21, r22
    A, ub = [], []
    for j, (own1, own2, r0j) in enumerate(((0, 2, r01), (1, 3, r02))):
        for mine, other in ((own1, own2), (own2, own1)):
            row = np.zeros(4)
            row[mine] = 1
            row[other] = b
            A.append(row)
            ub.append(b * p - b * r0j)
    r0 = r01 + r02
    A.append(np.array([1, 1, b, b]))
    ub.append(b * mac - b * r0)
    A.append(np.array([b, b, 1, 1]))
    ub.append(b * mac - b * r0)
    c = -np.array([direction[0], direction[0], direction[1], direction[1]])
    res = linprog(c, A_ub=np.array(A), b_ub=np.array(ub), bounds=[(0, None)] * 4, method="highs")
    assert res.status == 0
    return -res.fun


def test_zero_tuple_slacks():
    m = ChannelModel(0.3)
    mem = is_achievable(RateTuple(), m)
    assert mem
    assert mem.slack["bc_11"] == pytest.approx(m.beta * m.p)
    assert mem.slack["xc_1"] == pytest.approx(m.beta * m.mac_capacity)


def test_xc_bounds_tight_at_symmetric_point():
    mem = is_achievable(RateTuple(r11=0.225, r12=0.225, r21=0.225, r22=0.225), HALF)
    assert mem
    assert mem.slack["xc_1"] == pytest.approx(0, abs=1e-12)
    assert mem.slack["xc_2"] == pytest.approx(0, abs=1e-12)


def test_bc_bound_rejects():
    mem = is_achievable(RateTuple(r11=0.8), HALF)
    assert not mem
    assert mem.slack["bc_11"] < 0


def test_negative_component():
    with pytest.raises(ValueError):
        is_achievable(RateTuple(r12=-0.1), HALF)
    with pytest.raises(ValueError):
        is_achievable(RateTuple(), HALF, tol=-1)


def test_paper_constants():
    assert abs(sum_capacity(0.25, HALF) - 0.85) <= 1e-9
    assert symmetric_corner(0.0, HALF) == pytest.approx((0.45, 0.45), abs=1e-12)
    assert max(min(v) for v in bc_polygon(0.0, HALF)) == pytest.approx(0.3, abs=1e-12)


def test_derived_constants():
    assert sum_capacity(0.0, HALF) == pytest.approx(0.9)
    assert sum_capacity(0.75, HALF) == pytest.approx(0.75)
    assert symmetric_corner(0.25, HALF) == pytest.approx((0.3, 0.3))
    assert symmetric_corner(0.75, HALF) == pytest.approx((0.0, 0.0))
    assert ic_sum_capacity(HALF) == pytest.approx(0.9)
    assert ic_sum_capacity(ChannelModel(0.1)) == pytest.approx(0.2)
    assert ic_sum_capacity(ChannelModel(1.0)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        sum_capacity(0.8, HALF)


def test_crossover_by_bisection():
    f = lambda p: 2 * p - xc_sum_capacity(ChannelModel(p))
    lo, hi = 0.1, 0.9
    for _ in range(200):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if f(mid) < 0 else (lo, mid)
    assert ic_xc_crossover() == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-12)
    assert abs(ic_xc_crossover() - lo) <= 1e-9
    assert needs_split_phase(ChannelModel(0.3)) and not needs_split_phase(HALF)
    assert ic_sum_capacity(ChannelModel(0.3)) == pytest.approx(0.6)
    assert xc_sum_capacity(ChannelModel(0.3)) > 0.6


@pytest.mark.parametrize(
    "r0,expected",
    [
        (0.0, [(0, 0), (0.75, 0), (0.45, 0.45), (0, 0.75)]),
        (0.25, [(0, 0), (0.5, 0), (0.3, 0.3), (0, 0.5)]),
        (0.75, [(0, 0)]),
    ],
)
def test_slice_vertices(r0, expected):
    verts = region_slice(r0 / 2, r0 / 2, HALF).vertices
    assert len(verts) == len(expected)
    for v, e in zip(verts, expected):
        assert v == pytest.approx(e, abs=1e-9)


def test_slice_split_independent_for_example():
    a = region_slice(0.25, 0.0, HALF).vertices
    b = region_slice(0.125, 0.125, HALF).vertices
    assert np.allclose(a, b, atol=1e-9)


@pytest.mark.parametrize("p", [0.2, 0.3, 0.5, 0.8, 1.0])
@pytest.mark.parametrize("split", [(0.0, 0.0), (0.05, 0.0), (0.04, 0.06)])
def test_slice_matches_lp_support(p, split):
    """The polygon's support function equals the 4-variable LP optimum in every direction."""
    m = ChannelModel(p)
    verts = np.array(region_slice(*split, m).vertices)
    for ang in np.linspace(0, math.pi / 2, 13):
        d = (math.cos(ang), math.sin(ang))
        assert float(np.max(verts @ d)) == pytest.approx(lp_support(m, *split, d), abs=1e-9)


@pytest.mark.parametrize("r0", [0.0, 0.25, 0.5])
def test_vertices_pass_and_scaled_fail(r0):
    sl = region_slice(r0 / 2, r0 / 2, HALF)
    for x, y in sl.vertices:
        r = RateTuple(r01=r0 / 2, r02=r0 / 2, r11=x / 2, r12=x / 2, r21=y / 2, r22=y / 2)
        assert is_achievable(r, HALF, tol=1e-9)
        if x or y:
            big = RateTuple(r01=r0 / 2, r02=r0 / 2, r11=1.01 * x / 2, r12=1.01 * x / 2, r21=1.01 * y / 2, r22=1.01 * y / 2)
            assert not is_achievable(big, HALF, tol=1e-9)


def test_bc_slice():
    verts = bc_slice(1, 0.0, HALF).vertices
    assert max(v[0] for v in verts) == pytest.approx(0.5)
    assert (0.3, 0.3) == pytest.approx(max(verts, key=lambda v: min(v)))
    assert bc_slice(2, 0.5, HALF).vertices == [(0.0, 0.0)]
    with pytest.raises(ValueError):
        bc_slice(1, 0.6, HALF)
    with pytest.raises(ValueError):
        bc_slice(3, 0.0, HALF)


def test_infeasible_split():
    with pytest.raises(ValueError):
        region_slice(0.5, 0.5, HALF)


def test_exports(tmp_path):
    sl = region_slice(0, 0, HALF)
    sl.to_csv(tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "r1,r2" and len(lines) == 5
    sl.to_svg(tmp_path / "s.svg")
    assert "<polygon" in (tmp_path / "s.svg").read_text()


def test_convex_hull_ccw():
    hull = convex_hull([(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)])
    area = sum(x1 * y2 - x2 * y1 for (x1, y1), (x2, y2) in zip(hull, hull[1:] + hull[:1]))
    assert len(hull) == 4 and area > 0


rate = st.floats(0, 0.6, allow_nan=False)


@given(st.floats(0.01, 1.0), rate, rate, rate, rate, rate, rate, st.floats(0, 1))
def test_downward_closed(p, a, b, c, d, e, f, shrink):
    m = ChannelModel(p)
    r = RateTuple(a, b, c, d, e, f)
    if is_achievable(r, m):
        assert is_achievable(r.scaled(shrink), m)


@given(st.floats(0.01, 1.0), rate, rate, st.floats(0, 1))
def test_xc_depends_on_r0_sum_only(p, r01, r02, w):
    m = ChannelModel(p)
    s1 = bound_slacks(RateTuple(r01=r01, r02=r02, r11=0.1, r22=0.1), m)
    tot = r01 + r02
    s2 = bound_slacks(RateTuple(r01=w * tot, r02=(1 - w) * tot, r11=0.1, r22=0.1), m)
    assert s1["xc_1"] == pytest.approx(s2["xc_1"], abs=1e-12)
    assert s1["xc_2"] == pytest.approx(s2["xc_2"], abs=1e-12)


@given(st.floats(0.01, 1.0), st.floats(0, 1), st.floats(0, 1))
def test_sum_capacity_affine(p, u, v):
    m = ChannelModel(p)
    a, b = sorted((u * m.mac_capacity, v * m.mac_capacity))
    slope = 1 - 2 * m.beta / (1 + m.beta)
    assert sum_capacity(b, m) - sum_capacity(a, m) == pytest.approx(slope * (b - a), abs=1e-12)
    r1, r2 = symmetric_corner(a, m)
    assert r1 + r2 + a == pytest.approx(sum_capacity(a, m), abs=1e-15)
