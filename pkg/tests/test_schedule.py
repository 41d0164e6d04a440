import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tfqlsa.schedule import (build_schedule, compute_va_vb, gap, log2_kappa, min_gap, s_of_v, step_count,
                             theorem_trotter_number, trotter_number)

ASINH_1 = 0.881373587019543  # log(1 + sqrt 2)


def s_of_v_reference(v, kappa):
    c = math.sqrt(1 + kappa**2) / (math.sqrt(2) * kappa)
    return (math.exp(v * c) + 2 * kappa**2 - kappa**2 * math.exp(-v * c)) / (2 * (1 + kappa**2))


def test_va_vb_frozen_at_kappa_one():
    va, vb = compute_va_vb(1.0)
    assert va == pytest.approx(-ASINH_1, abs=1e-15)
    assert vb == pytest.approx(ASINH_1, abs=1e-15)


def test_va_direct_formula():
    for kappa in (1.5, 2.0, 10.0):
        pre = math.sqrt(2) * kappa / math.sqrt(1 + kappa**2)
        direct = pre * math.log(kappa * math.sqrt(1 + kappa**2) - kappa**2)
        assert compute_va_vb(kappa)[0] == pytest.approx(direct, rel=1e-9)


@given(st.floats(1.0, 1e6))
def test_endpoints_map_to_zero_and_one(kappa):
    va, vb = compute_va_vb(kappa)
    assert abs(s_of_v(va, kappa, clamp=False)) <= 1e-12
    assert abs(s_of_v(vb, kappa, clamp=False) - 1) <= 1e-12


@given(st.floats(1.0, 100.0), st.floats(0.0, 1.0))
def test_s_of_v_monotone_and_matches_reference(kappa, u):
    va, vb = compute_va_vb(kappa)
    v = va + u * (vb - va)
    assert s_of_v(v, kappa) == pytest.approx(min(max(s_of_v_reference(v, kappa), 0), 1), abs=1e-12)
    assert s_of_v(min(vb, v + 1e-3), kappa) >= s_of_v(v, kappa)


def test_s_of_v_out_of_range():
    with pytest.raises(ValueError):
        s_of_v(2.0, 1.0)


def test_gap_values_and_minimum():
    assert gap(0.0, 3.0) == 1.0
    assert gap(1.0, 4.0) == 0.25
    s_min, g_min = min_gap(2.0)
    assert s_min == pytest.approx(0.8) and g_min == pytest.approx(1 / math.sqrt(5))
    grid = np.linspace(0, 1, 100001)
    vals = np.sqrt((1 - grid) ** 2 + (grid / 2.0) ** 2)
    assert vals.min() == pytest.approx(g_min, abs=1e-9)


def test_step_count_frozen():
    assert step_count(2.0, 0.2, c_q=1.0) == 5
    assert step_count(1.0, 0.2, c_q=1.0) == 5  # log argument clamped to 2
    assert step_count(4.0, 0.1, c_q=2.0) == 80
    assert log2_kappa(8.0) == 3.0


def test_trotter_numbers_frozen():
    assert trotter_number(1.0, 2.0, 0.5, 1, 1, 1.0) == 4
    assert trotter_number(0.0, 2.0, 0.5, 2, 2, 1.0) == 1
    assert theorem_trotter_number(2.0, 0.5, 1, 2, 1.0) == 128


def test_schedule_spec_example():
    sch = build_schedule(2.0, 0.2, seed=7, c_q=1.0)
    assert sch.q == 5
    vs = [s.v for s in sch.steps]
    va, vb = compute_va_vb(2.0)
    assert np.allclose(np.diff([va] + vs), (vb - va) / 5)
    assert sch.steps[-1].s == 1.0
    for s in sch.steps:
        assert 0 <= s.t <= 2 * math.pi / s.gap
        assert s.t <= 2 * math.pi * math.sqrt(1 + 2.0**2)
        assert s.r == trotter_number(s.t, 2.0, 0.2, 1, 1, 1.0)


def test_schedule_reproducible_and_seed_sensitive():
    a = build_schedule(3.0, 0.1, seed=11)
    b = build_schedule(3.0, 0.1, seed=11)
    c = build_schedule(3.0, 0.1, seed=12)
    assert a.table() == b.table()
    assert [s.t for s in a.steps] != [s.t for s in c.steps]
    assert a.total_r == sum(s.r for s in a.steps)
    assert a.total_time == pytest.approx(sum(s.t for s in a.steps))


def test_schedule_validation():
    with pytest.raises(ValueError):
        build_schedule(0.5, 0.1, 0)
    with pytest.raises(ValueError):
        build_schedule(2.0, 1.5, 0)
    with pytest.raises(ValueError):
        build_schedule(2.0, 0.1, 0, c_q=0)
