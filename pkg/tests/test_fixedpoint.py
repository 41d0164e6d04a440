import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tfqlsa.fixedpoint import (FixedPoint, add, bits_for_eps, encode, encode_exact, mul, mul_chain,
                               running_bound, truncate)


def signed_values(p):
    for sign in (1, -1):
        for mag in range(2**p):
            yield FixedPoint(sign, mag, p)


def test_encode_exact_value():
    fp = encode(0.625, 3)
    assert fp.bits == (1, 0, 1) and fp.value == Fraction(5, 8)


def test_encode_one_third():
    fp = encode(1 / 3, 2)
    assert fp.bits == (0, 1)
    assert float(fp) == 0.25
    assert abs(1 / 3 - float(fp)) <= 2**-2


def test_encode_rejects_out_of_range():
    with pytest.raises(ValueError):
        encode(1.2, 4)
    with pytest.raises(ValueError):
        encode(-0.1, 4)


def test_encode_one_clamps_to_all_ones():
    assert encode(1.0, 3).bits == (1, 1, 1)


def test_bits_for_eps_and_random_errors(rng):
    assert bits_for_eps(0.05) == 6
    for v in rng.random(1000):
        assert abs(v - float(encode(v, 6))) <= 2**-6


def test_encode_exact_round_trip():
    for mag in range(16):
        v = mag / 16
        assert float(encode_exact(v, 4)) == v
    with pytest.raises(ValueError):
        encode_exact(0.3, 4)


@given(st.floats(0, 1), st.floats(0, 1), st.integers(1, 20))
def test_encode_monotone(a, b, p):
    lo, hi = sorted((a, b))
    assert encode(lo, p).value <= encode(hi, p).value


def test_add_examples():
    h, q = encode(0.5, 2), encode(0.25, 2)
    assert add(h, q).value == Fraction(3, 4)
    s = add(encode(0.75, 2), encode(0.75, 2))
    assert s.value == Fraction(3, 2)
    assert s.bits[0] == 1 and Fraction(s.mag - 2**s.frac_bits, 2**s.frac_bits) == Fraction(1, 2)
    assert add(FixedPoint(-1, 2, 2), FixedPoint(1, 2, 2)).value == 0


def test_mul_examples():
    assert mul(encode(0.5, 2), encode(0.5, 2)).value == Fraction(1, 4)
    prod = mul(encode(0.75, 2), encode(0.75, 2))
    assert prod.value == Fraction(9, 16) and prod.bits == (1, 0, 0, 1)
    assert mul(FixedPoint(-1, 2, 2), encode(0.5, 2)).value == Fraction(-1, 4)


@pytest.mark.parametrize("p", [1, 2, 3, 4, 5])
def test_add_mul_exhaustive_against_rationals(p):
    vals = list(signed_values(p))
    for a, b in itertools.product(vals, vals):
        assert add(a, b).value == a.value + b.value
        assert mul(a, b).value == a.value * b.value


def test_truncate_examples():
    t = truncate(FixedPoint(1, 0b1001, 4))
    assert t.bits == (1, 0) and float(t) == 0.5
    assert float(FixedPoint(1, 0b1001, 4)) - float(t) == 0.0625
    exact = FixedPoint(1, 0b1100, 4)
    assert truncate(exact).value == exact.value
    ones = FixedPoint(1, 2**8 - 1, 8)
    assert ones.value - truncate(ones).value == Fraction(1, 16) - Fraction(1, 256)


@given(st.integers(1, 10), st.data())
def test_truncate_error_bound(p, data):
    mag = data.draw(st.integers(0, 2 ** (2 * p) - 1))
    a = FixedPoint(1, mag, 2 * p)
    assert 0 <= a.value - truncate(a).value <= Fraction(1, 2**p)


def test_mul_chain_bound_value():
    _, bound = mul_chain([0.3, 0.4, 0.5], bits_for_eps(0.05), 0.05)
    assert bound == pytest.approx(0.45)


def test_mul_chain_exact_representable():
    eps = 2.0**-5
    res, _ = mul_chain([0.5, 0.5, 0.5], bits_for_eps(eps), eps)
    assert res.value == Fraction(1, 8)


def test_mul_chain_preconditions():
    with pytest.raises(ValueError):
        mul_chain([0.5], 6, 0.05)
    with pytest.raises(ValueError):
        mul_chain([0.5] * 7, 6, 0.05)  # 7 * 0.05 >= 1/3
    with pytest.raises(ValueError):
        mul_chain([0.5, 0.5], 5, 0.05)


def test_running_bound_is_tighter_than_lemma():
    for eps in (0.01, 0.02, 0.04):
        for k in range(2, 8):
            if k * eps < 1 / 3:
                assert running_bound(k, eps) <= 3 * k * eps
    assert running_bound(2, 0.1) == pytest.approx(0.3 + 0.01)


def test_mul_chain_random_trials_respect_running_bound(rng):
    for _ in range(2000):
        p = int(rng.integers(4, 11))
        eps = 2.0 ** (1 - p)
        kmax = min(8, math.ceil(1 / (3 * eps)) - 1)
        if kmax < 2:
            continue
        k = int(rng.integers(2, kmax + 1))
        vals = rng.random(k)
        res, bound = mul_chain(vals, p, eps)
        exact = Fraction(1)
        for v in vals:
            exact *= Fraction(v)
        err = abs(exact - res.value)
        assert err <= bound
        assert err <= running_bound(k, eps) + 1e-15
