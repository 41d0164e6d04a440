"""Signed binary fractions: the classical model of the arithmetic registers.

A value is stored as ``sign * mag / 2**frac_bits`` with ``mag`` an integer.
``int_bits`` is 0 for pure fractions and 1 for adder outputs, whose leading
digit carries weight 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass(frozen=True)
class FixedPoint:
    sign: int
    mag: int
    frac_bits: int
    int_bits: int = 0

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.frac_bits < 1:
            raise ValueError("need at least one fractional bit")
        if not 0 <= self.mag < 2 ** (self.frac_bits + self.int_bits):
            raise ValueError("magnitude does not fit the declared bit width")

    @property
    def p(self) -> int:
        return self.frac_bits

    @property
    def width(self) -> int:
        return self.frac_bits + self.int_bits

    @property
    def bits(self) -> tuple[int, ...]:
        """Digits most-significant first; the i-th fractional digit weighs 2**-i."""
        w = self.width
        return tuple((self.mag >> (w - 1 - i)) & 1 for i in range(w))

    @property
    def value(self) -> Fraction:
        return Fraction(self.sign * self.mag, 2**self.frac_bits)

    def __float__(self) -> float:
        return float(self.value)

    @classmethod
    def from_bits(cls, bits: Sequence[int], sign: int = 1, int_bits: int = 0) -> "FixedPoint":
        mag = 0
        for b in bits:
            if b not in (0, 1):
                raise ValueError("bits must be 0 or 1")
            mag = (mag << 1) | b
        return cls(sign, mag, len(bits) - int_bits, int_bits)


def bits_for_eps(eps: float) -> int:
    """Smallest register that guarantees an eps-approximation: ceil(1 - log2 eps)."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    return max(1, math.ceil(1 - math.log2(eps)))


def encode(value: float, p: int) -> FixedPoint:
    """Truncated p-digit binary expansion of ``value`` in [0, 1].

    1.0 itself is not representable and maps to all ones (error 2**-p).
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    v = Fraction(value)
    if v < 0 or v > 1:
        raise ValueError(f"encode expects a value in [0, 1], got {value}")
    mag = math.floor(v * 2**p)
    return FixedPoint(1, min(mag, 2**p - 1), p)


def encode_exact(value: float, p: int) -> FixedPoint:
    fp = encode(value, p)
    if fp.value != Fraction(value):
        raise ValueError(f"{value} is not exactly representable with {p} bits")
    return fp


def _signed(a: FixedPoint) -> int:
    return a.sign * a.mag


def add(a: FixedPoint, b: FixedPoint) -> FixedPoint:
    """Exact signed sum with one extra integer digit."""
    if a.frac_bits != b.frac_bits or a.int_bits or b.int_bits:
        raise ValueError("add expects two pure fractions with the same p")
    total = _signed(a) + _signed(b)
    return FixedPoint(-1 if total < 0 else 1, abs(total), a.frac_bits, 1)


def mul(a: FixedPoint, b: FixedPoint) -> FixedPoint:
    """Exact product of two p-digit fractions in 2p digits."""
    if a.frac_bits != b.frac_bits or a.int_bits or b.int_bits:
        raise ValueError("mul expects two pure fractions with the same p")
    return FixedPoint(a.sign * b.sign, a.mag * b.mag, 2 * a.frac_bits)


def truncate(a: FixedPoint, p: int | None = None) -> FixedPoint:
    """Drop the low half of a 2p-digit fraction (toward zero)."""
    if a.int_bits:
        raise ValueError("truncate expects a pure fraction")
    if p is None:
        if a.frac_bits % 2:
            raise ValueError("cannot infer p from an odd width")
        p = a.frac_bits // 2
    if p > a.frac_bits:
        raise ValueError("cannot truncate to more bits than present")
    return FixedPoint(a.sign, a.mag >> (a.frac_bits - p), p)


def running_bound(k: int, eps: float) -> float:
    """Error recursion e_{k+1} = 2 eps + e_k (1 + eps) starting at e_1 = eps."""
    e = eps
    for _ in range(k - 1):
        e = 2 * eps + e * (1 + eps)
    return e


def fold_product(encoded: Sequence[FixedPoint]) -> FixedPoint:
    """Left-to-right mul + truncate, keeping the running width at p digits."""
    acc = encoded[0]
    for f in encoded[1:]:
        acc = truncate(mul(acc, f), acc.frac_bits)
    return acc


def mul_chain(values: Sequence[float], p: int, eps: float) -> tuple[FixedPoint, float]:
    """Encode each value at p digits and multiply under the truncation strategy.

    Returns the p-digit result and the 3*K*eps error bound.
    """
    k = len(values)
    if k < 2:
        raise ValueError("mul_chain needs at least two values")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if k * eps >= 1 / 3:
        raise ValueError(f"K*eps = {k * eps:.4g} violates K*eps < 1/3")
    if p != bits_for_eps(eps):
        raise ValueError(f"p={p} does not match ceil(1 - log2 eps)={bits_for_eps(eps)}")
    result = fold_product([encode(v, p) for v in values])
    return result, 3 * k * eps
