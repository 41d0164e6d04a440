"""Randomized adiabatic schedule.

The path parameter s is reparametrized by v, with v discretized uniformly on
[v_a, v_b]. Step j evolves for a time drawn uniformly from [0, 2 pi / gap(s_j)]
and is split into r_j Trotter slices. Logarithms of kappa are base 2, with
the argument clamped to max(kappa, 2).

Random draws use numpy's Philox counter-based generator keyed by the seed,
so a schedule is reproducible across platforms and numpy versions that keep
the Philox stream stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_C_Q = 2.0
DEFAULT_C_R = 1.0
TOL = 1e-12


def _check_kappa(kappa: float) -> float:
    kappa = float(kappa)
    if not kappa >= 1.0:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    return kappa


def _c(kappa: float) -> float:
    return math.sqrt(1 + kappa * kappa) / (math.sqrt(2) * kappa)


def compute_va_vb(kappa: float) -> tuple[float, float]:
    kappa = _check_kappa(kappa)
    root = math.sqrt(1 + kappa * kappa)
    pre = math.sqrt(2) * kappa / root
    # kappa*root - kappa^2 == kappa / (root + kappa); the second form avoids cancellation
    va = pre * math.log(kappa / (root + kappa))
    vb = pre * math.log(root + 1)
    return va, vb


def s_of_v(v: float, kappa: float, clamp: bool = True) -> float:
    kappa = _check_kappa(kappa)
    va, vb = compute_va_vb(kappa)
    if v < va - TOL * max(1.0, abs(va)) or v > vb + TOL * max(1.0, abs(vb)):
        raise ValueError(f"v={v} outside [{va}, {vb}]")
    c = _c(kappa)
    k2 = kappa * kappa
    s = (math.exp(v * c) + 2 * k2 - k2 * math.exp(-v * c)) / (2 * (1 + k2))
    return min(max(s, 0.0), 1.0) if clamp else s


def gap(s: float, kappa: float) -> float:
    if not -TOL <= s <= 1 + TOL:
        raise ValueError(f"s={s} outside [0, 1]")
    return math.sqrt((1 - s) ** 2 + (s / kappa) ** 2)


def min_gap(kappa: float) -> tuple[float, float]:
    """(argmin s, minimum value) of the gap on [0, 1]."""
    k2 = kappa * kappa
    return k2 / (1 + k2), 1 / math.sqrt(1 + k2)


def log2_kappa(kappa: float) -> float:
    return math.log2(max(kappa, 2.0))


def step_count(kappa: float, eps: float, c_q: float = DEFAULT_C_Q) -> int:
    return max(1, math.ceil(c_q * log2_kappa(kappa) ** 2 / eps))


def trotter_number(t: float, kappa: float, eps: float, m: int, d: int, c_r: float = DEFAULT_C_R) -> int:
    return max(1, math.ceil(c_r * m * m * d**4 * t * t * log2_kappa(kappa) ** 2 / (eps * eps)))


def theorem_trotter_number(kappa: float, eps: float, m: int, d: int, c_r: float = DEFAULT_C_R) -> int:
    """The single global r = c_r m^2 d^4 kappa^2 / eps, reported for comparison."""
    return max(1, math.ceil(c_r * m * m * d**4 * kappa * kappa / eps))


@dataclass(frozen=True)
class Step:
    v: float
    s: float
    gap: float
    t: float
    r: int


@dataclass(frozen=True)
class Schedule:
    kappa: float
    eps: float
    seed: int
    c_q: float
    c_r: float
    m: int
    d: int
    steps: tuple[Step, ...]

    @property
    def q(self) -> int:
        return len(self.steps)

    @property
    def total_r(self) -> int:
        return sum(st.r for st in self.steps)

    @property
    def total_time(self) -> float:
        return sum(st.t for st in self.steps)

    @property
    def theorem_r(self) -> int:
        return theorem_trotter_number(self.kappa, self.eps, self.m, self.d, self.c_r)

    def table(self) -> list[dict]:
        return [{"j": j + 1, "v": st.v, "s": st.s, "gap": st.gap, "t": st.t, "r": st.r}
                for j, st in enumerate(self.steps)]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def build_schedule(kappa: float, eps: float, seed: int, c_q: float = DEFAULT_C_Q,
                   c_r: float = DEFAULT_C_R, m: int = 1, d: int = 1) -> Schedule:
    kappa = _check_kappa(kappa)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if c_q <= 0 or c_r <= 0:
        raise ValueError("c_q and c_r must be positive")
    if m < 1 or d < 1:
        raise ValueError("m and d must be positive")
    q = step_count(kappa, eps, c_q)
    va, vb = compute_va_vb(kappa)
    delta = (vb - va) / q
    rng = make_rng(seed)
    u = rng.random(q)
    steps = []
    for j in range(1, q + 1):
        v = vb if j == q else va + j * delta
        s = s_of_v(v, kappa)
        g = gap(s, kappa)
        t = float(u[j - 1]) * 2 * math.pi / g
        steps.append(Step(v, s, g, t, trotter_number(t, kappa, eps, m, d, c_r)))
    return Schedule(kappa, eps, int(seed), c_q, c_r, m, d, tuple(steps))
