"""H(s) for the tensor-format QLSA and its split into structured summands.

Qubit 0 selects the off-diagonal block, qubit 1 is the extension qubit of
A(s), and the system register follows. Writing B = |b~><b~| with
|b~> = |+> x |b>:

    H(s) = X x A(s) - [[0, A(s) B], [B A(s), 0]]

X x A(s) gives the Type-1 terms. Expanding A(s) B with Z(I+X)/2 = (Z+iY)/2
and X(I+X)/2 = (X+I)/2 gives the Type-2 terms. Every Type-2 term carries
coefficient -1/2 times (1-s) or s.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .linalg import I2, kron_all, svd_2x2, eig_hermitian_2x2
from .problem import DENSE_CAP, LspTfInstance, expand_dense

log = logging.getLogger(__name__)

PAULI = {
    "I": I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
PAULI["iY"] = 1j * PAULI["Y"]

NORM_TOL = 1e-10


def _check_s(s: float) -> float:
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s={s} outside [0, 1]")
    return s


@dataclass(frozen=True, eq=False)
class Type1Term:
    """coefficient * P1 x P2 x C_1 x ... x C_n."""

    coefficient: float
    pauli_pair: tuple[str, str]
    system: tuple[np.ndarray, ...]
    origin: str = ""
    kind: str = field(default="type1", init=False)

    @property
    def factors(self) -> tuple[np.ndarray, ...]:
        return (PAULI[self.pauli_pair[0]], PAULI[self.pauli_pair[1]]) + self.system

    @cached_property
    def eig_factors(self):
        """Per-factor (U, eigenvalues) with eigenvalues ordered by magnitude."""
        out = []
        for f in self.factors:
            u, lam = eig_hermitian_2x2(f)
            if abs(lam[1]) > abs(lam[0]):
                u, lam = u[:, ::-1], lam[::-1]
            out.append((u, lam))
        return tuple(out)

    @cached_property
    def norm(self) -> float:
        return abs(self.coefficient) * float(np.prod([abs(lam[0]) for _, lam in self.eig_factors]))

    def dense(self) -> np.ndarray:
        return self.coefficient * kron_all(self.factors)


@dataclass(frozen=True, eq=False)
class Type2Term:
    """coefficient * [[0, P0 x D], [P0^H x D^H, 0]] with P0 a (phased) Pauli."""

    coefficient: float
    corner_pauli: str
    system: tuple[np.ndarray, ...]
    origin: str = ""
    kind: str = field(default="type2", init=False)

    @property
    def corner(self) -> np.ndarray:
        return PAULI[self.corner_pauli]

    @property
    def factors(self) -> tuple[np.ndarray, ...]:
        return self.system

    @cached_property
    def svds(self):
        return tuple(svd_2x2(f) for f in self.system)

    @cached_property
    def norm(self) -> float:
        return abs(self.coefficient) * float(np.prod([sv.sigma_major for sv in self.svds]))

    def dense(self) -> np.ndarray:
        m = np.kron(self.corner, kron_all(self.system))
        z = np.zeros_like(m)
        return self.coefficient * np.block([[z, m], [m.conj().T, z]])


@dataclass(frozen=True, eq=False)
class Decomposition:
    s: float
    type1: tuple[Type1Term, ...]
    type2: tuple[Type2Term, ...]

    @property
    def terms(self) -> tuple:
        """Canonical Trotter order: H1, H2 by i, H3 by (j1, j2, corner), H4 by (i, j1, j2, corner)."""
        return self.type1 + self.type2

    def dense(self) -> np.ndarray:
        return sum(t.dense() for t in self.terms)


def build_a_of_s(inst: LspTfInstance, s: float, cap: int = DENSE_CAP) -> np.ndarray:
    s = _check_s(s)
    a, _ = expand_dense(inst, cap)
    return (1 - s) * np.kron(PAULI["Z"], np.eye(a.shape[0])) + s * np.kron(PAULI["X"], a)


def b_bar(inst: LspTfInstance, cap: int = DENSE_CAP) -> np.ndarray:
    _, b = expand_dense(inst, cap)
    nb = np.linalg.norm(b)
    if nb == 0:
        raise ValueError("zero b")
    return np.kron(np.array([1, 1]) / np.sqrt(2), b / nb)


def build_h_dense(inst: LspTfInstance, s: float, cap: int = DENSE_CAP) -> np.ndarray:
    a_s = build_a_of_s(inst, s, cap)
    bb = b_bar(inst, cap)
    perp = np.eye(len(bb)) - np.outer(bb, bb.conj())
    z = np.zeros_like(a_s)
    return np.block([[z, a_s @ perp], [perp @ a_s, z]])


def kernel_vector(inst: LspTfInstance, s: float, cap: int = DENSE_CAP) -> np.ndarray:
    """|0> x |x(s)> with x(s) proportional to A(s)^{-1} |b~>, normalized."""
    a_s = build_a_of_s(inst, s, cap)
    x = np.linalg.solve(a_s, b_bar(inst, cap))
    x = x / np.linalg.norm(x)
    return np.concatenate([x, np.zeros_like(x)])


def decompose(inst: LspTfInstance, s: float) -> Decomposition:
    """m+1 Type-1 and 2d^2 + 2md^2 Type-2 terms summing to H(s).

    Terms whose coefficient vanishes (s at an endpoint) are kept so the
    counts never change.
    """
    s = _check_s(s)
    n = inst.n
    eye = tuple(I2 for _ in range(n))
    t1 = [Type1Term(1 - s, ("X", "Z"), eye, "H1")]
    t1 += [Type1Term(s, ("X", "X"), tuple(term), f"H2[{i}]") for i, term in enumerate(inst.a_terms)]

    outer = {}
    for j1, bj1 in enumerate(inst.b_terms):
        for j2, bj2 in enumerate(inst.b_terms):
            outer[j1, j2] = tuple(np.outer(x, y.conj()) for x, y in zip(bj1, bj2))
    t2 = []
    for (j1, j2), d in outer.items():
        for corner in ("Z", "iY"):
            t2.append(Type2Term(-0.5 * (1 - s), corner, d, f"H3[{j1},{j2},{corner}]"))
    for i, a_term in enumerate(inst.a_terms):
        for (j1, j2), d in outer.items():
            fac = tuple(a @ x for a, x in zip(a_term, d))
            for corner in ("X", "I"):
                t2.append(Type2Term(-0.5 * s, corner, fac, f"H4[{i},{j1},{j2},{corner}]"))
    return Decomposition(s, tuple(t1), tuple(t2))


def term_count_bound(m: int, d: int) -> int:
    return 1 + m + 2 * d * d + 2 * m * d * d


def comm_bound(dec: Decomposition) -> float:
    """2 (sum of term norms)^2, an upper bound on the first-order commutator factor."""
    total = sum(t.norm for t in dec.terms)
    val = 2.0 * total * total
    m = len(dec.type1) - 1
    d = int(round(np.sqrt(len(dec.type2) / (2 + 2 * m))))
    cap = 2.0 * term_count_bound(m, d) ** 2
    if val > cap * (1 + NORM_TOL):
        log.warning("commutator bound %.4g exceeds %.4g: some term norm is above 1", val, cap)
    return val


def commutator_sum(dec: Decomposition) -> float:
    """Exact sum over ordered pairs of ||[H_a, H_b]||_2 (dense, desk scale only)."""
    mats = [t.dense() for t in dec.terms]
    tot = 0.0
    for a in range(len(mats)):
        for b in range(len(mats)):
            if a != b:
                tot += np.linalg.norm(mats[a] @ mats[b] - mats[b] @ mats[a], 2)
    return float(tot)
