"""Gate-level circuit IR and the arithmetic / evolution builders.

Qubits are global integers. Simulation uses big-endian basis indices (qubit 0
is the most significant bit). Arithmetic registers are stored as qubit lists
in little-endian order, so ``reg[i]`` carries weight ``2**i``.

A circuit splits its qubits into data qubits ``[0, n_data)`` and arithmetic
ancillas ``[n_data, n_qubits)``. Ancillas must start and end in |0>. That is
what lets the emulation mode in the simulator drop them entirely.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .fixedpoint import FixedPoint, encode, fold_product
from .linalg import I2, eig_hermitian_2x2, svd_2x2

DUMP_VERSION = 1
STRUCTURAL_TOL = 1e-12
GRID_SNAP = 1e-12

X_MAT = np.array([[0, 1], [1, 0]], dtype=complex)
H_MAT = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def phase_matrix(angle: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * angle)])


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _is_identity(m: np.ndarray, tol: float = 1e-15) -> bool:
    return bool(np.max(np.abs(m - I2)) <= tol)


# ---------------------------------------------------------------- IR types


@dataclass(frozen=True, eq=False)
class Gate:
    """Single-qubit unitary on ``target``, optionally multi-controlled.

    ``kind`` is one of ``u``, ``cu``, ``phase``, ``cphase``. A control fires
    when its qubit equals the matching ``polarity`` entry.
    """

    kind: str
    target: int
    matrix: np.ndarray
    controls: tuple[int, ...] = ()
    polarity: tuple[int, ...] = ()
    label: str = ""

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + (self.target,)

    def inverse(self) -> "Gate":
        label = self.label if self.label in ("X", "H", "CX") else (self.label + "^-1" if self.label else "")
        return Gate(self.kind, self.target, self.matrix.conj().T, self.controls, self.polarity, label)

    def with_controls(self, controls: Sequence[int], polarity: Sequence[int]) -> "Gate":
        if not controls:
            return self
        kind = {"u": "cu", "phase": "cphase"}.get(self.kind, self.kind)
        return Gate(kind, self.target, self.matrix, tuple(controls) + self.controls,
                    tuple(polarity) + self.polarity, self.label)


def gate(target: int, matrix, label: str = "", controls: Sequence[int] = (),
         polarity: Sequence[int] | None = None) -> Gate:
    m = np.asarray(matrix, dtype=complex)
    controls = tuple(controls)
    pol = tuple(polarity) if polarity is not None else (1,) * len(controls)
    if len(pol) != len(controls):
        raise ValueError("polarity length must match controls")
    if target in controls or len(set(controls)) != len(controls):
        raise ValueError("target and controls must be distinct")
    diag_phase = m[0, 1] == 0 and m[1, 0] == 0 and m[0, 0] == 1
    if controls:
        kind = "cphase" if diag_phase else "cu"
    else:
        kind = "phase" if diag_phase else "u"
    return Gate(kind, target, m, controls, pol, label)


@dataclass(eq=False)
class Block:
    """Named composite (QFT, IQFT, ADDER, CADD, MUL, DIAG).

    ``regs`` names the qubit lists the composite acts on; ``params`` carries
    the data needed by the emulation path; ``body`` is built on first use.
    """

    name: str
    regs: dict[str, tuple[int, ...]]
    params: dict
    builder: Callable[[], list]
    controls: tuple[int, ...] = ()
    polarity: tuple[int, ...] = ()
    _body: list | None = field(default=None, repr=False)

    @property
    def qubits(self) -> tuple[int, ...]:
        seen: list[int] = list(self.controls)
        for reg in self.regs.values():
            seen.extend(reg)
        return tuple(dict.fromkeys(seen))

    @property
    def body(self) -> list:
        if self._body is None:
            self._body = self.builder()
        return self._body

    def inverse(self) -> "Block":
        name = {"QFT": "IQFT", "IQFT": "QFT"}.get(self.name, self.name)
        params = dict(self.params)
        if name == self.name:
            params["inverse"] = not params.get("inverse", False)
        fwd = self
        return Block(name, self.regs, params,
                     lambda: [op.inverse() for op in reversed(fwd.body)],
                     self.controls, self.polarity)

    def with_controls(self, controls: Sequence[int], polarity: Sequence[int]) -> "Block":
        return Block(self.name, self.regs, self.params, self.builder,
                     tuple(controls) + self.controls, tuple(polarity) + self.polarity, self._body)


Op = Gate | Block


@dataclass(eq=False)
class Circuit:
    n_qubits: int
    ops: list = field(default_factory=list)
    registers: dict[str, tuple[int, ...]] = field(default_factory=dict)
    n_data: int | None = None

    def __post_init__(self):
        if self.n_data is None:
            self.n_data = self.n_qubits
        if not 0 <= self.n_data <= self.n_qubits:
            raise ValueError("n_data must lie in [0, n_qubits]")

    def append(self, op: Op) -> "Circuit":
        for q in op.qubits:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"qubit {q} outside circuit of width {self.n_qubits}")
        self.ops.append(op)
        return self

    def extend(self, ops: Iterable[Op]) -> "Circuit":
        for op in ops:
            self.append(op)
        return self

    @property
    def n_ancilla(self) -> int:
        return self.n_qubits - self.n_data

    def inverse(self) -> "Circuit":
        return Circuit(self.n_qubits, [op.inverse() for op in reversed(self.ops)],
                       dict(self.registers), self.n_data)

    def __len__(self) -> int:
        return len(self.ops)

    def dump(self) -> str:
        return dump_circuit(self)


def compose(*circuits: Circuit) -> Circuit:
    """Sequential composition (first argument runs first); ancillas are shared."""
    if not circuits:
        raise ValueError("compose needs at least one circuit")
    n_data = circuits[0].n_data
    if any(c.n_data != n_data for c in circuits):
        raise ValueError("cannot compose circuits with different data registers")
    width = max(c.n_qubits for c in circuits)
    regs: dict[str, tuple[int, ...]] = {}
    ops: list = []
    for c in circuits:
        regs.update(c.registers)
        ops.extend(c.ops)
    return Circuit(width, ops, regs, n_data)


# ---------------------------------------------------------------- QFT


def _qft_ops(reg: Sequence[int]) -> list[Gate]:
    """Gates for |x> -> 2^{-w/2} sum_y exp(2 pi i x y / 2^w) |y> on a little-endian register."""
    msb = list(reversed(reg))
    w = len(msb)
    ops: list[Gate] = []
    for a in range(w):
        ops.append(gate(msb[a], H_MAT, "H"))
        for b in range(a + 1, w):
            ops.append(gate(msb[a], phase_matrix(2 * math.pi / 2 ** (b - a + 1)), f"R{b - a + 1}",
                            controls=(msb[b],)))
    for a in range(w // 2):
        x, y = msb[a], msb[w - 1 - a]
        ops += [gate(y, X_MAT, "CX", (x,)), gate(x, X_MAT, "CX", (y,)), gate(y, X_MAT, "CX", (x,))]
    return ops


def qft_block(reg: Sequence[int], inverse: bool = False) -> Block:
    reg = tuple(reg)
    fwd = Block("QFT", {"reg": reg}, {"k": len(reg)}, lambda: _qft_ops(reg))
    return fwd.inverse() if inverse else fwd


def build_qft(k: int, inverse: bool = False) -> Circuit:
    """Standalone QFT on k qubits; qubit k-1 is the least significant bit, so
    the dense unitary is exactly the DFT matrix."""
    if k < 1:
        raise ValueError("k must be >= 1")
    reg = tuple(reversed(range(k)))
    ops = _qft_ops(reg)
    c = Circuit(k, ops, {"q": reg})
    return c.inverse() if inverse else c


# ---------------------------------------------------------------- adder


def _adder_phases(acc: Sequence[int], addend: Sequence[int], shift: int = 1,
                  extra_controls: Sequence[int] = ()) -> list[Gate]:
    """Fourier-space phases adding ``addend * 2**shift`` to ``acc``."""
    w = len(acc)
    ops = []
    for i, src in enumerate(addend):
        for m, dst in enumerate(acc):
            e = i + shift + m
            if e >= w:
                continue
            angle = 2 * math.pi * 2.0**e / 2.0**w
            ops.append(gate(dst, phase_matrix(angle), f"P{e - w}",
                            controls=tuple(extra_controls) + (src,)))
    return ops


def adder_layout(p: int) -> dict[str, tuple[int, ...]]:
    return {
        "acc": tuple(range(p + 2)),
        "addend": tuple(range(p + 2, 2 * p + 3)),
    }


def _adder_ops(acc, addend) -> list:
    return [qft_block(acc)] + _adder_phases(acc, addend) + [qft_block(acc, inverse=True)]


def adder_block(acc, addend) -> Block:
    acc, addend = tuple(acc), tuple(addend)
    if len(acc) != len(addend) + 1:
        raise ValueError("adder needs |acc| = |addend| + 1")
    regs = {"acc": acc, "addend": addend}
    return Block("ADDER", regs, {"p": len(addend) - 1}, lambda: _adder_ops(acc, addend))


def build_adder(p: int) -> Circuit:
    """Same-sign adder: ``acc`` (p+2 qubits) += ``addend`` (p+1 qubits).

    Both registers are little-endian. ``acc`` holds the sign in bit 0 and a
    magnitude with one integer digit in bits 1..p+1 (unit 2**-p); ``addend``
    holds a magnitude of the same shape, so a previous sum can be added
    again. Magnitudes add modulo 2 and the sign of ``acc`` is kept, so the
    result is the exact rational sum whenever both operands share that
    sign and the total stays below 2.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    layout = adder_layout(p)
    return Circuit(2 * p + 3, _adder_ops(layout["acc"], layout["addend"]), layout)


# ---------------------------------------------------------------- multiplier


def multiplier_layout(p: int) -> dict[str, tuple[int, ...]]:
    w = 2 * p + 2
    return {
        "out": tuple(range(w)),
        "a": tuple(range(w, w + p)),
        "a_sign": (w + p,),
        "b": tuple(range(w + p + 1, w + 2 * p + 1)),
        "b_sign": (w + 2 * p + 1,),
    }


def _cadd_block(out, b, ctrl, j) -> Block:
    out, b = tuple(out), tuple(b)
    return Block("CADD", {"acc": out, "addend": b, "control": (ctrl,)}, {"p": len(b), "shift": j + 1},
                 lambda: _adder_phases(out, b, shift=j + 1, extra_controls=(ctrl,)))


def _mul_ops(out, a, a_sign, b, b_sign) -> list:
    ops: list = [qft_block(out)]
    ops += [_cadd_block(out, b, a[j], j) for j in range(len(a))]
    ops += [qft_block(out, inverse=True),
            gate(out[0], X_MAT, "CX", (a_sign,)), gate(out[0], X_MAT, "CX", (b_sign,))]
    return ops


def mul_block(out, a, a_sign: int, b, b_sign: int) -> Block:
    out, a, b = tuple(out), tuple(a), tuple(b)
    if len(a) != len(b) or len(out) != 2 * len(a) + 2:
        raise ValueError("multiplier needs |a| = |b| = p and |out| = 2p+2")
    regs = {"out": out, "a": a, "a_sign": (a_sign,), "b": b, "b_sign": (b_sign,)}
    return Block("MUL", regs, {"p": len(a)}, lambda: _mul_ops(out, a, a_sign, b, b_sign))


def build_multiplier(p: int) -> Circuit:
    """Signed multiplier: ``out`` (2p+2 qubits) += a*b with sign parity in bit 0.

    Magnitude bits of the product sit at ``out[1..2p]`` (unit 2**-2p); the top
    p of them, ``out[p+1..2p]``, are the truncated p-bit product.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    layout = multiplier_layout(p)
    ops = _mul_ops(layout["out"], layout["a"], layout["a_sign"][0], layout["b"], layout["b_sign"][0])
    return Circuit(4 * p + 4, ops, layout)


# ---------------------------------------------------------------- diagonal evolution


@dataclass(frozen=True, eq=False)
class DiagSpec:
    """exp(-i t scale * kron_k diag(a_k, b_k * s_k)) with a_k, b_k the eigen-signs.

    ``sigmas[k]`` is None for a structural factor whose two diagonal
    magnitudes are both 1.
    """

    sigmas: tuple[FixedPoint | None, ...]
    signs: tuple[tuple[int, int], ...]
    scale: float
    t: float

    def __post_init__(self):
        if len(self.sigmas) != len(self.signs):
            raise ValueError("sigmas and signs must have one entry per data qubit")
        ps = {s.p for s in self.sigmas if s is not None}
        if len(ps) > 1:
            raise ValueError("all encoded sigmas must share one bit width")
        for s in self.sigmas:
            if s is not None and (s.int_bits or s.sign != 1):
                raise ValueError("sigma must be a nonnegative pure fraction below 1")
        for pair in self.signs:
            if tuple(pair) not in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                raise ValueError(f"bad eigen-sign pair {pair}")
        if self.scale < 0:
            raise ValueError("scale must be >= 0; fold negative coefficients into the signs")
        if self.t < 0:
            raise ValueError("evolution time must be >= 0")

    @property
    def p(self) -> int | None:
        return next((s.p for s in self.sigmas if s is not None), None)

    @property
    def active(self) -> tuple[int, ...]:
        return tuple(k for k, s in enumerate(self.sigmas) if s is not None)

    @property
    def n_ancilla(self) -> int:
        k, p = len(self.active), self.p
        if k == 0:
            return 1
        if k == 1:
            return p + 1
        return 1 + 2 * p + (k - 1) * (2 * p + 2)

    @property
    def multiplier_calls(self) -> int:
        """Forward plus uncompute multiplier invocations."""
        return 2 * max(len(self.active) - 1, 0)


def diag_phases(spec: DiagSpec) -> np.ndarray:
    """Phase imprinted on each data basis state, shape (2,)*D in qubit order.

    Factors are accumulated bit by bit in the same order the circuit's phase
    layer applies them.
    """
    d = len(spec.sigmas)
    out = np.empty((2,) * d, dtype=complex)
    active = spec.active
    p = spec.p
    for idx in np.ndindex(*out.shape):
        parity = 1
        for k, bit in enumerate(idx):
            parity *= spec.signs[k][bit]
        chosen = [spec.sigmas[k] for k in active if idx[k]]
        if not chosen:
            out[idx] = np.exp(-1j * parity * spec.t * spec.scale)
            continue
        val = fold_product(chosen)
        ph = 1.0 + 0j
        for pos in range(p):
            if (val.mag >> pos) & 1:
                ph *= np.exp(-1j * parity * spec.t * spec.scale * 2.0 ** (pos - p))
        out[idx] = ph
    return out


def _load_bits(value: FixedPoint, reg: Sequence[int], controls=(), polarity=()) -> list[Gate]:
    return [gate(q, X_MAT, "X", controls, polarity) for i, q in enumerate(reg) if (value.mag >> i) & 1]


def _diag_ops(spec: DiagSpec, data: Sequence[int], anc: Sequence[int]) -> list:
    active = spec.active
    kk, p = len(active), spec.p
    sgn = anc[0]
    pos = 1
    c1 = tuple(anc[pos:pos + p]) if kk >= 1 else ()
    pos += len(c1)
    sreg = tuple(anc[pos:pos + p]) if kk >= 2 else ()
    pos += len(sreg)
    outs = []
    for _ in range(max(kk - 1, 0)):
        outs.append(tuple(anc[pos:pos + 2 * p + 2]))
        pos += 2 * p + 2

    compute: list = []
    if kk >= 1:
        k1 = active[0]
        compute += _load_bits(spec.sigmas[k1], c1, (data[k1],), (1,))
    cur = c1
    for t in range(1, kk):
        kt = active[t]
        out = outs[t - 1]
        top = out[p + 1:2 * p + 1]
        compute += _load_bits(spec.sigmas[kt], sreg)
        compute.append(mul_block(out, cur, sgn, sreg, sgn).with_controls((data[kt],), (1,)))
        compute += _load_bits(spec.sigmas[kt], sreg)
        earlier = tuple(data[k] for k in active[:t])
        compute += _load_bits(spec.sigmas[kt], top, (data[kt],) + earlier, (1,) + (0,) * len(earlier))
        for i in range(p):
            compute.append(gate(top[i], X_MAT, "CX", (data[kt], cur[i]), (0, 1)))
        cur = top
    for k, (a, b) in enumerate(spec.signs):
        if a == b == -1:
            compute.append(gate(sgn, X_MAT, "X"))
        elif a == 1 and b == -1:
            compute.append(gate(sgn, X_MAT, "CX", (data[k],), (1,)))
        elif a == -1 and b == 1:
            compute.append(gate(sgn, X_MAT, "CX", (data[k],), (0,)))

    def rot(theta):
        return np.diag([np.exp(-1j * theta), np.exp(1j * theta)])

    phases: list = []
    base = spec.t * spec.scale
    phases.append(gate(sgn, rot(base), "RZ1", tuple(data[k] for k in active), (0,) * kk))
    for i in range(kk and p):
        phases.append(gate(sgn, rot(base * 2.0 ** (i - p)), f"RZ{i - p}", (cur[i],)))
    uncompute = [op.inverse() for op in reversed(compute)]
    return compute + phases + uncompute


def diag_block(spec: DiagSpec, data: Sequence[int], anc: Sequence[int]) -> Block:
    data, anc = tuple(data), tuple(anc)
    if len(anc) < spec.n_ancilla:
        raise ValueError(f"diag evolution needs {spec.n_ancilla} ancillas, got {len(anc)}")
    anc = anc[:spec.n_ancilla]
    return Block("DIAG", {"data": data, "anc": anc}, {"spec": spec}, lambda: _diag_ops(spec, data, anc))


def build_diag_evolution(sigmas: Sequence[FixedPoint | None], scale: float,
                         signs: Sequence[tuple[int, int]], t: float) -> Circuit:
    """Standalone diagonal evolution on len(sigmas) data qubits plus ancillas."""
    for s in sigmas:
        if s is not None and not isinstance(s, FixedPoint):
            raise ValueError("sigma entries must be FixedPoint encodings or None (structural 1)")
    spec = DiagSpec(tuple(sigmas), tuple(tuple(x) for x in signs), float(scale), float(t))
    d = len(sigmas)
    anc = tuple(range(d, d + spec.n_ancilla))
    c = Circuit(d + len(anc), [], {"data": tuple(range(d)), "anc": anc}, n_data=d)
    c.append(diag_block(spec, range(d), anc))
    return c


# ---------------------------------------------------------------- Hamiltonian terms


def _ratio_or_structural(r: float) -> float | None:
    return None if abs(r - 1.0) <= STRUCTURAL_TOL else r


def _encode_ratio(r: float, p: int) -> FixedPoint:
    """Floor encoding, except that a ratio within GRID_SNAP of a p-bit grid
    point is taken as that point (eigen/SVD ratios carry ~1e-16 noise)."""
    scaled = r * 2**p
    near = round(scaled)
    if abs(scaled - near) <= GRID_SNAP * 2**p and near < 2**p:
        return FixedPoint(1, int(near), p)
    return encode(r, p)


@dataclass(frozen=True, eq=False)
class TermDiag:
    """Sandwich data for one term: left/right single-qubit layers and the diagonal."""

    ratios: tuple[float | None, ...]
    signs: tuple[tuple[int, int], ...]
    scale: float

    @property
    def n_active(self) -> int:
        return sum(r is not None for r in self.ratios)

    def spec(self, t: float, p: int) -> DiagSpec:
        return DiagSpec(tuple(None if r is None else _encode_ratio(r, p) for r in self.ratios),
                        self.signs, self.scale, t)


def type1_diag(term) -> tuple[TermDiag, list[np.ndarray]]:
    """Eigen-sandwich of a Type-1 term: factor k = |l1| U diag(sgn l1, sgn l2 * ratio) U^H."""
    ratios, signs, units = [], [], []
    scale = abs(term.coefficient)
    for f in term.factors:
        u, lam = eig_hermitian_2x2(f)
        if abs(lam[1]) > abs(lam[0]):
            u, lam = u[:, ::-1], lam[::-1]
        mag = abs(lam[0])
        scale *= mag
        units.append(u)
        if mag == 0.0:
            ratios.append(None)
            signs.append((1, 1))
            continue
        ratios.append(_ratio_or_structural(abs(lam[1]) / mag))
        signs.append((1 if lam[0] >= 0 else -1, 1 if lam[1] >= 0 else -1))
    if scale == 0.0:
        ratios = [None] * len(ratios)
    if term.coefficient < 0:
        signs[0] = (-signs[0][0], -signs[0][1])
    return TermDiag(tuple(ratios), tuple(signs), scale), units


def type2_diag(term):
    """SVD sandwich of a Type-2 term; returns (TermDiag, corner, [(U_k, V_k)])."""
    scale = abs(term.coefficient)
    ratios: list[float | None] = [None, None]
    signs = [(1, -1) if term.coefficient >= 0 else (-1, 1), (1, 1)]
    pairs = []
    for f in term.factors:
        sv = svd_2x2(f)
        scale *= sv.sigma_major
        pairs.append((sv.u, sv.v))
        ratios.append(_ratio_or_structural(sv.sigma_ratio))
        signs.append((1, 1))
    if scale == 0.0:
        ratios = [None] * len(ratios)
    return TermDiag(tuple(ratios), tuple(signs), scale), pairs


def term_diag(term) -> TermDiag:
    if getattr(term, "kind", "") == "type1":
        return type1_diag(term)[0]
    return type2_diag(term)[0]


def _layer(qubits, mats, dagger: bool, controls=(), polarity=()) -> list[Gate]:
    ops = []
    for q, m in zip(qubits, mats):
        mm = m.conj().T if dagger else m
        if not _is_identity(mm):
            ops.append(gate(q, mm, "U^H" if dagger else "U", controls, polarity))
    return ops


def _evolution_circuit(n_data: int, pre: list, spec: DiagSpec, post: list) -> Circuit:
    anc = tuple(range(n_data, n_data + spec.n_ancilla))
    c = Circuit(n_data + len(anc), [], {"data": tuple(range(n_data)), "anc": anc}, n_data=n_data)
    c.extend(pre)
    c.append(diag_block(spec, range(n_data), anc))
    c.extend(post)
    return c


def build_type1_evolution(term, t: float, p: int) -> Circuit:
    """exp(-i t term) for a Type-1 term: U^H layer, diagonal, U layer."""
    if t < 0:
        raise ValueError("evolution time must be >= 0")
    diag, units = type1_diag(term)
    q = range(len(units))
    return _evolution_circuit(len(units), _layer(q, units, True), diag.spec(t, p), _layer(q, units, False))


def build_type2_evolution(term, t: float, p: int) -> Circuit:
    """exp(-i t term) for a Type-2 term.

    With corner P0 and D = kron U_k S_k V_k^H, the block matrix equals
    W (Z x S) W^H where W = diag(P0 x U, I x V) (H x I).
    """
    if t < 0:
        raise ValueError("evolution time must be >= 0")
    diag, pairs = type2_diag(term)
    n = len(pairs)
    sys = range(2, 2 + n)
    us = [u for u, _ in pairs]
    vs = [v for _, v in pairs]
    pre = (_layer([1], [term.corner], True, (0,), (0,)) + _layer(sys, us, True, (0,), (0,))
           + _layer(sys, vs, True, (0,), (1,)) + [gate(0, H_MAT, "H")])
    post = ([gate(0, H_MAT, "H")] + _layer(sys, vs, False, (0,), (1,))
            + _layer(sys, us, False, (0,), (0,)) + _layer([1], [term.corner], False, (0,), (0,)))
    return _evolution_circuit(n + 2, pre, diag.spec(t, p), post)


def build_term_evolution(term, t: float, p: int) -> Circuit:
    if getattr(term, "kind", "") == "type1":
        return build_type1_evolution(term, t, p)
    return build_type2_evolution(term, t, p)


# ---------------------------------------------------------------- accounting


@dataclass
class GateStats:
    single: int = 0
    controlled: int = 0
    phase: int = 0
    cphase: int = 0
    blocks: Counter = field(default_factory=Counter)
    multiplier_calls: int = 0
    adder_calls: int = 0
    controlled_adders: int = 0
    depth: int = 0

    @property
    def controlled_total(self) -> int:
        """Controlled single-qubit gates of any kind (phases included)."""
        return self.controlled + self.cphase

    def __add__(self, other: "GateStats") -> "GateStats":
        return GateStats(
            self.single + other.single, self.controlled + other.controlled,
            self.phase + other.phase, self.cphase + other.cphase,
            self.blocks + other.blocks, self.multiplier_calls + other.multiplier_calls,
            self.adder_calls + other.adder_calls, self.controlled_adders + other.controlled_adders,
            self.depth + other.depth,
        )

    def scaled(self, k: int) -> "GateStats":
        return GateStats(
            self.single * k, self.controlled * k, self.phase * k, self.cphase * k,
            Counter({name: v * k for name, v in self.blocks.items()}),
            self.multiplier_calls * k, self.adder_calls * k, self.controlled_adders * k, self.depth * k,
        )

    def to_dict(self) -> dict:
        return {
            "single": self.single, "controlled": self.controlled, "phase": self.phase,
            "cphase": self.cphase, "controlled_total": self.controlled_total,
            "blocks": dict(sorted(self.blocks.items())), "multiplier_calls": self.multiplier_calls,
            "adder_calls": self.adder_calls, "controlled_adders": self.controlled_adders,
            "depth": self.depth,
        }


def _block_cost(b: Block) -> int:
    if b.name == "MUL":
        return b.params["p"] ** 3
    if b.name in ("ADDER", "CADD"):
        return b.params["p"] ** 2
    if b.name in ("QFT", "IQFT"):
        return b.params["k"]
    raise KeyError(b.name)


def gate_stats(c: Circuit | Sequence[Op]) -> GateStats:
    """Exact census plus an ASAP depth estimate.

    Depth charges: MUL_p costs p**3 units, ADDER_p and controlled adders p**2,
    QFT_k k units, every other gate 1. DIAG blocks are expanded; arithmetic
    composites are not.
    """
    ops = c.ops if isinstance(c, Circuit) else list(c)
    st = GateStats()
    level: dict[int, int] = {}

    def visit(op, extra: tuple[int, ...]):
        if isinstance(op, Gate):
            if op.controls or extra:
                if op.kind in ("phase", "cphase"):
                    st.cphase += 1
                else:
                    st.controlled += 1
            elif op.kind == "phase":
                st.phase += 1
            else:
                st.single += 1
            cost = 1
        else:
            if op.name == "DIAG":
                for sub in op.body:
                    visit(sub, extra + op.controls)
                return
            st.blocks[op.name] += 1
            if op.name == "MUL":
                st.multiplier_calls += 1
            elif op.name == "ADDER":
                st.adder_calls += 1
            elif op.name == "CADD":
                st.controlled_adders += 1
            cost = _block_cost(op)
        touched = set(op.qubits) | set(extra)
        start = max((level.get(q, 0) for q in touched), default=0)
        for q in touched:
            level[q] = start + cost

    for op in ops:
        visit(op, ())
    st.depth = max(level.values(), default=0)
    return st


# ---------------------------------------------------------------- text dump


def _fmt_c(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}j"


def _dump_op(op, indent: str, lines: list[str]) -> None:
    ctrl = ",".join(f"{q}{'' if p else '~'}" for q, p in zip(op.controls, op.polarity)) or "-"
    if isinstance(op, Gate):
        m = " ".join(_fmt_c(z) for z in op.matrix.ravel())
        lines.append(f"{indent}{op.kind} {ctrl} {op.target} {op.label or '-'} {m}")
        return
    regs = " ".join(f"{k}={','.join(map(str, v))}" for k, v in op.regs.items())
    inv = " inverse" if op.params.get("inverse") else ""
    lines.append(f"{indent}block {ctrl} {op.name}{inv} {regs} {{")
    for sub in op.body:
        _dump_op(sub, indent + "  ", lines)
    lines.append(f"{indent}}}")


def dump_circuit(c: Circuit) -> str:
    """Plain-text listing, one gate per line: kind controls target label matrix.

    Controls are written ``q`` (fires on 1) or ``q~`` (fires on 0); composite
    blocks open a brace-delimited section holding their expansion.
    """
    lines = [f"# tfqlsa-circuit v{DUMP_VERSION} qubits={c.n_qubits} data={c.n_data}"]
    for name, reg in c.registers.items():
        lines.append(f"# reg {name} {','.join(map(str, reg))}")
    for op in c.ops:
        _dump_op(op, "", lines)
    return "\n".join(lines) + "\n"
