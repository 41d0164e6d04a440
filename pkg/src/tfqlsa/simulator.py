"""Dense state-vector engine with two execution fidelities.

``full`` expands every composite down to single- and multi-controlled
single-qubit gates and simulates the arithmetic ancillas. Above
``SPARSE_ABOVE`` qubits, full mode on a data-register state switches to a
sparse engine that stores only nonzero amplitudes. That is enough for
diagonal-evolution circuits, where at most one arithmetic register is in
superposition at a time. ``emulation``
keeps only the data register. There, DIAG blocks become the diagonal phase
they imprint, and adder/multiplier blocks become the basis permutation they
implement.

Amplitudes may carry a trailing batch axis, so one pass can push many
columns (for example an identity matrix) through a circuit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Block, Circuit, Gate, diag_phases

FULL_CAP = 24
DENSE_CAP = 12
HYGIENE_TOL = 1e-9
SPARSE_TOL = 1e-14
SPARSE_ABOVE = 16
SPARSE_MAX_BITS = 62
_CHUNK_AMPS = 1 << 24


class SimulationError(RuntimeError):
    pass


@dataclass(eq=False)
class StateVector:
    amps: np.ndarray
    n_qubits: int
    registers: dict | None = None

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.amps.shape[0] != 2**self.n_qubits:
            raise ValueError("amplitude length must be 2**n_qubits")

    @classmethod
    def from_amplitudes(cls, amps, registers=None) -> "StateVector":
        amps = np.asarray(amps, dtype=complex)
        q = int(round(math.log2(amps.shape[0])))
        if 2**q != amps.shape[0]:
            raise ValueError("length is not a power of two")
        return cls(amps, q, registers)

    @classmethod
    def basis(cls, n_qubits: int, index: int = 0) -> "StateVector":
        a = np.zeros(2**n_qubits, dtype=complex)
        a[index] = 1.0
        return cls(a, n_qubits)

    @property
    def batched(self) -> bool:
        return self.amps.ndim == 2

    def norm(self):
        return np.linalg.norm(self.amps, axis=0)

    def copy(self) -> "StateVector":
        return StateVector(self.amps.copy(), self.n_qubits, self.registers)

    def tensor(self) -> np.ndarray:
        return self.amps.reshape((2,) * self.n_qubits + self.amps.shape[1:])


# ---------------------------------------------------------------- kernels


def _view(t: np.ndarray, controls: Sequence[int], polarity: Sequence[int]):
    idx: list = [slice(None)] * t.ndim
    for c, pol in zip(controls, polarity):
        if not isinstance(idx[c], slice):
            if idx[c] != pol:
                return None, None
            continue
        idx[c] = pol
    fixed = sorted({c for c in controls})
    view = t[tuple(idx)]

    def axis(q: int) -> int:
        return q - sum(1 for c in fixed if c < q)

    return view, axis


def _apply_gate(t: np.ndarray, target: int, m: np.ndarray, controls, polarity) -> None:
    view, axis = _view(t, controls, polarity)
    if view is None:
        return
    ax = axis(target)
    s0 = (slice(None),) * ax + (0,)
    s1 = (slice(None),) * ax + (1,)
    if m[0, 1] == 0 and m[1, 0] == 0:
        if m[0, 0] != 1:
            view[s0] *= m[0, 0]
        if m[1, 1] != 1:
            view[s1] *= m[1, 1]
        return
    a0 = view[s0].copy()
    a1 = view[s1]
    if m[0, 0] == 0 and m[1, 1] == 0:
        view[s0] = m[0, 1] * a1
        view[s1] = m[1, 0] * a0
        return
    view[s0] = m[0, 0] * a0 + m[0, 1] * a1
    view[s1] = m[1, 0] * a0 + m[1, 1] * a1


def _apply_reg_matrix(t: np.ndarray, reg_le: Sequence[int], mat: np.ndarray, controls, polarity) -> None:
    view, axis = _view(t, controls, polarity)
    if view is None:
        return
    big = [axis(q) for q in reversed(reg_le)]
    w = len(big)
    moved = np.moveaxis(view, big, list(range(w)))
    shape = moved.shape
    new = (mat @ moved.reshape(2**w, -1)).reshape(shape)
    view[...] = np.moveaxis(new, list(range(w)), big)


def dft_matrix(k: int, inverse: bool = False) -> np.ndarray:
    n = 2**k
    y, x = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    sgn = -1 if inverse else 1
    return np.exp(sgn * 2j * math.pi * ((x * y) % n) / n) / math.sqrt(n)


def _apply_phases(t: np.ndarray, qubits: Sequence[int], phases: np.ndarray, controls, polarity) -> None:
    view, axis = _view(t, controls, polarity)
    if view is None:
        return
    axes = [axis(q) for q in qubits]
    order = np.argsort(axes)
    ph = np.transpose(phases, order)
    shape = [1] * view.ndim
    for a in axes:
        shape[a] = 2
    view *= ph.reshape(shape)


def _reg_value(idx: np.ndarray, reg: Sequence[int], q: int) -> np.ndarray:
    v = np.zeros_like(idx)
    for i, g in enumerate(reg):
        v |= ((idx >> (q - 1 - g)) & 1) << i
    return v


def _set_reg(idx: np.ndarray, reg: Sequence[int], value: np.ndarray, q: int) -> np.ndarray:
    out = idx.copy()
    for i, g in enumerate(reg):
        bit = q - 1 - g
        out &= ~(1 << bit)
        out |= ((value >> i) & 1) << bit
    return out


def arithmetic_map(block: Block, idx: np.ndarray, q: int) -> np.ndarray:
    """Basis-index image of an ADDER or MUL block.

    ADDER adds the addend magnitude into acc bits 1.. and keeps acc's sign;
    MUL adds a*b into out bits 1.. and XORs both sign bits into out bit 0.
    """
    inv = -1 if block.params.get("inverse") else 1
    r = block.regs
    if block.name == "ADDER":
        acc = r["acc"]
        w = len(acc)
        val = _reg_value(idx, acc, q)
        add = _reg_value(idx, r["addend"], q)
        new = (val + inv * 2 * add) % (1 << w)
        return _set_reg(idx, acc, new, q)
    if block.name == "MUL":
        out = r["out"]
        w = len(out)
        val = _reg_value(idx, out, q)
        a = _reg_value(idx, r["a"], q)
        b = _reg_value(idx, r["b"], q)
        sign = _reg_value(idx, r["a_sign"], q) ^ _reg_value(idx, r["b_sign"], q)
        new = ((val + inv * 2 * a * b) % (1 << w)) ^ sign
        return _set_reg(idx, out, new, q)
    raise SimulationError(f"no arithmetic model for block {block.name}")


def _apply_permutation(work: np.ndarray, q: int, block: Block, controls, polarity) -> None:
    flat = work.reshape(2**q, -1)
    idx = np.arange(2**q, dtype=np.int64)
    new = arithmetic_map(block, idx, q)
    if controls:
        ok = np.ones(idx.shape, dtype=bool)
        for c, pol in zip(controls, polarity):
            ok &= ((idx >> (q - 1 - c)) & 1) == pol
        new = np.where(ok, new, idx)
    out = np.empty_like(flat)
    out[new] = flat
    flat[...] = out


def _run(work: np.ndarray, q: int, ops, mode: str, ctx_c: tuple, ctx_p: tuple) -> None:
    t = work.reshape((2,) * q + work.shape[1:])
    for op in ops:
        if isinstance(op, Gate):
            _apply_gate(t, op.target, op.matrix, ctx_c + op.controls, ctx_p + op.polarity)
            continue
        cc, pp = ctx_c + op.controls, ctx_p + op.polarity
        if mode == "emulation":
            if op.name == "DIAG":
                ph = diag_phases(op.params["spec"])
                if op.params.get("inverse"):
                    ph = ph.conj()
                _apply_phases(t, op.regs["data"], ph, cc, pp)
                continue
            if op.name in ("ADDER", "MUL"):
                _apply_permutation(work, q, op, cc, pp)
                continue
            if op.name in ("QFT", "IQFT"):
                reg = op.regs["reg"]
                _apply_reg_matrix(t, reg, dft_matrix(len(reg), op.name == "IQFT"), cc, pp)
                continue
        _run(work, q, op.body, mode, cc, pp)


def _sparse_merge(keys: np.ndarray, amps: np.ndarray, tol: float):
    uniq, inv = np.unique(keys, return_inverse=True)
    summed = np.zeros(len(uniq), dtype=complex)
    np.add.at(summed, inv, amps)
    keep = np.abs(summed) > tol
    return uniq[keep], summed[keep]


def _sparse_run(keys: np.ndarray, amps: np.ndarray, q: int, ops, ctx_c: tuple, ctx_p: tuple, tol: float):
    for op in ops:
        cc, pp = ctx_c + op.controls, ctx_p + op.polarity
        if isinstance(op, Block):
            keys, amps = _sparse_run(keys, amps, q, op.body, cc, pp, tol)
            continue
        ok = np.ones(keys.shape, dtype=bool)
        for c, pol in zip(cc, pp):
            ok &= ((keys >> (q - 1 - c)) & 1) == pol
        bit = np.int64(1) << (q - 1 - op.target)
        has = (keys & bit) != 0
        m = op.matrix
        if m[0, 1] == 0 and m[1, 0] == 0:
            amps = amps * np.where(ok, np.where(has, m[1, 1], m[0, 0]), 1.0)
            continue
        col = has[ok].astype(np.intp)
        base = keys[ok] & ~bit
        a = amps[ok]
        keys = np.concatenate([keys[~ok], base, base | bit])
        amps = np.concatenate([amps[~ok], m[0, col] * a, m[1, col] * a])
        keys, amps = _sparse_merge(keys, amps, tol)
    return keys, amps


def _apply_sparse(c: Circuit, amps: np.ndarray, tol: float = SPARSE_TOL) -> np.ndarray:
    """Full-mode run on data-register columns ``amps`` (dim x batch), ancillas from |0>."""
    q, na = c.n_qubits, c.n_ancilla
    batch = amps.shape[1]
    if q + max(1, batch - 1).bit_length() > SPARSE_MAX_BITS:
        raise SimulationError(f"{q} qubits with batch {batch} exceed the sparse engine's index width")
    rows, cols = np.nonzero(amps)
    keys = (cols.astype(np.int64) << q) | (rows.astype(np.int64) << na)
    keys, vals = _sparse_run(keys, amps[rows, cols], q, c.ops, (), (), tol)
    anc_mask = (np.int64(1) << na) - 1
    dirty = (keys & anc_mask) != 0
    leak = float(np.linalg.norm(vals[dirty]))
    if leak > HYGIENE_TOL:
        raise SimulationError(f"ancillas not restored to |0> (leak {leak:.3e})")
    out = np.zeros_like(amps)
    keys, vals = keys[~dirty], vals[~dirty]
    out[(keys >> na) & ((np.int64(1) << c.n_data) - 1), keys >> q] = vals
    return out


def _check_qubits(ops, limit: int) -> None:
    for op in ops:
        used = op.qubits
        if isinstance(op, Block) and op.name == "DIAG":
            used = op.controls + op.regs["data"]
        if any(qb >= limit for qb in used):
            raise SimulationError("operation touches ancilla qubits outside an emulated block")


def apply(c: Circuit, psi: StateVector, mode: str = "emulation", cap: int = FULL_CAP) -> StateVector:
    """Return the state after running ``c`` on ``psi``.

    ``psi`` may cover all circuit qubits, or only the data qubits. In the
    latter case full mode pads the ancillas with |0> and checks that they
    come back clean; circuits wider than ``SPARSE_ABOVE`` qubits then run
    on the sparse engine. A state over all qubits must fit under ``cap`` in full mode.
    """
    if mode not in ("full", "emulation"):
        raise ValueError(f"unknown mode {mode!r}")
    amps = psi.amps if psi.batched else psi.amps[:, None]
    if psi.n_qubits == c.n_qubits:
        if mode == "full" and c.n_qubits > cap:
            raise SimulationError(f"{c.n_qubits} qubits exceed the full-mode cap of {cap}")
        work = np.array(amps, dtype=complex, order="C")
        _run(work, c.n_qubits, c.ops, mode, (), ())
        out = work
    elif psi.n_qubits == c.n_data:
        if mode == "emulation":
            _check_qubits(c.ops, c.n_data)
            work = np.array(amps, dtype=complex, order="C")
            _run(work, c.n_data, c.ops, mode, (), ())
            out = work
        elif c.n_qubits > min(cap, SPARSE_ABOVE):
            out = _apply_sparse(c, np.asarray(amps, dtype=complex))
        else:
            na = c.n_ancilla
            work = np.zeros((2**c.n_data, 2**na, amps.shape[1]), dtype=complex)
            work[:, 0, :] = amps
            work = work.reshape(2**c.n_qubits, amps.shape[1])
            _run(work, c.n_qubits, c.ops, mode, (), ())
            work = work.reshape(2**c.n_data, 2**na, amps.shape[1])
            leak = float(np.linalg.norm(work[:, 1:, :]))
            if leak > HYGIENE_TOL:
                raise SimulationError(f"ancillas not restored to |0> (leak {leak:.3e})")
            out = np.ascontiguousarray(work[:, 0, :])
    else:
        raise SimulationError(
            f"state has {psi.n_qubits} qubits; circuit has {c.n_qubits} ({c.n_data} data)")
    if not psi.batched:
        out = out[:, 0]
    return StateVector(out, out.shape[0].bit_length() - 1, psi.registers)


def apply_full_raw(c: Circuit, psi: StateVector, cap: int = FULL_CAP) -> StateVector:
    """Full-mode run over every qubit, ancillas included (no hygiene check)."""
    if psi.n_qubits != c.n_qubits:
        raise SimulationError("raw full-mode run needs a state over all circuit qubits")
    return apply(c, psi, "full", cap)


def dense_unitary(c: Circuit, mode: str = "emulation", cap: int = DENSE_CAP) -> np.ndarray:
    """Matrix of ``c`` on its data register; column j is the image of |j>."""
    n = c.n_data
    if n > cap:
        raise SimulationError(f"{n} data qubits exceed the dense cap of {cap}")
    dim = 2**n
    width = c.n_qubits if mode == "full" and c.n_qubits <= SPARSE_ABOVE else n
    chunk = max(1, min(dim, _CHUNK_AMPS // 2**width))
    cols = []
    for start in range(0, dim, chunk):
        stop = min(dim, start + chunk)
        block = np.zeros((dim, stop - start), dtype=complex)
        block[np.arange(start, stop), np.arange(stop - start)] = 1.0
        cols.append(apply(c, StateVector(block, n), mode).amps)
    return np.concatenate(cols, axis=1)


# ---------------------------------------------------------------- measures


def _vec(a) -> np.ndarray:
    return a.amps if isinstance(a, StateVector) else np.asarray(a, dtype=complex)


def fidelity(a, b) -> float:
    """Phase-invariant overlap |<a|b>| of two unit vectors."""
    x, y = _vec(a), _vec(b)
    if x.shape != y.shape:
        raise ValueError("dimension mismatch")
    return float(min(1.0, abs(np.vdot(x, y))))


def l2_distance(a, b) -> float:
    """min over global phase of || a - e^{i phi} b ||."""
    return math.sqrt(max(0.0, 2.0 - 2.0 * fidelity(a, b)))


def trace_distance(a, b) -> float:
    """0.5 || |a><a| - |b><b| ||_1 for pure states."""
    return math.sqrt(max(0.0, 1.0 - fidelity(a, b) ** 2))


def _resolve(psi: StateVector, register) -> list[int]:
    if isinstance(register, str):
        if not psi.registers or register not in psi.registers:
            raise KeyError(f"unknown register {register!r}")
        return list(psi.registers[register])
    if isinstance(register, int):
        return [register]
    return list(register)


def _finish(psi: StateVector, kept: np.ndarray, removed: list[int]):
    flat = kept.reshape(-1)
    prob = float(np.vdot(flat, flat).real)
    if prob <= 1e-300:
        raise SimulationError("projection onto a zero-probability outcome")
    regs = None
    if psi.registers:
        regs = {}
        for name, qs in psi.registers.items():
            if any(q in removed for q in qs):
                continue
            regs[name] = tuple(q - sum(1 for r in removed if r < q) for q in qs)
    return StateVector(flat / math.sqrt(prob), psi.n_qubits - len(removed), regs), prob


def project(psi: StateVector, register, outcome) -> tuple[StateVector, float]:
    """Post-select ``register`` (name, qubit or qubit list, big-endian) on a basis outcome.

    Returns the renormalized state of the remaining qubits and the Born probability.
    """
    if psi.batched:
        raise ValueError("project works on a single state")
    qs = _resolve(psi, register)
    if isinstance(outcome, int):
        if not 0 <= outcome < 2 ** len(qs):
            raise ValueError("outcome outside register width")
        bits = [(outcome >> (len(qs) - 1 - i)) & 1 for i in range(len(qs))]
    else:
        bits = list(outcome)
    idx: list = [slice(None)] * psi.n_qubits
    for q, b in zip(qs, bits):
        idx[q] = b
    return _finish(psi, psi.tensor()[tuple(idx)], sorted(qs))


def project_onto(psi: StateVector, qubit: int, vec) -> tuple[StateVector, float]:
    """Post-select one qubit on an arbitrary single-qubit state ``vec``."""
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    t = psi.tensor()
    kept = np.tensordot(v.conj(), t, axes=([0], [qubit]))
    return _finish(psi, kept, [qubit])


def dump_state(psi: StateVector, tol: float = 0.0) -> str:
    """Debug listing: ``index re im`` per line (not a stable format)."""
    lines = []
    for i, z in enumerate(psi.amps if not psi.batched else psi.amps[:, 0]):
        if abs(z) > tol:
            lines.append(f"{i} {z.real:.17g} {z.imag:.17g}")
    return "\n".join(lines) + "\n"
