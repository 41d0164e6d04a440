"""LSP-TF instances: A = sum_i kron_k A_ik, b = sum_j kron_k b_jk.

Instance files are JSON objects with keys ``n``, ``a_terms``, ``b_terms`` and
optional ``kappa``. A complex number is written ``[re, im]``; an A factor is a
2x2 nested list of them and a b factor a list of two.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .linalg import hermitian_deviation, kron_all

log = logging.getLogger(__name__)

DENSE_CAP = 10
HERMITIAN_STRICT = 1e-12
HERMITIAN_LOOSE = 1e-8
SINGULAR_RTOL = 1e-12

_KEYS = {"n", "a_terms", "b_terms", "kappa"}


class InstanceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LspTfInstance:
    a_terms: tuple[tuple[np.ndarray, ...], ...]
    b_terms: tuple[tuple[np.ndarray, ...], ...]
    kappa: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return len(self.a_terms[0])

    @property
    def m(self) -> int:
        return len(self.a_terms)

    @property
    def d(self) -> int:
        return len(self.b_terms)

    @property
    def dim(self) -> int:
        return 2**self.n


def _check_structure(a_terms, b_terms) -> None:
    if not a_terms or not b_terms:
        raise InstanceError("need at least one A term and one b term")
    n = len(a_terms[0])
    if n < 1:
        raise InstanceError("tensor length n must be >= 1")
    for terms in (a_terms, b_terms):
        if any(len(t) != n for t in terms):
            raise InstanceError("inconsistent tensor length across terms")


def make_instance(a_terms, b_terms, kappa: float | None = None) -> LspTfInstance:
    """Validate factors and build an instance (Hermiticity, shapes, nonzero b)."""
    _check_structure(a_terms, b_terms)
    clean_a = []
    for i, term in enumerate(a_terms):
        row = []
        for k, f in enumerate(term):
            f = np.array(f, dtype=complex)
            if f.shape != (2, 2):
                raise InstanceError(f"A factor at ({i},{k}) is not 2x2")
            dev = hermitian_deviation(f)
            if dev > HERMITIAN_LOOSE:
                raise InstanceError(f"non-Hermitian factor at ({i},{k})")
            if dev > HERMITIAN_STRICT:
                log.warning("factor (%d,%d) off Hermitian by %.2e; symmetrizing", i, k, dev)
                f = 0.5 * (f + f.conj().T)
            row.append(f)
        clean_a.append(tuple(row))
    clean_b = []
    for j, term in enumerate(b_terms):
        row = []
        for k, f in enumerate(term):
            f = np.array(f, dtype=complex)
            if f.shape != (2,):
                raise InstanceError(f"b factor at ({j},{k}) is not a 2-vector")
            if not np.any(f):
                raise InstanceError(f"all-zero b term at ({j},{k})")
            row.append(f)
        clean_b.append(tuple(row))
    if kappa is not None and not kappa >= 1:
        raise InstanceError("kappa must be >= 1")
    inst = LspTfInstance(tuple(clean_a), tuple(clean_b), kappa)
    if b_norm(inst) == 0.0:
        raise InstanceError("assembled b is the zero vector")
    return inst


def _complex(x, where: str) -> complex:
    if not (isinstance(x, (list, tuple)) and len(x) == 2):
        raise InstanceError(f"{where}: complex entries must be [re, im] pairs")
    try:
        return complex(float(x[0]), float(x[1]))
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"{where}: non-numeric entry") from exc


def instance_from_dict(obj: dict[str, Any]) -> LspTfInstance:
    if not isinstance(obj, dict):
        raise InstanceError("instance must be a JSON object")
    unknown = set(obj) - _KEYS
    if unknown:
        raise InstanceError(f"unknown keys: {sorted(unknown)}")
    for key in ("n", "a_terms", "b_terms"):
        if key not in obj:
            raise InstanceError(f"missing key '{key}'")
    n = obj["n"]
    if not isinstance(n, int) or n < 1:
        raise InstanceError("'n' must be a positive integer")
    a_raw, b_raw = obj["a_terms"], obj["b_terms"]
    if not isinstance(a_raw, list) or not isinstance(b_raw, list):
        raise InstanceError("'a_terms' and 'b_terms' must be lists")
    for terms in (a_raw, b_raw):
        if any(not isinstance(t, list) or len(t) != n for t in terms):
            raise InstanceError("inconsistent tensor length: every term needs n factors")
    a_terms = []
    for i, term in enumerate(a_raw):
        row = []
        for k, f in enumerate(term):
            if not (isinstance(f, list) and len(f) == 2 and all(isinstance(r, list) and len(r) == 2 for r in f)):
                raise InstanceError(f"A factor at ({i},{k}) must be 2x2")
            row.append([[_complex(x, f"A[{i}][{k}]") for x in r] for r in f])
        a_terms.append(row)
    b_terms = []
    for j, term in enumerate(b_raw):
        row = []
        for k, f in enumerate(term):
            if not (isinstance(f, list) and len(f) == 2):
                raise InstanceError(f"b factor at ({j},{k}) must have 2 entries")
            row.append([_complex(x, f"b[{j}][{k}]") for x in f])
        b_terms.append(row)
    kappa = obj.get("kappa")
    if kappa is not None and not isinstance(kappa, (int, float)):
        raise InstanceError("'kappa' must be a number")
    return make_instance(a_terms, b_terms, None if kappa is None else float(kappa))


def parse_instance(text: str) -> LspTfInstance:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed instance file: {exc}") from exc
    return instance_from_dict(obj)


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def instance_to_dict(inst: LspTfInstance) -> dict[str, Any]:
    out: dict[str, Any] = {
        "n": inst.n,
        "a_terms": [[[[_pair(x) for x in row] for row in f] for f in term] for term in inst.a_terms],
        "b_terms": [[[_pair(x) for x in f] for f in term] for term in inst.b_terms],
    }
    if inst.kappa is not None:
        out["kappa"] = inst.kappa
    return out


def dump_instance(inst: LspTfInstance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1)


def _require_dense(inst: LspTfInstance, cap: int) -> None:
    if inst.n > cap:
        raise ValueError(f"n={inst.n} exceeds the dense oracle cap ({cap})")


def expand_dense(inst: LspTfInstance, cap: int = DENSE_CAP) -> tuple[np.ndarray, np.ndarray]:
    _require_dense(inst, cap)
    a = sum(kron_all(term) for term in inst.a_terms)
    b = sum(kron_all(term) for term in inst.b_terms)
    return a, b


def term_norms(inst: LspTfInstance) -> list[float]:
    return [float(np.prod([np.linalg.norm(f, 2) for f in term])) for term in inst.a_terms]


def b_term_norms(inst: LspTfInstance) -> list[float]:
    return [float(np.prod([np.linalg.norm(f) for f in term])) for term in inst.b_terms]


def b_norm(inst: LspTfInstance) -> float:
    """Exact ||b||_2 from the Gram matrix of the rank-one terms (no expansion)."""
    gram = 0j
    for t1 in inst.b_terms:
        for t2 in inst.b_terms:
            gram += np.prod([np.vdot(x, y) for x, y in zip(t1, t2)])
    return float(np.sqrt(max(gram.real, 0.0)))


def a_norm(inst: LspTfInstance, cap: int = DENSE_CAP) -> float:
    """Spectral norm of A; triangle-inequality bound above the dense cap."""
    if inst.n <= cap:
        return float(np.linalg.norm(expand_dense(inst, cap)[0], 2))
    return float(sum(term_norms(inst)))


def _scale_first(terms, c: float):
    return tuple((term[0] * c,) + tuple(term[1:]) for term in terms)


def normalize(inst: LspTfInstance, cap: int = DENSE_CAP) -> LspTfInstance:
    """Rescale so ||A|| <= 1, every A term <= 1, and ||b|| = 1.

    A single common scalar per side is folded into the first factor of each
    term, which leaves the direction of A^{-1} b unchanged.
    """
    tn = term_norms(inst)
    if min(tn) == 0.0:
        raise InstanceError("zero A term (all-zero tensor product)")
    if min(b_term_norms(inst)) == 0.0:
        raise InstanceError("zero b term")
    worst = max(a_norm(inst, cap), max(tn))
    a_terms = inst.a_terms
    if worst > 1.0:
        a_terms = _scale_first(a_terms, 1.0 / worst)
    bn = b_norm(inst)
    b_terms = inst.b_terms
    if abs(bn - 1.0) > 1e-13:
        b_terms = _scale_first(b_terms, 1.0 / bn)
    out = replace(inst, a_terms=a_terms, b_terms=b_terms)
    big = [j for j, v in enumerate(b_term_norms(out)) if v > 1 + 1e-10]
    if big:
        log.warning("b terms %s exceed unit norm after normalizing b; term norm bounds are loose", big)
    return out


def condition_number(inst: LspTfInstance, cap: int = DENSE_CAP) -> float:
    if inst.n <= cap:
        a, _ = expand_dense(inst, cap)
        sv = np.linalg.svd(a, compute_uv=False)
        if sv[-1] <= SINGULAR_RTOL * sv[0]:
            raise InstanceError("A is singular")
        return float(max(1.0, sv[0] / sv[-1]))
    if inst.kappa is None:
        raise InstanceError("kappa not computable at this size and not supplied")
    return float(inst.kappa)


def solution_state(inst: LspTfInstance, cap: int = DENSE_CAP) -> np.ndarray:
    """Normalized A^{-1} b by dense solve."""
    from .linalg import dense_solve

    a, b = expand_dense(inst, cap)
    x = dense_solve(a, b)
    return x / np.linalg.norm(x)


def split_rhs(inst: LspTfInstance) -> list[LspTfInstance]:
    """One single-term instance per b term, for the solve-d-systems route."""
    return [replace(inst, b_terms=(term,)) for term in inst.b_terms]


def random_instance(
    rng: np.random.Generator,
    n: int,
    m: int,
    d: int,
    real: bool = False,
    min_sv: float = 0.2,
    max_tries: int = 200,
) -> LspTfInstance:
    """Random well-conditioned normalized instance (test and demo helper).

    The first A term has factors +-I + eta*G with eta sized so its own
    condition number is at most sqrt(1/min_sv); the remaining terms are
    random with total norm at most 0.4 of its smallest singular value. This
    keeps sigma_min/sigma_max >= min_sv for any n.
    """

    def unit_hermitian():
        g = rng.normal(size=(2, 2))
        if not real:
            g = g + 1j * rng.normal(size=(2, 2))
        h = 0.5 * (g + g.conj().T)
        return h / np.linalg.norm(h, 2)

    ratio = (1.0 / min_sv) ** (0.5 / n)
    eta = (ratio - 1) / (ratio + 1)
    smin0 = (1 - eta) ** n
    for _ in range(max_tries):
        a_terms = [[np.sign(rng.normal() or 1.0) * np.eye(2) + eta * unit_hermitian() for _ in range(n)]]
        for _ in range(m - 1):
            term = [unit_hermitian() for _ in range(n)]
            term[0] = term[0] * rng.uniform(0.1, 1.0) * 0.4 * smin0 / (m - 1)
            a_terms.append(term)
        b_terms = []
        for _ in range(d):
            row = []
            for _ in range(n):
                v = rng.normal(size=2)
                if not real:
                    v = v + 1j * rng.normal(size=2)
                row.append(v)
            b_terms.append(row)
        raw = make_instance(a_terms, b_terms)
        if max(b_term_norms(raw)) > b_norm(raw):
            continue
        inst = normalize(raw)
        if n <= DENSE_CAP:
            sv = np.linalg.svd(expand_dense(inst)[0], compute_uv=False)
            if sv[-1] / sv[0] < min_sv:
                continue
        return inst
    raise RuntimeError("could not draw a well-conditioned instance")
