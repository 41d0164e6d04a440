"""End-to-end pipeline: prepare, evolve along the randomized schedule, extract, score."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .circuit import H_MAT, X_MAT, Circuit, GateStats, build_term_evolution, gate, gate_stats, ry_matrix, term_diag
from .fixedpoint import bits_for_eps
from .hamiltonian import build_h_dense, comm_bound, decompose
from .linalg import expm_i_hermitian
from .problem import LspTfInstance, condition_number, normalize, solution_state, split_rhs
from .schedule import DEFAULT_C_Q, DEFAULT_C_R, Schedule, build_schedule, log2_kappa
from .simulator import StateVector, apply, dense_unitary, fidelity, l2_distance, project, project_onto, trace_distance

log = logging.getLogger(__name__)

MODES = ("exact-expm", "trotter-exact-data", "trotter-fixedpoint")
REPORT_VERSION = 1
PREP_MIN_PROB = 1e-12
PLUS = np.array([1.0, 1.0]) / math.sqrt(2)


@dataclass(frozen=True)
class SolveConfig:
    eps: float = 0.2
    mode: str = "exact-expm"
    p_bits: int | None = None
    seed: int = 0
    repeats: int = 1
    c_q: float = DEFAULT_C_Q
    c_r: float = DEFAULT_C_R

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.p_bits is not None and self.p_bits < 1:
            raise ValueError("p_bits must be >= 1")
        if self.c_q <= 0 or self.c_r <= 0:
            raise ValueError("c_q and c_r must be positive")


def eps0_for(eps: float, kappa: float) -> float:
    return eps * eps / (kappa * log2_kappa(kappa) ** 2)


def auto_p(eps: float, kappa: float) -> int:
    return bits_for_eps(eps0_for(eps, kappa))


def repeat_seeds(seed: int, repeats: int) -> list[int]:
    return [int(x) for x in np.random.SeedSequence(seed).generate_state(repeats)]


# ---------------------------------------------------------------- initial state


def column_completion(v: np.ndarray) -> np.ndarray:
    """Unitary whose first column is v/|v|; second column is the conjugate of -iY v."""
    v = np.asarray(v, dtype=complex)
    nv = np.linalg.norm(v)
    if nv == 0:
        raise ValueError("zero vector")
    a, b = v / nv
    return np.array([[a, -np.conj(b)], [b, np.conj(a)]])


def _amplitude_tree(qubits: list[int], amps: np.ndarray) -> list:
    """Controlled-Ry cascade preparing sum_j amps[j] |j> (amps >= 0, big-endian index)."""
    ops = []
    k = len(qubits)
    for level in range(k):
        for prefix in range(2**level):
            span = 2 ** (k - level)
            chunk = amps[prefix * span:(prefix + 1) * span]
            left = float(np.sum(chunk[: span // 2] ** 2))
            right = float(np.sum(chunk[span // 2:] ** 2))
            if left + right == 0.0 or right == 0.0:
                continue
            theta = 2 * math.atan2(math.sqrt(right), math.sqrt(left))
            pol = tuple((prefix >> (level - 1 - i)) & 1 for i in range(level))
            ops.append(gate(qubits[level], ry_matrix(theta), "RY", tuple(qubits[:level]), pol))
    return ops


def initial_state_circuit(inst: LspTfInstance) -> Circuit:
    """|0> |0> |0..0> [|0..0>_idx] -> |0> |-> |b>, the index register post-selected on 0."""
    n, d = inst.n, inst.d
    width = n + 2
    sys = list(range(2, 2 + n))
    ops = [gate(1, X_MAT, "X"), gate(1, H_MAT, "H")]
    if d == 1:
        for k, q in enumerate(sys):
            ops.append(gate(q, column_completion(inst.b_terms[0][k]), "Ub"))
        return Circuit(width, ops, {"anc": (0,), "ext": (1,), "sys": tuple(sys)})
    k_idx = max(1, math.ceil(math.log2(d)))
    idx = list(range(width, width + k_idx))
    norms = np.array([np.prod([np.linalg.norm(f) for f in term]) for term in inst.b_terms])
    amps = np.zeros(2**k_idx)
    amps[:d] = np.sqrt(norms / norms.sum())
    prep = _amplitude_tree(idx, amps)
    ops += prep
    for j, term in enumerate(inst.b_terms):
        pol = tuple((j >> (k_idx - 1 - i)) & 1 for i in range(k_idx))
        for k, q in enumerate(sys):
            ops.append(gate(q, column_completion(term[k]), f"Ub{j}", tuple(idx), pol))
    ops += [op.inverse() for op in reversed(prep)]
    return Circuit(width + k_idx, ops, {"anc": (0,), "ext": (1,), "sys": tuple(sys), "idx": tuple(idx)})


def prepare_initial_state(inst: LspTfInstance) -> tuple[StateVector, float]:
    """Return |0> (x) |-> (x) |b> on n+2 qubits and the post-selection probability."""
    c = initial_state_circuit(inst)
    psi = apply(c, StateVector.basis(c.n_qubits))
    if "idx" not in c.registers:
        return StateVector(psi.amps, psi.n_qubits), 1.0
    psi.registers = c.registers
    out, prob = project(psi, "idx", 0)
    if prob < PREP_MIN_PROB:
        raise ValueError(f"post-selection probability {prob:.3e} too small")
    return StateVector(out.amps, out.n_qubits), prob


# ---------------------------------------------------------------- evolution


def term_multiplier_calls(term) -> int:
    return 2 * max(term_diag(term).n_active - 1, 0)


def _step_unitary(inst, st, config: SolveConfig, p: int, stats: list[GateStats] | None):
    if config.mode == "exact-expm":
        return expm_i_hermitian(build_h_dense(inst, st.s), st.t)
    dec = decompose(inst, st.s)
    dt = st.t / st.r
    step = None
    per_step = GateStats()
    for term in dec.terms:
        if config.mode == "trotter-exact-data":
            u = expm_i_hermitian(term.dense(), dt)
        else:
            c = build_term_evolution(term, dt, p)
            u = dense_unitary(c)
            per_step = per_step + gate_stats(c)
        step = u if step is None else u @ step
    if stats is not None:
        stats.append(per_step.scaled(st.r))
    return np.linalg.matrix_power(step, st.r)


def evolve(inst: LspTfInstance, schedule: Schedule, config: SolveConfig, psi: StateVector,
           p: int | None = None, stats: list[GateStats] | None = None) -> StateVector:
    """Apply the q randomized steps to ``psi`` (n+2 qubits) in the configured mode."""
    if config.mode == "trotter-fixedpoint" and p is None:
        raise ValueError("fixed-point mode needs a bit width")
    v = psi.amps.copy()
    for st in schedule.steps:
        v = _step_unitary(inst, st, config, p, stats) @ v
    return StateVector(v, psi.n_qubits)


def extract_solution(psi: StateVector) -> tuple[StateVector, float, float]:
    """Post-select ancilla on |0> and extension qubit on |+>."""
    a, p_anc = project(psi, 0, 0)
    x, p_ext = project_onto(a, 0, PLUS)
    return x, p_anc, p_ext


# ---------------------------------------------------------------- accounting


def predict_step_counts(inst: LspTfInstance, schedule: Schedule) -> list[dict]:
    """Per-step analytic multiplier-call totals (no circuits built)."""
    rows = []
    for st in schedule.steps:
        calls = [term_multiplier_calls(t) for t in decompose(inst, st.s).terms]
        rows.append({"s": st.s, "r": st.r, "terms": len(calls), "per_slice_calls": sum(calls),
                     "multiplier_calls": st.r * sum(calls)})
    return rows


def predict_stats(inst: LspTfInstance, schedule: Schedule, p: int) -> dict:
    rows = predict_step_counts(inst, schedule)
    depth = 0
    for st in schedule.steps:
        per = sum((gate_stats(build_term_evolution(t, st.t / st.r, p)) for t in decompose(inst, st.s).terms),
                  GateStats())
        depth += per.depth * st.r
    return {
        "q": schedule.q, "r": [st.r for st in schedule.steps], "total_r": schedule.total_r,
        "theorem_r": schedule.theorem_r,
        "multiplier_calls": sum(r["multiplier_calls"] for r in rows), "depth_units": depth,
        "steps": rows,
    }


# ---------------------------------------------------------------- report


@dataclass
class RepeatResult:
    seed: int
    fidelity: float
    l2_distance: float
    trace_distance: float
    p_ancilla: float
    p_extension: float
    final_norm: float
    q: int
    total_r: int
    multiplier_calls_predicted: int
    multiplier_calls_measured: int | None
    depth_units: int | None
    data_budget: float
    trotter_budget: float
    schedule: list[dict]


@dataclass
class SolveReport:
    config: dict
    instance: dict
    kappa: float
    p_bits: int | None
    eps0: float
    precondition_ok: bool
    prep_probability: float
    repeats: list[RepeatResult]
    gate_totals: dict | None
    version: int = REPORT_VERSION
    summary: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.summary:
            self.summary = _summarize(self.repeats)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "SolveReport":
        obj = dict(obj)
        if obj.get("version") != REPORT_VERSION:
            raise ValueError(f"unsupported report version {obj.get('version')}")
        obj["repeats"] = [RepeatResult(**r) for r in obj["repeats"]]
        return cls(**obj)


def _summarize(reps: list[RepeatResult]) -> dict:
    out = {}
    for key in ("fidelity", "l2_distance", "trace_distance", "p_ancilla", "p_extension"):
        vals = np.array([getattr(r, key) for r in reps])
        out[f"{key}_mean"] = float(vals.mean())
        out[f"{key}_std"] = float(vals.std())
    out["multiplier_calls_predicted"] = int(sum(r.multiplier_calls_predicted for r in reps))
    measured = [r.multiplier_calls_measured for r in reps]
    out["multiplier_calls_measured"] = None if None in measured else int(sum(measured))
    return out


def _budgets(inst, schedule: Schedule, p: int | None) -> tuple[float, float]:
    data = 0.0 if p is None else sum(st.t for st in schedule.steps) * 2.0**-p
    trot = 0.0
    for st in schedule.steps:
        trot += comm_bound(decompose(inst, st.s)) * st.t * st.t / st.r
    return data, trot


def solve(inst: LspTfInstance, config: SolveConfig) -> SolveReport:
    norm_inst = normalize(inst)
    kappa = condition_number(norm_inst)
    n = norm_inst.n
    ok = config.eps <= 1 / (3 * n)
    if config.mode == "trotter-fixedpoint" and not ok:
        log.warning("eps=%.3g exceeds 1/(3n)=%.3g; accuracy guarantee does not apply", config.eps, 1 / (3 * n))
    e0 = eps0_for(config.eps, kappa)
    p = None
    if config.mode == "trotter-fixedpoint":
        p = config.p_bits if config.p_bits is not None else auto_p(config.eps, kappa)
    x_true = solution_state(norm_inst)
    psi0, prep_prob = prepare_initial_state(norm_inst)
    reps: list[RepeatResult] = []
    totals = GateStats() if p is not None else None
    for seed in repeat_seeds(config.seed, config.repeats):
        sched = build_schedule(kappa, config.eps, seed, config.c_q, config.c_r, norm_inst.m, norm_inst.d)
        stats: list[GateStats] | None = [] if p is not None else None
        psi = evolve(norm_inst, sched, config, psi0, p, stats)
        x, p_anc, p_ext = extract_solution(psi)
        measured = None
        depth = None
        if stats is not None:
            agg = sum(stats, GateStats())
            totals = totals + agg
            measured, depth = agg.multiplier_calls, agg.depth
        predicted = sum(r["multiplier_calls"] for r in predict_step_counts(norm_inst, sched))
        data_b, trot_b = _budgets(norm_inst, sched, p)
        reps.append(RepeatResult(
            seed=seed, fidelity=fidelity(x, x_true), l2_distance=l2_distance(x, x_true),
            trace_distance=trace_distance(x, x_true), p_ancilla=p_anc, p_extension=p_ext,
            final_norm=float(np.linalg.norm(psi.amps)), q=sched.q, total_r=sched.total_r,
            multiplier_calls_predicted=predicted, multiplier_calls_measured=measured, depth_units=depth,
            data_budget=data_b, trotter_budget=trot_b, schedule=sched.table(),
        ))
    return SolveReport(
        config=asdict(config),
        instance={"n": n, "m": norm_inst.m, "d": norm_inst.d},
        kappa=kappa, p_bits=p, eps0=e0, precondition_ok=ok, prep_probability=prep_prob,
        repeats=reps, gate_totals=None if totals is None else totals.to_dict(),
    )


def solve_each_rhs(inst: LspTfInstance, config: SolveConfig) -> list[SolveReport]:
    """Driver loop for the split route: one solve per right-hand-side term."""
    return [solve(sub, config) for sub in split_rhs(inst)]
