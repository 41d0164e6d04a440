import math
from pathlib import Path

import numpy as np
import pytest

from tfqlsa.hamiltonian import build_a_of_s, build_h_dense, kernel_vector
from tfqlsa.linalg import expm_i_hermitian, is_unitary
from tfqlsa.problem import expand_dense, make_instance, parse_instance, random_instance
from tfqlsa.schedule import build_schedule
from tfqlsa.simulator import StateVector, fidelity
from tfqlsa.solver import (SolveConfig, SolveReport, auto_p, column_completion, eps0_for, evolve,
                           extract_solution, predict_stats, prepare_initial_state, repeat_seeds, solve,
                           solve_each_rhs)

INSTANCES = Path(__file__).resolve().parent.parent / "instances"
PLUS = np.array([1, 1]) / math.sqrt(2)
MINUS = np.array([1, -1]) / math.sqrt(2)


def load(name):
    return parse_instance((INSTANCES / name).read_text())


def test_column_completion(rng):
    for _ in range(50):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        u = column_completion(v)
        assert is_unitary(u)
        assert np.allclose(u[:, 0], v / np.linalg.norm(v))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_initial_state_is_zero_minus_b(rng, d):
    inst = random_instance(rng, 2, 1, d)
    psi, prob = prepare_initial_state(inst)
    _, b = expand_dense(inst)
    ref = np.kron([1, 0], np.kron(MINUS, b / np.linalg.norm(b)))
    assert fidelity(psi.amps, ref) == pytest.approx(1.0, abs=1e-12)
    norms = [np.prod([np.linalg.norm(f) for f in t]) for t in inst.b_terms]
    assert prob == pytest.approx(np.linalg.norm(b) ** 2 / sum(norms) ** 2, rel=1e-10)


def test_start_state_is_kernel_at_zero(rng):
    # A(0)^{-1} b~ = (Z x I)(|+> b) = |-> b
    inst = random_instance(rng, 2, 2, 2)
    psi, _ = prepare_initial_state(inst)
    assert fidelity(psi.amps, kernel_vector(inst, 0.0)) == pytest.approx(1.0, abs=1e-12)
    a0 = build_a_of_s(inst, 0.0)
    _, b = expand_dense(inst)
    bt = np.kron(PLUS, b / np.linalg.norm(b))
    assert np.allclose(np.linalg.solve(a0, bt), np.kron(MINUS, b / np.linalg.norm(b)))


def test_extraction_on_target_state(rng):
    inst = random_instance(rng, 2, 1, 1)
    _, b = expand_dense(inst)
    x = np.linalg.solve(expand_dense(inst)[0], b)
    x /= np.linalg.norm(x)
    psi = StateVector(kernel_vector(inst, 1.0), inst.n + 2)
    out, p_anc, p_ext = extract_solution(psi)
    assert p_anc == pytest.approx(1.0) and p_ext == pytest.approx(1.0)
    assert fidelity(out, x) == pytest.approx(1.0, abs=1e-12)


def test_identity_instance_exact():
    rep = solve(load("identity_n2.json"), SolveConfig(eps=0.2, seed=1, repeats=2))
    assert rep.summary["fidelity_mean"] == pytest.approx(1.0, abs=1e-12)
    assert rep.kappa == 1.0


def test_exact_mode_step_is_expm(rng):
    inst = random_instance(rng, 2, 1, 1)
    sched = build_schedule(2.0, 0.3, seed=3, c_q=0.5)
    psi, _ = prepare_initial_state(inst)
    out = evolve(inst, sched, SolveConfig(eps=0.3), psi)
    v = psi.amps
    for st in sched.steps:
        v = expm_i_hermitian(build_h_dense(inst, st.s), st.t) @ v
    assert np.allclose(out.amps, v, atol=1e-12)


def test_trotter_modes_agree_closely(rng):
    inst = random_instance(rng, 2, 1, 1, real=True)
    base = dict(eps=0.3, seed=5, c_q=0.5, c_r=0.5)
    ex = solve(inst, SolveConfig(mode="exact-expm", **base))
    tr = solve(inst, SolveConfig(mode="trotter-exact-data", **base))
    fx = solve(inst, SolveConfig(mode="trotter-fixedpoint", p_bits=14, **base))
    assert abs(ex.repeats[0].fidelity - tr.repeats[0].fidelity) <= 0.05
    assert abs(tr.repeats[0].fidelity - fx.repeats[0].fidelity) <= 1e-2
    assert fx.repeats[0].multiplier_calls_measured == fx.repeats[0].multiplier_calls_predicted


def test_predict_stats_matches_measured(rng):
    inst = random_instance(rng, 2, 1, 1)
    cfg = SolveConfig(mode="trotter-fixedpoint", eps=0.3, seed=9, c_q=0.5, c_r=0.2, p_bits=4)
    rep = solve(inst, cfg)
    r0 = rep.repeats[0]
    sched = build_schedule(rep.kappa, 0.3, r0.seed, 0.5, 0.2, 1, 1)
    pred = predict_stats(inst, sched, 4)
    assert pred["multiplier_calls"] == r0.multiplier_calls_measured
    assert pred["depth_units"] == r0.depth_units


def test_report_round_trip():
    rep = solve(load("diag_n2.json"), SolveConfig(eps=0.3, seed=2, repeats=2, c_q=0.5))
    back = SolveReport.from_dict(rep.to_dict())
    assert back.to_dict() == rep.to_dict()
    bad = rep.to_dict()
    bad["version"] = 99
    with pytest.raises(ValueError):
        SolveReport.from_dict(bad)


def test_repeat_seeds_deterministic():
    assert repeat_seeds(4, 3) == repeat_seeds(4, 3)
    assert len(set(repeat_seeds(4, 5))) == 5


def test_auto_p_and_eps0():
    assert eps0_for(0.2, 2.0) == pytest.approx(0.02)
    assert auto_p(0.2, 2.0) == 7


def test_precondition_flag():
    inst = load("rand_m2d1n3.json")
    rep = solve(inst, SolveConfig(eps=0.2, seed=0, c_q=0.25))
    assert rep.precondition_ok is False


def test_solve_each_rhs_count(rng):
    inst = random_instance(rng, 2, 1, 2)
    reps = solve_each_rhs(inst, SolveConfig(eps=0.3, c_q=0.25))
    assert len(reps) == 2


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(mode="bogus")
    with pytest.raises(ValueError):
        SolveConfig(eps=0.0)
    with pytest.raises(ValueError):
        SolveConfig(repeats=0)


def test_make_instance_singular_raises_in_solve():
    inst = make_instance([[np.diag([1.0, 0.0])]], [[np.array([1.0, 0.0])]])
    with pytest.raises(ValueError):
        solve(inst, SolveConfig())
