import json
from pathlib import Path

import numpy as np
import pytest

from tfqlsa.problem import (InstanceError, a_norm, b_norm, b_term_norms, condition_number, dump_instance,
                            expand_dense, instance_from_dict, instance_to_dict, make_instance, normalize,
                            parse_instance, random_instance, solution_state, split_rhs, term_norms)

INSTANCES = Path(__file__).resolve().parent.parent / "instances"
I2 = np.eye(2)
Z = np.diag([1.0, -1.0])
X = np.array([[0.0, 1.0], [1.0, 0.0]])


def brute_kron(factors):
    """Entry-by-entry tensor product with qubit 0 as the most significant bit."""
    n = len(factors)
    vec = factors[0].ndim == 1
    dim = 2**n
    out = np.zeros(dim if vec else (dim, dim), dtype=complex)
    for r in range(dim):
        rb = [(r >> (n - 1 - k)) & 1 for k in range(n)]
        if vec:
            out[r] = np.prod([factors[k][rb[k]] for k in range(n)])
            continue
        for c in range(dim):
            cb = [(c >> (n - 1 - k)) & 1 for k in range(n)]
            out[r, c] = np.prod([factors[k][rb[k], cb[k]] for k in range(n)])
    return out


def test_expansion_matches_brute_force(rng):
    inst = random_instance(rng, 3, 2, 2)
    a, b = expand_dense(inst)
    a_ref = sum(brute_kron(t) for t in inst.a_terms)
    b_ref = sum(brute_kron(t) for t in inst.b_terms)
    assert np.max(np.abs(a - a_ref)) <= 1e-14
    assert np.max(np.abs(b - b_ref)) <= 1e-14


def test_identity_instance_solution():
    inst = make_instance([[I2, I2]], [[np.array([0.6, 0.8]), np.array([1.0, 0.0])]])
    x = solution_state(inst)
    assert np.allclose(x, [0.6, 0, 0.8, 0])
    assert condition_number(inst) == 1.0


def test_diagonal_instance_solution_and_kappa():
    inst = make_instance([[np.diag([1.0, 0.5]), np.diag([1.0, 0.5])]], [[np.ones(2), np.ones(2)]])
    x = solution_state(inst)
    ref = np.array([1, 2, 2, 4]) / 5
    assert np.allclose(x, ref)
    assert condition_number(inst) == pytest.approx(4.0)


def test_z_instance_kappa_one():
    inst = make_instance([[Z]], [[np.array([1.0, 0.0])]])
    assert condition_number(inst) == 1.0


def test_singular_rejected():
    inst = make_instance([[np.diag([1.0, 0.0])]], [[np.array([1.0, 0.0])]])
    with pytest.raises(InstanceError, match="singular"):
        condition_number(inst)


def test_non_hermitian_rejected_with_position():
    bad = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(InstanceError, match=r"non-Hermitian factor at \(0,1\)"):
        make_instance([[I2, bad]], [[np.ones(2), np.ones(2)]])


def test_small_asymmetry_symmetrized(caplog):
    f = np.array([[1.0, 1e-10], [0.0, 1.0]])
    inst = make_instance([[f]], [[np.ones(2)]])
    assert np.allclose(inst.a_terms[0][0], inst.a_terms[0][0].conj().T, atol=0)
    assert "symmetrizing" in caplog.text


def test_zero_b_rejected():
    with pytest.raises(InstanceError):
        make_instance([[I2]], [[np.zeros(2)]])
    with pytest.raises(InstanceError, match="zero"):
        make_instance([[I2]], [[np.array([1.0, 0.0])], [np.array([-1.0, 0.0])]])


def test_parse_errors():
    with pytest.raises(InstanceError, match="inconsistent tensor length"):
        instance_from_dict({"n": 2, "a_terms": [[[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]],
                            "b_terms": [[[[1, 0], [0, 0]], [[1, 0], [0, 0]]]]})
    with pytest.raises(InstanceError, match="unknown keys"):
        instance_from_dict({"n": 1, "a_terms": [], "b_terms": [], "extra": 1})
    with pytest.raises(InstanceError):
        parse_instance("{not json")


def test_round_trip_every_shipped_instance():
    files = sorted(INSTANCES.glob("*.json"))
    assert len(files) >= 4
    for path in files:
        inst = parse_instance(path.read_text())
        back = parse_instance(dump_instance(inst))
        for t1, t2 in zip(inst.a_terms + inst.b_terms, back.a_terms + back.b_terms):
            for f1, f2 in zip(t1, t2):
                assert np.array_equal(f1, f2)
        assert set(instance_to_dict(inst)) <= {"n", "a_terms", "b_terms", "kappa"}


def test_norms():
    inst = make_instance([[2 * I2, Z], [X, X]], [[np.array([3.0, 4.0]), np.array([1.0, 0.0])]])
    assert term_norms(inst) == pytest.approx([2.0, 1.0])
    assert b_term_norms(inst) == pytest.approx([5.0])
    assert b_norm(inst) == pytest.approx(5.0)
    a, b = expand_dense(inst)
    assert a_norm(inst) == pytest.approx(np.linalg.norm(a, 2))
    assert a_norm(inst, cap=1) == pytest.approx(3.0)


def test_b_norm_gram_matches_dense(rng):
    inst = random_instance(rng, 4, 1, 3)
    raw = make_instance(inst.a_terms, [[2 * f for f in t] for t in inst.b_terms])
    assert b_norm(raw) == pytest.approx(np.linalg.norm(expand_dense(raw)[1]), rel=1e-13)


def test_normalize_preserves_solution_direction(rng):
    for _ in range(20):
        a_terms = [[3 * rng.normal() * I2 + np.diag(rng.normal(size=2)) for _ in range(2)] for _ in range(2)]
        b_terms = [[rng.normal(size=2) * 4 for _ in range(2)] for _ in range(2)]
        raw = make_instance(a_terms, b_terms)
        try:
            x_raw = solution_state(raw)
        except np.linalg.LinAlgError:
            continue
        norm = normalize(raw)
        a, b = expand_dense(norm)
        assert np.linalg.norm(a, 2) <= 1 + 1e-12
        assert max(term_norms(norm)) <= 1 + 1e-12
        assert np.linalg.norm(b) == pytest.approx(1.0, abs=1e-12)
        assert abs(abs(np.vdot(x_raw, solution_state(norm))) - 1) <= 1e-10


def test_split_rhs_linearity(rng):
    inst = random_instance(rng, 2, 1, 3)
    a, b = expand_dense(inst)
    parts = split_rhs(inst)
    assert len(parts) == 3
    total = sum(np.linalg.solve(a, expand_dense(p)[1]) for p in parts)
    assert np.allclose(total, np.linalg.solve(a, b))


def test_random_instance_properties(rng):
    inst = random_instance(rng, 3, 2, 2, min_sv=0.25)
    assert (inst.n, inst.m, inst.d, inst.dim) == (3, 2, 2, 8)
    assert condition_number(inst) <= 4.0 + 1e-9
    assert max(b_term_norms(inst)) <= 1.0
