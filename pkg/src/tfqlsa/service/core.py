"""Plain functions behind every endpoint and CLI subcommand."""

from __future__ import annotations

import numpy as np

from ..hamiltonian import build_h_dense, decompose, kernel_vector
from ..problem import condition_number, instance_from_dict, normalize
from ..schedule import build_schedule
from ..solver import REPORT_VERSION, SolveConfig, auto_p, predict_stats, repeat_seeds, solve
from .schemas import SolveRequest, StatsRequest, VerifyRequest

VERIFY_CAP = 8
DECOMP_TOL = 1e-9
KERNEL_TOL = 1e-9


class ParameterError(ValueError):
    """Mutually inconsistent request parameters (bad flags on the CLI)."""


def _instance(req):
    return normalize(instance_from_dict(req.instance.model_dump(exclude_none=True)))


def run_solve(req: SolveRequest) -> dict:
    if req.p_bits is not None and req.mode != "trotter-fixedpoint":
        raise ParameterError("p_bits only applies to trotter-fixedpoint mode")
    inst = _instance(req)
    cfg = SolveConfig(eps=req.eps, mode=req.mode, p_bits=req.p_bits, seed=req.seed,
                      repeats=req.repeats, c_q=req.c_q, c_r=req.c_r)
    return solve(inst, cfg).to_dict()


def run_stats(req: StatsRequest) -> dict:
    inst = _instance(req)
    kappa = condition_number(inst)
    p = req.p_bits if req.p_bits is not None else auto_p(req.eps, kappa)
    reps = []
    for seed in repeat_seeds(req.seed, req.repeats):
        sched = build_schedule(kappa, req.eps, seed, req.c_q, req.c_r, inst.m, inst.d)
        pred = predict_stats(inst, sched, p)
        pred["seed"] = seed
        reps.append(pred)
    return {
        "version": REPORT_VERSION, "kappa": kappa, "p_bits": p, "repeats": reps,
        "multiplier_calls": sum(r["multiplier_calls"] for r in reps),
        "depth_units": sum(r["depth_units"] for r in reps),
    }


def _check(name, value, threshold, detail=""):
    return {"name": name, "value": float(value), "threshold": float(threshold),
            "passed": bool(value <= threshold), "detail": detail}


def run_verify(req: VerifyRequest) -> dict:
    inst = _instance(req)
    m, d = inst.m, inst.d
    dec0 = decompose(inst, 0.0)
    counts = {"type1": len(dec0.type1), "type2": len(dec0.type2),
              "expected_type1": m + 1, "expected_type2": 2 * d * d + 2 * m * d * d}
    checks = [_check("term_counts",
                     abs(counts["type1"] - counts["expected_type1"]) + abs(counts["type2"] - counts["expected_type2"]),
                     0)]
    if inst.n > VERIFY_CAP:
        checks.append(_check("dense_checks_skipped", 0, 0, f"n={inst.n} above dense verify cap {VERIFY_CAP}"))
    else:
        condition_number(inst)
        rng = np.random.default_rng(req.seed)
        grid = np.concatenate([[0.0, 1.0], rng.random(max(req.n_s - 2, 0))])[: max(req.n_s, 2)]
        worst_sum = worst_kernel = worst_herm = 0.0
        for s in grid:
            h = build_h_dense(inst, s)
            dec = decompose(inst, s)
            worst_sum = max(worst_sum, np.linalg.norm(dec.dense() - h, 2))
            worst_kernel = max(worst_kernel, np.linalg.norm(h @ kernel_vector(inst, s)))
            worst_herm = max(worst_herm, np.max(np.abs(h - h.conj().T)))
        checks.append(_check("decomposition_residual", worst_sum, DECOMP_TOL))
        checks.append(_check("kernel_residual", worst_kernel, KERNEL_TOL))
        checks.append(_check("hermitian_residual", worst_herm, 1e-12))
    return {"version": REPORT_VERSION, "passed": all(c["passed"] for c in checks),
            "counts": counts, "checks": checks}
