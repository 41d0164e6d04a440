"""Command-line entry point.

Subcommands ``solve``, ``verify`` and ``stats`` run in-process by default.
With ``--server URL`` they are sent to a running ``tfqlsa serve`` instead.

Exit codes: 0 success, 2 bad flags, 3 instance error, 4 verification failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from .problem import InstanceError
from .schedule import DEFAULT_C_Q, DEFAULT_C_R
from .service import core
from .service.schemas import SolveRequest, StatsRequest, VerifyRequest

EXIT_OK, EXIT_FLAGS, EXIT_INSTANCE, EXIT_VERIFY = 0, 2, 3, 4
MODES = ("exact-expm", "trotter-exact-data", "trotter-fixedpoint")

log = logging.getLogger("tfqlsa")


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tfqlsa", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, with_eps=True):
        p.add_argument("--instance", required=True, type=Path, help="instance JSON file")
        p.add_argument("--report", type=Path, help="write the JSON report here (default: stdout)")
        p.add_argument("--server", help="send the request to this service URL instead of running locally")
        p.add_argument("-v", "--verbose", action="count", default=0)
        if with_eps:
            p.add_argument("--eps", type=float, default=0.2)
            p.add_argument("--p-bits", type=int)
            p.add_argument("--seed", type=int, help="master seed (default: fresh entropy, logged)")
            p.add_argument("--repeats", type=int, default=1)
            p.add_argument("--c-q", type=float, default=DEFAULT_C_Q)
            p.add_argument("--c-r", type=float, default=DEFAULT_C_R)

    common(sub.add_parser("solve", help="run the solver and report fidelities"))
    sub.choices["solve"].add_argument("--mode", choices=MODES, default="exact-expm")
    common(sub.add_parser("verify", help="run the dense oracle checks on an instance"), with_eps=False)
    sub.choices["verify"].add_argument("--n-s", type=int, default=5, help="number of s values to test")
    sub.choices["verify"].add_argument("--seed", type=int, default=0)
    common(sub.add_parser("stats", help="predict schedule and gate totals without simulating"))

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    return ap


def _load_instance(path: Path) -> dict:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise _Fail(EXIT_INSTANCE, f"cannot read instance: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise _Fail(EXIT_INSTANCE, f"malformed instance file: {exc}") from exc


def _build_request(model, payload: dict):
    try:
        return model(**payload)
    except ValidationError as exc:
        inst_err = any(e["loc"] and e["loc"][0] == "instance" for e in exc.errors())
        raise _Fail(EXIT_INSTANCE if inst_err else EXIT_FLAGS, str(exc)) from exc


def _remote(url: str, endpoint: str, req) -> dict:
    import httpx

    try:
        resp = httpx.post(f"{url.rstrip('/')}/{endpoint}", json=req.model_dump(), timeout=None)
    except httpx.HTTPError as exc:
        raise _Fail(EXIT_FLAGS, f"cannot reach server: {exc}") from exc
    if resp.status_code == 200:
        return resp.json()
    detail = resp.json().get("detail")
    kind = detail.get("kind") if isinstance(detail, dict) else None
    code = EXIT_FLAGS if kind == "parameter" else EXIT_INSTANCE
    raise _Fail(code, f"server error {resp.status_code}: {detail}")


def _local(fn, req) -> dict:
    try:
        return fn(req)
    except core.ParameterError as exc:
        raise _Fail(EXIT_FLAGS, str(exc)) from exc
    except InstanceError as exc:
        raise _Fail(EXIT_INSTANCE, str(exc)) from exc


def _emit(obj: dict, path: Path | None) -> None:
    text = json.dumps(obj, indent=1)
    if path is None:
        print(text)
        return
    try:
        path.write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise _Fail(EXIT_FLAGS, f"cannot write report: {exc}") from exc


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = int(np.random.SeedSequence().entropy % (2**63))
    log.warning("no --seed given; using entropy seed %d", seed)
    return seed


def _dispatch(args) -> int:
    payload = {"instance": _load_instance(args.instance)}
    if args.command == "verify":
        payload.update(n_s=args.n_s, seed=args.seed)
        req, fn, endpoint = _build_request(VerifyRequest, payload), core.run_verify, "verify"
    else:
        payload.update(eps=args.eps, p_bits=args.p_bits, seed=_seed(args), repeats=args.repeats,
                       c_q=args.c_q, c_r=args.c_r)
        if args.command == "solve":
            payload["mode"] = args.mode
            req, fn, endpoint = _build_request(SolveRequest, payload), core.run_solve, "solve"
        else:
            req, fn, endpoint = _build_request(StatsRequest, payload), core.run_stats, "stats"
    out = _remote(args.server, endpoint, req) if args.server else _local(fn, req)
    _emit(out, args.report)
    if args.command == "solve":
        s = out["summary"]
        print(f"fidelity mean {s['fidelity_mean']:.6f}  trace distance mean {s['trace_distance_mean']:.6f}",
              file=sys.stderr)
    if args.command == "verify":
        for c in out["checks"]:
            print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']} {c['value']:.3e} <= {c['threshold']:.1e}",
                  file=sys.stderr)
        if not out["passed"]:
            return EXIT_VERIFY
    return EXIT_OK


def run(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "serve":
        import uvicorn

        uvicorn.run("tfqlsa.service.app:app", host=args.host, port=args.port)
        return EXIT_OK
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
