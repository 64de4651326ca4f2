"""Command line entry point ``riccati-flow``.

Subcommands
-----------
sda         run a doubling solve and write the iteration trace
flow        sample the flow of a pair (or a plain Riccati flow) on a time grid
canon       check the closed-form exponential of a canonical form
example     long-time orbit data for the two built-in examples
asymptotic  predicted limits of a canonical flow and a residual scan

Exit codes: 0 success, 1 bad input or failed checks, 2 doubling breakdown,
3 iteration limit reached.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import io
from .config import ExampleConfig, thread_count
from .errors import (HypothesisError, IndexTooHighError, NotInClassError,
                     NotRegularError, RiccatiFlowError, SingularityError, SpecError,
                     UsageError)

EXIT_OK, EXIT_INPUT, EXIT_BREAKDOWN, EXIT_MAXITER = 0, 1, 2, 3


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------- sda

def cmd_sda(args) -> int:
    from .sda import run_sda

    problem = io.problem_from_dict(io.load_json(args.input))
    trace = run_sda(problem, tol=args.tol, kmax=args.kmax)
    rows = []
    for r in trace.records:
        # the first iterate has no predecessor; its change is reported as 0
        d = 0.0 if math.isnan(r.normDelta) else r.normDelta
        bad = not all(math.isfinite(v) for v in (r.normA, d, r.residual))
        rows.append((r.k, r.normA, d, r.residual, int(bad)))
    sol = trace.solution()
    footer = {
        "result": {"verdict": trace.verdict, "iterations": len(trace.records),
                   "final_residual": trace.final.residual},
        "solution_re": [",".join(io.format_value(x) for x in row) for row in sol.real],
        "solution_im": [",".join(io.format_value(x) for x in row) for row in sol.imag],
    }
    if trace.breakdown_sigma is not None:
        footer["result"]["breakdown_sigma"] = trace.breakdown_sigma
    io.write_csv(args.out, ("k", "normA", "normDeltaH", "residual", "nonfinite"), rows, footer,
                 flag="nonfinite")
    _info(f"sda: {trace.verdict} after {len(trace.records)} iterates, "
          f"residual {trace.final.residual:.3e}")
    return {"converged": EXIT_OK, "breakdown": EXIT_BREAKDOWN}.get(trace.verdict, EXIT_MAXITER)


# --------------------------------------------------------------------- flow

def _flow_rde(args, data: dict) -> int:
    from .flow import _basis_scaled, propagate, radon_residual, rde_solve, is_blowup, singular_times
    from .parallel import pmap

    H, W0 = io.rde_from_dict(data)
    ts = np.linspace(args.t0, args.t1, args.grid)

    def row(t):
        t = float(t)
        sm = _basis_scaled(*propagate(H, W0, t))
        sm = float(np.linalg.svd(sm[0], compute_uv=False)[-1] / sm[1])
        W = rde_solve(H, W0, t)
        if is_blowup(W):
            return (t, sm, math.inf, math.inf, 1, math.inf)
        Q, _ = propagate(H, W0, t)
        return (t, sm, float(np.linalg.norm(W)), float(np.linalg.norm(np.linalg.inv(Q))), 0,
                radon_residual(H, W0, t))

    rows = pmap(row, ts, args.threads)
    rows = [r if math.isfinite(r[5]) else r[:4] + (1, r[5]) for r in rows]
    st = singular_times(H, W0, (args.t0, args.t1), args.grid)
    footer = {"singular_times": st.values().tolist()}
    if st.warnings:
        footer["warnings"] = st.warnings
    io.write_csv(args.out, ("t", "sigma_min_Q", "normW", "normQinv", "blowup", "radon_residual"),
                 rows, footer, flag="blowup")
    _info(f"flow: {len(st)} singular time(s) in [{args.t0}, {args.t1}]")
    return EXIT_OK


def _flow_doubling(args, data: dict) -> int:
    from .flow import sample_doubling

    problem = io.problem_from_dict(data)
    table = sample_doubling(problem, kmax=args.kmax)
    rows = []
    for r in table:
        d = [r.diffs.get(k, math.inf) for k in ("X11", "X12", "X21", "X22")]
        rows.append((r.k, r.t, r.max_diff if r.diffs else math.inf, *d, int(r.status != "ok")))
    io.write_csv(args.out, ("k", "t", "max_diff", "X11", "X12", "X21", "X22", "blowup"), rows,
                 {"status": [f"{r.k},{r.status}" for r in table]}, flag="blowup")
    return EXIT_OK


def cmd_flow(args) -> int:
    from .flow import build_flow_problem, extended_X, flow_pair, flow_singular_times
    from .parallel import pmap

    data = io.load_json(args.input)
    if args.doubling:
        return _flow_doubling(args, data)
    if "H" in data and "W0" in data:
        return _flow_rde(args, data)
    cls, X1 = io.pair_from_dict(data)
    problem = build_flow_problem(cls, X1)

    def row(t):
        t = float(t)
        smp = extended_X(problem, t)
        if smp.blowup:
            return (t, smp.sigma_min_Q, math.inf, math.inf, 1, math.inf)
        _, res = flow_pair(problem, t)
        return (t, smp.sigma_min_Q, float(np.linalg.norm(smp.X.X22)),
                float(np.linalg.norm(smp.X.X12)), 0,
                max(res["M_U0"], res["L_Uinf"], res["M_U1"]))

    rows = pmap(row, np.linspace(args.t0, args.t1, args.grid), args.threads)
    q, qs = flow_singular_times(problem, (args.t0, args.t1), args.grid)
    footer = {"singular_times": q.values().tolist(), "singular_times_dual": qs.values().tolist()}
    if q.warnings or qs.warnings:
        footer["warnings"] = q.warnings + qs.warnings
    io.write_csv(args.out, ("t", "sigma_min_Q", "normX22", "normX12", "blowup", "pair_residual"),
                 rows, footer, flag="blowup")
    _info(f"flow: {len(q)} singular time(s) in [{args.t0}, {args.t1}]")
    return EXIT_OK


# -------------------------------------------------------------------- canon

def canon_checks(spec, seed: int = 0, t_range=(-5.0, 5.0), samples: int = 20) -> list:
    """``(name, value, threshold)`` rows for a canonical form.

    Compares the closed-form exponential with a generic one at seeded
    times, checks its symplecticity and evaluates the two combinatorial
    identities the closed form rests on.
    """
    from .hjcf import build_J, digamma_det, digamma_det_numeric, exp_J, kappa, kappa_numeric
    from .linalg import fro, hamiltonian_residual, mat_exp, symplectic_residual

    rng = np.random.default_rng(seed)
    ts = rng.uniform(*t_range, samples)
    Jm = build_J(spec)
    err_exp = sym = 0.0
    for t in ts:
        E = exp_J(spec, float(t))
        err_exp = max(err_exp, fro(E - mat_exp(Jm * t)) / fro(E))
        sym = max(sym, symplectic_residual(E))
    kap = max(abs(kappa(n) - kappa_numeric(n, t)) for n in range(1, 9) for t in (-2.5, -1.0, 1.0, 2.5))
    det = 0.0
    for k1 in range(1, 9):
        for k2 in range(k1, 2 * k1 + 1):
            ref = digamma_det_numeric(k1, k2)
            det = max(det, abs(digamma_det(k1, k2) - ref) / abs(ref))
    return [("expJ_vs_generic", err_exp, 1e-9), ("symplectic_expJ", sym, 1e-9),
            ("hamiltonian_J", hamiltonian_residual(Jm), 1e-12),
            ("kappa_identity", kap, 1e-9), ("digamma_det", det, 1e-12)]


def cmd_canon(args) -> int:
    from .hjcf import random_spec

    spec = io.spec_from_dict(io.load_json(args.input)) if args.input else random_spec(args.seed)
    t0 = -5.0 if args.t0 is None else args.t0
    t1 = 5.0 if args.t1 is None else args.t1
    samples = 20 if args.grid is None else args.grid
    checks = canon_checks(spec, args.seed, (t0, t1), samples)
    rows = [(name, v, thr, int(v <= thr)) for name, v, thr in checks]
    ok = all(r[3] for r in rows)
    io.write_csv(args.out, ("check", "value", "threshold", "pass"), rows,
                 {"spec": {"n": spec.n, "blocks": len(spec.slots)}})
    _info(f"canon: {'pass' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_INPUT


# ------------------------------------------------------------------ example

def cmd_example(args) -> int:
    from .experiments import COLUMNS, peaks_colocated, run_example

    cfg = ExampleConfig(which=args.which, seed=args.seed,
                        t_max=1000.0 if args.t1 is None else args.t1,
                        grid=20001 if args.grid is None else args.grid)
    res = run_example(cfg, case=args.case, threads=args.threads)
    footer = {"summary": res["summary"]}
    if cfg.which == 42:
        dips, hit = peaks_colocated(res["rows"])
        footer["colocation"] = {"dips_below_1e-3": dips, "dips_at_peaks": hit}
    io.write_csv(args.out, COLUMNS, res["rows"], footer, flag="near_pole")
    _info("example: " + ", ".join(f"{k}={v}" for k, v in res["summary"].items()))
    return EXIT_OK


# --------------------------------------------------------------- asymptotic

def _flow_data(data: dict, spec, seed: int):
    from .linalg import random_instance

    n = spec.n
    S = io.matrix_from_json(data["S"]) if "S" in data else random_instance("symplectic", n, seed, scale=1.0)
    W0 = io.matrix_from_json(data["W0"]) if "W0" in data else random_instance("hermitian", n, seed + 1)
    if S.shape != (2 * n, 2 * n) or W0.shape != (n, n):
        raise UsageError("S must be 2n x 2n and W0 n x n for the given spec")
    return S, W0


def cmd_asymptotic(args) -> int:
    from .asymptotics import CanonicalFlow, elementary_limit, general_limit, residual_scan

    data = io.load_json(args.input)
    spec = io.spec_from_dict(data.get("spec", data))
    S, W0 = _flow_data(data, spec, args.seed)
    if args.case:
        pred = elementary_limit(args.case, spec, S, W0, args.direction)
    else:
        pred = general_limit(spec, S, W0, args.direction)
    if args.prediction:
        io.dump_json(io.prediction_to_dict(pred), args.prediction)
    sign = 1.0 if args.direction == "+" else -1.0
    t0 = 100.0 if args.t0 is None else args.t0
    t1 = 1000.0 if args.t1 is None else args.t1
    grid = 2001 if args.grid is None else args.grid
    ts = sign * np.linspace(t0, t1, grid)
    scan = residual_scan(CanonicalFlow(spec, S, W0), pred, ts, threads=args.threads)
    rows = [r[:4] + (int(not r[4]),) for r in scan.rows()]
    footer = {}
    try:
        footer["slope"] = {"W": scan.slope("W"), "Qinv": scan.slope("Q")}
    except UsageError:
        pass
    io.write_csv(args.out, ("t", "err_W", "err_Qinv", "sigma_min_U1", "near_pole"), rows,
                 footer, flag="near_pole")
    return EXIT_OK


# --------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="riccati-flow", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, t0=None, t1=None, grid=None):
        sp.add_argument("--input", help="input JSON file")
        sp.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
        sp.add_argument("--t0", type=float, default=t0)
        sp.add_argument("--t1", type=float, default=t1)
        sp.add_argument("--grid", type=int, default=grid)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=1e-13)
        sp.add_argument("--kmax", type=int, default=60)
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: RICCATI_FLOW_THREADS or 1)")
        return sp

    common(sub.add_parser("sda", help="doubling solve of a DARE, NME or CARE"))
    f = common(sub.add_parser("flow", help="sample the flow on a time grid"), -2.0, 2.0, 2001)
    f.add_argument("--doubling", action="store_true",
                   help="compare doubling iterates with the flow at t = 2^(k-1)")
    common(sub.add_parser("canon", help="closed-form exponential checks"))
    e = common(sub.add_parser("example", help="long-time orbit data"))
    e.add_argument("--which", type=int, choices=(41, 42), default=41)
    e.add_argument("--case", choices=("d", "c"), default="d")
    a = common(sub.add_parser("asymptotic", help="predicted limits and residual scan"))
    a.add_argument("--case", choices=("r", "e", "c", "d"), default=None,
                   help="single-block prediction (default: general prediction)")
    a.add_argument("--direction", choices=("+", "-"), default="+")
    a.add_argument("--prediction", help="write the prediction as JSON to this path")
    return p


COMMANDS = {"sda": cmd_sda, "flow": cmd_flow, "canon": cmd_canon,
            "example": cmd_example, "asymptotic": cmd_asymptotic}


def _validate(args) -> None:
    if args.command in ("sda", "flow", "asymptotic") and not args.input:
        raise UsageError("--input is required")
    if args.t0 is not None and args.t1 is not None and not args.t1 > args.t0:
        raise UsageError("need --t1 > --t0")
    if args.grid is not None and args.grid < 2:
        raise UsageError("--grid must be at least 2")
    if args.kmax < 1:
        raise UsageError("--kmax must be at least 1")
    if args.threads is None:
        args.threads = thread_count()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
        return COMMANDS[args.command](args)
    except (UsageError, SpecError, IndexTooHighError, NotInClassError, NotRegularError,
            SingularityError, HypothesisError) as exc:
        _info(f"error: {exc}")
        return EXIT_INPUT
    except RiccatiFlowError as exc:
        _info(f"error: {exc}")
        return EXIT_BREAKDOWN


if __name__ == "__main__":
    sys.exit(main())
