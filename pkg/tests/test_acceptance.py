"""Acceptance suite.

Each test records one ``PASS`` or ``FAIL`` line; the lines are printed in
order at the end of the pytest run (see ``conftest.py``) and also when the
file is executed directly::

    python3 tests/test_acceptance.py
"""

import math
import time

import numpy as np

from riccati_flow.asymptotics import elementary_limit, residual_scan
from riccati_flow.experiments import (build_example, linear_sda_instance, nme_test_problem,
                                      random_flow_instance, sda_errors)
from riccati_flow.flow import (build_flow_problem, extended_X, flow_pair, flow_singular_times,
                               radon_residual, sample_doubling, scan_singular, singular_times)
from riccati_flow.hjcf import (build_J, digamma_det, digamma_det_numeric, exp_J, kappa,
                               kappa_numeric, random_spec)
from riccati_flow.linalg import fro, hermitian_residual, mat_exp, symplectic_residual
from riccati_flow.pairs import projector_residual
from riccati_flow.sda import NmeProblem, run_sda

RESULTS: dict[int, str] = {}


def record(num: int, title: str, ok: bool, detail: str) -> bool:
    RESULTS[num] = f"{'PASS' if ok else 'FAIL'} [{num:2d}] {title}: {detail}"
    return ok


def report_lines() -> list[str]:
    return [RESULTS[k] for k in sorted(RESULTS)]


# 1 ------------------------------------------------------------------------

def test_01_structured_exponential():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(50):
        spec = random_spec(seed, max_blocks=3, max_size=4, max_n=10)
        Jm = build_J(spec)
        for t in np.random.default_rng(1000 + seed).uniform(-5, 5, 20):
            E = exp_J(spec, float(t))
            worst = max(worst, fro(E - mat_exp(Jm * t)) / fro(E))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 10
    assert record(1, "closed-form exponential vs generic", ok,
                  f"max rel err {worst:.2e} (<= 1e-9), {dt:.1f} s (< 10 s)")


# 2 ------------------------------------------------------------------------

def test_02_kappa_identity():
    worst = max(abs(kappa(n) - kappa_numeric(n, t))
                for n in range(1, 9) for t in (-2.5, -1.0, 1.0, 2.5))
    assert record(2, "kappa closed form, n = 1..8", worst <= 1e-9,
                  f"max abs err {worst:.2e} (<= 1e-9)")


# 3 ------------------------------------------------------------------------

def test_03_digamma_determinant():
    worst, count = 0.0, 0
    for k1 in range(1, 9):
        for k2 in range(k1, 2 * k1 + 1):
            ref = digamma_det_numeric(k1, k2)
            worst = max(worst, abs(digamma_det(k1, k2) - ref) / abs(ref))
            count += 1
    assert record(3, "factorial determinant formula", worst <= 1e-12,
                  f"{count} index pairs, max rel err {worst:.2e} (<= 1e-12)")


# 4 ------------------------------------------------------------------------

def test_04_doubling_equals_flow():
    rows = sample_doubling(nme_test_problem(), kmax=5)
    ok_rows = [r for r in rows if r.status == "ok"]
    worst = max(r.max_diff for r in ok_rows) if ok_rows else math.inf
    ok = len(ok_rows) == 5 and worst <= 1e-7
    assert record(4, "doubling iterates vs flow at t = 2^(k-1), NME n = 4", ok,
                  f"k = 1..{len(ok_rows)}, max blockwise rel diff {worst:.2e} (<= 1e-7)")


# 5 ------------------------------------------------------------------------

def test_05_scalar_blowup():
    H = np.array([[0.0, 1.0], [0.0, 0.0]])
    times = singular_times(H, [[-1.0]], (-2.0, 2.0)).values()
    ok = len(times) == 1 and abs(times[0] - 1.0) <= 1e-8
    assert record(5, "scalar Riccati blow-up", ok, f"singular times {times.tolist()}")


# 6 ------------------------------------------------------------------------

def test_06_single_d_block_orbit():
    t0 = time.perf_counter()
    inst = build_example(41, seed=0)
    pred = elementary_limit("d", inst.spec, inst.S, inst.W0)
    found = scan_singular(lambda s: pred.orbit.U_of_t(s)[0], 0.0, 1000.0, 40001).values()
    spacing = float(np.mean(np.diff(found)))
    scan = residual_scan(inst.flow(), pred, np.linspace(100.0, 1000.0, 20001))
    slope = scan.slope("W")
    dt = time.perf_counter() - t0
    ok = abs(spacing - 11.5248) <= 1e-3 and abs(slope + 1) <= 0.15 and dt < 60
    assert record(6, "single d block: blow-up spacing and decay", ok,
                  f"spacing {spacing:.6f} (11.5248 +- 1e-3) over {len(found)} zeros, "
                  f"slope {slope:.3f} (-1 +- 0.15), {dt:.1f} s (< 60 s)")


# 7 ------------------------------------------------------------------------

def test_07_quadratic_doubling():
    x = (3 + math.sqrt(5)) / 2
    trace = run_sda(NmeProblem([[1.0]], [[3.0]]))
    errs = [abs(r.X[0, 0] - x) for r in trace.records]
    final = errs[-1]
    # pairs whose successor is already at the rounding floor carry no rate information
    pairs = [(a, b) for a, b in zip(errs, errs[1:]) if a >= 1e-7]
    quad = all(b <= 10 * a * a for a, b in pairs)
    ok = trace.verdict == "converged" and final <= 1e-12 and quad
    assert record(7, "quadratic doubling, NME a = 1, q = 3", ok,
                  f"final err {final:.2e} (<= 1e-12), e_(k+1) <= 10 e_k^2 on {len(pairs)} steps: {quad}")


# 8 ------------------------------------------------------------------------

def test_08_linear_doubling():
    spec, S = linear_sda_instance()
    errs, cc, _ = sda_errors(spec, S, kmax=12)
    ratios = [errs[k] / errs[k - 1] for k in range(3, 9)]
    ok = cc.verdict == "linear" and all(0.4 <= r <= 0.6 for r in ratios)
    assert record(8, "linear doubling, size-one e blocks", ok,
                  "ratios k = 3..8: " + ", ".join(f"{r:.3f}" for r in ratios) + " (in [0.4, 0.6])")


# 9 ------------------------------------------------------------------------

def test_09_dual_singular_times():
    used, worst, mismatched = [], 0.0, []
    for seed in range(12):
        p = build_flow_problem(*random_flow_instance(seed))
        q, qs = flow_singular_times(p, (-3.0, 3.0), 2001)
        a, b = q.values(), qs.values()
        if len(a) == 0 and len(b) == 0:
            continue
        used.append(seed)
        if len(a) != len(b):
            mismatched.append(seed)
            continue
        worst = max(worst, float(np.max(np.abs(a - b))))
    ok = len(used) >= 3 and not mismatched and worst <= 1e-6
    assert record(9, "singular times of Q and Q* agree", ok,
                  f"seeds {used}, max diff {worst:.2e} (<= 1e-6), count mismatches {mismatched}")


# 10 -----------------------------------------------------------------------

POLE_MARGIN = 0.1


def test_10_invariant_corpus():
    worst = dict(symplectic=0.0, hermitian=0.0, projector=0.0, pair=0.0, radon=0.0)
    n_inst = n_ind1 = 0
    for seed in range(60):
        ind1 = seed % 2 == 1
        p = build_flow_problem(*random_flow_instance(seed, ind1=ind1))
        n_inst += 1
        n_ind1 += p.gen.split.ell > 0
        for t in (-2.0, -0.7, 0.5, 1.0, 2.0):
            worst["symplectic"] = max(worst["symplectic"], symplectic_residual(mat_exp(p.gen.H * t)))
        worst["projector"] = max(worst["projector"], projector_residual(p.pair, p.gen))
        poles = flow_singular_times(p, (-1.5, 2.5), 801)[0].values()
        for t in (-0.5, 0.25, 0.75, 1.5):
            smp = extended_X(p, t)
            if smp.blowup:
                continue
            X = smp.X
            for B in (X.X11, X.X22):
                worst["hermitian"] = max(worst["hermitian"], hermitian_residual(B) / max(1.0, fro(B)))
            _, res = flow_pair(p, t)
            worst["pair"] = max(worst["pair"], res["M_U0"], res["L_Uinf"], res["M_U1"])
            if poles.size and np.min(np.abs(poles - t)) < POLE_MARGIN:
                continue
            worst["radon"] = max(worst["radon"], radon_residual(p.Htilde, p.X1.X22, t - 1.0))
    limits = dict(symplectic=1e-9, hermitian=1e-9, projector=1e-8, pair=1e-7, radon=1e-5)
    ok = all(worst[k] <= limits[k] for k in limits) and n_inst >= 50 and n_ind1 >= 20
    detail = ", ".join(f"{k} {worst[k]:.1e} (<= {limits[k]:.0e})" for k in limits)
    assert record(10, f"invariant corpus, {n_inst} instances ({n_ind1} with ind 1)", ok, detail)


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for fn in tests:
        try:
            fn()
        except AssertionError:
            pass
    print("\n".join(report_lines()))
