"""Seeded instances for the long-time orbit experiments.

Two fixed canonical forms are provided: a single d block and a form made of
three d blocks.  The symplectic similarity and the initial state are drawn
from a seeded generator, so only structural features (periods, slopes,
where the peaks sit) are meaningful across seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import (CanonicalFlow, ElementaryPrediction, GeneralPrediction,
                          blowup_period, elementary_limit, general_limit, loglog_slope,
                          orbit_eval)
from .config import ExampleConfig
from .errors import PoleError, UsageError
from .flow import scan_singular
from .hjcf import CBlock, DBlock, JordanSpec
from .linalg import random_instance, smallest_singular
from .parallel import pmap

GAMMA_41, DELTA_41 = 7.8340, 7.2888
BLOCKS_42 = ((5.8868, 9.2031, 2, 1), (4.8968, 0.7449, 1, 1), (2.2337, 9.7818, 1, 0))


def spec_41(case: str = "d") -> JordanSpec:
    """One block of half size 4: a 2 and a 1 Jordan piece joined by a coupling coordinate."""
    if case == "d":
        return JordanSpec(d=[DBlock(GAMMA_41, DELTA_41, 1, 2, 1)])
    if case == "c":
        return JordanSpec(c=[CBlock(GAMMA_41, 1, 2, 1)])
    raise UsageError(f"case must be 'd' or 'c', got {case!r}")


def spec_42() -> JordanSpec:
    return JordanSpec(d=[DBlock(g, d, 1, s, t) for g, d, s, t in BLOCKS_42])


@dataclass(frozen=True)
class ExampleInstance:
    which: int
    spec: JordanSpec
    S: np.ndarray
    W0: np.ndarray

    def flow(self) -> CanonicalFlow:
        return CanonicalFlow(self.spec, self.S, self.W0)


def build_example(which: int, seed: int = 0, s_scale: float = 1.0, case: str = "d") -> ExampleInstance:
    """Seeded ``S`` (symplectic) and ``W0`` (Hermitian) for example ``41`` or ``42``."""
    if which == 41:
        spec = spec_41(case)
    elif which == 42:
        spec = spec_42()
    else:
        raise UsageError(f"which must be 41 or 42, got {which}")
    n = spec.n
    S = random_instance("symplectic", n, seed, scale=s_scale)
    W0 = random_instance("hermitian", n, seed + 1)
    return ExampleInstance(which, spec, S, W0)


def predict(inst: ExampleInstance):
    if inst.which == 41:
        x = "d" if inst.spec.d else "c"
        return elementary_limit(x, inst.spec, inst.S, inst.W0)
    return general_limit(inst.spec, inst.S, inst.W0, "+")


def target_U1(pred, t: float) -> np.ndarray:
    if isinstance(pred, ElementaryPrediction):
        return pred.orbit.U_of_t(t)[0]
    return pred.U_of_t(t)[0]


COLUMNS = ("t", "sigma_min_U1", "norm_W_inf", "norm_W", "norm_Qinv_inf", "norm_Qinv",
           "diff_W", "diff_Qinv", "near_pole")


def _targets(pred, t: float, rho: float):
    """``(W_inf, Qinv_inf, near_pole)``; ``None`` targets exactly at a pole."""
    if isinstance(pred, ElementaryPrediction):
        near = abs(pred.orbit.denominator(t)) <= rho
        try:
            W, Qi = orbit_eval(pred, t, 0.0)
        except PoleError:
            return None, None, True
        return W, Qi, near
    sm = pred.sigma_min_U1(t)
    if sm == 0.0:
        return None, None, True
    return pred.w_inf(t), pred.q_inv_inf(t), sm <= rho


def sample(inst: ExampleInstance, pred, t: float, rho: float) -> tuple:
    """One CSV row; non-finite entries always come with ``near_pole = 1``."""
    fl = inst.flow()
    Q, P = fl.Y(t)
    sm = smallest_singular(target_U1(pred, t))
    Wi, Qii, near = _targets(pred, t, rho)
    try:
        Qi = np.linalg.inv(Q)
        W = P @ Qi
        nW, nQ = np.linalg.norm(W), np.linalg.norm(Qi)
    except np.linalg.LinAlgError:
        W = Qi = None
        nW = nQ = math.inf
        near = True
    if Wi is None or W is None:
        nWi = nQi = dW = dQ = math.inf
        near = True
    else:
        nWi, nQi = np.linalg.norm(Wi), np.linalg.norm(Qii)
        dW, dQ = np.linalg.norm(W - Wi), np.linalg.norm(Qi - Qii)
    row = (t, sm, nWi, nW, nQi, nQ, dW, dQ)
    if not all(math.isfinite(v) for v in row):
        near = True
    return row + (int(near),)


def run_example(cfg: ExampleConfig, case: str = "d", threads: int | None = None) -> dict:
    """Evaluate the example on ``[-t_max, 0]`` and ``[0, t_max]``.

    Returns a dict with ``rows`` (CSV rows in time order) and ``summary``
    (footer entries).
    """
    inst = build_example(cfg.which, cfg.seed, cfg.s_scale, case)
    pred = predict(inst)
    neg = np.linspace(-cfg.t_max, 0.0, cfg.grid)
    pos = np.linspace(0.0, cfg.t_max, cfg.grid)[1:]
    ts = np.r_[neg, pos]
    rows = pmap(lambda t: sample(inst, pred, float(t), cfg.rho), ts, threads)
    summary = {"which": cfg.which, "seed": cfg.seed, "n": inst.spec.n, "rho": cfg.rho}
    arr = np.array([r[:8] for r in rows], dtype=float)
    away = np.array([r[8] == 0 for r in rows])
    t = arr[:, 0]
    for name, lo, hi in (("pos", 100.0, cfg.t_max), ("neg", -cfg.t_max, -100.0)):
        sel = away & (t >= lo) & (t <= hi)
        if sel.sum() >= 2 and cfg.t_max > 100.0:
            summary[f"slope_W_{name}"] = loglog_slope(t[sel], arr[sel, 6])
            summary[f"slope_Qinv_{name}"] = loglog_slope(t[sel], arr[sel, 7])
    if isinstance(pred, ElementaryPrediction) and pred.orbit.theta != 0.0:
        bp = blowup_period(pred)
        summary["period"] = bp.period
        summary["t_star"] = bp.t_star
        lo = max(cfg.t_max - 10 * bp.period, 0.0)
        st = scan_singular(lambda s: target_U1(pred, s), lo, cfg.t_max, 4001)
        v = st.values()
        if len(v) >= 2:
            summary["detected_spacing"] = float(np.mean(np.diff(v)))
    if isinstance(pred, ElementaryPrediction) and pred.orbit.theta == 0.0:
        summary["limit_norm"] = float(np.linalg.norm(pred.limit_plus))
    return {"rows": rows, "summary": summary, "instance": inst, "prediction": pred}


def peaks_colocated(rows, dip: float = 1e-3, window: int = 3) -> tuple[int, int]:
    """Count dips of ``sigma_min(U1)`` below ``dip`` and how many sit at a local peak of ``diff_W``.

    A dip is matched when ``diff_W`` has a local maximum within ``window``
    samples of the dip's minimum.
    """
    arr = np.array([r[:8] for r in rows], dtype=float)
    sm, dw = arr[:, 1], arr[:, 6]
    dw = np.where(np.isfinite(dw), dw, np.inf)
    dips = [i for i in range(1, len(sm) - 1)
            if sm[i] < dip and sm[i] <= sm[i - 1] and sm[i] <= sm[i + 1]]
    hit = 0
    for i in dips:
        lo, hi = max(i - window, 0), min(i + window + 1, len(dw))
        j = lo + int(np.argmax(dw[lo:hi]))
        ok_left = j == 0 or dw[j] >= dw[j - 1]
        ok_right = j == len(dw) - 1 or dw[j] >= dw[j + 1]
        if ok_left and ok_right:
            hit += 1
    return len(dips), hit


def random_flow_instance(seed: int, n: int = 2, ind1: bool = False, scale: float = 0.6):
    """Seeded pair class and Hermitian parameter for flow experiments.

    The class matrices are random symplectic matrices.  With ``ind1`` the
    coupling block ``X12`` is made rank deficient by one, which gives a
    pencil with one infinite and one zero eigenvalue pair.
    """
    from .linalg import herm, random_complex
    from .pairs import HermitianBlock, PairClass

    rng = np.random.default_rng(seed)
    S1 = random_instance("symplectic", n, 3 * seed + 1, scale)
    S2 = random_instance("symplectic", n, 3 * seed + 2, scale)
    X = herm(random_complex(rng, (2 * n, 2 * n)))
    if ind1:
        u, s, vh = np.linalg.svd(X[:n, n:])
        s[-1] = 0.0
        X12 = (u * s) @ vh
        X[:n, n:], X[n:, :n] = X12, X12.conj().T
    return PairClass(S1, S2), HermitianBlock.from_full(X)


def nme_test_problem(n: int = 4, seed: int = 3):
    """Well-conditioned NME ``X + A^H X^{-1} A = Q`` with ``A`` near ``0.45 I``."""
    from .linalg import herm, random_complex
    from .sda import NmeProblem

    rng = np.random.default_rng(seed)
    I = np.eye(n)
    A = 0.45 * (I + 0.3 * random_complex(rng, (n, n)))
    Q = herm(2 * I + 0.1 * random_complex(rng, (n, n)))
    return NmeProblem(A, Q)


def linear_sda_instance(seed: int = 0, scale: float = 0.5):
    """Two size-one e blocks and a seeded similarity; doubling converges linearly."""
    from .hjcf import EBlock

    spec = JordanSpec(e=[EBlock(1.0, 1, 1), EBlock(-0.6, -1, 1)])
    return spec, random_instance("symplectic", spec.n, seed, scale=scale)


def dare_from_spec(spec: JordanSpec, S):
    """DARE whose first doubling pair is ``(exp(H), I)`` with ``H = S J S^{-1}``.

    Returns ``(problem, X1)`` where ``X1`` is the class parameter of the pair.
    """
    from .asymptotics import hamiltonian_from_spec
    from .linalg import mat_exp
    from .pairs import PairClass, SymplecticPair, from_pair
    from .sda import dare_from_block

    H = hamiltonian_from_spec(spec, S)
    n = spec.n
    X1 = from_pair(SymplecticPair(mat_exp(H), np.eye(2 * n)), PairClass.dare(n))
    return dare_from_block(X1), X1


def sda_errors(spec: JordanSpec, S, kmax: int = 12, tol: float = 0.0):
    """Doubling errors ``||H_k + X22_limit||_F`` for ``k = 1..``, and the classification."""
    from .asymptotics import sda_class
    from .pairs import PairClass
    from .sda import run_sda

    problem, X1 = dare_from_spec(spec, S)
    cc = sda_class(spec, S, PairClass.dare(spec.n), X1)
    trace = run_sda(problem, tol=tol, kmax=kmax)
    errs = [float(np.linalg.norm(r.Y + cc.limit_X22)) for r in trace.records]
    return errs, cc, trace
