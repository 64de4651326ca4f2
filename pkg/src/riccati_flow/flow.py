"""Riccati flows through linear propagation, continued across blow-ups.

For a Hamiltonian ``H`` and Hermitian ``W0`` let ``[Q; P] = exp(H t) [I; W0]``.
Whenever ``Q`` is invertible, ``W = P Q^{-1}`` solves the Riccati
differential equation driven by the blocks of ``H``.  The flow of a
symplectic pair is indexed so that ``t = 1`` is the initial pair and
``t = 2^(k-1)`` is the ``k``-th doubling iterate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import UsageError
from .linalg import fro, make_J, mat_exp, smallest_singular, solve_right
from .pairs import (FlowGenerator, HermitianBlock, PairClass, SymplecticPair,
                    build_generator, eigen_split, to_pair)
from .parallel import pmap


class BlowUp:
    """Marker for a time at which the flow has no finite value."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "BLOWUP"

    def __bool__(self):
        return False


BLOWUP = BlowUp()


def is_blowup(x) -> bool:
    return x is BLOWUP


def _flip(n: int) -> np.ndarray:
    return np.diag(np.r_[np.ones(n), -np.ones(n)]).astype(complex)


@dataclass(frozen=True)
class FlowProblem:
    """A pair class, an initial parameter and the derived generators.

    Attributes
    ----------
    H2 : numpy.ndarray
        ``S2 H S2^{-1} = [[A, S], [D, -A^H]]``, the coefficients of the
        Riccati equation for ``X22``.
    Htilde : numpy.ndarray
        ``-diag(I,-I) H2 diag(I,-I) = [[-A, S], [D, A^H]]``; propagating it
        from ``[I; X22(1)]`` gives ``X22``.
    Hstar : numpy.ndarray
        ``J^{-1} S1 H S1^{-1} J``; propagating it from ``[I; X11(1)]`` gives
        ``X11``.
    """

    cls: PairClass
    X1: HermitianBlock
    gen: FlowGenerator
    H2: np.ndarray
    Htilde: np.ndarray
    Hstar: np.ndarray
    tol: Tolerances = DEFAULT_TOL

    @property
    def n(self) -> int:
        return self.cls.n

    @property
    def pair(self) -> SymplecticPair:
        return to_pair(self.X1, self.cls)

    def riccati_coefficients(self):
        """``(A, S, D)`` read off ``H2``."""
        n = self.n
        return self.H2[:n, :n], self.H2[:n, n:], self.H2[n:, :n]


def _conjugations(cls: PairClass, H: np.ndarray):
    n = cls.n
    H2 = cls.S2 @ solve_right(H, cls.S2)
    F = _flip(n)
    Htilde = -F @ H2 @ F
    J = make_J(n)
    Hstar = -J @ cls.S1 @ solve_right(H, cls.S1) @ J
    return H2, Htilde, Hstar


def build_flow_problem(cls: PairClass, X1: HermitianBlock,
                       tol: Tolerances = DEFAULT_TOL) -> FlowProblem:
    """Set up the flow through the pair parameterized by ``X1``."""
    pair = to_pair(X1, cls)
    split = eigen_split(pair, tol)
    gen = build_generator(pair, split, tol)
    return FlowProblem(cls, X1, gen, *_conjugations(cls, gen.H), tol)


def flow_problem_from_generator(cls: PairClass, X1: HermitianBlock, H: np.ndarray,
                                tol: Tolerances = DEFAULT_TOL) -> FlowProblem:
    """Flow problem for a prescribed Hamiltonian generator.

    Used when the generator is constructed directly, e.g. from a canonical
    form.  The projectors are set to the identity.
    """
    from .pairs import EigenSplit

    n2 = 2 * cls.n
    I = np.eye(n2, dtype=complex)
    split = EigenSplit(I, np.zeros((n2, 0), complex), np.zeros((n2, 0), complex),
                       mat_exp(H), cls.n, 0)
    gen = FlowGenerator(H, H, I, I.copy(), split)
    return FlowProblem(cls, X1, gen, *_conjugations(cls, H), tol)


def propagate(H, W0, t: float, expH: np.ndarray | None = None):
    """``[Q; P] = exp(H t) [I; W0]``.

    Parameters
    ----------
    expH : numpy.ndarray, optional
        Precomputed ``exp(H t)``; ``H`` is then ignored.
    """
    W0 = np.atleast_2d(np.asarray(W0, dtype=complex))
    n = W0.shape[0]
    E = mat_exp(np.asarray(H, dtype=complex) * t) if expH is None else expH
    Y = E[:, :n] + E[:, n:] @ W0
    return Y[:n], Y[n:]


def _basis_sigma(Q: np.ndarray, P: np.ndarray) -> float:
    """``sigma_min`` of the upper block of an orthonormal basis of ``span [Q; P]``.

    This depends only on the subspace, so it neither calls a 1x1 ``Q``
    well conditioned by construction (as ``sigma_min(Q) / ||Q||`` would)
    nor flags a blow-up when the columns of a long propagation merely
    align with the dominant direction.
    """
    B = np.vstack([Q, P])
    if not np.all(np.isfinite(B)) or not np.any(B):
        return 0.0
    U = np.linalg.qr(B)[0]
    return smallest_singular(U[: Q.shape[0]])


def _is_singular(Q: np.ndarray, P: np.ndarray, tol: Tolerances) -> bool:
    return _basis_sigma(Q, P) <= tol.rank_tol


def rde_solve(H, W0, t: float, tol: Tolerances = DEFAULT_TOL, expH=None):
    """Riccati flow ``W(t) = P(t) Q(t)^{-1}`` or :data:`BLOWUP`."""
    Q, P = propagate(H, W0, t, expH)
    if _is_singular(Q, P, tol):
        return BLOWUP
    return solve_right(P, Q)


def riccati_rhs(H, W) -> np.ndarray:
    """``H21 + H22 W - W H11 - W H12 W``, the derivative of ``P Q^{-1}``."""
    H = np.asarray(H, dtype=complex)
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    n = W.shape[0]
    H11, H12, H21, H22 = H[:n, :n], H[:n, n:], H[n:, :n], H[n:, n:]
    return H21 + H22 @ W - W @ H11 - W @ H12 @ W


def radon_residual(H, W0, t: float, h: float = 1e-4) -> float:
    """Relative mismatch between a central difference of ``W`` and the Riccati right side.

    Returns ``inf`` when ``Q`` is singular at any of the three stencil times.
    """
    Wm, W, Wp = (rde_solve(H, W0, s) for s in (t - h, t, t + h))
    if any(is_blowup(x) for x in (Wm, W, Wp)):
        return math.inf
    fd = (Wp - Wm) / (2 * h)
    rhs = riccati_rhs(H, W)
    return fro(fd - rhs) / max(fro(rhs), 1.0)


@dataclass
class FlowSample:
    """State of the flow at one time ``t``."""

    t: float
    Q: np.ndarray
    P: np.ndarray
    Qstar: np.ndarray
    Pstar: np.ndarray
    X: object  # HermitianBlock or BLOWUP
    sigma_min_Q: float
    sigma_min_Qstar: float

    @property
    def blowup(self) -> bool:
        return is_blowup(self.X)


def extended_X(problem: FlowProblem, t: float) -> FlowSample:
    """Parameter ``X(t)`` of the flow through the initial pair.

    ``X22`` and ``X12`` come from propagating ``Htilde`` from
    ``[I; X22(1)]`` over ``t - 1``; ``X11`` and ``X21`` come from
    propagating ``Hstar`` from ``[I; X11(1)]`` over ``t - 1``.
    """
    X1 = problem.X1
    s = t - 1.0
    Q, P = propagate(problem.Htilde, X1.X22, s)
    Qs, Ps = propagate(problem.Hstar, X1.X11, s)
    sq, sqs = _basis_sigma(Q, P), _basis_sigma(Qs, Ps)
    if sq <= problem.tol.rank_tol or sqs <= problem.tol.rank_tol:
        X = BLOWUP
    else:
        X = HermitianBlock(solve_right(Ps, Qs), solve_right(X1.X12, Q),
                           solve_right(X1.X21, Qs), solve_right(P, Q))
    return FlowSample(t, Q, P, Qs, Ps, X, sq, sqs)


def flow_pair(problem: FlowProblem, t: float):
    """Pair at flow time ``t`` and its relative deflation residuals.

    Returns
    -------
    pair : SymplecticPair or BLOWUP
    residuals : dict
        ``M U0``, ``L Uinf`` and ``M U1 - L U1 exp(Hhat t)``, each divided by
        the matching operand norms.
    """
    smp = extended_X(problem, t)
    if smp.blowup:
        return BLOWUP, {}
    pair = to_pair(smp.X, problem.cls)
    sp = problem.gen.split
    E = problem.gen.exp_reduced(t)
    nM, nL = max(fro(pair.M), 1e-300), max(fro(pair.L), 1e-300)
    res = {
        "M_U0": fro(pair.M @ sp.U0) / (nM * max(fro(sp.U0), 1e-300)) if sp.ell else 0.0,
        "L_Uinf": fro(pair.L @ sp.Uinf) / (nL * max(fro(sp.Uinf), 1e-300)) if sp.ell else 0.0,
        "M_U1": fro(pair.M @ sp.U1 - pair.L @ sp.U1 @ E)
        / (max(nM, nL * fro(E)) * max(fro(sp.U1), 1e-300)) if sp.nhat else 0.0,
    }
    res["symplectic"] = pair.residual()
    return pair, res


class NoSolution:
    """Returned when the linear characterization has a singular system."""

    def __init__(self, sigma_min: float):
        self.sigma_min = sigma_min

    def __repr__(self):
        return f"NoSolution(sigma_min={self.sigma_min:.3e})"

    def __bool__(self):
        return False


def crosscheck_linear_system(problem: FlowProblem, t: float, rcond: float = 1e-12):
    """Solve the deflation relations of the flow directly for ``X(t)``.

    With ``V1 = S1 U`` and ``V2 = S2 U`` split into top and bottom halves,
    ``F = I (+) E11`` and ``G = exp(Hhat t) (+) E22`` the parameter solves
    ``X [-V1_bot G; V2_top F] = [V1_top G; -V2_bot F]``.

    ``rcond`` is the relative singular value below which the system counts
    as singular.  Singular times refined to ``refine_tol`` leave a residual
    smallest singular value of roughly that size, so callers probing a
    detected blow-up should pass a matching ``rcond``.

    Returns
    -------
    HermitianBlock or NoSolution
    """
    n = problem.n
    sp = problem.gen.split
    U = sp.U
    V1 = problem.cls.S1 @ U
    V2 = problem.cls.S2 @ U
    ell = sp.ell
    E11 = np.diag(np.r_[np.ones(ell), np.zeros(ell)])
    E22 = np.diag(np.r_[np.zeros(ell), np.ones(ell)])
    eH = problem.gen.exp_reduced(t)
    from scipy.linalg import block_diag

    F = block_diag(np.eye(2 * sp.nhat), E11)
    G = block_diag(eH, E22)
    coef = np.vstack([-V1[n:] @ G, V2[:n] @ F])
    rhs = np.vstack([V1[:n] @ G, -V2[n:] @ F])
    s = smallest_singular(coef)
    if s <= rcond * max(np.linalg.norm(coef, 2), 1e-300):
        return NoSolution(s)
    return HermitianBlock.from_full(solve_right(rhs, coef))


# ------------------------------------------------------------ singular times

@dataclass
class SingularTime:
    t: float
    bracket: tuple
    sigma_min: float


@dataclass
class SingularTimeList:
    """Refined zeros of ``sigma_min(Q(t))`` in increasing order."""

    times: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def values(self) -> np.ndarray:
        return np.array([s.t for s in self.times])

    def __len__(self):
        return len(self.times)


def golden_min(f, a: float, b: float, tol: float = 1e-8):
    """Golden-section minimization of a unimodal ``f`` on ``[a, b]``."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def scaled_sigma_min(value) -> float:
    """``sigma_min(Q) / scale`` for ``value = Q`` or ``value = (Q, scale)``."""
    if isinstance(value, tuple):
        Q, scale = value
    else:
        Q, scale = value, 1.0
    return smallest_singular(Q) / scale if scale > 0 else 0.0


def _basis_scaled(Q: np.ndarray, P: np.ndarray):
    return Q, float(np.linalg.norm(np.vstack([Q, P]), 2))


def scan_singular(qfun, t0: float, t1: float, grid: int = 2001,
                  refine_tol: float = 1e-8, threads: int | None = None) -> SingularTimeList:
    """Locate the times where the matrix ``qfun(t)`` is singular.

    ``qfun`` returns either a matrix or a ``(matrix, scale)`` tuple, and
    ``sigma_min / scale`` is sampled on a uniform grid.  Each interior
    local minimum is refined by golden-section search on the two adjacent
    cells and kept when the refined value is consistent with a simple zero:
    it must not exceed ten times the local slope times ``refine_tol``.
    """
    if not t1 > t0 or grid < 2:
        raise UsageError("need t1 > t0 and grid >= 2")
    ts = np.linspace(t0, t1, grid)
    h = ts[1] - ts[0]
    f = lambda t: scaled_sigma_min(qfun(t))
    vals = np.array(pmap(f, ts, threads))
    out = SingularTimeList()
    for i in range(len(ts)):
        lo, hi = max(i - 1, 0), min(i + 1, len(ts) - 1)
        if vals[i] > vals[lo] or vals[i] > vals[hi]:
            continue
        if i in (0, len(ts) - 1) and vals[i] > 0:
            continue
        if 0 < i and vals[i] == vals[i - 1] and out.times and abs(out.times[-1].t - ts[i]) < 2 * h:
            continue
        slope = (max(vals[lo], vals[hi]) - vals[i]) / h
        a, b = ts[lo], ts[hi]
        t_hat, v = golden_min(f, a, b, refine_tol)
        if v <= 10.0 * slope * refine_tol + 1e-14:
            if out.times and abs(out.times[-1].t - t_hat) <= refine_tol * 10:
                continue
            out.times.append(SingularTime(float(t_hat), (float(a), float(b)), float(v)))
        elif v < 1e-3 and vals[i] < 1e-2 and slope * h < 10 * vals[i]:
            out.warnings.append(f"shallow dip near t={ts[i]:.6g} (value {v:.3e}); "
                                "two zeros may share one cell")
    return out


def singular_times(H, W0, t_range=(-2.0, 2.0), grid: int = 2001,
                   refine_tol: float = 1e-8) -> SingularTimeList:
    """Blow-up times of the Riccati flow ``W(t)`` started at ``W0``."""
    H = np.asarray(H, dtype=complex)
    W0 = np.atleast_2d(np.asarray(W0, dtype=complex))
    return scan_singular(lambda t: _basis_scaled(*propagate(H, W0, t)), t_range[0], t_range[1], grid, refine_tol)


def flow_singular_times(problem: FlowProblem, t_range=(-3.0, 3.0), grid: int = 2001,
                        refine_tol: float = 1e-8):
    """Singular times, in flow time, of the ``X22`` and ``X11`` propagators."""
    X1 = problem.X1
    q = lambda t: _basis_scaled(*propagate(problem.Htilde, X1.X22, t - 1.0))
    qs = lambda t: _basis_scaled(*propagate(problem.Hstar, X1.X11, t - 1.0))
    return (scan_singular(q, *t_range, grid, refine_tol),
            scan_singular(qs, *t_range, grid, refine_tol))


# -------------------------------------------------------------- doubling

@dataclass
class DoublingRow:
    k: int
    t: float
    diffs: dict
    status: str = "ok"

    @property
    def max_diff(self) -> float:
        return max(self.diffs.values()) if self.diffs else float("nan")


def sample_doubling(problem, kmax: int = 5, tols: Tolerances = DEFAULT_TOL) -> list:
    """Compare doubling iterates with the flow at ``t = 2^(k-1)``.

    Parameters
    ----------
    problem : DareProblem or NmeProblem

    Returns
    -------
    list of DoublingRow
        Blockwise relative differences ``||X^k_ij - X_ij(t)|| / ||X^k_ij||``.
    """
    from .errors import BreakdownError, NotInClassError
    from .sda import (initial_state, problem_class, sda1_step, sda2_step,
                      state_block, DareState, NmeState)

    cls = problem_class(problem)
    state = initial_state(problem)
    fp = build_flow_problem(cls, state_block(state, cls), tols)
    rows = []
    for k in range(1, kmax + 1):
        t = float(2 ** (k - 1))
        if k > 1:
            try:
                if isinstance(state, DareState):
                    state = DareState(*sda1_step(state.A, state.G, state.H, tols))
                else:
                    state = NmeState(*sda2_step(state.A, state.Q, state.P, tols))
            except BreakdownError:
                rows.append(DoublingRow(k, t, {}, "breakdown"))
                break
        try:
            Xk = state_block(state, cls)
        except NotInClassError:
            rows.append(DoublingRow(k, t, {}, "not_in_class"))
            continue
        smp = extended_X(fp, t)
        if smp.blowup:
            rows.append(DoublingRow(k, t, {}, "blowup"))
            continue
        diffs = {}
        for name, blk in Xk.blocks().items():
            diffs[name] = fro(blk - smp.X.blocks()[name]) / max(fro(blk), 1e-300)
        rows.append(DoublingRow(k, t, diffs))
    return rows
