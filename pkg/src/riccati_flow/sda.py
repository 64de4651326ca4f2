"""Structure-preserving doubling for DAREs and NMEs, plus the Cayley map
that turns a CARE into a DARE.

DARE:  X = A^H X (I + G X)^{-1} A + H
NME:   X + A^H X^{-1} A = Q
CARE:  -X G X + A^H X + X A + H = 0
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import BreakdownError, DimensionError, SingularityError, UsageError
from .linalg import as_matrix, fro, herm, smallest_singular
from .pairs import HermitianBlock, PairClass, SymplecticPair, from_pair, to_pair


def _check_square(*mats):
    n = mats[0].shape[0]
    for m in mats:
        if m.shape != (n, n):
            raise DimensionError("problem matrices must be square and of equal size")


@dataclass(frozen=True)
class DareProblem:
    A: np.ndarray
    G: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        for k in ("A", "G", "H"):
            object.__setattr__(self, k, as_matrix(getattr(self, k)))
        _check_square(self.A, self.G, self.H)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def residual(self, X) -> float:
        """Relative residual of the DARE at ``X``."""
        n = self.n
        R = X - self.A.conj().T @ X @ np.linalg.solve(np.eye(n) + self.G @ X, self.A) - self.H
        return fro(R) / max(1.0, fro(X))


@dataclass(frozen=True)
class NmeProblem:
    A: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        for k in ("A", "Q"):
            object.__setattr__(self, k, as_matrix(getattr(self, k)))
        _check_square(self.A, self.Q)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def residual(self, X) -> float:
        R = X + self.A.conj().T @ np.linalg.solve(X, self.A) - self.Q
        return fro(R) / max(1.0, fro(X))


@dataclass(frozen=True)
class CareProblem:
    A: np.ndarray
    G: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        for k in ("A", "G", "H"):
            object.__setattr__(self, k, as_matrix(getattr(self, k)))
        _check_square(self.A, self.G, self.H)

    def residual(self, X) -> float:
        R = -X @ self.G @ X + self.A.conj().T @ X + X @ self.A + self.H
        return fro(R) / max(1.0, fro(X))


@dataclass(frozen=True)
class DareState:
    """Doubling iterate ``(A_k, G_k, H_k)``."""

    A: np.ndarray
    G: np.ndarray
    H: np.ndarray


@dataclass(frozen=True)
class NmeState:
    """Doubling iterate ``(A_k, Q_k, P_k)``."""

    A: np.ndarray
    Q: np.ndarray
    P: np.ndarray


def _guarded_solve(K: np.ndarray, B: np.ndarray, tol: Tolerances, what: str) -> np.ndarray:
    s = smallest_singular(K)
    if s <= tol.rank_tol * max(np.linalg.norm(K, 2), 1e-300):
        raise BreakdownError(f"{what} is numerically singular", s)
    return np.linalg.solve(K, B)


def sda1_step(A, G, H, tol: Tolerances = DEFAULT_TOL):
    """One DARE doubling step.

    Returns
    -------
    tuple
        ``(A A', G', H')`` with ``A' = A (I+GH)^{-1} A``,
        ``G' = G + A G (I+HG)^{-1} A^H`` and ``H' = H + A^H (I+HG)^{-1} H A``.

    Raises
    ------
    BreakdownError
        If ``I + G H`` is numerically singular.
    """
    A, G, H = as_matrix(A), as_matrix(G), as_matrix(H)
    I = np.eye(A.shape[0])
    A1 = A @ _guarded_solve(I + G @ H, A, tol, "I + G H")
    K = I + H @ G
    # (I+HG)^{-1} appears on both sides, so solve once with a stacked rhs
    Y = _guarded_solve(K, np.hstack([A.conj().T, H @ A]), tol, "I + H G")
    n = A.shape[0]
    G1 = herm(G + A @ G @ Y[:, :n])
    H1 = herm(H + A.conj().T @ Y[:, n:])
    return A1, G1, H1


def sda2_step(A, Q, P, tol: Tolerances = DEFAULT_TOL):
    """One NME doubling step.

    ``A' = A (Q-P)^{-1} A``, ``Q' = Q - A^H (Q-P)^{-1} A``,
    ``P' = P + A (Q-P)^{-1} A^H``.
    """
    A, Q, P = as_matrix(A), as_matrix(Q), as_matrix(P)
    n = A.shape[0]
    Y = _guarded_solve(Q - P, np.hstack([A, A.conj().T]), tol, "Q - P")
    A1 = A @ Y[:, :n]
    Q1 = herm(Q - A.conj().T @ Y[:, :n])
    P1 = herm(P + A @ Y[:, n:])
    return A1, Q1, P1


@dataclass
class IterateRecord:
    k: int
    A: np.ndarray
    X: np.ndarray  # G_k (DARE) or Q_k (NME)
    Y: np.ndarray  # H_k (DARE) or P_k (NME)
    normA: float
    normDelta: float
    residual: float


@dataclass
class SdaTrace:
    """Record of a doubling run; iterate ``k = 1`` is the initial state."""

    kind: str
    records: list = field(default_factory=list)
    verdict: str = "max_iter"
    breakdown_sigma: float | None = None

    @property
    def final(self) -> IterateRecord:
        return self.records[-1]

    def solution(self) -> np.ndarray:
        """Candidate solution: ``H_k`` for the DARE, ``Q_k`` for the NME."""
        r = self.final
        return r.Y if self.kind == "dare" else r.X

    def states(self):
        cls = DareState if self.kind == "dare" else NmeState
        return [cls(r.A, r.X, r.Y) for r in self.records]


def run_sda(problem, tol: float = 1e-13, kmax: int = 60,
            tols: Tolerances = DEFAULT_TOL) -> SdaTrace:
    """Iterate doubling steps until convergence, breakdown or ``kmax``.

    Convergence is declared when ``||A_k||_F <= tol`` or when the relative
    change of the solution iterate (``H_k`` or ``Q_k``) drops to ``tol``.
    """
    if kmax < 1:
        raise UsageError("kmax must be at least 1")
    if isinstance(problem, DareProblem):
        kind, A, X, Y = "dare", problem.A, herm(problem.G), herm(problem.H)
        step = sda1_step
        watch = lambda X, Y: Y
    elif isinstance(problem, NmeProblem):
        kind, A, X, Y = "nme", problem.A, herm(problem.Q), np.zeros_like(problem.Q)
        step = sda2_step
        watch = lambda X, Y: X
    else:
        raise UsageError("problem must be a DareProblem or NmeProblem")

    def resid(X, Y):
        try:
            return problem.residual(watch(X, Y))
        except np.linalg.LinAlgError:
            return float("inf")

    trace = SdaTrace(kind)
    trace.records.append(IterateRecord(1, A, X, Y, fro(A), float("nan"), resid(X, Y)))
    if fro(A) <= tol:
        trace.verdict = "converged"
        return trace
    for k in range(2, kmax + 1):
        try:
            A1, X1, Y1 = step(A, X, Y, tols)
        except BreakdownError as exc:
            trace.verdict = "breakdown"
            trace.breakdown_sigma = exc.sigma_min
            return trace
        d = fro(watch(X1, Y1) - watch(X, Y))
        nrm = fro(watch(X1, Y1))
        A, X, Y = A1, X1, Y1
        trace.records.append(IterateRecord(k, A, X, Y, fro(A), d, resid(X, Y)))
        if fro(A) <= tol or (nrm > 0 and d <= tol * nrm):
            trace.verdict = "converged"
            return trace
    return trace


def cayley(care: CareProblem, gamma: float = 1.0) -> DareProblem:
    """DARE sharing the stabilizing solution of a CARE.

    With ``Ag = A - gamma I``, ``W = Ag^H + H Ag^{-1} G`` and
    ``V = Ag + G Ag^{-H} H`` the DARE data are
    ``A' = I + 2 gamma V^{-1}``, ``G' = 2 gamma Ag^{-1} G W^{-1}`` and
    ``H' = 2 gamma W^{-1} H Ag^{-1}``.  For ``G = H = 0`` this reduces to
    ``A' = (A - gamma I)^{-1} (A + gamma I)``.

    Raises
    ------
    SingularityError
        When ``gamma`` hits the spectrum of ``A`` or ``V``, ``W`` are singular.
    """
    if not gamma > 0:
        raise UsageError("gamma must be positive")
    A, G, H = care.A, care.G, care.H
    n = A.shape[0]
    I = np.eye(n)
    Ag = A - gamma * I

    def inv(K, what):
        if smallest_singular(K) <= 1e-12 * max(1.0, np.linalg.norm(K, 2)):
            raise SingularityError(f"{what} is singular")
        return np.linalg.inv(K)

    Agi = inv(Ag, "A - gamma I")
    W = Ag.conj().T + H @ Agi @ G
    V = Ag + G @ Agi.conj().T @ H
    Wi, Vi = inv(W, "W"), inv(V, "V")
    A1 = I + 2 * gamma * Vi
    G1 = herm(2 * gamma * Agi @ G @ Wi)
    H1 = herm(2 * gamma * Wi @ H @ Agi)
    return DareProblem(A1, G1, H1)


def iterate_pair(state, cls: PairClass) -> SymplecticPair:
    """Pair of a doubling iterate.

    DARE iterates give ``([[A, 0], [-H, I]], [[I, G], [0, A^H]])`` in the
    ``(I, I)`` class; NME iterates give
    ``([[A, 0], [Q, -I]], [[-P, I], [A^H, 0]])`` in the ``(-I, J)`` class.
    """
    preset = cls.preset()
    n = state.A.shape[0]
    I, Z = np.eye(n), np.zeros((n, n))
    A = state.A
    if isinstance(state, DareState):
        if preset != "dare":
            raise UsageError("DARE iterates live in the (I, I) class")
        return SymplecticPair(np.block([[A, Z], [-state.H, I]]),
                              np.block([[I, state.G], [Z, A.conj().T]]))
    if isinstance(state, NmeState):
        if preset != "nme":
            raise UsageError("NME iterates live in the (-I, J) class")
        return SymplecticPair(np.block([[A, Z], [state.Q, -I]]),
                              np.block([[-state.P, I], [A.conj().T, Z]]))
    raise UsageError(f"unknown state {type(state).__name__}")


def state_block(state, cls: PairClass | None = None) -> HermitianBlock:
    """Hermitian parameter of an iterate within its preset class."""
    if isinstance(state, DareState):
        return HermitianBlock(state.G, state.A, state.A.conj().T, -state.H)
    n = state.A.shape[0]
    return from_pair(iterate_pair(state, cls or PairClass.nme(n)), cls or PairClass.nme(n))


def initial_state(problem):
    if isinstance(problem, DareProblem):
        return DareState(problem.A, problem.G, problem.H)
    return NmeState(problem.A, problem.Q, np.zeros_like(problem.Q))


def problem_class(problem) -> PairClass:
    n = problem.A.shape[0]
    return PairClass.dare(n) if isinstance(problem, DareProblem) else PairClass.nme(n)


def dare_from_block(X: HermitianBlock) -> DareProblem:
    """Read ``(A, G, H)`` off an ``(I, I)`` class parameter."""
    return DareProblem(X.X12, herm(X.X11), herm(-X.X22))
