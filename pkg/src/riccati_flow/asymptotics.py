"""Long-time predictors for Riccati flows with a known canonical form.

Given a Hamiltonian ``H = S J S^{-1}`` with ``J`` built from a
:class:`~riccati_flow.hjcf.JordanSpec` and a symplectic ``S``, the flow
``W(t) = P(t) Q(t)^{-1}`` started at a Hermitian ``W0`` approaches either a
constant Hermitian matrix or a (quasi-)periodic orbit.  This module builds
those targets in closed form and classifies how fast the doubling
iteration converges on the same structure.

Notation used in the code: ``W1, W2`` are the two halves of
``S^{-1} [I; W0]``; a c or d block with half size ``k`` has a distinguished
last coordinate ``k - 1`` whose column ``u`` of the upper half of ``S`` and
column ``v`` of the lower half carry the oscillation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import AssumptionError, HypothesisError, PoleError, SpecError, UsageError
from .hjcf import CBlock, DBlock, EBlock, JordanSpec, RBlock, build_J, exp_J
from .linalg import as_matrix, herm, make_J, smallest_singular, solve_right

DEFAULT_RHO = 0.1


def _direction(direction) -> int:
    if direction in (1, "+", "plus", +1.0):
        return 1
    if direction in (-1, "-", "minus", -1.0):
        return -1
    raise UsageError(f"direction must be + or -, got {direction!r}")


def _require(M: np.ndarray, name: str, tol: float, cls=HypothesisError) -> float:
    s = smallest_singular(M) if M.size else 1.0
    scale = max(np.linalg.norm(M, 2), 1.0) if M.size else 1.0
    if s <= tol * scale:
        raise cls(f"{name} is singular (sigma_min={s:.3e})")
    return s


def symplectic_inverse(S) -> np.ndarray:
    """``S^{-1} = J^{-1} S^H J`` for a symplectic ``S``."""
    S = as_matrix(S)
    J = make_J(S.shape[0] // 2)
    return -J @ S.conj().T @ J


def hamiltonian_from_spec(spec: JordanSpec, S) -> np.ndarray:
    """``S J S^{-1}`` with the canonical ``J`` of ``spec``."""
    S = as_matrix(S)
    return S @ build_J(spec) @ symplectic_inverse(S)


def split_initial(S, W0) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(W1, W2)`` with ``[W1; W2] = S^{-1} [I; W0]``."""
    S, W0 = as_matrix(S), as_matrix(W0)
    n = W0.shape[0]
    if S.shape != (2 * n, 2 * n):
        raise UsageError(f"S has shape {S.shape}, expected {(2 * n, 2 * n)}")
    Y = symplectic_inverse(S) @ np.vstack([np.eye(n), W0])
    return Y[:n], Y[n:]


@dataclass(frozen=True)
class CanonicalFlow:
    """Dense oracle ``Y(t) = S exp(J t) S^{-1} [I; W0]`` using the closed-form exponential."""

    spec: JordanSpec
    S: np.ndarray
    W0: np.ndarray
    W1: np.ndarray = field(init=False, repr=False)
    W2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        S, W0 = as_matrix(self.S), as_matrix(self.W0)
        if S.shape[0] != 2 * self.spec.n:
            raise UsageError("S does not match the size of the canonical form")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "W0", W0)
        W1, W2 = split_initial(S, W0)
        object.__setattr__(self, "W1", W1)
        object.__setattr__(self, "W2", W2)

    @property
    def n(self) -> int:
        return self.spec.n

    def hamiltonian(self) -> np.ndarray:
        return hamiltonian_from_spec(self.spec, self.S)

    def Y(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        Y = self.S @ (exp_J(self.spec, t) @ np.vstack([self.W1, self.W2]))
        return Y[:n], Y[n:]

    def W(self, t: float) -> np.ndarray:
        Q, P = self.Y(t)
        return solve_right(P, Q)

    def Q_inv(self, t: float) -> np.ndarray:
        Q, _ = self.Y(t)
        return np.linalg.inv(Q)


# ---------------------------------------------------------- elementary case

def fg_constants(w22: float, beta: int, n1: int, n2: int) -> tuple[complex, complex, complex, complex]:
    """Oscillation weights ``(f_u, g_u, f_v, g_v)`` of a c or d block.

    ``n1`` and ``n2`` are the sizes of the two Jordan pieces and ``w22`` the
    real coupling entry of ``W1 W2^{-1}`` at the block's last coordinate.
    """
    s1, s2 = (-1) ** n1, (-1) ** n2
    ib = 1j * beta
    return (0.5 * s1 * (w22 - ib), 0.5 * s2 * (w22 + ib),
            0.5 * s1 * (ib * w22 + 1.0), 0.5 * s2 * (-ib * w22 + 1.0))


@dataclass(frozen=True)
class Orbit:
    """Data of the periodic target ``W_inf(t) = U2(t) U1(t)^{-1}``.

    For a c block ``theta == 0``, ``zeta1 == zeta2 == 0`` and ``U1, U2`` are
    the values at ``t = 0``, so the orbit degenerates to a constant.
    """

    U1: np.ndarray
    U2: np.ndarray
    zeta1: np.ndarray
    zeta2: np.ndarray
    gamma: float
    theta: float
    c: complex
    K_W: np.ndarray
    K_Q: np.ndarray
    fg: tuple
    head1: np.ndarray  # [U1 | u1], the upper half of the first n columns of S
    v1: np.ndarray
    u: tuple  # (u1, u2)
    v: tuple  # (v1, v2)
    gamma_delta: tuple

    def U_of_t(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Quasi-periodic ``(U1(t), U2(t))`` before factoring out ``e^{i gamma t}``."""
        f_u, g_u, f_v, g_v = self.fg
        g, d = self.gamma_delta
        eg, ed = np.exp(1j * g * t), np.exp(1j * d * t)
        a, b = f_u * eg + g_u * ed, f_v * eg + g_v * ed
        U1 = self.head1.copy()
        U2 = np.column_stack([self.U2[:, :-1], np.zeros(self.U2.shape[0], dtype=complex)])
        U1[:, -1] = a * self.u[0] + b * self.v[0]
        U2[:, -1] = a * self.u[1] + b * self.v[1]
        return U1, U2

    def denominator(self, t: float) -> complex:
        return 1.0 + np.exp(1j * self.theta * t) * self.c


@dataclass(frozen=True)
class ElementaryPrediction:
    """Closed-form long-time behaviour for a single canonical block.

    Attributes
    ----------
    case : {'r', 'e', 'c', 'd'}
    limit_plus, limit_minus : ndarray or None
        Constant Hermitian targets; ``None`` for ``'d'``, whose target is the
        periodic orbit.
    rate : str
        ``'exp'`` for ``exp(-2 Re(lam) t) t^(2(n-1))``, ``'1/t'`` otherwise.
    rate_exponent : float
        ``2 Re(lam)`` for case r, ``1`` otherwise.
    orbit : Orbit or None
        Present for cases c and d.
    """

    case: str
    n: int
    limit_plus: np.ndarray | None
    limit_minus: np.ndarray | None
    rate: str
    rate_exponent: float
    poly_degree: int
    orbit: Orbit | None
    W1: np.ndarray
    W2: np.ndarray


def _single_block(spec: JordanSpec, x: str):
    if x not in "recd" or len(x) != 1:
        raise UsageError(f"case must be one of r, e, c, d; got {x!r}")
    blocks = [(k, b) for k in "recd" for b in getattr(spec, k)]
    if len(blocks) != 1 or blocks[0][0] != x:
        raise SpecError(f"elementary_limit needs exactly one {x!r} block")
    return blocks[0][1]


def _cd_orbit(block, S: np.ndarray, W1: np.ndarray, W2: np.ndarray, tol: float) -> Orbit:
    n = W1.shape[0]
    _require(W2, "W2", tol)
    Wb = solve_right(W1, W2)
    w22 = float(np.real(Wb[-1, -1]))
    if isinstance(block, DBlock):
        g, d, m, k = block.gamma, block.delta, block.s, block.t
    else:
        g, d, m, k = block.eta, block.eta, block.m, block.n
    fg = fg_constants(w22, block.beta, m, k)
    f_u, g_u, f_v, g_v = fg
    u1, u2 = S[:n, n - 1], S[n:, n - 1]
    v1, v2 = S[:n, 2 * n - 1], S[n:, 2 * n - 1]
    A1, A2 = S[:n, :n - 1], S[n:, :n - 1]
    zn = np.zeros(n, dtype=complex)
    if isinstance(block, CBlock):
        U1 = np.column_stack([A1, (f_u + g_u) * u1 + (f_v + g_v) * v1])
        U2 = np.column_stack([A2, (f_u + g_u) * u2 + (f_v + g_v) * v2])
        _require(U1, "U1(0)", tol)
        U1inv = np.linalg.inv(U1)
        K_Q = np.outer(np.linalg.solve(W2, np.eye(n)[:, -1]), U1inv[-1])
        return Orbit(U1, U2, zn, zn.copy(), g, 0.0, 0.0 + 0j, np.zeros((n, n), complex), K_Q,
                     fg, S[:n, :n].copy(), v1, (u1, u2), (v1, v2), (g, d))
    U1 = np.column_stack([A1, f_u * u1 + f_v * v1])
    U2 = np.column_stack([A2, f_u * u2 + f_v * v2])
    z1, z2 = g_u * u1 + g_v * v1, g_u * u2 + g_v * v2
    _require(U1, "U1", tol)
    U1inv = np.linalg.inv(U1)
    c = complex(U1inv[-1] @ z1)
    K_W = np.outer(z2 - U2 @ (U1inv @ z1), U1inv[-1])
    K_Q = np.outer(np.linalg.solve(W2, np.eye(n)[:, -1]), U1inv[-1])
    return Orbit(U1, U2, z1, z2, g, d - g, c, K_W, K_Q, fg,
                 S[:n, :n].copy(), v1, (u1, u2), (v1, v2), (g, d))


def elementary_limit(x: str, spec: JordanSpec, S, W0, direction="+",
                     tol: Tolerances = DEFAULT_TOL) -> ElementaryPrediction:
    """Long-time target of the flow for a one-block canonical form.

    Parameters
    ----------
    x : {'r', 'e', 'c', 'd'}
        Kind of the single block of ``spec``.
    S : (2n, 2n) symplectic
    W0 : (n, n) Hermitian
    direction : {'+', '-'}
        Only matters for case r, where the two ends have different limits.

    Raises
    ------
    HypothesisError
        When a matrix that the formula inverts is singular.
    """
    sign = _direction(direction)
    block = _single_block(spec, x)
    S, W0 = as_matrix(S), as_matrix(W0)
    n = spec.n
    W1, W2 = split_initial(S, W0)
    rt = tol.rank_tol
    U1, U2, V1, V2 = S[:n, :n], S[n:, :n], S[:n, n:], S[n:, n:]
    if x == "r":
        lim = {}
        ok_plus = ok_minus = None
        try:
            _require(U1, "U1", rt)
            _require(W1, "W1", rt)
            lim[1] = herm(solve_right(U2, U1))
        except HypothesisError as exc:
            ok_plus = exc
        try:
            _require(V1, "V1", rt)
            _require(W2, "W2", rt)
            lim[-1] = herm(solve_right(V2, V1))
        except HypothesisError as exc:
            ok_minus = exc
        if sign not in lim:
            raise (ok_plus if sign == 1 else ok_minus)
        return ElementaryPrediction("r", n, lim.get(1), lim.get(-1), "exp",
                                    2.0 * float(np.real(block.lam)), 2 * (n - 1), None, W1, W2)
    if x == "e":
        _require(U1, "U1", rt)
        _require(W2, "W2", rt)
        L = solve_right(U2, U1)
        return ElementaryPrediction("e", n, L, L, "1/t", 1.0, 0, None, W1, W2)
    orbit = _cd_orbit(block, S, W1, W2, rt)
    if x == "d":
        # the orbit centre U2 U1^{-1} is not itself Hermitian; only W_inf(t) is
        return ElementaryPrediction(x, n, None, None, "1/t", 1.0, 0, orbit, W1, W2)
    L = herm(solve_right(orbit.U2, orbit.U1))
    return ElementaryPrediction(x, n, L, L, "1/t", 1.0, 0, orbit, W1, W2)


def orbit_eval(pred: ElementaryPrediction, t: float, rho: float = 1e-12):
    """``(W_inf(t), Q_inf^{-1}(t))`` on the periodic orbit.

    Raises
    ------
    PoleError
        If ``|1 + e^{i theta t} c| <= rho``.
    """
    o = pred.orbit
    if o is None:
        raise UsageError("prediction carries no orbit")
    den = o.denominator(t)
    if abs(den) <= rho:
        raise PoleError(f"pole of the orbit at t={t} (|denominator|={abs(den):.3e})")
    ph = np.exp(1j * o.theta * t)
    W = solve_right(o.U2, o.U1) + (ph / den) * o.K_W
    Qi = (np.exp(-1j * o.gamma * t) / den) * o.K_Q
    return W, Qi


@dataclass(frozen=True)
class BlowupPeriod:
    period: float
    t_star: float

    def times(self, t0: float, t1: float) -> np.ndarray:
        k0 = math.ceil((t0 - self.t_star) / self.period)
        k1 = math.floor((t1 - self.t_star) / self.period)
        return self.t_star + self.period * np.arange(k0, k1 + 1)


def blowup_period(pred: ElementaryPrediction, tol: Tolerances = DEFAULT_TOL) -> BlowupPeriod | None:
    """Period and phase of the singular times of ``U1(t)`` for a d block.

    Returns ``None`` when ``theta == 0``.
    """
    o = pred.orbit
    if o is None:
        raise UsageError("prediction carries no orbit")
    if o.theta == 0.0:
        return None
    _require(o.head1, "[U1|u1]", tol.rank_tol)
    z1 = np.linalg.solve(o.head1, o.v1)
    z12 = float(np.real(z1[-1]))
    f_u, g_u, f_v, g_v = o.fg
    a, b = f_u + z12 * f_v, g_u + z12 * g_v
    period = 2.0 * math.pi / abs(o.theta)
    # det U1(t) vanishes where a + b e^{i theta t} = 0
    t_star = (np.angle(-a / b) / o.theta) % period
    return BlowupPeriod(period, float(t_star))


def j_orthogonality_residual(pred: ElementaryPrediction, t: float = 0.0) -> float:
    """``||U(t)^H J U(t)||`` for the quasi-periodic basis of a c or d block."""
    U1, U2 = pred.orbit.U_of_t(t)
    U = np.vstack([U1, U2])
    return float(np.linalg.norm(U.conj().T @ make_J(pred.n) @ U))


# ------------------------------------------------------------- general case

@dataclass(frozen=True)
class CdBlockInfo:
    """Per-block constants of one c or d block in the general formula."""

    kind: str
    last: int  # global index of the coupling coordinate
    gamma: float
    delta: float
    beta: int
    m: int
    n: int
    fg: tuple


@dataclass(frozen=True)
class GeneralPrediction:
    """Target orbit ``W_inf(t) = U2(t) U1(t)^{-1}`` for an arbitrary canonical form.

    ``U1, U2`` are the constant parts; the last ``mu`` columns carry the
    time-dependent corrections returned by :meth:`delta_U`.  Columns are
    ordered as: r columns (from the upper half of ``S`` for ``+`` and the
    lower half for ``-``), e columns, the non-coupling c/d columns, then
    one coupling column per c/d block.
    """

    direction: int
    U1: np.ndarray
    U2: np.ndarray
    blocks: tuple
    Wcd: np.ndarray  # coupling entries of the normalized initial state, mu x mu
    Zcd: np.ndarray  # n x mu
    Uu: tuple  # (Uu1, Uu2), n x mu each
    Uv: tuple
    Z1: np.ndarray

    @property
    def mu(self) -> int:
        return len(self.blocks)

    @property
    def n(self) -> int:
        return self.U1.shape[0]

    @property
    def fg_constants(self) -> tuple:
        return tuple(b.fg for b in self.blocks)

    def sigmas(self, t: float) -> dict:
        """Diagonals of the oscillation factors at time ``t``."""
        sg = np.array([(-1) ** b.m * np.exp(1j * b.gamma * t) for b in self.blocks], dtype=complex)
        sd = np.array([(-1) ** b.n * np.exp(1j * b.delta * t) for b in self.blocks], dtype=complex)
        beta = np.array([b.beta for b in self.blocks], dtype=float)
        return {
            "w11": 0.5 * (sg + sd),
            "w12": -0.5j * beta * (sg - sd),
            "w21": 0.5j * beta * (sg - sd),
            "w22": 0.5 * (sg + sd),
            "gamma": sg,
            "delta": sd,
            "beta": beta,
        }

    def delta_U(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        if not self.mu:
            z = np.zeros((self.n, 0), dtype=complex)
            return z, z.copy()
        sg = self.sigmas(t)
        out = []
        for j in range(2):
            Uu, Uv = self.Uu[j], self.Uv[j]
            osc = (Uu * sg["w11"] + Uv * sg["w21"]) @ self.Wcd / sg["gamma"]
            rot = 0.5 * (Uv + 1j * Uu * sg["beta"]) * (sg["delta"] / sg["gamma"])
            out.append(osc + rot)
        return out[0], out[1]

    def U_of_t(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        U1, U2 = self.U1.copy(), self.U2.copy()
        if self.mu:
            d1, d2 = self.delta_U(t)
            U1[:, -self.mu:] += d1
            U2[:, -self.mu:] += d2
        return U1, U2

    def sigma_min_U1(self, t: float) -> float:
        return smallest_singular(self.U_of_t(t)[0])

    def w_inf(self, t: float) -> np.ndarray:
        U1, U2 = self.U_of_t(t)
        return solve_right(U2, U1)

    def q_inv_inf(self, t: float) -> np.ndarray:
        if not self.mu:
            return np.zeros((self.n, self.n), dtype=complex)
        U1, _ = self.U_of_t(t)
        rows = np.linalg.inv(U1)[-self.mu:]
        sg = self.sigmas(t)["gamma"]
        return (self.Zcd / sg) @ rows

    def constant_limit(self) -> np.ndarray | None:
        """``U2 U1^{-1}`` when the target does not oscillate (no d block)."""
        if any(b.kind == "d" for b in self.blocks):
            return None
        return self.w_inf(0.0)


def _normalizer(spec: JordanSpec, W1, W2, sign: int) -> np.ndarray:
    nr = sum(s.size for s in spec.slots if s.kind == "r")
    if sign > 0:
        Zinv = np.vstack([W1[:nr], W2[nr:]])
        name = "the normalizer for t -> +inf"
    else:
        Zinv = W2
        name = "W2 (normalizer for t -> -inf)"
    return Zinv, name


def general_limit(spec: JordanSpec, S, W0, direction="+",
                  tol: Tolerances = DEFAULT_TOL) -> GeneralPrediction:
    """Long-time target of the flow for an arbitrary canonical form.

    Raises
    ------
    AssumptionError
        If the initial-state normalizer for the requested end is singular.
    HypothesisError
        If the constant part ``U1`` is singular.
    """
    sign = _direction(direction)
    S, W0 = as_matrix(S), as_matrix(W0)
    n = spec.n
    W1, W2 = split_initial(S, W0)
    Zinv, name = _normalizer(spec, W1, W2, sign)
    _require(Zinv, name, tol.rank_tol, AssumptionError)
    Z1 = np.linalg.inv(Zinv)
    Wn = W1 @ Z1
    top, bot = S[:n], S[n:]
    head, infos, uu, vv = [], [], [], []
    for slot in spec.slots:
        b = spec.block(slot)
        cols = list(range(slot.offset, slot.offset + slot.size))
        if slot.kind == "r":
            head += [n + c for c in cols] if sign < 0 else cols
        elif slot.kind == "e":
            head += cols
        else:
            head += cols[:-1]
            last = cols[-1]
            uu.append(last)
            vv.append(n + last)
            if isinstance(b, DBlock):
                g, d, m, k = b.gamma, b.delta, b.s, b.t
            else:
                g, d, m, k = b.eta, b.eta, b.m, b.n
            infos.append(CdBlockInfo(slot.kind, last, g, d, b.beta, m, k, ()))
    idx = [b.last for b in infos]
    Wcd = Wn[np.ix_(idx, idx)]
    infos = [CdBlockInfo(b.kind, b.last, b.gamma, b.delta, b.beta, b.m, b.n,
                         fg_constants(float(np.real(Wcd[j, j])), b.beta, b.m, b.n))
             for j, b in enumerate(infos)]
    beta = np.array([b.beta for b in infos], dtype=float)
    Uu1, Uu2 = top[:, uu], bot[:, uu]
    Uv1, Uv2 = top[:, vv], bot[:, vv]
    U1 = np.column_stack([top[:, head], 0.5 * (Uv1 - 1j * Uu1 * beta)]) if infos else top[:, head]
    U2 = np.column_stack([bot[:, head], 0.5 * (Uv2 - 1j * Uu2 * beta)]) if infos else bot[:, head]
    _require(U1, f"U1 ({'+' if sign > 0 else '-'})", tol.rank_tol)
    return GeneralPrediction(sign, U1, U2, tuple(infos), Wcd, Z1[:, idx],
                             (Uu1, Uu2), (Uv1, Uv2), Z1)


# ------------------------------------------------------------ doubling rate

@dataclass(frozen=True)
class ConvergenceClass:
    """Predicted convergence regime of the doubling iteration.

    Attributes
    ----------
    verdict : {'quadratic', 'linear', 'oscillatory'}
    rate : float
        Smallest real part of the off-axis eigenvalues for ``quadratic``,
        ``0.5`` for ``linear`` and the number of c/d blocks for
        ``oscillatory`` (a bound on the rank of the periodic correction).
    limit_X22, limit_X11 : ndarray or None
        Constant parts of the targets of the ``X22`` and ``X11`` blocks.
    low_confidence : bool
        Set when the verdict came from eigenvalue clustering and the
        imaginary-axis structure was ambiguous.
    """

    verdict: str
    rate: float
    limit_X22: np.ndarray | None = None
    limit_X11: np.ndarray | None = None
    low_confidence: bool = False
    minus: GeneralPrediction | None = None
    plus: GeneralPrediction | None = None


def _verdict_from_spec(spec: JordanSpec) -> tuple[str, float]:
    if spec.c or spec.d:
        return "oscillatory", float(len(spec.c) + len(spec.d))
    if spec.e:
        return "linear", 0.5
    if not spec.r:
        raise SpecError("empty spec")
    return "quadratic", min(float(np.real(b.lam)) for b in spec.r)


def _jordan_sizes(H: np.ndarray, lam: complex, mult: int, rel: float) -> list:
    """Jordan block sizes at ``lam`` from rank drops of powers of ``H - lam I``."""
    m = H.shape[0]
    A = H - lam * np.eye(m)
    scale = max(np.linalg.norm(H, 2), 1.0)
    nul, P = [0], np.eye(m, dtype=complex)
    for j in range(1, mult + 1):
        P = P @ A
        s = np.linalg.svd(P, compute_uv=False)
        thr = rel * scale ** j
        nul.append(int(np.sum(s <= thr)))
    d = np.diff(nul)  # number of blocks of size >= j
    sizes = []
    for j in range(len(d)):
        nxt = d[j + 1] if j + 1 < len(d) else 0
        sizes += [j + 1] * int(max(d[j] - nxt, 0))
    return sizes


def _verdict_from_matrix(H: np.ndarray, tol: float = 1e-8, cluster: float = 1e-6):
    H = as_matrix(H)
    ev = np.linalg.eigvals(H)
    scale = max(np.linalg.norm(H, 2), 1.0)
    re_thr = 1e-5 * scale
    on_axis = ev[np.abs(ev.real) <= re_thr]
    off = ev[np.abs(ev.real) > re_thr]
    if on_axis.size == 0:
        return "quadratic", float(np.min(np.abs(off.real))), False
    # group imaginary eigenvalues; defective ones scatter like eps^(1/k)
    imag = np.sort(on_axis.imag)
    groups, cur = [], [imag[0]]
    for y in imag[1:]:
        if y - cur[-1] <= 1e-3 * scale:
            cur.append(y)
        else:
            groups.append(cur)
            cur = [y]
    groups.append(cur)
    low = False
    centers = [float(np.mean(g)) for g in groups]
    if len(centers) > 1 and np.min(np.diff(centers)) <= cluster * scale:
        low = True
    odd = False
    for g, c in zip(groups, centers):
        sizes = _jordan_sizes(H, 1j * c, len(g), 1e-7)
        if sum(sizes) != len(g):
            low = True
        if any(s % 2 for s in sizes):
            odd = True
    if odd:
        return "oscillatory", float(sum(1 for g in groups)), low
    return "linear", 0.5, low


def sda_class(source, S=None, cls=None, X1=None, tol: Tolerances = DEFAULT_TOL) -> ConvergenceClass:
    """Classify the doubling iteration and predict its limits.

    Parameters
    ----------
    source : JordanSpec, FlowGenerator or ndarray
        Canonical structure of the generator, or the generator itself
        (then only the verdict is returned and it relies on eigenvalue
        clustering).
    S : ndarray, optional
        Symplectic matrix with ``H = S J S^{-1}``; together with ``cls`` and
        ``X1`` it enables the limit predictions.
    cls : PairClass, optional
    X1 : HermitianBlock, optional
        Initial iterate in the class ``cls``.

    Raises
    ------
    AssumptionError
        If the initial state does not satisfy the genericity condition at
        either end.
    """
    if not isinstance(source, JordanSpec):
        H = source.H if hasattr(source, "H") else source
        verdict, rate, low = _verdict_from_matrix(H)
        return ConvergenceClass(verdict, rate, low_confidence=low)
    verdict, rate = _verdict_from_spec(source)
    if S is None or cls is None or X1 is None:
        return ConvergenceClass(verdict, rate)
    S = as_matrix(S)
    n = source.n
    J = make_J(n)
    S_minus = cls.S2 @ S
    S_plus = np.linalg.solve(J, cls.S1 @ S)
    minus = general_limit(source, S_minus, -X1.X22, "-", tol)
    plus = general_limit(source, S_plus, X1.X11, "+", tol)
    lim22 = lim11 = None
    if verdict != "oscillatory" or not any(True for _ in source.d):
        lim22 = -herm(minus.w_inf(0.0))
        lim11 = herm(plus.w_inf(0.0))
    return ConvergenceClass(verdict, rate, lim22, lim11, False, minus, plus)


# ----------------------------------------------------------- residual scans

def loglog_slope(ts, errs) -> float:
    """Least-squares slope of ``log err`` against ``log |t|``."""
    ts, errs = np.abs(np.asarray(ts, float)), np.asarray(errs, float)
    keep = (ts > 0) & (errs > 0) & np.isfinite(errs)
    if keep.sum() < 2:
        raise UsageError("need at least two positive samples for a slope fit")
    return float(np.polyfit(np.log(ts[keep]), np.log(errs[keep]), 1)[0])


@dataclass
class ResidualScan:
    """Columns ``t, err_W, err_Qinv, sigma_min_U1`` plus a pole mask."""

    t: np.ndarray
    err_W: np.ndarray
    err_Qinv: np.ndarray
    sigma_min_U1: np.ndarray
    away: np.ndarray

    def rows(self):
        for row in zip(self.t, self.err_W, self.err_Qinv, self.sigma_min_U1, self.away):
            yield tuple(float(v) for v in row[:4]) + (bool(row[4]),)

    def slope(self, which: str = "W") -> float:
        e = self.err_W if which == "W" else self.err_Qinv
        return loglog_slope(self.t[self.away], e[self.away])


def _residual_point(flow: CanonicalFlow, target, t: float, rho: float):
    Q, P = flow.Y(t)
    try:
        Qi = np.linalg.inv(Q)
    except np.linalg.LinAlgError:
        return (np.inf, np.inf, 0.0, False)
    W = P @ Qi
    if isinstance(target, ElementaryPrediction):
        o = target.orbit
        if o is None:
            Wi = target.limit_plus if t >= 0 else target.limit_minus
            return (float(np.linalg.norm(W - Wi)), float(np.linalg.norm(Qi)), 1.0, True)
        den = o.denominator(t)
        U1t, _ = o.U_of_t(t)
        sm = smallest_singular(U1t)
        if abs(den) <= 1e-14:
            return (np.inf, np.inf, sm, False)
        Wi, Qii = orbit_eval(target, t, 0.0)
        return (float(np.linalg.norm(W - Wi)), float(np.linalg.norm(Qi - Qii)), sm, abs(den) > rho)
    sm = target.sigma_min_U1(t)
    if sm <= 1e-14:
        return (np.inf, np.inf, sm, False)
    Wi, Qii = target.w_inf(t), target.q_inv_inf(t)
    return (float(np.linalg.norm(W - Wi)), float(np.linalg.norm(Qi - Qii)), sm, sm > rho)


def residual_scan(flow: CanonicalFlow, target, ts, rho: float = DEFAULT_RHO,
                  threads: int | None = None) -> ResidualScan:
    """Distance of the dense flow from its predicted target along ``ts``.

    For an elementary prediction ``away`` marks ``|1 + e^{i theta t} c| > rho``;
    for a general one it marks ``sigma_min(U1(t)) > rho``.
    """
    from .parallel import pmap

    ts = np.asarray(ts, float)
    res = pmap(lambda t: _residual_point(flow, target, float(t), rho), ts, threads)
    arr = np.array([r[:3] for r in res], dtype=float)
    away = np.array([r[3] for r in res], dtype=bool)
    return ResidualScan(ts, arr[:, 0], arr[:, 1], arr[:, 2], away)
