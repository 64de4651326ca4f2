"""Hamiltonian Jordan canonical forms and their closed-form exponentials.

A canonical form is described by four lists of blocks:

* ``r``: a Jordan block ``N_k(lambda)`` with ``Re(lambda) > 0`` paired with
  ``-N_k(lambda)^H``;
* ``e``: a Jordan block at ``i*alpha`` coupled through ``beta * e_k e_k^H``;
* ``c``: two Jordan blocks at ``i*eta`` joined by one coupling coordinate;
* ``d``: two Jordan blocks at ``i*gamma`` and ``i*delta`` joined by one
  coupling coordinate.

Blocks are laid out in the order r, e, c, d and, within a kind, in list
order.  Block ``j`` of half size ``k`` occupies rows ``off:off+k`` of the
top half and ``n+off:n+off+k`` of the bottom half.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import SpecError

SQ = math.sqrt(2.0) / 2.0
MAX_FACTORIAL = 20


def _fact(k: int) -> float:
    if k < 0:
        return math.inf
    if k > MAX_FACTORIAL:
        raise SpecError(f"factorial of {k} exceeds the supported range")
    return float(math.factorial(k))


@dataclass(frozen=True)
class RBlock:
    lam: complex
    size: int


@dataclass(frozen=True)
class EBlock:
    alpha: float
    beta: int
    size: int


@dataclass(frozen=True)
class CBlock:
    eta: float
    beta: int
    m: int
    n: int


@dataclass(frozen=True)
class DBlock:
    gamma: float
    delta: float
    beta: int
    s: int
    t: int


@dataclass(frozen=True)
class BlockSlot:
    """Position of one block: kind, index within its kind, offset and size."""

    kind: str
    index: int
    offset: int
    size: int


@dataclass(frozen=True)
class JordanSpec:
    """Symbolic Hamiltonian Jordan canonical form.

    Attributes
    ----------
    r, e, c, d : tuple
        Blocks of each kind, see the module docstring.
    """

    r: tuple = ()
    e: tuple = ()
    c: tuple = ()
    d: tuple = ()
    slots: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(self.r))
        object.__setattr__(self, "e", tuple(self.e))
        object.__setattr__(self, "c", tuple(self.c))
        object.__setattr__(self, "d", tuple(self.d))
        self.validate()
        slots, off = [], 0
        for kind in ("r", "e", "c", "d"):
            for j, b in enumerate(getattr(self, kind)):
                k = block_size(b)
                slots.append(BlockSlot(kind, j, off, k))
                off += k
        object.__setattr__(self, "slots", tuple(slots))

    def validate(self):
        def _beta(b):
            if b.beta not in (-1, 1):
                raise SpecError(f"beta must be +1 or -1, got {b.beta}")

        for b in self.r:
            if not complex(b.lam).real > 0:
                raise SpecError("r blocks need Re(lambda) > 0")
            if b.size < 1:
                raise SpecError("block size must be positive")
        for b in self.e:
            _beta(b)
            if b.size < 1:
                raise SpecError("block size must be positive")
        for b in self.c:
            _beta(b)
            if b.m < 0 or b.n < 0:
                raise SpecError("negative c block size")
        for b in self.d:
            _beta(b)
            if b.s < 0 or b.t < 0:
                raise SpecError("negative d block size")
            if b.gamma == b.delta:
                raise SpecError("d blocks need gamma != delta")
        if self.n == 0:
            raise SpecError("empty canonical form")

    @property
    def n(self) -> int:
        return sum(block_size(b) for b in (*self.r, *self.e, *self.c, *self.d))

    @property
    def mu(self) -> int:
        """Number of c and d blocks."""
        return len(self.c) + len(self.d)

    def cd_slots(self):
        return [s for s in self.slots if s.kind in ("c", "d")]

    def block(self, slot: BlockSlot):
        return getattr(self, slot.kind)[slot.index]

    def to_dict(self) -> dict:
        return {
            "r": [{"lambda": [complex(b.lam).real, complex(b.lam).imag], "size": b.size} for b in self.r],
            "e": [{"alpha": b.alpha, "beta": b.beta, "size": b.size} for b in self.e],
            "c": [{"eta": b.eta, "beta": b.beta, "m": b.m, "n": b.n} for b in self.c],
            "d": [
                {"gamma": b.gamma, "delta": b.delta, "beta": b.beta, "s": b.s, "t": b.t}
                for b in self.d
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "JordanSpec":
        try:
            r = [RBlock(complex(*b["lambda"]) if isinstance(b["lambda"], (list, tuple))
                        else complex(b["lambda"]), int(b["size"])) for b in data.get("r", [])]
            e = [EBlock(float(b["alpha"]), _int_beta(b["beta"]), int(b["size"])) for b in data.get("e", [])]
            c = [CBlock(float(b["eta"]), _int_beta(b["beta"]), int(b["m"]), int(b["n"])) for b in data.get("c", [])]
            d = [DBlock(float(b["gamma"]), float(b["delta"]), _int_beta(b["beta"]), int(b["s"]), int(b["t"]))
                 for b in data.get("d", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"malformed Jordan spec: {exc}") from exc
        return cls(r, e, c, d)


def _int_beta(x) -> int:
    if x not in (-1, 1):
        raise SpecError(f"beta must be +1 or -1, got {x}")
    return int(x)


def block_size(b) -> int:
    if isinstance(b, (RBlock, EBlock)):
        return b.size
    if isinstance(b, CBlock):
        return b.m + b.n + 1
    if isinstance(b, DBlock):
        return b.s + b.t + 1
    raise SpecError(f"unknown block {b!r}")


def jordan(k: int, lam: complex) -> np.ndarray:
    """``N_k(lam)``: ``lam`` on the diagonal, ones on the superdiagonal."""
    return lam * np.eye(k, dtype=complex) + np.eye(k, k, 1, dtype=complex)


def unit(k: int, i: int = -1) -> np.ndarray:
    v = np.zeros(k, dtype=complex)
    if k:
        v[i] = 1.0
    return v


def local_blocks(b):
    """Return ``(R, D, G)`` of a single block, each ``k x k``."""
    k = block_size(b)
    Z = np.zeros((k, k), dtype=complex)
    if isinstance(b, RBlock):
        return jordan(k, complex(b.lam)), Z, Z.copy()
    if isinstance(b, EBlock):
        D = Z.copy()
        D[-1, -1] = b.beta
        return jordan(k, 1j * b.alpha), D, Z.copy()
    if isinstance(b, CBlock):
        g, dl, m, n, last = b.eta, b.eta, b.m, b.n, 0.0
    else:
        g, dl, m, n = b.gamma, b.delta, b.s, b.t
        last = -1j * SQ * (b.gamma - b.delta)
    R = Z.copy()
    R[:m, :m] = jordan(m, 1j * g)
    R[m:m + n, m:m + n] = jordan(n, 1j * dl)
    R[:m, -1] = -SQ * unit(m)
    R[m:m + n, -1] = -SQ * unit(n)
    R[-1, -1] = 0.5j * (g + dl)
    K = Z.copy()
    K[:m, -1] = unit(m)
    K[m:m + n, -1] = -unit(n)
    K[-1, :m] = -unit(m)
    K[-1, m:m + n] = unit(n)
    K[-1, -1] = last
    D = SQ * 1j * b.beta * K
    G = Z.copy()
    if isinstance(b, DBlock):
        G[-1, -1] = -b.beta * (b.gamma - b.delta) / 2.0
    return R, D, G


def _embed(out: np.ndarray, n: int, off: int, local: np.ndarray):
    k = local.shape[0] // 2
    top = slice(off, off + k)
    bot = slice(n + off, n + off + k)
    out[top, top] = local[:k, :k]
    out[top, bot] = local[:k, k:]
    out[bot, top] = local[k:, :k]
    out[bot, bot] = local[k:, k:]


def build_J(spec: JordanSpec) -> np.ndarray:
    """Assemble the ``2n x 2n`` canonical Hamiltonian matrix."""
    n = spec.n
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    for slot in spec.slots:
        R, D, G = local_blocks(spec.block(slot))
        _embed(out, n, slot.offset, np.block([[R, D], [G, -R.conj().T]]))
    return out


# ---------------------------------------------------------------- stencils

def signed_flip(k: int) -> np.ndarray:
    """Anti-diagonal ``P_k`` with entries ``-1, (-1)^2, ..., (-1)^k``."""
    P = np.zeros((k, k), dtype=complex)
    for i in range(k):
        P[i, k - 1 - i] = (-1) ** (i + 1)
    return P


def exp_nilpotent(k: int, t: float) -> np.ndarray:
    """``exp(N_k t)`` for the nilpotent shift ``N_k``."""
    Phi = np.zeros((k, k), dtype=complex)
    for i in range(k):
        for j in range(i, k):
            Phi[i, j] = t ** (j - i) / _fact(j - i)
    return Phi


def gamma_matrix(k1: int, k2: int, t: float) -> np.ndarray:
    """Toeplitz matrix with entry ``(i, j) = t^(k1-i+j) / (k1-i+j)!``."""
    size = k2 - k1 + 1
    G = np.zeros((size, size), dtype=complex)
    for i in range(size):
        for j in range(size):
            p = k1 - i + j
            if p >= 0:
                G[i, j] = t ** p / _fact(p)
    return G


def phi_vec(k: int, t: float) -> np.ndarray:
    """``[t^k/k!, ..., t]``."""
    return np.array([t ** (k - i) / _fact(k - i) for i in range(k)], dtype=complex)


def psi_vec(k: int, t: float) -> np.ndarray:
    """``[t, ..., t^k/k!]``."""
    return np.array([t ** (i + 1) / _fact(i + 1) for i in range(k)], dtype=complex)


@dataclass(frozen=True)
class ExpStencil:
    """Building blocks of the structured exponential for one Jordan size."""

    k: int
    t: float
    Phi: np.ndarray
    PhiHat: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    GammaHat: np.ndarray
    P: np.ndarray


def stencil(k: int, t: float) -> ExpStencil:
    """Stencil arrays for size ``k`` at time ``t``.

    ``PhiHat = P^{-1} Phi P`` equals ``Phi^{-H}`` and
    ``GammaHat = Gamma_k^{2k-1} P``.
    """
    if k < 1:
        raise SpecError("stencil size must be positive")
    P = signed_flip(k)
    Phi = exp_nilpotent(k, t)
    PhiHat = P.conj().T @ Phi @ P
    return ExpStencil(k, t, Phi, PhiHat, phi_vec(k, t), psi_vec(k, t),
                      gamma_matrix(k, 2 * k - 1, t) @ P, P)


def _exp_r(b: RBlock, t: float) -> np.ndarray:
    k = b.size
    lam = complex(b.lam)
    st = stencil(k, t)
    Z = np.zeros((k, k), dtype=complex)
    return np.block([[np.exp(lam * t) * st.Phi, Z], [Z, np.exp(-np.conj(lam) * t) * st.PhiHat]])


def _exp_e(b: EBlock, t: float) -> np.ndarray:
    k = b.size
    st = stencil(k, t)
    ph = np.exp(1j * b.alpha * t)
    Z = np.zeros((k, k), dtype=complex)
    return np.block([[ph * st.Phi, -ph * b.beta * st.GammaHat], [Z, ph * st.PhiHat]])


def _exp_cd(g: float, dl: float, beta: int, m: int, n: int, t: float) -> np.ndarray:
    eg, ed = np.exp(1j * g * t), np.exp(1j * dl * t)
    k = m + n + 1
    Pm, Pn = signed_flip(m), signed_flip(n)

    def hat(Phi, P):
        return P.conj().T @ Phi @ P

    B = np.zeros((k, k), dtype=complex)
    D = np.zeros((k, k), dtype=complex)
    G = np.zeros((k, k), dtype=complex)
    E = np.zeros((k, k), dtype=complex)
    am, an = slice(0, m), slice(m, m + n)
    Phm, Phn = exp_nilpotent(m, t), exp_nilpotent(n, t)
    B[am, am] = eg * Phm
    B[an, an] = ed * Phn
    E[am, am] = eg * hat(Phm, Pm)
    E[an, an] = ed * hat(Phn, Pn)
    B[am, -1] = -SQ * eg * phi_vec(m, t)
    B[an, -1] = -SQ * ed * phi_vec(n, t)
    D[am, -1] = SQ * 1j * beta * eg * phi_vec(m, t)
    D[an, -1] = -SQ * 1j * beta * ed * phi_vec(n, t)
    D[-1, am] = SQ * 1j * beta * eg * (psi_vec(m, t) @ Pm)
    D[-1, an] = -SQ * 1j * beta * ed * (psi_vec(n, t) @ Pn)
    E[-1, am] = -SQ * eg * (psi_vec(m, t) @ Pm)
    E[-1, an] = -SQ * ed * (psi_vec(n, t) @ Pn)
    if m:
        D[am, am] = -1j * beta * eg * gamma_matrix(m + 1, 2 * m, t) @ Pm
    if n:
        D[an, an] = 1j * beta * ed * gamma_matrix(n + 1, 2 * n, t) @ Pn
    s, dff = eg + ed, eg - ed
    B[-1, -1] = 0.5 * s
    D[-1, -1] = -0.5j * beta * dff
    G[-1, -1] = 0.5j * beta * dff
    E[-1, -1] = 0.5 * s
    return np.block([[B, D], [G, E]])


def exp_block(b, t: float) -> np.ndarray:
    """Closed-form exponential of one local ``2k x 2k`` block."""
    if isinstance(b, RBlock):
        return _exp_r(b, t)
    if isinstance(b, EBlock):
        return _exp_e(b, t)
    if isinstance(b, CBlock):
        return _exp_cd(b.eta, b.eta, b.beta, b.m, b.n, t)
    return _exp_cd(b.gamma, b.delta, b.beta, b.s, b.t, t)


def exp_J(spec: JordanSpec, t: float) -> np.ndarray:
    """Structured ``exp(J t)`` assembled block by block."""
    n = spec.n
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    for slot in spec.slots:
        _embed(out, n, slot.offset, exp_block(spec.block(slot), t))
    return out


# ------------------------------------------------------ combinatorial checks

def _solve_exact(A: list, b: list) -> list:
    """Solve ``A x = b`` over the rationals by Gauss-Jordan elimination."""
    size = len(A)
    M = [list(r) + [v] for r, v in zip(A, b)]
    for c in range(size):
        p = next(r for r in range(c, size) if M[r][c] != 0)
        M[c], M[p] = M[p], M[c]
        piv = M[c][c]
        M[c] = [v / piv for v in M[c]]
        for r in range(size):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * q for a, q in zip(M[r], M[c])]
    return [M[r][-1] for r in range(size)]


def kappa_numeric(n: int, t: float, exact: bool = True) -> float:
    """Evaluate ``psi^H P (Gamma_{n+1}^{2n} P)^{-1} phi`` at time ``t``.

    The Toeplitz factor has condition number near ``1e17`` already at
    ``n = 8``, so by default the expression is evaluated in rational
    arithmetic at the exact binary value of ``t``.  ``exact=False`` uses a
    dense floating point solve instead.
    """
    if not exact:
        P = signed_flip(n)
        GammaHat = gamma_matrix(n + 1, 2 * n, t) @ P
        return float(np.real(psi_vec(n, t) @ P @ np.linalg.solve(GammaHat, phi_vec(n, t))))
    tq = Fraction(t)
    fac = math.factorial
    Gam = [[tq ** (n + 1 - i + j) / fac(n + 1 - i + j) for j in range(n)] for i in range(n)]
    phi = [tq ** (n - i) / fac(n - i) for i in range(n)]
    psi = [tq ** (i + 1) / fac(i + 1) for i in range(n)]
    # P_n cancels between psi^H P and (Gamma P)^{-1}
    x = _solve_exact(Gam, phi)
    return float(sum(a * b for a, b in zip(psi, x)))


def kappa(n: int) -> float:
    """Closed form of :func:`kappa_numeric`: 0 for even ``n``, 2 for odd ``n``."""
    if n < 1:
        raise SpecError("kappa needs n >= 1")
    return 0.0 if n % 2 == 0 else 2.0


def _check_digamma_range(k1: int, k2: int):
    if not (k1 == k2 and k1 >= 1) and not (0 < k1 < k2 <= 2 * k1):
        raise SpecError(f"invalid index pair ({k1}, {k2})")
    if k2 > MAX_FACTORIAL:
        raise SpecError("indices exceed the supported factorial range")


def digamma_matrix(k1: int, k2: int) -> list:
    """Exact entries ``1 / (k1 - i + j)!`` as fractions."""
    _check_digamma_range(k1, k2)
    size = k2 - k1 + 1
    return [[Fraction(1, math.factorial(k1 - i + j)) for j in range(size)] for i in range(size)]


def exact_det(rows: list) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    A = [list(r) for r in rows]
    size = len(A)
    det = Fraction(1)
    for c in range(size):
        p = next((r for r in range(c, size) if A[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, size):
            f = A[r][c] / A[c][c]
            if f:
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return det


def digamma_det_numeric(k1: int, k2: int) -> float:
    return float(exact_det(digamma_matrix(k1, k2)))


def digamma_det(k1: int, k2: int) -> float:
    """Closed-form determinant ``prod_{j<=k2-k1} j! / prod_{k1<=j<=k2} j!``."""
    _check_digamma_range(k1, k2)
    num = math.prod(math.factorial(j) for j in range(1, k2 - k1 + 1))
    den = math.prod(math.factorial(j) for j in range(k1, k2 + 1))
    return float(Fraction(num, den))


def random_spec(seed: int, max_blocks: int = 3, max_size: int = 4, max_n: int = 10) -> JordanSpec:
    """Seeded random canonical form with a bounded number of small blocks."""
    rng = np.random.default_rng(seed)
    while True:
        nb = int(rng.integers(1, max_blocks + 1))
        r, e, c, d = [], [], [], []
        for _ in range(nb):
            kind = rng.choice(["r", "e", "c", "d"])
            beta = int(rng.choice([-1, 1]))
            if kind == "r":
                lam = complex(rng.uniform(0.1, 1.0), rng.uniform(-2, 2))
                r.append(RBlock(lam, int(rng.integers(1, max_size + 1))))
            elif kind == "e":
                e.append(EBlock(float(rng.uniform(-2, 2)), beta, int(rng.integers(1, max_size + 1))))
            elif kind == "c":
                m = int(rng.integers(0, max_size))
                nn = int(rng.integers(0, max_size - m))
                c.append(CBlock(float(rng.uniform(-2, 2)), beta, m, nn))
            else:
                s = int(rng.integers(0, max_size))
                tt = int(rng.integers(0, max_size - s))
                g = float(rng.uniform(-2, 2))
                d.append(DBlock(g, g + float(rng.choice([-1, 1]) * rng.uniform(0.2, 2)), beta, s, tt))
        spec = JordanSpec(r, e, c, d)
        if spec.n <= max_n:
            return spec
