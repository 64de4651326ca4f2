"""Symplectic pairs, their parameterization by Hermitian matrices, and the
Hamiltonian generator of a pair.

A pair ``(M, L)`` of ``2n x 2n`` matrices is symplectic when
``M J M^H = L J L^H``.  Given two symplectic matrices ``S1, S2`` every
Hermitian ``X = [[X11, X12], [X21, X22]]`` yields the pair

    M = [[X12, 0], [X22, I]] S2,    L = [[I, X11], [0, X21]] S1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .config import DEFAULT_TOL, Tolerances
from .errors import (DimensionError, IndexTooHighError, NotInClassError,
                     NotRegularError, NumericalBreakdown)
from .linalg import (as_matrix, congruence_to_J, fro, herm, J_of, make_J,
                     mat_exp, mat_log, null_space, smallest_singular)


@dataclass(frozen=True)
class PairClass:
    """Class of pairs generated by two symplectic matrices."""

    S1: np.ndarray
    S2: np.ndarray

    @property
    def n(self) -> int:
        return self.S1.shape[0] // 2

    @classmethod
    def dare(cls, n: int) -> "PairClass":
        """``(I, I)``: the class holding the DARE doubling iterates."""
        I = np.eye(2 * n, dtype=complex)
        return cls(I, I.copy())

    @classmethod
    def nme(cls, n: int) -> "PairClass":
        """``(-I, J)``: the class holding the NME doubling iterates."""
        return cls(-np.eye(2 * n, dtype=complex), make_J(n))

    def preset(self) -> str | None:
        """``'dare'``, ``'nme'`` or ``None`` for a general class."""
        n = self.n
        if np.array_equal(self.S1, np.eye(2 * n)) and np.array_equal(self.S2, np.eye(2 * n)):
            return "dare"
        if np.array_equal(self.S1, -np.eye(2 * n)) and np.array_equal(self.S2, make_J(n)):
            return "nme"
        return None


@dataclass(frozen=True)
class HermitianBlock:
    """``X = [[X11, X12], [X21, X22]]`` stored blockwise."""

    X11: np.ndarray
    X12: np.ndarray
    X21: np.ndarray
    X22: np.ndarray

    @property
    def n(self) -> int:
        return self.X11.shape[0]

    def full(self) -> np.ndarray:
        return np.block([[self.X11, self.X12], [self.X21, self.X22]])

    @classmethod
    def from_full(cls, X) -> "HermitianBlock":
        X = as_matrix(X)
        if X.shape[0] != X.shape[1] or X.shape[0] % 2:
            raise DimensionError("X must be square of even size")
        n = X.shape[0] // 2
        return cls(X[:n, :n].copy(), X[:n, n:].copy(), X[n:, :n].copy(), X[n:, n:].copy())

    def blocks(self):
        return {"X11": self.X11, "X12": self.X12, "X21": self.X21, "X22": self.X22}


@dataclass(frozen=True)
class SymplecticPair:
    """Matrix pair ``(M, L)``; the pencil is ``M - lambda L``."""

    M: np.ndarray
    L: np.ndarray

    def __post_init__(self):
        M, L = as_matrix(self.M), as_matrix(self.L)
        if M.shape != L.shape or M.shape[0] != M.shape[1] or M.shape[0] % 2:
            raise DimensionError("M and L must be square, even sized and equal in shape")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "L", L)

    @property
    def n(self) -> int:
        return self.M.shape[0] // 2

    def residual(self) -> float:
        """Relative residual of ``M J M^H = L J L^H``."""
        J = make_J(self.n)
        scale = max(1.0, fro(self.M) ** 2 + fro(self.L) ** 2)
        return fro(self.M @ J @ self.M.conj().T - self.L @ J @ self.L.conj().T) / scale


def to_pair(X: HermitianBlock, cls: PairClass) -> SymplecticPair:
    """Pair of class ``cls`` parameterized by ``X``."""
    n = cls.n
    if X.n != n:
        raise DimensionError(f"X has half size {X.n}, class has {n}")
    I, Z = np.eye(n), np.zeros((n, n))
    M = np.block([[X.X12, Z], [X.X22, I]]) @ cls.S2
    L = np.block([[I, X.X11], [Z, X.X21]]) @ cls.S1
    return SymplecticPair(M, L)


def from_pair(pair: SymplecticPair, cls: PairClass, tol: Tolerances = DEFAULT_TOL) -> HermitianBlock:
    """Recover the parameter ``X`` of a pair left-equivalent to a class member.

    Raises
    ------
    NotInClassError
        If the normalizing factor does not exist.
    """
    n = cls.n
    if pair.n != n:
        raise DimensionError("pair and class sizes differ")
    LS = np.linalg.solve(cls.S1.T, pair.L.T).T
    MS = np.linalg.solve(cls.S2.T, pair.M.T).T
    Rinv = np.hstack([LS[:, :n], MS[:, n:]])
    if smallest_singular(Rinv) <= tol.rank_tol * np.linalg.norm(Rinv, 2):
        raise NotInClassError("pair cannot be normalized in this class")
    top = np.linalg.solve(Rinv, MS[:, :n])
    right = np.linalg.solve(Rinv, LS[:, n:])
    return HermitianBlock(right[:n], top[:n], right[n:], top[n:])


@dataclass(frozen=True)
class PairClassification:
    regular: bool
    ind_inf: object  # 0, 1 or "too_high"


_PROBES = np.exp(2j * np.pi * np.array([0.11, 0.29, 0.47, 0.68, 0.89])) * np.array([0.7, 1.3, 0.9, 1.6, 1.1])


def classify(pair: SymplecticPair, tol: Tolerances = DEFAULT_TOL) -> PairClassification:
    """Regularity and index at infinity of the pencil ``M - lambda L``.

    Regularity is probed at five fixed points off the real axis.  The index
    is at most one exactly when ``[L, M N]`` has full row rank, ``N`` being a
    kernel basis of ``L``; for a regular pencil this is the same as the
    count of infinite eigenvalues matching ``dim ker L``.
    """
    M, L = pair.M, pair.L
    scale = np.linalg.norm(M, 2) + np.linalg.norm(L, 2)
    regular = any(
        smallest_singular(M - lam * L) > tol.rank_tol * (1 + abs(lam)) * max(scale, 1e-300)
        for lam in _PROBES
    )
    N = null_space(L, tol.rank_tol)
    if N.shape[1] == 0:
        return PairClassification(regular, 0)
    stacked = np.hstack([L, M @ N])
    s = np.linalg.svd(stacked, compute_uv=False)
    full = s[-1] > tol.rank_tol * s[0] if stacked.shape[0] <= stacked.shape[1] else False
    if full:
        ab = sla.eigvals(M, L, homogeneous_eigvals=True)
        alpha, beta = np.abs(ab[0]), np.abs(ab[1])
        n_inf = int(np.sum(alpha >= tol.eig_inf_tol * beta))
        if n_inf != N.shape[1]:
            full = False
    return PairClassification(regular, 1 if full else "too_high")


@dataclass(frozen=True)
class EigenSplit:
    """Bases of the zero, infinite and finite-nonzero deflating subspaces.

    ``U = [U1 | U0, Uinf]`` satisfies ``U^H J U = J_nhat (+) J_ell``,
    ``M U0 = 0``, ``L Uinf = 0`` and ``M U1 = L U1 Shat``.
    """

    U1: np.ndarray
    U0: np.ndarray
    Uinf: np.ndarray
    Shat: np.ndarray
    nhat: int
    ell: int
    residuals: dict = field(default_factory=dict)

    @property
    def U(self) -> np.ndarray:
        return np.hstack([self.U1, self.U0, self.Uinf])

    @property
    def gram(self) -> np.ndarray:
        """``J_nhat (+) J_ell``."""
        return sla.block_diag(J_of(2 * self.nhat), J_of(2 * self.ell)).astype(complex)

    def U_inverse(self) -> np.ndarray:
        n = self.nhat + self.ell
        return self.gram.conj().T @ self.U.conj().T @ make_J(n)


def eigen_split(pair: SymplecticPair, tol: Tolerances = DEFAULT_TOL) -> EigenSplit:
    """Split the pencil into its zero, infinite and finite-nonzero parts."""
    cl = classify(pair, tol)
    if not cl.regular:
        raise NotRegularError("pencil is singular")
    if cl.ind_inf == "too_high":
        raise IndexTooHighError("index at infinity exceeds one")
    M, L = pair.M, pair.L
    n = pair.n
    J = make_J(n)
    U0 = null_space(M, tol.rank_tol)
    Uinf = null_space(L, tol.rank_tol)
    ell = U0.shape[1]
    if Uinf.shape[1] != ell:
        raise NumericalBreakdown("kernels of M and L differ in dimension")
    nhat = n - ell

    def finite_nonzero(a, b):
        a, b = np.abs(a), np.abs(b)
        return (a > tol.eig_zero_tol * b) & (a < tol.eig_inf_tol * b)

    *_, Z = sla.ordqz(M, L, sort=finite_nonzero, output="complex")
    U1 = Z[:, : 2 * nhat]
    if nhat:
        ab = sla.eigvals(M, L, homogeneous_eigvals=True)
        count = int(np.sum(finite_nonzero(ab[0], ab[1])))
        if count != 2 * nhat:
            raise NumericalBreakdown(f"found {count} finite nonzero eigenvalues, expected {2 * nhat}")
        U1 = U1 @ congruence_to_J(U1.conj().T @ J @ U1, tol.rank_tol)
    if ell:
        K2 = U0.conj().T @ J @ Uinf
        if smallest_singular(K2) <= tol.rank_tol * np.linalg.norm(K2, 2):
            raise NumericalBreakdown("kernels of M and L are not J-paired")
        Uinf = Uinf @ np.linalg.inv(K2)
    LU = L @ U1
    Shat = np.linalg.solve(LU.conj().T @ LU, LU.conj().T @ (M @ U1)) if nhat else np.zeros((0, 0), complex)
    split = EigenSplit(U1, U0, Uinf, Shat, nhat, ell)
    res = split_residuals(pair, split)
    object.__setattr__(split, "residuals", res)
    return split


def split_residuals(pair: SymplecticPair, split: EigenSplit) -> dict:
    """Relative residuals of the defining relations of an eigen-split."""
    M, L = pair.M, pair.L
    U = split.U
    J = make_J(pair.n)
    sU = max(1.0, fro(U))
    sM, sL = max(fro(M), 1e-300), max(fro(L), 1e-300)
    out = {
        "gram": fro(U.conj().T @ J @ U - split.gram) / sU ** 2,
        "M_U0": fro(M @ split.U0) / (sM * sU),
        "L_Uinf": fro(L @ split.Uinf) / (sL * sU),
        "M_U1": fro(M @ split.U1 - L @ split.U1 @ split.Shat)
        / (max(sM, sL * max(1.0, fro(split.Shat))) * sU),
    }
    return out


@dataclass(frozen=True)
class FlowGenerator:
    """Hamiltonian ``H`` with ``M Pi0 = L PiInf exp(H)``."""

    H: np.ndarray
    Hhat: np.ndarray
    Pi0: np.ndarray
    PiInf: np.ndarray
    split: EigenSplit

    def exp_reduced(self, t: float) -> np.ndarray:
        return mat_exp(self.Hhat * t) if self.split.nhat else np.zeros((0, 0), complex)


def build_generator(pair: SymplecticPair, split: EigenSplit | None = None,
                    tol: Tolerances = DEFAULT_TOL) -> FlowGenerator:
    """Hamiltonian generator and the two projectors of a pair."""
    if split is None:
        split = eigen_split(pair, tol)
    nh, ell = split.nhat, split.ell
    Hhat = mat_log(split.Shat, tol) if nh else np.zeros((0, 0), complex)
    U, Uinv = split.U, split.U_inverse()
    Z = np.zeros((2 * ell, 2 * ell))
    H = U @ sla.block_diag(Hhat, Z) @ Uinv
    I0 = np.diag(np.r_[np.ones(2 * nh + ell), np.zeros(ell)])
    Iinf = np.diag(np.r_[np.ones(2 * nh), np.zeros(ell), np.ones(ell)])
    return FlowGenerator(H, Hhat, U @ I0 @ Uinv, U @ Iinf @ Uinv, split)


def projector_residual(pair: SymplecticPair, gen: FlowGenerator) -> float:
    """Relative residual of ``M Pi0 = L PiInf exp(H)``."""
    lhs = pair.M @ gen.Pi0
    rhs = pair.L @ gen.PiInf @ mat_exp(gen.H)
    scale = max(1.0, fro(pair.M) * fro(gen.Pi0), fro(pair.L) * fro(gen.PiInf) * fro(mat_exp(gen.H)))
    return fro(lhs - rhs) / scale


def perturb(pair: SymplecticPair, split: EigenSplit, eps: float) -> SymplecticPair:
    """Perturbation that makes ``L`` invertible while keeping the pair symplectic.

    Uses ``dM = -L U0 Phi^H Uinf^H J`` and ``dL = M Uinf Phi U0^H J`` with
    ``Phi = eps I``.
    """
    if split.ell == 0 or eps == 0:
        return SymplecticPair(pair.M.copy(), pair.L.copy())
    J = make_J(pair.n)
    Phi = eps * np.eye(split.ell)
    dM = -pair.L @ split.U0 @ Phi.conj().T @ split.Uinf.conj().T @ J
    dL = pair.M @ split.Uinf @ Phi @ split.U0.conj().T @ J
    return SymplecticPair(pair.M + dM, pair.L + dL)


def random_hermitian_block(n: int, rng: np.random.Generator, scale: float = 1.0) -> HermitianBlock:
    from .linalg import random_complex

    return HermitianBlock.from_full(scale * herm(random_complex(rng, (2 * n, 2 * n))))
