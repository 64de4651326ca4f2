"""Dense complex kernels and structural predicates.

Every matrix is a two dimensional complex ``numpy`` array.  Predicates use
relative residuals so that rescaling an input never flips a verdict.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .config import DEFAULT_TOL, Tolerances
from .errors import BranchCutError, DimensionError, SingularityError

CUT_MARGIN = 1e-6


def as_matrix(A) -> np.ndarray:
    """Return ``A`` as a 2-d complex array (scalars become 1x1)."""
    A = np.asarray(A, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise DimensionError(f"expected a matrix, got ndim={A.ndim}")
    return A


def _square(A) -> np.ndarray:
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"matrix must be square, got {A.shape}")
    return A


def _even_square(A) -> np.ndarray:
    A = _square(A)
    if A.shape[0] % 2:
        raise DimensionError("matrix must have even dimension")
    return A


def make_J(n: int) -> np.ndarray:
    """Standard skew form ``[[0, I], [-I, 0]]`` of size ``2n``."""
    if n < 1:
        raise DimensionError("make_J needs n >= 1")
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, I], [-I, Z]]).astype(complex)


def J_of(size: int) -> np.ndarray:
    """``make_J(size // 2)`` that also accepts ``size == 0``."""
    if size == 0:
        return np.zeros((0, 0), dtype=complex)
    return make_J(size // 2)


def herm(A) -> np.ndarray:
    """Hermitian part ``(A + A^H) / 2``."""
    A = as_matrix(A)
    return 0.5 * (A + A.conj().T)


def hamiltonian_part(A) -> np.ndarray:
    """Projection ``(A + J A^H J) / 2`` onto the Hamiltonian matrices."""
    A = _even_square(A)
    J = make_J(A.shape[0] // 2)
    return 0.5 * (A + J @ A.conj().T @ J)


def fro(A) -> float:
    return float(np.linalg.norm(A)) if np.size(A) else 0.0


def hermitian_residual(A) -> float:
    """``||A - A^H||_F / max(1, ||A||_F)``."""
    A = _square(A)
    return fro(A - A.conj().T) / max(1.0, fro(A))


def symplectic_residual(S) -> float:
    """``||S J S^H - J||_F / max(1, ||S||_F^2)``."""
    S = _even_square(S)
    J = make_J(S.shape[0] // 2)
    return fro(S @ J @ S.conj().T - J) / max(1.0, fro(S) ** 2)


def hamiltonian_residual(H) -> float:
    """Hermitian residual of ``H J``."""
    H = _even_square(H)
    return hermitian_residual(H @ make_J(H.shape[0] // 2))


def is_hermitian(A, tol: Tolerances = DEFAULT_TOL) -> bool:
    return hermitian_residual(A) <= tol.structural_tol


def is_symplectic(S, tol: Tolerances = DEFAULT_TOL) -> bool:
    return symplectic_residual(S) <= tol.structural_tol


def is_hamiltonian(H, tol: Tolerances = DEFAULT_TOL) -> bool:
    return hamiltonian_residual(H) <= tol.structural_tol


def mat_exp(A) -> np.ndarray:
    """Matrix exponential by scaling and squaring with Pade approximants.

    Raises
    ------
    OverflowError
        If the result is not finite.
    """
    A = _square(A)
    with np.errstate(over="ignore", invalid="ignore"):
        E = sla.expm(A)
    if not np.all(np.isfinite(E)):
        raise OverflowError("matrix exponential overflowed")
    return E


def _cut_angle(eigs: np.ndarray, theta: float = np.pi) -> float:
    """Pick a branch-cut ray that stays clear of the spectrum.

    The default ray is the negative real axis.  When an eigenvalue lies
    within ``CUT_MARGIN`` of it, the ray is moved to the middle of the widest
    angular gap between eigenvalues.
    """
    ang = np.angle(eigs)
    near = (np.cos(ang - theta) > 0) & (np.abs(np.sin(ang - theta)) <= CUT_MARGIN)
    if not np.any(near):
        return theta
    a = np.sort(np.mod(ang, 2 * np.pi))
    gaps = np.diff(np.concatenate([a, [a[0] + 2 * np.pi]]))
    j = int(np.argmax(gaps))
    if gaps[j] <= 2 * CUT_MARGIN:
        raise BranchCutError("spectrum leaves no room for a branch cut")
    return float(a[j] + gaps[j] / 2)


def mat_log(A, tol: Tolerances = DEFAULT_TOL, theta: float | None = None) -> np.ndarray:
    """Matrix logarithm with an adjustable branch cut.

    Parameters
    ----------
    A : array_like
        Square invertible matrix.
    theta : float, optional
        Angle of the branch-cut ray.  Chosen automatically when omitted.

    Returns
    -------
    numpy.ndarray
        ``L`` with ``exp(L) = A``.  When ``A`` is symplectic the result is
        projected onto the Hamiltonian matrices.
    """
    A = _square(A)
    if A.shape[0] == 0:
        return A.copy()
    if smallest_singular(A) <= tol.rank_tol * max(np.linalg.norm(A, 2), 1e-300):
        raise SingularityError("logarithm of a singular matrix")
    eigs = np.linalg.eigvals(A)
    if theta is None:
        theta = _cut_angle(eigs)
    c = np.exp(1j * (theta - np.pi))
    L = sla.logm(A / c, disp=False)[0] + 1j * (theta - np.pi) * np.eye(A.shape[0])
    L = np.asarray(L, dtype=complex)
    if not np.all(np.isfinite(L)):
        raise BranchCutError("logarithm evaluation failed")
    if A.shape[0] % 2 == 0 and is_symplectic(A, tol):
        L = hamiltonian_part(L)
    scale = max(1.0, fro(A))
    if fro(mat_exp(L) - A) > 1e3 * tol.structural_tol * scale:
        raise BranchCutError("logarithm does not reproduce its argument")
    return L


def smallest_singular(A) -> float:
    A = as_matrix(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.svd(A, compute_uv=False)[-1])


def null_space(A, rank_tol: float) -> np.ndarray:
    """Orthonormal basis of the numerical kernel of ``A``."""
    A = as_matrix(A)
    if A.size == 0:
        return np.zeros((A.shape[1], A.shape[1]), dtype=complex)
    _, s, Vh = np.linalg.svd(A)
    cutoff = rank_tol * max(s[0], 1e-300) if s.size else 0.0
    r = int(np.sum(s > cutoff))
    if s.size and s[0] == 0:
        r = 0
    return Vh[r:].conj().T


def numerical_rank(A, rank_tol: float) -> int:
    s = np.linalg.svd(as_matrix(A), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


def solve_right(B, A) -> np.ndarray:
    """``B A^{-1}`` without forming the inverse."""
    return np.linalg.solve(as_matrix(A).T, as_matrix(B).T).T


def random_complex(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_instance(kind: str, n: int, seed: int, scale: float = 0.5) -> np.ndarray:
    """Seeded random structured matrix.

    Parameters
    ----------
    kind : {'hermitian', 'hamiltonian', 'symplectic'}
    n : int
        Half dimension for the structured kinds, full dimension for
        ``'hermitian'``.
    seed : int
    scale : float
        Entry scale of the Hamiltonian fed to the exponential for
        ``'symplectic'``.
    """
    if n < 1:
        raise DimensionError("n must be positive")
    rng = np.random.default_rng(seed)
    if kind == "hermitian":
        return herm(random_complex(rng, (n, n)))
    if kind == "hamiltonian":
        return hamiltonian_part(random_complex(rng, (2 * n, 2 * n)))
    if kind == "symplectic":
        H = hamiltonian_part(random_complex(rng, (2 * n, 2 * n)))
        return mat_exp(scale * H / np.sqrt(2 * n))
    raise ValueError(f"unknown kind {kind!r}")


def congruence_to_J(K: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """Find ``W`` with ``W^H K W = J`` for a nonsingular skew-Hermitian ``K``.

    ``iK`` is diagonalized, its eigenvectors are scaled by
    ``|lambda|^{-1/2}`` and ordered positive-then-negative, which matches the
    eigenbasis of ``iJ`` used below.

    Raises
    ------
    NumericalBreakdown
        If ``iK`` does not have the inertia of ``iJ``.
    """
    from .errors import NumericalBreakdown

    K = _square(K)
    m = K.shape[0]
    if m == 0:
        return K.copy()
    if m % 2:
        raise NumericalBreakdown("odd-sized skew form cannot be congruent to J")
    w, V = np.linalg.eigh(herm(1j * K))
    big = max(np.max(np.abs(w)), 1e-300)
    if np.any(np.abs(w) <= rank_tol * big):
        raise NumericalBreakdown("skew form is singular")
    pos = np.flatnonzero(w > 0)
    neg = np.flatnonzero(w < 0)
    if pos.size != m // 2:
        raise NumericalBreakdown(f"wrong inertia: {pos.size} positive of {m}")
    order = np.concatenate([pos, neg])
    F = V[:, order] / np.sqrt(np.abs(w[order]))
    h = m // 2
    I = np.eye(h)
    # columns of Vj are eigenvectors of iJ for +1 (first h) and -1 (last h)
    Vj = np.block([[I, I], [-1j * I, 1j * I]]) / np.sqrt(2)
    return F @ Vj.conj().T
