import numpy as np
import pytest
from hypothesis import given, strategies as st

from riccati_flow.errors import DimensionError, IndexTooHighError, NotInClassError
from riccati_flow.experiments import random_flow_instance
from riccati_flow.linalg import make_J, mat_exp, random_complex, random_instance, symplectic_residual
from riccati_flow.pairs import (HermitianBlock, PairClass, SymplecticPair, build_generator,
                                classify, eigen_split, from_pair, perturb, projector_residual,
                                random_hermitian_block, split_residuals, to_pair)

seeds = st.integers(0, 5000)


def random_class(seed, n):
    return PairClass(random_instance("symplectic", n, 2 * seed, 0.7),
                     random_instance("symplectic", n, 2 * seed + 1, 0.7))


def test_zero_parameter_dare_class():
    p = to_pair(HermitianBlock.from_full(np.zeros((4, 4))), PairClass.dare(2))
    Z, I = np.zeros((2, 2)), np.eye(2)
    assert np.allclose(p.M, np.block([[Z, Z], [Z, I]]))
    assert np.allclose(p.L, np.block([[I, Z], [Z, Z]]))


def test_nme_class_shape(rng):
    n = 2
    A = random_complex(rng, (n, n))
    Q = np.eye(n) * 3.0
    P = np.eye(n) * 0.5
    from riccati_flow.sda import NmeState, iterate_pair, state_block

    st_ = NmeState(A, Q, P)
    cls = PairClass.nme(n)
    pair = iterate_pair(st_, cls)
    X = state_block(st_, cls)
    p2 = to_pair(X, cls)
    # same pair up to a left factor: compare parameters
    assert np.allclose(from_pair(p2, cls).full(), X.full())
    assert np.allclose(pair.M[:n, :n], A) and np.allclose(pair.L[n:, :n], A.conj().T)


@given(seeds, st.integers(1, 3))
def test_to_pair_is_symplectic(seed, n):
    cls = random_class(seed, n)
    X = random_hermitian_block(n, np.random.default_rng(seed))
    assert to_pair(X, cls).residual() <= 1e-10


@given(seeds, st.integers(1, 3))
def test_roundtrip_and_left_equivalence(seed, n):
    rng = np.random.default_rng(seed)
    cls = random_class(seed, n)
    X = random_hermitian_block(n, rng)
    p = to_pair(X, cls)
    assert np.allclose(from_pair(p, cls).full(), X.full(), atol=1e-9)
    C = random_complex(rng, (2 * n, 2 * n)) + 2 * np.eye(2 * n)
    q = SymplecticPair(C @ p.M, C @ p.L)
    assert np.allclose(from_pair(q, cls).full(), X.full(), atol=1e-8)


def test_dare_readoff(rng):
    from riccati_flow.sda import DareState, iterate_pair, state_block

    A, G, H = random_complex(rng, (2, 2)), np.eye(2), 2 * np.eye(2)
    X = from_pair(iterate_pair(DareState(A, G, H), PairClass.dare(2)), PairClass.dare(2))
    assert np.allclose(X.X12, A) and np.allclose(X.X11, G) and np.allclose(X.X22, -H)


def test_not_in_class():
    n = 1
    pair = SymplecticPair(np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(NotInClassError):
        from_pair(pair, PairClass.dare(n))
    with pytest.raises(DimensionError):
        SymplecticPair(np.eye(2), np.eye(4))


def test_classify_examples():
    assert classify(SymplecticPair(np.eye(2), np.eye(2))).ind_inf == 0
    c = classify(SymplecticPair(np.diag([0.0, 1.0]), np.diag([1.0, 0.0])))
    assert c.regular and c.ind_inf == 1
    # nilpotent 2-block at infinity: M = I, L = N (4x4, two chained infinite eigenvalues)
    M = np.eye(4)
    L = np.zeros((4, 4))
    L[0, 1] = 1.0
    L[2, 2] = L[3, 3] = 1.0
    assert classify(SymplecticPair(M, L)).ind_inf == "too_high"
    with pytest.raises(IndexTooHighError):
        eigen_split(SymplecticPair(M, L))


def test_singular_pencil_is_reported():
    Z = np.zeros((2, 2))
    assert not classify(SymplecticPair(np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))).regular
    assert classify(SymplecticPair(Z + np.eye(2), Z + np.eye(2))).regular


def test_split_of_exponential_pair(rng):
    H0 = random_instance("hamiltonian", 2, 5)
    pair = SymplecticPair(mat_exp(H0), np.eye(4))
    sp = eigen_split(pair)
    assert sp.ell == 0 and sp.nhat == 2
    ev = np.sort_complex(np.linalg.eigvals(sp.Shat))
    ref = np.sort_complex(np.linalg.eigvals(mat_exp(H0)))
    assert np.allclose(ev, ref, atol=1e-8)
    assert symplectic_residual(sp.Shat) <= 1e-9
    gen = build_generator(pair, sp)
    assert np.allclose(gen.Pi0, np.eye(4)) and np.allclose(gen.PiInf, np.eye(4))
    assert projector_residual(pair, gen) <= 1e-10


def test_split_of_diagonal_pencil():
    pair = SymplecticPair(np.diag([0.0, 1.0]), np.diag([1.0, 0.0]))
    sp = eigen_split(pair)
    assert sp.nhat == 0 and sp.ell == 1
    assert abs(abs(sp.U0[0, 0]) - 1) < 1e-12
    assert abs(sp.Uinf[0, 0]) < 1e-12
    assert np.allclose(sp.U0.conj().T @ make_J(1) @ sp.Uinf, [[1.0]])
    gen = build_generator(pair, sp)
    assert np.allclose(gen.H, 0)
    assert projector_residual(pair, gen) <= 1e-12


@given(st.integers(0, 300))
def test_ind1_split_invariants(seed):
    cls, X = random_flow_instance(seed, 2, ind1=True)
    pair = to_pair(X, cls)
    sp = eigen_split(pair)
    assert sp.ell == 1
    for v in split_residuals(pair, sp).values():
        assert v <= 1e-8
    J = make_J(2)
    for a, b in ((sp.U0, sp.U0), (sp.Uinf, sp.Uinf), (sp.U1, sp.U0), (sp.U1, sp.Uinf)):
        assert np.linalg.norm(a.conj().T @ J @ b) <= 1e-8
    gen = build_generator(pair, sp)
    assert np.allclose(gen.Pi0 @ gen.Pi0, gen.Pi0, atol=1e-8)
    assert np.allclose(gen.PiInf @ gen.PiInf, gen.PiInf, atol=1e-8)
    assert projector_residual(pair, gen) <= 1e-8
    assert np.allclose(mat_exp(gen.Hhat), sp.Shat, atol=1e-8)


def test_perturbation():
    pair = SymplecticPair(np.diag([0.0, 1.0]), np.diag([1.0, 0.0]))
    sp = eigen_split(pair)
    assert perturb(pair, sp, 0.0).M.tolist() == pair.M.tolist()
    q = perturb(pair, sp, 0.1)
    assert abs(np.linalg.det(q.L)) > 1e-6
    assert np.linalg.norm(q.M @ sp.U0 - q.L @ sp.U0 * 0.1) <= 1e-12
    assert q.residual() <= 1e-12


def test_perturbation_ind0_and_continuity():
    pair = SymplecticPair(mat_exp(random_instance("hamiltonian", 1, 3)), np.eye(2))
    sp = eigen_split(pair)
    q = perturb(pair, sp, 0.3)
    assert np.array_equal(q.M, pair.M) and np.array_equal(q.L, pair.L)
    cls, X = random_flow_instance(4, 2, ind1=True)
    pair = to_pair(X, cls)
    sp = eigen_split(pair)
    d = [np.linalg.norm(perturb(pair, sp, e).M - pair.M) for e in (1e-2, 1e-3, 1e-4)]
    assert d[1] / d[0] == pytest.approx(0.1, rel=1e-6) and d[2] / d[1] == pytest.approx(0.1, rel=1e-6)
    for e in (1e-2, 1e-3):
        assert perturb(pair, sp, e).residual() <= 1e-10
