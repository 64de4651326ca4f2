import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from riccati_flow.errors import SpecError
from riccati_flow.hjcf import (CBlock, DBlock, EBlock, JordanSpec, RBlock, build_J,
                               digamma_det, digamma_det_numeric, exp_J, gamma_matrix, kappa,
                               kappa_numeric, random_spec, stencil)
from riccati_flow.linalg import is_hamiltonian, mat_exp, symplectic_residual


def rel_err(A, B):
    return np.linalg.norm(A - B) / np.linalg.norm(B)


def test_single_r_block():
    J = build_J(JordanSpec(r=[RBlock(1.0, 1)]))
    assert np.allclose(J, np.diag([1, -1]))


def test_single_e_block_shape():
    J = build_J(JordanSpec(e=[EBlock(0.0, 1, 1)]))
    assert np.allclose(J, [[0, 1], [0, 0]])


@pytest.mark.parametrize("t", [-1.3, 0.0, 2.0])
def test_e_block_exponential_is_shear(t):
    E = exp_J(JordanSpec(e=[EBlock(0.0, 1, 1)]), t)
    assert np.allclose(E, [[1, t], [0, 1]])


def test_r_block_exponential():
    lam, k, t = 0.4 + 1.1j, 3, 0.7
    E = exp_J(JordanSpec(r=[RBlock(lam, k)]), t)
    st_ = stencil(k, t)
    assert np.allclose(E[:k, :k], np.exp(lam * t) * st_.Phi)
    assert np.allclose(E[k:, k:], np.exp(-np.conj(lam) * t) * np.linalg.inv(st_.Phi).conj().T)


@pytest.mark.parametrize("bad", [
    lambda: JordanSpec(r=[RBlock(-0.5, 1)]),
    lambda: JordanSpec(e=[EBlock(0.0, 2, 1)]),
    lambda: JordanSpec(d=[DBlock(1.0, 1.0, 1, 1, 1)]),
    lambda: JordanSpec(),
    lambda: JordanSpec.from_dict({"e": [{"alpha": 0, "beta": 0, "size": 1}]}),
])
def test_spec_validation(bad):
    with pytest.raises(SpecError):
        bad()


def test_spec_dict_roundtrip():
    spec = JordanSpec(r=[RBlock(0.3 + 1j, 2)], e=[EBlock(0.5, -1, 1)],
                      c=[CBlock(1.2, 1, 1, 0)], d=[DBlock(0.1, 0.9, -1, 0, 2)])
    assert JordanSpec.from_dict(spec.to_dict()) == spec
    assert spec.n == 2 + 1 + 2 + 3
    assert spec.mu == 2


def test_stencil_small():
    s1 = stencil(1, 0.8)
    assert np.allclose(s1.Phi, [[1]]) and np.allclose(s1.P, [[-1]])
    assert np.allclose(s1.GammaHat, [[-0.8]])
    assert np.allclose(stencil(2, 1.0).Phi, [[1, 1], [0, 1]])


@pytest.mark.parametrize("k", range(1, 7))
def test_flip_reverses_shift(k):
    P = stencil(k, 0.0).P
    N = np.diag(np.ones(k - 1), 1)
    assert np.allclose(np.linalg.inv(P) @ N @ P, -N.conj().T)


@pytest.mark.parametrize("k", range(1, 9))
def test_stencil_identities(k):
    rng = np.random.default_rng(k)
    for t in rng.uniform(-3, 3, 10):
        s = stencil(k, t)
        PhiInvH = np.linalg.inv(s.Phi).conj().T
        assert np.allclose(s.PhiHat, PhiInvH)
        assert np.linalg.norm(s.phi.conj() @ PhiInvH + s.psi.conj() @ s.P) <= 1e-10 * max(1, np.linalg.norm(s.phi))


@given(st.integers(0, 5000))
def test_random_spec_hamiltonian(seed):
    assert is_hamiltonian(build_J(random_spec(seed)))


@given(st.integers(0, 5000), st.floats(-5, 5))
def test_exp_J_matches_generic_exponential(seed, t):
    spec = random_spec(seed)
    E = exp_J(spec, t)
    assert rel_err(E, mat_exp(build_J(spec) * t)) <= 1e-9
    assert symplectic_residual(E) <= 1e-9


@given(st.integers(0, 5000), st.floats(-2, 2), st.floats(-2, 2))
def test_exp_J_group_law(seed, t, s):
    spec = random_spec(seed)
    lhs = exp_J(spec, t + s)
    assert rel_err(exp_J(spec, t) @ exp_J(spec, s), lhs) <= 1e-9


def test_kappa_closed_form():
    assert kappa(2) == 0 and kappa(3) == 2
    assert abs(kappa_numeric(4, 1.7)) <= 1e-9
    with pytest.raises(SpecError):
        kappa(0)


@pytest.mark.parametrize("n", range(1, 9))
def test_kappa_numeric_vs_closed(n):
    for t in (-2.5, -1.0, 1.0, 2.5):
        assert abs(kappa_numeric(n, t) - kappa(n)) <= 1e-9


def test_kappa_float_path_small_n():
    # the float path is only trustworthy while the Toeplitz factor is well conditioned
    for n in (1, 2, 3):
        assert abs(kappa_numeric(n, 1.0, exact=False) - kappa(n)) <= 1e-9


def test_digamma_det_examples():
    assert digamma_det(1, 2) == pytest.approx(0.5, rel=1e-15)
    for k in range(1, 8):
        assert digamma_det(k, k) == pytest.approx(1 / math.factorial(k), rel=1e-15)
    M = np.array(gamma_matrix(2, 4, 1.0).real)
    assert digamma_det(2, 4) == pytest.approx(np.linalg.det(M), rel=1e-10)
    with pytest.raises(SpecError):
        digamma_det(2, 5)


@pytest.mark.parametrize("k1", range(1, 9))
def test_digamma_det_vs_exact(k1):
    for k2 in range(k1, 2 * k1 + 1):
        ref = digamma_det_numeric(k1, k2)
        assert abs(digamma_det(k1, k2) - ref) <= 1e-12 * abs(ref)


def test_table_decay_rates():
    """``||PhiHat (GammaHat)^{-1}||`` decays like 1/t for large t."""
    from riccati_flow.asymptotics import loglog_slope

    ts = np.logspace(2, 4, 15)
    for n in (2, 3):
        vals = [np.linalg.norm(stencil(n, t).PhiHat @ np.linalg.inv(stencil(n, t).GammaHat)) for t in ts]
        assert abs(loglog_slope(ts, vals) + 1) <= 0.1
