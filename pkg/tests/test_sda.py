import numpy as np
import pytest
from hypothesis import given, strategies as st

from riccati_flow.errors import BreakdownError, SingularityError, UsageError
from riccati_flow.experiments import dare_from_spec, nme_test_problem
from riccati_flow.hjcf import JordanSpec, RBlock
from riccati_flow.linalg import hermitian_residual, random_complex, random_instance
from riccati_flow.pairs import PairClass, from_pair, to_pair
from riccati_flow.sda import (CareProblem, DareProblem, DareState, NmeProblem, NmeState,
                              cayley, iterate_pair, run_sda, sda1_step, sda2_step,
                              state_block)

GOLDEN = (3 + np.sqrt(5)) / 2


def s(x):
    return np.array([[x]], dtype=complex)


def test_sda1_scalar_steps():
    A, G, H = sda1_step(s(0.5), s(0), s(0))
    assert np.allclose([A, G, H], [[[0.25]], [[0]], [[0]]])
    A, G, H = sda1_step(s(1), s(1), s(1))
    assert np.allclose([A, G, H], [[[0.5]], [[1.5]], [[1.5]]])
    with pytest.raises(BreakdownError):
        sda1_step(s(1), s(1), s(-1))


def test_sda2_scalar_steps():
    A, Q, P = sda2_step(s(1), s(3), s(0))
    assert np.allclose([A, Q, P], [[[1 / 3]], [[8 / 3]], [[1 / 3]]])
    Q0, P0 = s(2), s(0.5)
    A, Q, P = sda2_step(s(0), Q0, P0)
    assert np.allclose(A, 0) and np.allclose(Q, Q0) and np.allclose(P, P0)
    with pytest.raises(BreakdownError):
        sda2_step(s(1), s(2), s(2))


def test_nme_golden_ratio():
    tr = run_sda(NmeProblem(s(1), s(3)))
    assert tr.verdict == "converged"
    assert abs(tr.final.X[0, 0] - GOLDEN) <= 1e-12
    assert abs(tr.final.Y[0, 0] - (3 - np.sqrt(5)) / 2) <= 1e-12
    assert tr.final.residual <= 1e-12
    errs = [abs(r.X[0, 0] - GOLDEN) for r in tr.records]
    for a, b in zip(errs, errs[1:]):
        if a >= 1e-7:
            assert b <= 10 * a * a


def test_nme_error_contracts_by_powers():
    # x + 1/x = 3: the k-th error is the 2^(k-1) power chain of the first one
    tr = run_sda(NmeProblem(s(1), s(3)), tol=0.0, kmax=5)
    r = 1 / GOLDEN ** 2
    for rec in tr.records:
        e = rec.X[0, 0] - GOLDEN
        ref = GOLDEN * (1 - r) * r ** (2 ** (rec.k - 1)) / (1 - r ** (2 ** (rec.k - 1)))
        assert abs(e) == pytest.approx(abs(ref), rel=1e-6, abs=1e-15)


def test_dare_with_zero_couplings(rng):
    A = 0.6 * random_complex(rng, (3, 3))
    tr = run_sda(DareProblem(A, np.zeros((3, 3)), np.zeros((3, 3))), tol=0.0, kmax=4)
    for rec in tr.records:
        assert np.allclose(rec.Y, 0)
        assert np.allclose(rec.A, np.linalg.matrix_power(A, 2 ** (rec.k - 1)))


def test_breakdown_and_usage():
    tr = run_sda(DareProblem(s(1), s(1), s(-1)))
    assert tr.verdict == "breakdown" and tr.breakdown_sigma is not None
    with pytest.raises(UsageError):
        run_sda(NmeProblem(s(1), s(3)), kmax=0)


def test_max_iter_verdict():
    tr = run_sda(NmeProblem(s(1), s(3)), tol=0.0, kmax=3)
    assert tr.verdict == "max_iter" and len(tr.records) == 3


@given(st.integers(0, 2000))
def test_structure_preserved(seed):
    p = nme_test_problem(3, seed)
    tr = run_sda(p, kmax=8)
    for r in tr.records:
        assert hermitian_residual(r.X) <= 1e-10 and hermitian_residual(r.Y) <= 1e-10


def test_cayley_scalar():
    d = cayley(CareProblem(s(-1), s(0), s(0)), 1.0)
    assert np.allclose(d.A, 0) and np.allclose(d.G, 0) and np.allclose(d.H, 0)
    with pytest.raises(SingularityError):
        cayley(CareProblem(s(1), s(0), s(0)), 1.0)


def care_oracle(A, G, H):
    """Stabilizing CARE solution from the stable invariant subspace of the Hamiltonian."""
    n = A.shape[0]
    Hm = np.block([[A, -G], [-H, -A.conj().T]])
    w, V = np.linalg.eig(Hm)
    U = V[:, w.real < 0]
    return U[n:] @ np.linalg.inv(U[:n])


@pytest.mark.parametrize("seed", range(5))
def test_cayley_preserves_care_solution(seed):
    rng = np.random.default_rng(seed)
    n = 1 + seed % 4
    A = random_complex(rng, (n, n)) - 1.5 * np.eye(n)
    B = random_complex(rng, (n, n))
    C = random_complex(rng, (n, n))
    G, H = B @ B.conj().T, C @ C.conj().T
    X = care_oracle(A, G, H)
    care = CareProblem(A, G, H)
    assert care.residual(X) <= 1e-9
    dare = cayley(care, 1.0)
    assert dare.residual(X) <= 1e-8
    tr = run_sda(dare)
    assert tr.verdict == "converged"
    assert np.linalg.norm(tr.solution() - X) <= 1e-8 * max(1, np.linalg.norm(X))


def test_iterate_pair_shapes():
    p = nme_test_problem(2, 1)
    cls = PairClass.nme(2)
    tr = run_sda(p, kmax=4, tol=0.0)
    for st_ in tr.states():
        pair = iterate_pair(st_, cls)
        assert pair.residual() <= 1e-10
        assert np.allclose(pair.M[:2, 2:], 0) and np.allclose(pair.L[2:, 2:], 0)
    first = tr.states()[0]
    assert np.allclose(from_pair(iterate_pair(first, cls), cls).full(), state_block(first, cls).full())
    with pytest.raises(UsageError):
        iterate_pair(first, PairClass.dare(2))
    d = DareState(s(0.5), s(1), s(1))
    assert np.allclose(from_pair(iterate_pair(d, PairClass.dare(1)), PairClass.dare(1)).full(),
                       state_block(d).full())


def test_dare_pair_shape_over_run():
    spec = JordanSpec(r=[RBlock(0.8 + 0.2j, 2)])
    S = random_instance("symplectic", 2, 1, scale=0.6)
    problem, _ = dare_from_spec(spec, S)
    tr = run_sda(problem, kmax=5, tol=0.0)
    for st_ in tr.states():
        pair = iterate_pair(st_, PairClass.dare(2))
        assert np.allclose(pair.L[2:, :2], 0) and np.allclose(pair.M[:2, 2:], 0)
        assert pair.residual() <= 1e-10


def test_invariant_subspace_preserved():
    spec = JordanSpec(r=[RBlock(0.3 + 0.5j, 1), RBlock(0.2, 1)])
    S = random_instance("symplectic", 2, 4, scale=0.5)
    problem, _ = dare_from_spec(spec, S)
    cls = PairClass.dare(2)
    states = run_sda(problem, kmax=5, tol=0.0).states()
    M1, L1 = iterate_pair(states[0], cls).M, iterate_pair(states[0], cls).L
    w, V = np.linalg.eig(np.linalg.solve(L1, M1))
    for k, st_ in enumerate(states, start=1):
        pair = iterate_pair(st_, cls)
        R = pair.M @ V - pair.L @ V @ np.diag(w ** (2 ** (k - 1)))
        scale = max(1.0, np.linalg.norm(pair.M) + np.linalg.norm(pair.L) * np.max(np.abs(w)) ** (2 ** (k - 1)))
        assert np.linalg.norm(R) <= 1e-7 * scale
