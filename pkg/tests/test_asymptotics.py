import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from riccati_flow.asymptotics import (CanonicalFlow, blowup_period, elementary_limit,
                                      fg_constants, general_limit, hamiltonian_from_spec,
                                      j_orthogonality_residual, loglog_slope, orbit_eval,
                                      residual_scan, sda_class, split_initial,
                                      symplectic_inverse)
from riccati_flow.errors import PoleError, SpecError, UsageError
from riccati_flow.experiments import GAMMA_41, DELTA_41, build_example, linear_sda_instance, spec_41
from riccati_flow.flow import scan_singular
from riccati_flow.hjcf import CBlock, DBlock, EBlock, JordanSpec, RBlock
from riccati_flow.linalg import hermitian_residual, random_instance


def test_fg_constants_reference_values():
    assert np.allclose(fg_constants(0.0, 1, 1, 1), (0.5j, -0.5j, -0.5, -0.5))
    # even sizes flip both signs
    assert np.allclose(fg_constants(0.0, 1, 0, 0), (-0.5j, 0.5j, 0.5, 0.5))
    f_u, g_u, f_v, g_v = fg_constants(0.7, -1, 2, 1)
    assert np.isclose(f_u, 0.5 * (0.7 + 1j)) and np.isclose(g_v, -0.5 * (1j * 0.7 + 1))


def test_symplectic_inverse():
    S = random_instance("symplectic", 3, 4)
    assert np.allclose(symplectic_inverse(S) @ S, np.eye(6), atol=1e-10)


def test_scalar_r_block_flow_and_limits():
    spec = JordanSpec(r=[RBlock(1.0, 1)])
    fl = CanonicalFlow(spec, np.eye(2), np.eye(1))
    for t in (0.5, 2.0, -1.0):
        assert abs(fl.W(t)[0, 0] - math.exp(-2 * t)) <= 1e-12
    p = elementary_limit("r", spec, np.eye(2), np.eye(1))
    assert np.allclose(p.limit_plus, 0) and p.limit_minus is None
    assert p.rate == "exp" and p.rate_exponent == 2.0


def test_split_initial_reconstructs_state():
    S = random_instance("symplectic", 2, 1)
    W0 = random_instance("hermitian", 2, 2)
    W1, W2 = split_initial(S, W0)
    assert np.allclose(S @ np.vstack([W1, W2]), np.vstack([np.eye(2), W0]))


def test_wrong_block_kind_rejected():
    with pytest.raises(SpecError):
        elementary_limit("c", spec_41("d"), np.eye(8), np.eye(4))
    with pytest.raises(UsageError):
        elementary_limit("x", spec_41("d"), np.eye(8), np.eye(4))
    with pytest.raises(UsageError):
        general_limit(spec_41("d"), np.eye(8), np.eye(4), direction="up")


@pytest.mark.parametrize("case", ["c", "d"])
def test_elementary_matches_general(case):
    inst = build_example(41, 0, 1.0, case)
    pe = elementary_limit(case, inst.spec, inst.S, inst.W0)
    pg = general_limit(inst.spec, inst.S, inst.W0, "+")
    for t in (0.3, 5.0, 123.4):
        W, Qi = orbit_eval(pe, t)
        assert np.linalg.norm(W - pg.w_inf(t)) <= 1e-8 * max(1, np.linalg.norm(W))
        assert np.linalg.norm(Qi - pg.q_inv_inf(t)) <= 1e-8 * max(1, np.linalg.norm(Qi))


def test_orbit_structure_d_block():
    inst = build_example(41, 0, 1.0, "d")
    pe = elementary_limit("d", inst.spec, inst.S, inst.W0)
    o = pe.orbit
    assert pe.limit_plus is None and pe.limit_minus is None
    assert np.isclose(o.theta, DELTA_41 - GAMMA_41)
    assert np.linalg.matrix_rank(o.K_W, 1e-10) == 1
    assert np.linalg.matrix_rank(o.K_Q, 1e-10) == 1
    for t in (0.0, 1.3, 77.0):
        assert j_orthogonality_residual(pe, t) <= 1e-10
    for t in (2.0, 40.0):
        W, _ = orbit_eval(pe, t)
        assert hermitian_residual(W) <= 1e-9 * max(1, np.linalg.norm(W))
    # W_inf is periodic in the beat frequency
    P = 2 * math.pi / abs(o.theta)
    W_a, _ = orbit_eval(pe, 3.0)
    W_b, _ = orbit_eval(pe, 3.0 + P)
    assert np.allclose(W_a, W_b, atol=1e-9)


def test_blowup_period_and_phase():
    inst = build_example(41, 0, 1.0, "d")
    pe = elementary_limit("d", inst.spec, inst.S, inst.W0)
    bp = blowup_period(pe)
    assert abs(bp.period - 2 * math.pi / abs(DELTA_41 - GAMMA_41)) <= 1e-12
    found = scan_singular(lambda s: pe.orbit.U_of_t(s)[0], 0.0, 60.0, 6001).values()
    pred = bp.times(0.0, 60.0)
    assert len(found) == len(pred)
    assert np.max(np.abs(found - pred)) <= 1e-6
    with pytest.raises(PoleError):
        orbit_eval(pe, bp.t_star, rho=1e-6)


def test_c_block_has_no_period_and_constant_limit():
    inst = build_example(41, 0, 1.0, "c")
    pe = elementary_limit("c", inst.spec, inst.S, inst.W0)
    assert blowup_period(pe) is None
    assert np.allclose(pe.orbit.K_W, 0)
    assert hermitian_residual(pe.limit_plus) <= 1e-10
    assert np.allclose(orbit_eval(pe, 17.0)[0], pe.limit_plus, atol=1e-9)


@pytest.mark.parametrize("case", ["c", "d"])
def test_dense_flow_approaches_target_like_one_over_t(case):
    inst = build_example(41, 0, 1.0, case)
    pe = elementary_limit(case, inst.spec, inst.S, inst.W0)
    scan = residual_scan(inst.flow(), pe, np.linspace(100, 1000, 401))
    assert abs(scan.slope("W") + 1) <= 0.15
    assert abs(scan.slope("Q") + 1) <= 0.15
    assert scan.away.sum() >= 300


def test_e_blocks_constant_limit():
    spec, S = linear_sda_instance()
    W0 = random_instance("hermitian", spec.n, 5)
    pg = general_limit(spec, S, W0, "+")
    L = pg.constant_limit()
    assert L is not None and hermitian_residual(L) <= 1e-10
    fl = CanonicalFlow(spec, S, W0)
    e1, e2 = (np.linalg.norm(fl.W(t) - L) for t in (1e3, 1e4))
    assert 5 <= e1 / e2 <= 20


def test_pure_r_form_has_no_oscillation():
    spec = JordanSpec(r=[RBlock(0.7 + 0.3j, 2), RBlock(1.1, 1)])
    S = random_instance("symplectic", spec.n, 8, scale=0.5)
    W0 = random_instance("hermitian", spec.n, 9)
    pg = general_limit(spec, S, W0, "+")
    assert pg.mu == 0
    L = pg.constant_limit()
    assert np.linalg.norm(CanonicalFlow(spec, S, W0).W(30.0) - L) <= 1e-9
    assert np.allclose(pg.q_inv_inf(3.0), 0)


@given(st.integers(0, 500))
def test_general_target_is_hermitian(seed):
    spec = JordanSpec(d=[DBlock(1.3, 0.4, 1, 1, 0)], e=[EBlock(0.5, 1, 1)])
    S = random_instance("symplectic", spec.n, seed, scale=0.6)
    W0 = random_instance("hermitian", spec.n, seed + 1)
    try:
        pg = general_limit(spec, S, W0, "+")
    except Exception:
        return
    t = 2.5
    if pg.sigma_min_U1(t) < 1e-3:
        return
    W = pg.w_inf(t)
    assert hermitian_residual(W) <= 1e-8 * max(1, np.linalg.norm(W))


def test_sda_class_verdicts_from_spec():
    spec, _ = linear_sda_instance()
    assert sda_class(spec).verdict == "linear"
    assert sda_class(spec).rate == 0.5
    q = sda_class(JordanSpec(r=[RBlock(0.5, 2), RBlock(0.8 + 1j, 1)]))
    assert q.verdict == "quadratic" and q.rate == 0.5
    assert sda_class(spec_41("c")).verdict == "oscillatory"


def test_sda_class_verdicts_from_matrix():
    spec, S = linear_sda_instance()
    assert sda_class(hamiltonian_from_spec(spec, S)).verdict == "linear"
    H41 = hamiltonian_from_spec(spec_41("d"), random_instance("symplectic", 4, 0))
    assert sda_class(H41).verdict == "oscillatory"
    Hr = hamiltonian_from_spec(JordanSpec(r=[RBlock(0.5 + 1j, 2)]), random_instance("symplectic", 2, 0))
    c = sda_class(Hr)
    assert c.verdict == "quadratic" and abs(c.rate - 0.5) <= 1e-6


def test_loglog_slope_exact_power():
    t = np.geomspace(1, 1e3, 30)
    assert abs(loglog_slope(t, 3 * t ** -1.5) + 1.5) <= 1e-12
    with pytest.raises(UsageError):
        loglog_slope([1.0], [1.0])
