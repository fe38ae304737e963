import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from angular_qcrb import fock
from angular_qcrb.errors import CutoffTooSmallError, InfeasibleToleranceError


def test_fock_vacuum():
    s = fock.make_fock(0, 4)
    assert np.array_equal(s.coeffs, [1, 0, 0, 0, 0])
    assert s.tail_mass == 0.0


def test_fock_basis_vector():
    s = fock.make_fock(3, 8)
    expected = np.zeros(9)
    expected[3] = 1
    assert np.array_equal(s.coeffs, expected)


def test_fock_above_cutoff():
    with pytest.raises(CutoffTooSmallError):
        fock.make_fock(5, 3)


def test_coeffs_read_only():
    s = fock.make_coherent(1.0, 40)
    with pytest.raises(ValueError):
        s.coeffs[0] = 0


def test_coherent_zero_is_vacuum():
    s = fock.make_coherent(0.0, 2)
    assert np.allclose(s.coeffs, [1, 0, 0])


def test_coherent_mean():
    m = fock.moments(fock.make_coherent(1.0, 40))
    assert abs(m.n_mean - 1.0) <= 1e-12


def test_coherent_solver_value():
    alpha = 2.3139
    m = fock.moments(fock.make_coherent(alpha, 80))
    assert abs(m.n_mean - alpha**2) <= 1e-10
    assert m.n_mean == pytest.approx(5.354, abs=1e-3)


def test_coherent_cutoff_too_small():
    with pytest.raises(CutoffTooSmallError):
        fock.make_coherent(3.0, 5)


def test_squeezed_vacuum_zero_is_vacuum():
    s = fock.make_squeezed_vacuum(0.0, 2)
    assert np.allclose(s.coeffs, [1, 0, 0])


def test_squeezed_vacuum_moments():
    # K=60 leaves ~7e-9 of probability beyond the cutoff at r=1, so the
    # moment checks use a cutoff that actually reaches 1e-10
    m = fock.moments(fock.make_squeezed_vacuum(1.0, 120))
    s2 = math.sinh(1.0) ** 2
    assert abs(m.n_mean - s2) <= 1e-10
    assert abs(m.n2_mean - (3 * s2 * s2 + 2 * s2)) <= 1e-10


def test_squeezed_vacuum_k60_rejected_at_default_tol():
    with pytest.raises(CutoffTooSmallError):
        fock.make_squeezed_vacuum(1.0, 60)
    s = fock.make_squeezed_vacuum(1.0, 60, tol=1e-7)
    assert 1e-9 < s.tail_mass <= 1e-7


def test_squeezed_vacuum_sign_convention():
    # S(r) = exp[r(a^2dag - a^2)/2]: c_2 = +tanh(r) / sqrt(2 cosh r)
    r = 0.7
    s = fock.make_squeezed_vacuum(r, 200)
    assert s.coeffs[2].real == pytest.approx(math.tanh(r) / math.sqrt(2 * math.cosh(r)), rel=1e-14)


def test_squeezed_vacuum_odd_zero():
    s = fock.make_squeezed_vacuum(1.3, 400)
    assert np.all(s.coeffs[1::2] == 0)


def test_squeezed_coherent_degenerate_cases():
    sv = fock.make_squeezed_vacuum(1.0, 120)
    assert np.allclose(fock.make_squeezed_coherent(0.0, 1.0, 120).coeffs, sv.coeffs, atol=1e-15)
    coh = fock.make_coherent(1.0, 40)
    assert np.allclose(fock.make_squeezed_coherent(1.0, 0.0, 40).coeffs, coh.coeffs, atol=1e-15)


def test_squeezed_coherent_vacuum_overlap():
    m = fock.moments(fock.make_squeezed_coherent(1.0, 0.8, 120))
    expected = math.exp(-(1 - math.tanh(0.8))) / math.cosh(0.8)
    assert abs(m.vac_overlap_sq - expected) <= 1e-9


def test_squeezed_coherent_mean():
    beta, r = 1.5, 0.9
    m = fock.moments(fock.make_squeezed_coherent(beta, r, 300))
    assert m.n_mean == pytest.approx(beta**2 + math.sinh(r) ** 2, rel=1e-12)


def test_squeezed_coherent_matches_dense_displacement():
    # D(beta) applied as a truncated matrix exponential to S(r)|0>
    from scipy.linalg import expm

    beta, r, big, K = 0.6, 0.4, 80, 30
    a = np.diag(np.sqrt(np.arange(1, big + 1)), 1)
    D = expm(beta * (a.T - a))
    sv = fock.make_squeezed_vacuum(r, big, tol=1e-14).coeffs.real
    ref = (D @ sv)[: K + 1]
    got = fock.make_squeezed_coherent(beta, r, K, tol=1e-10).coeffs.real
    assert np.allclose(got, ref, atol=1e-12)


def test_moments_examples():
    assert fock.moments(fock.make_fock(0, 3)) == fock.SingleModeMoments(0.0, 0.0, 0.0, 1.0)
    assert fock.moments(fock.make_fock(3, 5)) == fock.SingleModeMoments(3.0, 9.0, 6.0, 0.0)
    m = fock.moments(fock.make_coherent(1.0, 60))
    assert m.n_mean == pytest.approx(1, abs=1e-13)
    assert m.n2_mean == pytest.approx(2, abs=1e-13)
    assert m.a2dag_a2 == pytest.approx(1, abs=1e-13)
    assert m.vac_overlap_sq == pytest.approx(math.exp(-1), rel=1e-14)


def test_choose_cutoff_examples():
    assert fock.choose_cutoff(fock.FOCK, {"n": 3}, 1e-12) == 3
    assert fock.choose_cutoff(fock.COHERENT, {"alpha": 0.0}, 1e-12) == 0
    K = fock.choose_cutoff(fock.SQUEEZED_VACUUM, {"r": 2.24}, 1e-12)
    assert 100 < K < fock.MAX_CUTOFF


def test_choose_cutoff_ceiling():
    with pytest.raises(InfeasibleToleranceError):
        fock.choose_cutoff(fock.SQUEEZED_VACUUM, {"r": 4.0}, 1e-12)
    with pytest.raises(InfeasibleToleranceError):
        fock.choose_cutoff(fock.COHERENT, {"alpha": 10.0}, 1e-12, ceiling=50)


def test_choose_cutoff_is_smallest_for_coherent():
    alpha, tol = 2.0, 1e-12
    K = fock.choose_cutoff(fock.COHERENT, {"alpha": alpha}, tol)
    fock.make_coherent(alpha, K, tol)
    assert fock.choose_cutoff(fock.COHERENT, {"alpha": alpha}, tol, ceiling=K) == K
    with pytest.raises(InfeasibleToleranceError):
        fock.choose_cutoff(fock.COHERENT, {"alpha": alpha}, tol, ceiling=K - 1)


KIND_PARAMS = st.one_of(
    st.builds(lambda n: (fock.FOCK, {"n": n}), st.integers(0, 30)),
    st.builds(lambda a: (fock.COHERENT, {"alpha": a}), st.floats(0.0, 5.0)),
    st.builds(lambda r: (fock.SQUEEZED_VACUUM, {"r": r}), st.floats(0.0, 1.6)),
    st.builds(lambda b, r: (fock.SQUEEZED_COHERENT, {"beta": b, "r": r}), st.floats(0.0, 3.0), st.floats(0.0, 1.2)),
)


@settings(max_examples=60, deadline=None)
@given(KIND_PARAMS)
def test_normalization_within_tail(kp):
    kind, params = kp
    s = fock.converged_state(kind, params)
    assert s.tail_mass <= fock.DEFAULT_TOL
    total = math.fsum(s.probabilities)
    ulps = 64 * np.finfo(float).eps  # rounding in the amplitude recurrences
    assert 1 - s.tail_mass - ulps <= total <= 1 + ulps


@settings(max_examples=60, deadline=None)
@given(KIND_PARAMS)
def test_moment_identities(kp):
    kind, params = kp
    m = fock.moments(fock.converged_state(kind, params))
    assert m.n2_mean >= m.n_mean**2 - 1e-12 * max(1.0, m.n2_mean)
    assert m.a2dag_a2 + m.n_mean == pytest.approx(m.n2_mean, rel=1e-14, abs=1e-15)
    assert 0.0 <= m.vac_overlap_sq <= 1.0


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 5.0))
def test_coherent_g2_is_one(alpha):
    m = fock.moments(fock.converged_state(fock.COHERENT, {"alpha": alpha}))
    assert abs(m.g2 - 1.0) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(KIND_PARAMS)
def test_truncation_convergence(kp):
    # doubling the cutoff moves each moment by less than 10 tol, relative to
    # its size; the cutoff bounds the n^2-weighted tail
    kind, params = kp
    tol = fock.DEFAULT_TOL
    K = fock.choose_cutoff(kind, params, tol)
    a = fock.moments(fock.make_state(kind, params, K, tol))
    b = fock.moments(fock.make_state(kind, params, 2 * K + 1, tol))
    for x, y in ((a.n_mean, b.n_mean), (a.n2_mean, b.n2_mean), (a.a2dag_a2, b.a2dag_a2), (a.vac_overlap_sq, b.vac_overlap_sq)):
        assert abs(x - y) <= 10 * tol * max(1.0, abs(y))
