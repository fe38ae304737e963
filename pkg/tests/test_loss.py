import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from angular_qcrb.errors import DomainError, ParameterDomainError
from angular_qcrb.loss import (
    LossConfig,
    channel_coefficients,
    cq_matrix,
    cq_trace_inverse_dense,
    cq_trace_inverse_exact,
    cq_trace_inverse_largeD,
    delta_argmax,
    delta_opt,
    kraus_completeness_deviation,
    kraus_generators,
    qcrb_lossy,
    qcrb_lossy_per_state,
    robustness,
    robustness_diagnostics,
)
from angular_qcrb.probes import (
    CANONICAL_ORDER,
    ProbeKind,
    ProbeSpec,
    closed_form_multimode_moments,
    multimode_moments,
    solve_params_for_nbar,
)
from angular_qcrb.qfim import SensingConfig, qcrb_ideal

REF = SensingConfig(2, 15)


def ref_probe(kind, nbar=5, d=15):
    return solve_params_for_nbar(kind, nbar, d)


def test_loss_config_validation():
    for eta in (0.0, -0.1, 1.1):
        with pytest.raises(ParameterDomainError):
            LossConfig(eta)


def test_channel_coefficients():
    c = channel_coefficients(LossConfig(0.7, 0.0))
    assert (c.chi, c.gamma) == pytest.approx((0.7, 0.21), rel=1e-15)
    c = channel_coefficients(LossConfig(0.7, -1.0))
    assert (c.chi, c.gamma) == (1.0, 0.0)
    for delta in (-3.0, 0.4, 7.0):
        c = channel_coefficients(LossConfig(1.0, delta))
        assert (c.chi, c.gamma) == (1.0, 0.0)


def test_single_photon_hand_value():
    # chi = 1/2, gamma = 1/4, <n> = <n^2> = 1/2 per mode: C_Q = 16 (1/8 + 1/8 - 1/16) = 3
    probe = ProbeSpec.mnoons(1, 1)
    cfg = SensingConfig(1, 1)
    dopt = delta_opt(probe, 0.5)
    assert dopt == 0.0
    assert cq_trace_inverse_exact(probe, cfg, LossConfig(0.5, dopt)) == pytest.approx(1 / 3, rel=1e-15)
    assert cq_trace_inverse_dense(probe, cfg, LossConfig(0.5, dopt)) == pytest.approx(1 / 3, rel=1e-14)


def test_zero_chi_leaves_diagonal_cq():
    # chi = 0 at 1 + delta = 1/(1-eta): C_Q = 16 l^2 gamma nbar_m I
    eta = 0.6
    loss = LossConfig(eta, 1 / (1 - eta) - 1)
    probe = ProbeSpec.mecs(1.2, 4)
    cfg = SensingConfig(1, 4)
    c = channel_coefficients(loss)
    assert c.chi == pytest.approx(0.0, abs=1e-15)
    nbar = multimode_moments(probe).nbar_m
    expected = 4 / (16 * c.gamma * nbar)
    assert cq_trace_inverse_exact(probe, cfg, loss) == pytest.approx(expected, rel=1e-12)


def test_largeD_examples():
    probe = ref_probe(ProbeKind.MECS, d=10)
    mm = multimode_moments(probe)
    cfg = SensingConfig(2, 10)
    expected = 9 / (16 * 4 * (mm.nbar_m + mm.nbar_m**2 * mm.g2_m))
    assert cq_trace_inverse_largeD(probe, cfg, LossConfig(1.0, -1.0)) == pytest.approx(expected, rel=1e-13)
    p1 = ProbeSpec.mecs(1.0, 1)
    assert cq_trace_inverse_largeD(p1, SensingConfig(1, 1), LossConfig(0.6, 0.2)) == 0.0


@pytest.mark.parametrize("kind", CANONICAL_ORDER, ids=str)
def test_largeD_ratio_approaches_one(kind):
    def gap(d):
        # closed-form moments: the squeezed oracle cannot reach d = 100 under the cutoff ceiling
        probe = ref_probe(kind, d=d)
        mm = closed_form_multimode_moments(probe)
        cfg = SensingConfig(2, d)
        loss = LossConfig(0.7, delta_opt(probe, 0.7, mm))
        return abs(cq_trace_inverse_largeD(probe, cfg, loss, mm) / cq_trace_inverse_exact(probe, cfg, loss, mm) - 1)

    assert gap(100) < gap(10)


def test_delta_opt_lossless_is_flat():
    # at eta = 1 the closed form gives <n^2>/<n> - 1, and the objective does
    # not depend on delta at all (chi = 1, gamma = 0)
    probe = ref_probe(ProbeKind.MESVS)
    mm = multimode_moments(probe)
    assert delta_opt(probe, 1.0) == pytest.approx(mm.n2_m / mm.nbar_m - 1, rel=1e-14)
    vals = {cq_trace_inverse_largeD(probe, REF, LossConfig(1.0, x)) for x in (-1.0, 0.0, 5.0)}
    assert len(vals) == 1


def test_delta_opt_single_photon():
    for eta in (0.2, 0.5, 0.9, 1.0):
        assert delta_opt(ProbeSpec.mnoons(1, 4), eta) == pytest.approx(0.0, abs=1e-15)


def test_delta_opt_never_negative():
    # <n^2> >= <n> makes the closed form >= 0: the loss-before anchor is the
    # lower end, not an interior point of [-1, 0]
    for kind in CANONICAL_ORDER:
        for eta in (0.05, 0.3, 0.5, 0.7, 0.9, 1.0):
            assert delta_opt(ref_probe(kind), eta) >= -1e-15


def test_mesvs_argmax_agreement_inside_window():
    probe = ref_probe(ProbeKind.MESVS)
    dopt = delta_opt(probe, 0.7)
    arg, best = delta_argmax(probe, REF, 0.7, bounds=(-1.0, 4.0))
    assert abs(arg - dopt) <= 1e-5
    assert best == pytest.approx(cq_trace_inverse_largeD(probe, REF, LossConfig(0.7, dopt)), rel=1e-9)


@pytest.mark.parametrize("kind", CANONICAL_ORDER, ids=str)
@pytest.mark.parametrize("eta", [0.3, 0.5, 0.7, 0.9])
def test_delta_opt_beats_grid(kind, eta):
    probe = ref_probe(kind)
    mm = multimode_moments(probe)
    best = cq_trace_inverse_largeD(probe, REF, LossConfig(eta, delta_opt(probe, eta, mm)), mm)
    grid = np.linspace(-1.0, 1.0, 2001)
    vals = [cq_trace_inverse_largeD(probe, REF, LossConfig(eta, x), mm) for x in grid]
    assert best >= max(vals) * (1 - 1e-14)


@pytest.mark.parametrize("kind", CANONICAL_ORDER, ids=str)
@pytest.mark.parametrize("d", [2, 5, 15])
def test_lossless_consistency(kind, d):
    probe = ref_probe(kind, d=d)
    cfg = SensingConfig(2, d)
    ideal = qcrb_ideal(probe, cfg)
    for delta in (-1.0, -0.5, 0.0, 2.0):
        assert cq_trace_inverse_exact(probe, cfg, LossConfig(1.0, delta)) == pytest.approx(ideal, rel=1e-10)


@pytest.mark.parametrize("kind", CANONICAL_ORDER, ids=str)
def test_eq17_reconstruction(kind):
    probe = ref_probe(kind)
    for eta in (0.3, 0.5, 0.7, 0.9):
        at_opt = cq_trace_inverse_largeD(probe, REF, LossConfig(eta, delta_opt(probe, eta)))
        assert qcrb_lossy(probe, REF, eta) == pytest.approx(at_opt, rel=1e-10)


@pytest.mark.parametrize("kind", [ProbeKind.MNOONS, ProbeKind.MECS], ids=str)
def test_lossy_per_state_dispatch(kind):
    probe = ref_probe(kind)
    assert qcrb_lossy_per_state(probe, REF, 0.7) == pytest.approx(qcrb_lossy(probe, REF, 0.7), rel=1e-12)


def test_lossy_lossless_limit():
    probe = ref_probe(ProbeKind.MECS)
    mm = multimode_moments(probe)
    expected = 14 / (16 * 4 * (mm.nbar_m + mm.nbar_m**2 * mm.g2_m))
    assert qcrb_lossy(probe, REF, 1.0) == pytest.approx(expected, rel=1e-13)


def test_lossy_needs_two_angles():
    with pytest.raises(DomainError):
        qcrb_lossy(ProbeSpec.mecs(1.0, 1), SensingConfig(1, 1), 0.5)


def test_lossy_ordering_reference():
    vals = {k: qcrb_lossy(ref_probe(k), REF, 0.7) for k in CANONICAL_ORDER}
    assert vals[ProbeKind.MESVS] < vals[ProbeKind.MESCS] < vals[ProbeKind.MECS] < vals[ProbeKind.MNOONS]


@pytest.mark.parametrize("kind", CANONICAL_ORDER, ids=str)
def test_lossy_increases_as_eta_drops(kind):
    probe = ref_probe(kind)
    etas = np.linspace(1.0, 0.1, 50)
    vals = [qcrb_lossy(probe, REF, e) for e in etas]
    assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("d", [2, 5, 15, 30])
def test_robustness_lossless_residual_sign(d):
    # (d-1) against d and the dropped rank-one term: the lossless gap is negative
    cfg = SensingConfig(2, d)
    for kind in CANONICAL_ORDER:
        probe = ref_probe(kind, d=d)
        R = robustness(probe, cfg, 1.0)
        assert -qcrb_ideal(probe, cfg) < R < 0


def test_robustness_ordering():
    cfg = SensingConfig(2, 10)
    R = {k: robustness(ref_probe(k, d=10), cfg, 0.7) for k in CANONICAL_ORDER}
    assert R[ProbeKind.MNOONS] < R[ProbeKind.MECS] < R[ProbeKind.MESCS] < R[ProbeKind.MESVS]


def test_robustness_diagnostics_fields():
    diag = robustness_diagnostics(ref_probe(ProbeKind.MESVS, d=10), SensingConfig(2, 10), 0.7)
    assert diag["R"] == pytest.approx(diag["lossy"] - diag["ideal"], rel=1e-15)
    assert diag["R_exact"] == pytest.approx(diag["lossy_exact"] - diag["ideal"], rel=1e-15)


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(list(CANONICAL_ORDER)),
    st.integers(1, 10),
    st.integers(2, 200),
    st.floats(0.05, 1.0),
    st.floats(-1.0, 3.0),
    st.integers(1, 6),
)
def test_cq_structured_vs_dense(kind, nbar, d, eta, delta, l):  # noqa: E741
    # algebra check only, so closed-form moments keep every grid point in reach
    probe = solve_params_for_nbar(kind, nbar, d)
    mm = closed_form_multimode_moments(probe)
    cfg = SensingConfig(l, d)
    loss = LossConfig(eta, delta)
    exact = cq_trace_inverse_exact(probe, cfg, loss, mm)
    assert exact == pytest.approx(cq_trace_inverse_dense(probe, cfg, loss, mm), rel=1e-10)
    assert cq_matrix(probe, cfg, loss, mm).is_positive_definite()
    lossy = qcrb_lossy(probe, cfg, eta, mm)
    assert qcrb_lossy(probe, SensingConfig(2 * l, d), eta, mm) == pytest.approx(lossy / 4, rel=1e-14)


@pytest.mark.parametrize("eta", [0.5, 0.2, 0.9])
def test_kraus_completeness(eta):
    assert kraus_completeness_deviation(eta, cutoff=4) <= 1e-12


@pytest.mark.parametrize("eta", [0.5, 0.8])
@pytest.mark.parametrize("delta", [-1.0, -0.3, 0.0, 1.2])
def test_kraus_generator_reduction(eta, delta):
    l = 2  # noqa: E741
    gam, lam = kraus_generators(eta, delta, cutoff=4, l=l)
    c = channel_coefficients(LossConfig(eta, delta))
    n = np.diag(np.arange(5.0))
    assert np.allclose(gam, 2 * l * c.chi * n, atol=1e-12)
    assert np.allclose(lam, 4 * l * l * (c.chi**2 * n @ n + c.gamma * n), atol=1e-12)
