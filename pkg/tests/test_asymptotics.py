import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from threeosc.asymptotics import (OneModeNsSpec, TwoModeNsSpec, critical_squeezings,
                                  entanglement_extremes, one_mode_entanglement, one_mode_nu,
                                  phase_classify, sigma_coefficients, spec_from_params,
                                  two_mode_nu)
from threeosc.correlations import log_negativity, min_symplectic_eig, reduce_pair_matrix
from threeosc.dynamics import change_basis, mme_coefficients, propagate, squeezed_vacuum
from threeosc.errors import (PositivityError, RegimeError, SymmetryViolated,
                             ValidationError)
from threeosc.lattice import BathParams, SystemParams, normal_modes

import oracles

REF_CHAIN = OneModeNsSpec(1.0, 1.2, 0.6)


def _direct_nu(omega_sq, lam, r, T, t):
    V = oracles.asymptotic_covariance(omega_sq, lam, r, T, t)
    return oracles.nu_minus_direct(oracles.pair_block(V, 1, 3))


def test_sigma_ref_chain():
    sQ, sP = sigma_coefficients(REF_CHAIN, 0.0)
    assert sQ == pytest.approx(0.9208, abs=1e-4)
    assert sP == pytest.approx(0.6311, abs=1e-4)


def test_sigma_from_virtual_oscillator():
    # long-time variances of (q1 + q3)/sqrt(2) with the protected mode unpopulated
    p = REF_CHAIN.to_params()
    modes = normal_modes(p)
    c = mme_coefficients(modes, BathParams(T=0.0, gamma=0.07))
    s = change_basis(squeezed_vacuum(p.omega_sq, 0.0), modes, "normal")
    V = change_basis(propagate(s, c, 5000.0), modes, "natural").cov
    u = np.array([1, 0, 1]) / np.sqrt(2)
    q2 = u @ V[:3, :3] @ u
    p2 = u @ V[3:, 3:] @ u
    sQ, sP = sigma_coefficients(REF_CHAIN, 0.0)
    l2 = 2 * REF_CHAIN.lam ** 2
    assert REF_CHAIN.omega * q2 / l2 == pytest.approx(sQ, rel=1e-8)
    assert p2 / (REF_CHAIN.omega * l2) == pytest.approx(sP, rel=1e-8)


def test_sigma_high_T_linear():
    a = np.array(sigma_coefficients(REF_CHAIN, 1000.0))
    b = np.array(sigma_coefficients(REF_CHAIN, 2000.0))
    assert np.allclose(b / a, 2.0, rtol=1e-5)


def test_sigma_two_mode_zero_T():
    s = TwoModeNsSpec(1.3, 1.0)
    sQ, sP = sigma_coefficients(s, 0.0)
    Oc = s.Omega_cm
    assert sP == pytest.approx(Oc / (6 * 1.3), abs=1e-14)
    assert sQ == pytest.approx(1.3 / (6 * Oc), abs=1e-14)


def test_spec_properties():
    assert REF_CHAIN.c_sq.sum() == pytest.approx(1 / (2 * REF_CHAIN.lam ** 2), rel=1e-12)
    assert np.all(REF_CHAIN.Omega > 0)
    s = TwoModeNsSpec(1.3, 1.0)
    assert s.lam == pytest.approx(0.69)
    assert s.Omega_eps ** 2 == pytest.approx(0.31)
    assert s.Omega_cm ** 2 == pytest.approx(2.38)
    assert s.Omega_delta == 1.3


def test_spec_errors():
    with pytest.raises(RegimeError):
        TwoModeNsSpec(2.0, 1.0)
    with pytest.raises(RegimeError):
        TwoModeNsSpec(1.0, 2.0)
    with pytest.raises(PositivityError):
        OneModeNsSpec(1.0, 1.0, 1.5)
    with pytest.raises(ValidationError):
        OneModeNsSpec(1.0, 1.0, 0.0)
    with pytest.raises(SymmetryViolated):
        OneModeNsSpec.from_params(SystemParams.open_chain(1.0, 1.2, 1.1, 0.6))
    with pytest.raises(SymmetryViolated):
        spec_from_params(SystemParams.open_chain(1.0, 1.2, 1.0, 0.6, l13=0.1))
    with pytest.raises(ValidationError):
        sigma_coefficients(REF_CHAIN, -1.0)


def test_spec_from_params():
    assert isinstance(spec_from_params(SystemParams.open_chain(1.3, 1.0, 1.3, 0.69)),
                      TwoModeNsSpec)
    one = spec_from_params(REF_CHAIN.to_params())
    assert isinstance(one, OneModeNsSpec) and one.lam == pytest.approx(0.6)


def test_critical_squeezings_ref_chain():
    rp, rm, rc = critical_squeezings(REF_CHAIN, 0.0)
    assert rp == pytest.approx(0.1411, abs=1e-3)
    assert rm == pytest.approx(0.0478, abs=1e-3)
    assert rc == pytest.approx(0.0472, abs=1e-3)
    assert 4 * rc == rp + rm
    with pytest.raises(ValidationError):
        critical_squeezings(TwoModeNsSpec(1.3, 1.0), 0.0)


def test_high_T_island_disappears():
    assert critical_squeezings(REF_CHAIN, 10.0).r0_minus < 0


def test_one_mode_examples():
    e = one_mode_entanglement(REF_CHAIN, 1.0, 0.0, 0.0)
    assert e.E0 == pytest.approx(1.0 - 0.1411, abs=1e-3)
    e = one_mode_entanglement(REF_CHAIN, 0.0, 0.0, np.linspace(0, 10, 11))
    assert e.E0 == pytest.approx(0.0478, abs=1e-3) and e.dE == 0.0
    assert np.allclose(e.E_N, e.E0, atol=1e-12)
    e = one_mode_entanglement(REF_CHAIN, 0.2, 50.0, np.linspace(0, 10, 101))
    assert e.E0 + 2 * e.dE < 0 and np.all(e.E_N == 0)
    h = one_mode_entanglement(REF_CHAIN, 1.0, 0.0, 0.3, form="harmonic")
    assert h.E_N == pytest.approx(h.E0 + h.dE * (1 + np.cos(0.6)))
    with pytest.raises(ValidationError):
        one_mode_entanglement(REF_CHAIN, 1.0, 0.0, 0.0, form="bogus")
    with pytest.raises(ValidationError):
        one_mode_entanglement(REF_CHAIN, -0.5, 0.0, 0.0)


def test_phase_classify_examples():
    assert phase_classify(0.1, 0.0) == "NSD"
    assert phase_classify(-0.1, 0.2) == "SDR"
    assert phase_classify(-1.0, 0.2) == "SD"
    assert phase_classify(0.0, 0.0) == "SD"
    assert phase_classify(0.0, 0.1) == "SDR"
    assert phase_classify(-0.2, 0.1) == "SD"


@pytest.mark.parametrize("r,T", [(0.0, 0.0), (0.03, 0.0), (0.5, 0.0), (1.0, 2.0), (0.2, 0.3)])
def test_one_mode_matches_direct_construction(r, T):
    ts = np.random.default_rng(1).uniform(0, 50, 30)
    closed = one_mode_nu(REF_CHAIN, r, T, ts)
    direct = [_direct_nu((1.0, 1.44, 1.0), 0.6, (r, 0.0, r), T, t) for t in ts]
    assert np.abs(closed - direct).max() < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.floats(0.7, 1.5), st.floats(0.7, 1.5), st.floats(0.1, 0.6),
       st.floats(0.0, 2.0), st.floats(0.0, 5.0))
def test_extremes_match_numeric(w, w2, lam, r, T):
    try:
        spec = OneModeNsSpec(w, w2, lam)
    except (PositivityError, RegimeError):
        return
    E0, dE = entanglement_extremes(spec, r, T)
    t = np.linspace(0, np.pi / w, 4001)
    E = -np.log(one_mode_nu(spec, r, T, t))
    # the extremes sit at cos(2 w t) = +-1, both on the grid
    assert E.min() == pytest.approx(E0, abs=1e-9)
    assert E.max() == pytest.approx(E0 + 2 * dE, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.7, 1.5), st.floats(0.7, 1.5), st.floats(0.1, 0.6), st.floats(0.0, 1000.0))
def test_r0_plus_exceeds_r0_minus(w, w2, lam, T):
    try:
        spec = OneModeNsSpec(w, w2, lam)
    except (PositivityError, RegimeError):
        return
    rp, rm, rc = critical_squeezings(spec, T)
    assert rp > rm
    assert 4 * rc == pytest.approx(rp + rm, abs=1e-14)


def test_high_T_slope():
    T = np.geomspace(50, 5000, 30)
    rp = [critical_squeezings(REF_CHAIN, x).r0_plus for x in T]
    slope = np.polyfit(np.log(T), rp, 1)[0]
    assert slope == pytest.approx(0.5, rel=0.02)


def test_high_T_dE_limit():
    _, dE = entanglement_extremes(REF_CHAIN, 3.0, 1000.0)
    c2, Om = REF_CHAIN.c_sq, REF_CHAIN.Omega
    limit = 0.25 * np.log(REF_CHAIN.omega ** 2 * np.sum(c2 / Om ** 2) / np.sum(c2))
    assert dE == pytest.approx(limit, rel=0.01)


def test_end_to_end_one_mode():
    p = REF_CHAIN.to_params()
    modes = normal_modes(p)
    c = mme_coefficients(modes, BathParams(T=0.0, gamma=0.01))
    r = 0.6
    s = change_basis(squeezed_vacuum(p.omega_sq, (r, 0.0, r)), modes, "normal")
    t_late = 30 / c.Gamma[~c.free].min()
    ts = t_late + np.linspace(0, np.pi, 7)
    E_pipe = []
    for t in ts:
        V = change_basis(propagate(s, c, t), modes, "natural").cov
        E_pipe.append(log_negativity(min_symplectic_eig(reduce_pair_matrix(V, 1, 3))))
    E_closed = one_mode_entanglement(REF_CHAIN, r, 0.0, ts).E_N
    assert np.allclose(E_closed, E_pipe, rtol=0.02)


def test_two_mode_matches_direct_construction():
    rng = np.random.default_rng(9)
    for (w, w2) in [(1.3, 1.0), (1.0, 1.2), (1.0, 0.8)]:
        spec = TwoModeNsSpec(w, w2)
        for r, T in [(0.0, 0.0), (0.4, 0.5), (1.2, 3.0)]:
            ts = rng.uniform(0, 100, 50)
            closed = two_mode_nu(spec, r, T, ts)
            direct = [_direct_nu((w ** 2, w2 ** 2, w ** 2), spec.lam, r, T, t) for t in ts]
            assert np.abs(closed - direct).max() < 1e-9


def test_two_mode_decoupled_limit():
    # lam = 0: uncoupled identical oscillators. The bath still thermalises the
    # centre of mass; the two orthogonal combinations rotate freely.
    r, T = 0.5, 0.7
    spec = TwoModeNsSpec(1.0, 1.0)
    ts = np.linspace(0, 7, 15)
    nu = two_mode_nu(spec, r, T, ts)
    u = np.ones(3) / np.sqrt(3)
    P_cm = np.outer(u, u)
    P_free = np.eye(3) - P_cm
    cth = oracles.coth(1 / (2 * T))
    for t, n in zip(ts, nu):
        c, s = np.cos(t), np.sin(t)
        q2 = (np.exp(-2 * r) * c ** 2 + np.exp(2 * r) * s ** 2) / 2
        p2 = (np.exp(2 * r) * c ** 2 + np.exp(-2 * r) * s ** 2) / 2
        qp = (np.exp(2 * r) - np.exp(-2 * r)) * s * c / 2
        V = np.zeros((6, 6))
        V[:3, :3] = q2 * P_free + cth / 2 * P_cm
        V[3:, 3:] = p2 * P_free + cth / 2 * P_cm
        V[:3, 3:] = V[3:, :3] = qp * P_free
        assert n == pytest.approx(oracles.nu_minus_direct(oracles.pair_block(V, 1, 3)),
                                  abs=1e-10)


def test_two_mode_extremes_bracket_samples():
    spec = TwoModeNsSpec(1.3, 1.0)
    E0, dE = entanglement_extremes(spec, 0.5, 0.1)
    E = -np.log(two_mode_nu(spec, 0.5, 0.1, np.linspace(0, 2000, 200001)))
    assert E.min() >= E0 - 1e-9
    assert E.max() <= E0 + 2 * dE + 1e-9
    assert E.min() == pytest.approx(E0, abs=2e-3)
    assert E.max() == pytest.approx(E0 + 2 * dE, abs=2e-3)
