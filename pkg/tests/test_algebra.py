import cmath
import math

import mpmath as mp
import numpy as np
import pytest

from su11states.algebra import (
    BetaVector,
    SpectrumClass,
    build_state_beta_plus_zero,
    build_state_general,
    classify_spectrum,
    norm_beta_plus_zero,
    norm_closed_form,
    spectral_data,
    theta_hypergeometric,
    theta_jacobi,
    theta_ratio,
    upsilon_ratio,
)
from su11states.errors import BoundaryCase, DegenerateKilling, ForbiddenRegion, NonRealR, TauOutOfDisk
from su11states.fock import EVEN, ODD, eigen_residual, eigenstate_by_recursion

REPS = [EVEN, ODD]


def tau_by_definition(beta):
    """Roots of beta_+ tau^2 - beta3 tau + beta_- = 0, the characteristic equation of the analytic form."""
    b1, b2, b3 = beta
    bp, bm = (b1 + 1j * b2) / 2, (b1 - 1j * b2) / 2
    return sorted(np.roots([bp, -b3, bm]), key=lambda z: (round(abs(z), 12), z.real))


@pytest.mark.parametrize(
    "beta",
    [(0.6, -1j, 0), (0.3, 0.8, 1j), (0.4, 0.1j, 1.0), (1.2 + 0.3j, -0.2, 0.9j), (-0.5, 0.5j, 2.0)],
)
def test_tau_roots(beta):
    sd = spectral_data(beta)
    roots = tau_by_definition(beta)
    got = sorted([sd.tau_plus, sd.tau_minus], key=lambda z: (round(abs(z), 12), z.real))
    np.testing.assert_allclose(got, roots, rtol=1e-12)
    b1, b2, b3 = beta
    assert sd.B**2 == pytest.approx(b3 * b3 - b1 * b1 - b2 * b2, rel=1e-13)
    assert sd.kappa == pytest.approx(sd.tau_plus - sd.tau_minus, rel=1e-13)


def test_tau_plus_matches_alternate_form():
    beta = BetaVector(0.3, 0.8, 1j)
    sd = spectral_data(beta)
    assert sd.tau_plus == pytest.approx((beta.beta1 - 1j * beta.beta2) / (beta.beta3 + sd.B), rel=1e-13)


# beta = (7, 5i, 5) has tau = 2, 3 (B = 1); (0.2, 0, +-1) has tau = 0.2/(+-1 +- 0.98)
def test_classification():
    assert classify_spectrum((0.6, -1j, 0)) is SpectrumClass.CONTINUOUS_COMPLEX
    assert classify_spectrum((0.2, 0.0, 1.0)) is SpectrumClass.DISCRETE_PLUS
    assert classify_spectrum((0.2, 0.0, -1.0)) is SpectrumClass.DISCRETE_MINUS
    assert classify_spectrum((7.0, 5j, 5.0)) is SpectrumClass.FORBIDDEN
    assert classify_spectrum((-0.3, -0.3j, 1.0)) is SpectrumClass.BETA_PLUS_ZERO


def test_degenerate_killing():
    with pytest.raises(DegenerateKilling):
        spectral_data((1.0, 0.0, 1.0))
    with pytest.raises(DegenerateKilling):
        spectral_data((0, 0, 0))


def test_boundary_case():
    # pure K1 (hyperbolic generator): both roots lie on the unit circle
    with pytest.raises(BoundaryCase):
        spectral_data((1.0, 0.0, 0.0 + 1e-16))


@pytest.mark.parametrize("rep", REPS)
@pytest.mark.parametrize("l", [0, 1, 3, 6])
@pytest.mark.parametrize("beta", [(0.6, -1j, 0), (0.0, 0.7, 1j), (0.25, -0.9j, 0.5)])
def test_general_state_matches_recursion(rep, l, beta):
    st = build_state_general(beta, l, +1, rep)
    lam = st.eigenvalue
    assert eigen_residual(st.amps, beta, lam) < 1e-10
    orc = eigenstate_by_recursion(beta, lam, rep)
    assert st.amps.fidelity(orc) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("rep", REPS)
@pytest.mark.parametrize("l", [0, 2, 5])
def test_discrete_minus_uses_negative_r(rep, l):
    beta = (0.2, 0.0, -1.0)
    st = build_state_general(beta, l, -1, rep)
    assert eigen_residual(st.amps, beta, st.eigenvalue) < 1e-10
    with pytest.raises(ForbiddenRegion):
        build_state_general(beta, l, +1, rep)


def test_forbidden_region():
    with pytest.raises(ForbiddenRegion):
        build_state_general((7.0, 5j, 5.0), 1, +1, EVEN)


def test_non_real_r():
    with pytest.raises(NonRealR):
        build_state_general((0.6, -1j, 0), 1, +1, EVEN, lam=0.8 * 1.25 * (1 + 0.1j))


@pytest.mark.parametrize("rep", REPS)
@pytest.mark.parametrize("l", [0, 1, 4])
@pytest.mark.parametrize("beta", [(0.6, -1j, 0), (0.0, 2.0, 1j), (0.1 + 0.2j, -0.3, 1.0)])
def test_norm_closed_form_vs_sum(rep, l, beta):
    st = build_state_general(beta, l, +1, rep)
    assert norm_closed_form(st.spectral, rep, l, +1) == pytest.approx(st.norm_sum, rel=1e-11)


@pytest.mark.parametrize("rep", REPS)
@pytest.mark.parametrize("l", [0, 1, 3])
@pytest.mark.parametrize("tau", [0.0, 0.3, -0.5 + 0.2j, 0.9j])
def test_beta_plus_zero_state(rep, l, tau):
    st = build_state_beta_plus_zero(tau, l, rep)
    beta = (tau, 1j * tau, 1.0)
    assert eigen_residual(st.amps, beta, rep.k + l) < 1e-10
    orc = eigenstate_by_recursion(beta, rep.k + l, rep)
    assert st.amps.fidelity(orc) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("rep", REPS)
@pytest.mark.parametrize("l", [0, 2, 5])
@pytest.mark.parametrize("tau", [0.2, 0.7, 0.95])
def test_beta_plus_zero_norm_and_upsilon_vs_mpmath(rep, l, tau):
    k = rep.k
    z = tau * tau
    assert norm_beta_plus_zero(tau, l, rep) == pytest.approx(float(mp.hyp2f1(l + 1, l + 2 * k, 1, z)), rel=1e-12)
    ref = mp.hyp2f1(l + 2, l + 2 * k + 1, 2, z) / mp.hyp2f1(l + 1, l + 2 * k, 1, z)
    assert upsilon_ratio(tau, l, rep) == pytest.approx(float(ref), rel=1e-12)


def test_tau_out_of_disk():
    with pytest.raises(TauOutOfDisk):
        build_state_beta_plus_zero(1.2, 1, EVEN)


@pytest.mark.parametrize("rep", REPS)
def test_theta_zero_for_l0(rep):
    sd = spectral_data((0.6, -1j, 0))
    assert theta_ratio(sd, rep, 0) == 0.0
    assert theta_jacobi(rep.k, 0, 5.0) == 0.0


@pytest.mark.parametrize("rep", REPS)
@pytest.mark.parametrize("l", [1, 2, 5, 8])
@pytest.mark.parametrize("beta", [(0.6, -1j, 0), (0.0, 0.5, 1j), (0.9, -1j, 0)])
def test_theta_forms_agree_with_mpmath(rep, l, beta):
    sd = spectral_data(beta)
    k = rep.k
    z = -sd.t / (sd.S_plus * sd.S_minus)
    r = k + l
    ref = mp.hyp2f1(k + r + 1, k - r + 1, 2 * k + 1, z) / mp.hyp2f1(k + r, k - r, 2 * k, z)
    assert theta_ratio(sd, rep, l) == pytest.approx(float(ref), rel=1e-12)
    assert theta_hypergeometric(sd, rep, l) == pytest.approx(float(ref), rel=1e-12)


def test_killing_root_branch():
    assert BetaVector(0, 0, -1).killing_root == 1
    b = BetaVector(1, 0, 0).killing_root
    assert b.imag > 0 and abs(b - 1j) < 1e-15
    assert cmath.isclose(BetaVector(0.6, -1j, 0).killing_root, math.sqrt(1 - 0.36))
