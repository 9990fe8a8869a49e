import cmath
import math

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.linalg import expm
from scipy.sparse.linalg import expm_multiply

from su11states.errors import InconsistentTransform, ParameterError, TruncationTooSmall, ZeroMixing
from su11states.fock import EVEN, ODD
from su11states.moments import Family
from su11states.scheme import (
    Mode,
    PostTransform,
    SchemeParams,
    adequate_two_mode_output,
    apply_post_transform,
    chi_from_params,
    conditional_residual,
    outcome_distribution,
    post_transform_for,
    run_pipeline,
    simulate_protocol,
    two_mode_output,
    vacuum_condition_residuals,
)


def kron_two_mode(p, dim):
    """U2 U1 |0,0> on the full Kronecker-product space, independent of the block method."""
    a1 = sp.diags(np.sqrt(np.arange(1, dim)), 1)
    eye = sp.identity(dim)
    a = sp.kron(a1, eye, format="csc")
    b = sp.kron(eye, a1, format="csc")
    ad, bd = a.T, b.T
    vac = np.zeros(dim * dim, complex)
    vac[0] = 1
    psi = expm_multiply(0.5 * p.xi1 * ad @ ad - 0.5 * np.conj(p.xi1) * a @ a, vac)
    psi = expm_multiply(p.xi2 * ad @ bd - np.conj(p.xi2) * a @ b, psi)
    return psi.reshape(dim, dim)


def test_chi_mode_b():
    p = SchemeParams(0.5, 0.8, 0.3, 0.1, "b", 2)
    assert chi_from_params(p) == pytest.approx(math.tanh(0.5) / math.cosh(0.8) ** 2 * cmath.exp(0.3j), rel=1e-15)


def test_chi_mode_a():
    p = SchemeParams(0.8, 0.5, 0.2, 0.5, "a", 2)
    assert chi_from_params(p) == pytest.approx(math.tanh(0.8) / math.sinh(0.5) ** 2 * cmath.exp(-0.8j), rel=1e-15)


def test_zero_mixing():
    with pytest.raises(ZeroMixing):
        chi_from_params(SchemeParams(0.5, 0.0, 0, 0, "a", 1))


def test_boundary_chi_one_mode_a():
    xi2 = math.asinh(math.sqrt(math.tanh(0.7)))
    with pytest.raises(ParameterError):
        post_transform_for(SchemeParams(0.7, xi2, 0, 0, "a", 1))


def test_invalid_scheme_params():
    with pytest.raises(ParameterError):
        SchemeParams(-0.1, 0.5)
    with pytest.raises(ParameterError):
        SchemeParams(0.1, 0.5, n_measured=-1)


def test_family_selection():
    assert post_transform_for(SchemeParams(0.5, 0.8, measured_mode="b", n_measured=2)).family is Family.K2K3
    assert post_transform_for(SchemeParams(0.3, 0.9, measured_mode="a", n_measured=2)).family is Family.K2K3
    pt = post_transform_for(SchemeParams(1.2, 0.3, measured_mode="a", n_measured=2))
    assert pt.family is Family.K1K2
    assert pt.eta == pytest.approx(1 / math.cosh(pt.omega))


def test_post_transform_check():
    with pytest.raises(InconsistentTransform):
        PostTransform(0.0, 0.5, 0.3, Family.K2K3).check()
    with pytest.raises(InconsistentTransform):
        PostTransform(0.0, 0.5, 0.3, Family.K3_MINUS_CHI_KPLUS).check()
    PostTransform(0.0, 0.5, math.sinh(0.5), Family.K2K3, chi_mag=math.tanh(0.5)).check()


@pytest.mark.parametrize("args", [(0.4, 0.6, 0.7, -0.3), (0.0, 0.5, 0.0, 1.0), (0.5, 0.0, 1.1, 0.0)])
def test_block_construction_matches_dense(args):
    p = SchemeParams(*args)
    dim = 24
    ours = two_mode_output(p, 60)[:dim, :dim]
    ref = kron_two_mode(p, 60)[:dim, :dim]
    np.testing.assert_allclose(ours, ref, atol=1e-11)


@pytest.mark.parametrize("args", [(0.5, 0.8, 0.3, 0.1, "b", 2), (0.8, 0.5, 0.2, 0.5, "a", 2)])
def test_vacuum_conditions(args):
    p = SchemeParams(*args)
    psi = adequate_two_mode_output(p)
    ra, rb = vacuum_condition_residuals(p, psi)
    assert ra < 1e-8 and rb < 1e-8


def test_two_mode_squeezed_vacuum_statistics():
    s = 0.8
    p = SchemeParams(0.0, s, 0, 0, "b", 0)
    probs = outcome_distribution(p)
    n = np.arange(30)
    exact = np.tanh(s) ** (2 * n) / np.cosh(s) ** 2
    np.testing.assert_allclose(probs[:30], exact, rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("n", [0, 1, 3, 4])
def test_no_dpa_gives_number_state(n):
    st, prob = simulate_protocol(SchemeParams(0.0, 0.8, 0, 0, "b", n))
    assert prob == pytest.approx(math.tanh(0.8) ** (2 * n) / math.cosh(0.8) ** 2, rel=1e-12)
    assert abs(st.amps[n // 2]) == pytest.approx(1.0, abs=1e-14)
    assert st.rep == (EVEN if n % 2 == 0 else ODD)


def test_fixed_truncation_too_small():
    with pytest.raises(TruncationTooSmall):
        simulate_protocol(SchemeParams(1.2, 0.3, 0, 0, "a", 2), n_max=32)


def test_adequate_output_grows():
    p = SchemeParams(1.2, 0.3, 0.2, 0.5, "a", 2)
    psi = adequate_two_mode_output(p)
    assert psi.shape[0] > 129


@pytest.mark.parametrize(
    "args",
    [(0.5, 0.8, 0.3, 0.1, "b", 2), (0.6, 0.5, -2.0, 0.7, "b", 4), (0.3, 0.9, 0.5, 0.2, "a", 3), (0.8, 0.5, 0.2, 0.5, "a", 2)],
)
def test_pipeline(args):
    p = SchemeParams(*args)
    r = run_pipeline(p, n_two=128)
    assert r.fidelity > 1 - 1e-10
    assert r.conditional_fidelity > 1 - 1e-10
    assert r.conditional_residual < 1e-8
    assert r.final_residual < 1e-8
    assert conditional_residual(r.conditional, p) == r.conditional_residual


@pytest.mark.parametrize("args", [(0.5, 0.8, 0.3, 0.1, "b", 3), (0.8, 0.5, 0.2, 0.5, "a", 2)])
def test_post_transform_matches_dense_expm(args):
    p = SchemeParams(*args)
    st, _ = simulate_protocol(p)
    pt = post_transform_for(p)
    ours = apply_post_transform(st, pt)
    dim = 2 * ours.n_max + 2
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    ad = a.T
    k3 = (ad @ a + 0.5 * np.eye(dim)) / 2
    k2 = (ad @ ad - a @ a) / 4j
    s = pt.sign
    u = expm(1j * s * pt.omega * k2) @ expm(1j * s * pt.phi * k3)
    ref = u @ st.photon_amplitudes(dim)
    got = ours.photon_amplitudes(dim)
    assert abs(abs(np.vdot(ref[: dim - 40], got[: dim - 40])) - 1) < 1e-10


def test_mode_enum():
    assert SchemeParams(0.1, 0.2, measured_mode="a").measured_mode is Mode.A
