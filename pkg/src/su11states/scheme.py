"""Generation protocol: DPA squeezing, NPA two-mode mixing, photon counting and
a final SU(1,1) transformation on the unmeasured mode.

Conventions: U1 = exp(xi1 a^dag^2 / 2 - xi1^* a^2 / 2) and
U2 = exp(xi2 a^dag b^dag - xi2^* a b), with xi_j = |xi_j| e^(i theta_j),
mu_j = cosh|xi_j| and nu_j = sinh|xi_j| e^(i theta_j). These are the orderings
for which the output annihilates the two Bogoliubov combinations checked in
:func:`vacuum_condition_residuals`.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg

from .errors import InconsistentTransform, NegligibleOutcome, ParameterError, TruncationTooSmall, ZeroMixing
from .fock import (
    FockVector,
    OperatorKind,
    Representation,
    _fix_phase,
    _photon_lowering,
    build_operator,
    eigen_residual,
)
from .moments import Family, analytic_state, family_beta

N_TWO_DEFAULT = 128
N_TWO_MAX = 1024
TAIL_TOL = 1e-14
PROB_FLOOR = 1e-300
EDGE = 3


class Mode(enum.Enum):
    A = "a"
    B = "b"


@dataclass(frozen=True)
class SchemeParams:
    xi1_mag: float
    xi2_mag: float
    theta1: float = 0.0
    theta2: float = 0.0
    measured_mode: Mode = Mode.B
    n_measured: int = 0

    def __post_init__(self):
        object.__setattr__(self, "measured_mode", Mode(self.measured_mode))
        if self.xi1_mag < 0 or self.xi2_mag < 0:
            raise ParameterError("squeeze strengths must be non-negative")
        if self.n_measured < 0:
            raise ParameterError("photon count must be non-negative")

    @property
    def xi1(self) -> complex:
        return cmath.rect(self.xi1_mag, self.theta1)

    @property
    def xi2(self) -> complex:
        return cmath.rect(self.xi2_mag, self.theta2)

    @property
    def mu1(self) -> float:
        return math.cosh(self.xi1_mag)

    @property
    def mu2(self) -> float:
        return math.cosh(self.xi2_mag)

    @property
    def nu1(self) -> complex:
        return cmath.rect(math.sinh(self.xi1_mag), self.theta1)

    @property
    def nu2(self) -> complex:
        return cmath.rect(math.sinh(self.xi2_mag), self.theta2)

    @property
    def rep(self) -> Representation:
        return Representation.from_photon_number(self.n_measured)[0]

    @property
    def l(self) -> int:
        return self.n_measured // 2


def chi_from_params(p: SchemeParams) -> complex:
    """Coupling chi of the conditional eigenvalue equation.

    Raises:
        ZeroMixing: measurement in mode a with |xi2| = 0.
    """
    if p.measured_mode is Mode.B:
        return math.tanh(p.xi1_mag) / math.cosh(p.xi2_mag) ** 2 * cmath.exp(1j * p.theta1)
    if p.xi2_mag == 0:
        raise ZeroMixing("measuring mode a requires nonzero mixing |xi2| > 0")
    return math.tanh(p.xi1_mag) / math.sinh(p.xi2_mag) ** 2 * cmath.exp(1j * (p.theta1 - 2 * p.theta2))


@dataclass(frozen=True)
class PostTransform:
    """exp(s i omega K2) exp(s i phi K3) with s = -1 after a mode-b count, +1 after mode a."""

    phi: float
    omega: float
    eta: float
    family: Family
    sign: int = -1
    chi_mag: float | None = None

    def check(self):
        """Raises InconsistentTransform when omega, eta and |chi| disagree."""
        tol = 1e-10
        w = self.omega
        if self.sign not in (-1, 1):
            raise InconsistentTransform("sign must be +1 or -1")
        if self.family is Family.K2K3:
            if abs(self.eta - math.sinh(w)) > tol * max(1.0, self.eta):
                raise InconsistentTransform(f"K2-K3 needs eta = sinh(omega), got {self.eta} vs {math.sinh(w)}")
            if self.chi_mag is not None and abs(math.tanh(w) - self.chi_mag) > tol:
                raise InconsistentTransform(f"K2-K3 needs tanh(omega) = |chi| = {self.chi_mag}")
        elif self.family is Family.K1K2:
            if w <= 0 or abs(self.eta - 1 / math.cosh(w)) > tol:
                raise InconsistentTransform(f"K1-K2 needs eta = 1/cosh(omega), got {self.eta}")
            if self.chi_mag is not None and abs(1 / math.tanh(w) - self.chi_mag) > tol * self.chi_mag:
                raise InconsistentTransform(f"K1-K2 needs coth(omega) = |chi| = {self.chi_mag}")
        else:
            raise InconsistentTransform(f"no post-transform leads to family {self.family}")


def post_transform_for(p: SchemeParams) -> PostTransform:
    """Phase shift and squeeze that turn the conditional state into an intelligent state.

    Raises:
        ParameterError: |chi| = 1 after a mode-a count (boundary between families).
    """
    chi = chi_from_params(p)
    mag = abs(chi)
    phi = cmath.phase(chi) if mag > 0 else 0.0
    if p.measured_mode is Mode.B:
        w = math.atanh(mag)
        return PostTransform(phi, w, math.sinh(w), Family.K2K3, -1, mag)
    if abs(mag - 1) < 1e-12:
        raise ParameterError("|chi| = 1 separates the K2-K3 and K1-K2 cases and is excluded")
    if mag < 1:
        w = math.atanh(mag)
        return PostTransform(phi, w, math.sinh(w), Family.K2K3, +1, mag)
    w = math.atanh(1 / mag)
    return PostTransform(phi, w, 1 / math.cosh(w), Family.K1K2, +1, mag)


# -- two-mode simulation ----------------------------------------------------------------


def _squeezed_mode_a(xi1: complex, n_two: int) -> np.ndarray:
    a = _photon_lowering(n_two + 1).toarray()
    ad = a.conj().T
    gen = 0.5 * xi1 * ad @ ad - 0.5 * np.conj(xi1) * a @ a
    vac = np.zeros(n_two + 1, dtype=complex)
    vac[0] = 1.0
    return scipy.linalg.expm(gen) @ vac


def _two_mode_mix(psi_a: np.ndarray, xi2: complex, n_two: int) -> np.ndarray:
    """Apply exp(xi2 a^dag b^dag - xi2^* a b) to psi_a (x) |0>_b.

    The generator conserves d = n_a - n_b, so it is exponentiated block by
    block; with mode b in vacuum only the d >= 0 blocks are populated.
    """
    out = np.zeros((n_two + 1, n_two + 1), dtype=complex)
    for d in range(n_two + 1):
        if psi_a[d] == 0:
            continue
        size = n_two + 1 - d
        j = np.arange(size - 1)
        # a^dag b^dag |d+j, j> = sqrt((d+j+1)(j+1)) |d+j+1, j+1>
        amp = np.sqrt((d + j + 1.0) * (j + 1.0))
        gen = np.diag(xi2 * amp, -1) - np.diag(np.conj(xi2) * amp, 1)
        col = scipy.linalg.expm(gen)[:, 0] * psi_a[d]
        idx = np.arange(size)
        out[d + idx, idx] = col
    return out


def two_mode_output(p: SchemeParams, n_two: int) -> np.ndarray:
    """Amplitudes psi[n_a, n_b] of the output state, each mode truncated at n_two photons."""
    if n_two < 4:
        raise TruncationTooSmall("two-mode truncation must be at least 4")
    return _two_mode_mix(_squeezed_mode_a(p.xi1, n_two), p.xi2, n_two)


def _two_mode_tail(psi: np.ndarray) -> float:
    n_two = psi.shape[0] - 1
    cut = int(math.floor(0.9 * n_two)) + 1
    prob = np.abs(psi) ** 2
    return float(max(prob[cut:, :].sum(), prob[:, cut:].sum()))


def adequate_two_mode_output(p: SchemeParams, n_two: int | None = None) -> np.ndarray:
    """Output state with the truncation doubled until both marginals have negligible tails.

    Raises:
        TruncationTooSmall: the tail criterion fails at the largest truncation.
    """
    fixed = n_two is not None
    nt = n_two if fixed else N_TWO_DEFAULT
    while True:
        psi = two_mode_output(p, nt)
        tail = _two_mode_tail(psi)
        if tail < TAIL_TOL:
            return psi
        if fixed or nt >= N_TWO_MAX:
            raise TruncationTooSmall(f"two-mode tail mass {tail:.3e} at truncation {nt}")
        nt *= 2


def vacuum_condition_residuals(p: SchemeParams, psi: np.ndarray) -> tuple[float, float]:
    """Norms of (mu1 mu2 a + nu1 nu2^* b - nu1 mu2 a^dag - mu1 nu2 b^dag) psi and (mu2 b - nu2 a^dag) psi.

    Rows within 3 photons of either truncation edge are excluded.
    """
    dim = psi.shape[0]
    low = _photon_lowering(dim)
    a_op = low @ psi
    ad_op = low.conj().T @ psi
    b_op = (low @ psi.T).T
    bd_op = (low.conj().T @ psi.T).T
    mu1, mu2, nu1, nu2 = p.mu1, p.mu2, p.nu1, p.nu2
    ra = mu1 * mu2 * a_op + nu1 * np.conj(nu2) * b_op - nu1 * mu2 * ad_op - mu1 * nu2 * bd_op
    rb = mu2 * b_op - nu2 * ad_op
    keep = slice(0, dim - EDGE)
    return float(np.linalg.norm(ra[keep, keep])), float(np.linalg.norm(rb[keep, keep]))


def _project(psi: np.ndarray, p: SchemeParams) -> np.ndarray:
    n = p.n_measured
    if n >= psi.shape[0]:
        raise TruncationTooSmall(f"outcome n={n} beyond two-mode truncation {psi.shape[0] - 1}")
    return psi[:, n].copy() if p.measured_mode is Mode.B else psi[n, :].copy()


def simulate_protocol(p: SchemeParams, n_max: int | None = None) -> tuple[FockVector, float]:
    """Conditional state of the unmeasured mode and the probability of outcome n.

    ``n_max`` fixes the per-mode two-mode photon truncation; by default it
    starts at 128 and doubles as needed.

    Raises:
        TruncationTooSmall: truncation inadequate.
        NegligibleOutcome: P(n) < 1e-300.
    """
    psi = adequate_two_mode_output(p, n_max)
    cond = _project(psi, p)
    prob = float(np.vdot(cond, cond).real)
    if prob < PROB_FLOOR:
        raise NegligibleOutcome(f"P(n={p.n_measured}) = {prob:.3e}")
    cond = cond / math.sqrt(prob)
    state = FockVector.from_photon_amplitudes(cond, p.rep)
    return FockVector(state.rep, _fix_phase(state.amps / np.linalg.norm(state.amps))), prob


def outcome_distribution(p: SchemeParams, n_max: int | None = None) -> np.ndarray:
    """P(n) for n = 0..truncation in the measured mode."""
    psi = adequate_two_mode_output(p, n_max)
    prob = np.abs(psi) ** 2
    return prob.sum(axis=0) if p.measured_mode is Mode.B else prob.sum(axis=1)


def conditional_residual(state: FockVector, p: SchemeParams) -> float:
    """Residual of (a^dag a - chi a^dag^2) psi = n psi (mode b counted) or
    (b^dag b + chi b^2) psi = n psi (mode a counted) on the photon basis."""
    chi = chi_from_params(p)
    photon = state.photon_amplitudes()
    dim = len(photon)
    low = _photon_lowering(dim)
    num = sp.diags(np.arange(dim, dtype=float), 0, dtype=complex)
    if p.measured_mode is Mode.B:
        op = num - chi * (low.conj().T @ low.conj().T)
    else:
        op = num + chi * (low @ low)
    res = op @ photon - p.n_measured * photon
    return float(np.linalg.norm(res[: dim - 2 * EDGE]))


def apply_post_transform(state: FockVector, pt: PostTransform, n_max: int | None = None) -> FockVector:
    """exp(s i omega K2) exp(s i phi K3) |state>, with the sector truncation grown as needed.

    Raises:
        InconsistentTransform: pt fails its invariant check.
        TruncationTooSmall: the transformed state does not fit in 2**16 levels.
    """
    pt.check()
    s = pt.sign
    nm = max(n_max or 0, 2 * state.n_max, 64)
    while True:
        psi = state.padded(nm)
        k3 = build_operator(state.rep, OperatorKind.K3, nm).matrix.diagonal().real
        vec = np.exp(1j * s * pt.phi * k3) * psi.amps
        if pt.omega != 0:
            k2 = build_operator(state.rep, OperatorKind.K2, nm).matrix
            vec = scipy.sparse.linalg.expm_multiply((1j * s * pt.omega) * k2.tocsc(), vec)
        out = FockVector(state.rep, _fix_phase(vec / np.linalg.norm(vec)))
        if out.truncation_ok():
            return out
        if nm >= 65536:
            raise TruncationTooSmall(f"post-transformed state tail {out.tail_mass():.3e}")
        nm *= 2


@dataclass(frozen=True, eq=False)
class PipelineResult:
    params: SchemeParams
    chi: complex
    post: PostTransform
    probability: float
    conditional: FockVector
    final: FockVector
    target: FockVector
    fidelity: float
    conditional_fidelity: float
    conditional_residual: float
    final_residual: float


def run_pipeline(p: SchemeParams, n_two: int | None = None) -> PipelineResult:
    """Simulate, transform and compare with the closed-form intelligent state."""
    chi = chi_from_params(p)
    pt = post_transform_for(p)
    cond, prob = simulate_protocol(p, n_two)
    rep, l = p.rep, p.l

    # conditional state against the closed-form eigenstate of K3 -+ chi K+-
    if abs(chi) == 0:
        cond_target = FockVector(rep, np.eye(1, l + 5, l)[0])
    elif p.measured_mode is Mode.B:
        cond_target = analytic_state(Family.K3_MINUS_CHI_KPLUS, chi, rep, l)
    else:
        cond_target = analytic_state(Family.K3_PLUS_CHI_KMINUS, chi, rep, l)
    cond_fid = cond.fidelity(cond_target)

    final = apply_post_transform(cond, pt)
    if pt.eta == 0:
        target = FockVector(rep, np.eye(1, l + 5, l)[0])
        res = eigen_residual(final.padded(max(final.n_max, 8)), (0, 0, 1), rep.k + l)
    else:
        target = analytic_state(pt.family, pt.eta, rep, l)
        beta, lam = family_beta(pt.family, pt.eta, rep, l)
        n = max(final.n_max, target.n_max)
        res = eigen_residual(final.padded(n), beta, lam)
    return PipelineResult(
        params=p,
        chi=chi,
        post=pt,
        probability=prob,
        conditional=cond,
        final=final,
        target=target,
        fidelity=final.fidelity(target),
        conditional_fidelity=cond_fid,
        conditional_residual=conditional_residual(cond, p),
        final_residual=res,
    )


__all__ = [
    "Mode",
    "SchemeParams",
    "PostTransform",
    "PipelineResult",
    "chi_from_params",
    "post_transform_for",
    "simulate_protocol",
    "outcome_distribution",
    "apply_post_transform",
    "conditional_residual",
    "vacuum_condition_residuals",
    "two_mode_output",
    "run_pipeline",
]
