"""Closed-form eigenstates of beta1 K1 + beta2 K2 + beta3 K3.

In the analytic (unit-disk) representation the eigenvalue equation is first
order, with solution (1 + tau_- z)^(-k+r) (1 + tau_+ z)^(-k-r). Analyticity in
the disk fixes which eigenvalues are allowed, and the Taylor coefficients give
the Fock amplitudes as Jacobi polynomials with degree-dependent parameters.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import (
    BoundaryCase,
    DegenerateKilling,
    ForbiddenRegion,
    NonNormalizable,
    NonRealR,
    ParameterError,
    TauOutOfDisk,
    ZeroDenominator,
)
from .fock import DEFAULT_NMAX, MAX_NMAX, FockVector, Representation, _fix_phase

BOUNDARY_TOL = 1e-12


class SpectrumClass(enum.Enum):
    CONTINUOUS_COMPLEX = "ContinuousComplex"
    DISCRETE_PLUS = "DiscretePlus"
    DISCRETE_MINUS = "DiscreteMinus"
    FORBIDDEN = "Forbidden"
    BETA_PLUS_ZERO = "BetaPlusZero"


@dataclass(frozen=True)
class BetaVector:
    beta1: complex
    beta2: complex
    beta3: complex

    def __post_init__(self):
        for name in ("beta1", "beta2", "beta3"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @property
    def beta_plus(self) -> complex:
        return (self.beta1 + 1j * self.beta2) / 2

    @property
    def beta_minus(self) -> complex:
        return (self.beta1 - 1j * self.beta2) / 2

    @property
    def scale(self) -> float:
        return max(abs(self.beta1), abs(self.beta2), abs(self.beta3))

    @property
    def killing_root(self) -> complex:
        """B = sqrt(beta3^2 - beta1^2 - beta2^2), principal branch."""
        b = cmath.sqrt(self.beta3**2 - self.beta1**2 - self.beta2**2)
        # cmath already returns Re >= 0; on the imaginary axis pick Im >= 0
        if b.real == 0.0 and b.imag < 0:
            b = -b
        return b

    def as_tuple(self) -> tuple[complex, complex, complex]:
        return self.beta1, self.beta2, self.beta3


@dataclass(frozen=True)
class SpectralData:
    """Quantities derived from beta that enter the amplitude and moment formulas.

    For the beta_plus = 0 class only ``tau_plus`` is meaningful; the other
    fields are NaN.
    """

    beta: BetaVector
    klass: SpectrumClass
    B: complex
    tau_plus: complex
    tau_minus: complex
    kappa: complex
    x: complex

    @property
    def t(self) -> float:
        return abs(self.kappa) ** 2

    @property
    def S_plus(self) -> float:
        return 1.0 - abs(self.tau_minus) ** 2

    @property
    def S_minus(self) -> float:
        return 1.0 - abs(self.tau_plus) ** 2

    @property
    def Y(self) -> float:
        sp, sm = self.S_plus, self.S_minus
        return sp * sm - sp - sm

    @property
    def Z(self) -> float:
        sp, sm = self.S_plus, self.S_minus
        return sp**2 * (1 - sm) + sm**2 * (1 - sp)

    @property
    def unimodular(self) -> bool:
        """True when |tau_+ tau_-| = 1, the Y = 0 subfamily."""
        return abs(abs(self.tau_plus * self.tau_minus) - 1.0) < 1e-12

    @property
    def h(self) -> float:
        return abs(self.tau_minus) ** 2 if self.unimodular else math.nan

    @property
    def jacobi_argument(self) -> float:
        """1 + 2t/(S+ S-), the argument of the Jacobi forms of N and Theta."""
        return 1.0 + 2.0 * self.t / (self.S_plus * self.S_minus)

    def r_of(self, lam: complex) -> complex:
        return complex(lam) / self.B


def _as_beta(beta) -> BetaVector:
    return beta if isinstance(beta, BetaVector) else BetaVector(*beta)


def spectral_data(beta) -> SpectralData:
    """Compute B, tau+-, kappa, x and the spectrum class.

    tau+- = (beta3 -+ B) / (2 beta_+), which equals (beta1 - i beta2)/(beta3 +- B)
    but stays finite when beta_- = 0.

    Raises:
        DegenerateKilling: B = 0.
        BoundaryCase: |tau_+| or |tau_-| equals 1 within 1e-12.
    """
    beta = _as_beta(beta)
    scale = beta.scale
    if scale == 0:
        raise DegenerateKilling("beta vector is zero")
    B = beta.killing_root
    if abs(B) <= 1e-12 * scale:
        raise DegenerateKilling("Killing form vanishes (B = 0)")
    nan = complex(math.nan, math.nan)
    bp = beta.beta_plus
    if abs(bp) <= 1e-14 * scale:
        tau_p = beta.beta1 / beta.beta3
        _check_boundary(abs(tau_p))
        klass = SpectrumClass.BETA_PLUS_ZERO if abs(tau_p) < 1 else SpectrumClass.FORBIDDEN
        return SpectralData(beta, klass, B, tau_p, nan, nan, nan)
    tau_p = (beta.beta3 - B) / (2 * bp)
    tau_m = (beta.beta3 + B) / (2 * bp)
    ap, am = abs(tau_p), abs(tau_m)
    _check_boundary(ap)
    _check_boundary(am)
    if ap < 1 and am < 1:
        klass = SpectrumClass.CONTINUOUS_COMPLEX
    elif ap < 1:
        klass = SpectrumClass.DISCRETE_PLUS
    elif am < 1:
        klass = SpectrumClass.DISCRETE_MINUS
    else:
        klass = SpectrumClass.FORBIDDEN
    return SpectralData(beta, klass, B, tau_p, tau_m, -B / bp, beta.beta3 / B)


def _check_boundary(mod: float):
    if abs(mod - 1.0) < BOUNDARY_TOL:
        raise BoundaryCase(f"|tau| = {mod!r} lies on the unit circle")


def classify_spectrum(beta) -> SpectrumClass:
    return spectral_data(beta).klass


# -- amplitudes -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AnalyticState:
    rep: Representation
    l: int
    spectral: SpectralData
    amps: FockVector
    norm_N: float
    theta: float = math.nan
    upsilon: float = math.nan
    r: float = math.nan
    # sum of |unnormalized amplitude|^2 over the truncation, the direct-summation N
    norm_sum: float = math.nan

    @property
    def eigenvalue(self) -> complex:
        if self.spectral.klass is SpectrumClass.BETA_PLUS_ZERO:
            return (self.rep.k + self.l) * self.spectral.beta.beta3
        return self.r * self.spectral.B


def _normalize_logs(mant: np.ndarray, logs: np.ndarray) -> tuple[np.ndarray, float]:
    """Combine mantissas and log-magnitudes into a unit vector; also return ln(sum |.|^2)."""
    live = mant != 0
    top = float(np.max(logs[live]))
    vec = np.where(live, mant * np.exp(np.where(live, logs - top, 0.0)), 0.0)
    nrm = float(np.linalg.norm(vec))
    return vec / nrm, 2 * (top + math.log(nrm))


def _grow(builder, n_max):
    """Call builder(n_max) with n_max doubled until the tail criterion holds."""
    fixed = n_max is not None
    nm = n_max if fixed else DEFAULT_NMAX
    while True:
        state, log_norm = builder(nm)
        if fixed or state.truncation_ok():
            return state, log_norm
        if nm >= MAX_NMAX:
            raise NonNormalizable(f"amplitude tail does not decay within n_max={nm}")
        nm *= 2


def general_amplitudes(sd: SpectralData, r: float, rep: Representation, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized amplitudes as (mantissa, log-magnitude) arrays for n = 0..n_max.

    C_n = sqrt(n! Gamma(2k)/Gamma(2k+n)) P_n^(-k+r-n, -k-r-n)(x) (-kappa)^n.

    The Jacobi generating function sum_n P_n^(a-n, b-n)(x) w^n equals
    (1 + (x+1)w/2)^a (1 + (x-1)w/2)^b, so matching (1 + tau_- z)^(-k+r)
    (1 + tau_+ z)^(-k-r) needs w = (tau_- - tau_+) z = -kappa z.
    """
    k = rep.k
    w = -sd.kappa
    n = np.arange(n_max + 1)
    half_w = 0.5 * specfun.log_fock_weight(n, k)
    mant = np.empty(n_max + 1, dtype=complex)
    logs = np.empty(n_max + 1)
    for j in range(n_max + 1):
        m, lg = specfun.jacobi_poly_scaled(j, -k + r - j, -k - r - j, sd.x, scale=w)
        mant[j] = m
        logs[j] = lg + half_w[j]
    return mant, logs


def norm_closed_form(sd: SpectralData, rep: Representation, l: int, sign: int) -> float:
    """N for r = sign (k+l): l! Gamma(2k)/Gamma(2k+l) S_i^l S_i'^(-2k-l) P_l^(2k-1,0)(y)."""
    k = rep.k
    s_i, s_o = (sd.S_plus, sd.S_minus) if sign > 0 else (sd.S_minus, sd.S_plus)
    pref = math.exp(specfun.log_fock_weight(l, k))
    return pref * s_i**l * s_o ** (-2 * k - l) * specfun.jacobi_poly(l, 2 * k - 1, 0.0, sd.jacobi_argument)


def build_state_general(
    beta,
    l: int,
    sign: int = +1,
    rep: Representation | None = None,
    n_max: int | None = None,
    lam: complex | None = None,
) -> AnalyticState:
    """Closed-form eigenstate with real r = sign (k + l).

    If ``lam`` is given, r = lam / B must be real and equal to +-(k+l).

    Raises:
        ForbiddenRegion: no normalizable eigenstate, or the sign is not allowed
            by the spectrum class.
        NonRealR: lam / B has an imaginary part above 1e-12.
    """
    if rep is None:
        raise ParameterError("a representation is required")
    if l < 0:
        raise ParameterError("l must be non-negative")
    sd = spectral_data(beta)
    k = rep.k
    if lam is not None:
        r_c = sd.r_of(lam)
        if abs(r_c.imag) > 1e-12:
            raise NonRealR(f"r = lambda/B = {r_c} is not real")
        if abs(abs(r_c.real) - (k + l)) > 1e-10 * (k + l):
            raise ParameterError(f"r = {r_c.real} is not +-(k+l) = +-{k + l}")
        sign = 1 if r_c.real > 0 else -1
    if sd.klass in (SpectrumClass.FORBIDDEN, SpectrumClass.BETA_PLUS_ZERO):
        raise ForbiddenRegion(f"spectrum class {sd.klass.value} has no state of this form")
    if sd.klass is SpectrumClass.DISCRETE_PLUS and sign < 0:
        raise ForbiddenRegion("discrete spectrum with |tau_+| < 1 requires r = k + l")
    if sd.klass is SpectrumClass.DISCRETE_MINUS and sign > 0:
        raise ForbiddenRegion("discrete spectrum with |tau_-| < 1 requires r = -(k + l)")
    r = sign * (k + l)

    def builder(nm):
        mant, logs = general_amplitudes(sd, r, rep, nm)
        vec, log_norm = _normalize_logs(mant, logs)
        return FockVector(rep, _fix_phase(vec)), log_norm

    state, log_norm = _grow(builder, n_max)
    try:
        norm_N = norm_closed_form(sd, rep, l, sign)
    except (ZeroDivisionError, OverflowError):
        norm_N = math.exp(log_norm)
    return AnalyticState(rep, l, sd, state, norm_N, theta=theta_ratio(sd, rep, l), r=r, norm_sum=math.exp(log_norm))


def build_state_beta_plus_zero(tau_plus: complex, l: int, rep: Representation, n_max: int | None = None) -> AnalyticState:
    """Eigenstate of K3 + tau_+ K+ (the beta_+ = 0 class) from its Fock expansion.

    C_n = sqrt(n! Gamma(2k+n) / (l! Gamma(2k+l))) (-tau_+)^(n-l) / (n-l)!  for n >= l.

    Raises:
        TauOutOfDisk: |tau_+| >= 1.
    """
    tau_plus = complex(tau_plus)
    if abs(tau_plus) >= 1:
        raise TauOutOfDisk(f"|tau_+| = {abs(tau_plus)} must be below 1")
    if l < 0:
        raise ParameterError("l must be non-negative")
    k = rep.k
    from scipy.special import gammaln

    def builder(nm):
        if nm < l + 4:
            nm = l + 4
        n = np.arange(nm + 1)
        mant = np.zeros(nm + 1, dtype=complex)
        logs = np.zeros(nm + 1)
        m = n[l:] - l
        if tau_plus == 0:
            mant[l] = 1.0
        else:
            logs[l:] = (
                0.5 * (gammaln(n[l:] + 1) + gammaln(2 * k + n[l:]) - gammaln(l + 1) - gammaln(2 * k + l))
                - gammaln(m + 1)
                + m * math.log(abs(tau_plus))
            )
            mant[l:] = np.exp(1j * m * cmath.phase(-tau_plus))
        vec, log_norm = _normalize_logs(mant, logs)
        return FockVector(rep, _fix_phase(vec)), log_norm

    state, log_norm = _grow(builder, n_max)
    beta = BetaVector(tau_plus, 1j * tau_plus, 1.0)
    sd = spectral_data(beta)
    return AnalyticState(
        rep,
        l,
        sd,
        state,
        norm_beta_plus_zero(tau_plus, l, rep),
        upsilon=upsilon_ratio(tau_plus, l, rep),
        r=math.nan,
        norm_sum=math.exp(log_norm),
    )


def norm_beta_plus_zero(tau_plus: complex, l: int, rep: Representation) -> float:
    """N = F(l+1, l+2k; 1; |tau_+|^2)."""
    return specfun.hyp2f1(l + 1, l + 2 * rep.k, 1, abs(tau_plus) ** 2)


# -- ratio functions -------------------------------------------------------------------


def theta_jacobi(k: float, l: int, y: float) -> float:
    """(2k/l) P_{l-1}^(2k,1)(y) / P_l^(2k-1,0)(y); zero for l = 0."""
    if l == 0:
        return 0.0
    mn, ln = specfun.jacobi_poly_scaled(l - 1, 2 * k, 1.0, y)
    md, ld = specfun.jacobi_poly_scaled(l, 2 * k - 1, 0.0, y)
    if md == 0:
        raise ZeroDenominator(f"P_{l}^(2k-1,0)({y}) vanishes")
    return float((2 * k / l) * (mn / md).real * math.exp(ln - ld))


def theta_hypergeometric(sd: SpectralData, rep: Representation, l: int, sign: int = +1) -> float:
    """F(k+r+1, k-r+1; 2k+1; z) / F(k+r, k-r; 2k; z) with z = -t/(S+ S-)."""
    k = rep.k
    r = sign * (k + l)
    z = -sd.t / (sd.S_plus * sd.S_minus)
    return specfun.hyp2f1_derivative_ratio(k + r, k - r, 2 * k, z)


def theta_ratio(sd: SpectralData, rep: Representation, l: int, check: bool = False) -> float:
    """Theta for the discrete-spectrum moment formulas.

    Zero for l = 0 by definition (the factor k^2 - r^2 multiplying it vanishes
    there). With ``check=True`` the hypergeometric form is evaluated too and
    the two must agree to 1e-10.
    """
    if l == 0:
        return 0.0
    theta = theta_jacobi(rep.k, l, sd.jacobi_argument)
    if check:
        alt = theta_hypergeometric(sd, rep, l)
        if abs(alt - theta) > 1e-10 * max(1.0, abs(theta)):
            raise ArithmeticError(f"Theta mismatch: Jacobi {theta!r} vs 2F1 {alt!r}")
    return theta


def upsilon_ratio(tau_plus: complex, l: int, rep: Representation) -> float:
    """F(l+2, l+2k+1; 2; z) / F(l+1, l+2k; 1; z) at z = |tau_+|^2.

    Euler's transformation turns both into finite sums of positive terms:
    the ratio is F(-l, 1-l-2k; 2; z) / ((1 - z) F(-l, 1-l-2k; 1; z)).

    Raises:
        TauOutOfDisk: |tau_+| >= 1.
    """
    z = abs(tau_plus) ** 2
    if z >= 1:
        raise TauOutOfDisk(f"|tau_+| = {abs(tau_plus)} must be below 1")
    b = 1 - l - 2 * rep.k
    return specfun.hyp2f1(-l, b, 2, z) / ((1 - z) * specfun.hyp2f1(-l, b, 1, z))
