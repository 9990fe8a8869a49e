"""Closed-form observables of the algebra eigenstates and intelligent states.

Everything here follows from the moments of K3: <N> = 2<K3> - 1/2,
(Delta N)^2 = 4 (Delta K3)^2, and (Delta q)^2, (Delta p)^2 = 2(<K3> +- <K1>) for
single-parity states. The K1, K2 moments come from the defining eigenvalue
equation of each family.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from . import specfun
from .algebra import (
    SpectralData,
    build_state_beta_plus_zero,
    build_state_general,
    spectral_data,
    theta_jacobi,
    theta_ratio,
    upsilon_ratio,
)
from .errors import ParamOutOfRange, SingularS, TauOutOfDisk
from .fock import FockVector, Representation, eigenstate_by_recursion, oracle_moments
from .report import MomentsReport, g2_from_photon_moments

# K3 + chi K- closed forms are used only for |1 - t| above this
T_SINGULAR_GAP = 1e-6


class Family(enum.Enum):
    K3_MINUS_CHI_KPLUS = "k3-kplus"
    K3_PLUS_CHI_KMINUS = "k3-kminus"
    K1K2 = "k1k2"
    K2K3 = "k2k3"

    @classmethod
    def parse(cls, name) -> "Family":
        if isinstance(name, cls):
            return name
        aliases = {"K3mKplus": cls.K3_MINUS_CHI_KPLUS, "K3pKminus": cls.K3_PLUS_CHI_KMINUS, "K1K2": cls.K1K2, "K2K3": cls.K2K3}
        if name in aliases:
            return aliases[name]
        return cls(name)

    @property
    def uses_chi(self) -> bool:
        return self in (Family.K3_MINUS_CHI_KPLUS, Family.K3_PLUS_CHI_KMINUS)

    @property
    def pair(self) -> tuple[str, str]:
        """Generator pair whose covariance and uncertainty product are reported."""
        return ("K2", "K3") if self is Family.K2K3 else ("K1", "K2")


@dataclass(frozen=True)
class FamilyParams:
    """chi (complex) for the two chi families, eta (real) for the intelligent ones."""

    chi: complex = 0.0
    eta: float = math.nan

    @classmethod
    def polar(cls, chi_mag: float, theta: float = 0.0) -> "FamilyParams":
        return cls(chi=cmath.rect(chi_mag, theta))


def _params(family: Family, params) -> FamilyParams:
    if isinstance(params, FamilyParams):
        return params
    if isinstance(params, dict):
        if "chi" in params:
            return FamilyParams(chi=complex(params["chi"]))
        if "chi_mag" in params:
            return FamilyParams.polar(params["chi_mag"], params.get("theta", 0.0))
        return FamilyParams(eta=float(params["eta"]))
    return FamilyParams(chi=complex(params)) if family.uses_chi else FamilyParams(eta=float(params))


def check_params(family, params) -> FamilyParams:
    """Validate the admissible range of each family.

    Raises:
        ParamOutOfRange: K3mKplus needs |chi| < 1, K3pKminus 0 < |chi| < inf,
            K1K2 0 < eta < 1, K2K3 eta > 0.
    """
    family = Family.parse(family)
    p = _params(family, params)
    if family is Family.K3_MINUS_CHI_KPLUS:
        if not abs(p.chi) < 1:
            raise ParamOutOfRange(f"K3 - chi K+ needs |chi| < 1, got {abs(p.chi)}")
    elif family is Family.K3_PLUS_CHI_KMINUS:
        if not 0 < abs(p.chi) < math.inf:
            raise ParamOutOfRange(f"K3 + chi K- needs 0 < |chi| < inf, got {abs(p.chi)}")
    elif family is Family.K1K2:
        if not 0 < p.eta < 1:
            raise ParamOutOfRange(f"K1-K2 intelligent states need 0 < eta < 1, got {p.eta}")
    elif not (p.eta > 0 and math.isfinite(p.eta)):
        raise ParamOutOfRange(f"K2-K3 intelligent states need eta > 0, got {p.eta}")
    return p


def family_beta(family, params, rep: Representation, l: int) -> tuple[tuple[complex, complex, complex], complex]:
    """(beta, lambda) of the eigenvalue equation that defines the family state."""
    family = Family.parse(family)
    p = check_params(family, params)
    k = rep.k
    if family is Family.K3_MINUS_CHI_KPLUS:
        return (-p.chi, -1j * p.chi, 1.0), k + l
    if family is Family.K3_PLUS_CHI_KMINUS:
        return (p.chi, -1j * p.chi, 1.0), k + l
    if family is Family.K1K2:
        return (p.eta, -1j, 0.0), (k + l) * math.sqrt(1 - p.eta**2)
    return (0.0, p.eta, 1j), 1j * (k + l) * math.sqrt(p.eta**2 + 1)


def analytic_state(family, params, rep: Representation, l: int, n_max: int | None = None) -> FockVector:
    """Normalized Fock amplitudes of a family state from the closed forms."""
    family = Family.parse(family)
    p = check_params(family, params)
    if family is Family.K3_MINUS_CHI_KPLUS:
        return build_state_beta_plus_zero(-p.chi, l, rep, n_max).amps
    beta, lam = family_beta(family, p, rep, l)
    return build_state_general(beta, l, +1, rep, n_max, lam=lam).amps


def oracle_state(family, params, rep: Representation, l: int, n_max: int | None = None) -> FockVector:
    """The same state from the Fock-basis recursion."""
    beta, lam = family_beta(family, params, rep, l)
    if Family.parse(family) is Family.K3_PLUS_CHI_KMINUS and n_max is None:
        n_max = max(l + 8, 16)  # finite support n <= l
    return eigenstate_by_recursion(beta, lam, rep, n_max)


def oracle_report(family, params, rep: Representation, l: int) -> MomentsReport:
    family = Family.parse(family)
    return oracle_moments(oracle_state(family, params, rep, l), family.pair)


# -- K3 moments -------------------------------------------------------------------------


def k3_moments_general(sd: SpectralData, rep: Representation, l: int, sign: int = +1) -> tuple[float, float]:
    """<K3> and (Delta K3)^2 for r = sign (k+l) in terms of S+-, Y, Z and Theta.

    When |tau_+ tau_-| = 1 (Y = 0) the simpler h-form is used.

    Raises:
        SingularS: |S+ S-| < 1e-13.
    """
    k = rep.k
    r = sign * (k + l)
    sp, sm = sd.S_plus, sd.S_minus
    if abs(sp * sm) < 1e-13:
        raise SingularS(f"S+ S- = {sp * sm!r} vanishes")
    t = sd.t
    theta = theta_ratio(sd, rep, l)
    c = k * k - r * r
    if sd.unimodular:
        h = sd.h
        mean = (h + 1) / (h - 1) * r
        var = 2 * k * h / (h - 1) ** 2 + c * h * h * t / (k * (h - 1) ** 4) * theta
        return mean, var
    Y, Z = sd.Y, sd.Z
    P = sp * sm
    mean = (-k * Y + r * (sp - sm)) / P + c * Y * t / (2 * k * P**2) * theta
    var = (
        (k + r) * (1 - sm) / sm**2
        + (k - r) * (1 - sp) / sp**2
        - c * Y * Y * t / ((P + t) * P**2)
        - c * t / (2 * k * P**3) * (P * Y * Y / (P + t) - 2 * k * Y * Y + Z) * theta
        - c * c * Y * Y * t * t / (4 * k * k * P**4) * theta**2
    )
    return mean, var


def k3_moments_beta_plus_zero(tau_plus: complex, rep: Representation, l: int) -> tuple[float, float]:
    """<K3> and (Delta K3)^2 for the beta_+ = 0 class, via Upsilon.

    Raises:
        TauOutOfDisk: |tau_+| >= 1.
    """
    z = abs(tau_plus) ** 2
    if z >= 1:
        raise TauOutOfDisk(f"|tau_+| = {abs(tau_plus)} must be below 1")
    k = rep.k
    g = (l + 1) * (l + 2 * k)
    ups = upsilon_ratio(tau_plus, l, rep)
    mean = k + l + g * z * ups
    var = g * z / (1 - z) + g * (2 * l + 2 * k + 1) * z * z / (1 - z) * ups - g * g * z * z * ups * ups
    return mean, var


# -- family reports --------------------------------------------------------------------


def _finish(rep, mean_k3, var_k3, mean_k1, mean_k2, var_k1, var_k2, cov, pair, **extra) -> MomentsReport:
    mean_n = 2 * mean_k3 - 0.5
    var_n = 4 * var_k3
    return MomentsReport(
        k=rep.k,
        mean_K3=mean_k3,
        var_K3=var_k3,
        mean_K1=mean_k1,
        mean_K2=mean_k2,
        var_K1=var_k1,
        var_K2=var_k2,
        cov_AB=cov,
        mean_N=mean_n,
        var_N=var_n,
        g2=g2_from_photon_moments(mean_n, var_n),
        var_q=2 * (mean_k3 + mean_k1),
        var_p=2 * (mean_k3 - mean_k1),
        pair=pair,
        extra=extra,
    )


def _k1k2_from_kplus_sq(rep, mean_k3, var_k3, mean_kplus: complex, kplus_sq: complex):
    """Variances of K1, K2 and their covariance from <K+>, <K+^2> and the K3 moments.

    Uses K+K- + K-K+ = 2(K3^2 - k(k-1)).
    """
    k = rep.k
    sym = var_k3 + mean_k3**2 - k * (k - 1)
    m1, m2 = mean_kplus.real, mean_kplus.imag
    var_k1 = (sym + kplus_sq.real) / 2 - m1 * m1
    var_k2 = (sym - kplus_sq.real) / 2 - m2 * m2
    cov = kplus_sq.imag / 2 - m1 * m2
    return m1, m2, var_k1, var_k2, cov


def _report_k3_minus_kplus(p: FamilyParams, rep, l) -> MomentsReport:
    chi = p.chi
    k = rep.k
    mean, var = k3_moments_beta_plus_zero(-chi, rep, l)
    ups = upsilon_ratio(-chi, l, rep)
    g = (l + 1) * (l + 2 * k)
    # chi K+ psi = (K3 - k - l) psi, so <K+> = (<K3> - k - l)/chi and
    # chi^2 K+^2 psi = (K3 - k - l - 1)(K3 - k - l) psi
    mean_kplus = g * ups * chi.conjugate()
    if chi == 0:
        kplus_sq = 0j
    else:
        d = g * abs(chi) ** 2 * ups
        kplus_sq = (var + d * d - d) / chi**2
    m1, m2, v1, v2, cov = _k1k2_from_kplus_sq(rep, mean, var, mean_kplus, kplus_sq)
    return _finish(rep, mean, var, m1, m2, v1, v2, cov, ("K1", "K2"), upsilon=ups)


def _report_k3_plus_kminus(p: FamilyParams, rep, l) -> MomentsReport:
    chi = p.chi
    k = rep.k
    t = 1.0 / abs(chi) ** 2
    if abs(1 - t) <= T_SINGULAR_GAP:
        report = oracle_report(Family.K3_PLUS_CHI_KMINUS, p, rep, l)
        report.extra["source"] = "oracle"
        return report
    y = (1 + t) / (1 - t)
    theta = theta_jacobi(k, l, y)
    bracket = l / (1 - t) - l * (l + 2 * k) * t / (2 * k * (1 - t) ** 2) * theta
    mean = k + l - bracket
    var = (
        l * (l + 2 * k - 1) * t / (1 - t) ** 2
        + l * (l + 2 * k) * (1 - 2 * k) * t / (2 * k * (1 - t) ** 3) * theta
        - (l * (l + 2 * k) * t / (2 * k * (1 - t) ** 2) * theta) ** 2
    )
    # chi K- psi = (k + l - K3) psi and chi^2 K-^2 psi = (K3 - k - l + 1)(K3 - k - l) psi
    e = mean - k - l
    kminus = -e / chi
    kminus_sq = (var + e * e + e) / chi**2
    m1, m2, v1, v2, cov = _k1k2_from_kplus_sq(rep, mean, var, kminus.conjugate(), kminus_sq.conjugate())
    return _finish(rep, mean, var, m1, m2, v1, v2, cov, ("K1", "K2"), theta=theta)


def _report_k1k2(p: FamilyParams, rep, l) -> MomentsReport:
    eta = p.eta
    k = rep.k
    theta = theta_jacobi(k, l, (2 - eta * eta) / (eta * eta))
    e2 = 1 - eta * eta
    a = l * (l + 2 * k) / (2 * k) * e2 * theta
    mean = (k + a / eta**2) / eta
    var = (2 * l * (l + 2 * k) + k) * e2 / (2 * eta**2) + a * (1 - 4 * k + eta**2) / (2 * eta**4) - (a / eta**3) ** 2
    mean_k1 = (k + l) * math.sqrt(e2) / eta
    return _finish(rep, mean, var, mean_k1, 0.0, mean / (2 * eta), eta * mean / 2, 0.0, ("K1", "K2"), theta=theta)


def k2k3_var_k3(eta: float, k: float, l: int) -> float:
    """(Delta K3)^2 of the K2-K3 intelligent state."""
    if l == 0:
        return k * eta * eta / 2
    y = 2 * eta * eta + 1
    mn, ln = specfun.jacobi_poly_scaled(l - 1, 1.0, 2 * k, y)
    md, ld = specfun.jacobi_poly_scaled(l, 0.0, 2 * k - 1, y)
    ratio = (mn / md).real * math.exp(ln - ld)
    return k * eta * eta / 2 * (1 + (l + 2 * k) / k * (eta * eta + 1) * ratio)


def _report_k2k3(p: FamilyParams, rep, l) -> MomentsReport:
    eta = p.eta
    k = rep.k
    mean = (k + l) * math.sqrt(eta * eta + 1)
    var = k2k3_var_k3(eta, k, l)
    mean_k1 = 2 * var / eta
    var_k2 = var / eta**2
    var_k1 = (eta**2 - 1) / eta**2 * var - 4 * var * var / eta**2 + (k + l) ** 2 * (eta**2 + 1) - k * (k - 1)
    return _finish(rep, mean, var, mean_k1, 0.0, var_k1, var_k2, 0.0, ("K2", "K3"))


_REPORTERS = {
    Family.K3_MINUS_CHI_KPLUS: _report_k3_minus_kplus,
    Family.K3_PLUS_CHI_KMINUS: _report_k3_plus_kminus,
    Family.K1K2: _report_k1k2,
    Family.K2K3: _report_k2k3,
}


def full_report(family, params, rep: Representation, l: int) -> MomentsReport:
    """Every observable of a family state from the closed forms.

    ``params`` is a FamilyParams, a dict with ``chi`` / ``chi_mag`` (+ ``theta``)
    / ``eta``, or a bare number.

    Raises:
        ParamOutOfRange: parameter outside the family's admissible range.
    """
    family = Family.parse(family)
    if l < 0:
        raise ParamOutOfRange("l must be non-negative")
    p = check_params(family, params)
    return _REPORTERS[family](p, rep, l)


def general_report_k3(family, params, rep: Representation, l: int) -> tuple[float, float]:
    """K3 moments of a family state through the general S+-, Y, Z formulas."""
    family = Family.parse(family)
    p = check_params(family, params)
    if family is Family.K3_MINUS_CHI_KPLUS:
        return k3_moments_beta_plus_zero(-p.chi, rep, l)
    beta, _ = family_beta(family, p, rep, l)
    return k3_moments_general(spectral_data(beta), rep, l, +1)


def mean_k3_from_norm(sd: SpectralData, rep: Representation, l: int, sign: int = +1, rel_step: float = 1e-3) -> float:
    """<K3> = t dN/dt / N + k with N(t) from the hypergeometric closed form.

    t enters N through S+- = 1 - |x +- 1|^2 t / 4 at fixed x, so the derivative
    is a centred finite difference in t. Constant signs of S+- cancel in the
    logarithmic derivative, hence the absolute values.
    """
    k = rep.k
    r = sign * (k + l)
    x = sd.x

    def norm(t):
        sp = 1 - abs(x + 1) ** 2 * t / 4
        sm = 1 - abs(x - 1) ** 2 * t / 4
        f = specfun.hyp2f1(k + r, k - r, 2 * k, -t / (sp * sm))
        return abs(sp) ** (-k + r) * abs(sm) ** (-k - r) * f

    t = sd.t
    # keep the stencil well away from the zeros of S+- in t
    scale = t
    for w in (abs(x + 1) ** 2, abs(x - 1) ** 2):
        if w > 0:
            scale = min(scale, abs(t - 4 / w))
    dt = rel_step * scale
    # five-point centred stencil
    deriv = (norm(t - 2 * dt) - 8 * norm(t - dt) + 8 * norm(t + dt) - norm(t + 2 * dt)) / (12 * dt)
    return t * deriv / norm(t) + k


# -- asymptotic predictions -------------------------------------------------------------


class Regime(enum.Enum):
    SMALL = "small"
    LARGE = "large"


def limit_check(family, rep: Representation, l: int, regime, value: float) -> dict[str, float]:
    """Leading-order asymptotics of a family's observables.

    ``value`` is |chi| for the chi families and eta for the intelligent ones.
    The regime refers to the scan variable: |chi| for K3 - chi K+ (large
    meaning |chi| -> 1), t = 1/|chi|^2 for K3 + chi K-, eta for K1-K2 (large
    meaning eta -> 1) and eta for K2-K3 (large meaning eta >> 1). Quadrature
    entries assume theta = pi for the chi families.

    Returns:
        dict with a subset of mean_K3, var_K3, g2, var_q, var_p, var_K1, var_K2.
    """
    family = Family.parse(family)
    regime = Regime(regime)
    k = rep.k
    n = 2 * l + int(round(2 * k - 0.5))
    g = (l + 1) * (l + 2 * k)
    inf = math.inf
    out: dict[str, float] = {}
    if family is Family.K3_MINUS_CHI_KPLUS:
        c = value
        if regime is Regime.SMALL:
            out["mean_K3"] = k + l + g * c * c
            out["var_K3"] = g * c * c
            out["g2"] = 1 - 1 / n if n >= 1 else inf
            out["var_q"] = 2 * (k + l) - 2 * g * c
            out["var_p"] = 2 * (k + l) + 2 * g * c
        else:
            out["mean_K3"] = k + l + 2 * (l + k) * c * c / (1 - c * c)
            out["var_K3"] = g * c * c / (1 - c * c)
            out["g2"] = (2 * n + 3) / (2 * n + 1)
            out["var_q"] = (n + 0.5) * (1 - c) / (1 + c)
            out["var_p"] = (n + 0.5) * (1 + c) / (1 - c)
    elif family is Family.K3_PLUS_CHI_KMINUS:
        t = 1 / value**2
        u = math.sqrt(t)
        if regime is Regime.SMALL:
            out["mean_K3"] = k + l * l * t / (2 * k)
            out["var_K3"] = l * l * t / (2 * k)
            out["g2"] = 1 / (4 * l * l * t) if k < 0.5 else 4 * l * l * t
            out["var_q"] = 2 * k - 2 * l * u + l * l * u * u / k
            out["var_p"] = 2 * k + 2 * l * u + l * l * u * u / k
        else:
            m = l * (l + 2 * k - 1)
            out["mean_K3"] = k + l - m / t
            out["var_K3"] = m / t
            out["g2"] = (1 - 1 / n) * (1 + 1 / (2 * t)) if n >= 1 else inf
            out["var_q"] = 2 * (k + l) - 2 * m * value
            out["var_p"] = 2 * (k + l) + 2 * m * value
    elif family is Family.K1K2:
        eta = value
        if regime is Regime.SMALL:
            out["mean_K3"] = (2 * n + 1) / (4 * eta)
            out["var_K3"] = (2 * n + 1) / (8 * eta * eta)
            out["g2"] = (2 * n + 3) / (2 * n + 1)
            out["var_q"] = (2 * n + 1) / eta
        else:
            d = 1 - eta * eta
            out["mean_K3"] = k + (k + l) ** 2 / (2 * k) * d
            out["var_K3"] = (k + l) ** 2 / (2 * k) * d
            out["g2"] = 1 / ((n + 0.5) ** 2 * d) if k < 0.5 else (n + 0.5) ** 2 * d
            out["var_q"] = 2 * k + 2 * (k + l) * math.sqrt(d) + (k + l) ** 2 / k * d
            out["var_p"] = 2 * k - 2 * (k + l) * math.sqrt(d) + (k + l) ** 2 / k * d
    else:
        eta = value
        if regime is Regime.SMALL:
            out["mean_K3"] = (2 * n + 1) / 4 * (1 + eta * eta / 2)
            out["var_K3"] = (n * n + n + 1) / 8 * eta * eta
            out["g2"] = 1 - 1 / n + (2 * n * n + 4 * n + 3) / (4 * n * n) * eta * eta if n != 0 else inf
            out["var_q"] = (2 * n + 1) / 2 + (n * n + n + 1) / 2 * eta + (2 * n + 1) / 4 * eta * eta
            out["var_p"] = (2 * n + 1) / 2 - (n * n + n + 1) / 2 * eta + (2 * n + 1) / 4 * eta * eta
            out["var_K1"] = out["var_K2"] = (n * n + n + 1) / 8
        else:
            out["mean_K3"] = (2 * n + 1) / 4 * eta
            out["var_K3"] = (2 * n + 1) / 8 * eta * eta
            out["g2"] = (2 * n + 3) / (2 * n + 1) - 2 * (2 * n - 1) / ((2 * n + 1) ** 2 * eta)
            out["var_q"] = (2 * n + 1) * eta
            out["var_K1"] = (2 * n + 1) / 8 * eta * eta
            out["var_K2"] = (2 * n + 1) / 8
    return out
