"""Special functions for the closed-form state amplitudes and moments.

Jacobi polynomials are summed from their explicit finite-sum definition, never
from the three-term recurrence in the degree: the amplitude formulas use
parameters that change with the degree, where the recurrence does not apply.
Terms are accumulated in log-magnitude form so that ``P_n(x) * scale**n`` can be
evaluated for degrees in the thousands without overflow.

The Gauss function 2F1 covers the real arguments the state families need:
terminating series (exact finite sums), Euler's transformation when it makes the
series terminate, the direct series for 0 < z <= 1/2, and Pfaff's transformation
z -> z/(z-1) for negative z (whichever of its two forms cancels least).
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DivergentSeries, ZeroDenominator

__all__ = [
    "jacobi_poly",
    "jacobi_poly_scaled",
    "hyp2f1",
    "hyp2f1_derivative_ratio",
    "log_fock_weight",
    "log_gamma_ratio",
]

_INT_TOL = 1e-12
_SERIES_RTOL = 1e-17
_SERIES_MAX_TERMS = 2_000_000


def _is_nonpos_int(a: float) -> bool:
    return a <= _INT_TOL and abs(a - round(a)) < _INT_TOL


def _binom_table(a: complex | float, m_max: int) -> tuple[np.ndarray, np.ndarray]:
    """log|C(a, m)| and sign(C(a, m)) for m = 0..m_max, generalized binomials.

    The sign is 0 where the coefficient vanishes exactly (a a non-negative
    integer smaller than m).
    """
    i = np.arange(m_max, dtype=float)
    fac = a - i
    zero = np.abs(fac) < _INT_TOL * max(1.0, abs(a))
    safe = np.where(zero, 1.0, fac)
    logs = np.empty(m_max + 1)
    logs[0] = 0.0
    logs[1:] = np.cumsum(np.log(np.abs(safe)) - np.log1p(i))
    sgn = np.empty(m_max + 1)
    sgn[0] = 1.0
    sgn[1:] = np.cumprod(np.where(zero, 0.0, np.sign(safe)))
    return logs, sgn


def jacobi_poly_scaled(n: int, alpha: float, beta: float, x: complex, scale: complex = 1.0) -> tuple[complex, float]:
    r"""Return ``(m, L)`` such that ``P_n^{(alpha,beta)}(x) * scale**n = m * exp(L)``.

    Uses

    .. math::

        P_n^{(\alpha,\beta)}(x) = \sum_{s=0}^{n} \binom{n+\alpha}{n-s}\binom{n+\beta}{s}
        \left(\frac{x-1}{2}\right)^{s} \left(\frac{x+1}{2}\right)^{n-s}

    with the factor ``scale**n`` folded into the two powers.
    """
    if n < 0:
        raise ValueError("Jacobi degree must be non-negative")
    if n == 0:
        return 1.0 + 0.0j, 0.0
    u = complex(scale) * (complex(x) - 1.0) / 2.0
    v = complex(scale) * (complex(x) + 1.0) / 2.0

    la, sa = _binom_table(n + alpha, n)
    lb, sb = _binom_table(n + beta, n)
    s = np.arange(n + 1)
    logs = la[n - s] + lb[s]
    sign = sa[n - s] * sb[s]

    phase = np.ones(n + 1, dtype=complex)
    if u == 0:
        sign = np.where(s == 0, sign, 0.0)
    else:
        logs = logs + s * math.log(abs(u))
        phase = phase * np.exp(1j * s * np.angle(u))
    if v == 0:
        sign = np.where(s == n, sign, 0.0)
    else:
        logs = logs + (n - s) * math.log(abs(v))
        phase = phase * np.exp(1j * (n - s) * np.angle(v))

    live = sign != 0
    if not live.any():
        return 0.0j, 0.0
    top = float(np.max(logs[live]))
    mant = np.sum(np.where(live, sign * phase * np.exp(np.where(live, logs - top, 0.0)), 0.0))
    return complex(mant), top


def jacobi_poly(n: int, alpha: float, beta: float, x):
    """Jacobi polynomial P_n^(alpha, beta)(x) from the explicit finite sum.

    alpha and beta may lie below -1 and may depend on n. Returns a float for
    real x and a complex number otherwise.
    """
    mant, top = jacobi_poly_scaled(n, alpha, beta, x)
    val = mant * math.exp(top) if mant != 0 else 0.0j
    if isinstance(x, (complex, np.complexfloating)) and complex(x).imag != 0.0:
        return complex(val)
    return float(val.real)


def log_gamma_ratio(a: float, b: float) -> float:
    """ln(Gamma(a) / Gamma(b)) for positive a, b."""
    return math.lgamma(a) - math.lgamma(b)


def log_fock_weight(n, k: float):
    """ln(n! Gamma(2k) / Gamma(2k + n)); vectorized over n."""
    from scipy.special import gammaln

    n = np.asarray(n, dtype=float)
    return gammaln(n + 1) + gammaln(2 * k) - gammaln(2 * k + n)


# -- Gauss hypergeometric function -------------------------------------------------


def _terminating_sum(a, b, c, z, m):
    term = 1.0
    total = 1.0
    abs_total = 1.0
    for j in range(m):
        den = (c + j) * (j + 1)
        if den == 0:
            raise ZeroDenominator(f"2F1 pole: c={c} is a non-positive integer reached before termination")
        term *= (a + j) * (b + j) / den * z
        total += term
        abs_total += abs(term)
    return total, abs_total


def _series(a, b, c, z):
    term = 1.0
    total = 1.0
    abs_total = 1.0
    small = 0
    for j in range(_SERIES_MAX_TERMS):
        den = (c + j) * (j + 1)
        if den == 0:
            raise ZeroDenominator(f"2F1 pole: c={c} is a non-positive integer")
        term *= (a + j) * (b + j) / den * z
        total += term
        abs_total += abs(term)
        if abs(term) < _SERIES_RTOL * abs(total):
            small += 1
            if small >= 3:
                return total, abs_total
        else:
            small = 0
    raise DivergentSeries(f"2F1 series did not converge at z={z}")


def _hyp2f1(a, b, c, z) -> tuple[float, float]:
    """(value, sum of |terms|) for real arguments."""
    if z == 0:
        return 1.0, 1.0
    for p, q in ((a, b), (b, a)):
        if _is_nonpos_int(p):
            m = int(round(-p))
            if _is_nonpos_int(c) and int(round(-c)) < m:
                raise ZeroDenominator(f"2F1 undefined: c={c} pole before termination at {m}")
            return _terminating_sum(p, q, c, z, m)
    if _is_nonpos_int(c):
        raise ZeroDenominator(f"2F1 undefined for c={c}")

    if z < 0:
        # Pfaff: F = (1-z)^(-a) F(a, c-b; c; w) = (1-z)^(-b) F(c-a, b; c; w), w = z/(z-1) in (0, 1).
        # The direct series alternates for z < 0, so keep the variant with less cancellation.
        w = z / (z - 1.0)
        best = None
        for p, q, e in ((a, c - b, a), (c - a, b, b)):
            val, absval = _hyp2f1(p, q, c, w)
            pref = (1.0 - z) ** (-e)
            cond = absval / abs(val) if val != 0 else math.inf
            if best is None or cond < best[0]:
                best = (cond, pref * val, abs(pref) * absval)
        return best[1], best[2]
    if z <= 0.5:
        return _series(a, b, c, z)
    # Euler: F(a,b;c;z) = (1-z)^(c-a-b) F(c-a,c-b;c;z) when it terminates
    if _is_nonpos_int(c - a) or _is_nonpos_int(c - b):
        val, absval = _hyp2f1(c - a, c - b, c, z)
        pref = (1.0 - z) ** (c - a - b)
        return pref * val, abs(pref) * absval
    if abs(z) < 1:
        return _series(a, b, c, z)
    raise DivergentSeries(f"2F1({a},{b};{c};{z}): |z| >= 1 with a non-terminating series")


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function F(a, b; c; z) for real arguments.

    Raises:
        DivergentSeries: |z| >= 1 and no transformation yields a finite sum.
        ZeroDenominator: c is a pole of the series.
    """
    return float(_hyp2f1(float(a), float(b), float(c), float(z))[0])


def hyp2f1_derivative_ratio(a: float, b: float, c: float, z: float) -> float:
    """F(a+1, b+1; c+1; z) / F(a, b; c; z).

    Since dF/dz = (ab/c) F(a+1,b+1;c+1;z), this is the logarithmic derivative
    of F divided by ab/c.
    """
    den, den_abs = _hyp2f1(float(a), float(b), float(c), float(z))
    if den == 0 or abs(den) <= 1e-13 * den_abs:
        raise ZeroDenominator(f"F({a},{b};{c};{z}) vanishes")
    num = hyp2f1(a + 1, b + 1, c + 1, z)
    return num / den
