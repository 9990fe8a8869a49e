"""The observables record returned by both the closed forms and the Fock oracle."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

# Strict-inequality guard band for the squeezing / statistics flags.
FLAG_GUARD = 1e-12

NUMERIC_FIELDS = (
    "mean_K3",
    "var_K3",
    "mean_K1",
    "mean_K2",
    "var_K1",
    "var_K2",
    "cov_AB",
    "mean_N",
    "var_N",
    "g2",
    "var_q",
    "var_p",
)

# (A, B) -> generator whose mean bounds the product of variances: C = -i[A, B] up to sign.
_COMMUTATOR_PARTNER = {
    ("K1", "K2"): "K3",
    ("K2", "K3"): "K1",
    ("K3", "K1"): "K2",
}


def g2_from_photon_moments(mean_N: float, var_N: float) -> float:
    """Intensity correlation g2 = 1 + (var_N - mean_N) / mean_N**2; +inf when mean_N = 0."""
    if abs(mean_N) < 1e-14:
        return math.inf
    return 1.0 + (var_N - mean_N) / mean_N**2


@dataclass(frozen=True)
class MomentsReport:
    k: float
    mean_K3: float
    var_K3: float
    mean_K1: float
    mean_K2: float
    var_K1: float
    var_K2: float
    cov_AB: float
    mean_N: float
    var_N: float
    g2: float
    var_q: float
    var_p: float
    pair: tuple[str, str] = ("K1", "K2")
    mean_q: float = 0.0
    mean_p: float = 0.0
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def delta0_sq(self) -> float:
        return self.k / 2

    @property
    def g2_infinite(self) -> bool:
        return math.isinf(self.g2)

    def _var(self, name: str) -> float:
        return {"K1": self.var_K1, "K2": self.var_K2, "K3": self.var_K3}[name]

    def _mean(self, name: str) -> float:
        return {"K1": self.mean_K1, "K2": self.mean_K2, "K3": self.mean_K3}[name]

    @property
    def uncertainty_product(self) -> float:
        a, b = self.pair
        return self._var(a) * self._var(b)

    @property
    def uncertainty_bound(self) -> float:
        """One quarter of the squared mean commutator for the report's pair."""
        return 0.25 * self._mean(_COMMUTATOR_PARTNER[self.pair]) ** 2

    @property
    def saturation_residual(self) -> float:
        """(product - bound) / bound; absolute difference when the bound vanishes."""
        bound = self.uncertainty_bound
        diff = self.uncertainty_product - bound
        return diff / bound if bound > 0 else diff

    @property
    def flags(self) -> dict[str, bool]:
        g = FLAG_GUARD
        return {
            "linear_squeezed_q": self.var_q < 0.5 - g,
            "linear_squeezed_p": self.var_p < 0.5 - g,
            "relative_quad_squeezed_K1": self.var_K1 < 0.5 * self.mean_K3 - g,
            "relative_quad_squeezed_K2": self.var_K2 < 0.5 * self.mean_K3 - g,
            "absolute_quad_squeezed_K1": self.var_K1 < self.delta0_sq - g,
            "absolute_quad_squeezed_K2": self.var_K2 < self.delta0_sq - g,
            "sub_poissonian": (not self.g2_infinite) and self.g2 < 1.0 - g,
        }

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("extra")
        d["pair"] = "-".join(self.pair)
        d["delta0_sq"] = self.delta0_sq
        d["saturation_residual"] = self.saturation_residual
        d.update(self.flags)
        return d


def compare_reports(
    a: MomentsReport,
    b: MomentsReport,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    small: float = 1e-6,
) -> list[tuple[str, float, float, float]]:
    """Fields where ``a`` and ``b`` disagree.

    Fields with magnitude below ``small`` in both reports are compared
    absolutely at ``atol``; all others relatively at ``rtol``. Infinite g2
    values must coincide.

    Returns:
        list of (field, a_value, b_value, error) tuples; empty when all match.
    """
    bad = []
    for name in NUMERIC_FIELDS:
        x, y = getattr(a, name), getattr(b, name)
        if math.isinf(x) or math.isinf(y):
            if x != y:
                bad.append((name, x, y, math.inf))
            continue
        if abs(x) < small and abs(y) < small:
            err = abs(x - y)
            if err > atol:
                bad.append((name, x, y, err))
        else:
            err = abs(x - y) / max(abs(x), abs(y))
            if err > rtol:
                bad.append((name, x, y, err))
    return bad
