"""Self-checks run by ``su11states verify``: every closed form against the Fock
oracle, special-function identities, and the generation pipeline."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import specfun
from .algebra import build_state_general, spectral_data, theta_hypergeometric, theta_ratio
from .errors import SU11Error
from .fock import EVEN, ODD, OperatorKind, Representation, build_operator, load_fixture, oracle_moments
from .moments import (
    Family,
    FamilyParams,
    analytic_state,
    family_beta,
    full_report,
    limit_check,
    mean_k3_from_norm,
    oracle_state,
)
from .report import NUMERIC_FIELDS
from .scheme import SchemeParams, run_pipeline


@dataclass
class CheckResult:
    name: str
    max_error: float
    tol: float
    count: int
    seconds: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tol

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail and not self.passed else ""
        return f"{status}  {self.name:<34} max_err={self.max_error:.3e}  tol={self.tol:.0e}  n={self.count}  {self.seconds:.1f}s{extra}"


FAMILY_GRIDS_FULL = {
    Family.K3_MINUS_CHI_KPLUS: [FamilyParams.polar(m, th) for m, th in zip((0.05, 0.2, 0.35, 0.5, 0.6, 0.7, 0.8, 0.85), (0.0, 0.4, 1.1, 2.0, 3.1416, -0.7, 0.9, -2.5))],
    Family.K3_PLUS_CHI_KMINUS: [FamilyParams.polar(m, th) for m, th in zip((0.2, 0.5, 0.8, 0.95, 1.1, 1.5, 3.0, 10.0), (0.0, 0.4, 1.1, 2.0, 3.1416, -0.7, 0.9, -2.5))],
    Family.K1K2: [FamilyParams(eta=e) for e in (0.1, 0.2, 0.35, 0.5, 0.6, 0.75, 0.9, 0.97)],
    Family.K2K3: [FamilyParams(eta=e) for e in (0.1, 0.3, 0.7, 1.0, 2.0, 3.5, 5.0, 8.0)],
}
FAMILY_GRIDS_SMALL = {fam: pts[::3] for fam, pts in FAMILY_GRIDS_FULL.items()}

# every point keeps the two-mode tail below 1e-14 at the default truncation of 128
SCHEME_POINTS_FULL = [
    SchemeParams(0.5, 0.8, 0.3, 0.1, "b", 2),
    SchemeParams(0.5, 0.8, 1.0, 0.0, "b", 3),
    SchemeParams(0.3, 0.4, -1.2, 0.0, "b", 0),
    SchemeParams(0.2, 0.6, 3.0, 0.0, "b", 1),
    SchemeParams(0.7, 0.6, 0.5, 0.0, "b", 6),
    SchemeParams(0.6, 0.5, -2.0, 0.7, "b", 4),
    SchemeParams(0.4, 1.0, 0.0, 0.0, "a", 0),
    SchemeParams(0.3, 0.9, 0.5, 0.2, "a", 3),
    SchemeParams(0.8, 0.5, 0.2, 0.5, "a", 2),
    SchemeParams(0.6, 0.4, -0.4, 0.3, "a", 1),
    SchemeParams(0.7, 0.45, 1.0, -0.2, "a", 3),
    SchemeParams(0.5, 0.3, 2.0, 0.0, "a", 5),
]
SCHEME_POINTS_SMALL = [SCHEME_POINTS_FULL[i] for i in (0, 3, 7, 9)]


def _grid(grid: str):
    fam_pts = FAMILY_GRIDS_FULL if grid == "full" else FAMILY_GRIDS_SMALL
    ls = range(6) if grid == "full" else range(3)
    for fam, pts in fam_pts.items():
        for rep in (EVEN, ODD):
            for l in ls:
                for p in pts:
                    yield fam, p, rep, l


def _rel(a: float, b: float, small: float = 1e-6) -> float:
    if math.isinf(a) or math.isinf(b):
        return 0.0 if a == b else math.inf
    if abs(a) < small and abs(b) < small:
        return abs(a - b) * 1e3  # absolute 1e-12 maps onto the 1e-9 scale
    return abs(a - b) / max(abs(a), abs(b))


def _run(name: str, tol: float, items: Iterable, fn: Callable) -> CheckResult:
    start = time.perf_counter()
    worst, count, detail = 0.0, 0, ""
    for item in items:
        try:
            err = fn(item)
        except (SU11Error, ArithmeticError) as exc:
            err, detail = math.inf, f"{item}: {exc}"
        count += 1
        if not err <= worst:
            worst = err
            if err > tol:
                detail = detail or f"worst at {item}"
    return CheckResult(name, worst, tol, count, time.perf_counter() - start, detail)


# -- individual checks ----------------------------------------------------------------


def check_specfun(grid: str) -> list[CheckResult]:
    rng = np.random.default_rng(7)
    npts = 200 if grid == "full" else 40
    samples = [(int(rng.integers(0, 12)), rng.uniform(-0.9, 4), rng.uniform(-0.9, 4), rng.uniform(-3, 3)) for _ in range(npts)]

    def reflection(s):
        n, a, b, x = s
        lhs = specfun.jacobi_poly(n, a, b, -x)
        rhs = (-1) ** n * specfun.jacobi_poly(n, b, a, x)
        return abs(lhs - rhs) / max(1.0, abs(rhs))

    def derivative(s):
        _, a, b, z = s
        z = z / 6
        c = abs(a) + 1.5
        h = 1e-5
        fd = (specfun.hyp2f1(a, b, c, z + h) - specfun.hyp2f1(a, b, c, z - h)) / (2 * h)
        exact = a * b / c * specfun.hyp2f1(a + 1, b + 1, c + 1, z)
        return abs(fd - exact) / max(1.0, abs(exact))

    def terminating(s):
        n, _, _, z = s
        l, k = n % 7, (0.25, 0.75)[n % 2]
        z = -abs(z) * 0.33
        f = specfun.hyp2f1(-l, l + 2 * k, 2 * k, z)
        # P_l^(2k-1,0)(1-2z) = binom(l+2k-1, l) F(-l, l+2k; 2k; z)
        binom = math.exp(math.lgamma(l + 2 * k) - math.lgamma(l + 1) - math.lgamma(2 * k))
        jac = specfun.jacobi_poly(l, 2 * k - 1, 0.0, 1 - 2 * z) / binom
        return abs(f - jac) / max(1.0, abs(f))

    return [
        _run("jacobi reflection", 1e-12, samples, reflection),
        _run("2F1 derivative vs finite diff", 1e-6, samples, derivative),
        _run("terminating 2F1 = Jacobi", 1e-12, samples, terminating),
    ]


def check_operators(grid: str) -> list[CheckResult]:
    def algebra(rep):
        nm = 40
        ops = {kd: build_operator(rep, kd, nm).toarray() for kd in OperatorKind if kd.value in ("Kplus", "Kminus", "K1", "K2", "K3")}
        kp, km, k3 = ops[OperatorKind.KPLUS], ops[OperatorKind.KMINUS], ops[OperatorKind.K3]
        k1, k2 = ops[OperatorKind.K1], ops[OperatorKind.K2]
        inner = slice(0, nm - 2)
        e1 = np.abs((km @ kp - kp @ km - 2 * k3)[inner, inner]).max()
        e2 = np.abs((k3 @ kp - kp @ k3 - kp)[inner, inner]).max()
        cas = k3 @ k3 - k1 @ k1 - k2 @ k2
        e3 = np.abs((cas - rep.k * (rep.k - 1) * np.eye(nm + 1))[inner, inner]).max()
        return max(e1, e2, e3)

    return [_run("commutators and Casimir", 1e-12, (EVEN, ODD), algebra)]


def check_amplitudes(grid: str) -> list[CheckResult]:
    def amp(item):
        fam, p, rep, l = item
        a = analytic_state(fam, p, rep, l)
        o = oracle_state(fam, p, rep, l)
        n = max(a.n_max, o.n_max)
        va, vo = a.padded(n).amps, o.padded(n).amps
        phase = np.vdot(va, vo)
        phase = phase / abs(phase)
        return float(np.max(np.abs(va * phase - vo)))

    return [_run("analytic amplitudes vs recursion", 1e-9, list(_grid(grid)), amp)]


def check_reports(grid: str) -> list[CheckResult]:
    cache = {}

    def pair(item):
        if item not in cache:
            fam, p, rep, l = item
            cache[item] = (full_report(fam, p, rep, l), oracle_moments(oracle_state(fam, p, rep, l), fam.pair))
        return cache[item]

    def fields(item):
        a, o = pair(item)
        return max(_rel(getattr(a, f), getattr(o, f)) for f in NUMERIC_FIELDS)

    def saturation(item):
        fam = item[0]
        if fam not in (Family.K1K2, Family.K2K3):
            return 0.0
        return abs(pair(item)[1].saturation_residual)

    def quad_means(item):
        o = pair(item)[1]
        return max(abs(o.mean_q), abs(o.mean_p), abs(o.mean_N - (2 * o.mean_K3 - 0.5)) / max(1, o.mean_N))

    items = list(_grid(grid))
    return [
        _run("closed-form report vs oracle", 1e-9, items, fields),
        _run("intelligent-state saturation", 1e-9, items, saturation),
        _run("<q>=<p>=0 and <N>=2<K3>-1/2", 1e-12, items, quad_means),
    ]


def check_normalization(grid: str) -> list[CheckResult]:
    items = [it for it in _grid(grid) if it[0] in (Family.K1K2, Family.K2K3, Family.K3_PLUS_CHI_KMINUS)]

    def norm(item):
        fam, p, rep, l = item
        beta, lam = family_beta(fam, p, rep, l)
        st = build_state_general(beta, l, +1, rep, lam=lam)
        return abs(st.norm_N - st.norm_sum) / st.norm_N

    def theta(item):
        fam, p, rep, l = item
        beta, _ = family_beta(fam, p, rep, l)
        sd = spectral_data(beta)
        if l == 0:
            return abs(theta_ratio(sd, rep, 0))
        a, b = theta_ratio(sd, rep, l), theta_hypergeometric(sd, rep, l)
        return abs(a - b) / max(1.0, abs(a))

    def deriv(item):
        fam, p, rep, l = item
        beta, _ = family_beta(fam, p, rep, l)
        sd = spectral_data(beta)
        if abs(1 - sd.t) < 1e-3:
            return 0.0
        ref = full_report(fam, p, rep, l).mean_K3
        return abs(mean_k3_from_norm(sd, rep, l) - ref) / ref

    return [
        _run("closed-form N vs direct sum", 1e-9, items, norm),
        _run("Theta Jacobi vs 2F1 form", 1e-10, items, theta),
        _run("<K3> from dN/dt", 1e-6, items, deriv),
    ]


def check_family_identities(grid: str) -> list[CheckResult]:
    items = list(_grid(grid))

    def oracle(fam, p, rep, l):
        return oracle_moments(oracle_state(fam, p, rep, l), fam.pair)

    def k2k3(item):
        fam, p, rep, l = item
        if fam is not Family.K2K3:
            return 0.0
        r = oracle(fam, p, rep, l)
        eta = p.eta
        return max(_rel(r.var_K2, r.var_K3 / eta**2), _rel(r.mean_K1, 2 * r.var_K3 / eta))

    def quad_sym(item):
        fam, p, rep, l = item
        if fam is not Family.K3_MINUS_CHI_KPLUS:
            return 0.0
        a = oracle(fam, p, rep, l)
        b = oracle(fam, FamilyParams(chi=-p.chi), rep, l)
        return abs(a.var_q - b.var_p) / a.var_q

    return [
        _run("K2-K3 variance identities", 1e-9, items, k2k3),
        _run("quadrature swap under theta+pi", 1e-9, items, quad_sym),
    ]


def check_limits(grid: str) -> list[CheckResult]:
    if grid != "full":
        return []
    cases = []
    for n in range(0, 7):
        rep, l = Representation.from_photon_number(n)
        if n >= 1:
            cases.append((Family.K3_MINUS_CHI_KPLUS, rep, l, "small", 1e-3, 5e-3))
        cases.append((Family.K1K2, rep, l, "small", 1e-3, 5e-3))
        cases.append((Family.K2K3, rep, l, "large", 1e3, 5e-3))
        if n >= 1:
            cases.append((Family.K2K3, rep, l, "small", 1e-3, 5e-3))

    def lim(case):
        fam, rep, l, regime, val, _ = case
        pred = limit_check(fam, rep, l, regime, val)
        rep_ = full_report(fam, val, rep, l)
        return max(abs(pred["g2"] - rep_.g2), abs(pred["mean_K3"] - rep_.mean_K3) / rep_.mean_K3)

    return [_run("limit formulas at 1e-3 / 1e3", 5e-3, cases, lim)]


def check_scheme(grid: str) -> list[CheckResult]:
    pts = SCHEME_POINTS_FULL if grid == "full" else SCHEME_POINTS_SMALL
    results = {}

    def res(p):
        if p not in results:
            results[p] = run_pipeline(p)
        return results[p]

    return [
        _run("pipeline fidelity 1-F", 1e-8, pts, lambda p: 1 - res(p).fidelity),
        _run("conditional eigen-equation", 1e-8, pts, lambda p: res(p).conditional_residual),
        _run("post-transformed eigen-equation", 1e-8, pts, lambda p: res(p).final_residual),
    ]


def check_fixture(path: str) -> CheckResult:
    """Compare a golden fixture with a fresh closed-form build of the same state."""
    start = time.perf_counter()
    with open(path, encoding="utf-8") as fh:
        header, stored = load_fixture(fh.read())
    fam = Family.parse(header["family"])
    prm = header["params"]
    if fam.uses_chi:
        p = FamilyParams.polar(prm.get("chi_mag", 0.0), prm.get("theta", 0.0))
    else:
        p = FamilyParams(eta=prm["eta"])
    rep = Representation.from_k(header["k"])
    fresh = analytic_state(fam, p, rep, header["l"])
    n = max(fresh.n_max, stored.n_max)
    diff = np.abs(fresh.padded(n).amps - stored.padded(n).amps)
    worst = int(np.argmax(diff))
    detail = f"mismatch at n={worst}: stored {stored.padded(n).amps[worst]:.17g} vs fresh {fresh.padded(n).amps[worst]:.17g}"
    return CheckResult(f"fixture {path}", float(diff.max()), 1e-10, n + 1, time.perf_counter() - start, detail)


ALL_CHECKS = (
    check_specfun,
    check_operators,
    check_amplitudes,
    check_reports,
    check_normalization,
    check_family_identities,
    check_limits,
    check_scheme,
)


def run_all(grid: str = "small") -> list[CheckResult]:
    out: list[CheckResult] = []
    for check in ALL_CHECKS:
        out.extend(check(grid))
    return out
