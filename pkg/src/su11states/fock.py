"""Truncated Fock-space realization of the two-photon SU(1,1) algebra.

    K+ = a^dag^2 / 2,   K- = a^2 / 2,   K3 = a^dag a / 2 + 1/4

act within the even (k = 1/4) and odd (k = 3/4) photon-number sectors. Sector
index n labels |n, k> = |2n> (even) or |2n + 1> (odd).

This module is the brute-force side of every cross-check in the package: states
come from the Fock-basis recursion of the eigenvalue equation and observables
from explicit matrix-vector contractions. It deliberately shares no code with
:mod:`su11states.algebra` or :mod:`su11states.moments`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import NonNormalizable, ResidualTooLarge, TruncationTooSmall
from .report import MomentsReport, g2_from_photon_moments

DEFAULT_NMAX = 256
MAX_NMAX = 4096
TAIL_TOL = 1e-14
RESIDUAL_TOL = 1e-8
# rows at the top of a truncation where banded operators are clipped
EDGE_ROWS = 3


class Parity(enum.Enum):
    EVEN = 0
    ODD = 1


@dataclass(frozen=True)
class Representation:
    """Bargmann index k and the photon-number parity sector it lives in."""

    parity: Parity

    @property
    def k(self) -> float:
        return 0.25 if self.parity is Parity.EVEN else 0.75

    bargmann_k = k

    @classmethod
    def from_k(cls, k: float) -> "Representation":
        if abs(k - 0.25) < 1e-12:
            return EVEN
        if abs(k - 0.75) < 1e-12:
            return ODD
        raise ValueError(f"two-photon realization has k in {{1/4, 3/4}}, got {k}")

    @classmethod
    def from_photon_number(cls, n: int) -> tuple["Representation", int]:
        """Sector and quantum number l = floor(n/2) of photon number n."""
        if n < 0:
            raise ValueError("photon number must be non-negative")
        return (EVEN if n % 2 == 0 else ODD), n // 2

    def photon_number(self, idx):
        return 2 * np.asarray(idx) + self.parity.value

    def __str__(self):
        return f"k={'1/4' if self.parity is Parity.EVEN else '3/4'}"


EVEN = Representation(Parity.EVEN)
ODD = Representation(Parity.ODD)


@dataclass(frozen=True, eq=False)
class FockVector:
    """Amplitudes C_0..C_nmax of a state in one SU(1,1) sector."""

    rep: Representation
    amps: np.ndarray

    def __post_init__(self):
        a = np.array(self.amps, dtype=complex)
        a.setflags(write=False)
        object.__setattr__(self, "amps", a)

    @property
    def n_max(self) -> int:
        return len(self.amps) - 1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def tail_mass(self) -> float:
        """Probability in sector indices above 0.9 * n_max."""
        start = int(math.floor(0.9 * self.n_max)) + 1
        return float(np.sum(np.abs(self.amps[start:]) ** 2))

    def truncation_ok(self, tol: float = TAIL_TOL) -> bool:
        return self.tail_mass() < tol

    def normalized(self) -> "FockVector":
        return FockVector(self.rep, _fix_phase(self.amps / np.linalg.norm(self.amps)))

    def padded(self, n_max: int) -> "FockVector":
        if n_max < self.n_max:
            raise ValueError("cannot pad to a smaller truncation")
        out = np.zeros(n_max + 1, dtype=complex)
        out[: len(self.amps)] = self.amps
        return FockVector(self.rep, out)

    def photon_amplitudes(self, dim: int | None = None) -> np.ndarray:
        """Amplitudes on the full photon-number basis |0>, |1>, ..."""
        if dim is None:
            dim = 2 * (self.n_max + 1) + 2
        out = np.zeros(dim, dtype=complex)
        idx = self.rep.photon_number(np.arange(len(self.amps)))
        keep = idx < dim
        out[idx[keep]] = self.amps[keep]
        return out

    @classmethod
    def from_photon_amplitudes(cls, photon: np.ndarray, rep: Representation) -> "FockVector":
        return cls(rep, np.asarray(photon)[rep.parity.value :: 2])

    def overlap(self, other: "FockVector") -> complex:
        if self.rep != other.rep:
            return 0.0j
        n = min(len(self.amps), len(other.amps))
        return complex(np.vdot(self.amps[:n], other.amps[:n]))

    def fidelity(self, other: "FockVector") -> float:
        return abs(self.overlap(other)) ** 2 / (self.norm**2 * other.norm**2)


def _fix_phase(amps: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first non-negligible amplitude is real positive."""
    mag = np.abs(amps)
    if not mag.any():
        return amps
    first = int(np.argmax(mag > 1e-200 * mag.max()))
    return amps * (abs(amps[first]) / amps[first])


# -- operators ------------------------------------------------------------------------


class OperatorKind(enum.Enum):
    KPLUS = "Kplus"
    KMINUS = "Kminus"
    K3 = "K3"
    K1 = "K1"
    K2 = "K2"
    N = "N"
    Q = "q"
    P = "p"
    Q2 = "q2"
    P2 = "p2"
    A = "a"
    ADAG = "adag"


PHOTON_BASIS_KINDS = {OperatorKind.Q, OperatorKind.P, OperatorKind.A, OperatorKind.ADAG}


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Banded sparse matrix of an operator.

    ``basis`` is ``"sector"`` for parity-preserving operators (size
    (n_max+1)^2) and ``"photon"`` for a, a^dag, q, p, which connect the two
    sectors and act on photon numbers 0..2*n_max+1.
    """

    rep: Representation
    kind: OperatorKind
    matrix: sp.csr_matrix
    basis: str = "sector"

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return self.matrix @ other.matrix
        return self.matrix @ other

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def _photon_lowering(dim: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, dim, dtype=float)), 1, shape=(dim, dim), format="csr", dtype=complex)


def _sector_kplus(k: float, size: int) -> sp.csr_matrix:
    n = np.arange(size - 1, dtype=float)
    return sp.diags(np.sqrt((n + 1) * (n + 2 * k)), -1, shape=(size, size), format="csr", dtype=complex)


def build_operator(rep: Representation, kind: OperatorKind | str, n_max: int) -> OperatorMatrix:
    """Matrix of ``kind`` on the truncated basis |0,k>..|n_max,k>.

    Raises:
        TruncationTooSmall: n_max < 4.
    """
    kind = OperatorKind(kind) if not isinstance(kind, OperatorKind) else kind
    if n_max < 4:
        raise TruncationTooSmall(f"n_max must be at least 4, got {n_max}")
    size = n_max + 1
    k = rep.k

    if kind in PHOTON_BASIS_KINDS:
        dim = 2 * size
        a = _photon_lowering(dim)
        mat = {
            OperatorKind.A: a,
            OperatorKind.ADAG: a.conj().T,
            OperatorKind.Q: (a + a.conj().T) / math.sqrt(2),
            OperatorKind.P: (a - a.conj().T) / (1j * math.sqrt(2)),
        }[kind]
        return OperatorMatrix(rep, kind, sp.csr_matrix(mat), basis="photon")

    if kind in (OperatorKind.Q2, OperatorKind.P2):
        # build on the photon basis with one spare level so the projection is not clipped
        dim = 2 * size + 2
        a = _photon_lowering(dim)
        ad = a.conj().T
        quad = (a + ad) / math.sqrt(2) if kind is OperatorKind.Q2 else (a - ad) / (1j * math.sqrt(2))
        sq = (quad @ quad).tocsr()
        idx = rep.photon_number(np.arange(size))
        return OperatorMatrix(rep, kind, sp.csr_matrix(sq[idx][:, idx]))

    kp = _sector_kplus(k, size)
    km = kp.conj().T.tocsr()
    diag = k + np.arange(size, dtype=float)
    mats = {
        OperatorKind.KPLUS: kp,
        OperatorKind.KMINUS: km,
        OperatorKind.K3: sp.diags(diag, 0, format="csr", dtype=complex),
        OperatorKind.K1: (kp + km) / 2,
        OperatorKind.K2: (kp - km) / 2j,
        OperatorKind.N: sp.diags(2 * np.arange(size, dtype=float) + rep.parity.value, 0, format="csr", dtype=complex),
    }
    return OperatorMatrix(rep, kind, sp.csr_matrix(mats[kind]))


def _beta_triplet(beta) -> tuple[complex, complex, complex]:
    if hasattr(beta, "beta1"):
        return complex(beta.beta1), complex(beta.beta2), complex(beta.beta3)
    b1, b2, b3 = beta
    return complex(b1), complex(b2), complex(b3)


def beta_dot_k(beta, rep: Representation, n_max: int) -> sp.csr_matrix:
    """Sector matrix of beta1 K1 + beta2 K2 + beta3 K3."""
    b1, b2, b3 = _beta_triplet(beta)
    ops = [build_operator(rep, kd, n_max).matrix for kd in (OperatorKind.K1, OperatorKind.K2, OperatorKind.K3)]
    return (b1 * ops[0] + b2 * ops[1] + b3 * ops[2]).tocsr()


def eigen_residual(state: FockVector, beta, lam: complex, edge: int = EDGE_ROWS) -> float:
    """Norm of (beta.K - lambda)|psi> over the truncation interior."""
    m = beta_dot_k(beta, state.rep, state.n_max)
    r = m @ state.amps - lam * state.amps
    return float(np.linalg.norm(r[: state.n_max + 1 - edge]))


# -- recursion oracle ----------------------------------------------------------------


def _forward(bp, bm, b3, lam, k, size):
    c = np.zeros(size, dtype=complex)
    c[0] = 1.0
    for n in range(size - 1):
        acc = (b3 * (k + n) - lam) * c[n]
        if n > 0:
            acc += bm * math.sqrt(n * (n - 1 + 2 * k)) * c[n - 1]
        c[n + 1] = -acc / (bp * math.sqrt((n + 1) * (n + 2 * k)))
        if n % 32 == 31:
            big = np.max(np.abs(c[: n + 2]))
            if big > 1e100:
                c[: n + 2] /= big
    return c


def _first_order(bm, b3, lam, k, size, tol):
    # beta_plus = 0: (b3 (k+n) - lam) C_n = -bm sqrt(n (n-1+2k)) C_{n-1}
    gaps = np.array([b3 * (k + n) - lam for n in range(size)])
    start = np.flatnonzero(np.abs(gaps) < tol * max(1.0, abs(lam)))
    if start.size == 0:
        raise NonNormalizable(f"lambda={lam} is not of the form beta3 (k + l)")
    l = int(start[0])
    c = np.zeros(size, dtype=complex)
    c[l] = 1.0
    for n in range(l + 1, size):
        c[n] = -bm * math.sqrt(n * (n - 1 + 2 * k)) * c[n - 1] / gaps[n]
        if n % 32 == 0:
            big = np.max(np.abs(c[: n + 1]))
            if big > 1e100:
                c[: n + 1] /= big
    return c


def _recursion_amplitudes(beta, lam, rep, n_max):
    b1, b2, b3 = _beta_triplet(beta)
    bp = (b1 + 1j * b2) / 2
    bm = (b1 - 1j * b2) / 2
    k = rep.k
    size = n_max + 1
    scale = max(abs(b1), abs(b2), abs(b3))
    if abs(bp) <= 1e-14 * scale:
        return _first_order(bm, b3, lam, k, size, 1e-10)
    if abs(bm) <= 1e-14 * scale:
        return _forward(bp, 0.0, b3, lam, k, size)
    # large-n behaviour C_n ~ rho^n with bp rho^2 + b3 rho + bm = 0
    disc = np.sqrt(complex(b3 * b3 - 4 * bp * bm))
    roots = sorted([abs((-b3 + disc) / (2 * bp)), abs((-b3 - disc) / (2 * bp))])
    if roots[1] < 1.0:
        return _forward(bp, bm, b3, lam, k, size)
    # the normalizable solution is the recessive one: Miller's backward recursion
    ratio = roots[1] / roots[0] if roots[0] > 0 else math.inf
    margin = 20 if ratio == math.inf else int(min(20000, max(20, math.ceil(40.0 / math.log(ratio)))))
    return _two_sided(bp, bm, b3, lam, k, size, margin)


def _two_sided(bp, bm, b3, lam, k, size, margin):
    """Forward sweep below the amplitude peak, Miller's backward sweep above it.

    Both sweeps run on ratios C_{n+1}/C_n, so neither overflows. Below the
    peak the wanted solution grows upward and the forward ratios are stable;
    above it the backward ones are. The splice point is where the two agree best.
    """
    top = size - 1 + margin
    rb = np.zeros(top + 1, dtype=complex)  # rb[n] = C_{n+1} / C_n, with C_{top+1} = 0
    for n in range(top, 0, -1):
        # C_{n-1}/C_n from row n, then invert
        q = -((b3 * (k + n) - lam) + bp * math.sqrt((n + 1) * (n + 2 * k)) * rb[n]) / (bm * math.sqrt(n * (n - 1 + 2 * k)))
        rb[n - 1] = 1.0 / q if q != 0 else np.inf
    rf = np.zeros(size - 1, dtype=complex)  # from C_{-1} = 0
    prev = None
    for n in range(size - 1):
        acc = b3 * (k + n) - lam
        if n > 0:
            acc += bm * math.sqrt(n * (n - 1 + 2 * k)) / prev if prev != 0 else np.inf
        rf[n] = -acc / (bp * math.sqrt((n + 1) * (n + 2 * k)))
        prev = rf[n]
    rb = rb[: size - 1]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        mismatch = np.abs(rf - rb) / np.abs(rb)
    mismatch[~np.isfinite(mismatch)] = np.inf
    m = int(np.argmin(mismatch))
    if not np.isfinite(mismatch[m]):
        m = 0
    c = np.zeros(size, dtype=complex)
    c[m] = 1.0
    for j in range(m - 1, -1, -1):
        c[j] = c[j + 1] / rf[j]
    for j in range(m + 1, size):
        c[j] = c[j - 1] * rb[j - 1]
    return c


def eigenstate_by_recursion(beta, lam: complex, rep: Representation, n_max: int | None = None) -> FockVector:
    """Normalized solution of (beta1 K1 + beta2 K2 + beta3 K3)|psi> = lam |psi>.

    The eigenvalue equation in the sector basis is a three-term recursion for
    C_n. It is run forward from C_0 (or from C_l when beta_plus = 0), and
    backward from beyond the truncation when the wanted solution is the
    recessive one. ``n_max=None`` starts at 256 and doubles until the tail
    criterion holds.

    Raises:
        NonNormalizable: the amplitude tail does not decay within 4096 levels.
        ResidualTooLarge: the eigenvalue equation fails on the interior rows.
    """
    fixed = n_max is not None
    n_max = n_max if fixed else DEFAULT_NMAX
    if n_max < 4:
        raise TruncationTooSmall(f"n_max must be at least 4, got {n_max}")
    while True:
        c = _recursion_amplitudes(beta, lam, rep, n_max)
        norm = np.linalg.norm(c)
        if np.isfinite(norm) and norm > 0:
            state = FockVector(rep, _fix_phase(c / norm))
            if state.truncation_ok():
                break
        if fixed or n_max >= MAX_NMAX:
            raise NonNormalizable(f"amplitude tail does not decay within n_max={n_max}")
        n_max *= 2
    res = eigen_residual(state, beta, lam)
    if res > RESIDUAL_TOL:
        raise ResidualTooLarge(f"eigen-equation residual {res:.3e} exceeds {RESIDUAL_TOL}")
    return state


# -- direct-summation observables ----------------------------------------------------


def _expect(vec, op, other=None):
    other = vec if other is None else other
    return complex(np.vdot(vec, op @ other))


def oracle_moments(state: FockVector, pair: Sequence[str] = ("K1", "K2")) -> MomentsReport:
    """Every MomentsReport field by explicit contraction with the operator matrices.

    ``pair`` names the two generators whose covariance goes into ``cov_AB``.

    Raises:
        TruncationTooSmall: the state carries too much weight near its truncation.
    """
    if not state.truncation_ok():
        raise TruncationTooSmall(f"tail mass {state.tail_mass():.3e} above {TAIL_TOL}")
    rep = state.rep
    k = rep.k
    # pad so that K+- and K+-^2 images are never clipped
    psi = state.padded(state.n_max + 4)
    n_max = psi.n_max
    c = psi.amps / np.linalg.norm(psi.amps)
    prob = np.abs(c) ** 2

    k3 = k + np.arange(n_max + 1)
    mean_k3 = float(np.sum(prob * k3))
    var_k3 = float(np.sum(prob * (k3 - mean_k3) ** 2))

    gens = {name: build_operator(rep, name, n_max).matrix for name in ("K1", "K2", "K3")}
    means = {name: _expect(c, gens[name]).real for name in gens}
    centred = {name: gens[name] @ c - means[name] * c for name in gens}
    variances = {name: float(np.vdot(centred[name], centred[name]).real) for name in gens}
    a, b = pair
    cov = float(np.vdot(centred[a], centred[b]).real)

    photon = psi.photon_amplitudes()
    dim = len(photon)
    nums = np.arange(dim)
    pphot = np.abs(photon) ** 2
    mean_n = float(np.sum(pphot * nums))
    var_n = float(np.sum(pphot * (nums - mean_n) ** 2))

    low = _photon_lowering(dim)
    q = (low + low.conj().T) / math.sqrt(2)
    p = (low - low.conj().T) / (1j * math.sqrt(2))
    mean_q = _expect(photon, q).real
    mean_p = _expect(photon, p).real
    dq = q @ photon - mean_q * photon
    dp = p @ photon - mean_p * photon

    return MomentsReport(
        k=k,
        mean_K3=mean_k3,
        var_K3=var_k3,
        mean_K1=means["K1"],
        mean_K2=means["K2"],
        var_K1=variances["K1"],
        var_K2=variances["K2"],
        cov_AB=cov,
        mean_N=mean_n,
        var_N=var_n,
        g2=g2_from_photon_moments(mean_n, var_n),
        var_q=float(np.vdot(dq, dq).real),
        var_p=float(np.vdot(dp, dp).real),
        pair=(a, b),
        mean_q=mean_q,
        mean_p=mean_p,
        extra={"mean_K3_direct": means["K3"]},
    )


# -- golden-fixture text format --------------------------------------------------------

FIXTURE_AMP_CUTOFF = 1e-20


def dump_fixture(state: FockVector, l: int, family: str, params: dict) -> str:
    """Serialize as ``k,l,family,key=value...`` then ``n,Re(Cn),Im(Cn)`` lines.

    Amplitudes below 1e-20 in magnitude (including exact zeros) are omitted.
    """
    head = [f"{state.rep.k:.17g}", str(l), family] + [f"{key}={_fmt(val)}" for key, val in params.items()]
    lines = [",".join(head)]
    for n, cn in enumerate(state.amps):
        if abs(cn) >= FIXTURE_AMP_CUTOFF:
            lines.append(f"{n},{_fmt(cn.real)},{_fmt(cn.imag)}")
    return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return f"{float(x):.17g}"


def load_fixture(text: str) -> tuple[dict, FockVector]:
    """Inverse of :func:`dump_fixture`; returns (header, state)."""
    rows = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not rows:
        raise ValueError("empty fixture")
    head = rows[0].split(",")
    if len(head) < 3:
        raise ValueError(f"malformed fixture header: {rows[0]!r}")
    params = {}
    for item in head[3:]:
        key, _, val = item.partition("=")
        params[key] = float(val)
    header = {"k": float(head[0]), "l": int(head[1]), "family": head[2], "params": params}
    entries = []
    for ln in rows[1:]:
        parts = ln.split(",")
        if len(parts) != 3:
            raise ValueError(f"malformed amplitude line: {ln!r}")
        entries.append((int(parts[0]), complex(float(parts[1]), float(parts[2]))))
    size = max((n for n, _ in entries), default=0) + 1
    amps = np.zeros(max(size, 5), dtype=complex)
    for n, cn in entries:
        amps[n] = cn
    return header, FockVector(Representation.from_k(header["k"]), amps)
