"""Concrete models and their closed-form results.

Every closed form here is an independent oracle for the numerical engines.
It covers the single mode, the two-mode cavity QED model and the bosonic
Kitaev-Majorana chain (BKC) with boundary strength ``s`` and twist ``phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpecError
from .nambu import QBHSpec, build_effective_sph, tau3_diag

__all__ = [
    "OracleResult",
    "BKCParams",
    "single_mode",
    "single_mode_oracle",
    "single_mode_kpr",
    "cavity_qed",
    "cavity_qed_xy",
    "cavity_qed_oracle",
    "cavity_boundary",
    "bkc",
    "bkc_G",
    "bkc_blocks",
    "bkc_open_oracle",
    "bkc_twisted_pi2_oracle",
    "bkc_periodic_oracle",
    "momentum_set",
    "bkc_tdelta_twisted_oracle",
    "kpr_tdelta_twisted",
    "kpr_tdelta_limit",
    "spectral_speed",
    "overlap_tdelta",
    "bkc_tdelta_jordan_oracle",
    "PhaseBoundary",
    "bkc_phase_boundary_oracle",
    "bkc_closed_form_spectrum",
    "bkc_mu",
    "bkc_mu_oracle",
    "majorana_bosons",
    "kitaev_fermion",
    "fermion_to_boson_map",
    "random_qbh",
    "random_decoupled",
    "FAMILIES",
    "family_spec",
    "family_G",
]


@dataclass
class OracleResult:
    spectrum: np.ndarray
    vectors: np.ndarray | None = None  # columns, paired with ``vector_omegas``
    vector_omegas: np.ndarray | None = None
    meta: dict = field(default_factory=dict)


def _G(spec: QBHSpec) -> np.ndarray:
    return build_effective_sph(spec).G


# ---------------------------------------------------------------- single mode


def single_mode(alpha: float, beta: float) -> QBHSpec:
    """``H = alpha p^2 + beta x^2`` with ``x = (a + a^dag)/sqrt2``."""
    return QBHSpec([[alpha + beta]], [[beta - alpha]], label=f"single_mode({alpha},{beta})")


def single_mode_kpr(alpha: float, beta: float) -> float:
    a, b = abs(alpha), abs(beta)
    if a + b == 0:
        raise ValueError("KPR has no limit at alpha = beta = 0")
    return 2.0 * math.sqrt(a * b) / (a + b)


def single_mode_oracle(alpha: float, beta: float) -> OracleResult:
    w = 2.0 * np.sqrt(complex(alpha * beta))
    if alpha == 0 and beta == 0:
        phase = "zero-frequency QHO"
    elif alpha * beta > 0:
        phase = "QHO"
    elif alpha * beta < 0:
        phase = "parametric amplifier"
    else:
        phase = "free particle"
    meta = {"phase": phase, "stable": alpha * beta > 0 or (alpha == 0 and beta == 0)}
    if alpha or beta:
        meta["kpr"] = single_mode_kpr(alpha, beta)
    return OracleResult(np.array([w, -w]), meta=meta)


# ---------------------------------------------------------------- cavity QED


def cavity_qed(omega_c: float, omega_s: float, chi: float) -> QBHSpec:
    """``w_c a^dag a - w_s b^dag b + chi (a + a^dag)(b + b^dag)``."""
    if omega_s <= 0 or omega_c <= 0:
        raise InvalidSpecError("cavity frequencies must be positive")
    K = [[omega_c, chi], [chi, -omega_s]]
    D = [[0.0, chi], [chi, 0.0]]
    return QBHSpec(K, D, label=f"cavity_qed({omega_c},{omega_s},{chi})")


def cavity_qed_xy(x: float, y: float, omega_s: float = 1.0) -> QBHSpec:
    """Dimensionless detuning ``x = (w_c - w_s)/w_s`` and coupling ``y = chi/w_s``."""
    if x <= -1:
        raise InvalidSpecError("detuning x must exceed -1")
    return cavity_qed((1.0 + x) * omega_s, omega_s, y * omega_s)


def cavity_boundary(x):
    """Upper stability boundary ``y_+(x)``; the lower one is ``-y_+``."""
    x = np.asarray(x, dtype=float)
    return (x * x + 2 * x) / (4 * np.sqrt(x + 1))


def cavity_qed_oracle(x: float, y: float, omega_s: float = 1.0) -> OracleResult:
    if x <= -1:
        raise InvalidSpecError("detuning x must exceed -1")
    f = x * x * (x + 2) ** 2 - 16 * y * y * (x + 1)
    sq = np.sqrt(complex(f))
    a = x * x + 2 * x + 2
    o1 = omega_s / math.sqrt(2) * np.sqrt(a + sq)
    o2 = omega_s / math.sqrt(2) * np.sqrt(a - sq)
    yb = float(cavity_boundary(x))
    return OracleResult(
        np.array([o1, -o1, o2, -o2]),
        meta={"f": f, "unstable": f < 0, "y_plus": yb, "y_minus": -yb},
    )


# ---------------------------------------------------------------- BKC


@dataclass(frozen=True)
class BKCParams:
    N: int
    t: float = 1.0
    Delta: float = 0.5
    s: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.N < 2:
            raise InvalidSpecError("BKC needs N >= 2")
        if not 0 <= self.s <= 1:
            raise InvalidSpecError("boundary strength s must lie in [0, 1]")

    @property
    def r(self) -> float:
        """Localization parameter ``2r = ln[(t + Delta)/|t - Delta|]``."""
        if self.t == self.Delta:
            return math.inf
        return 0.5 * math.log((self.t + self.Delta) / abs(self.t - self.Delta))


def bkc(N: int, t: float = 1.0, Delta: float = 0.5, s: float = 0.0, phi: float = 0.0) -> QBHSpec:
    """Bosonic Kitaev-Majorana chain with boundary strength ``s`` and twist ``phi``."""
    BKCParams(N, t, Delta, s, phi)
    K = np.zeros((N, N), dtype=complex)
    D = np.zeros((N, N), dtype=complex)
    j = np.arange(N - 1)
    K[j + 1, j] += 0.5j * t
    K[j, j + 1] += -0.5j * t
    D[j + 1, j] += 0.5j * Delta
    D[j, j + 1] += 0.5j * Delta
    ph = np.exp(1j * phi)
    K[0, N - 1] += 0.5j * s * t * ph
    K[N - 1, 0] += np.conj(0.5j * s * t * ph)
    D[0, N - 1] += 0.5j * s * Delta * ph
    D[N - 1, 0] += 0.5j * s * Delta * ph
    return QBHSpec(K, D, label=f"bkc(N={N},t={t},Delta={Delta},s={s},phi={phi})",
                   meta={"model": "bkc", "N": N, "t": t, "Delta": Delta, "s": s, "phi": phi})


def bkc_G(N, t=1.0, Delta=0.5, s=0.0, phi=0.0) -> np.ndarray:
    return _G(bkc(N, t, Delta, s, phi))


def bkc_blocks(t: float, Delta: float, s: float = 0.0, phi: float = 0.0) -> dict:
    """Bulk blocks ``g_{+-1}`` and corner blocks ``v_{+-1}`` of the chain.

    ``G = T (x) g_1 + T^dag (x) g_-1 + |N><1| (x) v_1 + |1><N| (x) v_-1``
    with ``T`` the left shift.
    """
    s3 = np.diag([1.0, -1.0])
    g1 = -0.5j * np.array([[t, -Delta], [-Delta, t]], dtype=complex)
    e, ec = np.exp(1j * phi), np.exp(-1j * phi)
    v1 = -0.5j * s * np.array([[t * ec, -Delta * e], [-Delta * ec, t * e]], dtype=complex)
    return {
        "g1": g1,
        "g-1": s3 @ g1.conj().T @ s3,
        "g0": np.zeros((2, 2), dtype=complex),
        "v1": v1,
        "v-1": s3 @ v1.conj().T @ s3,
    }


def bkc_bbt(N: int, t: float = 1.0, Delta: float = 0.5, s: float = 0.0, phi: float = 0.0):
    """The chain as a corner-modified block-Toeplitz spec (range 1)."""
    from .gbt import BBTSpec

    b = bkc_blocks(t, Delta, s, phi)
    corners = {}
    if s != 0:
        corners = {(N, 1): b["v1"], (1, N): b["v-1"]}
    return BBTSpec(N, 1, {-1: b["g-1"], 0: b["g0"], 1: b["g1"]}, corners)


def _site(j: int, N: int) -> np.ndarray:
    e = np.zeros(N)
    e[j - 1] = 1.0
    return e


_PLUS = np.array([1.0, 1.0]) / math.sqrt(2)
_MINUS = np.array([1.0, -1.0]) / math.sqrt(2)


def _tau3_normalize(v: np.ndarray) -> np.ndarray:
    q = np.vdot(v, tau3_diag(len(v)) * v).real
    if abs(q) < 1e-14 * np.vdot(v, v).real:
        return v / np.linalg.norm(v)
    return v / math.sqrt(abs(q))


def bkc_open_oracle(N: int, t: float, Delta: float, squeeze=None) -> OracleResult:
    """Open chain: spectrum ``sqrt(t^2 - Delta^2) cos(m pi/(N+1))`` twice.

    Eigenvectors follow the generalized Bloch form with spinors
    ``xi_sigma^+-(j)``.  For ``t > Delta`` they are tau3-normalized bosonic
    modes.  ``squeeze`` (one value per ``m``) applies the degeneracy
    freedom ``jr -> s_m + jr`` to the ``+`` family.
    """
    if t == Delta:
        raise InvalidSpecError("t = Delta is defective; use bkc_tdelta_jordan_oracle")
    sig = 1 if t > Delta else -1
    r = BKCParams(N, t, Delta).r
    amp = np.sqrt(complex(t * t - Delta * Delta))
    m = np.arange(1, N + 1)
    om = amp * np.cos(m * np.pi / (N + 1))
    sm = np.zeros(N) if squeeze is None else np.broadcast_to(np.asarray(squeeze, float), (N,))
    G = bkc_G(N, t, Delta)
    vecs, lab = [], []
    j = np.arange(1, N + 1)
    pref = (-sig + 0j) ** (j / 2)
    for mi in range(N):
        env = pref * np.sin((mi + 1) * np.pi * j / (N + 1))
        for fam in (+1, -1):
            x = (sm[mi] if fam > 0 else 0.0) + j * r
            up = np.stack([np.cosh(x), np.sinh(x)], axis=1)
            if sig < 0:
                up = np.where((j % 2 == 0)[:, None], up, up[:, ::-1])
            if fam < 0:
                up = up[:, ::-1]
            v = (env[:, None] * up).ravel()
            v = v * math.sqrt(2.0 / (N + 1)) if sig > 0 and squeeze is None else _tau3_normalize(v)
            cand = [om[mi], -om[mi]]
            res = [np.linalg.norm(G @ v - c * v) for c in cand]
            vecs.append(v)
            lab.append(cand[int(np.argmin(res))])
    return OracleResult(
        np.concatenate([om, om]),
        np.column_stack(vecs),
        np.array(lab),
        {"sigma": sig, "r": r, "families": "columns alternate (+, -) per m"},
    )


def bkc_twisted_pi2_oracle(N: int, t: float, Delta: float) -> OracleResult:
    """pi/2 twist: spectrum ``sqrt(t^2 - Delta^2) sin((m + 1/2) pi/N)``, m = 0..2N-1.

    Eigenvectors ``sum_j e^{i j k_m} |j> zeta_m(j)`` with ``k_m = (m + 1/2) pi/N``.
    They belong to ``sigma * omega_m`` with ``r' = r`` for ``t > Delta`` and
    ``r' = r + i pi/2`` otherwise.
    """
    if t == Delta:
        raise InvalidSpecError("t = Delta is defective; use bkc_tdelta_jordan_oracle")
    sig = 1 if t > Delta else -1
    r = BKCParams(N, t, Delta).r
    rp = r if sig > 0 else r + 0.5j * np.pi
    amp = np.sqrt(complex(t * t - Delta * Delta))
    m = np.arange(2 * N)
    k = (m + 0.5) * np.pi / N
    om = amp * np.sin(k)
    j = np.arange(1, N + 1)
    arg = (j - (N + 2) / 2) * rp
    vecs = []
    for mi in range(2 * N):
        sp = np.stack([np.sinh(arg), np.cosh(arg)], axis=1)
        if mi % 2:
            sp = sp[:, ::-1]
        vecs.append((np.exp(1j * j * k[mi])[:, None] * sp).ravel() / math.sqrt(N))
    return OracleResult(om, np.column_stack(vecs), sig * om, {"sigma": sig, "r_prime": rp, "k": k})


def momentum_set(N: int, antiperiodic: bool = False) -> np.ndarray:
    """Brillouin-zone momenta for periodic or antiperiodic boundaries."""
    n = np.arange(N)
    if antiperiodic:
        k = (2 * n + 1) * np.pi / N
    else:
        k = 2 * n * np.pi / N
    k = np.angle(np.exp(1j * k))  # wrap into (-pi, pi]
    k[np.isclose(k, np.pi)] = np.pi if antiperiodic else -np.pi
    return np.sort(k)


def bkc_periodic_oracle(N: int, t: float, Delta: float, antiperiodic: bool = False) -> OracleResult:
    """Periodic (phi = 0) or antiperiodic (phi = pi) chain.

    Each momentum contributes ``omega_k = t sin k + i Delta cos k`` and its
    conjugate.  At ``k = 0, pi`` that is the pair ``+-i Delta``, and at
    ``k = +-pi/2`` the real ``+-t``.
    """
    ks = momentum_set(N, antiperiodic)
    w = t * np.sin(ks) + 1j * Delta * np.cos(ks)
    spec = np.concatenate([w, np.conj(w)])
    return OracleResult(spec, meta={"k": ks, "max_imag": float(np.max(np.abs(spec.imag)))})


def _branch_root(c: float, N: int) -> complex:
    """``(cos phi)^{1/N}`` with the stated branch ``|c|^{1/N} e^{i pi/N}`` for c < 0."""
    if c >= 0:
        return c ** (1.0 / N)
    return abs(c) ** (1.0 / N) * np.exp(1j * np.pi / N)


def bkc_tdelta_twisted_oracle(N: int, t: float, phi: float) -> OracleResult:
    """``t = Delta``, ``s = 1``: spectrum ``i t (cos phi)^{1/N} x (roots of unity)``.

    Returns eigenvectors for every ``m`` (both families for even N), the
    KPR, the overlap with ``|1>|->`` and the spectral speed.
    """
    if not 0 < phi < np.pi:
        raise InvalidSpecError("phi must lie in (0, pi)")
    c = math.cos(phi)
    if abs(c) < 1e-15:
        raise InvalidSpecError("phi = pi/2 is the exceptional point; use bkc_tdelta_jordan_oracle")
    rt = _branch_root(c, N)
    m = np.arange(1, 2 * N + 1)
    ph = np.exp(-2j * np.pi * m / N) if N % 2 == 0 else np.exp(-1j * np.pi * m / N)
    om = 1j * t * rt * ph
    vecs, labs = [], []
    jj = np.arange(1, N + 1)
    for mi, w in zip(m, om):
        z = 1j * t / w
        even_branch = mi % 2 == 0 if N % 2 else mi <= N
        odd_branch = mi % 2 == 1 if N % 2 else mi <= N
        if even_branch:
            v = np.kron(z ** (jj - 1.0), _PLUS) + 1j * math.tan(phi) * np.kron(_site(1, N), _MINUS)
            vecs.append(v)
            labs.append(w)
        if odd_branch:
            v = np.kron((-1.0 / z) ** jj, _MINUS)
            vecs.append(v)
            labs.append(w)
    V = np.column_stack(vecs)
    V = V / np.linalg.norm(V, axis=0)
    return OracleResult(
        om,
        V,
        np.array(labs),
        {
            "kpr": kpr_tdelta_twisted(N, phi),
            "overlap": overlap_tdelta(N, phi),
            "spectral_speed": spectral_speed(N, phi, t),
        },
    )


def kpr_tdelta_twisted(N: int, phi) -> np.ndarray:
    """Closed-form KPR ``N|c|(|c|^{2/N} - 1)/(|c|^2 - 1)`` with ``c = cos phi``."""
    x = np.abs(np.cos(np.asarray(phi, dtype=float)))
    out = np.ones_like(x)
    ok = np.abs(x - 1) > 1e-12
    out[ok] = N * x[ok] * (x[ok] ** (2.0 / N) - 1) / (x[ok] ** 2 - 1)
    return out if out.ndim else float(out)


def kpr_tdelta_limit(phi, printed: bool = False) -> np.ndarray:
    """Large-N limit ``2|c| ln|c| / (|c|^2 - 1)`` of ``kpr_tdelta_twisted``.

    ``printed=True`` returns the expression without the factor 2.  That
    variant does not follow from the finite-N formula and is kept only to
    compare against.
    """
    x = np.abs(np.cos(np.asarray(phi, dtype=float)))
    out = np.ones_like(x)
    ok = np.abs(x - 1) > 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        out[ok] = 2 * x[ok] * np.log(x[ok]) / (x[ok] ** 2 - 1)
    out[x == 0] = 0.0
    if printed:
        out = out / 2
        out[~ok] = 0.5
    return out if out.ndim else float(out)


def spectral_speed(N: int, phi, t: float = 1.0, printed: bool = False):
    """``d|omega_m|/dphi = (t/N) |cos phi|^{1/N - 1} |sin phi|`` at ``t = Delta``.

    ``printed=True`` drops the ``|sin phi|`` factor.  What remains is
    ``d|omega|/d|cos phi|``.
    """
    phi = np.asarray(phi, dtype=float)
    base = (t / N) * np.abs(np.cos(phi)) ** (1.0 / N - 1)
    return base if printed else base * np.abs(np.sin(phi))


def overlap_tdelta(N: int, phi) -> tuple:
    """Fidelity overlap of each eigenvector family with ``|1>|->``: (odd m, even m)."""
    x = abs(math.cos(phi))
    base = math.sqrt(1 - x ** (2.0 / N))
    return base / math.sqrt(1 - x * x), base


def bkc_tdelta_jordan_oracle(N: int, t: float, bc: str = "open") -> list:
    """Explicit Jordan chains at ``omega = 0`` for ``t = Delta``.

    Returns a list of ``(2N, L)`` arrays whose columns satisfy
    ``G chi_1 = 0`` and ``G chi_k = chi_{k-1}``.
    open: two chains of length N, ``(it)^{-k}|N+1-k>|+>`` and
    ``(-it)^{-k}|k>|->``.
    twisted_pi2: even N gives two chains of length N; odd N gives lengths
    N+1 and N-1.
    """
    chains = []
    if bc == "open":
        c1 = [(1j * t) ** (-k) * np.kron(_site(N + 1 - k, N), _PLUS) for k in range(1, N + 1)]
        c2 = [(-1j * t) ** (-k) * np.kron(_site(k, N), _MINUS) for k in range(1, N + 1)]
        return [np.column_stack(c1), np.column_stack(c2)]
    if bc != "twisted_pi2":
        raise InvalidSpecError(f"unknown boundary condition {bc!r}")
    def ket(j, spin):
        # sites outside 1..N contribute nothing
        return np.kron(_site(j, N), spin) if 1 <= j <= N else np.zeros(2 * N)

    q = 1j / t
    if N % 2 == 0:
        c1 = [q**k * ket(k, _MINUS) for k in range(1, N + 1)]
        c2 = [q**k * (1j * ket(k + 1, _MINUS) + (-1) ** (k + 1) * ket(N + 1 - k, _PLUS)) for k in range(1, N)]
        c2.append(q**N * -ket(1, _PLUS))
    else:
        c1 = [q * 2 * ket(1, _MINUS)]
        c1 += [q**k * (ket(k, _MINUS) + 1j * (-1) ** k * ket(N + 2 - k, _PLUS)) for k in range(2, N + 2)]
        c2 = [q**k * (1j * ket(k + 1, _MINUS) + (-1) ** (k + 1) * ket(N - k + 1, _PLUS)) for k in range(1, N)]
    return [np.column_stack(c1).astype(complex), np.column_stack(c2).astype(complex)]


@dataclass
class PhaseBoundary:
    r: float
    delta_s: float
    delta_phi: float
    N: int

    def cos_phi(self, s):
        """``cos phi`` on the left boundary at strength ``s`` (right one: negate)."""
        s = np.asarray(s, dtype=float)
        sech = 1.0 / np.cosh(self.N * self.r)
        if self.N % 2 == 0:
            with np.errstate(divide="ignore"):
                return 0.5 * (s + 1.0 / s) * sech
        return np.full_like(s, sech)

    def phi_minus(self, s):
        """Left boundary angle, NaN where ``|cos phi| > 1`` (no boundary at that s)."""
        c = np.asarray(self.cos_phi(s))
        with np.errstate(invalid="ignore"):
            return np.where(np.abs(c) <= 1, np.arccos(np.clip(c, -1, 1)), np.nan)

    def phi_plus(self, s):
        """Mirror of ``phi_minus``.  Exact for odd N; for even N it holds at s = 1 only."""
        return np.pi - self.phi_minus(s)

    def kind(self, side: str) -> str:
        """``"zero-mode"`` where zero enters the spectrum, else ``"conjectured-EP"``.

        The left boundary always hosts a zero mode, the right one only for
        odd N.  The even-N right boundary is expected (not proven) to come
        from length-two Jordan chains; the numeric classifier decides.
        """
        if side not in ("left", "right"):
            raise InvalidSpecError("side must be 'left' or 'right'")
        return "zero-mode" if side == "left" or self.N % 2 else "conjectured-EP"

    def stable(self, s, phi) -> np.ndarray:
        """Oracle verdict: stable on the closed band between the two boundaries or at s = 0."""
        s = np.asarray(s, dtype=float)
        phi = np.asarray(phi, dtype=float)
        lo = self.phi_minus(np.where(s > 0, s, 1.0))
        inside = (np.isnan(lo)) | ((phi >= lo) & (phi <= np.pi - lo))
        return np.where(s == 0, True, inside)


def bkc_closed_form_spectrum(N: int, t: float, Delta: float, s: float = 0.0, phi: float = 0.0):
    """Closed-form spectrum at the exactly solvable boundary conditions, else None.

    Covers open (s = 0), periodic and antiperiodic (s = 1, phi = 0 or pi),
    pi/2-twisted (s = 1, t != Delta) and the t = Delta twisted family.
    """
    close = lambda a, b: abs(a - b) <= 1e-14 * max(1.0, abs(b))
    if s == 0:
        return bkc_open_oracle(N, t, Delta).spectrum
    if not close(s, 1.0):
        return None
    if close(phi, 0.0) or close(phi, np.pi):
        return bkc_periodic_oracle(N, t, Delta, antiperiodic=close(phi, np.pi)).spectrum
    if close(phi, np.pi / 2):
        return None if t == Delta else bkc_twisted_pi2_oracle(N, t, Delta).spectrum
    if t == Delta and 0 < phi < np.pi:
        return bkc_tdelta_twisted_oracle(N, t, phi).spectrum
    return None


def bkc_phase_boundary_oracle(N: int, t: float, Delta: float) -> PhaseBoundary:
    """Boundaries ``cos phi = +-(1/2)(s + 1/s) sech(N r)`` (N even) or ``+-sech(N r)`` (N odd)."""
    if not t > Delta:
        raise InvalidSpecError("phase-boundary oracle requires t > Delta")
    r = BKCParams(N, t, Delta).r
    ds = math.exp(-N * r) if N % 2 == 0 else 0.0
    dphi = 2 * math.asin(1.0 / math.cosh(N * r))
    return PhaseBoundary(r, ds, dphi, N)


def bkc_mu(N: int, t: float, Delta: float, mu: float) -> QBHSpec:
    """Open chain plus degenerate parametric amplifiers ``(i mu/2) sum ((a^dag)^2 - a^2)``."""
    if t == 0:
        raise InvalidSpecError("t = 0 is not allowed")
    spec = bkc(N, t, Delta)
    D = spec.Delta + 1j * mu * np.eye(N)
    return QBHSpec(spec.K, D, label=f"bkc_mu(N={N},t={t},Delta={Delta},mu={mu})",
                   meta={"model": "bkc_mu", "N": N, "t": t, "Delta": Delta, "mu": mu})


def bkc_mu_oracle(N: int, t: float, Delta: float, mu: float) -> OracleResult:
    """Spectrum ``omega_m +- i mu`` of ``G_O + i mu tau1``."""
    m = np.arange(1, N + 1)
    om = np.sqrt(complex(t * t - Delta * Delta)) * np.cos(m * np.pi / (N + 1))
    return OracleResult(np.concatenate([om + 1j * mu, om - 1j * mu]), meta={"mu": mu})


def _quad(N: int, j: int, kind: str) -> np.ndarray:
    """Coefficient vector c with ``c^T Phi = x_j`` or ``p_j``.

    Conventions: ``x = (a + a^dag)/sqrt2`` and ``p = -i(a - a^dag)/sqrt2``.
    """
    c = np.zeros(2 * N, dtype=complex)
    if kind == "x":
        c[2 * (j - 1)] = c[2 * (j - 1) + 1] = 1 / math.sqrt(2)
    else:
        c[2 * (j - 1)] = -1j / math.sqrt(2)
        c[2 * (j - 1) + 1] = 1j / math.sqrt(2)
    return c


def majorana_bosons(N: int, t: float, mu: float) -> dict:
    """Hermitian zero-frequency modes of the ``t = Delta`` chain with ``mu``.

    ``gamma_L = sum delta^{j-1} x_j`` and ``gamma_R = sum delta^{N-j} p_j``
    with ``delta = -mu/t``.  The action is evaluated at the single-particle
    level: ``[H, c^T Phi] = -(G^T c)^T Phi``.  The commutator with H is
    returned as a coefficient vector, its ratio to ``x_N`` (or ``p_1``), and
    ``[gamma_L, gamma_R]``.
    """
    if t == 0:
        raise InvalidSpecError("t = 0 is not allowed")
    delta = -mu / t
    G = build_effective_sph(bkc_mu(N, t, t, mu)).G
    cL = sum(delta ** (j - 1) * _quad(N, j, "x") for j in range(1, N + 1))
    cR = sum(delta ** (N - j) * _quad(N, j, "p") for j in range(1, N + 1))
    comL = -G.T @ cL
    comR = -G.T @ cR
    xN, p1 = _quad(N, N, "x"), _quad(N, 1, "p")
    coefL = np.vdot(xN, comL) / np.vdot(xN, xN)
    coefR = np.vdot(p1, comR) / np.vdot(p1, p1)
    # [a, a^dag] = 1 gives [c^T Phi, d^T Phi] = c^T J d, J = 1 (x) [[0, 1], [-1, 0]]
    Jm = np.kron(np.eye(N), np.array([[0, 1], [-1, 0]]))
    return {
        "delta": delta,
        "gamma_L": cL,
        "gamma_R": cR,
        "comm_L": comL,
        "comm_R": comR,
        "coef_L": complex(coefL),  # [H, gamma_L] = coef_L x_N
        "coef_R": complex(coefR),  # [H, gamma_R] = coef_R p_1
        "residual_L": float(np.linalg.norm(comL - coefL * xN)),
        "residual_R": float(np.linalg.norm(comR - coefR * p1)),
        "bracket_LR": complex(cL @ Jm @ cR),
        "magnitude": t * abs(delta) ** N,
    }


def kitaev_fermion(N: int, t: float, Delta: float, mu: float = 0.0, s: float = 0.0, phi: float = 0.0):
    """Fermionic Kitaev chain coefficients (K_f real symmetric, Delta_f imaginary Hermitian).

    Built so that ``fermion_to_boson_map`` returns the bosonic chain.
    Real-valued output needs ``phi`` in {0, pi}.
    """
    Kb = bkc(N, t, Delta, s, phi)
    Kf = (-1j * Kb.Delta) + mu * np.eye(N)
    Df = Kb.K
    return Kf, Df


def fermion_to_boson_map(K_f, Delta_f, tol: float = 1e-12) -> QBHSpec:
    """``K_b = Delta_f`` and ``Delta_b = i K_f`` on the restricted subclass.

    The subclass is real symmetric ``K_f`` with imaginary Hermitian
    ``Delta_f``.  The output satisfies the decoupling condition.
    """
    K_f = np.atleast_2d(np.asarray(K_f, dtype=complex))
    Delta_f = np.atleast_2d(np.asarray(Delta_f, dtype=complex))
    if np.max(np.abs(K_f.imag), initial=0) > tol or np.max(np.abs(K_f - K_f.T), initial=0) > tol:
        raise InvalidSpecError("K_f must be real symmetric")
    if np.max(np.abs(Delta_f.real), initial=0) > tol or np.max(np.abs(Delta_f - Delta_f.conj().T), initial=0) > tol:
        raise InvalidSpecError("Delta_f must be purely imaginary and Hermitian")
    return QBHSpec(Delta_f.copy(), 1j * K_f, label="fermion_to_boson", meta={"decoupled": True})


# ---------------------------------------------------------------- random specs


def random_qbh(rng: np.random.Generator, N: int, pairing: float = 1.0) -> QBHSpec:
    """Gaussian random Hermitian K and symmetric Delta."""
    A = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    B = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    return QBHSpec(0.5 * (A + A.conj().T), 0.5 * pairing * (B + B.T))


def random_decoupled(rng: np.random.Generator, N: int, stable_bias: bool = True) -> QBHSpec:
    """Random spec with purely imaginary K and Delta.

    Its quadratures obey ``dx/dt = C^T x`` and ``dp/dt = -C p`` with
    ``C = Im(Delta - K)``.  With ``stable_bias``, C is similar to a real
    antisymmetric matrix, so the spectrum is real and diagonalizable.
    Otherwise C is a generic real matrix.
    """
    if stable_bias:
        A = rng.normal(size=(N, N))
        A = A - A.T
        P = rng.normal(size=(N, N)) + 2 * np.eye(N)
        C = P @ A @ np.linalg.inv(P)
    else:
        C = rng.normal(size=(N, N))
    S = 0.5 * (C + C.T)
    B = 0.5 * (C - C.T)
    return QBHSpec(-1j * B, 1j * S, label="random_decoupled")


# ---------------------------------------------------------------- registry


def _bkc_family(p):
    return bkc(int(p["N"]), p.get("t", 1.0), p.get("Delta", 0.5), p.get("s", 0.0), p.get("phi", 0.0))


FAMILIES = {
    "bkc": (_bkc_family, {"N": 5, "t": 1.0, "Delta": 0.25, "s": 0.0, "phi": 0.0}),
    "single_mode": (lambda p: single_mode(p.get("alpha", 1.0), p.get("beta", 1.0)), {"alpha": 1.0, "beta": 1.0}),
    "cavity_qed": (
        lambda p: cavity_qed_xy(p.get("x", 0.0), p.get("y", 0.0), p.get("omega_s", 1.0)),
        {"x": 0.0, "y": 0.0, "omega_s": 1.0},
    ),
    "bkc_mu": (
        lambda p: bkc_mu(int(p["N"]), p.get("t", 1.0), p.get("Delta", 0.5), p.get("mu", 0.0)),
        {"N": 5, "t": 1.0, "Delta": 0.5, "mu": 0.1},
    ),
}


def family_spec(name: str, params: dict) -> QBHSpec:
    if name not in FAMILIES:
        raise InvalidSpecError(f"unknown model {name!r}; choose from {sorted(FAMILIES)}")
    build, defaults = FAMILIES[name]
    p = dict(defaults)
    p.update(params)
    return build(p)


def family_G(name: str, params: dict) -> np.ndarray:
    return _G(family_spec(name, params))
