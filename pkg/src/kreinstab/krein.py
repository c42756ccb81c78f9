"""Krein signatures, tau3-canonical bases, Krein phase rigidity and stability.

The indefinite form ``B(x, y) = <x|tau3|y>`` turns every generalized
eigenspace of G into a small Krein space.  Real eigenvalues carry a
non-degenerate form; complex ones pair ``w`` with ``w^*``.  The routines
here put chains into canonical form, so that
``B(chi_jk, chi_lp) = eps_j delta_{l, j*} delta_{k, r_j + 1 - p}``.  From
that form they read off signatures, collisions and the Krein phase
rigidity (KPR).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (
    IndeterminateError,
    NonNormalizableModeError,
    PartnerError,
    StructureViolationError,
)
from .nambu import charge_conjugate, tau3_diag, tau3_gram
from .spectral import SpectrumReport, cluster_eigenvalues, eigendecompose, numerical_rank
from .tolerances import DEFAULT_TOL, Tolerances, matrix_scale

__all__ = [
    "CanonicalChain",
    "CanonicalBasis",
    "canonicalize_jordan_basis",
    "tau3_normalize_modes",
    "krein_signature",
    "kpr",
    "kpr_value",
    "phase_rigidity_symmetric",
    "KreinCollision",
    "detect_krein_collisions",
    "TransitionClassification",
    "classify_transition",
    "StabilityVerdict",
    "dynamical_stability",
    "ThermoResult",
    "thermodynamic_stability_sufficient",
    "GPTSymmetry",
    "construct_gpt_symmetry",
    "bogoliubov_modal_matrix",
    "VacuumReport",
    "vacuum_normalizability",
    "KreinRow",
    "krein_report",
]


def _null(M: np.ndarray, k: int) -> np.ndarray:
    """Orthonormal basis (columns) for the ``k``-dim approximate null space of M."""
    if k <= 0:
        return np.zeros((M.shape[1], 0), dtype=complex)
    _, _, Vh = np.linalg.svd(M)
    return Vh[M.shape[1] - k :].conj().T


def _top_coeffs(M: np.ndarray, d: int) -> np.ndarray:
    """Right singular vectors of M for its ``d`` largest singular values."""
    _, _, Vh = np.linalg.svd(M)
    return Vh[:d].conj().T


@dataclass
class CanonicalChain:
    """A Jordan chain in tau3-canonical form.

    ``vectors[:, k-1]`` is ``chi_k``; ``partner`` indexes the chain it pairs
    with (itself for real eigenvalues).
    """

    omega: complex
    vectors: np.ndarray
    epsilon: int
    cluster: int
    partner: int = -1
    is_real: bool = True

    @property
    def length(self) -> int:
        return self.vectors.shape[1]

    @property
    def kpr(self) -> float:
        """KPR of the eigenvector ``chi_1``; zero for chains longer than one."""
        if self.length > 1:
            return 0.0
        return float(1.0 / np.vdot(self.vectors[:, 0], self.vectors[:, 0]).real)


@dataclass
class CanonicalBasis:
    chains: list
    report: SpectrumReport

    def matrix(self) -> np.ndarray:
        return np.column_stack([c.vectors for c in self.chains])

    def structure(self) -> np.ndarray:
        """Target Gram matrix ``eps_j delta_{l j*} delta_{k, r+1-p}``."""
        sizes = [c.length for c in self.chains]
        offs = np.concatenate([[0], np.cumsum(sizes)])
        P = np.zeros((offs[-1], offs[-1]))
        for j, c in enumerate(self.chains):
            l = c.partner
            for k in range(c.length):
                P[offs[j] + k, offs[l] + c.length - 1 - k] = c.epsilon
        return P

    def gram_residual(self) -> float:
        V = self.matrix()
        return float(np.max(np.abs(tau3_gram(V) - self.structure())))


def _real_cluster_chains(cl, tol: Tolerances, scale: float):
    Z, m = cl.basis, cl.algebraic_mult
    A = cl.block - cl.omega * np.eye(m)
    Bm = tau3_gram(Z)
    X = np.eye(m, dtype=complex)
    out = []
    for L in sorted(set(cl.partition), reverse=True):
        d = cl.partition.count(L)
        AL1 = np.linalg.matrix_power(A, L - 1)
        U = X @ _top_coeffs(AL1 @ X, d)
        Q = U.conj().T @ Bm @ AL1 @ U
        Q = 0.5 * (Q + Q.conj().T)
        lam, Vq = np.linalg.eigh(Q)
        if np.min(np.abs(lam)) <= tol.null_tol:
            raise NonNormalizableModeError(
                f"tau3-null mode at real omega={cl.omega:.6g} (|Gram eig| {np.min(np.abs(lam)):.2e})",
                omega=cl.omega,
            )
        u = U @ Vq / np.sqrt(np.abs(lam))
        E = np.diag(np.sign(lam))
        M = [u.conj().T @ Bm @ np.linalg.matrix_power(A, j) @ u for j in range(L)]
        C = [np.eye(d, dtype=complex)]
        for s in range(1, L):
            R = np.zeros((d, d), dtype=complex)
            for i in range(s):
                for l in range(s):
                    if i + l <= s:
                        R += C[i].conj().T @ M[i + l + L - 1 - s] @ C[l]
            C.append(-E @ R / 2)
        up = sum(np.linalg.matrix_power(A, i) @ u @ C[i] for i in range(L))
        S = []
        for j in range(d):
            cols = [np.linalg.matrix_power(A, L - k) @ up[:, j] for k in range(1, L + 1)]
            ch = np.column_stack(cols)
            S.append(ch)
            out.append((Z @ ch, int(np.sign(lam[j]))))
        S = np.column_stack(S)
        w = X.shape[1] - S.shape[1]
        X = X @ _null(S.conj().T @ Bm @ X, w)
    return out


def _complex_pair_chains(ca, cb, tol: Tolerances):
    Za, Zb = ca.basis, cb.basis
    m = ca.algebraic_mult
    Aa = ca.block - ca.omega * np.eye(m)
    Ab = cb.block - cb.omega * np.eye(m)
    P = Zb.conj().T @ (tau3_diag(Za.shape[0])[:, None] * Za)
    Xa = np.eye(m, dtype=complex)
    Xb = np.eye(m, dtype=complex)
    outa, outb = [], []
    for L in sorted(set(ca.partition), reverse=True):
        d = ca.partition.count(L)
        AaL = np.linalg.matrix_power(Aa, L - 1)
        AbL = np.linalg.matrix_power(Ab, L - 1)
        Ua = Xa @ _top_coeffs(AaL @ Xa, d)
        Ub = Xb @ _top_coeffs(AbL @ Xb, d)
        Q = Ub.conj().T @ P @ AaL @ Ua
        if sla.svdvals(Q)[-1] <= tol.null_tol:
            raise PartnerError(f"degenerate w/w* pairing at omega={ca.omega:.6g}")
        ub = Ub @ np.linalg.inv(Q).conj().T
        M = [ub.conj().T @ P @ np.linalg.matrix_power(Aa, j) @ Ua for j in range(L)]
        C = [np.eye(d, dtype=complex)]
        for s in range(1, L):
            C.append(-sum(M[L - 1 - s + l] @ C[l] for l in range(s)))
        ua = sum(np.linalg.matrix_power(Aa, l) @ Ua @ C[l] for l in range(L))
        Sa, Sb = [], []
        for j in range(d):
            cha = np.column_stack([np.linalg.matrix_power(Aa, L - k) @ ua[:, j] for k in range(1, L + 1)])
            chb = np.column_stack([np.linalg.matrix_power(Ab, L - k) @ ub[:, j] for k in range(1, L + 1)])
            va, vb = Za @ cha, Zb @ chb
            kappa = np.sqrt(np.linalg.norm(vb) / np.linalg.norm(va))
            outa.append(va * kappa)
            outb.append(vb / kappa)
            Sa.append(cha)
            Sb.append(chb)
        Sa, Sb = np.column_stack(Sa), np.column_stack(Sb)
        w = Xa.shape[1] - Sa.shape[1]
        Xa = Xa @ _null(Sb.conj().T @ P @ Xa, w)
        Xb = Xb @ _null(Sa.conj().T @ P.conj().T @ Xb, w)
    return outa, outb


def canonicalize_jordan_basis(G_or_report, tol: Tolerances = DEFAULT_TOL) -> CanonicalBasis:
    """tau3-canonical generalized eigenbasis.

    Real eigenvalues get chains with ``eps = +-1``.  Each complex pair
    ``(w, w^*)`` gets mutually dual chains with ``eps = +1`` and equal norms.
    """
    rep = G_or_report if isinstance(G_or_report, SpectrumReport) else eigendecompose(G_or_report, tol)
    chains: list[CanonicalChain] = []
    done = set()
    for k, cl in enumerate(rep.clusters):
        if k in done:
            continue
        if cl.is_real:
            for vec, eps in _real_cluster_chains(cl, tol, rep.scale):
                idx = len(chains)
                chains.append(CanonicalChain(cl.omega, vec, eps, k, idx, True))
            done.add(k)
            continue
        j = rep.partner_index(k)
        cb = rep.clusters[j]
        if j == k or cb.partition != cl.partition:
            raise PartnerError(f"no conjugate partner cluster for omega={cl.omega:.6g}")
        va, vb = _complex_pair_chains(cl, cb, tol)
        for a, b in zip(va, vb):
            ia = len(chains)
            chains.append(CanonicalChain(cl.omega, a, 1, k, ia + 1, False))
            chains.append(CanonicalChain(cb.omega, b, 1, j, ia, False))
        done.update({k, j})
    return CanonicalBasis(chains, rep)


def tau3_normalize_modes(G_or_report, tol: Tolerances = DEFAULT_TOL) -> CanonicalBasis:
    """Normalised eigenbasis of a diagonalizable G.

    Real-frequency modes satisfy ``<psi|tau3|psi> = +-1`` (Gram-diagonal
    inside degenerate eigenspaces).  Complex pairs satisfy
    ``<psi_*|tau3|psi> = 1`` with ``|psi| = |psi_*|``.
    """
    rep = G_or_report if isinstance(G_or_report, SpectrumReport) else eigendecompose(G_or_report, tol)
    for cl in rep.clusters:
        if cl.is_defective:
            raise NonNormalizableModeError(
                f"eigenvalue {cl.omega:.6g} is defective (chains {cl.partition})", omega=cl.omega
            )
    return canonicalize_jordan_basis(rep, tol)


def krein_signature(v, null_tol: float = DEFAULT_TOL.null_tol) -> int:
    """Sign of ``<v|tau3|v>``, or 0 inside the band ``null_tol * |v|^2``."""
    v = np.asarray(v, dtype=complex)
    n2 = np.vdot(v, v).real
    if n2 == 0:
        raise ValueError("zero vector has no Krein signature")
    q = np.vdot(v, tau3_diag(len(v)) * v).real
    if abs(q) <= null_tol * n2:
        return 0
    return int(np.sign(q))


def _check_eigvec(G, omega, psi, tol):
    G = np.asarray(G)
    r = np.linalg.norm(G @ psi - omega * psi)
    if r > tol.residual_tol * matrix_scale(G) * np.linalg.norm(psi):
        raise ValueError(f"vector is not an eigenvector at omega={omega:.6g} (residual {r:.2e})")


def kpr_value(G, omega: complex, psi, partner_space=None, tol: Tolerances = DEFAULT_TOL) -> float:
    """KPR without precondition checks (used by tracking along paths).

    Real omega: ``|<psi|tau3|psi>| / |psi|^2``.  Complex omega: the largest
    value of ``|<psi_*|tau3|psi>| / (|psi_*| |psi|)`` over eigenvectors
    ``psi_*`` at ``omega^*``.  For a one-dimensional eigenspace this is the
    unique bi-orthogonal partner.
    """
    psi = np.asarray(psi, dtype=complex)
    s = tau3_diag(len(psi))
    nrm2 = np.vdot(psi, psi).real
    sc = matrix_scale(G)
    if abs(np.imag(omega)) <= tol.real_tol * sc:
        return float(abs(np.vdot(psi, s * psi)) / nrm2)
    W = partner_space if partner_space is not None else _eigenspace(G, np.conj(omega), tol)
    if W.shape[1] == 0:
        raise PartnerError(f"no eigenvector at omega*={np.conj(omega):.6g}")
    return float(np.linalg.norm(W.conj().T @ (s * psi)) / np.sqrt(nrm2))


def _eigenspace(G, omega, tol: Tolerances) -> np.ndarray:
    G = np.asarray(G, dtype=complex)
    n = G.shape[0]
    M = G - omega * np.eye(n)
    s = sla.svdvals(M)
    thr = max(tol.residual_tol * matrix_scale(G), tol.rank_tol * s[0])
    k = int(np.count_nonzero(s <= thr))
    return _null(M, k)


def kpr(G, omega: complex, psi, tol: Tolerances = DEFAULT_TOL) -> float:
    """Krein phase rigidity of the eigenvector ``psi`` at ``omega``.

    Raises ``PartnerError`` when ``psi`` is a tau3-null vector at a real
    frequency.  Such a vector has no bi-orthogonal partner of the form
    ``kappa tau3 psi``.
    """
    psi = np.asarray(psi, dtype=complex)
    _check_eigvec(G, omega, psi, tol)
    val = kpr_value(G, omega, psi, tol=tol)
    if abs(np.imag(omega)) <= tol.real_tol * matrix_scale(G) and val <= tol.null_tol:
        raise PartnerError(f"tau3-null eigenvector at real omega={omega:.6g}")
    return val


def phase_rigidity_symmetric(M, psi, tol: Tolerances = DEFAULT_TOL) -> float:
    """Phase rigidity ``|psi^T psi| / |psi|^2`` of a complex-symmetric matrix."""
    M = np.asarray(M)
    if np.max(np.abs(M - M.T)) > tol.validation * matrix_scale(M):
        raise StructureViolationError("matrix is not complex symmetric")
    psi = np.asarray(psi, dtype=complex)
    return float(abs(psi @ psi) / np.vdot(psi, psi).real)


@dataclass
class KreinCollision:
    cluster: int
    omega: complex
    n_plus: int
    n_minus: int
    n_null: int


def _inertia(cl, tol: Tolerances):
    V = cl.eigenvectors
    V = V / np.linalg.norm(V, axis=0)
    g = np.linalg.eigvalsh(0.5 * (tau3_gram(V) + tau3_gram(V).conj().T))
    return (
        int(np.sum(g > tol.null_tol)),
        int(np.sum(g < -tol.null_tol)),
        int(np.sum(np.abs(g) <= tol.null_tol)),
    )


def detect_krein_collisions(G_or_report, tol: Tolerances = DEFAULT_TOL) -> list:
    """Real eigenvalues whose eigenspace carries both Krein signatures."""
    rep = G_or_report if isinstance(G_or_report, SpectrumReport) else eigendecompose(G_or_report, tol)
    out = []
    for k, cl in enumerate(rep.clusters):
        if not cl.is_real or cl.geometric_mult < 2:
            continue
        p, m, z = _inertia(cl, tol)
        if p > 0 and m > 0:
            out.append(KreinCollision(k, cl.omega, p, m, z))
    return out


@dataclass
class TransitionClassification:
    kind: str  # "EP" | "KreinCollision" | "Both" | "None" | "indeterminate"
    eigenvalue: complex | None
    evidence: dict = field(default_factory=dict)


def classify_transition(
    G_or_family, p_c=None, probe: float = 1e-3, omega=None, tol: Tolerances = DEFAULT_TOL
) -> TransitionClassification:
    """Tell an exceptional point from a Krein collision.

    ``G_or_family`` is a matrix, or a callable ``p -> G`` evaluated at
    ``p_c``.  With a callable, the largest ``|Im w|`` at ``p_c +- probe`` is
    recorded as evidence of which side is unstable.  When ``omega`` is
    given, only that eigenvalue is examined.
    """
    evidence: dict = {}
    if callable(G_or_family):
        G = np.asarray(G_or_family(p_c))
        for side, p in (("minus", p_c - probe), ("plus", p_c + probe)):
            w = np.linalg.eigvals(np.asarray(G_or_family(p)))
            evidence[f"max_imag_{side}"] = float(np.max(np.abs(w.imag)))
    else:
        G = np.asarray(G_or_family)
    try:
        rep = eigendecompose(G, tol, check_quartets=False)
    except IndeterminateError as exc:
        evidence["error"] = str(exc)
        return TransitionClassification("indeterminate", omega, evidence)
    ks = range(len(rep.clusters)) if omega is None else [rep.cluster_index(omega)]
    eps, kcs = [], []
    for k in ks:
        cl = rep.clusters[k]
        if cl.is_defective:
            eps.append(cl.omega)
        elif cl.is_real and cl.geometric_mult > 1:
            p, m, z = _inertia(cl, tol)
            if p and m:
                kcs.append(cl.omega)
    evidence["exceptional_points"] = eps
    evidence["krein_collisions"] = kcs
    evidence["partitions"] = {complex(rep.clusters[k].omega): rep.clusters[k].partition for k in ks}
    kind = {(True, True): "Both", (True, False): "EP", (False, True): "KreinCollision"}.get(
        (bool(eps), bool(kcs)), "None"
    )
    first = (eps + kcs + [None])[0]
    return TransitionClassification(kind, first if omega is None else omega, evidence)


@dataclass
class StabilityVerdict:
    verdict: str  # "stable" | "unstable" | "indeterminate"
    reason: str
    max_imag: float

    @property
    def stable(self) -> bool:
        return self.verdict == "stable"


def _semisimple_by_rank(G, w, groups, sc, tol) -> bool:
    """True only if every multiple cluster has a clean nullity equal to its size."""
    n = G.shape[0]
    for g in groups:
        m = len(g)
        if m == 1:
            continue
        s = np.linalg.svd(G - w[g].mean() * np.eye(n), compute_uv=False)
        thr = tol.rank_tol * sc
        if np.sum(s <= thr) != m or s[n - m - 1] <= tol.gap_floor * thr:
            return False
    return True


def dynamical_stability(G, tol: Tolerances = DEFAULT_TOL, eigenvalues=None) -> StabilityVerdict:
    """Stable iff G is diagonalizable with a purely real spectrum.

    Uses eigenvalues only, unless a cluster of nearly equal real
    eigenvalues needs the Jordan-structure test.
    """
    if isinstance(G, SpectrumReport):
        rep = G
        G = rep.G
    else:
        rep = None
    G = np.asarray(G, dtype=complex)
    sc = matrix_scale(G)
    if rep is None:
        w = np.linalg.eigvals(G) if eigenvalues is None else np.asarray(eigenvalues)
        groups = cluster_eigenvalues(w, sc, tol)
        cents = [w[g].mean() for g in groups]
        max_im = max((abs(c.imag) for c in cents), default=0.0)
        if max_im > tol.real_tol * sc:
            return StabilityVerdict("unstable", "complex eigenvalue", float(max_im))
        if all(len(g) == 1 for g in groups):
            return StabilityVerdict("stable", "simple real spectrum", float(max_im))
        if _semisimple_by_rank(G, w, groups, sc, tol):
            return StabilityVerdict("stable", "semisimple real spectrum", float(max_im))
        try:
            rep = eigendecompose(G, tol, check_quartets=False)
        except IndeterminateError as exc:
            return StabilityVerdict("indeterminate", str(exc), float(max_im))
    max_im = max((abs(c.omega.imag) for c in rep.clusters), default=0.0)
    if not rep.is_real_spectrum:
        return StabilityVerdict("unstable", "complex eigenvalue", float(max_im))
    if not rep.is_diagonalizable:
        bad = [c for c in rep.clusters if c.is_defective]
        return StabilityVerdict(
            "unstable", f"Jordan chain {bad[0].partition} at omega={bad[0].omega.real:.6g}", float(max_im)
        )
    return StabilityVerdict("stable", "diagonalizable real spectrum", float(max_im))


@dataclass
class ThermoResult:
    """Positive semi-definiteness of H: sufficient, not necessary, for stability."""

    sufficient_condition_holds: bool
    min_eigenvalue: float


def thermodynamic_stability_sufficient(H, tol: Tolerances = DEFAULT_TOL) -> ThermoResult:
    H = np.asarray(H)
    lam = float(np.linalg.eigvalsh(0.5 * (H + H.conj().T))[0])
    return ThermoResult(lam >= -tol.validation * matrix_scale(H), lam)


@dataclass
class GPTSymmetry:
    """Antiunitary ``Theta psi = M psi^*`` commuting with G."""

    M: np.ndarray
    unbroken: bool
    commutation_residual: float
    involution_residual: float

    def apply(self, v):
        return self.M @ np.conj(v)


def construct_gpt_symmetry(G_or_report, tol: Tolerances = DEFAULT_TOL) -> GPTSymmetry:
    """Generalized PT symmetry built from a generalized eigenbasis.

    The basis-conjugation fixes every basis vector.  The permutation
    exchanges chains at ``mu`` and ``mu^*`` and fixes real-frequency chains.
    """
    rep = G_or_report if isinstance(G_or_report, SpectrumReport) else eigendecompose(G_or_report, tol)
    cols, perm_src = [], []
    offsets = {}
    pos = 0
    for k, cl in enumerate(rep.clusters):
        offsets[k] = []
        for ch in cl.chains:
            offsets[k].append((pos, ch.shape[1]))
            cols.append(ch)
            pos += ch.shape[1]
    B = np.column_stack(cols)
    n = B.shape[1]
    perm = np.arange(n)
    for k, cl in enumerate(rep.clusters):
        if cl.is_real:
            continue
        j = rep.partner_index(k)
        ka = sorted(offsets[k], key=lambda t: (-t[1], t[0]))
        kb = sorted(offsets[j], key=lambda t: (-t[1], t[0]))
        for (pa, La), (pb, Lb) in zip(ka, kb):
            if La != Lb:
                raise PartnerError("conjugate clusters have different chain partitions")
            perm[pa : pa + La] = np.arange(pb, pb + Lb)
    Pi = np.zeros((n, n))
    Pi[perm, np.arange(n)] = 1.0
    Binv = np.linalg.inv(B)
    M = B @ Pi @ np.conj(Binv)
    G = rep.G
    comm = float(np.max(np.abs(M @ np.conj(G) - G @ M)))
    inv = float(np.max(np.abs(M @ np.conj(M) - np.eye(n))))
    return GPTSymmetry(M, rep.is_real_spectrum and rep.is_diagonalizable, comm, inv)


def bogoliubov_modal_matrix(G_or_report, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Modal matrix ``L`` (``Psi = L Phi``) of a dynamically stable G.

    Rows come in pairs ``(psi^dag tau3, -(C psi)^dag tau3)`` for positive-norm
    modes ``psi``.  The pairing is chosen compatible with charge conjugation,
    also inside Krein collisions, so ``L tau3 L^dag = tau3``.
    """
    rep = G_or_report if isinstance(G_or_report, SpectrumReport) else eigendecompose(G_or_report, tol)
    if not (rep.is_real_spectrum and rep.is_diagonalizable):
        raise NonNormalizableModeError("modal matrix requires a dynamically stable G")
    basis = canonicalize_jordan_basis(rep, tol)
    n = rep.G.shape[0]
    s = tau3_diag(n)
    byc: dict[int, list] = {}
    for ch in basis.chains:
        byc.setdefault(ch.cluster, []).append(ch)
    modes = []
    zero_tol = tol.real_tol * rep.scale
    for k, cl in enumerate(rep.clusters):
        w = cl.omega.real
        if w > zero_tol:
            for ch in byc[k]:
                v = ch.vectors[:, 0]
                modes.append(v if ch.epsilon > 0 else charge_conjugate(v))
        elif abs(w) <= zero_tol:
            V = np.column_stack([ch.vectors[:, 0] for ch in byc[k]])
            while V.shape[1]:
                g = tau3_gram(V)
                lam, U = np.linalg.eigh(0.5 * (g + g.conj().T))
                if lam[-1] <= tol.null_tol:
                    raise NonNormalizableModeError("no positive-norm zero mode left", omega=0.0)
                v = V @ U[:, -1] / np.sqrt(lam[-1])
                modes.append(v)
                S = np.column_stack([v, charge_conjugate(v)])
                V = V @ _null(S.conj().T @ (s[:, None] * V), V.shape[1] - 2)
    if len(modes) != n // 2:
        raise IndeterminateError(f"found {len(modes)} positive-norm modes, expected {n // 2}")
    L = np.empty((n, n), dtype=complex)
    for m, v in enumerate(modes):
        L[2 * m] = np.conj(v) * s
        L[2 * m + 1] = -np.conj(charge_conjugate(v)) * s
    return L


@dataclass
class VacuumReport:
    normalizable: bool
    sigma_max: float
    squeezing: np.ndarray  # artanh of the singular values of X^-1 Y
    unitarity_residual: float


def vacuum_normalizability(L, tol: Tolerances = DEFAULT_TOL) -> VacuumReport:
    """Check that the quasi-particle vacuum of a modal matrix is normalizable.

    ``L`` must be tau3-unitary with site blocks ``[[X, -Y], [-Y^*, X^*]]``.
    The vacuum is normalizable iff ``sigma_max(X^-1 Y) < 1``.
    """
    L = np.asarray(L, dtype=complex)
    n = L.shape[0]
    s = tau3_diag(n)
    X = L[0::2, 0::2]
    Y = -L[0::2, 1::2]
    if (
        np.max(np.abs(L[1::2, 1::2] - X.conj())) > 1e-8 * matrix_scale(L)
        or np.max(np.abs(L[1::2, 0::2] + Y.conj())) > 1e-8 * matrix_scale(L)
    ):
        raise StructureViolationError("modal matrix lacks the [[X, -Y], [-Y*, X*]] block structure")
    unit = float(np.max(np.abs((L * s[None, :]) @ L.conj().T - np.diag(s))))
    sv = sla.svdvals(np.linalg.solve(X, Y))
    smax = float(sv[0]) if len(sv) else 0.0
    with np.errstate(divide="ignore"):
        sq = np.arctanh(np.clip(sv, 0, 1))
    return VacuumReport(smax < 1.0, smax, sq, unit)


@dataclass
class KreinRow:
    eigen_index: int
    omega: complex
    signature: int
    definiteness: str
    collision_flag: bool
    kpr: float
    chain: int = 0
    position: int = 1

    def as_dict(self) -> dict:
        return {
            "eigen_index": self.eigen_index,
            "re_omega": float(self.omega.real),
            "im_omega": float(self.omega.imag),
            "signature": self.signature,
            "definiteness": self.definiteness,
            "collision_flag": self.collision_flag,
            "kpr": self.kpr,
        }


def krein_report(G_or_report, tol: Tolerances = DEFAULT_TOL) -> list:
    """One row per canonical basis vector.

    A vector gets a signature, the definiteness of its eigenspace, a
    collision flag and a KPR.  Generalized vectors above the chain bottom
    carry ``kpr = nan``.
    """
    rep = G_or_report if isinstance(G_or_report, SpectrumReport) else eigendecompose(G_or_report, tol)
    basis = canonicalize_jordan_basis(rep, tol)
    coll = {c.cluster for c in detect_krein_collisions(rep, tol)}
    rows = []
    idx = 0
    for j, ch in enumerate(basis.chains):
        cl = rep.clusters[ch.cluster]
        if cl.is_defective:
            kind = "defective"
        elif not cl.is_real:
            kind = "neutral"
        elif ch.cluster in coll:
            kind = "indefinite"
        else:
            kind = "definite"
        for k in range(ch.length):
            sig = ch.epsilon if (cl.is_real and ch.length == 1) else 0
            val = ch.kpr if k == 0 else float("nan")
            om = complex(cl.omega.real, 0.0) if cl.is_real else cl.omega
            rows.append(KreinRow(idx, om, sig, kind, ch.cluster in coll, val, j, k + 1))
            idx += 1
    return rows
