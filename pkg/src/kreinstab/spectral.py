"""Eigen-decomposition of effective single-particle Hamiltonians.

The engine works from a complex Schur form.  Eigenvalues are grouped into
clusters that are numerically a single eigenvalue.  This takes two steps:
tight single linkage, then a defect-aware test that accepts a set of
computed eigenvalues when their centred characteristic polynomial is
numerically ``z^m``.  That test recognises the ring of eigenvalues that a
perturbed Jordan block produces.  Each multi-member cluster is then
isolated by reordering the Schur form, and its chain partition is read off
from ranks of powers of the restricted nilpotent part.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import IndeterminateError, QuartetClosureError
from .tolerances import DEFAULT_TOL, Tolerances, matrix_scale

__all__ = [
    "numerical_rank",
    "cluster_eigenvalues",
    "EigenCluster",
    "SpectrumReport",
    "eigendecompose",
    "group_quartets",
    "detect_jordan_structure",
    "JordanStructure",
    "is_diagonalizable",
    "fix_phase",
    "sort_key",
]

_EPS = np.finfo(float).eps


def numerical_rank(M, rank_tol: float = 1e-8, gap_floor: float = 1e2, atol: float = 0.0) -> int:
    """Rank of ``M`` decided from its singular values.

    Singular values above ``max(rank_tol * s_max, atol)`` count as nonzero.
    The decision is committed only when the ratio across the cut is at
    least ``gap_floor``; otherwise ``IndeterminateError`` is raised.
    """
    M = np.atleast_2d(np.asarray(M))
    if M.size == 0:
        return 0
    s = sla.svdvals(M)
    if s[0] <= atol or s[0] == 0.0:
        return 0
    thr = max(rank_tol * s[0], atol)
    r = int(np.count_nonzero(s > thr))
    if r == len(s):
        return r
    below = s[r]
    if below <= atol:
        return r
    if s[r - 1] / below < gap_floor:
        raise IndeterminateError(
            f"singular-value gap {s[r - 1]:.3e}/{below:.3e} below floor {gap_floor:g}"
        )
    return r


def sort_key(omega: complex, scale: float = 1.0):
    """Canonical (Re, Im) ordering, insensitive to round-off in Re."""
    return (round(float(np.real(omega)) / (1e-9 * scale)), float(np.imag(omega)))


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Unit-normalise and make the first non-negligible entry real positive."""
    v = np.asarray(v, dtype=complex)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        return v
    v = v / nrm
    big = np.abs(v) > 1e-8 * np.max(np.abs(v))
    k = int(np.argmax(big))
    return v * (np.abs(v[k]) / v[k])


class _UnionFind:
    def __init__(self, n):
        self.p = list(range(n))

    def find(self, i):
        while self.p[i] != i:
            self.p[i] = self.p[self.p[i]]
            i = self.p[i]
        return i

    def union(self, i, j):
        a, b = self.find(i), self.find(j)
        if a != b:
            self.p[max(a, b)] = min(a, b)


def _centred_poly_small(z: np.ndarray, eta: float) -> bool:
    c = np.poly(z - z.mean())
    return bool(np.max(np.abs(c[1:])) <= eta)


def cluster_eigenvalues(w, scale: float = 1.0, tol: Tolerances = DEFAULT_TOL) -> list[np.ndarray]:
    """Group computed eigenvalues that represent one exact eigenvalue.

    Parameters
    ----------
    w : computed eigenvalues
    scale : magnitude used to make thresholds relative

    Returns
    -------
    list of index arrays, ordered by the (Re, Im) key of the centroid.
    """
    w = np.asarray(w, dtype=complex)
    n = len(w)
    if n == 0:
        return []
    uf = _UnionFind(n)
    D = np.abs(w[:, None] - w[None, :])
    ii, jj = np.nonzero(np.triu(D <= tol.cluster_tol * scale, 1))
    for i, j in zip(ii, jj):
        uf.union(int(i), int(j))

    eta = tol.defect_tol
    cands: list[tuple[int, float, tuple[int, ...]]] = []
    m_all = np.arange(1, n + 1)
    # centred power sums of the m nearest neighbours of every eigenvalue;
    # a cluster that passes the polynomial test has |p_k| <= k eta (k <= 4)
    order = np.argsort(D, axis=1, kind="stable")
    Z = (w[order] - w[:, None]) / scale
    c1, c2, c3, c4 = (np.cumsum(Z**k, axis=1) for k in range(1, 5))
    c = c1 / m_all
    p2 = c2 - m_all * c**2
    p3 = c3 - 3 * c * c2 + 3 * c**2 * c1 - m_all * c**3
    p4 = c4 - 4 * c * c3 + 6 * c**2 * c2 - 4 * c**3 * c1 + m_all * c**4
    ok = (np.abs(p2) <= 2 * eta) & (np.abs(p3) <= 3 * eta) & (np.abs(p4) <= 5 * eta)
    ok[:, 0] = False
    for i in np.nonzero(ok.any(axis=1))[0]:
        for mm in np.nonzero(ok[i])[0][::-1]:
            S = order[i, : mm + 1]
            if mm < 4:
                # Newton's identities give the centred coefficients directly
                e2 = -p2[i, mm] / 2
                e = [e2, p3[i, mm] / 3, (-e2 * p2[i, mm] - p4[i, mm]) / 4][:mm]
                small = max(abs(x) for x in e) <= eta
            else:
                small = _centred_poly_small(Z[i, : mm + 1], eta)
            if small:
                rad = float(np.max(np.abs(Z[i, : mm + 1] - c[i, mm])))
                cands.append((mm + 1, rad, tuple(sorted(int(k) for k in S))))
                break
    cands.sort(key=lambda t: (-t[0], t[1], t[2]))
    taken = np.zeros(n, dtype=bool)
    for _, _, S in cands:
        S = np.array(S)
        if taken[S].any():
            continue
        taken[S] = True
        for k in S[1:]:
            uf.union(int(S[0]), int(k))

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(uf.find(i), []).append(i)
    out = [np.array(g) for g in groups.values()]
    out.sort(key=lambda g: sort_key(w[g].mean(), scale))
    return out


@dataclass
class EigenCluster:
    """One numerically distinct eigenvalue and its generalized eigenspace."""

    omega: complex
    members: np.ndarray
    algebraic_mult: int
    geometric_mult: int
    partition: tuple
    is_real: bool
    chains: list = field(default_factory=list)  # each (n, L): columns chi_1..chi_L
    basis: np.ndarray | None = None  # orthonormal basis of the invariant subspace
    block: np.ndarray | None = None  # restriction of G to ``basis``
    spread: float = 0.0
    quartet_id: int = -1

    @property
    def is_defective(self) -> bool:
        return self.geometric_mult < self.algebraic_mult

    @property
    def eigenvectors(self) -> np.ndarray:
        """Bottom vectors of all chains (true eigenvectors)."""
        return np.column_stack([c[:, 0] for c in self.chains])


@dataclass
class SpectrumReport:
    G: np.ndarray
    scale: float
    eigenvalues: np.ndarray  # raw Schur eigenvalues, canonical order
    clusters: list
    quartets: list  # each a list of cluster indices
    tol: Tolerances = DEFAULT_TOL

    @property
    def is_diagonalizable(self) -> bool:
        return all(not c.is_defective for c in self.clusters)

    @property
    def is_real_spectrum(self) -> bool:
        return all(c.is_real for c in self.clusters)

    @property
    def omegas(self) -> np.ndarray:
        """Cluster centroids repeated by algebraic multiplicity."""
        if not self.clusters:
            return np.zeros(0, dtype=complex)
        return np.concatenate([np.full(c.algebraic_mult, c.omega) for c in self.clusters])

    def eigenvectors(self) -> np.ndarray:
        """All chain vectors, cluster by cluster (a basis of C^{2N})."""
        return np.column_stack([v for c in self.clusters for v in c.chains])

    def cluster_index(self, omega: complex) -> int:
        d = [abs(c.omega - omega) for c in self.clusters]
        return int(np.argmin(d))

    def partner_index(self, k: int) -> int:
        """Index of the cluster at the complex-conjugate eigenvalue."""
        if self.clusters[k].is_real:
            return k
        return self.cluster_index(np.conj(self.clusters[k].omega))

    def rows(self) -> list[dict]:
        out = []
        for i, c in enumerate(self.clusters):
            out.append(
                {
                    "eigen_index": i,
                    "re_omega": float(np.real(c.omega)),
                    "im_omega": 0.0 if c.is_real else float(np.imag(c.omega)),
                    "is_real": bool(c.is_real),
                    "quartet_id": c.quartet_id,
                    "algebraic_mult": c.algebraic_mult,
                    "geometric_mult": c.geometric_mult,
                }
            )
        return out


def _schur_eigvec(T: np.ndarray, Z: np.ndarray, k: int) -> np.ndarray:
    lam = T[k, k]
    if k == 0:
        return Z[:, 0].copy()
    A = T[:k, :k] - lam * np.eye(k)
    d = np.abs(np.diag(A))
    # guard a tiny pivot from an eigenvalue in another (nearby) cluster
    floor = 1e-14 * max(1.0, np.max(np.abs(T)))
    A[np.diag_indices(k)] = np.where(d < floor, floor, np.diag(A))
    x = sla.solve_triangular(A, -T[:k, k])
    return Z[:, :k] @ x + Z[:, k]


def _reorder(T: np.ndarray, Z: np.ndarray, idx) -> tuple[np.ndarray, np.ndarray]:
    sel = np.zeros(T.shape[0], dtype=np.int32)
    sel[np.asarray(idx)] = 1
    Ts, Zs, _, m, _, _, info = lapack.ztrsen(sel, T, Z, job="N")
    if info != 0:
        raise IndeterminateError(f"Schur reordering failed (info={info})")
    return Ts, Zs


def _chains_from_nilpotent(A: np.ndarray, noise: float, tol: Tolerances):
    """Partition and Jordan chains (in coordinates) of a nearly nilpotent A."""
    m = A.shape[0]
    normA = np.linalg.norm(A, 2)
    nullities = [0]
    kernels = {0: np.zeros((m, 0), dtype=complex)}
    P = np.eye(m, dtype=complex)
    for k in range(1, m + 1):
        P = P @ A
        atol = k * noise * max(normA, noise) ** (k - 1)
        r = numerical_rank(P, tol.rank_tol, tol.gap_floor, atol=atol)
        _, _, Vh = np.linalg.svd(P)
        kernels[k] = Vh[r:].conj().T
        nullities.append(m - r)
        if m - r == m:
            break
    if nullities[-1] != m:
        raise IndeterminateError(
            f"cluster of size {m} is not nilpotent at working precision (nullities {nullities})"
        )
    kmax = len(nullities) - 1
    at_least = [nullities[k] - nullities[k - 1] for k in range(1, kmax + 1)]
    at_least.append(0)
    counts = {L: at_least[L - 1] - at_least[L] for L in range(1, kmax + 1)}
    if any(v < 0 for v in counts.values()):
        raise IndeterminateError(f"inconsistent nullity sequence {nullities}")

    tops: list[tuple[int, np.ndarray]] = []
    chains: list[np.ndarray] = []
    for L in range(kmax, 0, -1):
        cnt = counts[L]
        if cnt == 0:
            continue
        levels = [np.linalg.matrix_power(A, Lp - L) @ u for Lp, u in tops]
        W = np.column_stack([kernels[L - 1]] + levels) if (levels or L > 1) else np.zeros((m, 0))
        if W.shape[1]:
            Uw, sw, _ = np.linalg.svd(W, full_matrices=False)
            W = Uw[:, sw > 1e-10 * max(1.0, sw[0])]
        KL = kernels[L]
        C = KL - W @ (W.conj().T @ KL) if W.shape[1] else KL
        _, _, Vh = np.linalg.svd(C)
        for j in range(cnt):
            u = KL @ Vh[j].conj()
            u = u / np.linalg.norm(u)
            tops.append((L, u))
            cols = [np.linalg.matrix_power(A, L - 1 - i) @ u for i in range(L)]
            chains.append(np.column_stack(cols))
    partition = tuple(sorted((c.shape[1] for c in chains), reverse=True))
    return partition, chains


def _clean_full_nullity(G: np.ndarray, c: complex, m: int, scale: float, tol: Tolerances) -> bool:
    """True if ``G - c`` has exactly ``m`` negligible singular values behind a clear gap.

    Used to recognise semisimple clusters of strongly non-normal G, where
    the reordered Schur block picks up off-diagonal noise above the
    nilpotency floor.
    """
    n = G.shape[0]
    sv = sla.svdvals(G - c * np.eye(n))
    thr = tol.rank_tol * scale
    return int(np.sum(sv <= thr)) == m and (m == n or sv[n - m - 1] > tol.gap_floor * thr)


def eigendecompose(G, tol: Tolerances = DEFAULT_TOL, check_quartets: bool = True) -> SpectrumReport:
    """Full Jordan-aware spectral analysis of ``G``.

    Returns a ``SpectrumReport`` whose clusters carry centroids, algebraic
    and geometric multiplicities, chain partitions, and generalized
    eigenvectors (unit-normalised tops, phase fixed for simple vectors).
    """
    G = np.asarray(G, dtype=complex)
    n = G.shape[0]
    scale = matrix_scale(G)
    T, Z = sla.schur(G, output="complex")
    w = np.diag(T).copy()
    groups = cluster_eigenvalues(w, scale, tol)
    noise = 64 * n * _EPS * max(np.linalg.norm(G, "fro"), 1e-300)
    clusters = []
    for idx in groups:
        c = complex(w[idx].mean())
        m = len(idx)
        if m == 1:
            v = fix_phase(_schur_eigvec(T, Z, int(idx[0])))
            chains = [v[:, None]]
            part = (1,)
            basis = v[:, None]
            block = np.array([[w[idx[0]]]])
        else:
            Ts, Zs = _reorder(T, Z, idx)
            block = Ts[:m, :m]
            basis = Zs[:, :m]
            if _clean_full_nullity(G, c, m, scale, tol):
                part, cc = (1,) * m, [e[:, None] for e in np.eye(m, dtype=complex)]
            else:
                part, cc = _chains_from_nilpotent(block - c * np.eye(m), noise, tol)
            chains = [basis @ x for x in cc]
            if all(L == 1 for L in part):
                chains = [fix_phase(x[:, 0])[:, None] for x in chains]
        clusters.append(
            EigenCluster(
                omega=c,
                members=np.asarray(idx),
                algebraic_mult=m,
                geometric_mult=len(part),
                partition=part,
                is_real=abs(c.imag) <= tol.real_tol * scale,
                chains=chains,
                basis=basis,
                block=block,
                spread=float(np.max(np.abs(w[idx] - c))),
            )
        )
    order = np.concatenate(groups) if groups else np.zeros(0, dtype=int)
    rep = SpectrumReport(G=G, scale=scale, eigenvalues=w[order], clusters=clusters, quartets=[], tol=tol)
    rep.quartets = group_quartets(rep, check=check_quartets)
    return rep


def group_quartets(report: SpectrumReport, check: bool = True) -> list[list[int]]:
    """Assign quartet ids: orbits of {w, w*, -w, -w*} over clusters.

    Raises ``QuartetClosureError`` when a partner is missing or the
    multiplicities inside an orbit disagree (unless ``check`` is False).
    """
    cl = report.clusters
    if not cl:
        return []
    cent = np.array([c.omega for c in cl])
    rad = report.tol.quartet_tol * report.scale
    quartets: list[list[int]] = []
    assigned = np.full(len(cl), -1)
    for i, c in enumerate(cl):
        if assigned[i] >= 0:
            continue
        orbit = {i}
        targets = (-c.omega,) if c.is_real else (np.conj(c.omega), -c.omega, -np.conj(c.omega))
        for target in targets:
            d = np.array(
                [
                    abs(cent[j].real - target.real) if (c.is_real and cl[j].is_real) else abs(cent[j] - target)
                    for j in range(len(cl))
                ]
            )
            j = int(np.argmin(d))
            if d[j] <= rad:
                orbit.add(j)
            elif check:
                raise QuartetClosureError(
                    f"no partner for omega={c.omega:.6g} at {target:.6g} (nearest {d[j]:.3e})"
                )
        mults = {cl[j].algebraic_mult for j in orbit}
        if check and len(mults) != 1:
            raise QuartetClosureError(f"multiplicities {mults} differ inside quartet of {c.omega:.6g}")
        qid = len(quartets)
        members = sorted(orbit)
        for j in members:
            if assigned[j] < 0:
                assigned[j] = qid
                cl[j].quartet_id = qid
        quartets.append(members)
    return quartets


@dataclass
class JordanStructure:
    omega: complex
    algebraic_mult: int
    geometric_mult: int
    partition: tuple
    chains: list

    def residuals(self, G) -> list[float]:
        """Chain residuals ``|(G - w) chi_k - chi_{k-1}|`` (max per chain)."""
        G = np.asarray(G)
        out = []
        for ch in self.chains:
            A = G @ ch - self.omega * ch
            A[:, 1:] -= ch[:, :-1]
            out.append(float(np.max(np.linalg.norm(A, axis=0))))
        return out


def detect_jordan_structure(G, omega: complex, tol: Tolerances = DEFAULT_TOL, report=None) -> JordanStructure:
    """Jordan data of the cluster whose centroid is nearest to ``omega``."""
    rep = report if report is not None else eigendecompose(G, tol, check_quartets=False)
    k = rep.cluster_index(omega)
    c = rep.clusters[k]
    reach = max(1e-6 * rep.scale, 4 * c.spread)
    if abs(c.omega - omega) > reach:
        return JordanStructure(complex(omega), 0, 0, (), [])
    return JordanStructure(c.omega, c.algebraic_mult, c.geometric_mult, c.partition, c.chains)


def is_diagonalizable(G, tol: Tolerances = DEFAULT_TOL) -> bool:
    return eigendecompose(G, tol, check_quartets=False).is_diagonalizable
