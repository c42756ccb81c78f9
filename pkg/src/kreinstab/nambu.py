"""Nambu-space representation of quadratic bosonic Hamiltonians.

A Hamiltonian ``H = sum K_ij a_i^dag a_j + 1/2 sum (D_ij a_i^dag a_j^dag + h.c.)``
is stored as the pair ``(K, D)``.  In the interleaved Nambu ordering
``Phi = [a_1, a_1^dag, a_2, a_2^dag, ...]`` it becomes
``H = 1/2 Phi^dag H Phi - 1/2 tr K`` with 2x2 site blocks
``[[K_ij, D_ij], [D_ij^*, K_ij^*]]``.  The effective single-particle
Hamiltonian is ``G = tau3 H``; it generates ``i dPhi/dt = G Phi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidHamiltonianError, InvalidSpecError, StructureViolationError
from .tolerances import DEFAULT_TOL, Tolerances, matrix_scale

__all__ = [
    "QBHSpec",
    "EffectiveSPH",
    "validate_qbh",
    "build_single_particle_h",
    "build_effective_sph",
    "spec_from_h",
    "tau",
    "tau3_diag",
    "tau3_inner",
    "tau3_gram",
    "charge_conjugate",
    "structural_residuals",
    "check_effective_sph",
    "ordering_permutation",
    "to_ordering",
]

ORDERINGS = ("interleaved", "blocked")
_PAULI = {
    0: np.eye(2, dtype=complex),
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass
class QBHSpec:
    """Coefficient matrices of a quadratic bosonic Hamiltonian.

    Attributes
    ----------
    K : (N, N) complex array, Hermitian
    Delta : (N, N) complex array, symmetric
    label : free-form description carried into reports
    """

    K: np.ndarray
    Delta: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.K = np.atleast_2d(np.asarray(self.K, dtype=complex))
        self.Delta = np.atleast_2d(np.asarray(self.Delta, dtype=complex))
        if self.K.ndim != 2 or self.K.shape[0] != self.K.shape[1]:
            raise InvalidSpecError(f"K must be square, got shape {self.K.shape}")
        if self.Delta.shape != self.K.shape:
            raise InvalidSpecError(
                f"Delta shape {self.Delta.shape} does not match K shape {self.K.shape}"
            )

    @property
    def N(self) -> int:
        return self.K.shape[0]

    @property
    def energy_offset(self) -> float:
        """Constant ``-1/2 tr K`` produced by normal ordering."""
        return float(-0.5 * np.trace(self.K).real)


@dataclass
class EffectiveSPH:
    """``G = tau3 H`` together with the Hamiltonian matrix it came from."""

    G: np.ndarray
    H: np.ndarray
    N: int
    ordering: str = "interleaved"
    energy_offset: float = 0.0

    @property
    def dim(self) -> int:
        return 2 * self.N


def validate_qbh(spec: QBHSpec, tol: Tolerances = DEFAULT_TOL) -> None:
    """Raise ``InvalidHamiltonianError`` if K is not Hermitian or Delta not symmetric."""
    sc = max(matrix_scale(spec.K), matrix_scale(spec.Delta))
    rk = float(np.max(np.abs(spec.K - spec.K.conj().T), initial=0.0))
    rd = float(np.max(np.abs(spec.Delta - spec.Delta.T), initial=0.0))
    if rk > tol.validation * sc:
        raise InvalidHamiltonianError(f"K is not Hermitian (max residual {rk:.3e})")
    if rd > tol.validation * sc:
        raise InvalidHamiltonianError(f"Delta is not symmetric (max residual {rd:.3e})")


def tau(j: int, N: int, ordering: str = "interleaved") -> np.ndarray:
    """Nambu structure matrix ``tau_j`` for ``N`` modes."""
    m = np.kron(np.eye(N), _PAULI[j])
    if ordering == "interleaved":
        return m
    p = ordering_permutation(N, ordering)
    return m[np.ix_(p, p)]


def tau3_diag(n: int) -> np.ndarray:
    """Diagonal of tau3 in the interleaved ordering (length ``n`` = 2N)."""
    d = np.ones(n)
    d[1::2] = -1.0
    return d


def tau3_inner(u, v) -> complex:
    """``<u|tau3|v>``; broadcasts over trailing columns."""
    u = np.asarray(u)
    v = np.asarray(v)
    s = tau3_diag(u.shape[0])
    if u.ndim == 1 and v.ndim == 1:
        return complex(np.vdot(u, s * v))
    return u.conj().T @ (s[:, None] * v.reshape(v.shape[0], -1))


def tau3_gram(V) -> np.ndarray:
    """Gram matrix ``V^dag tau3 V`` of the columns of V."""
    V = np.asarray(V)
    s = tau3_diag(V.shape[0])
    return V.conj().T @ (s[:, None] * V)


def charge_conjugate(v) -> np.ndarray:
    """``C v = tau1 v^*`` (swap particle and hole components, conjugate)."""
    v = np.asarray(v)
    out = np.empty_like(v, dtype=complex)
    out[0::2] = np.conj(v[1::2])
    out[1::2] = np.conj(v[0::2])
    return out


def ordering_permutation(N: int, ordering: str) -> np.ndarray:
    """Index map from the requested ordering to the interleaved one.

    ``x_ordering = x_interleaved[p]``.
    """
    if ordering == "interleaved":
        return np.arange(2 * N)
    if ordering == "blocked":
        return np.concatenate([np.arange(0, 2 * N, 2), np.arange(1, 2 * N, 2)])
    raise InvalidSpecError(f"unknown ordering {ordering!r}; choose from {ORDERINGS}")


def to_ordering(M: np.ndarray, N: int, ordering: str) -> np.ndarray:
    """Re-express an interleaved matrix (or vector) in another ordering."""
    p = ordering_permutation(N, ordering)
    M = np.asarray(M)
    if M.ndim == 1:
        return M[p]
    return M[np.ix_(p, p)]


def build_single_particle_h(
    spec: QBHSpec, ordering: str = "interleaved", tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    """Hermitian Nambu matrix H with 2x2 blocks ``[[K, D], [D*, K*]]``."""
    validate_qbh(spec, tol)
    N = spec.N
    H = np.empty((2 * N, 2 * N), dtype=complex)
    H[0::2, 0::2] = spec.K
    H[0::2, 1::2] = spec.Delta
    H[1::2, 0::2] = spec.Delta.conj()
    H[1::2, 1::2] = spec.K.conj()
    return to_ordering(H, N, ordering)


def spec_from_h(H: np.ndarray, label: str = "") -> QBHSpec:
    """Inverse of ``build_single_particle_h`` for an interleaved matrix."""
    H = np.asarray(H, dtype=complex)
    if H.shape[0] % 2 or H.shape[0] != H.shape[1]:
        raise InvalidSpecError("Nambu matrix must be square with even dimension")
    return QBHSpec(H[0::2, 0::2].copy(), H[0::2, 1::2].copy(), label=label)


def build_effective_sph(
    spec: QBHSpec, ordering: str = "interleaved", tol: Tolerances = DEFAULT_TOL
) -> EffectiveSPH:
    """Build ``G = tau3 H`` and verify both structural identities."""
    H = build_single_particle_h(spec, "interleaved", tol)
    G = tau3_diag(H.shape[0])[:, None] * H
    check_effective_sph(G, tol)
    return EffectiveSPH(
        G=to_ordering(G, spec.N, ordering),
        H=to_ordering(H, spec.N, ordering),
        N=spec.N,
        ordering=ordering,
        energy_offset=spec.energy_offset,
    )


def structural_residuals(G: np.ndarray) -> dict:
    """Max-entry residuals of the two identities satisfied by any valid G.

    ``pseudo_hermiticity``: ``G^dag - tau3 G tau3``;
    ``charge_conjugation``: ``G^* + tau1 G tau1``.
    """
    G = np.asarray(G)
    n = G.shape[0]
    s = tau3_diag(n)
    t3Gt3 = s[:, None] * G * s[None, :]
    # tau1 G tau1 swaps rows and columns inside each site block
    p = np.arange(n).reshape(-1, 2)[:, ::-1].ravel()
    t1Gt1 = G[np.ix_(p, p)]
    return {
        "pseudo_hermiticity": float(np.max(np.abs(G.conj().T - t3Gt3), initial=0.0)),
        "charge_conjugation": float(np.max(np.abs(G.conj() + t1Gt1), initial=0.0)),
    }


def check_effective_sph(G: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Raise ``StructureViolationError`` if G is not a valid effective SPH."""
    G = np.asarray(G)
    if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] % 2:
        raise StructureViolationError(f"G must be square of even size, got {G.shape}")
    res = structural_residuals(G)
    bound = tol.validation * matrix_scale(G)
    for name, val in res.items():
        if val > bound:
            raise StructureViolationError(f"{name} residual {val:.3e} exceeds {bound:.3e}")
    return res
