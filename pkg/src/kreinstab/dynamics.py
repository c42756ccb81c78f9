"""Time evolution of Nambu mode vectors and of the Hermitian quadratures.

Mode vectors obey ``d/dt |a(t)> = i G |a(t)>``, so the flow is
``exp(iGt)``.  Quadratures ``x = (a + a^dag)/sqrt2`` and
``p = -i(a - a^dag)/sqrt2`` obey

    dx/dt =  C^T x + T p
    dp/dt = -V x   - C p

with ``C = Im(Delta - K)``, ``V = Re(K + Delta)`` and ``T = Re(K - Delta)``.
The two sets decouple exactly when ``K`` and ``Delta`` are purely imaginary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import InvalidSpecError, StructureViolationError
from .krein import detect_krein_collisions, dynamical_stability
from .nambu import QBHSpec, build_effective_sph, tau3_diag
from .spectral import eigendecompose
from .tolerances import DEFAULT_TOL, Tolerances, matrix_scale

__all__ = [
    "propagator",
    "modal_propagator",
    "symplectic_residual",
    "jordan_mode_evolution",
    "ModeTrajectory",
    "evolve_mode",
    "classify_growth",
    "spectral_growth",
    "QuadratureCouplings",
    "quadrature_decoupling_check",
    "quadrature_generator",
    "TransportResult",
    "phase_transport_sim",
    "DecoupledCollisionResult",
    "decoupled_collision_check",
]


def propagator(G, t: float) -> np.ndarray:
    """``exp(iGt)`` by scaling and squaring."""
    return sla.expm(1j * t * np.asarray(G, dtype=complex))


def modal_propagator(G, t: float) -> np.ndarray:
    """``exp(iGt)`` through an eigendecomposition (diagonalizable G only)."""
    w, V = np.linalg.eig(np.asarray(G, dtype=complex))
    return (V * np.exp(1j * w * t)) @ np.linalg.inv(V)


def symplectic_residual(S) -> float:
    """``max |S^dag tau3 S - tau3|``; zero for any flow generated by a valid G."""
    S = np.asarray(S)
    d = tau3_diag(S.shape[0])
    return float(np.max(np.abs(S.conj().T @ (d[:, None] * S) - np.diag(d))))


def jordan_mode_evolution(chain, omega0: complex, t: float, G=None, check_tol: float = 1e-8) -> np.ndarray:
    """Evolve a Jordan chain ``(G - w0) chi_k = chi_{k-1}`` in closed form.

    Column k of the result is
    ``exp(iGt) chi_k = e^{i w0 t} sum_l (it)^l / l! chi_{k-l}``.
    If ``G`` is given the chain relations are checked first.
    """
    X = np.asarray(chain, dtype=complex)
    if X.ndim == 1:
        X = X[:, None]
    if G is not None:
        G = np.asarray(G, dtype=complex)
        prev = np.zeros(X.shape[0], dtype=complex)
        for k in range(X.shape[1]):
            r = np.linalg.norm(G @ X[:, k] - omega0 * X[:, k] - prev)
            if r > check_tol * matrix_scale(G) * max(1.0, np.linalg.norm(X[:, k])):
                raise StructureViolationError(f"chain relation fails at k={k + 1} (residual {r:.2e})")
            prev = X[:, k]
    L = X.shape[1]
    out = np.zeros_like(X)
    for k in range(L):
        for l in range(k + 1):
            out[:, k] += (1j * t) ** l / math.factorial(l) * X[:, k - l]
    return np.exp(1j * omega0 * t) * out


def classify_growth(times, norms, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Bounded / polynomial / exponential from sampled norms.

    The running maximum of the norm is fitted over the last decade of
    times twice.  A log-norm slope above ``10 * real_tol`` whose linear
    fit beats the log-log fit counts as exponential.  Otherwise a
    log-log degree of at least 1/2 counts as polynomial, rounded up to
    degree >= 1.
    """
    t = np.asarray(times, dtype=float)
    n = np.maximum.accumulate(np.asarray(norms, dtype=float))
    sel = t >= t[-1] / 10
    sel &= t > 0
    if sel.sum() < 3:
        return {"kind": "bounded", "rate": 0.0, "degree": 0}
    ts, ln = t[sel], np.log(n[sel])
    A = np.column_stack([np.ones_like(ts), ts])
    c_lin, res_lin, *_ = np.linalg.lstsq(A, ln, rcond=None)
    B = np.column_stack([np.ones_like(ts), np.log(ts)])
    c_log, res_log, *_ = np.linalg.lstsq(B, ln, rcond=None)
    res_lin = float(res_lin[0]) if len(res_lin) else 0.0
    res_log = float(res_log[0]) if len(res_log) else 0.0
    rate, deg = float(c_lin[1]), float(c_log[1])
    growth = ln[-1] - ln[0]
    if rate > 10 * tol.real_tol and res_lin < res_log and growth > 1.0:
        return {"kind": "exponential", "rate": rate, "degree": None}
    if deg >= 0.5 and growth > 1e-3:
        return {"kind": "polynomial", "rate": 0.0, "degree": max(1, int(round(deg)))}
    return {"kind": "bounded", "rate": 0.0, "degree": 0}


def spectral_growth(G, v0, tol: Tolerances = DEFAULT_TOL) -> str:
    """Growth type predicted by the spectral content of ``v0``."""
    G = np.asarray(G, dtype=complex)
    v0 = np.asarray(v0, dtype=complex)
    rep = eigendecompose(G, tol, check_quartets=False)
    sc = rep.scale
    kind = "bounded"
    for cl in rep.clusters:
        if cl.basis is None:
            continue
        # oblique projector onto the generalized eigenspace of this cluster
        X = cl.basis
        others = [c.basis for c in rep.clusters if c is not cl and c.basis is not None]
        Y = np.column_stack(others) if others else np.zeros((X.shape[0], 0))
        coef = np.linalg.lstsq(np.column_stack([X, Y]), v0, rcond=None)[0][: X.shape[1]]
        if np.linalg.norm(coef) <= 1e-10 * max(1.0, np.linalg.norm(v0)):
            continue
        if abs(cl.omega.imag) > tol.real_tol * sc and cl.omega.imag < 0:
            return "exponential"
        if cl.is_defective and abs(cl.omega.imag) <= tol.real_tol * sc:
            comp = X @ coef
            if np.linalg.norm(G @ comp - cl.omega * comp) > 1e-10 * max(1.0, np.linalg.norm(comp)):
                kind = "polynomial"
    return kind


@dataclass
class ModeTrajectory:
    times: np.ndarray
    vectors: np.ndarray  # (len(times), 2N)
    growth_classification: str
    fit: dict = field(default_factory=dict)

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.vectors, axis=1)

    def rows(self):
        """(time, component_index, re, im) rows for CSV export."""
        for t, v in zip(self.times, self.vectors):
            for i, c in enumerate(v):
                yield (float(t), i, float(c.real), float(c.imag))


def evolve_mode(G, v0, times, tol: Tolerances = DEFAULT_TOL) -> ModeTrajectory:
    """Exact evolution of ``v0`` at every requested time, with growth classification."""
    G = np.asarray(G, dtype=complex)
    v0 = np.asarray(v0, dtype=complex)
    times = np.asarray(times, dtype=float)
    vecs = np.array([propagator(G, t) @ v0 for t in times])
    fit = classify_growth(times, np.linalg.norm(vecs, axis=1), tol)
    return ModeTrajectory(times, vecs, fit["kind"], fit)


@dataclass
class QuadratureCouplings:
    decoupled: bool
    C: np.ndarray
    V: np.ndarray
    T: np.ndarray
    residual: float  # max(|Re K|, |Re Delta|)


def quadrature_decoupling_check(spec: QBHSpec, tol: float = 1e-10) -> QuadratureCouplings:
    K, D = spec.K, spec.Delta
    res = float(max(np.max(np.abs(K.real), initial=0.0), np.max(np.abs(D.real), initial=0.0)))
    sc = max(matrix_scale(K), matrix_scale(D))
    return QuadratureCouplings(
        decoupled=res <= tol * sc,
        C=(D - K).imag,
        V=(K + D).real,
        T=(K - D).real,
        residual=res,
    )


def quadrature_generator(spec: QBHSpec) -> np.ndarray:
    """Real 2N x 2N matrix A with ``d/dt [x; p] = A [x; p]``."""
    q = quadrature_decoupling_check(spec)
    return np.block([[q.C.T, q.T], [-q.V, -q.C]])


@dataclass
class TransportResult:
    times: np.ndarray
    x: np.ndarray  # (len(times), N)
    p: np.ndarray
    coupled: bool
    chirality: dict  # per quadrature: right/left energy ratio at the final time
    origin: int

    def rows(self):
        """(time, site, x_amplitude, p_amplitude) rows for CSV export."""
        for k, t in enumerate(self.times):
            for j in range(self.x.shape[1]):
                yield (float(t), j + 1, float(self.x[k, j]), float(self.p[k, j]))


def _lr_ratio(profile: np.ndarray, origin: int) -> float:
    e = profile**2
    left, right = float(e[:origin].sum()), float(e[origin + 1 :].sum())
    if left == 0.0:
        return math.inf if right > 0 else 1.0
    return right / left


def phase_transport_sim(spec: QBHSpec, x0, p0, times, origin: int | None = None) -> TransportResult:
    """Evolve the quadratures exactly and measure their left/right asymmetry.

    ``chirality[q]`` is the ratio of the energy to the right of ``origin``
    to the energy on its left, at the last time.  ``origin`` defaults to
    the site where the initial profile is largest.
    """
    A = quadrature_generator(spec)
    N = spec.N
    y0 = np.concatenate([np.asarray(x0, float), np.asarray(p0, float)])
    if y0.shape != (2 * N,):
        raise InvalidSpecError(f"x0 and p0 must have length {N}")
    times = np.asarray(times, dtype=float)
    ys = np.array([sla.expm(A * t) @ y0 for t in times])
    if origin is None:
        origin = int(np.argmax(np.abs(y0[:N]) + np.abs(y0[N:])))
    x, p = ys[:, :N], ys[:, N:]
    chir = {"x": _lr_ratio(x[-1], origin), "p": _lr_ratio(p[-1], origin)}
    coupled = not quadrature_decoupling_check(spec).decoupled
    return TransportResult(times, x, p, coupled, chir, origin)


@dataclass
class DecoupledCollisionResult:
    verdict: str  # "pass" | "fail" | "vacuous" | "not-applicable"
    decoupled: bool
    stable: bool
    n_collisions: int
    evidence: str


def decoupled_collision_check(spec: QBHSpec, tol: Tolerances = DEFAULT_TOL) -> DecoupledCollisionResult:
    """Decoupled quadratures plus dynamical stability must force a Krein collision."""
    q = quadrature_decoupling_check(spec, tol.validation)
    if not q.decoupled:
        return DecoupledCollisionResult("not-applicable", False, False, 0, f"Re part {q.residual:.2e}")
    G = build_effective_sph(spec).G
    v = dynamical_stability(G, tol)
    if not v.stable:
        return DecoupledCollisionResult("vacuous", True, False, 0, v.reason)
    kcs = detect_krein_collisions(G, tol)
    if kcs:
        return DecoupledCollisionResult("pass", True, True, len(kcs), f"collisions at {[round(k.omega.real, 12) for k in kcs]}")
    return DecoupledCollisionResult("fail", True, True, 0, "stable and decoupled but no Krein collision")
