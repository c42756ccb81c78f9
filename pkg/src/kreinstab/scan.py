"""Parameter-space drivers: stability grids, tracked KPR maps, spectral flow.

Every grid point is evaluated independently by a pure function.  Results
are merged in row-major order (first axis outer).  BLAS is pinned to one
thread inside each evaluation, so serial and pooled runs give
bit-identical numbers.  ``KS_THREADS`` caps the number of worker
processes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from threadpoolctl import threadpool_limits

from .errors import InvalidSpecError
from .fileio import fmt, write_csv
from .krein import dynamical_stability, kpr_value, krein_signature
from .models import FAMILIES, family_G
from .nambu import tau3_inner
from .tolerances import DEFAULT_TOL, Tolerances, matrix_scale

__all__ = [
    "Axis",
    "ScanGrid",
    "stability_scan",
    "boundary_mask",
    "refine_boundary",
    "kpr_scan",
    "FlowTrace",
    "spectral_flow",
    "contour_eval",
    "worker_count",
]


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    step: float

    def values(self) -> np.ndarray:
        if self.step <= 0:
            raise InvalidSpecError(f"axis {self.name}: step must be positive")
        n = int(math.floor((self.max - self.min) / self.step + 1e-9)) + 1
        return np.round(self.min + self.step * np.arange(n), 12)

    @classmethod
    def from_dict(cls, d: dict) -> "Axis":
        try:
            return cls(str(d["name"]), float(d["min"]), float(d["max"]), float(d["step"]))
        except KeyError as exc:
            raise InvalidSpecError(f"axis needs name/min/max/step, missing {exc}") from None


def worker_count(requested: int | None = None) -> int:
    cap = os.environ.get("KS_THREADS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise InvalidSpecError(f"KS_THREADS must be an integer, got {cap!r}") from None
    return max(1, n)


def _point(args):
    family, params, tol = args
    G = family_G(family, params)
    w = np.linalg.eigvals(G)
    v = dynamical_stability(G, tol, eigenvalues=w)
    return v.verdict, float(v.max_imag), float(np.min(np.abs(w)))


_LIMITER = None


def _single_thread_blas():
    global _LIMITER
    _LIMITER = threadpool_limits(limits=1)


def _map(fn, items: list, workers: int):
    if workers <= 1 or len(items) < 64:
        with threadpool_limits(limits=1):
            return [fn(x) for x in items]
    chunk = max(1, len(items) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers, initializer=_single_thread_blas) as ex:
        return list(ex.map(fn, items, chunksize=chunk))


@dataclass
class ScanGrid:
    family: str
    params: dict
    axes: list
    verdict: np.ndarray  # object array of "stable" | "unstable" | "indeterminate"
    max_imag: np.ndarray
    min_abs: np.ndarray
    kpr: np.ndarray | None = None
    boundary_points: list = field(default_factory=list)  # (a1, a2) refined crossings

    @property
    def shape(self) -> tuple:
        return self.verdict.shape

    def stable_mask(self) -> np.ndarray:
        return self.verdict == "stable"

    def boundary(self) -> np.ndarray:
        return boundary_mask(self.verdict)

    def header(self) -> list:
        h = [a.name for a in self.axes] + ["verdict", "max_abs_im_omega", "min_abs_omega", "boundary_cell"]
        if self.kpr is not None:
            h.append("kpr")
        return h

    def rows(self):
        vals = [a.values() for a in self.axes]
        bmask = self.boundary()
        for idx in np.ndindex(*self.shape):
            row = [float(vals[k][i]) for k, i in enumerate(idx)]
            row += [self.verdict[idx], self.max_imag[idx], self.min_abs[idx], bool(bmask[idx])]
            if self.kpr is not None:
                row.append(self.kpr[idx])
            yield row

    def to_csv(self, path=None) -> str:
        return write_csv(path, self.header(), self.rows())

    def boundary_csv(self, path=None) -> str:
        names = [a.name for a in self.axes]
        return write_csv(path, names, self.boundary_points)


def _check_family(family: str, axes) -> None:
    if family not in FAMILIES:
        raise InvalidSpecError(f"unknown model {family!r}; choose from {sorted(FAMILIES)}")
    known = set(FAMILIES[family][1])
    for a in axes:
        if a.name not in known:
            raise InvalidSpecError(f"model {family!r} has no parameter {a.name!r}; known: {sorted(known)}")


def stability_scan(
    family: str,
    params: dict,
    axes,
    tol: Tolerances = DEFAULT_TOL,
    workers: int | None = None,
) -> ScanGrid:
    """Dynamical-stability verdict, max|Im w| and min|w| at every grid point."""
    axes = [a if isinstance(a, Axis) else Axis.from_dict(a) for a in axes]
    _check_family(family, axes)
    vals = [a.values() for a in axes]
    shape = tuple(len(v) for v in vals)
    items = []
    for idx in np.ndindex(*shape):
        p = dict(params)
        for a, v, i in zip(axes, vals, idx):
            p[a.name] = float(v[i])
        items.append((family, p, tol))
    out = _map(_point, items, worker_count(workers))
    verdict = np.empty(shape, dtype=object)
    mi = np.empty(shape)
    mn = np.empty(shape)
    for idx, (v, a, b) in zip(np.ndindex(*shape), out):
        verdict[idx], mi[idx], mn[idx] = v, a, b
    return ScanGrid(family, dict(params), axes, verdict, mi, mn)


def boundary_mask(verdict: np.ndarray) -> np.ndarray:
    """Cells whose verdict differs from any 4-neighbour."""
    v = np.asarray(verdict)
    m = np.zeros(v.shape, bool)
    for ax in range(v.ndim):
        d = np.take(v, range(1, v.shape[ax]), axis=ax) != np.take(v, range(v.shape[ax] - 1), axis=ax)
        lo = [slice(None)] * v.ndim
        hi = [slice(None)] * v.ndim
        lo[ax] = slice(0, v.shape[ax] - 1)
        hi[ax] = slice(1, None)
        m[tuple(lo)] |= d
        m[tuple(hi)] |= d
    return m


def _verdict_at(family, params, tol) -> str:
    return _point((family, params, tol))[0]


def refine_boundary(grid: ScanGrid, iterations: int = 20, tol: Tolerances = DEFAULT_TOL) -> list:
    """Bisect every stable/unstable neighbour pair along its connecting segment.

    Returns crossing points in deterministic order.  They are also stored
    on ``grid.boundary_points``.
    """
    with threadpool_limits(limits=1):
        return _refine_boundary(grid, iterations, tol)


def _refine_boundary(grid, iterations, tol):
    vals = [a.values() for a in grid.axes]
    pts = []
    v = grid.verdict
    for ax in range(v.ndim):
        for idx in np.ndindex(*v.shape):
            if idx[ax] + 1 >= v.shape[ax]:
                continue
            jdx = list(idx)
            jdx[ax] += 1
            jdx = tuple(jdx)
            a, b = v[idx], v[jdx]
            if a == b or "indeterminate" in (a, b):
                continue
            lo = np.array([vals[k][i] for k, i in enumerate(idx)], float)
            hi = np.array([vals[k][i] for k, i in enumerate(jdx)], float)
            va = a
            for _ in range(iterations):
                mid = 0.5 * (lo + hi)
                p = dict(grid.params)
                for k, ax_ in enumerate(grid.axes):
                    p[ax_.name] = float(mid[k])
                if _verdict_at(grid.family, p, tol) == va:
                    lo = mid
                else:
                    hi = mid
            pts.append(tuple(float(x) for x in 0.5 * (lo + hi)))
    grid.boundary_points = pts
    return pts


# ---------------------------------------------------------------- tracking


def _unit_eig(G):
    w, V = np.linalg.eig(G)
    V = V / np.linalg.norm(V, axis=0)
    return w, V


def _kpr_of(G, ws, V, k, tol) -> float:
    """KPR of column ``k`` of ``V``; complex partners come from the same decomposition."""
    sc = matrix_scale(G)
    w, v = ws[k], V[:, k]
    if abs(w.imag) <= tol.real_tol * sc:
        return float(abs(tau3_inner(v, v).real) / np.vdot(v, v).real)
    near = np.abs(ws - np.conj(w)) <= tol.cluster_tol * sc
    if not near.any():
        near[np.argmin(np.abs(ws - np.conj(w)))] = True
    Q, _ = np.linalg.qr(V[:, near])
    return kpr_value(G, w, v, partner_space=Q, tol=tol)


def _seed_index(w, seed) -> int:
    if seed is None or seed == "max_re":
        return int(np.lexsort((w.imag, w.real))[-1])
    if isinstance(seed, (int, np.integer)):
        return int(np.argsort(w.real, kind="stable")[seed])
    return int(np.argmin(np.abs(w - complex(seed))))


def kpr_scan(
    family: str,
    params: dict,
    axes,
    seed=None,
    tol: Tolerances = DEFAULT_TOL,
) -> tuple:
    """KPR of one eigenvector tracked along a serpentine traversal of a 2-D grid.

    ``seed`` picks the vector at the first grid point.  It can be
    ``"max_re"`` (largest real part, the default), an integer rank in
    ascending real part, or a target eigenvalue.  A step whose best
    overlap falls below ``continuity_floor`` yields NaN.  Such steps are
    listed in the returned diagnostics.
    """
    axes = [a if isinstance(a, Axis) else Axis.from_dict(a) for a in axes]
    if len(axes) != 2:
        raise InvalidSpecError("kpr_scan needs exactly two axes")
    _check_family(family, axes)
    v0, v1 = (a.values() for a in axes)
    out = np.full((len(v0), len(v1)), np.nan)
    diags = []
    prev = None
    with threadpool_limits(limits=1):
        for i in range(len(v0)):
            cols = range(len(v1)) if i % 2 == 0 else range(len(v1) - 1, -1, -1)
            for j in cols:
                p = dict(params)
                p[axes[0].name], p[axes[1].name] = float(v0[i]), float(v1[j])
                G = family_G(family, p)
                w, V = _unit_eig(G)
                if prev is None:
                    k = _seed_index(w, seed)
                    ov = 1.0
                else:
                    o = np.abs(V.conj().T @ prev)
                    k = int(np.argmax(o))
                    ov = float(o[k])
                prev = V[:, k]
                if ov < tol.continuity_floor:
                    diags.append(f"tracking loss at ({v0[i]:.6g}, {v1[j]:.6g}): overlap {ov:.3f}")
                    continue
                out[i, j] = _kpr_of(G, w, V, k, tol)
    return out, diags


@dataclass
class FlowTrace:
    sigmas: np.ndarray
    eigenvalues: np.ndarray  # (steps, 2N), columns follow the tracked assignment
    signatures: np.ndarray  # (steps, 2N) in {+1, -1, 0}
    kpr: np.ndarray  # (steps, 2N)
    min_overlap: np.ndarray  # (steps,) worst overlap linking step k-1 to k
    permutations: list  # assignment from step k-1 columns to step k eigen-indices
    annotations: list = field(default_factory=list)  # (step, kind, detail)

    @property
    def discontinuities(self) -> list:
        return [a for a in self.annotations if a[1] == "discontinuity"]

    def rows(self):
        """(step, sigma, track, re_omega, im_omega, signature, kpr) rows."""
        for s, sig in enumerate(self.sigmas):
            for c in range(self.eigenvalues.shape[1]):
                w = self.eigenvalues[s, c]
                yield (s, float(sig), c, float(w.real), float(w.imag), int(self.signatures[s, c]), float(self.kpr[s, c]))


def _resolve_path(path, sigmas):
    if callable(path):
        return [dict(path(float(s))) for s in sigmas]
    seq = list(path)
    if len(seq) != len(sigmas):
        raise InvalidSpecError("path list and sigma grid differ in length")
    return [dict(p) for p in seq]


def spectral_flow(family: str, params: dict, path, sigmas, tol: Tolerances = DEFAULT_TOL) -> FlowTrace:
    """Eigenvalues, Krein signatures and KPRs along a path, with continuity tracking.

    ``path`` maps ``sigma`` to a dict of parameter overrides.  Consecutive
    steps are linked by the bijection maximising total eigenvector
    overlap.
    """
    sigmas = np.asarray(sigmas, dtype=float)
    plist = _resolve_path(path, sigmas)
    evs, sigs, kprs, mins, perms, ann = [], [], [], [], [], []
    prevV = None
    with threadpool_limits(limits=1):
        for s, over in enumerate(plist):
            p = dict(params)
            p.update(over)
            G = family_G(family, p)
            sc = matrix_scale(G)
            w, V = _unit_eig(G)
            if prevV is None:
                order = np.lexsort((w.imag, w.real))
                mins.append(1.0)
            else:
                O = np.abs(prevV.conj().T @ V)
                r, c = linear_sum_assignment(-O)
                order = c[np.argsort(r)]
                worst = float(O[np.arange(len(order)), order].min())
                mins.append(worst)
                if worst < tol.continuity_floor:
                    ann.append((s, "discontinuity", f"overlap {worst:.3f}"))
            perms.append(order.tolist())
            w, V = w[order], V[:, order]
            sg = np.array([0 if abs(x.imag) > tol.real_tol * sc else krein_signature(V[:, k], tol.null_tol) for k, x in enumerate(w)])
            kp = np.array([_kpr_of(G, w, V, k, tol) for k in range(len(w))])
            if evs:
                was_real = np.abs(evs[-1].imag) <= tol.real_tol * sc
                now_real = np.abs(w.imag) <= tol.real_tol * sc
                for k in np.where(was_real & ~now_real)[0]:
                    ann.append((s, "off-axis", f"track {k} leaves the real axis at {w[k]:.6g}"))
                for k in np.where(~was_real & now_real)[0]:
                    ann.append((s, "on-axis", f"track {k} returns to the real axis at {w[k]:.6g}"))
            for a in range(len(w)):
                for b in range(a + 1, len(w)):
                    if sg[a] * sg[b] == -1 and abs(w[a] - w[b]) < 1e-3 * sc:
                        ann.append((s, "signature-merger", f"tracks {a},{b} near {w[a].real:.6g}"))
            evs.append(w)
            sigs.append(sg)
            kprs.append(kp)
            prevV = V
    return FlowTrace(sigmas, np.array(evs), np.array(sigs), np.array(kprs), np.array(mins), perms, ann)


def contour_eval(
    family: str,
    params: dict,
    contour,
    sigmas,
    quantity: str = "kpr",
    seed=None,
    tol: Tolerances = DEFAULT_TOL,
) -> tuple:
    """One quantity along a 1-D contour; ``kpr`` follows a single tracked vector.

    Returns ``(values, diagnostics)``.
    """
    if quantity not in ("kpr", "max_im", "min_mod"):
        raise InvalidSpecError(f"unknown quantity {quantity!r}")
    sigmas = np.asarray(sigmas, dtype=float)
    plist = _resolve_path(contour, sigmas)
    vals = np.full(len(sigmas), np.nan)
    diags = []
    prev = None
    with threadpool_limits(limits=1):
        for s, over in enumerate(plist):
            p = dict(params)
            p.update(over)
            G = family_G(family, p)
            w, V = _unit_eig(G)
            if quantity == "max_im":
                vals[s] = float(np.max(np.abs(w.imag)))
                continue
            if quantity == "min_mod":
                vals[s] = float(np.min(np.abs(w)))
                continue
            if prev is None:
                k = _seed_index(w, seed)
                ov = 1.0
            else:
                o = np.abs(V.conj().T @ prev)
                k = int(np.argmax(o))
                ov = float(o[k])
            prev = V[:, k]
            if ov < tol.continuity_floor:
                diags.append(f"tracking loss at sigma={sigmas[s]:.6g}: overlap {ov:.3f}")
                continue
            vals[s] = _kpr_of(G, w, V, k, tol)
    return vals, diags
