"""Generalized Bloch solver for corner-modified banded block-Toeplitz matrices.

A chain with internal dimension 2 and hopping range R has the form
``G = 1 (x) g_0 + sum_r (T^r (x) g_r + (T^dag)^r (x) g_-r) + V``.
Here T is the left shift and V touches only the 2R boundary sites.  The
bulk equation admits exactly 4R independent solutions: generalized Bloch
waves from the nonzero roots of ``P(w, z) = z^{2R} det(G(z) - w)``, plus
emergent solutions pinned to either edge.  An eigenvector is the
combination of these solutions annihilated by the boundary matrix
``B(w)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize

from .errors import InvalidSpecError, KreinStabError, SolutionCountError, StructureViolationError
from .tolerances import DEFAULT_TOL, Tolerances, matrix_scale

__all__ = [
    "BBTSpec",
    "SingularFrequencyError",
    "reduced_bulk_hamiltonian",
    "characteristic_polynomial",
    "characteristic_roots",
    "BulkSolutionSet",
    "bulk_solution_basis",
    "emergent_matrices",
    "boundary_matrix",
    "EigenSearchResult",
    "eigen_search",
    "generalized_kernel",
    "PowerExceedsStructureError",
    "GeneralizedKernel",
]

_S3 = np.diag([1.0, -1.0])
_S1 = np.array([[0.0, 1.0], [1.0, 0.0]])


class SingularFrequencyError(KreinStabError):
    """``P(w, z)`` vanishes identically in z (flat band)."""

    exit_code = 4


class PowerExceedsStructureError(KreinStabError):
    """``(G - w)^p`` is no longer corner-modified block-Toeplitz for this p."""

    exit_code = 4


@dataclass
class BBTSpec:
    """Bulk blocks ``g[r]`` (``|r| <= R``) plus corner blocks.

    ``corners`` maps 1-based ``(row_site, col_site)`` pairs to 2x2 blocks.
    Each pair must lie on the boundary sites ``{1..R, N-R+1..N}``.
    """

    N: int
    R: int
    g: dict
    corners: dict = field(default_factory=dict)
    structure: str = "bosonic"  # "bosonic" enforces both Nambu identities blockwise
    d: int = 2

    def __post_init__(self):
        if self.R < 1 or self.N < 2 * self.R + 1:
            raise InvalidSpecError(f"need R >= 1 and N > 2R, got N={self.N}, R={self.R}")
        g = {}
        for r in range(-self.R, self.R + 1):
            b = np.asarray(self.g.get(r, np.zeros((2, 2))), dtype=complex)
            if b.shape != (2, 2):
                raise InvalidSpecError(f"block g[{r}] must be 2x2")
            g[r] = b
        extra = set(self.g) - set(g)
        if extra:
            raise InvalidSpecError(f"blocks outside the range R={self.R}: {sorted(extra)}")
        self.g = g
        bsites = set(self.boundary_sites)
        corners = {}
        for (i, j), blk in self.corners.items():
            if i not in bsites or j not in bsites:
                raise InvalidSpecError(f"corner ({i},{j}) is not on the boundary sites")
            corners[(int(i), int(j))] = np.asarray(blk, dtype=complex)
        self.corners = corners
        if self.structure == "bosonic":
            sc = max(1.0, max(float(np.max(np.abs(b))) for b in g.values()))
            for r in range(0, self.R + 1):
                res = np.max(np.abs(g[-r] - _S3 @ g[r].conj().T @ _S3))
                if res > 1e-10 * sc:
                    raise StructureViolationError(f"g[-{r}] != s3 g[{r}]^dag s3 (residual {res:.2e})")
            for r, b in g.items():
                res = np.max(np.abs(b.conj() + _S1 @ b @ _S1))
                if res > 1e-10 * sc:
                    raise StructureViolationError(f"g[{r}]^* != -s1 g[{r}] s1 (residual {res:.2e})")

    @property
    def boundary_sites(self) -> list:
        return sorted(set(range(1, self.R + 1)) | set(range(self.N - self.R + 1, self.N + 1)))

    def dense(self) -> np.ndarray:
        N, R = self.N, self.R
        G = np.zeros((2 * N, 2 * N), dtype=complex)
        for r in range(-R, R + 1):
            for j in range(max(0, -r), min(N, N - r)):
                G[2 * j : 2 * j + 2, 2 * (j + r) : 2 * (j + r) + 2] += self.g[r]
        for (i, j), blk in self.corners.items():
            G[2 * (i - 1) : 2 * i, 2 * (j - 1) : 2 * j] += blk
        return G

    def transformed(self, u) -> "BBTSpec":
        """Same chain after the local change of basis ``G -> U^dag G U``, ``U = 1 (x) u``."""
        u = np.asarray(u, dtype=complex)
        ui = np.linalg.inv(u)
        return BBTSpec(
            self.N,
            self.R,
            {r: ui @ b @ u for r, b in self.g.items()},
            {k: ui @ b @ u for k, b in self.corners.items()},
            structure="none",
        )

    @classmethod
    def from_dense(cls, G, R: int, structure: str = "bosonic", tol: float = 1e-12) -> "BBTSpec":
        """Read bulk blocks from a bulk row and put every deviation into corners."""
        G = np.asarray(G, dtype=complex)
        N = G.shape[0] // 2
        j0 = N // 2
        g = {r: G[2 * j0 : 2 * j0 + 2, 2 * (j0 + r) : 2 * (j0 + r) + 2].copy() for r in range(-R, R + 1)}
        probe = cls(N, R, g, structure="none")
        W = G - probe.dense()
        corners = {}
        for i in range(N):
            for j in range(N):
                blk = W[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
                if np.max(np.abs(blk)) > tol * max(1.0, np.max(np.abs(G))):
                    corners[(i + 1, j + 1)] = blk
        return cls(N, R, g, corners, structure=structure)


def _symbol_coeffs(spec: BBTSpec, omega: complex) -> np.ndarray:
    """``A[k]`` with ``G(z) - w = sum_k A[k] z^(k - R)``, k = 0..2R."""
    R = spec.R
    A = np.array([spec.g[k - R] for k in range(2 * R + 1)], dtype=complex)
    A[R] = A[R] - omega * np.eye(2)
    return A


def reduced_bulk_hamiltonian(spec: BBTSpec, z: complex) -> np.ndarray:
    """``G(z) = g_0 + sum_r (z^r g_r + z^-r g_-r)``."""
    if z == 0:
        raise InvalidSpecError("reduced bulk Hamiltonian needs z != 0")
    return sum(z**r * b for r, b in spec.g.items())


def _symbol_derivative(spec: BBTSpec, omega: complex, z: complex, k: int) -> np.ndarray:
    """``(1/k!) d^k/dz^k (G(z) - w)``."""
    out = np.zeros((2, 2), dtype=complex)
    for r, b in spec.g.items():
        c = math.comb(r, k) if r >= 0 else _gen_binom(r, k)
        if c:
            out += c * z ** (r - k) * b
    if k == 0:
        out -= omega * np.eye(2)
    return out


def _gen_binom(r: int, k: int) -> float:
    """Binomial coefficient ``r choose k`` for negative integer r."""
    num = 1.0
    for i in range(k):
        num *= r - i
    return num / math.factorial(k)


def characteristic_polynomial(spec: BBTSpec, omega: complex) -> np.ndarray:
    """Coefficients (highest power first) of ``P(w, z) = z^{2R} det(G(z) - w)``."""
    A = _symbol_coeffs(spec, omega)
    a = [A[:, i, j][::-1] for i in range(2) for j in range(2)]  # highest power first
    return np.convolve(a[0], a[3]) - np.convolve(a[1], a[2])


@dataclass
class RootSet:
    roots: list  # (z, multiplicity) for nonzero roots
    s0: int
    s_inf: int
    R: int

    @property
    def total(self) -> int:
        return sum(m for _, m in self.roots) + self.s0 + self.s_inf


def characteristic_roots(spec: BBTSpec, omega: complex, tol: Tolerances = DEFAULT_TOL) -> RootSet:
    """Nonzero roots with multiplicities plus the zero-root multiplicity ``s0``.

    ``s_inf = 4R - sum s_l - s0`` counts the roots lost at infinity.  It
    equals the number of right-edge emergent solutions.
    """
    c = characteristic_polynomial(spec, omega)
    cmax = np.max(np.abs(c))
    if cmax == 0:
        raise SingularFrequencyError(f"P(w, z) vanishes identically at w={omega:.6g}")
    small = np.abs(c) <= 1e-13 * cmax
    lead = int(np.argmin(small))  # number of vanishing leading coefficients
    trail = int(np.argmin(small[::-1]))
    core = c[lead : len(c) - trail]
    z = np.roots(core) if len(core) > 1 else np.array([], dtype=complex)
    s0 = trail + int(np.sum(np.abs(z) < tol.zero_root_tol))
    z = z[np.abs(z) >= tol.zero_root_tol]
    # merge near-coalescing roots (relative radius)
    roots: list = []
    used = np.zeros(len(z), bool)
    for i in np.argsort(-np.abs(z)):
        if used[i]:
            continue
        close = (~used) & (np.abs(z - z[i]) <= tol.root_cluster_tol * max(1.0, abs(z[i])))
        used |= close
        roots.append((complex(np.mean(z[close])), int(np.sum(close))))
    s_inf = 4 * spec.R - sum(m for _, m in roots) - s0
    return RootSet(roots, s0, s_inf, spec.R)


def emergent_matrices(spec: BBTSpec, omega: complex, size: int):
    """``K^-(w)`` (upper triangular) and ``K^+(w)`` (lower triangular), ``size`` blocks each.

    With ``C_k = g_{k-R} - w delta_{kR}`` the blocks are
    ``[K^-]_{i,m} = C_{m-i}`` and ``[K^+]_{i,m} = C_{2R-(i-m)}``.  The
    bosonic identity ``K^+(w) = tau3 [K^-(w^*)]^dag tau3`` holds by
    construction.
    """
    R = spec.R

    def C(k):
        if k < 0 or k > 2 * R:
            return np.zeros((2, 2), dtype=complex)
        b = spec.g[k - R].copy()
        if k == R:
            b = b - omega * np.eye(2)
        return b

    Km = np.zeros((2 * size, 2 * size), dtype=complex)
    Kp = np.zeros((2 * size, 2 * size), dtype=complex)
    for i in range(size):
        for m in range(size):
            Km[2 * i : 2 * i + 2, 2 * m : 2 * m + 2] = C(m - i)
            Kp[2 * i : 2 * i + 2, 2 * m : 2 * m + 2] = C(2 * R - (i - m))
    return Km, Kp


def _kernel(M: np.ndarray, k: int, tol: float) -> np.ndarray:
    if k == 0:
        return np.zeros((M.shape[1], 0), dtype=complex)
    _, s, Vh = np.linalg.svd(M)
    if s[len(s) - k] > tol * max(1.0, s[0]):
        raise SolutionCountError(
            f"kernel of dimension {k} expected but singular value {s[len(s) - k]:.2e} is not small"
        )
    return Vh[M.shape[1] - k :].conj().T


@dataclass
class BulkSolutionSet:
    omega: complex
    roots: RootSet
    columns: np.ndarray  # (2N, 4R), unit-norm columns
    labels: list  # ("bloch", z, nu) | ("left", i) | ("right", i)

    @property
    def s0(self) -> int:
        return self.roots.s0

    def count(self) -> int:
        return self.columns.shape[1]


def _bloch_columns(spec: BBTSpec, omega: complex, z: complex, s: int, tol: Tolerances):
    """``s`` generalized Bloch solutions for a root ``z`` of multiplicity ``s``."""
    # block upper triangular G_s(z): [mu, nu] = (1/(nu-mu)!) d^(nu-mu) (G(z) - w)
    D = [_symbol_derivative(spec, omega, z, k) for k in range(s)]
    Gs = np.zeros((2 * s, 2 * s), dtype=complex)
    for a in range(s):
        for b in range(a, s):
            Gs[2 * a : 2 * a + 2, 2 * b : 2 * b + 2] = D[b - a]
    _, sv, Vh = np.linalg.svd(Gs)
    U = Vh[2 * s - s :].conj().T  # s smallest singular vectors
    N = spec.N
    j = np.arange(1, N + 1, dtype=float)
    j0 = N if abs(z) > 1 else 1
    cols = []
    for q in range(s):
        psi = np.zeros((N, 2), dtype=complex)
        for nu in range(1, s + 1):
            # |z, nu>_j = binom(j, nu-1) z^(j-nu+1), rescaled by z^-j0
            wave = np.array([math.comb(int(jj), nu - 1) for jj in j], dtype=float) * z ** (j - j0 - nu + 1)
            psi += wave[:, None] * U[2 * (nu - 1) : 2 * nu, q][None, :]
        v = psi.ravel()
        cols.append(v / np.linalg.norm(v))
    return cols


def bulk_solution_basis(spec: BBTSpec, omega: complex, tol: Tolerances = DEFAULT_TOL) -> BulkSolutionSet:
    """All 4R solutions of the bulk equation at ``omega``."""
    rs = characteristic_roots(spec, omega, tol)
    cols, labels = [], []
    for z, m in rs.roots:
        for q, v in enumerate(_bloch_columns(spec, omega, z, m, tol)):
            cols.append(v)
            labels.append(("bloch", z, q + 1))
    N = spec.N
    if rs.s0:
        Km, _ = emergent_matrices(spec, omega, rs.s0)
        ker = _kernel(Km, rs.s0, 1e-8)
        for q in range(ker.shape[1]):
            v = np.zeros(2 * N, dtype=complex)
            v[: 2 * rs.s0] = ker[:, q]
            cols.append(v / np.linalg.norm(v))
            labels.append(("left", q))
    if rs.s_inf:
        _, Kp = emergent_matrices(spec, omega, rs.s_inf)
        ker = _kernel(Kp, rs.s_inf, 1e-8)
        for q in range(ker.shape[1]):
            v = np.zeros(2 * N, dtype=complex)
            v[2 * N - 2 * rs.s_inf :] = ker[:, q]
            cols.append(v / np.linalg.norm(v))
            labels.append(("right", q))
    if len(cols) != 4 * spec.R:
        raise SolutionCountError(f"found {len(cols)} bulk solutions, expected {4 * spec.R}")
    return BulkSolutionSet(omega, rs, np.column_stack(cols), labels)


def _boundary_rows(spec: BBTSpec) -> np.ndarray:
    return np.concatenate([[2 * (b - 1), 2 * (b - 1) + 1] for b in spec.boundary_sites])


def _bulk_rows(spec: BBTSpec) -> np.ndarray:
    bs = set(spec.boundary_sites)
    return np.concatenate(
        [[2 * (j - 1), 2 * (j - 1) + 1] for j in range(1, spec.N + 1) if j not in bs] or [np.array([], int)]
    ).astype(int)


def boundary_matrix(spec: BBTSpec, omega: complex, basis: BulkSolutionSet | None = None, dense=None):
    """``B_{bs}(w) = <b|(G - w)|psi_s>`` over the boundary rows."""
    if basis is None:
        basis = bulk_solution_basis(spec, omega)
    G = spec.dense() if dense is None else dense
    rows = _boundary_rows(spec)
    Psi = basis.columns
    return G[rows] @ Psi - omega * Psi[rows]


def _bulk_residual(spec, G, basis) -> float:
    rows = _bulk_rows(spec)
    if len(rows) == 0:
        return 0.0
    return float(np.max(np.abs(G[rows] @ basis.columns - basis.omega * basis.columns[rows])))


class _Evaluator:
    """``sigma(w)``: singular values of the boundary matrix on an orthonormal bulk basis."""

    def __init__(self, spec: BBTSpec, tol: Tolerances):
        self.spec = spec
        self.tol = tol
        self.G = spec.dense()
        self.rows = _boundary_rows(spec)
        self.Grows = self.G[self.rows]
        self.n_eval = 0

    def basis(self, omega):
        return bulk_solution_basis(self.spec, omega, self.tol)

    def svals(self, omega: complex):
        self.n_eval += 1
        try:
            Psi = self.basis(omega).columns
        except (SingularFrequencyError, SolutionCountError):
            return None, None, None
        Q, _ = np.linalg.qr(Psi)
        B = self.Grows @ Q - omega * Q[self.rows]
        _, s, Vh = np.linalg.svd(B)
        return s, Q, Vh

    def f(self, omega: complex) -> float:
        s, _, _ = self.svals(omega)
        return math.inf if s is None else float(s[-1])


@dataclass
class EigenSearchResult:
    eigenvalues: np.ndarray  # with multiplicity, sorted by (Re, Im)
    distinct: list  # (omega, multiplicity)
    vectors: np.ndarray  # (2N, count) eigenvectors from ker B(w)
    residuals: np.ndarray
    complete: bool
    evaluations: int
    diagnostics: list = field(default_factory=list)


def _golden(f, a: float, b: float, xtol: float = 1e-15) -> float:
    """Golden-section minimum of a unimodal f on [a, b], to absolute ``xtol`` (times |x|)."""
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol * max(1.0, abs(a)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _refine(ev: _Evaluator, w0: complex, h: float, found, ker_tol: float) -> complex:
    """Minimise ``sigma_min`` inside the box of half-width ``h`` around ``w0``.

    Eigenvalues already found inside the box are divided out so the
    minimiser is pushed towards a new zero.
    """
    near = [wi for wi, _ in found if abs(wi - w0) < 3 * h]

    def obj(w):
        if abs(w.real - w0.real) > h or abs(w.imag - w0.imag) > h:
            return math.inf
        val = ev.f(w)
        for wi in near:
            val /= max(abs(w - wi), 1e-300) / (3 * h)
        return val

    if w0.imag == 0.0:
        w = complex(_golden(lambda x: obj(complex(x, 0.0)), w0.real - h, w0.real + h), 0.0)
        if ev.f(w) <= ker_tol:
            return w
    step = 0.25 * h
    r = minimize(
        lambda p: obj(complex(p[0], p[1])),
        np.array([w0.real, w0.imag]),
        method="Nelder-Mead",
        options={
            "xatol": 1e-15 * max(1.0, abs(w0)),
            "fatol": 1e-3 * ker_tol,
            "maxiter": 1500,
            "initial_simplex": [[w0.real, w0.imag], [w0.real + step, w0.imag], [w0.real, w0.imag + step]],
        },
    )
    return complex(r.x[0], r.x[1])


def eigen_search(
    spec: BBTSpec,
    strategy: str = "grid+refine",
    domain=None,
    grid: int = 41,
    seeds=None,
    max_levels: int = 3,
    tol: Tolerances = DEFAULT_TOL,
) -> EigenSearchResult:
    """Eigenvalues as zeros of the boundary-matrix condition.

    ``grid+refine`` scans ``sigma_min`` of the boundary matrix, taken on an
    orthonormalised bulk-solution basis, over the rectangle
    ``domain = (re_min, re_max, im_min, im_max)``.  The default rectangle
    is the Gershgorin disc.  Each local minimum is refined inside its grid
    cell.  For bosonic specs only the first quadrant is scanned, and every
    hit is mirrored to ``-w^*``, ``w^*`` and ``-w``.  ``analytic-roots``
    instead refines the supplied ``seeds``, e.g. closed-form spectra.

    Multiplicities are kernel dimensions of ``B(w)``, so a defective
    eigenvalue is reported with its geometric multiplicity and the
    search stays incomplete.  Every returned eigenvector is checked
    against the dense matrix.
    """
    ev = _Evaluator(spec, tol)
    G = ev.G
    n = G.shape[0]
    scale = matrix_scale(G)
    ker_tol = tol.residual_tol * scale
    found: list = []
    vecs: list = []
    diags: list = []

    def accept(w, check_only=False):
        for wi, _ in found:
            if abs(w - wi) <= 1e-7 * scale:
                return False
        s, Q, Vh = ev.svals(w)
        if s is None or s[-1] > ker_tol:
            if not check_only:
                diags.append(f"candidate {w:.6g} rejected: sigma_min {np.inf if s is None else s[-1]:.2e}")
            return False
        m = int(np.sum(s <= ker_tol))
        V = Q @ Vh[len(s) - m :].conj().T
        found.append((w, m))
        for q in range(m):
            vecs.append(V[:, q] / np.linalg.norm(V[:, q]))
        return True

    def accept_orbit(w):
        if not accept(w):
            return
        if spec.structure == "bosonic":
            for p in (-w.conjugate(), w.conjugate(), -w):
                accept(p, check_only=True)

    def total():
        return sum(m for _, m in found)

    if strategy == "analytic-roots":
        if seeds is None:
            raise InvalidSpecError("analytic-roots strategy needs seeds")
        seeds = np.asarray(seeds, dtype=complex)
        # separation between distinct seeds; repeated seeds mark degeneracies
        D = np.abs(np.subtract.outer(seeds, seeds))
        D = D[D > 1e-9 * scale]
        gap = float(D.min()) if D.size else scale
        h = max(min(0.25 * gap, 1e-2 * scale), 1e-9 * scale)
        for w0 in seeds:
            accept(_refine(ev, complex(w0), h, found, ker_tol))
    elif strategy == "grid+refine":
        if domain is None:
            rho = float(np.max(np.sum(np.abs(G), axis=1)))
            domain = (-rho, rho, -rho, rho)
        xr0, xr1, yi0, yi1 = domain
        if spec.structure == "bosonic":
            xr0, yi0 = max(xr0, 0.0), max(yi0, 0.0)
        for level in range(max_levels):
            m = grid * 2**level + 1
            xs = np.linspace(xr0, xr1, m)
            ys = np.linspace(yi0, yi1, m)
            if yi0 < 0 < yi1:
                ys = np.sort(np.append(ys, 0.0))
            h = max(xs[1] - xs[0], ys[1] - ys[0] if len(ys) > 1 else 0.0)
            F = np.array([[ev.f(complex(x, y)) for x in xs] for y in ys])
            L = np.log(F + 1e-300)
            P = np.pad(L, 1, constant_values=np.inf)
            nb = [
                P[1 + da : 1 + da + L.shape[0], 1 + db : 1 + db + L.shape[1]]
                for da in (-1, 0, 1)
                for db in (-1, 0, 1)
                if da or db
            ]
            mins = np.argwhere(np.all([L <= x for x in nb], axis=0))
            order = np.argsort([L[a, b] for a, b in mins])
            for k in order:
                if total() >= n:
                    break
                a, b = mins[k]
                accept_orbit(_refine(ev, complex(xs[b], ys[a]), h, found, ker_tol))
            if total() >= n:
                break
            diags.append(f"level {level}: {total()} of {n} eigenvalues after {ev.n_eval} evaluations")
    else:
        raise InvalidSpecError(f"unknown strategy {strategy!r}")

    order = sorted(range(len(found)), key=lambda k: (found[k][0].real, found[k][0].imag))
    eigs, cols, res = [], [], []
    offsets = np.cumsum([0] + [m for _, m in found])
    for k in order:
        w, m = found[k]
        for q in range(m):
            v = vecs[offsets[k] + q]
            eigs.append(w)
            cols.append(v)
            res.append(float(np.linalg.norm(G @ v - w * v)))
    return EigenSearchResult(
        eigenvalues=np.array(eigs, dtype=complex),
        distinct=[found[k] for k in order],
        vectors=np.column_stack(cols) if cols else np.zeros((n, 0), dtype=complex),
        residuals=np.array(res),
        complete=len(eigs) == n,
        evaluations=ev.n_eval,
        diagnostics=diags,
    )


def _power_symbol(spec: BBTSpec, omega: complex, p: int) -> dict:
    A = {r: b.copy() for r, b in spec.g.items()}
    A[0] = A[0] - omega * np.eye(2)
    out = {0: np.eye(2, dtype=complex)}
    for _ in range(p):
        nxt: dict = {}
        for r1, b1 in out.items():
            for r2, b2 in A.items():
                nxt[r1 + r2] = nxt.get(r1 + r2, 0) + b1 @ b2
        out = nxt
    return out


@dataclass
class GeneralizedKernel:
    omega: complex
    p: int
    vectors: np.ndarray  # orthonormal columns spanning ker (G - w)^p
    singular_values: np.ndarray
    via_bulk: bool  # False when the boundary covers the whole chain

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def generalized_kernel(spec: BBTSpec, omega: complex, p: int, tol: Tolerances = DEFAULT_TOL) -> GeneralizedKernel:
    """``ker (G - w)^p`` through the block-Toeplitz structure of the power.

    ``(G - w)^p`` is again corner-modified with range ``pR`` provided
    ``p < (N - 1)/R``.  Its bulk blocks come from the power of the symbol.
    The remainder sits on the boundary sites.  The kernel is then the
    kernel of the boundary matrix at zero.
    """
    N, R = spec.N, spec.R
    if p < 1:
        raise InvalidSpecError("p must be >= 1")
    if p >= (N - 1) / R:
        raise PowerExceedsStructureError(
            f"(G - w)^{p} is not corner-modified for N={N}, R={R}; need p < {(N - 1) / R:g}"
        )
    M = np.linalg.matrix_power(spec.dense() - omega * np.eye(2 * N), p)
    Rp = p * R
    sc = max(1.0, float(np.max(np.abs(M))))
    if N <= 2 * Rp:
        # the boundary covers the whole chain and the bulk equation is empty
        _, s, Vh = np.linalg.svd(M)
        k = int(np.sum(s <= tol.residual_tol * sc))
        return GeneralizedKernel(omega, p, Vh[2 * N - k :].conj().T, s, False)
    sym = _power_symbol(spec, omega, p)
    bulk = BBTSpec(N, Rp, sym, structure="none")
    W = M - bulk.dense()
    corners = {}
    for i in range(N):
        for j in range(N):
            blk = W[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
            if np.max(np.abs(blk)) > 1e-12 * sc:
                corners[(i + 1, j + 1)] = blk
    pspec = BBTSpec(N, Rp, sym, corners, structure="none")
    basis = bulk_solution_basis(pspec, 0.0, tol)
    Q, _ = np.linalg.qr(basis.columns)
    B = boundary_matrix(pspec, 0.0, BulkSolutionSet(0.0, basis.roots, Q, basis.labels), dense=M)
    _, s, Vh = np.linalg.svd(B)
    k = int(np.sum(s <= tol.residual_tol * sc))
    V = Q @ Vh[len(s) - k :].conj().T
    V, _ = np.linalg.qr(V) if k else (V, None)
    return GeneralizedKernel(omega, p, V, s, True)
