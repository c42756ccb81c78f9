"""Analytic-versus-numeric comparisons behind ``kreinstab oracle-check``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .gbt import eigen_search
from .krein import dynamical_stability, kpr
from .models import (
    bkc,
    bkc_bbt,
    bkc_G,
    bkc_mu_oracle,
    bkc_open_oracle,
    bkc_periodic_oracle,
    bkc_tdelta_jordan_oracle,
    bkc_tdelta_twisted_oracle,
    bkc_twisted_pi2_oracle,
    cavity_qed_oracle,
    cavity_qed_xy,
    majorana_bosons,
    random_qbh,
    single_mode,
    single_mode_kpr,
    bkc_mu,
)
from .nambu import build_effective_sph, structural_residuals, tau3_gram

__all__ = ["OracleCheck", "SUITES", "run_suite"]


@dataclass
class OracleCheck:
    name: str
    ok: bool
    error: float
    tol: float

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}: max error {self.error:.3e} (tol {self.tol:.0e})"


def _multiset_gap(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    if len(a) != len(b):
        return np.inf
    C = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(C)
    return float(C[r, c].max())


def _check(name, err, tol):
    return OracleCheck(name, bool(err <= tol), float(err), tol)


def structure_checks():
    rng = np.random.default_rng(7)
    err = 0.0
    for _ in range(100):
        G = build_effective_sph(random_qbh(rng, int(rng.integers(1, 7)))).G
        err = max(err, *structural_residuals(G).values())
    yield _check("Nambu identities on random specs", err, 1e-12)


def single_mode_checks():
    err = 0.0
    for a, b in [(1, 2), (0.3, 0.7), (-1, -0.2), (2, -0.5)]:
        G = build_effective_sph(single_mode(a, b)).G
        w, V = np.linalg.eig(G)
        k = int(np.argmax(w.real + w.imag))
        if a * b > 0:
            err = max(err, abs(kpr(G, w[k], V[:, k]) - single_mode_kpr(a, b)))
        err = max(err, _multiset_gap(w, [2 * np.sqrt(complex(a * b)), -2 * np.sqrt(complex(a * b))]))
    yield _check("single-mode spectrum and KPR", err, 1e-10)


def cavity_checks():
    err = 0.0
    for x, y in [(0.5, 0.1), (1.0, 0.5), (-0.5, 0.05), (2.0, -0.3)]:
        w = np.linalg.eigvals(build_effective_sph(cavity_qed_xy(x, y)).G)
        err = max(err, _multiset_gap(w, cavity_qed_oracle(x, y).spectrum))
    yield _check("cavity-QED spectrum", err, 1e-10)


def bkc_checks():
    e_open = e_gram = e_tw = e_pbc = 0.0
    for N in range(3, 9):
        for D in (0.25, 0.5, 0.75):
            G = bkc_G(N, 1.0, D)
            e_open = max(e_open, _multiset_gap(np.linalg.eigvals(G), bkc_open_oracle(N, 1.0, D).spectrum))
            o = bkc_open_oracle(N, 1.0, D)
            Vp = o.vectors[:, 0::2]
            e_gram = max(e_gram, float(np.max(np.abs(tau3_gram(Vp) - np.eye(N)))))
            Gt = bkc_G(N, 1.0, D, 1.0, np.pi / 2)
            e_tw = max(e_tw, _multiset_gap(np.linalg.eigvals(Gt), bkc_twisted_pi2_oracle(N, 1.0, D).spectrum))
            for anti, phi in ((False, 0.0), (True, np.pi)):
                Gp = bkc_G(N, 1.0, D, 1.0, phi)
                e_pbc = max(e_pbc, _multiset_gap(np.linalg.eigvals(Gp), bkc_periodic_oracle(N, 1.0, D, anti).spectrum))
    yield _check("open-chain spectrum", e_open, 1e-10)
    yield _check("open-chain tau3 pairings", e_gram, 1e-8)
    yield _check("pi/2-twisted spectrum", e_tw, 1e-10)
    yield _check("periodic and antiperiodic spectra", e_pbc, 1e-10)

    e_j = 0.0
    for N in range(2, 9):
        for bc, s, phi in (("open", 0.0, 0.0), ("twisted_pi2", 1.0, np.pi / 2)):
            G = bkc_G(N, 1.0, 1.0, s, phi)
            for ch in bkc_tdelta_jordan_oracle(N, 1.0, bc):
                prev = np.zeros(2 * N)
                for k in range(ch.shape[1]):
                    e_j = max(e_j, float(np.linalg.norm(G @ ch[:, k] - prev)))
                    prev = ch[:, k]
    yield _check("t = Delta Jordan chains", e_j, 1e-10)

    e_k = 0.0
    for N in (3, 5, 7, 9):
        for phi in np.linspace(0.05, np.pi / 2 - 0.05, 12):
            o = bkc_tdelta_twisted_oracle(N, 1.0, phi)
            G = bkc_G(N, 1.0, 1.0, 1.0, phi)
            w0, v0 = o.vector_omegas[0], o.vectors[:, 0]
            e_k = max(e_k, abs(kpr(G, w0, v0) - o.meta["kpr"]))
    yield _check("t = Delta twisted KPR", e_k, 1e-8)

    e_mu = e_maj = 0.0
    for N in (3, 6, 10):
        for mu in (0.05, 0.1, 0.5):
            w = np.linalg.eigvals(build_effective_sph(bkc_mu(N, 1.0, 0.5, mu)).G)
            e_mu = max(e_mu, _multiset_gap(w, bkc_mu_oracle(N, 1.0, 0.5, mu).spectrum))
            m = majorana_bosons(N, 1.0, mu)
            e_maj = max(e_maj, abs(abs(m["coef_L"]) - m["magnitude"]), abs(abs(m["coef_R"]) - m["magnitude"]),
                        m["residual_L"], m["residual_R"])
    yield _check("mu-extended spectrum", e_mu, 1e-10)
    yield _check("Majorana-boson residual magnitudes", e_maj, 1e-10)

    bad = 0
    for N in (3, 4, 5):
        for D in (0.25, 0.5):
            bad += not dynamical_stability(bkc_G(N, 1.0, D)).stable
    yield _check("open chain with t > Delta is stable", float(bad), 0.0)


def gbt_checks():
    err = 0.0
    for N in (4, 7):
        for s, phi in ((0.0, 0.0), (1.0, 0.3), (0.5, 1.2)):
            r = eigen_search(bkc_bbt(N, 1.0, 0.5, s, phi))
            dense = np.linalg.eigvals(bkc_G(N, 1.0, 0.5, s, phi))
            err = max(err, _multiset_gap(dense, r.eigenvalues) if r.complete else np.inf)
    yield _check("generalized Bloch solver versus dense spectra", err, 1e-8)


SUITES = {
    "structure": structure_checks,
    "single_mode": single_mode_checks,
    "cavity_qed": cavity_checks,
    "bkc": bkc_checks,
    "gbt": gbt_checks,
}


def run_suite(name: str = "all") -> list:
    names = list(SUITES) if name == "all" else [name]
    out = []
    for n in names:
        out.extend(SUITES[n]())
    return out
