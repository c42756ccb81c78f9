"""Acceptance criteria, one test each.

Every test prints a PASS/FAIL line (collected again in the terminal
summary by conftest.py).  Tolerances are the published ones; nothing is
relaxed to turn a red result green.

KS_FULL_GRID=1 switches criterion 5 to the 0.002 grid (tens of minutes
per N on one core).
"""

from __future__ import annotations

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from conftest import record
from kreinstab.dynamics import jordan_mode_evolution, propagator, decoupled_collision_check, symplectic_residual
from kreinstab.gbt import bulk_solution_basis, eigen_search
from kreinstab.krein import kpr, tau3_normalize_modes
from kreinstab.models import (
    bkc,
    bkc_bbt,
    bkc_G,
    bkc_mu,
    bkc_mu_oracle,
    bkc_open_oracle,
    bkc_phase_boundary_oracle,
    bkc_tdelta_jordan_oracle,
    bkc_tdelta_twisted_oracle,
    bkc_twisted_pi2_oracle,
    cavity_boundary,
    cavity_qed_xy,
    kpr_tdelta_limit,
    kpr_tdelta_twisted,
    majorana_bosons,
    random_decoupled,
    random_qbh,
    single_mode,
    single_mode_kpr,
    spectral_speed,
)
from kreinstab.nambu import build_effective_sph, structural_residuals, tau3_gram
from kreinstab.scan import Axis, contour_eval, stability_scan
from kreinstab.spectral import detect_jordan_structure, eigendecompose
from kreinstab.tolerances import matrix_scale


def _gap(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    if len(a) != len(b):
        return math.inf
    C = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(C)
    return float(C[r, c].max())


def _neighbourhood_changes(mask: np.ndarray) -> np.ndarray:
    """Cells within one grid step (8-neighbourhood) of a verdict change."""
    out = np.zeros_like(mask, dtype=bool)
    pad = np.pad(mask, 1, mode="edge")
    for da in (-1, 0, 1):
        for db in (-1, 0, 1):
            out |= pad[1 + da : 1 + da + mask.shape[0], 1 + db : 1 + db + mask.shape[1]] != mask
    return out


# ---------------------------------------------------------------- 1


def test_c01_structural_invariants():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    quartet_failures = 0
    for _ in range(1000):
        N = int(rng.integers(1, 7))
        G = build_effective_sph(random_qbh(rng, N)).G
        r = structural_residuals(G)
        worst = max(worst, max(r.values()) / matrix_scale(G))
        try:
            eigendecompose(G)
        except Exception:
            quartet_failures += 1
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and quartet_failures == 0 and dt < 10
    record(1, "structural invariants", ok,
           f"max residual/scale {worst:.2e}, quartet failures {quartet_failures}, {dt:.1f} s")
    assert worst <= 1e-12
    assert quartet_failures == 0
    assert dt < 10


# ---------------------------------------------------------------- 2


def test_c02_open_chain_oracle():
    e_spec = e_pair = e_closed = 0.0
    for N in range(3, 13):
        for D in (0.25, 0.5, 0.75):
            w = np.linalg.eigvals(bkc_G(N, 1.0, D))
            expect = np.sqrt(1 - D * D) * np.cos(np.arange(1, N + 1) * np.pi / (N + 1))
            e_spec = max(e_spec, _gap(w, np.concatenate([expect, expect])))
            # tau3 pairings of the package's normalised modes, positive family
            basis = tau3_normalize_modes(bkc_G(N, 1.0, D))
            Vp = np.column_stack([c.vectors[:, 0] for c in basis.chains if c.epsilon > 0])
            e_pair = max(e_pair, float(np.max(np.abs(tau3_gram(Vp) - np.eye(N)))))
            # closed-form vectors: entries grow like e^{N r}, so their Gram matrix
            # carries a cancellation error of order eps * max|psi|^2
            Vo = bkc_open_oracle(N, 1.0, D).vectors[:, 0::2]
            kappa = float(np.max(np.sum(np.abs(Vo) ** 2, axis=0)))
            e_closed = max(e_closed, float(np.max(np.abs(tau3_gram(Vo) - np.eye(N)))) / kappa)
    ok = e_spec <= 1e-10 and e_pair <= 1e-8 and e_closed <= 1e-8
    record(2, "open-chain oracle", ok,
           f"spectrum error {e_spec:.2e}, pairing error {e_pair:.2e}, closed-form pairing error/norm^2 {e_closed:.1e}")
    assert e_spec <= 1e-10
    assert e_pair <= 1e-8
    assert e_closed <= 1e-8


# ---------------------------------------------------------------- 3


def test_c03_twisted_pi2_oracle():
    err = 0.0
    for N in range(3, 13):
        for D in (0.25, 0.5, 0.75):
            w = np.linalg.eigvals(bkc_G(N, 1.0, D, 1.0, np.pi / 2))
            m = np.arange(N)
            expect = np.sqrt(1 - D * D) * np.sin((m + 0.5) * np.pi / N)
            err = max(err, _gap(w, np.concatenate([expect, -expect])))
            err = max(err, _gap(w, bkc_twisted_pi2_oracle(N, 1.0, D).spectrum))
    record(3, "pi/2-twisted oracle", err <= 1e-10, f"spectrum error {err:.2e}")
    assert err <= 1e-10


# ---------------------------------------------------------------- 4


def test_c04_jordan_structure_t_equals_delta():
    bad = []
    res = 0.0
    for N in range(2, 9):
        cases = [("open", 0.0, 0.0, (N, N))]
        if N % 2:
            cases.append(("twisted_pi2", 1.0, np.pi / 2, (N + 1, N - 1)))
        for bc, s, phi, want in cases:
            G = bkc_G(N, 1.0, 1.0, s, phi)
            rep = eigendecompose(G)
            if len(rep.clusters) != 1 or abs(rep.clusters[0].omega) > 1e-8:
                bad.append((N, bc, "spectrum"))
                continue
            js = detect_jordan_structure(G, 0.0, report=rep)
            if tuple(sorted(js.partition, reverse=True)) != want:
                bad.append((N, bc, js.partition))
            res = max(res, *js.residuals(G))
            for ch in bkc_tdelta_jordan_oracle(N, 1.0, bc):
                prev = np.zeros(2 * N)
                for k in range(ch.shape[1]):
                    res = max(res, float(np.linalg.norm(G @ ch[:, k] - prev)))
                    prev = ch[:, k]
    ok = not bad and res <= 1e-10
    record(4, "Jordan structure at t = Delta", ok, f"partition mismatches {bad}, chain residual {res:.2e}")
    assert not bad
    assert res <= 1e-10


# ---------------------------------------------------------------- 5


@pytest.mark.parametrize("N", [5, 10, 15, 20])
def test_c05_phase_boundary(N):
    full = os.environ.get("KS_FULL_GRID") == "1"
    step = 0.002 if full else 0.01
    t0 = time.perf_counter()
    g = stability_scan("bkc", {"N": N, "t": 1.0, "Delta": 0.25},
                       [Axis("s", 0.0, 1.0, step), Axis("phi", 0.0, np.pi, step)])
    sv, pv = g.axes[0].values(), g.axes[1].values()
    S, P = np.meshgrid(sv, pv, indexing="ij")
    pb = bkc_phase_boundary_oracle(N, 1.0, 0.25)
    oracle = pb.stable(S, P)
    numeric = g.stable_mask()
    far = (oracle != numeric) & ~_neighbourhood_changes(oracle)

    # delta s_N: largest s before the first unstable cell along phi = 0
    col = numeric[:, 0]
    first_unstable = int(np.argmax(~col)) if not col.all() else len(sv)
    ds_num = float(sv[first_unstable - 1]) if first_unstable > 0 else 0.0
    if N % 2 == 0:
        ds_ok = abs(ds_num - pb.delta_s) <= 2 * step
    else:
        # stable region touches s = 0: the whole phi range is stable there
        ds_ok = bool(numeric[0].all()) and ds_num == 0.0
    dt = time.perf_counter() - t0
    ok = not far.any() and ds_ok
    record(5, f"phase boundary N={N}", ok,
           f"grid {step}, cells off by more than one step {int(far.sum())}, "
           f"delta_s numeric {ds_num:.4g} vs oracle {pb.delta_s:.4g}, {dt:.0f} s")
    assert not far.any()
    assert ds_ok


# ---------------------------------------------------------------- 6


def test_c06a_single_mode_kpr():
    err = 0.0
    for a in np.linspace(-2, 2, 21):
        for b in np.linspace(-2, 2, 21):
            if abs(a) < 1e-9 or abs(b) < 1e-9:
                continue  # off the axes, all four quadrants
            G = build_effective_sph(single_mode(a, b)).G
            w, V = np.linalg.eig(G)
            for k in range(2):
                err = max(err, abs(kpr(G, w[k], V[:, k]) - single_mode_kpr(a, b)))
    record("6a", "single-mode KPR closed form", err <= 1e-10, f"max error {err:.2e}")
    assert err <= 1e-10


def test_c06b_twisted_kpr_closed_form():
    err = 0.0
    for N in (3, 5, 7, 9):
        # 100 interior points; the formula needs 0 < phi < pi and G is nilpotent at pi/2
        for phi in np.linspace(0.0, np.pi, 102)[1:-1]:
            G = bkc_G(N, 1.0, 1.0, 1.0, phi)
            w, V = np.linalg.eig(G)
            want = float(kpr_tdelta_twisted(N, phi))
            for k in range(len(w)):
                err = max(err, abs(kpr(G, w[k], V[:, k]) - want))
            o = bkc_tdelta_twisted_oracle(N, 1.0, phi)
            err = max(err, abs(kpr(G, o.vector_omegas[0], o.vectors[:, 0]) - want))
    record("6b", "t = Delta twisted KPR closed form", err <= 1e-8, f"max error {err:.2e}")
    assert err <= 1e-8


def test_c06c_large_n_limit_curve():
    """Finite-N KPR at N = 101 against the large-N curve, at 1e-3.

    The curve used is 2|c| ln|c| / (|c|^2 - 1), the actual limit of the
    finite-N formula; the variant without the factor 2 is off by about
    0.5.  Even the correct limit is approached only at rate 1/N, with a
    worst-case gap of about 0.0108 at N = 101, so this check stays red.
    """
    N = 101
    phis = np.linspace(0.0, np.pi / 2, 200)[1:-1]
    num = []
    for phi in phis:
        o = bkc_tdelta_twisted_oracle(N, 1.0, phi)
        G = bkc_G(N, 1.0, 1.0, 1.0, phi)
        num.append(kpr(G, o.vector_omegas[0], o.vectors[:, 0]))
    num = np.array(num)
    err = float(np.max(np.abs(num - kpr_tdelta_limit(phis))))
    err_printed = float(np.max(np.abs(num - kpr_tdelta_limit(phis, printed=True))))
    # the finite-N closed form itself is exact; the gap is purely finite-size
    exact = float(np.max(np.abs(num - kpr_tdelta_twisted(N, phis))))
    record("6c", "large-N KPR limit at N=101", err <= 1e-3,
           f"max gap to limit {err:.4f} (without factor 2: {err_printed:.3f}), finite-N formula error {exact:.1e}")
    assert exact <= 1e-8
    assert err <= 1e-3


# ---------------------------------------------------------------- 7


def _approach(family, params, contour, crossing, side, eps):
    """Tracked KPR at ``crossing + side * eps`` with ``eps`` shrinking toward 0."""
    sig = crossing + side * np.asarray(eps)
    vals, diags = contour_eval(family, params, contour, sig, "kpr")
    return vals, diags


_CROSSING_TOL = 1e-2


def _descends_into(vals, band):
    vals = np.asarray(vals)
    if np.any(vals < 0) or not np.any(vals <= band):
        return False
    k = int(np.argmax(vals <= band))
    return bool(np.all(np.diff(vals[: k + 1]) < 0) and np.all(vals[k:] <= band))


def _crossing_check(family, params, contour, crossing, eps_direct, eps_fit, extrapolate_to=None):
    # stable side: sigma > crossing for all three contours used below
    far_vals, d1 = _approach(family, params, contour, crossing, +1, eps_fit)
    near_vals, d2 = _approach(family, params, contour, crossing, +1, eps_direct)
    unst_vals, d3 = _approach(family, params, contour, crossing, -1, eps_direct)
    slope, logc = np.polyfit(np.log(eps_fit), np.log(far_vals), 1)
    fit_rms = float(np.sqrt(np.mean((np.polyval([slope, logc], np.log(eps_fit)) - np.log(far_vals)) ** 2)))
    if extrapolate_to is None:
        crossing_value = float(near_vals[-1])
    else:
        crossing_value = float(np.exp(np.polyval([slope, logc], np.log(extrapolate_to))))
    monotone = bool(np.all(np.diff(far_vals) < 0))
    # KPR >= 0 with limit 0 at the crossing, so the crossing is a local
    # minimum when both sides come down onto it: the stable side falls
    # strictly to the crossing value, the unstable side (partner taken at
    # the conjugate eigenvalue) falls strictly until it enters the
    # 1e-2 band and then stays inside it.
    local_min = bool(np.all(far_vals >= crossing_value) and _descends_into(unst_vals, _CROSSING_TOL))
    return {
        "extrapolated": extrapolate_to is not None,
        "crossing_value": crossing_value,
        "slope": float(slope),
        "fit_rms": fit_rms,
        "monotone": monotone,
        "local_min": local_min,
        "diags": d1 + d2 + d3,
    }


def test_c07_kpr_vanishes_at_boundaries():
    """Tracked KPR along the three contours, approached from both sides.

    Exactly at each crossing the spectrum is degenerate and the KPR is
    contour-dependent, so the crossing value is the tracked KPR at the
    closest resolvable point.  Single mode and cavity QED resolve down
    to 1e-6 from the crossing.  On the BKC parabola the collided pairs
    split like eps^2.5 and stop being resolvable in double precision
    below eps ~ 5e-5, so there the crossing value is taken from the
    power-law fit over eps in [1e-4, 1e-1], evaluated at eps = 1e-6.
    """
    eps_fit = np.geomspace(1e-1, 1e-4, 13)
    eps_direct = np.geomspace(1e-1, 1e-6, 26)
    results = {}
    results["single mode beta = alpha^2"] = _crossing_check(
        "single_mode", {}, lambda a: {"alpha": a, "beta": a * a}, 0.0, eps_direct, eps_fit)
    results["cavity QED y = 5x^2 - x/2"] = _crossing_check(
        "cavity_qed", {}, lambda x: {"x": x, "y": 5 * x * x - x / 2}, 0.0, eps_direct, eps_fit)
    for N in (5, 7, 9):
        pm = float(bkc_phase_boundary_oracle(N, 1.0, 0.25).phi_minus(1.0))
        r = _crossing_check("bkc", {"N": N, "t": 1.0, "Delta": 0.25},
                         lambda p, pm=pm: {"phi": p, "s": (p - pm) ** 2}, pm, eps_fit, eps_fit,
                         extrapolate_to=1e-6)
        results[f"BKC N={N} parabola s = (phi - phi-)^2"] = r
    ok = True
    lines = []
    for name, r in results.items():
        good = (r["crossing_value"] <= _CROSSING_TOL and r["local_min"] and r["monotone"]
                and r["slope"] > 0.25 and (not r["extrapolated"] or r["fit_rms"] < 0.05) and not r["diags"])
        ok &= good
        lines.append(f"{name}: {r['crossing_value']:.1e} (slope {r['slope']:.2f})")
    record(7, "KPR vanishes at boundary crossings", ok, "; ".join(lines))
    for name, r in results.items():
        assert not r["diags"], (name, r["diags"])
        assert r["monotone"], name
        assert r["local_min"], name
        assert r["slope"] > 0.25, (name, r)
        if r["extrapolated"]:
            assert r["fit_rms"] < 0.05, (name, r)
        assert r["crossing_value"] <= _CROSSING_TOL, (name, r)


# ---------------------------------------------------------------- 8


def test_c08_cavity_boundaries():
    step = 0.005
    g = stability_scan("cavity_qed", {}, [Axis("x", -0.9 + step, 2.0, step), Axis("y", -1.3, 1.3, step)])
    xv, yv = g.axes[0].values(), g.axes[1].values()
    X, Y = np.meshgrid(xv, yv, indexing="ij")
    yb = np.abs(cavity_boundary(X))
    oracle = np.abs(Y) <= yb
    numeric = g.stable_mask()
    far = (oracle != numeric) & ~_neighbourhood_changes(oracle)

    # onset per column, both signs
    worst = 0.0
    for i, x in enumerate(xv):
        yp = float(cavity_boundary(x))
        for sign in (+1, -1):
            sel = sign * yv >= 0
            ys = np.abs(yv[sel])
            order = np.argsort(ys)
            unst = ~numeric[i, sel][order]
            if unst.any():
                onset = ys[order][int(np.argmax(unst))]
                worst = max(worst, abs(onset - abs(yp)) - step)
    ok = not far.any() and worst <= 1e-12
    record(8, "cavity-QED boundaries", ok,
           f"grid {step}, cells off by more than one step {int(far.sum())}, "
           f"worst onset excess over one cell {max(worst, 0):.1e}")
    assert not far.any()
    assert worst <= 1e-12


# ---------------------------------------------------------------- 9


_GBT_SAMPLES = [(0.0, 0.0), (1.0, 0.0), (1.0, np.pi / 2), (0.5, 0.3), (1.0, 1.2), (0.3, 2.5)]


def test_c09_gbt_equivalence():
    worst = 0.0
    mult_bad = []
    count_bad = []
    incomplete = []
    probes = (0.37 + 0.11j, -0.53 + 0.07j, 0.21 - 0.3j)
    for N in range(4, 13):
        for s, phi in _GBT_SAMPLES:
            spec = bkc_bbt(N, 1.0, 0.25, s, phi)
            r = eigen_search(spec)
            if not r.complete:
                incomplete.append((N, s, phi))
                continue
            dense = np.linalg.eigvals(spec.dense())
            worst = max(worst, _gap(dense, r.eigenvalues))
            dense_rep = eigendecompose(spec.dense(), check_quartets=False)
            dm = sorted(c.algebraic_mult for c in dense_rep.clusters)
            gm = sorted(m for _, m in r.distinct)
            if dm != gm:
                mult_bad.append((N, s, phi, dm, gm))
            for w in probes:
                c = bulk_solution_basis(spec, w).count()
                if c != 4 * spec.R:
                    count_bad.append((N, s, phi, w, c))
    ok = worst <= 1e-8 and not mult_bad and not count_bad and not incomplete
    record(9, "generalized Bloch solver equivalence", ok,
           f"max eigenvalue gap {worst:.1e}, multiplicity mismatches {len(mult_bad)}, "
           f"solution-count failures {len(count_bad)}, incomplete {len(incomplete)}")
    assert not incomplete
    assert worst <= 1e-8
    assert not mult_bad
    assert not count_bad


# ---------------------------------------------------------------- 10


def test_c10_mu_extension():
    e_spec = e_maj = 0.0
    for N in range(2, 11):
        for mu in (0.05, 0.1, 0.5):
            G = build_effective_sph(bkc_mu(N, 1.0, 0.5, mu)).G
            om = math.sqrt(0.75) * np.cos(np.arange(1, N + 1) * np.pi / (N + 1))
            e_spec = max(e_spec, _gap(np.linalg.eigvals(G), np.concatenate([om + 1j * mu, om - 1j * mu])))
            e_spec = max(e_spec, _gap(np.linalg.eigvals(G), bkc_mu_oracle(N, 1.0, 0.5, mu).spectrum))
            m = majorana_bosons(N, 1.0, mu)
            e_maj = max(e_maj, abs(abs(m["coef_L"]) - m["magnitude"]), abs(abs(m["coef_R"]) - m["magnitude"]),
                        m["residual_L"], m["residual_R"], abs(m["magnitude"] - abs(mu) ** N))
    ok = e_spec <= 1e-10 and e_maj <= 1e-10
    record(10, "mu-extension", ok, f"spectrum error {e_spec:.2e}, Majorana magnitude error {e_maj:.2e}")
    assert e_spec <= 1e-10
    assert e_maj <= 1e-10


# ---------------------------------------------------------------- 11


def test_c11_decoupled_stable_implies_krein_collision():
    rng = np.random.default_rng(11)
    counts = {"pass": 0, "fail": 0, "vacuous": 0, "not-applicable": 0}
    failures = []
    for i in range(500):
        N = int(rng.integers(1, 7))
        spec = random_decoupled(rng, N, stable_bias=bool(i % 5))
        r = decoupled_collision_check(spec)
        counts[r.verdict] += 1
        if r.verdict == "fail":
            failures.append(("random", i))
    for N in range(2, 13):
        for D in (0.0, 0.25, 0.5, 0.75, 1.0):
            for s in (0.0, 0.5, 1.0):
                r = decoupled_collision_check(bkc(N, 1.0, D, s, 0.0))
                counts[r.verdict] += 1
                if r.verdict in ("fail", "not-applicable"):
                    failures.append(("bkc", N, D, s, r.verdict))
    ok = not failures and counts["pass"] > 0
    record(11, "decoupled and stable implies a Krein collision", ok, f"verdicts {counts}, counterexamples {failures}")
    assert not failures
    assert counts["pass"] > 0


# ---------------------------------------------------------------- 12


def _zoo():
    rng = np.random.default_rng(12)
    yield build_effective_sph(single_mode(1.0, 2.0)).G
    yield build_effective_sph(single_mode(1.0, -0.5)).G
    yield build_effective_sph(single_mode(0.0, 1.0)).G
    yield build_effective_sph(cavity_qed_xy(0.5, 0.1)).G
    yield build_effective_sph(cavity_qed_xy(0.5, 0.4)).G
    for N in (3, 6):
        for D in (0.25, 1.0):
            for s, phi in ((0.0, 0.0), (1.0, np.pi / 2), (0.5, 0.7)):
                yield bkc_G(N, 1.0, D, s, phi)
        yield build_effective_sph(bkc_mu(N, 1.0, 0.5, 0.1)).G
    for _ in range(10):
        yield build_effective_sph(random_qbh(rng, int(rng.integers(1, 5)), pairing=0.3)).G


def test_c12_dynamics():
    e_sym = 0.0
    for G in _zoo():
        for t in np.linspace(-5, 5, 11):
            S = propagator(G, t)
            growth = max(1.0, np.linalg.norm(S, 2) ** 2)
            e_sym = max(e_sym, symplectic_residual(S) / growth)
    e_jor = 0.0
    for N in range(2, 7):
        cases = [("open", 0.0, 0.0), ("twisted_pi2", 1.0, np.pi / 2)]
        for bc, s, phi in cases:
            G = bkc_G(N, 1.0, 1.0, s, phi)
            for ch in bkc_tdelta_jordan_oracle(N, 1.0, bc):
                for t in (0.5, 2.0, 5.0):
                    closed = jordan_mode_evolution(ch, 0.0, t, G=G)
                    exact = propagator(G, t) @ ch
                    e_jor = max(e_jor, float(np.max(np.abs(closed - exact)) / max(1.0, np.max(np.abs(exact)))))
    ok = e_sym <= 1e-8 and e_jor <= 1e-8
    record(12, "dynamics", ok, f"symplectic residual/growth {e_sym:.1e}, Jordan evolution error {e_jor:.1e}")
    assert e_sym <= 1e-8
    assert e_jor <= 1e-8


# ---------------------------------------------------------------- 13


def test_c13_spectral_speed():
    """Finite differences of |omega| at t = Delta, s = 1.

    (1/N)|cos phi|^(1/N - 1) is the derivative of |omega| = |cos phi|^(1/N)
    with respect to |cos phi|; with respect to phi it carries an extra
    |sin phi|.  Both statements are checked at 1%.
    """
    worst_phi = worst_cos = 0.0
    h = 1e-5
    for N in (10, 50, 100):
        for phi in np.linspace(0.3, 1.2, 10):
            def mod(p):
                return float(np.max(np.abs(np.linalg.eigvals(bkc_G(N, 1.0, 1.0, 1.0, p)))))
            d_phi = (mod(phi + h) - mod(phi - h)) / (2 * h)
            dc = math.cos(phi + h) - math.cos(phi - h)
            d_cos = (mod(phi + h) - mod(phi - h)) / abs(dc)
            worst_phi = max(worst_phi, abs(abs(d_phi) / float(spectral_speed(N, phi)) - 1))
            worst_cos = max(worst_cos, abs(abs(d_cos) / float(spectral_speed(N, phi, printed=True)) - 1))
    ok = worst_phi <= 0.01 and worst_cos <= 0.01
    record(13, "spectral speed", ok,
           f"d|w|/dphi vs (1/N)|c|^(1/N-1)|sin phi|: {worst_phi:.1e}; "
           f"d|w|/d|cos phi| vs (1/N)|c|^(1/N-1): {worst_cos:.1e}")
    assert worst_phi <= 0.01
    assert worst_cos <= 0.01


# ---------------------------------------------------------------- 14


def _cli_scan(tmp_path, name, threads):
    out = tmp_path / f"{name}.csv"
    env = dict(os.environ, KS_THREADS=str(threads))
    cmd = [sys.executable, "-m", "kreinstab", "scan", "--model", "bkc", "--N", "5", "--Delta", "0.25",
           "--axis", "s", "0", "1", "0.05", "--axis", "phi", "0", "3.14159", "0.05",
           "--refine", "--kpr", "--out", str(out)]
    subprocess.run(cmd, check=True, env=env, capture_output=True)
    return out.read_bytes()


def test_c14_determinism(tmp_path):
    a = _cli_scan(tmp_path, "a", 1)
    b = _cli_scan(tmp_path, "b", 1)
    c = _cli_scan(tmp_path, "c", 3)
    ok = a == b == c and len(a) > 0
    record(14, "scan determinism", ok, f"{len(a)} bytes; identical across runs {a == b}, across worker counts {a == c}")
    assert a == b
    assert a == c
