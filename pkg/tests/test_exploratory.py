"""Hypotheses about zero modes and the nature of phase boundaries.

These are conjectures, not invariants.  Each test prints what it found
and is marked xfail (with the evidence) when the hypothesis does not hold,
so a counterexample is visible without breaking the suite.
"""

import numpy as np
import pytest

from kreinstab.krein import classify_transition
from kreinstab.models import bkc_G, bkc_phase_boundary_oracle, cavity_boundary, family_G

pytestmark = pytest.mark.exploratory

T, D = 1.0, 0.25


def _max_im(N, s, phi):
    return float(np.max(np.abs(np.linalg.eigvals(bkc_G(N, T, D, s, phi)).imag)))


def _numeric_boundary(N, s, lo, hi, iters=45):
    """Bisect the stable/unstable switch of the BKC in phi between lo and hi."""
    unstable_lo = _max_im(N, s, lo) > 1e-9
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if (_max_im(N, s, mid) > 1e-9) == unstable_lo:
            lo = mid
        else:
            hi = mid
    # return the stable end so the matrix sits on the closed stable region
    return hi if unstable_lo else lo


def _boundaries(N, s):
    pm = float(bkc_phase_boundary_oracle(N, T, D).phi_minus(s))
    return {
        "left": _numeric_boundary(N, s, pm - 0.05, pm + 0.05),
        "right": _numeric_boundary(N, s, np.pi - pm - 0.05, np.pi - pm + 0.1),
    }


def _verdict(ok, lines):
    print("\n".join(lines))
    if not ok:
        pytest.xfail("; ".join(lines))


CASES = [(N, s) for N in (5, 6, 7, 8) for s in (0.7, 1.0)]


def test_zero_modes_mark_phase_boundaries():
    """Every numerically located BKC boundary should carry a zero eigenvalue."""
    lines, ok = [], True
    for N, s in CASES:
        for side, phi in _boundaries(N, s).items():
            m = float(np.min(np.abs(np.linalg.eigvals(bkc_G(N, T, D, s, phi)))))
            has_zero = m <= 1e-6
            ok &= has_zero
            kind = bkc_phase_boundary_oracle(N, T, D).kind(side)
            lines.append(f"N={N} s={s} {side} phi={phi:.10f}: min|w|={m:.1e} ({kind})")
    _verdict(ok, lines)


def test_boundary_points_are_exceptional_points():
    """One-parameter boundaries should be EPs; the open chain (s = 0) is a Krein collision."""
    lines, ok = [], True
    for N, s in CASES:
        for side, phi in _boundaries(N, s).items():
            ct = classify_transition(bkc_G(N, T, D, s, phi))
            good = ct.kind in ("EP", "Both")
            ok &= good
            lines.append(f"N={N} s={s} {side}: {ct.kind}")
    for N in (5, 6):
        ct = classify_transition(bkc_G(N, T, D))
        ok &= ct.kind == "KreinCollision"
        lines.append(f"N={N} open chain: {ct.kind}")
    _verdict(ok, lines)


def test_low_dimensional_models_follow_the_same_split():
    lines, ok = [], True
    checks = [
        ("single mode alpha = 1, beta = 0", family_G("single_mode", {"alpha": 1.0, "beta": 0.0}), "EP"),
        ("single mode origin", family_G("single_mode", {"alpha": 0.0, "beta": 0.0}), "KreinCollision"),
        ("cavity x = 1 on y_+", family_G("cavity_qed", {"x": 1.0, "y": float(cavity_boundary(1.0))}), "EP"),
        ("cavity origin", family_G("cavity_qed", {"x": 0.0, "y": 0.0}), "KreinCollision"),
    ]
    for name, G, want in checks:
        kind = classify_transition(G).kind
        ok &= kind == want
        lines.append(f"{name}: {kind} (expected {want})")
    _verdict(ok, lines)


def test_even_n_right_boundary_mirrors_left():
    """Is the even-N diagram symmetric about phi = pi/2 away from s = 1?"""
    lines, ok = [], True
    for N in (6, 8, 10):
        for s in (0.5, 0.7, 1.0):
            b = _boundaries(N, s)
            dev = b["right"] - (np.pi - b["left"])
            ok &= abs(dev) < 1e-6
            lines.append(f"N={N} s={s}: right - (pi - left) = {dev:.2e}")
    _verdict(ok, lines)
