import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from kreinstab.dynamics import (
    classify_growth,
    decoupled_collision_check,
    evolve_mode,
    jordan_mode_evolution,
    modal_propagator,
    phase_transport_sim,
    propagator,
    quadrature_decoupling_check,
    quadrature_generator,
    spectral_growth,
    symplectic_residual,
)
from kreinstab.errors import InvalidSpecError, StructureViolationError
from kreinstab.models import bkc, bkc_G, bkc_tdelta_jordan_oracle, random_qbh, single_mode
from kreinstab.nambu import build_effective_sph


def gap(a, b):
    C = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(C)
    return C[r, c].max()


def test_propagator_is_symplectic(rng):
    for _ in range(10):
        G = build_effective_sph(random_qbh(rng, 3)).G
        for t in (0.3, 2.0):
            assert symplectic_residual(propagator(G, t)) < 1e-9 * np.linalg.norm(propagator(G, t)) ** 2


def test_modal_and_expm_agree():
    G = bkc_G(5, 1.0, 0.4)
    assert np.allclose(propagator(G, 1.7), modal_propagator(G, 1.7), atol=1e-10)


@pytest.mark.parametrize("N", [2, 4])
def test_jordan_closed_form_matches_expm(N):
    G = bkc_G(N, 1.0, 1.0)
    for ch in bkc_tdelta_jordan_oracle(N, 1.0):
        for t in (0.5, 3.0):
            assert np.allclose(jordan_mode_evolution(ch, 0.0, t, G=G), propagator(G, t) @ ch, atol=1e-10)


def test_jordan_chain_check_rejects_bad_chain():
    G = bkc_G(3, 1.0, 1.0)
    ch = bkc_tdelta_jordan_oracle(3, 1.0)[0].copy()
    ch[:, 1] *= 2
    with pytest.raises(StructureViolationError):
        jordan_mode_evolution(ch, 0.0, 1.0, G=G)


def test_classify_growth_synthetic():
    t = np.linspace(0, 50, 401)
    assert classify_growth(t, 1 + 0.3 * np.abs(np.cos(t)))["kind"] == "bounded"
    poly = classify_growth(t, 1 + t**2)
    assert poly["kind"] == "polynomial" and poly["degree"] == 2
    ex = classify_growth(t, np.exp(0.4 * t))
    assert ex["kind"] == "exponential" and ex["rate"] == pytest.approx(0.4, rel=1e-6)


@pytest.mark.parametrize("a,b,kind", [(1, 2, "bounded"), (1, -2, "exponential"), (2, 0, "polynomial")])
def test_single_mode_growth(a, b, kind):
    G = build_effective_sph(single_mode(a, b)).G
    v0 = np.array([1.0, 0.3], dtype=complex)
    assert spectral_growth(G, v0) == kind
    tr = evolve_mode(G, v0, np.linspace(0, 40, 201))
    assert tr.growth_classification == kind
    assert tr.vectors.shape == (201, 2)


def test_open_tdelta_chain_grows_polynomially():
    G = bkc_G(3, 1.0, 1.0)
    v0 = bkc_tdelta_jordan_oracle(3, 1.0)[0][:, -1]
    assert spectral_growth(G, v0) == "polynomial"
    assert spectral_growth(G, bkc_tdelta_jordan_oracle(3, 1.0)[0][:, 0]) == "bounded"


def test_quadrature_generator_spectrum():
    spec = bkc(6, 1.0, 0.4, 0.5, 0.0)
    q = quadrature_decoupling_check(spec)
    assert q.decoupled
    A = quadrature_generator(spec)
    w = np.linalg.eigvals(build_effective_sph(spec).G)
    lam = np.linalg.eigvals(A)
    assert min(gap(lam, 1j * w), gap(lam, -1j * w)) < 1e-10


def test_bkc_transport_is_chiral():
    N = 21
    x0 = np.zeros(N)
    x0[N // 2] = 1.0
    res = phase_transport_sim(bkc(N, 1.0, 0.5), x0, x0, np.linspace(0, 6, 7))
    assert not res.coupled
    # the two quadratures are amplified in opposite directions
    assert (res.chirality["x"] - 1) * (res.chirality["p"] - 1) < 0
    assert max(res.chirality["x"], 1 / res.chirality["x"]) > 10
    with pytest.raises(InvalidSpecError):
        phase_transport_sim(bkc(N, 1.0, 0.5), x0[:-1], x0, [1.0])


def test_decoupled_collision_verdicts(rng):
    assert decoupled_collision_check(bkc(5, 1.0, 0.3)).verdict == "pass"
    assert decoupled_collision_check(random_qbh(rng, 3)).verdict == "not-applicable"
    assert decoupled_collision_check(bkc(4, 1.0, 0.3, 1.0, 0.0)).verdict == "vacuous"
