import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from kreinstab.errors import InvalidSpecError, StructureViolationError
from kreinstab.gbt import (
    BBTSpec,
    PowerExceedsStructureError,
    SingularFrequencyError,
    boundary_matrix,
    bulk_solution_basis,
    characteristic_polynomial,
    characteristic_roots,
    eigen_search,
    emergent_matrices,
    generalized_kernel,
    reduced_bulk_hamiltonian,
)
from kreinstab.models import bkc_bbt, bkc_blocks, bkc_G

S3 = np.diag([1.0, -1.0])


def gap(a, b):
    C = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(C)
    return C[r, c].max()


def range2_spec(N=9):
    """A bosonic range-2 chain: BKC hopping plus a second-neighbour beam splitter."""
    b = bkc_blocks(1.0, 0.3)
    g2 = np.array([[0.2, 0.0], [0.0, -0.2]], dtype=complex)
    g = {1: b["g1"], -1: b["g-1"], 0: np.diag([0.1, -0.1]).astype(complex), 2: g2, -2: S3 @ g2.conj().T @ S3}
    return BBTSpec(N, 2, g)


def test_dense_matches_bkc():
    assert np.allclose(bkc_bbt(7, 1.0, 0.4, 0.5, 0.9).dense(), bkc_G(7, 1.0, 0.4, 0.5, 0.9))


def test_validation():
    with pytest.raises(InvalidSpecError):
        BBTSpec(2, 1, {})
    with pytest.raises(InvalidSpecError):
        BBTSpec(6, 1, {}, {(3, 3): np.eye(2)})
    with pytest.raises(StructureViolationError):
        BBTSpec(6, 1, {1: np.eye(2), -1: np.zeros((2, 2))})


def test_polynomial_degree_and_root_count():
    spec = range2_spec()
    for w in (0.3 + 0.1j, -0.7 + 0.02j):
        c = characteristic_polynomial(spec, w)
        assert len(c) == 4 * spec.R + 1
        rs = characteristic_roots(spec, w)
        assert rs.total == 4 * spec.R
        for z, _ in rs.roots:
            assert abs(np.linalg.det(reduced_bulk_hamiltonian(spec, z) - w * np.eye(2))) < 1e-8


def test_emergent_duality():
    spec = range2_spec()
    w = 0.4 + 0.3j
    Km, _ = emergent_matrices(spec, np.conj(w), 3)
    _, Kp = emergent_matrices(spec, w, 3)
    t3 = np.kron(np.eye(3), S3)
    assert np.allclose(Kp, t3 @ Km.conj().T @ t3)


@pytest.mark.parametrize("spec", [bkc_bbt(8, 1.0, 0.4, 0.7, 0.5), range2_spec()], ids=["bkc", "range2"])
def test_bulk_basis_solves_bulk_rows(spec):
    G = spec.dense()
    rows = np.arange(2 * spec.R, 2 * (spec.N - spec.R))
    for w in (0.37 + 0.11j, -0.53 + 0.07j):
        basis = bulk_solution_basis(spec, w)
        assert basis.count() == 4 * spec.R
        res = (G - w * np.eye(len(G)))[rows] @ basis.columns
        assert np.max(np.abs(res)) < 1e-10
        assert np.linalg.matrix_rank(basis.columns, tol=1e-8) == 4 * spec.R


def test_boundary_matrix_is_singular_at_eigenvalues():
    spec = bkc_bbt(6, 1.0, 0.4, 1.0, 0.8)
    w = np.linalg.eigvals(spec.dense())[0]
    s = np.linalg.svd(boundary_matrix(spec, w), compute_uv=False)
    assert s[-1] < 1e-8 * s[0]
    s_off = np.linalg.svd(boundary_matrix(spec, w + 0.05), compute_uv=False)
    assert s_off[-1] > 1e-4 * s_off[0]


@pytest.mark.parametrize("spec", [bkc_bbt(6, 1.0, 0.4, 1.0, 0.8), bkc_bbt(5, 1.0, 0.25), range2_spec(7)],
                         ids=["twisted", "open", "range2"])
def test_eigen_search_matches_dense(spec):
    r = eigen_search(spec)
    assert r.complete
    assert gap(np.linalg.eigvals(spec.dense()), r.eigenvalues) < 1e-8
    assert np.max(r.residuals) < 1e-8


def test_analytic_roots_strategy():
    spec = bkc_bbt(5, 1.0, 0.3, 1.0, 0.4)
    dense = np.linalg.eigvals(spec.dense())
    r = eigen_search(spec, "analytic-roots", seeds=dense + 1e-6)
    assert r.complete
    assert gap(dense, r.eigenvalues) < 1e-8


def test_flat_band_frequency_is_flagged():
    # no hopping: det(G(z) - w) = (a - w)(-a - w) vanishes for every z at w = a
    a = 0.7
    spec = BBTSpec(5, 1, {0: np.diag([a, -a]).astype(complex)})
    with pytest.raises(SingularFrequencyError):
        characteristic_roots(spec, a)
    assert characteristic_roots(spec, 0.2).total == 4


def test_generalized_kernel_dimensions():
    spec = bkc_bbt(9, 1.0, 1.0)  # t = Delta open chain: two Jordan chains at 0
    for p in (1, 2, 3):
        k = generalized_kernel(spec, 0.0, p)
        assert k.dim == 2 * p
        M = np.linalg.matrix_power(spec.dense(), p)
        assert np.max(np.abs(M @ k.vectors)) < 1e-10
    with pytest.raises(PowerExceedsStructureError):
        generalized_kernel(spec, 0.0, 8)
