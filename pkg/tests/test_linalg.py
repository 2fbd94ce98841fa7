import numpy as np
import pytest

from gradedkms.linalg import (
    DimensionMismatch,
    NonHermitian,
    SingularDensity,
    as_square,
    commutant_basis,
    hermitian_eigendecompose,
    matrix_power,
    matrix_units,
    partial_trace,
    span_residual,
    trace_norm,
)


class TestAsSquare:
    @pytest.mark.parametrize(
        "value",
        [np.zeros(3), np.zeros((2, 3)), np.zeros((2, 2, 2))],
    )
    def test_rejects_non_square(self, value):
        with pytest.raises(DimensionMismatch):
            as_square(value)

    def test_returns_complex(self):
        assert as_square([[1, 2], [3, 4]]).dtype == complex


class TestHermitianEigendecompose:
    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitian):
            hermitian_eigendecompose([[1, 2], [0, 1]])

    def test_reconstructs(self, random_elements):
        x = random_elements(4, 1)[0]
        h = x + x.conj().T
        eig = hermitian_eigendecompose(h)

        assert np.allclose(eig.reconstruct(), h, atol=1e-12)
        assert np.all(np.diff(eig.eigenvalues) >= 0)

    def test_is_deterministic(self, random_elements):
        x = random_elements(5, 1)[0]
        h = x + x.conj().T
        first = hermitian_eigendecompose(h)
        second = hermitian_eigendecompose(h.copy())

        assert np.array_equal(first.eigenvectors, second.eigenvectors)

    def test_degenerate_cluster_has_canonical_basis(self):
        h = np.eye(3)
        eig = hermitian_eigendecompose(h)

        assert np.allclose(eig.eigenvectors, np.eye(3))

    def test_sectors_keep_eigenvectors_inside_blocks(self):
        signs = np.array([1, 1, -1])
        h = np.diag([1.0, 2.0, 1.0])
        eig = hermitian_eigendecompose(h, sectors=signs)

        for k in range(3):
            v = eig.eigenvectors[:, k]
            support = signs[np.abs(v) > 1e-12]
            assert len(set(support.tolist())) == 1

    def test_sectors_of_wrong_length(self):
        with pytest.raises(DimensionMismatch):
            hermitian_eigendecompose(np.eye(2), sectors=[1, 1, -1])


class TestMatrixPower:
    def test_group_law(self):
        rho = np.diag([0.75, 0.25])
        lhs = matrix_power(rho, 0.3j) @ matrix_power(rho, 0.7 - 0.3j)

        assert np.allclose(lhs, matrix_power(rho, 0.7), atol=1e-14)

    def test_imaginary_power_is_unitary(self):
        u = matrix_power(np.diag([0.6, 0.3, 0.1]), 2.5j)

        assert np.allclose(u.conj().T @ u, np.eye(3))

    @pytest.mark.parametrize(
        "rho", [np.diag([1.0, 0.0]), np.diag([1.0, -0.5])]
    )
    def test_singular_density(self, rho):
        with pytest.raises(SingularDensity):
            matrix_power(rho, 0.5)


class TestTraceNorm:
    def test_diagonal(self):
        assert trace_norm(np.diag([0.75, -0.25])) == pytest.approx(1.0)

    def test_unitary_invariant(self, random_elements):
        x = random_elements(3, 1)[0]
        q, _ = np.linalg.qr(random_elements(3, 1, seed=1)[0])

        assert trace_norm(q @ x) == pytest.approx(trace_norm(x))


class TestPartialTrace:
    def test_product(self):
        a = np.array([[1, 2], [3, 4]], dtype=complex)
        b = np.diag([0.25, 0.75]).astype(complex)

        assert np.allclose(partial_trace(np.kron(a, b), [2, 2], keep=1), a)

    def test_keep_all_and_none(self):
        m = np.arange(16).reshape(4, 4).astype(complex)

        assert np.allclose(partial_trace(m, [2, 2], keep=2), m)
        assert np.allclose(
            partial_trace(m, [2, 2], keep=0), [[np.trace(m)]]
        )

    def test_wrong_dims(self):
        with pytest.raises(DimensionMismatch):
            partial_trace(np.eye(4), [2, 3], keep=1)


class TestCommutantBasis:
    def test_commutant_of_full_algebra_is_scalars(self):
        gens = [np.array([[0, 1], [0, 0]], dtype=complex)]
        basis = commutant_basis(gens)

        assert len(basis) == 1
        assert span_residual(np.eye(2), basis) < 1e-12

    def test_commutant_of_diagonal_grading(self):
        g = np.diag([1, 1, -1]).astype(complex)

        assert len(commutant_basis([g])) == 2**2 + 1**2

    def test_empty_generators_need_dim(self):
        with pytest.raises(DimensionMismatch):
            commutant_basis([])

        assert len(commutant_basis([], dim=2)) == 4


def test_matrix_units_row_major():
    units = list(matrix_units(2))

    assert len(units) == 4
    assert units[1][0, 1] == 1
    assert np.sum(sum(units)) == 4
