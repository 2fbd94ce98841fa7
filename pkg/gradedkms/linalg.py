"""
Dense complex-matrix primitives shared by every other module.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. Linear
maps on matrices use the row-major vectorization ``X.reshape(-1)``, so that
``vec(A X B) = kron(A, B.T) @ vec(X)``.
"""

from dataclasses import dataclass
from math import prod
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from gradedkms import settings


class GradedKmsError(Exception):
    """The base Exception class for the gradedkms package."""

    pass


class DimensionMismatch(GradedKmsError):
    """
    Raised when a matrix does not have the shape an operation requires.
    """

    def __init__(self, operation: str, shape, expected):
        self.operation = operation
        self.shape = shape
        self.expected = expected
        super().__init__(
            f"{operation}: dimension mismatch\n"
            f"shape: {shape}\n"
            f"expected: {expected}\n"
        )


class NonHermitian(GradedKmsError):
    """
    Raised when a matrix required to be self-adjoint is not.
    """

    def __init__(self, operation: str, residual: float, scale: float):
        self.operation = operation
        self.residual = residual
        self.scale = scale
        super().__init__(
            f"{operation}: matrix is not self-adjoint\n"
            f"||M - M*||_F: {residual:.3e}\n"
            f"||M||_F: {scale:.3e}\n"
        )


class SingularDensity(GradedKmsError):
    """
    Raised when a density is not positive definite, i.e. its smallest
    eigenvalue is not above ``POSITIVITY_RTOL`` times the largest.
    """

    def __init__(self, operation: str, smallest: float, largest: float):
        self.operation = operation
        self.smallest = smallest
        self.largest = largest
        super().__init__(
            f"{operation}: density is not positive definite\n"
            f"smallest eigenvalue: {smallest:.3e}\n"
            f"largest eigenvalue: {largest:.3e}\n"
        )


def as_matrix(m, operation: str = "as_matrix") -> np.ndarray:
    """
    Returns ``m`` as a 2-dimensional complex array.
    """
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise DimensionMismatch(operation, arr.shape, "2-dimensional")
    return arr


def as_square(m, operation: str = "as_square") -> np.ndarray:
    """
    Returns ``m`` as a square complex array, raising DimensionMismatch
    otherwise.
    """
    arr = as_matrix(m, operation)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(operation, arr.shape, "square")
    return arr


def frobenius(m) -> float:
    return float(np.linalg.norm(m))


def operator_norm(m) -> float:
    """Largest singular value."""
    arr = np.asarray(m)
    if arr.size == 0:
        return 0.0
    return float(np.linalg.norm(arr, 2))


def adjoint(m) -> np.ndarray:
    return np.asarray(m).conj().T


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """
    The spectral decomposition ``M = V diag(eigenvalues) V*`` of a
    self-adjoint matrix.
    """

    eigenvalues: np.ndarray
    """ Real eigenvalues in ascending order. """
    eigenvectors: np.ndarray
    """ Unitary matrix of column eigenvectors. """

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """
        Returns ``V diag(f(eigenvalues)) V*``.
        """
        v = self.eigenvectors
        return (v * f(self.eigenvalues)) @ v.conj().T

    def reconstruct(self) -> np.ndarray:
        return self.apply(lambda x: x.astype(complex))

    def to_eigenbasis(self, a) -> np.ndarray:
        v = self.eigenvectors
        return v.conj().T @ a @ v

    def from_eigenbasis(self, a) -> np.ndarray:
        v = self.eigenvectors
        return v @ a @ v.conj().T

    @property
    def is_positive_definite(self) -> bool:
        largest = self.eigenvalues[-1]
        return bool(
            largest > 0
            and self.eigenvalues[0] > settings.POSITIVITY_RTOL * largest
        )

    @property
    def condition(self) -> float:
        """
        Ratio of the largest to the smallest eigenvalue of a positive
        definite matrix.
        """
        self.require_positive_definite("condition")
        return float(self.eigenvalues[-1] / self.eigenvalues[0])

    def require_positive_definite(self, operation: str):
        if not self.is_positive_definite:
            raise SingularDensity(
                operation,
                float(self.eigenvalues[0]),
                float(self.eigenvalues[-1]),
            )

    def power(self, z: complex) -> np.ndarray:
        """
        Returns ``M^z`` with the principal branch ``exp(z ln lambda)``.
        """
        self.require_positive_definite("matrix_power")
        logs = np.log(self.eigenvalues)
        return self.apply(lambda _: np.exp(z * logs))


def _labels_in_order(labels: np.ndarray) -> list:
    # +1 (even) sector before -1 (odd) sector
    return sorted(set(labels.tolist()), reverse=True)


def _canonical_columns(vectors: np.ndarray) -> np.ndarray:
    """
    Returns an orthonormal basis of the column span of ``vectors`` that
    depends only on the span.
    """
    k = vectors.shape[1]
    projector = vectors @ vectors.conj().T
    q, _, _ = scipy.linalg.qr(projector, pivoting=True)
    return q[:, :k]


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    # the largest-magnitude entry of every column becomes real positive
    if vectors.size == 0:
        return vectors
    rows = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[rows, np.arange(vectors.shape[1])]
    return vectors * (pivots.conj() / np.abs(pivots))


def _orthonormalize_clusters(
    values: np.ndarray, vectors: np.ndarray, owners: np.ndarray
) -> np.ndarray:
    diameter = values[-1] - values[0]
    threshold = settings.DEGENERACY_RTOL * diameter
    out = vectors.copy()
    start = 0
    n = len(values)
    while start < n:
        stop = start + 1
        while (
            stop < n
            and values[stop] - values[stop - 1] <= threshold
            and owners[stop] == owners[start]
        ):
            stop += 1
        if stop - start > 1:
            out[:, start:stop] = _canonical_columns(vectors[:, start:stop])
        start = stop
    return _fix_phases(out)


def hermitian_eigendecompose(
    m, sectors: Optional[Sequence[int]] = None
) -> EigenSystem:
    """
    Deterministic eigendecomposition of a self-adjoint matrix.

    Args:
        m: A square self-adjoint matrix.
        sectors: Optional label per basis vector. When given, ``m`` must be
            block diagonal with respect to the labels; eigenvectors are then
            computed block by block, so every eigenvector lies inside one
            sector. Used to keep eigenbases of even densities compatible
            with the grading.

    Returns:
        EigenSystem with ascending eigenvalues. Eigenvectors of a degenerate
        cluster are replaced by a pivoted-QR basis of the cluster span, and
        every eigenvector has its largest entry real positive.

    Raises:
        DimensionMismatch: ``m`` is not square or ``sectors`` has the wrong
            length.
        NonHermitian: ``||m - m*||_F > HERMITIAN_RTOL ||m||_F``.
    """
    m = as_square(m, "hermitian_eigendecompose")
    n = m.shape[0]
    scale = frobenius(m)
    residual = frobenius(m - m.conj().T)
    if residual > settings.HERMITIAN_RTOL * scale:
        raise NonHermitian("hermitian_eigendecompose", residual, scale)
    h = (m + m.conj().T) / 2

    if sectors is None:
        labels = np.zeros(n, dtype=int)
    else:
        labels = np.asarray(sectors).astype(int)
        if labels.shape != (n,):
            raise DimensionMismatch(
                "hermitian_eigendecompose", labels.shape, (n,)
            )

    values, blocks, owners = [], [], []
    for label in _labels_in_order(labels):
        idx = np.flatnonzero(labels == label)
        w, v = np.linalg.eigh(h[np.ix_(idx, idx)])
        block = np.zeros((n, len(idx)), dtype=complex)
        block[idx, :] = v
        values.append(w)
        blocks.append(block)
        owners.append(np.full(len(idx), label))

    values = np.concatenate(values)
    vectors = np.hstack(blocks)
    owners = np.concatenate(owners)
    order = np.argsort(values, kind="stable")
    values, vectors, owners = values[order], vectors[:, order], owners[order]
    vectors = _orthonormalize_clusters(values, vectors, owners)
    return EigenSystem(eigenvalues=values, eigenvectors=vectors)


def matrix_power(
    rho, z: complex, eig: Optional[EigenSystem] = None
) -> np.ndarray:
    """
    Returns ``rho^z`` for a positive definite ``rho``.

    Raises:
        SingularDensity: ``rho`` is not positive definite.
    """
    if eig is None:
        eig = hermitian_eigendecompose(rho)
    return eig.power(z)


def trace_norm(m) -> float:
    """
    Sum of the singular values of a square matrix.
    """
    m = as_square(m, "trace_norm")
    return float(np.sum(scipy.linalg.svdvals(m)))


def partial_trace(m, site_dims: Sequence[int], keep: int) -> np.ndarray:
    """
    Traces out every site after the first ``keep`` sites.

    Args:
        m: Matrix on the tensor product of the sites, in the ordering
            ``kron(site_1, site_2, ...)``.
        site_dims: Per-site dimensions.
        keep: Number of leading sites to keep, from 0 to ``len(site_dims)``.
    """
    m = as_square(m, "partial_trace")
    dims = [int(d) for d in site_dims]
    if any(d < 1 for d in dims) or prod(dims) != m.shape[0]:
        raise DimensionMismatch("partial_trace", m.shape, dims)
    if not 0 <= keep <= len(dims):
        raise DimensionMismatch("partial_trace", keep, f"0..{len(dims)}")
    kept = prod(dims[:keep])
    rest = m.shape[0] // kept
    return np.einsum("ijkj->ik", m.reshape(kept, rest, kept, rest))


def commutant_basis(
    generators: Sequence[np.ndarray], dim: Optional[int] = None
) -> list[np.ndarray]:
    """
    Frobenius-orthonormal basis of the commutant of the *-algebra generated
    by ``generators``.

    The commutant is the null space of the stacked maps
    ``X -> X G - G X`` for every generator and its adjoint. Singular values
    below ``COMMUTANT_RTOL`` times the largest one count as zero.

    Args:
        generators: Square matrices of a common dimension.
        dim: The dimension, required only when ``generators`` is empty.
    """
    gens = [as_square(g, "commutant_basis") for g in generators]
    if not gens:
        if dim is None:
            raise DimensionMismatch("commutant_basis", None, "dim")
        units = np.eye(dim * dim, dtype=complex)
        return [units[k].reshape(dim, dim) for k in range(dim * dim)]

    n = gens[0].shape[0]
    for g in gens:
        if g.shape != (n, n):
            raise DimensionMismatch("commutant_basis", g.shape, (n, n))

    eye = np.eye(n)
    blocks = []
    for g in gens:
        for h in (g, g.conj().T):
            blocks.append(np.kron(eye, h.T) - np.kron(h, eye))
    null = scipy.linalg.null_space(
        np.vstack(blocks), rcond=settings.COMMUTANT_RTOL
    )
    return [null[:, k].reshape(n, n) for k in range(null.shape[1])]


def span_residual(x, basis: Sequence[np.ndarray]) -> float:
    """
    Relative Frobenius norm of the part of ``x`` outside the span of an
    orthonormal ``basis``.
    """
    x = np.asarray(x, dtype=complex)
    scale = frobenius(x)
    if scale == 0:
        return 0.0
    rest = x.copy()
    for b in basis:
        rest = rest - np.vdot(b, x) * b
    return frobenius(rest) / scale


def matrix_units(n: int):
    """
    Yields the matrix units E_ij of M_n in row-major order.
    """
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1.0
            yield e
