"""
Z2-graded matrix algebras and self-adjoint functionals on them.

The grading is ``gamma = Ad(g)`` for a diagonal sign matrix ``g``. For a
single graded algebra the basis is ordered so that ``g`` is
``diag(+1, ..., +1, -1, ..., -1)``; tensor products of graded sites keep the
product ordering, so ``signs`` is stored explicitly.
"""

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from gradedkms import settings
from gradedkms.linalg import (
    DimensionMismatch,
    GradedKmsError,
    as_square,
    frobenius,
    hermitian_eigendecompose,
    trace_norm,
)


class OddDensity(GradedKmsError):
    """
    Raised when a density that must be even is not, i.e.
    ``g rho g != rho``.
    """

    def __init__(self, operation: str, residual: float, scale: float):
        self.operation = operation
        self.residual = residual
        self.scale = scale
        super().__init__(
            f"{operation}: density is not even\n"
            f"||g rho g - rho||_F: {residual:.3e}\n"
            f"||rho||_F: {scale:.3e}\n"
        )


class InvalidGrading(GradedKmsError):
    def __init__(self, signs: list):
        self.signs = signs
        super().__init__(f"grading signs must be +1 or -1: {signs}")


@dataclass(frozen=True, eq=False)
class GradedAlgebra:
    """
    The full matrix algebra M_n with the grading ``gamma = Ad(g)``.
    """

    signs: np.ndarray
    """ Diagonal of g, one entry of +1 or -1 per basis vector. """

    def __post_init__(self):
        signs = np.asarray(self.signs, dtype=int)
        if signs.ndim != 1 or signs.size == 0:
            raise DimensionMismatch("GradedAlgebra", signs.shape, "(n,)")
        if not np.all(np.abs(signs) == 1):
            raise InvalidGrading(signs.tolist())
        object.__setattr__(self, "signs", signs)

    @classmethod
    def from_sectors(cls, n_plus: int, n_minus: int) -> "GradedAlgebra":
        """
        Returns the algebra with ``g = diag(+1 * n_plus, -1 * n_minus)``.
        ``n_minus = 0`` gives the ungraded algebra.
        """
        if n_plus < 0 or n_minus < 0 or n_plus + n_minus < 1:
            raise DimensionMismatch(
                "GradedAlgebra.from_sectors",
                (n_plus, n_minus),
                "n_plus >= 0, n_minus >= 0, n_plus + n_minus >= 1",
            )
        return cls(signs=np.array([1] * n_plus + [-1] * n_minus))

    @property
    def n(self) -> int:
        return int(self.signs.size)

    @property
    def n_plus(self) -> int:
        return int(np.sum(self.signs == 1))

    @property
    def n_minus(self) -> int:
        return int(np.sum(self.signs == -1))

    @property
    def is_graded(self) -> bool:
        return self.n_plus > 0 and self.n_minus > 0

    @property
    def g(self) -> np.ndarray:
        return np.diag(self.signs).astype(complex)

    @property
    def even_mask(self) -> np.ndarray:
        """ Boolean n x n pattern of the even (block diagonal) entries. """
        return np.equal.outer(self.signs, self.signs)

    def check(self, a, operation: str) -> np.ndarray:
        a = as_square(a, operation)
        if a.shape[0] != self.n:
            raise DimensionMismatch(operation, a.shape, (self.n, self.n))
        return a

    def parity_split(self, a) -> tuple[np.ndarray, np.ndarray]:
        return parity_split(self, a)

    def gamma(self, a) -> np.ndarray:
        return gamma(self, a)

    def parity_residual(self, a) -> float:
        """
        ``||g a g - a||_F / ||a||_F``; zero for even elements.
        """
        a = self.check(a, "parity_residual")
        scale = frobenius(a)
        if scale == 0:
            return 0.0
        return frobenius(self.gamma(a) - a) / scale

    def matrix_unit(self, i: int, j: int) -> np.ndarray:
        e = np.zeros((self.n, self.n), dtype=complex)
        e[i, j] = 1.0
        return e

    def matrix_units(self) -> Iterator[np.ndarray]:
        for i in range(self.n):
            for j in range(self.n):
                yield self.matrix_unit(i, j)

    def is_even_unit(self, i: int, j: int) -> bool:
        return bool(self.signs[i] == self.signs[j])

    def supertrace(self, x) -> complex:
        """ ``str(x) = tr(g x)`` """
        x = self.check(x, "supertrace")
        return complex(np.sum(self.signs * np.diag(x)))


def parity_split(A: GradedAlgebra, a) -> tuple[np.ndarray, np.ndarray]:
    """
    Returns the even and odd parts ``((a + gag)/2, (a - gag)/2)``.
    """
    a = A.check(a, "parity_split")
    mask = A.even_mask
    return np.where(mask, a, 0), np.where(mask, 0, a)


def gamma(A: GradedAlgebra, a) -> np.ndarray:
    """
    The grading automorphism ``a -> g a g = a_+ - a_-``.
    """
    a = A.check(a, "gamma")
    return np.where(A.even_mask, a, -a)


@dataclass(frozen=True, eq=False)
class Functional:
    """
    A linear functional on M_n represented by its kernel,
    ``omega(a) = tr(a T)``.
    """

    T: np.ndarray
    """ The kernel. Self-adjoint functionals have T = T*. """

    def __post_init__(self):
        object.__setattr__(self, "T", as_square(self.T, "Functional"))

    @property
    def n(self) -> int:
        return self.T.shape[0]

    def __call__(self, a) -> complex:
        return evaluate(self, a)

    def adjoint(self) -> "Functional":
        """ ``omega*(a) = conj(omega(a*))``, whose kernel is T*. """
        return Functional(T=self.T.conj().T)

    @property
    def norm(self) -> float:
        """ ``||omega|| = ||T||_1`` on the full matrix algebra. """
        return trace_norm(self.T)

    def self_adjoint_residual(self) -> float:
        scale = frobenius(self.T)
        if scale == 0:
            return 0.0
        return frobenius(self.T - self.T.conj().T) / scale

    def is_self_adjoint(self, rtol: float = settings.HERMITIAN_RTOL) -> bool:
        return self.self_adjoint_residual() <= rtol

    def is_even(
        self, A: GradedAlgebra, rtol: float = settings.EVENNESS_RTOL
    ) -> bool:
        return A.parity_residual(self.T) <= rtol


def evaluate(omega: Functional, a) -> complex:
    """
    ``omega(a) = tr(a T)``.
    """
    a = as_square(a, "eval")
    if a.shape != omega.T.shape:
        raise DimensionMismatch("eval", a.shape, omega.T.shape)
    # tr(aT) without forming the product
    return complex(np.sum(a * omega.T.T))


def require_even_density(A: GradedAlgebra, rho, operation: str):
    """
    Checks that ``rho`` is even and positive definite and returns it with
    its sector-adapted eigensystem.

    Raises:
        OddDensity: ``g rho g != rho`` beyond ``EVENNESS_RTOL``.
        SingularDensity: ``rho`` is not positive definite.
    """
    rho = A.check(rho, operation)
    scale = frobenius(rho)
    residual = frobenius(A.gamma(rho) - rho)
    if residual > settings.EVENNESS_RTOL * scale:
        raise OddDensity(operation, residual, scale)
    eig = hermitian_eigendecompose(rho, sectors=A.signs)
    eig.require_positive_definite(operation)
    return rho, eig


def supertrace_functional(A: GradedAlgebra, rho) -> Functional:
    """
    The regularized supertrace ``omega = str( . rho)``, with kernel
    ``T = g rho``.

    Raises:
        OddDensity: rho is not even.
        SingularDensity: rho is not positive definite.
    """
    rho, _ = require_even_density(A, rho, "supertrace_functional")
    # g rho for diagonal g
    return Functional(T=A.signs[:, None] * rho)


def compatibility_margins(A: GradedAlgebra, T) -> tuple[float, float]:
    """
    Smallest eigenvalue of T compressed to the even sector and largest
    eigenvalue of T compressed to the odd sector, both divided by ||T||_1.

    The grading is compatible with the functional when the first is
    nonnegative and the second nonpositive, i.e. ``tr(eT) >= 0`` for every
    projection e under the even sector and ``<= 0`` under the odd one.
    Empty sectors report 0.
    """
    T = A.check(T, "compatibility_margins")
    scale = trace_norm(T) or 1.0
    plus = np.flatnonzero(A.signs == 1)
    minus = np.flatnonzero(A.signs == -1)
    lowest = 0.0
    highest = 0.0
    if plus.size:
        block = T[np.ix_(plus, plus)]
        lowest = float(np.linalg.eigvalsh((block + block.conj().T) / 2)[0])
    if minus.size:
        block = T[np.ix_(minus, minus)]
        highest = float(np.linalg.eigvalsh((block + block.conj().T) / 2)[-1])
    return lowest / scale, highest / scale
