"""
Jordan decomposition and modulus of self-adjoint functionals.

For ``omega = tr( . T)`` with T self-adjoint, the decomposition is the
spectral split of T: ``T = T_plus - T_minus`` with ``T_plus = T chi_plus``
and ``T_minus = -T chi_minus``, where ``chi_plus`` and ``chi_minus`` are the
spectral projections of T on its strictly positive and strictly negative
eigenvalues. The modulus has kernel ``|T| = T_plus + T_minus``.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from gradedkms import settings
from gradedkms.algebra import Functional, GradedAlgebra
from gradedkms.linalg import (
    GradedKmsError,
    frobenius,
    hermitian_eigendecompose,
    matrix_units,
    operator_norm,
)

logger = logging.getLogger(__name__)


class NotSelfAdjoint(GradedKmsError):
    """
    Raised when a functional required to be self-adjoint is not.
    """

    def __init__(self, operation: str, residual: float):
        self.operation = operation
        self.residual = residual
        super().__init__(
            f"{operation}: functional is not self-adjoint\n"
            f"||T - T*||_F / ||T||_F: {residual:.3e}\n"
        )


class NotFaithful(GradedKmsError):
    """
    Raised when an operation needs a faithful functional, i.e.
    ``chi_plus + chi_minus = 1``.
    """

    def __init__(self, operation: str, rank: int, n: int):
        self.operation = operation
        self.rank = rank
        self.n = n
        super().__init__(
            f"{operation}: functional is not faithful\n"
            f"support rank: {rank}\n"
            f"dimension: {n}\n"
        )


@dataclass(frozen=True, eq=False)
class JordanData:
    """
    The Jordan decomposition of a self-adjoint functional and its support
    projections.
    """

    T_plus: np.ndarray
    """ Kernel of the positive part omega_+. """
    T_minus: np.ndarray
    """ Kernel of the negative part omega_-. """
    chi_plus: np.ndarray
    """ Support projection of omega_+. """
    chi_minus: np.ndarray
    """ Support projection of omega_-. """
    rho: np.ndarray
    """ Kernel of the modulus, |T|. """

    @property
    def n(self) -> int:
        return self.rho.shape[0]

    @property
    def T(self) -> np.ndarray:
        return self.T_plus - self.T_minus

    @property
    def g_prime(self) -> np.ndarray:
        """ The grading element ``chi_plus - chi_minus``. """
        return self.chi_plus - self.chi_minus

    @property
    def support(self) -> np.ndarray:
        return self.chi_plus + self.chi_minus

    @property
    def support_rank(self) -> int:
        return int(round(np.real(np.trace(self.support))))

    @property
    def is_faithful(self) -> bool:
        return self.support_rank == self.n

    @property
    def omega(self) -> Functional:
        return Functional(T=self.T)

    @property
    def omega_plus(self) -> Functional:
        return Functional(T=self.T_plus)

    @property
    def omega_minus(self) -> Functional:
        return Functional(T=self.T_minus)

    @property
    def modulus(self) -> Functional:
        return Functional(T=self.rho)

    def negated(self) -> "JordanData":
        """ The decomposition of ``-omega``. """
        return JordanData(
            T_plus=self.T_minus,
            T_minus=self.T_plus,
            chi_plus=self.chi_minus,
            chi_minus=self.chi_plus,
            rho=self.rho,
        )

    def require_faithful(self, operation: str):
        if not self.is_faithful:
            raise NotFaithful(operation, self.support_rank, self.n)


def _default_samples(n: int, samples: Optional[Iterable]) -> list:
    if samples is None:
        return list(matrix_units(n))
    return list(samples)


def jordan_decompose(omega: Functional) -> JordanData:
    """
    Splits a self-adjoint functional into orthogonal positive parts.

    Eigenvalues of T with ``|lambda| <= JORDAN_ZERO_RTOL * max |lambda|``
    belong to neither support, so a functional with a kernel null space is
    reported non-faithful.

    Raises:
        NotSelfAdjoint: T != T* beyond ``HERMITIAN_RTOL``.
    """
    residual = omega.self_adjoint_residual()
    if residual > settings.HERMITIAN_RTOL:
        raise NotSelfAdjoint("jordan_decompose", residual)

    eig = hermitian_eigendecompose(omega.T)
    values = eig.eigenvalues
    vectors = eig.eigenvectors
    top = float(np.max(np.abs(values)))
    threshold = settings.JORDAN_ZERO_RTOL * top

    def part(mask):
        v = vectors[:, mask]
        return (v * values[mask]) @ v.conj().T, v @ v.conj().T

    t_plus, chi_plus = part(values > threshold)
    t_minus, chi_minus = part(values < -threshold)
    t_minus = -t_minus
    jd = JordanData(
        T_plus=t_plus,
        T_minus=t_minus,
        chi_plus=chi_plus,
        chi_minus=chi_minus,
        rho=t_plus + t_minus,
    )
    logger.debug(
        f"jordan_decompose: n={jd.n}, support rank={jd.support_rank}"
    )
    return jd


def modulus(omega: Functional) -> Functional:
    """
    The modulus ``|omega| = omega_+ + omega_-``, the unique positive
    functional with ``|| |omega| || = ||omega||`` and
    ``|omega(a)|^2 <= ||omega|| |omega|(a* a)``.
    """
    return jordan_decompose(omega).modulus


@dataclass(frozen=True)
class CauchySchwarzReport:
    min_slack: float
    """
    Smallest ``(||omega|| |omega|(a*a) - |omega(a)|^2) / (||omega|| ||a||)^2``
    over the samples. Nonnegative when the squared bound holds.
    """
    unsquared_violations: int
    """
    Samples violating the literal form
    ``|omega(a)| <= ||omega|| |omega|(a*a)``. Reported, not asserted.
    """
    samples: int


def cauchy_schwarz_report(
    omega: Functional, samples: Optional[Iterable] = None
) -> CauchySchwarzReport:
    jd = jordan_decompose(omega)
    mod = jd.modulus
    norm = omega.norm
    slack = np.inf
    violations = 0
    items = _default_samples(omega.n, samples)
    for a in items:
        value = abs(omega(a))
        bound = norm * np.real(mod(a.conj().T @ a))
        scale = (norm * operator_norm(a)) ** 2 or 1.0
        slack = min(slack, (bound - value**2) / scale)
        if value > bound:
            violations += 1
    return CauchySchwarzReport(
        min_slack=float(slack),
        unsquared_violations=violations,
        samples=len(items),
    )


@dataclass(frozen=True, eq=False)
class WitnessCertificate:
    z: np.ndarray
    """ The witness, a positive element of the unit ball. """
    plus_defect: float
    """ ``omega_+(1 - z)`` """
    minus_defect: float
    """ ``omega_-(z)`` """
    epsilon: float

    @property
    def holds(self) -> bool:
        return (
            self.plus_defect < self.epsilon
            and self.minus_defect < self.epsilon
        )


def orthogonality_witness(
    jd: JordanData, epsilon: float
) -> WitnessCertificate:
    """
    Returns ``z = chi_plus`` with ``omega_+(1 - z)`` and ``omega_-(z)``,
    which certify that omega_+ and omega_- are orthogonal. In finite
    dimension both are zero up to rounding.
    """
    z = jd.chi_plus
    one = np.eye(jd.n)
    return WitnessCertificate(
        z=z,
        plus_defect=abs(jd.omega_plus(one - z)),
        minus_defect=abs(jd.omega_minus(z)),
        epsilon=epsilon,
    )


def grading_from_functional(
    jd: JordanData, A: GradedAlgebra, samples: Optional[Iterable] = None
) -> float:
    """
    Max over samples of ``||g' a g' - gamma(a)||_F / ||a||_F``, which is
    zero when ``g' = chi_plus - chi_minus`` implements the grading.

    Raises:
        NotFaithful: chi_plus + chi_minus != 1.
    """
    jd.require_faithful("grading_from_functional")
    gp = jd.g_prime
    worst = 0.0
    for a in _default_samples(jd.n, samples):
        scale = frobenius(a)
        if scale == 0:
            continue
        worst = max(worst, frobenius(gp @ a @ gp - A.gamma(a)) / scale)
    return worst


def sakai_links(
    omega: Functional, jd: JordanData, samples: Optional[Iterable] = None
) -> tuple[float, float]:
    """
    Residuals of ``|omega|(a) = omega(a g')`` and
    ``omega(a) = |omega|(a g')``, each the max over samples of the absolute
    difference divided by ``||a|| ||T||_1``.
    """
    mod = jd.modulus
    gp = jd.g_prime
    norm = omega.norm or 1.0
    first = 0.0
    second = 0.0
    for a in _default_samples(omega.n, samples):
        scale = operator_norm(a) * norm
        if scale == 0:
            continue
        first = max(first, abs(mod(a) - omega(a @ gp)) / scale)
        second = max(second, abs(omega(a) - mod(a @ gp)) / scale)
    return first, second
