"""
The modular flow of an even density and its analytic continuation.

Convention: ``alpha_z(a) = rho^(-iz) a rho^(iz)``, so ``alpha_i(a) =
rho a rho^-1``. In the eigenbasis of rho the entry (j, k) of ``alpha_z(a)`` is
the entry of ``a`` times ``exp(iz (E_j - E_k))`` with ``E = -ln(lambda)``.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.integrate
from numpy.polynomial.hermite import hermgauss

from gradedkms import settings
from gradedkms.algebra import Functional, GradedAlgebra
from gradedkms.linalg import (
    DimensionMismatch,
    EigenSystem,
    GradedKmsError,
    as_square,
    hermitian_eigendecompose,
    operator_norm,
)

logger = logging.getLogger(__name__)


class NonpositiveSigma(GradedKmsError):
    """
    Raised when a Gaussian smoothing width is not strictly positive.
    """

    def __init__(self, sigma: float):
        self.sigma = sigma
        super().__init__(f"smoothing width must be positive: {sigma}")


class IllConditioned(GradedKmsError):
    """
    Raised when the condition number of a density exceeds the allowed
    maximum.
    """

    def __init__(self, operation: str, condition: float, limit: float):
        self.operation = operation
        self.condition = condition
        self.limit = limit
        super().__init__(
            f"{operation}: density is ill-conditioned\n"
            f"condition number: {condition:.3e}\n"
            f"limit: {limit:.3e}\n"
        )


def check_condition(
    condition: float,
    allow_ill_conditioned: bool = False,
    operation: str = "check_condition",
):
    """
    Raises IllConditioned when ``condition > MAX_CONDITION`` unless
    explicitly allowed.
    """
    if condition > settings.MAX_CONDITION and not allow_ill_conditioned:
        raise IllConditioned(operation, condition, settings.MAX_CONDITION)


@dataclass(frozen=True, eq=False)
class ModularFlow:
    """
    The automorphism group ``alpha_z`` generated by a positive definite
    density.

    Example:
        >>> flow = ModularFlow.from_density(np.diag([0.75, 0.25]))
        >>> flow.evolve(E12, 1j)  # 3 * E12
    """

    rho: np.ndarray
    eig: EigenSystem
    """ Eigensystem of rho, sector adapted when built with sectors. """
    E: np.ndarray = field(init=False)
    """ Modular energies ``-ln(lambda)``, aligned with ``eig``. """

    def __post_init__(self):
        self.eig.require_positive_definite("ModularFlow")
        object.__setattr__(self, "E", -np.log(self.eig.eigenvalues))

    @classmethod
    def from_density(
        cls, rho, sectors: Optional[Sequence[int]] = None
    ) -> "ModularFlow":
        """
        Raises:
            NonHermitian: rho is not self-adjoint.
            SingularDensity: rho is not positive definite.
        """
        rho = as_square(rho, "ModularFlow")
        eig = hermitian_eigendecompose(rho, sectors=sectors)
        return cls(rho=rho, eig=eig)

    @property
    def n(self) -> int:
        return self.rho.shape[0]

    @property
    def condition(self) -> float:
        return self.eig.condition

    @property
    def frequencies(self) -> np.ndarray:
        """ ``E_j - E_k`` as an n x n array. """
        return self.E[:, None] - self.E[None, :]

    def _check(self, a, operation: str) -> np.ndarray:
        a = as_square(a, operation)
        if a.shape != self.rho.shape:
            raise DimensionMismatch(operation, a.shape, self.rho.shape)
        return a

    def multiply_in_eigenbasis(self, a, multiplier: np.ndarray, operation):
        a = self._check(a, operation)
        return self.eig.from_eigenbasis(
            self.eig.to_eigenbasis(a) * multiplier
        )

    def evolve(self, a, z: complex) -> np.ndarray:
        return evolve(self, a, z)

    def smooth(self, a, sigma: float, z: complex = 0) -> np.ndarray:
        return smooth(self, a, sigma, z)


def evolve(flow: ModularFlow, a, z: complex) -> np.ndarray:
    """
    Returns ``alpha_z(a) = rho^(-iz) a rho^(iz)``.

    Raises:
        DimensionMismatch: ``a`` does not match the density.
    """
    multiplier = np.exp(1j * z * flow.frequencies)
    return flow.multiply_in_eigenbasis(a, multiplier, "evolve")


def kms_scale(flow: ModularFlow, omega: Functional, a, b) -> float:
    """
    ``||a|| ||b|| ||T||_1 max(1, cond(rho))``, the scale of KMS residuals.
    """
    scale = (
        operator_norm(a)
        * operator_norm(b)
        * omega.norm
        * max(1.0, flow.condition)
    )
    return scale or 1.0


def graded_kms_residual(
    omega: Functional, flow: ModularFlow, A: GradedAlgebra, a, b
) -> float:
    """
    Relative residual of ``omega(ab) = omega(gamma(b) alpha_i(a))``.
    """
    a = A.check(a, "graded_kms_residual")
    b = A.check(b, "graded_kms_residual")
    lhs = omega(a @ b)
    rhs = omega(A.gamma(b) @ evolve(flow, a, 1j))
    return abs(lhs - rhs) / kms_scale(flow, omega, a, b)


def kms_residual(phi: Functional, flow: ModularFlow, a, b) -> float:
    """
    Relative residual of the ungraded condition
    ``phi(ab) = phi(b alpha_i(a))``.
    """
    lhs = phi(a @ b)
    rhs = phi(b @ evolve(flow, a, 1j))
    return abs(lhs - rhs) / kms_scale(flow, phi, a, b)


def strip_function(
    omega: Functional, flow: ModularFlow, a, b, z: complex
) -> complex:
    """
    ``F_{a,b}(z) = omega(a alpha_z(b))``, entire in finite dimension.

    For a graded-KMS functional its boundary values on the strip
    ``0 <= Im z <= 1`` are ``omega(a alpha_t(b))`` and
    ``omega(alpha_t(b) gamma(a))``.
    """
    return omega(a @ evolve(flow, b, z))


def strip_boundary_residual(
    omega: Functional, flow: ModularFlow, A: GradedAlgebra, a, b, t: float
) -> float:
    """
    Relative residual of ``F_{a,b}(t + i) = omega(alpha_t(b) gamma(a))``.
    """
    upper = strip_function(omega, flow, a, b, t + 1j)
    expected = omega(evolve(flow, b, t) @ A.gamma(a))
    return abs(upper - expected) / kms_scale(flow, omega, a, b)


def strip_derivatives(
    omega: Functional, flow: ModularFlow, a, b, z0: complex, order: int
) -> np.ndarray:
    """
    The derivatives ``F^(m)(z0)`` for ``m = 0..order``, computed from the
    spectral form ``F(z) = sum_jk c_jk exp(iz (E_j - E_k))``.
    """
    eig = flow.eig
    # c_jk = (V* T a V)_kj (V* b V)_jk
    left = eig.to_eigenbasis(omega.T @ a)
    coeffs = left.T * eig.to_eigenbasis(b)
    rates = 1j * flow.frequencies
    base = coeffs * np.exp(z0 * rates)
    return np.array(
        [np.sum(base * rates**m) for m in range(order + 1)], dtype=complex
    )


def taylor_residual(
    omega: Functional,
    flow: ModularFlow,
    a,
    b,
    start: complex,
    stop: complex,
    points: int = 9,
    terms: Optional[int] = None,
) -> float:
    """
    Largest relative difference between ``F_{a,b}`` and its Taylor
    polynomial at the segment midpoint, over points of the segment.

    By default the polynomial has enough terms for the remainder to drop
    below rounding, see :func:`taylor_terms`.
    """
    mid = (start + stop) / 2
    if terms is None:
        terms = taylor_terms(flow, abs(stop - start) / 2)
    derivs = strip_derivatives(omega, flow, a, b, mid, terms - 1)
    factorials = np.array(
        [math.factorial(m) for m in range(terms)], dtype=float
    )
    worst = 0.0
    for z in np.linspace(start, stop, points):
        approx = np.sum(derivs / factorials * (z - mid) ** np.arange(terms))
        exact = strip_function(omega, flow, a, b, z)
        worst = max(worst, abs(approx - exact))
    return worst / kms_scale(flow, omega, a, b)


def taylor_terms(flow: ModularFlow, radius: float) -> int:
    """
    Smallest m past ``reach = max|E_j - E_k| radius`` with
    ``reach^m / m! < 1e-17``; at most 170 so factorials stay finite.
    """
    reach = float(np.max(np.abs(flow.frequencies))) * radius
    terms = 1
    term = 1.0
    while (term > 1e-17 or terms <= reach) and terms < 170:
        term *= reach / terms
        terms += 1
    return terms


@dataclass(frozen=True, eq=False)
class GrowthEstimate:
    C: float
    N: int
    grid: np.ndarray
    """ Sampled ``|F(t + is)|``, shape (len(s), len(t)). """
    t: np.ndarray
    s: np.ndarray

    def holds(self) -> bool:
        bound = self.C * (1 + np.abs(self.t)) ** self.N
        return bool(np.all(self.grid <= bound[None, :] * (1 + 1e-12)))


def growth_probe(
    F: Callable[[complex], complex],
    t_range: float,
    s_samples: int,
    t_samples: int = 129,
) -> GrowthEstimate:
    """
    Fits the smallest polynomial growth ``|F(t + is)| <= C (1 + |t|)^N``
    on the strip ``0 <= s <= 1``, ``|t| <= t_range``.

    N comes from the slope of ``log max|F|`` against ``log(1 + T)`` over the
    windows ``|t| <= T`` for T from ``t_range / 8`` to ``t_range``, rounded to
    the nearest integer and capped at ``GROWTH_MAX_DEGREE``. C is then the
    smallest constant that makes the bound hold on the grid.
    """
    t = np.linspace(-t_range, t_range, t_samples)
    s = np.linspace(0.0, 1.0, max(s_samples, 2))
    grid = np.array([[abs(F(tt + 1j * ss)) for tt in t] for ss in s])

    envelope = grid.max(axis=0)
    radii = np.linspace(t_range / 8, t_range, 8)
    maxima = np.array([envelope[np.abs(t) <= r].max() for r in radii])
    N = 0
    if np.all(maxima > 0):
        slope = np.polyfit(np.log1p(radii), np.log(maxima), 1)[0]
        N = min(max(0, math.ceil(slope - 0.5)), settings.GROWTH_MAX_DEGREE)
        N = int(N)
    C = float(np.max(envelope / (1 + np.abs(t)) ** N))
    logger.debug(f"growth_probe: C={C:.3e}, N={N}")
    return GrowthEstimate(C=C, N=N, grid=grid, t=t, s=s)


def _require_sigma(sigma: float):
    if not sigma > 0:
        raise NonpositiveSigma(sigma)


def smooth(flow: ModularFlow, a, sigma: float, z: complex = 0) -> np.ndarray:
    """
    The Gaussian-smoothed element

        a_{sigma,z} = int alpha_t(a) exp(-(t-z)^2/sigma^2) dt
                      / (sqrt(pi) sigma)

    in closed form: entry (j, k) in the eigenbasis is multiplied by
    ``exp(iz w) exp(-sigma^2 w^2 / 4)`` with ``w = E_j - E_k``.

    Raises:
        NonpositiveSigma: sigma <= 0.
    """
    _require_sigma(sigma)
    w = flow.frequencies
    multiplier = np.exp(1j * z * w - sigma**2 * w**2 / 4)
    return flow.multiply_in_eigenbasis(a, multiplier, "smooth")


def smooth_quadrature(
    flow: ModularFlow,
    a,
    sigma: float,
    z: complex = 0,
    nodes: int = settings.QUADRATURE_NODES,
) -> np.ndarray:
    """
    ``a_{sigma,z}`` by Gauss-Hermite quadrature on the contour ``t = z +
    sigma x``: ``pi^(-1/2) sum_k w_k alpha_{z + sigma x_k}(a)``.
    """
    _require_sigma(sigma)
    a = flow._check(a, "smooth_quadrature")
    x, w = hermgauss(nodes)
    total = np.zeros_like(a)
    for xk, wk in zip(x, w):
        total = total + wk * evolve(flow, a, z + sigma * xk)
    return total / math.sqrt(math.pi)


def smooth_riemann(
    flow: ModularFlow,
    a,
    sigma: float,
    z: complex = 0,
    half_width: Optional[float] = None,
    steps: int = 2001,
) -> np.ndarray:
    """
    ``a_{sigma,z}`` from the defining integral truncated to the window
    ``|t - Re z| <= half_width`` and evaluated with the trapezoidal rule.
    Converges to :func:`smooth` as the window grows and the step shrinks.
    """
    _require_sigma(sigma)
    if half_width is None:
        half_width = 8 * sigma
    center = float(np.real(z))
    t = np.linspace(center - half_width, center + half_width, steps)
    w = flow.frequencies
    weight = np.exp(-((t - z) ** 2) / sigma**2)
    integrand = weight[:, None, None] * np.exp(
        1j * t[:, None, None] * w[None, :, :]
    )
    multiplier = scipy.integrate.trapezoid(integrand, t, axis=0) / (
        math.sqrt(math.pi) * sigma
    )
    return flow.multiply_in_eigenbasis(a, multiplier, "smooth_riemann")
