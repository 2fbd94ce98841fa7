import numpy as np

from gradedkms.algebra import compatibility_margins
from gradedkms.linalg import (
    commutant_basis,
    frobenius,
    hermitian_eigendecompose,
    matrix_power,
    operator_norm,
)
from gradedkms.suites.base import CheckSuite

# exponents of the group-law check for rho^z
POWER_EXPONENTS = ((0.3 - 0.2j, -0.7 + 0.4j), (0.5j, -1.5j), (1.0, -1.0))


class AlgebraSuite(CheckSuite):
    """
    The numeric kernel and the graded algebra: parity decomposition, the
    grading automorphism, the eigensystem and powers of the density, and
    the supertrace functional.
    """

    name = "algebra"

    def setup(self):
        A = self.scenario.A
        self.omega = self.scenario.omega
        self.eig = hermitian_eigendecompose(self.scenario.rho, A.signs)
        self.observe("n", A.n)
        self.observe("n_plus", A.n_plus)
        self.observe("n_minus", A.n_minus)
        self.observe("condition", self.eig.condition)

    def checks(self):
        elements = self.context.elements
        pairs = self.context.pairs
        return [
            ("parity", self.parity, len(elements)),
            ("gamma_automorphism", self.gamma_automorphism, len(pairs)),
            ("eigensystem", self.eigensystem, 1),
            ("powers", self.powers, len(POWER_EXPONENTS)),
            ("density_even", self.density_even, 1),
            ("supertrace_kernel", self.supertrace_kernel, 1),
            ("compatibility", self.compatibility, 1),
            ("grading_commutant", self.grading_commutant, 1),
        ]

    def parity(self) -> float:
        A = self.scenario.A
        worst = 0.0
        for a in self.context.elements:
            scale = frobenius(a) or 1.0
            even, odd = A.parity_split(a)
            worst = max(
                worst,
                frobenius(even + odd - a) / scale,
                frobenius(A.gamma(even) - even) / scale,
                frobenius(A.gamma(odd) + odd) / scale,
            )
        return worst

    def gamma_automorphism(self) -> float:
        A = self.scenario.A
        worst = 0.0
        for a, b in self.context.pairs:
            scale = (operator_norm(a) * operator_norm(b)) or 1.0
            worst = max(
                worst,
                frobenius(A.gamma(a @ b) - A.gamma(a) @ A.gamma(b)) / scale,
                frobenius(A.gamma(a.conj().T) - A.gamma(a).conj().T)
                / (operator_norm(a) or 1.0),
            )
        return worst

    def eigensystem(self) -> float:
        rho = self.scenario.rho
        v = self.eig.eigenvectors
        return frobenius(rho - self.eig.reconstruct()) / frobenius(
            rho
        ) + frobenius(v.conj().T @ v - np.eye(self.eig.dim))

    def powers(self) -> float:
        """
        ``rho^z rho^w = rho^(z+w)`` and unitarity of ``rho^(it)``.
        """
        rho = self.scenario.rho
        worst = 0.0
        for z, w in POWER_EXPONENTS:
            joint = matrix_power(rho, z + w, self.eig)
            product = matrix_power(rho, z, self.eig) @ matrix_power(
                rho, w, self.eig
            )
            worst = max(
                worst, frobenius(product - joint) / (frobenius(joint) or 1.0)
            )
        u = matrix_power(rho, 0.7j, self.eig)
        return worst + frobenius(u.conj().T @ u - np.eye(self.eig.dim))

    def density_even(self) -> float:
        return self.scenario.A.parity_residual(self.scenario.rho)

    def supertrace_kernel(self) -> float:
        A = self.scenario.A
        rho = self.scenario.rho
        T = self.omega.T
        return (
            frobenius(T - A.g @ rho) / frobenius(rho)
            + self.omega.self_adjoint_residual()
        )

    def compatibility(self) -> float:
        lowest, highest = compatibility_margins(
            self.scenario.A, self.omega.T
        )
        self.observe("compatibility_margins", [lowest, highest])
        return max(0.0, -lowest, highest)

    def grading_commutant(self) -> float:
        """
        The commutant of ``{g}`` is the even subalgebra, of dimension
        ``n_+^2 + n_-^2``.
        """
        A = self.scenario.A
        basis = commutant_basis([A.g])
        expected = A.n_plus**2 + A.n_minus**2
        worst = max(
            (A.parity_residual(x) for x in basis), default=0.0
        )
        return worst + abs(len(basis) - expected)
