import numpy as np

from gradedkms import settings
from gradedkms.algebra import Functional
from gradedkms.jordan import (
    cauchy_schwarz_report,
    grading_from_functional,
    jordan_decompose,
    orthogonality_witness,
    sakai_links,
)
from gradedkms.linalg import frobenius, trace_norm
from gradedkms.suites.base import CheckSuite


class JordanSuite(CheckSuite):
    """
    The Jordan decomposition of omega, its modulus and the grading element
    ``g' = chi_+ - chi_-``.
    """

    name = "jordan"

    def setup(self):
        self.omega = self.scenario.omega
        self.jd = jordan_decompose(self.omega)
        self.context.jd = self.jd
        self.norm = self.omega.norm or 1.0
        self.observe("faithful", self.jd.is_faithful)
        self.observe("support_rank", self.jd.support_rank)
        self.observe("norm", self.omega.norm)

    def checks(self):
        elements = self.context.elements
        return [
            ("decomposition", self.decomposition, 1),
            ("trace_norm", self.trace_norm_additivity, 1),
            ("modulus_kernel", self.modulus_kernel, 1),
            ("cauchy_schwarz", self.cauchy_schwarz, len(elements)),
            ("witness", self.witness, 1),
            ("grading_element", self.grading_element, len(elements)),
            ("links", self.links, len(elements)),
            ("support_even", self.support_even, 2),
            ("negation", self.negation, 1),
        ]

    def decomposition(self) -> float:
        """
        ``T = T_+ - T_-`` with ``T_pm >= 0``, ``T_+ T_- = 0`` and
        orthogonal support projections.
        """
        jd = self.jd
        worst = frobenius(jd.T_plus - jd.T_minus - self.omega.T)
        worst += frobenius(jd.T_plus @ jd.T_minus)
        for t in (jd.T_plus, jd.T_minus):
            h = (t + t.conj().T) / 2
            worst += max(0.0, -float(np.linalg.eigvalsh(h)[0]))
        for chi in (jd.chi_plus, jd.chi_minus):
            worst += frobenius(chi @ chi - chi)
        worst += frobenius(jd.chi_plus @ jd.chi_minus)
        return worst / self.norm

    def trace_norm_additivity(self) -> float:
        jd = self.jd
        parts = trace_norm(jd.T_plus) + trace_norm(jd.T_minus)
        return abs(self.omega.norm - parts) / self.norm

    def modulus_kernel(self) -> float:
        """
        For the supertrace ``|g rho| = rho``, and the modulus keeps the norm.
        """
        jd = self.jd
        rho = self.scenario.rho
        mod = Functional(T=jd.rho)
        return (
            trace_norm(jd.rho - rho) / trace_norm(rho)
            + abs(mod.norm - self.omega.norm) / self.norm
        )

    def cauchy_schwarz(self) -> float:
        report = cauchy_schwarz_report(self.omega, self.context.elements)
        self.observe(
            "cauchy_schwarz_unsquared_violations",
            report.unsquared_violations,
        )
        return max(0.0, -report.min_slack)

    def witness(self) -> float:
        cert = orthogonality_witness(self.jd, settings.DEFAULT_TOLERANCE)
        return max(cert.plus_defect, cert.minus_defect) / self.norm

    def grading_element(self) -> float:
        return grading_from_functional(
            self.jd, self.scenario.A, self.context.elements
        )

    def links(self) -> float:
        return max(sakai_links(self.omega, self.jd, self.context.elements))

    def support_even(self) -> float:
        A = self.scenario.A
        return max(
            A.parity_residual(self.jd.chi_plus),
            A.parity_residual(self.jd.chi_minus),
        )

    def negation(self) -> float:
        """
        The decomposition of ``-omega`` swaps the parts.
        """
        swapped = jordan_decompose(Functional(T=-self.omega.T))
        expected = self.jd.negated()
        return (
            frobenius(swapped.T_plus - expected.T_plus)
            + frobenius(swapped.T_minus - expected.T_minus)
        ) / self.norm
