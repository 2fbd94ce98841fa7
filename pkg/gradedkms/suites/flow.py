import numpy as np

from gradedkms import settings
from gradedkms.flow import (
    check_condition,
    evolve,
    graded_kms_residual,
    growth_probe,
    kms_residual,
    smooth,
    smooth_quadrature,
    smooth_riemann,
    strip_boundary_residual,
    strip_function,
    taylor_residual,
)
from gradedkms.linalg import frobenius, operator_norm
from gradedkms.suites.base import CheckSuite

GROUP_TIMES = ((0.4, 0.5j), (-1.1 + 0.3j, 2.0), (0.25j, -0.75j))
SMOOTHING_CENTERS = (0, 0.5j, -0.8 + 0.25j)


class FlowSuite(CheckSuite):
    """
    The modular flow of the density and the graded-KMS condition of the
    supertrace, on the real line, the strip boundary and under smoothing.
    """

    name = "flow"

    def setup(self):
        config = self.scenario.config
        self.flow = self.scenario.flow()
        check_condition(
            self.flow.condition, config.allow_ill_conditioned, "flow"
        )
        self.context.flow = self.flow
        self.omega = self.scenario.omega
        self.sigma = settings.DEFAULT_SIGMA
        self.observe("condition", self.flow.condition)
        self.observe("mismatched", self.scenario.flow_rho is not None)

    def checks(self):
        elements = self.context.elements
        pairs = self.context.pairs
        times = settings.FLOW_TIMES
        return [
            ("graded_kms", self.graded_kms, len(pairs)),
            ("kms_modulus", self.kms_modulus, len(pairs)),
            ("invariance", self.invariance, len(elements) * len(times)),
            ("group_law", self.group_law, len(elements)),
            ("automorphism", self.automorphism, len(pairs)),
            ("gamma_commutes", self.gamma_commutes, len(elements)),
            ("strip_boundary", self.strip_boundary, len(pairs)),
            ("entire", self.entire, len(pairs)),
            ("smoothing", self.smoothing, len(elements)),
            ("growth", self.growth, 1),
        ]

    def _scaled(self, a) -> float:
        return (operator_norm(a) or 1.0) * max(1.0, self.flow.condition)

    def graded_kms(self) -> float:
        A = self.scenario.A
        return max(
            graded_kms_residual(self.omega, self.flow, A, a, b)
            for a, b in self.context.pairs
        )

    def kms_modulus(self) -> float:
        """
        The modulus ``|omega|`` satisfies the ungraded condition.
        """
        jd = self.context.jd
        return max(
            kms_residual(jd.modulus, self.flow, a, b)
            for a, b in self.context.pairs
        )

    def invariance(self) -> float:
        """
        ``omega(alpha_t(a)) = omega(a)`` and ``omega(gamma(a)) =
        omega(a)``.
        """
        A = self.scenario.A
        norm = self.omega.norm or 1.0
        worst = 0.0
        for a in self.context.elements:
            value = self.omega(a)
            scale = (operator_norm(a) or 1.0) * norm
            worst = max(worst, abs(self.omega(A.gamma(a)) - value) / scale)
            for t in settings.FLOW_TIMES:
                worst = max(
                    worst,
                    abs(self.omega(evolve(self.flow, a, t)) - value) / scale,
                )
        return worst

    def group_law(self) -> float:
        worst = 0.0
        for a in self.context.elements:
            scale = self._scaled(a) ** 2
            for z, w in GROUP_TIMES:
                twice = evolve(self.flow, evolve(self.flow, a, w), z)
                once = evolve(self.flow, a, z + w)
                worst = max(worst, frobenius(twice - once) / scale)
        return worst

    def automorphism(self) -> float:
        """
        Real-time evolution is a *-automorphism.
        """
        worst = 0.0
        for a, b in self.context.pairs:
            scale = (operator_norm(a) * operator_norm(b)) or 1.0
            for t in settings.FLOW_TIMES[:2]:
                ea = evolve(self.flow, a, t)
                eb = evolve(self.flow, b, t)
                worst = max(
                    worst,
                    frobenius(evolve(self.flow, a @ b, t) - ea @ eb) / scale,
                    frobenius(
                        evolve(self.flow, a.conj().T, t) - ea.conj().T
                    )
                    / (operator_norm(a) or 1.0),
                )
        return worst

    def gamma_commutes(self) -> float:
        A = self.scenario.A
        worst = 0.0
        for a in self.context.elements:
            for z in (1.0, 1j, 0.3 - 0.5j):
                diff = evolve(self.flow, A.gamma(a), z) - A.gamma(
                    evolve(self.flow, a, z)
                )
                worst = max(worst, frobenius(diff) / self._scaled(a))
        return worst

    def strip_boundary(self) -> float:
        """
        Both boundary values of ``F_{a,b}`` on the strip.
        """
        A = self.scenario.A
        worst = 0.0
        for a, b in self.context.pairs:
            for t in settings.FLOW_TIMES:
                worst = max(
                    worst,
                    strip_boundary_residual(self.omega, self.flow, A, a, b, t),
                )
        return worst

    def entire(self) -> float:
        """
        ``F_{a,b}`` agrees with its Taylor polynomial across the strip.
        """
        pairs = self.context.pairs
        step = max(1, len(pairs) // 32)
        return max(
            taylor_residual(
                self.omega, self.flow, a, b, -0.5 + 0.1j, 0.5 + 0.9j
            )
            for a, b in pairs[::step]
        )

    def smoothing(self) -> dict:
        """
        The closed form of ``a_{sigma,z}`` against quadrature and a
        truncated Riemann sum, and the shift ``alpha_w(a_{sigma,z}) =
        a_{sigma,z+w}``.
        """
        out = dict(quadrature=0.0, riemann=0.0, shift=0.0)
        sigma = self.sigma
        for a in self.context.elements:
            scale = self._scaled(a)
            for z in SMOOTHING_CENTERS:
                exact = smooth(self.flow, a, sigma, z)
                out["quadrature"] = max(
                    out["quadrature"],
                    frobenius(
                        smooth_quadrature(self.flow, a, sigma, z) - exact
                    )
                    / scale,
                )
                out["shift"] = max(
                    out["shift"],
                    frobenius(
                        evolve(self.flow, exact, 0.5j)
                        - smooth(self.flow, a, sigma, z + 0.5j)
                    )
                    / scale,
                )
            exact = smooth(self.flow, a, sigma)
            out["riemann"] = max(
                out["riemann"],
                frobenius(smooth_riemann(self.flow, a, sigma) - exact) / scale,
            )
        return out

    def growth(self) -> float:
        """
        ``F_{a,b}`` obeys a polynomial bound on the strip with a degree
        below the cap. The degree itself is recorded.
        """
        a, b = self.context.pairs[-1]
        estimate = growth_probe(
            lambda z: strip_function(self.omega, self.flow, a, b, z),
            t_range=64.0,
            s_samples=5,
        )
        self.observe("growth_degree", estimate.N)
        self.observe("growth_constant", estimate.C)
        capped = estimate.N >= settings.GROWTH_MAX_DEGREE
        return 0.0 if estimate.holds() and not capped else 1.0
