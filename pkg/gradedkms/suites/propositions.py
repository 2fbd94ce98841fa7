import numpy as np

from gradedkms import settings
from gradedkms.gns import (
    GradedRepresentation,
    HypothesisViolation,
    commutant_check,
    conjugate_representation,
    conjugation_residuals,
    intertwiner,
    mapping_table,
    modular_conjugation,
    modular_operator,
    modular_operator_residuals,
    phase_rebased_conjugation,
    representation_residuals,
    separating_check,
)
from gradedkms.linalg import frobenius
from gradedkms.net import proposition4_suite, unbounded_kms_residuals
from gradedkms.scenarios import PHASE_STREAM
from gradedkms.suites.base import CheckSuite
from gradedkms.utils import make_rng


class ConjugationSuite(CheckSuite):
    """
    The modular conjugation J, the commutant ``J pi(A) J`` and the modular
    operator Delta.
    """

    name = "prop1"

    def setup(self):
        ctx = self.context
        ctx.J = modular_conjugation(ctx.gns, ctx.flow)
        self.mod = modular_operator(ctx.gns, ctx.flow, ctx.J)

    def checks(self):
        samples = len(self.context.gns_samples)
        units = len(self.context.units)
        return [
            ("conjugation", self.conjugation, samples),
            ("commutant", self.commutant, samples),
            ("separating", self.separating, units),
            ("modular_operator", self.modular_operator, samples),
        ]

    def conjugation(self) -> dict:
        ctx = self.context
        return conjugation_residuals(
            ctx.gns, ctx.flow, ctx.J, ctx.split, ctx.gns_samples
        )

    def commutant(self) -> dict:
        ctx = self.context
        return commutant_check(ctx.gns, ctx.J, ctx.gns_samples)

    def separating(self) -> dict:
        return separating_check(self.context.gns, self.context.J)

    def modular_operator(self) -> dict:
        ctx = self.context
        return modular_operator_residuals(
            ctx.gns, ctx.flow, self.mod, ctx.gns_samples
        )


class ConjugateRepresentationSuite(CheckSuite):
    """
    The unitary ``U = K J`` and the graded representation
    ``pi'(a) = U pi(a) U*``.
    """

    name = "prop2"

    def setup(self):
        ctx = self.context
        ctx.conj = conjugate_representation(ctx.gns, ctx.J, ctx.jd)

    def checks(self):
        samples = len(self.context.gns_samples)
        return [
            ("unitary", self.unitary, 1),
            ("representation", self.representation, samples),
            ("mapping", self.mapping, samples),
        ]

    def unitary(self) -> float:
        conj = self.context.conj
        N = conj.U.shape[0]
        return frobenius(conj.U_star @ conj.U - np.eye(N)) + frobenius(
            conj.U_star - conj.U.conj().T
        )

    def representation(self) -> dict:
        ctx = self.context
        return representation_residuals(
            ctx.conj, ctx.proj, ctx.jd, ctx.gns_samples
        )

    def mapping(self) -> dict:
        ctx = self.context
        return mapping_table(ctx.gns, ctx.split, ctx.conj.U, ctx.gns_samples)


class UniquenessSuite(CheckSuite):
    """
    Two graded representations with the same graded and ungraded
    expectations are unitarily equivalent. The second one is built from a
    conjugation in a randomly rephased basis.
    """

    name = "prop3"

    def setup(self):
        ctx = self.context
        gns = ctx.gns
        rng = make_rng(self.scenario.config.seed, PHASE_STREAM)
        phases = np.exp(2j * np.pi * rng.random(gns.N))
        K = phase_rebased_conjugation(gns.N, phases)
        self.second = conjugate_representation(gns, ctx.J, ctx.jd, K=K)

    def checks(self):
        samples = len(self.context.gns_samples)
        return [
            ("intertwiner", self.intertwiner, samples),
            ("negative_control", self.negative_control, 2),
        ]

    def intertwiner(self) -> dict:
        ctx = self.context
        found = intertwiner(
            ctx.conj.rep, self.second.rep, samples=ctx.gns_samples
        )
        return found.residuals

    def negative_control(self) -> float:
        """
        A rescaled vacuum and a flipped grading must both be rejected.
        """
        ctx = self.context
        first = ctx.conj.rep
        bad = [
            GradedRepresentation(
                gns=ctx.gns,
                W=first.W,
                g_prime=first.g_prime,
                vacuum_scale=1.1,
            ),
            GradedRepresentation(
                gns=ctx.gns,
                W=first.W,
                g_prime=-first.g_prime,
            ),
        ]
        accepted = 0
        for rep in bad:
            try:
                intertwiner(first, rep)
            except HypothesisViolation as e:
                self.logger.debug(f"negative control rejected: {e}")
            else:
                accepted += 1
        return float(accepted)


class UnboundedKmsSuite(CheckSuite):
    """
    The graded-KMS claims for smoothed elements: modulus KMS on the strip,
    the vanishing identities, the kernel swap, positivity of omega_pm and
    polynomial growth. On a chain the samples are local elements of the
    largest proper region.
    """

    name = "prop4"

    def setup(self):
        config = self.scenario.config
        self.budget = min(
            settings.PROPOSITION4_BUDGET, len(self.context.elements)
        )
        self.observe(
            "uniqueness",
            "the strip function is checked for existence and boundary "
            "values only",
        )
        self.seed = config.seed

    def checks(self):
        return [("strip", self.strip, self.budget)]

    def strip(self) -> dict:
        net = self.scenario.net
        if net is not None:
            out = proposition4_suite(net, self.budget, seed=self.seed)
        else:
            samples = self.context.elements[-self.budget:]
            out = unbounded_kms_residuals(
                self.scenario.A, self.scenario.omega, samples
            )
        degree = int(out.pop("growth_degree"))
        self.observe("growth_degree", degree)
        out["growth"] = float(degree >= settings.GROWTH_MAX_DEGREE)
        return out
