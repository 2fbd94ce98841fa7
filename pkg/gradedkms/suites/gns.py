from gradedkms.gns import (
    build_gns,
    commutant_projections,
    compatibility_residual,
    double_commutant_defect,
    gns_residuals,
    identity_residuals,
    kernel_swap_residuals,
    projection_residuals,
    subspace_split,
)
from gradedkms.suites.base import CheckSuite


class GnsSuite(CheckSuite):
    """
    The GNS space of ``|omega|``, the commutant projections ``p_pm`` and
    the four subspaces ``H^0_pm``, ``H^1_pm``.
    """

    name = "gns"

    def setup(self):
        ctx = self.context
        A = self.scenario.A
        ctx.gns = build_gns(A, ctx.jd.modulus)
        ctx.proj = commutant_projections(ctx.gns, ctx.jd)
        ctx.split = subspace_split(ctx.gns, A, ctx.jd)
        self.observe("N", ctx.gns.N)
        self.observe("rank", ctx.gns.rank)
        self.observe("subspaces", ctx.split.dimensions())

    def checks(self):
        samples = len(self.context.gns_samples)
        elements = len(self.context.elements)
        units = len(self.context.units)
        return [
            ("contract", self.contract, samples),
            ("projections", self.projections, units),
            ("subspaces", self.subspaces, 4),
            ("compatibility", self.compatibility, samples),
            ("identities", self.identities, elements),
            ("kernel_swap", self.kernel_swap, elements),
            ("double_commutant", self.double_commutant, units),
        ]

    def contract(self) -> dict:
        return gns_residuals(self.context.gns, self.context.gns_samples)

    def projections(self) -> dict:
        ctx = self.context
        return projection_residuals(ctx.gns, ctx.jd, ctx.proj)

    def subspaces(self) -> dict:
        split = self.context.split
        return {
            "orthogonality": split.orthogonality_defect(),
            "completeness": split.completeness_defect(),
        }

    def compatibility(self) -> float:
        ctx = self.context
        return compatibility_residual(
            ctx.gns, ctx.jd, ctx.proj, ctx.gns_samples
        )

    def identities(self) -> dict:
        ctx = self.context
        return identity_residuals(
            ctx.jd, self.scenario.A, ctx.elements, partners=ctx.gns_samples
        )

    def kernel_swap(self) -> dict:
        ctx = self.context
        out = kernel_swap_residuals(ctx.jd, self.scenario.A, ctx.elements)
        self.observe("kernel_swap_qualified", int(out.pop("qualified")))
        return out

    def double_commutant(self):
        """
        ``pi(A) = pi(A)''``; skipped above ``COMMUTANT_MAX_DIM``.
        """
        return double_commutant_defect(self.context.gns)
