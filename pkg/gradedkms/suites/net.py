import numpy as np

from gradedkms.linalg import (
    GradedKmsError,
    frobenius,
    matrix_units,
    partial_trace,
)
from gradedkms.net import (
    flow_preserves_regions,
    local_gns_structure,
    local_modulus_probe,
    local_samples,
    product_discrepancy,
    region_graded_kms,
    restriction_residual,
)
from gradedkms.suites.base import CheckSuite

# regions up to this dimension are sampled with every matrix unit
REGION_UNIT_DIM = 6
REGION_SAMPLES = 8


class NetSuite(CheckSuite):
    """
    The chain of sites: restrictions to the prefix regions, isotony, the
    local moduli and the region structure in the global GNS space.
    """

    name = "net"

    def setup(self):
        self.net = self.scenario.net
        self.product = self.net.is_product
        self.observe("sites", list(self.net.site_dims))
        self.observe("product", self.product)

    def checks(self):
        m = self.net.m
        checks = [
            ("restriction", self.restriction, m),
            ("isotony", self.isotony, m - 1),
            ("positivity", self.positivity, m),
            ("local_gns", self.local_gns, m),
            ("local_modulus", self.local_modulus, m * (m - 1) // 2),
            ("flow_regions", self.flow_regions, m - 1),
        ]
        if self.product:
            checks.append(("region_kms", self.region_kms, m))
        else:
            self.region_kms_observed()
        return checks

    def region_samples(self, k: int) -> list:
        d = self.net.region_dim(k)
        if d <= REGION_UNIT_DIM:
            return list(matrix_units(d))
        seed = self.scenario.config.seed
        rest = self.net.dim // d
        return [
            partial_trace(x, self.net.site_dims, keep=k) / rest
            for x in local_samples(self.net, REGION_SAMPLES, k=k, seed=seed)
        ]

    def restriction(self) -> float:
        return max(
            restriction_residual(self.net, k, self.region_samples(k))
            for k in range(1, self.net.m + 1)
        )

    def isotony(self) -> float:
        """
        ``A(O_k) x 1`` lies inside ``A(O_k+1)``.
        """
        net = self.net
        worst = 0.0
        for k in range(1, net.m):
            grow = net.site_dims[k]
            for a in self.region_samples(k):
                bigger = np.kron(a, np.eye(grow))
                worst = max(
                    worst,
                    frobenius(net.embed(a, k) - net.embed(bigger, k + 1))
                    / (frobenius(a) or 1.0),
                )
        return worst

    def positivity(self) -> float:
        """
        Restrictions of ``|omega|`` stay positive and even.
        """
        net = self.net
        rho = self.context.jd.rho
        worst = 0.0
        for k in range(1, net.m + 1):
            sigma = partial_trace(rho, net.site_dims, keep=k)
            h = (sigma + sigma.conj().T) / 2
            values = np.linalg.eigvalsh(h)
            worst = max(
                worst,
                -float(values[0]) / (float(values[-1]) or 1.0),
                net.region_algebra(k).parity_residual(sigma),
            )
        return worst

    def local_gns(self) -> dict:
        """
        Region subspaces are nested and share the global vacuum; the
        largest region reproduces the global projections. Agreement and
        monotonicity of the region projections are recorded.
        """
        report = local_gns_structure(self.net)
        self.observe("region_dimensions", report.dimensions)
        self.observe("region_projection_defects", report.projection_defects)
        self.observe("agreement", report.agreement)
        self.observe("monotonicity", report.monotonicity)
        self.observe("nondecreasing", report.monotonicity >= 0)
        return {
            "containment": report.containment,
            "vacuum": report.vacuum,
            "global": report.global_agreement,
        }

    def local_modulus(self):
        """
        The discrepancy table is recorded; for a product density it must
        match its closed form.
        """
        table = local_modulus_probe(self.net)
        self.observe(
            "discrepancy",
            {f"{k}-{k2}": value for (k, k2), value in table.items()},
        )
        if not self.product:
            return None
        return max(
            (
                abs(value - product_discrepancy(self.net, k, k2))
                for (k, k2), value in table.items()
            ),
            default=0.0,
        )

    def flow_regions(self):
        result = flow_preserves_regions(self.net)
        self.observe("flow_preserves_regions", result["preserves"])
        self.observe("flow_region_residual", result["residual"])
        if not self.product:
            return None
        return result["residual"]

    def region_kms(self) -> float:
        return max(
            region_graded_kms(self.net, k, self.region_samples(k))
            for k in range(1, self.net.m + 1)
        )

    def region_kms_observed(self):
        values = {}
        for k in range(1, self.net.m + 1):
            try:
                values[str(k)] = region_graded_kms(
                    self.net, k, self.region_samples(k)
                )
            except GradedKmsError as e:
                self.logger.debug(f"region {k}: {e}")
                values[str(k)] = None
        self.observe("region_kms", values)
