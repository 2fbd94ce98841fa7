"""
A finite chain of graded sites and its increasing net of prefix regions.

Region ``O_k`` holds the first k sites; its algebra is ``A(O_k) =
M(site_1) x ... x M(site_k) x 1``. The global grading is the ordinary
tensor product of the site gradings.
"""

import logging
from dataclasses import dataclass, field
from math import prod
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from gradedkms import settings
from gradedkms.algebra import (
    Functional,
    GradedAlgebra,
    require_even_density,
    supertrace_functional,
)
from gradedkms.flow import (
    ModularFlow,
    evolve,
    graded_kms_residual,
    growth_probe,
    kms_scale,
    smooth,
    strip_boundary_residual,
    strip_function,
)
from gradedkms.gns import (
    GnsSpace,
    build_gns,
    commutant_projections,
    identity_residuals,
    kernel_swap_residuals,
)
from gradedkms.jordan import JordanData, jordan_decompose
from gradedkms.linalg import (
    DimensionMismatch,
    GradedKmsError,
    frobenius,
    matrix_units,
    operator_norm,
    partial_trace,
    trace_norm,
)
from gradedkms.utils import complex_gaussian, make_rng

logger = logging.getLogger(__name__)


class RegionOutOfRange(GradedKmsError):
    def __init__(self, k: int, m: int):
        self.k = k
        self.m = m
        super().__init__(f"region {k} is out of range 1..{m}")


class BudgetZero(GradedKmsError):
    """
    Raised when a suite is asked to run without samples.
    """

    def __init__(self, operation: str):
        self.operation = operation
        super().__init__(f"{operation}: sample budget must be positive")


@dataclass(frozen=True, eq=False)
class LocalNet:
    site_dims: tuple[int, ...]
    site_gradings: tuple[np.ndarray, ...]
    """ Diagonal of the grading of every site. """
    rho: np.ndarray
    """ Global even positive density. """
    A: GradedAlgebra = field(init=False)
    """ The global algebra with grading ``kron(g_1, ..., g_m)``. """

    def __post_init__(self):
        signs = np.array([1])
        for s in self.site_gradings:
            signs = np.kron(signs, s)
        object.__setattr__(self, "A", GradedAlgebra(signs=signs))

    @property
    def m(self) -> int:
        return len(self.site_dims)

    @property
    def dim(self) -> int:
        return prod(self.site_dims)

    @property
    def global_g(self) -> np.ndarray:
        return self.A.g

    @property
    def global_T(self) -> np.ndarray:
        """ The supertrace kernel ``g rho``. """
        return supertrace_functional(self.A, self.rho).T

    @property
    def omega(self) -> Functional:
        return Functional(T=self.global_T)

    def check_region(self, k: int):
        if not 1 <= k <= self.m:
            raise RegionOutOfRange(k, self.m)

    def region_dim(self, k: int) -> int:
        self.check_region(k)
        return prod(self.site_dims[:k])

    def region_algebra(self, k: int) -> GradedAlgebra:
        self.check_region(k)
        signs = np.array([1])
        for s in self.site_gradings[:k]:
            signs = np.kron(signs, s)
        return GradedAlgebra(signs=signs)

    def embed(self, a, k: int) -> np.ndarray:
        """ ``a x 1`` for ``a`` in the algebra of region k. """
        rest = self.dim // self.region_dim(k)
        return np.kron(np.asarray(a, dtype=complex), np.eye(rest))

    @property
    def is_product(self) -> bool:
        return product_residual(self.rho, self.site_dims) <= (
            settings.CONSISTENCY_RTOL
        )


def site_marginal(rho, site_dims: Sequence[int], k: int) -> np.ndarray:
    """
    Reduced density of site k (0-based) with every other site traced out.
    """
    dims = list(site_dims)
    m = len(dims)
    t = np.asarray(rho).reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:m])
    cols = list(rows)
    cols[k] = letters[m]
    spec = "".join(rows) + "".join(cols) + "->" + rows[k] + cols[k]
    return np.einsum(spec, t)


def product_residual(rho, site_dims: Sequence[int]) -> float:
    """
    ``||rho - (x_k rho_k) / tr(rho)^(m-1)||_F / ||rho||_F`` with ``rho_k``
    the site marginals; zero exactly for product densities.
    """
    rho = np.asarray(rho)
    total = np.trace(rho)
    product = np.array([[1.0 + 0j]])
    for k in range(len(site_dims)):
        product = np.kron(product, site_marginal(rho, site_dims, k))
    product = product / total ** (len(site_dims) - 1)
    return frobenius(rho - product) / (frobenius(rho) or 1.0)


def build_chain(
    site_dims: Sequence[int],
    site_gradings: Sequence[Sequence[int]],
    rho,
) -> LocalNet:
    """
    Raises:
        DimensionMismatch: fewer than two sites, a site of dimension below
            2, a grading of the wrong length, or a density of the wrong
            size.
        OddDensity: rho is not even for the product grading.
        SingularDensity: rho is not positive definite.
    """
    dims = tuple(int(d) for d in site_dims)
    if len(dims) < 2:
        raise DimensionMismatch("build_chain", len(dims), ">= 2 sites")
    if any(d < 2 for d in dims):
        raise DimensionMismatch("build_chain", dims, "site dims >= 2")
    gradings = tuple(np.asarray(s, dtype=int) for s in site_gradings)
    if tuple(g.size for g in gradings) != dims:
        raise DimensionMismatch(
            "build_chain", [g.size for g in gradings], dims
        )
    rho = np.asarray(rho, dtype=complex)
    net = LocalNet(site_dims=dims, site_gradings=gradings, rho=rho)
    require_even_density(net.A, rho, "build_chain")
    logger.debug(
        f"build_chain: sites={dims}, dim={net.dim}, "
        f"product={net.is_product}"
    )
    return net


def restrict(net: LocalNet, k: int) -> Functional:
    """
    The restriction of the global functional to ``A(O_k)``, with kernel
    the partial trace of the global kernel over the sites after k.

    Raises:
        RegionOutOfRange: k is not in 1..m.
    """
    net.check_region(k)
    return Functional(T=partial_trace(net.global_T, net.site_dims, keep=k))


def restriction_residual(net: LocalNet, k: int, samples) -> float:
    """
    ``max |tr(a T_k) - tr((a x 1) T)| / (||a|| ||T||_1)`` over samples of
    the region algebra.
    """
    local = restrict(net, k)
    omega = net.omega
    scale = omega.norm or 1.0
    worst = 0.0
    for a in samples:
        na = operator_norm(a) or 1.0
        diff = abs(local(a) - omega(net.embed(a, k)))
        worst = max(worst, diff / (na * scale))
    return worst


def local_modulus_probe(net: LocalNet) -> dict[tuple[int, int], float]:
    """
    For every pair of regions ``k < k2`` the discrepancy

        d = || |T_k| - R |T_k2| ||_1 / || R |T_k2| ||_1

    where R traces out the sites between k and k2.

    The table compares the modulus of a restriction with the restriction
    of the larger region's modulus. It is returned as measured.
    """
    moduli = {
        k: jordan_decompose(restrict(net, k)).rho
        for k in range(1, net.m + 1)
    }
    table = {}
    for k in range(1, net.m + 1):
        for k2 in range(k + 1, net.m + 1):
            reduced = partial_trace(
                moduli[k2], net.site_dims[:k2], keep=k
            )
            scale = trace_norm(reduced) or 1.0
            table[(k, k2)] = trace_norm(moduli[k] - reduced) / scale
    return table


def product_discrepancy(net: LocalNet, k: int, k2: int) -> float:
    """
    Closed form of the :func:`local_modulus_probe` entry for a product
    density: ``1 - prod |c_j|`` over the sites ``k < j <= k2``, with
    ``c_j = tr(g_j rho_j) / tr(rho_j)``.
    """
    net.check_region(k)
    net.check_region(k2)
    value = 1.0
    for j in range(k, k2):
        rho_j = site_marginal(net.rho, net.site_dims, j)
        g_j = np.diag(net.site_gradings[j])
        value *= abs(np.trace(g_j @ rho_j) / np.trace(rho_j))
    return 1.0 - value


def flow_preserves_regions(net: LocalNet, t: float = 1.0) -> dict:
    """
    Whether ``alpha_t`` of the global modulus flow maps every proper
    region algebra into itself, tested on matrix units of each region.
    """
    jd = jordan_decompose(net.omega)
    flow = ModularFlow.from_density(jd.rho, sectors=net.A.signs)
    worst = 0.0
    for k in range(1, net.m):
        rest = net.dim // net.region_dim(k)
        for e in matrix_units(net.region_dim(k)):
            x = evolve(flow, net.embed(e, k), t)
            kept = partial_trace(x, net.site_dims, keep=k) / rest
            worst = max(worst, frobenius(x - net.embed(kept, k)))
    return {
        "residual": worst,
        "preserves": worst <= settings.CONSISTENCY_RTOL,
    }


def region_graded_kms(net: LocalNet, k: int, samples) -> float:
    """
    Graded-KMS residual of the restricted functional on region k with the
    flow of the reduced density ``tr_{>k} rho``.

    The reduced density stays positive definite when the restricted
    kernel vanishes, as it does for a balanced site at beta = 0.
    """
    local = restrict(net, k)
    A = net.region_algebra(k)
    reduced = partial_trace(net.rho, net.site_dims, keep=k)
    flow = ModularFlow.from_density(reduced, sectors=A.signs)
    samples = list(samples)
    return max(
        graded_kms_residual(local, flow, A, a, b)
        for a in samples
        for b in samples
    )


def _orth(columns: np.ndarray) -> np.ndarray:
    return scipy.linalg.orth(columns, rcond=settings.GNS_NULL_RTOL)


@dataclass(frozen=True, eq=False)
class RegionStructure:
    k: int
    projector: np.ndarray
    """ Projector on ``H(O_k) = span pi(A(O_k)) Omega``. """
    Gamma: np.ndarray
    """ Operator on ``H(O_k)`` that reproduces the restricted functional. """
    Omega: np.ndarray

    @property
    def dim(self) -> int:
        return int(round(np.real(np.trace(self.projector))))

    @property
    def p_plus(self) -> np.ndarray:
        return (self.projector + self.Gamma) / 2

    @property
    def p_minus(self) -> np.ndarray:
        return (self.projector - self.Gamma) / 2

    def projection_defect(self) -> float:
        return max(
            frobenius(p @ p - p) for p in (self.p_plus, self.p_minus)
        )


@dataclass(frozen=True, eq=False)
class LocalGnsReport:
    gns: GnsSpace
    regions: list[RegionStructure]
    containment: float
    """ ``max ||(1 - P_k') P_k||`` over ``k < k'``; asserted zero. """
    agreement: float
    """ ``max ||(p_k'pm - p_kpm) P_k||``; recorded. """
    monotonicity: float
    """
    Most negative eigenvalue of ``p_k'pm - p_kpm`` over ``k < k'``;
    nonnegative when the nets are nondecreasing. Recorded.
    """
    vacuum: float
    """ Largest distance of ``Omega_{O_k}`` from the global vacuum. """
    global_agreement: float
    """ Distance of ``p_{O_m pm}`` from the global ``p_pm``. """

    @property
    def dimensions(self) -> list[int]:
        return [r.dim for r in self.regions]

    @property
    def projection_defects(self) -> list[float]:
        return [r.projection_defect() for r in self.regions]


def local_gns_structure(net: LocalNet) -> LocalGnsReport:
    """
    Region vacua ``Omega_{O_k} = eta(1)``, the subspaces ``H(O_k)`` and the
    region projections ``p_{O_k pm} = (P_k pm Gamma_k) / 2`` in the global
    GNS space of ``|omega|``.

    ``Gamma_k`` is right multiplication by ``Y x 1`` on ``H(O_k)`` with
    ``Y = T_k sigma_k^-1`` and ``sigma_k`` the restriction of the global
    modulus, so that ``<Omega, pi(a x 1) Gamma_k Omega> = omega(a x 1)``.
    """
    jd = jordan_decompose(net.omega)
    gns = build_gns(net.A, jd.modulus)
    proj = commutant_projections(gns, jd)
    N = gns.N
    eye = np.eye(N)
    regions = []
    for k in range(1, net.m + 1):
        d = net.region_dim(k)
        T_k = restrict(net, k).T
        sigma_k = partial_trace(jd.rho, net.site_dims, keep=k)
        Y = T_k @ np.linalg.pinv(sigma_k)
        units = list(matrix_units(d))
        src = np.column_stack([gns.vector(net.embed(e, k)) for e in units])
        dst = np.column_stack(
            [gns.vector(net.embed(e @ Y, k)) for e in units]
        )
        q = _orth(src)
        Gamma_k = dst @ np.linalg.pinv(src, rcond=settings.GNS_NULL_RTOL)
        regions.append(
            RegionStructure(
                k=k,
                projector=q @ q.conj().T,
                Gamma=Gamma_k,
                Omega=gns.vector(net.embed(np.eye(d), k)),
            )
        )

    containment = 0.0
    agreement = 0.0
    monotonicity = np.inf
    for i, small in enumerate(regions):
        for large in regions[i + 1:]:
            P = small.projector
            outside = frobenius((eye - large.projector) @ P)
            containment = max(containment, outside)
            for a, b in (
                (small.p_plus, large.p_plus),
                (small.p_minus, large.p_minus),
            ):
                agreement = max(agreement, frobenius((b - a) @ P))
                h = (b - a + (b - a).conj().T) / 2
                monotonicity = min(
                    monotonicity, float(np.linalg.eigvalsh(h)[0])
                )
    if not np.isfinite(monotonicity):
        monotonicity = 0.0
    vacuum = max(
        float(np.linalg.norm(r.Omega - gns.Omega)) for r in regions
    )
    top = regions[-1]
    global_agreement = max(
        frobenius(top.p_plus - proj.p_plus),
        frobenius(top.p_minus - proj.p_minus),
    )
    return LocalGnsReport(
        gns=gns,
        regions=regions,
        containment=containment,
        agreement=agreement,
        monotonicity=monotonicity,
        vacuum=vacuum,
        global_agreement=global_agreement,
    )


def local_samples(
    net: LocalNet, budget: int, k: Optional[int] = None, seed: int = 0
) -> list[np.ndarray]:
    """
    ``budget`` seeded Gaussian elements of ``A(O_k)`` embedded in the
    global algebra; k defaults to the largest proper region.
    """
    if k is None:
        k = net.m - 1
    d = net.region_dim(k)
    rng = make_rng(seed)
    return [
        net.embed(complex_gaussian(rng, (d, d)), k) for _ in range(budget)
    ]


def proposition4_suite(
    net: LocalNet,
    budget: int,
    sigma: float = settings.DEFAULT_SIGMA,
    seed: int = 0,
    times: Sequence[float] = (-1.5, 0.0, 0.75),
    samples: Optional[Sequence[np.ndarray]] = None,
) -> dict[str, float]:
    """
    Residuals of the unbounded graded-KMS claims on local elements:

    - ``kms_modulus``: ``G_{b,a}(t + i) = |omega|(alpha_t(a) b)`` for
      even/even and odd/odd pairs.
    - ``identities_even`` and ``identities_odd``: the vanishing identities
      on smoothed elements.
    - ``kernel_swap_even`` and ``kernel_swap_odd``: on ``a = x chi_-``.
    - ``positivity``: largest negative part of ``omega_pm(a* a)`` for
      smoothed ``a``.
    - ``shifted_boundary``: ``F_{a,b'}(t + i) = omega(alpha_t(b')
      gamma(a))`` with smoothed ``b'``.
    - ``smoothing_limit``: largest change of the shifted-boundary and
      identity residuals when the elements are smoothed with width
      ``SMOOTHING_LIMIT_SIGMA``.
    - ``growth_degree``: polynomial degree of ``F`` on the strip.

    Raises:
        BudgetZero: budget < 1.
    """
    if budget < 1:
        raise BudgetZero("proposition4_suite")
    if samples is None:
        samples = local_samples(net, budget, seed=seed)
    return unbounded_kms_residuals(
        net.A, net.omega, list(samples)[:budget], sigma, times
    )


def unbounded_kms_residuals(
    A: GradedAlgebra,
    omega: Functional,
    samples: Sequence[np.ndarray],
    sigma: float = settings.DEFAULT_SIGMA,
    times: Sequence[float] = (-1.5, 0.0, 0.75),
) -> dict[str, float]:
    """
    The residuals of :func:`proposition4_suite` for arbitrary samples of
    ``A``; the flow is that of ``|omega|``.

    Raises:
        BudgetZero: no samples.
    """
    samples = list(samples)
    if not samples:
        raise BudgetZero("unbounded_kms_residuals")
    jd: JordanData = jordan_decompose(omega)
    mod = jd.modulus
    flow = ModularFlow.from_density(jd.rho, sectors=A.signs)
    limit = settings.SMOOTHING_LIMIT_SIGMA

    out = dict(
        kms_modulus=0.0,
        positivity=0.0,
        shifted_boundary=0.0,
        smoothing_limit=0.0,
    )
    pairs = list(zip(samples, samples[1:] + samples[:1]))
    for x, y in pairs:
        (xe, xo), (ye, yo) = A.parity_split(x), A.parity_split(y)
        for a, b in ((xe, ye), (xo, yo)):
            for t in times:
                value = strip_function(mod, flow, b, a, t + 1j)
                expected = mod(evolve(flow, a, t) @ b)
                out["kms_modulus"] = max(
                    out["kms_modulus"],
                    abs(value - expected) / kms_scale(flow, mod, a, b),
                )
        b_s = smooth(flow, y, sigma)
        for t in times:
            out["shifted_boundary"] = max(
                out["shifted_boundary"],
                strip_boundary_residual(omega, flow, A, x, b_s, t),
            )
        y_limit = smooth(flow, y, limit)
        for t in times:
            change = abs(
                strip_boundary_residual(omega, flow, A, x, y_limit, t)
                - strip_boundary_residual(omega, flow, A, x, y, t)
            )
            out["smoothing_limit"] = max(out["smoothing_limit"], change)

    smoothed = [smooth(flow, x, sigma, z) for x in samples for z in (0, 0.5j)]
    identities = identity_residuals(jd, A, smoothed, partners=samples)
    out["identities_even"] = identities["even"]
    out["identities_odd"] = identities["odd"]
    swap = kernel_swap_residuals(jd, A, smoothed)
    out["kernel_swap_even"] = swap["even"]
    out["kernel_swap_odd"] = swap["odd"]
    near = identity_residuals(
        jd, A, [smooth(flow, x, limit) for x in samples], partners=samples
    )
    bare = identity_residuals(jd, A, samples, partners=samples)
    for parity in ("even", "odd"):
        out["smoothing_limit"] = max(
            out["smoothing_limit"], abs(near[parity] - bare[parity])
        )

    norm = mod.norm or 1.0
    for a in smoothed:
        scale = (operator_norm(a) ** 2 * norm) or 1.0
        for part in (jd.omega_plus, jd.omega_minus):
            value = np.real(part(a.conj().T @ a))
            out["positivity"] = max(out["positivity"], -value / scale)

    a, b = samples[0], smooth(flow, samples[-1], sigma)
    growth = growth_probe(
        lambda z: strip_function(omega, flow, a, b, z),
        t_range=8.0,
        s_samples=5,
    )
    out["growth_degree"] = float(growth.N)
    logger.debug(f"proposition4_suite: {out}")
    return out
