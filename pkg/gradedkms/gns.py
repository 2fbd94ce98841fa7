"""
The GNS construction over the modulus of a graded functional.

Coordinates: the modulus kernel ``rho = V diag(lambda) V*`` is
eigendecomposed with sector-adapted eigenvectors and ``S`` is its support.
The GNS vector of ``a`` has coordinates

    eta(a) = vec((V* a V)[:, S] diag(sqrt(lambda_S)))

(row-major, dimension ``N = n |S|``). The coordinate basis is the
orthonormal family ``E_is / sqrt(lambda_s)`` written in the eigenbasis, so
the GNS inner product is the standard one and adjoints are conjugate
transposes. Left multiplication is ``kron(a~, 1)``; right multiplication by
an element commuting with rho is ``kron(1, M.T)``.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import scipy.linalg

from gradedkms import settings
from gradedkms.algebra import Functional, GradedAlgebra
from gradedkms.flow import ModularFlow, evolve
from gradedkms.jordan import JordanData, NotFaithful
from gradedkms.linalg import (
    EigenSystem,
    GradedKmsError,
    commutant_basis,
    frobenius,
    hermitian_eigendecompose,
    matrix_units,
    operator_norm,
    span_residual,
)

logger = logging.getLogger(__name__)


class NotPositive(GradedKmsError):
    """
    Raised when the kernel of a functional required to be positive has a
    negative eigenvalue beyond tolerance.
    """

    def __init__(self, operation: str, smallest: float, largest: float):
        self.operation = operation
        self.smallest = smallest
        self.largest = largest
        super().__init__(
            f"{operation}: functional is not positive\n"
            f"smallest eigenvalue: {smallest:.3e}\n"
            f"largest eigenvalue: {largest:.3e}\n"
        )


class InconsistentInputs(GradedKmsError):
    """
    Raised when objects meant to describe the same functional disagree.
    """

    def __init__(self, operation: str, what: str, residual: float):
        self.operation = operation
        self.what = what
        self.residual = residual
        super().__init__(
            f"{operation}: inconsistent inputs\n"
            f"check: {what}\n"
            f"residual: {residual:.3e}\n"
        )


class FlowMismatch(GradedKmsError):
    """
    Raised when the density of a flow is not the modulus kernel of the GNS
    space it is used with.
    """

    def __init__(self, operation: str, residual: float):
        self.operation = operation
        self.residual = residual
        super().__init__(
            f"{operation}: flow density differs from the modulus kernel\n"
            f"||rho_flow - rho||_F / ||rho||_F: {residual:.3e}\n"
        )


class NonUnitary(GradedKmsError):
    def __init__(self, operation: str, residual: float):
        self.operation = operation
        self.residual = residual
        super().__init__(
            f"{operation}: operator is not unitary\n"
            f"||U* U - 1||_F: {residual:.3e}\n"
        )


class HypothesisViolation(GradedKmsError):
    """
    Raised when two graded representations do not share their graded and
    ungraded vacuum expectation values.
    """

    def __init__(self, graded: float, ungraded: float):
        self.graded = graded
        self.ungraded = ungraded
        super().__init__(
            "representations have different expectation values\n"
            f"graded residual: {graded:.3e}\n"
            f"ungraded residual: {ungraded:.3e}\n"
        )


@dataclass(frozen=True, eq=False)
class GnsSpace:
    """
    The GNS space of a positive functional ``phi = tr( . rho)`` on M_n.
    """

    A: GradedAlgebra
    rho: np.ndarray
    """ Kernel of the positive functional. """
    eig: EigenSystem
    support: np.ndarray
    """ Indices of the eigenvalues of rho kept in the quotient. """

    @property
    def n(self) -> int:
        return self.rho.shape[0]

    @property
    def rank(self) -> int:
        return int(self.support.size)

    @property
    def N(self) -> int:
        return self.n * self.rank

    @property
    def is_faithful(self) -> bool:
        return self.rank == self.n

    @property
    def weights(self) -> np.ndarray:
        """ The support eigenvalues ``lambda_S``. """
        return self.eig.eigenvalues[self.support]

    @property
    def functional(self) -> Functional:
        return Functional(T=self.rho)

    def coefficients(self, a) -> np.ndarray:
        """ ``V* a V`` """
        return self.eig.to_eigenbasis(self.A.check(a, "gns"))

    def vector(self, a) -> np.ndarray:
        """ The GNS vector ``eta(a)``. """
        x = self.coefficients(a)[:, self.support]
        return (x * np.sqrt(self.weights)[None, :]).reshape(-1)

    @property
    def Omega(self) -> np.ndarray:
        return self.vector(np.eye(self.n))

    def pi(self, a) -> np.ndarray:
        """ Left multiplication by ``a``. """
        return np.kron(self.coefficients(a), np.eye(self.rank))

    def right(self, c) -> np.ndarray:
        """
        Right multiplication ``eta(b) -> eta(b c)`` for ``c`` commuting
        with rho.
        """
        ct = self.coefficients(c)[np.ix_(self.support, self.support)]
        root = np.sqrt(self.weights)
        m = (ct / root[:, None]) * root[None, :]
        return np.kron(np.eye(self.n), m.T)

    def inner(self, u, v) -> complex:
        return complex(np.vdot(u, v))

    def unit_gram(self) -> np.ndarray:
        """
        ``<eta(E_ij), eta(E_kl)> = |omega|(E_ji E_kl)`` in matrix-unit order.
        """
        return np.kron(np.eye(self.n), self.rho.T)

    def vectors(self, elements: Iterable) -> np.ndarray:
        """ Columns ``eta(a)`` for each element. """
        return np.column_stack([self.vector(a) for a in elements])


def build_gns(
    A: GradedAlgebra,
    phi: Functional,
    sectors: Optional[Sequence[int]] = None,
) -> GnsSpace:
    """
    Builds the GNS space of a positive functional.

    Eigenvalues below ``GNS_NULL_RTOL`` times the largest span the left
    kernel and are quotiented out. When ``sectors`` is not given and the
    kernel is even, the eigenbasis is adapted to the grading of ``A``.

    Raises:
        NotPositive: the kernel has an eigenvalue below
            ``-GNS_NULL_RTOL * max``.
    """
    rho = A.check(phi.T, "build_gns")
    if sectors is None and A.parity_residual(rho) <= settings.EVENNESS_RTOL:
        sectors = A.signs
    eig = hermitian_eigendecompose(rho, sectors=sectors)
    values = eig.eigenvalues
    largest = float(values[-1])
    if largest <= 0 or values[0] < -settings.GNS_NULL_RTOL * largest:
        raise NotPositive("build_gns", float(values[0]), largest)
    support = np.flatnonzero(values > settings.GNS_NULL_RTOL * largest)
    gns = GnsSpace(A=A, rho=rho, eig=eig, support=support)
    logger.debug(
        f"build_gns: n={gns.n}, N={gns.N}, faithful={gns.is_faithful}"
    )
    return gns


def gns_residuals(gns: GnsSpace, samples: Sequence) -> dict[str, float]:
    """
    Residuals of the GNS contracts over pairs of samples: inner product,
    homomorphism, adjoint and vacuum expectation.
    """
    phi = gns.functional
    scale = phi.norm or 1.0
    out = dict(inner=0.0, homomorphism=0.0, adjoint=0.0, vacuum=0.0)
    Omega = gns.Omega
    for a in samples:
        na = operator_norm(a) or 1.0
        pa = gns.pi(a)
        out["adjoint"] = max(
            out["adjoint"],
            frobenius(gns.pi(a.conj().T) - pa.conj().T) / na,
        )
        out["vacuum"] = max(
            out["vacuum"],
            abs(phi(a) - gns.inner(Omega, pa @ Omega)) / (na * scale),
        )
        for b in samples:
            nb = operator_norm(b) or 1.0
            ip = gns.inner(gns.vector(a), gns.vector(b))
            out["inner"] = max(
                out["inner"],
                abs(ip - phi(a.conj().T @ b)) / (na * nb * scale),
            )
            out["homomorphism"] = max(
                out["homomorphism"],
                frobenius(gns.pi(a @ b) - pa @ gns.pi(b)) / (na * nb),
            )
    return out


@dataclass(frozen=True, eq=False)
class CommutantProjections:
    p_plus: np.ndarray
    p_minus: np.ndarray

    @property
    def Gamma(self) -> np.ndarray:
        return self.p_plus - self.p_minus


def commutant_projections(
    gns: GnsSpace, jd: JordanData
) -> CommutantProjections:
    """
    The projections ``p_pm eta(a) = eta(a chi_pm)`` of the commutant and
    ``Gamma = p_plus - p_minus``.

    Raises:
        InconsistentInputs: the modulus of ``jd`` is not the GNS kernel, or
            ``omega_pm(a) != <Omega, pi(a) p_pm Omega>`` on a matrix unit.
    """
    scale = frobenius(gns.rho) or 1.0
    mismatch = frobenius(jd.rho - gns.rho) / scale
    if mismatch > settings.CONSISTENCY_RTOL:
        raise InconsistentInputs("commutant_projections", "modulus", mismatch)

    proj = CommutantProjections(
        p_plus=gns.right(jd.chi_plus), p_minus=gns.right(jd.chi_minus)
    )
    Omega = gns.Omega
    norm = trace_scale(jd)
    for e in matrix_units(gns.n):
        pe = gns.pi(e)
        for part, p in (
            (jd.omega_plus, proj.p_plus),
            (jd.omega_minus, proj.p_minus),
        ):
            residual = abs(part(e) - gns.inner(Omega, pe @ p @ Omega)) / norm
            if residual > settings.CONSISTENCY_RTOL:
                raise InconsistentInputs(
                    "commutant_projections", "omega_pm", residual
                )
    return proj


def trace_scale(jd: JordanData) -> float:
    return Functional(T=jd.rho).norm or 1.0


def projection_residuals(
    gns: GnsSpace, jd: JordanData, proj: CommutantProjections
) -> dict[str, float]:
    """
    Residuals of: p_pm idempotent and self-adjoint, ``p_+ + p_- = 1`` on
    the support, commutation with every ``pi(E_ij)``,
    ``p_pm eta(a) = eta(a chi_pm)`` and the graded vacuum expectation
    ``omega(a) = <Omega, pi(a) Gamma Omega>``.
    """
    N = gns.N
    out = {}
    out["projection"] = max(
        frobenius(p @ p - p) + frobenius(p - p.conj().T)
        for p in (proj.p_plus, proj.p_minus)
    )
    out["sum"] = frobenius(proj.p_plus + proj.p_minus - np.eye(N))
    commutator = 0.0
    transport = 0.0
    graded = 0.0
    Omega = gns.Omega
    omega = jd.omega
    norm = trace_scale(jd)
    for e in matrix_units(gns.n):
        pe = gns.pi(e)
        for p, chi in (
            (proj.p_plus, jd.chi_plus),
            (proj.p_minus, jd.chi_minus),
        ):
            commutator = max(commutator, frobenius(p @ pe - pe @ p))
            transport = max(
                transport,
                np.linalg.norm(p @ gns.vector(e) - gns.vector(e @ chi))
                / np.sqrt(norm),
            )
        graded = max(
            graded,
            abs(omega(e) - gns.inner(Omega, pe @ proj.Gamma @ Omega)) / norm,
        )
    out["commutation"] = commutator
    out["transport"] = float(transport)
    out["graded_vacuum"] = graded
    return out


def _projector(columns: np.ndarray, N: int) -> np.ndarray:
    if columns.size == 0:
        return np.zeros((N, N), dtype=complex)
    q = scipy.linalg.orth(columns, rcond=settings.GNS_NULL_RTOL)
    return q @ q.conj().T


@dataclass(frozen=True, eq=False)
class SubspaceSplit:
    """
    Projectors on ``H^0_+``, ``H^1_+``, ``H^0_-`` and ``H^1_-``, where
    ``H^0_pm = span eta(A_+ chi_pm)`` and ``H^1_pm = span eta(A_- chi_pm)``.
    """

    even_plus: np.ndarray
    odd_plus: np.ndarray
    even_minus: np.ndarray
    odd_minus: np.ndarray

    def as_dict(self) -> dict[str, np.ndarray]:
        return {
            "H0+": self.even_plus,
            "H1+": self.odd_plus,
            "H0-": self.even_minus,
            "H1-": self.odd_minus,
        }

    def dimensions(self) -> dict[str, int]:
        return {
            key: int(round(np.real(np.trace(p))))
            for key, p in self.as_dict().items()
        }

    def orthogonality_defect(self) -> float:
        return max(
            frobenius(self.even_plus @ self.odd_plus),
            frobenius(self.even_minus @ self.odd_minus),
        )

    def completeness_defect(self) -> float:
        total = sum(self.as_dict().values())
        return frobenius(total - np.eye(total.shape[0]))


def subspace_split(
    gns: GnsSpace, A: GradedAlgebra, jd: JordanData
) -> SubspaceSplit:
    """
    Raises:
        InconsistentInputs: ``H^0_pm`` and ``H^1_pm`` are not orthogonal.
    """
    N = gns.N
    spans = {}
    for label, chi in (("plus", jd.chi_plus), ("minus", jd.chi_minus)):
        even, odd = [], []
        for i in range(A.n):
            for j in range(A.n):
                v = gns.vector(A.matrix_unit(i, j) @ chi)
                (even if A.is_even_unit(i, j) else odd).append(v)
        spans[f"even_{label}"] = _projector(np.column_stack(even), N)
        spans[f"odd_{label}"] = (
            _projector(np.column_stack(odd), N)
            if odd
            else np.zeros((N, N), dtype=complex)
        )
    split = SubspaceSplit(**spans)
    defect = split.orthogonality_defect()
    if defect > settings.CONSISTENCY_RTOL * np.sqrt(N):
        raise InconsistentInputs("subspace_split", "orthogonality", defect)
    return split


class AntilinearMap:
    """
    The antilinear map ``v -> M conj(v)``, where conj conjugates the
    coordinates.

    Composition rules:
        antilinear A after antilinear B is linear, ``M_A conj(M_B)``;
        antilinear A after linear L is antilinear, ``M_A conj(L)``;
        linear L after antilinear A is antilinear, ``L M_A``.
    """

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=complex)

    def __call__(self, v) -> np.ndarray:
        return self.matrix @ np.conj(v)

    def after(
        self, other: Union["AntilinearMap", np.ndarray]
    ) -> Union["AntilinearMap", np.ndarray]:
        """ ``self o other`` """
        if isinstance(other, AntilinearMap):
            return self.matrix @ np.conj(other.matrix)
        return AntilinearMap(self.matrix @ np.conj(other))

    def before(self, linear: np.ndarray) -> "AntilinearMap":
        """ ``linear o self`` """
        return AntilinearMap(np.asarray(linear) @ self.matrix)

    def sandwich(self, linear: np.ndarray) -> np.ndarray:
        """ The linear map ``self o linear o self``. """
        return self.matrix @ np.conj(linear) @ np.conj(self.matrix)

    def antiunitarity_residual(self) -> float:
        """
        ``<J u, J v> = conj(<u, v>)`` for all u, v iff ``M* M = 1``.
        """
        m = self.matrix
        return frobenius(m.conj().T @ m - np.eye(m.shape[0]))

    def involution_residual(self) -> float:
        m = self.matrix
        return frobenius(self.after(self) - np.eye(m.shape[0]))


def complex_conjugation(N: int) -> AntilinearMap:
    """ K, the coordinate conjugation in the GNS basis. """
    return AntilinearMap(np.eye(N))


def phase_rebased_conjugation(N: int, phases) -> AntilinearMap:
    """
    The conjugation with respect to the basis ``f_k = phase_k e_k``:
    ``sum c_k f_k -> sum conj(c_k) f_k``, i.e. ``diag(phase^2)`` after
    coordinate conjugation.
    """
    phases = np.asarray(phases, dtype=complex)
    if phases.shape != (N,):
        raise InconsistentInputs(
            "phase_rebased_conjugation", "phase count", float(phases.size)
        )
    return AntilinearMap(np.diag(phases**2))


def _require_flow(gns: GnsSpace, flow: ModularFlow, operation: str):
    scale = frobenius(gns.rho) or 1.0
    if flow.rho.shape != gns.rho.shape:
        raise FlowMismatch(operation, float("inf"))
    residual = frobenius(flow.rho - gns.rho) / scale
    if residual > settings.FLOW_MATCH_RTOL:
        raise FlowMismatch(operation, residual)


def _swap(n: int) -> np.ndarray:
    # permutation X -> X.T on row-major n x n coordinates
    perm = np.arange(n * n).reshape(n, n).T.reshape(-1)
    return np.eye(n * n, dtype=complex)[perm]


def modular_conjugation(gns: GnsSpace, flow: ModularFlow) -> AntilinearMap:
    """
    ``J eta(a) = eta(alpha_{i/2}(a*))``. In coordinates J is ``X -> X*``,
    i.e. the index swap after coordinate conjugation.

    Raises:
        NotFaithful: the GNS space is a proper quotient.
        FlowMismatch: the flow density differs from the modulus kernel.
    """
    if not gns.is_faithful:
        raise NotFaithful("modular_conjugation", gns.rank, gns.n)
    _require_flow(gns, flow, "modular_conjugation")
    return AntilinearMap(_swap(gns.n))


def conjugation_residuals(
    gns: GnsSpace,
    flow: ModularFlow,
    J: AntilinearMap,
    split: SubspaceSplit,
    samples: Sequence,
) -> dict[str, float]:
    """
    Residuals of the defining action of J and of its involutive,
    antiunitary and subspace-mapping properties.
    """
    out = {
        "antiunitary": J.antiunitarity_residual(),
        "involution": J.involution_residual(),
    }
    action = 0.0
    for a in samples:
        v = gns.vector(a)
        expected = gns.vector(evolve(flow, a.conj().T, 0.5j))
        action = max(
            action,
            np.linalg.norm(J(v) - expected) / (np.linalg.norm(v) or 1.0),
        )
    out["action"] = float(action)
    # J P J is the projector on J(range P)
    mapped = {
        "H0+": ("H0+", split.even_plus),
        "H0-": ("H0-", split.even_minus),
        "H1+": ("H1-", split.odd_plus),
        "H1-": ("H1+", split.odd_minus),
    }
    target = split.as_dict()
    out["subspaces"] = max(
        frobenius(J.sandwich(p) - target[dest])
        for dest, p in mapped.values()
    )
    return out


@dataclass(frozen=True, eq=False)
class GradedRepresentation:
    """
    A graded representation ``a -> W pi(a) W*`` with grading operator
    ``W pi(g') W*`` and vector ``W Omega``.
    """

    gns: GnsSpace
    W: np.ndarray
    g_prime: np.ndarray
    vacuum_scale: complex = 1.0
    """ Multiplies the cyclic vector; 1 except in negative controls. """

    def pi(self, a) -> np.ndarray:
        return self.W @ self.gns.pi(a) @ self.W.conj().T

    @property
    def Gamma(self) -> np.ndarray:
        return self.pi(self.g_prime)

    @property
    def Omega(self) -> np.ndarray:
        return self.vacuum_scale * (self.W @ self.gns.Omega)

    def graded_expectation(self, a) -> complex:
        v = self.Omega
        return complex(np.vdot(v, self.Gamma @ self.pi(a) @ v))

    def expectation(self, a) -> complex:
        return complex(np.vdot(self.Omega, self.pi(a) @ self.Omega))


def _require_unitary(W: np.ndarray, operation: str):
    residual = frobenius(W.conj().T @ W - np.eye(W.shape[0]))
    if residual > settings.UNITARY_ATOL * W.shape[0]:
        raise NonUnitary(operation, residual)


@dataclass(frozen=True, eq=False)
class ConjugateRepresentation:
    K: AntilinearMap
    U: np.ndarray
    """ ``U = K J``, a linear unitary. """
    U_star: np.ndarray
    """ ``U* = J K`` """
    rep: GradedRepresentation
    """ ``pi'(a) = U pi(a) U*`` with Omega' = U Omega. """

    def pi_prime(self, a) -> np.ndarray:
        return self.rep.pi(a)


def conjugate_representation(
    gns: GnsSpace,
    J: AntilinearMap,
    jd: JordanData,
    K: Optional[AntilinearMap] = None,
) -> ConjugateRepresentation:
    """
    Builds ``U = K J`` and the graded representation
    ``pi'(a) = U pi(a) U*``.

    Raises:
        NonUnitary: ``U* U != 1``.
    """
    if K is None:
        K = complex_conjugation(gns.N)
    U = K.after(J)
    U_star = J.after(K)
    _require_unitary(U, "conjugate_representation")
    adjoint_residual = frobenius(U_star - U.conj().T)
    if adjoint_residual > settings.UNITARY_ATOL * gns.N:
        raise NonUnitary("conjugate_representation", adjoint_residual)
    rep = GradedRepresentation(gns=gns, W=U, g_prime=jd.g_prime)
    return ConjugateRepresentation(K=K, U=U, U_star=U_star, rep=rep)


def representation_residuals(
    conj: ConjugateRepresentation,
    proj: CommutantProjections,
    jd: JordanData,
    samples: Sequence,
) -> dict[str, float]:
    """
    Residuals of: pi' a *-homomorphism, ``Gamma pi'(a) Gamma =
    pi'(gamma(a))``, ``U pi(g') U* = Gamma``, ``omega(a) = <Omega,
    Gamma pi'(a) Omega>`` and the rank defect of ``{pi'(E_ij) Omega}``.
    """
    rep = conj.rep
    gns = rep.gns
    A = gns.A
    Gamma = proj.Gamma
    Omega = gns.Omega
    omega = jd.omega
    norm = trace_scale(jd)
    out = dict(homomorphism=0.0, adjoint=0.0, equivariance=0.0, vacuum=0.0)
    for a in samples:
        na = operator_norm(a) or 1.0
        pa = rep.pi(a)
        out["adjoint"] = max(
            out["adjoint"], frobenius(rep.pi(a.conj().T) - pa.conj().T) / na
        )
        out["equivariance"] = max(
            out["equivariance"],
            frobenius(Gamma @ pa @ Gamma - rep.pi(A.gamma(a))) / na,
        )
        out["vacuum"] = max(
            out["vacuum"],
            abs(omega(a) - np.vdot(Omega, Gamma @ pa @ Omega)) / (na * norm),
        )
        for b in samples:
            nb = operator_norm(b) or 1.0
            out["homomorphism"] = max(
                out["homomorphism"],
                frobenius(rep.pi(a @ b) - pa @ rep.pi(b)) / (na * nb),
            )
    out["grading"] = frobenius(rep.Gamma - Gamma)
    cyclic = np.column_stack(
        [rep.pi(e) @ rep.Omega for e in matrix_units(gns.n)]
    )
    rank = np.linalg.matrix_rank(cyclic, tol=settings.GNS_NULL_RTOL)
    out["cyclicity"] = float(gns.N - rank)
    return out


def mapping_table(
    gns: GnsSpace,
    split: SubspaceSplit,
    U: np.ndarray,
    samples: Sequence,
) -> dict[str, float]:
    """
    Certifies how the four subspaces move: U fixes ``H^0_pm`` and swaps
    ``H^1_+`` with ``H^1_-``; even ``pi(a)`` preserves every subspace; odd
    ``pi(b)`` exchanges ``H^0_pm`` and ``H^1_pm``.
    """
    A = gns.A
    P = split.as_dict()
    Ustar = U.conj().T
    out = {
        "U_even": max(
            frobenius(U @ P["H0+"] @ Ustar - P["H0+"]),
            frobenius(U @ P["H0-"] @ Ustar - P["H0-"]),
        ),
        "U_odd": max(
            frobenius(U @ P["H1+"] @ Ustar - P["H1-"]),
            frobenius(U @ P["H1-"] @ Ustar - P["H1+"]),
        ),
    }
    eye = np.eye(gns.N)
    pairs = {
        "H0+": "H1+",
        "H1+": "H0+",
        "H0-": "H1-",
        "H1-": "H0-",
    }
    preserve = 0.0
    exchange = 0.0
    for a in samples:
        even, odd = A.parity_split(a)
        ne = operator_norm(even) or 1.0
        no = operator_norm(odd) or 1.0
        pe = gns.pi(even)
        po = gns.pi(odd)
        for key, p in P.items():
            preserve = max(preserve, frobenius((eye - p) @ pe @ p) / ne)
            q = P[pairs[key]]
            exchange = max(exchange, frobenius((eye - q) @ po @ p) / no)
    out["even_preserves"] = preserve
    out["odd_exchanges"] = exchange
    return out


def commutant_check(
    gns: GnsSpace, J: AntilinearMap, samples: Sequence
) -> dict[str, Optional[float]]:
    """
    ``max ||[J pi(a) J, pi(b)]||_F`` relative to the norms of both factors,
    and the largest distance of ``J pi(E_ij) J`` from the computed
    commutant of ``pi(A)``. The second is None above
    ``COMMUTANT_MAX_DIM``.
    """
    commutator = 0.0
    for a in samples:
        jaj = J.sandwich(gns.pi(a))
        for b in samples:
            pb = gns.pi(b)
            scale = (frobenius(jaj) * frobenius(pb)) or 1.0
            commutator = max(
                commutator, frobenius(jaj @ pb - pb @ jaj) / scale
            )
    membership = None
    if gns.N <= settings.COMMUTANT_MAX_DIM:
        basis = commutant_basis(generating_set(gns))
        membership = max(
            span_residual(J.sandwich(gns.pi(e)), basis)
            for e in matrix_units(gns.n)
        )
    return {"commutator": commutator, "membership": membership}


def generating_set(gns: GnsSpace) -> list[np.ndarray]:
    """
    ``pi(E_{i,i+1})``, which generate ``pi(M_n)`` as a *-algebra.
    """
    n = gns.n
    gens = []
    for i in range(n - 1):
        gens.append(gns.pi(gns.A.matrix_unit(i, i + 1)))
    if not gens:
        gens.append(gns.pi(np.eye(1)))
    return gens


def double_commutant_defect(gns: GnsSpace) -> Optional[float]:
    """
    Largest distance of ``pi(E_ij)`` from the double commutant of the
    generators, plus the dimension mismatch with ``n^2``. None above
    ``COMMUTANT_MAX_DIM``.
    """
    if gns.N > settings.COMMUTANT_MAX_DIM:
        return None
    first = commutant_basis(generating_set(gns))
    second = commutant_basis(first, dim=gns.N)
    distance = max(
        span_residual(gns.pi(e), second) for e in matrix_units(gns.n)
    )
    return distance + abs(len(second) - gns.n**2)


def separating_check(gns: GnsSpace, J: AntilinearMap) -> dict[str, float]:
    """
    Rank defects of ``{pi(E_ij) Omega}`` (cyclic), ``{J pi(E_ij) J Omega}``
    (cyclic for the commutant) and of the matrix-unit Gram matrix
    (separating).
    """
    units = list(matrix_units(gns.n))
    Omega = gns.Omega
    tol = settings.GNS_NULL_RTOL
    cyclic = np.column_stack([gns.pi(e) @ Omega for e in units])
    dual = np.column_stack([J.sandwich(gns.pi(e)) @ Omega for e in units])
    gram = gns.unit_gram()
    return {
        "cyclic": float(gns.N - np.linalg.matrix_rank(cyclic, tol=tol)),
        "commutant_cyclic": float(
            gns.N - np.linalg.matrix_rank(dual, tol=tol)
        ),
        "separating": float(
            gns.n**2 - np.linalg.matrix_rank(gram, tol=tol)
        ),
    }


@dataclass(frozen=True, eq=False)
class ModularOperator:
    Delta: np.ndarray
    """ ``Delta eta(a) = eta(rho a rho^-1)`` """
    S: AntilinearMap
    """ ``S = J Delta^(1/2)``, ``S eta(a) = eta(a*)`` """
    diagonal: np.ndarray
    """ Eigenvalues of Delta in coordinate order. """

    def power(self, z: complex) -> np.ndarray:
        return np.diag(self.diagonal.astype(complex) ** z)


def modular_operator(
    gns: GnsSpace, flow: ModularFlow, J: AntilinearMap
) -> ModularOperator:
    """
    Raises:
        NotFaithful: the GNS space is a proper quotient.
        FlowMismatch: the flow density differs from the modulus kernel.
    """
    if not gns.is_faithful:
        raise NotFaithful("modular_operator", gns.rank, gns.n)
    _require_flow(gns, flow, "modular_operator")
    lam = gns.weights
    diagonal = np.kron(lam, 1 / lam)
    half = np.diag(np.sqrt(diagonal)).astype(complex)
    return ModularOperator(
        Delta=np.diag(diagonal).astype(complex),
        S=J.after(half),
        diagonal=diagonal,
    )


def modular_operator_residuals(
    gns: GnsSpace,
    flow: ModularFlow,
    mod: ModularOperator,
    samples: Sequence,
    times: Sequence[float] = (-1.0, 0.5, 2.0),
) -> dict[str, float]:
    """
    Residuals of ``Delta eta(a) = eta(alpha_i(a))``, ``S eta(a) =
    eta(a*)`` and ``Delta^(-it) pi(a) Delta^(it) = pi(alpha_t(a))``.
    """
    out = dict(delta=0.0, tomita=0.0, flow=0.0)
    for a in samples:
        v = gns.vector(a)
        nv = np.linalg.norm(v) or 1.0
        out["delta"] = max(
            out["delta"],
            np.linalg.norm(mod.Delta @ v - gns.vector(evolve(flow, a, 1j)))
            / (nv * max(1.0, flow.condition)),
        )
        out["tomita"] = max(
            out["tomita"],
            np.linalg.norm(mod.S(v) - gns.vector(a.conj().T)) / nv,
        )
        na = operator_norm(a) or 1.0
        for t in times:
            lhs = mod.power(-1j * t) @ gns.pi(a) @ mod.power(1j * t)
            out["flow"] = max(
                out["flow"],
                frobenius(lhs - gns.pi(evolve(flow, a, t))) / na,
            )
    return {k: float(v) for k, v in out.items()}


@dataclass(frozen=True, eq=False)
class Intertwiner:
    V: np.ndarray
    residuals: dict


def intertwiner(
    first: GradedRepresentation,
    second: GradedRepresentation,
    samples: Optional[Sequence] = None,
) -> Intertwiner:
    """
    The unitary ``V pi'(a) Omega' = pi''(a) Omega''`` between two graded
    representations with equal expectation values.

    Raises:
        HypothesisViolation: graded or ungraded expectation values differ
            on a matrix unit.
    """
    n = first.gns.n
    units = list(matrix_units(n))
    scale = max(
        abs(first.expectation(np.eye(n))),
        np.linalg.norm(first.Omega) ** 2,
        1.0,
    )
    graded = max(
        abs(first.graded_expectation(e) - second.graded_expectation(e))
        for e in units
    )
    ungraded = max(
        abs(first.expectation(e) - second.expectation(e)) for e in units
    )
    if max(graded, ungraded) > settings.HYPOTHESIS_RTOL * scale:
        raise HypothesisViolation(graded / scale, ungraded / scale)

    src = np.column_stack([first.pi(e) @ first.Omega for e in units])
    dst = np.column_stack([second.pi(e) @ second.Omega for e in units])
    V = dst @ np.linalg.pinv(src, rcond=settings.GNS_NULL_RTOL)

    if samples is None:
        samples = units
    N = V.shape[0]
    residuals = {
        "unitary": frobenius(V.conj().T @ V - np.eye(N)),
        "intertwines": max(
            frobenius(V @ first.pi(a) - second.pi(a) @ V)
            / (operator_norm(a) or 1.0)
            for a in samples
        ),
        "grading": frobenius(V @ first.Gamma - second.Gamma @ V),
        "vacuum": float(np.linalg.norm(V @ first.Omega - second.Omega)),
    }
    return Intertwiner(V=V, residuals=residuals)


def identity_residuals(
    jd: JordanData,
    A: GradedAlgebra,
    samples: Sequence,
    partners: Optional[Sequence] = None,
) -> dict[str, float]:
    """
    For even ``a``: ``omega_-(b chi_+ a)`` and ``omega_+(b chi_- a)``; for
    odd ``a``: ``omega_+(b chi_+ a)`` and ``omega_-(b chi_- a)``. All
    vanish for a graded-KMS functional. Values are divided by
    ``||a|| ||b|| ||T||_1``.
    """
    if partners is None:
        partners = samples
    norm = trace_scale(jd)
    out = {"even": 0.0, "odd": 0.0}
    for x in samples:
        even, odd = A.parity_split(x)
        for b in partners:
            nb = operator_norm(b) or 1.0
            for key, a, first, second in (
                ("even", even, jd.omega_minus, jd.omega_plus),
                ("odd", odd, jd.omega_plus, jd.omega_minus),
            ):
                na = operator_norm(a)
                if na == 0:
                    continue
                value = max(
                    abs(first(b @ jd.chi_plus @ a)),
                    abs(second(b @ jd.chi_minus @ a)),
                )
                out[key] = max(out[key], value / (na * nb * norm))
    return out


def kernel_swap_residuals(
    jd: JordanData,
    A: GradedAlgebra,
    samples: Sequence,
    epsilon: float = settings.KERNEL_SWAP_EPSILON,
) -> dict[str, float]:
    """
    Builds ``a = x chi_-`` from the even and odd parts of each sample, so
    that ``omega_+(a* a)`` vanishes, and reports the largest
    ``omega_+(a a*)`` (even a) and ``omega_-(a a*)`` (odd a) over samples
    whose hypothesis value is below ``epsilon``, relative to
    ``||a||^2 ||T||_1``. ``qualified`` counts those samples.
    """
    norm = trace_scale(jd)
    out = {"even": 0.0, "odd": 0.0, "qualified": 0.0}
    for x in samples:
        even, odd = A.parity_split(x)
        for key, part, target in (
            ("even", even, jd.omega_plus),
            ("odd", odd, jd.omega_minus),
        ):
            a = part @ jd.chi_minus
            na = operator_norm(a)
            if na == 0:
                continue
            scale = na**2 * norm
            hypothesis = abs(jd.omega_plus(a.conj().T @ a)) / scale
            if hypothesis >= epsilon:
                continue
            out["qualified"] += 1
            out[key] = max(out[key], abs(target(a @ a.conj().T)) / scale)
    return out


def compatibility_residual(
    gns: GnsSpace,
    jd: JordanData,
    proj: CommutantProjections,
    samples: Sequence,
) -> float:
    """
    For spectral projections ``f`` of even self-adjoint samples, the
    projections ``e = pi(f) p_pm`` have range in ``H_pm`` and must satisfy
    ``<Omega, e Gamma Omega> >= 0`` (plus) and ``<= 0`` (minus). Returns the
    largest violation relative to ``||T||_1``.
    """
    A = gns.A
    Omega = gns.Omega
    norm = trace_scale(jd)
    worst = 0.0
    for x in samples:
        even, _ = A.parity_split(x)
        h = (even + even.conj().T) / 2
        if frobenius(h) == 0:
            continue
        eig = hermitian_eigendecompose(h, sectors=A.signs)
        for k in range(eig.dim):
            v = eig.eigenvectors[:, [k]]
            pf = gns.pi(v @ v.conj().T)
            plus = np.real(
                np.vdot(Omega, pf @ proj.p_plus @ proj.Gamma @ Omega)
            )
            minus = np.real(
                np.vdot(Omega, pf @ proj.p_minus @ proj.Gamma @ Omega)
            )
            worst = max(worst, -plus / norm, minus / norm)
    return float(worst)

