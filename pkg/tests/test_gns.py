import numpy as np
import pytest

from gradedkms.algebra import Functional, GradedAlgebra, supertrace_functional
from gradedkms.flow import ModularFlow, evolve
from gradedkms.gns import (
    AntilinearMap,
    FlowMismatch,
    GradedRepresentation,
    HypothesisViolation,
    InconsistentInputs,
    NotPositive,
    build_gns,
    commutant_check,
    commutant_projections,
    compatibility_residual,
    complex_conjugation,
    conjugate_representation,
    conjugation_residuals,
    double_commutant_defect,
    gns_residuals,
    identity_residuals,
    intertwiner,
    kernel_swap_residuals,
    mapping_table,
    modular_conjugation,
    modular_operator,
    modular_operator_residuals,
    phase_rebased_conjugation,
    projection_residuals,
    representation_residuals,
    separating_check,
    subspace_split,
)
from gradedkms.jordan import NotFaithful, jordan_decompose
from gradedkms.linalg import matrix_units

TOL = 1e-10


@pytest.fixture
def worked(worked_algebra, worked_omega, worked_flow):
    jd = jordan_decompose(worked_omega)
    gns = build_gns(worked_algebra, jd.modulus)
    return worked_algebra, jd, gns, worked_flow


@pytest.fixture
def graded(even_density, random_elements):
    """
    A 3 + 2 graded algebra with a random even density, everything built
    up to the conjugate representation.
    """
    A = GradedAlgebra.from_sectors(3, 2)
    rho = even_density(A.signs, seed=5)
    jd = jordan_decompose(supertrace_functional(A, rho))
    gns = build_gns(A, jd.modulus)
    flow = ModularFlow.from_density(jd.rho, sectors=A.signs)
    proj = commutant_projections(gns, jd)
    split = subspace_split(gns, A, jd)
    J = modular_conjugation(gns, flow)
    conj = conjugate_representation(gns, J, jd)
    samples = list(matrix_units(A.n))[::3] + random_elements(A.n, 4)
    return dict(
        A=A, jd=jd, gns=gns, flow=flow, proj=proj, split=split, J=J,
        conj=conj, samples=samples,
    )


class TestBuildGns:
    def test_worked_gram(self, worked):
        _, _, gns, _ = worked
        vectors = gns.vectors(matrix_units(2))

        assert np.allclose(vectors.conj().T @ vectors, gns.unit_gram())
        assert np.allclose(
            np.diag(gns.unit_gram()), [0.75, 0.25, 0.75, 0.25]
        )

    def test_worked_vacuum(self, worked):
        _, jd, gns, _ = worked

        assert np.linalg.norm(gns.Omega) ** 2 == pytest.approx(1.0)
        assert gns.N == 4
        assert gns.is_faithful

    def test_contract(self, graded):
        residuals = gns_residuals(graded["gns"], graded["samples"])

        assert max(residuals.values()) < TOL

    def test_rejects_non_positive(self, worked_algebra, worked_omega):
        with pytest.raises(NotPositive):
            build_gns(worked_algebra, worked_omega)

    def test_quotient(self):
        A = GradedAlgebra.from_sectors(2, 1)
        gns = build_gns(A, Functional(T=np.diag([0.5, 0.5, 0.0])))

        assert gns.rank == 2
        assert gns.N == 6
        assert not gns.is_faithful
        assert max(gns_residuals(gns, list(matrix_units(3))).values()) < TOL


class TestCommutantProjections:
    def test_residuals(self, graded):
        proj = graded["proj"]
        residuals = projection_residuals(graded["gns"], graded["jd"], proj)

        assert max(residuals.values()) < TOL
        assert np.allclose(proj.Gamma @ proj.Gamma, np.eye(graded["gns"].N))

    def test_inconsistent_modulus(self, worked):
        A, jd, _, _ = worked
        other = build_gns(A, Functional(T=np.diag([0.5, 0.5])))

        with pytest.raises(InconsistentInputs):
            commutant_projections(other, jd)

    def test_compatibility(self, graded):
        assert compatibility_residual(
            graded["gns"], graded["jd"], graded["proj"], graded["samples"]
        ) < TOL


class TestSubspaceSplit:
    def test_dimensions(self, graded):
        dims = graded["split"].dimensions()

        assert dims == {"H0+": 9, "H1+": 6, "H0-": 4, "H1-": 6}

    def test_complete_and_orthogonal(self, graded):
        split = graded["split"]

        assert split.completeness_defect() < TOL
        assert split.orthogonality_defect() < TOL


class TestModularConjugation:
    def test_worked_action(self, worked, unit):
        _, _, gns, flow = worked
        J = modular_conjugation(gns, flow)
        expected = gns.vector(unit(2, 1, 0)) / np.sqrt(3)

        assert np.allclose(J(gns.vector(unit(2, 0, 1))), expected)

    def test_residuals(self, graded):
        g = graded
        residuals = conjugation_residuals(
            g["gns"], g["flow"], g["J"], g["split"], g["samples"]
        )

        assert max(residuals.values()) < TOL

    def test_antilinear(self, graded):
        J = graded["J"]
        v = graded["gns"].vector(graded["samples"][-1])

        assert np.allclose(J(1j * v), -1j * J(v))

    def test_commutant(self, worked):
        _, _, gns, flow = worked
        J = modular_conjugation(gns, flow)
        result = commutant_check(gns, J, list(matrix_units(2)))

        assert result["commutator"] < TOL
        assert result["membership"] < TOL

    def test_separating(self, graded):
        result = separating_check(graded["gns"], graded["J"])

        assert result == {
            "cyclic": 0.0, "commutant_cyclic": 0.0, "separating": 0.0
        }

    def test_quotient_is_not_faithful(self):
        A = GradedAlgebra.from_sectors(2, 1)
        rho = np.diag([0.5, 0.5, 0.0])
        gns = build_gns(A, Functional(T=rho))
        flow = ModularFlow.from_density(np.eye(3) / 3)

        with pytest.raises(NotFaithful):
            modular_conjugation(gns, flow)

    def test_flow_mismatch(self, worked):
        _, _, gns, _ = worked
        flow = ModularFlow.from_density(np.eye(2) / 2)

        with pytest.raises(FlowMismatch):
            modular_conjugation(gns, flow)


class TestModularOperator:
    def test_worked_delta(self, worked, unit):
        _, _, gns, flow = worked
        mod = modular_operator(gns, flow, modular_conjugation(gns, flow))
        e = unit(2, 0, 1)

        assert np.allclose(mod.Delta @ gns.vector(e), 3 * gns.vector(e))

    def test_residuals(self, graded):
        g = graded
        mod = modular_operator(g["gns"], g["flow"], g["J"])
        residuals = modular_operator_residuals(
            g["gns"], g["flow"], mod, g["samples"]
        )

        assert max(residuals.values()) < TOL

    def test_flow_sign(self, worked, random_elements):
        _, _, gns, flow = worked
        mod = modular_operator(gns, flow, modular_conjugation(gns, flow))
        a = random_elements(2, 1)[0]
        lhs = mod.power(-0.7j) @ gns.pi(a) @ mod.power(0.7j)

        assert np.allclose(lhs, gns.pi(evolve(flow, a, 0.7)))


def test_double_commutant(worked):
    _, _, gns, _ = worked

    assert double_commutant_defect(gns) < TOL


class TestAntilinearMap:
    def test_conjugation_is_involution(self):
        K = complex_conjugation(3)

        assert K.involution_residual() == 0
        assert K.antiunitarity_residual() == 0

    def test_composition(self, random_elements):
        L, M = random_elements(2, 2)
        v = random_elements(2, 1, seed=1)[0][:, 0]
        A = AntilinearMap(M)

        assert np.allclose(A.after(L)(v), A(L @ v))
        assert np.allclose(A.before(L)(v), L @ A(v))
        assert np.allclose(A.after(A) @ v, A(A(v)))

    def test_phase_count(self):
        with pytest.raises(InconsistentInputs):
            phase_rebased_conjugation(3, [1, 1])


class TestConjugateRepresentation:
    def test_residuals(self, graded):
        g = graded
        residuals = representation_residuals(
            g["conj"], g["proj"], g["jd"], g["samples"]
        )

        assert max(residuals.values()) < TOL

    def test_unitary(self, graded):
        conj = graded["conj"]
        N = graded["gns"].N

        assert np.allclose(conj.U_star @ conj.U, np.eye(N))
        assert np.allclose(conj.U_star, conj.U.conj().T)

    def test_mapping_table(self, graded):
        g = graded
        table = mapping_table(g["gns"], g["split"], g["conj"].U, g["samples"])

        assert max(table.values()) < TOL


class TestIntertwiner:
    def test_rephased_conjugation(self, graded):
        g = graded
        rng = np.random.default_rng(0)
        phases = np.exp(2j * np.pi * rng.random(g["gns"].N))
        K = phase_rebased_conjugation(g["gns"].N, phases)
        second = conjugate_representation(g["gns"], g["J"], g["jd"], K=K)
        found = intertwiner(g["conj"].rep, second.rep, g["samples"])

        assert max(found.residuals.values()) < TOL

    @pytest.mark.parametrize("flip, scale", [(1, 1.1), (-1, 1.0)])
    def test_negative_controls(self, graded, flip, scale):
        first = graded["conj"].rep
        bad = GradedRepresentation(
            gns=graded["gns"],
            W=first.W,
            g_prime=flip * first.g_prime,
            vacuum_scale=scale,
        )

        with pytest.raises(HypothesisViolation):
            intertwiner(first, bad)


class TestIdentities:
    def test_vanish_for_supertrace(self, graded):
        residuals = identity_residuals(
            graded["jd"], graded["A"], graded["samples"]
        )

        assert residuals["even"] < TOL
        assert residuals["odd"] < TOL

    def test_kernel_swap(self, graded):
        residuals = kernel_swap_residuals(
            graded["jd"], graded["A"], graded["samples"]
        )

        assert residuals["qualified"] > 0
        assert residuals["even"] < TOL
        assert residuals["odd"] < TOL

    def test_fail_for_wrong_grading(self, graded):
        # the ungraded trace on a graded algebra
        jd = jordan_decompose(Functional(T=graded["jd"].rho))
        residuals = identity_residuals(jd, graded["A"], graded["samples"])

        assert residuals["odd"] > 1e-3
