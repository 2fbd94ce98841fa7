import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from gradedkms.algebra import GradedAlgebra, supertrace_functional
from gradedkms.flow import (
    IllConditioned,
    ModularFlow,
    NonpositiveSigma,
    check_condition,
    evolve,
    graded_kms_residual,
    growth_probe,
    kms_residual,
    kms_scale,
    smooth,
    smooth_quadrature,
    smooth_riemann,
    strip_boundary_residual,
    strip_derivatives,
    strip_function,
    taylor_residual,
)
from gradedkms.jordan import modulus
from gradedkms.linalg import DimensionMismatch


@pytest.fixture
def graded_case(even_density, random_elements):
    A = GradedAlgebra.from_sectors(2, 2)
    rho = even_density(A.signs, seed=2)
    omega = supertrace_functional(A, rho)
    flow = ModularFlow.from_density(rho, sectors=A.signs)
    return A, omega, flow, random_elements(4, 6, seed=3)


class TestEvolve:
    def test_worked_imaginary_unit(self, worked_flow, unit):
        e = unit(2, 0, 1)

        assert np.allclose(evolve(worked_flow, e, 1j), 3 * e)

    def test_worked_inverse(self, worked_flow, unit):
        e = unit(2, 1, 0)

        assert np.allclose(evolve(worked_flow, e, 1j), e / 3)

    def test_diagonal_is_invariant(self, worked_flow):
        d = np.diag([2.0, -1.0])

        assert np.allclose(evolve(worked_flow, d, 0.7 - 0.2j), d)

    def test_dimension(self, worked_flow):
        with pytest.raises(DimensionMismatch):
            evolve(worked_flow, np.eye(3), 1.0)

    @settings(
        max_examples=30,
        deadline=None,
        suppress_health_check=[HealthCheck.function_scoped_fixture],
    )
    @given(
        st.complex_numbers(max_magnitude=2, allow_nan=False),
        st.complex_numbers(max_magnitude=2, allow_nan=False),
    )
    def test_group_law(self, graded_case, z, w):
        _, _, flow, samples = graded_case
        a = samples[0]
        lhs = evolve(flow, evolve(flow, a, w), z)

        assert np.allclose(lhs, evolve(flow, a, z + w), rtol=1e-9)

    def test_real_times_are_automorphisms(self, graded_case):
        _, _, flow, (a, b, *_) = graded_case

        product = evolve(flow, a, 0.8) @ evolve(flow, b, 0.8)

        assert np.allclose(evolve(flow, a @ b, 0.8), product)
        assert np.allclose(
            evolve(flow, a.conj().T, 0.8), evolve(flow, a, 0.8).conj().T
        )

    def test_commutes_with_grading(self, graded_case):
        A, _, flow, (a, *_) = graded_case

        assert np.allclose(
            evolve(flow, A.gamma(a), 0.3 + 0.4j),
            A.gamma(evolve(flow, a, 0.3 + 0.4j)),
        )

    def test_tracial_flow_is_trivial(self, random_elements):
        flow = ModularFlow.from_density(np.eye(3) / 3)
        a = random_elements(3, 1)[0]

        assert np.allclose(evolve(flow, a, 1.3 + 2j), a)


class TestCondition:
    def test_ill_conditioned(self):
        with pytest.raises(IllConditioned):
            check_condition(1e7)

    def test_allowed(self):
        check_condition(1e7, allow_ill_conditioned=True)


class TestGradedKms:
    def test_worked_pair(
        self, worked_algebra, worked_omega, worked_flow, unit
    ):
        a, b = unit(2, 1, 0), unit(2, 0, 1)

        assert worked_omega(a @ b) == pytest.approx(-0.25)
        rhs = worked_omega(
            worked_algebra.gamma(b) @ evolve(worked_flow, a, 1j)
        )
        assert rhs == pytest.approx(-0.25)
        assert graded_kms_residual(
            worked_omega, worked_flow, worked_algebra, a, b
        ) < 1e-14

    def test_random_pairs(self, graded_case):
        A, omega, flow, samples = graded_case
        worst = max(
            graded_kms_residual(omega, flow, A, a, b)
            for a in samples
            for b in samples
        )

        assert worst < 1e-12

    def test_modulus_satisfies_ungraded_condition(self, graded_case):
        _, omega, flow, samples = graded_case
        mod = modulus(omega)

        assert max(
            kms_residual(mod, flow, a, b) for a in samples for b in samples
        ) < 1e-12

    def test_mismatched_flow(self, worked_algebra, worked_omega, unit):
        flow = ModularFlow.from_density(np.eye(2) / 2)
        residual = graded_kms_residual(
            worked_omega, flow, worked_algebra, unit(2, 1, 0), unit(2, 0, 1)
        )

        assert residual == pytest.approx(0.5)

    def test_tracial_ungraded(self, random_elements):
        A = GradedAlgebra.from_sectors(3, 0)
        rho = np.eye(3) / 3
        omega = supertrace_functional(A, rho)
        flow = ModularFlow.from_density(rho)
        a, b = random_elements(3, 2)

        assert graded_kms_residual(omega, flow, A, a, b) < 1e-15


class TestStrip:
    def test_boundary_values(self, graded_case):
        A, omega, flow, (a, b, *_) = graded_case

        assert strip_function(omega, flow, a, b, 0.4) == pytest.approx(
            omega(a @ evolve(flow, b, 0.4))
        )
        for t in (-2.0, 0.0, 1.5):
            assert strip_boundary_residual(omega, flow, A, a, b, t) < 1e-12

    def test_derivatives_match_difference_quotient(self, graded_case):
        _, omega, flow, (a, b, *_) = graded_case
        z0, h = 0.2 + 0.5j, 1e-5
        derivs = strip_derivatives(omega, flow, a, b, z0, 1)
        quotient = (
            strip_function(omega, flow, a, b, z0 + h)
            - strip_function(omega, flow, a, b, z0 - h)
        ) / (2 * h)

        assert derivs[0] == pytest.approx(
            strip_function(omega, flow, a, b, z0)
        )
        assert derivs[1] == pytest.approx(quotient, rel=1e-6)

    def test_taylor(self, graded_case):
        _, omega, flow, (a, b, *_) = graded_case

        assert taylor_residual(
            omega, flow, a, b, -0.5 + 0.1j, 0.5 + 0.9j, terms=20
        ) < 1e-10


class TestSmoothing:
    def test_worked_multiplier(self, worked_flow, unit):
        e = unit(2, 0, 1)
        expected = math.exp(-math.log(3) ** 2 / 4)

        assert np.allclose(smooth(worked_flow, e, 1.0), expected * e)

    def test_quadrature_matches_closed_form(self, graded_case):
        _, _, flow, (a, *_) = graded_case
        for z in (0, 0.5j, -0.3 + 0.2j):
            assert np.allclose(
                smooth_quadrature(flow, a, 0.5, z),
                smooth(flow, a, 0.5, z),
                atol=1e-10,
            )

    def test_riemann_converges(self, graded_case):
        _, _, flow, (a, *_) = graded_case
        exact = smooth(flow, a, 0.5)
        coarse = smooth_riemann(flow, a, 0.5, half_width=0.5, steps=51)
        fine = smooth_riemann(flow, a, 0.5)

        assert np.linalg.norm(fine - exact) < 1e-10
        assert np.linalg.norm(coarse - exact) > np.linalg.norm(fine - exact)

    def test_shift(self, graded_case):
        _, _, flow, (a, *_) = graded_case

        assert np.allclose(
            evolve(flow, smooth(flow, a, 0.5, 0.2), 0.5j),
            smooth(flow, a, 0.5, 0.2 + 0.5j),
        )

    def test_small_width_recovers_element(self, worked_flow, random_elements):
        for a in random_elements(2, 4, seed=11):
            error = np.linalg.norm(smooth(worked_flow, a, 0.01) - a)

            assert error < 1e-4 * np.linalg.norm(a)

    def test_small_width_residuals(
        self, worked_algebra, worked_omega, worked_flow, random_elements
    ):
        A, omega, flow = worked_algebra, worked_omega, worked_flow
        samples = random_elements(2, 4, seed=12)
        for x, y in zip(samples, samples[1:]):
            y_s = smooth(flow, y, 1e-3)
            for t in (-1.0, 0.0, 0.5):
                near = strip_boundary_residual(omega, flow, A, x, y_s, t)
                bare = strip_boundary_residual(omega, flow, A, x, y, t)
                assert abs(near - bare) < 1e-6

                shift = strip_function(omega, flow, x, y_s, t + 1j)
                shift -= strip_function(omega, flow, x, y, t + 1j)
                assert abs(shift) < 1e-6 * kms_scale(flow, omega, x, y)
            near = graded_kms_residual(omega, flow, A, x, y_s)
            bare = graded_kms_residual(omega, flow, A, x, y)
            assert abs(near - bare) < 1e-6

    @pytest.mark.parametrize("sigma", [0.0, -1.0])
    def test_nonpositive_sigma(self, worked_flow, sigma):
        with pytest.raises(NonpositiveSigma):
            smooth(worked_flow, np.eye(2), sigma)


class TestGrowthProbe:
    def test_bounded_function(self):
        estimate = growth_probe(lambda z: np.exp(1j * z), 16.0, 3)

        assert estimate.N == 0
        assert estimate.holds()

    def test_polynomial_function(self):
        estimate = growth_probe(lambda z: (1 + z) ** 3, 64.0, 3)

        assert estimate.N == 3
        assert estimate.holds()
