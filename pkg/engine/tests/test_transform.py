from math import factorial

import numpy as np
import pytest
from scipy.stats import poisson

from hawkes.enums import MarkCoupling
from hawkes.exceptions import ClaimTransformError, DomainError, NonConvergenceError, UnstableModelError
from hawkes.quadrature import Grid
from hawkes.schemas import ExponentialJump, ExponentialSojourn
from hawkes.transform import (
    TransformField,
    TransformQuery,
    claim_lst,
    compound_lst,
    convergence_constant,
    convergence_envelope,
    envelope_rate,
    evaluate_joint_transform,
    evaluate_two_time_pgf,
    fixed_point,
    joint_N_lambda,
    joint_transform,
    lst_lambda,
    phi_apply,
    pgf_Q,
    pmf_Q,
    richardson_ratio,
    two_time_pgf,
)

from .conftest import ZERO, build_model, exponential_kernels

MG_INFINITY_MEAN = -np.expm1(-2.0) / 2  # E[Q(1)] for lambda=1, mu=2


@pytest.mark.unit
class TestQueries:
    def test_build_broadcasts_scalars(self, bivariate_model):
        query = TransformQuery.build(bivariate_model, 2.0, s=0.5, z=0.25)
        assert query.s == (0.5, 0.5)
        assert query.z == (0.25 + 0j, 0.25 + 0j)

    @pytest.mark.parametrize("t,s,z", [
        (-1.0, (0.0,), (1.0,)),
        (1.0, (-0.1,), (1.0,)),
        (1.0, (0.0,), (1.5,)),
        (1.0, (0.0, 0.0), (1.0,)),
    ])
    def test_rejects_arguments_outside_domain(self, t, s, z):
        with pytest.raises(DomainError):
            TransformQuery(t, s, z)

    def test_unit_circle_is_admissible(self, bivariate_model):
        query = TransformQuery.build(bivariate_model, 1.0, z=np.exp(1j * np.pi / 3))
        assert abs(query.z[0]) == pytest.approx(1.0)


@pytest.mark.unit
class TestFixedPoint:
    def test_constant_field_is_fixed_at_trivial_arguments(self, bivariate_model):
        query = TransformQuery.build(bivariate_model, 3.0)
        grid = Grid(3.0, 128)
        image = phi_apply(bivariate_model, TransformField.constant(query, grid, bivariate_model.d))
        np.testing.assert_allclose(image.values, 1.0, atol=1e-14)

    def test_first_iterate_closed_form(self, self_exciting_model):
        s, z = 0.8, 0.6
        query = TransformQuery.build(self_exciting_model, 2.0, s=s, z=z)
        grid = Grid(2.0, 256)
        image = phi_apply(self_exciting_model, TransformField.constant(query, grid, 1))
        expected = z * np.exp(-0.5 * s * np.exp(-2.0 * grid.u))
        np.testing.assert_allclose(image.values[:, 0], expected, rtol=1e-12)

    def test_root_only_field_at_age_zero(self, bivariate_model):
        query = TransformQuery.build(bivariate_model, 2.0, z=(0.3, 0.7))
        solved = fixed_point(bivariate_model, query, Grid(2.0, 128))
        # a cluster of age 0 is just its root, still present
        np.testing.assert_allclose(solved.values[0], [0.3, 0.7], atol=1e-12)

    def test_converges_from_different_initial_fields(self, bivariate_model):
        query = TransformQuery.build(bivariate_model, 5.0, s=(0.2, 0.0), z=(0.9, 1.0))
        grid = Grid(5.0, 256)
        from_one = fixed_point(bivariate_model, query, grid, initial=1.0)
        from_half = fixed_point(bivariate_model, query, grid, initial=0.5)
        np.testing.assert_allclose(from_one.values, from_half.values, atol=1e-9)

    def test_residual_trace_decays_to_tolerance(self, bivariate_model):
        query = TransformQuery.build(bivariate_model, 5.0, z=(0.5, 0.5))
        solved = fixed_point(bivariate_model, query, Grid(5.0, 256), tol=1e-10)
        trace = np.array(solved.residual_trace)
        assert solved.iterations == len(trace)
        assert trace[-1] < 1e-10
        assert np.all(np.diff(trace[2:]) < 0)

    def test_iteration_cap_raises(self, bivariate_model):
        query = TransformQuery.build(bivariate_model, 5.0, z=(0.5, 0.5))
        with pytest.raises(NonConvergenceError) as info:
            fixed_point(bivariate_model, query, Grid(5.0, 128), tol=1e-14, max_iter=3)
        assert info.value.exit_code == 3
        assert len(info.value.residual_trace) == 3

    def test_unstable_model_rejected(self):
        unstable = build_model([0.5], exponential_kernels(1, 1.0), [[{"type": "constant", "b": 1.5}]],
                               [{"type": "infinite"}])
        with pytest.raises(UnstableModelError):
            fixed_point(unstable, TransformQuery.build(unstable, 1.0, z=0.5))

    def test_grid_horizon_must_match(self, bivariate_model):
        query = TransformQuery.build(bivariate_model, 2.0)
        with pytest.raises(DomainError):
            fixed_point(bivariate_model, query, Grid(3.0, 64))

    def test_mark_couplings_agree_without_offspring_load(self, bivariate_model):
        # with s = 0 the intensity load vanishes and both couplings give the same map
        query = TransformQuery.build(bivariate_model, 2.0, z=(0.4, 0.8))
        grid = Grid(2.0, 128)
        shared = fixed_point(bivariate_model, query, grid, mark_coupling=MarkCoupling.SHARED)
        independent = fixed_point(bivariate_model, query, grid, mark_coupling=MarkCoupling.INDEPENDENT)
        np.testing.assert_allclose(shared.values, independent.values, atol=1e-12)

    def test_convergence_constant(self, bivariate_model):
        assert convergence_constant(bivariate_model) == pytest.approx(2 * 1.3 / 2.3)

    def test_envelope_rate(self, bivariate_model):
        # column sums of E[B_mj] g_mj(0): 1.3 + 0.8 and 0.6 + 0.5
        assert envelope_rate(bivariate_model) == pytest.approx(2.1)

    def test_envelope_approaches_factorial(self, bivariate_model):
        grid = Grid(2.0, 256)
        envelope = convergence_envelope(bivariate_model, grid, 12)
        rate = envelope_rate(bivariate_model) * grid.t
        expected = np.array([rate ** n / factorial(n) for n in range(12)])
        np.testing.assert_allclose(envelope, expected, rtol=1e-2)


@pytest.mark.integration
class TestConvergenceEnvelope:
    @pytest.mark.parametrize("seed", range(20))
    def test_residual_trace_within_factorial_envelope(self, random_stable_model, seed):
        model = random_stable_model(seed)
        rng = np.random.default_rng(1000 + seed)
        z = rng.uniform(0.0, 1.0, size=model.d) * np.exp(2j * np.pi * rng.uniform(size=model.d))
        query = TransformQuery.build(model, 2.0, s=rng.uniform(0.0, 1.0, size=model.d), z=z)
        grid = Grid(2.0, 256)
        solved = fixed_point(model, query, grid, tol=1e-10)

        trace = np.array(solved.residual_trace)
        # the first residual fixes the constant; every later one must stay under it
        bound = trace[0] * convergence_envelope(model, grid, len(trace))
        assert np.all(trace <= bound * (1 + 1e-8) + 1e-14)


@pytest.mark.unit
class TestEvaluations:
    def test_joint_transform_carries_fixed_point_record(self, bivariate_model):
        query = TransformQuery.build(bivariate_model, 2.0, s=(0.3, 0.1), z=(0.5, 0.7))
        grid = Grid(2.0, 128)
        result = evaluate_joint_transform(bivariate_model, query, grid, tol=1e-10)
        solved = fixed_point(bivariate_model, query, grid, tol=1e-10)
        assert result.iterations == solved.iterations
        assert result.residual == solved.residual
        assert result.value == joint_transform(bivariate_model, query, grid, tol=1e-10)

    def test_origin_needs_no_iterations(self, bivariate_model):
        result = evaluate_joint_transform(bivariate_model, TransformQuery.build(bivariate_model, 0.0, s=(0.3, 0.7)))
        assert result.iterations == 0
        assert result.residual == 0.0
        assert result.value == pytest.approx(np.exp(-0.5 * 0.3 - 0.5 * 0.7))

    def test_two_time_sums_both_solves(self, bivariate_model):
        single = evaluate_joint_transform(bivariate_model, TransformQuery.build(bivariate_model, 1.5, z=(0.8, 0.8)),
                                          Grid(1.5, 64), tol=1e-8)
        both = evaluate_two_time_pgf(bivariate_model, 1.0, 0.5, 0.8, 0.8, grid_steps=64, tol=1e-8)
        assert both.iterations > single.iterations
        assert both.residual < 1e-8


@pytest.mark.unit
class TestTransforms:
    def test_poisson_pgf(self, poisson_model):
        assert pgf_Q(poisson_model, 2.0, 0.5) == pytest.approx(np.exp(-0.5), abs=1e-12)

    def test_mg_infinity_empty_probability(self, mg_infinity_model):
        assert pgf_Q(mg_infinity_model, 1.0, 0.0).real == pytest.approx(np.exp(-MG_INFINITY_MEAN), abs=1e-6)

    def test_normalization(self, bivariate_model):
        value = joint_transform(bivariate_model, TransformQuery.build(bivariate_model, 3.0))
        assert value == pytest.approx(1.0, abs=1e-12)

    def test_origin_is_deterministic(self, bivariate_model):
        value = lst_lambda(bivariate_model, 0.0, (0.3, 0.7))
        assert value == pytest.approx(np.exp(-0.5 * 0.3 - 0.5 * 0.7))

    def test_lambda_lst_lies_in_unit_interval(self, bivariate_model):
        value = lst_lambda(bivariate_model, 2.0, (1.0, 1.0), grid_steps=256)
        assert 0 < value < np.exp(-1.0)

    def test_arrivals_ignore_sojourns(self, bivariate_model):
        slower = bivariate_model.model_copy(update={"sojourns": (ExponentialSojourn(mu=0.1),) * 2})
        fast = joint_N_lambda(bivariate_model, 2.0, (0.1, 0.2), (0.6, 0.9), grid_steps=256)
        slow = joint_N_lambda(slower, 2.0, (0.1, 0.2), (0.6, 0.9), grid_steps=256)
        assert fast == pytest.approx(slow, abs=1e-14)

    def test_queue_dominates_arrivals(self, bivariate_model):
        # Q <= N pathwise, so E[z^Q] >= E[z^N] for real z in [0, 1]
        queue = pgf_Q(bivariate_model, 2.0, (0.5, 0.5), grid_steps=256).real
        arrivals = joint_N_lambda(bivariate_model, 2.0, (0.0, 0.0), (0.5, 0.5), grid_steps=256).real
        assert queue > arrivals

    def test_two_time_poisson(self, poisson_model):
        lam, t, tau, y, z = 0.5, 1.0, 0.5, 0.5, 0.8
        expected = np.exp(lam * t * (y * z - 1)) * np.exp(lam * tau * (z - 1))
        assert two_time_pgf(poisson_model, t, tau, y, z) == pytest.approx(expected, abs=1e-12)

    def test_two_time_reduces_to_later_pgf(self, bivariate_model):
        z = (0.7, 0.9)
        joint = two_time_pgf(bivariate_model, 1.0, 1.0, 1.0, z)
        later = pgf_Q(bivariate_model, 2.0, z)
        assert joint == pytest.approx(later, abs=1e-5)

    def test_two_time_rejects_non_positive_lag(self, bivariate_model):
        with pytest.raises(DomainError):
            two_time_pgf(bivariate_model, 1.0, 0.0, 1.0, 1.0)

    def test_compound_poisson_lst(self, poisson_model):
        claims = [claim_lst(ExponentialJump(mean=1.0))]
        # T{U}(1) = 1/2, so the LST is E[(1/2)^N(1)] with N(1) ~ Poisson(0.5)
        assert compound_lst(poisson_model, 1.0, 1.0, claims) == pytest.approx(np.exp(-0.25), abs=1e-12)

    @pytest.mark.parametrize("bad_value", [0.0, 1.5])
    def test_claim_transform_outside_unit_interval(self, poisson_model, bad_value):
        with pytest.raises(ClaimTransformError):
            compound_lst(poisson_model, 1.0, 1.0, [lambda s: bad_value])


@pytest.mark.integration
class TestPmf:
    def test_poisson_pmf(self):
        model = build_model([1.0], exponential_kernels(1), [[ZERO]], [{"type": "infinite"}])
        result = pmf_Q(model, 1.0, 0, max_k=15)
        assert result.probabilities[0] == pytest.approx(np.exp(-1.0), abs=1e-9)
        np.testing.assert_allclose(result.probabilities, poisson.pmf(np.arange(16), 1.0), atol=1e-9)
        assert not result.aliasing_warning

    def test_mg_infinity_is_poisson(self, mg_infinity_model):
        result = pmf_Q(mg_infinity_model, 1.0, 0, max_k=10)
        np.testing.assert_allclose(result.probabilities, poisson.pmf(np.arange(11), MG_INFINITY_MEAN), atol=1e-6)

    def test_bivariate_pmf_is_a_distribution(self, bivariate_model):
        result = pmf_Q(bivariate_model, 1.0, 0, max_k=31, grid_steps=256)
        assert result.points == 64
        assert np.all(result.probabilities >= 0)
        assert result.probabilities.sum() == pytest.approx(1.0, abs=1e-6)
        assert result.renormalization_error < 1e-6
        frame = result.to_frame()
        assert list(frame.columns) == ["k", "probability"]

    def test_too_few_points_rejected(self, poisson_model):
        with pytest.raises(DomainError):
            pmf_Q(poisson_model, 1.0, 0, max_k=10, points=16)

    def test_component_out_of_range(self, poisson_model):
        with pytest.raises(DomainError):
            pmf_Q(poisson_model, 1.0, 1, max_k=4)


@pytest.mark.integration
def test_trapezoid_error_is_second_order(bivariate_model):
    query = TransformQuery.build(bivariate_model, 2.0, z=(0.5, 0.5))
    ratio = richardson_ratio(bivariate_model, query, 64)
    assert 3.5 < ratio < 4.5
