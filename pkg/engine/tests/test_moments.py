import numpy as np
import pytest
from pydantic import ValidationError

from hawkes.enums import MomentKind, Process
from hawkes.exceptions import DomainError, UnstableModelError
from hawkes.moments import (
    MomentRequest,
    decorrelation_horizon,
    mean_via_renewal,
    moment,
    moment_table,
    parse_statistic,
    richardson,
)
from hawkes.simulate import mc_moments

from .conftest import build_model, exponential_kernels

MG_INFINITY_MEAN = -np.expm1(-2.0) / 2
BIVARIATE_STATIONARY = (2.2794, 1.8824)


def estimate(model, code, t, tau=None, **options):
    return moment(model, MomentRequest.from_statistic(code, t, tau), **options)


@pytest.mark.unit
class TestRequests:
    @pytest.mark.parametrize("code,expected", [
        ("mean_Q_1", (MomentKind.MEAN_Q, 0, None)),
        ("var_lambda_2", (MomentKind.VAR_LAMBDA, 1, None)),
        ("cross_QL_1_2", (MomentKind.CROSS_QL, 0, 1)),
        ("twotime_QQ_2_1", (MomentKind.TWO_TIME_QQ, 1, 0)),
    ])
    def test_parse_statistic(self, code, expected):
        assert parse_statistic(code) == expected

    @pytest.mark.parametrize("code", ["mean_N_1", "mean_Q", "mean_Q_0", "cross_QQ_1_0"])
    def test_unknown_statistics_rejected(self, code):
        with pytest.raises(DomainError):
            parse_statistic(code)

    def test_statistic_code_round_trip(self):
        assert MomentRequest.from_statistic("cross_QQ_1_2", 1.0).statistic == "cross_QQ_1_2"

    def test_pair_statistic_needs_second_component(self):
        with pytest.raises(ValidationError):
            MomentRequest(kind=MomentKind.CROSS_QQ, i=0, t=1.0)

    def test_single_statistic_rejects_second_component(self):
        with pytest.raises(ValidationError):
            MomentRequest(kind=MomentKind.MEAN_Q, i=0, j=1, t=1.0)

    def test_two_time_needs_positive_lag(self):
        with pytest.raises(ValidationError):
            MomentRequest(kind=MomentKind.TWO_TIME_QQ, i=0, j=0, t=1.0)

    def test_richardson_removes_quadratic_error(self):
        # f(h) = 1 + h^2 at h = 0.2 and 0.1
        value, error = richardson(1.04, 1.01)
        assert value == pytest.approx(1.0)
        assert error == pytest.approx(0.01)


@pytest.mark.unit
class TestTransformRoute:
    def test_mg_infinity_mean_and_variance(self, mg_infinity_model):
        mean = estimate(mg_infinity_model, "mean_Q_1", 1.0)
        variance = estimate(mg_infinity_model, "var_Q_1", 1.0)
        assert mean.value == pytest.approx(MG_INFINITY_MEAN, abs=2e-6)
        assert variance.value == pytest.approx(MG_INFINITY_MEAN, abs=1e-5)
        assert mean.error_estimate < 1e-6

    def test_values_at_origin_are_exact(self, bivariate_model):
        assert estimate(bivariate_model, "mean_lambda_2", 0.0).value == 0.5
        assert estimate(bivariate_model, "mean_Q_1", 0.0).value == 0.0
        assert estimate(bivariate_model, "var_lambda_1", 0.0).error_estimate == 0.0

    def test_poisson_pair_cross_moments(self, poisson_pair):
        assert estimate(poisson_pair, "cross_QQ_1_2", 1.0).value == pytest.approx(0.25, abs=1e-5)
        assert estimate(poisson_pair, "cross_QQ_1_1", 1.0).value == pytest.approx(0.75, abs=1e-5)
        assert estimate(poisson_pair, "cross_QL_1_2", 1.0).value == pytest.approx(0.25, abs=1e-5)

    def test_poisson_intensity_is_deterministic(self, poisson_model):
        assert estimate(poisson_model, "mean_lambda_1", 2.0).value == pytest.approx(0.5, abs=1e-6)
        assert estimate(poisson_model, "var_lambda_1", 2.0).value == pytest.approx(0.0, abs=1e-6)

    def test_poisson_two_time_moment(self, poisson_model):
        # E[N(1) N(2)] = E[N(1)^2] + E[N(1)] E[N(1)] for rate 0.5
        value = estimate(poisson_model, "twotime_QQ_1_1", 1.0, tau=1.0).value
        assert value == pytest.approx(0.5 + 0.25 + 0.25, abs=1e-5)

    def test_intensity_mean_exceeds_base_rate(self, bivariate_model):
        value = estimate(bivariate_model, "mean_lambda_1", 2.0, grid_steps=256).value
        assert 0.5 < value < BIVARIATE_STATIONARY[0]

    def test_component_out_of_range(self, bivariate_model):
        with pytest.raises(DomainError):
            estimate(bivariate_model, "mean_Q_3", 1.0)

    def test_unstable_model_rejected(self):
        unstable = build_model([0.5], exponential_kernels(1), [[{"type": "constant", "b": 2.0}]],
                               [{"type": "infinite"}])
        with pytest.raises(UnstableModelError):
            estimate(unstable, "mean_Q_1", 1.0)

    def test_moment_table_layout(self, poisson_pair):
        table = moment_table(poisson_pair, [0.0, 1.0], ["mean_Q_1", "cross_QQ_1_2"])
        assert list(table.columns) == ["t", "statistic", "value", "error_estimate"]
        assert list(table["statistic"]) == ["mean_Q_1", "cross_QQ_1_2"] * 2
        np.testing.assert_allclose(table["value"], [0.0, 0.0, 0.5, 0.25], atol=1e-5)

    def test_decorrelation_horizon(self, bivariate_model):
        assert decorrelation_horizon(bivariate_model) == pytest.approx(20 / (1 - 0.767036), rel=1e-5)


@pytest.mark.integration
class TestRenewalRoute:
    @pytest.mark.parametrize("process", [Process.Q, Process.N, Process.LAMBDA])
    def test_renewal_at_origin(self, bivariate_model, process):
        expected = 0.5 if process is Process.LAMBDA else 0.0
        assert mean_via_renewal(bivariate_model, 0, 0.0, process) == expected

    def test_mg_infinity_renewal_mean(self, mg_infinity_model):
        assert mean_via_renewal(mg_infinity_model, 0, 1.0) == pytest.approx(MG_INFINITY_MEAN, abs=2e-6)

    @pytest.mark.parametrize("i", [0, 1])
    def test_agrees_with_transform_route(self, bivariate_model, i):
        transform = estimate(bivariate_model, f"mean_Q_{i + 1}", 2.0).value
        renewal = mean_via_renewal(bivariate_model, i, 2.0)
        assert renewal == pytest.approx(transform, rel=1e-3)

    @pytest.mark.parametrize("seed", range(20))
    def test_agrees_with_transform_route_on_random_models(self, random_stable_model, seed):
        model = random_stable_model(seed)
        for i in range(model.d):
            transform = estimate(model, f"mean_Q_{i + 1}", 1.5).value
            renewal = mean_via_renewal(model, i, 1.5)
            assert renewal == pytest.approx(transform, rel=1e-3, abs=1e-6)

    def test_arrival_mean_dominates_queue_mean(self, bivariate_model):
        assert mean_via_renewal(bivariate_model, 0, 2.0, Process.N) > mean_via_renewal(bivariate_model, 0, 2.0)

    @pytest.mark.parametrize("i", [0, 1])
    def test_intensity_mean_approaches_stationary_level(self, bivariate_model, i):
        value = mean_via_renewal(bivariate_model, i, 30.0, Process.LAMBDA, grid_steps=2048)
        assert value == pytest.approx(BIVARIATE_STATIONARY[i], rel=2e-3)

    def test_component_out_of_range(self, bivariate_model):
        with pytest.raises(DomainError):
            mean_via_renewal(bivariate_model, 2, 1.0)


@pytest.mark.slow
class TestMonteCarloAgreement:
    @pytest.mark.parametrize("fixture", ["bivariate_model", "bivariate_power_law_model"])
    def test_every_statistic_matches_on_time_grid(self, request, fixture):
        model = request.getfixturevalue(fixture)
        empirical = mc_moments(model, [1.0, 2.0, 3.0], runs=4000, seed=7)
        exact = moment_table(model, [1.0, 2.0, 3.0], empirical["statistic"].unique(), grid_steps=256)
        joined = exact.merge(empirical, on=["t", "statistic"], suffixes=("_exact", "_mc"))
        assert len(joined) == len(empirical)
        for row in joined.itertuples():
            gap = abs(row.value_exact - row.value_mc)
            allowed = 4 * (row.error_estimate_mc + row.error_estimate_exact) + 2e-3 * max(1.0, abs(row.value_exact))
            assert gap < allowed, f"{row.statistic} at t={row.t}"
