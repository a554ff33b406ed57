import numpy as np
import pytest
from scipy.integrate import quad

from hawkes.enums import InversionMethod
from hawkes.exceptions import DomainError
from hawkes.laplace import (
    compare_fractional,
    compare_renewal,
    default_inversion,
    dehoog,
    invert_renewal,
    kernel_transform,
    laplace_renewal,
    piecewise_linear_transform,
    survival_transform,
    talbot,
)
from hawkes.quadrature import Grid
from hawkes.schemas import DeterministicSojourn, ExponentialKernel, PowerLawKernel

TIMES = np.array([0.5, 1.0, 2.0, 5.0])


@pytest.mark.unit
class TestInversion:
    @pytest.mark.parametrize("a", [0.5, 2.0])
    def test_talbot_exponential(self, a):
        values = talbot(lambda r: np.array(1.0 / (r + a)), TIMES)
        np.testing.assert_allclose(values, np.exp(-a * TIMES), atol=1e-7)

    @pytest.mark.parametrize("a", [0.5, 2.0])
    def test_dehoog_exponential(self, a):
        values = dehoog(lambda r: np.array(1.0 / (r + a)), TIMES)
        np.testing.assert_allclose(values, np.exp(-a * TIMES), atol=1e-6)

    def test_vector_valued_transforms_keep_shape(self):
        values = talbot(lambda r: np.array([1.0 / r, 1.0 / r ** 2]), TIMES)
        assert values.shape == (4, 2)
        np.testing.assert_allclose(values[:, 0], 1.0, atol=1e-7)
        np.testing.assert_allclose(values[:, 1], TIMES, atol=1e-7)

    def test_dehoog_sine(self):
        values = dehoog(lambda r: np.array(1.0 / (r ** 2 + 1.0)), TIMES)
        np.testing.assert_allclose(values, np.sin(TIMES), atol=1e-6)

    @pytest.mark.parametrize("inverter", [talbot, dehoog])
    def test_times_must_be_positive(self, inverter):
        with pytest.raises(DomainError):
            inverter(lambda r: np.array(1.0 / r), [0.0, 1.0])


@pytest.mark.unit
class TestTransforms:
    def test_exponential_kernel(self):
        assert kernel_transform(ExponentialKernel(alpha=2.0), 1.0 + 1.0j) == pytest.approx(1 / (3.0 + 1.0j))

    def test_power_law_kernel_matches_quadrature(self):
        kernel = PowerLawKernel(c=1.5, p=2.5)
        expected, _ = quad(lambda u: (1.5 + u) ** -2.5 * np.exp(-0.7 * u), 0, np.inf)
        assert kernel_transform(kernel, 0.7).real == pytest.approx(expected, rel=1e-8)
        oscillating = kernel_transform(kernel, 0.7 + 2.0j)
        real, _ = quad(lambda u: (1.5 + u) ** -2.5 * np.exp(-0.7 * u) * np.cos(2.0 * u), 0, 50, limit=500)
        imag, _ = quad(lambda u: -(1.5 + u) ** -2.5 * np.exp(-0.7 * u) * np.sin(2.0 * u), 0, 50, limit=500)
        assert oscillating == pytest.approx(complex(real, imag), abs=1e-8)

    def test_power_law_kernel_needs_right_half_plane(self):
        with pytest.raises(DomainError):
            kernel_transform(PowerLawKernel(c=1.0, p=2.5), 0.0)

    def test_deterministic_sojourn(self):
        assert survival_transform(DeterministicSojourn(tau=2.0), 0.5) == pytest.approx((1 - np.exp(-1.0)) / 0.5)

    def test_piecewise_linear_transform_is_exact_for_lines(self):
        grid = Grid(1.0, 16)
        r = 1.3
        # f(u) = u on [0, 1], then held at 1
        expected = (1 - np.exp(-r) * (1 + r)) / r ** 2 + np.exp(-r) / r
        assert piecewise_linear_transform(grid.u, grid.h, r) == pytest.approx(expected, rel=1e-12)

    def test_renewal_transform_of_scalar_model(self, self_exciting_model):
        # G = b / (r + alpha), so Z_Q = (r + alpha) / (r (r + alpha - b))
        r = 0.8
        Z = laplace_renewal(self_exciting_model, r)
        assert Z[0, 0, 0] == pytest.approx((r + 2.0) / (r * (r + 1.5)))
        assert Z[1, 0, 0] == pytest.approx(0.5 / (r + 1.5))

    def test_default_inversion(self, bivariate_model, power_law_tail_model, mg_infinity_model):
        assert default_inversion(bivariate_model) is InversionMethod.TALBOT
        assert default_inversion(power_law_tail_model) is InversionMethod.DEHOOG
        delayed = mg_infinity_model.model_copy(update={"sojourns": (DeterministicSojourn(tau=1.0),)})
        assert default_inversion(delayed) is InversionMethod.DEHOOG


@pytest.mark.integration
class TestCrossChecks:
    def test_scalar_inversion_matches_closed_form(self, self_exciting_model):
        u = np.array([0.5, 1.0, 3.0])
        values = invert_renewal(self_exciting_model, u)
        np.testing.assert_allclose(values[:, 0, 0, 0], 1 + (1 - np.exp(-1.5 * u)) / 3, atol=1e-7)
        np.testing.assert_allclose(values[:, 1, 0, 0], 0.5 * np.exp(-1.5 * u), atol=1e-7)

    def test_exponential_model_talbot(self, bivariate_model):
        comparison = compare_renewal(bivariate_model, Grid(4.0, 1024), points=8)
        assert comparison.method is InversionMethod.TALBOT
        assert comparison.time_domain.shape == (8, 2, 2, 2)
        assert comparison.sup_error < 1e-4

    def test_methods_agree_on_rational_transforms(self, bivariate_model):
        u = np.array([0.5, 2.0])
        np.testing.assert_allclose(invert_renewal(bivariate_model, u, InversionMethod.TALBOT),
                                   invert_renewal(bivariate_model, u, InversionMethod.DEHOOG), atol=1e-6)

    def test_power_law_model_dehoog(self, power_law_tail_model):
        comparison = compare_renewal(power_law_tail_model, Grid(4.0, 1024), points=8)
        assert comparison.method is InversionMethod.DEHOOG
        assert comparison.sup_error < 5e-4

    @pytest.mark.parametrize("i", [0, 1])
    def test_fractional_systems(self, heavy_tail_model, i):
        comparison = compare_fractional(heavy_tail_model, Grid(4.0, 1024), i, points=8)
        scale = max(1.0, float(np.max(np.abs(comparison.laplace))))
        assert comparison.sup_error < 1e-4 * scale
