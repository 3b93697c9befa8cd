import math
import os
import unittest

import numpy as np

from core.bootstrap import build_context
from core.check_suites import suite_checks
from core.exceptions import GridError
from core.fields_calculus import ChartGrid
from core.fields_calculus import MetricField
from core.fields_calculus import covariant_derivative
from core.fields_calculus import covector_field
from core.fields_calculus import exterior_derivative
from core.fields_calculus import lie_derivative
from core.fields_calculus import partial_derivative_array
from core.fields_calculus import residual_norms
from core.fields_calculus import scalar_field
from core.fields_calculus import vector_field
from data.scenario_loader import load_scenario


SCENARIO_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "scenarios")


def spherical_grid(points: int = 9) -> ChartGrid:
    return ChartGrid(
        bounds = [(0.0, 0.0), (1.0, 2.0), (0.5, 1.0), (0.0, 0.0)],
        resolution = [1, points, points, 1]
    )


def flat_spherical(grid: ChartGrid) -> MetricField:
    """Flat space in spherical coordinates, static and axisymmetric.

    Args:
        grid: Grid over (t, r, theta, phi).
    """

    _, r, theta, _ = grid.mesh()
    g = np.zeros(grid.shape + (4, 4))
    g[..., 0, 0] = -1.0
    g[..., 1, 1] = 1.0
    g[..., 2, 2] = r ** 2
    g[..., 3, 3] = (r * np.sin(theta)) ** 2
    return MetricField.from_components(grid, g)


class TestChartGrid(unittest.TestCase):
    """Tests for grid construction and refinement."""

    def test_validation(self) -> None:
        """Should reject short stencils and empty boxes.

        Args:
            self: Test case instance.
        """

        with self.assertRaises(GridError):
            ChartGrid(bounds = [(0.0, 1.0)], resolution = [3])
        with self.assertRaises(GridError):
            ChartGrid(bounds = [(1.0, 0.0)], resolution = [5])
        with self.assertRaises(GridError):
            ChartGrid(bounds = [(0.0, 1.0)], resolution = [5, 5])

    def test_refine_keeps_symmetry_axes(self) -> None:
        """Should halve spacing on resolved axes only.

        Args:
            self: Test case instance.
        """

        grid = spherical_grid()
        fine = grid.refine(2)
        self.assertEqual(fine.shape, (1, 33, 33, 1))
        self.assertEqual(fine.symmetry_axes, (0, 3))
        self.assertAlmostEqual(fine.spacing[1], grid.spacing[1] / 4.0)
        self.assertEqual(fine.spacing[0], 0.0)

    def test_quadratic_partials_are_exact(self) -> None:
        """Should differentiate quadratics exactly, edges included.

        Args:
            self: Test case instance.
        """

        grid = spherical_grid()
        _, r, theta, _ = grid.mesh()
        values = r ** 2 - 3.0 * r * theta
        np.testing.assert_allclose(
            partial_derivative_array(values, grid, axis = 1),
            2.0 * r - 3.0 * theta,
            atol = 1e-12
        )
        np.testing.assert_array_equal(partial_derivative_array(values, grid, axis = 3), 0.0)
        with self.assertRaises(GridError):
            partial_derivative_array(values, grid, axis = 4)


class TestMetricCalculus(unittest.TestCase):
    """Tests for connection, curvature and derivatives on a metric grid."""

    def setUp(self) -> None:
        self.grid = spherical_grid()
        self.metric = flat_spherical(self.grid)
        _, self.r, self.theta, _ = self.grid.mesh()

    def test_radial_christoffel_symbols(self) -> None:
        """Should recover the radial connection coefficients exactly.

        Args:
            self: Test case instance.
        """

        gamma = self.metric.christoffel
        np.testing.assert_allclose(gamma.components[..., 1, 2, 2], -self.r, atol = 1e-10)
        np.testing.assert_allclose(gamma.components[..., 2, 1, 2], 1.0 / self.r, atol = 1e-10)
        np.testing.assert_allclose(gamma.components[..., 3, 1, 3], 1.0 / self.r, atol = 1e-10)
        self.assertLess(gamma.symmetry_defect(), 1e-12)

    def test_metric_compatibility(self) -> None:
        """Should give a covariantly constant metric.

        Args:
            self: Test case instance.
        """

        nabla = covariant_derivative(self.metric.as_field(), self.metric)
        np.testing.assert_allclose(nabla.components, 0.0, atol = 1e-10)

    def test_flat_curvature_converges(self) -> None:
        """Should drive the Einstein tensor of flat space to zero at second order.

        Args:
            self: Test case instance.
        """

        coarse = residual_norms(self.metric.einstein.components, self.grid, margin = 2, stride = 1)
        fine_grid = self.grid.refine(1)
        fine_metric = flat_spherical(fine_grid)
        fine = residual_norms(fine_metric.einstein.components, fine_grid, margin = 2, stride = 2)
        self.assertGreater(coarse.linf, fine.linf)
        self.assertGreater(coarse.linf / fine.linf, 3.0)

    def test_dd_vanishes(self) -> None:
        """Should give d(dA) = 0 to roundoff for any grid 1-form.

        Args:
            self: Test case instance.
        """

        potential = covector_field(
            self.grid,
            [self.r * self.theta, self.r ** 2, np.sin(self.theta) * self.r, self.theta ** 2]
        )
        twice = exterior_derivative(exterior_derivative(potential))
        self.assertEqual(twice.value.degree, 3)
        np.testing.assert_allclose(twice.components, 0.0, atol = 1e-9)

    def test_lie_derivative_is_connection_free(self) -> None:
        """Should agree between partial and covariant forms for a symmetric connection.

        Args:
            self: Test case instance.
        """

        zeta = vector_field(self.grid, [0.0, self.r * self.theta, np.sin(self.theta), 0.0])
        kappa = covector_field(self.grid, [1.0, self.r ** 2, self.r * np.cos(self.theta), 0.5])
        local = lie_derivative(zeta = zeta, kappa = kappa)
        covariant = lie_derivative(zeta = zeta, kappa = kappa, metric_field = self.metric)
        np.testing.assert_allclose(covariant.components, local.components, atol = 1e-10)

        phi = scalar_field(self.grid, self.r ** 2)
        transported = lie_derivative(zeta = zeta, kappa = phi)
        np.testing.assert_allclose(transported.components, 2.0 * self.r * self.r * self.theta, atol = 1e-10)


class TestResidualNorms(unittest.TestCase):
    """Tests for interior-band residual norms."""

    def setUp(self) -> None:
        self.grid = ChartGrid(bounds = [(0.0, 0.0), (0.0, 1.0), (0.0, 1.0), (0.0, 0.0)], resolution = [1, 17, 17, 1])

    def test_worst_point_on_fine_grid(self) -> None:
        """Should sample coarse points and report fine-grid indices.

        Args:
            self: Test case instance.
        """

        values = np.zeros(self.grid.shape + (4,))
        values[0, 6, 10, 0, 2] = -3.0
        values[0, 7, 10, 0, 1] = 50.0
        norms = residual_norms(values, self.grid, margin = 1, stride = 2)
        self.assertEqual(norms.linf, 3.0)
        self.assertEqual(norms.worst_point, (0, 6, 10, 0))
        self.assertAlmostEqual(norms.l2, 0.375)

    def test_non_finite_and_margin(self) -> None:
        """Should report infinity for NaN and refuse an empty band.

        Args:
            self: Test case instance.
        """

        values = np.zeros(self.grid.shape)
        values[0, 8, 8, 0] = np.nan
        norms = residual_norms(values, self.grid, margin = 1)
        self.assertTrue(math.isinf(norms.linf))
        self.assertIsNone(norms.worst_point)
        with self.assertRaises(GridError):
            residual_norms(np.zeros(self.grid.shape), self.grid, margin = 5, stride = 2)


class TestRandomizedLemmas(unittest.TestCase):
    """Tests for the randomized Lie lemma on the Schwarzschild chart."""

    @classmethod
    def setUpClass(cls) -> None:
        cls.scenario = load_scenario(os.path.join(SCENARIO_DIR, "schwarzschild_vacuum.yaml"))
        cls.spec = next(spec for spec in suite_checks("identities") if spec.name == "identities.lie_lemma")

    def lie_lemma_linf(self, level: int, seed: int) -> float:
        context = build_context(self.scenario, level = level, seed = seed)
        return self.spec.evaluate(context).norms(stride = 2 ** level).linf

    def test_lie_lemma_converges_for_every_draw(self) -> None:
        """Should shrink the Lie lemma residual fourfold per halving for 20 random fields.

        Args:
            self: Test case instance.
        """

        for seed in range(20):
            with self.subTest(seed = seed):
                coarse = self.lie_lemma_linf(level = 0, seed = seed)
                fine = self.lie_lemma_linf(level = 1, seed = seed)
                self.assertGreater(coarse, 1e-9)
                self.assertAlmostEqual(coarse / fine, 4.0, delta = 0.8)

    def test_draws_differ_between_seeds(self) -> None:
        """Should draw different fields for different seeds.

        Args:
            self: Test case instance.
        """

        self.assertNotAlmostEqual(self.lie_lemma_linf(level = 0, seed = 0), self.lie_lemma_linf(level = 0, seed = 1))


if __name__ == "__main__":
    unittest.main()
