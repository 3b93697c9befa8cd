import unittest

import numpy as np

from core.exceptions import GeometryError
from core.exceptions import TensorShapeError
from core.tensor_core import FormValue
from core.tensor_core import MetricValue
from core.tensor_core import Orientation
from core.tensor_core import antisymmetrize
from core.tensor_core import covector
from core.tensor_core import flat
from core.tensor_core import form_inner
from core.tensor_core import full_contraction
from core.tensor_core import hat_lift
from core.tensor_core import hodge_star
from core.tensor_core import interior_product
from core.tensor_core import lower_all
from core.tensor_core import raise_all
from core.tensor_core import scalar_form
from core.tensor_core import top_form_coefficient
from core.tensor_core import trace_tensor_product
from core.tensor_core import vector
from core.tensor_core import volume_form
from core.tensor_core import wedge


BATCH = (5,)


def random_metric(rng: np.random.Generator, dim: int = 4) -> MetricValue:
    """Lorentzian metric L^T eta L at a batch of points.

    Args:
        rng: Random generator.
        dim: Spacetime dimension.
    """

    eta = np.diag([-1.0] + [1.0] * (dim - 1))
    frame = np.eye(dim) + 0.1 * rng.uniform(-1.0, 1.0, size = BATCH + (dim, dim))
    g = np.einsum("...ba,bc,...cd->...ad", frame, eta, frame)
    return MetricValue.from_components(g)


def random_form(rng: np.random.Generator, degree: int, dim: int = 4) -> FormValue:
    raw = rng.normal(size = BATCH + (dim,) * degree)
    return FormValue(components = antisymmetrize(raw, degree), dim = dim, degree = degree)


class TestMetricValue(unittest.TestCase):
    """Tests for metric construction."""

    def test_minkowski_volume(self) -> None:
        """Should give unit volume and signature (-,+,+,+).

        Args:
            self: Test case instance.
        """

        metric = MetricValue.minkowski(4)
        mu = volume_form(metric)
        self.assertEqual(mu.components[0, 1, 2, 3], 1.0)
        self.assertEqual(mu.components[1, 0, 2, 3], -1.0)
        dt = covector([1.0, 0.0, 0.0, 0.0])
        self.assertAlmostEqual(float(form_inner(dt, dt, metric)), -1.0)

    def test_rejects_bad_metrics(self) -> None:
        """Should raise GeometryError for Euclidean, asymmetric, or singular input.

        Args:
            self: Test case instance.
        """

        with self.assertRaises(GeometryError):
            MetricValue.from_components(np.eye(4))
        asymmetric = np.diag([-1.0, 1.0, 1.0, 1.0])
        asymmetric[0, 1] = 0.5
        with self.assertRaises(GeometryError):
            MetricValue.from_components(asymmetric)
        with self.assertRaises(GeometryError):
            MetricValue.from_components(np.diag([-1.0, 1.0, 1.0, 0.0]))

    def test_raise_lower_roundtrip(self) -> None:
        """Should recover a form after raising and lowering every slot.

        Args:
            self: Test case instance.
        """

        rng = np.random.default_rng(3)
        metric = random_metric(rng)
        alpha = random_form(rng, 2)
        back = lower_all(raise_all(alpha, metric), metric)
        np.testing.assert_allclose(back.components, alpha.components, atol = 1e-12)


class TestExteriorAlgebra(unittest.TestCase):
    """Tests for wedge, interior product and Hodge duality."""

    def setUp(self) -> None:
        self.rng = np.random.default_rng(11)
        self.metric = random_metric(self.rng)

    def test_double_hodge_sign(self) -> None:
        """Should satisfy ** = -(-1)^(k(D-k)) on every degree.

        Args:
            self: Test case instance.
        """

        for dim in (3, 4):
            metric = random_metric(self.rng, dim = dim)
            for degree in range(dim + 1):
                alpha = random_form(self.rng, degree, dim = dim)
                twice = hodge_star(hodge_star(alpha, metric), metric)
                sign = -((-1) ** (degree * (dim - degree)))
                np.testing.assert_allclose(twice.components, sign * alpha.components, atol = 1e-10)

    def test_wedge_hodge_is_inner_product(self) -> None:
        """Should give alpha ^ *beta = <alpha, beta> mu.

        Args:
            self: Test case instance.
        """

        for degree in range(5):
            alpha = random_form(self.rng, degree)
            beta = random_form(self.rng, degree)
            top = wedge(alpha, hodge_star(beta, self.metric))
            np.testing.assert_allclose(
                top_form_coefficient(top, self.metric),
                form_inner(alpha, beta, self.metric),
                rtol = 1e-10,
                atol = 1e-10
            )

    def test_interior_of_hodge(self) -> None:
        """Should give i_v *alpha = *(alpha ^ v_flat).

        Args:
            self: Test case instance.
        """

        v = vector(self.rng.normal(size = BATCH + (4,)))
        for degree in range(4):
            alpha = random_form(self.rng, degree)
            left = interior_product(v, hodge_star(alpha, self.metric))
            right = hodge_star(wedge(alpha, flat(v, self.metric)), self.metric)
            np.testing.assert_allclose(left.components, right.components, atol = 1e-10)

    def test_interior_leibniz(self) -> None:
        """Should distribute the interior product with the graded sign.

        Args:
            self: Test case instance.
        """

        v = vector(self.rng.normal(size = BATCH + (4,)))
        for k, l in [(1, 1), (1, 2), (2, 2), (3, 1)]:
            alpha = random_form(self.rng, k)
            beta = random_form(self.rng, l)
            left = interior_product(v, wedge(alpha, beta))
            right = wedge(interior_product(v, alpha), beta).components + (-1) ** k * wedge(
                alpha,
                interior_product(v, beta)
            ).components
            np.testing.assert_allclose(left.components, right, atol = 1e-10)

    def test_wedge_basics(self) -> None:
        """Should antisymmetrize 1-form products and reject overflow.

        Args:
            self: Test case instance.
        """

        dt = covector([1.0, 0.0, 0.0, 0.0])
        dx = covector([0.0, 1.0, 0.0, 0.0])
        product = wedge(dt, dx)
        self.assertEqual(product.components[0, 1], 1.0)
        self.assertEqual(product.components[1, 0], -1.0)
        np.testing.assert_allclose(wedge(dx, dx).components, 0.0)
        with self.assertRaises(TensorShapeError):
            wedge(random_form(self.rng, 3), random_form(self.rng, 2))
        with self.assertRaises(TensorShapeError):
            interior_product(vector([1.0, 0.0, 0.0, 0.0]), scalar_form(1.0, 4))

    def test_form_rejects_symmetric_components(self) -> None:
        """Should refuse non-antisymmetric components and bad orientations.

        Args:
            self: Test case instance.
        """

        with self.assertRaises(TensorShapeError):
            FormValue(components = np.ones((4, 4)), dim = 4, degree = 2)
        with self.assertRaises(TensorShapeError):
            Orientation(sign = 0)

    def test_reversed_orientation_flips_hodge(self) -> None:
        """Should negate the dual under the opposite orientation.

        Args:
            self: Test case instance.
        """

        alpha = random_form(self.rng, 2)
        positive = hodge_star(alpha, self.metric)
        negative = hodge_star(alpha, self.metric, Orientation(sign = -1))
        np.testing.assert_allclose(negative.components, -positive.components, atol = 1e-12)


class TestContractions(unittest.TestCase):
    """Tests for trace products, pairings and the Lie lift."""

    def test_trace_product_of_one_form(self) -> None:
        """Should reduce to the outer product pi^mu alpha_nu for k = 1.

        Args:
            self: Test case instance.
        """

        rng = np.random.default_rng(5)
        pi = vector(rng.normal(size = 4))
        alpha = covector(rng.normal(size = 4))
        mixed = trace_tensor_product(pi, alpha)
        np.testing.assert_allclose(mixed.components, np.outer(pi.components, alpha.components))

    def test_normalized_pairing(self) -> None:
        """Should divide the full contraction of a bivector by 2.

        Args:
            self: Test case instance.
        """

        rng = np.random.default_rng(8)
        metric = random_metric(rng)
        alpha = random_form(rng, 2)
        pairing = full_contraction(raise_all(alpha, metric), alpha, normalized = True)
        np.testing.assert_allclose(pairing, form_inner(alpha, alpha, metric), rtol = 1e-12)

    def test_hat_lift_reproduces_lie_terms(self) -> None:
        """Should give the non-transport Lie terms for vectors and covectors.

        Args:
            self: Test case instance.
        """

        rng = np.random.default_rng(21)
        grad_zeta = rng.normal(size = (4, 4))
        omega = covector(rng.normal(size = 4))
        v = vector(rng.normal(size = 4))

        lifted = np.einsum("ayz,zy->a", hat_lift(omega).components, grad_zeta)
        np.testing.assert_allclose(lifted, np.einsum("z,za->a", omega.components, grad_zeta))

        lifted = np.einsum("ayz,zy->a", hat_lift(v).components, grad_zeta)
        np.testing.assert_allclose(lifted, -np.einsum("y,ay->a", v.components, grad_zeta))
        self.assertEqual(hat_lift(v).variance, ("up", "up", "down"))


if __name__ == "__main__":
    unittest.main()
