import unittest

import numpy as np

from core.em_decomp import DHSplit
from core.em_decomp import EMSplit
from core.em_decomp import dh_assemble
from core.em_decomp import dh_extract
from core.em_decomp import eb_decompose
from core.em_decomp import eb_reconstruct
from core.em_decomp import maxwell_lagrangian
from core.em_decomp import maxwell_lagrangian_eb
from core.em_decomp import maxwell_sem
from core.em_decomp import maxwell_sem_eb
from core.em_decomp import normalize_velocity
from core.exceptions import GeometryError
from core.tensor_core import FormValue
from core.tensor_core import MetricValue
from core.tensor_core import antisymmetrize
from core.tensor_core import covector
from core.tensor_core import form_inner
from core.tensor_core import vector


def perturbed_metric(rng: np.random.Generator, batch: tuple = (4,)) -> MetricValue:
    eta = np.diag([-1.0, 1.0, 1.0, 1.0])
    frame = np.eye(4) + 0.1 * rng.uniform(-1.0, 1.0, size = batch + (4, 4))
    return MetricValue.from_components(np.einsum("...ba,bc,...cd->...ad", frame, eta, frame))


def random_faraday(rng: np.random.Generator, batch: tuple = (4,)) -> FormValue:
    raw = rng.normal(size = batch + (4, 4))
    return FormValue(components = 2.0 * antisymmetrize(raw, 2), dim = 4, degree = 2)


class TestObserverSplit(unittest.TestCase):
    """Tests for the E/B and D/H splits."""

    def setUp(self) -> None:
        self.rng = np.random.default_rng(17)
        self.metric = perturbed_metric(self.rng)
        w = np.concatenate([np.ones((4, 1)), 0.2 * self.rng.uniform(-1.0, 1.0, size = (4, 3))], axis = -1)
        self.frame = normalize_velocity(vector(w), self.metric, c = 2.0)
        self.faraday = random_faraday(self.rng)

    def test_normalized_velocity(self) -> None:
        """Should reach g(u, u) = -c^2 and reject spacelike input.

        Args:
            self: Test case instance.
        """

        self.assertLess(self.frame.normalization_defect(self.metric), 1e-12)
        self.frame.validate(self.metric)
        with self.assertRaises(GeometryError):
            normalize_velocity(vector([0.1, 1.0, 0.0, 0.0]), MetricValue.minkowski(4))

    def test_eb_roundtrip(self) -> None:
        """Should rebuild F from its electric and magnetic parts.

        Args:
            self: Test case instance.
        """

        split = eb_decompose(self.faraday, self.frame, self.metric)
        rebuilt = eb_reconstruct(split, self.frame, self.metric)
        np.testing.assert_allclose(rebuilt.components, self.faraday.components, atol = 1e-10)
        np.testing.assert_allclose(
            maxwell_lagrangian_eb(split, self.metric),
            maxwell_lagrangian(self.faraday, self.metric),
            rtol = 1e-10
        )

    def test_dh_roundtrip(self) -> None:
        """Should extract the D and H it was assembled from.

        Args:
            self: Test case instance.
        """

        split = eb_decompose(self.faraday, self.frame, self.metric)
        fields = DHSplit(D = split.E.scaled(1.5), H = split.B.scaled(0.5))
        theta = dh_assemble(fields, self.frame, self.metric)
        back = dh_extract(theta, self.frame, self.metric)
        np.testing.assert_allclose(back.D.components, fields.D.components, atol = 1e-10)
        np.testing.assert_allclose(back.H.components, fields.H.components, atol = 1e-10)

    def test_reconstruct_rejects_longitudinal_field(self) -> None:
        """Should refuse an electric field with a component along u.

        Args:
            self: Test case instance.
        """

        metric = MetricValue.minkowski(4)
        frame = normalize_velocity(vector([1.0, 0.0, 0.0, 0.0]), metric)
        split = EMSplit(E = covector([1.0, 0.0, 0.0, 0.0]), B = covector([0.0, 0.0, 0.0, 1.0]))
        with self.assertRaises(GeometryError):
            eb_reconstruct(split, frame, metric)

    def test_static_observer_components(self) -> None:
        """Should read E_i = -F_0i for the rest frame of flat space.

        Args:
            self: Test case instance.
        """

        metric = MetricValue.minkowski(4)
        frame = normalize_velocity(vector([1.0, 0.0, 0.0, 0.0]), metric)
        faraday = np.zeros((4, 4))
        faraday[0, 1] = 2.0
        faraday[1, 0] = -2.0
        faraday[2, 3] = 0.5
        faraday[3, 2] = -0.5
        split = eb_decompose(FormValue(components = faraday, dim = 4, degree = 2), frame, metric)
        np.testing.assert_allclose(split.E.components, [0.0, -2.0, 0.0, 0.0], atol = 1e-14)
        self.assertAlmostEqual(float(form_inner(split.B, split.B, metric)), 0.25)
        self.assertAlmostEqual(abs(float(split.B.components[1])), 0.5)


class TestMaxwellStress(unittest.TestCase):
    """Tests for the Maxwell stress-energy tensor."""

    def setUp(self) -> None:
        self.rng = np.random.default_rng(29)
        self.metric = perturbed_metric(self.rng)
        w = np.concatenate([np.ones((4, 1)), 0.2 * self.rng.uniform(-1.0, 1.0, size = (4, 3))], axis = -1)
        self.frame = normalize_velocity(vector(w), self.metric)
        self.faraday = random_faraday(self.rng)

    def test_traceless_in_four_dimensions(self) -> None:
        """Should have vanishing trace for n = 3.

        Args:
            self: Test case instance.
        """

        sem = maxwell_sem(self.faraday, self.metric)
        trace = np.trace(sem.components, axis1 = -2, axis2 = -1)
        np.testing.assert_allclose(trace, 0.0, atol = 1e-10)

    def test_eb_expansion_matches(self) -> None:
        """Should give the same tensor from F and from its E/B split.

        Args:
            self: Test case instance.
        """

        split = eb_decompose(self.faraday, self.frame, self.metric)
        direct = maxwell_sem(self.faraday, self.metric)
        expanded = maxwell_sem_eb(split, self.frame, self.metric)
        np.testing.assert_allclose(expanded.components, direct.components, atol = 1e-10)

    def test_energy_density_of_rest_frame(self) -> None:
        """Should give -T^0_0 = (|E|^2 + |B|^2)/2 in flat space.

        Args:
            self: Test case instance.
        """

        metric = MetricValue.minkowski(4)
        frame = normalize_velocity(vector([1.0, 0.0, 0.0, 0.0]), metric)
        faraday = random_faraday(self.rng, batch = ())
        split = eb_decompose(faraday, frame, metric)
        energy = 0.5 * (form_inner(split.E, split.E, metric) + form_inner(split.B, split.B, metric))
        sem = maxwell_sem(faraday, metric)
        self.assertAlmostEqual(float(-sem.components[0, 0]), float(energy))


if __name__ == "__main__":
    unittest.main()
