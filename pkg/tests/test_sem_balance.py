import os
import unittest

import numpy as np

from core.bootstrap import build_context
from core.constitutive import build_model
from core.em_decomp import maxwell_sem
from core.em_decomp import normalize_velocity
from core.em_decomp import projection_tensor
from core.fields_calculus import residual_norms
from core.sem_balance import FieldPoint
from core.sem_balance import balance_residuals
from core.sem_balance import maxwell_matter_residual
from core.sem_balance import sem_eb
from core.sem_balance import sem_faraday
from core.sem_balance import sem_material
from core.sem_balance import sem_material_fd
from core.sem_balance import sem_splits
from core.tensor_core import FormValue
from core.tensor_core import MetricValue
from core.tensor_core import antisymmetrize
from core.tensor_core import form_inner
from core.tensor_core import vector
from data.scenario_loader import load_scenario
from data.scenario_loader import parse_scenario
from data.scenario_schema import ModelSpec


SCENARIO_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "scenarios")
BATCH = (3,)


def moving_point(seed: int) -> FieldPoint:
    """Batched field data for a moving fluid in a perturbed metric.

    Args:
        seed: Random seed.
    """

    rng = np.random.default_rng(seed)
    eta = np.diag([-1.0, 1.0, 1.0, 1.0])
    frame = np.eye(4) + 0.1 * rng.uniform(-1.0, 1.0, size = BATCH + (4, 4))
    metric = MetricValue.from_components(np.einsum("...ba,bc,...cd->...ad", frame, eta, frame))
    w = np.concatenate([np.ones(BATCH + (1,)), 0.2 * rng.uniform(-1.0, 1.0, size = BATCH + (3,))], axis = -1)
    faraday = FormValue(
        components = 2.0 * antisymmetrize(0.3 * rng.normal(size = BATCH + (4, 4)), 2),
        dim = 4,
        degree = 2
    )
    return FieldPoint(
        rho = np.full(BATCH, 1.3),
        s = np.full(BATCH, 0.4),
        faraday = faraday,
        frame = normalize_velocity(vector(w), metric),
        metric = metric
    )


MODELS = {
    "euler_maxwell": ModelSpec(kind = "euler_maxwell", state_equation = "rho*log(rho) + 0.5*s^2"),
    "linear": ModelSpec(kind = "linear", state_equation = "rho^2", chi_e = "0.3*rho", chi_b = 0.1)
}


class TestStressEnergyForms(unittest.TestCase):
    """Tests for the three stress-energy formulas and their splits."""

    def test_eb_and_faraday_forms_agree(self) -> None:
        """Should assemble the same tensor from E/B and from F.

        Args:
            self: Test case instance.
        """

        point = moving_point(seed = 2)
        for kind, spec in MODELS.items():
            model = build_model(spec)
            eb = sem_eb(model, point)
            faraday = sem_faraday(model, point)
            self.assertLess(eb.difference(faraday), 1e-10, kind)
            self.assertEqual(eb.form, "eb_form")

    def test_material_form_matches_oracle(self) -> None:
        """Should agree with the material form and its central-difference oracle.

        Args:
            self: Test case instance.
        """

        point = moving_point(seed = 4)
        for kind, spec in MODELS.items():
            model = build_model(spec)
            material = sem_material(model, point)
            self.assertLess(material.difference(sem_eb(model, point)), 1e-10, kind)
            self.assertLess(material.difference(sem_material_fd(model, point)), 1e-5, kind)

    def test_maxwell_part_and_symmetry(self) -> None:
        """Should reduce the Maxwell part to the vacuum tensor and stay symmetric.

        Args:
            self: Test case instance.
        """

        point = moving_point(seed = 6)
        model = build_model(MODELS["euler_maxwell"])
        maxwell = sem_eb(model, point, part = "maxwell")
        np.testing.assert_allclose(
            maxwell.components,
            maxwell_sem(point.faraday, point.metric).components,
            atol = 1e-10
        )
        self.assertLess(sem_eb(model, point).symmetry_defect(point.metric), 1e-10)

    def test_splits_add_up(self) -> None:
        """Should recover the total from either split.

        Args:
            self: Test case instance.
        """

        point = moving_point(seed = 8)
        model = build_model(MODELS["linear"])
        total = sem_eb(model, point).components
        splits = sem_splits(model, point)
        np.testing.assert_allclose(splits.matter.components + splits.maxwell.components, total, atol = 1e-10)
        np.testing.assert_allclose(splits.alt_matter.components + splits.alt_field.components, total, atol = 1e-10)

    def test_euler_maxwell_splits_coincide(self) -> None:
        """Should give the same blocks in both splits for a non-polarizable fluid.

        Args:
            self: Test case instance.
        """

        point = moving_point(seed = 10)
        splits = sem_splits(build_model(MODELS["euler_maxwell"]), point)
        np.testing.assert_allclose(splits.alt_matter.components, splits.matter.components, atol = 1e-12)
        np.testing.assert_allclose(splits.alt_field.components, splits.maxwell.components, atol = 1e-12)

    def test_alternative_field_block_carries_matter_magnetic_pressure(self) -> None:
        """Should put the matter magnetic pressure into the field block of the alternative split.

        A fluid at rest with ``B`` along x1 and ``E = 0`` differs between the
        two field blocks only by ``-chi_b |B|^2`` on the axes transverse to B.

        Args:
            self: Test case instance.
        """

        b = 0.7
        chi_b = 0.1
        metric = MetricValue.from_components(np.diag([-1.0, 1.0, 1.0, 1.0])[None])
        faraday = np.zeros((1, 4, 4))
        faraday[0, 2, 3] = b
        faraday[0, 3, 2] = -b
        point = FieldPoint(
            rho = np.array([1.2]),
            s = np.array([0.0]),
            faraday = FormValue(components = faraday, dim = 4, degree = 2),
            frame = normalize_velocity(vector(np.array([[1.0, 0.0, 0.0, 0.0]])), metric),
            metric = metric
        )
        model = build_model(MODELS["linear"])
        splits = sem_splits(model, point)
        state = point.matter_state()
        b_square = form_inner(state.B, state.B, metric)
        np.testing.assert_allclose(b_square, [b ** 2], rtol = 1e-12)

        difference = splits.alt_field.components - splits.maxwell.components
        expected = np.diag([0.0, 0.0, -chi_b * b ** 2, -chi_b * b ** 2])[None]
        np.testing.assert_allclose(difference, expected, atol = 1e-12)
        total = sem_eb(model, point).components
        np.testing.assert_allclose(splits.alt_matter.components + splits.alt_field.components, total, atol = 1e-12)

    def test_wrong_matter_block_breaks_the_sum(self) -> None:
        """Should no longer reconstruct the total once the matter block is perturbed.

        Args:
            self: Test case instance.
        """

        point = moving_point(seed = 12)
        model = build_model(MODELS["linear"])
        splits = sem_splits(model, point)
        total = sem_eb(model, point).components
        projector, _ = projection_tensor(point.frame, point.metric)
        drifted = splits.alt_matter.components + 1e-3 * projector.components
        self.assertGreater(np.max(np.abs(drifted + splits.alt_field.components - total)), 1e-4)


class TestBalanceOnGrid(unittest.TestCase):
    """Tests for balance residuals of a static charged fluid."""

    @classmethod
    def setUpClass(cls) -> None:
        scenario = load_scenario(os.path.join(SCENARIO_DIR, "euler_maxwell_static.yaml"))
        cls.context = build_context(scenario)

    def test_static_balance_holds(self) -> None:
        """Should satisfy every balance law to roundoff for quadratic data.

        Args:
            self: Test case instance.
        """

        state = self.context.require_state()
        residuals = balance_residuals(self.context.model, state)
        for name, values in residuals.named().items():
            norms = residual_norms(values, state.grid, margin = 2)
            self.assertLess(norms.linf, 1e-8, name)

    def test_maxwell_relation_vanishes(self) -> None:
        """Should make the two writings of Maxwell's equations agree.

        Args:
            self: Test case instance.
        """

        state = self.context.require_state()
        residuals = maxwell_matter_residual(self.context.model, state)
        self.assertLess(residual_norms(residuals.relation, state.grid, margin = 2).linf, 1e-10)
        self.assertLess(residual_norms(residuals.first, state.grid, margin = 2).linf, 1e-8)

    def test_gauge_shift_keeps_faraday(self) -> None:
        """Should move only the potential under a gauge shift.

        Args:
            self: Test case instance.
        """

        state = self.context.require_state()
        _, x1, x2, _ = state.grid.mesh()
        shifted = state.gauge_shifted(x1 * x2)
        self.assertIs(shifted.point.faraday, state.point.faraday)
        np.testing.assert_allclose(
            shifted.point.potential.components[..., 1] - state.point.potential.components[..., 1],
            x2,
            atol = 1e-12
        )


def charged_column(c: float = 1.0, q: float = 1.0) -> dict:
    """Static charged dust whose potential ``A_0 = -c^2 exp(x1)`` matches ``q rho = exp(x1)``.

    Args:
        c: Speed of light.
        q: Charge per unit mass.
    """

    return {
        "name": "charged_column",
        "dimension": 3,
        "c": c,
        "q": q,
        "interior": {
            "grid": {
                "bounds": [[0.0, 0.0], [-1.0, 1.0], [-1.0, 1.0], [0.0, 0.0]],
                "resolution": [1, 9, 9, 1]
            },
            "metric": {"builtin": "minkowski"},
            "fields": {
                "u": [1.0, 0.0, 0.0, 0.0],
                "rho": "exp(x1)",
                "A": [f"-{c * c}*exp(x1)", 0.0, 0.0, 0.0]
            }
        },
        "model": {"kind": "euler_maxwell", "state_equation": "rho"},
        "checks": ["maxwell"]
    }


def maxwell_first(data: dict, level: int = 0) -> tuple:
    """First Maxwell residual and the grid it lives on.

    Args:
        data: Scenario mapping.
        level: Refinement level.
    """

    context = build_context(parse_scenario(data), level = level)
    state = context.require_state()
    return maxwell_matter_residual(context.model, state).first, state.grid


class TestMaxwellSources(unittest.TestCase):
    """Tests for Maxwell's equations with a charge source."""

    def test_matching_charge_converges_second_order(self) -> None:
        """Should leave only a second-order residual when the charge matches the field.

        Args:
            self: Test case instance.
        """

        coarse, grid = maxwell_first(charged_column())
        fine, fine_grid = maxwell_first(charged_column(), level = 1)
        coarse_norm = residual_norms(coarse, grid, margin = 2).linf
        fine_norm = residual_norms(fine, fine_grid, margin = 2, stride = 2).linf
        self.assertLess(coarse_norm, 0.05)
        self.assertAlmostEqual(coarse_norm / fine_norm, 4.0, delta = 0.3)

    def test_missing_charge_is_flagged(self) -> None:
        """Should report the full source once the charge is switched off.

        Args:
            self: Test case instance.
        """

        residual, grid = maxwell_first(charged_column(q = 0.0))
        self.assertGreater(residual_norms(residual, grid, margin = 2).linf, 1.0)

    def test_doubling_c_keeps_relative_residual(self) -> None:
        """Should scale the residual by c^2 when c doubles and A_0 is rescaled with it.

        Args:
            self: Test case instance.
        """

        base, grid = maxwell_first(charged_column(c = 1.0))
        doubled, _ = maxwell_first(charged_column(c = 2.0))
        np.testing.assert_allclose(doubled, 4.0 * base, rtol = 1e-9, atol = 1e-12)
        _, x1, _, _ = grid.mesh()
        base_relative = residual_norms(base, grid, margin = 2).linf / float(np.max(np.exp(x1)))
        doubled_relative = residual_norms(doubled, grid, margin = 2).linf / float(np.max(4.0 * np.exp(x1)))
        self.assertAlmostEqual(doubled_relative, base_relative, delta = 1e-12)


if __name__ == "__main__":
    unittest.main()
