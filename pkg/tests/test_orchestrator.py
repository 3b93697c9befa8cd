import math
import unittest

import numpy as np

from config.config import AppConfig
from config.config import ToleranceConfig
from core.check_planner import CheckPlan
from core.check_suites import CheckOutcome
from core.check_suites import CheckSpec
from core.orchestrator import CheckOrchestrator
from data.scenario_loader import parse_scenario


def flat_scenario():
    """Geometry-only scenario on a small flat grid.

    Args:
        None
    """

    return parse_scenario(
        {
            "name": "flat",
            "interior": {
                "grid": {
                    "bounds": [[0.0, 0.0], [0.0, 1.0], [0.0, 1.0], [0.0, 0.0]],
                    "resolution": [1, 9, 9, 1]
                },
                "metric": {"builtin": "minkowski"}
            }
        }
    )


def grid_outcome(context, value: float) -> CheckOutcome:
    grid = context.interior.grid
    return CheckOutcome(values = np.full(grid.shape, value), grid = grid)


class FakeChecks:
    """Deterministic check bodies keyed on the refinement level."""

    def __init__(self) -> None:
        self.calls = []

    def second_order(self, context) -> CheckOutcome:
        """Residual that drops by four per level.

        Args:
            self: Fake instance.
            context: Level context.
        """

        self.calls.append(("second_order", context.level))
        return grid_outcome(context, 1e-3 / 4.0 ** context.level)

    def stalled(self, context) -> CheckOutcome:
        """Residual that does not converge.

        Args:
            self: Fake instance.
            context: Level context.
        """

        self.calls.append(("stalled", context.level))
        return grid_outcome(context, 1e-3)

    def exact_zero(self, context) -> CheckOutcome:
        """Residual at roundoff.

        Args:
            self: Fake instance.
            context: Level context.
        """

        self.calls.append(("exact_zero", context.level))
        return CheckOutcome(values = np.zeros((5, 3)))

    def exact_spike(self, context) -> CheckOutcome:
        """Residual with one large entry.

        Args:
            self: Fake instance.
            context: Level context.
        """

        self.calls.append(("exact_spike", context.level))
        values = np.zeros((5, 3))
        values[3, 1] = 0.5
        return CheckOutcome(values = values)

    def broken(self, context) -> CheckOutcome:
        """Check body that raises.

        Args:
            self: Fake instance.
            context: Level context.
        """

        raise RuntimeError("stencil exploded")


def make_plan(specs: list[CheckSpec], tolerance: float = 1e-9) -> CheckPlan:
    ordered = sorted(specs, key = lambda spec: spec.name)
    return CheckPlan(
        scenario = flat_scenario(),
        command = "all",
        checks = ordered,
        tolerances = {spec.name: tolerance for spec in ordered},
        tolerance_config = ToleranceConfig()
    )


class TestOrchestrator(unittest.TestCase):
    """Tests for the check orchestrator."""

    def setUp(self) -> None:
        self.fake = FakeChecks()
        self.specs = [
            CheckSpec("identities.b_second_order", "hat-lift", "convergence", "zero_floor", self.fake.second_order),
            CheckSpec("identities.a_stalled", "hat-lift", "convergence", "zero_floor", self.fake.stalled),
            CheckSpec("identities.c_zero", "exterior-algebra", "exact", "exact", self.fake.exact_zero),
            CheckSpec("identities.d_spike", "exterior-algebra", "exact", "exact", self.fake.exact_spike),
            CheckSpec("identities.e_broken", "levi-civita", "exact", "exact", self.fake.broken),
            CheckSpec("junction.diagnostic", "junction-electromagnetic", "diagnostic", "zero_floor", self.fake.stalled)
        ]

    def test_records_ordered_and_judged(self) -> None:
        """Should judge each mode and order records by name.

        Args:
            self: Test case instance.
        """

        report = CheckOrchestrator(plan = make_plan(self.specs), config = AppConfig(threads = 3), refine = 1).run()
        names = [record.name for record in report.records]
        self.assertEqual(names, sorted(names))
        by_name = {record.name: record for record in report.records}

        converged = by_name["identities.b_second_order"]
        self.assertTrue(converged.passed)
        self.assertAlmostEqual(converged.ratio, 4.0)
        self.assertEqual(converged.grids, [[1, 9, 9, 1], [1, 17, 17, 1]])
        self.assertEqual(len(converged.levels), 2)

        stalled = by_name["identities.a_stalled"]
        self.assertFalse(stalled.passed)
        self.assertAlmostEqual(stalled.ratio, 1.0)
        self.assertIsNotNone(stalled.worst_point)

        self.assertTrue(by_name["identities.c_zero"].passed)
        spike = by_name["identities.d_spike"]
        self.assertFalse(spike.passed)
        self.assertEqual(spike.worst_point, [3])
        self.assertAlmostEqual(spike.linf, 0.5)

        broken = by_name["identities.e_broken"]
        self.assertFalse(broken.passed)
        self.assertIn("stencil exploded", broken.message)
        self.assertTrue(math.isinf(broken.linf))

        self.assertTrue(by_name["junction.diagnostic"].passed)
        self.assertFalse(report.passed)
        self.assertEqual(report.failed, 3)

    def test_exact_checks_run_on_base_level_only(self) -> None:
        """Should evaluate exact checks once and convergence checks per level.

        Args:
            self: Test case instance.
        """

        CheckOrchestrator(plan = make_plan(self.specs), config = AppConfig(threads = 1), refine = 2).run()
        exact_levels = sorted(level for name, level in self.fake.calls if name == "exact_zero")
        converged_levels = sorted(level for name, level in self.fake.calls if name == "second_order")
        self.assertEqual(exact_levels, [0])
        self.assertEqual(converged_levels, [0, 1, 2])

    def test_single_level_convergence_needs_zero_floor(self) -> None:
        """Should fail a convergence check above the floor without refinement.

        Args:
            self: Test case instance.
        """

        specs = [self.specs[0]]
        report = CheckOrchestrator(plan = make_plan(specs), config = AppConfig(), refine = 0).run()
        record = report.records[0]
        self.assertIsNone(record.ratio)
        self.assertFalse(record.passed)

        loose = CheckOrchestrator(plan = make_plan(specs, tolerance = 1e-2), config = AppConfig(), refine = 0).run()
        self.assertTrue(loose.records[0].passed)

    def test_profiles_collected_on_request(self) -> None:
        """Should keep one residual line per check and level.

        Args:
            self: Test case instance.
        """

        specs = [self.specs[0], self.specs[2]]
        report = CheckOrchestrator(
            plan = make_plan(specs),
            config = AppConfig(),
            refine = 1,
            collect_profiles = True
        ).run()
        self.assertEqual(sorted(report.profiles["identities.b_second_order"]), [0, 1])
        xs, values = report.profiles["identities.b_second_order"][1]
        self.assertEqual(xs.shape, (17,))
        np.testing.assert_allclose(values, np.full(17, 2.5e-4))
        self.assertEqual(sorted(report.profiles["identities.c_zero"]), [0])


if __name__ == "__main__":
    unittest.main()
