import copy
import os
import tempfile
import unittest

import numpy as np

from core.bootstrap import build_context
from core.exceptions import ExpressionError
from core.exceptions import ScenarioError
from data.scenario_loader import dump_scenario
from data.scenario_loader import load_blob
from data.scenario_loader import load_scenario
from data.scenario_loader import parse_scenario
from data.scenario_loader import save_blob
from data.scenario_loader import save_scenario


SCENARIO_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "scenarios")

MINIMAL = {
    "name": "minimal",
    "dimension": 3,
    "interior": {
        "grid": {
            "bounds": [[0.0, 0.0], [0.0, 1.0], [0.0, 1.0], [0.0, 0.0]],
            "resolution": [1, 5, 5, 1]
        },
        "metric": {"builtin": "minkowski"},
        "fields": {"u": [1.0, 0.0, 0.0, 0.0], "A": ["x1*x2", 0.0, 0.0, 0.0]}
    },
    "checks": ["identities"]
}


def scenario_data(**changes) -> dict:
    data = copy.deepcopy(MINIMAL)
    data.update(changes)
    return data


class TestBundledScenarios(unittest.TestCase):
    """Tests for the scenarios shipped with the package."""

    def test_every_bundled_scenario_loads(self) -> None:
        """Should validate each bundled file and keep its name.

        Args:
            self: Test case instance.
        """

        names = sorted(name for name in os.listdir(SCENARIO_DIR) if name.endswith(".yaml"))
        self.assertGreaterEqual(len(names), 6)
        for name in names:
            scenario = load_scenario(os.path.join(SCENARIO_DIR, name))
            self.assertEqual(scenario.name, name[: -len(".yaml")])
            self.assertEqual(scenario.source_dir, os.path.abspath(SCENARIO_DIR))
            self.assertTrue(scenario.checks)

    def test_dump_and_reload(self) -> None:
        """Should write a scenario that validates to the same content.

        Args:
            self: Test case instance.
        """

        scenario = load_scenario(os.path.join(SCENARIO_DIR, "dielectric_interface.yaml"))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "copy.yaml")
            save_scenario(scenario, path)
            again = load_scenario(path)
        self.assertEqual(again.model_dump(), scenario.model_dump())
        self.assertIn("level_set: x1", dump_scenario(scenario))


class TestScenarioErrors(unittest.TestCase):
    """Tests for schema and expression failures."""

    def test_bad_expression_names_field(self) -> None:
        """Should prefix the field path and keep the column.

        Args:
            self: Test case instance.
        """

        data = scenario_data()
        data["interior"]["fields"]["A"] = ["x1 + * x2", 0.0, 0.0, 0.0]
        with self.assertRaises(ExpressionError) as caught:
            parse_scenario(data)
        self.assertTrue(caught.exception.message.startswith("interior.fields.A.0:"))
        self.assertEqual(caught.exception.column, 6)

    def test_unknown_constant_in_state_equation(self) -> None:
        """Should reject identifiers that are neither coordinates nor constants.

        Args:
            self: Test case instance.
        """

        data = scenario_data(model = {"kind": "euler_maxwell", "state_equation": "kappa*rho"})
        with self.assertRaises(ExpressionError):
            parse_scenario(data)
        data["constants"] = {"kappa": 2.0}
        self.assertEqual(parse_scenario(data).constants, {"kappa": 2.0})

    def test_schema_violations(self) -> None:
        """Should report the offending field for schema errors.

        Args:
            self: Test case instance.
        """

        with self.assertRaises(ScenarioError) as caught:
            parse_scenario(scenario_data(colour = "blue"))
        self.assertEqual(caught.exception.field, "colour")

        with self.assertRaises(ScenarioError):
            parse_scenario(scenario_data(checks = ["identities", "astrology"]))

        data = scenario_data()
        data["interior"]["grid"]["resolution"] = [1, 3, 5, 1]
        with self.assertRaises(ScenarioError) as caught:
            parse_scenario(data)
        self.assertTrue(caught.exception.field.startswith("interior"))

        data = scenario_data()
        data["interior"]["fields"]["F"] = [[0.0] * 4] * 4
        with self.assertRaises(ScenarioError):
            parse_scenario(data)

        with self.assertRaises(ScenarioError):
            parse_scenario(["not", "a", "mapping"])

    def test_missing_file(self) -> None:
        """Should raise ScenarioError for a missing path.

        Args:
            self: Test case instance.
        """

        with self.assertRaises(ScenarioError):
            load_scenario(os.path.join(SCENARIO_DIR, "does_not_exist.yaml"))


class TestBlobs(unittest.TestCase):
    """Tests for binary field data."""

    def test_blob_field_reaches_the_grid(self) -> None:
        """Should read a density blob next to the scenario file.

        Args:
            self: Test case instance.
        """

        values = np.linspace(1.0, 2.0, 25).reshape(1, 5, 5, 1)
        with tempfile.TemporaryDirectory() as tmp:
            ref = save_blob(values, os.path.join(tmp, "rho.bin"))
            self.assertEqual(ref.shape, [1, 5, 5, 1])
            data = scenario_data()
            data["interior"]["fields"]["rho"] = ref.model_dump()
            scenario = parse_scenario(data, source_dir = tmp)
            context = build_context(scenario)
            np.testing.assert_array_equal(context.require_state().point.rho, values)
            np.testing.assert_array_equal(load_blob(ref, tmp, "rho"), values)

    def test_blob_shape_mismatch(self) -> None:
        """Should refuse blobs whose size or shape does not fit.

        Args:
            self: Test case instance.
        """

        with tempfile.TemporaryDirectory() as tmp:
            ref = save_blob(np.zeros((1, 5, 5, 1)), os.path.join(tmp, "rho.bin"))
            with self.assertRaises(ScenarioError):
                load_blob(ref.model_copy(update = {"shape": [1, 6, 5, 1]}), tmp, "rho")

            data = scenario_data()
            data["interior"]["fields"]["rho"] = ref.model_dump()
            data["interior"]["grid"]["resolution"] = [1, 9, 9, 1]
            scenario = parse_scenario(data, source_dir = tmp)
            with self.assertRaises(ScenarioError):
                build_context(scenario)

            with self.assertRaises(ScenarioError):
                load_blob(ref.model_copy(update = {"blob": "missing.bin"}), tmp, "rho")


if __name__ == "__main__":
    unittest.main()
