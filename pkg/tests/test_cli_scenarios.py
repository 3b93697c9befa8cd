import io
import json
import logging
import os
import tempfile
import unittest

from unittest import mock

from main import EXIT_INPUT_ERROR
from main import EXIT_PASSED
from main import main


ZERO_FLOOR = 1e-9

SCENARIO_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "scenarios")

BAD_SCENARIO = """\
name: broken
dimension: 3
interior:
  grid:
    bounds: [[0.0, 0.0], [0.0, 1.0], [0.0, 1.0], [0.0, 0.0]]
    resolution: [1, 5, 5, 1]
  metric:
    builtin: minkowski
  fields:
    u: [1.0, 0.0, 0.0, 0.0]
    A: ["x1 +", 0.0, 0.0, 0.0]
"""


class TestCliScenarios(unittest.TestCase):
    """End-to-end runs of the relcont command on bundled scenarios."""

    def setUp(self) -> None:
        self.temp_dir = tempfile.TemporaryDirectory()
        self.env = mock.patch.dict(os.environ, {"RELCONT_LOG_DIR": os.path.join(self.temp_dir.name, "logs")})
        self.env.start()

    def tearDown(self) -> None:
        root_logger = logging.getLogger()
        for handler in list(root_logger.handlers):
            root_logger.removeHandler(handler)
            handler.close()
        self.env.stop()
        self.temp_dir.cleanup()

    def run_cli(self, argv: list) -> tuple:
        with mock.patch("sys.stdout", new_callable = io.StringIO) as stdout:
            code = main(argv)
        lines = [json.loads(line) for line in stdout.getvalue().splitlines() if line.strip()]
        return code, lines

    def test_static_fluid_passes_every_suite(self) -> None:
        """Should pass all requested suites and end with a summary line.

        Args:
            self: Test case instance.
        """

        code, lines = self.run_cli(["all", "--scenario", os.path.join(SCENARIO_DIR, "euler_maxwell_static.yaml")])
        summary = lines[-1]["summary"]
        self.assertEqual(code, EXIT_PASSED, summary["failures"])
        self.assertEqual(summary["failed"], 0)
        self.assertEqual(summary["total"], len(lines) - 1)
        suites = {line["suite"] for line in lines[:-1]}
        self.assertEqual(suites, {"identities", "sem", "balance", "maxwell"})

    def test_dielectric_junction_passes(self) -> None:
        """Should pass the junction suite and write the report file.

        Args:
            self: Test case instance.
        """

        output = os.path.join(self.temp_dir.name, "report.jsonl")
        code, lines = self.run_cli(
            [
                "junction",
                "--scenario",
                os.path.join(SCENARIO_DIR, "dielectric_interface.yaml"),
                "--output",
                output
            ]
        )
        self.assertEqual(code, EXIT_PASSED, lines[-1]["summary"]["failures"])
        self.assertTrue(os.path.isfile(output))
        self.assertTrue(all(line["suite"] == "junction" for line in lines[:-1]))

    def run_scenario(self, command: str, name: str) -> dict:
        """Run one bundled scenario with two refinement levels and index its records.

        Args:
            command: Suite or ``all``.
            name: Scenario file stem.
        """

        code, lines = self.run_cli(
            [command, "--scenario", os.path.join(SCENARIO_DIR, f"{name}.yaml"), "--refine", "1"]
        )
        self.assertEqual(code, EXIT_PASSED, lines[-1]["summary"]["failures"])
        records = {line["name"]: line for line in lines[:-1]}
        for record in records.values():
            if record["mode"] == "convergence" and record["linf"] > ZERO_FLOOR:
                self.assertEqual(len(record["levels"]), 2, record["name"])
                self.assertLessEqual(abs(record["ratio"] - 4.0), 1.0, record["name"])
        return records

    def assert_second_order(self, record: dict) -> None:
        self.assertGreater(record["linf"], ZERO_FLOOR, record["name"])
        self.assertAlmostEqual(record["ratio"], 4.0, delta = 0.8, msg = record["name"])

    def test_schwarzschild_vacuum_converges(self) -> None:
        """Should drive Ein and the Bianchi identity to zero at second order.

        Args:
            self: Test case instance.
        """

        records = self.run_scenario("all", "schwarzschild_vacuum")
        self.assertIn("identities.ricci_symmetry", records)
        self.assert_second_order(records["einstein.field_equations"])
        self.assert_second_order(records["einstein.bianchi"])

    def test_reissner_nordstrom_matches_maxwell_source(self) -> None:
        """Should balance Ein against chi times the Coulomb stress-energy at second order.

        Args:
            self: Test case instance.
        """

        records = self.run_scenario("einstein", "reissner_nordstrom")
        self.assert_second_order(records["einstein.field_equations"])
        self.assertTrue(all(record["passed"] for record in records.values()))

    def test_plane_wave_conserves_maxwell_stress(self) -> None:
        """Should keep div T_M at second order and the Maxwell trace at roundoff.

        Args:
            self: Test case instance.
        """

        records = self.run_scenario("all", "plane_wave_vacuum")
        self.assertEqual({record["suite"] for record in records.values()}, {"maxwell", "sem", "balance"})
        self.assert_second_order(records["maxwell.vacuum_divergence"])
        self.assertLess(records["maxwell.trace"]["linf"], 1e-9)

    def test_dielectric_curvature_jump_converges(self) -> None:
        """Should see the extrinsic-curvature jump of the dielectric face shrink at second order.

        Args:
            self: Test case instance.
        """

        records = self.run_scenario("junction", "dielectric_interface")
        self.assert_second_order(records["junction.extrinsic_curvature"])
        self.assert_second_order(records["junction.mean_curvature"])

    def test_bad_expression_is_input_error(self) -> None:
        """Should exit with the input-error code and print no report.

        Args:
            self: Test case instance.
        """

        path = os.path.join(self.temp_dir.name, "broken.yaml")
        with open(path, "w", encoding = "utf-8") as fp:
            fp.write(BAD_SCENARIO)
        code, lines = self.run_cli(["all", "--scenario", path])
        self.assertEqual(code, EXIT_INPUT_ERROR)
        self.assertEqual(lines, [])

    def test_missing_interface_is_input_error(self) -> None:
        """Should refuse the junction command on a single-region scenario.

        Args:
            self: Test case instance.
        """

        code, _ = self.run_cli(["junction", "--scenario", os.path.join(SCENARIO_DIR, "euler_maxwell_static.yaml")])
        self.assertEqual(code, EXIT_INPUT_ERROR)


if __name__ == "__main__":
    unittest.main()
