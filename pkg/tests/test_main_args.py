import unittest

from unittest import mock

from main import parse_args


class TestMainArgs(unittest.TestCase):
    """Tests for CLI argument parser."""

    def test_parse_defaults(self) -> None:
        """Should parse a command with default flags.

        Args:
            self: Test case instance.
        """

        argv = [
            "relcont",
            "identities",
            "--scenario",
            "scenarios/schwarzschild_vacuum.yaml"
        ]
        with mock.patch("sys.argv", argv):
            args = parse_args()

        self.assertEqual(args.command, "identities")
        self.assertEqual(args.scenario, "scenarios/schwarzschild_vacuum.yaml")
        self.assertEqual(args.refine, 1)
        self.assertEqual(args.tol, [])
        self.assertEqual(args.plot, "")
        self.assertEqual(args.include_boundary, False)
        self.assertEqual(args.form, "all")
        self.assertEqual(args.output, "")

    def test_parse_all_flags(self) -> None:
        """Should parse repeated tolerances and every optional flag.

        Args:
            self: Test case instance.
        """

        argv = [
            "relcont",
            "sem",
            "--scenario",
            "s.yaml",
            "--refine",
            "2",
            "--tol",
            "assembly=1e-8",
            "--tol",
            "sem.symmetry=1e-9",
            "--plot",
            "plots",
            "--include-boundary",
            "--form",
            "phi",
            "--output",
            "report.jsonl"
        ]
        with mock.patch("sys.argv", argv):
            args = parse_args()

        self.assertEqual(args.command, "sem")
        self.assertEqual(args.refine, 2)
        self.assertEqual(args.tol, ["assembly=1e-8", "sem.symmetry=1e-9"])
        self.assertEqual(args.plot, "plots")
        self.assertTrue(args.include_boundary)
        self.assertEqual(args.form, "phi")
        self.assertEqual(args.output, "report.jsonl")

    def test_rejects_unknown_command(self) -> None:
        """Should exit with status 2 for an unknown command.

        Args:
            self: Test case instance.
        """

        with mock.patch("sys.argv", ["relcont", "everything", "--scenario", "s.yaml"]):
            with mock.patch("sys.stderr"):
                with self.assertRaises(SystemExit) as raised:
                    parse_args()
        self.assertEqual(raised.exception.code, 2)

    def test_rejects_negative_refine(self) -> None:
        """Should exit with status 2 for a negative refinement count.

        Args:
            self: Test case instance.
        """

        with mock.patch("sys.stderr"):
            with self.assertRaises(SystemExit) as raised:
                parse_args(["all", "--scenario", "s.yaml", "--refine", "-1"])
        self.assertEqual(raised.exception.code, 2)

    def test_requires_scenario(self) -> None:
        """Should exit with status 2 when --scenario is missing.

        Args:
            self: Test case instance.
        """

        with mock.patch("sys.stderr"):
            with self.assertRaises(SystemExit) as raised:
                parse_args(["balance"])
        self.assertEqual(raised.exception.code, 2)


if __name__ == "__main__":
    unittest.main()
