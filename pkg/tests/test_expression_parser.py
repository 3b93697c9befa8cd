import math
import unittest

import numpy as np

from core.exceptions import ExpressionError
from core.exceptions import ExpressionEvaluationError
from utils.expression_parser import parse_expression


class TestExpressionParser(unittest.TestCase):
    """Tests for the field-expression DSL."""

    def test_power_binds_tighter_than_negation(self) -> None:
        """Should read -x0^2 as -(x0^2) and 2^3^2 as 2^(3^2).

        Args:
            self: Test case instance.
        """

        self.assertEqual(parse_expression("-x0^2").evaluate({"x0": 3.0}), -9.0)
        self.assertEqual(parse_expression("2^3^2").evaluate({}), 512.0)
        self.assertEqual(parse_expression("2*3 - 4/2").evaluate({}), 4.0)

    def test_print_parse_is_stable(self) -> None:
        """Should reproduce the same tree after printing and reparsing.

        Args:
            self: Test case instance.
        """

        for text in ["-x0^2 + 3*x1", "sin(pi*(x1 - x0))/(1 + x2^2)", "max(x0, -x1) - exp(-x2)"]:
            first = parse_expression(text)
            printed = first.to_text()
            second = parse_expression(printed)
            self.assertEqual(first, second)
            self.assertEqual(second.to_text(), printed)

    def test_array_evaluation_broadcasts(self) -> None:
        """Should evaluate over arrays and broadcast constants to a shape.

        Args:
            self: Test case instance.
        """

        x = np.linspace(0.0, 1.0, 5)
        values = parse_expression("x1^2 - x0").evaluate({"x0": 0.5, "x1": x})
        np.testing.assert_allclose(values, x ** 2 - 0.5)
        constant = parse_expression("2.5").evaluate({}, shape = (3, 2))
        np.testing.assert_allclose(constant, np.full((3, 2), 2.5))

    def test_declared_variables(self) -> None:
        """Should accept declared identifiers and reject the rest with a position.

        Args:
            self: Test case instance.
        """

        expression = parse_expression("rho*log(rho) + s", variables = ("rho", "s"))
        self.assertEqual(expression.names(), frozenset({"rho", "s"}))
        with self.assertRaises(ExpressionError) as raised:
            parse_expression("x0 + density")
        self.assertEqual(raised.exception.line, 1)
        self.assertEqual(raised.exception.column, 6)

    def test_syntax_errors_carry_span(self) -> None:
        """Should report the offending token position.

        Args:
            self: Test case instance.
        """

        with self.assertRaises(ExpressionError) as raised:
            parse_expression("x0 + * x1")
        self.assertEqual(raised.exception.column, 6)
        with self.assertRaises(ExpressionError):
            parse_expression("sin(x0")
        with self.assertRaises(ExpressionError):
            parse_expression("")
        with self.assertRaises(ExpressionError):
            parse_expression("x0 $ 2")
        with self.assertRaises(ExpressionError):
            parse_expression("min(x0)")

    def test_domain_errors(self) -> None:
        """Should raise ExpressionEvaluationError outside function domains.

        Args:
            self: Test case instance.
        """

        with self.assertRaises(ExpressionEvaluationError) as raised:
            parse_expression("log(x0)").evaluate({"x0": np.array([1.0, -1.0])})
        self.assertEqual(raised.exception.column, 1)
        with self.assertRaises(ExpressionEvaluationError):
            parse_expression("1/x0").evaluate({"x0": 0.0})
        with self.assertRaises(ExpressionEvaluationError):
            parse_expression("sqrt(x0 - 1)").evaluate({"x0": 0.0})

    def test_symbolic_derivative(self) -> None:
        """Should differentiate state equations analytically.

        Args:
            self: Test case instance.
        """

        expression = parse_expression("rho^2*exp(s) + sin(rho)/rho", variables = ("rho", "s"))
        rho = np.array([0.5, 1.0, 2.0])
        s = np.array([0.1, -0.2, 0.3])
        env = {"rho": rho, "s": s}
        expected_rho = 2.0 * rho * np.exp(s) + (rho * np.cos(rho) - np.sin(rho)) / rho ** 2
        np.testing.assert_allclose(expression.derivative("rho").evaluate(env), expected_rho, rtol = 1e-12)
        np.testing.assert_allclose(expression.derivative("s").evaluate(env), rho ** 2 * np.exp(s), rtol = 1e-12)
        self.assertFalse(parse_expression("x1^2").derivative("x0").depends_on("x1"))

    def test_builtin_pi_and_numbers(self) -> None:
        """Should accept pi, scientific notation and plain numbers.

        Args:
            self: Test case instance.
        """

        self.assertAlmostEqual(parse_expression("pi/2").evaluate({}), math.pi / 2)
        self.assertEqual(parse_expression("1.5e-3*2").evaluate({}), 3e-3)
        self.assertEqual(parse_expression(0.25).evaluate({}), 0.25)


if __name__ == "__main__":
    unittest.main()
