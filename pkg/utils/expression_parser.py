"""Field-expression DSL.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?
    primary := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

``^`` binds tighter than unary minus and is right-associative, so ``-x0^2``
reads as ``-(x0^2)`` and ``2^3^2`` as ``2^(3^2)``.
"""

import re
import math
import logging

from dataclasses import dataclass
from dataclasses import field
from typing import Iterable
from typing import Mapping
from typing import Optional
from typing import Union

import numpy as np

from core.exceptions import ExpressionError
from core.exceptions import ExpressionEvaluationError


logger = logging.getLogger(__name__)

NUMBER_PATTERN = re.compile(r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")
NAME_PATTERN = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
WHITESPACE_PATTERN = re.compile(r"\s+")
COORDINATE_PATTERN = re.compile(r"^x[0-9]$")
OPERATOR_CHARS = "+-*/^(),"

FUNCTION_ARITY = {
    "sin": 1,
    "cos": 1,
    "exp": 1,
    "log": 1,
    "sqrt": 1,
    "tanh": 1,
    "abs": 1,
    "min": 2,
    "max": 2
}
# Produced by symbolic differentiation only.
INTERNAL_FUNCTION_ARITY = {
    "sign": 1,
    "step": 1
}
BUILTIN_CONSTANTS = {
    "pi": math.pi
}

Numeric = Union[float, np.ndarray]


@dataclass(frozen = True)
class Token:
    """One lexical token.

    Args:
        kind: Token kind: number, name, op, or end.
        text: Raw token text.
        offset: 0-based offset in the source text.
    """

    kind: str
    text: str
    offset: int


class _DomainFault(Exception):
    """Evaluation left the function domain at one node."""

    def __init__(self, message: str, offset: int) -> None:
        self.message = message
        self.offset = offset
        super().__init__(message)


@dataclass(frozen = True)
class Node:
    """Base AST node; ``offset`` points at the originating source token."""

    offset: int = field(default = 0, compare = False)

    def evaluate(self, env: Mapping[str, Numeric]) -> Numeric:
        raise NotImplementedError

    def derivative(self, name: str) -> "Node":
        raise NotImplementedError

    def to_text(self) -> str:
        raise NotImplementedError

    def names(self) -> frozenset:
        raise NotImplementedError


@dataclass(frozen = True)
class Number(Node):
    value: float = 0.0

    def evaluate(self, env: Mapping[str, Numeric]) -> Numeric:
        return self.value

    def derivative(self, name: str) -> Node:
        return Number(offset = self.offset, value = 0.0)

    def to_text(self) -> str:
        if self.value < 0:
            return f"(-{repr(-self.value)})"
        return repr(self.value)

    def names(self) -> frozenset:
        return frozenset()


@dataclass(frozen = True)
class Name(Node):
    name: str = ""

    def evaluate(self, env: Mapping[str, Numeric]) -> Numeric:
        if self.name in env:
            return env[self.name]
        if self.name in BUILTIN_CONSTANTS:
            return BUILTIN_CONSTANTS[self.name]
        raise _DomainFault(f"no value bound for {self.name!r}", self.offset)

    def derivative(self, name: str) -> Node:
        return Number(offset = self.offset, value = 1.0 if self.name == name else 0.0)

    def to_text(self) -> str:
        return self.name

    def names(self) -> frozenset:
        return frozenset({self.name})


@dataclass(frozen = True)
class Negate(Node):
    operand: Node = None

    def evaluate(self, env: Mapping[str, Numeric]) -> Numeric:
        return -self.operand.evaluate(env)

    def derivative(self, name: str) -> Node:
        return _neg(self.operand.derivative(name), self.offset)

    def to_text(self) -> str:
        return f"(-{self.operand.to_text()})"

    def names(self) -> frozenset:
        return self.operand.names()


@dataclass(frozen = True)
class Binary(Node):
    op: str = "+"
    left: Node = None
    right: Node = None

    def evaluate(self, env: Mapping[str, Numeric]) -> Numeric:
        left = self.left.evaluate(env)
        right = self.right.evaluate(env)
        if self.op == "+":
            return left + right
        if self.op == "-":
            return left - right
        if self.op == "*":
            return left * right
        if self.op == "/":
            if np.any(np.asarray(right) == 0):
                raise _DomainFault("division by zero", self.offset)
            return left / right
        with np.errstate(all = "ignore"):
            result = np.power(np.asarray(left, dtype = float), right)
        if not np.all(np.isfinite(result)):
            raise _DomainFault("power outside its domain", self.offset)
        return result if np.ndim(result) else float(result)

    def derivative(self, name: str) -> Node:
        off = self.offset
        left_d = self.left.derivative(name)
        right_d = self.right.derivative(name)
        if self.op == "+":
            return _add(left_d, right_d, off)
        if self.op == "-":
            return _sub(left_d, right_d, off)
        if self.op == "*":
            return _add(_mul(left_d, self.right, off), _mul(self.left, right_d, off), off)
        if self.op == "/":
            numerator = _sub(_mul(left_d, self.right, off), _mul(self.left, right_d, off), off)
            return _div(numerator, _pow(self.right, Number(offset = off, value = 2.0), off), off)
        if name not in self.right.names():
            lowered = _sub(self.right, Number(offset = off, value = 1.0), off)
            return _mul(_mul(self.right, _pow(self.left, lowered, off), off), left_d, off)
        log_term = _mul(right_d, Call(offset = off, name = "log", args = (self.left,)), off)
        ratio_term = _div(_mul(self.right, left_d, off), self.left, off)
        return _mul(self, _add(log_term, ratio_term, off), off)

    def to_text(self) -> str:
        return f"({self.left.to_text()} {self.op} {self.right.to_text()})"

    def names(self) -> frozenset:
        return self.left.names() | self.right.names()


@dataclass(frozen = True)
class Call(Node):
    name: str = ""
    args: tuple = ()

    def evaluate(self, env: Mapping[str, Numeric]) -> Numeric:
        values = [arg.evaluate(env) for arg in self.args]
        head = values[0]
        if self.name == "sin":
            return np.sin(head)
        if self.name == "cos":
            return np.cos(head)
        if self.name == "exp":
            return np.exp(head)
        if self.name == "tanh":
            return np.tanh(head)
        if self.name == "abs":
            return np.abs(head)
        if self.name == "sign":
            return np.sign(head)
        if self.name == "step":
            return np.where(np.asarray(head) >= 0, 1.0, 0.0)
        if self.name == "log":
            if np.any(np.asarray(head) <= 0):
                raise _DomainFault("log of non-positive value", self.offset)
            return np.log(head)
        if self.name == "sqrt":
            if np.any(np.asarray(head) < 0):
                raise _DomainFault("sqrt of negative value", self.offset)
            return np.sqrt(head)
        if self.name == "min":
            return np.minimum(head, values[1])
        if self.name == "max":
            return np.maximum(head, values[1])
        raise _DomainFault(f"unknown function {self.name!r}", self.offset)

    def derivative(self, name: str) -> Node:
        off = self.offset
        inner = self.args[0]
        inner_d = inner.derivative(name)
        if self.name in ("min", "max"):
            other = self.args[1]
            other_d = other.derivative(name)
            gap = _sub(other, inner, off) if self.name == "min" else _sub(inner, other, off)
            chooser = Call(offset = off, name = "step", args = (gap,))
            complement = _sub(Number(offset = off, value = 1.0), chooser, off)
            return _add(_mul(chooser, inner_d, off), _mul(complement, other_d, off), off)
        if _is_zero(inner_d):
            return Number(offset = off, value = 0.0)
        if self.name == "sin":
            outer = Call(offset = off, name = "cos", args = (inner,))
        elif self.name == "cos":
            outer = _neg(Call(offset = off, name = "sin", args = (inner,)), off)
        elif self.name == "exp":
            outer = self
        elif self.name == "log":
            return _div(inner_d, inner, off)
        elif self.name == "sqrt":
            return _div(inner_d, _mul(Number(offset = off, value = 2.0), self, off), off)
        elif self.name == "tanh":
            squared = _pow(self, Number(offset = off, value = 2.0), off)
            outer = _sub(Number(offset = off, value = 1.0), squared, off)
        elif self.name == "abs":
            outer = Call(offset = off, name = "sign", args = (inner,))
        else:
            outer = Number(offset = off, value = 0.0)
        return _mul(outer, inner_d, off)

    def to_text(self) -> str:
        rendered = ", ".join(arg.to_text() for arg in self.args)
        return f"{self.name}({rendered})"

    def names(self) -> frozenset:
        result = frozenset()
        for arg in self.args:
            result = result | arg.names()
        return result


class Expression:
    """Parsed expression bound to its source text.

    Args:
        text: Source text.
        root: Parsed AST root.
        variables: Identifiers the expression may reference besides coordinates.
    """

    def __init__(self, text: str, root: Node, variables: frozenset) -> None:
        self.text = text
        self.root = root
        self.variables = variables

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Expression) and self.root == other.root

    def __hash__(self) -> int:
        return hash(self.root)

    def __repr__(self) -> str:
        return f"Expression({self.to_text()!r})"

    def to_text(self) -> str:
        """Render fully parenthesized source text.

        Args:
            self: Expression instance.
        """

        return self.root.to_text()

    def names(self) -> frozenset:
        """Free identifiers other than builtin constants.

        Args:
            self: Expression instance.
        """

        return frozenset(name for name in self.root.names() if name not in BUILTIN_CONSTANTS)

    def depends_on(self, name: str) -> bool:
        return name in self.root.names()

    def derivative(self, name: str) -> "Expression":
        """Differentiate symbolically with respect to one identifier.

        Args:
            self: Expression instance.
            name: Identifier to differentiate by.
        """

        return Expression(
            text = self.text,
            root = self.root.derivative(name),
            variables = self.variables
        )

    def evaluate(
        self,
        env: Mapping[str, Numeric],
        shape: Optional[tuple] = None
    ) -> Numeric:
        """Evaluate with numpy broadcasting over bound arrays.

        Args:
            self: Expression instance.
            env: Identifier values, scalars or arrays.
            shape: Optional shape the result is broadcast to.
        """

        try:
            with np.errstate(all = "ignore"):
                value = self.root.evaluate(env)
        except _DomainFault as exc:
            line, column = _line_column(text = self.text, offset = exc.offset)
            raise ExpressionEvaluationError(exc.message, self.text, line, column) from None
        if shape is None:
            return value
        return np.broadcast_to(np.asarray(value, dtype = float), shape).copy()


def parse_expression(text: Union[str, float, int], variables: Iterable[str] = ()) -> Expression:
    """Parse one DSL expression.

    Args:
        text: Expression source; plain numbers are accepted for convenience.
        variables: Extra identifiers allowed besides x0..x9 and pi.
    """

    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = repr(float(text))
    if not isinstance(text, str):
        raise ExpressionError("expression must be text", str(text), 1, 1)

    allowed = frozenset(variables)
    parser = _Parser(text = text, variables = allowed)
    root = parser.parse()
    return Expression(text = text, root = root, variables = allowed)


def _tokenize(text: str) -> list[Token]:
    """Split source text into tokens.

    Args:
        text: Source text.
    """

    tokens: list[Token] = []
    index = 0
    while index < len(text):
        whitespace = WHITESPACE_PATTERN.match(text, index)
        if whitespace:
            index = whitespace.end()
            continue
        number = NUMBER_PATTERN.match(text, index)
        if number:
            tokens.append(Token(kind = "number", text = number.group(0), offset = index))
            index = number.end()
            continue
        name = NAME_PATTERN.match(text, index)
        if name:
            tokens.append(Token(kind = "name", text = name.group(0), offset = index))
            index = name.end()
            continue
        if text[index] in OPERATOR_CHARS:
            tokens.append(Token(kind = "op", text = text[index], offset = index))
            index += 1
            continue
        line, column = _line_column(text = text, offset = index)
        raise ExpressionError(f"unexpected character {text[index]!r}", text, line, column)
    tokens.append(Token(kind = "end", text = "", offset = len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser over the token list."""

    def __init__(self, text: str, variables: frozenset) -> None:
        self.text = text
        self.variables = variables
        self.tokens = _tokenize(text = text)
        self.index = 0

    def parse(self) -> Node:
        if self.tokens[0].kind == "end":
            self._fail("empty expression", self.tokens[0])
        root = self._expr()
        if self._peek().kind != "end":
            self._fail(f"unexpected token {self._peek().text!r}", self._peek())
        return root

    def _peek(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _accept(self, op: str) -> Optional[Token]:
        token = self._peek()
        if token.kind == "op" and token.text == op:
            self.index += 1
            return token
        return None

    def _expect(self, op: str) -> Token:
        token = self._accept(op)
        if token is None:
            found = self._peek().text or "end of input"
            self._fail(f"expected {op!r} but found {found!r}", self._peek())
        return token

    def _fail(self, message: str, token: Token) -> None:
        line, column = _line_column(text = self.text, offset = token.offset)
        raise ExpressionError(message, self.text, line, column)

    def _expr(self) -> Node:
        node = self._term()
        while True:
            token = self._accept("+") or self._accept("-")
            if token is None:
                return node
            node = Binary(offset = token.offset, op = token.text, left = node, right = self._term())

    def _term(self) -> Node:
        node = self._unary()
        while True:
            token = self._accept("*") or self._accept("/")
            if token is None:
                return node
            node = Binary(offset = token.offset, op = token.text, left = node, right = self._unary())

    def _unary(self) -> Node:
        token = self._accept("-")
        if token is not None:
            return Negate(offset = token.offset, operand = self._unary())
        return self._power()

    def _power(self) -> Node:
        base = self._primary()
        token = self._accept("^")
        if token is None:
            return base
        return Binary(offset = token.offset, op = "^", left = base, right = self._unary())

    def _primary(self) -> Node:
        token = self._advance()
        if token.kind == "number":
            return Number(offset = token.offset, value = float(token.text))
        if token.kind == "name":
            if self._peek().kind == "op" and self._peek().text == "(":
                return self._call(token)
            if not self._is_known_name(token.text):
                self._fail(f"unknown identifier {token.text!r}", token)
            return Name(offset = token.offset, name = token.text)
        if token.kind == "op" and token.text == "(":
            node = self._expr()
            self._expect(")")
            return node
        found = token.text or "end of input"
        self._fail(f"unexpected token {found!r}", token)

    def _call(self, token: Token) -> Node:
        arity = FUNCTION_ARITY.get(token.text)
        if arity is None:
            self._fail(f"unknown function {token.text!r}", token)
        self._expect("(")
        args = [self._expr()]
        while self._accept(","):
            args.append(self._expr())
        self._expect(")")
        if len(args) != arity:
            self._fail(f"{token.text} expects {arity} argument(s), got {len(args)}", token)
        return Call(offset = token.offset, name = token.text, args = tuple(args))

    def _is_known_name(self, name: str) -> bool:
        return (
            COORDINATE_PATTERN.match(name) is not None
            or name in self.variables
            or name in BUILTIN_CONSTANTS
        )


def _line_column(text: str, offset: int) -> tuple[int, int]:
    """Convert a 0-based offset to 1-based line and column.

    Args:
        text: Source text.
        offset: Character offset.
    """

    prefix = text[:offset]
    line = prefix.count("\n") + 1
    column = offset - (prefix.rfind("\n") + 1) + 1
    return line, column


def _is_zero(node: Node) -> bool:
    return isinstance(node, Number) and node.value == 0.0


def _is_one(node: Node) -> bool:
    return isinstance(node, Number) and node.value == 1.0


def _neg(node: Node, offset: int) -> Node:
    if isinstance(node, Number):
        return Number(offset = offset, value = -node.value)
    return Negate(offset = offset, operand = node)


def _add(left: Node, right: Node, offset: int) -> Node:
    if _is_zero(left):
        return right
    if _is_zero(right):
        return left
    if isinstance(left, Number) and isinstance(right, Number):
        return Number(offset = offset, value = left.value + right.value)
    return Binary(offset = offset, op = "+", left = left, right = right)


def _sub(left: Node, right: Node, offset: int) -> Node:
    if _is_zero(right):
        return left
    if _is_zero(left):
        return _neg(right, offset)
    if isinstance(left, Number) and isinstance(right, Number):
        return Number(offset = offset, value = left.value - right.value)
    return Binary(offset = offset, op = "-", left = left, right = right)


def _mul(left: Node, right: Node, offset: int) -> Node:
    if _is_zero(left) or _is_zero(right):
        return Number(offset = offset, value = 0.0)
    if _is_one(left):
        return right
    if _is_one(right):
        return left
    if isinstance(left, Number) and isinstance(right, Number):
        return Number(offset = offset, value = left.value * right.value)
    return Binary(offset = offset, op = "*", left = left, right = right)


def _div(left: Node, right: Node, offset: int) -> Node:
    if _is_zero(left):
        return Number(offset = offset, value = 0.0)
    if _is_one(right):
        return left
    return Binary(offset = offset, op = "/", left = left, right = right)


def _pow(base: Node, exponent: Node, offset: int) -> Node:
    if _is_zero(exponent):
        return Number(offset = offset, value = 1.0)
    if _is_one(exponent):
        return base
    return Binary(offset = offset, op = "^", left = base, right = exponent)
