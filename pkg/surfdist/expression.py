"""
Expression engine - parses and evaluates arithmetic over surface parameters.

Grammar (highest precedence first):

    atom    :: number | pi | name | func '(' expr ')' | '(' expr ')'
    power   :: atom [ '^' power ]              (right associative)
    signed  :: ['-' | '+']* power
    term    :: signed [ ('*' | '/') signed ]*
    expr    :: term [ ('+' | '-') term ]*

Unary minus binds looser than '^', so ``-u^2`` is ``-(u^2)``; a negative
exponent must be parenthesized: ``2^(-1)``.
"""

import math
from typing import Callable, Dict, Iterable, List, Mapping, Sequence, Tuple

import pyparsing as pp

from .errors import EvaluationError, ParseError

CONSTANTS = {"pi": math.pi}

# name -> (callable, arity)
FUNCTIONS: Dict[str, Tuple[Callable[..., float], int]] = {
    "sin": (math.sin, 1),
    "cos": (math.cos, 1),
    "tan": (math.tan, 1),
    "exp": (math.exp, 1),
    "log": (math.log, 1),
    "sqrt": (math.sqrt, 1),
    "abs": (abs, 1),
}

_Compiled = Callable[[Sequence[float]], float]


def _divide(a: float, b: float) -> float:
    if b == 0.0:
        raise ZeroDivisionError("division by zero")
    return a / b


_BINARY: Dict[str, Callable[[float, float], float]] = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _divide,
    "^": math.pow,
}


class Node:
    """Expression tree node."""

    loc = 0

    def children(self) -> Iterable["Node"]:
        return ()

    def compile(self, index: Mapping[str, int]) -> _Compiled:
        raise NotImplementedError

    def render(self) -> str:
        raise NotImplementedError


class Number(Node):
    def __init__(self, value: float, loc: int = 0):
        self.value = value
        self.loc = loc

    def compile(self, index):
        value = self.value
        return lambda env: value

    def render(self):
        return repr(self.value)


class Name(Node):
    def __init__(self, name: str, loc: int = 0):
        self.name = name
        self.loc = loc

    def compile(self, index):
        if self.name in CONSTANTS:
            value = CONSTANTS[self.name]
            return lambda env: value
        slot = index[self.name]
        return lambda env: env[slot]

    def render(self):
        return self.name


class UnaryOp(Node):
    def __init__(self, op: str, operand: Node, loc: int = 0):
        self.op = op
        self.operand = operand
        self.loc = loc

    def children(self):
        return (self.operand,)

    def compile(self, index):
        inner = self.operand.compile(index)
        if self.op == "-":
            return lambda env: -inner(env)
        return inner

    def render(self):
        return f"({self.op}{self.operand.render()})"


class BinaryOp(Node):
    def __init__(self, op: str, left: Node, right: Node, loc: int = 0):
        self.op = op
        self.left = left
        self.right = right
        self.loc = loc

    def children(self):
        return (self.left, self.right)

    def compile(self, index):
        fn = _BINARY[self.op]
        left = self.left.compile(index)
        right = self.right.compile(index)
        return lambda env: fn(left(env), right(env))

    def render(self):
        return f"({self.left.render()} {self.op} {self.right.render()})"


class Call(Node):
    def __init__(self, name: str, args: List[Node], loc: int = 0):
        self.name = name
        self.args = args
        self.loc = loc

    def children(self):
        return tuple(self.args)

    def compile(self, index):
        fn = FUNCTIONS[self.name][0]
        (arg,) = [a.compile(index) for a in self.args]
        return lambda env: fn(arg(env))

    def render(self):
        return f"{self.name}({', '.join(a.render() for a in self.args)})"


class Expression:
    """
    A parsed, validated expression over a fixed list of variables.

    Example:
        >>> expr = parse_expression("2*(1+cos(u))", ["u"])
        >>> expr.evaluate({"u": 0.0})
        4.0
    """

    def __init__(self, source: str, root: Node, variables: Sequence[str]):
        self.source = source
        self.root = root
        self.variables = tuple(variables)
        self._fn = root.compile({name: i for i, name in enumerate(self.variables)})

    def __call__(self, *values: float) -> float:
        return self._run(values)

    def evaluate(self, assignment: Mapping[str, float]) -> float:
        """Evaluate with a name -> value mapping covering every variable."""
        try:
            values = [float(assignment[name]) for name in self.variables]
        except KeyError as exc:
            raise EvaluationError(f"{self.source}: no value for {exc.args[0]!r}") from None
        return self._run(values)

    def _run(self, values: Sequence[float]) -> float:
        try:
            value = self._fn(values)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise EvaluationError(f"{self.source!r}: {exc}") from None
        if not math.isfinite(value):
            raise EvaluationError(f"{self.source!r}: non-finite value {value!r}")
        return value

    def __str__(self) -> str:
        return self.root.render()

    def __repr__(self) -> str:
        return f"Expression({self.source!r}, variables={list(self.variables)!r})"


def _fold_left(s, loc, toks):
    items = list(toks[0])
    node = items[0]
    for i in range(1, len(items), 2):
        node = BinaryOp(items[i], node, items[i + 1], loc)
    return node


def _fold_right(s, loc, toks):
    items = list(toks[0])
    node = items[-1]
    for i in range(len(items) - 2, 0, -2):
        node = BinaryOp(items[i], items[i - 1], node, loc)
    return node


def _fold_unary(s, loc, toks):
    items = list(toks[0])
    node = items[-1]
    for op in reversed(items[:-1]):
        node = UnaryOp(op, node, loc)
    return node


class ExpressionParser:
    """Build the grammar once and parse many expressions with it."""

    def __init__(self):
        number = pp.Regex(r"(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?")
        number.set_parse_action(lambda s, loc, t: Number(float(t[0]), loc))

        ident = pp.Word(pp.alphas + "_", pp.alphanums + "_")
        name = ident.copy().set_parse_action(lambda s, loc, t: Name(t[0], loc))

        expr = pp.Forward()
        call = ident + pp.Suppress("(") + pp.Opt(pp.DelimitedList(expr)) + pp.Suppress(")")
        call.set_parse_action(lambda s, loc, t: Call(t[0], list(t[1:]), loc))

        operand = number | call | name
        expr <<= pp.infix_notation(
            operand,
            [
                (pp.Literal("^"), 2, pp.OpAssoc.RIGHT, _fold_right),
                (pp.one_of("+ -"), 1, pp.OpAssoc.RIGHT, _fold_unary),
                (pp.one_of("* /"), 2, pp.OpAssoc.LEFT, _fold_left),
                (pp.one_of("+ -"), 2, pp.OpAssoc.LEFT, _fold_left),
            ],
        )
        self.grammar = expr

    def parse(self, text: str, variables: Sequence[str]) -> Expression:
        """
        Parse ``text`` and check every identifier against ``variables``.

        Raises:
            ParseError: syntax errors, unknown identifiers or functions,
                and calls with the wrong number of arguments.
        """
        variables = list(variables)
        for var in variables:
            if var in CONSTANTS or var in FUNCTIONS:
                raise ParseError(f"variable name {var!r} is reserved")
        if not isinstance(text, str) or not text.strip():
            raise ParseError("empty expression", loc=0)
        try:
            root = self.grammar.parse_string(text, parse_all=True)[0]
        except pp.ParseBaseException as exc:
            raise ParseError(f"invalid expression {text!r}: {exc.msg}", loc=exc.loc) from None
        self._check(root, text, set(variables))
        return Expression(text, root, variables)

    def _check(self, node: Node, text: str, known: set) -> None:
        if isinstance(node, Name) and node.name not in known and node.name not in CONSTANTS:
            raise ParseError(f"unknown identifier {node.name!r} in {text!r}", loc=node.loc)
        if isinstance(node, Call):
            if node.name not in FUNCTIONS:
                raise ParseError(f"unknown function {node.name!r} in {text!r}", loc=node.loc)
            arity = FUNCTIONS[node.name][1]
            if len(node.args) != arity:
                raise ParseError(
                    f"{node.name}() takes {arity} argument(s), got {len(node.args)}",
                    loc=node.loc,
                )
        for child in node.children():
            self._check(child, text, known)


_parser = ExpressionParser()


def parse_expression(text: str, variables: Sequence[str] = ()) -> Expression:
    """Parse an arithmetic expression over the declared variable names."""
    return _parser.parse(text, variables)
