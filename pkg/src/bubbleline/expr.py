"""Formula language for density profiles.

Grammar (EBNF, whitespace insignificant between tokens):

    expr    = term , { ( "+" | "-" ) , term } ;
    term    = factor , { ( "*" | "/" ) , factor } ;
    factor  = "-" , factor | power ;
    power   = atom , [ "^" , factor ] ;
    atom    = NUMBER | IDENT | IDENT , "(" , expr , ")" | "(" , expr , ")" ;
    NUMBER  = digits , [ "." , digits ] , [ exponent ] | "." , digits , [ exponent ] ;
    IDENT   = letter-or-underscore , { letter-digit-or-underscore } ;

"^" is right-associative and binds tighter than unary minus, so -x^2 means
-(x^2).  The recognised functions are abs, exp, log, sqrt and atan; every
other identifier is the free variable, of which a formula must use exactly
one.  Errors carry the byte offset of the offending token.

Evaluation comes in several flavours over the same tree: plain floats,
mpmath high precision (selected by passing an mpf argument), dual numbers
for exact derivatives, and compiled scalar/numpy callables for hot loops.
The dual evaluator certifies kinks: when abs() is evaluated exactly at
zero it runs both one-sided passes and insists the slopes agree.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Union

import mpmath
import numpy as np

from . import dual as dualmod
from .dual import Dual
from .errors import (
    EvalDomainError,
    LexicalError,
    NonSmoothPointError,
    ParseError,
    UnknownIdentifierError,
)

FUNCTIONS = ("abs", "exp", "log", "sqrt", "atan")

UNARY_OPS = ("neg", "abs", "exp", "log", "sqrt", "atan")
BINARY_OPS = ("add", "sub", "mul", "div", "pow")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: "Node"
    rhs: "Node"


Node = Union[Const, Var, Unary, Binary]


@dataclass(frozen=True)
class DensityExpr:
    """Parsed formula: AST root plus the name of its single free variable."""

    root: Node
    variable: str

    def formula(self) -> str:
        return to_formula(self.root)


# --- lexer -----------------------------------------------------------------

_NUMBER = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_SPACE = re.compile(r"\s+")


@dataclass(frozen=True)
class _Token:
    kind: str  # NUMBER, IDENT, OP, LPAREN, RPAREN, END
    text: str
    offset: int


def _tokenize(text: str) -> Iterator[_Token]:
    pos = 0
    size = len(text)
    while pos < size:
        space = _SPACE.match(text, pos)
        if space:
            pos = space.end()
            continue
        number = _NUMBER.match(text, pos)
        if number:
            yield _Token("NUMBER", number.group(), pos)
            pos = number.end()
            continue
        ident = _IDENT.match(text, pos)
        if ident:
            yield _Token("IDENT", ident.group(), pos)
            pos = ident.end()
            continue
        char = text[pos]
        if char in "+-*/^":
            yield _Token("OP", char, pos)
        elif char == "(":
            yield _Token("LPAREN", char, pos)
        elif char == ")":
            yield _Token("RPAREN", char, pos)
        else:
            raise LexicalError(f"unexpected character {char!r}", pos)
        pos += 1
    yield _Token("END", "", size)


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = list(_tokenize(text))
        self.pos = 0
        self.variable: Optional[str] = None

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, kind: str, what: str) -> _Token:
        token = self.peek()
        if token.kind != kind:
            raise ParseError(f"expected {what}", token.offset)
        return self.advance()

    def parse(self) -> DensityExpr:
        root = self.expr()
        trailing = self.peek()
        if trailing.kind != "END":
            raise ParseError(
                f"unexpected {trailing.text!r} after expression", trailing.offset
            )
        if self.variable is None:
            raise ParseError("formula has no free variable", trailing.offset)
        return DensityExpr(root, self.variable)

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind == "OP" and self.peek().text in "+-":
            op = self.advance().text
            node = Binary("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek().kind == "OP" and self.peek().text in "*/":
            op = self.advance().text
            node = Binary("mul" if op == "*" else "div", node, self.factor())
        return node

    def factor(self) -> Node:
        token = self.peek()
        if token.kind == "OP" and token.text == "-":
            self.advance()
            return Unary("neg", self.factor())
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        token = self.peek()
        if token.kind == "OP" and token.text == "^":
            self.advance()
            # Right-associative: the exponent re-enters at factor level so
            # chains nest rightward and a leading minus is legal there.
            node = Binary("pow", node, self.factor())
        return node

    def atom(self) -> Node:
        token = self.peek()
        if token.kind == "NUMBER":
            self.advance()
            return Const(float(token.text))
        if token.kind == "IDENT":
            self.advance()
            if self.peek().kind == "LPAREN":
                if token.text not in FUNCTIONS:
                    raise UnknownIdentifierError(
                        f"unknown function {token.text!r}", token.offset
                    )
                self.advance()
                arg = self.expr()
                self.expect("RPAREN", "')'")
                return Unary(token.text, arg)
            if token.text in FUNCTIONS:
                raise UnknownIdentifierError(
                    f"function name {token.text!r} used as a variable", token.offset
                )
            if self.variable is None:
                self.variable = token.text
            elif token.text != self.variable:
                raise UnknownIdentifierError(
                    f"second variable {token.text!r}; formula already uses"
                    f" {self.variable!r}",
                    token.offset,
                )
            return Var(token.text)
        if token.kind == "LPAREN":
            self.advance()
            node = self.expr()
            self.expect("RPAREN", "')'")
            return node
        raise ParseError(
            "expected a number, identifier or '('", token.offset
        )


def parse(text: str) -> DensityExpr:
    return _Parser(text).parse()


# --- printing --------------------------------------------------------------

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_OP_TEXT = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


def _prec(node: Node) -> int:
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary):
        return _PREC["neg"] if node.op == "neg" else 5
    return 5


def _number_text(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _render(node: Node, var_text: str, pow_text: str) -> str:
    if isinstance(node, Const):
        return _number_text(node.value)
    if isinstance(node, Var):
        return var_text
    if isinstance(node, Unary):
        inner = _render(node.arg, var_text, pow_text)
        if node.op == "neg":
            if _prec(node.arg) < _PREC["neg"]:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{node.op}({inner})"
    lhs = _render(node.lhs, var_text, pow_text)
    rhs = _render(node.rhs, var_text, pow_text)
    if node.op == "pow":
        if _prec(node.lhs) <= _PREC["pow"]:
            lhs = f"({lhs})"
        if _prec(node.rhs) < _PREC["pow"]:
            rhs = f"({rhs})"
        return f"{lhs}{pow_text}{rhs}"
    own = _PREC[node.op]
    if _prec(node.lhs) < own:
        lhs = f"({lhs})"
    # Left-associative chain: the right operand needs parens on a tie.
    if _prec(node.rhs) < own or (
        _prec(node.rhs) == own and node.op in ("sub", "div")
    ):
        rhs = f"({rhs})"
    return f"{lhs} {_OP_TEXT[node.op]} {rhs}"


def to_formula(node: Node) -> str:
    """Render a tree in the input grammar; parse(to_formula(n)) rebuilds n."""
    return _render(node, _var_name(node) or "V", "^")


def _var_name(node: Node) -> Optional[str]:
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        return _var_name(node.arg)
    if isinstance(node, Binary):
        return _var_name(node.lhs) or _var_name(node.rhs)
    return None


# --- evaluation ------------------------------------------------------------


def _is_integer(value: float) -> bool:
    return float(value) == int(value) if abs(float(value)) < 2**53 else True


def _pow_scalar(base, expo, node: Node):
    if base < 0:
        if not _is_integer(expo):
            raise EvalDomainError(
                "fractional power of a negative value", to_formula(node)
            )
        return base ** int(expo)
    if base == 0 and expo < 0:
        raise EvalDomainError("zero raised to a negative power", to_formula(node))
    return base**expo


def evaluate(expr: DensityExpr, v):
    """Evaluate at v.  Passing an mpmath.mpf keeps the whole walk in mpf."""
    m = mpmath if isinstance(v, mpmath.mpf) else math

    def walk(node: Node):
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Var):
            return v
        if isinstance(node, Unary):
            arg = walk(node.arg)
            if node.op == "neg":
                return -arg
            if node.op == "abs":
                return abs(arg)
            if node.op == "exp":
                return m.exp(arg)
            if node.op == "log":
                if arg <= 0:
                    raise EvalDomainError(
                        "log of a non-positive value", to_formula(node)
                    )
                return m.log(arg)
            if node.op == "sqrt":
                if arg < 0:
                    raise EvalDomainError(
                        "sqrt of a negative value", to_formula(node)
                    )
                return m.sqrt(arg)
            return m.atan(arg)
        lhs = walk(node.lhs)
        rhs = walk(node.rhs)
        if node.op == "add":
            return lhs + rhs
        if node.op == "sub":
            return lhs - rhs
        if node.op == "mul":
            return lhs * rhs
        if node.op == "div":
            if rhs == 0:
                raise EvalDomainError("division by zero", to_formula(node))
            return lhs / rhs
        return _pow_scalar(lhs, rhs, node)

    return walk(expr.root)


def _dual_pow(base: Dual, expo: Dual, node: Node) -> Dual:
    if expo.slope == 0:
        e = expo.value
        if base.value < 0:
            if not _is_integer(e):
                raise EvalDomainError(
                    "fractional power of a negative value", to_formula(node)
                )
            n = int(e)
            return Dual(base.value**n, n * base.value ** (n - 1) * base.slope)
        if base.value == 0:
            if e < 0:
                raise EvalDomainError(
                    "zero raised to a negative power", to_formula(node)
                )
            if e == 0:
                return Dual(1.0, 0.0)
            if e == 1:
                return Dual(base.value, base.slope)
            if e < 1:
                raise EvalDomainError(
                    "power below one has unbounded slope at zero", to_formula(node)
                )
            return Dual(base.value**e, 0.0)
        value = base.value**e
        return Dual(value, e * base.value ** (e - 1) * base.slope)
    if base.value <= 0:
        raise EvalDomainError(
            "variable exponent needs a positive base", to_formula(node)
        )
    return dualmod.exp(expo * dualmod.log(base))


def _eval_dual_once(expr: DensityExpr, v, side: int, kinks: list) -> Dual:
    def walk(node: Node) -> Dual:
        if isinstance(node, Const):
            return Dual(node.value, 0.0)
        if isinstance(node, Var):
            return Dual.variable(v)
        if isinstance(node, Unary):
            arg = walk(node.arg)
            if node.op == "neg":
                return -arg
            if node.op == "abs":
                if arg.value == 0:
                    kinks.append(node)
                    return Dual(abs(arg.value), side * arg.slope)
                sign = 1 if arg.value > 0 else -1
                return Dual(abs(arg.value), sign * arg.slope)
            if node.op == "exp":
                return dualmod.exp(arg)
            if node.op == "log":
                if arg.value <= 0:
                    raise EvalDomainError(
                        "log of a non-positive value", to_formula(node)
                    )
                return dualmod.log(arg)
            if node.op == "sqrt":
                if arg.value <= 0:
                    raise EvalDomainError(
                        "sqrt needs a positive argument for a finite slope",
                        to_formula(node),
                    )
                return dualmod.sqrt(arg)
            return dualmod.atan(arg)
        lhs = walk(node.lhs)
        rhs = walk(node.rhs)
        if node.op == "add":
            return lhs + rhs
        if node.op == "sub":
            return lhs - rhs
        if node.op == "mul":
            return lhs * rhs
        if node.op == "div":
            if rhs.value == 0:
                raise EvalDomainError("division by zero", to_formula(node))
            return lhs / rhs
        return _dual_pow(lhs, rhs, node)

    return walk(expr.root)


def eval_dual(expr: DensityExpr, v, kink_tol: float = 1e-8) -> Dual:
    """Value and derivative at v.

    abs() evaluated exactly at zero is re-run with the opposite one-sided
    convention; the two slopes must agree within kink_tol or the point is
    reported as genuinely non-smooth.
    """
    kinks: list = []
    plus = _eval_dual_once(expr, v, +1, kinks)
    if not kinks:
        return plus
    minus = _eval_dual_once(expr, v, -1, [])
    gap = abs(float(plus.slope) - float(minus.slope))
    scale = 1.0 + max(abs(float(plus.slope)), abs(float(minus.slope)))
    if gap > kink_tol * scale:
        raise NonSmoothPointError(float(v), float(minus.slope), float(plus.slope))
    return Dual(plus.value, (plus.slope + minus.slope) / 2)


# --- compilation -----------------------------------------------------------


def _source(node: Node) -> str:
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return "_v"
    if isinstance(node, Unary):
        inner = _source(node.arg)
        if node.op == "neg":
            return f"(-({inner}))"
        return f"{node.op}({inner})"
    lhs = _source(node.lhs)
    rhs = _source(node.rhs)
    op = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "**"}[node.op]
    return f"(({lhs}) {op} ({rhs}))"


def compile_scalar(expr: DensityExpr) -> Callable[[float], float]:
    """Bare math-library callable; no domain checks, trusts a valid model."""
    env = {
        "abs": abs,
        "exp": math.exp,
        "log": math.log,
        "sqrt": math.sqrt,
        "atan": math.atan,
        "__builtins__": {},
    }
    return eval(f"lambda _v: {_source(expr.root)}", env)


def compile_numpy(expr: DensityExpr) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorised callable; invalid points come back as nan/inf, not raises."""
    env = {
        "abs": np.abs,
        "exp": np.exp,
        "log": np.log,
        "sqrt": np.sqrt,
        "atan": np.arctan,
        "__builtins__": {},
    }
    fn = eval(f"lambda _v: {_source(expr.root)}", env)

    def wrapped(values: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            out = fn(np.asarray(values, dtype=float))
        return np.broadcast_to(out, np.shape(values)) if np.ndim(out) == 0 else out

    return wrapped
