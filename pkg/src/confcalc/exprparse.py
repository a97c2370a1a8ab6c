"""Recursive-descent parser and evaluator for problem expressions in t and x.

Grammar (whitespace insignificant, no implicit multiplication):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?        # right-associative, binds tightest
    atom   := NUMBER | 't' | 'x' | IDENT '(' expr (',' expr)* ')' | '(' expr ')'

Evaluation is real-valued only.  Domain violations (sqrt of a negative,
log of a nonpositive, division by zero, fractional power of a negative
base) yield NaN, the "undefined" signal; 0^0 evaluates to 1 by convention.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .core import ScalarFunction

__all__ = [
    "ExprSyntaxError",
    "UnknownIdentifier",
    "MissingVariable",
    "Expr",
    "Num",
    "Var",
    "Neg",
    "Bin",
    "Call",
    "parse",
    "evaluate",
    "to_source",
    "scalar_function",
    "rhs_function",
]


class ExprSyntaxError(Exception):
    """Malformed expression; carries the byte offset and what was expected."""

    def __init__(self, message: str, position: int, expected: str = ""):
        detail = f"{message} at offset {position}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)
        self.position = position
        self.expected = expected


class UnknownIdentifier(ExprSyntaxError):
    """Identifier outside {t, x} and the known function names."""


class MissingVariable(Exception):
    """The expression references x but no x value was supplied."""


# ---------------------------------------------------------------------------
# syntax tree


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str  # "t" or "x"


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class Bin(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: tuple[Expr, ...]


FUNCTIONS: dict[str, int] = {
    "sin": 1, "cos": 1, "exp": 1, "log": 1, "sqrt": 1, "abs": 1, "pow": 2,
}

_MAX_DEPTH = 200


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            # skip whitespace-only remainder
            rest = source[pos:]
            if rest.strip() == "":
                break
            bad = pos + len(rest) - len(rest.lstrip())
            raise ExprSyntaxError(f"unexpected character {source[bad]!r}", bad)
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("ident") is not None:
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0
        self.depth = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, text, pos = self.peek()
        if kind == "op" and text == op:
            return self.advance()
        raise ExprSyntaxError(f"found {text!r}" if text else "unexpected end of input",
                              pos, expected=repr(op))

    def _enter(self, pos: int):
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            raise ExprSyntaxError("expression too deeply nested", pos)

    def expr(self) -> Expr:
        kind, text, pos = self.peek()
        self._enter(pos)
        try:
            node = self.term()
            while True:
                kind, text, _ = self.peek()
                if kind == "op" and text in "+-":
                    self.advance()
                    node = Bin(text, node, self.term())
                else:
                    return node
        finally:
            self.depth -= 1

    def term(self) -> Expr:
        node = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = Bin(text, node, self.factor())
            else:
                return node

    def factor(self) -> Expr:
        kind, text, pos = self.peek()
        self._enter(pos)
        try:
            if kind == "op" and text == "-":
                self.advance()
                return Neg(self.factor())
            return self.power()
        finally:
            self.depth -= 1

    def power(self) -> Expr:
        node = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return Bin("^", node, self.factor())
        return node

    def atom(self) -> Expr:
        kind, text, pos = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if text in ("t", "x"):
                return Var(text)
            if text in FUNCTIONS:
                self.expect_op("(")
                args = [self.expr()]
                while True:
                    k, t2, _ = self.peek()
                    if k == "op" and t2 == ",":
                        self.advance()
                        args.append(self.expr())
                    else:
                        break
                self.expect_op(")")
                arity = FUNCTIONS[text]
                if len(args) != arity:
                    raise ExprSyntaxError(
                        f"{text} takes {arity} argument(s), got {len(args)}", pos)
                return Call(text, tuple(args))
            raise UnknownIdentifier(f"unknown identifier {text!r}", pos,
                                    expected="t, x, or a function name")
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"found {text!r}" if text else "unexpected end of input",
                              pos, expected="a number, variable, or '('")


def parse(source: str) -> Expr:
    """Parse ``source`` into an Expr tree, or raise a typed syntax error."""
    if not source or source.strip() == "":
        raise ExprSyntaxError("empty expression", 0)
    p = _Parser(source)
    node = p.expr()
    kind, text, pos = p.peek()
    if kind != "eof":
        raise ExprSyntaxError(f"trailing input {text!r}", pos)
    return node


# ---------------------------------------------------------------------------
# evaluation

def _pow(base: float, expo: float) -> float:
    if math.isnan(base) or math.isnan(expo):
        return math.nan  # C pow would yield pow(nan, 0) == 1; keep undefined sticky
    if base == 0.0 and expo == 0.0:
        return 1.0  # documented convention
    if base < 0.0 and expo != round(expo):
        return math.nan  # real-valued semantics only
    try:
        return math.pow(base, expo)
    except (ValueError, OverflowError):
        return math.nan


def evaluate(e: Expr, t: float, x: float | None = None) -> float:
    """Evaluate the tree at (t, x); NaN is the undefined signal."""
    v = _eval(e, t, x)
    return v if math.isfinite(v) else math.nan


def _eval(e: Expr, t: float, x: float | None) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.name == "t":
            return t
        if x is None:
            raise MissingVariable("expression references x but no x was supplied")
        return x
    if isinstance(e, Neg):
        return -_eval(e.operand, t, x)
    if isinstance(e, Bin):
        a = _eval(e.left, t, x)
        b = _eval(e.right, t, x)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            return a / b if b != 0.0 else math.nan
        return _pow(a, b)
    # Call
    args = [_eval(arg, t, x) for arg in e.args]
    name = e.name
    if any(math.isnan(v) for v in args):
        return math.nan
    if name == "sin":
        return math.sin(args[0])
    if name == "cos":
        return math.cos(args[0])
    if name == "exp":
        try:
            return math.exp(args[0])
        except OverflowError:
            return math.nan
    if name == "log":
        return math.log(args[0]) if args[0] > 0.0 else math.nan
    if name == "sqrt":
        return math.sqrt(args[0]) if args[0] >= 0.0 else math.nan
    if name == "abs":
        return abs(args[0])
    return _pow(args[0], args[1])


# ---------------------------------------------------------------------------
# canonical printing (minimal parentheses, re-parses to the same tree)

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def to_source(e: Expr) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        inner = to_source(e.operand)
        # operand of unary minus is a factor: parenthesize + - * /
        if isinstance(e.operand, Bin) and e.operand.op in "+-*/":
            inner = f"({inner})"
        return "-" + inner
    if isinstance(e, Call):
        return e.name + "(" + ", ".join(to_source(a) for a in e.args) + ")"
    # binary
    left, right = to_source(e.left), to_source(e.right)
    if e.op == "^":
        # base must be an atom; exponent is a factor
        if not isinstance(e.left, (Num, Var, Call)) or _is_negative_num(e.left):
            left = f"({left})"
        if isinstance(e.right, Bin) and e.right.op in "+-*/":
            right = f"({right})"
        return f"{left}^{right}"
    p = _PREC[e.op]
    if _prec_of(e.left) < p:
        left = f"({left})"
    # left-associative: right child at equal precedence needs parens
    if _prec_of(e.right) < p or (_prec_of(e.right) == p and e.op in "-/*+"):
        right = f"({right})"
    return f"{left} {e.op} {right}"


def _prec_of(e: Expr) -> int:
    if isinstance(e, Bin):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _PREC["neg"]
    if isinstance(e, Num) and e.value < 0:
        return _PREC["neg"]
    return 9


def _is_negative_num(e: Expr) -> bool:
    return isinstance(e, Num) and e.value < 0


# ---------------------------------------------------------------------------
# bridges to the numerical modules

def scalar_function(source: str, domain_start: float = -math.inf,
                    label: str | None = None) -> ScalarFunction:
    """Compile an expression in t into a ScalarFunction."""
    tree = parse(source)
    return ScalarFunction(
        fn=lambda t: evaluate(tree, t),
        domain_start=domain_start,
        label=label if label is not None else source,
    )


def rhs_function(source: str):
    """Compile an expression in t and x into an IVP right side F(t, x)."""
    tree = parse(source)

    def F(t: float, x: float) -> float:
        return evaluate(tree, t, x)

    return F
