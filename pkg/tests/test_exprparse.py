import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from confcalc.exprparse import (
    Bin,
    Call,
    ExprSyntaxError,
    MissingVariable,
    Neg,
    Num,
    UnknownIdentifier,
    Var,
    evaluate,
    parse,
    rhs_function,
    scalar_function,
    to_source,
)


class TestGrammar:
    def test_mul_sqrt(self):
        assert parse("2*sqrt(t)") == Bin("*", Num(2.0), Call("sqrt", (Var("t"),)))

    def test_bare_variable(self):
        assert parse("x") == Var("x")

    def test_unary_minus_binds_looser_than_power(self):
        tree = parse("-t^2")
        assert tree == Neg(Bin("^", Var("t"), Num(2.0)))
        assert evaluate(tree, t=3.0) == -9.0

    def test_power_right_associative(self):
        tree = parse("t^2^3")
        assert tree == Bin("^", Var("t"), Bin("^", Num(2.0), Num(3.0)))
        assert evaluate(tree, t=2.0) == 2.0 ** 8

    def test_negative_exponent(self):
        assert evaluate(parse("t^-1.25"), t=4.0) == pytest.approx(4.0 ** -1.25)

    def test_precedence_chain(self):
        assert evaluate(parse("1+2*3^2"), t=0.0) == 19.0
        assert evaluate(parse("(1+2)*3"), t=0.0) == 9.0
        assert evaluate(parse("2-3-4"), t=0.0) == -5.0  # left associative
        assert evaluate(parse("16/4/2"), t=0.0) == 2.0

    def test_two_argument_pow(self):
        assert evaluate(parse("pow(2, 10)"), t=0.0) == 1024.0

    def test_whitespace_insignificant(self):
        assert parse(" 2 * sqrt( t ) ") == parse("2*sqrt(t)")


class TestErrors:
    @pytest.mark.parametrize("src", [
        "", "   ", "2t", "sin(t", "2*", "(t+1", "t+", "1 2", "sin()",
        "sin(t,x)", "pow(t)", "t^", "*t", "2..5", ")t(",
    ])
    def test_syntax_errors_are_typed(self, src):
        with pytest.raises(ExprSyntaxError):
            parse(src)

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifier) as exc:
            parse("foo(t)")
        assert exc.value.position == 0

    def test_position_reported(self):
        with pytest.raises(ExprSyntaxError) as exc:
            parse("t + $")
        assert exc.value.position == 4

    def test_deep_nesting_is_typed_error(self):
        with pytest.raises(ExprSyntaxError):
            parse("(" * 5000 + "t" + ")" * 5000)

    def test_missing_variable(self):
        with pytest.raises(MissingVariable):
            evaluate(parse("x + 1"), t=0.0)


class TestEvaluation:
    def test_spec_values(self):
        assert evaluate(parse("2*sqrt(t)"), t=4.0) == 4.0
        assert evaluate(parse("abs(t)^0.5"), t=-9.0) == 3.0

    @pytest.mark.parametrize("src,t", [
        ("log(t)", 0.0), ("log(t)", -1.0), ("sqrt(t)", -4.0),
        ("1/t", 0.0), ("(-2)^0.5", 1.0), ("exp(t)", 1e9),
    ])
    def test_undefined_is_nan(self, src, t):
        assert math.isnan(evaluate(parse(src), t=t))

    def test_zero_power_zero_convention(self):
        assert evaluate(parse("t^t"), t=0.0) == 1.0
        assert evaluate(parse("pow(t, 0)"), t=0.0) == 1.0

    def test_negative_base_integer_exponent(self):
        assert evaluate(parse("t^3"), t=-2.0) == -8.0

    def test_x_supplied(self):
        assert evaluate(parse("t*x + 1"), t=2.0, x=3.0) == 7.0

    def test_undefined_propagates_through_pow(self):
        # pow(nan, 0) is 1 in C; the undefined signal must stay sticky
        assert math.isnan(evaluate(parse("sqrt(t)^0"), t=-1.0))


# random well-formed expression generator (parser-canonical: no negative literals)

def _random_expr(rng: random.Random, depth: int):
    if depth <= 0:
        return rng.choice([
            Num(round(rng.uniform(0, 10), 3)), Var("t"), Var("x"),
        ])
    kind = rng.randrange(6)
    if kind == 0:
        return Num(round(rng.uniform(0, 10), 3))
    if kind == 1:
        return rng.choice([Var("t"), Var("x")])
    if kind == 2:
        return Neg(_random_expr(rng, depth - 1))
    if kind == 3:
        op = rng.choice(["+", "-", "*", "/", "^"])
        return Bin(op, _random_expr(rng, depth - 1), _random_expr(rng, depth - 1))
    if kind == 4:
        name = rng.choice(["sin", "cos", "exp", "log", "sqrt", "abs"])
        return Call(name, (_random_expr(rng, depth - 1),))
    return Call("pow", (_random_expr(rng, depth - 1), _random_expr(rng, depth - 1)))


def _reference_eval(e, t, x):
    """Independent tree walker for the bit-for-bit comparison."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.name == "t":
            return t
        if x is None:
            raise MissingVariable("x missing")
        return x
    if isinstance(e, Neg):
        return -_reference_eval(e.operand, t, x)
    if isinstance(e, Bin):
        a = _reference_eval(e.left, t, x)
        b = _reference_eval(e.right, t, x)
        match e.op:
            case "+":
                return a + b
            case "-":
                return a - b
            case "*":
                return a * b
            case "/":
                return a / b if b != 0.0 else math.nan
            case "^":
                return _reference_pow(a, b)
    args = [_reference_eval(arg, t, x) for arg in e.args]
    if any(math.isnan(v) for v in args):
        return math.nan
    match e.name:
        case "sin":
            return math.sin(args[0])
        case "cos":
            return math.cos(args[0])
        case "exp":
            try:
                return math.exp(args[0])
            except OverflowError:
                return math.nan
        case "log":
            return math.log(args[0]) if args[0] > 0 else math.nan
        case "sqrt":
            return math.sqrt(args[0]) if args[0] >= 0 else math.nan
        case "abs":
            return abs(args[0])
        case "pow":
            return _reference_pow(args[0], args[1])
    raise AssertionError(f"unhandled node {e}")


def _reference_pow(a, b):
    if math.isnan(a) or math.isnan(b):
        return math.nan
    if a == 0.0 and b == 0.0:
        return 1.0
    if a < 0.0 and b != round(b):
        return math.nan
    try:
        return math.pow(a, b)
    except (ValueError, OverflowError):
        return math.nan


class TestRoundTrip:
    def test_print_parse_identity_1000_random_trees(self):
        rng = random.Random(20240817)
        for _ in range(1000):
            tree = _random_expr(rng, rng.randrange(1, 6))
            printed = to_source(tree)
            assert parse(printed) == tree, printed

    def test_numeric_round_trip_bit_for_bit(self):
        rng = random.Random(99173)
        for _ in range(1000):
            tree = _random_expr(rng, rng.randrange(1, 5))
            t = rng.uniform(-10, 10)
            x = rng.uniform(-10, 10)
            mine = evaluate(tree, t, x)
            ref = _reference_eval(tree, t, x)
            if not math.isfinite(ref):
                assert math.isnan(mine)
            else:
                assert mine == ref  # bit-for-bit

    def test_reparse_idempotent_on_printed_form(self):
        rng = random.Random(5)
        for _ in range(200):
            tree = _random_expr(rng, 4)
            once = parse(to_source(tree))
            twice = parse(to_source(once))
            assert once == twice


class TestFuzzSafety:
    @given(st.text(max_size=80))
    @settings(max_examples=400, deadline=None)
    def test_arbitrary_text_never_crashes(self, source):
        try:
            tree = parse(source)
        except ExprSyntaxError:
            return
        # parse succeeded: evaluation must terminate and yield a float
        try:
            v = evaluate(tree, t=1.2345, x=0.5)
        except MissingVariable:
            return
        assert isinstance(v, float)

    @given(st.text(alphabet="tx+-*/^()0123456789. sincoexplogqrabw,", max_size=60))
    @settings(max_examples=600, deadline=None)
    def test_grammar_like_text_never_crashes(self, source):
        try:
            parse(source)
        except ExprSyntaxError:
            pass


class TestBridges:
    def test_scalar_function(self):
        f = scalar_function("2*sqrt(t)", domain_start=0.0)
        assert f.eval_defined(4.0) == 4.0
        assert f.eval_defined(-1.0) is None
        assert f.label == "2*sqrt(t)"

    def test_rhs_function(self):
        F = rhs_function("t*x")
        assert F(2.0, 3.0) == 6.0
