import pytest
from hypothesis import given, strategies as st

from padic_automata.expr import ExpC, Or, eval_mod, expc, poly, x
from padic_automata.grammar import ExprSyntaxError, parse_expr

X = x()


def same(e1, e2, k=24, p=2):
    step = max(1, p ** k // 997)
    return all(eval_mod(e1, v, k) == eval_mod(e2, v, k) for v in range(0, p ** k, step))


def test_quadratic():
    assert same(parse_expr("2*x^2+3*x+1"), poly([1, 3, 2]))


def test_lacunary_and_constant_folding():
    e = parse_expr("x+(x^2|-131065)")
    assert same(e, X + (X ** 2 | -131065))
    assert same(parse_expr("x+(x^2|-(2^17-7))"), e)
    assert same(parse_expr("x + (x^2 OR c)", consts={"c": -131065}), e)


def test_exponential_and_pattern():
    assert isinstance(parse_expr("3^x"), ExpC)
    assert same(parse_expr("3*x+3^x"), 3 * X + expc(3))
    assert same(parse_expr("1+x+(x^2|5)"), 1 + X + (X ** 2 | 5))
    assert same(parse_expr("(x AND 12) + (x^2 OR 5)"), (X & 12) + (X ** 2 | 5))


def test_precedence():
    # bitwise binds looser than +, as in C
    assert same(parse_expr("x+x^2|5"), Or(X + X ** 2, 5))
    assert same(parse_expr("x | 1 & 3"), X | (1 & 3))
    assert same(parse_expr("-x^2"), -(X ** 2))
    # ^ is right associative
    assert same(parse_expr("5^3^x"), parse_expr("5^(3^x)"))
    assert same(parse_expr("x^2^3"), X ** 8)
    assert same(parse_expr("x XOR 6"), X ^ 6)
    assert same(parse_expr("NOT x"), ~X)
    assert same(parse_expr("x << 2"), X << 2)
    assert same(parse_expr("mask(x*x, 5)"), parse_expr("mask(x^2, 2+3)"))


def test_other_primes():
    e = parse_expr("x^3 + 4^x", p=3)
    assert e.p == 3
    assert eval_mod(e, 2, 4) == (8 + 16) % 81
    with pytest.raises(ValueError):
        parse_expr("x | 1", p=3)


@pytest.mark.parametrize("text,pos", [
    ("2*x^^2", 4), ("x+", 2), ("(x", 2), ("x $ 1", 2), ("y+1", 0), ("x|x", 1),
])
def test_errors_report_position(text, pos):
    with pytest.raises(ExprSyntaxError) as ei:
        parse_expr(text)
    assert ei.value.pos == pos


def test_bad_exponent_base():
    with pytest.raises(ValueError):
        parse_expr("2^x")


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=6), st.integers(0, 2 ** 30))
def test_polynomial_text_round_trip(coeffs, v):
    text = "+".join(f"({c})*x^{i}" for i, c in enumerate(coeffs))
    assert eval_mod(parse_expr(text), v % 2 ** 30, 30) == eval_mod(poly(coeffs), v % 2 ** 30, 30)
