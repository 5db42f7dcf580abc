import math

import pytest
from hypothesis import given, strategies as st

from padic_automata.errors import IncompatibleRingsError, PrecisionError
from padic_automata.padic import (INDISTINGUISHABLE, PadicInt, digit, distance, format_padic,
                                  from_integer, from_rational, parse_padic, pow_exp, reduce,
                                  ring_op, valuation)

PRIMES = st.sampled_from([2, 3, 5, 7, 11, 37, 41])


def naive_digits(v, p, k):
    # independent oracle: repeated floor division on the nonnegative residue
    r = v % p ** k
    out = []
    for _ in range(k):
        out.append(r % p)
        r //= p
    return tuple(out)


def test_from_integer_minus_one():
    assert from_integer(-1, 2, 5).digits == (1, 1, 1, 1, 1)


def test_from_integer_zero():
    assert from_integer(0, 3, 4).digits == (0, 0, 0, 0)


def test_from_integer_minus_four():
    assert from_integer(-4, 2, 6).digits == (0, 0, 1, 1, 1, 1)


def test_from_rational_minus_third():
    assert from_rational(-1, 3, 2, 7).digits == (1, 0, 1, 0, 1, 0, 1)


def test_from_rational_integer_case():
    assert from_rational(5, 1, 2, 4).digits == (1, 0, 1, 0)


def test_from_rational_extended_gcd_oracle():
    # inverse of 7 mod 125 by the extended Euclidean algorithm
    def egcd(a, b):
        if b == 0:
            return a, 1, 0
        g, s, t = egcd(b, a % b)
        return g, t, s - (a // b) * t
    g, s, _ = egcd(7, 125)
    assert g == 1
    r = s % 125
    assert (7 * r) % 125 == 1
    assert from_rational(1, 7, 5, 3).digits == naive_digits(r, 5, 3)


def test_from_rational_rejects_p_in_denominator():
    with pytest.raises(ValueError):
        from_rational(1, 6, 2, 5)
    with pytest.raises(ZeroDivisionError):
        from_rational(1, 0, 3, 5)


def test_add_wraps_to_zero():
    assert ring_op("add", from_integer(-1, 2, 4), from_integer(1, 2, 4)).digits == (0, 0, 0, 0)


def test_mul_minus_third_times_three():
    z = ring_op("mul", from_rational(-1, 3, 2, 6), from_integer(3, 2, 6))
    assert z.digits == (1,) * 6


def test_neg_zero():
    assert ring_op("neg", from_integer(0, 2, 8)).digits == (0,) * 8


def test_ring_op_keeps_smaller_precision():
    z = from_integer(5, 3, 6) + from_integer(7, 3, 4)
    assert z.precision == 4 and z.residue == 12


def test_ring_op_prime_mismatch():
    with pytest.raises(IncompatibleRingsError):
        ring_op("add", from_integer(1, 2, 4), from_integer(1, 3, 4))


def test_digit_examples():
    assert digit(from_integer(5, 2, 4), 0) == 1
    assert digit(from_rational(-1, 3, 2, 7), 1) == 0
    # oracle: bit 17 of (-131065 mod 2^20)
    assert digit(from_integer(-131065, 2, 20), 17) == ((-131065 % 2 ** 20) >> 17) & 1 == 1


def test_digit_beyond_precision():
    with pytest.raises(PrecisionError):
        digit(from_integer(5, 2, 4), 4)


def test_reduce_examples():
    assert reduce(from_integer(-1, 2, 8), 3) == 7
    assert reduce(from_rational(-1, 3, 2, 8), 4) == 5
    assert reduce(from_integer(11, 3, 4), 2) == 11 % 9
    with pytest.raises(PrecisionError):
        reduce(from_integer(1, 2, 4), 5)


def test_distance_examples():
    assert distance(from_rational(-1, 3, 2, 8), from_integer(5, 2, 8)) == 4
    z = from_integer(9, 2, 8)
    assert distance(z, z) is INDISTINGUISHABLE
    # oracle: ord_2(11 - 3)
    assert distance(from_integer(3, 2, 8), from_integer(11, 2, 8)) == valuation(8, 2) == 3


def test_pow_exp_examples():
    assert pow_exp(3, 0, 5) == 1
    assert pow_exp(3, 4, 5) == 81 % 32 == 17
    assert pow_exp(4, 2, 2, p=3) == 16 % 9 == 7
    with pytest.raises(ValueError):
        pow_exp(2, 3, 5)


def test_format_and_parse():
    z = from_integer(5, 2, 4)
    assert format_padic(z) == "2:4:0101"
    assert parse_padic("2:4:0101") == z
    big = from_integer(100, 41, 2)
    assert parse_padic(format_padic(big)) == big
    for bad in ["2:4:012", "2:3:0101", "x", "4:2:01"]:
        with pytest.raises(ValueError):
            parse_padic(bad)


def test_padic_int_validation():
    with pytest.raises(ValueError):
        PadicInt(2, 2, (0, 2))
    with pytest.raises(ValueError):
        PadicInt(4, 1, (0,))


@given(PRIMES, st.integers(1, 40), st.integers(-10 ** 30, 10 ** 30))
def test_digits_match_naive_oracle(p, k, v):
    assert from_integer(v, p, k).digits == naive_digits(v, p, k)


@given(PRIMES, st.integers(1, 30), st.integers(-10 ** 20, 10 ** 20), st.integers(-10 ** 20, 10 ** 20))
def test_ring_homomorphism(p, k, a, b):
    A, B = from_integer(a, p, k), from_integer(b, p, k)
    assert (A + B).residue == (a + b) % p ** k
    assert (A - B).residue == (a - b) % p ** k
    assert (A * B).residue == (a * b) % p ** k
    assert (-A).residue == (-a) % p ** k


@given(PRIMES, st.integers(1, 30), st.integers(0, 10 ** 20), st.integers(0, 10 ** 20),
       st.integers(0, 10 ** 20))
def test_ultrametric_inequality(p, k, a, b, c):
    A, B, C = (from_integer(v, p, k) for v in (a, b, c))
    # exponents: larger means closer; None means equal at this precision
    inf = math.inf
    dab, dbc, dac = (inf if d is None else d for d in (distance(A, B), distance(B, C), distance(A, C)))
    assert dac >= min(dab, dbc)


@given(PRIMES, st.integers(1, 25), st.integers(-10 ** 15, 10 ** 15), st.integers(1, 10 ** 6))
def test_rational_solves_congruence(p, k, num, den):
    if den % p == 0:
        return
    z = from_rational(num, den, p, k)
    assert (den * z.residue - num) % p ** k == 0


@given(st.integers(1, 20), st.integers(-10 ** 9, 10 ** 9), st.integers(0, 50))
def test_pow_exp_level_consistent(k, x, j):
    # c = 1 + 2j, so c = 1 mod 2; reduction of level k+1 gives level k
    c = 1 + 2 * j
    assert pow_exp(c, x, k + 1) % 2 ** k == pow_exp(c, x, k)


@given(PRIMES, st.integers(1, 20), st.integers(0, 10 ** 12))
def test_format_round_trip(p, k, v):
    z = from_integer(v, p, k)
    assert parse_padic(format_padic(z)) == z
