"""Truncated p-adic integers.

A :class:`PadicInt` holds the first ``k`` base-``p`` digits of an element of
``Z_p``.  Everything the rest of the package does is "mod p^k", so truncation
is the native semantics rather than an approximation bolted on afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

from .errors import IncompatibleRingsError, PrecisionError

_DIGIT_CHARS = "0123456789abcdefghijklmnopqrstuvwxyz"


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, int) or not is_prime(p):
        raise ValueError(f"p must be a prime, got {p!r}")
    return p


def valuation(n: int, p: int) -> Optional[int]:
    """Return ord_p(n), or None for n == 0."""
    if n == 0:
        return None
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def to_digits(value: int, p: int, k: int) -> Tuple[int, ...]:
    """Little-endian base-p digits of ``value mod p**k``."""
    r = value % (p ** k)
    out = []
    for _ in range(k):
        r, d = divmod(r, p)
        out.append(d)
    return tuple(out)


@dataclass(frozen=True)
class PadicInt:
    """A p-adic integer known to ``precision`` digits.

    ``digits[i]`` is the i-th p-adic digit (little-endian).  Arithmetic between
    two values keeps the smaller precision; nothing is ever silently widened.
    """

    prime: int
    precision: int
    digits: Tuple[int, ...]

    def __post_init__(self):
        check_prime(self.prime)
        if self.precision < 1:
            raise ValueError("precision must be >= 1")
        if len(self.digits) != self.precision:
            raise ValueError(
                f"expected {self.precision} digits, got {len(self.digits)}")
        for d in self.digits:
            if not 0 <= d < self.prime:
                raise ValueError(f"digit {d} out of range for p={self.prime}")

    @cached_property
    def residue(self) -> int:
        """The value mod p^precision as a nonnegative integer."""
        r = 0
        for d in reversed(self.digits):
            r = r * self.prime + d
        return r

    @property
    def modulus(self) -> int:
        return self.prime ** self.precision

    # -- ring operations -------------------------------------------------

    def _coerce(self, other) -> PadicInt:
        if isinstance(other, PadicInt):
            return other
        if isinstance(other, int):
            return from_integer(other, self.prime, self.precision)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else ring_op("add", self, other)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else ring_op("sub", self, other)

    def __rsub__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else ring_op("sub", other, self)

    def __mul__(self, other):
        other = self._coerce(other)
        return other if other is NotImplemented else ring_op("mul", self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return ring_op("neg", self)

    def __str__(self):
        return format_padic(self)


def from_integer(value: int, p: int, k: int) -> PadicInt:
    """First ``k`` digits of the p-adic expansion of a rational integer.

    Negative integers come out in complement form, e.g. -1 is ...1111 in Z_2.
    """
    check_prime(p)
    if k < 1:
        raise ValueError("precision k must be >= 1")
    return PadicInt(p, k, to_digits(value, p, k))


def from_rational(num: int, den: int, p: int, k: int) -> PadicInt:
    """The p-adic integer z with ``den * z == num`` (mod p^k)."""
    check_prime(p)
    if k < 1:
        raise ValueError("precision k must be >= 1")
    if den == 0:
        raise ZeroDivisionError("denominator is zero")
    if den % p == 0:
        raise ValueError(f"{num}/{den} is not a {p}-adic integer (p divides the denominator)")
    m = p ** k
    return PadicInt(p, k, to_digits(num * pow(den, -1, m), p, k))


def ring_op(op: str, a: PadicInt, b: Optional[PadicInt] = None) -> PadicInt:
    """Apply ``add``, ``sub``, ``mul`` or ``neg`` at the smaller precision."""
    if op == "neg":
        if b is not None:
            raise ValueError("neg is unary")
        return PadicInt(a.prime, a.precision, to_digits(-a.residue, a.prime, a.precision))
    if b is None:
        raise ValueError(f"{op} needs two operands")
    if a.prime != b.prime:
        raise IncompatibleRingsError(
            f"incompatible rings: Z_{a.prime} and Z_{b.prime}")
    k = min(a.precision, b.precision)
    if op == "add":
        r = a.residue + b.residue
    elif op == "sub":
        r = a.residue - b.residue
    elif op == "mul":
        r = a.residue * b.residue
    else:
        raise ValueError(f"unknown ring operation {op!r}")
    return PadicInt(a.prime, k, to_digits(r, a.prime, k))


def digit(z: PadicInt, i: int) -> int:
    if not 0 <= i < z.precision:
        raise PrecisionError(
            f"digit {i} is beyond precision {z.precision}")
    return z.digits[i]


def reduce(z: PadicInt, m: int) -> int:
    """``z mod p^m`` as an integer in [0, p^m)."""
    if m < 0 or m > z.precision:
        raise PrecisionError(f"level {m} is beyond precision {z.precision}")
    r = 0
    for d in reversed(z.digits[:m]):
        r = r * z.prime + d
    return r


INDISTINGUISHABLE = None
"""Returned by :func:`distance` when no digit differs within precision."""


def distance(a: PadicInt, b: PadicInt) -> Optional[int]:
    """Exponent n with d_p(a, b) = p^-n.

    Returns ``INDISTINGUISHABLE`` (None) rather than claiming the distance is
    zero: two truncated values cannot certify equality in Z_p.
    """
    if a.prime != b.prime or a.precision != b.precision:
        raise IncompatibleRingsError(
            "distance needs equal prime and precision")
    for i, (x, y) in enumerate(zip(a.digits, b.digits)):
        if x != y:
            return i
    return INDISTINGUISHABLE


def pow_exp(c: int, x: int, k: int, p: int = 2) -> int:
    """``c**x mod p**k`` for c = 1 (mod p).

    For such c the order of c modulo p^k divides p^k, so the result depends on
    x only through ``x mod p^k``; negative or huge x are fine.
    """
    check_prime(p)
    if c % p != 1 % p:
        raise ValueError(
            f"exponential {c}^x is not 1-Lipschitz here: {c} is not 1 mod {p}")
    m = p ** k
    return pow(c, x % m, m)


def format_padic(z: PadicInt) -> str:
    """Serialize as ``p:k:d_{k-1}...d_0`` (most significant digit first)."""
    if z.prime > len(_DIGIT_CHARS):
        body = ".".join(str(d) for d in reversed(z.digits))
    else:
        body = "".join(_DIGIT_CHARS[d] for d in reversed(z.digits))
    return f"{z.prime}:{z.precision}:{body}"


def parse_padic(text: str) -> PadicInt:
    """Inverse of :func:`format_padic`."""
    try:
        ps, ks, body = text.strip().split(":")
        p, k = int(ps), int(ks)
    except ValueError:
        raise ValueError(f"malformed p-adic literal {text!r}; expected p:k:digits") from None
    check_prime(p)
    if "." in body or p > len(_DIGIT_CHARS):
        ds = [int(t) for t in body.split(".")] if body else []
    else:
        try:
            ds = [_DIGIT_CHARS.index(ch) for ch in body.lower()]
        except ValueError:
            raise ValueError(f"bad digit in p-adic literal {text!r}") from None
    if len(ds) != k:
        raise ValueError(f"p-adic literal {text!r} has {len(ds)} digits, expected {k}")
    return PadicInt(p, k, tuple(reversed(ds)))
