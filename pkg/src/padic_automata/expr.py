"""Expression trees for 1-Lipschitz maps Z_p -> Z_p.

Every node denotes an automaton function, so ``f(x) mod p^k`` depends only on
``x mod p^k``.  Two evaluation paths exist:

* :func:`eval_mod` -- exact Python integers, one point at a time;
* :func:`eval_array` -- numpy over a batch of residues.  For p = 2 it works
  in wrapping uint64 arithmetic (exact mod 2^64, masked at the end); for odd
  p with p^k < 2^31 it reduces in int64 after every step; otherwise it falls
  back to object arrays.

The scalar path is the reference; the test-suite checks the batch path
against it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .padic import PadicInt, check_prime, pow_exp, to_digits
from .errors import IncompatibleRingsError, PrecisionError

IntLike = Union[int, np.integer]


class FuncExpr:
    """Base class.  Subclasses implement ``_ev`` and ``_vec``."""

    p: int

    # -- evaluation ------------------------------------------------------

    def eval_mod(self, x: int, k: int) -> int:
        return eval_mod(self, x, k)

    def __call__(self, inner: FuncExpr) -> FuncExpr:
        return Compose(self, _lift(inner, self.p))

    # -- operators -------------------------------------------------------

    def __add__(self, other):
        return Add(self, _lift(other, self.p))

    def __radd__(self, other):
        return Add(_lift(other, self.p), self)

    def __sub__(self, other):
        return Sub(self, _lift(other, self.p))

    def __rsub__(self, other):
        return Sub(_lift(other, self.p), self)

    def __mul__(self, other):
        return Mul(self, _lift(other, self.p))

    def __rmul__(self, other):
        return Mul(_lift(other, self.p), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        return Pow(self, n)

    def __rpow__(self, c):
        if not isinstance(c, int):
            return NotImplemented
        return ExpC(c, self)

    def __or__(self, c):
        return Or(self, _const_int(c))

    def __and__(self, c):
        return And(self, _const_int(c))

    def __xor__(self, c):
        return Xor(self, _const_int(c))

    def __invert__(self):
        return Not(self)

    def __lshift__(self, s):
        return ShiftUp(self, int(s))

    # subclasses override
    def _ev(self, x: int, k: int, m: int) -> int:
        raise NotImplementedError

    def _vec(self, xs, ctx: "_Vec"):
        # generic fallback: scalar evaluation per element
        vals = [self._ev(int(v), ctx.k, ctx.m) for v in ctx.reduce(xs).tolist()]
        return ctx.array(vals)

    def children(self) -> Tuple[FuncExpr, ...]:
        return ()


def _const_int(c) -> int:
    if isinstance(c, Const) and isinstance(c.value, int):
        return c.value
    if isinstance(c, (int, np.integer)):
        return int(c)
    raise TypeError("bitwise operations take an integer constant operand")


def _lift(v, p: int) -> FuncExpr:
    if isinstance(v, FuncExpr):
        if v.p != p:
            raise IncompatibleRingsError(f"cannot mix expressions over p={v.p} and p={p}")
        return v
    if isinstance(v, (int, np.integer, PadicInt)):
        return Const(v if isinstance(v, PadicInt) else int(v), p)
    raise TypeError(f"cannot use {type(v).__name__} in an expression")


def _same_prime(*nodes: FuncExpr) -> int:
    p = nodes[0].p
    for n in nodes[1:]:
        if n.p != p:
            raise IncompatibleRingsError(f"cannot mix expressions over p={p} and p={n.p}")
    return p


def _need_binary(p: int, what: str):
    if p != 2:
        raise ValueError(f"{what} is only defined for p = 2 (got p = {p})")


# ---------------------------------------------------------------------------
# batch arithmetic context


class _Vec:
    """Arithmetic mod p^k on numpy arrays."""

    def __init__(self, p: int, k: int):
        self.p, self.k, self.m = p, k, p ** k
        if p == 2 and k <= 64:
            self.mode = "u64"
            self.dtype = np.uint64
        elif self.m <= 2 ** 31:
            self.mode = "i64"
            self.dtype = np.int64
        else:
            self.mode = "obj"
            self.dtype = object

    def array(self, vals) -> np.ndarray:
        return np.array(vals, dtype=self.dtype)

    def asarray(self, xs) -> np.ndarray:
        xs = np.asarray(xs)
        if self.mode == "obj" or xs.dtype == object:
            vals = [int(v) % self.m for v in xs.tolist()]
            return np.array(vals, dtype=self.dtype)
        if self.mode == "u64":
            return xs.astype(np.uint64) & np.uint64(self.m - 1)
        return xs.astype(np.int64) % self.m

    def const(self, c: int, n: int) -> np.ndarray:
        if self.mode == "u64":
            return np.full(n, c % 2 ** 64, dtype=np.uint64)
        if self.mode == "i64":
            return np.full(n, c % self.m, dtype=np.int64)
        out = np.empty(n, dtype=object)
        out[:] = c % self.m
        return out

    def reduce(self, a: np.ndarray) -> np.ndarray:
        if self.mode == "u64":
            return a & np.uint64(self.m - 1)
        return a % self.m

    def lazy(self, a: np.ndarray) -> np.ndarray:
        # uint64 wraps exactly mod 2^64; the others must stay small
        return a if self.mode == "u64" else a % self.m

    def neg(self, a):
        if self.mode == "u64":
            return np.uint64(0) - a
        return (-a) % self.m

    def mul(self, a, b):
        return self.lazy(a * b)

    def power(self, a, n: int):
        result = self.const(1, len(a))
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            n >>= 1
            if n:
                base = self.mul(base, base)
        return result


def eval_array(e: FuncExpr, xs, k: int) -> np.ndarray:
    """Evaluate ``e`` mod p^k at every residue in ``xs``.

    Returns uint64 (p = 2, k <= 64), int64, or object dtype.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    ctx = _Vec(e.p, k)
    xs = ctx.asarray(xs)
    return ctx.reduce(e._vec(xs, ctx))


def eval_mod(e: FuncExpr, x: int, k: int) -> int:
    """``f(x) mod p^k`` for an integer ``x`` (any sign; it is reduced first)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    m = e.p ** k
    return e._ev(int(x) % m, k, m)


# ---------------------------------------------------------------------------
# leaves


@dataclass(frozen=True, eq=True)
class Identity(FuncExpr):
    p: int = 2

    def __post_init__(self):
        check_prime(self.p)

    def _ev(self, x, k, m):
        return x

    def _vec(self, xs, ctx):
        return xs

    def __str__(self):
        return "x"


@dataclass(frozen=True)
class Const(FuncExpr):
    """A constant: an exact integer or a truncated p-adic integer."""

    value: Union[int, PadicInt]
    p: int = 2

    def __post_init__(self):
        check_prime(self.p)
        if isinstance(self.value, PadicInt) and self.value.prime != self.p:
            raise IncompatibleRingsError("constant lives over a different prime")

    def residue(self, k: int, m: int) -> int:
        if isinstance(self.value, PadicInt):
            if self.value.precision < k:
                raise PrecisionError(
                    f"constant known to {self.value.precision} digits, needed {k}")
            return self.value.residue % m
        return self.value % m

    def _ev(self, x, k, m):
        return self.residue(k, m)

    def _vec(self, xs, ctx):
        return ctx.const(self.residue(ctx.k, ctx.m), len(xs))

    def __str__(self):
        v = self.value
        return str(v) if isinstance(v, int) and v >= 0 else f"({v})"


@dataclass(frozen=True)
class Poly(FuncExpr):
    """Integer polynomial in x; ``coeffs[i]`` multiplies x^i."""

    coeffs: Tuple[int, ...]
    p: int = 2

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))

    @property
    def degree(self) -> int:
        d = len(self.coeffs) - 1
        while d >= 0 and self.coeffs[d] == 0:
            d -= 1
        return d

    def exact(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def _ev(self, x, k, m):
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % m
        return acc

    def _vec(self, xs, ctx):
        acc = ctx.const(0, len(xs))
        for c in reversed(self.coeffs):
            acc = ctx.lazy(acc * xs + ctx.const(c, len(xs)))
        return acc

    def __str__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if not mono:
                terms.append(f"({c})" if c < 0 else str(c))
            elif c == 1:
                terms.append(mono)
            else:
                terms.append(f"({c})*{mono}" if c < 0 else f"{c}*{mono}")
        return "(" + "+".join(terms) + ")" if terms else "0"


@dataclass(frozen=True)
class DigitOracle(FuncExpr):
    """A function given digit-by-digit: output digit i = psi(i, digits).

    ``digits`` are the input's base-p digits at the current precision.  A
    well-behaved ``psi`` reads only ``digits[:i+1]``; that is trusted here and
    verified by :func:`check_lipschitz`.
    """

    psi: Callable[[int, Tuple[int, ...]], int]
    p: int = 2
    name: str = "oracle"

    def _ev(self, x, k, m):
        ds = to_digits(x, self.p, k)
        r = 0
        for i in reversed(range(k)):
            d = self.psi(i, ds)
            if not 0 <= d < self.p:
                raise ValueError(f"{self.name}: digit {d} out of range at position {i}")
            r = r * self.p + d
        return r

    def __str__(self):
        return self.name


# ---------------------------------------------------------------------------
# ring nodes


@dataclass(frozen=True)
class Add(FuncExpr):
    a: FuncExpr
    b: FuncExpr

    @property
    def p(self):
        return _same_prime(self.a, self.b)

    def __post_init__(self):
        _same_prime(self.a, self.b)

    def children(self):
        return (self.a, self.b)

    def _ev(self, x, k, m):
        return (self.a._ev(x, k, m) + self.b._ev(x, k, m)) % m

    def _vec(self, xs, ctx):
        return ctx.lazy(self.a._vec(xs, ctx) + self.b._vec(xs, ctx))

    def __str__(self):
        return f"({self.a}+{self.b})"


@dataclass(frozen=True)
class Sub(FuncExpr):
    a: FuncExpr
    b: FuncExpr

    @property
    def p(self):
        return _same_prime(self.a, self.b)

    def __post_init__(self):
        _same_prime(self.a, self.b)

    def children(self):
        return (self.a, self.b)

    def _ev(self, x, k, m):
        return (self.a._ev(x, k, m) - self.b._ev(x, k, m)) % m

    def _vec(self, xs, ctx):
        a, b = self.a._vec(xs, ctx), self.b._vec(xs, ctx)
        return a - b if ctx.mode == "u64" else (a - b) % ctx.m

    def __str__(self):
        return f"({self.a}-{self.b})"


@dataclass(frozen=True)
class Mul(FuncExpr):
    a: FuncExpr
    b: FuncExpr

    @property
    def p(self):
        return _same_prime(self.a, self.b)

    def __post_init__(self):
        _same_prime(self.a, self.b)

    def children(self):
        return (self.a, self.b)

    def _ev(self, x, k, m):
        return (self.a._ev(x, k, m) * self.b._ev(x, k, m)) % m

    def _vec(self, xs, ctx):
        return ctx.mul(self.a._vec(xs, ctx), self.b._vec(xs, ctx))

    def __str__(self):
        return f"({self.a}*{self.b})"


@dataclass(frozen=True)
class Neg(FuncExpr):
    a: FuncExpr

    @property
    def p(self):
        return self.a.p

    def children(self):
        return (self.a,)

    def _ev(self, x, k, m):
        return (-self.a._ev(x, k, m)) % m

    def _vec(self, xs, ctx):
        return ctx.neg(self.a._vec(xs, ctx))

    def __str__(self):
        return f"(-{self.a})"


@dataclass(frozen=True)
class Pow(FuncExpr):
    """``base ** n`` for a fixed integer n >= 0."""

    base: FuncExpr
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("negative powers are not p-adic integers in general")

    @property
    def p(self):
        return self.base.p

    def children(self):
        return (self.base,)

    def _ev(self, x, k, m):
        return pow(self.base._ev(x, k, m), self.n, m)

    def _vec(self, xs, ctx):
        return ctx.power(self.base._vec(xs, ctx), self.n)

    def __str__(self):
        return f"{self.base}^{self.n}"


@dataclass(frozen=True)
class Compose(FuncExpr):
    """``outer(inner(x))``."""

    outer: FuncExpr
    inner: FuncExpr

    @property
    def p(self):
        return _same_prime(self.outer, self.inner)

    def __post_init__(self):
        _same_prime(self.outer, self.inner)

    def children(self):
        return (self.outer, self.inner)

    def _ev(self, x, k, m):
        return self.outer._ev(self.inner._ev(x, k, m), k, m)

    def _vec(self, xs, ctx):
        return self.outer._vec(self.inner._vec(xs, ctx), ctx)

    def __str__(self):
        return _substitute(str(self.outer), f"({self.inner})")


def _substitute(text: str, repl: str) -> str:
    out = []
    for i, ch in enumerate(text):
        isolated = ch == "x" and not (i > 0 and text[i - 1].isalnum()) and \
            not (i + 1 < len(text) and text[i + 1].isalnum())
        out.append(repl if isolated else ch)
    return "".join(out)


@dataclass(frozen=True)
class ExpC(FuncExpr):
    """``c ** arg`` for an integer base c = 1 (mod p)."""

    c: int
    arg: FuncExpr

    def __post_init__(self):
        if self.c % self.arg.p != 1:
            raise ValueError(
                f"{self.c}^x is not 1-Lipschitz over Z_{self.arg.p}: base must be 1 mod p")

    @property
    def p(self):
        return self.arg.p

    def children(self):
        return (self.arg,)

    def _ev(self, x, k, m):
        return pow_exp(self.c, self.arg._ev(x, k, m), k, self.p)

    def _vec(self, xs, ctx):
        e = ctx.reduce(self.arg._vec(xs, ctx))
        n = len(xs)
        result = ctx.const(1, n)
        base = ctx.const(self.c, n)
        one = ctx.dtype(1) if ctx.mode != "obj" else 1
        for _ in range((ctx.m - 1).bit_length()):
            bit = (e & one).astype(bool)
            result = np.where(bit, ctx.mul(result, base), result)
            base = ctx.mul(base, base)
            e = e >> one
        return result

    def __str__(self):
        return f"{self.c}^{_wrap(self.arg)}"


def _wrap(e: FuncExpr) -> str:
    s = str(e)
    return s if isinstance(e, (Identity, Const)) or s.startswith("(") else f"({s})"


# ---------------------------------------------------------------------------
# bitwise nodes (p = 2)


def _bitwise_const(c: int, ctx: _Vec):
    if ctx.mode == "u64":
        return np.uint64(c % 2 ** 64)
    return c % ctx.m


@dataclass(frozen=True)
class And(FuncExpr):
    e: FuncExpr
    c: int

    def __post_init__(self):
        _need_binary(self.e.p, "AND")

    p = property(lambda self: 2)

    def children(self):
        return (self.e,)

    def _ev(self, x, k, m):
        return self.e._ev(x, k, m) & (self.c % m)

    def _vec(self, xs, ctx):
        return self.e._vec(xs, ctx) & _bitwise_const(self.c, ctx)

    def __str__(self):
        return f"({self.e}&{_fmt_int(self.c)})"


@dataclass(frozen=True)
class Or(FuncExpr):
    e: FuncExpr
    c: int

    def __post_init__(self):
        _need_binary(self.e.p, "OR")

    p = property(lambda self: 2)

    def children(self):
        return (self.e,)

    def _ev(self, x, k, m):
        return self.e._ev(x, k, m) | (self.c % m)

    def _vec(self, xs, ctx):
        v = self.e._vec(xs, ctx) | _bitwise_const(self.c, ctx)
        return v if ctx.mode == "u64" else v % ctx.m

    def __str__(self):
        return f"({self.e}|{_fmt_int(self.c)})"


@dataclass(frozen=True)
class Xor(FuncExpr):
    e: FuncExpr
    c: int

    def __post_init__(self):
        _need_binary(self.e.p, "XOR")

    p = property(lambda self: 2)

    def children(self):
        return (self.e,)

    def _ev(self, x, k, m):
        return self.e._ev(x, k, m) ^ (self.c % m)

    def _vec(self, xs, ctx):
        v = self.e._vec(xs, ctx) ^ _bitwise_const(self.c, ctx)
        return v if ctx.mode == "u64" else v % ctx.m

    def __str__(self):
        return f"({self.e} XOR {_fmt_int(self.c)})"


@dataclass(frozen=True)
class Not(FuncExpr):
    e: FuncExpr

    def __post_init__(self):
        _need_binary(self.e.p, "NOT")

    p = property(lambda self: 2)

    def children(self):
        return (self.e,)

    def _ev(self, x, k, m):
        return m - 1 - self.e._ev(x, k, m)

    def _vec(self, xs, ctx):
        v = self.e._vec(xs, ctx)
        return ~v if ctx.mode == "u64" else (~v) % ctx.m

    def __str__(self):
        return f"(~{self.e})"


@dataclass(frozen=True)
class ShiftUp(FuncExpr):
    """Multiply by 2^s (shift towards the high-order bits)."""

    e: FuncExpr
    s: int

    def __post_init__(self):
        _need_binary(self.e.p, "shift")
        if self.s < 0:
            raise ValueError("only shifts towards higher-order bits are 1-Lipschitz")

    p = property(lambda self: 2)

    def children(self):
        return (self.e,)

    def _ev(self, x, k, m):
        return (self.e._ev(x, k, m) << self.s) % m

    def _vec(self, xs, ctx):
        v = self.e._vec(xs, ctx)
        if ctx.mode == "u64":
            return v << np.uint64(self.s) if self.s < 64 else np.zeros_like(v)
        return (v << self.s) % ctx.m

    def __str__(self):
        return f"({self.e}<<{self.s})"


@dataclass(frozen=True)
class Mask(FuncExpr):
    """Keep the low ``width`` bits: ``e AND (2^width - 1)``."""

    e: FuncExpr
    width: int

    def __post_init__(self):
        _need_binary(self.e.p, "mask")
        if self.width < 0:
            raise ValueError("mask width must be >= 0")

    p = property(lambda self: 2)

    def children(self):
        return (self.e,)

    def _ev(self, x, k, m):
        return self.e._ev(x, k, m) & ((1 << self.width) - 1)

    def _vec(self, xs, ctx):
        v = self.e._vec(xs, ctx)
        if ctx.mode == "u64":
            return v & np.uint64((1 << min(self.width, 64)) - 1)
        return v & ((1 << self.width) - 1)

    def __str__(self):
        return f"mask({self.e},{self.width})"


def _fmt_int(c: int) -> str:
    return str(c) if c >= 0 else f"({c})"


# ---------------------------------------------------------------------------
# convenience constructors


def x(p: int = 2) -> Identity:
    return Identity(p)


def const(value, p: int = 2) -> Const:
    return Const(value, p)


def poly(coeffs: Sequence[int], p: int = 2) -> Poly:
    return Poly(tuple(coeffs), p)


def expc(c: int, p: int = 2) -> ExpC:
    return ExpC(c, Identity(p))


# ---------------------------------------------------------------------------
# Lipschitz check


@dataclass(frozen=True)
class ConsistentUpTo:
    """No violation seen; evidence, not proof."""

    level: int
    trials: int


@dataclass(frozen=True)
class Violation:
    """``x = y (mod p^level)`` but ``f(x) != f(y) (mod p^level)``: not 1-Lipschitz."""

    x: int
    y: int
    level: int


def check_lipschitz(e: FuncExpr, k: int, trials: int = 10_000, seed: int = 0):
    """Sample pairs x = y (mod p^m), m = 1..k-1, and compare f mod p^m.

    Both points are evaluated at full precision k, so a digit function that
    peeks at later input digits is caught.  Levels are visited round-robin so
    the low levels, where violations live, are always covered.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    p = e.p
    top = p ** k
    rng = random.Random(seed)
    for t in range(trials):
        m = 1 + t % (k - 1)
        mod = p ** m
        xv = rng.randrange(top)
        yv = (xv + rng.randrange(1, p ** (k - m)) * mod) % top
        if eval_mod(e, xv, k) % mod != eval_mod(e, yv, k) % mod:
            return Violation(xv, yv, m)
    return ConsistentUpTo(k, trials)


# ---------------------------------------------------------------------------
# derivatives


@dataclass(frozen=True)
class DerivativeReport:
    """Symbolic f' and f'' where exact; ``None`` marks an unsupported part."""

    first: Optional[FuncExpr]
    second: Optional[FuncExpr]
    supported_class: str  # Polynomial | PolyPlusExp | Pattern | Unsupported
    detail: dict = field(default_factory=dict)


def as_polynomial(e: FuncExpr) -> Optional[Tuple[int, ...]]:
    """Integer coefficient list if ``e`` is an integer polynomial, else None."""
    if isinstance(e, Identity):
        return (0, 1)
    if isinstance(e, Const):
        return (e.value,) if isinstance(e.value, int) else None
    if isinstance(e, Poly):
        return _trim(e.coeffs)
    if isinstance(e, (Add, Sub, Mul)):
        a, b = as_polynomial(e.a), as_polynomial(e.b)
        if a is None or b is None:
            return None
        if isinstance(e, Add):
            return _padd(a, b)
        if isinstance(e, Sub):
            return _padd(a, tuple(-c for c in b))
        return _pmul(a, b)
    if isinstance(e, Neg):
        a = as_polynomial(e.a)
        return None if a is None else tuple(-c for c in a)
    if isinstance(e, Pow):
        a = as_polynomial(e.base)
        if a is None:
            return None
        r: Tuple[int, ...] = (1,)
        for _ in range(e.n):
            r = _pmul(r, a)
        return r
    if isinstance(e, Compose):
        outer, inner = as_polynomial(e.outer), as_polynomial(e.inner)
        if outer is None or inner is None:
            return None
        r = (0,)
        for c in reversed(outer):
            r = _padd(_pmul(r, inner), (c,))
        return r
    return None


def _trim(cs: Sequence[int]) -> Tuple[int, ...]:
    cs = list(cs)
    while len(cs) > 1 and cs[-1] == 0:
        cs.pop()
    return tuple(cs) if cs else (0,)


def _padd(a, b):
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, u in enumerate(a):
        if u:
            for j, v in enumerate(b):
                out[i + j] += u * v
    return _trim(out)


def poly_derivative(cs: Sequence[int]) -> Tuple[int, ...]:
    return _trim([i * c for i, c in enumerate(cs)][1:] or [0])


def additive_terms(e: FuncExpr, sign: int = 1):
    """Flatten sums/differences into ``[(sign, term), ...]``."""
    if isinstance(e, Add):
        return additive_terms(e.a, sign) + additive_terms(e.b, sign)
    if isinstance(e, Sub):
        return additive_terms(e.a, sign) + additive_terms(e.b, -sign)
    if isinstance(e, Neg):
        return additive_terms(e.a, -sign)
    return [(sign, e)]


def split_pattern(e: FuncExpr):
    """Recognize ``P(x) + c^x`` and ``P(x) + ((x^2) OR c)`` with P an integer polynomial.

    Returns ``(kind, P coefficients, parameter)`` or None.
    """
    rest = (0,)
    special = []
    for sign, term in additive_terms(e):
        cs = as_polynomial(term)
        if cs is not None:
            rest = _padd(rest, tuple(sign * c for c in cs))
        else:
            special.append((sign, term))
    if len(special) != 1 or special[0][0] != 1:
        return None
    term = special[0][1]
    if isinstance(term, ExpC) and isinstance(term.arg, Identity):
        return ("PolyPlusExp", rest, term.c)
    if isinstance(term, Or) and as_polynomial(term.e) == (0, 0, 1):
        return ("Pattern", rest, term.c)
    return None


def differentiate(e: FuncExpr) -> DerivativeReport:
    cs = as_polynomial(e)
    if cs is not None:
        d1 = poly_derivative(cs)
        d2 = poly_derivative(d1)
        return DerivativeReport(Poly(d1, e.p), Poly(d2, e.p), "Polynomial")
    pat = split_pattern(e)
    if pat is not None:
        kind, rest, param = pat
        if kind == "PolyPlusExp" and len(rest) <= 2:
            # f'' = (log_p c)^2 c^x; log_p c vanishes only at c = +-1
            return DerivativeReport(None, None, "PolyPlusExp",
                                    {"base": param, "affine": list(rest),
                                     "second": "(log_p c)^2 * c^x, nonzero for c != 1"})
        if kind == "Pattern" and len(rest) <= 2 and param >= 0:
            # recorded claim for a + b*x + ((x^2) OR c), c >= 0 (p = 2)
            return DerivativeReport(None, Const(2, e.p), "Pattern",
                                    {"or_constant": param, "affine": list(rest)})
    return DerivativeReport(None, None, "Unsupported")


def walk(e: FuncExpr):
    yield e
    for ch in e.children():
        yield from walk(ch)


def exact_value(e: FuncExpr, v: int) -> Optional[int]:
    """f(v) as an exact rational integer, or None when that is not defined.

    Bitwise nodes use Python's two's-complement semantics, which coincide
    with the 2-adic ones.  Exponentials with negative exponents, p-adic
    constants and oracles have no integer value here.
    """
    if isinstance(e, Identity):
        return v
    if isinstance(e, Const):
        return e.value if isinstance(e.value, int) else None
    if isinstance(e, Poly):
        return e.exact(v)
    if isinstance(e, ExpC):
        a = exact_value(e.arg, v)
        return None if a is None or a < 0 else e.c ** a
    if isinstance(e, Compose):
        inner = exact_value(e.inner, v)
        return None if inner is None else exact_value(e.outer, inner)
    kids = [exact_value(ch, v) for ch in e.children()]
    if any(k is None for k in kids):
        return None
    if isinstance(e, Add):
        return kids[0] + kids[1]
    if isinstance(e, Sub):
        return kids[0] - kids[1]
    if isinstance(e, Mul):
        return kids[0] * kids[1]
    if isinstance(e, Neg):
        return -kids[0]
    if isinstance(e, Pow):
        return kids[0] ** e.n
    if isinstance(e, And):
        return kids[0] & e.c
    if isinstance(e, Or):
        return kids[0] | e.c
    if isinstance(e, Xor):
        return kids[0] ^ e.c
    if isinstance(e, Not):
        return ~kids[0]
    if isinstance(e, ShiftUp):
        return kids[0] << e.s
    if isinstance(e, Mask):
        return kids[0] & ((1 << e.width) - 1)
    return None
