"""Text syntax for expressions.

Precedence, loosest first::

    |  OR          bitwise or       (one side must be constant)
    XOR            bitwise xor
    &  AND         bitwise and
    <<             shift towards high bits by a constant
    +  -
    *
    -  ~  NOT      unary
    ^              power / exponential, right associative
    atoms          integers, x, named constants, ( ... ), mask(e, width)

``e^n`` with a constant n is a power; ``c^e`` with a constant base c is the
exponential c^e (c must be 1 mod p).  Subexpressions without ``x`` are folded
to exact integers, so ``-131065`` or ``2^17-7`` are plain constants.

The bitwise layer binds looser than arithmetic, as in C: write
``x+(x^2|c)`` for x + (x^2 OR c).
"""

from __future__ import annotations

import re
from typing import Dict, List, Optional, Tuple, Union

from .expr import (And, ExpC, FuncExpr, Identity, Const, Mask, Not, Or,
                   Pow, ShiftUp, Xor)

Value = Union[int, FuncExpr]

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(<<|[-+*^|&~(),]))")
_KEYWORDS = {"AND": "&", "OR": "|", "NOT": "~", "XOR": "XOR"}


class ExprSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int, text: str):
        super().__init__(f"position {pos}: {msg} in {text!r}")
        self.pos = pos


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    toks = []
    i = 0
    while i < len(text):
        if text[i:].strip() == "":
            break
        mt = _TOKEN.match(text, i)
        if not mt or mt.end() == i:
            j = i + len(text[i:]) - len(text[i:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[j]!r}", j, text)
        start = mt.start(mt.lastindex)
        num, name, op = mt.groups()
        if num is not None:
            toks.append(("num", num, start))
        elif name is not None:
            up = name.upper()
            if up in _KEYWORDS:
                toks.append(("op", _KEYWORDS[up], start))
            elif name.lower() == "mask":
                toks.append(("mask", name, start))
            else:
                toks.append(("name", name, start))
        else:
            toks.append(("op", op, start))
        i = mt.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, p: int, consts: Dict[str, int]):
        self.text, self.p, self.consts = text, p, consts
        self.toks = _tokenize(text)
        self.i = 0

    # -- helpers -----------------------------------------------------------

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def accept(self, op: str) -> Optional[int]:
        kind, val, pos = self.peek()
        if kind == "op" and val == op:
            self.i += 1
            return pos
        return None

    def expect(self, op: str):
        if self.accept(op) is None:
            kind, val, pos = self.peek()
            self.fail(f"expected {op!r}, found {val or 'end of input'!r}", pos)

    def fail(self, msg: str, pos: int):
        raise ExprSyntaxError(msg, pos, self.text)

    def lift(self, v: Value) -> FuncExpr:
        return v if isinstance(v, FuncExpr) else Const(v, self.p)

    def bitwise(self, a: Value, b: Value, op: str, pos: int) -> Value:
        if isinstance(a, int) and isinstance(b, int):
            return {"|": a | b, "&": a & b, "XOR": a ^ b}[op]
        if isinstance(a, FuncExpr) and isinstance(b, FuncExpr):
            self.fail("bitwise operations need one constant operand", pos)
        if self.p != 2:
            self.fail(f"bitwise operations need p = 2 (got p = {self.p})", pos)
        e, c = (a, b) if isinstance(a, FuncExpr) else (b, a)
        return {"|": Or, "&": And, "XOR": Xor}[op](e, c)

    # -- grammar -----------------------------------------------------------

    def parse(self) -> FuncExpr:
        v = self.or_expr()
        kind, val, pos = self.peek()
        if kind != "end":
            self.fail(f"unexpected {val!r}", pos)
        return self.lift(v)

    def or_expr(self) -> Value:
        v = self.xor_expr()
        while True:
            pos = self.accept("|")
            if pos is None:
                return v
            v = self.bitwise(v, self.xor_expr(), "|", pos)

    def xor_expr(self) -> Value:
        v = self.and_expr()
        while True:
            pos = self.accept("XOR")
            if pos is None:
                return v
            v = self.bitwise(v, self.and_expr(), "XOR", pos)

    def and_expr(self) -> Value:
        v = self.shift()
        while True:
            pos = self.accept("&")
            if pos is None:
                return v
            v = self.bitwise(v, self.shift(), "&", pos)

    def shift(self) -> Value:
        v = self.additive()
        while True:
            pos = self.accept("<<")
            if pos is None:
                return v
            s = self.additive()
            if not isinstance(s, int) or s < 0:
                self.fail("shift amount must be a nonnegative constant", pos)
            if isinstance(v, int):
                v = v << s
            elif self.p != 2:
                self.fail("shifts need p = 2", pos)
            else:
                v = ShiftUp(v, s)

    def additive(self) -> Value:
        v = self.term()
        while True:
            if self.accept("+") is not None:
                rhs = self.term()
                v = v + rhs if isinstance(v, int) and isinstance(rhs, int) \
                    else self.lift(v) + self.lift(rhs)
            elif self.accept("-") is not None:
                rhs = self.term()
                v = v - rhs if isinstance(v, int) and isinstance(rhs, int) \
                    else self.lift(v) - self.lift(rhs)
            else:
                return v

    def term(self) -> Value:
        v = self.unary()
        while self.accept("*") is not None:
            rhs = self.unary()
            v = v * rhs if isinstance(v, int) and isinstance(rhs, int) \
                else self.lift(v) * self.lift(rhs)
        return v

    def unary(self) -> Value:
        kind, val, pos = self.peek()
        if kind == "op" and val == "-":
            self.i += 1
            v = self.unary()
            return -v if isinstance(v, int) else -v
        if kind == "op" and val == "+":
            self.i += 1
            return self.unary()
        if kind == "op" and val == "~":
            self.i += 1
            v = self.unary()
            if isinstance(v, int):
                return ~v
            if self.p != 2:
                self.fail("NOT needs p = 2", pos)
            return Not(v)
        return self.power()

    def power(self) -> Value:
        base = self.atom()
        pos = self.accept("^")
        if pos is None:
            return base
        ex = self.unary()
        if isinstance(ex, int):
            if ex < 0:
                self.fail("negative exponent", pos)
            return base ** ex if isinstance(base, int) else Pow(base, ex)
        if isinstance(base, int):
            if base % self.p != 1:
                self.fail(f"{base}^(...) is not 1-Lipschitz: base must be 1 mod {self.p}", pos)
            return ExpC(base, ex)
        self.fail("exponent with a variable base needs a constant exponent", pos)

    def atom(self) -> Value:
        kind, val, pos = self.take()
        if kind == "num":
            return int(val)
        if kind == "name":
            if val == "x":
                return Identity(self.p)
            if val in self.consts:
                return int(self.consts[val])
            self.fail(f"unknown name {val!r} (bind it with --const {val}=VALUE)", pos)
        if kind == "mask":
            self.expect("(")
            inner = self.or_expr()
            self.expect(",")
            width = self.or_expr()
            self.expect(")")
            if not isinstance(width, int) or width < 0:
                self.fail("mask width must be a nonnegative constant", pos)
            if isinstance(inner, int):
                return inner & ((1 << width) - 1)
            if self.p != 2:
                self.fail("mask needs p = 2", pos)
            return Mask(inner, width)
        if kind == "op" and val == "(":
            v = self.or_expr()
            self.expect(")")
            return v
        self.fail(f"unexpected {val or 'end of input'!r}", pos)


def parse_expr(text: str, p: int = 2, consts: Optional[Dict[str, int]] = None) -> FuncExpr:
    """Parse ``text`` into a :class:`FuncExpr` over Z_p."""
    return _Parser(text, p, dict(consts or {})).parse()
