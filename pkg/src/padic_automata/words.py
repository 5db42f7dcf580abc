"""Finite words over F_p and the radix-order numbering of nonempty words.

Letters are stored little-endian: ``letters[0]`` is the rightmost letter,
the one an automaton reads first.  Words print most-significant letter first,
so ``Word.parse("01", 2)`` has letters ``(1, 0)`` and value 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Tuple

from .errors import IncompatibleRingsError
from .padic import check_prime, to_digits

_CHARS = "0123456789abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class Word:
    prime: int
    letters: Tuple[int, ...] = ()

    def __post_init__(self):
        for a in self.letters:
            if not 0 <= a < self.prime:
                raise ValueError(f"letter {a} out of range for p={self.prime}")

    @classmethod
    def parse(cls, text: str, p: int) -> Word:
        check_prime(p)
        text = text.strip()
        if p > len(_CHARS) or "." in text:
            msf = [int(t) for t in text.split(".")] if text else []
        else:
            try:
                msf = [_CHARS.index(ch) for ch in text.lower()]
            except ValueError:
                raise ValueError(f"bad letter in word {text!r}") from None
        return cls(p, tuple(reversed(msf)))

    @classmethod
    def empty(cls, p: int) -> Word:
        return cls(p, ())

    def __len__(self):
        return len(self.letters)

    @property
    def value(self) -> int:
        return word_residue(self)

    def __str__(self):
        if self.prime > len(_CHARS):
            return ".".join(str(a) for a in reversed(self.letters))
        return "".join(_CHARS[a] for a in reversed(self.letters))

    def __repr__(self):
        return f"Word({str(self)!r}, p={self.prime})"


def concat(a: Word, b: Word) -> Word:
    """``a o b``: ``b`` takes the low positions and is fed first."""
    if a.prime != b.prime:
        raise IncompatibleRingsError("cannot concatenate words over different alphabets")
    return Word(a.prime, b.letters + a.letters)


def word_residue(w: Word) -> int:
    r = 0
    for a in reversed(w.letters):
        r = r * w.prime + a
    return r


def residue_word(v: int, n: int, p: int) -> Word:
    """Length-``n`` base-``p`` expansion of ``v`` (zero padded on the left)."""
    if not 0 <= v < p ** n:
        raise OverflowError(f"{v} does not fit in {n} letters over F_{p}")
    return Word(p, to_digits(v, p, n) if n else ())


def block_start(n: int, p: int) -> int:
    """Radix number of the all-zero word of length n >= 1."""
    return (p ** n - p) // (p - 1) + 1


def nu(w: Word) -> int:
    """Position of a nonempty word in radix order; ``nu("0") == 1``."""
    if not w.letters:
        raise ValueError("nu is undefined on the empty word")
    return block_start(len(w), w.prime) + word_residue(w)


def length_of_label(i: int, p: int) -> int:
    """Length of the word ``omega(i)`` without building it."""
    if i < 0:
        raise ValueError("radix labels are nonnegative")
    if i == 0:
        return 0
    n, start, size = 1, 1, p
    while start + size <= i:
        start += size
        size *= p
        n += 1
    return n


def omega(i: int, p: int = 2) -> Word:
    """Inverse of :func:`nu`; ``omega(0)`` is the empty word."""
    check_prime(p)
    n = length_of_label(i, p)
    if n == 0:
        return Word.empty(p)
    return residue_word(i - block_start(n, p), n, p)


def all_words(n: int, p: int) -> Iterator[Word]:
    """Every word of length ``n`` in ascending value order."""
    for v in range(p ** n):
        yield residue_word(v, n, p)
