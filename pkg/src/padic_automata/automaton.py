"""Mealy automata over F_p.

Three machine kinds share one small interface, ``step(state, symbol) ->
(next_state, output_symbol)``:

* :class:`FiniteAutomaton` -- explicit transition/output tables;
* :class:`FunctionAutomaton` -- the infinite tree-shaped machine built from a
  1-Lipschitz function, states labelled by radix numbers of input words;
* :class:`ConstantAutomaton` -- ignores its input and plays out a sequence.

:func:`compose_serial` builds product machines lazily from any two of them.
"""

from __future__ import annotations

import json
import threading
from collections import deque
from dataclasses import dataclass
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple, Union

from .errors import GuardError, IncompatibleRingsError
from .expr import FuncExpr, eval_mod
from .padic import check_prime
from .words import Word, block_start, length_of_label, residue_word, word_residue

State = Hashable


class Automaton:
    """Common behaviour; subclasses supply ``prime``, ``initial`` and ``step``."""

    prime: int
    initial: State
    finite = False

    def step(self, state: State, symbol: int) -> Tuple[State, int]:
        raise NotImplementedError

    def run(self, w: Word, state: Optional[State] = None) -> Word:
        return run(self, w, state)

    def function(self) -> "AutomatonFunction":
        """The automaton function of this machine, as an expression node."""
        return AutomatonFunction(self)


def run(a: Automaton, w: Word, state: Optional[State] = None) -> Word:
    """Feed ``w`` (rightmost letter first) and collect the output word."""
    if w.prime != a.prime:
        raise IncompatibleRingsError("word and automaton use different alphabets")
    s = a.initial if state is None else state
    out = []
    for r in w.letters:
        s, o = a.step(s, r)
        out.append(o)
    return Word(a.prime, tuple(out))


def final_state(a: Automaton, w: Word, state: Optional[State] = None) -> State:
    s = a.initial if state is None else state
    for r in w.letters:
        s, _ = a.step(s, r)
    return s


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteAutomaton(Automaton):
    """Explicit machine.  ``S[r][s]`` and ``O[r][s]``: row = symbol, column = state."""

    prime: int
    S: Tuple[Tuple[int, ...], ...]
    O: Tuple[Tuple[int, ...], ...]
    initial: int = 0
    finite = True

    def __post_init__(self):
        check_prime(self.prime)
        object.__setattr__(self, "S", tuple(tuple(int(v) for v in row) for row in self.S))
        object.__setattr__(self, "O", tuple(tuple(int(v) for v in row) for row in self.O))
        if len(self.S) != self.prime or len(self.O) != self.prime:
            raise ValueError(f"tables need one row per input symbol ({self.prime})")
        n = len(self.S[0])
        if n == 0:
            raise ValueError("an automaton needs at least one state")
        for row_s, row_o in zip(self.S, self.O):
            if len(row_s) != n or len(row_o) != n:
                raise ValueError("ragged transition/output table")
            if any(not 0 <= v < n for v in row_s):
                raise ValueError("transition table entry out of range")
            if any(not 0 <= v < self.prime for v in row_o):
                raise ValueError("output table entry out of range")
        if not 0 <= self.initial < n:
            raise ValueError("initial state out of range")

    @property
    def states(self) -> int:
        return len(self.S[0])

    def step(self, state, symbol):
        if not 0 <= state < self.states:
            raise ValueError(f"invalid state {state!r}")
        return self.S[symbol][state], self.O[symbol][state]

    def with_initial(self, s: int) -> FiniteAutomaton:
        return FiniteAutomaton(self.prime, self.S, self.O, s)

    # -- JSON ----------------------------------------------------------------

    def to_json(self) -> dict:
        return {"p": self.prime, "states": self.states, "initial": self.initial,
                "S": [list(r) for r in self.S], "O": [list(r) for r in self.O]}

    @classmethod
    def from_json(cls, data: dict) -> FiniteAutomaton:
        try:
            a = cls(int(data["p"]), data["S"], data["O"], int(data.get("initial", 0)))
        except (KeyError, TypeError, IndexError) as exc:
            raise ValueError(f"malformed machine JSON: {exc}") from None
        if "states" in data and int(data["states"]) != a.states:
            raise ValueError(f"machine JSON says {data['states']} states, tables have {a.states}")
        return a


def load_machine(path) -> FiniteAutomaton:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed machine JSON in {path}: {exc}") from None
    return FiniteAutomaton.from_json(data)


def adding_machine(initial: int = 1) -> FiniteAutomaton:
    """The 2-adic adding machine: carry state s, S = r*s mod 2, O = r+s mod 2."""
    S = [[(r * s) % 2 for s in range(2)] for r in range(2)]
    O = [[(r + s) % 2 for s in range(2)] for r in range(2)]
    return FiniteAutomaton(2, S, O, initial)


def identity_automaton(p: int = 2) -> FiniteAutomaton:
    return FiniteAutomaton(p, [[0]] * p, [[r] for r in range(p)], 0)


# ---------------------------------------------------------------------------


class FunctionAutomaton(Automaton):
    """Tree-shaped machine realizing a 1-Lipschitz function.

    State i stands for the input word omega(i) read so far (0 = empty word).
    On symbol r it moves to nu(r o omega(i)) and outputs digit number
    len(omega(i)) of f evaluated at that word.

    ``memo`` bounds an optional cache of step results (entry count); results
    are the same with it on or off.
    """

    def __init__(self, source: FuncExpr, memo: int = 0):
        self.source = source
        self.prime = source.p
        self.initial = 0
        self._memo_limit = memo
        self._memo: Dict[Tuple[int, int], Tuple[int, int]] = {}
        self._lock = threading.Lock()

    def decode(self, i: int) -> Tuple[int, int]:
        """Label -> (length, value) of the word it stands for."""
        n = length_of_label(i, self.prime)
        return n, (i - block_start(n, self.prime)) if n else 0

    def step(self, state, symbol):
        if not isinstance(state, int) or state < 0:
            raise ValueError(f"invalid state {state!r}")
        key = (state, symbol)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        p = self.prime
        n, v = self.decode(state)
        value = v + symbol * p ** n
        nxt = block_start(n + 1, p) + value
        out = (eval_mod(self.source, value, n + 1) // p ** n) % p
        if len(self._memo) < self._memo_limit:
            with self._lock:
                self._memo[key] = (nxt, out)
        return nxt, out

    def __repr__(self):
        return f"FunctionAutomaton({self.source})"


def build_from_function(e: FuncExpr, memo: int = 0) -> FunctionAutomaton:
    return FunctionAutomaton(e, memo)


# ---------------------------------------------------------------------------


class ConstantAutomaton(Automaton):
    """Counter machine: S(r, s) = s + 1, O(r, s) = seq[s], input ignored."""

    def __init__(self, seq: Union[Sequence[int], Callable[[int], int]], p: int = 2,
                 initial: int = 0):
        check_prime(p)
        self.prime = p
        self.initial = initial
        self._seq = seq

    def symbol(self, s: int) -> int:
        if callable(self._seq):
            a = self._seq(s)
        else:
            if s >= len(self._seq):
                raise IndexError(f"sequence too short for requested word length (needs index {s})")
            a = self._seq[s]
        if not 0 <= a < self.prime:
            raise ValueError(f"sequence symbol {a} out of range")
        return a

    def step(self, state, symbol):
        if not isinstance(state, int) or state < 0:
            raise ValueError(f"invalid state {state!r}")
        return state + 1, self.symbol(state)


def disjunctive_sequence(p: int = 2) -> Callable[[int], int]:
    """alpha_i of the concatenation of all words in radix order (most
    significant letter first); every finite pattern occurs in it."""
    cache: List[int] = []
    state = {"next": 1}

    def alpha(i: int) -> int:
        while len(cache) <= i:
            n = length_of_label(state["next"], p)
            v = state["next"] - block_start(n, p)
            cache.extend(reversed(residue_word(v, n, p).letters))
            state["next"] += 1
        return cache[i]

    return alpha


def constant_automaton(seq, p: int = 2) -> ConstantAutomaton:
    return ConstantAutomaton(seq, p)


# ---------------------------------------------------------------------------


class SerialComposition(Automaton):
    """``a`` then ``b``: b reads a's output.  The automaton function is f_b o f_a."""

    def __init__(self, a: Automaton, b: Automaton):
        if a.prime != b.prime:
            raise IncompatibleRingsError("cannot compose automata over different alphabets")
        self.a, self.b = a, b
        self.prime = a.prime
        self.initial = (a.initial, b.initial)
        self.finite = a.finite and b.finite

    def step(self, state, symbol):
        sa, sb = state
        sa, mid = self.a.step(sa, symbol)
        sb, out = self.b.step(sb, mid)
        return (sa, sb), out


def compose_serial(a: Automaton, b: Automaton) -> SerialComposition:
    return SerialComposition(a, b)


# ---------------------------------------------------------------------------


def reachable_states(a: Automaton, depth: Optional[int] = None, limit: int = 1 << 20) -> set:
    """States reachable from the initial state.

    Finite machines are closed under BFS; infinite ones need ``depth``, and
    then only words of length <= depth are followed.
    """
    if depth is None and not a.finite:
        raise ValueError("an infinite machine needs a depth bound")
    seen = {a.initial}
    frontier = deque([(a.initial, 0)])
    while frontier:
        s, d = frontier.popleft()
        if depth is not None and d >= depth:
            continue
        for r in range(a.prime):
            t, _ = a.step(s, r)
            if t not in seen:
                if len(seen) >= limit:
                    raise GuardError(f"more than {limit} reachable states")
                seen.add(t)
                frontier.append((t, d + 1))
    return seen


def reachable_states_up_to(a: Automaton, depth: int) -> set:
    return reachable_states(a, depth)


# ---------------------------------------------------------------------------


def _dot_quote(s) -> str:
    return '"' + str(s).replace('"', r'\"') + '"'


def export_dot(a: Automaton, depth: Optional[int] = None, name: str = "automaton") -> str:
    """Moore diagram as DOT: an arrow s -> S(r, s) labelled ``(r,O(r,s))``.

    Vertices come out in BFS order and arrows in (state, symbol) order, so the
    text is reproducible.  For infinite machines, states at distance
    ``depth`` are drawn but not expanded.
    """
    if depth is None and not a.finite:
        raise ValueError("an infinite machine needs a depth bound")
    order = [a.initial]
    dist = {a.initial: 0}
    edges = []
    i = 0
    while i < len(order):
        s = order[i]
        i += 1
        if depth is not None and dist[s] >= depth:
            continue
        for r in range(a.prime):
            t, o = a.step(s, r)
            edges.append((s, t, r, o))
            if t not in dist:
                dist[t] = dist[s] + 1
                order.append(t)
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for s in order:
        shape = "doublecircle" if s == a.initial else "circle"
        lines.append(f"  {_dot_quote(_label(s))} [shape={shape}];")
    for s, t, r, o in edges:
        lines.append(f"  {_dot_quote(_label(s))} -> {_dot_quote(_label(t))} "
                     f"[label=\"({r},{o})\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _label(s) -> str:
    if isinstance(s, tuple):
        return ",".join(_label(t) for t in s)
    return str(s)


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AutomatonFunction(FuncExpr):
    """Expression node wrapping a machine: f(x) mod p^k = output on x's k-letter word."""

    machine: Automaton
    state: Optional[State] = None

    @property
    def p(self):
        return self.machine.prime

    def _ev(self, x, k, m):
        return word_residue(run(self.machine, residue_word(x, k, self.p), self.state))

    def __str__(self):
        return f"automaton<{self.machine!r}>"
