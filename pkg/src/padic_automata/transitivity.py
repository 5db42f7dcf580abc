"""Word, complete and absolute transitivity at finite word lengths.

Word transitivity at level n is decided exactly (a walk around the orbit of
0).  Complete and absolute transitivity are searched: for each pair of
equal-length words (w, w') we look for a prefix y such that feeding ``w o y``
(optionally ``w o y o x``) makes the output end in ``w'``.  A found prefix is a
proof; running out of prefixes proves nothing unless the machine is finite, in
which case the finite family of state maps is enumerated exactly.
"""

from __future__ import annotations

import operator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .automaton import Automaton, FunctionAutomaton, final_state, run
from .errors import GuardError
from .expr import (Add, Compose, Const, FuncExpr, Identity, Mul, Poly, Sub,
                   as_polynomial, eval_array, eval_mod, exact_value,
                   poly_derivative, split_pattern)
from .padic import valuation
from .words import Word, concat, residue_word, word_residue

DEFAULT_LEVEL_GUARD = 1 << 26
DEFAULT_LMAX = 16

Target = Union[FuncExpr, Automaton]


def _as_function(t: Target) -> FuncExpr:
    if isinstance(t, FunctionAutomaton):
        return t.source
    if isinstance(t, Automaton):
        return t.function()
    return t


# ---------------------------------------------------------------------------
# word transitivity


@dataclass(frozen=True)
class LevelResult:
    n: int
    status: str  # Transitive | NotTransitive | Skipped
    orbit_length: Optional[int] = None
    cycles: Optional[int] = None  # cycle count when f mod p^n is a bijection

    def to_json(self) -> dict:
        return {"n": self.n, "status": self.status,
                "orbit_length": self.orbit_length, "cycles": self.cycles}


@dataclass(frozen=True)
class TransitivityReport:
    levels: Tuple[LevelResult, ...]
    verdict: str

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "levels": [lv.to_json() for lv in self.levels]}


def residue_table(e: Target, n: int, guard: int = DEFAULT_LEVEL_GUARD) -> List[int]:
    """``[f(x) mod p^n for x in range(p^n)]``."""
    f = _as_function(e)
    size = f.p ** n
    if size > guard:
        raise GuardError(f"level too large for exhaustive check: p^n = {size} > {guard}")
    return eval_array(f, np.arange(size, dtype=np.int64), n).tolist()


def is_n_word_transitive(e: Target, n: int, guard: int = DEFAULT_LEVEL_GUARD) -> LevelResult:
    """Is f mod p^n a single cycle of length p^n?

    The orbit of 0 returns to 0 for the first time after exactly p^n steps iff
    f permutes all residues cyclically, so no visited set is needed for the
    positive answer.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    table = residue_table(e, n, guard)
    size = len(table)
    xv, steps = table[0], 1
    while xv != 0 and steps < size:
        xv = table[xv]
        steps += 1
    if xv == 0 and steps == size:
        return LevelResult(n, "Transitive", size, 1)
    return LevelResult(n, "NotTransitive", _orbit_length(table), _cycle_count(table))


def _orbit_length(table: List[int]) -> int:
    seen = bytearray(len(table))
    xv, count = 0, 0
    while not seen[xv]:
        seen[xv] = 1
        count += 1
        xv = table[xv]
    return count


def _cycle_count(table: List[int]) -> Optional[int]:
    if len(set(table)) != len(table):
        return None
    seen = bytearray(len(table))
    cycles = 0
    for start in range(len(table)):
        if seen[start]:
            continue
        cycles += 1
        xv = start
        while not seen[xv]:
            seen[xv] = 1
            xv = table[xv]
    return cycles


def word_transitive_up_to(e: Target, max_n: int, guard: int = DEFAULT_LEVEL_GUARD) -> TransitivityReport:
    """Check levels 1..max_n, stopping at the first failure.

    A failure at level n forces failure above it: a p^m-cycle reduces to a
    p^n-cycle mod p^n.  Levels after a failure are reported as Skipped.
    """
    levels = []
    failed = None
    for n in range(1, max_n + 1):
        if failed is not None:
            levels.append(LevelResult(n, "Skipped"))
            continue
        res = is_n_word_transitive(e, n, guard)
        levels.append(res)
        if res.status != "Transitive":
            failed = n
    verdict = f"WordTransitiveUpTo({max_n})" if failed is None else f"NotWordTransitive({failed})"
    return TransitivityReport(tuple(levels), verdict)


def poly_word_transitive_z2(coeffs: Sequence[int]) -> str:
    """Word transitivity of an integer polynomial over Z_2, from level 3 alone."""
    try:
        cs = tuple(operator.index(c) for c in coeffs)
    except TypeError:
        raise ValueError("polynomial coefficients must be integers") from None
    res = is_n_word_transitive(Poly(cs, 2), 3)
    return "WordTransitiveAllN" if res.status == "Transitive" else "NotWordTransitive"


def ergodic_form(g: FuncExpr) -> FuncExpr:
    """``1 + x + 2*(g(x+1) - g(x))``, word transitive for any 1-Lipschitz g over Z_2."""
    if g.p != 2:
        raise ValueError(f"ergodic_form is for p = 2 (got p = {g.p})")
    xx = Identity(2)
    shifted = Compose(g, Add(xx, Const(1, 2)))
    return Add(Add(Const(1, 2), xx), Mul(Const(2, 2), Sub(shifted, g)))


# ---------------------------------------------------------------------------
# witness search


@dataclass(frozen=True)
class WitnessResult:
    w: Word
    w_prime: Word
    prefix: Optional[Word]  # FoundPrefix(y) when not None
    exhausted_up_to: Optional[int] = None
    x: Optional[Word] = None  # starting suffix for absolute searches

    @property
    def found(self) -> bool:
        return self.prefix is not None

    def to_json(self) -> dict:
        d = {"w": str(self.w), "w_prime": str(self.w_prime)}
        if self.x is not None:
            d["x"] = str(self.x)
        if self.found:
            d["outcome"] = "FoundPrefix"
            d["y"] = str(self.prefix)
        else:
            d["outcome"] = "ExhaustedUpTo"
            d["lmax"] = self.exhausted_up_to
        return d


def _inputs(base: int, stride: int, count: int, start: int, top: int) -> np.ndarray:
    """``base + stride * y`` for y in [start, start+count), int64 when safe."""
    if top < 2 ** 62:
        return base + stride * np.arange(start, start + count, dtype=np.int64)
    return np.array([base + stride * y for y in range(start, start + count)], dtype=object)


def _sweep(f: FuncExpr, wv: int, n: int, xv: int, xlen: int, targets, lmax: int,
           chunk: int = 1 << 20) -> Dict[int, Tuple[int, int]]:
    """For each target value t, the first (length, y) with the output block equal to t.

    Prefixes are tried by length, then by value, so reported witnesses are the
    shortest and numerically smallest.
    """
    p = f.p
    remaining = set(targets)
    found: Dict[int, Tuple[int, int]] = {}
    for ell in range(lmax + 1):
        if not remaining:
            break
        count = p ** ell
        shift = p ** (xlen + ell)
        k = xlen + ell + n
        top = p ** k
        for start in range(0, count, chunk):
            size = min(chunk, count - start)
            xs = _inputs(xv + shift * wv, p ** xlen, size, start, top)
            out = eval_array(f, xs, k)
            if out.dtype == object:
                block = np.array([v // shift for v in out.tolist()], dtype=object)
            else:
                block = out // out.dtype.type(shift)
            vals, idx = np.unique(block, return_index=True)
            for v, i in zip(vals.tolist(), idx.tolist()):
                v = int(v)
                if v in remaining:
                    remaining.discard(v)
                    found[v] = (ell, start + i)
            if not remaining:
                break
    return found


def recheck_witness(e: Target, w: Word, w_prime: Word, y: Word, x: Optional[Word] = None) -> bool:
    """Independent check of a witness by direct scalar evaluation."""
    f = _as_function(e)
    p = f.p
    x = x if x is not None else Word.empty(p)
    full = concat(concat(w, y), x)
    out = residue_word(eval_mod(f, word_residue(full), len(full)), len(full), p)
    return out.letters[len(x) + len(y):] == w_prime.letters


def complete_transitivity_witness(e: Target, w: Word, w_prime: Word,
                                  lmax: int = DEFAULT_LMAX) -> WitnessResult:
    """Search y (by length, then value) with f(w o y) ending in w'."""
    if len(w) != len(w_prime):
        raise ValueError("w and w' must have equal length")
    if lmax < 0:
        raise ValueError("lmax must be >= 0")
    f = _as_function(e)
    n = len(w)
    hit = _sweep(f, w.value, n, 0, 0, {w_prime.value}, lmax)
    if w_prime.value in hit:
        ell, y = hit[w_prime.value]
        return WitnessResult(w, w_prime, residue_word(y, ell, f.p))
    return WitnessResult(w, w_prime, None, lmax)


@dataclass
class PairReport:
    """Outcome of a complete/absolute transitivity check at one word length."""

    verdict: str  # Witnessed(AllPairs) | Refuted | Inconclusive
    n: int
    mode: str  # search | exact
    results: List[WitnessResult] = field(default_factory=list)
    refuted: Optional[Tuple[Word, ...]] = None
    lmax: Optional[int] = None
    xlen: Optional[int] = None

    @property
    def missing(self) -> List[WitnessResult]:
        return [r for r in self.results if not r.found]

    def to_json(self) -> dict:
        d = {"verdict": self.verdict, "n": self.n, "mode": self.mode,
             "lmax": self.lmax, "witnesses": [r.to_json() for r in self.results if r.found],
             "missing": [r.to_json() for r in self.missing]}
        if self.xlen is not None:
            d["xlen"] = self.xlen
        if self.refuted is not None:
            d["refuted"] = [str(v) for v in self.refuted]
        return d


def _pair_guard(p: int, n: int, max_pairs: int):
    if p ** (2 * n) > max_pairs:
        raise GuardError(f"p^(2n) = {p ** (2 * n)} word pairs exceeds the guard {max_pairs}")


def _map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _search_pairs(f: FuncExpr, n: int, lmax: int, x: Optional[Word], jobs: int) -> List[WitnessResult]:
    p = f.p
    xv, xlen = (x.value, len(x)) if x is not None else (0, 0)
    targets = range(p ** n)

    def one_w(wv: int):
        hit = _sweep(f, wv, n, xv, xlen, targets, lmax)
        w = residue_word(wv, n, p)
        out = []
        for tv in targets:
            wp = residue_word(tv, n, p)
            if tv in hit:
                ell, y = hit[tv]
                out.append(WitnessResult(w, wp, residue_word(y, ell, p), None, x))
            else:
                out.append(WitnessResult(w, wp, None, lmax, x))
        return out

    return [r for rs in _map(one_w, range(p ** n), jobs) for r in rs]


def _shortest_paths(a: Automaton, start) -> Dict[object, Word]:
    """BFS from ``start``: a shortest input word reaching each reachable state."""
    p = a.prime
    paths = {start: Word.empty(p)}
    frontier = [start]
    while frontier:
        nxt = []
        for s in frontier:
            for r in range(p):
                t, _ = a.step(s, r)
                if t not in paths:
                    paths[t] = concat(Word(p, (r,)), paths[s])
                    nxt.append(t)
        frontier = nxt
    return paths


def _exact_family(a: Automaton, n: int, start, x: Optional[Word]) -> PairReport:
    """Exact complete-transitivity check for a machine with finitely many states."""
    p = a.prime
    paths = _shortest_paths(a, start)
    states = sorted(paths, key=lambda s: (len(paths[s]), paths[s].value))
    words = [residue_word(v, n, p) for v in range(p ** n)]
    cover: Dict[Tuple[int, int], object] = {}
    for s in states:
        for w in words:
            key = (w.value, run(a, w, s).value)
            cover.setdefault(key, s)
    results, refuted = [], None
    for w in words:
        for wp in words:
            s = cover.get((w.value, wp.value))
            if s is None:
                results.append(WitnessResult(w, wp, None, None, x))
                if refuted is None:
                    refuted = (w, wp) if x is None else (x, w, wp)
            else:
                results.append(WitnessResult(w, wp, paths[s], None, x))
    return PairReport("Refuted" if refuted else "Witnessed", n, "exact", results, refuted)


def check_complete_transitive(e: Target, n: int, lmax: int = DEFAULT_LMAX,
                              jobs: int = 1, max_pairs: int = 1 << 16) -> PairReport:
    """All p^(2n) pairs at word length n.

    Finite machines are decided exactly from their state family; everything
    else is searched, and exhaustion is reported as Inconclusive.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(e, Automaton) and e.finite:
        _pair_guard(e.prime, n, max_pairs)
        rep = _exact_family(e, n, e.initial, None)
        if rep.verdict == "Witnessed":
            rep.verdict = "WitnessedAllPairs"
        return rep
    f = _as_function(e)
    _pair_guard(f.p, n, max_pairs)
    results = _search_pairs(f, n, lmax, None, jobs)
    verdict = "WitnessedAllPairs" if all(r.found for r in results) else "Inconclusive"
    return PairReport(verdict, n, "search", results, lmax=lmax)


def check_absolute_transitive(e: Target, n: int, xlen: int, lmax: int = DEFAULT_LMAX,
                              jobs: int = 1, max_pairs: int = 1 << 18) -> PairReport:
    """Complete-transitivity searches after every starting suffix x of length xlen."""
    if n < 1 or xlen < 0:
        raise ValueError("need n >= 1 and xlen >= 0")
    p = e.prime if isinstance(e, Automaton) else e.p
    if p ** (2 * n + xlen) > max_pairs:
        raise GuardError(f"p^(2n+xlen) = {p ** (2 * n + xlen)} combinations exceeds the guard {max_pairs}")
    suffixes = [residue_word(v, xlen, p) for v in range(p ** xlen)]
    results: List[WitnessResult] = []
    refuted = None
    if isinstance(e, Automaton) and e.finite:
        for x in suffixes:
            rep = _exact_family(e, n, final_state(e, x), x)
            # witnesses from the exact family are prefixes y read after x
            results.extend(rep.results)
            refuted = refuted or rep.refuted
        verdict = "Refuted" if refuted else "Witnessed"
        return PairReport(verdict, n, "exact", results, refuted, None, xlen)
    f = _as_function(e)
    for x in suffixes:
        results.extend(_search_pairs(f, n, lmax, x, jobs))
    verdict = "Witnessed" if all(r.found for r in results) else "Inconclusive"
    return PairReport(verdict, n, "search", results, None, lmax, xlen)


# ---------------------------------------------------------------------------
# sufficient-condition certificate


@dataclass(frozen=True)
class SufficiencyCertificate:
    """Checked hypotheses of the second-derivative criterion for measure 1.

    ``second`` holds the exact second derivative at ``v`` as
    ``{"value": int}`` or as ``{"valuation": s, "unit": xi}``; ``mode`` says
    whether nonnegativity on N_0 was proved ("exact") or only sampled.
    """

    cls: str  # PolyDegreeGe2 | CxPlusCx | PolyPlusOrC | Unsupported
    v: Optional[int] = None
    second: Optional[dict] = None
    sign_variant: Optional[str] = None
    mode: Optional[str] = None
    conditions: Tuple[str, ...] = ()
    absolute: bool = False
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.cls != "Unsupported"

    def to_json(self) -> dict:
        return {"class": self.cls, "v": self.v, "second_derivative": self.second,
                "sign_variant": self.sign_variant, "mode": self.mode,
                "conditions": list(self.conditions), "absolute": self.absolute,
                "reason": self.reason}


_VARIANTS = [(1, 1, "f(N0) in N0"), (-1, 1, "f(-N0) in N0"),
             (1, -1, "f(N0) in -N0"), (-1, -1, "f(-N0) in -N0")]


def _sampled_sign_ok(f: FuncExpr, s_in: int, s_out: int, bound: int) -> bool:
    for v in range(bound + 1):
        val = exact_value(f, s_in * v)
        if val is None or s_out * val < 0:
            return False
    return True


def _forward_differences_nonneg(cs: Sequence[int]) -> bool:
    """All forward differences of the polynomial at 0 are >= 0, so it is >= 0 on N_0."""
    deg = len(cs) - 1
    vals = [Poly(cs).exact(v) for v in range(deg + 1)]
    while vals:
        if vals[0] < 0:
            return False
        vals = [b - a for a, b in zip(vals, vals[1:])]
    return True


def _log_valuation(c: int, p: int) -> int:
    """ord_p of the p-adic logarithm of c (c = 1 mod p, c != +-1)."""
    if p == 2 and c % 4 == 3:
        return valuation(c + 1, 2)
    return valuation(c - 1, p)


def sufficient_condition_certificate(e: FuncExpr, search_bound: int = 4096,
                                     k: int = 32) -> SufficiencyCertificate:
    """Try to certify measure 1 (hence complete transitivity) for ``e``.

    Recognized classes: integer polynomials of degree >= 2, ``a + b*x + c^x``
    with c = 1 (mod p), c != 1, and ``a + b*x + ((x^2) OR c)`` over Z_2.
    Condition (i), values in N_0 up to a sign flip of input or output, is
    proved where an exact argument exists and sampled on [0, search_bound]
    otherwise.  Condition (ii) needs an exact nonzero second derivative.
    """
    p = e.p
    cs = as_polynomial(e)
    if cs is not None:
        if len(cs) - 1 < 2:
            return SufficiencyCertificate("Unsupported", reason="f'' vanishes identically (degree < 2)")
        for s_in, s_out, label in _VARIANTS:
            g = tuple(s_out * c * s_in ** i for i, c in enumerate(cs))
            if _forward_differences_nonneg(g):
                mode = "exact"
            elif _sampled_sign_ok(e, s_in, s_out, search_bound):
                mode = "sampled"
            else:
                continue
            d2 = poly_derivative(poly_derivative(g))
            for v in range(search_bound + 1):
                val = Poly(d2).exact(v)
                if val != 0:
                    s = valuation(val, p)
                    second = {"value": val, "valuation": s,
                              "unit": (val // p ** s) % p ** k}
                    return SufficiencyCertificate(
                        "PolyDegreeGe2", v, second, label, mode,
                        (f"(i) {label} [{mode}]", f"(ii) f''({v}) = {val} != 0"),
                        absolute=(mode == "exact"))
            return SufficiencyCertificate("Unsupported", reason="no v with f''(v) != 0 in range")
        return SufficiencyCertificate("Unsupported", reason="condition (i) fails for every sign variant")

    pat = split_pattern(e)
    if pat is None:
        return SufficiencyCertificate("Unsupported", reason="not a recognized class")
    kind, rest, param = pat
    if len(rest) > 2:
        return SufficiencyCertificate("Unsupported", reason="polynomial part has degree > 1")
    a = rest[0]
    b = rest[1] if len(rest) > 1 else 0
    if kind == "PolyPlusExp":
        c = param
        if c in (1, -1):
            return SufficiencyCertificate("Unsupported", reason="c^x is constant-like for c = +-1")
        exact = a >= 0 and b >= 0 and c >= 2
        if not exact and not _sampled_sign_ok(e, 1, 1, search_bound):
            return SufficiencyCertificate("Unsupported", reason="condition (i) fails on the sample")
        s = 2 * _log_valuation(c, p)
        mode = "exact" if exact else "sampled"
        return SufficiencyCertificate(
            "CxPlusCx", 0, {"valuation": s, "unit": None, "form": "(log_p c)^2 * c^v"},
            _VARIANTS[0][2], mode,
            (f"(i) f(N0) in N0 [{mode}]", "(ii) f''(v) = (log_p c)^2 c^v != 0 for every v"),
            absolute=exact)
    if kind == "Pattern" and p == 2 and param >= 0:
        exact = a >= 0 and b >= 0
        if not exact and not _sampled_sign_ok(e, 1, 1, search_bound):
            return SufficiencyCertificate("Unsupported", reason="condition (i) fails on the sample")
        mode = "exact" if exact else "sampled"
        return SufficiencyCertificate(
            "PolyPlusOrC", 0, {"value": 2, "valuation": 1, "unit": 1},
            _VARIANTS[0][2], mode,
            (f"(i) f(N0) in N0 [{mode}]", "(ii) f''(x) = 2 for all x"),
            absolute=exact)
    return SufficiencyCertificate("Unsupported", reason="not a recognized class")
