"""Real-plane plots of automaton functions.

The point set E_k(f) has one point per residue x mod p^k:
``(x mod p^k, f(x) mod p^k) / p^k``.  We keep coordinates as exact residues
and rasterize onto a p^m x p^m grid by their top m digits, which is the same
as flooring ``coordinate * p^m``.  The occupied fraction of cells is the
finite stand-in for the Lebesgue measure of the closure.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import GuardError
from .expr import FuncExpr, Neg, eval_array

POINT_GUARD = 1 << 24
GRID_GUARD = 1 << 26
CHUNK = 1 << 20


def _check_points(p: int, k: int, guard: int):
    if p ** k > guard:
        raise GuardError(f"p^k = {p ** k} points exceeds the guard {guard}; stream the points (stream=True, CLI --stream)")


def _chunks(p: int, k: int) -> Iterator[Tuple[int, int]]:
    total = p ** k
    for start in range(0, total, CHUNK):
        yield start, min(total, start + CHUNK)


def points_array(e: FuncExpr, k: int, start: int = 0, stop: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Residues x in [start, stop) and f(x) mod p^k as two arrays."""
    stop = e.p ** k if stop is None else stop
    xs = np.arange(start, stop, dtype=np.int64) if e.p ** k < 2 ** 62 else \
        np.array(range(start, stop), dtype=object)
    return xs, eval_array(e, xs, k)


def generate_points(e: FuncExpr, k: int, stream: bool = False,
                    guard: int = POINT_GUARD) -> Iterator[Tuple[int, int]]:
    """Yield ``(x, f(x) mod p^k)`` for x = 0 .. p^k - 1 in order."""
    if not stream:
        _check_points(e.p, k, guard)
    for start, stop in _chunks(e.p, k):
        xs, ys = points_array(e, k, start, stop)
        yield from zip(xs.tolist(), ys.tolist())


@dataclass
class PlotGrid:
    """Occupancy of E_k(f) on a p^m x p^m grid.

    ``bitmap[i, j]`` is True when some point has x-cell i and y-cell j.
    """

    prime: int
    k: int
    m: int
    bitmap: np.ndarray
    total_points: int

    @property
    def side(self) -> int:
        return self.prime ** self.m

    @property
    def occupied(self) -> int:
        return int(self.bitmap.sum())

    @property
    def total_cells(self) -> int:
        return self.side ** 2

    @property
    def alpha_hat(self) -> float:
        return self.occupied / self.total_cells

    def coarsen(self, m: int) -> PlotGrid:
        """The same points on a coarser p^m grid (cell OR over blocks)."""
        if not 0 <= m <= self.m:
            raise ValueError("can only coarsen to m <= current m")
        f = self.prime ** (self.m - m)
        s = self.prime ** m
        bm = self.bitmap.reshape(s, f, s, f).any(axis=(1, 3))
        return PlotGrid(self.prime, self.k, m, bm, self.total_points)

    def stats(self) -> dict:
        return {"p": self.prime, "k": self.k, "m": self.m, "occupied": self.occupied,
                "total_cells": self.total_cells, "total_points": self.total_points,
                "alpha_hat": self.alpha_hat}


def _cells(xs, ys, p: int, k: int, m: int) -> np.ndarray:
    """Flat cell indices ``i * p^m + j`` for a batch of points."""
    div = p ** (k - m)
    if ys.dtype == object or xs.dtype == object:
        return np.array([(int(a) // div) * p ** m + int(b) // div
                         for a, b in zip(xs.tolist(), ys.tolist())], dtype=np.int64)
    i = xs.astype(np.int64) // div
    j = (ys // ys.dtype.type(div)).astype(np.int64)
    return i * (p ** m) + j


def _partial_bitmap(e: FuncExpr, k: int, m: int, start: int, stop: int) -> np.ndarray:
    side = e.p ** m
    bm = np.zeros(side * side, dtype=bool)
    for s in range(start, stop, CHUNK):
        xs, ys = points_array(e, k, s, min(stop, s + CHUNK))
        bm[_cells(xs, ys, e.p, k, m)] = True
    return bm


def occupancy(e: FuncExpr, k: int, m: int, jobs: int = 1, stream: bool = False,
              guard: int = POINT_GUARD) -> PlotGrid:
    """Rasterize E_k(f) onto the p^m x p^m grid.

    With ``jobs > 1`` the residue range is split and partial bitmaps are
    OR-merged; the result does not depend on the split.
    """
    p = e.p
    if not 0 <= m <= k:
        raise ValueError("need 0 <= m <= k")
    if p ** (2 * m) > GRID_GUARD:
        raise GuardError(f"grid of p^(2m) = {p ** (2 * m)} cells exceeds the guard {GRID_GUARD}")
    if not stream:
        _check_points(p, k, guard)
    total = p ** k
    if jobs <= 1:
        bm = _partial_bitmap(e, k, m, 0, total)
    else:
        bounds = np.linspace(0, total, jobs + 1).astype(np.int64).tolist() if total < 2 ** 62 \
            else [total * i // jobs for i in range(jobs + 1)]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda ab: _partial_bitmap(e, k, m, ab[0], ab[1]),
                                  zip(bounds[:-1], bounds[1:])))
        bm = np.logical_or.reduce(parts)
    side = p ** m
    return PlotGrid(p, k, m, bm.reshape(side, side), total)


@dataclass(frozen=True)
class TrendReport:
    ks: Tuple[int, ...]
    m: int
    alpha_fixed: Tuple[float, ...]      # alpha_hat(k, m)
    alpha_refined: Tuple[float, ...]    # alpha_hat(k, k // 2)

    def to_json(self) -> dict:
        return {"ks": list(self.ks), "m": self.m,
                "alpha_fixed": list(self.alpha_fixed),
                "alpha_refined": list(self.alpha_refined),
                "refined_m": [k // 2 for k in self.ks]}


def occupancy_trend(e: FuncExpr, ks: Sequence[int], m: int, jobs: int = 1) -> TrendReport:
    fixed, refined = [], []
    for k in ks:
        grid = occupancy(e, k, max(m, k // 2), jobs=jobs)
        fixed.append(grid.coarsen(m).alpha_hat if grid.m > m else grid.alpha_hat)
        refined.append(grid.coarsen(k // 2).alpha_hat)
    return TrendReport(tuple(ks), m, tuple(fixed), tuple(refined))


@dataclass(frozen=True)
class ClassifyPolicy:
    """Thresholds for the heuristic 0-1 classifier."""

    ks: Tuple[int, ...] = (12, 16, 20)
    m: int = 6
    full: float = 1.0           # alpha_hat(k_max, m) at least this -> measure-1 candidate
    decay_factor: float = 2.0   # refined series shrinks at least this much -> measure-0 candidate


@dataclass(frozen=True)
class Classification:
    verdict: str  # Measure1Candidate | Measure0Candidate | Undetermined
    trend: TrendReport
    heuristic: bool = True

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "heuristic": True, "trend": self.trend.to_json()}


def classify(e: FuncExpr, policy: ClassifyPolicy = ClassifyPolicy(), jobs: int = 1) -> Classification:
    """Finite-sample guess at which side of the 0-1 alternative f falls on."""
    trend = occupancy_trend(e, policy.ks, policy.m, jobs)
    if trend.alpha_fixed[-1] >= policy.full:
        verdict = "Measure1Candidate"
    elif trend.alpha_refined[0] >= policy.decay_factor * trend.alpha_refined[-1]:
        verdict = "Measure0Candidate"
    else:
        verdict = "Undetermined"
    return Classification(verdict, trend)


@dataclass(frozen=True)
class MirrorReport:
    k: int
    points: int
    mismatches: int          # points off the boundary where -f is not p^k - f
    boundary: int            # points with f(x) = 0 mod p^k
    first_mismatch: Optional[int] = None

    def to_json(self) -> dict:
        return {"k": self.k, "points": self.points, "mismatches": self.mismatches,
                "boundary_exceptions": self.boundary, "first_mismatch": self.first_mismatch}


def mirror_check(e: FuncExpr, k: int, guard: int = POINT_GUARD) -> MirrorReport:
    """Evaluate f and -f separately and compare them pointwise.

    Away from f(x) = 0 the point of -f must be the reflection in y = 1/2, i.e.
    ``p^k - (f(x) mod p^k)``.  Points with f(x) = 0 stay on the bottom edge
    and are counted as boundary exceptions.
    """
    _check_points(e.p, k, guard)
    mod = e.p ** k
    mismatches = boundary = 0
    first = None
    neg = Neg(e)
    for start, stop in _chunks(e.p, k):
        _, ys = points_array(e, k, start, stop)
        _, ns = points_array(neg, k, start, stop)
        on_edge = ys == 0
        # p^k - y off the edge, 0 on it
        expected = (np.uint64(0) - ys) & np.uint64(mod - 1) if ys.dtype == np.uint64 \
            else (-ys) % mod
        bad = np.nonzero(ns != expected)[0]
        boundary += int(on_edge.sum())
        mismatches += len(bad)
        if first is None and len(bad):
            first = start + int(bad[0])
    return MirrorReport(k, mod, mismatches, boundary, first)


def grid_line_cells(e: FuncExpr, k: int, m: int) -> int:
    """Cells hit by points lying on a horizontal grid line (y = 0 mod p^(k-m)).

    Reflecting in y = 1/2 maps such a point onto a grid line, where the
    floor-based cell assignment switches sides; only these cells can make
    the occupied counts of f and -f differ.
    """
    div = e.p ** (k - m)
    cells = set()
    for start, stop in _chunks(e.p, k):
        xs, ys = points_array(e, k, start, stop)
        on_line = (ys % ys.dtype.type(div)) == 0 if ys.dtype != object else \
            np.array([v % div == 0 for v in ys.tolist()], dtype=bool)
        cells.update(_cells(xs[on_line], ys[on_line], e.p, k, m).tolist())
    return len(cells)


def refinement_consistent(e: FuncExpr, k: int, m: int, ks: Sequence[int]) -> List[Tuple[int, int, int]]:
    """Check the self-similarity of empty cells.

    If cell (a, b) of the p^m grid is empty at point level k, then at point
    level k + d on the p^(m+d) grid no cell (a', b') with a' = a and b' = b
    (mod p^m) is hit.  Returns violations as ``(k', a', b')``; empty means
    consistent.
    """
    base = occupancy(e, k, m)
    empty = ~base.bitmap
    side = e.p ** m
    bad = []
    for k2 in ks:
        d = k2 - k
        if d < 0:
            raise ValueError("refinement levels must be >= k")
        m2 = m + d
        div = e.p ** (k2 - m2)
        for start, stop in _chunks(e.p, k2):
            xs, ys = points_array(e, k2, start, stop)
            a2 = xs.astype(np.int64) // div
            b2 = (ys // ys.dtype.type(div)).astype(np.int64)
            hit = empty[a2 % side, b2 % side]
            for a, b in zip(a2[hit].tolist(), b2[hit].tolist()):
                bad.append((k2, a, b))
    return bad


# ---------------------------------------------------------------------------
# output formats


def render_pgm(grid: PlotGrid) -> bytes:
    """Binary PGM: occupied cells black, empty white, y axis pointing up."""
    side = grid.side
    img = np.where(grid.bitmap.T[::-1, :], 0, 255).astype(np.uint8)
    header = f"P5\n{side} {side}\n255\n".encode("ascii")
    return header + img.tobytes()


def render_csv(grid: PlotGrid) -> bytes:
    ii, jj = np.nonzero(grid.bitmap)
    lines = ["i,j"] + [f"{i},{j}" for i, j in zip(ii.tolist(), jj.tolist())]
    return ("\n".join(lines) + "\n").encode("ascii")


def render_json(grid: PlotGrid, **extra) -> bytes:
    d = grid.stats()
    d.update(extra)
    return (json.dumps(d, sort_keys=True, indent=2) + "\n").encode("ascii")


def render(grid: PlotGrid, fmt: str = "pgm", **extra) -> bytes:
    if fmt == "pgm":
        return render_pgm(grid)
    if fmt == "csv":
        return render_csv(grid)
    if fmt == "json":
        return render_json(grid, **extra)
    raise ValueError(f"unknown format {fmt!r} (pgm, csv, json)")


def read_pgm(data: bytes) -> np.ndarray:
    """Parse a binary PGM written by :func:`render_pgm`."""
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)
