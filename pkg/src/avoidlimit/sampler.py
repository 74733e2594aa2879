"""Exact samplers: uniform avoiders through RSK, Weyl bridges by counting, lazy walks.

Shapes are drawn with weight ``(f^lam)^2``. Put ``l_i = lam_i + d - i`` and
``N = n + d(d-1)/2``; then ``f^lam = n! * Vandermonde(l) / prod(l_i!)`` and

    (f^lam)^2  is proportional to  Vandermonde(l)^2 * M(l)^2,

where ``M`` is the multinomial(N, 1/d) mass function. Small cases enumerate
every shape with exact big-integer weights. Otherwise a sorted multinomial
draw (mass ``d! M(l)`` on distinct ``l``) is accepted with probability
``Vandermonde(l)^2 M(l) / B``, where ``B`` bounds the continuous maximum.
"""

from __future__ import annotations

import bisect
import functools
import json
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.special import digamma, polygamma

from .permcore import Permutation, as_permutation, catalan
from .rng import SeededRng
from .words import LayeredWords

ENUMERATION_MAX_N = 1000
ENUMERATION_MAX_SHAPES = 20000
DP_MAX_STATES = 3_000_000
REJECTION_BATCH = 4096


@dataclass(frozen=True)
class ShapeTableauPair:
    shape: tuple[int, ...]
    P: tuple[tuple[int, ...], ...]
    Q: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        shape = tuple(int(r) for r in self.shape)
        check_shape(shape)
        for name in ("P", "Q"):
            t = tuple(tuple(int(x) for x in row) for row in getattr(self, name))
            if tuple(len(row) for row in t) != shape:
                raise ValueError(f"tableau {name} does not have shape {shape}")
            check_standard(t)
            object.__setattr__(self, name, t)
        object.__setattr__(self, "shape", shape)

    @property
    def n(self) -> int:
        return sum(self.shape)


def check_shape(shape: Sequence[int]) -> None:
    if any(r <= 0 for r in shape) or any(x < y for x, y in zip(shape, shape[1:])):
        raise ValueError(f"not a partition with positive parts: {tuple(shape)}")


def check_standard(tableau) -> None:
    n = sum(len(row) for row in tableau)
    entries = sorted(x for row in tableau for x in row)
    if entries != list(range(1, n + 1)):
        raise ValueError("tableau entries are not 1..n")
    for r, row in enumerate(tableau):
        if any(x >= y for x, y in zip(row, row[1:])):
            raise ValueError(f"row {r + 1} is not increasing")
        if r:
            above = tableau[r - 1]
            if any(above[c] >= row[c] for c in range(len(row))):
                raise ValueError(f"column strictness fails between rows {r} and {r + 1}")


def rsk(sigma) -> ShapeTableauPair:
    """Row insertion of ``sigma(1), ..., sigma(n)``; ``Q`` records the insertion times."""
    sigma = as_permutation(sigma)
    P: list[list[int]] = []
    Q: list[list[int]] = []
    for k, x in enumerate(sigma.values, start=1):
        r = 0
        while True:
            if r == len(P):
                P.append([x])
                Q.append([k])
                break
            row = P[r]
            c = bisect.bisect_left(row, x)
            if c == len(row):
                row.append(x)
                Q[r].append(k)
                break
            row[c], x = x, row[c]
            r += 1
    return ShapeTableauPair(tuple(len(row) for row in P), tuple(map(tuple, P)), tuple(map(tuple, Q)))


def inverse_rsk(pair: ShapeTableauPair) -> Permutation:
    n = pair.n
    P = [list(row) for row in pair.P]
    row_of = [0] * (n + 1)
    for r, row in enumerate(pair.Q):
        for k in row:
            row_of[k] = r
    values = [0] * n
    for k in range(n, 0, -1):
        r = row_of[k]
        x = P[r].pop()
        for up in range(r - 1, -1, -1):
            row = P[up]
            c = bisect.bisect_left(row, x) - 1
            row[c], x = x, row[c]
        values[k - 1] = x
    return Permutation(tuple(values))


def hook_lengths(shape: Sequence[int]) -> int:
    """Number of standard tableaux of ``shape``: ``n!`` over the product of all hooks."""
    shape = tuple(shape)
    check_shape(shape)
    prod = 1
    for r, length in enumerate(shape):
        for c in range(length):
            leg = sum(1 for below in shape[r + 1 :] if below > c)
            prod *= length - c + leg
    return math.factorial(sum(shape)) // prod


def _shifted(shape: Sequence[int], d: int) -> list[int]:
    parts = list(shape) + [0] * (d - len(shape))
    return [parts[i] + d - 1 - i for i in range(d)]


def count_syt(shape: Sequence[int], d: int | None = None) -> int:
    """``f^lam`` through the determinant form ``n! Vandermonde(l) / prod l_i!``."""
    d = len(shape) if d is None else d
    l = _shifted(shape, d)
    num = math.factorial(sum(shape))
    for i, j in combinations(range(d), 2):
        num *= l[i] - l[j]
    den = 1
    for x in l:
        den *= math.factorial(x)
    return num // den


def partitions(n: int, d: int):
    """Partitions of ``n`` into at most ``d`` parts, reverse lexicographic."""

    def rec(remaining, maxpart, rows):
        if remaining == 0:
            yield ()
            return
        if rows == 0:
            return
        for first in range(min(remaining, maxpart), 0, -1):
            if first * rows < remaining:
                break
            for rest in rec(remaining - first, first, rows - 1):
                yield (first,) + rest

    return rec(n, n, d)


def partition_count(n: int, d: int) -> int:
    """Partitions of ``n`` into parts of size at most ``d`` (equinumerous, by conjugation)."""
    ways = [1] + [0] * n
    for part in range(1, d + 1):
        for total in range(part, n + 1):
            ways[total] += ways[total - part]
    return ways[n]


def avoider_count(n: int, d: int) -> int:
    """``|Av_n(rho_d)|`` as the sum of ``(f^lam)^2`` over shapes with at most ``d`` rows."""
    return sum(count_syt(lam, d) ** 2 for lam in partitions(n, d))


@functools.lru_cache(maxsize=32)
def _shape_table(n: int, d: int):
    shapes = list(partitions(n, d))
    cumulative = []
    total = 0
    for lam in shapes:
        total += count_syt(lam, d) ** 2
        cumulative.append(total)
    return shapes, cumulative


def _log_target(l: np.ndarray) -> np.ndarray:
    """``2 log Vandermonde(l) - sum lgamma(l_i + 1)`` along the last axis."""
    from scipy.special import gammaln

    d = l.shape[-1]
    out = -gammaln(l + 1.0).sum(axis=-1)
    for i, j in combinations(range(d), 2):
        out = out + 2.0 * np.log(l[..., i] - l[..., j])
    return out


@functools.lru_cache(maxsize=64)
def log_target_bound(n: int, d: int) -> float:
    """Maximum of the concave log target over real ``l`` with ``sum l = N``.

    Newton steps on the constraint plane, backtracking to stay ordered and
    keep the objective increasing.
    """
    l = np.array([n / d + d - 1 - i for i in range(d)], dtype=float)
    if d == 1:
        return float(_log_target(l))
    f = float(_log_target(l))
    for _ in range(200):
        diff = l[:, None] - l[None, :]
        np.fill_diagonal(diff, np.inf)
        grad = 2.0 * (1.0 / diff).sum(axis=1) - digamma(l + 1.0)
        H = 2.0 / diff**2
        np.fill_diagonal(H, 0.0)
        np.fill_diagonal(H, -H.sum(axis=1) - polygamma(1, l + 1.0))
        kkt = np.zeros((d + 1, d + 1))
        kkt[:d, :d] = H
        kkt[:d, d] = kkt[d, :d] = 1.0
        step = np.linalg.solve(kkt, np.concatenate([-grad, [0.0]]))[:d]
        scale = 1.0
        while scale > 1e-12:
            cand = l + scale * step
            if np.all(np.diff(cand) < 0) and cand[-1] > -1.0:
                fc = float(_log_target(cand))
                if fc >= f:
                    break
            scale /= 2
        else:
            break
        previous = f
        l, f = cand, fc
        if abs(f - previous) < 1e-13 * max(1.0, abs(f)) and np.max(np.abs(scale * step)) < 1e-9:
            break
    return f


def _shape_by_enumeration(n: int, d: int, rng: SeededRng) -> tuple[int, ...]:
    shapes, cumulative = _shape_table(n, d)
    r = rng.py.randrange(cumulative[-1])
    return shapes[bisect.bisect_right(cumulative, r)]


def _shape_by_rejection(n: int, d: int, rng: SeededRng) -> tuple[int, ...]:
    N = n + d * (d - 1) // 2
    # slack absorbs float error in the log target at large N
    bound = log_target_bound(n, d) + 1e-9 * max(1.0, N)
    while True:
        l = -np.sort(-rng.gen.multinomial(N, [1.0 / d] * d, size=REJECTION_BATCH), axis=1)
        distinct = np.all(np.diff(l, axis=1) < 0, axis=1)
        l = l[distinct].astype(float)
        if not len(l):
            continue
        logr = _log_target(l) - bound
        if np.any(logr > 0):
            raise RuntimeError("shape rejection bound violated; the sampler would be biased")
        u = rng.gen.random(len(l))
        hit = np.flatnonzero(np.log(u) < logr)
        if len(hit):
            row = l[hit[0]].astype(np.int64)
            lam = tuple(int(row[i]) - (d - 1 - i) for i in range(d))
            return tuple(x for x in lam if x > 0)


def sample_shape(n: int, d: int, rng: SeededRng, method: str = "auto") -> tuple[int, ...]:
    """Shape with at most ``d`` rows drawn with probability proportional to ``(f^lam)^2``."""
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if method == "auto":
        small = n <= ENUMERATION_MAX_N and partition_count(n, d) <= ENUMERATION_MAX_SHAPES
        method = "enumerate" if small else "reject"
    if method == "enumerate":
        return _shape_by_enumeration(n, d, rng)
    if method == "reject":
        return _shape_by_rejection(n, d, rng)
    raise ValueError(f"unknown shape method {method!r}")


def hook_walk(shape: Sequence[int], rng: SeededRng) -> tuple[tuple[int, ...], ...]:
    """Uniform standard tableau of ``shape`` by repeated random hook walks.

    Largest entries go first: a uniform cell of the remaining diagram walks to
    a uniform cell of its hook until it reaches a corner, which receives the
    current entry and is removed.
    """
    rows = list(shape)
    check_shape(rows)
    depth = len(rows)
    below = rng.py.randrange
    table = [[0] * r for r in rows]
    for k in range(sum(rows), 0, -1):
        x = below(k)
        r = 0
        while x >= rows[r]:
            x -= rows[r]
            r += 1
        c = x
        while True:
            arm = rows[r] - c - 1
            leg = 0
            while r + leg + 1 < depth and rows[r + leg + 1] > c:
                leg += 1
            h = arm + leg
            if h == 0:
                break
            y = below(h)
            if y < arm:
                c += 1 + y
            else:
                r += 1 + y - arm
        table[r][c] = k
        rows[r] -= 1
    return tuple(tuple(row) for row in table)


def sample_avoider(n: int, d: int, rng: SeededRng, method: str = "auto") -> Permutation:
    """Uniform element of ``Av_n(rho_d)``: weighted shape, two hook walks, inverse RSK."""
    shape = sample_shape(n, d, rng, method)
    P = hook_walk(shape, rng)
    Q = hook_walk(shape, rng)
    return inverse_rsk(_trusted_pair(shape, P, Q))


def _trusted_pair(shape, P, Q) -> ShapeTableauPair:
    # hook walks produce standard fillings by construction; skip revalidation
    pair = object.__new__(ShapeTableauPair)
    object.__setattr__(pair, "shape", tuple(shape))
    object.__setattr__(pair, "P", P)
    object.__setattr__(pair, "Q", Q)
    return pair


def sample_lazy_walk(n: int, d: int, rng: SeededRng) -> LayeredWords:
    """Independent uniform letters for both words."""
    a = rng.gen.integers(1, d + 1, size=n)
    b = rng.gen.integers(1, d + 1, size=n)
    return LayeredWords(tuple(a.tolist()), tuple(b.tolist()), d)


def _step_deltas(d: int) -> dict[tuple[int, int], tuple[int, ...]]:
    """Gap-vector change caused by the word-pair step ``(a, b)``, i.e. ``e_a - e_b``."""

    def unit(i):
        g = [0] * (d - 1)
        if i <= d - 1:
            g[i - 1] += 1
        if i >= 2:
            g[i - 2] -= 1
        return g

    return {
        (i, j): tuple(p - q for p, q in zip(unit(i), unit(j)))
        for i in range(1, d + 1)
        for j in range(1, d + 1)
    }


def dp_state_estimate(n: int, d: int) -> int:
    """Upper bound on the stored states: gap vectors with ``sum <= 2 min(t, n - t)``."""
    return sum(math.comb(2 * min(t, n - t) + d - 1, d - 1) for t in range(n + 1))


def _gaps_to_point(gaps: Sequence[int]) -> tuple[int, ...]:
    d = len(gaps) + 1
    x = [0] * d
    for k in range(d - 2, -1, -1):
        x[k] = x[k + 1] + gaps[k]
    shift = sum(x)
    if shift % d:
        raise ValueError(f"gaps {tuple(gaps)} do not come from a zero-sum lattice point")
    return tuple(v - shift // d for v in x)


@dataclass(frozen=True)
class BridgeDPTable:
    """``levels[t]`` maps a gap vector to the number of confined word pairs of length t.

    With ``bridge=True`` only states that can still return to the origin by
    time ``n`` are kept; ``levels[n][origin]`` is unaffected.
    """

    n: int
    d: int
    levels: tuple[dict, ...]
    bridge: bool

    def count(self, t: int, gaps: Sequence[int] | None = None) -> int:
        gaps = (0,) * (self.d - 1) if gaps is None else tuple(gaps)
        return self.levels[t].get(gaps, 0)

    @property
    def total(self) -> int:
        return sum(self.levels[self.n].values())

    def to_json(self) -> str:
        states = [{"gaps": list(g), "count": str(c)} for g, c in sorted(self.levels[self.n].items())]
        return json.dumps({"n": self.n, "d": self.d, "states": states})


def bridge_dp(n: int, d: int, bridge: bool = True, max_states: int = DP_MAX_STATES) -> BridgeDPTable:
    """Exact counts of word pairs whose path stays in the chamber.

    ``bridge=False`` keeps every confined state, so the last level sums to the
    number of all confined pairs of length ``n``.
    """
    if d < 2:
        raise ValueError("the chamber needs d >= 2")
    estimate = dp_state_estimate(n, d) if bridge else (n + 1) * math.comb(2 * n + d - 1, d - 1)
    if estimate > max_states:
        raise ValueError(
            f"refusing to build the table: about {estimate:.3g} states for n={n}, d={d} "
            f"exceeds the limit {max_states:.3g}"
        )
    moves: dict[tuple[int, ...], int] = {}
    for delta in _step_deltas(d).values():
        moves[delta] = moves.get(delta, 0) + 1
    origin = (0,) * (d - 1)
    levels = [{origin: 1}]
    for t in range(1, n + 1):
        budget = 2 * (n - t)
        nxt: dict[tuple[int, ...], int] = {}
        for gaps, c in levels[-1].items():
            for delta, mult in moves.items():
                g = tuple(x + y for x, y in zip(gaps, delta))
                if min(g) < 0:
                    continue
                if bridge and _return_cost(g) > budget:
                    continue
                nxt[g] = nxt.get(g, 0) + mult * c
        levels.append(nxt)
    return BridgeDPTable(n, d, tuple(levels), bridge)


def _return_cost(gaps: tuple[int, ...]) -> int:
    """L1 norm of the zero-sum point with these gaps (each step changes it by at most 2)."""
    return sum(abs(v) for v in _gaps_to_point(gaps)) if any(gaps) else 0


def sample_weyl_bridge(table: BridgeDPTable, rng: SeededRng) -> LayeredWords:
    """Uniform word pair among those confined to the chamber and ending at the origin."""
    n, d = table.n, table.d
    here = (0,) * (d - 1)
    if table.count(n, here) == 0:
        raise ValueError("no confined bridge of this length")
    deltas = _step_deltas(d)
    a = [0] * n
    b = [0] * n
    for t in range(n, 0, -1):
        r = rng.py.randrange(table.levels[t][here])
        prev_level = table.levels[t - 1]
        for (i, j), delta in deltas.items():
            prev = tuple(x - y for x, y in zip(here, delta))
            r -= prev_level.get(prev, 0)
            if r < 0:
                a[t - 1], b[t - 1] = i, j
                here = prev
                break
        else:
            raise RuntimeError("inconsistent counting table")
    return LayeredWords(tuple(a), tuple(b), d)


def regev_offsets(n_max: int) -> np.ndarray:
    """``log C_n - (2n log 2 - 1.5 log n)`` for ``n = 1..n_max`` from exact Catalan numbers."""
    out = np.empty(n_max)
    c = 1
    for n in range(1, n_max + 1):
        c = c * 2 * (2 * n - 1) // (n + 1)
        out[n - 1] = math.log(c) - (2 * n * math.log(2) - 1.5 * math.log(n))
    return out


def catalan_check(n_max: int) -> bool:
    return all(
        sum(count_syt(lam, 2) ** 2 for lam in partitions(n, 2)) == catalan(n) for n in range(1, n_max + 1)
    )
