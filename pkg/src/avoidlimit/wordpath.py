"""Lattice paths of word pairs, Weyl chambers, Petrov conditions and scaled paths.

The Petrov conditions bound windowed letter counts. For a letter ``l`` put
``g(t) = count^l(t) - t/d``; the window ``[i, j]`` passes when

* ``|g(j) - g(i)| < (2d)^-2 (j - i)^0.6``  if ``j - i > m^0.1``, and
* ``|g(j) - g(i)| < (2d)^-2 m^0.25``       if ``j - i < m^0.4``.

With these constants ``Petrov(m)`` fails for every word pair whenever
``2 <= m <= (4d(d-1))^4``: the first letter of ``a`` gives a unit window with
deviation ``1 - 1/d``, which is the small-window bound at that ``m``. Beyond
that, windows of length just above ``m^0.1`` keep failing far past any size
that can be simulated. The predicates here are exact; they do
not assume the conditions hold at any particular size.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .permcore import as_permutation, layer_decompose
from .words import LayeredWords

LARGE_EXP = 0.1
SMALL_EXP = 0.4
WINDOW_POWER = 0.6
SMALL_BOUND_POWER = 0.25
WEYL_SHIFT_POWER = 0.4

VARIANTS = ("CW", "CWminus", "CWplus", "CWplusplus", "SCWplusplus", "SCWminus")


@dataclass(frozen=True)
class LatticePath:
    """Points ``s(0) = 0, s(1), ..., s(n)`` of a path in the zero-sum lattice."""

    points: np.ndarray  # shape (n + 1, d), int64

    @property
    def n(self) -> int:
        return len(self.points) - 1

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __getitem__(self, t: int) -> np.ndarray:
        return self.points[t]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"x_{k}" for k in range(1, self.d + 1)])
        for t, row in enumerate(self.points):
            w.writerow([t] + [int(x) for x in row])
        return buf.getvalue()


@dataclass(frozen=True)
class ScaledPathFamily:
    """``d`` piecewise-linear functions on [0, 1], each an ordered breakpoint list."""

    breakpoints: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        for k, (ts, ys) in enumerate(self.breakpoints):
            if len(ts) != len(ys) or len(ts) < 2:
                raise ValueError(f"function {k + 1}: malformed breakpoint arrays")
            if np.any(np.diff(ts) <= 0):
                raise ValueError(f"function {k + 1}: abscissae not strictly increasing")

    @property
    def d(self) -> int:
        return len(self.breakpoints)

    def grid(self) -> np.ndarray:
        return np.unique(np.concatenate([ts for ts, _ in self.breakpoints]))

    def __call__(self, t) -> np.ndarray:
        """Values at ``t`` (scalar or array); result has a trailing axis of size d."""
        t = np.asarray(t, dtype=float)
        return np.stack([np.interp(t, ts, ys) for ts, ys in self.breakpoints], axis=-1)

    def to_csv(self) -> str:
        """Values of all ``d`` functions on the merged breakpoint grid."""
        ts = self.grid()
        vals = self(ts)
        lines = ["t," + ",".join(f"f_{k}" for k in range(1, self.d + 1))]
        for t, row in zip(ts, vals):
            lines.append(",".join(f"{x:.17g}" for x in (t, *row)))
        return "\n".join(lines) + "\n"


def path_from_words(omega: LayeredWords) -> LatticePath:
    """``s(m)`` has coordinate ``l`` equal to ``count_a^l(m) - count_b^l(m)``."""
    return LatticePath(np.ascontiguousarray((omega.count_a - omega.count_b).T))


def in_omega_n(omega: LayeredWords) -> bool:
    return bool(np.array_equal(omega.count_a[:, -1], omega.count_b[:, -1]))


def _check_zero_sum(x) -> np.ndarray:
    x = np.asarray(x)
    if x.sum() != 0:
        raise ValueError(f"point {x.tolist()} does not have zero coordinate sum")
    return x


def weyl_distance(x: Sequence[int]) -> int:
    """L1 distance from ``x`` to the integer chamber ``x_1 >= ... >= x_d``.

    Pool-adjacent-violators with block medians gives the nearest
    non-increasing vector in L1; with integer data a lower median is an
    integer, so the fit lies in the chamber.
    """
    x = [int(v) for v in _check_zero_sum(x)]
    blocks: list[list[int]] = []  # each block: sorted values
    fits: list[int] = []
    for v in x:
        blocks.append([v])
        fits.append(v)
        while len(blocks) > 1 and fits[-2] < fits[-1]:
            merged = sorted(blocks.pop() + blocks.pop())
            fits.pop()
            fits.pop()
            blocks.append(merged)
            fits.append(merged[(len(merged) - 1) // 2])
    return sum(abs(v - f) for block, f in zip(blocks, fits) for v in block)


def in_weyl_k(x: Sequence[int], k: float) -> bool:
    """``x_i >= x_{i+1} + k`` for every consecutive pair (``k`` may be negative)."""
    x = _check_zero_sum(x)
    return bool(np.all(x[:-1] - x[1:] >= k))


def _gap_ok(gaps: np.ndarray, k) -> np.ndarray:
    return np.all(gaps >= np.asarray(k)[..., None], axis=-1)


def _window_failure(g: np.ndarray, m: int, d: int, base: float) -> int | None:
    """Smallest window length violating a Petrov bound, or None.

    ``g`` holds ``count(t) - t/d`` over the allowed time range. Window
    exponents use ``base``. A window of length ``k + delta`` deviates by at
    most ``dev_k + delta * (1 - 1/d)``, which lets passing stretches of ``k``
    be skipped.
    """
    c = (2 * d) ** -2
    span = len(g) - 1
    lipschitz = max(1.0 / d, 1.0 - 1.0 / d)
    first_large = math.floor(base ** LARGE_EXP) + 1
    small_below = base ** SMALL_EXP
    small_bound = c * base ** SMALL_BOUND_POWER
    k = 1
    while k <= span:
        is_large = k >= first_large
        is_small = k < small_below
        if not (is_large or is_small):
            # lengths in [m^0.1, m^0.4] carry no condition
            k = first_large
            continue
        dev = float(np.max(np.abs(g[k:] - g[:-k])))
        slack = math.inf
        if is_large:
            bound = c * k ** WINDOW_POWER
            if dev >= bound:
                return k
            slack = bound - dev
        if is_small:
            if dev >= small_bound:
                return k
            slack = min(slack, small_bound - dev)
        # the large bound grows with k, so only its onset can tighten the constraint
        step = max(1, math.ceil(slack / lipschitz) - 1)
        if not is_large:
            step = min(step, first_large - k)
        k += step
    return None


def petrov_failure(omega: LayeredWords, m: int, lo: int = 0, base: float | None = None):
    """First violated window condition within ``[lo, m]`` as ``(word, letter, length)``."""
    if not 0 <= lo <= m <= omega.n:
        raise ValueError(f"malformed window [{lo}, {m}] for words of length {omega.n}")
    base = float(m) if base is None else float(base)
    t = np.arange(lo, m + 1) / omega.d
    for word, table in (("a", omega.count_a), ("b", omega.count_b)):
        for l in range(omega.d):
            g = table[l, lo : m + 1] - t
            k = _window_failure(g, m, omega.d, base)
            if k is not None:
                return word, l + 1, k
    return None


def petrov(omega: LayeredWords, m: int) -> bool:
    return petrov_failure(omega, m) is None


def petrov_star(omega: LayeredWords, m: int, n: int | None = None) -> bool:
    """``Petrov(m)`` for the reversal of the first ``n`` letters."""
    n = omega.n if n is None else n
    return petrov(omega.prefix(n).reversed(), m)


def _endpoint_ok(s: np.ndarray, t: int, v) -> bool:
    return v is None or np.array_equal(s[t], np.asarray(v))


@dataclass(frozen=True)
class ConeReport:
    variant: str
    window: tuple[int, int]
    holds: bool
    first_violation_time: int | None

    def to_json(self) -> str:
        return json.dumps(
            {
                "variant": self.variant,
                "window": list(self.window),
                "holds": self.holds,
                "first_violation_time": self.first_violation_time,
            }
        )


def _first_false(flags: np.ndarray, offset: int) -> int | None:
    bad = np.flatnonzero(~flags)
    return int(bad[0]) + offset if len(bad) else None


def _cw_minus_scan(omega, s, i, j, v, v2, base_mode):
    if not (_endpoint_ok(s, i, v) and _endpoint_ok(s, j, v2)):
        return i
    times = np.arange(i, j + 1)
    gaps = s[i : j + 1, :-1] - s[i : j + 1, 1:]
    bad = _first_false(_gap_ok(gaps, times ** WEYL_SHIFT_POWER), i)
    for m in range(i, j + 1):
        if bad is not None and m >= bad:
            return bad
        lo = min(i + 1, m)
        base = m if base_mode == "m" else j
        if petrov_failure(omega, m, lo=lo, base=base) is not None:
            return m
    return bad


def _cw_plusplus_scan(omega, s, i, j, v, v2, base_mode):
    if not (_endpoint_ok(s, i, v) and _endpoint_ok(s, j, v2)):
        return i
    for m in range(i, j + 1):
        gaps = s[m, :-1] - s[m, 1:]
        if np.all(gaps >= -(m ** WEYL_SHIFT_POWER)):
            continue
        base = m if base_mode == "m" else j
        if petrov_failure(omega, m, lo=i, base=base) is None:
            return m
    return None


def _scw_half_scan(omega, s, lo, hi, C, n):
    """First time in [lo, hi] where Petrov holds but the point is far from the chamber."""
    for t in range(lo, hi + 1):
        if weyl_distance(s[t]) <= C * t ** WEYL_SHIFT_POWER:
            continue
        if petrov_failure(omega, t) is None:
            return t
    return None


def cone_report(
    omega: LayeredWords,
    i: int,
    j: int,
    v=None,
    v2=None,
    variant: str = "CW",
    C: float = 1.0,
    base_mode: str = "m",
) -> ConeReport:
    """Evaluate one of the chamber predicates on the window ``[i, j]``.

    ``v`` and ``v2`` pin ``s(i)`` and ``s(j)``; ``None`` is the wildcard.
    For the symmetric variants the second half is checked on the time
    reversal, with ``s(t)`` read at reversed time ``n - t``.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if not 0 <= i <= j <= omega.n:
        raise ValueError(f"malformed window [{i}, {j}] for words of length {omega.n}")
    if base_mode not in ("m", "j"):
        raise ValueError("base_mode must be 'm' or 'j'")
    s = path_from_words(omega).points
    n = omega.n
    bad: int | None
    if variant == "CW":
        if not (_endpoint_ok(s, i, v) and _endpoint_ok(s, j, v2)):
            bad = i
        else:
            gaps = s[i : j + 1, :-1] - s[i : j + 1, 1:]
            bad = _first_false(_gap_ok(gaps, 0), i)
    elif variant == "CWplus":
        if not (_endpoint_ok(s, i, v) and _endpoint_ok(s, j, v2)):
            bad = i
        else:
            times = np.arange(i, j + 1)
            gaps = s[i : j + 1, :-1] - s[i : j + 1, 1:]
            bad = _first_false(_gap_ok(gaps, -(times ** WEYL_SHIFT_POWER)), i)
    elif variant == "CWminus":
        bad = _cw_minus_scan(omega, s, i, j, v, v2, base_mode)
    elif variant == "CWplusplus":
        bad = _cw_plusplus_scan(omega, s, i, j, v, v2, base_mode)
    else:
        half = n // 2
        rev = omega.reversed()
        s_rev = path_from_words(rev).points
        if not (_endpoint_ok(s, i, v) and _endpoint_ok(s, j, v2)):
            bad = i
        elif variant == "SCWplusplus":
            bad = _scw_half_scan(omega, s, i, min(half, j), C, n)
            if bad is None and j >= half:
                t_rev = _scw_half_scan(rev, s_rev, n - j, n - max(half, i), C, n)
                bad = None if t_rev is None else n - t_rev
        else:
            first = _cw_minus_scan(omega, s, i, max(i, half), v, None, base_mode)
            rv = None if v2 is None else np.asarray(v2) - s[n]
            second = _cw_minus_scan(rev, s_rev, n - j, max(n - j, half), rv, None, base_mode)
            bad = first if first is not None else (None if second is None else n - second)
    return ConeReport(variant, (i, j), bad is None, bad)


def cone_class(omega, i, j, v=None, v2=None, variant="CW", C=1.0, base_mode="m") -> bool:
    return cone_report(omega, i, j, v, v2, variant, C, base_mode).holds


def max_weyl_distance(path: LatticePath) -> int:
    return max(weyl_distance(p) for p in path.points)


def build_p_sigma(sigma, d: int) -> ScaledPathFamily:
    """Interpolate ``(i/(n+1), (sigma(i) - i)/sqrt(2dn))`` along each layer."""
    sigma = as_permutation(sigma)
    n = sigma.n
    dec = layer_decompose(sigma, d)
    values = np.asarray(sigma.values, dtype=float)
    scale = math.sqrt(2 * d * n)
    funcs = []
    for layer in dec.layers:
        idx = np.asarray(layer, dtype=np.int64)
        ts = np.concatenate([[0.0], idx / (n + 1), [1.0]])
        ys = np.concatenate([[0.0], (values[idx - 1] - idx) / scale, [0.0]])
        funcs.append((ts, ys))
    return ScaledPathFamily(tuple(funcs))


def build_s_hat(path: LatticePath) -> ScaledPathFamily:
    if np.any(path.points[-1] != 0):
        raise ValueError(f"path does not return to the origin: s(n) = {path.points[-1].tolist()}")
    n, d = path.n, path.d
    if n == 0:
        raise ValueError("empty path")
    ts = np.arange(n + 1) / n
    scaled = path.points / math.sqrt(2 * n / d)
    return ScaledPathFamily(tuple((ts, scaled[:, k].copy()) for k in range(d)))


def sup_distance(P: ScaledPathFamily, Q: ScaledPathFamily) -> float:
    """Supremum over t of the L1 distance; attained on the merged breakpoint grid."""
    if P.d != Q.d:
        raise ValueError(f"dimension mismatch: {P.d} vs {Q.d}")
    ts = np.union1d(P.grid(), Q.grid())
    return float(np.max(np.abs(P(ts) - Q(ts)).sum(axis=-1)))
