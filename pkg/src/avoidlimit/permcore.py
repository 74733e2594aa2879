"""Permutations avoiding a decreasing pattern, their layers and word encodings."""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .words import LayeredWords

BRUTE_FORCE_LIMIT = 10


@dataclass(frozen=True)
class Permutation:
    """A permutation of ``{1, ..., n}`` in one-line notation."""

    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if sorted(vals) != list(range(1, len(vals) + 1)):
            raise ValueError(f"not a permutation of 1..{len(vals)}: {vals[:20]}")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def inverse(self) -> Permutation:
        inv = [0] * self.n
        for i, v in enumerate(self.values, start=1):
            inv[v - 1] = i
        return Permutation(tuple(inv))

    def to_text(self) -> str:
        return " ".join(map(str, self.values))

    @classmethod
    def from_text(cls, line: str) -> Permutation:
        return cls(tuple(int(tok) for tok in line.split()))

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(1, n + 1)))


def as_permutation(sigma: Permutation | Sequence[int]) -> Permutation:
    return sigma if isinstance(sigma, Permutation) else Permutation(tuple(sigma))


@dataclass(frozen=True)
class LayerDecomposition:
    """Index sets ``A^1, ..., A^d`` (1-based positions, increasing) of a permutation."""

    sigma: Permutation
    layers: tuple[tuple[int, ...], ...]

    @property
    def d(self) -> int:
        return len(self.layers)

    def points(self, layer: int) -> list[tuple[int, int]]:
        """The sequence ``alpha^layer`` of points ``(i, sigma(i))``."""
        return [(i, self.sigma[i - 1]) for i in self.layers[layer - 1]]

    @property
    def nonempty(self) -> int:
        return sum(1 for layer in self.layers if layer)


@dataclass(frozen=True)
class LabelMatrix:
    """Sparse ``n x n`` matrix with labels in ``[d]`` on the graph of a permutation."""

    n: int
    entries: dict  # (position, value) -> label

    def __getitem__(self, key) -> int:
        return self.entries.get(key, 0)


def longest_decreasing(values: Iterable[int]) -> int:
    """Length of the longest strictly decreasing subsequence (patience sorting)."""
    tails: list[int] = []
    for v in values:
        k = bisect.bisect_left(tails, -v)
        if k == len(tails):
            tails.append(-v)
        else:
            tails[k] = -v
    return len(tails)


def contains_pattern(sigma, rho) -> bool:
    sigma = as_permutation(sigma)
    rho = as_permutation(rho)
    k = rho.n
    if k > sigma.n:
        raise ValueError(f"pattern of length {k} is longer than the permutation ({sigma.n})")
    if rho.values == tuple(range(k, 0, -1)):
        return longest_decreasing(sigma.values) >= k
    order = sorted(range(k), key=lambda r: rho[r])
    for idx in itertools.combinations(range(sigma.n), k):
        sub = [sigma[i] for i in idx]
        if all(sub[order[r]] < sub[order[r + 1]] for r in range(k - 1)):
            return True
    return False


def avoids(sigma, d: int) -> bool:
    """True iff ``sigma`` avoids the decreasing pattern of length ``d + 1``."""
    return longest_decreasing(as_permutation(sigma).values) <= d


def all_permutations_array(n: int) -> np.ndarray:
    """Every permutation of ``[n]`` as rows of an ``(n!, n)`` array, lexicographic order."""
    perms = np.zeros((1, 0), dtype=np.int8)
    for m in range(1, n + 1):
        # prepend a first value v; the rest are perms of m-1 relabelled to skip v
        blocks = []
        for v in range(1, m + 1):
            rest = perms + (perms >= v)
            first = np.full((len(perms), 1), v, dtype=np.int8)
            blocks.append(np.hstack([first, rest.astype(np.int8)]))
        perms = np.vstack(blocks)
    return perms


def _layer_counts(perms: np.ndarray) -> np.ndarray:
    """Number of layers (= longest decreasing length) for each row."""
    rows, n = perms.shape
    # running maxima of the peeled layers; decreasing along axis 1
    maxima = np.zeros((rows, n + 1), dtype=np.int16)
    depth = np.zeros(rows, dtype=np.int16)
    for col in range(n):
        v = perms[:, col].astype(np.int16)[:, None]
        layer = (maxima[:, :n] > v).sum(axis=1)
        maxima[np.arange(rows), layer] = v[:, 0]
        depth = np.maximum(depth, layer + 1)
    return depth


def enumerate_avoiders(n: int, d: int, limit: int = BRUTE_FORCE_LIMIT) -> list[Permutation]:
    """All of ``Av_n(rho_d)`` by brute force over ``S_n``, in lexicographic order."""
    if n > limit:
        raise ValueError(f"refusing to enumerate S_{n}: n exceeds the brute-force limit {limit}")
    if n == 0:
        return [Permutation(())]
    perms = all_permutations_array(n)
    keep = _layer_counts(perms) <= d
    return [Permutation(tuple(int(x) for x in row)) for row in perms[keep]]


def count_avoiders_brute(n: int, d: int, limit: int = BRUTE_FORCE_LIMIT) -> int:
    if n > limit:
        raise ValueError(f"refusing to enumerate S_{n}: n exceeds the brute-force limit {limit}")
    if n == 0:
        return 1
    return int((_layer_counts(all_permutations_array(n)) <= d).sum())


def catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def layer_labels(sigma, d: int | None = None) -> list[int]:
    """Layer label of every position, by iterated left-to-right-maxima peeling.

    A position joins the first layer whose running maximum it exceeds; the
    running maxima are decreasing in the layer index, so a bisection finds it.
    """
    sigma = as_permutation(sigma)
    neg_maxima: list[int] = []  # -max of layer l, increasing in l
    labels = []
    for i, v in enumerate(sigma.values, start=1):
        layer = bisect.bisect_right(neg_maxima, -v)
        if layer == len(neg_maxima):
            if d is not None and layer >= d:
                raise ValueError(
                    f"position {i} (value {v}) needs layer {layer + 1} > d = {d}; "
                    "the permutation contains the decreasing pattern of length d+1"
                )
            neg_maxima.append(-v)
        else:
            neg_maxima[layer] = -v
        labels.append(layer + 1)
    return labels


def layer_decompose(sigma, d: int | None = None) -> LayerDecomposition:
    sigma = as_permutation(sigma)
    labels = layer_labels(sigma, d)
    width = d if d is not None else max(labels, default=0)
    layers: list[list[int]] = [[] for _ in range(width)]
    for i, lab in enumerate(labels, start=1):
        layers[lab - 1].append(i)
    return LayerDecomposition(sigma, tuple(tuple(layer) for layer in layers))


def words_from_perm(sigma, d: int) -> LayeredWords:
    sigma = as_permutation(sigma)
    a = layer_labels(sigma, d)
    b = [0] * sigma.n
    for i, v in enumerate(sigma.values):
        b[v - 1] = a[i]
    return LayeredWords(tuple(a), tuple(b), d)


def _check_omega(omega: LayeredWords) -> None:
    ends_a = omega.count_a[:, -1]
    ends_b = omega.count_b[:, -1]
    if not np.array_equal(ends_a, ends_b):
        bad = [l + 1 for l in np.flatnonzero(ends_a != ends_b)]
        raise ValueError(f"words are not in Omega_n: letter counts differ for letters {bad}")


def _matched_pairs(omega: LayeredWords):
    """Yield ``(position, value, label)`` pairing t-th occurrences of each letter."""
    for l in range(omega.d):
        for i, j in zip(omega.positions_a[l], omega.positions_b[l]):
            yield int(i), int(j), l + 1


def perm_from_words(omega: LayeredWords) -> Permutation:
    _check_omega(omega)
    values = [0] * omega.n
    for i, j, _ in _matched_pairs(omega):
        values[i - 1] = j
    return Permutation(tuple(values))


def label_matrix(omega: LayeredWords) -> LabelMatrix:
    _check_omega(omega)
    return LabelMatrix(omega.n, {(i, j): lab for i, j, lab in _matched_pairs(omega)})


def is_proper(omega: LayeredWords) -> bool:
    """Check both properness conditions for every labelled entry.

    An entry ``(i, j)`` labelled ``l`` needs, for each smaller label, some entry
    with that label strictly left (``i' < i``) and above (``j' > j``), and no
    entry labelled ``>= l`` strictly left and above.
    """
    mat = label_matrix(omega)
    # best[l] = largest value among entries with label l seen so far (to the left)
    best = [0] * (omega.d + 1)
    for (i, j), lab in sorted(mat.entries.items()):
        for lower in range(1, lab):
            if best[lower] <= j:
                return False
        for higher in range(lab, omega.d + 1):
            if best[higher] > j:
                return False
        best[lab] = max(best[lab], j)
    return True
