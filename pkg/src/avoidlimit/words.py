"""Pairs of words over [d] and their letter-occurrence tables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class LayeredWords:
    """A pair ``omega = (a, b)`` of words in ``[d]^n``.

    ``count_a[l-1, m]`` is the number of occurrences of letter ``l`` among
    ``a(1..m)``; ``positions_a[l-1]`` lists the (1-based) positions of the
    occurrences of ``l`` in ``a``. Same for ``b``.
    """

    a: tuple[int, ...]
    b: tuple[int, ...]
    d: int
    count_a: np.ndarray = field(init=False, repr=False, compare=False)
    count_b: np.ndarray = field(init=False, repr=False, compare=False)
    positions_a: tuple[np.ndarray, ...] = field(init=False, repr=False, compare=False)
    positions_b: tuple[np.ndarray, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = tuple(int(x) for x in self.a)
        b = tuple(int(x) for x in self.b)
        if len(a) != len(b):
            raise ValueError(f"words have different lengths {len(a)} and {len(b)}")
        if self.d < 1:
            raise ValueError(f"alphabet size must be positive, got {self.d}")
        for name, w in (("a", a), ("b", b)):
            bad = [x for x in w if not 1 <= x <= self.d]
            if bad:
                raise ValueError(f"word {name} has letters outside [1, {self.d}]: {bad[:5]}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        for name, w in (("a", a), ("b", b)):
            arr = np.asarray(w, dtype=np.int64)
            onehot = arr[None, :] == np.arange(1, self.d + 1)[:, None]
            counts = np.zeros((self.d, len(w) + 1), dtype=np.int64)
            np.cumsum(onehot, axis=1, out=counts[:, 1:])
            counts.setflags(write=False)
            positions = tuple(np.flatnonzero(row) + 1 for row in onehot)
            for p in positions:
                p.setflags(write=False)
            object.__setattr__(self, f"count_{name}", counts)
            object.__setattr__(self, f"positions_{name}", positions)

    @property
    def n(self) -> int:
        return len(self.a)

    def count(self, word: str, letter: int, m: int) -> int:
        table = self.count_a if word == "a" else self.count_b
        return int(table[letter - 1, m])

    def pos(self, word: str, letter: int, t: int) -> int:
        """Position of the ``t``-th occurrence of ``letter``; ``n`` past the last one."""
        if t <= 0:
            return 0
        occ = (self.positions_a if word == "a" else self.positions_b)[letter - 1]
        return int(occ[t - 1]) if t <= len(occ) else self.n

    def reversed(self) -> LayeredWords:
        """Time reversal with the two words exchanged.

        The exchange makes the lattice path of the result equal to
        ``s(n - t) - s(n)``, i.e. the reversed path for bridges.
        """
        return LayeredWords(self.b[::-1], self.a[::-1], self.d)

    def prefix(self, m: int) -> LayeredWords:
        return LayeredWords(self.a[:m], self.b[:m], self.d)

    def to_text(self) -> str:
        if self.d > 9:
            raise ValueError("digit-string serialization needs d <= 9")
        return "".join(map(str, self.a)) + "," + "".join(map(str, self.b))

    @classmethod
    def from_text(cls, text: str, d: int) -> LayeredWords:
        left, right = text.strip().split(",")
        return cls(tuple(int(c) for c in left), tuple(int(c) for c in right), d)
