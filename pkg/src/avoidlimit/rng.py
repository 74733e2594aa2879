"""Seeded random streams and deterministic replica fan-out."""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")

MASK64 = (1 << 64) - 1


@dataclass
class SeededRng:
    """A reproducible stream: identical ``(seed, stream)`` gives identical draws.

    ``gen`` is a numpy Generator for vectorized draws; ``py`` is a
    ``random.Random`` derived from the same stream for scalar hot loops and
    exact big-integer ``randrange``.
    """

    seed: int
    stream: int = 0
    gen: np.random.Generator = field(init=False, repr=False)
    py: random.Random = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if not 0 <= v <= MASK64:
                raise ValueError(f"{name} must fit in 64 unsigned bits, got {v}")
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        self.gen = np.random.Generator(np.random.PCG64(ss))
        words = ss.generate_state(4, dtype=np.uint64)
        self.py = random.Random(int.from_bytes(words.tobytes(), "little"))

    def child(self, stream: int) -> SeededRng:
        return SeededRng(self.seed, stream)


def _call(job):
    fn, seed, stream = job
    return fn(SeededRng(seed, stream))


def run_replicas(
    fn: Callable[[SeededRng], T],
    replicas: int,
    seed: int,
    workers: int = 1,
    first_stream: int = 0,
) -> list[T]:
    """Run ``fn`` once per replica, replica ``k`` on stream ``first_stream + k``.

    Results come back in stream order, so output is independent of
    ``workers``. With ``workers > 1`` ``fn`` must be picklable.
    """
    if replicas < 1:
        raise ValueError("replicas must be at least 1")
    jobs = [(fn, seed, first_stream + k) for k in range(replicas)]
    if workers <= 1:
        return [_call(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_call, jobs, chunksize=max(1, replicas // (4 * workers))))
