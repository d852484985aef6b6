"""Chunked, seed-deterministic Monte Carlo driver.

Samples are split into fixed-size chunks; chunk ``j`` draws from the
substream ``SeedSequence(seed, spawn_key=(j,))``. Chunk boundaries never
depend on the worker count and results are reduced in chunk order, so any
estimate is bit-identical for every value of ``FBLRIS_THREADS``.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

CHUNK_SIZE = 8192
THREADS_ENV = "FBLRIS_THREADS"


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, min(os.cpu_count() or 1, 8))


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def chunk_sizes(samples: int, chunk_size: int = CHUNK_SIZE):
    full, rest = divmod(int(samples), chunk_size)
    sizes = [chunk_size] * full
    if rest:
        sizes.append(rest)
    return sizes


def map_chunks(fn, samples: int, seed: int, workers=None, chunk_size: int = CHUNK_SIZE):
    """Run ``fn(rng, size)`` over every chunk; results come back in chunk order."""
    sizes = chunk_sizes(samples, chunk_size)
    workers = worker_count() if workers is None else max(1, int(workers))

    def run(job):
        index, size = job
        return fn(chunk_rng(seed, index), size)

    jobs = list(enumerate(sizes))
    if workers == 1 or len(jobs) == 1:
        return [run(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))


@dataclass
class Moments:
    """Count, mean and sum of squared deviations (Chan et al. pairwise merge)."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, values: np.ndarray) -> "Moments":
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return cls()
        mean = float(np.mean(values))
        return cls(values.size, mean, float(np.sum((values - mean) ** 2)))

    def merge(self, other: "Moments") -> "Moments":
        if other.count == 0:
            return Moments(self.count, self.mean, self.m2)
        if self.count == 0:
            return Moments(other.count, other.mean, other.m2)
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return Moments(n, mean, m2)

    @property
    def variance(self) -> float:
        return self.m2 / self.count if self.count else float("nan")
