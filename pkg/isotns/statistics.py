"""
Streaming sample statistics and the chunked Monte Carlo pool.

Samples are split into fixed chunks. Each chunk is accumulated serially in sample
order and chunk results are merged in chunk order, so the merged statistics are
bit-identical for any number of workers.
"""
import logging
import multiprocessing
import os
from dataclasses import dataclass
from typing import Callable, Dict, Hashable, Iterator, List, Optional, Union

import numpy as np

from ._rate_limited_log import rate_limited_log

logger = logging.getLogger(__name__)

Value = Union[float, np.ndarray]

WORKERS_ENV = "ISOTNS_WORKERS"


@dataclass
class RunningMoments:
    """Welford accumulator for the count, mean and sum of squared deviations (M2)."""

    count: int = 0
    mean: Value = 0.0
    m2: Value = 0.0

    def add(self, x: Value) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (x - self.mean)

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        """Chan et al. pairwise combination; neither operand is modified."""
        if other.count == 0:
            return RunningMoments(self.count, self.mean, self.m2)
        if self.count == 0:
            return RunningMoments(other.count, other.mean, other.m2)
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / n)
        m2 = self.m2 + other.m2 + delta * delta * (self.count * other.count / n)
        return RunningMoments(n, mean, m2)

    @property
    def variance(self) -> Value:
        """Unbiased sample variance."""
        if self.count < 2:
            return np.nan * np.ones_like(self.mean) if isinstance(self.mean, np.ndarray) else float("nan")
        return self.m2 / (self.count - 1)

    @property
    def stderr(self) -> Value:
        return np.sqrt(self.variance / self.count) if self.count else float("nan")


Moments = Dict[Hashable, RunningMoments]
ChunkWorker = Callable[["Chunk"], Moments]


@dataclass(frozen=True)
class Chunk:
    index: int
    start: int
    stop: int

    def samples(self) -> range:
        return range(self.start, self.stop)


def chunk_ranges(n_samples: int, chunk_size: int) -> List[Chunk]:
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be positive, got {chunk_size}")
    return [
        Chunk(i, start, min(start + chunk_size, n_samples))
        for i, start in enumerate(range(0, n_samples, chunk_size))
    ]


def accumulate(values: Iterator[Dict[Hashable, Value]]) -> Moments:
    """Accumulate a stream of per-sample {position: value} dicts."""
    moments: Moments = {}
    for sample in values:
        for position, value in sample.items():
            moments.setdefault(position, RunningMoments()).add(value)
    return moments


def merge_moments(parts: List[Moments]) -> Moments:
    """Merge chunk results in list order."""
    merged: Moments = {}
    for part in parts:
        for position, m in part.items():
            merged[position] = merged.get(position, RunningMoments()).merge(m)
    return merged


def resolve_workers(workers: Optional[int] = None) -> int:
    """Explicit count, else ``ISOTNS_WORKERS``, else the CPU count."""
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def run_chunked(worker: ChunkWorker, n_samples: int, chunk_size: int = 100,
                workers: Optional[int] = None, label: str = "samples") -> Moments:
    """
    Evaluate ``worker`` over every chunk of ``range(n_samples)`` and merge the results.

    ``worker`` must be picklable when more than one worker process is used.
    """
    chunks = chunk_ranges(n_samples, chunk_size)
    workers = min(resolve_workers(workers), max(1, len(chunks)))
    parts: List[Moments] = []
    if workers == 1:
        results = map(worker, chunks)
        for chunk, part in zip(chunks, results):
            parts.append(part)
            _progress(label, chunk.stop, n_samples)
    else:
        with multiprocessing.Pool(processes=workers) as pool:
            for chunk, part in zip(chunks, pool.imap(worker, chunks)):
                parts.append(part)
                _progress(label, chunk.stop, n_samples)
    return merge_moments(parts)


def _progress(label: str, done: int, total: int) -> None:
    rate_limited_log(
        f"{label}: {done}/{total} done", level="info", interval=10,
        logger_instance=logger, key=f"progress:{label}",
    )
