"""
Tests for streaming moments and the chunked Monte Carlo pool.
"""
import functools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isotns.statistics import (
    Chunk,
    RunningMoments,
    accumulate,
    chunk_ranges,
    merge_moments,
    resolve_workers,
    run_chunked,
)

values_strategy = st.lists(
    st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False),
    min_size=2, max_size=60,
)


def _square_chunk(offset: float, chunk: Chunk):
    """Picklable worker: one position holding (s + offset)^2 for every sample s."""
    return accumulate({0: float((s + offset) ** 2)} for s in chunk.samples())


class TestRunningMoments:
    """Tests for the Welford accumulator and its pairwise merge."""

    @settings(max_examples=50)
    @given(values=values_strategy)
    def test_matches_numpy(self, values):
        m = RunningMoments()
        for v in values:
            m.add(v)
        assert m.count == len(values)
        assert m.mean == pytest.approx(np.mean(values), abs=1e-9)
        assert m.variance == pytest.approx(np.var(values, ddof=1), rel=1e-7, abs=1e-6)

    @settings(max_examples=50)
    @given(values=values_strategy, split=st.integers(min_value=0, max_value=60))
    def test_merge_equals_serial(self, values, split):
        split = min(split, len(values))
        serial, left, right = RunningMoments(), RunningMoments(), RunningMoments()
        for v in values:
            serial.add(v)
        for v in values[:split]:
            left.add(v)
        for v in values[split:]:
            right.add(v)
        merged = left.merge(right)
        assert merged.count == serial.count
        assert merged.mean == pytest.approx(serial.mean, abs=1e-9)
        assert merged.m2 == pytest.approx(serial.m2, rel=1e-7, abs=1e-6)

    def test_merge_leaves_operands(self):
        a, b = RunningMoments(), RunningMoments()
        a.add(1.0)
        b.add(3.0)
        merged = a.merge(b)
        assert (a.count, b.count, merged.count) == (1, 1, 2)
        assert merged.mean == 2.0

    def test_stderr(self):
        m = RunningMoments()
        for v in (1.0, 2.0, 3.0, 4.0):
            m.add(v)
        assert m.stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)

    def test_single_sample_has_no_spread(self):
        m = RunningMoments()
        m.add(5.0)
        assert np.isnan(m.variance)

    def test_array_values(self):
        m = RunningMoments()
        for v in ([1.0, 0.0], [3.0, 2.0], [5.0, 4.0]):
            m.add(np.array(v))
        np.testing.assert_allclose(m.mean, [3.0, 2.0])
        np.testing.assert_allclose(m.variance, [4.0, 4.0])


class TestChunking:
    """Tests for chunk_ranges, accumulate and merge_moments."""

    def test_chunk_ranges(self):
        chunks = chunk_ranges(10, 4)
        assert [(c.index, c.start, c.stop) for c in chunks] == [(0, 0, 4), (1, 4, 8), (2, 8, 10)]
        assert list(chunks[2].samples()) == [8, 9]

    def test_invalid_chunk_size(self):
        with pytest.raises(ValueError):
            chunk_ranges(10, 0)

    def test_merge_by_position(self):
        parts = [accumulate(iter([{1: 1.0, 2: 10.0}])), accumulate(iter([{1: 3.0}]))]
        merged = merge_moments(parts)
        assert merged[1].count == 2
        assert merged[1].mean == 2.0
        assert merged[2].count == 1


class TestPool:
    """Tests for resolve_workers and run_chunked."""

    def test_explicit_workers_win(self, monkeypatch):
        monkeypatch.setenv("ISOTNS_WORKERS", "3")
        assert resolve_workers(5) == 5
        assert resolve_workers() == 3

    def test_cpu_count_fallback(self, monkeypatch):
        monkeypatch.delenv("ISOTNS_WORKERS", raising=False)
        monkeypatch.setattr("os.cpu_count", lambda: 6)
        assert resolve_workers() == 6

    def test_serial_run(self):
        moments = run_chunked(functools.partial(_square_chunk, 0.5), 25, chunk_size=4, workers=1)
        expected = [(s + 0.5) ** 2 for s in range(25)]
        assert moments[0].count == 25
        assert moments[0].mean == pytest.approx(np.mean(expected), rel=1e-12)

    def test_result_independent_of_chunk_count(self):
        a = run_chunked(functools.partial(_square_chunk, 0.0), 30, chunk_size=7, workers=1)
        b = run_chunked(functools.partial(_square_chunk, 0.0), 30, chunk_size=30, workers=1)
        assert a[0].mean == pytest.approx(b[0].mean, rel=1e-12)
        assert a[0].m2 == pytest.approx(b[0].m2, rel=1e-12)

    def test_process_pool_matches_serial(self):
        """Chunks are merged in order, so the pool reproduces the serial result exactly."""
        serial = run_chunked(functools.partial(_square_chunk, 0.25), 40, chunk_size=6, workers=1)
        pooled = run_chunked(functools.partial(_square_chunk, 0.25), 40, chunk_size=6, workers=2)
        assert pooled[0].count == serial[0].count == 40
        assert pooled[0].mean == serial[0].mean
        assert pooled[0].m2 == serial[0].m2
