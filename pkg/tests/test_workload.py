"""Arrival generators: spacing, IDs, trace parsing."""

import pytest

from parsim.rng import ARRIVAL_STREAM, derive_stream
from parsim.workload import (
    TraceFormatError,
    WorkloadSpec,
    build_arrivals,
    load_trace,
)


def drain(generator, stream, cap=10_000_000):
    out = []
    while len(out) < cap:
        r = generator.next_arrival(stream)
        if r is None:
            break
        out.append(r)
    return out


class TestDeterministic:
    def test_arithmetic_sequence(self):
        gen = build_arrivals(WorkloadSpec("deterministic", interval=2.0, limit=3))
        stream = derive_stream(0, ARRIVAL_STREAM)
        requests = drain(gen, stream)
        assert [r.arrival_time for r in requests] == [2.0, 4.0, 6.0]
        assert [r.id for r in requests] == [1, 2, 3]


class TestPoisson:
    def test_empirical_mean_interarrival(self):
        # 3 sigma for 1e6 gaps at mean 1: 3 / 1000 = 0.003
        gen = build_arrivals(WorkloadSpec("poisson", mean_interarrival=1.0, limit=1_000_000))
        stream = derive_stream(99, ARRIVAL_STREAM)
        last = drain(gen, stream)[-1]
        assert last.id == 1_000_000
        assert abs(last.arrival_time / last.id - 1.0) <= 0.003

    def test_strictly_increasing_and_gap_free(self):
        gen = build_arrivals(WorkloadSpec("poisson", mean_interarrival=0.5, limit=5000))
        stream = derive_stream(3, ARRIVAL_STREAM)
        requests = drain(gen, stream)
        assert [r.id for r in requests] == list(range(1, 5001))
        assert all(a.arrival_time < b.arrival_time for a, b in zip(requests, requests[1:]))

    def test_limit_zero_is_empty(self):
        gen = build_arrivals(WorkloadSpec("poisson", mean_interarrival=1.0, limit=0))
        assert gen.next_arrival(derive_stream(0, ARRIVAL_STREAM)) is None


class TestTrace:
    def test_replay_is_exact(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("time_s\n0.5\n1.2\n3.0\n", encoding="utf-8")
        gen = build_arrivals(WorkloadSpec("trace", path=str(path)))
        stream = derive_stream(0, ARRIVAL_STREAM)
        requests = drain(gen, stream)
        assert [(r.id, r.arrival_time) for r in requests] == [
            (1, 0.5), (2, 1.2), (3, 3.0),
        ]
        assert all(r.service_demand is None for r in requests)

    def test_demand_column(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text(
            "time_s,service_demand_s\n0.5,2.0\n1.2,0.75\n", encoding="utf-8"
        )
        rows = load_trace(str(path))
        assert rows == [(0.5, 2.0), (1.2, 0.75)]

    def test_malformed_row_reports_line_number(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("time_s\n0.5\nnot_a_number\n", encoding="utf-8")
        with pytest.raises(TraceFormatError, match="row 3"):
            load_trace(str(path))

    def test_non_increasing_times_rejected(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("time_s\n1.0\n1.0\n", encoding="utf-8")
        with pytest.raises(TraceFormatError, match="row 3"):
            load_trace(str(path))

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("when\n1.0\n", encoding="utf-8")
        with pytest.raises(TraceFormatError, match="header"):
            load_trace(str(path))

    def test_non_positive_demand_rejected(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("time_s,service_demand_s\n1.0,0.0\n", encoding="utf-8")
        with pytest.raises(TraceFormatError, match="row 2"):
            load_trace(str(path))


class TestSpecValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            WorkloadSpec("bursty")

    def test_trace_needs_path(self):
        with pytest.raises(ValueError):
            WorkloadSpec("trace")

    def test_positive_interval(self):
        with pytest.raises(ValueError):
            WorkloadSpec("deterministic", interval=0.0)
