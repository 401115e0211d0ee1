"""Request arrival generators: Poisson, fixed-interval, and CSV trace replay.

All generators hand out gap-free request IDs starting at 1 and strictly
increasing arrival times.  Trace files are CSV with header
``time_s`` or ``time_s,service_demand_s``; a missing demand column means
the demand is drawn from the configured service distribution at dispatch.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

from .queue_model import Request
from .rng import Stream, sample_exponential

TRACE_HEADERS = (["time_s"], ["time_s", "service_demand_s"])


class TraceFormatError(ValueError):
    """A trace file row violated the schema."""


@dataclass(frozen=True)
class WorkloadSpec:
    """Declarative description of an arrival process.

    limit is the number of requests to emit; None means unbounded (the
    simulation horizon must bound the run instead).
    """

    kind: str  # "poisson" | "deterministic" | "trace"
    mean_interarrival: float = 1.0
    interval: float = 1.0
    path: Optional[str] = None
    limit: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("poisson", "deterministic", "trace"):
            raise ValueError(f"unknown workload kind {self.kind!r}")
        if self.kind == "poisson" and not self.mean_interarrival > 0:
            raise ValueError("mean_interarrival must be > 0")
        if self.kind == "deterministic" and not self.interval > 0:
            raise ValueError("interval must be > 0")
        if self.kind == "trace" and not self.path:
            raise ValueError("trace workload needs a path")
        if self.limit is not None and self.limit < 0:
            raise ValueError("limit must be >= 0")


class PoissonArrivals:
    """Exponentially distributed inter-arrival times."""

    def __init__(self, mean_interarrival: float, limit: Optional[int] = None):
        self.mean_interarrival = mean_interarrival
        self.limit = limit
        self._time = 0.0
        self._next_id = 1

    def next_arrival(self, stream: Stream) -> Optional[Request]:
        if self.limit is not None and self._next_id > self.limit:
            return None
        self._time += sample_exponential(stream, self.mean_interarrival)
        request = Request(self._next_id, self._time)
        self._next_id += 1
        return request


class DeterministicArrivals:
    """One request every `interval` seconds."""

    def __init__(self, interval: float, limit: Optional[int] = None):
        self.interval = interval
        self.limit = limit
        self._time = 0.0
        self._next_id = 1

    def next_arrival(self, stream: Stream) -> Optional[Request]:
        if self.limit is not None and self._next_id > self.limit:
            return None
        self._time += self.interval
        request = Request(self._next_id, self._time)
        self._next_id += 1
        return request


class TraceArrivals:
    """Replays (time, demand) rows loaded from a trace file."""

    def __init__(self, rows: list[tuple[float, Optional[float]]], limit: Optional[int] = None):
        if limit is not None:
            rows = rows[:limit]
        self.rows = rows
        self._next_id = 1

    def next_arrival(self, stream: Stream) -> Optional[Request]:
        if self._next_id > len(self.rows):
            return None
        time, demand = self.rows[self._next_id - 1]
        request = Request(self._next_id, time, demand)
        self._next_id += 1
        return request


def load_trace(path: str) -> list[tuple[float, Optional[float]]]:
    """Parse a trace CSV; rejects bad rows with their row number."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceFormatError("empty trace file") from None
        if header not in [list(h) for h in TRACE_HEADERS]:
            raise TraceFormatError(
                f"bad trace header {header!r}; expected time_s[,service_demand_s]"
            )
        has_demand = len(header) == 2
        rows: list[tuple[float, Optional[float]]] = []
        prev_time = -math.inf
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise TraceFormatError(f"row {lineno}: expected {len(header)} columns")
            try:
                time = float(row[0])
                demand = float(row[1]) if has_demand and row[1] != "" else None
            except ValueError:
                raise TraceFormatError(f"row {lineno}: not a number: {row!r}") from None
            if not math.isfinite(time) or time < 0:
                raise TraceFormatError(f"row {lineno}: bad time {time!r}")
            if time <= prev_time:
                raise TraceFormatError(
                    f"row {lineno}: times must strictly increase ({time} after {prev_time})"
                )
            if demand is not None and not (math.isfinite(demand) and demand > 0):
                raise TraceFormatError(f"row {lineno}: bad service demand {demand!r}")
            rows.append((time, demand))
            prev_time = time
    return rows


def build_arrivals(spec: WorkloadSpec):
    """Instantiate the generator described by `spec`."""
    if spec.kind == "poisson":
        return PoissonArrivals(spec.mean_interarrival, spec.limit)
    if spec.kind == "deterministic":
        return DeterministicArrivals(spec.interval, spec.limit)
    return TraceArrivals(load_trace(spec.path), spec.limit)
