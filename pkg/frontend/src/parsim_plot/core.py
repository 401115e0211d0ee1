"""Reading and smoothing of the simulator's sample CSV.

The file contract is the exact header below; anything else is rejected
naming the first offending column.
"""

from __future__ import annotations

from dataclasses import dataclass

EXPECTED_HEADER = ["time_s", "w", "error", "p", "p_wanted", "p_out", "trigger"]


class SchemaError(ValueError):
    """The input file does not match the samples CSV schema."""


@dataclass
class Samples:
    time_s: list[float]
    w: list[float]
    p: list[float]

    def __len__(self) -> int:
        return len(self.time_s)


def _check_header(columns: list[str]) -> None:
    for i, expected in enumerate(EXPECTED_HEADER):
        if i >= len(columns):
            raise SchemaError(f"missing column {expected!r}")
        if columns[i] != expected:
            raise SchemaError(
                f"unexpected column {columns[i]!r} where {expected!r} belongs"
            )
    if len(columns) > len(EXPECTED_HEADER):
        raise SchemaError(f"unexpected extra column {columns[len(EXPECTED_HEADER)]!r}")


def read_samples(path) -> Samples:
    """Load the time, queue-length and pool-size columns."""
    times: list[float] = []
    w: list[float] = []
    p: list[float] = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        _check_header(header.split(","))
        for lineno, line in enumerate(fh, start=2):
            fields = line.rstrip("\n").split(",")
            if len(fields) != len(EXPECTED_HEADER):
                raise SchemaError(f"row {lineno}: expected {len(EXPECTED_HEADER)} fields")
            try:
                times.append(float(fields[0]))
                w.append(float(fields[1]))
                p.append(float(fields[3]))
            except ValueError:
                raise SchemaError(f"row {lineno}: not a number: {line.rstrip()!r}") from None
    return Samples(times, w, p)


def moving_average(values: list[float], window: int) -> list[float]:
    """Trailing mean over `window` samples; leading elements use what exists."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    out = []
    for i in range(len(values)):
        lo = i - window + 1
        if lo < 0:
            lo = 0
        span = values[lo : i + 1]
        out.append(sum(span) / len(span))
    return out
