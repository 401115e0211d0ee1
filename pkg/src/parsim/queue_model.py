"""FIFO request queue with gap-free monotonic IDs.

The queue length is the difference between the ID of the newest arrived
request and the ID of the last dequeued one; consecutive IDs keep that
difference equal to the physical backlog at all times.  IDs start at 1 and
0 stands for "none yet".
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional


class IdSequenceError(ValueError):
    """An enqueued request broke the consecutive-ID contract."""


@dataclass
class Request:
    """One user service request.

    service_demand is the processing time in seconds; None means it is
    drawn from the configured service distribution at dispatch time.
    """

    id: int
    arrival_time: float
    service_demand: Optional[float] = None

    def __post_init__(self):
        if self.id < 1:
            raise ValueError(f"request ids start at 1, got {self.id}")
        if self.service_demand is not None:
            if not (math.isfinite(self.service_demand) and self.service_demand > 0):
                raise ValueError(
                    f"service_demand must be > 0, got {self.service_demand!r}"
                )


class RequestQueue:
    """FIFO queue whose length doubles as an ID-difference counter."""

    __slots__ = ("last_arrived_id", "last_dequeued_id", "_pending")

    def __init__(self):
        self.last_arrived_id = 0
        self.last_dequeued_id = 0
        self._pending: deque[Request] = deque()

    def enqueue(self, request: Request) -> None:
        expected = self.last_arrived_id + 1
        if request.id != expected:
            raise IdSequenceError(
                f"expected request id {expected}, got {request.id}"
            )
        self._pending.append(request)
        self.last_arrived_id = request.id

    def dequeue(self) -> Optional[Request]:
        """Remove and return the oldest pending request, or None when empty."""
        if not self._pending:
            return None
        request = self._pending.popleft()
        self.last_dequeued_id = request.id
        return request

    def __len__(self) -> int:
        return self.last_arrived_id - self.last_dequeued_id

    @property
    def length(self) -> int:
        """W(t): newest arrived ID minus last dequeued ID."""
        return self.last_arrived_id - self.last_dequeued_id
