"""Scaling state machine driven by arrival and pull notifications.

Workers are created only on the arrival path, as many at once as the
control law asks for; they are destroyed only on the pull path, at most one
per pull, and only while idle.  A worker that finds the queue empty parks
idle and is offered the next arriving request directly, before the queue
length is sampled for the controller.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional, Union

from .control import (
    ControlTarget,
    PidGains,
    PidState,
    compute_error,
    pid_step,
    wanted_pool,
)
from .queue_model import Request, RequestQueue

TRIGGER_ARRIVAL = 0
TRIGGER_PULL = 1


class ProtocolError(RuntimeError):
    """A pull arrived from a worker that cannot legally pull."""


class WorkerState(enum.Enum):
    STARTING = "starting"
    IDLE = "idle"
    BUSY = "busy"


@dataclass
class Worker:
    id: int
    state: WorkerState
    started_at: float
    busy_until: Optional[float] = None
    request_id: Optional[int] = None


@dataclass(frozen=True)
class CreateWorkers:
    time: float
    count: int
    worker_ids: tuple[int, ...]


@dataclass(frozen=True)
class DestroyWorker:
    time: float
    worker_id: int


@dataclass(frozen=True)
class Dispatch:
    time: float
    request_id: int
    worker_id: int
    service_demand: float


@dataclass(frozen=True)
class NoOp:
    time: float


ScaleAction = Union[CreateWorkers, DestroyWorker, Dispatch, NoOp]

# record_sample(time, w, error, p, p_wanted, p_out, trigger)
SampleSink = Callable[[float, int, float, int, int, float, int], None]


class Pool:
    """The set of deployed workers; P(t) counts starting, idle and busy."""

    __slots__ = ("workers", "next_worker_id", "p_wanted", "parked")

    def __init__(self):
        self.workers: dict[int, Worker] = {}
        self.next_worker_id = 1
        self.p_wanted = 0
        self.parked: deque[int] = deque()

    @property
    def size(self) -> int:
        return len(self.workers)

    def add_initial(self, count: int) -> None:
        """Pre-provisioned workers: idle and parked at time zero."""
        for _ in range(count):
            wid = self.next_worker_id
            self.next_worker_id += 1
            self.workers[wid] = Worker(wid, WorkerState.IDLE, 0.0)
            self.parked.append(wid)
        self.p_wanted = self.size

    def create(self, count: int, now: float) -> tuple[int, ...]:
        ids = []
        for _ in range(count):
            wid = self.next_worker_id
            self.next_worker_id += 1
            self.workers[wid] = Worker(wid, WorkerState.STARTING, now)
            ids.append(wid)
        return tuple(ids)

    def remove(self, worker_id: int) -> None:
        del self.workers[worker_id]


class Orchestrator:
    """Sequential event handler: one arrival or pull at a time."""

    def __init__(
        self,
        queue: RequestQueue,
        pool: Pool,
        gains: PidGains,
        target: ControlTarget,
        *,
        pid_enabled: bool = True,
        draw_demand: Callable[[], float],
        record_sample: SampleSink,
    ):
        self.queue = queue
        self.pool = pool
        self.gains = gains
        self.target = target
        self.pid_enabled = pid_enabled
        self.draw_demand = draw_demand
        self.record_sample = record_sample
        self.pid = PidState()

    def _evaluate(self, now: float, trigger: int) -> int:
        """Sample the queue, advance the PID, record, return wanted size."""
        w = self.queue.length
        error = compute_error(w, self.target, self.gains)
        p = self.pool.size
        if self.pid_enabled:
            self.pid, p_out = pid_step(self.pid, self.gains, error, now)
            p_w = wanted_pool(p, p_out, self.target)
        else:
            p_out = 0.0
            p_w = p
        self.pool.p_wanted = p_w
        self.record_sample(now, w, error, p, p_w, p_out, trigger)
        return p_w

    def _dispatch(self, worker: Worker, now: float) -> Dispatch:
        request = self.queue.dequeue()
        demand = request.service_demand
        if demand is None:
            demand = self.draw_demand()
        worker.state = WorkerState.BUSY
        worker.busy_until = now + demand
        worker.request_id = request.id
        return Dispatch(now, request.id, worker.id, demand)

    def on_arrival(self, now: float) -> list[ScaleAction]:
        """Handle the notification for a request that is already enqueued."""
        actions: list[ScaleAction] = []

        # Parked idle workers take the new request before the controller
        # measures the queue, so W only counts requests that truly wait.
        while self.pool.parked and self.queue.length > 0:
            wid = self.pool.parked.popleft()
            actions.append(self._dispatch(self.pool.workers[wid], now))

        p = self.pool.size
        p_w = self._evaluate(now, TRIGGER_ARRIVAL)
        if self.pid_enabled and p_w > p:
            ids = self.pool.create(p_w - p, now)
            actions.append(CreateWorkers(now, len(ids), ids))
        if not actions:
            actions.append(NoOp(now))
        return actions

    def on_pull(self, worker_id: int, now: float) -> ScaleAction:
        """Handle an idle worker asking for work."""
        worker = self.pool.workers.get(worker_id)
        if worker is None:
            raise ProtocolError(f"pull from unknown worker {worker_id}")
        if worker.state is WorkerState.BUSY:
            raise ProtocolError(f"pull from busy worker {worker_id}")
        if worker.state is WorkerState.STARTING:
            worker.state = WorkerState.IDLE

        p = self.pool.size
        p_w = self._evaluate(now, TRIGGER_PULL)
        if self.pid_enabled and p_w < p:
            # Oversized pool: destroy the asking worker, never more than one.
            self.pool.remove(worker_id)
            return DestroyWorker(now, worker_id)
        if self.queue.length > 0:
            return self._dispatch(worker, now)
        self.pool.parked.append(worker_id)
        return NoOp(now)

    def finish_service(self, worker_id: int) -> None:
        """Mark a worker idle after its service completed."""
        worker = self.pool.workers[worker_id]
        worker.state = WorkerState.IDLE
        worker.busy_until = None
        worker.request_id = None
