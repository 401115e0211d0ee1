"""Deterministic discrete-event simulation kernel.

Events are processed in (time, schedule-sequence) order from a binary heap;
all randomness comes from per-purpose splitmix64 streams derived from the
master seed, so identical configs give bit-identical traces.  The pure
Python engine here composes the control, queue and orchestrator modules;
the compiled engine in ``parsim._engine`` is a fused twin that must produce
exactly the same output (see the engine equivalence tests).
"""

from __future__ import annotations

import heapq
import math
from array import array
from dataclasses import dataclass, field
from typing import Optional

from . import engine as engine_mod
from .control import ControlTarget, PidGains
from .orchestrator import (
    CreateWorkers,
    DestroyWorker,
    Dispatch,
    Orchestrator,
    Pool,
    WorkerState,
)
from .queue_model import RequestQueue
from .rng import (
    ARRIVAL_STREAM,
    SERVICE_STREAM,
    STARTUP_STREAM,
    Stream,
    derive_stream,
    sample_exponential,
)
from .workload import WorkloadSpec, build_arrivals, load_trace

EV_ARRIVAL = 0
EV_STARTUP = 1
EV_COMPLETE = 2


@dataclass(frozen=True)
class DistSpec:
    """A delay distribution: constant or exponential, by mean."""

    kind: str  # "constant" | "exponential"
    mean: float

    def __post_init__(self):
        if self.kind not in ("constant", "exponential"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if not (math.isfinite(self.mean) and self.mean >= 0):
            raise ValueError(f"mean must be finite and >= 0, got {self.mean!r}")
        if self.kind == "exponential" and self.mean <= 0:
            raise ValueError("exponential mean must be > 0")


def draw(dist: DistSpec, stream: Stream) -> float:
    """Sample a delay; constants never consume random numbers."""
    if dist.kind == "constant":
        return dist.mean
    return sample_exponential(stream, dist.mean)


@dataclass(frozen=True)
class ControlConfig:
    """Controller configuration, or a fixed pool with the PID disabled."""

    gains: PidGains = PidGains()
    target: ControlTarget = ControlTarget()
    mode: str = "pid"  # "pid" | "fixed"
    fixed_pool: int = 6

    def __post_init__(self):
        if self.mode not in ("pid", "fixed"):
            raise ValueError(f"unknown control mode {self.mode!r}")
        if self.fixed_pool < 1:
            raise ValueError("fixed_pool must be >= 1")

    @property
    def initial_pool(self) -> int:
        return self.fixed_pool if self.mode == "fixed" else self.target.p_min


@dataclass(frozen=True)
class SimConfig:
    seed: int
    workload: WorkloadSpec
    service: DistSpec = DistSpec("exponential", 5.0)
    startup: DistSpec = DistSpec("constant", 1.0)
    control: ControlConfig = ControlConfig()
    horizon: Optional[float] = None  # seconds; None needs a bounded workload
    engine: str = "auto"  # "auto" | "python" | "compiled"

    def __post_init__(self):
        if not (0 <= self.seed < 2**64):
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")
        if self.horizon is not None and not (
            math.isfinite(self.horizon) and self.horizon > 0
        ):
            raise ValueError(f"horizon must be > 0, got {self.horizon!r}")
        if (
            self.horizon is None
            and self.workload.limit is None
            and self.workload.kind != "trace"  # traces are finite by nature
        ):
            raise ValueError("unbounded workload needs a horizon")
        if self.service.kind == "constant" and self.service.mean <= 0:
            raise ValueError("service demand must be > 0")
        if self.engine not in ("auto", "python", "compiled"):
            raise ValueError(f"unknown engine {self.engine!r}")


@dataclass
class RawRun:
    """Engine output: sample columns, action tuples and per-request times.

    Action tuples are ("create", t, seq, count, first_worker_id),
    ("destroy", t, seq, worker_id) and
    ("dispatch", t, seq, request_id, worker_id, service_demand), where seq
    identifies the event that emitted the action.
    """

    sample_t: array
    sample_w: array
    sample_err: array
    sample_p: array
    sample_pw: array
    sample_pout: array
    sample_trig: array
    actions: list
    startups: list
    arrival_times: array
    completion_rids: array
    completion_times: array
    acc_w: float
    acc_p: float
    end_time: float
    generated: int
    served: int
    w_end: int
    busy_end: int
    p_initial: int
    p_final: int
    creations: int
    destructions: int

    @property
    def n_samples(self) -> int:
        return len(self.sample_t)


@dataclass(frozen=True)
class RunResult:
    raw: RawRun
    engine: str


def run_python(cfg: SimConfig) -> RawRun:
    """Reference engine: the event loop over the real module objects."""
    arrival_stream = derive_stream(cfg.seed, ARRIVAL_STREAM)
    service_stream = derive_stream(cfg.seed, SERVICE_STREAM)
    startup_stream = derive_stream(cfg.seed, STARTUP_STREAM)

    queue = RequestQueue()
    pool = Pool()
    pool.add_initial(cfg.control.initial_pool)
    p_initial = pool.size

    sample_t = array("d")
    sample_w = array("q")
    sample_err = array("d")
    sample_p = array("q")
    sample_pw = array("q")
    sample_pout = array("d")
    sample_trig = array("q")

    def record(t, w, err, p, pw, pout, trig):
        sample_t.append(t)
        sample_w.append(w)
        sample_err.append(err)
        sample_p.append(p)
        sample_pw.append(pw)
        sample_pout.append(pout)
        sample_trig.append(trig)

    orch = Orchestrator(
        queue,
        pool,
        cfg.control.gains,
        cfg.control.target,
        pid_enabled=cfg.control.mode == "pid",
        draw_demand=lambda: draw(cfg.service, service_stream),
        record_sample=record,
    )

    actions: list = []
    startups: list = []
    arrival_times = array("d")
    completion_rids = array("q")
    completion_times = array("d")
    generated = served = creations = destructions = 0

    heap: list = []
    seq = 0
    generator = build_arrivals(cfg.workload)
    first = generator.next_arrival(arrival_stream)
    if first is not None:
        heapq.heappush(heap, (first.arrival_time, seq, EV_ARRIVAL, first))
        seq += 1

    horizon = cfg.horizon
    t_last = 0.0
    acc_w = 0.0
    acc_p = 0.0

    def handle_pull_action(act, time, ev_seq):
        nonlocal destructions, seq
        if isinstance(act, DestroyWorker):
            destructions += 1
            actions.append(("destroy", time, ev_seq, act.worker_id))
        elif isinstance(act, Dispatch):
            actions.append(
                ("dispatch", time, ev_seq, act.request_id, act.worker_id, act.service_demand)
            )
            heapq.heappush(
                heap,
                (time + act.service_demand, seq, EV_COMPLETE, (act.worker_id, act.request_id)),
            )
            seq += 1

    while heap and (horizon is None or heap[0][0] <= horizon):
        time, ev_seq, kind, payload = heapq.heappop(heap)
        acc_w += queue.length * (time - t_last)
        acc_p += pool.size * (time - t_last)
        t_last = time

        if kind == EV_ARRIVAL:
            request = payload
            generated += 1
            arrival_times.append(request.arrival_time)
            queue.enqueue(request)
            for act in orch.on_arrival(time):
                if isinstance(act, Dispatch):
                    handle_pull_action(act, time, ev_seq)
                elif isinstance(act, CreateWorkers):
                    creations += act.count
                    actions.append(("create", time, ev_seq, act.count, act.worker_ids[0]))
                    for wid in act.worker_ids:
                        delay = draw(cfg.startup, startup_stream)
                        heapq.heappush(heap, (time + delay, seq, EV_STARTUP, wid))
                        seq += 1
            nxt = generator.next_arrival(arrival_stream)
            if nxt is not None:
                heapq.heappush(heap, (nxt.arrival_time, seq, EV_ARRIVAL, nxt))
                seq += 1
        elif kind == EV_STARTUP:
            wid = payload
            startups.append((time, wid))
            handle_pull_action(orch.on_pull(wid, time), time, ev_seq)
        else:  # EV_COMPLETE
            wid, rid = payload
            served += 1
            completion_rids.append(rid)
            completion_times.append(time)
            orch.finish_service(wid)
            handle_pull_action(orch.on_pull(wid, time), time, ev_seq)

    if horizon is not None:
        end_time = horizon
        if horizon > t_last:
            acc_w += queue.length * (horizon - t_last)
            acc_p += pool.size * (horizon - t_last)
    else:
        end_time = t_last

    busy_end = sum(1 for w in pool.workers.values() if w.state is WorkerState.BUSY)

    return RawRun(
        sample_t=sample_t,
        sample_w=sample_w,
        sample_err=sample_err,
        sample_p=sample_p,
        sample_pw=sample_pw,
        sample_pout=sample_pout,
        sample_trig=sample_trig,
        actions=actions,
        startups=startups,
        arrival_times=arrival_times,
        completion_rids=completion_rids,
        completion_times=completion_times,
        acc_w=acc_w,
        acc_p=acc_p,
        end_time=end_time,
        generated=generated,
        served=served,
        w_end=queue.length,
        busy_end=busy_end,
        p_initial=p_initial,
        p_final=pool.size,
        creations=creations,
        destructions=destructions,
    )


def _run_compiled(cfg: SimConfig) -> RawRun:
    """Flatten the config into scalars and call the fused engine."""
    from . import _engine

    wl = cfg.workload
    wl_kind = {"poisson": 0, "deterministic": 1, "trace": 2}[wl.kind]
    if wl.kind == "trace":
        rows = load_trace(wl.path)
        if wl.limit is not None:
            rows = rows[: wl.limit]
        trace_times = [t for t, _ in rows]
        trace_demands = [math.nan if d is None else d for _, d in rows]
    else:
        trace_times = []
        trace_demands = []

    gains = cfg.control.gains
    target = cfg.control.target
    out = _engine.run_sim(
        cfg.seed,
        -1.0 if cfg.horizon is None else cfg.horizon,
        wl_kind,
        wl.mean_interarrival,
        wl.interval,
        -1 if wl.limit is None else wl.limit,
        trace_times,
        trace_demands,
        0 if cfg.service.kind == "constant" else 1,
        cfg.service.mean,
        0 if cfg.startup.kind == "constant" else 1,
        cfg.startup.mean,
        1 if cfg.control.mode == "pid" else 0,
        gains.kp,
        gains.ki,
        gains.kd,
        0 if gains.sign.value == "w_minus_t" else 1,
        gains.integral_clamp,
        target.target_queue_length,
        target.p_min,
        target.p_max,
        cfg.control.initial_pool,
    )
    return RawRun(*out)


def run(cfg: SimConfig, engine: Optional[str] = None) -> RunResult:
    """Run a simulation on the selected engine and return its raw trace."""
    name = engine_mod.resolve_engine(engine if engine is not None else cfg.engine)
    raw = run_python(cfg) if name == "python" else _run_compiled(cfg)
    return RunResult(raw=raw, engine=name)


__all__ = [
    "ControlConfig",
    "DistSpec",
    "RawRun",
    "RunResult",
    "SimConfig",
    "draw",
    "run",
    "run_python",
    "sample_exponential",
]
