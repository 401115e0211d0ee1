"""Controller-sample recording, smoothing, time-weighted statistics, export.

Samples are event-driven and irregularly spaced, so summary averages weight
each value by its holding time rather than per sample.  CSV exports use
shortest round-trip float formatting and parse back to the exact values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .rng import ALGORITHM as RNG_ALGORITHM
from .sim_kernel import RawRun, SimConfig

SAMPLES_HEADER = "time_s,w,error,p,p_wanted,p_out,trigger"
SMOOTHED_HEADER = "time_s,w_ma,p_ma"
TRIGGER_NAMES = ("arrival", "pull")


@dataclass(frozen=True)
class SampleRecord:
    """One controller observation."""

    time: float
    w: int
    error: float
    p: int
    p_wanted: int
    p_out: float
    trigger: str  # "arrival" | "pull"


@dataclass(frozen=True)
class RunSummary:
    seed: int
    engine: str
    rng: str
    horizon_s: float
    n_samples: int
    requests_generated: int
    requests_served: int
    requests_waiting_end: int
    requests_in_service_end: int
    time_average_w: float
    time_average_p: float
    max_w: int
    mean_response_time_s: Optional[float]
    creations: int
    destructions: int
    initial_p: int
    final_p: int

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "engine": self.engine,
            "rng": self.rng,
            "horizon_s": self.horizon_s,
            "n_samples": self.n_samples,
            "requests_generated": self.requests_generated,
            "requests_served": self.requests_served,
            "requests_waiting_end": self.requests_waiting_end,
            "requests_in_service_end": self.requests_in_service_end,
            "time_average_w": self.time_average_w,
            "time_average_p": self.time_average_p,
            "max_w": self.max_w,
            "mean_response_time_s": self.mean_response_time_s,
            "creations": self.creations,
            "destructions": self.destructions,
            "initial_p": self.initial_p,
            "final_p": self.final_p,
        }


def moving_average(values: Sequence[float], window: int) -> list[float]:
    """Trailing mean; leading elements average whatever is available."""
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


def time_average(times: Sequence[float], values: Sequence[float], horizon: float) -> float:
    """Mean of the left-continuous step signal over [times[0], horizon]."""
    if len(times) == 0:
        raise ValueError("time_average needs a non-empty series")
    if len(times) != len(values):
        raise ValueError("times and values must have equal length")
    if horizon < times[0]:
        raise ValueError(f"horizon {horizon} precedes first sample {times[0]}")
    if horizon == times[0]:
        return float(values[0])
    total = 0.0
    for i in range(len(times)):
        t0 = times[i]
        if t0 >= horizon:
            break
        t1 = times[i + 1] if i + 1 < len(times) else horizon
        if t1 > horizon:
            t1 = horizon
        total += values[i] * (t1 - t0)
    return total / (horizon - times[0])


def samples_from_raw(raw: RawRun) -> list[SampleRecord]:
    return [
        SampleRecord(
            raw.sample_t[i],
            raw.sample_w[i],
            raw.sample_err[i],
            raw.sample_p[i],
            raw.sample_pw[i],
            raw.sample_pout[i],
            TRIGGER_NAMES[raw.sample_trig[i]],
        )
        for i in range(raw.n_samples)
    ]


def write_samples_csv(path, raw: RawRun) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SAMPLES_HEADER + "\n")
        for i in range(raw.n_samples):
            fh.write(
                f"{raw.sample_t[i]!r},{raw.sample_w[i]},{raw.sample_err[i]!r},"
                f"{raw.sample_p[i]},{raw.sample_pw[i]},{raw.sample_pout[i]!r},"
                f"{TRIGGER_NAMES[raw.sample_trig[i]]}\n"
            )


def read_samples_csv(path) -> list[SampleRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != SAMPLES_HEADER:
            raise ValueError(f"bad samples header: {header!r}")
        for line in fh:
            t, w, err, p, pw, pout, trig = line.rstrip("\n").split(",")
            records.append(
                SampleRecord(float(t), int(w), float(err), int(p), int(pw), float(pout), trig)
            )
    return records


def write_smoothed_csv(path, raw: RawRun, window: int = 10) -> None:
    """Moving-average export of the queue and pool curves."""
    w_ma = moving_average(raw.sample_w, window)
    p_ma = moving_average(raw.sample_p, window)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SMOOTHED_HEADER + "\n")
        for i in range(raw.n_samples):
            fh.write(f"{raw.sample_t[i]!r},{w_ma[i]!r},{p_ma[i]!r}\n")


def write_actions_log(path, raw: RawRun) -> None:
    """One JSON object per effectual scale action."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for act in raw.actions:
            kind = act[0]
            if kind == "create":
                obj = {"time_s": act[1], "seq": act[2], "action": "create",
                       "count": act[3], "first_worker_id": act[4]}
            elif kind == "destroy":
                obj = {"time_s": act[1], "seq": act[2], "action": "destroy",
                       "worker_id": act[3]}
            else:
                obj = {"time_s": act[1], "seq": act[2], "action": "dispatch",
                       "request_id": act[3], "worker_id": act[4],
                       "service_s": act[5]}
            fh.write(json.dumps(obj) + "\n")


def build_summary(raw: RawRun, cfg: SimConfig, engine: str) -> RunSummary:
    if raw.end_time > 0:
        tavg_w = raw.acc_w / raw.end_time
        tavg_p = raw.acc_p / raw.end_time
    else:
        tavg_w = float(raw.w_end)
        tavg_p = float(raw.p_initial)
    if raw.served > 0:
        response = math.fsum(
            raw.completion_times[i] - raw.arrival_times[raw.completion_rids[i] - 1]
            for i in range(raw.served)
        )
        mean_response = response / raw.served
    else:
        mean_response = None
    return RunSummary(
        seed=cfg.seed,
        engine=engine,
        rng=RNG_ALGORITHM,
        horizon_s=raw.end_time,
        n_samples=raw.n_samples,
        requests_generated=raw.generated,
        requests_served=raw.served,
        requests_waiting_end=raw.w_end,
        requests_in_service_end=raw.busy_end,
        time_average_w=tavg_w,
        time_average_p=tavg_p,
        max_w=max(raw.sample_w) if raw.n_samples else raw.w_end,
        mean_response_time_s=mean_response,
        creations=raw.creations,
        destructions=raw.destructions,
        initial_p=raw.p_initial,
        final_p=raw.p_final,
    )


def write_summary_json(path, summary: RunSummary) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary.to_dict(), fh, indent=2)
        fh.write("\n")
