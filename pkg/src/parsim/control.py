"""PID control law over irregularly sampled queue-length error.

Gains are stored as magnitudes together with an explicit error orientation.
The default orientation (W_MINUS_T) turns an above-target queue into a
positive correction, i.e. scale-up; T_MINUS_W inverts the loop.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional


class SignConvention(enum.Enum):
    """Orientation of the queue-length error fed to the PID."""

    W_MINUS_T = "w_minus_t"
    T_MINUS_W = "t_minus_w"


@dataclass(frozen=True)
class PidGains:
    """Controller gains. kp is dimensionless, ki is per second, kd in seconds."""

    kp: float = 0.9
    ki: float = 0.0
    kd: float = 0.2
    sign: SignConvention = SignConvention.W_MINUS_T
    integral_clamp: float = 1000.0

    def __post_init__(self):
        for name in ("kp", "ki", "kd", "integral_clamp"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.integral_clamp < 0:
            raise ValueError("integral_clamp must be >= 0")


@dataclass(frozen=True)
class ControlTarget:
    """Queue-length setpoint plus hard bounds on the worker pool size."""

    target_queue_length: float = 25.0
    p_min: int = 1
    p_max: int = 100

    def __post_init__(self):
        if not (0 <= self.p_min <= self.p_max):
            raise ValueError(
                f"need 0 <= p_min <= p_max, got {self.p_min}..{self.p_max}"
            )
        if not (math.isfinite(self.target_queue_length) and self.target_queue_length >= 0):
            raise ValueError(f"target must be >= 0, got {self.target_queue_length!r}")


@dataclass(frozen=True)
class PidState:
    """Accumulated integral plus the memory needed for the derivative."""

    integral: float = 0.0
    prev_error: Optional[float] = None
    prev_time: Optional[float] = None


def compute_error(w: float, target: ControlTarget, gains: PidGains) -> float:
    """Signed distance of the queue length from the setpoint."""
    if w < 0:
        raise ValueError(f"queue length must be >= 0, got {w!r}")
    if gains.sign is SignConvention.W_MINUS_T:
        return w - target.target_queue_length
    return target.target_queue_length - w


def pid_step(
    state: PidState, gains: PidGains, error: float, now: float
) -> tuple[PidState, float]:
    """Advance the controller by one irregular sample.

    The integral accumulates error * dt (rectangular rule) and is clamped;
    the derivative is a backward difference over the actual dt.  Both are
    zero on the first sample and the derivative also on dt == 0.
    """
    if not (math.isfinite(error) and math.isfinite(now)):
        raise ValueError(f"non-finite sample: error={error!r}, now={now!r}")
    if state.prev_time is not None and now < state.prev_time:
        raise ValueError(f"time went backwards: {now} < {state.prev_time}")

    integral = state.integral
    derivative = 0.0
    if state.prev_time is not None:
        dt = now - state.prev_time
        integral += error * dt
        if integral > gains.integral_clamp:
            integral = gains.integral_clamp
        elif integral < -gains.integral_clamp:
            integral = -gains.integral_clamp
        if dt > 0.0:
            derivative = (error - state.prev_error) / dt

    p_out = gains.kp * error + gains.ki * integral + gains.kd * derivative
    return PidState(integral, error, now), p_out


def round_half_away_from_zero(x: float) -> int:
    """Symmetric rounding: 0.5 -> 1, -0.5 -> -1."""
    if x >= 0.0:
        return int(math.floor(x + 0.5))
    return int(math.ceil(x - 0.5))


def wanted_pool(p_current: int, p_out: float, target: ControlTarget) -> int:
    """Pool size the controller wants: current plus correction, bounded."""
    if not (target.p_min <= p_current <= target.p_max):
        raise ValueError(
            f"p_current {p_current} outside [{target.p_min}, {target.p_max}]"
        )
    wanted = round_half_away_from_zero(p_current + p_out)
    if wanted < target.p_min:
        return target.p_min
    if wanted > target.p_max:
        return target.p_max
    return wanted
