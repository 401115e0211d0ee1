"""Deterministic simulator of a PID-driven, queue-targeting autoscaler."""

from .control import ControlTarget, PidGains, SignConvention
from .engine import available_engines, compiled_available, resolve_engine
from .sim_kernel import ControlConfig, DistSpec, SimConfig, run
from .workload import WorkloadSpec

__version__ = "0.1.0"

__all__ = [
    "ControlConfig",
    "ControlTarget",
    "DistSpec",
    "PidGains",
    "SignConvention",
    "SimConfig",
    "WorkloadSpec",
    "available_engines",
    "compiled_available",
    "resolve_engine",
    "run",
    "__version__",
]
