"""Analytic steady-state M/M/c results (Erlang C).

Used as the independent correctness oracle for fixed-pool runs: the
simulated time-average queue length must converge to mean_queue_length.
Factorials are handled in log space so large pools stay finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class UnstableSystemError(ValueError):
    """Utilization >= 1: the queue has no steady state."""


@dataclass(frozen=True)
class MmcParams:
    lam: float  # arrival rate, per second
    mu: float  # per-worker service rate, per second
    c: int  # worker count

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lam must be > 0, got {self.lam!r}")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"mu must be > 0, got {self.mu!r}")
        if self.c < 1:
            raise ValueError(f"c must be >= 1, got {self.c}")

    @property
    def offered_load(self) -> float:
        return self.lam / self.mu

    @property
    def utilization(self) -> float:
        return self.lam / (self.c * self.mu)


def _log_sum_exp(terms: list[float]) -> float:
    m = max(terms)
    return m + math.log(math.fsum(math.exp(t - m) for t in terms))


def erlang_c(params: MmcParams) -> float:
    """Probability that an arriving request has to wait."""
    rho = params.utilization
    if rho >= 1.0:
        raise UnstableSystemError(
            f"utilization {rho:.4g} >= 1: no steady state"
        )
    a = params.offered_load
    c = params.c
    log_a = math.log(a)
    # a^k / k! for k < c, and a^c / (c! (1 - rho)), all in log space.
    log_terms = [k * log_a - math.lgamma(k + 1) for k in range(c)]
    log_wait = c * log_a - math.lgamma(c + 1) - math.log(1.0 - rho)
    return math.exp(log_wait - _log_sum_exp(log_terms + [log_wait]))


def mean_queue_length(params: MmcParams) -> float:
    """Lq: expected number of requests waiting (excluding in service)."""
    rho = params.utilization
    return erlang_c(params) * rho / (1.0 - rho)
