"""Seeded pseudo-random streams for reproducible simulations.

splitmix64 serves both as the bit generator and as the splitter that
derives independent per-purpose streams (arrivals, service demands,
startup delays) from one master seed.  The compiled engine carries a
bit-exact twin of this generator, so both engines draw identical values.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15

# Stream ids; keep in sync with the compiled engine.
ARRIVAL_STREAM = 1
SERVICE_STREAM = 2
STARTUP_STREAM = 3

ALGORITHM = "splitmix64"


def _mix(z: int) -> int:
    # splitmix64 finalizer (Stafford mix 13)
    z &= MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK64
    z ^= z >> 31
    return z


class Stream:
    """One splitmix64 stream: a 64-bit Weyl counter through a mixer."""

    __slots__ = ("_state",)

    def __init__(self, state: int):
        self._state = state & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & MASK64
        return _mix(self._state)

    def next_unit(self) -> float:
        """Uniform double on the open interval (0, 1)."""
        # 53-bit mantissa offset by half an ulp, so 0 and 1 are unreachable.
        return ((self.next_u64() >> 11) + 0.5) * 2.0**-53


def derive_stream(seed: int, stream_id: int) -> Stream:
    """Child stream of `seed`; distinct ids give non-colliding streams."""
    return Stream(_mix(_mix(seed) + (stream_id * _GOLDEN)))


def sample_exponential(stream: Stream, mean: float) -> float:
    """Exponential variate with the given mean; strictly positive."""
    if mean <= 0:
        raise ValueError(f"mean must be > 0, got {mean!r}")
    return -mean * math.log(stream.next_unit())
