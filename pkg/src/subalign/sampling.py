"""Counter-based deterministic random streams.

Each draw is keyed by (seed, *counter indices) through repeated splitmix64
finalization, so parallel workers sampling different tokens read independent
streams and the output never depends on iteration order.
"""

from __future__ import annotations

from typing import Sequence

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(x: int) -> int:
    # splitmix64 finalizer
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def stream_uniform(seed: int, *counters: int) -> float:
    """Uniform draw in [0, 1) from the stream keyed by seed and counters."""
    h = _mix(seed & _MASK64)
    for c in counters:
        h = _mix(h ^ (c & _MASK64))
    return (h >> 11) * 2.0 ** -53


def sample_index(probabilities: Sequence[float], u: float) -> int:
    """Index drawn from a categorical distribution via one uniform variate."""
    acc = 0.0
    for i, p in enumerate(probabilities):
        acc += p
        if u < acc:
            return i
    return len(probabilities) - 1
