"""Deterministic 64-bit RNG shared by the generators and the simulator.

SplitMix64 is used everywhere randomness matters for reproducibility: it
has a single 64-bit word of state, so the exact same stream can be
produced by the compiled kernel, the pure-Python kernel, and test code.
Child seeds for replicate runs are derived from (base seed, index) with
the same finalizer, which is the standard way to split this generator.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# uniform() maps the top 53 bits of an output word onto [0, 1)
_TWO_NEG53 = 1.0 / 9007199254740992.0


def _finalize(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Minimal SplitMix64 generator over a 64-bit state word."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    @property
    def state(self) -> int:
        return self._state

    @state.setter
    def state(self, value: int) -> None:
        self._state = value & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & MASK64
        return _finalize(self._state)

    def uniform(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _TWO_NEG53

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n).

        Plain modulo reduction; the bias is at most n / 2**64, which is
        negligible for the population sizes used here and keeps the
        compiled and interpreted kernels trivially identical.
        """
        if n <= 0:
            raise ValueError("randbelow requires n >= 1")
        return self.next_u64() % n


def derive_seed(base: int, index: int) -> int:
    """Deterministic child seed for run number ``index`` of stream ``base``.

    Equals the (index+1)-th raw output of a SplitMix64 stream seeded with
    ``base``, so distinct indices give statistically independent seeds.
    """
    if index < 0:
        raise ValueError("index must be non-negative")
    return _finalize((base + (index + 1) * _GOLDEN) & MASK64)
