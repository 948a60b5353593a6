"""SplitMix64 generator shared by the compiled and pure-Python kernels.

Both backends consume this exact stream so that a seeded training run draws
the same pairs and negatives regardless of which backend executes it.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0


class SplitMix64:
    """Small, fast 64-bit generator (Steele, Lea & Flood)."""

    __slots__ = ("state",)

    def __init__(self, seed: int = 0):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def bounded(self, n: int) -> int:
        """Integer in ``[0, n)`` by multiply-shift on the high 32 bits; ``n < 2**32``."""
        return ((self.next_u64() >> 32) * n) >> 32

    def uniform(self) -> float:
        """Double in ``[0, 1)`` with 53 random bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, walking from the end."""
        for i in range(len(items) - 1, 0, -1):
            j = self.bounded(i + 1)
            items[i], items[j] = items[j], items[i]
