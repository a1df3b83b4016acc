"""Deterministic seeded randomness.

Every random draw in the package goes through :class:`SplitMix64`, a
counter-based 64-bit generator that is trivial to re-implement in any
language (Steele, Lea & Flood, 2014).  The stream is defined as::

    state_k = seed + k * 0x9E3779B97F4A7C15   (mod 2**64), k = 1, 2, ...
    out_k   = mix64(state_k)

with ``mix64`` the standard SplitMix64 finalizer.  Floats take the top 53
bits, bounded integers use rejection sampling so they are unbiased, and
sub-streams are derived with :func:`derive_seed`, which depends only on the
parent seed and the integer path.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise TypeError(f"seed must be an int, got {type(seed).__name__}")
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def derive_seed(seed: int, *path: int) -> int:
    """Seed of the sub-stream reached from ``seed`` by the index ``path``.

    ``derive_seed(s, i, j) == derive_seed(derive_seed(s, i), j)``.
    """
    s = check_seed(seed)
    for i in path:
        if i < 0:
            raise ValueError("sub-stream indices must be non-negative")
        s = mix64((mix64(s) + (i + 1) * GOLDEN_GAMMA) & MASK64)
    return s


class SplitMix64:
    """SplitMix64 stream; see module docstring for the exact definition."""

    __slots__ = ("seed", "_state")

    def __init__(self, seed: int):
        self.seed = check_seed(seed)
        self._state = self.seed

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN_GAMMA) & MASK64
        return mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def randbelow(self, n: int) -> int:
        """Unbiased integer in [0, n)."""
        if n <= 0:
            raise ValueError("randbelow needs n > 0")
        limit = ((1 << 64) // n) * n
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def randint(self, lo: int, hi: int) -> int:
        """Unbiased integer in [lo, hi] (inclusive)."""
        if lo > hi:
            raise ValueError("randint needs lo <= hi")
        return lo + self.randbelow(hi - lo + 1)

    def shuffle(self, items: list) -> None:
        # Fisher-Yates, high index first
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        items = list(range(n))
        self.shuffle(items)
        return items

    def choice_index(self, weights) -> int:
        """Index drawn with probability proportional to ``weights``.

        A single uniform draw is compared against the running sum, so the
        result is fully determined by the stream and the weight values.
        """
        total = 0.0
        for w in weights:
            total += w
        u = self.random() * total
        acc = 0.0
        last = -1
        for i, w in enumerate(weights):
            if w <= 0.0:
                continue
            acc += w
            last = i
            if u < acc:
                return i
        if last < 0:
            raise ValueError("choice_index needs a positive weight")
        return last

    def split(self, *path: int) -> "SplitMix64":
        """Independent sub-stream that depends only on (seed, path)."""
        return SplitMix64(derive_seed(self.seed, *path))


def seeded_rng(seed: int) -> SplitMix64:
    return SplitMix64(seed)
