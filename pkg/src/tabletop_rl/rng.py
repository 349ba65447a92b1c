"""Seedable, portable pseudorandom generator for game simulations.

The engine needs bit-identical replays across platforms, so all in-game
randomness (shuffles, draws, tile reveals, tie breaks) goes through this
generator instead of ``random`` or numpy.  The algorithm is xoroshiro128**
(Blackman & Vigna) with 128 bits of state, seeded through splitmix64.
Integer draws use rejection sampling, so ``randrange(n)`` is exactly
uniform; shuffles are Fisher-Yates.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

# splitmix64 / golden-ratio increment, used for seeding and key mixing.
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    x = (x + _SPLITMIX_GAMMA) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *keys: int) -> int:
    """Derive a child seed from a base seed and integer keys.

    Used to give every environment instance, episode and subsystem its own
    independent stream while staying reproducible from one master seed.
    """
    x = seed & MASK64
    for k in keys:
        x = _splitmix64(x ^ (k & MASK64))
    return _splitmix64(x)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Rng:
    """xoroshiro128** generator; state is two 64-bit words."""

    __slots__ = ("_s0", "_s1")

    def __init__(self, seed: int):
        seed &= MASK64
        s0 = _splitmix64(seed)
        s1 = _splitmix64(s0)
        # all-zero state is the one forbidden state of xoroshiro
        self._s0 = s0 or 1
        self._s1 = s1

    def next_u64(self) -> int:
        s0, s1 = self._s0, self._s1
        result = (_rotl((s0 * 5) & MASK64, 7) * 9) & MASK64
        s1 ^= s0
        self._s0 = _rotl(s0, 24) ^ s1 ^ ((s1 << 16) & MASK64)
        self._s1 = _rotl(s1, 37)
        return result

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection sampling."""
        if n <= 0:
            raise ValueError(f"randrange needs n >= 1, got {n}")
        if n == 1:
            return 0
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def random(self) -> float:
        """Float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0**-53)

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def shuffle(self, xs: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(xs) - 1, 0, -1):
            j = self.randrange(i + 1)
            xs[i], xs[j] = xs[j], xs[i]

    def getstate(self) -> tuple[int, int]:
        return (self._s0, self._s1)

    def setstate(self, state: tuple[int, int]) -> None:
        self._s0, self._s1 = state

    def clone(self) -> "Rng":
        c = Rng.__new__(Rng)
        c._s0, c._s1 = self._s0, self._s1
        return c

    def __repr__(self) -> str:
        return f"Rng(state=({self._s0:#x}, {self._s1:#x}))"
