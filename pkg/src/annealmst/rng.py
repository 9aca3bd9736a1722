"""Deterministic 64-bit random number generation.

One fixed generator is used everywhere (xoshiro256++ seeded through
splitmix64) so that runs, generated instances, and reports reproduce byte
for byte across platforms. Trial k of a batch draws its own stream from
``mix_seed(base_seed + k)``; the jit engine re-implements the identical
stream over uint64 arrays and tests pin the two implementations together.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1

# 2**-53, so (u64 >> 11) * _INV53 is the usual uniform [0,1) construction.
_INV53 = 1.1102230246251565e-16


def splitmix64_next(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state once; returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def mix_seed(seed: int) -> int:
    """Map a raw seed to a decorrelated 64-bit one.

    This is the documented split rule for trial batches: trial k uses
    ``mix_seed(base_seed + k)``, so neighboring raw seeds give unrelated
    streams.
    """
    return splitmix64_next(seed & _MASK64)[1]


def seed_material(seed: int) -> tuple[int, int, int, int]:
    """Four splitmix64 outputs used as the xoshiro256++ initial state."""
    state = seed & _MASK64
    out = []
    for _ in range(4):
        state, word = splitmix64_next(state)
        out.append(word)
    return tuple(out)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256PP:
    """xoshiro256++ stream with the splitmix64 seeding convention."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, seed: int):
        self.s0, self.s1, self.s2, self.s3 = seed_material(seed)

    def next_u64(self) -> int:
        result = (_rotl((self.s0 + self.s3) & _MASK64, 23) + self.s0) & _MASK64
        t = (self.s1 << 17) & _MASK64
        self.s2 ^= self.s0
        self.s3 ^= self.s1
        self.s1 ^= self.s2
        self.s0 ^= self.s3
        self.s2 ^= t
        self.s3 = _rotl(self.s3, 45)
        return result

    def random(self) -> float:
        """Uniform float in [0, 1): the top 53 bits of one draw."""
        return (self.next_u64() >> 11) * _INV53

    def randrange(self, k: int) -> int:
        """Uniform integer in [0, k) via the float path.

        Consumes exactly one draw; k must fit in 53 bits, which every use
        in this package satisfies by a wide margin.
        """
        return int(self.random() * k)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def shuffle(self, xs: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(xs) - 1, 0, -1):
            j = self.randrange(i + 1)
            xs[i], xs[j] = xs[j], xs[i]

    def sample_prefix(self, xs: list, k: int) -> list:
        """k distinct items drawn without replacement (partial shuffle)."""
        if not 0 <= k <= len(xs):
            raise ValueError("sample size out of range")
        pool = list(xs)
        for i in range(k):
            j = i + self.randrange(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
