"""Deterministic 64-bit PRNG used everywhere randomness is needed.

The generator is fixed bit-exactly so that runs (and reimplementations in
other languages) can agree:

* State seeding and stream derivation use the SplitMix64 finalizer
      z += 0x9E3779B97F4A7C15
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
      z = (z ^ (z >> 27)) * 0x94D049BB133111EB
      z ^= z >> 31
  (all arithmetic mod 2**64).
* The stream itself is xorshift64*:
      x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27
      output = x * 0x2545F4914F6CDD1D
  with state x seeded to splitmix(seed), or 0x9E3779B97F4A7C15 if that
  is zero.
* Named streams: stream_seed(seed, name) = splitmix(seed XOR fnv1a64(name)),
  where fnv1a64 is FNV-1a over the UTF-8 bytes of the name. Distinct
  pipeline stages draw from distinct named streams.
* Doubles: uniform() = (u64 >> 11) * 2**-53 in [0, 1).
* Normals: Box-Muller over pairs; u1 = ((a >> 11) + 1) * 2**-53 in (0, 1],
  u2 = (b >> 11) * 2**-53, z0 = sqrt(-2 ln u1) cos(2 pi u2),
  z1 = sqrt(-2 ln u1) sin(2 pi u2). normals(n) consumes 2*ceil(n/2) draws,
  interleaving [z0_0, z1_0, z0_1, ...] and truncating to n.
* Bounded ints: below(n) = u64 mod n (the modulo bias is irrelevant at the
  sizes used here and keeps the contract trivial to restate).

The raw u64 stream may be produced by the compiled kernel backend; it is
bit-identical to the pure-Python loop (tests assert this).
"""

from __future__ import annotations

import numpy as np

from ._kernels import fill_u64

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    """One SplitMix64 step: advance by the golden-ratio increment and mix."""
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h = ((h ^ byte) * 0x100000001B3) & MASK64
    return h


def stream_seed(seed: int, name: str) -> int:
    """Seed for the named stream derived from a global seed."""
    return splitmix64((seed & MASK64) ^ fnv1a64(name.encode("utf-8")))


class Prng:
    """xorshift64* stream with vectorized double helpers."""

    def __init__(self, seed: int):
        self.state = splitmix64(seed & MASK64) or GOLDEN

    @classmethod
    def for_stream(cls, seed: int, name: str) -> "Prng":
        rng = cls.__new__(cls)
        rng.state = stream_seed(seed, name) or GOLDEN
        return rng

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x = (x ^ (x << 25)) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK64

    def u64_array(self, n: int) -> np.ndarray:
        out = np.empty(n, dtype=np.uint64)
        self.state = int(fill_u64(self.state, out))
        return out

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0 ** -53

    def uniforms(self, n: int) -> np.ndarray:
        return (self.u64_array(n) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53

    def normals(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        a = self.u64_array(pairs)
        b = self.u64_array(pairs)
        u1 = ((a >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0 ** -53
        u2 = (b >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]

    def below(self, n: int) -> int:
        """Integer in [0, n)."""
        if n <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, swapping from the back."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), by partial Fisher-Yates."""
        if k > n:
            raise ValueError(f"cannot sample {k} from {n}")
        idx = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:k]
