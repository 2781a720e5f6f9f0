"""Deterministic random streams for the whole package.

The generator is splitmix64, a counter-based scheme that is easy to
reproduce in any language with 64-bit unsigned arithmetic:

    state_i  = (seed + i * 0x9E3779B97F4A7C15) mod 2^64      (i = 1, 2, ...)
    output_i = mix(state_i)

    mix(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
            z ^= z >> 27; z *= 0x94D049BB133111EB
            z ^= z >> 31; return z

Uniform doubles take the top 53 bits: u = (output >> 11) * 2^-53, giving
values in [0, 1).  Gaussian draws use the Box-Muller transform on pairs of
uniforms:

    r  = sqrt(-2 * ln(1 - u1))        (1 - u1 is in (0, 1], so the log is finite)
    z0 = r * cos(2 * pi * u2)
    z1 = r * sin(2 * pi * u2)

A request for n Gaussians always consumes ceil(n / 2) pairs, so streams stay
aligned regardless of parity.  Independent streams come from `split()`, which
seeds a child with the parent's next output.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 2.0 ** -53


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * _MIX1 & _MASK
    z = (z ^ (z >> 27)) * _MIX2 & _MASK
    return z ^ (z >> 31)


def _mix_array(z):
    # same mixing function vectorized; uint64 arithmetic wraps mod 2^64
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


class Rng:
    """splitmix64 stream; all package randomness flows through this class."""

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int, counter: int = 0):
        self.seed = int(seed) & _MASK
        self.counter = int(counter)

    def clone(self) -> "Rng":
        return Rng(self.seed, self.counter)

    def next_u64(self) -> int:
        self.counter += 1
        return _mix((self.seed + self.counter * _GAMMA) & _MASK)

    def next_u64_array(self, n: int):
        idx = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        return _mix_array(np.uint64(self.seed) + idx * np.uint64(_GAMMA))

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _INV_2_53

    def uniforms(self, n: int) -> np.ndarray:
        bits = self.next_u64_array(n) >> np.uint64(11)
        return bits.astype(np.float64) * _INV_2_53

    def normal(self) -> float:
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log1p(-u1)) * math.cos(2.0 * math.pi * u2)

    def normals(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        u = self.uniforms(2 * pairs)
        r = np.sqrt(-2.0 * np.log1p(-u[:pairs]))
        theta = 2.0 * np.pi * u[pairs:]
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]

    def randint(self, n: int) -> int:
        """Integer in [0, n) via floor(u * n); clamped so u ~ 1 cannot spill over."""
        if n <= 0:
            raise ValueError("randint requires n >= 1")
        return min(int(self.uniform() * n), n - 1)

    def ball_point(self, dim: int, radius: float) -> np.ndarray:
        """Uniform draw from the solid ball of the given radius."""
        z = self.normals(dim)
        norm = float(np.sqrt(np.sum(z * z)))
        while norm == 0.0:  # unreachable in practice, kept for safety
            z = self.normals(dim)
            norm = float(np.sqrt(np.sum(z * z)))
        return z * (radius * self.uniform() ** (1.0 / dim) / norm)

    def split(self) -> "Rng":
        """Child stream seeded from the parent's next output."""
        return Rng(self.next_u64())


def stage_seed(base_seed: int, tag: int) -> int:
    """Derive a per-stage seed from a base seed and a fixed integer tag."""
    return _mix((int(base_seed) + tag * _GAMMA) & _MASK)
