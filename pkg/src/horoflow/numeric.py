"""Numeric context: working precision, tolerances, deterministic RNG.

All geometry code computes in mpmath's real field at whatever binary
precision is currently active.  ``precision(bits)`` scopes a computation
to a chosen precision; nothing in this package mutates the global
precision outside such a scope.
"""

from __future__ import annotations

import os
from contextlib import contextmanager

import mpmath
from mpmath import mpf

ENV_PRECISION_BITS = "HOROFLOW_PRECISION_BITS"
DEFAULT_BITS = 53

_MASK64 = (1 << 64) - 1


def default_precision_bits() -> int:
    """Default working precision in bits, overridable via HOROFLOW_PRECISION_BITS."""
    raw = os.environ.get(ENV_PRECISION_BITS)
    if raw is None:
        return DEFAULT_BITS
    bits = int(raw)
    if bits < 24:
        raise ValueError(f"{ENV_PRECISION_BITS} must be at least 24, got {bits}")
    return bits


@contextmanager
def precision(bits: int):
    """Run the enclosed block at ``bits`` bits of binary precision."""
    with mpmath.workprec(int(bits)):
        yield


def current_bits() -> int:
    return mpmath.mp.prec


def det_tolerance(bits: int | None = None) -> mpf:
    """Unit-determinant tolerance: 1e-12 at 53 bits, 2^-(bits-40) above."""
    b = int(bits) if bits is not None else current_bits()
    if b <= DEFAULT_BITS:
        return mpf("1e-12")
    return mpf(2) ** (-(b - 40))


def trace_tolerance(bits: int | None = None) -> mpf:
    """Parabolic-trace tolerance: 1e-9 at 53 bits, 2^-(bits-40) above."""
    b = int(bits) if bits is not None else current_bits()
    if b <= DEFAULT_BITS:
        return mpf("1e-9")
    return mpf(2) ** (-(b - 40))


def to_scalar(value) -> mpf:
    """Convert to mpf at the active precision.

    Floats convert exactly (binary values); pass strings for quantities
    that should be read as decimals at high precision.
    """
    if isinstance(value, mpf):
        return value
    return mpf(value)


def require_finite(value, what: str = "value") -> mpf:
    x = to_scalar(value)
    if not mpmath.isfinite(x):
        raise ValueError(f"{what} must be finite, got {x}")
    return x


class SplitMix64:
    """SplitMix64 pseudo-random generator.

    64-bit state advanced by the golden-ratio increment 0x9E3779B97F4A7C15;
    each output is the state scrambled by two xor-shift-multiply rounds
    (constants 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB) and a final
    ``z ^ (z >> 31)``.  Pure integer arithmetic, identical on every
    platform, which is what makes seeded runs byte-reproducible.
    """

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0**-53)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def log_uniform(self, lo: float, hi: float) -> float:
        import math

        return math.exp(self.uniform(math.log(lo), math.log(hi)))

    def coin(self, p: float = 0.5) -> bool:
        return self.random() < p

    def randrange(self, n: int) -> int:
        # rejection-free modulo is fine here: n is tiny against 2^64
        return self.next_u64() % int(n)


def derive_seed(seed: int, label: str) -> int:
    """Stable per-suite seed derived from a master seed and a label."""
    rng = SplitMix64(seed)
    h = rng.next_u64()
    for byte in label.encode("utf-8"):
        h = SplitMix64(h ^ byte).next_u64()
    return h
