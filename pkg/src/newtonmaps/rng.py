"""SplitMix64 stream and the seeded random-polynomial corpus.

SplitMix64 (Steele, Lea, Flood) with state increment 0x9E3779B97F4A7C15 and
output mix constants 0xBF58476D1CE4E5B9 (shift 30) and 0x94D049BB133111EB
(shift 27), final shift 31. Doubles take the top 53 bits. The constants are
spelled out so another implementation can reproduce the corpus exactly.
"""

from __future__ import annotations

import math
from typing import Sequence

from .fixedpoints import head_polynomial
from .functions import Polynomial

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * MIX1) & MASK
        z = ((z ^ (z >> 27)) * MIX2) & MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * 2.0**-53

    def below(self, n: int) -> int:
        return self.next_u64() % n

    def unit_disk(self) -> complex:
        """Uniform point of the open unit disk."""
        r = math.sqrt(self.uniform())
        t = 2 * math.pi * self.uniform()
        return complex(r * math.cos(t), r * math.sin(t))

    def fork(self, tag: int) -> "SplitMix64":
        """Independent child stream keyed by an integer tag."""
        return SplitMix64(self.next_u64() ^ ((tag * GOLDEN) & MASK))


class CorpusError(RuntimeError):
    pass


def generate_random_polynomial(stream: SplitMix64, degree: int,
                               multiplicity_profile: Sequence[int] | None = None,
                               min_separation: float = 0.05,
                               max_tries: int = 1000) -> Polynomial:
    """Monic polynomial with roots uniform in the unit disk.

    Roots are pairwise at least ``min_separation`` apart (rejection
    sampling); ``multiplicity_profile`` lists the multiplicity of each
    distinct root and defaults to all ones.
    """
    if not 2 <= degree <= 12:
        raise ValueError("degree must be between 2 and 12")
    profile = list(multiplicity_profile) if multiplicity_profile else [1] * degree
    if sum(profile) != degree or min(profile) < 1:
        raise ValueError(f"profile {profile} does not sum to degree {degree}")
    roots: list[complex] = []
    tries = 0
    while len(roots) < len(profile):
        if tries >= max_tries:
            raise CorpusError(f"could not place {len(profile)} separated roots in {max_tries} tries")
        tries += 1
        z = stream.unit_disk()
        if all(abs(z - r) >= min_separation for r in roots):
            roots.append(z)
    return head_polynomial(list(zip(roots, profile)), 1.0)


def random_profile(stream: SplitMix64, degree: int, max_mult: int = 3) -> list[int]:
    """Random composition of ``degree`` into parts of size at most ``max_mult``."""
    parts = []
    left = degree
    while left:
        m = 1 + stream.below(min(max_mult, left))
        parts.append(m)
        left -= m
    return parts
