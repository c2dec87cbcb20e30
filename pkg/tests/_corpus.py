"""Seeded polynomial corpora shared by the unit and acceptance tests."""

from __future__ import annotations

import numpy as np

from newtonmaps.rng import SplitMix64, generate_random_polynomial, random_profile

MIXED_SEED = 2024
SIMPLE_SEED = 5
COROLLARY_SEED = 42
HEAD_SEED = 77
RECON_SEED = 31


def mixed_corpus(n: int = 100, seed: int = MIXED_SEED, lo: int = 2, hi: int = 8):
    """Degrees lo..hi with random multiplicity profiles (parts up to 3)."""
    st = SplitMix64(seed)
    out = []
    for k in range(n):
        s = st.fork(k)
        d = lo + s.below(hi - lo + 1)
        out.append(generate_random_polynomial(s, d, random_profile(s, d)))
    return out


def simple_corpus(n: int = 30, seed: int = SIMPLE_SEED):
    """Degrees 2..6, simple roots."""
    st = SplitMix64(seed)
    out = []
    for k in range(n):
        d = 2 + st.below(5)
        out.append(generate_random_polynomial(st.fork(k), d))
    return out


def degree_corpus(n: int, degree: int, seed: int):
    st = SplitMix64(seed)
    return [generate_random_polynomial(st.fork(k), degree) for k in range(n)]


def sample_points(spec, n: int, seed: int, radius: float = 2.0, clearance: float = 1e-3):
    """Points in |z| < radius at least ``clearance`` from roots and poles of N."""
    rng = np.random.default_rng(seed)
    avoid = np.array([r for r, _ in spec.roots()] + [p for p, _ in spec.poles()], dtype=complex)
    pts = []
    while len(pts) < n:
        z = radius * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        if avoid.size == 0 or np.min(np.abs(avoid - z)) > clearance:
            pts.append(z)
    return np.array(pts)
