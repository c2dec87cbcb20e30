"""Compiled orbit loop for Newton maps in reduced rational form N = z - A/B.

Mirrors ``_PolyFamily.newton_values`` and the fate rules of
:func:`newtonmaps.dynamics.iterate_orbits` point by point, so the numpy and
compiled paths classify orbits identically.
"""

from __future__ import annotations

import numba as nb
import numpy as np

# keep in step with functions.ZERO_TOL and the dynamics constants
ZERO_TOL = 1e-12
FINITE, POLE, OVERFLOW = 0, 1, 2
CONVERGED, ESCAPED, HIT_POLE, UNDECIDED = 0, 1, 2, 3


@nb.njit(cache=True, error_model="numpy")
def _horner(c, z):
    acc = c[c.size - 1] + 0j
    for k in range(c.size - 2, -1, -1):
        acc = acc * z + c[k]
    return acc


@nb.njit(cache=True, error_model="numpy")
def _small(mags, value, z):
    az = abs(z)
    best = 0.0
    power = 1.0
    for k in range(mags.size):
        t = mags[k] * power
        if t > best:
            best = t
        power = power * az
    return abs(value) <= ZERO_TOL * best


@nb.njit(cache=True, error_model="numpy")
def _raw(A, B, mA, mB, maxB, z):
    a = _horner(A, z)
    b = _horner(B, z)
    # max|B_k| * max(1, |z|)^deg bounds the largest term of B from above;
    # compared in squares to skip the square roots on the common path
    az2 = max(1.0, z.real * z.real + z.imag * z.imag)
    bound2 = maxB * maxB * ZERO_TOL * ZERO_TOL
    for _ in range(B.size - 1):
        bound2 *= az2
    sb = False
    if b.real * b.real + b.imag * b.imag <= bound2:
        sb = _small(mB, b, z)
    sa = _small(mA, a, z) if sb else False
    if sb and not sa:
        return complex(np.inf, 0.0), POLE, False
    return z - a / b, FINITE, sb and sa


@nb.njit(cache=True, error_model="numpy")
def newton_point(A, B, mA, mB, maxB, z):
    val, status, both = _raw(A, B, mA, mB, maxB, z)
    if both:
        # common zero of A and B: average a small ring, as the numpy path does
        h = 1e-6 * max(1.0, abs(z))
        acc = 0j
        rot = 1 + 0j
        for _ in range(4):
            v, s, _b = _raw(A, B, mA, mB, maxB, z + h * rot)
            acc += v
            rot = rot * 1j
        val = acc / 4
    if status == FINITE and not (np.isfinite(val.real) and np.isfinite(val.imag)):
        status = OVERFLOW
    return val, status


@nb.njit(cache=True, error_model="numpy")
def rational_orbits(A, B, z0, roots, cap, budget, escape_radius, escape_hold, nudge):
    n = z0.size
    fate = np.full(n, UNDECIDED, dtype=np.int8)
    root_idx = np.full(n, -1, dtype=np.int32)
    iters = np.full(n, budget, dtype=np.int32)
    final = z0.copy()
    cap2 = cap * cap
    mA, mB = np.abs(A), np.abs(B)
    maxB = mB.max()
    tol2 = maxB * maxB * ZERO_TOL * ZERO_TOL
    degB = B.size - 1
    esc2 = escape_radius * escape_radius
    for p in range(n):
        z = z0[p]
        hold = 0
        prev2 = z.real * z.real + z.imag * z.imag
        nudged = False
        pole_at = -1
        for step in range(budget + 1):
            hit = -1
            for r in range(roots.size):
                d = z - roots[r]
                if d.real * d.real + d.imag * d.imag <= cap2[r]:
                    hit = r
                    break
            if hit >= 0:
                fate[p] = CONVERGED
                iters[p] = step
                root_idx[p] = hit
                break
            m2 = z.real * z.real + z.imag * z.imag
            if step > 0:
                if m2 > esc2 and m2 >= prev2:
                    hold += 1
                else:
                    hold = 0
                if hold >= escape_hold:
                    fate[p] = ESCAPED
                    iters[p] = step
                    break
            if step == budget:
                if nudged:
                    fate[p] = HIT_POLE
                    iters[p] = pole_at
                else:
                    fate[p] = UNDECIDED
                    iters[p] = step
                break
            prev2 = m2
            # common path inline; rare small-B cases go through newton_point
            a = _horner(A, z)
            b = _horner(B, z)
            az2 = max(1.0, m2)
            bound2 = tol2
            for _ in range(degB):
                bound2 *= az2
            if b.real * b.real + b.imag * b.imag <= bound2:
                nz, status = newton_point(A, B, mA, mB, maxB, z)
            else:
                nz = z - a / b
                status = FINITE if (np.isfinite(nz.real) and np.isfinite(nz.imag)) else OVERFLOW
            if status != FINITE:
                if nudged:
                    fate[p] = HIT_POLE
                    iters[p] = pole_at
                    break
                pole_at = step
                nudged = True
                zp = z + 1j * nudge * max(1.0, abs(z))
                nz, status = newton_point(A, B, mA, mB, maxB, zp)
                if status != FINITE:
                    fate[p] = HIT_POLE
                    iters[p] = pole_at
                    break
            z = nz
        final[p] = z
    return fate, root_idx, iters, final
