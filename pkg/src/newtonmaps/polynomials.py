"""Dense complex polynomials in ascending coefficient order.

Everything here works on 1-d numpy arrays ``c`` with ``p(z) = sum c[k] z**k``.
Evaluation is Horner's scheme and broadcasts over array-valued ``z``.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

EPS = np.finfo(float).eps
# cluster members may sit this many rounding radii from the centre
ROUNDING_SPREAD = 10.0


class RootFindingError(RuntimeError):
    pass


def as_coeffs(coeffs) -> np.ndarray:
    return np.atleast_1d(np.asarray(coeffs, dtype=complex))


def trim(c: np.ndarray) -> np.ndarray:
    """Drop exactly-zero leading (highest degree) coefficients."""
    c = as_coeffs(c)
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return c[:1] * 0
    return c[: nz[-1] + 1]


def degree(c) -> int:
    return len(trim(c)) - 1


def horner(c: np.ndarray, z):
    z = np.asarray(z, dtype=complex)
    acc = np.full(z.shape, c[-1], dtype=complex)
    for a in c[-2::-1]:
        acc = acc * z + a
    return acc


def horner_scale(c: np.ndarray, z):
    """Magnitude of the largest monomial term ``|c_k z^k|`` at ``z``.

    Used as the reference scale for relative zero tests.
    """
    z = np.asarray(z, dtype=complex)
    az = np.abs(z)
    best = np.zeros(z.shape)
    power = np.ones(z.shape)
    with np.errstate(over="ignore", invalid="ignore"):
        for a in c:
            best = np.maximum(best, abs(a) * power)
            power = power * az
    return best


def derivative(c: np.ndarray, order: int = 1) -> np.ndarray:
    c = as_coeffs(c)
    for _ in range(order):
        if len(c) == 1:
            return np.zeros(1, dtype=complex)
        c = c[1:] * np.arange(1, len(c))
    return c


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = as_coeffs(a), as_coeffs(b)
    out = np.zeros(len(a) + len(b) - 1, dtype=complex)
    for i, ai in enumerate(a):
        out[i : i + len(b)] += ai * b
    return out


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = as_coeffs(a), as_coeffs(b)
    n = max(len(a), len(b))
    out = np.zeros(n, dtype=complex)
    out[: len(a)] += a
    out[: len(b)] += b
    return out


def divmod_poly(num: np.ndarray, den: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Long division; returns (quotient, remainder)."""
    num, den = trim(num), trim(den)
    if not np.any(den):
        raise ZeroDivisionError("division by the zero polynomial")
    r = num.copy()
    dn = len(den) - 1
    if len(num) - 1 < dn:
        return np.zeros(1, dtype=complex), r
    q = np.zeros(len(num) - dn, dtype=complex)
    lead = den[-1]
    for k in range(len(q) - 1, -1, -1):
        q[k] = r[k + dn] / lead
        r[k : k + dn + 1] -= q[k] * den
    rem = r[:dn] if dn > 0 else np.zeros(1, dtype=complex)
    return q, rem


def from_roots(roots, lead: complex = 1.0) -> np.ndarray:
    """Expand ``lead * prod (z - r)`` into coefficients."""
    c = np.array([lead], dtype=complex)
    for r in roots:
        c = mul(c, np.array([-r, 1.0], dtype=complex))
    return c


def _initial_guesses(c: np.ndarray) -> np.ndarray:
    n = len(c) - 1
    # Fujiwara-type bound on root moduli
    mags = np.abs(c[:-1] / c[-1])
    bound = 2.0 * np.max(mags ** (1.0 / np.arange(n, 0, -1)))
    radius = max(bound / 2.0, 1e-3)
    k = np.arange(n)
    # off-axis angles avoid symmetric stalls on real polynomials
    return radius * np.exp(1j * (2 * np.pi * k / n + 0.4))


def aberth(c, max_iter: int = 200) -> np.ndarray:
    """All roots of ``c`` by Aberth-Ehrlich simultaneous iteration.

    Converged when every root's correction is below ``1e-14 * max(1, |z|)``
    or its residual sits at the rounding level of the evaluation.
    """
    c = trim(c)
    n = len(c) - 1
    if n < 1:
        return np.zeros(0, dtype=complex)
    if n == 1:
        return np.array([-c[0] / c[1]])
    dc = derivative(c)
    z = _initial_guesses(c)
    for _ in range(max_iter):
        p = horner(c, z)
        dp = horner(dc, z)
        noise = 64 * EPS * horner_scale(c, z)
        settled = np.abs(p) <= noise
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            s = inv.sum(axis=1)
            step = ratio / (1.0 - ratio * s)
        step = np.where(settled | ~np.isfinite(step), 0.0, step)
        z = z - step
        if np.all(np.abs(step) <= 1e-14 * np.maximum(1.0, np.abs(z))):
            return z
    p = horner(c, z)
    if np.all(np.abs(p) <= 1e6 * EPS * horner_scale(c, z)):
        return z
    raise RootFindingError(f"Aberth iteration did not converge in {max_iter} steps")


def _newton_polish(c: np.ndarray, z: complex, steps: int = 4, reach: float = 0.0) -> complex:
    """A few Newton steps, each at most max(reach, 1e-3 * max(1, |z|)) long."""
    dc = derivative(c)
    for _ in range(steps):
        d = complex(horner(dc, z))
        if d == 0:
            break
        dz = complex(horner(c, z)) / d
        if not np.isfinite(dz) or abs(dz) > max(reach, 1e-3 * max(1.0, abs(z))):
            break
        z -= dz
    return z


def _cluster_ok(c: np.ndarray, center: complex, members: Sequence[complex], tol: float) -> bool:
    """Whether ``members`` approximate one root of multiplicity len(members) at ``center``.

    Either every derivative of order < m vanishes at ``center`` relative to
    its scale, or the members sit within the radius that coefficient
    rounding alone spreads an m-fold root over, (eps * scale / |c_m|)^(1/m)
    with c_m the m-th Taylor coefficient at ``center``.
    """
    m = len(members)
    if all(abs(complex(horner(derivative(c, j), center)))
           <= tol * max(float(horner_scale(derivative(c, j), center)), np.finfo(float).tiny)
           for j in range(m)):
        return True
    taylor = abs(complex(horner(derivative(c, m), center))) / math.factorial(m)
    if taylor == 0:
        return False
    scale = len(c) * float(horner_scale(c, center))
    spread = ROUNDING_SPREAD * (EPS * scale / taylor) ** (1.0 / m)
    return max(abs(z - center) for z in members) <= spread


def roots_with_multiplicity(
    coeffs,
    cluster_radius: float = 1e-7,
    max_radius: float = 1e-1,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> list[tuple[complex, int]]:
    """Distinct roots with multiplicities.

    Aberth approximations are merged into clusters starting at
    ``cluster_radius * max(1, |root|)``; the radius grows by decades up to
    ``max_radius`` since an m-fold root only resolves to about eps**(1/m).
    A merge is kept only if derivatives ``0..size-1`` vanish at the polished
    centre to relative ``tol``. Roots come back sorted by (real, imag).
    """
    c = trim(coeffs)
    if len(c) < 2:
        return []
    # exact zero roots from vanishing low-order coefficients
    k0 = int(np.flatnonzero(c)[0])
    out: list[tuple[complex, int]] = [(0j, k0)] if k0 else []
    c = c[k0:]
    if len(c) < 2:
        return out
    approx = aberth(c, max_iter=max_iter)
    clusters = [[complex(z)] for z in approx]
    radius = cluster_radius
    while radius <= max_radius * (1 + 1e-9):
        refused: set[tuple[complex, complex]] = set()
        while True:
            centers = [complex(np.mean(g)) for g in clusters]
            pairs = []
            for i in range(len(clusters)):
                for j in range(i + 1, len(clusters)):
                    d = abs(centers[i] - centers[j])
                    if d <= radius * max(1.0, abs(centers[i])):
                        if (centers[i], centers[j]) not in refused:
                            pairs.append((d, i, j))
            if not pairs:
                break
            _, i, j = min(pairs)
            group = clusters[i] + clusters[j]
            mid = complex(np.mean(group))
            ctr = _newton_polish(derivative(c, len(group) - 1), mid,
                                 reach=max(abs(z - mid) for z in group))
            if _cluster_ok(c, ctr, group, tol):
                clusters[i] = group
                del clusters[j]
            else:
                refused.add((centers[i], centers[j]))
        radius *= 10.0
    for g in clusters:
        ctr = complex(np.mean(g))
        ctr = _newton_polish(derivative(c, len(g) - 1), ctr, reach=max(abs(z - ctr) for z in g))
        out.append((ctr, len(g)))
    out.sort(key=lambda t: (round(t[0].real, 12), round(t[0].imag, 12)))
    return out
