"""Entire functions and their Newton maps.

Three representations are supported: polynomials, ``p * exp(q)`` with
polynomial ``p`` and ``q``, and a small registry of named transcendental
functions. Every Newton map is evaluated in exponential-free form. When ``p``
has multiple roots the common factor of ``p`` and ``p'`` is divided out, so
``N = z - A/B`` with coprime ``A`` and ``B``.

The scalar helpers (``eval_f``, ``eval_newton``, ...) return
:class:`EvalResult`. The array helpers (``newton_values`` ...) return a
``(values, status)`` pair and drive the vectorized dynamics code.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from . import polynomials as P

ZERO_TOL = 1e-12
GCD_TOL = 1e-10
LOG_MAX = float(np.log(np.finfo(float).max))  # ~709.78


class SpecError(ValueError):
    """Invalid function specification."""


class EvalStatus(enum.IntEnum):
    FINITE = 0
    POLE = 1
    OVERFLOW = 2


@dataclass(frozen=True)
class EvalResult:
    value: complex
    status: EvalStatus

    @property
    def finite(self) -> bool:
        return self.status is EvalStatus.FINITE


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle given by its lower-left and upper-right corners."""

    lo: complex
    hi: complex

    def __post_init__(self):
        if not (self.hi.real > self.lo.real and self.hi.imag > self.lo.imag):
            raise ValueError(f"degenerate window {self.lo} .. {self.hi}")

    def contains(self, z: complex) -> bool:
        return (self.lo.real <= z.real <= self.hi.real
                and self.lo.imag <= z.imag <= self.hi.imag)


def _coeff_tuple(coeffs) -> tuple[complex, ...]:
    return tuple(complex(c) for c in coeffs)


@dataclass(frozen=True)
class _RationalNewton:
    """N(z) = z - A(z)/B(z) with the common factor already cancelled."""

    A: np.ndarray
    B: np.ndarray
    reduced: bool

    @cached_property
    def dA(self):
        return P.derivative(self.A)

    @cached_property
    def dB(self):
        return P.derivative(self.B)


class FunctionSpec:
    """Base class of the three function representations."""

    kind: str

    def newton_values(self, z) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def newton_derivative_values(self, z) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def f_values(self, z) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def roots(self) -> list[tuple[complex, int]]:
        raise NotImplementedError


def _relatively_small(c: np.ndarray, value: np.ndarray, z: np.ndarray) -> np.ndarray:
    """|value| <= ZERO_TOL * horner_scale(c, z), with the scale computed only where needed.

    ``max|c_k| * max(1, |z|)^deg`` bounds the scale from above, so points
    clearing that bound are not small and skip the exact scale.
    """
    mag = np.abs(value)
    bound = np.max(np.abs(c)) * np.maximum(1.0, np.abs(z)) ** (len(c) - 1)
    out = mag <= ZERO_TOL * bound
    if np.any(out):
        out[out] = mag[out] <= ZERO_TOL * P.horner_scale(c, z[out])
    return out


class _PolyFamily(FunctionSpec):
    """Shared machinery for p * exp(q); a plain polynomial has q = 0."""

    @property
    def p(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def q(self) -> np.ndarray:
        return np.zeros(1, dtype=complex)

    @cached_property
    def _roots(self) -> list[tuple[complex, int]]:
        return P.roots_with_multiplicity(self.p)

    def roots(self) -> list[tuple[complex, int]]:
        return list(self._roots)

    @property
    def degree(self) -> int:
        return len(self.p) - 1

    @cached_property
    def rational(self) -> _RationalNewton:
        p, dq = self.p, P.derivative(self.q)
        dp = P.derivative(p)
        repeated = [r for r, m in self._roots for _ in range(m - 1)]
        if repeated:
            h = P.from_roots(repeated)
            A, ra = P.divmod_poly(p, h)
            Bp, rb = P.divmod_poly(dp, h)
            if (np.max(np.abs(ra)) <= GCD_TOL * np.max(np.abs(p))
                    and np.max(np.abs(rb)) <= GCD_TOL * max(np.max(np.abs(dp)), 1e-300)):
                return _RationalNewton(P.trim(A), P.trim(P.add(Bp, P.mul(dq, A))), True)
        return _RationalNewton(p, P.trim(P.add(dp, P.mul(dq, p))), not repeated)

    def _raw_newton(self, z):
        """z - A/B with poles set to inf; also flags common zeros of A and B."""
        R = self.rational
        with np.errstate(all="ignore"):
            a = P.horner(R.A, z)
            b = P.horner(R.B, z)
            small_b = _relatively_small(R.B, b, z)
            small_a = _relatively_small(R.A, a, z)
            val = z - a / b
        pole = small_b & ~small_a
        val[pole] = np.inf
        return val, pole, small_b & small_a

    def newton_values(self, z):
        z = np.asarray(z, dtype=complex)
        val, pole, both = self._raw_newton(z)
        status = np.zeros(z.shape, dtype=np.int8)
        status[pole] = EvalStatus.POLE
        if np.any(both):
            val[both] = _limit_fallback(lambda w: self._raw_newton(w)[0], z[both])
        status[(status == 0) & ~np.isfinite(val)] = EvalStatus.OVERFLOW
        return val, status

    def newton_derivative_values(self, z):
        z = np.asarray(z, dtype=complex)
        R = self.rational
        with np.errstate(all="ignore"):
            a, b = P.horner(R.A, z), P.horner(R.B, z)
            da, db = P.horner(R.dA, z), P.horner(R.dB, z)
            val = 1.0 - (da * b - a * db) / (b * b)
        _, status = self.newton_values(z)
        status = status.copy()
        val = np.where(status == EvalStatus.POLE, np.inf, val)
        bad = (status == 0) & ~np.isfinite(val)
        if np.any(bad):
            val[bad] = _central_difference(self.newton_values, z[bad])
        return val, status

    def f_values(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            pv = P.horner(self.p, z)
            qv = P.horner(self.q, z)
            log_mag = qv.real + np.log(np.abs(pv))
            over = log_mag > LOG_MAX
            val = np.where(over, np.inf, pv * np.exp(np.where(over, 0, qv)))
        status = np.where(over | ~np.isfinite(val), EvalStatus.OVERFLOW, 0).astype(np.int8)
        return val, status

    def critical_points(self) -> list[tuple[complex, int]]:
        """Zeros of N' = (B^2 - A'B + AB') / B^2 that are not poles of N."""
        R = self.rational
        W = P.add(P.mul(R.B, R.B), P.add(-P.mul(R.dA, R.B), P.mul(R.A, R.dB)))
        W = P.trim(W)
        if len(W) < 2 or np.max(np.abs(W)) <= 1e-14 * np.max(np.abs(P.mul(R.B, R.B))):
            return []
        out = []
        for c, m in P.roots_with_multiplicity(W):
            b = abs(complex(P.horner(R.B, c)))
            if b > 1e-8 * max(float(P.horner_scale(R.B, c)), 1e-300):
                out.append((c, m))
        return out

    def poles(self) -> list[tuple[complex, int]]:
        B = P.trim(self.rational.B)
        if len(B) < 2:
            return []
        return P.roots_with_multiplicity(B)


class Polynomial(_PolyFamily):
    kind = "poly"

    def __init__(self, coeffs):
        c = _coeff_tuple(coeffs)
        if len(c) < 2:
            raise SpecError("polynomial must have degree >= 1")
        if c[-1] == 0:
            raise SpecError("leading coefficient must be nonzero")
        self.coeffs = c

    @cached_property
    def p(self):
        return np.array(self.coeffs, dtype=complex)

    def __eq__(self, other):
        return isinstance(other, Polynomial) and other.coeffs == self.coeffs

    def __hash__(self):
        return hash(("poly", self.coeffs))

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)!r})"


class PolyExpPoly(_PolyFamily):
    """f = p * exp(q)."""

    kind = "poly_exp_poly"

    def __init__(self, p_coeffs, q_coeffs):
        p = _coeff_tuple(p_coeffs)
        q = _coeff_tuple(q_coeffs) or (0j,)
        if not p or not any(p):
            raise SpecError("p must not be identically zero")
        while len(p) > 1 and p[-1] == 0:
            p = p[:-1]
        self.p_coeffs, self.q_coeffs = p, q

    @cached_property
    def p(self):
        return np.array(self.p_coeffs, dtype=complex)

    @cached_property
    def q(self):
        return np.array(self.q_coeffs, dtype=complex)

    def __eq__(self, other):
        return (isinstance(other, PolyExpPoly)
                and (other.p_coeffs, other.q_coeffs) == (self.p_coeffs, self.q_coeffs))

    def __hash__(self):
        return hash(("pep", self.p_coeffs, self.q_coeffs))

    def __repr__(self):
        return f"PolyExpPoly({list(self.p_coeffs)!r}, {list(self.q_coeffs)!r})"


class _ZExpExpZ:
    """f(z) = z * exp(exp(z)).

    With w = z e^z we have f' = exp(e^z) (1 + w), so
    N = z - z/(1 + w) and N' = w (2 + z + w) / (1 + w)^2. For Re z >= 0 both
    are rewritten with u = e^{-z} so nothing overflows.
    """

    roots = [(0j, 1)]

    @staticmethod
    def newton(z):
        with np.errstate(all="ignore"):
            right = z.real >= 0
            u = np.exp(np.where(right, -z, 0))
            w = z * np.exp(np.where(right, 0, z))
            den = np.where(right, u + z, 1.0 + w)
            scale = np.where(right, np.maximum(np.abs(u), np.abs(z)), np.maximum(1.0, np.abs(w)))
            num = np.where(right, z * u, z)
            val = z - num / den
            pole = (np.abs(den) <= ZERO_TOL * scale) & (z != 0)
        return val, pole

    @staticmethod
    def derivative(z):
        with np.errstate(all="ignore"):
            right = z.real >= 0
            u = np.exp(np.where(right, -z, 0))
            w = z * np.exp(np.where(right, 0, z))
            left_val = w * (2 + z + w) / (1 + w) ** 2
            right_val = (z / (z + u)) * (((2 + z) * u + z) / (u + z))
        return np.where(right, right_val, left_val)

    @staticmethod
    def f(z):
        with np.errstate(all="ignore"):
            x, y = z.real, z.imag
            ex = np.exp(np.minimum(x, LOG_MAX - 1))
            re_exp = np.where(x < LOG_MAX - 1, ex * np.cos(y), np.sign(np.cos(y)) * np.inf)
            over = re_exp + np.log(np.maximum(np.abs(z), 1e-300)) > LOG_MAX
            inner = np.where(over | (x >= LOG_MAX - 1), 0, np.exp(np.where(x < LOG_MAX - 1, z, 0)))
            val = np.where(over, np.inf, z * np.exp(inner))
            val = np.where(~over & (x >= LOG_MAX - 1), 0j, val)
        return val, over


BUILTINS = {"z_exp_exp_z": _ZExpExpZ}


class Builtin(FunctionSpec):
    kind = "builtin"

    def __init__(self, name: str):
        if name not in BUILTINS:
            raise SpecError(f"unknown builtin {name!r}; known: {sorted(BUILTINS)}")
        self.name = name
        self._impl = BUILTINS[name]

    def roots(self):
        return list(self._impl.roots)

    def newton_values(self, z):
        z = np.asarray(z, dtype=complex)
        val, pole = self._impl.newton(z)
        status = np.zeros(z.shape, dtype=np.int8)
        status[pole] = EvalStatus.POLE
        val = np.where(pole, np.inf, val)
        status[(status == 0) & ~np.isfinite(val)] = EvalStatus.OVERFLOW
        return val, status

    def newton_derivative_values(self, z):
        z = np.asarray(z, dtype=complex)
        _, status = self.newton_values(z)
        val = self._impl.derivative(z)
        bad = (status == 0) & ~np.isfinite(val)
        if np.any(bad):
            val[bad] = _central_difference(self.newton_values, z[bad])
        return np.where(status == EvalStatus.POLE, np.inf, val), status

    def f_values(self, z):
        z = np.asarray(z, dtype=complex)
        val, over = self._impl.f(z)
        return val, np.where(over, EvalStatus.OVERFLOW, 0).astype(np.int8)

    def __eq__(self, other):
        return isinstance(other, Builtin) and other.name == self.name

    def __hash__(self):
        return hash(("builtin", self.name))

    def __repr__(self):
        return f"Builtin({self.name!r})"


def _limit_fallback(raw, z):
    # N extends holomorphically across common zeros; average raw values on a small ring
    h = 1e-6 * np.maximum(1.0, np.abs(z))
    acc = np.zeros(z.shape, dtype=complex)
    for k in range(4):
        v = raw(z + h * 1j**k)
        acc += v
    return acc / 4


def _central_difference(newton_values, z):
    h = 1e-6 * np.maximum(1.0, np.abs(z))
    vp, _ = newton_values(z + h)
    vm, _ = newton_values(z - h)
    return (vp - vm) / (2 * h)


def _scalar(values_status) -> EvalResult:
    v, s = values_status
    return EvalResult(complex(v.reshape(-1)[0]), EvalStatus(int(s.reshape(-1)[0])))


def eval_f(spec: FunctionSpec, z: complex) -> EvalResult:
    return _scalar(spec.f_values(np.array([z], dtype=complex)))


def eval_newton(spec: FunctionSpec, z: complex) -> EvalResult:
    return _scalar(spec.newton_values(np.array([z], dtype=complex)))


def eval_newton_derivative(spec: FunctionSpec, z: complex) -> EvalResult:
    return _scalar(spec.newton_derivative_values(np.array([z], dtype=complex)))


def newton_map(spec: FunctionSpec) -> Callable:
    """Vectorized evaluator ``z -> N(z)``; poles come back as ``inf``."""

    def N(z):
        arr = np.asarray(z, dtype=complex)
        val, _ = spec.newton_values(arr.reshape(-1))
        val = val.reshape(arr.shape)
        return complex(val) if arr.ndim == 0 else val

    return N


def poles_of_newton(spec: FunctionSpec, window: Window) -> list[tuple[complex, int]]:
    """Poles of N inside ``window`` with multiplicities.

    These are zeros of the reduced denominator ``p' + q'p`` (after removing
    the common factor with ``p``).
    """
    if isinstance(spec, Builtin):
        raise NotImplementedError(
            f"pole sets of transcendental Newton maps ({spec.name}) are infinite; not supported")
    return [(z, m) for z, m in spec.poles() if window.contains(z)]
