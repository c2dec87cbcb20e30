"""Fixed points of Newton maps and reconstruction of f from N.

A fixed point of N with multiplier (m-1)/m is a root of multiplicity m. The
map ``1/(z - N(z))`` equals the logarithmic derivative ``f'/f``, so its
residues are root multiplicities and integrating it recovers ``f`` up to a
constant factor.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import polynomials as P
from .functions import (Builtin, EvalStatus, FunctionSpec, Polynomial,
                        eval_newton, eval_newton_derivative)

Evaluator = Callable[[np.ndarray], np.ndarray]

RESIDUE_NODES = 2048
GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


class FixedPointError(ValueError):
    pass


class QuadratureError(RuntimeError):
    pass


class FixedPointKind(str, enum.Enum):
    ATTRACTING_ROOT = "AttractingRoot"
    VIOLATION = "Violation"


@dataclass(frozen=True)
class FixedPointRecord:
    location: complex
    multiplier: complex
    multiplicity: int
    kind: FixedPointKind

    def to_json(self) -> dict:
        return {
            "location": [self.location.real, self.location.imag],
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "multiplicity": self.multiplicity,
            "kind": self.kind.value,
        }


@dataclass(frozen=True)
class PathSpec:
    """Polygonal integration path from ``anchor`` through ``waypoints``.

    The target point is appended as the final vertex.
    """

    anchor: complex
    waypoints: tuple[complex, ...] = ()
    samples_per_segment: int = 4

    def __post_init__(self):
        if self.samples_per_segment < 1:
            raise ValueError("samples_per_segment must be positive")
        object.__setattr__(self, "waypoints", tuple(complex(w) for w in self.waypoints))

    def vertices(self, target: complex) -> list[complex]:
        return [complex(self.anchor), *self.waypoints, complex(target)]


@dataclass
class CriterionReport:
    records: list[FixedPointRecord] = field(default_factory=list)

    @property
    def is_newton_map(self) -> bool:
        return all(r.kind is FixedPointKind.ATTRACTING_ROOT for r in self.records)


def find_roots(spec: FunctionSpec) -> list[tuple[complex, int]]:
    """Roots of f with multiplicities (the finite fixed points of N_f)."""
    try:
        return spec.roots()
    except P.RootFindingError as exc:
        raise P.RootFindingError(f"root finding failed for {spec!r}: {exc}") from None


def _record(xi: complex, lam: complex, tol: float) -> FixedPointRecord:
    if not np.isfinite(lam) or abs(1 - lam) < 1e-12:
        return FixedPointRecord(xi, lam, 1, FixedPointKind.VIOLATION)
    m = max(1, int(round((1 / (1 - lam)).real)))
    ok = abs(lam - (m - 1) / m) <= tol and abs(lam) < 1
    return FixedPointRecord(xi, lam, m, FixedPointKind.ATTRACTING_ROOT if ok else FixedPointKind.VIOLATION)


def classify_fixed_point(spec: FunctionSpec, xi: complex, tol: float = 1e-6) -> FixedPointRecord:
    xi = complex(xi)
    n = eval_newton(spec, xi)
    if n.status is not EvalStatus.FINITE or abs(n.value - xi) > 1e-8 * max(1.0, abs(xi)):
        raise FixedPointError(f"{xi} is not a fixed point (N = {n.value})")
    lam = eval_newton_derivative(spec, xi).value
    return _record(xi, lam, tol)


def _separation(spec: FunctionSpec, xi: complex) -> float:
    others = [abs(r - xi) for r, _ in spec.roots() if abs(r - xi) > 1e-9 * max(1, abs(xi))]
    return min(others) if others else 1.0


def residue_at_fixed_point(spec: FunctionSpec, xi: complex, radius: float | None = None,
                           nodes: int = RESIDUE_NODES) -> complex:
    """(1/2 pi i) times the contour integral of 1/(z - N(z)) around xi.

    Trapezoid rule on a circle; a second pass at twice the node count must
    agree, otherwise a singularity sits too close to the contour. Without an
    explicit radius, 0.4 times the distance to the nearest other root is used.
    """
    if radius is None:
        radius = 0.4 * _separation(spec, xi)
    values = []
    for n in (nodes, 2 * nodes):
        t = np.exp(2j * np.pi * np.arange(n) / n)
        z = xi + radius * t
        N, status = spec.newton_values(z)
        if np.any(status == EvalStatus.POLE):
            raise QuadratureError(
                f"pole of N on the contour |z - {xi}| = {radius}; use a smaller radius")
        # dz = i r t dtheta
        values.append(np.mean(radius * t / (z - N)))
    if abs(values[1] - values[0]) > 1e-8 * max(1.0, abs(values[1])):
        raise QuadratureError(
            f"contour quadrature unstable at radius {radius}: {values[0]} vs {values[1]}")
    return complex(values[1])


def _segment_integral(integrand: Evaluator, a: complex, b: complex, start: int,
                      tol: float = 1e-9, max_halvings: int = 12) -> complex:
    prev = None
    n = start
    for _ in range(max_halvings + 1):
        edges = a + (b - a) * np.linspace(0.0, 1.0, n + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        z = (mid[:, None] + half[:, None] * GL_NODES[None, :]).ravel()
        w = (half[:, None] * GL_WEIGHTS[None, :]).ravel()
        cur = complex(np.sum(w * integrand(z)))
        if prev is not None and np.isfinite(cur) and abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
        n *= 2
    raise QuadratureError(f"segment {a} -> {b} did not converge after {max_halvings} halvings")


def reconstruct_entire_function(newton: Evaluator, path: PathSpec,
                                targets: Sequence[complex],
                                fixed_points: Sequence[complex] = ()) -> list[complex]:
    """exp of the integral of d zeta / (zeta - N(zeta)) from the anchor to each target.

    The result is f / f(anchor) along the chosen homotopy class of paths; the
    logarithmic derivative is integrated and exponentiated once at the end.
    """
    def integrand(z):
        return 1.0 / (z - newton(z))

    out = []
    for target in targets:
        verts = path.vertices(target)
        for a, b in zip(verts[:-1], verts[1:]):
            for xi in fixed_points:
                if _point_segment_distance(complex(xi), a, b) < 1e-6:
                    raise ValueError(f"path segment {a} -> {b} passes through fixed point {xi}")
        total = sum(_segment_integral(integrand, a, b, path.samples_per_segment)
                    for a, b in zip(verts[:-1], verts[1:]) if a != b)
        out.append(complex(np.exp(total)))
    return out


def _point_segment_distance(p: complex, a: complex, b: complex) -> float:
    d = b - a
    if d == 0:
        return abs(p - a)
    t = min(1.0, max(0.0, ((p - a) * d.conjugate()).real / abs(d) ** 2))
    return abs(p - (a + t * d))


def head_polynomial(points: Sequence[tuple[complex, int]], a: complex = 1.0) -> Polynomial:
    """The polynomial a * prod (z - a_j)^m_j whose Newton map has these fixed points."""
    if a == 0:
        raise ValueError("leading factor a must be nonzero")
    pts = [(complex(z), int(m)) for z, m in points]
    for i, (zi, mi) in enumerate(pts):
        if mi < 1:
            raise ValueError(f"multiplicity of {zi} must be positive")
        for zj, _ in pts[:i]:
            if abs(zi - zj) <= 1e-9:
                raise ValueError(f"duplicate fixed point {zi}")
    roots = [z for z, m in pts for _ in range(m)]
    if not roots:
        raise ValueError("need at least one fixed point")
    return Polynomial(P.from_roots(roots, lead=a))


def verify_newton_criterion(newton: Evaluator, candidates: Sequence[complex],
                            tol: float = 1e-6, h: float = 1e-5) -> CriterionReport:
    """Check N'(xi) = (m-1)/m at each candidate fixed point.

    ``newton`` is any vectorized map; its derivative is taken by a
    fourth-order central difference with step ``h * max(1, |xi|)``.
    """
    report = CriterionReport()
    for xi in candidates:
        xi = complex(xi)
        if isinstance(newton, FunctionSpec):
            lam = eval_newton_derivative(newton, xi).value
        else:
            s = h * max(1.0, abs(xi))
            v = np.asarray(newton(xi + s * np.array([-2, -1, 1, 2])), dtype=complex)
            lam = complex((v[0] - 8 * v[1] + 8 * v[2] - v[3]) / (12 * s))
        report.records.append(_record(xi, lam, tol))
    return report


def classify_all(spec: FunctionSpec) -> list[FixedPointRecord]:
    if isinstance(spec, Builtin):
        return [classify_fixed_point(spec, r) for r, _ in spec.roots()]
    return [classify_fixed_point(spec, r) for r, _ in find_roots(spec)]
