"""Winding numbers, Lefschetz indices and fixed-point counts for planar maps.

Maps are vectorized callables ``z -> f(z)``; a :class:`RationalMap`, a
:class:`FunctionSpec` (meaning its Newton map) or any numpy-aware function
will do. Windings are accumulated from principal-value argument increments,
each at most pi/2 in size; mapped curves are refined adaptively until that
holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import shapely
from scipy.optimize import linear_sum_assignment

from . import polynomials as P
from .functions import FunctionSpec, _PolyFamily

MIN_POINTS = 64
MAX_STEP = np.pi / 2
MAX_CONFIDENCE = 0.25
MAX_REFINED = 1 << 20
FIXED_TOL = 1e-6
CRITICAL_CLEARANCE = 1e-4
BRANCH_CLEARANCE = 1e-6
PROBES = 8
PROBE_DEPTH = 1e-3


class WindingError(ValueError):
    """A winding integral that cannot be trusted at the given resolution."""


class ConfigurationError(ValueError):
    """The hypotheses of the fixed-point count are not met."""


# -- curves -------------------------------------------------------------------


@dataclass
class SampledCurve:
    """Closed polyline; the last point connects back to the first."""

    points: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex).ravel()
        if self.points.size < MIN_POINTS:
            raise WindingError(f"curve needs at least {MIN_POINTS} points, got {self.points.size}")

    @classmethod
    def circle(cls, center: complex = 0j, radius: float = 1.0, n: int = 512,
               turns: int = 1) -> "SampledCurve":
        """Counter-clockwise circle (clockwise for negative ``turns``)."""
        t = 2 * np.pi * turns * np.arange(n * abs(turns)) / (n * abs(turns))
        return cls(center + radius * np.exp(1j * t))

    @property
    def segments(self) -> np.ndarray:
        return np.roll(self.points, -1) - self.points

    @property
    def diameter(self) -> float:
        p = self.points
        # bounding-box diagonal is within a factor sqrt(2) of the true diameter
        return float(np.hypot(np.ptp(p.real), np.ptp(p.imag)))

    @property
    def signed_area(self) -> float:
        p, q = self.points, np.roll(self.points, -1)
        return 0.5 * float(np.sum(p.real * q.imag - q.real * p.imag))

    @property
    def orientation(self) -> int:
        return 1 if self.signed_area >= 0 else -1

    @property
    def length(self) -> float:
        return float(np.sum(np.abs(self.segments)))

    def resolution_ok(self) -> bool:
        return float(np.max(np.abs(self.segments))) <= self.diameter / 16

    def is_simple(self) -> bool:
        return bool(shapely.LinearRing(np.column_stack([self.points.real, self.points.imag])).is_simple)

    def polygon(self) -> shapely.Polygon:
        return shapely.Polygon(np.column_stack([self.points.real, self.points.imag]))

    def contains(self, z) -> np.ndarray:
        """Strict interior membership for a simple curve."""
        z = np.asarray(z, dtype=complex)
        return shapely.contains_xy(self.polygon(), z.real, z.imag)

    def distance(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex).ravel()
        ring = shapely.LinearRing(np.column_stack([self.points.real, self.points.imag]))
        return shapely.distance(ring, shapely.points(z.real, z.imag))

    def interior_point(self) -> complex:
        p = self.polygon().representative_point()
        return complex(p.x, p.y)


@dataclass(frozen=True)
class WindingReport:
    turns: int
    raw: float
    confidence: float
    label: str = "winding"

    def to_json(self) -> dict:
        return {"turns": self.turns, "raw": self.raw, "confidence": self.confidence,
                "label": self.label}


def _report(total_angle: float, label: str = "winding") -> WindingReport:
    raw = total_angle / (2 * np.pi)
    turns = int(round(raw))
    conf = abs(raw - turns)
    if conf > MAX_CONFIDENCE:
        raise WindingError(f"accumulated {raw:.4f} turns is not close to an integer")
    return WindingReport(turns, float(raw), float(conf), label)


def _increments(w: np.ndarray) -> np.ndarray:
    return np.angle(np.roll(w, -1) / w)


def winding_number(curve: SampledCurve, about: complex = 0j) -> WindingReport:
    """Turns of ``curve`` around ``about``."""
    w = curve.points - about
    if np.min(np.abs(w)) <= 1e-9:
        raise WindingError(f"curve passes within 1e-9 of {about}")
    if not curve.resolution_ok():
        raise WindingError("curve too coarse: some gap exceeds 1/16 of its diameter; refine it")
    d = _increments(w)
    if np.max(np.abs(d)) > MAX_STEP:
        raise WindingError("argument jumps by more than pi/2 between samples; refine the curve")
    return _report(float(np.sum(d)))


# -- maps ---------------------------------------------------------------------


@dataclass(frozen=True)
class RationalMap:
    """R = num / den with ascending coefficient arrays."""

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num, den = P.trim(P.as_coeffs(self.num)), P.trim(P.as_coeffs(self.den))
        if not np.any(den):
            raise ValueError("denominator is identically zero")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def newton(cls, spec: _PolyFamily) -> "RationalMap":
        """N = z - A/B = (z B - A) / B with the repeated-root factor cancelled."""
        R = spec.rational
        return cls(P.add(P.mul(np.array([0, 1], dtype=complex), R.B), -R.A), R.B)

    @classmethod
    def monomial(cls, c: complex, k: int) -> "RationalMap":
        """c * z**k; negative ``k`` gives c / z**|k|."""
        if k >= 0:
            num = np.zeros(k + 1, dtype=complex)
            num[k] = c
            return cls(num, np.ones(1, dtype=complex))
        den = np.zeros(-k + 1, dtype=complex)
        den[-k] = 1
        return cls(np.array([c], dtype=complex), den)

    @property
    def degree(self) -> int:
        return max(len(self.num), len(self.den)) - 1

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            return P.horner(self.num, z) / P.horner(self.den, z)

    def poles(self) -> list[tuple[complex, int]]:
        if len(self.den) < 2:
            return []
        return P.roots_with_multiplicity(self.den)

    def fixed_point_polynomial(self) -> np.ndarray:
        """z * den - num, whose zeros are the finite fixed points."""
        return P.trim(P.add(P.mul(np.array([0, 1], dtype=complex), self.den), -self.num))

    def fixed_points(self) -> list[tuple[complex, int]]:
        c = self.fixed_point_polynomial()
        return P.roots_with_multiplicity(c) if len(c) > 1 else []

    def critical_points(self) -> list[complex]:
        w = P.trim(P.add(P.mul(P.derivative(self.num), self.den),
                         -P.mul(self.num, P.derivative(self.den))))
        if len(w) < 2:
            return []
        return [c for c, m in P.roots_with_multiplicity(w) for _ in range(m)]

    def critical_values(self) -> np.ndarray:
        c = np.array(self.critical_points(), dtype=complex)
        v = self(c) if c.size else c
        return v[np.isfinite(v)]

    def to_json(self) -> dict:
        return {"kind": "rational",
                "num": [[c.real, c.imag] for c in self.num],
                "den": [[c.real, c.imag] for c in self.den]}


MapLike = Callable | RationalMap | FunctionSpec


def as_map(m: MapLike) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized evaluator for a map-like object (a spec means its Newton map)."""
    if isinstance(m, FunctionSpec):
        def N(z):
            z = np.asarray(z, dtype=complex)
            return m.newton_values(z.ravel())[0].reshape(z.shape)
        return N
    return lambda z: np.asarray(m(np.asarray(z, dtype=complex)), dtype=complex)


def _poles_of(m: MapLike) -> list[tuple[complex, int]] | None:
    if isinstance(m, RationalMap):
        return m.poles()
    if isinstance(m, _PolyFamily):
        return m.poles()
    return None


def _refined_winding(fn: Callable, pts: np.ndarray, about: complex = 0j,
                     shift: bool = False) -> float:
    """Total argument change of fn(z) - about (minus z when ``shift``) along a closed polyline.

    Segments whose image turns by more than pi/2 are split at their midpoint
    until none is left.
    """
    pts = np.asarray(pts, dtype=complex)

    def g(z):
        fz = fn(z)
        v = fz - about - (z if shift else 0)
        # below this the difference is rounding noise
        floor = 1e-13 * np.maximum(np.maximum(1.0, np.abs(fz)), np.abs(z) if shift else abs(about))
        if not np.all(np.isfinite(v)):
            raise WindingError("map is not finite on the curve")
        if np.any(np.abs(v) <= floor):
            raise WindingError("image passes through the reference point at rounding level")
        return v

    vals = g(pts)
    while True:
        d = _increments(vals)
        bad = np.flatnonzero(np.abs(d) > MAX_STEP)
        if bad.size == 0:
            return float(np.sum(d))
        if pts.size + bad.size > MAX_REFINED:
            raise WindingError("winding did not resolve within the refinement limit")
        nxt = np.roll(pts, -1)
        mids = 0.5 * (pts[bad] + nxt[bad])
        mvals = g(mids)
        pts = np.insert(pts, bad + 1, mids)
        vals = np.insert(vals, bad + 1, mvals)


def lefschetz_index(m: MapLike, xi: complex, eps: float = 1e-3, n: int = 256) -> WindingReport:
    """Turns of f(z) - z along the circle |z - xi| = eps, confirmed at eps/2."""
    fn = as_map(m)
    reports = []
    for r in (eps, eps / 2):
        circle = SampledCurve.circle(xi, r, n)
        reports.append(_report(_refined_winding(fn, circle.points, shift=True), "lefschetz_index"))
    if reports[0].turns != reports[1].turns:
        raise WindingError(f"index not stable: {reports[0].turns} at eps={eps}, "
                           f"{reports[1].turns} at eps={eps / 2}")
    return reports[1]


def sum_indices_inside(m: MapLike, curve: SampledCurve) -> WindingReport:
    """Turns of f(z) - z along ``curve``.

    Equals the total index of the enclosed fixed points for a holomorphic
    map; with poles inside it counts fixed points minus poles, and the label
    says so. Maps of unknown pole structure are labelled ``winding``.
    """
    fn = as_map(m)
    g = fn(curve.points) - curve.points
    if not np.all(np.isfinite(g)):
        raise WindingError("map has a pole on the curve")
    if np.min(np.abs(g)) < FIXED_TOL:
        raise WindingError("fixed point on the curve")
    if not curve.resolution_ok():
        raise WindingError("curve too coarse: some gap exceeds 1/16 of its diameter; refine it")
    poles = _poles_of(m)
    if poles is None:
        label = "winding"
    elif any(curve.contains(np.array([p]))[0] for p, _ in poles):
        label = "fixed_points_minus_poles"
    else:
        label = "index_sum"
    return _report(_refined_winding(fn, curve.points, shift=True), label)


def degree_on_curve(m: MapLike, curve: SampledCurve, about: complex = 0j) -> WindingReport:
    """Turns of the image curve f(curve) around ``about``."""
    fn = as_map(m)
    img = fn(curve.points)
    if np.min(np.abs(img - about)) <= 1e-9 * max(1.0, abs(about)):
        raise WindingError(f"{about} lies on the image curve")
    return _report(_refined_winding(fn, curve.points, about), "degree")


# -- preimages ----------------------------------------------------------------


@dataclass
class PreimageCurve(SampledCurve):
    """A closed preimage component; ``sheets`` target turns close it up."""

    sheets: int = 1
    degree: int = 1


def _match(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
    """Order ``cur`` to continue the strands ending at ``prev``.

    Nearest neighbours when they form an unambiguous permutation, otherwise a
    minimal total displacement assignment.
    """
    d = np.abs(prev[:, None] - cur[None, :])
    near = np.argmin(d, axis=1)
    if np.unique(near).size == near.size:
        srt = np.sort(d, axis=1)
        if srt.shape[1] < 2 or np.all(srt[:, 0] < 0.5 * srt[:, 1]):
            return cur[near]
    _, col = linear_sum_assignment(d)
    return cur[col]


def trace_preimage_curves(m: RationalMap | _PolyFamily, target: SampledCurve) -> list[PreimageCurve]:
    """Closed components of the preimage of ``target`` under a rational map.

    Each target sample w is pulled back by solving num - w den = 0; the
    preimages are threaded into strands sample by sample, and strands are
    joined into closed curves by the permutation they induce after one turn.
    """
    R = m if isinstance(m, RationalMap) else RationalMap.newton(m)
    w = target.points
    cv = R.critical_values()
    if cv.size and np.min(np.abs(w[:, None] - cv[None, :])) < CRITICAL_CLEARANCE:
        raise WindingError("target passes within 1e-4 of a critical value")
    d = R.degree
    sheets = np.empty((w.size, d), dtype=complex)
    for j, wj in enumerate(w):
        c = P.add(R.num, -wj * R.den)
        c = P.trim(c)
        if len(c) - 1 != d:
            raise WindingError(f"target sample {wj} has a preimage at infinity")
        z = P.aberth(c)
        if d > 1:
            gap = np.where(np.eye(d, dtype=bool), np.inf, np.abs(z[:, None] - z[None, :]))
            if np.min(gap) < BRANCH_CLEARANCE:
                raise WindingError("preimage branches closer than 1e-6; use more target samples")
        sheets[j] = z if j == 0 else _match(sheets[j - 1], z)
    # where does strand k land after one turn of the target?
    perm = np.argmin(np.abs(sheets[-1][:, None] - sheets[0][None, :]), axis=1)
    if np.unique(perm).size != d:
        perm = linear_sum_assignment(np.abs(sheets[-1][:, None] - sheets[0][None, :]))[1]
    seen = np.zeros(d, dtype=bool)
    out = []
    for k in range(d):
        if seen[k]:
            continue
        cycle, s = [], k
        while not seen[s]:
            seen[s] = True
            cycle.append(s)
            # the sample after the last one continues at strand perm[s] of sample 0
            s = int(perm[s])
        pts = np.concatenate([sheets[:, s] for s in cycle])
        comp = PreimageCurve(pts, sheets=len(cycle))
        comp.degree = len(cycle) * comp.orientation * target.orientation
        out.append(comp)
    return out


# -- fixed-point count --------------------------------------------------------


@dataclass
class ComponentRecord:
    degree: int
    length: float
    counted: bool
    on_boundary: bool

    def to_json(self) -> dict:
        return {"degree": self.degree, "length": self.length, "counted": self.counted,
                "on_boundary": self.on_boundary}


@dataclass
class FixedPointCountReport:
    L: int
    sum_indices: int
    components: list[ComponentRecord]
    fixed_points: list[tuple[complex, int]]
    boundary_probe_fraction: float | None = None

    @property
    def verdict(self) -> bool:
        return self.L == self.sum_indices

    def to_json(self) -> dict:
        return {
            "L": self.L,
            "sum_indices": self.sum_indices,
            "verdict": self.verdict,
            "components": [c.to_json() for c in self.components],
            "fixed_points": [{"location": [z.real, z.imag], "index": i} for z, i in self.fixed_points],
            "boundary_probe_fraction": self.boundary_probe_fraction,
        }


def _boundary_probes(delta: SampledCurve) -> np.ndarray:
    """PROBES points per boundary sample, PROBE_DEPTH * diameter inside."""
    p, seg = delta.points, delta.segments
    # the interior lies to the left of a counter-clockwise curve
    inward = 1j * seg / np.abs(seg) * delta.orientation
    frac = (np.arange(PROBES) + 0.5) / PROBES
    return (p[:, None] + frac[None, :] * seg[:, None]
            + PROBE_DEPTH * delta.diameter * inward[:, None]).ravel()


def _one_traversal(img: np.ndarray) -> np.ndarray:
    """One sheet of an image curve that covers a Jordan curve k times.

    k is the tangent turning number, which is +-1 for a simple closed curve.
    The sheet ends at the sample closest to the start near index n/k; the
    whole image must stay within one step of that sheet, else ``img`` is
    returned unchanged and fails the simplicity check downstream.
    """
    n = img.size
    seg = np.roll(img, -1) - img
    seg = seg[seg != 0]
    k = int(round(abs(float(np.sum(np.angle(np.roll(seg, -1) / seg)))) / (2 * np.pi)))
    if k <= 1 or n // k < MIN_POINTS:
        return img
    lo, hi = max(1, n // k - 2), min(n - 1, n // k + 3)
    j = lo + int(np.argmin(np.abs(img[lo:hi] - img[0])))
    sheet = SampledCurve(img[:j])
    if np.max(sheet.distance(img)) > float(np.max(np.abs(seg))):
        return img
    return sheet.points


def _index_radius(z: complex, others: Sequence[complex]) -> float:
    gaps = [abs(z - o) for o in others if abs(z - o) > 1e-12]
    return min([1e-3] + [0.25 * g for g in gaps])


def verify_fixed_point_count(m: RationalMap | _PolyFamily, delta: SampledCurve) -> FixedPointCountReport:
    """Compare L(f), summed over preimage components of f(boundary), with the fixed-point index sum.

    Raises :class:`ConfigurationError` when the image of the boundary is not
    a simple curve, re-enters the disk, or the boundary carries a fixed point.
    """
    R = m if isinstance(m, RationalMap) else RationalMap.newton(m)
    if not delta.is_simple():
        raise ConfigurationError("boundary curve is not simple")
    img_pts = R(delta.points)
    if not np.all(np.isfinite(img_pts)):
        raise ConfigurationError("map has a pole on the boundary")
    if np.min(np.abs(img_pts - delta.points)) < FIXED_TOL:
        raise ConfigurationError("fixed point on the boundary")
    image = SampledCurve(_one_traversal(img_pts))
    if not image.is_simple():
        raise ConfigurationError("image of the boundary is not a simple closed curve")
    if np.any(delta.contains(img_pts)):
        raise ConfigurationError("image of the boundary meets the open disk")

    diam = delta.diameter
    # boundary points between vertices sit up to a chord sagitta off the polyline
    near = 1e-6 * diam + float(np.max(np.abs(delta.segments))) ** 2 / diam
    comps = trace_preimage_curves(R, image)
    records, L, fraction = [], 0, None
    for c in comps:
        on_boundary = bool(np.max(delta.distance(c.points)) <= near)
        if on_boundary:
            probes = _boundary_probes(delta)
            probes = probes[delta.contains(probes)]
            fraction = float(np.mean(image.contains(R(probes)))) if probes.size else 0.0
            counted = fraction == 1.0
        else:
            counted = bool(np.any(delta.contains(c.points)))
        records.append(ComponentRecord(c.degree, c.length, counted, on_boundary))
        if counted:
            L += abs(c.degree)

    fps = [(z, k) for z, k in R.fixed_points() if delta.contains(np.array([z]))[0]]
    pts = [z for z, _ in R.fixed_points()] + [z for z, _ in R.poles()]
    indexed = []
    for z, _ in fps:
        eps = min(_index_radius(z, pts), 0.5 * float(np.min(delta.distance(np.array([z])))))
        indexed.append((z, lefschetz_index(R, z, eps).turns))
    return FixedPointCountReport(L, sum(i for _, i in indexed), records, indexed, fraction)


# -- Herman rings -------------------------------------------------------------


@dataclass
class HermanReport:
    applicable: bool
    reason: str
    degree: int | None = None
    index_sum: int | None = None

    @property
    def passed(self) -> bool:
        """True when not applicable or when a fixed point is enclosed."""
        return not self.applicable or (self.index_sum is not None and self.index_sum >= 1)

    def to_json(self) -> dict:
        return {"applicable": self.applicable, "reason": self.reason, "degree": self.degree,
                "index_sum": self.index_sum, "passed": self.passed}


def herman_ring_obstruction(m: MapLike, curve: SampledCurve, tol: float = 1e-3) -> HermanReport:
    """An invariant curve mapped onto itself with degree one must enclose a fixed point."""
    fn = as_map(m)
    img = fn(curve.points)
    if not np.all(np.isfinite(img)):
        return HermanReport(False, "map has a pole on the curve")
    gap = float(np.max(curve.distance(img)))
    if gap > tol * curve.diameter:
        return HermanReport(False, f"curve is not invariant (image strays {gap:.3g} from it)")
    deg = degree_on_curve(m, curve, curve.interior_point()).turns
    if deg != 1:
        return HermanReport(False, f"degree on the curve is {deg}, not 1", deg)
    s = sum_indices_inside(m, curve).turns
    return HermanReport(True, "invariant curve of degree one", deg, s)
