"""Orbits, basin rasters, and channel analysis for Newton maps.

All orbit work goes through :func:`iterate_orbits`, which advances a whole
batch of starting points at once. The scalar :func:`iterate_orbit` is the
one-element case, so scalar and raster results always agree.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from . import _kernels, polynomials as P
from .functions import Builtin, EvalStatus, FunctionSpec, Polynomial, Window, _PolyFamily

# set to route rational maps through the pure numpy loop (used to cross-check)
_FORCE_NUMPY = False

CAPTURE_RADIUS = 1e-8
ESCAPE_RADIUS = 1e6
ESCAPE_HOLD = 5
POLE_NUDGE = 1e-9
RIGHTWARD_FLOOR = 2.0
DEFAULT_BUDGET = 500


class Fate(enum.IntEnum):
    CONVERGED = 0
    ESCAPED = 1
    HIT_POLE = 2
    UNDECIDED = 3


@dataclass(frozen=True)
class OrbitOutcome:
    fate: Fate
    iterations: int
    final_point: complex
    root_index: int | None = None


@dataclass
class OrbitBatch:
    """Struct-of-arrays result for many orbits."""

    fate: np.ndarray  # int8, Fate values
    root: np.ndarray  # int32, root index or -1
    iterations: np.ndarray  # int32
    final: np.ndarray  # complex

    def labels(self) -> np.ndarray:
        """Root index where converged, else -1 - fate (escaped -2, pole -3, undecided -4)."""
        return np.where(self.fate == Fate.CONVERGED, self.root, -1 - self.fate.astype(np.int32))

    def outcome(self, i: int) -> OrbitOutcome:
        f = Fate(int(self.fate[i]))
        return OrbitOutcome(f, int(self.iterations[i]), complex(self.final[i]),
                            int(self.root[i]) if f is Fate.CONVERGED else None)


def root_locations(spec: FunctionSpec) -> np.ndarray:
    return np.array([r for r, _ in spec.roots()], dtype=complex)


def iterate_orbits(spec: FunctionSpec, z0, budget: int = DEFAULT_BUDGET,
                   roots: np.ndarray | None = None) -> OrbitBatch:
    """Classify the forward orbits of all points in ``z0`` under N.

    Converged: within ``1e-8 * max(1, |root|)`` of a root. Escaped: for
    ``5`` consecutive iterates ``|z| > 1e6`` with non-decreasing modulus, or
    (transcendental builtins) real part increasing above 2. On a pole the
    orbit restarts from a ``1e-9`` relative nudge in the imaginary direction;
    a second pole, or running out of budget after a nudge, gives HitPole at
    the iteration of the first pole.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    z0 = np.asarray(z0, dtype=complex).ravel()
    n = z0.size
    if roots is None:
        roots = root_locations(spec)
    roots = np.asarray(roots, dtype=complex)
    cap = CAPTURE_RADIUS * np.maximum(1.0, np.abs(roots))
    if isinstance(spec, _PolyFamily) and not _FORCE_NUMPY:
        R = spec.rational
        fate, root_idx, iters, final = _kernels.rational_orbits(
            np.ascontiguousarray(R.A), np.ascontiguousarray(R.B), z0, roots, cap, budget,
            ESCAPE_RADIUS, ESCAPE_HOLD, POLE_NUDGE)
        return OrbitBatch(fate, root_idx, iters, final)
    rightward = isinstance(spec, Builtin)

    fate = np.full(n, Fate.UNDECIDED, dtype=np.int8)
    root_idx = np.full(n, -1, dtype=np.int32)
    iters = np.full(n, budget, dtype=np.int32)
    final = z0.copy()

    idx = np.arange(n)
    z = z0.copy()
    hold = np.zeros(n, dtype=np.int32)
    re_hold = np.zeros(n, dtype=np.int32)
    prev_abs = np.abs(z)
    prev_re = z.real.copy()
    nudged = np.zeros(n, dtype=bool)
    pole_at = np.full(n, -1, dtype=np.int32)

    def finish(mask, f, count, r=None):
        g = idx[mask]
        fate[g] = f
        iters[g] = count[mask] if isinstance(count, np.ndarray) else count
        final[g] = z[mask]
        if r is not None:
            root_idx[g] = r[mask]

    for step in range(budget + 1):
        if idx.size == 0:
            break
        done = np.zeros(idx.size, dtype=bool)
        if roots.size:
            dist = np.abs(z[:, None] - roots[None, :])
            near = dist <= cap[None, :]
            hit = near.any(axis=1)
            if np.any(hit):
                finish(hit, Fate.CONVERGED, step, np.argmax(near, axis=1).astype(np.int32))
                done |= hit
        if step > 0:
            a = np.abs(z)
            grow = (a > ESCAPE_RADIUS) & (a >= prev_abs)
            hold = np.where(grow, hold + 1, 0)
            esc = hold >= ESCAPE_HOLD
            if rightward:
                rr = (z.real > prev_re) & (z.real > RIGHTWARD_FLOOR)
                re_hold = np.where(rr, re_hold + 1, 0)
                esc |= re_hold >= ESCAPE_HOLD
            esc &= ~done
            if np.any(esc):
                finish(esc, Fate.ESCAPED, step)
                done |= esc
        if step == budget:
            rest = ~done
            finish(rest & nudged, Fate.HIT_POLE, pole_at)
            finish(rest & ~nudged, Fate.UNDECIDED, step)
            idx = idx[:0]
            break
        keep = ~done
        idx, z, hold, re_hold = idx[keep], z[keep], hold[keep], re_hold[keep]
        nudged, pole_at = nudged[keep], pole_at[keep]
        prev_abs, prev_re = np.abs(z), z.real.copy()

        nz, status = spec.newton_values(z)
        bad = status != EvalStatus.FINITE
        if np.any(bad):
            second = bad & nudged
            if np.any(second):
                finish(second, Fate.HIT_POLE, pole_at)
            first = bad & ~nudged
            if np.any(first):
                pole_at[first] = step
                nudged[first] = True
                zp = z[first] + 1j * POLE_NUDGE * np.maximum(1.0, np.abs(z[first]))
                v2, s2 = spec.newton_values(zp)
                again = s2 != EvalStatus.FINITE
                v2 = np.where(again, zp, v2)
                nz[first] = v2
                fails = np.zeros(idx.size, dtype=bool)
                fails[np.flatnonzero(first)[again]] = True
                if np.any(fails):
                    finish(fails, Fate.HIT_POLE, pole_at)
                    second |= fails
            keep = ~second
            idx, nz, hold, re_hold = idx[keep], nz[keep], hold[keep], re_hold[keep]
            nudged, pole_at = nudged[keep], pole_at[keep]
            prev_abs, prev_re = prev_abs[keep], prev_re[keep]
        z = nz
    return OrbitBatch(fate, root_idx, iters, final)


def iterate_orbit(spec: FunctionSpec, z0: complex, budget: int = DEFAULT_BUDGET) -> OrbitOutcome:
    return iterate_orbits(spec, [z0], budget).outcome(0)


def orbit_points(spec: FunctionSpec, z0: complex, steps: int) -> np.ndarray:
    """The first ``steps + 1`` iterates z0, N(z0), ... (stops early at a pole)."""
    out = [complex(z0)]
    z = np.array([z0], dtype=complex)
    for _ in range(steps):
        z, st = spec.newton_values(z)
        if st[0] != EvalStatus.FINITE:
            break
        out.append(complex(z[0]))
    return np.array(out)


@dataclass
class BasinRaster:
    window: Window
    width: int
    height: int
    fate: np.ndarray  # (height, width) int8, row 0 at the top
    root: np.ndarray
    iterations: np.ndarray
    roots: np.ndarray
    budget: int

    def __post_init__(self):
        assert self.fate.shape == (self.height, self.width)


def pixel_centers(window: Window, width: int, height: int) -> np.ndarray:
    """Complex pixel centres, shape (height, width); row 0 is the top edge."""
    lo, hi = window.lo, window.hi
    xs = lo.real + (np.arange(width) + 0.5) * ((hi.real - lo.real) / width)
    ys = hi.imag - (np.arange(height) + 0.5) * ((hi.imag - lo.imag) / height)
    return xs[None, :] + 1j * ys[:, None]


def compute_basin_raster(spec: FunctionSpec, window: Window, width: int, height: int,
                         budget: int = DEFAULT_BUDGET, rows_per_chunk: int = 64) -> BasinRaster:
    if width < 1 or height < 1:
        raise ValueError("raster needs positive width and height")
    roots = root_locations(spec)
    grid = pixel_centers(window, width, height)
    fate = np.empty((height, width), dtype=np.int8)
    root = np.empty((height, width), dtype=np.int32)
    its = np.empty((height, width), dtype=np.int32)
    # rows are independent; chunking only bounds memory
    for r0 in range(0, height, rows_per_chunk):
        sl = slice(r0, min(height, r0 + rows_per_chunk))
        b = iterate_orbits(spec, grid[sl].ravel(), budget, roots)
        shape = grid[sl].shape
        fate[sl], root[sl], its[sl] = (b.fate.reshape(shape), b.root.reshape(shape),
                                       b.iterations.reshape(shape))
    return BasinRaster(window, width, height, fate, root, its, roots, budget)


# -- channels -----------------------------------------------------------------


@dataclass
class CircleSample:
    radius: float
    angles: np.ndarray
    labels: np.ndarray  # see OrbitBatch.labels

    @property
    def reliable(self) -> bool:
        return not np.any(self.labels == -1 - Fate.UNDECIDED)


def sample_circle(spec: FunctionSpec, radius: float, samples: int,
                  budget: int = DEFAULT_BUDGET) -> CircleSample:
    """Fates of ``samples`` equally spaced starts on a circle, the first at angle 0."""
    angles = 2 * np.pi * np.arange(samples) / samples
    b = iterate_orbits(spec, radius * np.exp(1j * angles), budget)
    return CircleSample(radius, angles, b.labels())


def _runs(labels: np.ndarray) -> list[tuple[int, int, int]]:
    """Maximal circular runs as (start, length, label); a run may wrap past index 0."""
    n = labels.size
    change = np.flatnonzero(labels != np.roll(labels, 1))
    if change.size == 0:
        return [(0, n, int(labels[0]))]
    starts = list(change)
    out = []
    for k, s in enumerate(starts):
        e = starts[(k + 1) % len(starts)]
        out.append((int(s), int((e - s) % n), int(labels[s])))
    return out


def _arc(start: int, length: int, n: int) -> tuple[float, float]:
    lo = 2 * np.pi * start / n
    return (lo, lo + 2 * np.pi * length / n)


@dataclass
class ChannelReport:
    root: complex
    sample_radius: float
    arcs: list[tuple[float, float]]
    channel_count: int
    critical_count: int
    reliable: bool
    critical_reliable: bool = True

    @property
    def counts_agree(self) -> bool:
        return self.channel_count == self.critical_count

    def to_json(self) -> dict:
        return {
            "root": [self.root.real, self.root.imag],
            "sample_radius": self.sample_radius,
            "arcs": [list(a) for a in self.arcs],
            "channel_count": self.channel_count,
            "critical_count": self.critical_count,
            "reliable": self.reliable and self.critical_reliable,
            "counts_agree": self.counts_agree,
        }


def _paths_in_basin(spec, a: np.ndarray, c: np.ndarray, b: np.ndarray, root: int,
                    per_path: int, budget: int, roots: np.ndarray, max_depth: int = 40,
                    jump: int = 2) -> np.ndarray:
    """True where the quadratic Bezier path a -> (control c) -> b stays in the basin of ``root``.

    The path is sampled uniformly, then every parameter interval whose endpoint
    iteration counts differ by more than ``jump`` is bisected. Counts spike
    near the Julia set, so this homes in on places where other basins hide in
    thin sectors.
    """
    m = a.size
    ok = np.ones(m, dtype=bool)
    if m == 0:
        return ok

    def point(j, t):
        return (1 - t) ** 2 * a[j] + 2 * t * (1 - t) * c[j] + t**2 * b[j]

    t = np.linspace(0.0, 1.0, per_path)
    jj = np.repeat(np.arange(m), per_path)
    res = iterate_orbits(spec, point(jj, np.tile(t, m)), budget, roots)
    lab = res.labels().reshape(m, per_path)
    its = res.iterations.reshape(m, per_path)
    ok &= np.all(lab == root, axis=1)
    seg = np.repeat(np.arange(m), per_path - 1)
    lo_t, hi_t = np.tile(t[:-1], m), np.tile(t[1:], m)
    lo_i, hi_i = its[:, :-1].ravel(), its[:, 1:].ravel()
    for _ in range(max_depth):
        sel = ok[seg] & (np.abs(lo_i - hi_i) > jump)
        if not np.any(sel):
            break
        seg, lo_t, hi_t, lo_i, hi_i = seg[sel], lo_t[sel], hi_t[sel], lo_i[sel], hi_i[sel]
        mid_t = 0.5 * (lo_t + hi_t)
        r = iterate_orbits(spec, point(seg, mid_t), budget, roots)
        ok[seg[r.labels() != root]] = False
        mid_i = r.iterations
        seg = np.concatenate([seg, seg])
        lo_t, hi_t = np.concatenate([lo_t, mid_t]), np.concatenate([mid_t, hi_t])
        lo_i, hi_i = np.concatenate([lo_i, mid_i]), np.concatenate([mid_i, hi_i])
    return ok


def _grid_route(spec, a: complex, b: complex, root: int, budget: int, roots: np.ndarray,
                cells: int, margin: float = 0.75) -> list[complex] | None:
    """Candidate polyline from a to b through grid cells whose centres lie in the basin.

    The grid covers the bounding box of a and b widened by ``margin`` times
    their distance on every side; cells are joined along edges only.
    """
    d = abs(b - a)
    lo = complex(min(a.real, b.real) - margin * d, min(a.imag, b.imag) - margin * d)
    hi = complex(max(a.real, b.real) + margin * d, max(a.imag, b.imag) + margin * d)
    xs = np.linspace(lo.real, hi.real, cells)
    ys = np.linspace(lo.imag, hi.imag, cells)
    grid = xs[None, :] + 1j * ys[:, None]
    inside = (iterate_orbits(spec, grid.ravel(), budget, roots).labels() == root).reshape(cells, cells)

    def cell(z):
        j = int(round((z.real - lo.real) / (hi.real - lo.real) * (cells - 1)))
        i = int(round((z.imag - lo.imag) / (hi.imag - lo.imag) * (cells - 1)))
        return i, j

    start, goal = cell(a), cell(b)
    if not (inside[start] and inside[goal]):
        return None
    parent = {start: None}
    frontier = deque([start])
    while frontier:
        cur = frontier.popleft()
        if cur == goal:
            break
        i, j = cur
        for nxt in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if 0 <= nxt[0] < cells and 0 <= nxt[1] < cells and inside[nxt] and nxt not in parent:
                parent[nxt] = cur
                frontier.append(nxt)
    if goal not in parent:
        return None
    route = []
    cur = goal
    while cur is not None:
        route.append(complex(grid[cur]))
        cur = parent[cur]
    return [b] + route + [a]


def _connected_by_grid(spec, a: complex, b: complex, root: int, per_segment: int,
                       budget: int, roots: np.ndarray, cells: int) -> bool:
    """Grid search for a route from a to b, then a fine check of every leg of it.

    The grid only proposes a route; the answer rests on the adaptive path
    test, so coarse cells cannot bridge two components.
    """
    route = _grid_route(spec, complex(a), complex(b), root, budget, roots, cells)
    if route is None:
        return False
    pts = np.array(route[::-1])
    u, v = pts[:-1], pts[1:]
    ok = _paths_in_basin(spec, u, 0.5 * (u + v), v, root, per_segment, budget, roots)
    return bool(np.all(ok))


GRID_CELLS = 96
ROUTE_SEGMENT = 32


BENDS = (-0.25, -0.1, 0.1, 0.25)
CRITICAL_BENDS = (-1.0, -0.5, -0.25, -0.1, 0.1, 0.25, 0.5, 1.0)


def immediate_basin_mask(spec: FunctionSpec, z: np.ndarray, labels: np.ndarray,
                         per_path: int = 1024, budget: int = DEFAULT_BUDGET,
                         bends=BENDS, grid: int = GRID_CELLS) -> np.ndarray:
    """Which points lie in the immediate basin of the root they converge to.

    The immediate basin is the only basin component mapped into itself, so
    z belongs to it exactly when z and N(z) share a component. The test
    looks for a connecting path among a few arcs from z to N(z) bowed to
    either side; straight segments are avoided because they can run along an
    invariant line through points where two components of one basin touch.
    When every arc fails and ``grid`` is nonzero, a route found on a
    ``grid`` x ``grid`` lattice around both points is checked instead.
    """
    z = np.asarray(z, dtype=complex)
    roots = root_locations(spec)
    out = np.zeros(z.size, dtype=bool)
    images, status = spec.newton_values(z)
    for i in range(roots.size):
        sel = np.flatnonzero((labels == i) & (status == EvalStatus.FINITE))
        if sel.size == 0:
            continue
        a, b = z[sel], images[sel]
        for bend in bends:
            todo = ~out[sel]
            if not np.any(todo):
                break
            ctrl = 0.5 * (a + b) + 1j * bend * (b - a)
            hit = _paths_in_basin(spec, a[todo], ctrl[todo], b[todo], i, per_path, budget, roots)
            out[sel[todo]] = hit
        if grid:
            for k in np.flatnonzero(~out[sel]):
                out[sel[k]] = _connected_by_grid(spec, a[k], b[k], i, ROUTE_SEGMENT, budget,
                                                 roots, grid)
    return out


ROWS_PER_PERIOD = 48
ANNULUS_MARGIN = 0.25
LEG_SAMPLES = 8
MAX_REROUTES = 40
DETOUR_CELLS = 16


@dataclass
class _Annulus:
    """Fates on a log-polar grid covering one period of N below the sample circle.

    Near infinity N acts like z -> ((d-1)/d) z, so each channel of an
    immediate basin crosses every such annulus. Columns sit half a sample
    past the circle angles, keeping cell centres off symmetry lines such as
    the real axis; ``top`` is the row at the circle radius.
    """

    logr: np.ndarray
    angles: np.ndarray
    labels: np.ndarray
    top: int

    def points(self, rows, cols) -> np.ndarray:
        return np.exp(self.logr[rows] + 1j * self.angles[cols])

    def cell(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        h = self.logr[0] - self.logr[1]
        rows = np.rint((self.logr[0] - np.log(np.abs(z))) / h).astype(int)
        n = self.angles.size
        cols = np.rint(np.angle(z) / (2 * np.pi) * n - 0.5).astype(int) % n
        return rows, cols

    def graph(self):
        """Symmetric edge graph of grid cells joining 4-neighbours with the same root label."""
        lab = self.labels
        rows, n = lab.shape
        ids = np.arange(rows * n).reshape(rows, n)
        src, dst = [], []
        right = (lab >= 0) & (lab == np.roll(lab, -1, axis=1))
        src.append(ids[right])
        dst.append(np.roll(ids, -1, axis=1)[right])
        down = (lab[:-1] >= 0) & (lab[:-1] == lab[1:])
        src.append(ids[:-1][down])
        dst.append(ids[1:][down])
        src, dst = np.concatenate(src), np.concatenate(dst)
        both = (np.concatenate([src, dst]), np.concatenate([dst, src]))
        return sparse.csr_matrix((np.ones(2 * src.size, dtype=np.float64), both),
                                 shape=(rows * n, rows * n))


def _annulus(spec: Polynomial, circle: "CircleSample", budget: int,
             roots: np.ndarray) -> _Annulus:
    d = P.degree(spec.p)
    period = np.log(d / (d - 1))
    h = period / ROWS_PER_PERIOD
    above = int(np.ceil(ANNULUS_MARGIN * ROWS_PER_PERIOD))
    below = ROWS_PER_PERIOD + above
    logr = np.log(circle.radius) + h * np.arange(above, -below - 1, -1)
    angles = circle.angles + np.pi / circle.angles.size
    grid = np.exp(logr)[:, None] * np.exp(1j * angles)[None, :]
    labels = iterate_orbits(spec, grid.ravel(), budget, roots).labels().reshape(grid.shape)
    return _Annulus(logr, angles, labels, above)


def _route(graph, start: int, goal: int) -> list[int] | None:
    order, pred = csgraph.breadth_first_order(graph, start, directed=True,
                                              return_predecessors=True)
    if goal != start and pred[goal] < 0:
        return None
    path = [goal]
    while path[-1] != start:
        path.append(int(pred[path[-1]]))
    return path[::-1]


def _legs_ok(spec, u: np.ndarray, v: np.ndarray, root: int, budget: int,
             roots: np.ndarray, depth: int = 2) -> np.ndarray:
    """Fine check of route legs u -> v, detouring on a local grid where a straight leg fails."""
    ok = _paths_in_basin(spec, u, 0.5 * (u + v), v, root, LEG_SAMPLES, budget, roots)
    if depth == 0:
        return ok
    for k in np.flatnonzero(~ok):
        route = _grid_route(spec, complex(u[k]), complex(v[k]), root, budget, roots,
                            DETOUR_CELLS, margin=1.0)
        if route is None:
            continue
        pts = np.array(route[::-1])
        ok[k] = bool(np.all(_legs_ok(spec, pts[:-1], pts[1:], root, budget, roots, depth - 1)))
    return ok


def _drop_edge(graph, p: int, q: int) -> None:
    for u, v in ((p, q), (q, p)):
        lo, hi = graph.indptr[u], graph.indptr[u + 1]
        graph.data[lo:hi][graph.indices[lo:hi] == v] = 0
    graph.eliminate_zeros()


def _annulus_channels(spec: Polynomial, circle: "CircleSample", runs, budget: int,
                      roots: np.ndarray) -> np.ndarray:
    """Which circle runs lie in an immediate basin, using one annulus grid.

    A run is a candidate when one of its samples z shares a grid component
    with the cell holding N(z). The grid route between them is then checked
    leg by leg with the adaptive path test, detouring on finer local grids
    where a leg fails; an edge that cannot be confirmed is dropped and the
    route searched again, so the coarse grid never decides a positive.
    """
    ann = _annulus(spec, circle, budget, roots)
    rows, n = ann.labels.shape
    z = circle.radius * np.exp(1j * circle.angles)
    images, status = spec.newton_values(z)
    img_rows, img_cols = ann.cell(np.where(status == EvalStatus.FINITE, images, z))
    usable = (status == EvalStatus.FINITE) & (img_rows >= 0) & (img_rows < rows)
    img_rows = np.clip(img_rows, 0, rows - 1)
    graph = ann.graph()
    result = np.zeros(len(runs), dtype=bool)
    for k, (s, ln, lab) in enumerate(runs):
        idx = (s + np.arange(ln)) % n
        cand = usable[idx] & (ann.labels[ann.top, idx] == lab) & (
            ann.labels[img_rows[idx], img_cols[idx]] == lab)
        if not np.any(cand):
            continue
        j = idx[np.argmax(cand)]
        start = ann.top * n + j
        goal = img_rows[j] * n + img_cols[j]
        for _ in range(MAX_REROUTES):
            cells = _route(graph, start, goal)
            if cells is None:
                break
            r, c = np.divmod(np.array(cells), n)
            pts = np.concatenate([z[j : j + 1], ann.points(r, c), images[j : j + 1]])
            u, v = pts[:-1], pts[1:]
            bad = np.flatnonzero(~_legs_ok(spec, u, v, lab, budget, roots))
            if bad.size == 0:
                result[k] = True
                break
            # leg i joins cells i - 1 and i; the end legs touch z and N(z)
            inner = bad[(bad > 0) & (bad < len(cells))]
            if inner.size < bad.size:
                break
            for leg in inner:
                _drop_edge(graph, cells[leg - 1], cells[leg])
    return result


def channel_labels(spec: Polynomial, circle: "CircleSample", budget: int = DEFAULT_BUDGET,
                   per_path: int = 256) -> np.ndarray:
    """Circle labels with runs outside every immediate basin relabelled -5.

    A run is kept when its middle or quartile samples pass
    :func:`immediate_basin_mask`; the rest are decided on a log-polar grid
    by :func:`_annulus_channels`. Channels can wind between interleaved
    fingers of other basins, which gently bent paths from z to N(z) cross.
    """
    labels = circle.labels
    n = labels.size
    z = circle.radius * np.exp(1j * circle.angles)
    out = labels.copy()
    runs = [(s, ln, lab) for s, ln, lab in _runs(labels) if lab >= 0]
    reps, owner = [], []
    for k, (s, ln, lab) in enumerate(runs):
        picks = sorted({(s + ln // 2) % n, (s + ln // 4) % n, (s + (3 * ln) // 4) % n})
        reps.extend(picks)
        owner.extend([k] * len(picks))
    if reps:
        reps_a = np.array(reps)
        inside = immediate_basin_mask(spec, z[reps_a], labels[reps_a], per_path, budget, grid=0)
        is_channel = np.zeros(len(runs), dtype=bool)
        np.logical_or.at(is_channel, np.array(owner), inside)
        failed = np.flatnonzero(~is_channel)
        if failed.size:
            is_channel[failed] = _annulus_channels(spec, circle, [runs[k] for k in failed],
                                                   budget, root_locations(spec))
        for k, (s, ln, lab) in enumerate(runs):
            if not is_channel[k]:
                out[(s + np.arange(ln)) % n] = -5
    return out


def _chain_in_basin(spec, c: complex, root: int, per_segment: int, budget: int,
                    roots: np.ndarray) -> bool:
    pts = orbit_points(spec, c, budget)
    d = np.abs(pts - roots[root])
    stop = int(np.argmax(d <= 1e-6 * max(1.0, abs(roots[root])))) if np.any(
        d <= 1e-6 * max(1.0, abs(roots[root]))) else pts.size - 1
    pts = np.append(pts[: stop + 1], roots[root])
    a, b = pts[:-1], pts[1:]
    ok = _paths_in_basin(spec, a, 0.5 * (a + b), b, root, per_segment, budget, roots)
    return bool(np.all(ok))


def critical_fates(spec: FunctionSpec, budget: int = DEFAULT_BUDGET, per_segment: int = 1024):
    """Critical points of N (with multiplicity) and the root whose immediate basin holds them.

    A critical point counts for a root when its orbit converges there and
    some arc to N(c), some arc to the root, or the polygonal orbit path down
    to the root stays in that basin. Orbits that converge without such a witness get
    label -5; undecided orbits make the result unreliable.
    """
    crit = spec.critical_points()
    if not crit:
        return [], np.zeros(0, dtype=np.int32), True
    roots = root_locations(spec)
    pts = np.array([c for c, _ in crit], dtype=complex)
    b = iterate_orbits(spec, pts, budget, roots)
    labels = b.labels()
    inside = immediate_basin_mask(spec, pts, labels, per_segment, budget, bends=CRITICAL_BENDS)
    for j in np.flatnonzero((labels >= 0) & ~inside):
        i = int(labels[j])
        a, r = pts[j : j + 1], roots[i : i + 1]
        for bend in (0.0,) + CRITICAL_BENDS:
            ctrl = 0.5 * (a + r) + 1j * bend * (r - a)
            if _paths_in_basin(spec, a, ctrl, r, i, per_segment, budget, roots)[0]:
                inside[j] = True
                break
        if not inside[j] and _chain_in_basin(spec, pts[j], i, per_segment, budget, roots):
            inside[j] = True
        if not inside[j]:
            inside[j] = _connected_by_grid(spec, pts[j], roots[i], i, ROUTE_SEGMENT, budget,
                                           roots, GRID_CELLS)
    labels = np.where((labels >= 0) & ~inside, -5, labels)
    reliable = not np.any(b.fate == Fate.UNDECIDED)
    return crit, labels, reliable


def _channel_groups(chan: np.ndarray) -> list[tuple[int, int, int]]:
    """Merge cyclically adjacent channel runs of the same root.

    Distinct channels of one immediate basin are always separated by a
    channel of another root, so consecutive runs of one root with only
    non-channel samples between them belong to the same channel. Returns
    (start, length, root) spans that include the samples in between.
    """
    n = chan.size
    runs = [r for r in _runs(chan) if r[2] >= 0]
    if not runs:
        return []
    # rotate so the list does not start in the middle of a group
    k0 = next((k for k in range(len(runs)) if runs[k][2] != runs[k - 1][2]), None)
    if k0 is None:
        s, _, lab = runs[0]
        return [(s, n, lab)] if len(runs) > 1 else runs
    runs = runs[k0:] + runs[:k0]
    groups = [list(runs[0])]
    for s, ln, lab in runs[1:]:
        g = groups[-1]
        if lab == g[2]:
            g[1] = (s + ln - g[0]) % n or n
        else:
            groups.append([s, ln, lab])
    return [tuple(g) for g in groups]


def channel_reports(spec: Polynomial, sample_radius: float = 10.0, samples: int = 4096,
                    budget: int = DEFAULT_BUDGET) -> list[ChannelReport]:
    """Channel reports for every root from one shared sampling of the circle.

    A channel is a maximal run of circle samples lying in the immediate
    basin; samples of the same root in non-immediate components do not count.
    Runs of one root with no other root's channel between them are a single
    channel that the circle crosses more than once, and are merged.
    """
    _check_channel_pre(spec, sample_radius)
    circle = sample_circle(spec, sample_radius, samples, budget)
    chan = channel_labels(spec, circle, budget)
    crit, crit_labels, crit_ok = critical_fates(spec, budget)
    groups = _channel_groups(chan)
    out = []
    for i, (r, _) in enumerate(spec.roots()):
        arcs = [_arc(s, ln, samples) for s, ln, lab in groups if lab == i]
        ccount = sum(m for (c, m), lab in zip(crit, crit_labels) if lab == i)
        out.append(ChannelReport(r, sample_radius, sorted(arcs), len(arcs), ccount,
                                 circle.reliable, crit_ok))
    return out


def detect_channels(spec: Polynomial, root: complex, sample_radius: float = 10.0,
                    samples: int = 4096, budget: int = DEFAULT_BUDGET) -> ChannelReport:
    reports = channel_reports(spec, sample_radius, samples, budget)
    best = min(reports, key=lambda rep: abs(rep.root - root))
    if abs(best.root - root) > 1e-6 * max(1.0, abs(root)):
        raise ValueError(f"{root} is not a root of {spec!r}")
    return best


def _check_channel_pre(spec, sample_radius):
    if not isinstance(spec, Polynomial):
        raise TypeError("channel analysis needs a polynomial")
    if sample_radius < 4:
        raise ValueError("sample radius must be at least 4")
    if any(abs(r) >= 1 + 1e-9 for r, _ in spec.roots()):
        raise ValueError("roots must lie in the unit disk; normalize first")


@dataclass
class GapCheck:
    arc: tuple[float, float]
    witness_angle: float | None
    witness_root: int | None
    witness_in_channel: bool = False

    @property
    def passed(self) -> bool:
        return self.witness_angle is not None


@dataclass
class RootBetweenChannels:
    root: complex
    gaps: list[GapCheck] = field(default_factory=list)
    has_channel: bool = True

    @property
    def passed(self) -> bool:
        return self.has_channel and all(g.passed for g in self.gaps)

    def to_json(self) -> dict:
        return {
            "root": [self.root.real, self.root.imag],
            "passed": self.passed,
            "gaps": [{"arc": list(g.arc), "witness_angle": g.witness_angle,
                      "witness_root": g.witness_root,
                      "witness_in_channel": g.witness_in_channel} for g in self.gaps],
        }


@dataclass
class CorollaryReport:
    roots: list[RootBetweenChannels]
    reliable: bool

    @property
    def passed(self) -> bool:
        return self.reliable and all(r.passed for r in self.roots)

    def to_json(self) -> dict:
        return {"passed": self.passed, "reliable": self.reliable,
                "roots": [r.to_json() for r in self.roots]}


def verify_root_between_channels(spec: Polynomial, sample_radius: float = 10.0,
                                 samples: int = 4096, budget: int = DEFAULT_BUDGET,
                                 channel_witnesses: bool = True) -> CorollaryReport:
    """Every gap between two arcs of a root must hold a sample of another root.

    Gaps are the maximal circular runs of samples not converging to the root.
    With ``channel_witnesses`` the witness is taken from another root's
    channel (immediate basin) when the gap contains one.
    """
    _check_channel_pre(spec, sample_radius)
    if spec.degree < 2:
        raise ValueError("degree must be at least 2")
    circle = sample_circle(spec, sample_radius, samples, budget)
    labels = circle.labels
    chan = channel_labels(spec, circle, budget) if channel_witnesses else np.full(samples, -5)
    n = samples
    out = []
    for i, (r, _) in enumerate(spec.roots()):
        mine = labels == i
        res = RootBetweenChannels(r, has_channel=bool(mine.any()))
        if mine.all() or not mine.any():
            out.append(res)
            continue
        for s, ln, lab in _runs(np.where(mine, 1, 0)):
            if lab == 1:
                continue
            pos = (s + np.arange(ln)) % n
            other = pos[(labels[pos] >= 0) & (labels[pos] != i)]
            best = pos[(chan[pos] >= 0) & (chan[pos] != i)]
            if best.size:
                w = int(best[best.size // 2])
            elif other.size:
                w = int(other[other.size // 2])
            else:
                res.gaps.append(GapCheck(_arc(s, ln, n), None, None))
                continue
            res.gaps.append(GapCheck(_arc(s, ln, n), float(circle.angles[w]), int(labels[w]),
                                     bool(best.size)))
        out.append(res)
    return CorollaryReport(out, circle.reliable)


@dataclass
class LinearizationReport:
    radii: list[float]
    max_deviation: list[float]
    fitted_constant: float
    decreasing: bool

    def to_json(self) -> dict:
        return {"radii": self.radii, "max_deviation": self.max_deviation,
                "fitted_constant": self.fitted_constant, "decreasing": self.decreasing}


def verify_linearization_at_infinity(spec: Polynomial, radii=(10.0, 100.0, 1000.0),
                                     samples: int = 4096) -> LinearizationReport:
    """Compare N(z) against (d-1)/d * z on circles of growing radius.

    ``decreasing`` holds when the maximal deviation drops strictly from one
    radius to the next, or when it is at rounding level throughout (N exactly
    linear, as for a single root at the origin).
    """
    d = spec.degree
    if d < 2:
        raise ValueError("degree must be at least 2")
    theta = 2 * np.pi * np.arange(samples) / samples
    devs = []
    for R in radii:
        z = R * np.exp(1j * theta)
        N, _ = spec.newton_values(z)
        devs.append(float(np.max(np.abs(N * d / ((d - 1) * z) - 1))))
    C = max(dv * R for dv, R in zip(devs, radii))
    exact = max(devs) <= 1e-13
    strict = all(b < a for a, b in zip(devs[:-1], devs[1:]))
    return LinearizationReport(list(map(float, radii)), devs, float(C), exact or strict)


# -- virtual basins -----------------------------------------------------------


@dataclass
class StripCheck:
    k: int
    starts: np.ndarray
    fates: np.ndarray
    increasing: np.ndarray

    @property
    def passed(self) -> bool:
        return bool(np.all(self.fates == Fate.ESCAPED) and np.all(self.increasing))


def virtual_basin_strip(spec: FunctionSpec, k: int, x_lo: float = 2.0, x_hi: float = 12.0,
                        step: float = 0.1, budget: int = DEFAULT_BUDGET) -> StripCheck:
    """Orbits started on the horizontal line (2k+1) pi i + [x_lo, x_hi]."""
    xs = x_lo + step * np.arange(int(round((x_hi - x_lo) / step)) + 1)
    starts = xs + 1j * (2 * k + 1) * np.pi
    b = iterate_orbits(spec, starts, budget)
    inc = np.zeros(starts.size, dtype=bool)
    for j, z0 in enumerate(starts):
        pts = orbit_points(spec, z0, int(b.iterations[j]))
        inc[j] = bool(np.all(np.diff(pts.real) > 0))
    return StripCheck(k, starts, b.fate.copy(), inc)
