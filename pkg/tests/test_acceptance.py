"""Acceptance criteria, each at its stated tolerance and time budget."""

import gzip
import time
from pathlib import Path

import numpy as np
import pytest

from newtonmaps import dynamics as D
from newtonmaps.fixedpoints import (PathSpec, classify_fixed_point, find_roots, head_polynomial,
                                    reconstruct_entire_function, residue_at_fixed_point)
from newtonmaps.functions import Builtin, newton_map
from newtonmaps.lefschetz import (ConfigurationError, RationalMap, SampledCurve,
                                  sum_indices_inside, verify_fixed_point_count)
from newtonmaps.render import ppm_bytes, raster_rgb
from newtonmaps.rng import SplitMix64
from newtonmaps.suites import FIGURE1_WINDOW, FIGURE2_WINDOW, FIGURE_SIZE, figure2_polynomial

from _corpus import (COROLLARY_SEED, HEAD_SEED, RECON_SEED, degree_corpus, mixed_corpus,
                     sample_points, simple_corpus)

GOLDEN = Path(__file__).parent / "data" / "figure1.ppm.gz"
MIXED = mixed_corpus(100)


def _line(n, ok, detail):
    print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")


def test_criterion_01_multiplier_law():
    t0 = time.perf_counter()
    worst, wrong_kind = 0.0, 0
    for spec in MIXED:
        for r, m in find_roots(spec):
            rec = classify_fixed_point(spec, r)
            worst = max(worst, abs(rec.multiplier - (m - 1) / m))
            wrong_kind += rec.kind.value != "AttractingRoot"
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and wrong_kind == 0 and dt <= 5
    _line(1, ok, f"max error {worst:.2e}, {wrong_kind} misclassified, {dt:.1f} s")
    assert ok


def test_criterion_02_residue_equals_multiplicity():
    t0 = time.perf_counter()
    worst = max(abs(residue_at_fixed_point(spec, r) - m)
                for spec in MIXED for r, m in find_roots(spec))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-6 and dt <= 30
    _line(2, ok, f"max error {worst:.2e}, {dt:.1f} s")
    assert ok


def _arc_path(anchor_radius, target):
    """Along the circle |z| = anchor_radius from its point on the positive axis, then radially in."""
    phi = np.angle(target)
    arc = tuple(anchor_radius * np.exp(1j * phi * k / 12) for k in range(1, 13))
    return PathSpec(complex(anchor_radius), arc)


def _loop_case(spec):
    """(direct, looped) values at a point near a simple root; the loop circles only that root."""
    roots = find_roots(spec)
    for xi, m in roots:
        if m != 1:
            continue
        others = [r for r, _ in roots if r != xi]
        rho = 0.3 * min([abs(xi - o) for o in others] + [1.0])
        for turn in 2 * np.pi * np.arange(16) / 16:
            start = xi + rho * np.exp(1j * turn)
            seg = np.linspace(3, start, 400)
            if others and min(np.min(np.abs(seg - o)) for o in others) < 0.05:
                continue
            loop = tuple(xi + rho * np.exp(1j * (turn + 2 * np.pi * k / 24)) for k in range(1, 24))
            N = newton_map(spec)
            direct = reconstruct_entire_function(N, PathSpec(3 + 0j), [start])[0]
            looped = reconstruct_entire_function(N, PathSpec(3 + 0j, (start,) + loop), [start])[0]
            return direct, looped
    return None


def test_criterion_03_reconstruction_round_trip():
    t0 = time.perf_counter()
    specs = mixed_corpus(20, seed=RECON_SEED, lo=2, hi=6)
    rng = np.random.default_rng(RECON_SEED)
    spread, homotopy, loops, looped_cases = 0.0, 0.0, 0.0, 0
    with_simple = sum(any(m == 1 for _, m in find_roots(spec)) for spec in specs)
    for spec in specs:
        N = newton_map(spec)
        targets = rng.uniform(1.5, 3, 20) * np.exp(2j * np.pi * rng.uniform(0, 1, 20))
        ratios = []
        for t in targets:
            v = reconstruct_entire_function(N, _arc_path(3.0, t), [t])[0]
            f = spec.f_values(np.array([3.0, t]))[0]
            ratios.append(v / (f[1] / f[0]))
        ratios = np.array(ratios)
        spread = max(spread, float(np.max(np.abs(ratios / ratios[0] - 1))))
        # chord and arc from 3 to 3i are homotopic away from the unit disk
        chord = reconstruct_entire_function(N, PathSpec(3 + 0j), [3j])[0]
        arc = reconstruct_entire_function(N, _arc_path(3.0, 3j), [3j])[0]
        homotopy = max(homotopy, abs(chord - arc) / abs(chord))
        case = _loop_case(spec)
        if case:
            looped_cases += 1
            loops = max(loops, abs(case[0] - case[1]) / abs(case[0]))
    dt = time.perf_counter() - t0
    ok = spread <= 1e-5 and homotopy <= 1e-6 and loops <= 1e-6 and looped_cases == with_simple and dt <= 60
    _line(3, ok, f"spread {spread:.1e}, homotopic {homotopy:.1e}, loop {loops:.1e} "
                 f"over {looped_cases}/{with_simple} cases, {dt:.1f} s")
    assert ok


def test_criterion_04_head_round_trip():
    worst = 0.0
    for k, spec in enumerate(mixed_corpus(50, seed=HEAD_SEED)):
        head = head_polynomial(find_roots(spec), 1.0)
        z = sample_points(spec, 100, seed=k)
        a, _ = spec.newton_values(z)
        b, _ = head.newton_values(z)
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(1, np.abs(a)))))
    ok = worst <= 1e-8
    _line(4, ok, f"max relative mismatch {worst:.1e}")
    assert ok


def test_criterion_05_channels_equal_critical_points():
    t0 = time.perf_counter()
    bad = []
    for k, spec in enumerate(simple_corpus(30)):
        for r in D.channel_reports(spec, 10, 8192):
            if not (r.reliable and r.critical_reliable and r.counts_agree):
                bad.append((k, r.root, r.channel_count, r.critical_count))
    dt = time.perf_counter() - t0
    ok = not bad and dt <= 120
    _line(5, ok, f"{len(bad)} mismatched roots, {dt:.1f} s")
    assert ok, bad


def test_criterion_06_root_between_channels():
    fails = sum(not D.verify_root_between_channels(spec, 10, 4096).passed
                for spec in degree_corpus(50, 5, COROLLARY_SEED))
    _line(6, fails == 0, f"{fails} failures over 50 polynomials")
    assert fails == 0


def test_criterion_07_linearization_at_infinity():
    bad = [k for k, spec in enumerate(MIXED)
           if not D.verify_linearization_at_infinity(spec, radii=(10.0, 100.0, 1000.0)).decreasing]
    _line(7, not bad, f"{len(bad)} polynomials without strictly decreasing deviation")
    assert not bad


def test_criterion_08_lefschetz_count():
    unit = SampledCurve.circle(0, 1, 512)
    results = [verify_fixed_point_count(RationalMap.monomial(4, k), unit) for k in (2, -1, 3)]
    expect = [(2, 2), (0, 0), (3, 3)]
    fixed = [(r.L, r.sum_indices) for r in results] == expect
    st = SplitMix64(8)
    seeded, rejected = [], 0
    while len(seeded) < 10:
        c = (3 + 3 * st.uniform()) * np.exp(2j * np.pi * st.uniform())
        k = 1 + st.below(4)
        rho = 0.7 + 0.6 * st.uniform()
        try:
            seeded.append(verify_fixed_point_count(RationalMap.monomial(c, k),
                                                   SampledCurve.circle(0, rho, 512)))
        except ConfigurationError:
            rejected += 1
    ok = fixed and all(r.verdict for r in results + seeded)
    _line(8, ok, f"constructed {[(r.L, r.sum_indices) for r in results]}, "
                 f"{sum(r.verdict for r in seeded)}/10 seeded pass, {rejected} rejected")
    assert ok


def test_criterion_09_argument_principle():
    circle = SampledCurve.circle(0, 10, 1024)
    bad = [k for k, spec in enumerate(MIXED) if sum_indices_inside(spec, circle).turns != 1]
    _line(9, not bad, f"{len(bad)} polynomials with winding != 1")
    assert not bad


def test_criterion_10_figure1():
    spec = Builtin("z_exp_exp_z")
    strips = [D.virtual_basin_strip(spec, k) for k in range(-2, 3)]
    t0 = time.perf_counter()
    raster = D.compute_basin_raster(spec, FIGURE1_WINDOW, FIGURE_SIZE, FIGURE_SIZE)
    data = ppm_bytes(raster_rgb(raster))
    dt = time.perf_counter() - t0
    golden = gzip.decompress(GOLDEN.read_bytes())
    ok = all(s.passed for s in strips) and dt <= 60 and data == golden
    _line(10, ok, f"strips {[s.passed for s in strips]}, render {dt:.1f} s, "
                  f"golden match {data == golden}")
    assert ok


@pytest.mark.parametrize("seed", [0])
def test_criterion_11_figure2_style(seed):
    spec = figure2_polynomial(seed)
    raster = D.compute_basin_raster(spec, FIGURE2_WINDOW, FIGURE_SIZE, FIGURE_SIZE)
    counts = [r.channel_count for r in D.channel_reports(spec, 10, 4096)]
    ok = raster.fate.shape == (FIGURE_SIZE, FIGURE_SIZE) and spec.degree == 9 and min(counts) >= 1
    _line(11, ok, f"channel counts {counts}")
    assert ok
