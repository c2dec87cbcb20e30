import numpy as np
import pytest

from newtonmaps import dynamics as D
from newtonmaps.dynamics import Fate
from newtonmaps.functions import Builtin, PolyExpPoly, Polynomial, Window
from newtonmaps import polynomials as P

from _corpus import simple_corpus

QUAD = Polynomial([-1, 0, 1])
CUBIC = Polynomial([-1, 0, 0, 1])
ZEEZ = Builtin("z_exp_exp_z")


def _root_index(spec, z):
    return int(np.argmin(np.abs(D.root_locations(spec) - z)))


class TestOrbits:
    def test_right_half_plane(self):
        out = D.iterate_orbit(QUAD, 3)
        assert out.fate is Fate.CONVERGED and out.root_index == _root_index(QUAD, 1)
        assert abs(out.final_point - 1) <= 1e-8

    def test_pole_at_start(self):
        out = D.iterate_orbit(QUAD, 0)
        assert out.fate is Fate.HIT_POLE and out.iterations == 0

    def test_strip_escapes(self):
        assert D.iterate_orbit(ZEEZ, 2 + 3j * np.pi).fate is Fate.ESCAPED

    def test_builtin_root(self):
        out = D.iterate_orbit(ZEEZ, 0.1)
        assert out.fate is Fate.CONVERGED and out.root_index == 0

    def test_budget_validation(self):
        with pytest.raises(ValueError):
            D.iterate_orbit(QUAD, 1, budget=0)

    def test_undecided_when_budget_short(self):
        assert D.iterate_orbit(QUAD, 1e5, budget=3).fate is Fate.UNDECIDED

    @pytest.mark.parametrize("spec", [QUAD, CUBIC, Polynomial(P.from_roots([0.2, 0.2, -0.5j])),
                                      PolyExpPoly([-1, 0, 1], [0, 1]), PolyExpPoly([1, -2, 1], [0, 0, 1])],
                             ids=repr)
    def test_compiled_loop_matches_numpy(self, spec, monkeypatch):
        rng = np.random.default_rng(0)
        z = rng.uniform(-3, 3, 4000) + 1j * rng.uniform(-3, 3, 4000)
        z[:2] = [0, 1e-13]
        a = D.iterate_orbits(spec, z, 200)
        monkeypatch.setattr(D, "_FORCE_NUMPY", True)
        b = D.iterate_orbits(spec, z, 200)
        assert np.array_equal(a.fate, b.fate)
        assert np.array_equal(a.root, b.root)
        assert np.array_equal(a.iterations, b.iterations)


def test_basin_membership_is_invariant():
    spec = simple_corpus(3)[2]
    rng = np.random.default_rng(7)
    z = 2 * (rng.uniform(-1, 1, 3000) + 1j * rng.uniform(-1, 1, 3000))
    b = D.iterate_orbits(spec, z)
    conv = np.flatnonzero(b.fate == Fate.CONVERGED)[:1000]
    assert conv.size == 1000
    Nz, _ = spec.newton_values(z[conv])
    c = D.iterate_orbits(spec, Nz)
    assert np.all(c.fate == Fate.CONVERGED)
    assert np.array_equal(c.root, b.root[conv])
    assert np.array_equal(c.iterations, np.maximum(b.iterations[conv] - 1, 0))


class TestRaster:
    def test_half_planes(self):
        r = D.compute_basin_raster(QUAD, Window(-2 - 2j, 2 + 2j), 64, 64)
        left, right = _root_index(QUAD, -1), _root_index(QUAD, 1)
        assert np.all(r.fate == Fate.CONVERGED)
        assert np.all(r.root[:, :32] == left) and np.all(r.root[:, 32:] == right)

    def test_cubic_rotational_symmetry(self):
        grid = D.pixel_centers(Window(-2 - 2j, 2 + 2j), 256, 256).ravel()
        roots = D.root_locations(CUBIC)
        w = np.exp(2j * np.pi / 3)
        base = D.iterate_orbits(CUBIC, grid).labels()
        turned = D.iterate_orbits(CUBIC, w * grid).labels()
        # rotation by w sends root j to the root nearest w * root_j
        perm = np.array([_root_index(CUBIC, w * r) for r in roots])
        assert sorted(perm) == [0, 1, 2]
        expect = np.where(base >= 0, perm[np.maximum(base, 0)], base)
        assert np.mean(expect == turned) >= 0.995

    def test_strip_row_escapes(self):
        y = 3 * np.pi
        r = D.compute_basin_raster(ZEEZ, Window(2 + (y - 0.05) * 1j, 12 + (y + 0.05) * 1j), 100, 1)
        assert np.all(r.fate == Fate.ESCAPED)

    def test_deterministic(self):
        win = Window(-1.5 - 1.5j, 1.5 + 1.5j)
        spec = simple_corpus(2)[1]
        a = D.compute_basin_raster(spec, win, 80, 60, 300)
        b = D.compute_basin_raster(spec, win, 80, 60, 300)
        assert a.fate.tobytes() == b.fate.tobytes()
        assert a.iterations.tobytes() == b.iterations.tobytes()

    def test_row_zero_is_top(self):
        c = D.pixel_centers(Window(0j, 1 + 1j), 2, 2)
        assert c[0, 0].imag > c[1, 0].imag and c[0, 0].real < c[0, 1].real


class TestRuns:
    def test_wrapping_run(self):
        runs = D._runs(np.array([1, 1, 0, 0, 1]))
        assert sorted(runs) == [(2, 2, 0), (4, 3, 1)]

    def test_constant(self):
        assert D._runs(np.zeros(5, dtype=int)) == [(0, 5, 0)]

    def test_groups_merge_same_root(self):
        chan = np.array([0, 0, -5, 0, 1, 1, -5, 2, 2])
        groups = D._channel_groups(chan)
        assert sorted((lab, ln) for _, ln, lab in groups) == [(0, 4), (1, 2), (2, 2)]


class TestChannels:
    def test_quadratic(self):
        rep = D.detect_channels(QUAD, 1, 10, 4096)
        assert rep.channel_count == 1 and rep.critical_count == 1 and rep.reliable
        lo, hi = rep.arcs[0]
        assert hi - lo == pytest.approx(np.pi, abs=1e-2)

    def test_cubic(self):
        for r in D.channel_reports(CUBIC, 10, 4096):
            assert r.channel_count == 1 and r.critical_count == 1

    def test_single_root_full_circle(self):
        rep = D.channel_reports(Polynomial(P.from_roots([0.3 + 0.1j] * 4)), 10, 1024)[0]
        assert rep.channel_count == 1
        lo, hi = rep.arcs[0]
        assert hi - lo == pytest.approx(2 * np.pi)

    def test_preconditions(self):
        with pytest.raises(ValueError, match="unit disk"):
            D.channel_reports(Polynomial(P.from_roots([2, 0])), 10)
        with pytest.raises(ValueError, match="at least 4"):
            D.channel_reports(QUAD, 3)
        with pytest.raises(TypeError):
            D.channel_reports(ZEEZ, 10)
        with pytest.raises(ValueError, match="not a root"):
            D.detect_channels(QUAD, 0.5)

    def test_unreliable_flag(self):
        rep = D.channel_reports(CUBIC, 10, 256, budget=2)
        assert not rep[0].reliable and not rep[0].to_json()["reliable"]

    @pytest.mark.parametrize("spec", simple_corpus(6), ids=lambda s: f"deg{s.degree}")
    def test_every_root_reaches_the_circle(self, spec):
        for r in D.channel_reports(spec, 10, 4096):
            assert r.channel_count >= 1


class TestCorollary:
    @pytest.mark.parametrize("spec", [QUAD, CUBIC], ids=repr)
    def test_passes(self, spec):
        rep = D.verify_root_between_channels(spec, 10, 4096)
        assert rep.passed
        for r in rep.roots:
            assert all(g.witness_root is not None for g in r.gaps)

    def test_cubic_gaps_hold_both_other_roots(self):
        rep = D.verify_root_between_channels(CUBIC, 10, 4096)
        for i, r in enumerate(rep.roots):
            # fingers of each basin interleave, so there are many small gaps
            assert all(g.passed for g in r.gaps)
            assert {g.witness_root for g in r.gaps} == {0, 1, 2} - {i}
            assert any(g.witness_in_channel for g in r.gaps)

    def test_json(self):
        d = D.verify_root_between_channels(QUAD, 10, 1024).to_json()
        assert d["passed"] and len(d["roots"]) == 2


class TestLinearization:
    def test_quadratic_rate(self):
        # N(z) * 2 / z - 1 = 1 / z^2 exactly
        rep = D.verify_linearization_at_infinity(QUAD)
        assert rep.decreasing
        assert rep.max_deviation == pytest.approx([1e-2, 1e-4, 1e-6], rel=1e-6)

    def test_single_root_at_origin_is_exact(self):
        rep = D.verify_linearization_at_infinity(Polynomial([0, 0, 0, 2]))
        assert max(rep.max_deviation) <= 1e-15 and rep.decreasing

    def test_single_root_offset(self):
        xi = 0.4 - 0.3j
        rep = D.verify_linearization_at_infinity(Polynomial(P.from_roots([xi] * 3)))
        for R, dev in zip(rep.radii, rep.max_deviation):
            assert dev <= (abs(xi) + 1) / R

    def test_cubic_radius_ten(self):
        # N(z) * 3 / (2z) - 1 = 1 / (2 z^3): 5e-4 on |z| = 10
        rep = D.verify_linearization_at_infinity(CUBIC, radii=(10.0,))
        assert rep.max_deviation[0] == pytest.approx(5e-4, rel=1e-6)


@pytest.mark.parametrize("k", [-2, -1, 0, 1, 2])
def test_virtual_basin_strips(k):
    s = D.virtual_basin_strip(ZEEZ, k)
    assert s.starts.size == 101 and s.passed
