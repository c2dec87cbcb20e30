import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from newtonmaps import polynomials as P


def test_horner_matches_numpy():
    c = np.array([1 - 2j, 0.5, 3j, -1, 2])
    z = np.array([0.3 + 0.1j, -2, 5j])
    assert np.allclose(P.horner(c, z), np.polynomial.polynomial.polyval(z, c))


def test_derivative_by_coefficient_shift():
    assert np.array_equal(P.derivative(np.array([5, 3, 2, 1], dtype=complex)), [3, 4, 3])
    assert np.array_equal(P.derivative(np.array([5, 3, 2, 1], dtype=complex), 2), [4, 6])


def test_from_roots_expands():
    # (z-2)^2 (z+1) = z^3 - 3z^2 + 4
    assert np.allclose(P.from_roots([2, 2, -1]), [4, 0, -3, 1])


def test_divmod_exact():
    q, r = P.divmod_poly(P.from_roots([1, 2, 3]), P.from_roots([2]))
    assert np.allclose(q, P.from_roots([1, 3])) and np.max(np.abs(r)) < 1e-12


def test_horner_scale_is_largest_term():
    c = np.array([1, -10, 1], dtype=complex)
    assert P.horner_scale(c, 2.0) == pytest.approx(20)


@pytest.mark.parametrize("roots, expect", [
    ([1, -1], [(-1, 1), (1, 1)]),
    ([2, 2, -1], [(-1, 1), (2, 2)]),
    ([0, 0, 0], [(0, 3)]),
    ([0.5j, 0.5j, 0.5j, -0.3], [(-0.3, 1), (0.5j, 3)]),
])
def test_roots_with_multiplicity(roots, expect):
    got = P.roots_with_multiplicity(P.from_roots(roots))
    assert [m for _, m in got] == [m for _, m in expect]
    for (z, _), (w, _) in zip(got, expect):
        assert abs(z - w) < 1e-6


def test_cube_roots_of_unity():
    got = P.roots_with_multiplicity([-1, 0, 0, 1])
    assert len(got) == 3 and all(m == 1 for _, m in got)
    assert all(abs(z ** 3 - 1) < 1e-13 for z, _ in got)


def test_close_simple_roots_stay_separate():
    got = P.roots_with_multiplicity(P.from_roots([0.3, 0.3 + 1e-3]))
    assert [m for _, m in got] == [1, 1]


@pytest.mark.parametrize("xi, m, lead", [(3, 8, 10), (-3j, 8, 0.1), (2.98 - 0.35j, 6, 9.2j)])
def test_high_multiplicity_off_origin(xi, m, lead):
    # rounding spreads these roots over ~1e-2, beyond the derivative test's reach
    got = P.roots_with_multiplicity(P.from_roots([xi] * m, lead=lead))
    assert len(got) == 1 and got[0][1] == m and abs(got[0][0] - xi) < 1e-10


def test_separated_roots_not_merged_by_rounding_radius():
    got = P.roots_with_multiplicity(P.from_roots([0.5, 0.55, 0.6, -0.5]))
    assert [m for _, m in got] == [1, 1, 1, 1]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1), min_size=1, max_size=10))
def test_aberth_residuals_small(roots):
    c = P.from_roots(roots)
    z = P.aberth(c)
    assert z.size == len(roots)
    # backward error against the coefficient size
    bound = 1e-10 * np.max(np.abs(c)) * np.maximum(1, np.abs(z)) ** (len(c) - 1)
    assert np.all(np.abs(P.horner(c, z)) <= bound)
