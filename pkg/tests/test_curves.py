import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holdertree import (
    InvalidInputError,
    Modulus,
    ModulusRangeError,
    SampledCurve,
    estimate_holder_constant,
    loop_erase,
    reparameterize_by_variation,
    sigma_variation,
    smooth_modulus,
)
from holdertree.curves import pairwise_separated, variation_profile

coords = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def polylines(min_size=2, max_size=12):
    return st.lists(st.tuples(coords, coords), min_size=min_size, max_size=max_size).map(
        lambda pts: SampledCurve.from_points(np.array(pts, dtype=float), closed=False)
    )


def brute_variation(points, inverse):
    """Supremum over all sub-partitions that keep both endpoints."""
    n = len(points)
    best = 0.0
    inner = range(1, n - 1)
    for r in range(n - 1):
        for mid in itertools.combinations(inner, r):
            idx = (0,) + mid + (n - 1,)
            s = sum(inverse(np.linalg.norm(points[b] - points[a])) for a, b in zip(idx, idx[1:]))
            best = max(best, s)
    return best


class TestSampledCurve:
    def test_rejects_nonincreasing_times(self):
        with pytest.raises(InvalidInputError):
            SampledCurve([0.0, 0.0, 1.0], [[0, 0], [1, 0], [2, 0]])

    def test_rejects_single_sample(self):
        with pytest.raises(InvalidInputError):
            SampledCurve([0.0], [[0.0, 0.0]])

    def test_rejects_nan(self):
        with pytest.raises(InvalidInputError):
            SampledCurve([0.0, 1.0], [[0.0, np.nan], [1.0, 0.0]])

    def test_closed_requires_repeat(self):
        with pytest.raises(InvalidInputError):
            SampledCurve([0.0, 1.0, 2.0], [[0, 0], [1, 0], [0, 1e-300]], closed=True)

    def test_arrays_are_read_only(self):
        c = SampledCurve([0.0, 1.0], [[0, 0], [1, 1]])
        with pytest.raises(ValueError):
            c.points[0, 0] = 5.0

    def test_from_points_detects_closure(self):
        c = SampledCurve.from_points([[0, 0], [1, 0], [0, 1], [0, 0]])
        assert c.closed
        assert c.dim == 2
        assert len(c) == 4


class TestModulus:
    def test_power_and_inverse(self):
        m = Modulus.power(2.0, 0.5)
        assert m(4.0) == pytest.approx(4.0)
        assert m.inverse(4.0) == pytest.approx(4.0)

    def test_power_rejects_bad_exponent(self):
        with pytest.raises(InvalidInputError):
            Modulus.power(1.0, 1.5)
        with pytest.raises(InvalidInputError):
            Modulus.power(1.0, 0.0)

    def test_table_inverse_exact_on_knots(self):
        m = Modulus.table([(0, 0), (1, 2), (2, 3)])
        assert m.inverse(2.0) == 1.0
        assert m.inverse(2.5) == 1.5

    def test_table_out_of_range(self):
        m = Modulus.table([(0, 0), (1, 2)])
        with pytest.raises(ModulusRangeError):
            m(3.0)
        with pytest.raises(ModulusRangeError):
            m.inverse(5.0)

    def test_table_must_be_strictly_increasing(self):
        with pytest.raises(InvalidInputError):
            Modulus.table([(0, 0), (1, 1), (2, 1)])


class TestHolderConstant:
    def test_line(self):
        t = np.linspace(0, 1, 101)
        c = SampledCurve(t, np.column_stack([t, np.zeros_like(t)]))
        assert estimate_holder_constant(c, 1.0).constant == pytest.approx(1.0, rel=1e-12)

    def test_constant_curve(self):
        c = SampledCurve([0.0, 0.5, 1.0], np.ones((3, 2)))
        assert estimate_holder_constant(c, 0.7).constant == 0.0

    def test_sqrt_half_holder(self):
        # sup |sqrt t - sqrt s| / |t - s|^(1/2) is 1, attained at s = 0.
        t = np.linspace(0, 1, 1001)
        c = SampledCurve(t, np.sqrt(t))
        est = estimate_holder_constant(c, 0.5)
        assert abs(est.constant - 1.0) < 1e-12
        assert est.exhaustive

    def test_large_curves_use_dyadic_lags(self):
        t = np.linspace(0, 1, 5000)
        est = estimate_holder_constant(SampledCurve(t, t), 1.0)
        assert not est.exhaustive
        assert est.constant == pytest.approx(1.0)

    @settings(max_examples=40, deadline=None)
    @given(polylines(min_size=3), st.floats(0.1, 1.0))
    def test_refinement_never_decreases(self, curve, alpha):
        sub = SampledCurve(curve.times[::2], curve.points[::2]) if len(curve) > 3 else curve
        assert estimate_holder_constant(curve, alpha).constant >= estimate_holder_constant(sub, alpha).constant


class TestSmoothModulus:
    knots = np.linspace(0, 1, 2001)

    def test_zero_modulus_is_identity(self):
        s = smooth_modulus(np.column_stack([self.knots, np.zeros_like(self.knots)]))
        for t in (0.01, 0.1, 0.5):
            assert s(t) == pytest.approx(t, rel=1e-12)

    def test_linear_modulus(self):
        s = smooth_modulus(np.column_stack([self.knots, self.knots]))
        for t in (0.01, 0.2, 0.5):
            assert s(t) == pytest.approx(2.5 * t, rel=1e-12)

    def test_quadratic_modulus(self):
        # trapezoid error of s^2 on [t, 2t] with spacing h is t h^2 / 6; divided by t
        h = self.knots[1]
        s = smooth_modulus(np.column_stack([self.knots, self.knots**2]))
        for t in (0.1, 0.25, 0.5):
            assert abs(s(t) - (t + 7 / 3 * t * t)) <= h * h / 6 + 1e-14

    def test_dominates_input(self):
        w = np.sqrt(self.knots)
        s = smooth_modulus(np.column_stack([self.knots, w]))
        t, sv = np.array(s.knots).T
        assert np.all(sv >= np.interp(t, self.knots, w))

    def test_rejects_decreasing(self):
        with pytest.raises(InvalidInputError):
            smooth_modulus([(0, 0), (1, 1), (2, 0.5)])


class TestSigmaVariation:
    def test_constant(self):
        c = SampledCurve([0, 1, 2], np.zeros((3, 2)))
        assert sigma_variation(c, Modulus.identity()) == 0.0

    def test_line(self):
        t = np.linspace(0, 1, 11)
        c = SampledCurve(t, np.column_stack([t, t * 0]))
        assert sigma_variation(c, Modulus.identity()) == pytest.approx(1.0, rel=1e-15)

    def test_v_shape(self):
        c = SampledCurve([0, 1, 2], [[0, 0], [1, 0], [0, 0]])
        assert sigma_variation(c, Modulus.identity()) == 2.0

    @settings(max_examples=40, deadline=None)
    @given(polylines(max_size=9), st.sampled_from([1.0, 0.5, 0.3]))
    def test_matches_brute_force(self, curve, alpha):
        sigma = Modulus.identity() if alpha == 1.0 else Modulus.power(1.0, alpha)
        expected = brute_variation(curve.points, sigma.inverse)
        assert sigma_variation(curve, sigma) == pytest.approx(expected, rel=1e-12, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(polylines(), st.integers(0, 2**31 - 1))
    def test_parameterization_invariant(self, curve, seed):
        rng = np.random.default_rng(seed)
        times = np.cumsum(rng.uniform(0.1, 3.0, size=len(curve)))
        other = SampledCurve(times, curve.points)
        sigma = Modulus.power(1.0, 0.5)
        assert sigma_variation(other, sigma) == sigma_variation(curve, sigma)


class TestReparameterize:
    def test_arc_length_line_unchanged(self):
        t = np.arange(65) / 64
        c = SampledCurve(t, np.column_stack([t, np.zeros_like(t)]))
        r = reparameterize_by_variation(c, Modulus.identity())
        assert np.array_equal(r.times, c.times)
        assert np.array_equal(r.points, c.points)

    def test_plateau_collapsed(self):
        c = SampledCurve([0, 1, 2, 3, 4], [[0, 0], [1, 0], [1, 0], [1, 0], [2, 0]])
        r = reparameterize_by_variation(c, Modulus.identity())
        assert np.array_equal(r.points, [[0, 0], [1, 0], [2, 0]])
        assert np.array_equal(r.times, [0, 1, 2])

    def test_v_shape_cumulative(self):
        pts = np.array([[0, 0], [1, 1], [2, 0], [3, 1]], dtype=float)
        c = SampledCurve([0, 1, 2, 3], pts)
        r = reparameterize_by_variation(c, Modulus.identity())
        oracle = np.concatenate([[0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
        assert np.allclose(r.times, oracle, rtol=1e-15, atol=0)

    def test_constant_curve_rejected(self):
        with pytest.raises(InvalidInputError):
            reparameterize_by_variation(SampledCurve([0, 1], np.zeros((2, 2))), Modulus.identity())

    @settings(max_examples=50, deadline=None)
    @given(polylines(min_size=3), st.sampled_from([1.0, 0.6, 0.4]))
    def test_output_is_sigma_continuous(self, curve, alpha):
        sigma = Modulus.identity() if alpha == 1.0 else Modulus.power(1.0, alpha)
        try:
            r = reparameterize_by_variation(curve, sigma)
        except InvalidInputError:
            return
        t, p = r.times, r.points
        for i in range(len(t)):
            d = np.linalg.norm(p[i + 1:] - p[i], axis=1)
            assert np.all(d <= sigma(t[i + 1:] - t[i]) * (1 + 1e-9) + 1e-12)

    def test_variation_profile_is_monotone(self):
        rng = np.random.default_rng(0)
        c = SampledCurve.from_points(rng.normal(size=(30, 2)))
        V = variation_profile(c, Modulus.power(1.0, 0.5))
        assert np.all(np.diff(V) >= 0)


def _open_double_circle(n=64):
    th = 2 * math.pi * np.arange(n) / n
    lap = np.column_stack([np.cos(th), np.sin(th)])
    pts = np.vstack([lap, lap])
    return SampledCurve.from_points(pts, closed=False), lap


class TestLoopErase:
    def test_injective_unchanged(self):
        t = np.linspace(0, 1, 20)
        c = SampledCurve(t, np.column_stack([t, t * t]))
        assert loop_erase(c, 0.0) == c

    def test_figure_eight_traversal(self):
        th = 2 * math.pi * np.arange(33) / 32
        lobe = np.column_stack([-1 + np.cos(th), np.sin(th)])
        lobe[0] = lobe[-1] = 0.0
        r = np.linspace(2, 0.1, 10)
        inbound = np.column_stack([r, -r])
        outbound = np.column_stack([r[::-1], r[::-1]])
        c = SampledCurve.from_points(np.vstack([inbound, lobe, outbound]))
        out = reparameterize_by_variation(loop_erase(c, 0.0), Modulus.identity())
        assert pairwise_separated(out)
        assert np.array_equal(out.points[0], c.points[0])
        assert np.array_equal(out.points[-1], c.points[-1])

    def test_circle_traversed_twice(self):
        c, lap = _open_double_circle()
        out = reparameterize_by_variation(loop_erase(c, 0.0), Modulus.identity())
        assert pairwise_separated(out)
        # one sample of the first lap, then the second lap after its start
        assert np.array_equal(out.points, np.vstack([lap[:1], lap[1:]]))

    def test_negative_tol(self):
        c, _ = _open_double_circle()
        with pytest.raises(InvalidInputError):
            loop_erase(c, -1.0)

    @settings(max_examples=60, deadline=None)
    @given(polylines(min_size=3, max_size=20), st.lists(st.tuples(st.integers(0, 19), st.integers(0, 19)), max_size=4))
    def test_endpoints_and_image(self, curve, plants):
        pts = np.array(curve.points)
        n = len(pts)
        for a, b in plants:
            a, b = sorted((a % n, b % n))
            pts[b] = pts[a]
        c = SampledCurve(curve.times, pts)
        out = loop_erase(c, 0.0)
        assert np.array_equal(out.points[0], c.points[0])
        assert np.array_equal(out.points[-1], c.points[-1])
        image = {tuple(p) for p in c.points}
        assert all(tuple(p) in image for p in out.points)
        assert np.array_equal(out.times, c.times)

    def test_tolerance_merges_near_repeats(self):
        c, _ = _open_double_circle()
        pts = np.array(c.points)
        pts[64] += 1e-9
        near = SampledCurve(c.times, pts)
        out = reparameterize_by_variation(loop_erase(near, 1e-8), Modulus.identity())
        assert pairwise_separated(out, 1e-8)
