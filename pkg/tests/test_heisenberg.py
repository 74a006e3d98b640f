import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holdertree import (
    HeisenbergPoint,
    InvalidInputError,
    SampledCurve,
    SquareField,
    heisenberg_square_check,
    horizontal_lift,
    koranyi_distance,
    lifting_identity_residuals,
)
from holdertree.fixtures import circle
from holdertree.heisenberg import boustrophedon_order, lifted_square, shoelace_area

coord = st.floats(-3, 3, allow_nan=False)
points3 = st.tuples(coord, coord, coord)


class TestKoranyi:
    def test_examples(self):
        o = HeisenbergPoint(0.0, 0.0, 0.0)
        assert koranyi_distance(o, o) == 0.0
        assert koranyi_distance(o, HeisenbergPoint(1.0, 0.0, 0.0)) == 1.0
        assert koranyi_distance(o, HeisenbergPoint(0.0, 0.0, 1.0)) == 2.0

    def test_arrays(self):
        p = np.zeros((3, 3))
        q = np.array([[1.0, 0, 0], [0, 0, 1.0], [0, 1.0, 0]])
        assert np.array_equal(koranyi_distance(p, q), [1.0, 2.0, 1.0])

    def test_needs_three_coordinates(self):
        with pytest.raises(InvalidInputError):
            koranyi_distance([0, 0], [1, 1])

    @settings(max_examples=200, deadline=None)
    @given(points3, points3, points3)
    def test_metric(self, p, q, r):
        assert koranyi_distance(p, q) == koranyi_distance(q, p)
        assert koranyi_distance(p, r) <= koranyi_distance(p, q) + koranyi_distance(q, r) + 1e-12

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_local_comparison(self, seed):
        # In the unit box d_E / C <= d_K <= C d_E^(1/2) with C = 4.
        rng = np.random.default_rng(seed)
        p = rng.uniform(0, 1, size=(20000, 3))
        q = rng.uniform(0, 1, size=(20000, 3))
        dE = np.linalg.norm(p - q, axis=1)
        dK = koranyi_distance(p, q)
        assert np.all(dE / 4 <= dK)
        assert np.all(dK <= 4 * np.sqrt(dE))


class TestHorizontalLift:
    def test_segment_keeps_z(self):
        t = np.linspace(0, 1, 11)
        c = SampledCurve(t, np.column_stack([t, 0 * t]))
        assert np.all(horizontal_lift(c, 2.5).points[:, 2] == 2.5)

    def test_unit_circle_gain(self):
        c = circle(8192)
        z = horizontal_lift(c).points[:, 2]
        assert abs(z[-1] - math.pi) < 1e-6
        cw = circle(8192, clockwise=True)
        assert horizontal_lift(cw).points[-1, 2] == pytest.approx(-(z[-1]), rel=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(coord, coord), min_size=3, max_size=30))
    def test_gain_is_shoelace(self, pts):
        pts = np.array(pts + pts[:1], dtype=float)
        c = SampledCurve.from_points(pts)
        gain = horizontal_lift(c).points[-1, 2]
        scale = np.sum(np.abs(pts[:-1, 0] * pts[1:, 1]) + np.abs(pts[:-1, 1] * pts[1:, 0]))
        assert abs(gain - shoelace_area(pts)) <= 1e-13 * (scale + 1)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(coord, coord), min_size=2, max_size=30), st.floats(0, 2 * math.pi))
    def test_rotation_invariant_increments(self, pts, angle):
        pts = np.array(pts, dtype=float)
        R = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
        a = horizontal_lift(SampledCurve.from_points(pts)).points[:, 2]
        b = horizontal_lift(SampledCurve.from_points(pts @ R.T)).points[:, 2]
        assert np.allclose(a, b, rtol=0, atol=1e-12 * (1 + np.abs(pts).max() ** 2) * len(pts))

    def test_needs_planar(self):
        with pytest.raises(InvalidInputError):
            horizontal_lift(SampledCurve.from_points(np.zeros((3, 3))))


class TestLiftingIdentities:
    def test_centered_circle(self):
        r = lifting_identity_residuals(horizontal_lift(circle(4096)))
        assert abs(r.r1) < 1e-12 and abs(r.r2) < 1e-12
        assert abs(r.lhs1) < 1e-12 and abs(r.rhs1) < 1e-12

    def test_circle_centered_at_one(self):
        r = lifting_identity_residuals(horizontal_lift(circle(4096, center=(1.0, 0.0))))
        assert abs(r.r1) < 1e-10
        assert r.lhs1 == pytest.approx(1.5 * math.pi, abs=1e-4)
        assert r.rhs1 == pytest.approx(1.5 * math.pi, abs=1e-4)
        # the second identity is only exact in the limit: O(mesh) here
        assert abs(r.r2) < 2 * math.pi / 4096

    def test_non_horizontal_control(self):
        c = circle(4096, center=(1.0, 0.0))
        flat = SampledCurve(c.times, np.column_stack([c.points, np.zeros(len(c))]), closed=True)
        r = lifting_identity_residuals(flat)
        assert r.r1 == pytest.approx(-1.5 * math.pi, abs=1e-4)

    def test_residuals_shrink_with_the_mesh(self):
        res = []
        for n in (256, 1024, 4096):
            th = 2 * math.pi * np.arange(n + 1) / n
            rr = 1 + 0.3 * np.cos(3 * th + 0.4)
            pts = np.column_stack([0.4 + rr * np.cos(th), -0.2 + rr * np.sin(th)])
            pts[-1] = pts[0]
            r = lifting_identity_residuals(horizontal_lift(SampledCurve.from_points(pts)))
            res.append((abs(r.r1), abs(r.r2)))
        for coarse, fine in zip(res, res[1:]):
            # a fourfold refinement should cut first-order errors by about 4
            assert fine[0] < coarse[0] / 3
            assert fine[1] < coarse[1] / 3

    def test_open_projection_rejected(self):
        c = SampledCurve.from_points([[0, 0, 0], [1, 0, 0], [1, 1, 0]])
        with pytest.raises(InvalidInputError):
            lifting_identity_residuals(c)


class TestSquareCheck:
    def test_boustrophedon_visits_every_vertex_once(self):
        order = boustrophedon_order(4)
        assert len(order) == 25 == len(set(order))
        assert all(abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1 for a, b in zip(order, order[1:]))

    def test_identity_square_is_negative_control(self):
        f = SquareField.from_function(lambda s, t: (s, t), (0.0, 0.0), 1.0, 6)
        x, y, z = lifted_square(f)
        chk = heisenberg_square_check(f.origin, f.side, x, y, z, "one")
        assert chk.residuals[0] == pytest.approx(1.0, rel=1e-12)

    def test_degree_zero_planar_field(self):
        # phi(s, t) = (s, s^2) has a one-dimensional image, so every pairing with dx^dy vanishes
        f = SquareField.from_function(lambda s, t: (s, s * s + 0 * t), (0.0, 0.0), 1.0, 6)
        z = np.zeros_like(f.phi1)
        chk = heisenberg_square_check(f.origin, f.side, f.phi1, f.phi2, z, "gauss")
        assert np.allclose(chk.residuals, 0.0, atol=1e-12)

    def test_tree_factorable_lift(self):
        # phi factors through an arc of the unit circle; the lift is z = u / 2 up to O(h)
        f = SquareField.from_function(lambda s, t: (np.cos(s + t), np.sin(s + t)), (0.0, 0.0), 1.0, 7)
        x, y, z = lifted_square(f)
        chk = heisenberg_square_check(f.origin, f.side, x, y, z, "gauss")
        assert max(abs(r) for r in chk.residuals) < 1e-3
