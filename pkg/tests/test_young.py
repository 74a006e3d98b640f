import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holdertree import InvalidInputError, SampledFunction, boundary_integral, young_integral
from holdertree.young import AxisSquare, GridField, boundary_terms, integrate

values = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


def sampled(n):
    return st.lists(values, min_size=n, max_size=n).map(np.array)


@st.composite
def function_pairs(draw):
    n = draw(st.integers(2, 40))
    t = np.arange(n, dtype=float)
    return SampledFunction(t, draw(sampled(n))), SampledFunction(t, draw(sampled(n)))


def unit_grid(func, N=4, origin=(0.0, 0.0), side=1.0):
    M = 2**N
    s = origin[0] + side / M * np.arange(M + 1)
    t = origin[1] + side / M * np.arange(M + 1)
    S, T = np.meshgrid(s, t, indexing="ij")
    return GridField(origin, side / M, func(S, T))


class TestYoungIntegral:
    def test_constant_integrand_telescopes(self):
        t = np.linspace(0, 1, 101)
        g = np.sin(3 * t)
        r = young_integral(SampledFunction(t, np.ones_like(t)), SampledFunction(t, g))
        assert r.value == pytest.approx(g[-1] - g[0], rel=1e-14)

    def test_t_dt_left_sum(self):
        # sum_{k<n} (k h) h = 1/2 - h/2 on a uniform grid of [0, 1]
        n = 1000
        t = np.arange(n + 1) / n
        r = young_integral(SampledFunction(t, t), SampledFunction(t, t))
        assert r.value == pytest.approx(0.5 - 0.5 / n, rel=1e-14)
        assert abs(r.value - 0.5) <= 1 / n

    def test_t_dt2(self):
        n = 4096
        t = np.arange(n + 1) / n
        r = young_integral(SampledFunction(t, t), SampledFunction(t, t * t))
        assert abs(r.value - 2 / 3) <= 1 / n

    def test_tail_bound_shrinks_for_smooth_data(self):
        t = np.linspace(0, 1, 2**12 + 1)
        r = young_integral(SampledFunction(t, np.cos(t)), SampledFunction(t, np.sin(t)))
        assert r.levels >= 10
        assert 0 < r.tail_bound < 1e-3

    def test_grids_must_match(self):
        f = SampledFunction([0.0, 1.0], [1.0, 2.0])
        g = SampledFunction([0.0, 2.0], [1.0, 2.0])
        with pytest.raises(InvalidInputError):
            young_integral(f, g)

    def test_sampled_function_validation(self):
        with pytest.raises(InvalidInputError):
            SampledFunction([0.0, 1.0], [1.0])
        with pytest.raises(InvalidInputError):
            SampledFunction([1.0, 0.0], [1.0, 2.0])

    def test_integrate_helper(self):
        assert integrate([0, 1, 2], [0, 1, 3]) == 0 * 1 + 1 * 2

    @settings(max_examples=60, deadline=None)
    @given(function_pairs(), st.floats(-5, 5), st.floats(-5, 5))
    def test_bilinear(self, pair, a, b):
        f, g = pair
        h = SampledFunction(f.times, np.cos(f.times))
        lhs = young_integral(SampledFunction(f.times, a * f.values + b * h.values), g).value
        rhs = a * young_integral(f, g).value + b * young_integral(h, g).value
        scale = np.sum(np.abs(f.values[:-1]) + 1) * np.max(np.abs(np.diff(g.values)), initial=0) * (abs(a) + abs(b) + 1)
        assert abs(lhs - rhs) <= 1e-12 * (scale + 1)

    @settings(max_examples=60, deadline=None)
    @given(function_pairs())
    def test_closed_loop_integration_by_parts(self, pair):
        # For a closed loop, int f dg + int g df = -sum df dg (discrete product rule).
        f, g = pair
        fv = np.append(f.values, f.values[0])
        gv = np.append(g.values, g.values[0])
        t = np.arange(fv.size, dtype=float)
        F, G = SampledFunction(t, fv), SampledFunction(t, gv)
        lhs = young_integral(F, G).value + young_integral(G, F).value
        quad = -math.fsum((np.diff(fv) * np.diff(gv)).tolist())
        scale = float(np.sum(np.abs(fv[:-1] * np.diff(gv))) + np.sum(np.abs(gv[:-1] * np.diff(fv))))
        assert abs(lhs - quad) <= 1e-12 * (scale + abs(quad) + 1)


class TestBoundaryIntegral:
    def test_x_dy_unit_square(self):
        gx = unit_grid(lambda s, t: s)
        gy = unit_grid(lambda s, t: t)
        assert boundary_integral(gx, gy, AxisSquare((0.0, 0.0), 1.0)) == 1.0
        assert boundary_integral(gy, gx, AxisSquare((0.0, 0.0), 1.0)) == -1.0

    def test_x_squared_dy(self):
        # Green: int_dR x^2 dy = int_R 2x = 1 on the unit square (right edge x = 1, left edge x = 0)
        gx2 = unit_grid(lambda s, t: s * s)
        gy = unit_grid(lambda s, t: t)
        assert boundary_integral(gx2, gy, AxisSquare((0.0, 0.0), 1.0)) == pytest.approx(1.0, rel=1e-15)

    def test_sub_square(self):
        gx = unit_grid(lambda s, t: s, N=5)
        gy = unit_grid(lambda s, t: t, N=5)
        sq = AxisSquare((0.25, 0.5), 0.25)
        assert boundary_integral(gx, gy, sq) == pytest.approx(0.0625, rel=1e-14)

    def test_square_must_align(self):
        gx = unit_grid(lambda s, t: s)
        with pytest.raises(InvalidInputError):
            boundary_integral(gx, gx, AxisSquare((0.01, 0.0), 0.5))

    def test_children_cover_parent(self):
        kids = AxisSquare((0.0, 0.0), 1.0).children()
        assert {k.corner for k in kids} == {(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)}
        assert all(k.side == 0.5 for k in kids)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.integers(1, 3))
    def test_child_sum_is_bitwise(self, seed, depth):
        rng = np.random.default_rng(seed)
        M = 2**4
        g1 = GridField((0.0, 0.0), 1.0 / M, rng.normal(size=(M + 1, M + 1)))
        g2 = GridField((0.0, 0.0), 1.0 / M, rng.normal(size=(M + 1, M + 1)))
        side = 2.0 ** -(depth - 1)
        a, b = rng.integers(0, 2 ** (depth - 1), size=2)
        parent = AxisSquare((a * side, b * side), side)
        kids = np.concatenate([boundary_terms(g1, g2, k) for k in parent.children()])
        assert math.fsum(kids.tolist()) == math.fsum(boundary_terms(g1, g2, parent).tolist())

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_transpose_negates_exactly(self, seed):
        rng = np.random.default_rng(seed)
        M = 8
        a = rng.normal(size=(M + 1, M + 1))
        b = rng.normal(size=(M + 1, M + 1))
        sq = AxisSquare((0.0, 0.0), 1.0)
        h = 1.0 / M
        v = boundary_integral(GridField((0.0, 0.0), h, a), GridField((0.0, 0.0), h, b), sq)
        w = boundary_integral(GridField((0.0, 0.0), h, a.T), GridField((0.0, 0.0), h, b.T), sq)
        assert v == -w
