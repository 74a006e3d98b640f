"""Riemann-Stieltjes-Young sums for sampled scalar functions.

All sums use the left endpoint of each sub-interval.  A grid edge traversed
against its coordinate direction contributes the negated forward sum, so an
edge shared by two squares cancels exactly term by term.
"""
import math
from dataclasses import dataclass

import numpy as np

from ._validation import as_float_array, check_positive, check_times
from .exceptions import InvalidInputError

DEFAULT_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class SampledFunction:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = check_times(self.times)
        v = as_float_array(self.values, "values", ndim=1)
        if v.size != t.size:
            raise InvalidInputError(f"values has {v.size} samples, times has {t.size}")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class YoungResult:
    value: float
    levels: int
    tail_bound: float
    converged: bool


def _left_sum(f, g):
    return math.fsum((f[:-1] * np.diff(g)).tolist())


def _dyadic_indices(n, stride):
    idx = np.arange(0, n, stride)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    return idx


def young_integral(f, g, rtol=DEFAULT_RTOL):
    """Left-point Riemann-Stieltjes sum of ``int f dg`` on the shared sample grid.

    The value is always the full-grid sum.  The same sum is also formed on
    the dyadically coarsened grids (every 2**k-th sample plus the endpoint);
    ``tail_bound`` is the gap between the two finest of them and
    ``converged`` tests it against ``rtol * (|value| + 1)``.
    """
    if f.times.size != g.times.size or not np.array_equal(f.times, g.times):
        raise InvalidInputError("f and g must share the same time grid")
    fv, gv = f.values, g.values
    n = fv.size
    value = _left_sum(fv, gv)
    levels = 1
    prev = value
    tail = 0.0
    stride = 2
    while stride < n:
        idx = _dyadic_indices(n, stride)
        coarse = _left_sum(fv[idx], gv[idx])
        if levels == 1:
            tail = abs(prev - coarse)
        prev = coarse
        levels += 1
        stride *= 2
    return YoungResult(value, levels, tail, tail < rtol * (abs(value) + 1.0))


def integrate(f_values, g_values, times=None):
    """Shorthand for ``young_integral(...).value`` on raw arrays."""
    f_values = np.asarray(f_values, dtype=float)
    if times is None:
        times = np.arange(f_values.size, dtype=float)
    return young_integral(
        SampledFunction(times, f_values), SampledFunction(times, g_values)
    ).value


@dataclass(frozen=True, eq=False)
class GridField:
    """Scalar samples ``values[i, j] = g(x0 + i*h, y0 + j*h)`` on a regular grid."""

    origin: tuple
    spacing: float
    values: np.ndarray

    def __post_init__(self):
        v = as_float_array(self.values, "values", ndim=2)
        if min(v.shape) < 2:
            raise InvalidInputError("grid needs at least 2 samples per axis")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "origin", tuple(float(c) for c in self.origin))
        object.__setattr__(self, "spacing", check_positive(self.spacing, "spacing"))

    def coords(self, axis):
        n = self.values.shape[axis]
        return self.origin[axis] + self.spacing * np.arange(n)


@dataclass(frozen=True)
class AxisSquare:
    corner: tuple
    side: float

    def children(self):
        h = self.side / 2
        x, y = self.corner
        return [
            AxisSquare((x, y), h),
            AxisSquare((x + h, y), h),
            AxisSquare((x, y + h), h),
            AxisSquare((x + h, y + h), h),
        ]


def _grid_index(value, origin, spacing, what):
    k = (value - origin) / spacing
    r = round(k)
    if abs(k - r) > 1e-9 * max(1.0, abs(k)):
        raise InvalidInputError(f"{what} {value} is not aligned with the grid")
    return int(r)


def _square_slices(field, square):
    i0 = _grid_index(square.corner[0], field.origin[0], field.spacing, "square corner x")
    j0 = _grid_index(square.corner[1], field.origin[1], field.spacing, "square corner y")
    m = _grid_index(square.side, 0.0, field.spacing, "square side")
    nx, ny = field.values.shape
    if m < 1 or i0 < 0 or j0 < 0 or i0 + m >= nx or j0 + m >= ny:
        raise InvalidInputError("square does not lie inside the sampled grid")
    return i0, j0, m


def _edge_samples(field, i0, j0, m):
    v = field.values
    return {
        "bottom": v[i0:i0 + m + 1, j0],
        "right": v[i0 + m, j0:j0 + m + 1],
        "top": v[i0:i0 + m + 1, j0 + m],
        "left": v[i0, j0:j0 + m + 1],
    }


def _check_same_grid(g1, g2):
    if (
        g1.values.shape != g2.values.shape
        or g1.origin != g2.origin
        or g1.spacing != g2.spacing
    ):
        raise InvalidInputError("g1 and g2 must be sampled on the same grid")


def boundary_integral(g1, g2, square, rtol=DEFAULT_RTOL):
    """Counterclockwise ``int_{dR} g1 dg2`` from four edge integrals.

    Bottom and right edges run with their coordinate; top and left are the
    negated forward sums.  Combined as ``(bottom + right) - (top + left)``
    so that transposing the field negates the result exactly.
    """
    _check_same_grid(g1, g2)
    i0, j0, m = _square_slices(g1, square)
    a = _edge_samples(g1, i0, j0, m)
    b = _edge_samples(g2, i0, j0, m)
    xs = g1.coords(0)[i0:i0 + m + 1]
    ys = g1.coords(1)[j0:j0 + m + 1]
    times = {"bottom": xs, "top": xs, "right": ys, "left": ys}
    e = {
        k: young_integral(SampledFunction(times[k], a[k]), SampledFunction(times[k], b[k]), rtol).value
        for k in a
    }
    return (e["bottom"] + e["right"]) - (e["top"] + e["left"])


def boundary_terms(g1, g2, square):
    """Signed left-point terms whose sum is the boundary integral of ``square``.

    Terms of an edge shared by two adjacent squares appear with opposite
    signs, so ``math.fsum`` over the concatenated terms of the four children
    equals ``math.fsum`` over the parent's terms bitwise.
    """
    _check_same_grid(g1, g2)
    i0, j0, m = _square_slices(g1, square)
    a = _edge_samples(g1, i0, j0, m)
    b = _edge_samples(g2, i0, j0, m)
    t = {k: a[k][:-1] * np.diff(b[k]) for k in a}
    return np.concatenate([t["bottom"], t["right"], -t["top"], -t["left"]])
