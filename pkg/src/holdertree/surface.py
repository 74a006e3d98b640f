"""Dyadic surface sums for maps from a square into the plane.

For a map ``phi = (phi1, phi2)`` sampled on a ``(2**N + 1)``-point grid over
a square ``Q``, each square ``R`` of the level-``n`` dyadic partition gets

* ``X  = phi(p_R)`` with ``p_R`` the lower-left corner of ``R``,
* ``X1 = int_{dR} phi1 dphi2``,
* ``X2 = 1/2 (int (phi1 - X_1)^2 dphi2, int phi1 d(phi2 - X_2)^2)``,
* ``X2_tilde = 1/2 (int phi1^2 dphi2, int phi1 dphi2^2)``,

all boundary integrals being left-point sums on the finest grid.  The
first-order sums ``sum f(X) X1`` and second-order sums
``sum f(X) X1 + Df(X) . X2`` approximate ``int f(x) deg(phi, Q, x) dx``.
"""
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from ._validation import as_float_array, check_positive
from .curves import SampledCurve
from .exceptions import InvalidInputError
from .winding import winding_field

DEFAULT_RTOL = 1e-9
MAX_DEPTH = 14
RICHARDSON_DEPTH = 5


@dataclass(frozen=True, eq=False)
class SquareField:
    """Samples ``phi1[i, j], phi2[i, j] = phi(s0 + i*h, t0 + j*h)``, ``h = side / 2**N``."""

    origin: tuple
    side: float
    phi1: np.ndarray
    phi2: np.ndarray

    def __post_init__(self):
        p1 = as_float_array(self.phi1, "phi1", ndim=2)
        p2 = as_float_array(self.phi2, "phi2", ndim=2)
        if p1.shape != p2.shape or p1.shape[0] != p1.shape[1]:
            raise InvalidInputError("phi1 and phi2 must be equal square grids")
        M = p1.shape[0] - 1
        if M < 1 or M & (M - 1):
            raise InvalidInputError(f"grid must have 2**N + 1 samples per side, got {M + 1}")
        if M.bit_length() - 1 > MAX_DEPTH:
            raise InvalidInputError(f"grid depth exceeds {MAX_DEPTH}")
        for a in (p1, p2):
            a.setflags(write=False)
        object.__setattr__(self, "phi1", p1)
        object.__setattr__(self, "phi2", p2)
        object.__setattr__(self, "origin", tuple(float(c) for c in self.origin))
        object.__setattr__(self, "side", check_positive(self.side, "side"))

    @property
    def N(self):
        return (self.phi1.shape[0] - 1).bit_length() - 1

    @property
    def spacing(self):
        return self.side / (self.phi1.shape[0] - 1)

    def coords(self, axis):
        return self.origin[axis] + self.spacing * np.arange(self.phi1.shape[0])

    @classmethod
    def from_function(cls, func, origin, side, N):
        """Sample ``func(S, T) -> (phi1, phi2)`` on the grid (``S`` varies along axis 0)."""
        M = 2**N
        s = origin[0] + side / M * np.arange(M + 1)
        t = origin[1] + side / M * np.arange(M + 1)
        S, T = np.meshgrid(s, t, indexing="ij")
        p1, p2 = func(S, T)
        return cls(origin, side, np.broadcast_to(p1, S.shape), np.broadcast_to(p2, S.shape))

    def flipped(self):
        """Precompose with ``(s, t) -> (t, s)`` (about the corner of ``Q``)."""
        return SquareField(self.origin, self.side, self.phi1.T, self.phi2.T)

    def boundary_curve(self):
        """``phi`` restricted to the counterclockwise boundary of ``Q`` as a closed curve."""
        M = self.phi1.shape[0] - 1
        i = np.concatenate([np.arange(M), np.full(M, M), np.arange(M, 0, -1), np.zeros(M + 1, int)])
        j = np.concatenate([np.zeros(M, int), np.arange(M), np.full(M, M), np.arange(M, -1, -1)])
        pts = np.column_stack([self.phi1[i, j], self.phi2[i, j]])
        return SampledCurve(np.arange(pts.shape[0], dtype=float), pts, closed=True)

    def __eq__(self, other):
        if not isinstance(other, SquareField):
            return NotImplemented
        return (
            self.origin == other.origin
            and self.side == other.side
            and np.array_equal(self.phi1, other.phi1)
            and np.array_equal(self.phi2, other.phi2)
        )

    __hash__ = None


@dataclass(frozen=True)
class RoughSquareData:
    corner: tuple
    side: float
    base_point: tuple
    X: tuple
    X1: float
    X2: tuple
    X2_tilde: tuple


def _json_rate(rate):
    return None if rate is None or math.isnan(rate) else rate


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-level sums ``values[n]`` for ``n = levels[n]``.

    ``diffs[i] = |values[i + 1] - values[i]|``; ``fitted_rate`` is the
    least-squares slope of ``log2(diffs)`` over the fitted levels (NaN when
    fewer than two positive diffs).  ``extrapolated`` is a Richardson
    extrapolation of single-cell sums on successively subsampled grids.
    ``defects[n]`` sums ``|T(R) - sum_i T(R_i)|`` over level-``n`` squares
    ``R`` with children ``R_i`` (``T`` the per-square term), i.e. the
    successive difference without cancellation between squares;
    ``defect_rate`` is its fitted log2 slope.
    """

    levels: list
    values: list
    diffs: list
    fitted_rate: float
    converged: bool
    extrapolated: Optional[float] = None
    fit_levels: tuple = dc_field(default=())
    defects: Optional[list] = None
    defect_rate: Optional[float] = None

    @property
    def value(self):
        return self.values[-1]

    def as_dict(self):
        return {
            "levels": list(self.levels),
            "values": list(self.values),
            "diffs": list(self.diffs),
            "fitted_rate": _json_rate(self.fitted_rate),
            "converged": bool(self.converged),
            "extrapolated": self.extrapolated,
            "defects": None if self.defects is None else list(self.defects),
            "defect_rate": _json_rate(self.defect_rate),
            "fit_levels": list(self.fit_levels),
        }


@dataclass(frozen=True)
class TestFunction:
    """Scalar ``f`` on the plane with its gradient, both vectorized over ``(n, 2)`` arrays."""

    __test__ = False

    name: str
    value: object
    grad: object

    def __call__(self, q):
        return self.value(np.asarray(q, dtype=float))


def _f_one(q):
    return np.ones(q.shape[0])


def _gauss(q):
    return np.exp(-(q[:, 0] ** 2 + q[:, 1] ** 2) / 2)


TEST_FUNCTIONS = {
    "one": TestFunction("one", _f_one, lambda q: np.zeros_like(q)),
    "qx": TestFunction(
        "qx", lambda q: q[:, 0].copy(), lambda q: np.column_stack([np.ones(q.shape[0]), np.zeros(q.shape[0])])
    ),
    "qy": TestFunction(
        "qy", lambda q: q[:, 1].copy(), lambda q: np.column_stack([np.zeros(q.shape[0]), np.ones(q.shape[0])])
    ),
    "quad": TestFunction(
        "quad", lambda q: q[:, 0] ** 2 / 2, lambda q: np.column_stack([q[:, 0], np.zeros(q.shape[0])])
    ),
    "gauss": TestFunction(
        "gauss", _gauss, lambda q: -q * _gauss(q)[:, None]
    ),
}


def get_test_function(name):
    try:
        return TEST_FUNCTIONS[name]
    except KeyError:
        raise InvalidInputError(f"unknown test function {name!r}; choose from {sorted(TEST_FUNCTIONS)}") from None


def _check_level(field, level):
    N = field.N
    if not isinstance(level, (int, np.integer)) or level < 0 or level > N:
        raise InvalidInputError(f"level must be an integer in [0, {N}], got {level!r}")
    return int(level)


def _edges(v, k, m):
    """Edge samples of every square: ``(bottom, right, top, left)``, each ``(k, k, m + 1)``."""
    a = np.arange(k)
    run = np.arange(m + 1)
    along = a[:, None, None] * m + run[None, None, :]
    across = a[None, :, None] * m
    bottom = v[along, across]
    top = v[along, across + m]
    along_t = a[None, :, None] * m + run[None, None, :]
    across_s = a[:, None, None] * m
    right = v[across_s + m, along_t]
    left = v[across_s, along_t]
    return bottom, right, top, left


def _forward(a, b):
    return np.sum(a[..., :-1] * np.diff(b, axis=-1), axis=-1)


def _circulation(ea, eb):
    bottom, right, top, left = (_forward(x, y) for x, y in zip(ea, eb))
    return (bottom + right) - (top + left)


def _corners(v, k, m):
    return v[: k * m: m, : k * m: m]


def _grid_arrays(p1, p2, level):
    M = p1.shape[0] - 1
    k = 2**level
    m = M // k
    e1 = _edges(p1, k, m)
    e2 = _edges(p2, k, m)
    x = _corners(p1, k, m)
    y = _corners(p2, k, m)
    X1 = _circulation(e1, e2)
    d1 = tuple(0.5 * (e - x[..., None]) ** 2 for e in e1)
    d2 = tuple(0.5 * (e - y[..., None]) ** 2 for e in e2)
    X2a = _circulation(d1, e2)
    X2b = _circulation(e1, d2)
    return x, y, X1, X2a, X2b, e1, e2


def square_data_arrays(field, level):
    """Per-square arrays of the level-``level`` partition, indexed ``[a, b]`` by square position.

    Keys: ``X`` (``(k, k, 2)``), ``X1``, ``X2`` (``(k, k, 2)``), ``X2_tilde``
    (``(k, k, 2)``) and ``corner`` (``(k, k, 2)``).
    """
    level = _check_level(field, level)
    x, y, X1, X2a, X2b, e1, e2 = _grid_arrays(field.phi1, field.phi2, level)
    half1 = tuple(0.5 * e * e for e in e1)
    half2 = tuple(0.5 * e * e for e in e2)
    Xt_a = _circulation(half1, e2)
    Xt_b = _circulation(e1, half2)
    k = 2**level
    h = field.side / k
    ca = field.origin[0] + h * np.arange(k)
    cb = field.origin[1] + h * np.arange(k)
    CA, CB = np.meshgrid(ca, cb, indexing="ij")
    return {
        "corner": np.stack([CA, CB], axis=-1),
        "side": h,
        "X": np.stack([x, y], axis=-1),
        "X1": X1,
        "X2": np.stack([X2a, X2b], axis=-1),
        "X2_tilde": np.stack([Xt_a, Xt_b], axis=-1),
    }


def compute_square_data(field, level):
    """One :class:`RoughSquareData` per square of the level-``level`` partition, row-major over squares."""
    d = square_data_arrays(field, level)
    k = d["X1"].shape[0]
    out = []
    for a in range(k):
        for b in range(k):
            c = tuple(d["corner"][a, b].tolist())
            out.append(
                RoughSquareData(
                    corner=c,
                    side=d["side"],
                    base_point=c,
                    X=tuple(d["X"][a, b].tolist()),
                    X1=float(d["X1"][a, b]),
                    X2=tuple(d["X2"][a, b].tolist()),
                    X2_tilde=tuple(d["X2_tilde"][a, b].tolist()),
                )
            )
    return out


def rough_identity_residual(field, level):
    """Largest per-square ``|X2 + X X1 - X2_tilde|`` relative to the rounding scale of its sums.

    A left-point sum ``sum a_k (b_{k+1} - b_k)`` is measured by
    ``sum |a_k| (|b_k| + |b_{k+1}|)``, the magnitude its rounding error is
    proportional to.
    """
    level = _check_level(field, level)
    d = square_data_arrays(field, level)
    k = 2**level
    m = (field.phi1.shape[0] - 1) // k
    e1 = _edges(field.phi1, k, m)
    e2 = _edges(field.phi2, k, m)

    def abs_sum(ea, eb):
        return sum(
            np.sum(np.abs(a[..., :-1]) * (np.abs(b[..., :-1]) + np.abs(b[..., 1:])), axis=-1)
            for a, b in zip(ea, eb)
        )

    x = d["X"][..., 0][..., None]
    y = d["X"][..., 1][..., None]
    s1 = abs_sum(tuple(0.5 * e * e for e in e1), e2) + abs_sum(tuple(0.5 * (e - x) ** 2 for e in e1), e2)
    s1 = s1 + np.abs(d["X"][..., 0]) * abs_sum(e1, e2)
    s2 = abs_sum(e1, tuple(0.5 * e * e for e in e2)) + abs_sum(e1, tuple(0.5 * (e - y) ** 2 for e in e2))
    s2 = s2 + np.abs(d["X"][..., 1]) * abs_sum(e1, e2)
    r = d["X2"] + d["X"] * d["X1"][..., None] - d["X2_tilde"]
    scale = np.stack([s1, s2], axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(scale > 0, np.abs(r) / scale, np.abs(r))
    return float(rel.max())


def _level_terms(p1, p2, level, f, order):
    x, y, X1, X2a, X2b, _, _ = _grid_arrays(p1, p2, level)
    q = np.column_stack([x.ravel(), y.ravel()])
    t = np.asarray(f.value(q), dtype=float).reshape(X1.shape) * X1
    if order == 2:
        g = np.asarray(f.grad(q), dtype=float)
        t = t + (g[:, 0].reshape(X1.shape) * X2a + g[:, 1].reshape(X1.shape) * X2b)
    return t


def _level_sum(p1, p2, level, f, order):
    return math.fsum(_level_terms(p1, p2, level, f, order).ravel().tolist())


def fit_rate(diffs, start=4, stop=None):
    """Least-squares slope of ``log2(diffs[i])`` against ``i`` for ``start <= i < stop``."""
    stop = len(diffs) if stop is None else stop
    idx = [i for i in range(start, stop) if diffs[i] > 0 and math.isfinite(diffs[i])]
    if len(idx) < 2:
        return float("nan"), tuple(idx)
    slope = np.polyfit(np.array(idx, dtype=float), np.log2([diffs[i] for i in idx]), 1)[0]
    return float(slope), tuple(idx)


def richardson(values, depth=RICHARDSON_DEPTH):
    """Eliminate error terms ``h, h**2, ...`` from values on grids ``h, h/2, ...`` (last is finest)."""
    v = [float(x) for x in values]
    depth = min(depth, len(v) - 1)
    row = v
    for j in range(1, depth + 1):
        c = 2.0**j
        row = [(c * row[i + 1] - row[i]) / (c - 1) for i in range(len(row) - 1)]
    return row[-1]


def _diagonal(field, f, order):
    out = []
    N = field.N
    for k in range(N + 1):
        s = 2 ** (N - k)
        out.append(_level_sum(field.phi1[::s, ::s], field.phi2[::s, ::s], k, f, order))
    return out


def _report(values, rtol, extrapolated, defects=None, fit_start=4):
    diffs = [abs(values[i + 1] - values[i]) for i in range(len(values) - 1)]
    start = min(fit_start, max(len(diffs) - 2, 0))
    rate, used = fit_rate(diffs, start=start)
    last = values[-1]
    converged = bool(diffs) and diffs[-1] < rtol * (abs(last) + 1.0)
    defect_rate = fit_rate(defects, start=start)[0] if defects else None
    return ConvergenceReport(
        levels=list(range(len(values))),
        values=values,
        diffs=diffs,
        fitted_rate=rate,
        converged=converged,
        extrapolated=extrapolated,
        fit_levels=used,
        defects=defects,
        defect_rate=defect_rate,
    )


def _as_test_function(f):
    if isinstance(f, str):
        return get_test_function(f)
    if isinstance(f, TestFunction):
        return f
    if callable(f):
        return TestFunction("custom", f, None)
    raise InvalidInputError("f must be a TestFunction, a callable or a known name")


def _surface(field, f, order, rtol, extrapolate):
    f = _as_test_function(f)
    if order == 2 and f.grad is None:
        raise InvalidInputError("the second-order scheme needs an analytic gradient")
    terms = [_level_terms(field.phi1, field.phi2, n, f, order) for n in range(field.N + 1)]
    values = [math.fsum(t.ravel().tolist()) for t in terms]
    defects = []
    for n in range(field.N):
        k = 2**n
        children = terms[n + 1].reshape(k, 2, k, 2).sum(axis=(1, 3))
        defects.append(float(np.abs(terms[n] - children).sum()))
    ext = richardson(_diagonal(field, f, order)) if extrapolate else None
    return _report(values, rtol, ext, defects)


def surface_integral_first_order(field, f, rtol=DEFAULT_RTOL, extrapolate=True):
    """``I_n = sum_R f(X_R) X1_R`` for every level ``n = 0..N``."""
    return _surface(field, f, 1, rtol, extrapolate)


def surface_integral_second_order(field, f, rtol=DEFAULT_RTOL, extrapolate=True):
    """``I_n = sum_R f(X_R) X1_R + Df(X_R) . X2_R`` for every level ``n = 0..N``."""
    return _surface(field, f, 2, rtol, extrapolate)


def pairing_first_order(origin, side, g1, g2, weights, rtol=DEFAULT_RTOL):
    """First-order sums ``sum_R w(p_R) int_{dR} g1 dg2`` for arbitrary sampled components.

    ``g1``, ``g2`` and ``weights`` are ``(2**N + 1)``-square grids; ``weights``
    holds the integrand already evaluated at every grid vertex.
    """
    g = SquareField(origin, side, g1, g2)
    w = as_float_array(weights, "weights", ndim=2)
    if w.shape != g.phi1.shape:
        raise InvalidInputError("weights must be sampled on the same grid")
    M = w.shape[0] - 1

    def level_sum(p1, p2, wv, n):
        k = 2**n
        mm = (p1.shape[0] - 1) // k
        X1 = _circulation(_edges(p1, k, mm), _edges(p2, k, mm))
        return math.fsum((_corners(wv, k, mm) * X1).ravel().tolist())

    values = [level_sum(g.phi1, g.phi2, w, n) for n in range(g.N + 1)]
    diag = []
    for k in range(g.N + 1):
        s = M // 2**k
        diag.append(level_sum(g.phi1[::s, ::s], g.phi2[::s, ::s], w[::s, ::s], k))
    return _report(values, rtol, richardson(diag))


@dataclass(frozen=True)
class DegreeCheck:
    surface_value: float
    winding_value: float
    residual: float
    masked_bound: float


def degree_pairing_check(field, f, cell=0.01, threads=None):
    """Compare the surface sum of ``f`` with ``int f w`` for the boundary curve of ``phi``.

    The winding side is a midpoint sum of ``f * w`` over a cell grid (undefined
    cells use their sub-grid winding estimate); ``masked_bound`` is
    ``max|f| * max|w| * undefined area`` over those cells.
    """
    f = _as_test_function(f)
    rep = surface_integral_first_order(field, f)
    surf = rep.extrapolated if rep.extrapolated is not None else rep.value
    wf = winding_field(field.boundary_curve(), cell, threads=threads)
    X, Y = wf.centers()
    q = np.column_stack([X.ravel(), Y.ravel()])
    fv = np.asarray(f.value(q), dtype=float).reshape(X.shape)
    w = np.where(wf.defined_mask, wf.values, np.nan_to_num(wf.masked_estimate)).astype(float)
    wind = math.fsum((fv * w).ravel().tolist()) * cell * cell
    masked = ~wf.defined_mask
    wmax = float(np.abs(wf.values[wf.defined_mask]).max(initial=0))
    bound = float(np.abs(fv[masked]).sum() * cell * cell * max(wmax, 1.0))
    return DegreeCheck(surf, wind, abs(surf - wind), bound)
