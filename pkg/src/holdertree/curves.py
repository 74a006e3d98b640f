"""Sampled curves, moduli of continuity and sigma-variation.

A curve is a finite list of samples ``t_i -> p_i`` interpreted as its
piecewise-linear interpolant.  Everything here works on the sample grid
only; suprema over partitions are taken over sample points.
"""
from dataclasses import dataclass

import numpy as np

from ._validation import as_float_array, check_exponent, check_positive, check_times
from .exceptions import InvalidInputError, ModulusRangeError

# Above this many samples the Hölder estimate inspects dyadic lags only.
EXHAUSTIVE_PAIR_LIMIT = 2000


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Finitely sampled path ``times[i] -> points[i]`` in R^d.

    ``closed`` curves must repeat their first point bitwise at the end.
    Arrays are copied and made read-only.
    """

    times: np.ndarray
    points: np.ndarray
    closed: bool = False

    def __post_init__(self):
        t = check_times(self.times)
        p = as_float_array(self.points, "points")
        if p.ndim == 1:
            p = p[:, None]
        if p.ndim != 2 or p.shape[0] != t.size:
            raise InvalidInputError(
                f"points must have shape ({t.size}, d), got {np.shape(self.points)}"
            )
        if self.closed and not np.array_equal(p[0], p[-1]):
            raise InvalidInputError("closed curve must end at its first point")
        t = t.copy()
        p = p.copy()
        t.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "closed", bool(self.closed))

    @classmethod
    def from_points(cls, points, closed=None, t0=0.0, t1=1.0):
        """Uniformly parameterize ``points`` over ``[t0, t1]``.

        With ``closed=None`` the curve is closed iff the last point repeats the first.
        """
        p = as_float_array(points, "points")
        if p.ndim == 1:
            p = p[:, None]
        if closed is None:
            closed = p.shape[0] > 1 and np.array_equal(p[0], p[-1])
        return cls(np.linspace(t0, t1, p.shape[0]), p, closed)

    def __len__(self):
        return self.times.size

    def __eq__(self, other):
        if not isinstance(other, SampledCurve):
            return NotImplemented
        return (
            self.closed == other.closed
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.points, other.points)
        )

    __hash__ = None

    @property
    def dim(self):
        return self.points.shape[1]


@dataclass(frozen=True)
class Modulus:
    """Strictly increasing ``sigma: [0, inf) -> [0, inf)`` with ``sigma(0) = 0``.

    Either ``power`` (``sigma(t) = H t**alpha``) or ``table`` (linear
    interpolation through knots starting at ``(0, 0)``).  Build instances
    with :meth:`power`, :meth:`table` or :meth:`identity`.
    """

    kind: str
    H: float = 1.0
    alpha: float = 1.0
    knots: tuple = ()

    @classmethod
    def power(cls, H, alpha):
        return cls("power", H=check_positive(H, "H"), alpha=check_exponent(alpha))

    @classmethod
    def identity(cls):
        return cls.power(1.0, 1.0)

    @classmethod
    def table(cls, knots):
        k = _check_knots(knots, strict=True)
        return cls("table", knots=tuple(map(tuple, k.tolist())))

    @property
    def _t(self):
        return np.array([k[0] for k in self.knots])

    @property
    def _s(self):
        return np.array([k[1] for k in self.knots])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ModulusRangeError("modulus evaluated at a negative argument")
        if self.kind == "power":
            out = self.H * t**self.alpha
        else:
            tt = self._t
            if np.any(t > tt[-1]):
                raise ModulusRangeError(
                    f"argument {float(np.max(t))} beyond last knot {tt[-1]}"
                )
            out = np.interp(t, tt, self._s)
        return float(out) if out.ndim == 0 else out

    def inverse(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0):
            raise ModulusRangeError("modulus inverse evaluated at a negative value")
        if self.kind == "power":
            out = (s / self.H) ** (1.0 / self.alpha)
        else:
            ss = self._s
            if np.any(s > ss[-1]):
                raise ModulusRangeError(
                    f"distance {float(np.max(s))} outside tabulated range [0, {ss[-1]}]"
                )
            out = np.interp(s, ss, self._t)
        return float(out) if out.ndim == 0 else out


def _check_knots(knots, strict):
    k = as_float_array(knots, "knots", ndim=2)
    if k.shape[1] != 2 or k.shape[0] < 2:
        raise InvalidInputError("knots must be an (n >= 2, 2) array of (t, sigma(t)) pairs")
    if k[0, 0] != 0 or k[0, 1] != 0:
        raise InvalidInputError("first knot must be (0, 0)")
    if np.any(np.diff(k[:, 0]) <= 0):
        raise InvalidInputError("knot abscissae must be strictly increasing")
    ds = np.diff(k[:, 1])
    if np.any(ds <= 0) if strict else np.any(ds < 0):
        raise InvalidInputError(
            "modulus values must be strictly increasing" if strict
            else "omega must be increasing"
        )
    return k


@dataclass(frozen=True)
class HolderEstimate:
    alpha: float
    constant: float
    pair_count: int
    # False when only dyadic lags were inspected (a lower bound of the all-pairs value).
    exhaustive: bool = True


def _dyadic_lags(n):
    lag = 1
    while lag < n:
        yield lag
        lag *= 2


def estimate_holder_constant(curve, alpha, max_exhaustive=EXHAUSTIVE_PAIR_LIMIT):
    """Largest ratio ``|p_j - p_i| / (t_j - t_i)**alpha`` over sample pairs.

    Curves with more than ``max_exhaustive`` samples are scanned at lags
    1, 2, 4, ... only; ``pair_count`` and ``exhaustive`` say which.
    """
    alpha = check_exponent(alpha)
    if not isinstance(curve, SampledCurve):
        raise InvalidInputError("estimate_holder_constant expects a SampledCurve")
    t, p = curve.times, curve.points
    n = t.size
    exhaustive = n <= max_exhaustive
    lags = range(1, n) if exhaustive else _dyadic_lags(n)
    best = 0.0
    count = 0
    for lag in lags:
        d = np.linalg.norm(p[lag:] - p[:-lag], axis=1)
        ratio = d / (t[lag:] - t[:-lag]) ** alpha
        best = max(best, float(ratio.max()))
        count += ratio.size
    return HolderEstimate(alpha, best, count, exhaustive)


def smooth_modulus(omega):
    """Regularize an increasing modulus: ``sigma(t) = t + (1/t) int_t^{2t} omega``.

    ``omega`` is a table :class:`Modulus` or an ``(n, 2)`` array of knots
    ``(t, omega(t))`` (non-strict monotonicity allowed, e.g. omega = 0).
    The integral is exact for the piecewise-linear interpolant of omega,
    so sigma is tabulated at every knot ``t`` with ``2t`` inside the table.
    """
    if isinstance(omega, Modulus):
        if omega.kind != "table":
            raise InvalidInputError("smooth_modulus needs a tabulated omega")
        knots = np.array(omega.knots)
    else:
        knots = _check_knots(omega, strict=False)
    t, w = knots[:, 0], knots[:, 1]
    tmax = t[-1]
    out = [(0.0, 0.0)]
    for tk in t[1:]:
        if 2 * tk > tmax:
            break
        inner = t[(t > tk) & (t < 2 * tk)]
        xs = np.concatenate(([tk], inner, [2 * tk]))
        ys = np.interp(xs, t, w)
        integral = float(np.sum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs)))
        out.append((float(tk), float(tk + integral / tk)))
    if len(out) < 2:
        raise InvalidInputError("omega table too short: need a knot t with 2t tabulated")
    return Modulus.table(out)


def _variation_profile(dist_rows, sigma):
    """Discrete sigma-variation of every prefix.

    ``dist_rows(j)`` returns distances from sample ``j`` to samples ``0..j-1``.
    ``V[j] = max_{i<j} V[i] + sigma^{-1}(d(i, j))`` is the supremum over
    sub-partitions of the first ``j + 1`` samples.
    """
    n = dist_rows.n
    V = np.zeros(n)
    for j in range(1, n):
        V[j] = np.max(V[:j] + sigma.inverse(dist_rows(j)))
    return V


class _PointDistances:
    def __init__(self, points):
        self.points = points
        self.n = points.shape[0]

    def __call__(self, j):
        return np.linalg.norm(self.points[:j] - self.points[j], axis=1)


class _MatrixDistances:
    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=float)
        self.n = self.matrix.shape[0]

    def __call__(self, j):
        return self.matrix[j, :j]


def sigma_variation(curve, sigma):
    """Supremum over sample sub-partitions of ``sum sigma^{-1}(|p_{i+1} - p_i|)``."""
    return float(_variation_profile(_PointDistances(curve.points), sigma)[-1])


def variation_profile(curve, sigma):
    """Sigma-variation of each prefix ``curve[:j+1]``."""
    return _variation_profile(_PointDistances(curve.points), sigma)


def reparameterize_by_variation(curve, sigma):
    """Re-time ``curve`` by its cumulative sigma-variation.

    Samples whose cumulative variation repeats the previous one (constant
    plateaus) are dropped, keeping the first sample of each plateau.  The
    result satisfies ``|p(t) - p(s)| <= sigma(t - s)`` on all sample pairs.
    """
    V = _variation_profile(_PointDistances(curve.points), sigma)
    keep = np.ones(V.size, dtype=bool)
    keep[1:] = V[1:] > V[:-1]
    if keep.sum() < 2:
        raise InvalidInputError("curve is constant: its reparameterization is a single point")
    pts = curve.points[keep]
    closed = curve.closed and np.array_equal(pts[0], pts[-1])
    return SampledCurve(V[keep], pts, closed)


def _matches(rest, point, tol):
    # Exact comparison at tol = 0: a norm can underflow to zero for distinct points.
    if tol == 0:
        return np.all(rest == point, axis=1)
    return np.linalg.norm(rest - point, axis=1) <= tol


def loop_erase(curve, tol=0.0):
    """Flatten a maximal disjoint family of loops of ``curve``.

    Scanning left to right, each sample ``i`` not yet covered is matched with
    the last later sample ``j`` such that ``|p_j - p_i| <= tol``; the curve is
    then held constant at ``p_i`` on ``[t_i, t_j]`` and the scan resumes at
    ``j + 1``.  Times are unchanged; combine with
    :func:`reparameterize_by_variation` to squeeze out the plateaus.
    """
    tol = float(tol)
    if tol < 0:
        raise InvalidInputError("tol must be >= 0")
    p = np.array(curve.points)
    n = p.shape[0]
    i = 0
    while i < n - 1:
        hits = np.flatnonzero(_matches(p[i + 1:], p[i], tol))
        if hits.size:
            j = i + 1 + int(hits[-1])
            p[i + 1:j + 1] = p[i]
            i = j + 1
        else:
            i += 1
    closed = np.array_equal(p[0], p[-1]) and curve.closed
    return SampledCurve(curve.times, p, closed)


def pairwise_separated(curve, tol=0.0):
    """True when no two samples lie within ``tol`` of each other, except consecutive ones."""
    p = curve.points
    n = p.shape[0]
    for i in range(n - 2):
        if np.any(_matches(p[i + 2:], p[i], tol)):
            return False
    return True
