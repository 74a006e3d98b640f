"""Winding numbers of closed planar polygons and their moment integrals."""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from ._validation import as_float_array, check_positive
from .curves import SampledCurve
from .exceptions import InvalidInputError
from .young import SampledFunction, young_integral

# Angle sums farther than this from a multiple of 2*pi are reported as undefined.
INTEGER_TOLERANCE = 0.1
_CHUNK_ELEMENTS = 2_000_000


def _check_planar_closed(curve):
    if not isinstance(curve, SampledCurve):
        raise InvalidInputError("expected a SampledCurve")
    if curve.dim != 2:
        raise InvalidInputError(f"winding numbers need a planar curve, got d={curve.dim}")
    if not curve.closed:
        raise InvalidInputError("winding numbers need a closed curve")


def _winding_chunk(points, queries, guard):
    a = points[None, :-1, :] - queries[:, None, :]
    b = points[None, 1:, :] - queries[:, None, :]
    cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    dot = a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1]
    turns = np.arctan2(cross, dot).sum(axis=1) / (2 * math.pi)
    w = np.rint(turns)
    e = b - a
    ee = (e * e).sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(ee > 0, -(a * e).sum(axis=-1) / ee, 0.0)
    s = np.clip(s, 0.0, 1.0)
    nearest = a + s[..., None] * e
    dist = np.sqrt((nearest * nearest).sum(axis=-1)).min(axis=1)
    defined = (dist > guard) & (np.abs(turns - w) <= INTEGER_TOLERANCE)
    return w.astype(np.int64), defined


def _winding_many(points, queries, guard, threads=None):
    queries = np.atleast_2d(queries)
    nseg = max(points.shape[0] - 1, 1)
    step = max(1, _CHUNK_ELEMENTS // nseg)
    starts = range(0, queries.shape[0], step)
    jobs = [queries[s:s + step] for s in starts]
    if threads and threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda q: _winding_chunk(points, q, guard), jobs))
    else:
        parts = [_winding_chunk(points, q, guard) for q in jobs]
    if not parts:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=bool)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def winding_number(curve, q, guard=0.0) -> Optional[int]:
    """Winding number of the closed polygon ``curve`` around ``q`` by angle summation.

    Returns ``None`` when ``q`` lies within ``guard`` of the polygon (or on
    it) or when the angle sum is not within 0.1 turn of an integer.
    """
    _check_planar_closed(curve)
    q = as_float_array(q, "q", ndim=1)
    if q.shape != (2,):
        raise InvalidInputError("q must be a planar point")
    w, ok = _winding_many(curve.points, q[None, :], float(guard))
    return int(w[0]) if ok[0] else None


def ray_casting_winding(points, q):
    """Signed crossing count of an upward-rightward ray; an independent check."""
    points = np.asarray(points, dtype=float)
    x, y = q
    w = 0
    for (x0, y0), (x1, y1) in zip(points[:-1], points[1:]):
        side = (x1 - x0) * (y - y0) - (x - x0) * (y1 - y0)
        if y0 <= y < y1 and side > 0:
            w += 1
        elif y1 <= y < y0 and side < 0:
            w -= 1
    return w


@dataclass(frozen=True, eq=False)
class WindingField:
    """Winding numbers at cell centers ``origin + (col + 1/2, row + 1/2) * cell``.

    ``values`` and ``defined_mask`` have shape ``(nrows, ncols)``.  For
    undefined cells ``masked_estimate`` holds the average winding number
    over a sub-grid of the cell (NaN elsewhere); it may be omitted.
    """

    origin: tuple
    cell: float
    ncols: int
    nrows: int
    values: np.ndarray
    defined_mask: np.ndarray
    masked_estimate: Optional[np.ndarray] = None

    def centers(self):
        xs = self.origin[0] + (np.arange(self.ncols) + 0.5) * self.cell
        ys = self.origin[1] + (np.arange(self.nrows) + 0.5) * self.cell
        return np.meshgrid(xs, ys)

    def __eq__(self, other):
        if not isinstance(other, WindingField):
            return NotImplemented
        est_eq = (self.masked_estimate is None) == (other.masked_estimate is None)
        if est_eq and self.masked_estimate is not None:
            est_eq = np.array_equal(self.masked_estimate, other.masked_estimate, equal_nan=True)
        return (
            tuple(self.origin) == tuple(other.origin)
            and self.cell == other.cell
            and (self.nrows, self.ncols) == (other.nrows, other.ncols)
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.defined_mask, other.defined_mask)
            and est_eq
        )

    __hash__ = None


def _near_mask(points, origin, cell, nrows, ncols, guard):
    """Cells whose center lies within ``guard`` of the polygon."""
    mask = np.zeros((nrows, ncols), dtype=bool)
    a = points[:-1]
    b = points[1:]
    if a.shape[0] == 0:
        return mask
    e = b - a
    pieces = np.maximum(1, np.ceil(np.hypot(e[:, 0], e[:, 1]) / cell)).astype(np.int64)
    seg = np.repeat(np.arange(a.shape[0]), pieces)
    k = np.arange(seg.size) - np.repeat(np.cumsum(pieces) - pieces, pieces)
    pa = a[seg] + (k / pieces[seg])[:, None] * e[seg]
    pb = a[seg] + ((k + 1) / pieces[seg])[:, None] * e[seg]
    mid = 0.5 * (pa + pb)
    base = np.floor((mid - np.asarray(origin)) / cell - 0.5).astype(np.int64)
    r = int(math.ceil(guard / cell + 0.5)) + 1
    off = np.arange(-r, r + 2)
    ox, oy = np.meshgrid(off, off)
    ox, oy = ox.ravel(), oy.ravel()
    step = max(1, _CHUNK_ELEMENTS // (4 * ox.size))
    for lo in range(0, seg.size, step):
        sl = slice(lo, lo + step)
        cols = base[sl, 0][:, None] + ox[None, :]
        rows = base[sl, 1][:, None] + oy[None, :]
        cx = origin[0] + (cols + 0.5) * cell
        cy = origin[1] + (rows + 0.5) * cell
        ax, ay = pa[sl, 0][:, None], pa[sl, 1][:, None]
        ex, ey = (pb[sl, 0] - pa[sl, 0])[:, None], (pb[sl, 1] - pa[sl, 1])[:, None]
        ee = ex * ex + ey * ey
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.where(ee > 0, ((cx - ax) * ex + (cy - ay) * ey) / ee, 0.0)
        s = np.clip(s, 0.0, 1.0)
        dx = cx - (ax + s * ex)
        dy = cy - (ay + s * ey)
        hit = (np.sqrt(dx * dx + dy * dy) <= guard) & (rows >= 0) & (rows < nrows) & (cols >= 0) & (cols < ncols)
        mask[rows[hit], cols[hit]] = True
    return mask


def _row_crossing_winding(points, qx, y):
    """Signed crossings of rightward rays from ``(qx, y)`` (half-open rule)."""
    y0, y1 = points[:-1, 1], points[1:, 1]
    up = (y0 <= y) & (y < y1)
    down = (y1 <= y) & (y < y0)
    sel = up | down
    if not sel.any():
        return np.zeros(qx.size, dtype=np.int64)
    x0, x1 = points[:-1, 0][sel], points[1:, 0][sel]
    ya, yb = y0[sel], y1[sel]
    xc = x0 + (y - ya) * (x1 - x0) / (yb - ya)
    sign = np.where(up[sel], 1, -1)
    order = np.argsort(xc)
    xc = xc[order]
    suffix = np.concatenate([np.cumsum(sign[order][::-1])[::-1], [0]])
    return suffix[np.searchsorted(xc, qx, side="right")]


def winding_field(curve, cell, guard=None, refine=4, threads=None):
    """Evaluate winding numbers on the cell grid covering the curve's bounding box.

    The box is inflated by one cell on every side.  A cell is undefined when
    its center is within ``guard`` of the curve; the default guard is half
    the cell diagonal, so every cell the curve passes through is undefined.
    With ``guard >= cell / 2`` no curve passes between the centers of two
    adjacent defined cells, so the winding number is evaluated by angle
    summation once per 4-connected component of defined cells.  Undefined
    cells get the average crossing-count winding number over a
    ``refine`` x ``refine`` sub-grid when ``refine > 0``.
    """
    _check_planar_closed(curve)
    cell = check_positive(cell, "cell")
    guard = cell * math.sqrt(0.5) if guard is None else float(guard)
    pts = curve.points
    lo = pts.min(axis=0) - cell
    hi = pts.max(axis=0) + cell
    ncols = int(math.ceil((hi[0] - lo[0]) / cell))
    nrows = int(math.ceil((hi[1] - lo[1]) / cell))
    origin = tuple(lo.tolist())
    shell = WindingField(origin, cell, ncols, nrows, None, None)
    X, Y = shell.centers()
    if guard >= cell / 2:
        near = _near_mask(pts, origin, cell, nrows, ncols, guard)
        labels, count = ndimage.label(~near)
        flat = labels.ravel()
        _, first = np.unique(flat, return_index=True)
        reps = first[flat[first] > 0]
        q = np.column_stack([X.ravel()[reps], Y.ravel()[reps]])
        w, ok = _winding_many(pts, q, guard, threads)
        comp_w = np.zeros(count + 1, dtype=np.int64)
        comp_ok = np.zeros(count + 1, dtype=bool)
        comp_w[flat[reps]] = w
        comp_ok[flat[reps]] = ok
        mask = comp_ok[labels]
        values = np.where(mask, comp_w[labels], 0)
    else:
        q = np.column_stack([X.ravel(), Y.ravel()])
        w, ok = _winding_many(pts, q, guard, threads)
        mask = ok.reshape(nrows, ncols)
        values = np.where(mask, w.reshape(nrows, ncols), 0)
    estimate = None
    if refine and refine > 0:
        estimate = np.full((nrows, ncols), np.nan)
        offs = ((np.arange(refine) + 0.5) / refine - 0.5) * cell
        for r in np.flatnonzero((~mask).any(axis=1)):
            cols = np.flatnonzero(~mask[r])
            acc = np.zeros(cols.size)
            xs = (X[r, cols][:, None] + offs[None, :]).ravel()
            for dy in offs:
                wr = _row_crossing_winding(pts, xs, Y[r, 0] + dy)
                acc += wr.reshape(cols.size, refine).sum(axis=1)
            estimate[r, cols] = acc / (refine * refine)
    return WindingField(origin, cell, ncols, nrows, values.astype(np.int64), mask, estimate)


@dataclass(frozen=True)
class WindingMoments:
    m00: float
    m10: float
    m01: float
    pos_mass: float
    neg_mass: float
    pos_center: Optional[tuple]
    neg_center: Optional[tuple]
    masked_area: float
    # Worst-case quadrature error of (m00, m10, m01) caused by undefined cells.
    error_bound: tuple = (0.0, 0.0, 0.0)

    def as_dict(self):
        return {
            "m00": self.m00,
            "m10": self.m10,
            "m01": self.m01,
            "masked_area": self.masked_area,
            "pos_mass": self.pos_mass,
            "neg_mass": self.neg_mass,
            "pos_center": list(self.pos_center) if self.pos_center is not None else None,
            "neg_center": list(self.neg_center) if self.neg_center is not None else None,
            "error_bound": list(self.error_bound),
        }


def winding_moments(field, use_estimate=True):
    """Midpoint-rule integrals of ``w``, ``q_x w`` and ``q_y w`` over the field.

    Undefined cells contribute their sub-grid estimate (or zero with
    ``use_estimate=False``).  ``error_bound`` spans the winding values seen
    on defined cells, times the undefined area (weighted by ``|q|`` for the
    first moments).
    """
    if field.values is None or field.values.size == 0:
        return WindingMoments(0.0, 0.0, 0.0, 0.0, 0.0, None, None, 0.0)
    X, Y = field.centers()
    mask = field.defined_mask
    w = np.where(mask, field.values, 0).astype(float)
    if use_estimate and field.masked_estimate is not None:
        w = np.where(mask, w, np.nan_to_num(field.masked_estimate))
    area = field.cell * field.cell
    wp = np.clip(w, 0, None)
    wn = np.clip(-w, 0, None)
    pos = float(wp.sum() * area)
    neg = float(wn.sum() * area)

    def center(weights, mass):
        if mass == 0:
            return None
        return (float((X * weights).sum() * area / mass), float((Y * weights).sum() * area / mass))

    defined_vals = field.values[mask]
    span = float(max(defined_vals.max(initial=0), 0) - min(defined_vals.min(initial=0), 0))
    masked = ~mask
    masked_area = float(masked.sum() * area)
    half = field.cell / 2
    bound = (
        span * masked_area,
        span * float((np.abs(X[masked]) + half).sum() * area),
        span * float((np.abs(Y[masked]) + half).sum() * area),
    )
    return WindingMoments(
        m00=float(w.sum() * area),
        m10=float((X * w).sum() * area),
        m01=float((Y * w).sum() * area),
        pos_mass=pos,
        neg_mass=neg,
        pos_center=center(wp, pos),
        neg_center=center(wn, neg),
        masked_area=masked_area,
        error_bound=bound,
    )


def current_pairing(curve, g1, g2):
    """``int g1(gamma) d g2(gamma)`` around the closed planar ``curve``.

    ``g1`` and ``g2`` map an ``(n, 2)`` array of points to ``n`` values.
    Equals ``int w_gamma det Dg`` for Lipschitz ``g``.
    """
    _check_planar_closed(curve)
    a = np.asarray(g1(curve.points), dtype=float)
    b = np.asarray(g2(curve.points), dtype=float)
    return young_integral(SampledFunction(curve.times, a), SampledFunction(curve.times, b)).value
