"""Heisenberg group in Korányi coordinates: distance, horizontal lifts, lifting identities."""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .curves import SampledCurve
from .exceptions import InvalidInputError
from .surface import SquareField, _as_test_function, pairing_first_order
from .young import SampledFunction, young_integral


@dataclass(frozen=True)
class HeisenbergPoint:
    x: float
    y: float
    z: float

    def as_array(self):
        return np.array([self.x, self.y, self.z], dtype=float)


def _xyz(p):
    if isinstance(p, HeisenbergPoint):
        return p.x, p.y, p.z
    a = np.asarray(p, dtype=float)
    if a.shape[-1] != 3:
        raise InvalidInputError("Heisenberg points need three coordinates")
    return a[..., 0], a[..., 1], a[..., 2]


def koranyi_distance(p, q):
    """``[((dx^2 + dy^2))^2 + 16 (q_z - p_z - (p_x q_y - p_y q_x) / 2)^2]^(1/4)``.

    Accepts :class:`HeisenbergPoint` instances or arrays of shape ``(..., 3)``.
    """
    px, py, pz = _xyz(p)
    qx, qy, qz = _xyz(q)
    planar = (qx - px) ** 2 + (qy - py) ** 2
    vertical = (qz - pz) - 0.5 * (px * qy - py * qx)
    out = (planar * planar + 16.0 * vertical * vertical) ** 0.25
    return float(out) if np.ndim(out) == 0 else out


def _lift_increments(points):
    x, y = points[:, 0], points[:, 1]
    return 0.5 * (x[:-1] * np.diff(y) - y[:-1] * np.diff(x))


def horizontal_lift(curve, z0=0.0):
    """Lift a planar curve by ``dz = (x dy - y dx) / 2`` with left-point increments."""
    if curve.dim != 2:
        raise InvalidInputError(f"horizontal lift needs a planar curve, got d={curve.dim}")
    z = np.empty(len(curve))
    z[0] = float(z0)
    z[1:] = z0 + np.cumsum(_lift_increments(curve.points))
    pts = np.column_stack([curve.points, z])
    return SampledCurve(curve.times, pts, closed=curve.closed and z[-1] == z[0])


def shoelace_area(points):
    """Signed area of a closed polygon (last point repeating the first)."""
    p = np.asarray(points, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x[:-1], y[1:]) - np.dot(x[1:], y[:-1]))


class LiftingResiduals(NamedTuple):
    r1: float
    r2: float
    lhs1: float
    rhs1: float
    lhs2: float
    rhs2: float


def lifting_identity_residuals(curve):
    """``r1 = int x dz - 3/4 int x^2 dy`` and ``r2 = int y dz - 3/4 int x d(y^2)``.

    Both vanish for horizontal curves whose planar projection is closed.
    The ``z`` coordinate is not required to return to its start.
    """
    if curve.dim != 3:
        raise InvalidInputError(f"lifting identities need a curve in R^3, got d={curve.dim}")
    p = curve.points
    if not np.array_equal(p[0, :2], p[-1, :2]):
        raise InvalidInputError("planar projection of the curve must be closed")
    t = curve.times

    def integral(a, b):
        return young_integral(SampledFunction(t, a), SampledFunction(t, b)).value

    x, y, z = p[:, 0], p[:, 1], p[:, 2]
    lhs1 = integral(x, z)
    rhs1 = 0.75 * integral(x * x, y)
    lhs2 = integral(y, z)
    rhs2 = 0.75 * integral(x, y * y)
    return LiftingResiduals(lhs1 - rhs1, lhs2 - rhs2, lhs1, rhs1, lhs2, rhs2)


def boustrophedon_order(M):
    """Grid indices ``(i, j)`` of a ``(M + 1)``-square grid, rows of constant ``j`` alternating direction."""
    order = []
    for j in range(M + 1):
        rng = range(M + 1) if j % 2 == 0 else range(M, -1, -1)
        order.extend((i, j) for i in rng)
    return order


def boustrophedon_lift(field, z0=0.0):
    """``z`` grid from lifting the planar field along its boustrophedon filling curve."""
    M = field.phi1.shape[0] - 1
    order = boustrophedon_order(M)
    ii = np.array([o[0] for o in order])
    jj = np.array([o[1] for o in order])
    pts = np.column_stack([field.phi1[ii, jj], field.phi2[ii, jj]])
    z_path = np.empty(len(order))
    z_path[0] = z0
    z_path[1:] = z0 + np.cumsum(_lift_increments(pts))
    z = np.empty_like(field.phi1)
    z[ii, jj] = z_path
    return z


@dataclass(frozen=True)
class HeisenbergSquareCheck:
    """Pairings of the lifted square with ``f dx^dy``, ``f dx^dz``, ``f dy^dz``.

    ``residuals = (<f dx^dy>, <f dx^dz> - 3/2 <x f dx^dy>, <f dy^dz> - 3/2 <y f dx^dy>)``
    from extrapolated dyadic sums; ``finest`` holds the same combination of
    finest-level sums.
    """

    residuals: tuple
    finest: tuple
    pairings: dict


def heisenberg_square_check(origin, side, x, y, z, f):
    """Dyadic first-order pairings of the map ``(x, y, z)`` on a square.

    ``x, y, z`` are ``(2**N + 1)``-square grids; ``f`` is a planar test
    function evaluated on ``(x, y)``.
    """
    f = _as_test_function(f)
    planar = SquareField(origin, side, x, y)
    q = np.column_stack([planar.phi1.ravel(), planar.phi2.ravel()])
    fv = np.asarray(f.value(q), dtype=float).reshape(planar.phi1.shape)
    z = np.asarray(z, dtype=float)
    reports = {
        "xy_f": pairing_first_order(origin, side, x, y, fv),
        "xz_f": pairing_first_order(origin, side, x, z, fv),
        "yz_f": pairing_first_order(origin, side, y, z, fv),
        "xy_xf": pairing_first_order(origin, side, x, y, planar.phi1 * fv),
        "xy_yf": pairing_first_order(origin, side, x, y, planar.phi2 * fv),
    }

    def combine(get):
        v = {k: get(r) for k, r in reports.items()}
        return (v["xy_f"], v["xz_f"] - 1.5 * v["xy_xf"], v["yz_f"] - 1.5 * v["xy_yf"])

    return HeisenbergSquareCheck(
        residuals=combine(lambda r: r.extrapolated),
        finest=combine(lambda r: r.value),
        pairings={k: r.extrapolated for k, r in reports.items()},
    )


def lifted_square(field, z0=0.0):
    """Convenience: the planar field with its boustrophedon lift, as ``(x, y, z)`` grids."""
    return np.array(field.phi1), np.array(field.phi2), boustrophedon_lift(field, z0)
