"""Deterministic test data: circles, figure-eights, Weierstrass fields, graphs."""
import math

import networkx as nx
import numpy as np

from .curves import SampledCurve
from .exceptions import InvalidInputError
from .heisenberg import horizontal_lift
from .surface import SquareField
from .tree import MetricGraphMap


def _closed(points):
    points = np.asarray(points, dtype=float)
    points[-1] = points[0]
    return SampledCurve(np.linspace(0.0, 1.0, points.shape[0]), points, closed=True)


def circle(samples=1024, radius=1.0, center=(0.0, 0.0), turns=1, clockwise=False):
    """``center + radius (cos 2 pi turns t, +-sin 2 pi turns t)`` at ``samples`` times in ``[0, 1]``.

    The last sample repeats the first bitwise.
    """
    if samples < 3:
        raise InvalidInputError("a circle needs at least 3 samples")
    th = 2 * math.pi * turns * np.linspace(0.0, 1.0, samples)
    sign = -1.0 if clockwise else 1.0
    pts = np.column_stack([center[0] + radius * np.cos(th), center[1] + sign * radius * np.sin(th)])
    return _closed(pts)


def figure_eight(samples_per_lobe=512, opposite=True, radius=1.0):
    """Unit circles about ``(-radius, 0)`` and ``(radius, 0)`` joined at the origin.

    The left lobe runs counterclockwise; the right lobe runs clockwise when
    ``opposite`` (a figure-eight traversal) and counterclockwise otherwise.
    """
    th = 2 * math.pi * np.linspace(0.0, 1.0, samples_per_lobe + 1)
    left = np.column_stack([-radius + radius * np.cos(th), radius * np.sin(th)])
    sign = 1.0 if opposite else -1.0
    right = np.column_stack([radius - radius * np.cos(th), sign * radius * np.sin(th)])
    left[0] = left[-1] = right[0] = right[-1] = 0.0
    return _closed(np.vstack([left, right[1:]]))


def weierstrass_field(alpha, N, seed, side=2 * math.pi):
    """Truncated Weierstrass map on ``[0, side]^2`` with ``2**N + 1`` samples per side.

    ``phi(s, t) = sum_{k=0}^{N-2} 2^(-alpha k) (sin(2^k s + c_k), cos(2^k t + c_k))``
    with phases ``c_k`` drawn uniformly from ``[0, 2 pi)`` by
    ``numpy.random.default_rng(seed)``.
    """
    if not 0 < alpha <= 1:
        raise InvalidInputError("alpha must lie in (0, 1]")
    if not 2 <= N <= 14:
        raise InvalidInputError("N must lie in [2, 14]")
    K = N - 2
    c = np.random.default_rng(seed).uniform(0.0, 2 * math.pi, size=K + 1)

    def phi(s, t):
        p1 = np.zeros_like(s)
        p2 = np.zeros_like(t)
        for k in range(K + 1):
            a = 2.0 ** (-alpha * k)
            p1 += a * np.sin(2.0**k * s + c[k])
            p2 += a * np.cos(2.0**k * t + c[k])
        return p1, p2

    return SquareField.from_function(phi, (0.0, 0.0), side, N)


def lifted_circle(samples=8192, radius=1.0, center=(0.0, 0.0)):
    """Horizontal lift of :func:`circle`, starting at ``z = 0``."""
    return horizontal_lift(circle(samples, radius, center))


def star_graph(leaves=4, length=1.0):
    """Center ``0`` at the origin with leaves ``1..leaves`` on the unit circle."""
    ang = 2 * math.pi * np.arange(leaves) / leaves
    phi = [[0.0, 0.0]] + [[math.cos(a), math.sin(a)] for a in ang]
    edges = [[0, k, length] for k in range(1, leaves + 1)]
    return MetricGraphMap(list(range(leaves + 1)), edges, phi)


def cycle_graph(n=16, radius=1.0, center=(0.0, 0.0)):
    """Cycle on ``n`` vertices mapped to a counterclockwise regular polygon."""
    ang = 2 * math.pi * np.arange(n) / n
    phi = np.column_stack([center[0] + radius * np.cos(ang), center[1] + radius * np.sin(ang)])
    edges = [[k, (k + 1) % n, 1.0] for k in range(n)]
    return MetricGraphMap(list(range(n)), edges, phi)


def curve_graph(curve):
    """Cycle graph whose vertices are the samples of a closed curve (closing sample dropped)."""
    pts = np.asarray(curve.points)[:-1]
    n = pts.shape[0]
    edges = [[k, (k + 1) % n, 1.0] for k in range(n)]
    return MetricGraphMap(list(range(n)), edges, pts)


def random_star_polygon_graph(rng, n):
    """Cycle graph mapped injectively onto a random star-shaped simple polygon."""
    ang = np.sort(rng.uniform(0, 2 * math.pi, size=n))
    r = rng.uniform(0.5, 1.5, size=n)
    phi = np.column_stack([r * np.cos(ang), r * np.sin(ang)])
    edges = [[k, (k + 1) % n, 1.0] for k in range(n)]
    return MetricGraphMap(list(range(n)), edges, phi)


def random_tree_pullback(rng, nodes, max_cluster=3, extra_edges=0.5):
    """Graph whose map factors through a random planar tree.

    Each tree node becomes a cluster of 1..``max_cluster`` vertices sharing
    the node's image (a random point); every tree edge joins random members
    of the two clusters, and with probability ``extra_edges`` a second such
    edge is added, creating cycles that the quotient collapses.
    """
    tree = nx.random_labeled_tree(nodes, seed=int(rng.integers(2**31)))
    pos = rng.normal(size=(nodes, 2))
    clusters = []
    phi = []
    edges = []
    vid = 0
    for node in range(nodes):
        size = int(rng.integers(1, max_cluster + 1))
        members = list(range(vid, vid + size))
        vid += size
        clusters.append(members)
        phi.extend([pos[node]] * size)
        for a, b in zip(members, members[1:]):
            edges.append([a, b, 1.0])
        if size > 2 and rng.random() < 0.5:
            edges.append([members[0], members[-1], 1.0])
    for u, v in tree.edges():
        edges.append([int(rng.choice(clusters[u])), int(rng.choice(clusters[v])), 1.0])
        if rng.random() < extra_edges:
            a, b = int(rng.choice(clusters[u])), int(rng.choice(clusters[v]))
            if [a, b, 1.0] not in edges:
                edges.append([a, b, 1.0])
    return MetricGraphMap(list(range(vid)), edges, np.array(phi)), tree, pos
