"""Quotient trees of maps defined on finite metric graphs.

Vertices ``x, y`` of a graph are identified when ``D(x, y) = 0`` where
``D(x, y)`` is the least image diameter of a connected vertex set containing
both.  The quotient carries the monotone metric
``d_T(p, p') = max D(q, q')`` over sub-arcs ``[q, q']`` of ``[p, p']``.
"""
import math
import warnings
from collections import deque
from dataclasses import dataclass
from typing import Optional

import networkx as nx
import numpy as np

from ._validation import as_float_array
from .curves import Modulus, SampledCurve
from .exceptions import InvalidInputError, NotATreeError, SizeLimitError
from .winding import winding_field, winding_moments

EXACT_VERTEX_LIMIT = 22
TABLE_CLASS_LIMIT = 500


class MetricGraphMap:
    """Connected weighted graph with a target point ``phi[k]`` for ``vertices[k]``.

    ``edges`` are ``(u, v, length)`` triples of vertex ids with positive
    length.  ``C`` is the declared quasi-convexity constant.
    """

    def __init__(self, vertices, edges, phi, C=1.0):
        self.vertices = list(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise InvalidInputError("vertex ids must be unique")
        if not self.vertices:
            raise InvalidInputError("graph needs at least one vertex")
        self.index = {v: k for k, v in enumerate(self.vertices)}
        phi = as_float_array(phi, "phi")
        if phi.ndim == 1:
            phi = phi[:, None]
        if phi.ndim != 2 or phi.shape[0] != len(self.vertices):
            raise InvalidInputError("phi needs one target point per vertex")
        phi.setflags(write=False)
        self.phi = phi
        self.C = float(C)
        if not self.C >= 1:
            raise InvalidInputError("quasi-convexity constant C must be >= 1")
        self.edges = []
        g = nx.Graph()
        g.add_nodes_from(range(len(self.vertices)))
        for e in edges:
            if len(e) != 3:
                raise InvalidInputError(f"edge {e!r} must be [u, v, length]")
            u, v, w = e
            if u not in self.index or v not in self.index:
                raise InvalidInputError(f"edge {e!r} refers to an unknown vertex")
            if u == v:
                raise InvalidInputError(f"self-loop at vertex {u!r}")
            w = float(w)
            if not (w > 0 and math.isfinite(w)):
                raise InvalidInputError(f"edge {e!r} must have positive finite length")
            self.edges.append((u, v, w))
            g.add_edge(self.index[u], self.index[v], length=w)
        if not nx.is_connected(g):
            raise InvalidInputError("graph must be connected")
        self.graph = g
        self.neighbors = [sorted(g.neighbors(k)) for k in range(len(self.vertices))]
        diff = phi[:, None, :] - phi[None, :, :]
        self.dist = np.sqrt((diff * diff).sum(axis=-1))

    def __len__(self):
        return len(self.vertices)

    @property
    def dim(self):
        return self.phi.shape[1]

    def __eq__(self, other):
        if not isinstance(other, MetricGraphMap):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and self.edges == other.edges
            and np.array_equal(self.phi, other.phi)
            and self.C == other.C
        )

    __hash__ = None


def _vertex_index(gmap, v):
    try:
        return gmap.index[v]
    except KeyError:
        raise InvalidInputError(f"unknown vertex {v!r}") from None


def pseudo_metric_D_exact(gmap, x, y):
    """Least ``diam(phi(C))`` over connected vertex sets ``C`` containing ``x`` and ``y``.

    Enumerates connected sets grown from ``x``, pruning any set whose
    diameter already reaches the best value found.  Limited to graphs with
    at most 22 vertices.
    """
    if len(gmap) > EXACT_VERTEX_LIMIT:
        raise SizeLimitError(
            f"exact D enumerates connected sets; graph has {len(gmap)} > {EXACT_VERTEX_LIMIT} vertices"
        )
    xi, yi = _vertex_index(gmap, x), _vertex_index(gmap, y)
    if xi == yi:
        return 0.0
    dist = gmap.dist
    nbr = [sum(1 << w for w in gmap.neighbors[v]) for v in range(len(gmap))]
    best = math.inf

    def grow(members, mask, diam, frontier, banned):
        nonlocal best
        while frontier:
            bit = frontier & -frontier
            v = bit.bit_length() - 1
            frontier &= ~bit
            d = max(diam, max(dist[v, u] for u in members))
            if d < best:
                if v == yi:
                    best = d
                else:
                    new_mask = mask | bit
                    grow(members + [v], new_mask, d, (frontier | nbr[v]) & ~new_mask & ~banned, banned)
            banned |= bit

    start = 1 << xi
    grow([xi], start, 0.0, nbr[xi] & ~start, 0)
    return float(best)


def _component(gmap, start, allowed):
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in gmap.neighbors[v]:
            if allowed[w] and w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def _surrogate_index(gmap, xi, yi):
    if xi == yi:
        return 0.0
    radii = gmap.dist[xi]
    candidates = np.unique(radii)
    lo, hi = 0, candidates.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if yi in _component(gmap, xi, radii <= candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    comp = sorted(_component(gmap, xi, radii <= candidates[lo]))
    return float(gmap.dist[np.ix_(comp, comp)].max())


def pseudo_metric_D_surrogate(gmap, x, y):
    """Ball-threshold bound on ``D(x, y)``, always within ``[D, 2 D]``.

    Finds the least radius ``t`` (among the values ``|phi(v) - phi(x)|``)
    at which ``x`` and ``y`` are joined inside ``{v : |phi(v) - phi(x)| <= t}``
    and returns the image diameter of that connected component.
    """
    return _surrogate_index(gmap, _vertex_index(gmap, x), _vertex_index(gmap, y))


class QuotientTree:
    """Tree of vertex classes with the monotone metric ``d_T``.

    ``classes[c]`` lists the vertex ids of class ``c`` (the first one is its
    representative), ``tree_edges`` the class adjacencies, ``psi`` maps a
    vertex id to its class and ``phi_bar[c]`` is the representative's image.
    """

    def __init__(self, gmap, classes, tree_edges):
        self.gmap = gmap
        self.classes = [list(c) for c in classes]
        self.tree_edges = sorted((min(a, b), max(a, b)) for a, b in tree_edges)
        self.psi = {v: c for c, members in enumerate(self.classes) for v in members}
        self.phi_bar = np.array([gmap.phi[gmap.index[c[0]]] for c in self.classes])
        self.graph = nx.Graph()
        self.graph.add_nodes_from(range(len(self.classes)))
        self.graph.add_edges_from(self.tree_edges)
        self._parent, self._depth = self._root()
        self._D = {}
        self._dT = {}

    def __len__(self):
        return len(self.classes)

    def __eq__(self, other):
        if not isinstance(other, QuotientTree):
            return NotImplemented
        return (
            self.gmap == other.gmap
            and self.classes == other.classes
            and self.tree_edges == other.tree_edges
        )

    __hash__ = None

    def _root(self):
        parent = [-1] * len(self.classes)
        depth = [0] * len(self.classes)
        seen = {0}
        queue = deque([0])
        while queue:
            c = queue.popleft()
            for w in sorted(self.graph.neighbors(c)):
                if w not in seen:
                    seen.add(w)
                    parent[w] = c
                    depth[w] = depth[c] + 1
                    queue.append(w)
        return parent, depth

    def path(self, p, q):
        """Classes on the arc from ``p`` to ``q``, both included."""
        up, down = [p], [q]
        a, b = p, q
        while self._depth[a] > self._depth[b]:
            a = self._parent[a]
            up.append(a)
        while self._depth[b] > self._depth[a]:
            b = self._parent[b]
            down.append(b)
        while a != b:
            a = self._parent[a]
            b = self._parent[b]
            up.append(a)
            down.append(b)
        return up + down[-2::-1]

    def D(self, p, q):
        """Symmetrized surrogate ``D`` between class representatives."""
        if p == q:
            return 0.0
        key = (min(p, q), max(p, q))
        if key not in self._D:
            idx = self.gmap.index
            a = idx[self.classes[p][0]]
            b = idx[self.classes[q][0]]
            self._D[key] = max(_surrogate_index(self.gmap, a, b), _surrogate_index(self.gmap, b, a))
        return self._D[key]

    def d_T(self, p, q):
        """``max D(c_i, c_j)`` over all sub-arcs of the arc ``[p, q]``."""
        if p == q:
            return 0.0
        key = (min(p, q), max(p, q))
        if key in self._dT:
            return self._dT[key]
        arc = self.path(p, q)
        m = len(arc)
        # best[i] holds d_T(arc[i], arc[j]) for the current right end j.
        best = [0.0] * m
        for j in range(1, m):
            best[j] = 0.0
            for i in range(j - 1, -1, -1):
                k = (min(arc[i], arc[j]), max(arc[i], arc[j]))
                if k in self._dT:
                    val = self._dT[k]
                else:
                    val = max(self.D(arc[i], arc[j]), best[i], best[i + 1])
                    self._dT[k] = val
                best[i] = val
        return self._dT[key]

    def d_T_table(self):
        n = len(self.classes)
        if n > TABLE_CLASS_LIMIT:
            raise SizeLimitError(f"d_T table limited to {TABLE_CLASS_LIMIT} classes")
        return np.array([[self.d_T(p, q) for q in range(n)] for p in range(n)])

    def arc_variation(self, p, q, sigma):
        """Arc ``[p, q]`` and the sigma-variation of each of its prefixes under ``d_T``."""
        arc = self.path(p, q)
        V = np.zeros(len(arc))
        for j in range(1, len(arc)):
            d = np.array([self.d_T(arc[i], arc[j]) for i in range(j)])
            V[j] = np.max(V[:j] + sigma.inverse(d))
        return arc, V


def _classes(gmap, epsilon):
    n = len(gmap)
    label = [-1] * n
    classes = []
    for seed in range(n):
        if label[seed] >= 0:
            continue
        c = len(classes)
        label[seed] = c
        members = [seed]
        queue = deque([seed])
        while queue:
            v = queue.popleft()
            for w in gmap.neighbors[v]:
                if label[w] < 0 and gmap.dist[w, seed] <= epsilon:
                    label[w] = c
                    members.append(w)
                    queue.append(w)
        classes.append(members)
    return label, classes


def _vertex_cycle(gmap, label, classes, class_cycle):
    """Closed vertex walk visiting the classes of ``class_cycle`` in order."""
    walk = []
    k = len(class_cycle)
    crossings = []
    for i in range(k):
        a, b = class_cycle[i], class_cycle[(i + 1) % k]
        u, v = next(
            (u, v)
            for u in classes[a]
            for v in gmap.neighbors[u]
            if label[v] == b
        )
        crossings.append((u, v))
    for i in range(k):
        entry = crossings[i - 1][1]
        exit_ = crossings[i][0]
        c = class_cycle[i]
        sub = gmap.graph.subgraph(classes[c])
        walk.extend(nx.shortest_path(sub, entry, exit_))
    walk.append(walk[0])
    return [gmap.vertices[v] for v in walk]


def build_quotient_tree(gmap, epsilon=0.0):
    """Contract level-set classes of ``phi`` and check that the result is a tree.

    Classes are grown greedily from the lowest-index unassigned vertex over
    neighbors whose image lies within ``epsilon`` of the seed's image.
    Raises :class:`NotATreeError` carrying a class cycle and a closed vertex
    walk realizing it when the contracted graph has a cycle.
    """
    epsilon = float(epsilon)
    if not epsilon >= 0:
        raise InvalidInputError("epsilon must be >= 0")
    label, classes = _classes(gmap, epsilon)
    cg = nx.Graph()
    cg.add_nodes_from(range(len(classes)))
    for u, v in gmap.graph.edges():
        if label[u] != label[v]:
            cg.add_edge(label[u], label[v])
    if cg.number_of_edges() != len(classes) - 1:
        cycle = [a for a, _ in nx.find_cycle(cg, source=0)]
        raise NotATreeError(
            f"contracted graph has a cycle through {len(cycle)} classes at epsilon={epsilon}",
            cycle=cycle,
            vertex_cycle=_vertex_cycle(gmap, label, classes, cycle),
        )
    named = [[gmap.vertices[v] for v in members] for members in classes]
    return QuotientTree(gmap, named, list(cg.edges()))


def contraction(tree, p, q, t, sigma):
    """``pi_p(q, t)``: the first class of ``[p, q]`` whose sigma-variation from ``p`` reaches ``t``.

    Returns ``q`` once ``t`` is at least the variation of the whole arc.
    """
    t = float(t)
    if t < 0:
        raise InvalidInputError("t must be >= 0")
    arc, V = tree.arc_variation(p, q, sigma)
    j = int(np.searchsorted(V, t, side="left"))
    return arc[min(j, len(arc) - 1)]


def cone_extension(tree, f, L, sigma, x, check=True):
    """Extend boundary classes ``f`` (samples at angles ``2 pi k / n``) to the unit disk.

    ``F(r e^{i theta}) = pi_p(f(theta), L pi max(0, 2r - 1))`` with
    ``p = f[0]``; ``theta`` is rounded to the nearest sample angle.
    """
    f = list(f)
    n = len(f)
    if n == 0:
        raise InvalidInputError("boundary assignment is empty")
    x = as_float_array(x, "x", ndim=1)
    r = float(np.hypot(x[0], x[1]))
    if r > 1 + 1e-12:
        raise InvalidInputError("x must lie in the closed unit disk")
    if check:
        _check_boundary(tree, f, L, sigma)
    p = f[0]
    if r == 0:
        return p
    k = int(round(math.atan2(x[1], x[0]) / (2 * math.pi) * n)) % n
    return contraction(tree, p, f[k], L * math.pi * max(0.0, 2 * min(r, 1.0) - 1), sigma)


def _check_boundary(tree, f, L, sigma):
    n = len(f)
    ang = 2 * math.pi * np.arange(n) / n
    pts = np.column_stack([np.cos(ang), np.sin(ang)])
    for i in range(n):
        for j in range(i + 1, n):
            if tree.d_T(f[i], f[j]) > sigma(L * float(np.linalg.norm(pts[i] - pts[j]))) * (1 + 1e-9):
                warnings.warn(
                    f"boundary assignment is not sigma(L|s - s'|)-continuous at samples {i}, {j}",
                    stacklevel=3,
                )
                return False
    return True


@dataclass(frozen=True)
class PropertyTCertificate:
    verdict: str
    witness: Optional[list] = None
    moments: Optional[object] = None
    tolerance: Optional[tuple] = None
    cycles_checked: int = 0

    @property
    def holds(self):
        return self.verdict == "holds_up_to_tolerance"

    @property
    def exit_code(self):
        return 0 if self.holds else 2


def cycle_curve(gmap, cycle):
    """Closed planar curve through the images of a closed vertex path."""
    cyc = list(cycle)
    if len(cyc) > 1 and cyc[0] == cyc[-1]:
        cyc = cyc[:-1]
    idx = [_vertex_index(gmap, v) for v in cyc]
    for a, b in zip(idx, idx[1:] + idx[:1]):
        if len(idx) > 1 and not gmap.graph.has_edge(a, b) and a != b:
            raise InvalidInputError(f"{gmap.vertices[a]!r}-{gmap.vertices[b]!r} is not an edge")
    pts = gmap.phi[idx + idx[:1]]
    return SampledCurve(np.arange(len(pts), dtype=float), pts, closed=True)


def property_t_check(gmap, cycles=None, cell=0.01, rtol=1e-9, moments="full", threads=None):
    """Test vanishing of the winding moments of ``phi`` along closed vertex paths.

    ``moments="full"`` checks ``m00, m10, m01``; ``"area"`` checks ``m00``
    only.  Each moment is compared against its undefined-cell error budget
    plus ``rtol``.  Without ``cycles`` a fundamental cycle basis is used.
    """
    if gmap.dim != 2:
        raise InvalidInputError(f"property (T) check needs planar targets, got d={gmap.dim}")
    if moments not in ("full", "area"):
        raise InvalidInputError("moments must be 'full' or 'area'")
    if cycles is None:
        cycles = [[gmap.vertices[v] for v in c] for c in nx.cycle_basis(gmap.graph, 0)]
    count = 0
    for cyc in cycles:
        curve = cycle_curve(gmap, cyc)
        m = winding_moments(winding_field(curve, cell, threads=threads))
        tol = tuple(b + rtol for b in m.error_bound)
        vals = (m.m00, m.m10, m.m01) if moments == "full" else (m.m00,)
        count += 1
        if any(abs(v) > t for v, t in zip(vals, tol)):
            return PropertyTCertificate("violated", list(cyc), m, tol, count)
    return PropertyTCertificate("holds_up_to_tolerance", None, None, None, count)
