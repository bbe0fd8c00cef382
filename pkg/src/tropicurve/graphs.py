"""Exact-rational metric graphs and extended graphs with infinite leaf edges.

A metric graph is a finite connected multigraph whose edges carry positive
rational lengths.  An extended graph additionally carries infinite leaf
edges ("rays"), each identified with [0, inf] and attached at a point of
the finite part.

Graphs are immutable: subdivision returns a new graph.  Every graph keeps a
cumulative alias table mapping retired edge ids to the segments that replaced
them, so points expressed in an ancestor's (edge, offset) frame stay
meaningful after arbitrarily many refinements.  Loop edges are split at
their midpoint on ingestion, which keeps every stored edge loop-free and
makes (edge, offset) coordinates unambiguous.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, count
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .errors import (
    DanglingEndpoint,
    DisconnectedGraph,
    DuplicateId,
    InvalidOffset,
    NonpositiveLength,
    PointNotInterior,
    PointsNotOnEdge,
    UnknownEdge,
    UnknownVertex,
    WrongCardinality,
)
from .rationals import rat

INF = None  # marker for infinite offsets / lengths in segment tables


@dataclass(frozen=True)
class Edge:
    id: str
    a: str
    b: str
    length: Fraction

    def other(self, v: str) -> str:
        return self.b if v == self.a else self.a


@dataclass(frozen=True)
class Ray:
    """An infinite leaf edge, attached at `attach`, ending at the infinite
    vertex `leaf`.  Offsets run from the attach point toward the leaf."""

    id: str
    attach: str
    leaf: str


@dataclass(frozen=True, order=True)
class GraphPoint:
    """A point of a (possibly extended) graph.

    Canonical form is vertex-based whenever possible: offsets 0 or full
    length normalize to the corresponding endpoint.  Non-canonical instances
    (offsets in a retired edge's frame) are accepted by all graph operations
    and resolved through the alias table.
    """

    kind: int  # 0 = vertex, 1 = on-edge; kept first for a total order
    vertex: Optional[str] = None
    edge: Optional[str] = None
    offset: Optional[Fraction] = None

    @staticmethod
    def at_vertex(v: str) -> "GraphPoint":
        return GraphPoint(0, vertex=v)

    @staticmethod
    def on_edge(edge: str, offset) -> "GraphPoint":
        return GraphPoint(1, edge=edge, offset=rat(offset))

    @property
    def is_vertex(self) -> bool:
        return self.kind == 0

    def __repr__(self):
        if self.is_vertex:
            return f"GraphPoint(vertex={self.vertex!r})"
        return f"GraphPoint(edge={self.edge!r}, offset={self.offset})"


def _segments_sorted(segs):
    return tuple(sorted(segs, key=lambda s: s[1]))


class MetricGraph:
    """Immutable connected metric graph with positive rational edge lengths."""

    def __init__(self, vertices, edges, _alias=None, _lengths=None, _validated=False):
        self._vertices = tuple(sorted(vertices))
        self._vertex_set = frozenset(self._vertices)
        self._edges: dict[str, Edge] = dict(sorted(edges.items()))
        self._alias: dict[str, tuple] = dict(_alias or {})
        self._lengths: dict[str, Fraction] = dict(_lengths or {})
        for e in self._edges.values():
            self._lengths[e.id] = e.length
        self._adj_cache = None
        self._dist_cache: dict[str, dict[str, Fraction]] = {}
        if not _validated:
            self._validate()

    # -- construction -------------------------------------------------------

    def _validate(self):
        if not self._vertices:
            raise DanglingEndpoint("graph needs at least one vertex")
        for e in self._edges.values():
            if e.a not in self._vertex_set or e.b not in self._vertex_set:
                raise DanglingEndpoint(f"edge {e.id!r} references unknown vertex")
            if e.length <= 0:
                raise NonpositiveLength(f"edge {e.id!r} has length {e.length}")
            if e.a == e.b:
                raise NonpositiveLength(f"edge {e.id!r} is a loop; split before storing")
        if not self._is_connected():
            raise DisconnectedGraph("graph is not connected")

    def _is_connected(self) -> bool:
        if not self._vertices:
            return False
        seen = {self._vertices[0]}
        stack = [self._vertices[0]]
        adj = self.adjacency
        while stack:
            v = stack.pop()
            for eid, w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self._vertices)

    # -- read access ----------------------------------------------------------

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    @property
    def edges(self) -> Mapping[str, Edge]:
        return self._edges

    def edge(self, edge_id: str) -> Edge:
        try:
            return self._edges[edge_id]
        except KeyError:
            raise UnknownEdge(f"unknown edge {edge_id!r}") from None

    def edge_ids(self) -> list[str]:
        return list(self._edges)

    @property
    def adjacency(self) -> Mapping[str, list[tuple[str, str]]]:
        if self._adj_cache is None:
            adj = {v: [] for v in self._vertices}
            for e in self._edges.values():
                adj[e.a].append((e.id, e.b))
                adj[e.b].append((e.id, e.a))
            self._adj_cache = adj
        return self._adj_cache

    def incident_edges(self, v: str) -> list[str]:
        if v not in self._vertex_set:
            raise UnknownVertex(f"unknown vertex {v!r}")
        return [eid for eid, _ in self.adjacency[v]]

    def valence(self, v: str) -> int:
        return len(self.incident_edges(v))

    def betti_number(self) -> int:
        return len(self._edges) - len(self._vertices) + 1

    def frame_length(self, edge_id: str) -> Optional[Fraction]:
        """Length of an edge id, current or retired (None for rays)."""
        if edge_id in self._lengths:
            return self._lengths[edge_id]
        raise UnknownEdge(f"unknown edge {edge_id!r}")

    # -- points ---------------------------------------------------------------

    def canonical_point(self, pt: GraphPoint) -> GraphPoint:
        if pt.is_vertex:
            if pt.vertex not in self._vertex_set:
                raise UnknownVertex(f"unknown vertex {pt.vertex!r}")
            return pt
        edge_id, off = self._resolve(pt.edge, pt.offset)
        e = self._edges[edge_id]
        if off == 0:
            return GraphPoint.at_vertex(e.a)
        if off == e.length:
            return GraphPoint.at_vertex(e.b)
        return GraphPoint.on_edge(edge_id, off)

    def _resolve(self, edge_id: str, off: Fraction) -> tuple[str, Fraction]:
        off = rat(off)
        if off < 0:
            raise InvalidOffset(f"negative offset {off}")
        guard = 0
        while edge_id not in self._edges:
            segs = self._alias.get(edge_id)
            if segs is None:
                raise UnknownEdge(f"unknown edge {edge_id!r}")
            placed = False
            for eid, lo, hi in segs:
                if off >= lo and (hi is INF or off <= hi):
                    edge_id, off = eid, off - lo
                    placed = True
                    break
            if not placed:
                raise InvalidOffset(f"offset {off} outside edge {edge_id!r}")
            guard += 1
            if guard > 10_000:  # pragma: no cover - malformed alias chain
                raise UnknownEdge(f"alias cycle at {edge_id!r}")
        if off > self._edges[edge_id].length:
            raise InvalidOffset(f"offset {off} exceeds edge {edge_id!r}")
        return edge_id, off

    def segments_of(self, edge_id: str) -> list[tuple[str, Fraction, Fraction]]:
        """Current segments covering a (possibly retired) edge id, as
        (current_edge_id, lo, hi) in the retired frame, ordered by lo."""
        if edge_id in self._edges:
            return [(edge_id, Fraction(0), self._edges[edge_id].length)]
        segs = self._alias.get(edge_id)
        if segs is None:
            raise UnknownEdge(f"unknown edge {edge_id!r}")
        out = []
        for eid, lo, hi in segs:
            for sub, slo, shi in self.segments_of(eid):
                out.append((sub, lo + slo, lo + shi))
        return sorted(out, key=lambda s: s[1])

    # -- subdivision ------------------------------------------------------------

    def _fresh(self, base: str, taken) -> str:
        if base not in taken:
            return base
        for i in count(2):
            cand = f"{base}.{i}"
            if cand not in taken:
                return cand

    def subdivide_at(self, pt: GraphPoint) -> tuple["MetricGraph", str]:
        """Insert a vertex at an interior point.  Metrically invisible.

        Subdividing at an existing vertex is a no-op returning that vertex.
        """
        cpt = self.canonical_point(pt)
        if cpt.is_vertex:
            import warnings

            warnings.warn("subdivide_at called on a vertex; no-op", stacklevel=2)
            return self, cpt.vertex
        e = self._edges[cpt.edge]
        taken_v = set(self._vertex_set)
        taken_e = set(self._lengths)
        mid = self._fresh(f"{e.id}@{cpt.offset}", taken_v)
        left = self._fresh(f"{e.id}.L", taken_e)
        right = self._fresh(f"{e.id}.R", taken_e | {left})
        edges = dict(self._edges)
        del edges[e.id]
        edges[left] = Edge(left, e.a, mid, cpt.offset)
        edges[right] = Edge(right, mid, e.b, e.length - cpt.offset)
        alias = dict(self._alias)
        alias[e.id] = ((left, Fraction(0), cpt.offset), (right, cpt.offset, e.length))
        g = MetricGraph(
            self._vertices + (mid,), edges, alias, self._lengths, _validated=True
        )
        return g, mid

    def subdivide_many(self, pts: Iterable[GraphPoint]) -> "MetricGraph":
        g = self
        for pt in pts:
            cpt = g.canonical_point(pt)
            if not cpt.is_vertex:
                g, _ = g.subdivide_at(cpt)
        return g

    # -- metric -------------------------------------------------------------------

    def _vertex_distances(self, source: str) -> dict[str, Fraction]:
        if source in self._dist_cache:
            return self._dist_cache[source]
        dist = {source: Fraction(0)}
        heap = [(Fraction(0), source)]
        adj = self.adjacency
        while heap:
            d, v = heapq.heappop(heap)
            if d > dist.get(v, d):
                continue
            for eid, w in adj[v]:
                nd = d + self._edges[eid].length
                if w not in dist or nd < dist[w]:
                    dist[w] = nd
                    heapq.heappush(heap, (nd, w))
        self._dist_cache[source] = dist
        return dist

    def _point_anchors(self, pt: GraphPoint) -> list[tuple[str, Fraction]]:
        """(vertex, distance-to-it) pairs anchoring a canonical point."""
        if pt.is_vertex:
            return [(pt.vertex, Fraction(0))]
        e = self._edges[pt.edge]
        return [(e.a, pt.offset), (e.b, e.length - pt.offset)]

    def distance(self, p: GraphPoint, q: GraphPoint) -> Fraction:
        cp = self.canonical_point(p)
        cq = self.canonical_point(q)
        if cp == cq:
            return Fraction(0)
        best = None
        if (not cp.is_vertex) and (not cq.is_vertex) and cp.edge == cq.edge:
            best = abs(cp.offset - cq.offset)
        for va, da in self._point_anchors(cp):
            dmap = self._vertex_distances(va)
            for vb, db in self._point_anchors(cq):
                cand = da + dmap[vb] + db
                if best is None or cand < best:
                    best = cand
        return best

    def edge_distance(self, edge_id: str, p: GraphPoint, q: GraphPoint) -> Fraction:
        """|offset(p) - offset(q)| along one edge frame (may exceed the
        graph distance when the edge lies on a short cycle)."""
        length = self.frame_length(edge_id)
        for pt in (p, q):
            if pt.is_vertex or pt.edge != edge_id:
                raise PointsNotOnEdge(f"point {pt!r} is not on edge {edge_id!r}")
            if not (0 <= pt.offset <= length):
                raise InvalidOffset(f"offset {pt.offset} outside edge {edge_id!r}")
        return abs(p.offset - q.offset)

    # -- spanning trees ---------------------------------------------------------

    def canonical_spanning_tree(self) -> list[str]:
        """Kruskal by edge id; deterministic."""
        parent = {v: v for v in self._vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        tree = []
        for eid in sorted(self._edges):
            e = self._edges[eid]
            ra, rb = find(e.a), find(e.b)
            if ra != rb:
                parent[ra] = rb
                tree.append(eid)
        return tree

    def is_spanning_tree(self, edge_ids: Sequence[str]) -> bool:
        ids = set(edge_ids)
        if len(ids) != len(self._vertices) - 1:
            return False
        parent = {v: v for v in self._vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for eid in ids:
            e = self._edges[eid]
            ra, rb = find(e.a), find(e.b)
            if ra == rb:
                return False
            parent[ra] = rb
        return True

    def spanning_tree_complement(self, edge_ids: Iterable[str]):
        """Check that removing the given g edges leaves a spanning tree.

        Returns a ComplementCheck carrying either the tree or a violation
        witness (a cycle in the remainder, or the vertex set of a component
        disconnected from the rest).
        """
        ids = []
        seen = set()
        for eid in edge_ids:
            if eid not in self._edges:
                raise UnknownEdge(f"unknown edge {eid!r}")
            if eid in seen:
                raise WrongCardinality(f"edge {eid!r} listed twice")
            seen.add(eid)
            ids.append(eid)
        g = self.betti_number()
        if len(ids) != g:
            raise WrongCardinality(f"expected {g} edges, got {len(ids)}")
        rest = [eid for eid in self._edges if eid not in seen]
        adj = {v: [] for v in self._vertices}
        for eid in rest:
            e = self._edges[eid]
            adj[e.a].append((eid, e.b))
            adj[e.b].append((eid, e.a))
        # BFS detecting a cycle or disconnection
        root = self._vertices[0]
        parent_edge = {root: None}
        order = [root]
        stack = [root]
        cycle = None
        while stack and cycle is None:
            v = stack.pop()
            for eid, w in adj[v]:
                if eid == parent_edge[v]:
                    # skip the edge we arrived by (parallel edges have
                    # distinct ids, so this is safe)
                    continue
                if w in parent_edge:
                    cycle = eid
                    break
                parent_edge[w] = eid
                order.append(w)
                stack.append(w)
        if cycle is not None:
            return ComplementCheck(False, cycle=cycle)
        if len(order) != len(self._vertices):
            missing = sorted(self._vertex_set - set(order))
            return ComplementCheck(False, disconnected=tuple(missing))
        return ComplementCheck(True, tree=tuple(sorted(rest)))

    def all_spanning_trees(self) -> Iterator[tuple[str, ...]]:
        """Complements enumerated by brute force; fine for desk-scale graphs."""
        g = self.betti_number()
        ids = sorted(self._edges)
        if g == 0:
            yield tuple(ids)
            return
        for combo in combinations(ids, g):
            rest = [eid for eid in ids if eid not in set(combo)]
            if self.is_spanning_tree(rest):
                yield tuple(rest)

    def all_complements(self) -> Iterator[tuple[str, ...]]:
        g = self.betti_number()
        ids = sorted(self._edges)
        if g == 0:
            yield ()
            return
        for combo in combinations(ids, g):
            rest = [eid for eid in ids if eid not in set(combo)]
            if self.is_spanning_tree(rest):
                yield combo

    def fundamental_cycle(self, tree: Sequence[str], comp_edge: str) -> dict[str, int]:
        """Signed edge-coefficients of the cycle closed by a complement edge.

        The cycle runs along comp_edge from a to b, then back through the
        tree.  Coefficient +1 means the cycle traverses the edge a->b.
        """
        e = self._edges[comp_edge]
        tset = set(tree)
        adj = {v: [] for v in self._vertices}
        for eid in tset:
            t = self._edges[eid]
            adj[t.a].append((eid, t.b))
            adj[t.b].append((eid, t.a))
        # BFS path b -> a in the tree
        prev = {e.b: None}
        queue = [e.b]
        while queue:
            v = queue.pop(0)
            if v == e.a:
                break
            for eid, w in adj[v]:
                if w not in prev:
                    prev[w] = (v, eid)
                    queue.append(w)
        coeffs = {comp_edge: 1}
        v = e.a
        while prev[v] is not None:
            u, eid = prev[v]
            t = self._edges[eid]
            coeffs[eid] = coeffs.get(eid, 0) + (1 if (t.a == u and t.b == v) else -1)
            v = u
        return {k: c for k, c in coeffs.items() if c != 0}


@dataclass(frozen=True)
class ComplementCheck:
    ok: bool
    tree: Optional[tuple[str, ...]] = None
    cycle: Optional[str] = None
    disconnected: Optional[tuple[str, ...]] = None

    def __bool__(self):
        return self.ok


def build_graph(vertices: Iterable[str], edges: Iterable[tuple]) -> MetricGraph:
    """Validated construction from (id, a, b, length) records.

    Loop edges are split at their midpoint; the original id stays usable
    as a point frame through the alias table.
    """
    vset = []
    seen_v = set()
    for v in vertices:
        if v in seen_v:
            raise DuplicateId(f"duplicate vertex id {v!r}")
        seen_v.add(v)
        vset.append(v)
    if not vset:
        raise DanglingEndpoint("empty vertex list")
    out: dict[str, Edge] = {}
    alias: dict[str, tuple] = {}
    lengths: dict[str, Fraction] = {}
    taken = set()
    for rec in edges:
        eid, a, b, length = rec
        length = rat(length)
        if eid in taken:
            raise DuplicateId(f"duplicate edge id {eid!r}")
        taken.add(eid)
        if length <= 0:
            raise NonpositiveLength(f"edge {eid!r} has length {length}")
        if a not in seen_v or b not in seen_v:
            raise DanglingEndpoint(f"edge {eid!r} references unknown vertex")
        if a == b:
            mid = f"{eid}.mid"
            if mid in seen_v:
                raise DuplicateId(f"vertex id {mid!r} reserved for loop split")
            seen_v.add(mid)
            vset.append(mid)
            half = length / 2
            left, right = f"{eid}.0", f"{eid}.1"
            for part in (left, right):
                if part in taken:
                    raise DuplicateId(f"edge id {part!r} reserved for loop split")
                taken.add(part)
            out[left] = Edge(left, a, mid, half)
            out[right] = Edge(right, mid, b, half)
            alias[eid] = ((left, Fraction(0), half), (right, half, length))
            lengths[eid] = length
        else:
            out[eid] = Edge(eid, a, b, length)
    return MetricGraph(vset, out, alias, lengths)


def betti_number(graph: MetricGraph) -> int:
    return graph.betti_number()


def validate_pillar_points(
    graph: MetricGraph, edge_id: str, points: Sequence[GraphPoint]
) -> bool:
    """Four interior points, strictly monotone along the edge, with equal
    first and last gaps: d(p1,p2) == d(p3,p4)."""
    if len(points) != 4:
        raise WrongCardinality("pillar validation needs exactly four points")
    length = graph.frame_length(edge_id)
    offsets = []
    for pt in points:
        if pt.is_vertex or pt.edge != edge_id:
            raise PointNotInterior(f"{pt!r} is not interior to edge {edge_id!r}")
        if not (0 < pt.offset < length):
            raise PointNotInterior(f"{pt!r} is not interior to edge {edge_id!r}")
        offsets.append(pt.offset)
    x1, x2, x3, x4 = offsets
    increasing = x1 < x2 < x3 < x4
    decreasing = x1 > x2 > x3 > x4
    if not (increasing or decreasing):
        return False
    return abs(x2 - x1) == abs(x4 - x3)


class ExtendedGraph:
    """A metric graph together with infinite leaf edges.

    The finite part is pre-subdivided so every ray attaches at a vertex.
    Contracting all rays recovers the finite part.
    """

    def __init__(self, finite: MetricGraph, rays: dict[str, Ray], _alias=None):
        self.finite = finite
        self._rays = dict(sorted(rays.items()))
        self._alias: dict[str, tuple] = dict(_alias or {})
        leafs = set()
        for r in self._rays.values():
            if r.attach not in finite.vertices:
                raise DanglingEndpoint(f"ray {r.id!r} attaches at unknown vertex")
            if r.leaf in leafs or r.leaf in finite.vertices:
                raise DuplicateId(f"infinite vertex {r.leaf!r} reused")
            leafs.add(r.leaf)

    # -- access -----------------------------------------------------------------

    @property
    def rays(self) -> Mapping[str, Ray]:
        return self._rays

    def ray(self, ray_id: str) -> Ray:
        try:
            return self._rays[ray_id]
        except KeyError:
            raise UnknownEdge(f"unknown ray {ray_id!r}") from None

    @property
    def infinite_vertices(self) -> list[str]:
        return [r.leaf for r in self._rays.values()]

    def ray_at_leaf(self, leaf: str) -> Ray:
        for r in self._rays.values():
            if r.leaf == leaf:
                return r
        raise UnknownVertex(f"no ray ends at {leaf!r}")

    def is_infinite_vertex(self, v: str) -> bool:
        return any(r.leaf == v for r in self._rays.values())

    def attach_vertices(self) -> set[str]:
        return {r.attach for r in self._rays.values()}

    def canonical_point(self, pt: GraphPoint) -> GraphPoint:
        if pt.is_vertex:
            if pt.vertex in self.finite._vertex_set or self.is_infinite_vertex(pt.vertex):
                return pt
            raise UnknownVertex(f"unknown vertex {pt.vertex!r}")
        # rays first (their ids never collide with finite edges)
        eid, off = pt.edge, rat(pt.offset)
        guard = 0
        while True:
            if eid in self._rays:
                if off == 0:
                    return GraphPoint.at_vertex(self._rays[eid].attach)
                return GraphPoint.on_edge(eid, off)
            segs = self._alias.get(eid)
            if segs is None:
                return self.finite.canonical_point(GraphPoint.on_edge(eid, off))
            placed = False
            for sub, lo, hi in segs:
                if off >= lo and (hi is INF or off <= hi):
                    eid, off = sub, off - lo
                    placed = True
                    break
            if not placed:
                raise InvalidOffset(f"offset outside edge {eid!r}")
            guard += 1
            if guard > 10_000:  # pragma: no cover
                raise UnknownEdge(f"alias cycle at {eid!r}")

    def segments_of(self, edge_id: str):
        """Current segments of a possibly retired id, finite or ray.

        Yields (kind, current_id, lo, hi) with hi None for the unbounded
        tail of a ray; kind is "edge" or "ray".
        """
        if edge_id in self._rays:
            return [("ray", edge_id, Fraction(0), INF)]
        if edge_id in self._alias:
            out = []
            for sub, lo, hi in self._alias[edge_id]:
                for kind, cid, slo, shi in self.segments_of(sub):
                    out.append(
                        (kind, cid, lo + slo, INF if shi is INF else lo + shi)
                    )
            return sorted(out, key=lambda s: s[2])
        return [
            ("edge", cid, lo, hi) for cid, lo, hi in self.finite.segments_of(edge_id)
        ]

    # -- refinement ----------------------------------------------------------------

    def subdivide_at(self, pt: GraphPoint) -> tuple["ExtendedGraph", str]:
        cpt = self.canonical_point(pt)
        if cpt.is_vertex:
            return self, cpt.vertex
        if cpt.edge in self._rays:
            r = self._rays[cpt.edge]
            finite = self.finite
            taken_v = set(finite.vertices) | {x.leaf for x in self._rays.values()}
            taken_e = set(finite._lengths) | set(self._rays) | set(self._alias)
            mid = finite._fresh(f"{r.id}@{cpt.offset}", taken_v)
            stub = finite._fresh(f"{r.id}.stub", taken_e)
            tail = finite._fresh(f"{r.id}.tail", taken_e | {stub})
            new_finite = MetricGraph(
                finite.vertices + (mid,),
                {**finite._edges, stub: Edge(stub, r.attach, mid, cpt.offset)},
                finite._alias,
                finite._lengths,
                _validated=True,
            )
            rays = dict(self._rays)
            del rays[r.id]
            rays[tail] = Ray(tail, mid, r.leaf)
            alias = dict(self._alias)
            alias[r.id] = ((stub, Fraction(0), cpt.offset), (tail, cpt.offset, INF))
            return ExtendedGraph(new_finite, rays, alias), mid
        new_finite, mid = self.finite.subdivide_at(cpt)
        return ExtendedGraph(new_finite, self._rays, self._alias), mid

    def with_new_rays(
        self, attach_points: Sequence[tuple[str, GraphPoint]]
    ) -> "ExtendedGraph":
        """Attach new infinite edges at the given points, subdividing as
        needed.  Ray ids must be fresh; leaves are derived as `<id>.inf`."""
        g = self
        for ray_id, pt in attach_points:
            if ray_id in g._rays or ray_id in g._alias:
                raise DuplicateId(f"ray id {ray_id!r} already in use")
            g, v = g.subdivide_at(pt)
            rays = dict(g._rays)
            rays[ray_id] = Ray(ray_id, v, f"{ray_id}.inf")
            g = ExtendedGraph(g.finite, rays, g._alias)
        return g


def build_extended(
    finite: MetricGraph, infinite_edges: Iterable[tuple[str, GraphPoint]]
) -> ExtendedGraph:
    g = ExtendedGraph(finite, {})
    return g.with_new_rays(list(infinite_edges))
