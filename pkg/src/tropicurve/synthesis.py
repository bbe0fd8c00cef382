"""Constructive refinement of embeddings.

Two pipelines.  The first makes an arbitrary embedding fully faithful: a
bootstrap stage synthesizes coordinates that map the 2-edge-connected core
injectively with unit stretching, then every remaining finite edge gets a
slope-one ramp coordinate and every bare ray a divergent one, each ramp
corrected by pillar trapezoids on a spanning-tree complement.  The second
pipeline repairs singular image vertices: a vertex with adjacent edges
e0..en receives n tent coordinates with slopes +1 into ek and -1 into e0,
which project a neighborhood of the image vertex onto the coordinate-axes
fan and make it smooth.  Both pipelines re-run their exact certificate at
the end and refuse to return uncertified output.

All offsets allocated here are tracked in "root frames": the edge and ray
ids present when a pipeline starts, plus rays it attaches later.  Root
frames survive subdivision (alias tables translate), so bookkeeping stays
consistent while the skeleton is refined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .complexes import check_smooth
from .divisors import (
    Divisor,
    EdgeProfile,
    PLFunction,
    RayProfile,
    construct_pl_with_divisor,
    cor34_certificate,
    divisor_of,
    is_principal,
    make_divisor,
    trapezoid,
)
from .errors import (
    CertificateFailure,
    EqualEdges,
    MonotonicityViolation,
    NoRoom,
    NotSeparated,
    PillarFailure,
    PillarSearchExhausted,
    Stage0Failure,
    UnknownEdge,
)
from .graphs import ExtendedGraph, GraphPoint, MetricGraph
from .linalg import integer_points_in_box, primitive
from .tropicalize import (
    Embedding,
    extend_embedding,
    is_fully_faithful,
    refine_embedding,
    tropicalize,
)

V = GraphPoint.at_vertex
P = GraphPoint.on_edge


@dataclass
class Budgets:
    pillar_tries: int = 24
    stage0_patches: int = 48
    repair_rounds: int = 16


# -- core designation -------------------------------------------------------------


def designate_core(fin: MetricGraph) -> tuple[frozenset[str], frozenset[str]]:
    """Edges and vertices of the leaf-pruned core of the finite part.

    Iteratively strips valence-one vertices; what remains carries all the
    cycles plus the bridges between them.  A tree prunes down to its
    lexicographically least surviving vertex.
    """
    edges = set(fin.edges)
    valence = {v: 0 for v in fin.vertices}
    for e in fin.edges.values():
        valence[e.a] += 1
        valence[e.b] += 1
    alive = set(fin.vertices)
    while True:
        leaves = sorted(v for v in alive if valence[v] <= 1)
        if not leaves:
            break
        v = leaves[0]
        alive.discard(v)
        for eid in sorted(edges):
            e = fin.edges[eid]
            if v in (e.a, e.b):
                edges.discard(eid)
                valence[e.a] -= 1
                valence[e.b] -= 1
        if not alive:
            break
    if not alive:
        alive = {sorted(fin.vertices)[0]}
    return frozenset(edges), frozenset(alive)


# -- root-frame bookkeeping ----------------------------------------------------------


class Frames:
    """Offset allocation in stable root frames.

    Roots are edge/ray ids fixed at pipeline start (descendants created by
    subdivision are located back into them).  Blocked points mark future
    ray attachments; blocked intervals reserve pillar supports so no later
    subdivision lands inside them.
    """

    def __init__(self, skel: ExtendedGraph):
        self.roots: list[str] = sorted(skel.finite.edges) + sorted(skel.rays)
        self.points: dict[str, set[Fraction]] = {}
        self.intervals: dict[str, list[tuple[Fraction, Fraction]]] = {}

    def add_root(self, root: str):
        self.roots.append(root)

    def locate(self, skel: ExtendedGraph, cid: str) -> tuple[str, Fraction]:
        """Root frame and offset shift of a current edge or ray id."""
        for root in self.roots:
            for _kind, sub, lo, _hi in skel.segments_of(root):
                if sub == cid:
                    return root, lo
        raise UnknownEdge(f"{cid!r} not found under any root frame")

    def root_range(self, skel: ExtendedGraph, cid: str):
        root, lo = self.locate(skel, cid)
        for kind, sub, slo, shi in skel.segments_of(root):
            if sub == cid:
                return root, slo, shi
        raise UnknownEdge(cid)

    def block_point(self, root: str, off: Fraction):
        self.points.setdefault(root, set()).add(off)

    def block_interval(self, root: str, lo: Fraction, hi: Fraction):
        self.intervals.setdefault(root, []).append((lo, hi))

    def clear_point(self, root: str, off: Fraction) -> bool:
        if off in self.points.get(root, ()):
            return False
        return all(
            not (lo <= off <= hi) for lo, hi in self.intervals.get(root, ())
        )

    def fresh_point(self, root: str, lo: Fraction, hi: Fraction) -> Fraction:
        """Deterministic fresh offset strictly inside (lo, hi); blocks it."""
        span = hi - lo
        k = 1
        while k < 2**16:
            for num in range(1, 2 * k, 2):
                off = lo + span * Fraction(num, 2 * k)
                if self.clear_point(root, off):
                    self.block_point(root, off)
                    return off
            k *= 2
        raise NoRoom(f"no free offset on {root!r} in ({lo}, {hi})")

    def windows(self, root: str, lo: Fraction, hi: Fraction):
        """Maximal open subintervals of (lo, hi) avoiding blocked intervals
        and blocked points."""
        marks = [
            (max(lo, a), min(hi, b))
            for a, b in self.intervals.get(root, ())
            if max(lo, a) < min(hi, b)
        ]
        for off in self.points.get(root, ()):
            if lo < off < hi:
                marks.append((off, off))
        marks.sort()
        out = []
        cur = lo
        for a, b in marks:
            if a > cur:
                out.append((cur, a))
            cur = max(cur, b)
        if cur < hi:
            out.append((cur, hi))
        return [(a, b) for a, b in out if a < b]


# -- pillar selection ------------------------------------------------------------------


@dataclass(frozen=True)
class PillarTarget:
    target_id: str
    avoid_image_of: Optional[str] = None  # frame id; images must stay disjoint
    forbidden: tuple[tuple[str, Fraction, Fraction], ...] = ()  # root-frame zones


@dataclass
class PillarSet:
    target_id: str
    complement: tuple[str, ...]  # current edge ids
    tuples: list[tuple[GraphPoint, ...]]  # four root-frame points per edge

    def correction_divisor(self, graph) -> Divisor:
        terms = []
        for p1, p2, p3, p4 in self.tuples:
            terms += [(p1, 1), (p2, -1), (p3, -1), (p4, 1)]
        return make_divisor(graph, terms)


@dataclass
class PillarConfig:
    sets: dict[str, PillarSet]


def _interval_image(emb: Embedding, frame: str, lo: Fraction, hi: Optional[Fraction]):
    """Image of a frame sub-interval as parametric segments
    (start values, slope vector, source length or None for rays)."""
    out = []
    for kind, cid, slo, shi in emb.skeleton.segments_of(frame):
        if kind == "ray":
            a = max(lo, slo)
            b = hi
            if b is not None and b <= a:
                continue
            start = tuple(f.ray_profiles[cid].value_at(a - slo) for f in emb.coords)
            slopes = tuple(f.ray_profiles[cid].slope for f in emb.coords)
            out.append((start, slopes, None if b is None else b - a))
            continue
        b = shi if hi is None else min(hi, shi)
        a = max(lo, slo)
        if a >= b:
            continue
        cuts = {a - slo, b - slo}
        for f in emb.coords:
            for brk in f.edge_profiles[cid].breaks:
                if a - slo < brk < b - slo:
                    cuts.add(brk)
        xs = sorted(cuts)
        for x1, x2 in zip(xs, xs[1:]):
            start = tuple(f.edge_profiles[cid].value_at(x1) for f in emb.coords)
            slopes = tuple(f.edge_profiles[cid].slope_at(x1, +1) for f in emb.coords)
            out.append((start, slopes, x2 - x1))
    return out


def _point_on_segment(x, seg) -> bool:
    p, u, length = seg
    if not any(u):
        return x == p
    k = next(i for i in range(len(u)) if u[i])
    t = Fraction(x[k] - p[k], u[k])
    if t < 0 or (length is not None and t > length):
        return False
    return all(pi + t * ui == xi for pi, ui, xi in zip(p, u, x))


def _intervals_meet(a, b) -> bool:
    lo1, hi1 = a
    lo2, hi2 = b
    lo = lo1 if lo2 is None else (lo2 if lo1 is None else max(lo1, lo2))
    hi = hi1 if hi2 is None else (hi2 if hi1 is None else min(hi1, hi2))
    if lo is None or hi is None:
        return True
    return lo <= hi


def _segments_meet(seg1, seg2) -> bool:
    """Exact intersection test for parametric segments, rays, and points."""
    (p, u, lp), (q, w, lq) = seg1, seg2
    n = len(p)
    if not any(u):
        return _point_on_segment(p, seg2)
    if not any(w):
        return _point_on_segment(q, seg1)
    parallel = all(
        u[i] * w[j] == u[j] * w[i] for i in range(n) for j in range(i + 1, n)
    )
    if parallel:
        k = next(i for i in range(n) if u[i])
        t0 = Fraction(q[k] - p[k], u[k])
        if tuple(pi + t0 * ui for pi, ui in zip(p, u)) != q:
            return False
        rho = Fraction(w[k], u[k])
        if lq is None:
            other = (t0, None) if rho > 0 else (None, t0)
        else:
            end = t0 + lq * rho
            other = (t0, end) if rho > 0 else (end, t0)
        return _intervals_meet((Fraction(0), lp), other)
    pivot = None
    for i in range(n):
        for j in range(i + 1, n):
            det = -u[i] * w[j] + u[j] * w[i]
            if det != 0:
                pivot = (i, j, det)
                break
        if pivot:
            break
    i, j, det = pivot
    bi, bj = q[i] - p[i], q[j] - p[j]
    t = Fraction(-bi * w[j] + bj * w[i], det)
    s = Fraction(u[i] * bj - u[j] * bi, det)
    for k in range(n):
        if p[k] + t * u[k] != q[k] + s * w[k]:
            return False
    if t < 0 or (lp is not None and t > lp):
        return False
    return 0 <= s and (lq is None or s <= lq)


def _images_disjoint(emb: Embedding, a, b) -> bool:
    for sa in _interval_image(emb, *a):
        for sb in _interval_image(emb, *b):
            if _segments_meet(sa, sb):
                return False
    return True


def select_pillars(
    emb: Embedding,
    targets: Sequence[PillarTarget],
    frames: Optional[Frames] = None,
    budgets: Budgets = None,
) -> PillarConfig:
    """Deterministic pillar placement: a valid four-point tuple on every
    spanning-tree complement edge, with supports pairwise disjoint across
    all targets, outside each target's forbidden zones, and (when asked)
    with image disjoint from the image of the target's own edge.  Windows
    shrink geometrically before the search gives up."""
    budgets = budgets or Budgets()
    frames = frames or Frames(emb.skeleton)
    fin = emb.skeleton.finite
    g = fin.betti_number()
    tree = set(fin.canonical_spanning_tree())
    complement = tuple(eid for eid in sorted(fin.edges) if eid not in tree)
    sets: dict[str, PillarSet] = {}
    for tgt in targets:
        if g == 0:
            sets[tgt.target_id] = PillarSet(tgt.target_id, (), [])
            continue
        tuples = []
        for cid in complement:
            root, slo, shi = frames.root_range(emb.skeleton, cid)
            windows = []
            for wlo, whi in frames.windows(root, slo, shi):
                ok = True
                for froot, flo, fhi in tgt.forbidden:
                    if froot == root and max(wlo, flo) < min(whi, fhi):
                        # clip the window against the forbidden zone
                        if flo > wlo:
                            windows.append((wlo, flo))
                        if fhi < whi:
                            windows.append((fhi, whi))
                        ok = False
                        break
                if ok:
                    windows.append((wlo, whi))
            placed = False
            tries = 0
            for wlo, whi in sorted(windows):
                width = whi - wlo
                while tries < budgets.pillar_tries and width > 0:
                    tries += 1
                    offs = [wlo + width * Fraction(k, 8) for k in (1, 2, 5, 6)]
                    if all(frames.clear_point(root, o) for o in offs):
                        ok = True
                        if tgt.avoid_image_of is not None and emb.coords:
                            ok = _images_disjoint(
                                emb,
                                (root, offs[0], offs[3]),
                                (tgt.avoid_image_of, Fraction(0), None),
                            )
                        if ok:
                            frames.block_interval(root, offs[0], offs[3])
                            tuples.append(tuple(P(root, o) for o in offs))
                            placed = True
                            break
                    width = width / 2
                if placed:
                    break
            if not placed:
                raise PillarSearchExhausted(
                    f"target {tgt.target_id!r}: no pillar window on {cid!r} "
                    f"(root {root!r}, forbidden {tgt.forbidden})"
                )
        sets[tgt.target_id] = PillarSet(tgt.target_id, complement, tuples)
    return PillarConfig(sets)


def _apply_pillars(emb: Embedding, base: PLFunction, pset: Optional[PillarSet]) -> PLFunction:
    if pset is None:
        return base
    f = base
    for pts in pset.tuples:
        cp = [emb.skeleton.canonical_point(p) for p in pts]
        if any(c.is_vertex for c in cp) or len({c.edge for c in cp}) != 1:
            raise PillarFailure(f"pillar tuple {pts} no longer fits one edge")
        f = f + trapezoid(emb.skeleton, cp[0].edge, sorted(c.offset for c in cp))
    return f


# -- explicit PL building blocks ------------------------------------------------------


def _lift_to_skeleton(skel: ExtendedGraph, f_fin: PLFunction) -> PLFunction:
    """Extend a function on the finite part by constants along all rays."""
    rays = {
        rid: RayProfile(f_fin.vertex_value(r.attach), 0)
        for rid, r in skel.rays.items()
    }
    return PLFunction(skel, f_fin.edge_profiles, rays)


def _vertex_path(fin: MetricGraph, va: str, vb: str) -> list[tuple[str, str]]:
    """Deterministic shortest path as (edge_id, from_vertex) steps."""
    import heapq

    dist: dict[str, tuple] = {va: (Fraction(0), ())}
    heap = [(Fraction(0), (), va)]
    prev: dict[str, tuple[str, str]] = {}
    seen = set()
    while heap:
        d, tiebreak, v = heapq.heappop(heap)
        if v in seen:
            continue
        seen.add(v)
        if v == vb:
            break
        for eid, w in sorted(fin.adjacency[v]):
            nd = d + fin.edges[eid].length
            cand = (nd, tiebreak + (eid,))
            if w not in dist or cand < dist[w]:
                dist[w] = cand
                prev[w] = (v, eid)
                heapq.heappush(heap, (nd, cand[1], w))
    if va != vb and vb not in prev:
        raise NotSeparated(f"no path between {va!r} and {vb!r}")
    steps = []
    v = vb
    while v != va:
        u, eid = prev[v]
        steps.append((eid, u))
        v = u
    return list(reversed(steps))


def slope_one_ramp(
    skel: ExtendedGraph,
    va: str,
    vb: str,
    end_ray: Optional[str] = None,
    start_ray: Optional[str] = None,
) -> PLFunction:
    """Rise with slope one from vertex va to vertex vb, constant on
    everything hanging off the path.  With `end_ray` the rise continues
    along that ray at vb toward +inf (a pole shadow at its leaf); with
    `start_ray` the function descends along that ray at va toward -inf
    (a zero shadow at its leaf).

    Every component of the complement of the open path must meet the path
    in a single point; otherwise the constant extension is inconsistent
    and NotSeparated is raised.
    """
    fin = skel.finite
    steps = _vertex_path(fin, va, vb) if va != vb else []
    walk: dict[str, int] = {}
    vals: dict[str, Fraction] = {va: Fraction(0)}
    acc = Fraction(0)
    for eid, u in steps:
        e = fin.edges[eid]
        walk[eid] = 1 if e.a == u else -1
        acc += e.length
        vals[e.other(u)] = acc
    queue = sorted(vals)
    while queue:
        v = queue.pop(0)
        for eid, w in fin.adjacency[v]:
            if eid in walk:
                continue
            if w in vals:
                if vals[w] != vals[v]:
                    raise NotSeparated(
                        f"path {va!r}->{vb!r} runs through a cycle (edge {eid!r})"
                    )
                continue
            vals[w] = vals[v]
            queue.append(w)
    profiles = {
        eid: EdgeProfile(vals[e.a], (), (walk.get(eid, 0),))
        for eid, e in fin.edges.items()
    }
    rays = {}
    for rid, r in skel.rays.items():
        slope = 0
        if rid == end_ray:
            if r.attach != vb:
                raise UnknownEdge(f"ray {end_ray!r} does not attach at {vb!r}")
            slope = 1
        elif rid == start_ray:
            if r.attach != va:
                raise UnknownEdge(f"ray {start_ray!r} does not attach at {va!r}")
            slope = -1
        rays[rid] = RayProfile(vals[r.attach], slope)
    for want in (end_ray, start_ray):
        if want is not None and want not in rays:
            raise UnknownEdge(f"unknown ray {want!r}")
    return PLFunction(skel, profiles, rays)


# -- anchors -----------------------------------------------------------------------------


def _side_components(fin: MetricGraph, removed: set[str]) -> dict[str, int]:
    label: dict[str, int] = {}
    cur = 0
    for v in fin.vertices:
        if v in label:
            continue
        label[v] = cur
        stack = [v]
        while stack:
            x = stack.pop()
            for eid, w in fin.adjacency[x]:
                if eid in removed or w in label:
                    continue
                label[w] = cur
                stack.append(w)
        cur += 1
    return label


def _current_pieces(skel: ExtendedGraph, frame: str) -> set[str]:
    return {cid for kind, cid, _lo, _hi in skel.segments_of(frame) if kind == "edge"}


def _fresh_vertex_on(
    emb: Embedding, frames: Frames, cid: str, near_vertex: str
) -> tuple[Embedding, str]:
    """Subdivide a fresh interior point close to `near_vertex` on a finite
    edge and return it as a vertex (safe for ray attachment: subdividing a
    finite edge does not create a ray endpoint)."""
    skel = emb.skeleton
    root, slo, shi = frames.root_range(skel, cid)
    e = skel.finite.edges[cid]
    if e.a == near_vertex:
        lo, hi = slo, slo + (shi - slo) / 4
    else:
        lo, hi = shi - (shi - slo) / 4, shi
    off = frames.fresh_point(root, lo, hi)
    emb2 = refine_embedding(emb, [P(root, off)])
    return emb2, emb2.skeleton.canonical_point(P(root, off)).vertex


def _anchor_near(
    emb: Embedding,
    v: str,
    avoid_pieces: set[str],
    core_edges_current: set[str],
    frames: Frames,
) -> tuple[Embedding, str, Optional[str]]:
    """Zero-charge location serving v.

    Returns (embedding, anchor vertex, descend_ray): when v carries no ray
    yet the charge sits at v itself; otherwise it moves to a fresh interior
    vertex of a bridge edge at v, or rides down an existing ray at v (the
    zero shadow then sits at that ray's leaf)."""
    skel = emb.skeleton
    if v not in skel.attach_vertices():
        return emb, v, None
    fin = skel.finite
    for eid, _w in sorted(fin.adjacency[v]):
        if eid in avoid_pieces or eid in core_edges_current:
            continue
        emb2, va = _fresh_vertex_on(emb, frames, eid, v)
        return emb2, va, None
    for rid in sorted(skel.rays):
        if skel.rays[rid].attach == v:
            return emb, v, rid
    raise NoRoom(f"no anchor location available near {v!r}")


# -- edge functions ------------------------------------------------------------------------


@dataclass
class EdgeFunctionResult:
    embedding: Embedding
    function: PLFunction
    zero_point: GraphPoint
    pole_point: Optional[GraphPoint]  # None when the pole is an infinite vertex


def _core_current(skel: ExtendedGraph, core_edges: frozenset[str]) -> set[str]:
    out = set()
    for root in core_edges:
        out |= _current_pieces(skel, root)
    return out


def edge_function_finite(
    emb: Embedding,
    frame: str,
    pillars: Optional[PillarSet],
    core_edges: frozenset[str],
    core_vertices: frozenset[str],
    frames: Optional[Frames] = None,
) -> EdgeFunctionResult:
    """Slope-one ramp along a finite non-core edge plus pillar trapezoids.

    The zero charge sits at the core-side endpoint v (or a fresh point near
    it when v already carries a ray); the pole charge sits at the far
    endpoint or a fresh point beyond it.  The function value is zero at v.
    """
    frames = frames or Frames(emb.skeleton)
    skel = emb.skeleton
    fin = skel.finite
    pieces = _current_pieces(skel, frame)
    core_cur = _core_current(skel, core_edges)
    if pieces & core_cur:
        raise NotSeparated(f"edge {frame!r} belongs to the designated core")
    segs = skel.segments_of(frame)
    if segs[-1][3] is None:
        raise UnknownEdge(f"{frame!r} ends in a ray; use edge_function_infinite")
    comp = _side_components(fin, pieces)
    u1 = skel.canonical_point(P(frame, segs[0][2])).vertex
    u2 = skel.canonical_point(P(frame, segs[-1][3])).vertex
    if comp[u1] == comp[u2]:
        raise NotSeparated(f"edge {frame!r} lies on a cycle")
    core_rep = sorted(core_vertices)[0]
    v, w = (u1, u2) if comp[u1] == comp[core_rep] else (u2, u1)

    emb, va, descend_ray = _anchor_near(emb, v, pieces, core_cur, frames)
    skel = emb.skeleton
    fin = skel.finite
    pieces = _current_pieces(skel, frame)
    comp = _side_components(fin, pieces)
    beyond_edges = [
        eid
        for eid, x in sorted(fin.adjacency[w])
        if eid not in pieces and comp[x] == comp[w]
    ]
    beyond_rays = [rid for rid in sorted(skel.rays) if skel.rays[rid].attach == w]
    end_ray = None
    if beyond_edges:
        emb, vb = _fresh_vertex_on(emb, frames, beyond_edges[0], w)
    elif beyond_rays:
        vb, end_ray = w, beyond_rays[0]
    else:
        vb = w  # bare leaf: w carries no ray yet, so the charge may sit here
    skel = emb.skeleton
    ramp = slope_one_ramp(skel, va, vb, end_ray=end_ray, start_ray=descend_ray)
    ramp = ramp.add_constant(-ramp.vertex_value(v))
    f = _apply_pillars(emb, ramp, pillars)
    if pillars is not None and pillars.complement and descend_ray is None and end_ray is None:
        _assert_cor34_shape(skel, f, va, vb, pillars)
    zero = V(skel.rays[descend_ray].leaf) if descend_ray else V(va)
    pole = V(skel.rays[end_ray].leaf) if end_ray else V(vb)
    return EdgeFunctionResult(emb, f, zero, pole)


def edge_function_infinite(
    emb: Embedding,
    frame: str,
    pillars: Optional[PillarSet],
    core_edges: frozenset[str],
    core_vertices: frozenset[str],
    frames: Optional[Frames] = None,
) -> EdgeFunctionResult:
    """Slope-one ramp diverging along an existing ray; the pole is the
    ray's own infinite vertex, the zero charge sits near the attach point."""
    frames = frames or Frames(emb.skeleton)
    skel = emb.skeleton
    segs = skel.segments_of(frame)
    stub_pieces = {cid for kind, cid, _lo, _hi in segs if kind == "edge"}
    core_cur = _core_current(skel, core_edges)
    v = skel.canonical_point(P(frame, segs[0][2])).vertex
    emb, va, descend_ray = _anchor_near(emb, v, stub_pieces, core_cur, frames)
    skel = emb.skeleton
    ray_id = next(
        cid for kind, cid, _lo, _hi in skel.segments_of(frame) if kind == "ray"
    )
    attach = skel.rays[ray_id].attach
    if descend_ray == ray_id:
        # the only ray at v is the target itself: move the zero charge to a
        # fresh core point and cancel the cycle obstruction exactly
        core_list = sorted(_core_current(skel, core_edges))
        if not core_list:
            raise NotSeparated(f"no anchor available for ray {frame!r}")
        root, slo, shi = frames.root_range(skel, core_list[0])
        ca = skel.canonical_point(P(root, frames.fresh_point(root, slo, shi)))
        base = make_divisor(skel.finite, [(ca, 1), (V(attach), -1)])
        d = _aj_corrections(emb, frames, base)
        res = is_principal(skel.finite, d)
        assert res.principal, "corrected ray-anchor divisor must be principal"
        f_fin = res.witness
        f_fin = f_fin.add_constant(-f_fin.vertex_value(attach))
        f = _with_ray_slopes(skel, f_fin, {ray_id: 1})
        f = _apply_pillars(emb, f, pillars)
        return EdgeFunctionResult(emb, f, ca, None)
    ramp = slope_one_ramp(skel, va, attach, end_ray=ray_id, start_ray=descend_ray)
    ramp = ramp.add_constant(-ramp.vertex_value(v))
    f = _apply_pillars(emb, ramp, pillars)
    zero = V(skel.rays[descend_ray].leaf) if descend_ray else V(va)
    return EdgeFunctionResult(emb, f, zero, None)


def _assert_cor34_shape(skel, f, va, vb, pillars: PillarSet):
    """The assembled divisor must agree with the certified witness route."""
    fin = skel.finite
    base = make_divisor(fin, [(V(va), 1), (V(vb), -1)])
    expected = base + pillars.correction_divisor(skel)
    got = divisor_of(f)
    assert got == expected, f"edge function divisor mismatch: {got} != {expected}"
    ref = cor34_certificate(
        fin, base, list(pillars.complement), [list(t) for t in pillars.tuples]
    )
    assert divisor_of(ref) == make_divisor(fin, expected.terms)


# -- vertex functions ------------------------------------------------------------------


@dataclass
class VertexFunctionResult:
    embedding: Embedding
    function: PLFunction
    tent_points: tuple[GraphPoint, ...]


def _side_frame(skel: ExtendedGraph, frames: Frames, v: str, side_id: str):
    """(root, v_offset, direction, room) for walking away from v along a
    current incident edge or ray; direction is +1 when distance from v
    increases with the root offset."""
    if side_id in skel.rays:
        if skel.rays[side_id].attach != v:
            raise UnknownEdge(f"ray {side_id!r} is not attached at {v!r}")
        root, slo, _shi = frames.root_range(skel, side_id)
        return root, slo, +1, Fraction(1)
    e = skel.finite.edges[side_id]
    root, slo, shi = frames.root_range(skel, side_id)
    if e.a == v:
        return root, slo, +1, (shi - slo) / 2
    if e.b == v:
        return root, shi, -1, (shi - slo) / 2
    raise UnknownEdge(f"edge {side_id!r} is not incident to {v!r}")


def _one_sided_tent(
    skel: ExtendedGraph,
    root: str,
    v_off: Fraction,
    direction: int,
    r: Fraction,
    p: Fraction,
    sign: int,
) -> PLFunction:
    """Bump along one side of a vertex: slope `sign` out to distance r,
    plateau of width p, return to zero; zero elsewhere on the skeleton."""
    d_breaks = (r, r + p, 2 * r + p)

    def g_slope(d: Fraction) -> int:
        if d < 0:
            return 0
        if d < d_breaks[0]:
            return sign
        if d < d_breaks[1]:
            return 0
        if d < d_breaks[2]:
            return -sign
        return 0

    def g_value(d: Fraction) -> Fraction:
        if d <= 0:
            return Fraction(0)
        val = Fraction(0)
        marks = [Fraction(0), *d_breaks]
        slopes = [sign, 0, -sign]
        for (m1, m2), s in zip(zip(marks, marks[1:]), slopes):
            if d <= m2:
                return val + s * (d - m1)
            val += s * (m2 - m1)
        return val

    profiles = {
        eid: EdgeProfile(Fraction(0), (), (0,)) for eid in skel.finite.edges
    }
    rays = {rid: RayProfile(Fraction(0), 0) for rid in skel.rays}
    for kind, cid, lo, hi in skel.segments_of(root):
        def dist(x: Fraction) -> Fraction:
            return (x - v_off) * direction

        if kind == "ray":
            assert dist(lo) >= d_breaks[2] or dist(lo) < 0, (
                "tent support spills into an unbounded ray"
            )
            continue
        length = hi - lo
        increasing = direction > 0
        inner = []
        for db in d_breaks:
            x = v_off + direction * db
            if lo < x < hi:
                inner.append(x - lo)
        inner.sort()
        cuts = [Fraction(0)] + inner + [length]
        slopes = []
        for t1, t2 in zip(cuts, cuts[1:]):
            xm = lo + (t1 + t2) / 2
            s = g_slope(dist(xm))
            slopes.append(s if increasing else -s)
        profiles[cid] = EdgeProfile(g_value(dist(lo)), tuple(inner), tuple(slopes))
    return PLFunction(skel, profiles, rays, _validated=True)


def vertex_function(
    emb: Embedding,
    v: str,
    side_neg: str,
    side_pos: str,
    pillars: Optional[PillarSet] = None,
    frames: Optional[Frames] = None,
) -> VertexFunctionResult:
    """Tent coordinate at v: slope +1 into side_pos, -1 into side_neg, zero
    on all other sides, support inside the two sides, simple divisor of six
    points (three per side), value zero at v.

    Rays on either side are subdivided so the support stays finite; the
    support auto-shrinks around blocked offsets and raises NoRoom when no
    placement fits.
    """
    if side_neg == side_pos:
        raise EqualEdges(f"tent needs two distinct sides at {v!r}")
    frames = frames or Frames(emb.skeleton)
    skel = emb.skeleton
    sides = [
        _side_frame(skel, frames, v, side_neg),
        _side_frame(skel, frames, v, side_pos),
    ]
    room = min(s[3] for s in sides)
    r = room / 4
    p = room / 4
    pts: list[tuple[str, Fraction]] = []
    for _try in range(40):
        pts = []
        ok = True
        for root, v_off, direction, _room in sides:
            for db in (r, r + p, 2 * r + p):
                x = v_off + direction * db
                pts.append((root, x))
                if not frames.clear_point(root, x):
                    ok = False
        if ok:
            break
        r = r * Fraction(15, 16)
        p = p * Fraction(13, 16)
    else:
        raise NoRoom(f"could not place a tent at {v!r}")
    for root, x in pts:
        frames.block_point(root, x)
    refit = [
        P(root, x)
        for root, x in pts
        if not emb.skeleton.canonical_point(P(root, x)).is_vertex
        and emb.skeleton.canonical_point(P(root, x)).edge in emb.skeleton.rays
    ]
    if refit:
        emb = refine_embedding(emb, refit)
    skel = emb.skeleton
    neg = _one_sided_tent(skel, sides[0][0], sides[0][1], sides[0][2], r, p, -1)
    pos = _one_sided_tent(skel, sides[1][0], sides[1][1], sides[1][2], r, p, +1)
    tent = neg + pos
    d = divisor_of(tent)
    assert all(abs(c) == 1 for _pt, c in d.terms), "tent divisor must be simple"
    assert d.coeff(V(v)) == 0, "tent must be harmonic at its vertex"
    assert len(d.terms) == 6
    f = _apply_pillars(emb, tent, pillars)
    tent_points = tuple(skel.canonical_point(P(root, x)) for root, x in pts)
    return VertexFunctionResult(emb, f, tent_points)


# -- stage 0: bootstrap coordinates for the core ------------------------------------------


def _kruskal_with_priority(fin: MetricGraph, first: Sequence[str]) -> list[str]:
    order = list(first) + [eid for eid in sorted(fin.edges) if eid not in set(first)]
    parent = {v: v for v in fin.vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree = []
    for eid in order:
        e = fin.edges[eid]
        ra, rb = find(e.a), find(e.b)
        if ra != rb:
            parent[ra] = rb
            tree.append(eid)
    return tree


def _aj_corrected_divisor(
    emb: Embedding, frames: Frames, root_e: str, budgets: Budgets
) -> Divisor:
    """Degree-zero divisor (a - b) + correction pairs, principal by
    construction: a, b are fresh points near the two ends of root_e, and
    the correction pairs on a spanning-tree complement cancel the cycle
    obstruction of a - b exactly."""
    skel = emb.skeleton
    segs = skel.segments_of(root_e)
    lo0, hi0 = segs[0][2], segs[-1][3]
    a_off = frames.fresh_point(root_e, lo0, lo0 + (hi0 - lo0) / 4)
    b_off = frames.fresh_point(root_e, hi0 - (hi0 - lo0) / 4, hi0)
    ca = skel.canonical_point(P(root_e, a_off))
    cb = skel.canonical_point(P(root_e, b_off))
    base = make_divisor(skel.finite, [(ca, 1), (cb, -1)])
    return _aj_corrections(emb, frames, base, keep_in_tree=root_e)


def _aj_corrections(
    emb: Embedding, frames: Frames, base: Divisor, keep_in_tree: Optional[str] = None
) -> Divisor:
    """Append +-1 correction pairs on a spanning-tree complement so that
    the result is principal; the tree preferentially contains the pieces
    of `keep_in_tree` so no correction lands on that frame."""
    from .breakdiv import _cycle_pairing, _integer_chain

    skel = emb.skeleton
    fin = skel.finite
    interior = [pt for pt in base.support() if not pt.is_vertex]
    model = fin.subdivide_many(interior)
    dm = make_divisor(model, base.terms)
    priority = []
    if keep_in_tree is not None:
        priority = sorted(cid for cid, _lo, _hi in model.segments_of(keep_in_tree))
    tree = _kruskal_with_priority(model, priority)
    comp = [eid for eid in sorted(model.edges) if eid not in set(tree)]
    g = len(comp)
    if g == 0:
        return base
    cycles = [model.fundamental_cycle(tree, c) for c in comp]
    sigma = _integer_chain(model, dm)
    w = [_cycle_pairing(model, sigma, cyc) for cyc in cycles]
    gram = [
        [
            sum(
                model.edges[eid].length * ci * cycles[j].get(eid, 0)
                for eid, ci in cycles[i].items()
            )
            for j in range(g)
        ]
        for i in range(g)
    ]
    columns = [[gram[i][j] for i in range(g)] for j in range(g)]
    # Allocation sites for cycle j: every current edge lying on cycle j and
    # on no other cycle (always includes the complement edge itself), with
    # the cycle's coefficient there.  Pairs on such edges contribute to the
    # j-th coordinate only, keeping the solve decoupled.  A pair needs only
    # its two endpoints fresh (its span may straddle other charges), so a
    # site of span S absorbs nearly S per pair, any number of pairs deep.
    sites: list[list[tuple[str, Fraction, Fraction, int]]] = []
    spans = []
    for j in range(g):
        own = []
        for eid in sorted(model.edges):
            cj = cycles[j].get(eid, 0)
            if cj == 0:
                continue
            if any(cycles[i].get(eid, 0) for i in range(g) if i != j):
                continue
            root, slo, shi = _model_root_range(emb.skeleton, frames, model, eid)
            own.append((root, slo, shi, cj))
        sites.append(own)
        spans.append(max((shi - slo for _r, slo, shi, _c in own), default=Fraction(0)))
    best = None
    for widen in (1, 2, 4):
        lower = [w[j] - widen * max(spans[j], Fraction(1)) * 4 for j in range(g)]
        upper = [w[j] + widen * max(spans[j], Fraction(1)) * 4 for j in range(g)]
        for k in integer_points_in_box(columns, lower, upper):
            d = [sum(columns[j][i] * k[j] for j in range(g)) - w[i] for i in range(g)]
            if any(dj != 0 and spans[j] <= 0 for j, dj in enumerate(d)):
                continue
            cost = sum(
                -((-abs(dj)) // max(spans[j] / 2, Fraction(1, 10**6)))
                for j, dj in enumerate(d)
            )
            key = (cost, k)
            if best is None or key < best[0]:
                best = (key, d)
        if best is not None:
            break
    if best is None:
        raise Stage0Failure(f"no correction lattice point for base {base!r}")
    terms = list(base.terms)
    for own, dj in zip(sites, best[1]):
        rem = dj
        for _guard in range(96):
            if rem == 0:
                break
            site = max(own, key=lambda s: s[2] - s[1])
            root, slo, shi, cj = site
            chunk_mag = min(abs(rem), (shi - slo) * Fraction(3, 4))
            chunk = chunk_mag if rem > 0 else -chunk_mag
            pair = None
            while pair is None and chunk_mag > 0:
                pair = _fresh_straddle_pair(frames, root, slo, shi, chunk_mag)
                if pair is None:
                    chunk_mag /= 2
                    chunk = chunk_mag if rem > 0 else -chunk_mag
            if pair is None:
                raise NoRoom(f"no room left for correction pairs on {root!r}")
            alpha, beta = pair
            # a pair with gap g here moves the j-th coordinate by g * cj
            if (chunk > 0) == (cj > 0):
                terms += [(P(root, beta), 1), (P(root, alpha), -1)]
            else:
                terms += [(P(root, alpha), 1), (P(root, beta), -1)]
            rem -= chunk
        else:
            raise NoRoom(f"correction total {dj} exceeds cycle capacity")
    return make_divisor(fin, terms)


def _model_root_range(skel: ExtendedGraph, frames: Frames, model: MetricGraph, model_eid: str):
    """Root frame window of an edge of a temporary refinement model."""
    for root in frames.roots:
        for kind, cid, lo, _hi in skel.segments_of(root):
            if kind != "edge":
                continue
            for sub, slo, shi in model.segments_of(cid):
                if sub == model_eid:
                    return root, lo + slo, lo + shi
    raise UnknownEdge(f"model edge {model_eid!r} has no root frame")


def _fresh_straddle_pair(frames: Frames, root, lo, hi, gap):
    """Two fresh offsets alpha < beta = alpha + gap inside (lo, hi); the
    open span between them may contain other blocked points.  Returns None
    when no placement is clear."""
    span = hi - lo - gap
    if span <= 0:
        return None
    k = 1
    while k <= 128:
        for num in range(1, 2 * k, 2):
            alpha = lo + span * Fraction(num, 2 * k)
            beta = alpha + gap
            if frames.clear_point(root, alpha) and frames.clear_point(root, beta):
                frames.block_point(root, alpha)
                frames.block_point(root, beta)
                return alpha, beta
        k *= 2
    return None


def _violations(emb: Embedding):
    """Structured fully-faithful violations from one tropicalization."""
    curve, emap = tropicalize(emb)
    out = []
    for rec in emap.pieces:
        if rec.stretch == 0:
            out.append(("contracted", rec.source, rec.lo, rec.hi))
        elif rec.stretch > 1:
            out.append(("stretch", rec.source, rec.lo, rec.hi))
    for eid, srcs in sorted(emap.edge_sources.items()):
        if len(srcs) > 1:
            out.append(("coverage", eid, srcs))
    for vid, pts in sorted(emap.vertex_sources.items()):
        if len(pts) > 1:
            out.append(("preimages", vid, tuple(sorted(pts))))
    return curve, emap, out


def _core_violation(emb: Embedding, viol, core_pieces: set[str], core_vertices) -> bool:
    kind = viol[0]
    skel = emb.skeleton

    def pt_in_core(pt: GraphPoint) -> bool:
        if pt.is_vertex:
            return pt.vertex in core_vertices or any(
                skel.finite.edges[eid].a == pt.vertex or skel.finite.edges[eid].b == pt.vertex
                for eid in core_pieces
                if eid in skel.finite.edges
            )
        return pt.edge in core_pieces

    if kind in ("contracted", "stretch"):
        return viol[1] in core_pieces
    if kind == "coverage":
        return sum(1 for src, _lo, _hi in viol[2] if src in core_pieces) >= 2
    if kind == "preimages":
        return sum(1 for pt in viol[2] if pt_in_core(pt)) >= 2
    return False


def _separating_bump(
    emb: Embedding, frames: Frames, cid: str, lo: Fraction, hi: Optional[Fraction],
    around: Optional[Fraction] = None,
) -> Optional[PLFunction]:
    """A trapezoid inside a free window of the piece [lo, hi] of the
    current edge cid, optionally with its rising part covering `around`."""
    skel = emb.skeleton
    if cid in skel.rays:
        return None
    root, shift = frames.locate(skel, cid)
    glo = shift + lo
    ghi = shift + (hi if hi is not None else skel.finite.edges[cid].length)
    wins = frames.windows(root, glo, ghi)
    if around is not None:
        g_around = shift + around
        wins = [wn for wn in wins if wn[0] < g_around < wn[1]]
    if not wins:
        return None
    wlo, whi = wins[0]
    if around is not None:
        g_around = shift + around
        q = min(g_around - wlo, whi - g_around) / 8
        offs = [g_around - q, g_around + q, g_around + 2 * q, g_around + 4 * q]
        if offs[3] >= whi:
            offs = [g_around - 3 * q, g_around + q, g_around + 2 * q, g_around + 6 * q]
            offs = [g_around - q, g_around + q, whi - 2 * q, whi - 0 * q - q]
            x1, x2 = g_around - q, g_around + q
            x3 = min(whi - 3 * q, x2 + q)
            if x3 <= x2:
                x3 = x2 + (whi - x2) / 4
            x4 = x3 + (x2 - x1)
            if x4 >= whi:
                return None
            offs = [x1, x2, x3, x4]
    else:
        width = whi - wlo
        offs = [wlo + width * Fraction(k, 8) for k in (1, 2, 5, 6)]
    if not all(frames.clear_point(root, o) for o in offs):
        return None
    frames.block_interval(root, offs[0], offs[3])
    cp = [emb.skeleton.canonical_point(P(root, o)) for o in offs]
    if any(c.is_vertex for c in cp) or len({c.edge for c in cp}) != 1:
        return None
    return trapezoid(skel, cp[0].edge, sorted(c.offset for c in cp))


def _repair_step(
    emb: Embedding, frames: Frames, viol, name: str
) -> Optional[Embedding]:
    """One targeted fix for a fully-faithful violation; None when this
    violation kind has no local remedy."""
    kind = viol[0]
    if kind in ("contracted", "stretch"):
        cid = viol[1]
        bump = _separating_bump(emb, frames, cid, viol[2], viol[3])
        if bump is None:
            return None
        emb2 = extend_embedding(emb, bump, name)
        _register_new_roots(frames, emb, emb2)
        return emb2
    if kind == "coverage":
        for src, lo, hi in viol[2]:
            bump = _separating_bump(emb, frames, src, lo, hi)
            if bump is not None:
                emb2 = extend_embedding(emb, bump, name)
                _register_new_roots(frames, emb, emb2)
                return emb2
        return None
    if kind == "preimages":
        for pt in viol[2]:
            if pt.is_vertex:
                continue
            e = emb.skeleton.finite.edges.get(pt.edge)
            if e is None:
                continue
            bump = _separating_bump(
                emb, frames, pt.edge, Fraction(0), e.length, around=pt.offset
            )
            if bump is not None:
                emb2 = extend_embedding(emb, bump, name)
                _register_new_roots(frames, emb, emb2)
                return emb2
        verts = [pt.vertex for pt in viol[2] if pt.is_vertex]
        if len(verts) >= 2:
            return _separating_witness(emb, frames, verts[0], verts[1], name)
        return None
    return None


def _separating_witness(
    emb: Embedding, frames: Frames, x: str, y: str, name: str
) -> Optional[Embedding]:
    """Corrected-ramp witness with charges next to two colliding vertices;
    its harmonic values generically tell them apart."""
    skel = emb.skeleton
    fin = skel.finite
    spots = []
    for v in (x, y):
        edges = [eid for eid, _w in sorted(fin.adjacency[v])]
        if not edges:
            return None
        cid = edges[0]
        root, slo, shi = frames.root_range(skel, cid)
        e = fin.edges[cid]
        if e.a == v:
            win = (slo, slo + (shi - slo) / 4)
        else:
            win = (shi - (shi - slo) / 4, shi)
        try:
            spots.append(P(root, frames.fresh_point(root, *win)))
        except NoRoom:
            return None
    base = make_divisor(fin, [(spots[0], 1), (spots[1], -1)])
    try:
        d = _aj_corrections(emb, frames, base)
    except (NoRoom, Stage0Failure):
        return None
    res = is_principal(fin, d)
    if not res.principal:
        return None
    f = _lift_to_skeleton(skel, res.witness)
    emb2 = extend_embedding(emb, f, name)
    _register_new_roots(frames, emb, emb2)
    return emb2


def _register_new_roots(frames: Frames, before: Embedding, after: Embedding):
    old = set(before.skeleton.rays)
    retired = set()
    for rid in after.skeleton.rays:
        if rid not in old:
            # only genuinely new rays become roots; tails of subdivided old
            # rays are still reachable through their original root frame
            try:
                frames.locate(after.skeleton, rid)
            except UnknownEdge:
                frames.add_root(rid)


def _root_slope_cover(emb: Embedding, frames: Frames, root: str):
    """Root-frame intervals on which some coordinate has nonzero slope."""
    covered = []
    for kind, cid, lo, hi in emb.skeleton.segments_of(root):
        if kind == "ray":
            if any(f.ray_profiles[cid].slope for f in emb.coords):
                covered.append((lo, None))
            continue
        cuts = {Fraction(0), hi - lo}
        for f in emb.coords:
            cuts.update(
                b for b in f.edge_profiles[cid].breaks if 0 < b < hi - lo
            )
        xs = sorted(cuts)
        for x1, x2 in zip(xs, xs[1:]):
            if any(f.edge_profiles[cid].slope_at(x1, +1) for f in emb.coords):
                covered.append((lo + x1, lo + x2))
    covered.sort()
    merged = []
    for a, b in covered:
        if merged and merged[-1][1] is not None and merged[-1][1] >= a:
            top = merged[-1][1]
            merged[-1] = (merged[-1][0], b if (b is None or top < b) else top)
        else:
            merged.append((a, b))
    return merged


def _cover_gaps(emb: Embedding, frames: Frames, root: str, lo: Fraction,
                hi: Fraction, namer, report) -> Embedding:
    """Add trapezoid coordinates until every point of (lo, hi) in the root
    frame lies in a nonzero-slope zone of some coordinate."""
    for round_no in range(24):
        cover = [
            (a, b if b is not None else hi)
            for a, b in _root_slope_cover(emb, frames, root)
        ]
        gap = None
        cursor = lo
        for a, b in cover:
            if a > cursor:
                gap = (cursor, min(a, hi))
                break
            cursor = max(cursor, b)
            if cursor >= hi:
                break
        if gap is None and cursor < hi:
            gap = (cursor, hi)
        if gap is None:
            return emb
        glo, ghi = gap
        length = _root_length(emb.skeleton, root)
        offs = _straddle_trapezoid(frames, root, glo, ghi, length)
        if offs is None:
            raise Stage0Failure(f"no straddling trapezoid fits on {root!r}")
        bump = _trapezoid_on_root(emb.skeleton, root, offs)
        name = namer()
        emb2 = extend_embedding(emb, bump, name)
        _register_new_roots(frames, emb, emb2)
        emb = emb2
        report.log(construction="coverage-trapezoid", target=root, coordinate=name)
    raise Stage0Failure(f"coverage fill did not converge on {root!r}")


def _straddle_trapezoid(frames: Frames, root: str, glo, ghi, length):
    """Trapezoid offsets whose rising (or falling) part straddles the start
    of the gap (glo, ghi) and makes progress into it.  Tries a left-anchored
    rise, then a mirrored right-anchored fall, then shrinks the reach."""
    if glo <= 0 or ghi >= length:
        return None  # endpoints belong to tent coverage
    reach = ghi - glo
    for _shrink in range(10):
        # rise [x1, x2] with x1 just left of glo, x2 inside the gap
        back = min(glo / 2, reach / 4)
        try:
            x1 = frames.fresh_point(root, glo - back, glo)
            x2 = frames.fresh_point(root, glo, glo + reach)
        except NoRoom:
            reach /= 2
            continue
        h = x2 - x1
        if x2 + 2 * h < length:
            try:
                x3 = frames.fresh_point(root, x2, min(x2 + h, length - h))
            except NoRoom:
                reach /= 2
                continue
            x4 = x3 + h
            if frames.clear_point(root, x4):
                frames.block_point(root, x4)
                return (x1, x2, x3, x4)
        # mirrored: fall [x3, x4] straddles glo from the left instead
        x3m, x4m = x1, x2
        hm = x4m - x3m
        if x3m - 2 * hm > 0:
            try:
                x2m = frames.fresh_point(root, max(Fraction(0), x3m - hm), x3m)
            except NoRoom:
                reach /= 2
                continue
            x1m = x2m - hm
            if x1m > 0 and frames.clear_point(root, x1m):
                frames.block_point(root, x1m)
                return (x1m, x2m, x3m, x4m)
        reach /= 2
    return None


def _root_length(skel: ExtendedGraph, root: str) -> Fraction:
    segs = skel.segments_of(root)
    if segs[-1][3] is None:
        raise UnknownEdge(f"{root!r} is unbounded")
    return segs[-1][3]


def _trapezoid_on_root(skel: ExtendedGraph, root: str, offs) -> PLFunction:
    cp = [skel.canonical_point(P(root, o)) for o in offs]
    if any(c.is_vertex for c in cp) or len({c.edge for c in cp}) != 1:
        raise Stage0Failure(f"trapezoid {offs} on {root!r} crosses a vertex")
    return trapezoid(skel, cp[0].edge, sorted(c.offset for c in cp))


def _core_sides_at(skel: ExtendedGraph, core_edges: frozenset[str], v: str):
    """Current core edge pieces incident to v, sorted by root id."""
    out = []
    for root in sorted(core_edges):
        for kind, cid, _lo, _hi in skel.segments_of(root):
            if kind != "edge":
                continue
            e = skel.finite.edges[cid]
            if v in (e.a, e.b):
                out.append(cid)
    return sorted(dict.fromkeys(out))


def stage0(
    emb: Embedding,
    core_edges: frozenset[str],
    core_vertices: frozenset[str],
    frames: Frames,
    report: "PipelineReport",
    budgets: Budgets,
) -> Embedding:
    """Bootstrap coordinates making the core injective with unit stretch.

    Tent coordinates cover every core vertex neighborhood, trapezoids fill
    the remaining edge interiors, one corrected-ramp witness per core edge
    separates the vertex values, and a batched patch loop resolves whatever
    exact violations remain (within budget, else Stage0Failure).
    """
    if not core_edges:
        return emb
    counter = [0]

    def namer(prefix):
        def gen():
            counter[0] += 1
            return f"{prefix}{counter[0]}"
        return gen

    # (1) tents at core vertices
    fin0 = emb.skeleton.finite
    tent_vertices = sorted(
        {fin0.edges[e].a for e in core_edges} | {fin0.edges[e].b for e in core_edges}
    )
    for v in tent_vertices:
        sides = _core_sides_at(emb.skeleton, core_edges, v)
        if len(sides) < 2:
            continue
        e0 = sides[0]
        for ek in sides[1:]:
            res = vertex_function(emb, v, e0, ek, frames=frames)
            name = namer("gt")()
            emb2 = extend_embedding(res.embedding, res.function, name)
            _register_new_roots(frames, res.embedding, emb2)
            emb = emb2
            report.log(construction="core-tent", target=v, coordinate=name)
            sides = _core_sides_at(emb.skeleton, core_edges, v)
            e0 = sides[0]

    # (2) fill uncovered interiors of every core edge
    fill_namer = namer("gc")
    for root in sorted(core_edges):
        length = _root_length(emb.skeleton, root)
        emb = _cover_gaps(
            emb, frames, root, Fraction(0), length, fill_namer, report
        )

    # (3) one corrected-ramp witness per core edge for vertex separation
    for idx, root_e in enumerate(sorted(core_edges)):
        d = _aj_corrected_divisor(emb, frames, root_e, budgets)
        res = is_principal(emb.skeleton.finite, d)
        assert res.principal, f"stage-0 divisor must be principal: {d}"
        f = _lift_to_skeleton(emb.skeleton, res.witness)
        emb2 = extend_embedding(emb, f, f"gs{idx}")
        _register_new_roots(frames, emb, emb2)
        emb = emb2
        report.log(construction="core-ramp", target=root_e, coordinate=f"gs{idx}")

    # (4) batched patches for residual core violations
    for patch_round in range(budgets.stage0_patches):
        core_pieces = _core_current(emb.skeleton, core_edges)
        _curve, _emap, viols = _violations(emb)
        core_viols = [
            v for v in viols if _core_violation(emb, v, core_pieces, core_vertices)
        ]
        if not core_viols:
            return emb
        progressed = False
        for viol in core_viols:
            emb2 = _repair_step(emb, frames, viol, f"gp{patch_round}.{len(emb.coords)}")
            if emb2 is not None:
                report.log(construction="core-patch", target=str(viol[:2]))
                emb = emb2
                progressed = True
        if not progressed:
            raise Stage0Failure(f"no remedy for core violations {core_viols[:2]}")
    raise Stage0Failure("core patch budget exhausted")


# -- pipelines ---------------------------------------------------------------------------


@dataclass
class PipelineReport:
    steps: list = field(default_factory=list)
    initial: dict = field(default_factory=dict)
    final: dict = field(default_factory=dict)
    singular_counts: list = field(default_factory=list)

    def log(self, **kw):
        self.steps.append(dict(kw))

    def to_dict(self) -> dict:
        return {
            "steps": self.steps,
            "initial": self.initial,
            "final": self.final,
            "singular_counts": self.singular_counts,
        }


def fully_faithful_pipeline(
    emb: Embedding, budgets: Budgets = None
) -> tuple[Embedding, PipelineReport]:
    """Refine until the tropicalization is injective with all weights one.

    Hard-fails with CertificateFailure if the final exact certificate does
    not pass; never returns an uncertified embedding.
    """
    budgets = budgets or Budgets()
    report = PipelineReport()
    rep0 = is_fully_faithful(emb)
    report.initial = {
        "fully_faithful": bool(rep0),
        "coordinates": len(emb.coords),
        "reasons": list(rep0.reasons),
    }
    if rep0:
        report.final = {"fully_faithful": True, "noop": True}
        return emb.with_provenance("fully_faithful_pipeline", noop=True), report

    frames = Frames(emb.skeleton)
    fin = emb.skeleton.finite
    core_edges, core_vertices = designate_core(fin)
    emb = stage0(emb, core_edges, core_vertices, frames, report, budgets)

    finite_targets = [
        eid for eid in sorted(fin.edges) if eid not in core_edges
    ]
    ray_targets = sorted(
        rid
        for rid in emb.skeleton.rays
        if all(f.ray_profiles[rid].slope == 0 for f in emb.coords)
    )
    pillar_targets = [
        PillarTarget(f"edge:{eid}", avoid_image_of=eid) for eid in finite_targets
    ] + [PillarTarget(f"ray:{rid}", avoid_image_of=rid) for rid in ray_targets]
    config = select_pillars(emb, pillar_targets, frames, budgets)

    for eid in finite_targets:
        res = edge_function_finite(
            emb, eid, config.sets[f"edge:{eid}"], core_edges, core_vertices, frames
        )
        emb2 = extend_embedding(res.embedding, res.function, f"f.{eid}")
        _register_new_roots(frames, res.embedding, emb2)
        emb = emb2
        report.log(
            construction="finite-edge-ramp",
            target=eid,
            coordinate=f"f.{eid}",
            zero_at=repr(res.zero_point),
            pole_at=repr(res.pole_point),
            unit_stretch_new_edges=True,
        )
    for rid in ray_targets:
        res = edge_function_infinite(
            emb, rid, config.sets[f"ray:{rid}"], core_edges, core_vertices, frames
        )
        emb2 = extend_embedding(res.embedding, res.function, f"f.{rid}")
        _register_new_roots(frames, res.embedding, emb2)
        emb = emb2
        report.log(
            construction="infinite-edge-ramp",
            target=rid,
            coordinate=f"f.{rid}",
            zero_at=repr(res.zero_point),
            unit_stretch_new_edges=True,
        )

    for round_no in range(budgets.repair_rounds):
        rep = is_fully_faithful(emb)
        if rep:
            break
        _curve, _emap, viols = _violations(emb)
        assert viols, "certificate failed without structured violations"
        emb2 = _repair_step(emb, frames, viols[0], f"r{round_no}")
        if emb2 is None:
            raise CertificateFailure(
                f"unrepairable violation {viols[0][:2]}; reasons: {rep.reasons}"
            )
        report.log(construction="repair", target=str(viols[0][:2]))
        emb = emb2
    rep = is_fully_faithful(emb)
    if not rep:
        raise CertificateFailure(f"final certificate failed: {rep.reasons}")
    report.final = {"fully_faithful": True, "coordinates": len(emb.coords)}
    return emb.with_provenance("fully_faithful_pipeline"), report


def _outgoing_direction(emb: Embedding, v: str, side_id: str):
    skel = emb.skeleton
    if side_id in skel.rays:
        return tuple(f.ray_profiles[side_id].slope for f in emb.coords)
    e = skel.finite.edges[side_id]
    if e.a == v:
        return tuple(f.edge_profiles[side_id].slope_at(Fraction(0), +1) for f in emb.coords)
    return tuple(-f.edge_profiles[side_id].slope_at(e.length, -1) for f in emb.coords)


def smoothing_pipeline(
    emb: Embedding, budgets: Budgets = None
) -> tuple[Embedding, PipelineReport]:
    """Refine a fully faithful embedding until the image curve is smooth.

    Singular image vertices are resolved one at a time; the count of
    singular vertices strictly decreases after every pass (violations of
    that invariant indicate a bug and raise MonotonicityViolation).
    """
    budgets = budgets or Budgets()
    if not is_fully_faithful(emb):
        emb, report = fully_faithful_pipeline(emb, budgets)
    else:
        report = PipelineReport()
        report.initial = {"fully_faithful": True}
    frames = Frames(emb.skeleton)
    curve, emap = tropicalize(emb)
    sm = check_smooth(curve)
    report.singular_counts.append(len(sm.singular_vertices))
    guard = len(sm.singular_vertices) + 1
    pass_no = 0
    while not sm.smooth and pass_no < guard:
        assert not sm.heavy_edges, "fully faithful output cannot carry weights"
        target = sm.singular_vertices[0]
        preimages = emap.vertex_sources[target.vertex]
        assert len(preimages) == 1, "fully faithful output is injective"
        pt = next(iter(preimages))
        if not pt.is_vertex:
            emb = refine_embedding(emb, [pt])
            pt = emb.skeleton.canonical_point(pt)
        v = pt.vertex
        skel = emb.skeleton
        sides = sorted(
            [eid for eid, e in skel.finite.edges.items() if v in (e.a, e.b)]
            + [rid for rid, r in skel.rays.items() if r.attach == v]
        )
        directions = {s: _outgoing_direction(emb, v, s) for s in sides}
        e0 = min(sides, key=lambda s: (directions[s], s))
        others = [s for s in sides if s != e0]
        others.sort(key=lambda s: (directions[s], s))
        side_specs = {
            s: _side_frame(emb.skeleton, frames, v, s) for s in [e0] + others
        }
        for k, ek in enumerate(others, start=1):
            name = f"v{pass_no}.{k}"
            spec0 = side_specs[e0]
            speck = side_specs[ek]
            res = _tent_from_specs(emb, v, spec0, speck, frames)
            forb = _tent_forbidden_zones(res.tent_points, frames, emb)
            pset = select_pillars(
                res.embedding,
                [PillarTarget(f"vertex:{v}:{name}", forbidden=forb)],
                frames,
                budgets,
            ).sets[f"vertex:{v}:{name}"]
            f = _apply_pillars(res.embedding, res.function, pset)
            emb2 = extend_embedding(res.embedding, f, name)
            _register_new_roots(frames, res.embedding, emb2)
            emb = emb2
            report.log(
                construction="vertex-tent",
                target=v,
                sides=[e0, ek],
                coordinate=name,
            )
        rep = is_fully_faithful(emb)
        if not rep:
            raise CertificateFailure(
                f"smoothing pass broke full faithfulness: {rep.reasons}"
            )
        curve, emap = tropicalize(emb)
        sm = check_smooth(curve)
        report.singular_counts.append(len(sm.singular_vertices))
        if report.singular_counts[-1] >= report.singular_counts[-2]:
            raise MonotonicityViolation(
                f"singular count went {report.singular_counts[-2]} -> "
                f"{report.singular_counts[-1]}"
            )
        pass_no += 1
    if not sm.smooth:
        raise CertificateFailure("smoothing budget exhausted")
    report.final = {
        "smooth": True,
        "fully_faithful": True,
        "coordinates": len(emb.coords),
    }
    return emb.with_provenance("smoothing_pipeline"), report


def _tent_from_specs(emb, v, spec_neg, spec_pos, frames) -> VertexFunctionResult:
    room = min(spec_neg[3], spec_pos[3])
    r = room / 4
    p = room / 4
    for _try in range(40):
        pts = []
        ok = True
        for root, v_off, direction, _room in (spec_neg, spec_pos):
            for db in (r, r + p, 2 * r + p):
                x = v_off + direction * db
                pts.append((root, x))
                if not frames.clear_point(root, x):
                    ok = False
        if ok:
            break
        r = r * Fraction(15, 16)
        p = p * Fraction(13, 16)
    else:
        raise NoRoom(f"could not place a tent at {v!r}")
    for root, x in pts:
        frames.block_point(root, x)
    refit = [
        P(root, x)
        for root, x in pts
        if not emb.skeleton.canonical_point(P(root, x)).is_vertex
        and emb.skeleton.canonical_point(P(root, x)).edge in emb.skeleton.rays
    ]
    if refit:
        emb = refine_embedding(emb, refit)
    skel = emb.skeleton
    neg = _one_sided_tent(skel, spec_neg[0], spec_neg[1], spec_neg[2], r, p, -1)
    pos = _one_sided_tent(skel, spec_pos[0], spec_pos[1], spec_pos[2], r, p, +1)
    tent = neg + pos
    d = divisor_of(tent)
    assert all(abs(c) == 1 for _pt, c in d.terms) and len(d.terms) == 6
    assert d.coeff(V(v)) == 0
    return VertexFunctionResult(
        emb, tent, tuple(skel.canonical_point(P(root, x)) for root, x in pts)
    )


def _tent_forbidden_zones(tent_points, frames: Frames, emb) -> tuple:
    zones: dict[str, list[Fraction]] = {}
    for pt in tent_points:
        if pt.is_vertex:
            continue
        root, shift = frames.locate(emb.skeleton, pt.edge)
        zones.setdefault(root, []).append(shift + pt.offset)
    return tuple(
        (root, min(offs), max(offs)) for root, offs in sorted(zones.items())
    )


# -- the worked elliptic-curve example ------------------------------------------------------


def tate_demo(c=1) -> tuple[Embedding, TropicalCurve]:
    """Hexagon-with-spokes skeleton of a genus-one curve, embedded by the
    two witness coordinates of its canonical divisor pattern; tropicalizes
    to the symmetric honeycomb with nine rays."""
    from .graphs import build_extended, build_graph
    from .rationals import rat

    c = rat(c)
    if c <= 0:
        raise NoRoom(f"scale parameter must be positive, got {c}")
    half = c / 2
    fin = build_graph(
        ["q1", "q2", "q3", "p4", "p5", "p6", "p1", "p2", "p3"],
        [
            ("a16", "q1", "p6", half),
            ("a62", "p6", "q2", half),
            ("a24", "q2", "p4", half),
            ("a43", "p4", "q3", half),
            ("a35", "q3", "p5", half),
            ("a51", "p5", "q1", half),
            ("s1", "q1", "p1", half),
            ("s2", "q2", "p2", half),
            ("s3", "q3", "p3", half),
        ],
    )
    skel = build_extended(
        fin,
        [
            ("r11", V("p1")),
            ("r12", V("p1")),
            ("r21", V("p2")),
            ("r22", V("p2")),
            ("r31", V("p3")),
            ("r32", V("p3")),
            ("r4", V("p4")),
            ("r5", V("p5")),
            ("r6", V("p6")),
        ],
    )
    d1 = make_divisor(fin, [(V("p1"), -1), (V("p3"), 1), (V("p4"), 1), (V("p6"), -1)])
    d2 = make_divisor(fin, [(V("p2"), -1), (V("p3"), 1), (V("p5"), 1), (V("p6"), -1)])
    f1 = construct_pl_with_divisor(fin, d1, V("q1"), 0)
    f2 = construct_pl_with_divisor(fin, d2, V("q1"), 0)
    slopes1 = {"r11": 1, "r12": 0, "r21": -1, "r22": 1, "r31": -1, "r32": 0,
               "r4": -1, "r5": 0, "r6": 1}
    slopes2 = {"r11": 1, "r12": -1, "r21": 0, "r22": 1, "r31": 0, "r32": -1,
               "r4": 0, "r5": -1, "r6": 1}
    g1 = _with_ray_slopes(skel, f1, slopes1)
    g2 = _with_ray_slopes(skel, f2, slopes2)
    emb = Embedding(
        skel, [g1, g2], [{"step": "tate_demo", "params": {"c": str(c)}}]
    )
    curve, _emap = tropicalize(emb)
    return emb, curve


def _with_ray_slopes(skel: ExtendedGraph, f_fin: PLFunction, slopes) -> PLFunction:
    rays = {
        rid: RayProfile(f_fin.vertex_value(r.attach), slopes.get(rid, 0))
        for rid, r in skel.rays.items()
    }
    return PLFunction(skel, f_fin.edge_profiles, rays)
