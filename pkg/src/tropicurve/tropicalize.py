"""Tropicalization of an extended graph under a tuple of coordinate functions.

An embedding is a skeleton plus an ordered list of PL coordinate functions,
each harmonic on the finite part (divisor supported at infinite vertices
only).  Tropicalizing maps every edge piece linearly by its integer slope
vector; pieces with zero slope vector are contracted, the rest are arranged
exactly: pieces on a common affine line are overlaid in a shared line
parameter, transversal crossings split both lines, and weights add up as
the stretching factors of the pieces covering an image edge.  Everything is
computed over the rationals; injectivity and weight-one checks are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .complexes import TropEdge, TropPoint, TropicalCurve, check_balancing
from .divisors import Divisor, PLFunction, divisor_of
from .errors import (
    ContractedEdge,
    DivisorCollision,
    EmptyCoordinates,
    InvalidCoordinate,
    NonSimplePoint,
    UnknownEdge,
)
from .graphs import ExtendedGraph, GraphPoint
from .linalg import primitive
from .rationals import MINUS_INF, PLUS_INF, ExtRational


def validate_coordinate(skeleton: ExtendedGraph, f: PLFunction) -> Divisor:
    """A coordinate function must be harmonic on the finite part: its
    divisor is supported at infinite vertices only.  Returns the divisor."""
    if f.domain is not skeleton:
        raise InvalidCoordinate("coordinate lives on a different skeleton")
    d = divisor_of(f)
    for pt, _c in d.terms:
        if not (pt.is_vertex and skeleton.is_infinite_vertex(pt.vertex)):
            raise InvalidCoordinate(
                f"coordinate has divisor support at finite point {pt!r}"
            )
    return d


class Embedding:
    """Skeleton + coordinates + a provenance log of pipeline steps."""

    def __init__(
        self,
        skeleton: ExtendedGraph,
        coords: Sequence[PLFunction],
        provenance: Sequence[dict] = (),
    ):
        self.skeleton = skeleton
        self.coords = tuple(coords)
        self.provenance = tuple(provenance)
        for f in self.coords:
            validate_coordinate(skeleton, f)

    @property
    def ambient_dim(self) -> int:
        return len(self.coords)

    def separates_vertices(self) -> bool:
        seen = {}
        for v in self.skeleton.finite.vertices:
            key = tuple(f.vertex_value(v) for f in self.coords)
            if key in seen and seen[key] != v:
                return False
            seen[key] = v
        return bool(self.coords) or len(self.skeleton.finite.vertices) <= 1

    @property
    def raw(self) -> bool:
        return not self.separates_vertices()

    def with_provenance(self, step: str, **params) -> "Embedding":
        entry = {"step": step, "params": params}
        return Embedding(self.skeleton, self.coords, self.provenance + (entry,))

    def value_tuple(self, pt: GraphPoint) -> tuple[Fraction, ...]:
        return tuple(f.value(pt) for f in self.coords)


# -- pieces -------------------------------------------------------------------------


@dataclass
class _Item:
    """One non-contracted source piece, parametrized on its image line."""

    source: str
    src_lo: Fraction
    src_hi: Optional[Fraction]  # None for a ray tail
    stretch: int
    sense: int  # +1 when increasing source offset increases the line parameter
    u_lo: Optional[Fraction]  # None = unbounded below
    u_hi: Optional[Fraction]  # None = unbounded above
    anchor_u: Fraction  # u at source offset src_lo

    def src_at(self, u: Fraction) -> Fraction:
        return self.src_lo + self.sense * (u - self.anchor_u) / self.stretch

    def covers(self, u: Fraction) -> bool:
        if self.u_lo is not None and u < self.u_lo:
            return False
        if self.u_hi is not None and u > self.u_hi:
            return False
        return True


@dataclass
class PieceRecord:
    source: str
    lo: Fraction
    hi: Optional[Fraction]
    stretch: int  # 0 for contracted pieces
    image_edges: tuple[str, ...] = ()
    image_point: Optional[tuple[Fraction, ...]] = None


@dataclass
class EdgeMap:
    pieces: list[PieceRecord]
    vertex_sources: dict[str, frozenset[GraphPoint]]
    edge_sources: dict[str, tuple[tuple[str, Fraction, Optional[Fraction]], ...]]

    @property
    def contracted(self) -> list[PieceRecord]:
        return [p for p in self.pieces if p.stretch == 0]


def _source_pieces(emb: Embedding):
    """Break every skeleton edge at the union of coordinate breakpoints.

    Yields (source_id, lo, hi_or_None, start_values, slope_vector).
    """
    skel = emb.skeleton
    for eid in sorted(skel.finite.edges):
        e = skel.finite.edges[eid]
        cuts = {Fraction(0), e.length}
        for f in emb.coords:
            cuts.update(f.edge_profiles[eid].breaks)
        xs = sorted(cuts)
        for lo, hi in zip(xs, xs[1:]):
            vals = tuple(f.edge_profiles[eid].value_at(lo) for f in emb.coords)
            slopes = tuple(f.edge_profiles[eid].slope_at(lo, +1) for f in emb.coords)
            yield eid, lo, hi, vals, slopes
    for rid in sorted(skel.rays):
        vals = tuple(f.ray_profiles[rid].start for f in emb.coords)
        slopes = tuple(f.ray_profiles[rid].slope for f in emb.coords)
        yield rid, Fraction(0), None, vals, slopes


def _canonical_direction(slopes: Sequence[int]) -> tuple[int, tuple[int, ...], int]:
    """(stretch, canonical primitive direction, sense of slopes vs it)."""
    m, w = primitive(slopes)
    lead = next(x for x in w if x)
    if lead < 0:
        return m, tuple(-x for x in w), -1
    return m, w, +1


def _line_frame(point: Sequence[Fraction], wc: Sequence[int]):
    """(origin, u): the affine line through `point` with direction wc is
    {origin + u*wc}; returns the origin and the parameter of `point`."""
    pivot = next(i for i, x in enumerate(wc) if x)
    u = Fraction(point[pivot], wc[pivot])
    origin = tuple(p - u * w for p, w in zip(point, wc))
    return origin, u


def _line_intersection(origin1, w1, origin2, w2):
    """Intersection point of two non-parallel rational lines, or None."""
    n = len(w1)
    pair = None
    for i in range(n):
        for j in range(i + 1, n):
            det = w1[i] * w2[j] - w1[j] * w2[i]
            if det != 0:
                pair = (i, j, det)
                break
        if pair:
            break
    if pair is None:
        return None  # parallel
    i, j, det = pair
    di = origin2[i] - origin1[i]
    dj = origin2[j] - origin1[j]
    t = Fraction(di * w2[j] - dj * w2[i], det)
    k = next(kk for kk in range(n) if w2[kk])
    s = Fraction(origin1[k] + t * w1[k] - origin2[k], w2[k])
    for kk in range(n):
        if origin1[kk] + t * w1[kk] != origin2[kk] + s * w2[kk]:
            return None
    return t, s


def _infinite_point(origin, wc, sign, n) -> TropPoint:
    """Limit point of a ray: infinite in the direction's support, with the
    line's canonical representative as the boundary-stratum anchor (rays on
    distinct parallel lines converge to distinct stratum points)."""
    coords = []
    for i in range(n):
        if wc[i] == 0:
            coords.append(ExtRational.finite(origin[i]))
        elif wc[i] * sign > 0:
            coords.append(PLUS_INF)
        else:
            coords.append(MINUS_INF)
    return TropPoint(tuple(coords), anchor=(tuple(wc), tuple(origin)))


def tropicalize(emb: Embedding) -> tuple[TropicalCurve, EdgeMap]:
    """Image complex of the skeleton under the coordinate tuple, with the
    per-piece stretching data.  The output always satisfies balancing."""
    if not emb.coords:
        raise EmptyCoordinates("embedding has no coordinates")
    n = emb.ambient_dim
    skel = emb.skeleton

    lines: dict = {}
    pieces: list[PieceRecord] = []
    contracted_items: list[tuple[str, Fraction, Optional[Fraction], tuple]] = []
    for source, lo, hi, vals, slopes in _source_pieces(emb):
        if not any(slopes):
            contracted_items.append((source, lo, hi, vals))
            continue
        m, wc, sense = _canonical_direction(slopes)
        origin, u0 = _line_frame(vals, wc)
        anchor_u = u0
        if hi is None:
            u_lo, u_hi = (u0, None) if sense > 0 else (None, u0)
        else:
            span = m * (hi - lo)
            u_lo, u_hi = (u0, u0 + span) if sense > 0 else (u0 - span, u0)
        item = _Item(source, lo, hi, m, sense, u_lo, u_hi, anchor_u)
        lines.setdefault((wc, origin), []).append(item)

    if not lines:
        # everything contracted: a single image point
        vals = contracted_items[0][3] if contracted_items else (Fraction(0),) * n
        pt = TropPoint.finite(vals)
        curve = TropicalCurve(n, {"t0": pt}, {})
        recs = [
            PieceRecord(src, lo, hi, 0, image_point=vals)
            for src, lo, hi, vals in contracted_items
        ]
        emap = EdgeMap(recs, {"t0": _contracted_sources(skel, recs)}, {})
        return curve, emap

    line_keys = sorted(lines.keys())
    # transversal crossings: split both lines where covered on both
    cuts: dict = {key: set() for key in line_keys}
    for key in line_keys:
        for item in lines[key]:
            if item.u_lo is not None:
                cuts[key].add(item.u_lo)
            if item.u_hi is not None:
                cuts[key].add(item.u_hi)
    for a in range(len(line_keys)):
        for b in range(a + 1, len(line_keys)):
            k1, k2 = line_keys[a], line_keys[b]
            hit = _line_intersection(k1[1], k1[0], k2[1], k2[0])
            if hit is None:
                continue
            t, s = hit
            if any(i.covers(t) for i in lines[k1]) and any(
                i.covers(s) for i in lines[k2]
            ):
                cuts[k1].add(t)
                cuts[k2].add(s)

    # overlay each line
    vertex_ids: dict[TropPoint, str] = {}
    vertex_pts: dict[str, TropPoint] = {}
    vertex_sources: dict[str, set[GraphPoint]] = {}

    def vertex_for(pt: TropPoint) -> str:
        if pt not in vertex_ids:
            vid = f"t{len(vertex_ids)}"
            vertex_ids[pt] = vid
            vertex_pts[vid] = pt
            vertex_sources[vid] = set()
        return vertex_ids[pt]

    edges: dict[str, TropEdge] = {}
    edge_sources: dict[str, list] = {}
    item_images: dict[int, list[str]] = {}

    def point_on(key, u) -> TropPoint:
        wc, origin = key
        return TropPoint.finite(tuple(o + u * w for o, w in zip(origin, wc)))

    edge_counter = 0
    for key in line_keys:
        wc, origin = key
        items = lines[key]
        bps = sorted(cuts[key])
        assert bps, "every line has at least one item endpoint"
        intervals: list[tuple[Optional[Fraction], Optional[Fraction]]] = []
        if any(i.u_lo is None for i in items):
            intervals.append((None, bps[0]))
        intervals.extend(zip(bps, bps[1:]))
        if any(i.u_hi is None for i in items):
            intervals.append((bps[-1], None))
        for u1, u2 in intervals:
            if u1 is None:
                probe = u2 - 1
            elif u2 is None:
                probe = u1 + 1
            else:
                probe = (u1 + u2) / 2
            covering = [i for i in items if i.covers(probe)]
            if not covering:
                continue
            weight = sum(i.stretch for i in covering)
            eid = f"s{edge_counter}"
            edge_counter += 1
            if u1 is None:
                v_fin = vertex_for(point_on(key, u2))
                v_inf = vertex_for(_infinite_point(origin, wc, -1, n))
                edges[eid] = TropEdge(
                    eid, v_fin, v_inf, tuple(-x for x in wc), weight, None
                )
            elif u2 is None:
                v_fin = vertex_for(point_on(key, u1))
                v_inf = vertex_for(_infinite_point(origin, wc, +1, n))
                edges[eid] = TropEdge(eid, v_fin, v_inf, wc, weight, None)
            else:
                va = vertex_for(point_on(key, u1))
                vb = vertex_for(point_on(key, u2))
                edges[eid] = TropEdge(eid, va, vb, wc, weight, u2 - u1)
            edge_sources[eid] = []
            for i in covering:
                if u1 is not None and u2 is not None:
                    o1, o2 = i.src_at(u1), i.src_at(u2)
                    lo, hi = min(o1, o2), max(o1, o2)
                elif u1 is None:
                    # sense must be -1 here (runs to -inf)
                    lo, hi = i.src_at(u2), None
                else:
                    lo, hi = i.src_at(u1), None
                edge_sources[eid].append((i.source, lo, hi))
                item_images.setdefault(id(i), []).append(eid)
            # finite endpoint preimages (infinite ends are handled below)
            for u_end in (u1, u2):
                if u_end is None:
                    continue
                for i in covering:
                    if not i.covers(u_end):
                        continue
                    off = i.src_at(u_end)
                    pt = skel.canonical_point(GraphPoint.on_edge(i.source, off))
                    vid = vertex_ids[point_on(key, u_end)]
                    vertex_sources[vid].add(pt)

    # infinite endpoints: preimages are the ray leaves
    for key in line_keys:
        for i in lines[key]:
            if i.src_hi is None:
                leaf = skel.ray(i.source).leaf
                sign = +1 if i.sense > 0 else -1
                pt = _infinite_point(key[1], key[0], sign, n)
                vid = vertex_for(pt)
                vertex_sources[vid].add(GraphPoint.at_vertex(leaf))

    # piece records, in deterministic source order
    for key in line_keys:
        for i in sorted(lines[key], key=lambda it: (it.source, it.src_lo)):
            pieces.append(
                PieceRecord(
                    i.source,
                    i.src_lo,
                    i.src_hi,
                    i.stretch,
                    tuple(item_images.get(id(i), ())),
                )
            )
    for src, lo, hi, vals in contracted_items:
        pieces.append(PieceRecord(src, lo, hi, 0, image_point=vals))
    pieces.sort(key=lambda p: (p.source, p.lo))

    # rename vertices deterministically by coordinates
    order = sorted(vertex_pts.items(), key=lambda kv: _point_sort_key(kv[1]))
    rename = {old: f"t{k}" for k, (old, _pt) in enumerate(order)}
    vertices = {rename[old]: pt for old, pt in vertex_pts.items()}
    new_edges = {}
    edge_order = sorted(edges.values(), key=lambda e: (_point_sort_key(vertex_pts[e.v1]), _point_sort_key(vertex_pts[e.v2]), e.direction))
    edge_rename = {}
    for k, e in enumerate(edge_order):
        nid = f"s{k}"
        edge_rename[e.id] = nid
        new_edges[nid] = TropEdge(nid, rename[e.v1], rename[e.v2], e.direction, e.weight, e.length)
    curve = TropicalCurve(n, vertices, new_edges, _validated=True)
    emap = EdgeMap(
        [
            PieceRecord(
                p.source,
                p.lo,
                p.hi,
                p.stretch,
                tuple(edge_rename[x] for x in p.image_edges),
                p.image_point,
            )
            for p in pieces
        ],
        {rename[v]: frozenset(pts) for v, pts in vertex_sources.items()},
        {
            edge_rename[eid]: tuple(sorted(srcs))
            for eid, srcs in edge_sources.items()
        },
    )
    rep = check_balancing(curve)
    assert rep.balanced, f"tropicalization violated balancing: {rep.defects}"
    return curve, emap


def _point_sort_key(pt: TropPoint):
    return tuple((c.sign, c.value if c.is_finite else Fraction(0)) for c in pt.coords)


def _contracted_sources(skel: ExtendedGraph, recs) -> frozenset[GraphPoint]:
    pts = set()
    for r in recs:
        pts.add(skel.canonical_point(GraphPoint.on_edge(r.source, r.lo)))
    return frozenset(pts)


# -- stretching --------------------------------------------------------------------


def stretching_factor(
    emb: Embedding, edge_id: str, span: Optional[tuple[Fraction, Fraction]] = None
) -> int:
    """Content of the coordinate slope vector on one linear piece.

    The slope vector must be constant over the span (no coordinate
    breakpoints inside); zero vector raises ContractedEdge.
    """
    skel = emb.skeleton
    if edge_id in skel.rays:
        slopes = tuple(f.ray_profiles[edge_id].slope for f in emb.coords)
    else:
        fin = skel.finite
        if edge_id not in fin.edges:
            raise UnknownEdge(f"unknown edge {edge_id!r}")
        e = fin.edges[edge_id]
        lo, hi = span if span is not None else (Fraction(0), e.length)
        for f in emb.coords:
            prof = f.edge_profiles[edge_id]
            if any(lo < b < hi for b in prof.breaks):
                raise ContractedEdge(
                    f"slope vector is not constant on [{lo}, {hi}] of {edge_id!r}"
                )
        slopes = tuple(
            f.edge_profiles[edge_id].slope_at(lo, +1) for f in emb.coords
        )
    if not any(slopes):
        raise ContractedEdge(f"edge {edge_id!r} is contracted by the coordinates")
    m, _w = primitive(slopes)
    return m


# -- faithfulness -------------------------------------------------------------------


def is_faithful_function(emb: Embedding, f: PLFunction) -> bool:
    """All divisor support at distinct infinite vertices with coefficients
    +-1 (simple zeros and poles, one per ray)."""
    d = validate_coordinate(emb.skeleton, f)
    return all(abs(c) == 1 for _pt, c in d.terms)


@dataclass(frozen=True)
class FaithfulReport:
    fully_faithful: bool
    reasons: tuple[str, ...] = ()

    def __bool__(self):
        return self.fully_faithful


def is_fully_faithful(emb: Embedding) -> FaithfulReport:
    """Exact certificate: no contracted pieces, globally injective, and all
    weights and stretching factors equal to one."""
    try:
        curve, emap = tropicalize(emb)
    except EmptyCoordinates:
        return FaithfulReport(False, ("embedding has no coordinates",))
    reasons = []
    for rec in emap.contracted:
        reasons.append(f"piece of {rec.source!r} at [{rec.lo}, {rec.hi}] is contracted")
    for rec in emap.pieces:
        if rec.stretch > 1:
            reasons.append(
                f"piece of {rec.source!r} at [{rec.lo}, {rec.hi}] has stretching factor {rec.stretch}"
            )
    for eid, srcs in sorted(emap.edge_sources.items()):
        if len(srcs) > 1:
            reasons.append(f"image edge {eid!r} is covered by {len(srcs)} pieces")
    for eid, e in curve.edges.items():
        if e.weight != 1:
            reasons.append(f"image edge {eid!r} has weight {e.weight}")
    for vid, pts in sorted(emap.vertex_sources.items()):
        if len(pts) > 1:
            reasons.append(
                f"image vertex {vid!r} has {len(pts)} skeleton preimages"
            )
    reasons = tuple(dict.fromkeys(reasons))
    return FaithfulReport(not reasons, reasons)


# -- extension ----------------------------------------------------------------------


def refine_embedding(emb: Embedding, points: Sequence[GraphPoint]) -> Embedding:
    """Subdivide the skeleton at the given points and transport coordinates."""
    skel = emb.skeleton
    for pt in points:
        skel, _ = skel.subdivide_at(pt)
    if skel is emb.skeleton:
        return emb
    coords = [f.transport(skel) for f in emb.coords]
    return Embedding(skel, coords, emb.provenance)


def extend_embedding(emb: Embedding, f: PLFunction, name: str) -> Embedding:
    """Adjoin a coordinate, attaching a fresh ray at every finite divisor
    point of f (the eventual slope opposes the coefficient's sign, so the
    extended function is harmonic there and diverges along the new ray).

    Divisor points must be simple (+-1) and distinct from existing ray
    attach points; support already at infinite vertices is kept as is.
    """
    skel = emb.skeleton
    if f.domain is not skel:
        raise InvalidCoordinate("function lives on a different skeleton")
    d = divisor_of(f)
    finite_support: list[tuple[GraphPoint, int]] = []
    for pt, c in d.terms:
        if pt.is_vertex and skel.is_infinite_vertex(pt.vertex):
            if abs(c) != 1:
                raise NonSimplePoint(f"coefficient {c} at infinite vertex {pt.vertex!r}")
            continue
        if abs(c) != 1:
            raise NonSimplePoint(f"coefficient {c} at {pt!r}")
        finite_support.append((pt, c))
    attach_vs = skel.attach_vertices()
    for pt, _c in finite_support:
        if pt.is_vertex and pt.vertex in attach_vs:
            raise DivisorCollision(
                f"divisor point {pt!r} is already a ray attachment"
            )
    new_rays = [
        (f"{name}.{k}", pt) for k, (pt, _c) in enumerate(sorted(finite_support))
    ]
    new_skel = skel.with_new_rays(new_rays)
    ray_slopes = {
        rid: -c for (rid, _pt), (_pt2, c) in zip(new_rays, sorted(finite_support))
    }
    new_coords = [g.transport(new_skel) for g in emb.coords]
    new_f = f.transport(new_skel, new_ray_slopes=ray_slopes)
    # structural stretching-factor check on the new rays: the added
    # coordinate is the only one with nonzero slope there, and it is +-1
    for rid in ray_slopes:
        assert abs(new_f.ray_profiles[rid].slope) == 1
        assert all(g.ray_profiles[rid].slope == 0 for g in new_coords)
    entry = {
        "step": "extend",
        "params": {
            "name": name,
            "attached": [rid for rid, _pt in new_rays],
        },
    }
    return Embedding(new_skel, new_coords + [new_f], emb.provenance + (entry,))
