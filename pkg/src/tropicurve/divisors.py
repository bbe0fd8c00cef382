"""Divisors and piecewise linear functions on metric graphs.

A divisor is a finite formal integer combination of rational points.  A PL
function is stored per edge: a start value at the a-endpoint, interior
breakpoint offsets, and the integer slopes between them; rays carry a single
eventual slope.  Principality of a degree-zero divisor is decided by one
exact linear solve: slopes must satisfy the divisor equations at every
vertex and integrate to zero around every fundamental cycle, and the unique
rational solution must be integral.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import (
    DiscontinuousFunction,
    InvalidOffset,
    InvalidPillars,
    NonzeroDegree,
    NotComplement,
    NotPrincipal,
    UnknownEdge,
)
from .graphs import ExtendedGraph, GraphPoint, MetricGraph, validate_pillar_points
from .linalg import solve_linear
from .rationals import MINUS_INF, PLUS_INF, ExtRational, rat

Domain = Union[MetricGraph, ExtendedGraph]


def _finite_part(domain: Domain) -> MetricGraph:
    return domain.finite if isinstance(domain, ExtendedGraph) else domain


def _canonical(domain: Domain, pt: GraphPoint) -> GraphPoint:
    return domain.canonical_point(pt)


class Divisor:
    """Immutable formal sum of canonical graph points."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[tuple[GraphPoint, int]]):
        acc: dict[GraphPoint, int] = {}
        for pt, c in terms:
            if c == 0:
                continue
            acc[pt] = acc.get(pt, 0) + int(c)
        self._terms = tuple(
            sorted(((p, c) for p, c in acc.items() if c != 0), key=lambda t: t[0])
        )

    @staticmethod
    def zero() -> "Divisor":
        return Divisor(())

    @property
    def terms(self) -> tuple[tuple[GraphPoint, int], ...]:
        return self._terms

    def coeff(self, pt: GraphPoint) -> int:
        for p, c in self._terms:
            if p == pt:
                return c
        return 0

    def support(self) -> list[GraphPoint]:
        return [p for p, _ in self._terms]

    def degree(self) -> int:
        return sum(c for _, c in self._terms)

    def is_effective(self) -> bool:
        return all(c > 0 for _, c in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other: "Divisor") -> "Divisor":
        return Divisor(self._terms + other._terms)

    def __sub__(self, other: "Divisor") -> "Divisor":
        return Divisor(self._terms + tuple((p, -c) for p, c in other._terms))

    def __neg__(self) -> "Divisor":
        return Divisor(tuple((p, -c) for p, c in self._terms))

    def __rmul__(self, k: int) -> "Divisor":
        return Divisor(tuple((p, k * c) for p, c in self._terms))

    def __eq__(self, other):
        return isinstance(other, Divisor) and self._terms == other._terms

    def __hash__(self):
        return hash(self._terms)

    def __repr__(self):
        if not self._terms:
            return "Divisor(0)"
        bits = []
        for p, c in self._terms:
            where = p.vertex if p.is_vertex else f"{p.edge}@{p.offset}"
            bits.append(f"{c:+d}({where})")
        return "Divisor(" + " ".join(bits) + ")"


def make_divisor(domain: Domain, items: Iterable[tuple[GraphPoint, int]]) -> Divisor:
    """Canonicalize points against a graph and collect coefficients."""
    return Divisor(((_canonical(domain, p), c) for p, c in items))


@dataclass(frozen=True)
class EdgeProfile:
    """PL restriction to one finite edge, in the a -> b frame."""

    start: Fraction
    breaks: tuple[Fraction, ...]
    slopes: tuple[int, ...]

    def __post_init__(self):
        if len(self.slopes) != len(self.breaks) + 1:
            raise DiscontinuousFunction("profile needs len(breaks)+1 slopes")
        if any(self.breaks[i] >= self.breaks[i + 1] for i in range(len(self.breaks) - 1)):
            raise DiscontinuousFunction("breakpoints must be strictly increasing")
        if any(not isinstance(s, int) for s in self.slopes):
            raise DiscontinuousFunction("slopes must be integers")

    def value_at(self, off: Fraction) -> Fraction:
        val = self.start
        prev = Fraction(0)
        for i, brk in enumerate(self.breaks):
            if off <= brk:
                return val + self.slopes[i] * (off - prev)
            val += self.slopes[i] * (brk - prev)
            prev = brk
        return val + self.slopes[-1] * (off - prev)

    def end_value(self, length: Fraction) -> Fraction:
        return self.value_at(length)

    def slope_at(self, off: Fraction, side: int = +1) -> int:
        """Slope on the piece to the right (side=+1) or left (side=-1) of off."""
        for i, brk in enumerate(self.breaks):
            if off < brk or (off == brk and side < 0):
                return self.slopes[i]
        return self.slopes[-1]

    def reversed(self, length: Fraction) -> "EdgeProfile":
        return EdgeProfile(
            self.end_value(length),
            tuple(length - b for b in reversed(self.breaks)),
            tuple(-s for s in reversed(self.slopes)),
        )

    def sub_profile(self, lo: Fraction, hi: Fraction) -> "EdgeProfile":
        inner = tuple(b - lo for b in self.breaks if lo < b < hi)
        slopes = []
        for b, s in zip(self.breaks + (None,), self.slopes):
            if b is not None and b <= lo:
                continue
            slopes.append(s)
            if b is None or b >= hi:
                break
        return EdgeProfile(self.value_at(lo), inner, tuple(slopes))


@dataclass(frozen=True)
class RayProfile:
    """PL restriction to an infinite leaf edge: a single eventual slope."""

    start: Fraction
    slope: int

    def value_at(self, off: Fraction) -> Fraction:
        return self.start + self.slope * off

    def leaf_value(self) -> ExtRational:
        if self.slope > 0:
            return PLUS_INF
        if self.slope < 0:
            return MINUS_INF
        return ExtRational.finite(self.start)


class PLFunction:
    """Continuous piecewise linear function with integer slopes."""

    def __init__(
        self,
        domain: Domain,
        edge_profiles: Mapping[str, EdgeProfile],
        ray_profiles: Mapping[str, RayProfile] | None = None,
        _validated: bool = False,
    ):
        self.domain = domain
        fin = _finite_part(domain)
        self.edge_profiles = dict(edge_profiles)
        self.ray_profiles = dict(ray_profiles or {})
        if set(fin.edges) != set(self.edge_profiles):
            missing = set(fin.edges) ^ set(self.edge_profiles)
            raise DiscontinuousFunction(f"edge/profile mismatch: {sorted(missing)}")
        if isinstance(domain, ExtendedGraph):
            if set(domain.rays) != set(self.ray_profiles):
                missing_r = set(domain.rays) ^ set(self.ray_profiles)
                raise DiscontinuousFunction(f"ray/profile mismatch: {sorted(missing_r)}")
        self._vertex_values: dict[str, Fraction] = {}
        self._compute_vertex_values(check=not _validated)

    def _compute_vertex_values(self, check: bool):
        fin = _finite_part(self.domain)
        vals = self._vertex_values
        for eid, e in fin.edges.items():
            prof = self.edge_profiles[eid]
            for v, val in ((e.a, prof.start), (e.b, prof.end_value(e.length))):
                if v in vals:
                    if check and vals[v] != val:
                        raise DiscontinuousFunction(
                            f"value mismatch at vertex {v!r}: {vals[v]} vs {val}"
                        )
                else:
                    vals[v] = val
        if isinstance(self.domain, ExtendedGraph):
            if not fin.edges:
                # single-vertex finite part: anchor from ray starts
                for rid, r in self.domain.rays.items():
                    vals.setdefault(r.attach, self.ray_profiles[rid].start)
            if check:
                for rid, r in self.domain.rays.items():
                    if self.ray_profiles[rid].start != vals[r.attach]:
                        raise DiscontinuousFunction(
                            f"ray {rid!r} start disagrees with vertex {r.attach!r}"
                        )

    # -- evaluation ---------------------------------------------------------------

    def vertex_value(self, v: str) -> Fraction:
        return self._vertex_values[v]

    def value(self, pt: GraphPoint):
        """Value at a point; ExtRational at infinite vertices."""
        cpt = _canonical(self.domain, pt)
        if cpt.is_vertex:
            if isinstance(self.domain, ExtendedGraph) and self.domain.is_infinite_vertex(
                cpt.vertex
            ):
                return self.ray_profiles[self.domain.ray_at_leaf(cpt.vertex).id].leaf_value()
            return self._vertex_values[cpt.vertex]
        if cpt.edge in self.ray_profiles:
            return self.ray_profiles[cpt.edge].value_at(cpt.offset)
        return self.edge_profiles[cpt.edge].value_at(cpt.offset)

    # -- divisor ---------------------------------------------------------------------

    def divisor(self) -> Divisor:
        fin = _finite_part(self.domain)
        terms: list[tuple[GraphPoint, int]] = []
        vertex_acc: dict[str, int] = {v: 0 for v in fin.vertices}
        for eid, e in fin.edges.items():
            prof = self.edge_profiles[eid]
            vertex_acc[e.a] += prof.slopes[0]
            vertex_acc[e.b] -= prof.slopes[-1]
            for i, brk in enumerate(prof.breaks):
                jump = prof.slopes[i + 1] - prof.slopes[i]
                if jump:
                    terms.append((GraphPoint.on_edge(eid, brk), jump))
        if isinstance(self.domain, ExtendedGraph):
            for rid, r in self.domain.rays.items():
                s = self.ray_profiles[rid].slope
                vertex_acc[r.attach] += s
                if s:
                    terms.append((GraphPoint.at_vertex(r.leaf), -s))
        for v, c in vertex_acc.items():
            if c:
                terms.append((GraphPoint.at_vertex(v), c))
        return Divisor(terms)

    # -- algebra -----------------------------------------------------------------------

    def _zip(self, other: "PLFunction", op):
        if self.domain is not other.domain:
            raise DiscontinuousFunction("functions live on different graphs")
        fin = _finite_part(self.domain)
        profiles = {}
        for eid in fin.edges:
            pa, pb = self.edge_profiles[eid], other.edge_profiles[eid]
            breaks = tuple(sorted(set(pa.breaks) | set(pb.breaks)))
            samples = (Fraction(0),) + breaks
            slopes = tuple(op(pa.slope_at(x, +1), pb.slope_at(x, +1)) for x in samples)
            profiles[eid] = EdgeProfile(op(pa.start, pb.start), breaks, slopes)
        rays = {
            rid: RayProfile(
                op(self.ray_profiles[rid].start, other.ray_profiles[rid].start),
                op(self.ray_profiles[rid].slope, other.ray_profiles[rid].slope),
            )
            for rid in self.ray_profiles
        }
        return PLFunction(self.domain, profiles, rays, _validated=True)

    def __add__(self, other: "PLFunction") -> "PLFunction":
        return self._zip(other, lambda x, y: x + y)

    def __sub__(self, other: "PLFunction") -> "PLFunction":
        return self._zip(other, lambda x, y: x - y)

    def __neg__(self) -> "PLFunction":
        profiles = {
            eid: EdgeProfile(-p.start, p.breaks, tuple(-s for s in p.slopes))
            for eid, p in self.edge_profiles.items()
        }
        rays = {rid: RayProfile(-p.start, -p.slope) for rid, p in self.ray_profiles.items()}
        return PLFunction(self.domain, profiles, rays, _validated=True)

    def add_constant(self, c) -> "PLFunction":
        c = rat(c)
        profiles = {
            eid: EdgeProfile(p.start + c, p.breaks, p.slopes)
            for eid, p in self.edge_profiles.items()
        }
        rays = {rid: RayProfile(p.start + c, p.slope) for rid, p in self.ray_profiles.items()}
        return PLFunction(self.domain, profiles, rays, _validated=True)

    # -- transport across refinements -----------------------------------------------------

    def transport(
        self, new_domain: Domain, new_ray_slopes: Mapping[str, int] | None = None
    ) -> "PLFunction":
        """Re-express this function on a refinement of its domain.

        Rays of the new domain that do not descend from the old one get the
        slope given in `new_ray_slopes` (default 0, a constant extension).
        """
        new_ray_slopes = dict(new_ray_slopes or {})
        new_fin = _finite_part(new_domain)
        profiles: dict[str, EdgeProfile] = {}
        rays: dict[str, RayProfile] = {}

        def seg_iter(domain, eid):
            if isinstance(domain, ExtendedGraph):
                return domain.segments_of(eid)
            return [("edge", cid, lo, hi) for cid, lo, hi in domain.segments_of(eid)]

        for eid, prof in self.edge_profiles.items():
            for kind, cid, lo, hi in seg_iter(new_domain, eid):
                if kind == "edge":
                    profiles[cid] = prof.sub_profile(lo, hi)
                else:  # pragma: no cover - finite edges never become rays
                    raise UnknownEdge(f"edge {eid!r} resolved to a ray")
        for rid, rprof in self.ray_profiles.items():
            for kind, cid, lo, hi in seg_iter(new_domain, rid):
                if kind == "ray":
                    rays[cid] = RayProfile(rprof.value_at(lo), rprof.slope)
                else:
                    profiles[cid] = EdgeProfile(rprof.value_at(lo), (), (rprof.slope,))
        if isinstance(new_domain, ExtendedGraph):
            for rid, r in new_domain.rays.items():
                if rid not in rays:
                    start = None
                    # anchor from the finite profiles at the attach vertex
                    for eid2, e2 in new_fin.edges.items():
                        if e2.a == r.attach:
                            start = profiles[eid2].start
                            break
                        if e2.b == r.attach:
                            start = profiles[eid2].end_value(e2.length)
                            break
                    if start is None:
                        start = next(iter(rays.values())).start if rays else Fraction(0)
                    rays[rid] = RayProfile(start, new_ray_slopes.get(rid, 0))
        return PLFunction(new_domain, profiles, rays)


def constant_function(domain: Domain, value=0) -> PLFunction:
    value = rat(value)
    fin = _finite_part(domain)
    profiles = {eid: EdgeProfile(value, (), (0,)) for eid in fin.edges}
    rays = {}
    if isinstance(domain, ExtendedGraph):
        rays = {rid: RayProfile(value, 0) for rid in domain.rays}
    return PLFunction(domain, profiles, rays, _validated=True)


def trapezoid(domain: Domain, edge_id: str, offsets: Sequence, slope: int = 1) -> PLFunction:
    """Zero function plus a trapezoid bump supported in one edge interior.

    Rises with the given slope on [x1,x2], plateaus, and returns on
    [x3,x4]; its divisor is slope * (x1 - x2 - x3 + x4).
    """
    x1, x2, x3, x4 = (rat(x) for x in offsets)
    fin = _finite_part(domain)
    if edge_id not in fin.edges:
        raise UnknownEdge(f"trapezoid edge {edge_id!r} must be a current edge")
    length = fin.edges[edge_id].length
    if not (0 < x1 < x2 < x3 < x4 < length):
        raise InvalidPillars(f"offsets {offsets} not interior-monotone on {edge_id!r}")
    if x2 - x1 != x4 - x3:
        raise InvalidPillars("trapezoid needs equal rise and fall lengths")
    base = constant_function(domain, 0)
    profiles = dict(base.edge_profiles)
    profiles[edge_id] = EdgeProfile(
        Fraction(0), (x1, x2, x3, x4), (0, slope, 0, -slope, 0)
    )
    return PLFunction(domain, profiles, base.ray_profiles, _validated=True)


def divisor_of(f: PLFunction) -> Divisor:
    return f.divisor()


# -- principality ---------------------------------------------------------------------


@dataclass
class PrincipalityResult:
    principal: bool
    witness: Optional[PLFunction] = None
    obstruction: Optional[tuple[str, Fraction]] = None

    def __bool__(self):
        return self.principal


def _edge_support(graph: MetricGraph, d: Divisor):
    """Split canonical support into per-vertex and per-edge-interior parts."""
    vertex_coeffs: dict[str, int] = {}
    interior: dict[str, list[tuple[Fraction, int]]] = {}
    for pt, c in d.terms:
        if pt.is_vertex:
            vertex_coeffs[pt.vertex] = vertex_coeffs.get(pt.vertex, 0) + c
        else:
            interior.setdefault(pt.edge, []).append((pt.offset, c))
    for lst in interior.values():
        lst.sort()
    return vertex_coeffs, interior


def _solve_slopes(graph: MetricGraph, d: Divisor):
    """Solve for the first-piece slope of every edge; None only for deg != 0."""
    dv, interior = _edge_support(graph, d)
    ids = graph.edge_ids()
    index = {eid: i for i, eid in enumerate(ids)}
    n = len(ids)
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    # vertex equations
    for v in graph.vertices:
        row = [Fraction(0)] * n
        const = Fraction(0)
        for eid, _w in graph.adjacency[v]:
            e = graph.edges[eid]
            if e.a == v:
                row[index[eid]] += 1
            if e.b == v:
                row[index[eid]] -= 1
                const += sum(c for _x, c in interior.get(eid, ()))
        rows.append(row)
        rhs.append(Fraction(dv.get(v, 0)) + const)
    # cycle equations
    tree = graph.canonical_spanning_tree()
    comp = [eid for eid in ids if eid not in set(tree)]
    for ceid in comp:
        cyc = graph.fundamental_cycle(tree, ceid)
        row = [Fraction(0)] * n
        const = Fraction(0)
        for eid, coeff in cyc.items():
            e = graph.edges[eid]
            row[index[eid]] += coeff * e.length
            for x, c in interior.get(eid, ()):
                const -= coeff * c * (e.length - x)
        rows.append(row)
        rhs.append(const)
    sol = solve_linear(rows, rhs)
    if sol is None:
        return None, ids, interior
    return dict(zip(ids, sol)), ids, interior


def is_principal(
    graph: MetricGraph, d: Divisor, basepoint: GraphPoint | None = None
) -> PrincipalityResult:
    """Decide principality; on success the result carries a witness with
    value 0 at the basepoint (default: the lexicographically least vertex)."""
    if d.degree() != 0:
        raise NonzeroDegree(f"divisor has degree {d.degree()}")
    d = make_divisor(graph, d.terms)  # re-anchor points after any refinement
    slopes, ids, interior = _solve_slopes(graph, d)
    assert slopes is not None, "degree-zero systems are always solvable"
    for eid in ids:
        if slopes[eid].denominator != 1:
            return PrincipalityResult(False, obstruction=(eid, slopes[eid]))
    witness = _integrate(graph, slopes, interior, basepoint, Fraction(0))
    return PrincipalityResult(True, witness=witness)


def _integrate(
    graph: MetricGraph,
    slopes: Mapping[str, Fraction],
    interior: Mapping[str, list[tuple[Fraction, int]]],
    basepoint: GraphPoint | None,
    value: Fraction,
) -> PLFunction:
    def edge_integral(eid: str) -> Fraction:
        e = graph.edges[eid]
        total = slopes[eid] * e.length
        for x, c in interior.get(eid, ()):
            total += c * (e.length - x)
        return total

    vals: dict[str, Fraction] = {graph.vertices[0]: Fraction(0)}
    stack = [graph.vertices[0]]
    while stack:
        v = stack.pop()
        for eid, w in graph.adjacency[v]:
            if w in vals:
                continue
            e = graph.edges[eid]
            delta = edge_integral(eid)
            vals[w] = vals[v] + (delta if e.a == v else -delta)
            stack.append(w)
    profiles: dict[str, EdgeProfile] = {}
    for eid, e in graph.edges.items():
        pts = interior.get(eid, ())
        breaks = tuple(x for x, _c in pts)
        slope_list = [int(slopes[eid])]
        for _x, c in pts:
            slope_list.append(slope_list[-1] + c)
        profiles[eid] = EdgeProfile(vals[e.a], breaks, tuple(slope_list))
    f = PLFunction(graph, profiles, {}, _validated=True)
    if basepoint is None:
        basepoint = GraphPoint.at_vertex(graph.vertices[0])
    shift = rat(value) - f.value(basepoint)
    return f.add_constant(shift) if shift else f


def construct_pl_with_divisor(
    graph: MetricGraph,
    d: Divisor,
    basepoint: GraphPoint | None = None,
    value=0,
) -> PLFunction:
    result = is_principal(graph, d, basepoint)
    if not result.principal:
        raise NotPrincipal(f"divisor is not principal; obstruction {result.obstruction}")
    f = result.witness
    shift = rat(value) - (
        f.value(basepoint) if basepoint is not None else Fraction(0)
    )
    return f.add_constant(shift) if shift else f


def cor34_certificate(
    graph: MetricGraph,
    d: Divisor,
    complement_edges: Sequence[str],
    pillar_points: Sequence[Sequence[GraphPoint]],
    basepoint: GraphPoint | None = None,
) -> PLFunction:
    """Witness for d plus the pillar correction divisor.

    Requires d principal of degree zero, the given edges a spanning tree
    complement, and a valid four-point pillar tuple interior to each of
    them; returns the witness of
    d + sum_i (p_i1 + p_i4 - p_i2 - p_i3).
    """
    check = graph.spanning_tree_complement(complement_edges)
    if not check.ok:
        raise NotComplement(f"edges {list(complement_edges)} do not close a spanning tree")
    if len(pillar_points) != len(complement_edges):
        raise InvalidPillars("one pillar tuple required per complement edge")
    if d.degree() != 0:
        raise NonzeroDegree(f"divisor has degree {d.degree()}")
    if not is_principal(graph, d).principal:
        raise NotPrincipal("base divisor is not principal")
    correction_terms: list[tuple[GraphPoint, int]] = []
    for eid, pts in zip(complement_edges, pillar_points):
        if not validate_pillar_points(graph, eid, pts):
            raise InvalidPillars(f"invalid pillar tuple on edge {eid!r}")
        p1, p2, p3, p4 = (graph.canonical_point(p) for p in pts)
        correction_terms += [(p1, 1), (p2, -1), (p3, -1), (p4, 1)]
    assembled = d + Divisor(correction_terms)
    return construct_pl_with_divisor(graph, assembled, basepoint, 0)
