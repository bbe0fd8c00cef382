"""Break divisors: recognition and the canonical decomposition.

Every degree-g divisor class on a metric graph contains exactly one break
divisor, an effective divisor placing one point on each closed edge of some
spanning-tree complement.  The decomposition is computed exactly: for each
complement set of the model, the positions of the candidate points satisfy
an affine lattice condition in the cycle-space coordinates (the Abel-Jacobi
image of the difference must vanish), which reduces to enumerating integer
points of a box.  The chip-firing layer independently verifies the result
on the discretization lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import chipfiring
from .divisors import (
    Divisor,
    PLFunction,
    construct_pl_with_divisor,
    is_principal,
    make_divisor,
)
from .errors import WrongDegree
from .graphs import GraphPoint, MetricGraph
from .linalg import integer_points_in_box

VERIFY_LATTICE_CAP = 2000  # max discrete vertices for the chip-firing cross-check


@dataclass(frozen=True)
class BreakCheck:
    ok: bool
    certificate: Optional[tuple[str, ...]] = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def is_break_divisor(graph: MetricGraph, b: Divisor) -> BreakCheck:
    """Whether b places one point (with multiplicity) on each closed edge of
    a spanning-tree complement; the certificate is the edge set."""
    b = make_divisor(graph, b.terms)
    if not b.is_effective() and not b.is_zero():
        return BreakCheck(False, reason="not effective")
    g = graph.betti_number()
    if b.degree() != g:
        return BreakCheck(False, reason=f"degree {b.degree()} != genus {g}")
    if g == 0:
        return BreakCheck(True, certificate=())
    points: list[GraphPoint] = []
    for pt, c in b.terms:
        points.extend([pt] * c)
    candidates: list[list[str]] = []
    for pt in points:
        if pt.is_vertex:
            candidates.append(sorted(graph.incident_edges(pt.vertex)))
        else:
            candidates.append([pt.edge])
    order = sorted(range(g), key=lambda i: len(candidates[i]))
    chosen: list[str] = []
    used: set[str] = set()

    def assign(k: int) -> Optional[tuple[str, ...]]:
        if k == g:
            edge_set = sorted(used)
            if graph.spanning_tree_complement(edge_set).ok:
                return tuple(edge_set)
            return None
        for eid in candidates[order[k]]:
            if eid in used:
                continue
            used.add(eid)
            chosen.append(eid)
            found = assign(k + 1)
            if found is not None:
                return found
            chosen.pop()
            used.remove(eid)
        return None

    cert = assign(0)
    if cert is None:
        return BreakCheck(False, reason="no complement assignment")
    return BreakCheck(True, certificate=cert)


def _integer_chain(graph: MetricGraph, d: Divisor) -> dict[str, int]:
    """Integer 1-chain with boundary d (all support must be at vertices)."""
    root = graph.vertices[0]
    tree = graph.canonical_spanning_tree()
    adj = {v: [] for v in graph.vertices}
    for eid in tree:
        e = graph.edges[eid]
        adj[e.a].append((eid, e.b))
        adj[e.b].append((eid, e.a))
    prev = {root: None}
    order = [root]
    queue = [root]
    while queue:
        v = queue.pop(0)
        for eid, w in adj[v]:
            if w not in prev:
                prev[w] = (v, eid)
                order.append(w)
                queue.append(w)
    chain: dict[str, int] = {}
    for pt, c in d.terms:
        assert pt.is_vertex, "chain construction needs vertex-supported divisors"
        v = pt.vertex
        while prev[v] is not None:
            u, eid = prev[v]
            e = graph.edges[eid]
            chain[eid] = chain.get(eid, 0) + (c if e.b == v else -c)
            v = u
    return {k: x for k, x in chain.items() if x}


def _cycle_pairing(graph: MetricGraph, chain, cycle) -> Fraction:
    total = Fraction(0)
    for eid, coeff in cycle.items():
        if eid in chain:
            total += graph.edges[eid].length * chain[eid] * coeff
    return total


def break_divisor_decompose(
    graph: MetricGraph, d: Divisor
) -> tuple[Divisor, PLFunction]:
    """The unique break divisor B with d - B principal, plus the witness.

    For genus zero the break divisor is empty and the witness exhibits the
    principality of d itself.
    """
    d = make_divisor(graph, d.terms)
    g = graph.betti_number()
    if d.degree() != g:
        raise WrongDegree(f"divisor degree {d.degree()} != genus {g}")
    if g == 0:
        return Divisor.zero(), construct_pl_with_divisor(graph, d)
    # model: subdivide at the interior support so integer chains exist
    interior = [pt for pt in d.support() if not pt.is_vertex]
    model = graph.subdivide_many(interior)
    dm = make_divisor(model, d.terms)
    # map model edges back to the caller's frames
    back: dict[str, tuple[str, Fraction]] = {}
    for eid in graph.edges:
        for sub, lo, _hi in model.segments_of(eid):
            back[sub] = (eid, lo)

    found: list[tuple[Divisor, tuple]] = []
    for comp in model.all_complements():
        check = model.spanning_tree_complement(list(comp))
        tree = check.tree
        cycles = [model.fundamental_cycle(tree, eid) for eid in comp]
        base = Divisor([(GraphPoint.at_vertex(model.edges[eid].a), 1) for eid in comp])
        sigma = _integer_chain(model, dm - base)
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
        lengths = [model.edges[eid].length for eid in comp]
        columns = [[gram[i][j] for i in range(g)] for j in range(g)]
        lower = [w[i] - lengths[i] for i in range(g)]
        upper = [w[i] for i in range(g)]
        for k in integer_points_in_box(columns, lower, upper):
            t = [w[i] - sum(columns[j][i] * k[j] for j in range(g)) for i in range(g)]
            terms = []
            for i, eid in enumerate(comp):
                orig, lo = back[eid]
                terms.append((GraphPoint.on_edge(orig, lo + t[i]), 1))
            cand = make_divisor(graph, terms)
            found.append((cand, comp))
    assert found, "every degree-g class contains a break divisor"
    divisors = {cand for cand, _ in found}
    assert len(divisors) == 1, f"break divisor not unique: {divisors}"
    b = next(iter(divisors))
    res = is_principal(graph, d - b)
    assert res.principal, "decomposition produced a non-principal difference"
    assert is_break_divisor(graph, b).ok, "decomposition produced a non-break divisor"
    _verify_on_lattice(graph, d, b)
    return b, res.witness


def _verify_on_lattice(graph: MetricGraph, d: Divisor, b: Divisor) -> None:
    """Cross-check d ~ b by chip-firing on the discretization lattice."""
    spacing = chipfiring.lattice_spacing(graph, [d, b])
    size = sum(e.length / spacing for e in graph.edges.values())
    if size > VERIFY_LATTICE_CAP:
        return
    dg, locate = chipfiring.lattice_model(graph, spacing)
    chips_d = chipfiring.chips_of(dg, locate, d)
    chips_b = chipfiring.chips_of(dg, locate, b)
    assert chipfiring.laplacian_equivalent(dg, chips_d, chips_b), (
        "lattice chip-firing check failed"
    )
