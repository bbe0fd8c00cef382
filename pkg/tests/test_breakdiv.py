import random
from fractions import Fraction
from itertools import combinations_with_replacement

import pytest

from tropicurve.breakdiv import break_divisor_decompose, is_break_divisor
from tropicurve.chipfiring import (
    chips_of,
    dhar_burnt,
    is_q_reduced,
    laplacian_equivalent,
    lattice_model,
    lattice_spacing,
    q_reduced,
    DiscreteGraph,
)
from tropicurve.divisors import Divisor, divisor_of, is_principal, make_divisor
from tropicurve.errors import WrongDegree
from tropicurve.graphs import GraphPoint, build_graph

V = GraphPoint.at_vertex
P = GraphPoint.on_edge


def circle(length=3):
    return build_graph(["v"], [("loop", "v", "v", length)])


def theta(l1=1, l2=1, l3=1):
    return build_graph(
        ["u", "v"],
        [("e1", "u", "v", l1), ("e2", "u", "v", l2), ("e3", "u", "v", l3)],
    )


def two_triangles():
    return build_graph(
        ["a", "b", "c", "d", "e", "f"],
        [
            ("ab", "a", "b", 1),
            ("bc", "b", "c", 1),
            ("ca", "c", "a", 1),
            ("cd", "c", "d", 1),
            ("de", "d", "e", 1),
            ("ef", "e", "f", 1),
            ("fd", "f", "d", 1),
        ],
    )


class TestDiscrete:
    def test_cycle_classes(self):
        dg = DiscreteGraph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        one_at = lambda k: [1 if i == k else 0 for i in range(4)]
        assert laplacian_equivalent(dg, one_at(1), one_at(1))
        assert not laplacian_equivalent(dg, one_at(1), one_at(3))
        # firing vertex 1 relates (0,2,0,0) and (1,0,1,0)
        assert laplacian_equivalent(dg, [0, 2, 0, 0], [1, 0, 1, 0])

    def test_q_reduced_fixed_point(self):
        dg = DiscreteGraph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        chips = [0, 0, 1, 0]
        assert is_q_reduced(dg, chips, 0)
        assert q_reduced(dg, chips, 0) == chips

    def test_q_reduced_handles_debt(self):
        dg = DiscreteGraph(3, [(0, 1), (1, 2), (2, 0)])
        chips = [3, -1, 0]
        red = q_reduced(dg, chips, 0)
        assert sum(red) == 2
        assert all(c >= 0 for c in red[1:])
        assert is_q_reduced(dg, red, 0)
        assert laplacian_equivalent(dg, chips, red)

    def test_dhar_stalls_on_non_reduced(self):
        dg = DiscreteGraph(2, [(0, 1), (0, 1), (0, 1)])  # discrete theta
        assert len(dhar_burnt(dg, [0, 3], 0)) == 1
        assert len(dhar_burnt(dg, [0, 2], 0)) == 2

    def test_lattice_model_of_circle(self):
        g = circle(3)
        dg, locate = lattice_model(g, Fraction(1, 2))
        assert dg.n == 6
        assert dg.genus() == 1
        assert locate(P("loop", Fraction(1, 2))) != locate(P("loop", 1))


class TestIsBreak:
    def test_circle_single_point(self):
        g = circle(3)
        for off in (0, Fraction(1, 2), 1, 2):
            b = make_divisor(g, [(P("loop", off), 1)])
            assert is_break_divisor(g, b).ok

    def test_theta_two_on_same_edge_interior(self):
        g = theta()
        b = make_divisor(g, [(P("e1", Fraction(1, 3)), 1), (P("e1", Fraction(2, 3)), 1)])
        # oracle: enumerate complements (pairs of edges); no pair assigns
        # two interior points of e1 to distinct edges
        pairs = list(g.all_complements())
        assert len(pairs) == 3
        assert not is_break_divisor(g, b).ok

    def test_theta_two_on_distinct_edges(self):
        g = theta()
        b = make_divisor(g, [(P("e1", Fraction(1, 3)), 1), (P("e2", Fraction(2, 3)), 1)])
        chk = is_break_divisor(g, b)
        assert chk.ok
        assert chk.certificate in {("e1", "e2")}

    def test_vertex_points_can_split_multiplicity(self):
        g = theta()
        b = make_divisor(g, [(V("u"), 2)])
        assert is_break_divisor(g, b).ok

    def test_wrong_degree(self):
        g = theta()
        assert not is_break_divisor(g, make_divisor(g, [(V("u"), 1)])).ok


class TestDecompose:
    def test_circle_point_is_its_own_break(self):
        g = circle(3)
        p = P("loop", Fraction(1, 2))
        b, f = break_divisor_decompose(g, make_divisor(g, [(p, 1)]))
        assert b == make_divisor(g, [(p, 1)])
        assert divisor_of(f).is_zero()

    def test_circle_two_p_minus_q(self):
        g = circle(3)
        p, q = P("loop", Fraction(1, 2)), P("loop", Fraction(5, 2))
        d = make_divisor(g, [(p, 2), (q, -1)])
        b, f = break_divisor_decompose(g, d)
        assert is_break_divisor(g, b).ok
        assert is_principal(g, d - b).principal
        assert divisor_of(f) == d - b
        # brute-force oracle over the discretization lattice
        spacing = Fraction(1, 2)
        hits = []
        steps = int(Fraction(3) / spacing)
        for k in range(steps):
            cand = make_divisor(g, [(P("loop", spacing * k), 1)])
            if is_principal(g, d - cand).principal:
                hits.append(cand)
        assert hits == [b]

    def test_theta_double_vertex(self):
        g = theta(1, 1, 1)
        d = make_divisor(g, [(V("v"), 2)])
        b, f = break_divisor_decompose(g, d)
        assert is_break_divisor(g, b).ok
        assert is_principal(g, d - b).principal
        # oracle: scan all effective degree-2 divisors on the half-integer lattice
        pts = [V("u"), V("v")]
        for eid in sorted(g.edges):
            e = g.edges[eid]
            k = 1
            while k * Fraction(1, 2) < e.length:
                pts.append(P(eid, k * Fraction(1, 2)))
                k += 1
        hits = set()
        for s, t in combinations_with_replacement(range(len(pts)), 2):
            cand = make_divisor(g, [(pts[s], 1)]) + make_divisor(g, [(pts[t], 1)])
            if is_break_divisor(g, cand).ok and is_principal(g, d - cand).principal:
                hits.add(cand)
        assert hits == {b}

    def test_two_triangle_graph_frozen(self):
        # hand-derived by chip-firing: 2a ~ b + d and no other break divisor
        g = two_triangles()
        d = make_divisor(g, [(V("a"), 2)])
        b, _f = break_divisor_decompose(g, d)
        assert b == make_divisor(g, [(V("b"), 1), (V("d"), 1)])

    def test_genus_zero_returns_empty(self):
        g = build_graph(["a", "b", "c"], [("e1", "a", "b", 1), ("e2", "b", "c", 2)])
        d = Divisor.zero()
        b, f = break_divisor_decompose(g, d)
        assert b.is_zero()
        assert divisor_of(f).is_zero()

    def test_wrong_degree_raises(self):
        g = circle(3)
        with pytest.raises(WrongDegree):
            break_divisor_decompose(g, make_divisor(g, [(V("v"), 2)]))

    def test_uniqueness_randomized(self):
        rng = random.Random(13)
        g = theta(Fraction(1, 2), Fraction(3, 4), 1)
        lattice = [V("u"), V("v")]
        for eid in sorted(g.edges):
            e = g.edges[eid]
            k = 1
            while k * Fraction(1, 4) < e.length:
                lattice.append(P(eid, k * Fraction(1, 4)))
                k += 1
        for _ in range(12):
            terms = [(rng.choice(lattice), rng.choice([1, 1, 2, -1])) for _ in range(3)]
            d = make_divisor(g, terms)
            deficit = 2 - d.degree()
            d = d + make_divisor(g, [(rng.choice(lattice), deficit)])
            if d.degree() != 2:
                continue
            b, f = break_divisor_decompose(g, d)
            assert is_break_divisor(g, b).ok
            assert divisor_of(f) == d - b
