import random
from fractions import Fraction

import pytest

from tropicurve.complexes import check_balancing, check_smooth
from tropicurve.divisors import (
    EdgeProfile,
    PLFunction,
    RayProfile,
    divisor_of,
    trapezoid,
)
from tropicurve.errors import (
    ContractedEdge,
    DivisorCollision,
    EmptyCoordinates,
    InvalidCoordinate,
    NonSimplePoint,
)
from tropicurve.graphs import GraphPoint, build_extended, build_graph
from tropicurve.rationals import MINUS_INF, PLUS_INF
from tropicurve.tropicalize import (
    Embedding,
    extend_embedding,
    is_faithful_function,
    is_fully_faithful,
    stretching_factor,
    tropicalize,
)

from randgen import random_graph

V = GraphPoint.at_vertex
P = GraphPoint.on_edge


def line_embedding(length=2):
    """Path with arclength coordinate, rays absorbing the divisor."""
    g = build_graph(["a", "b"], [("e", "a", "b", length)])
    ext = build_extended(g, [("ra", V("a")), ("rb", V("b"))])
    f = PLFunction(
        ext,
        {"e": EdgeProfile(Fraction(0), (), (1,))},
        {"ra": RayProfile(Fraction(0), -1), "rb": RayProfile(Fraction(length), 1)},
    )
    return Embedding(ext, [f])


def fold_embedding():
    """Circle folded onto a segment by one coordinate; weight 2 image."""
    g = build_graph(["v"], [("loop", "v", "v", 2)])
    ext = build_extended(g, [("rv", V("v")), ("rm", V("loop.mid"))])
    f = PLFunction(
        ext,
        {
            "loop.0": EdgeProfile(Fraction(0), (), (1,)),
            "loop.1": EdgeProfile(Fraction(1), (), (-1,)),
        },
        {"rv": RayProfile(Fraction(0), -2), "rm": RayProfile(Fraction(1), 2)},
    )
    return Embedding(ext, [f])


class TestEmbedding:
    def test_coordinate_must_be_harmonic(self):
        g = build_graph(["a", "b"], [("e", "a", "b", 2)])
        ext = build_extended(g, [])
        bad = PLFunction(ext, {"e": EdgeProfile(Fraction(0), (), (1,))}, {})
        with pytest.raises(InvalidCoordinate):
            Embedding(ext, [bad])

    def test_trapezoid_needs_no_rays(self):
        # a trapezoid is not harmonic either; it needs the extension step
        g = build_graph(["a", "b"], [("e", "a", "b", 10)])
        ext = build_extended(g, [])
        f = trapezoid(ext, "e", (1, 2, 7, 8))
        with pytest.raises(InvalidCoordinate):
            Embedding(ext, [f])

    def test_empty_coords_raise_on_tropicalize(self):
        g = build_graph(["a", "b"], [("e", "a", "b", 2)])
        emb = Embedding(build_extended(g, []), [])
        with pytest.raises(EmptyCoordinates):
            tropicalize(emb)


class TestTropicalize:
    def test_line_embedding_image(self):
        curve, emap = tropicalize(line_embedding(2))
        assert curve.ambient_dim == 1
        # one bounded edge of lattice length 2 and two rays
        bounded = [e for e in curve.edges.values() if e.length is not None]
        rays = [e for e in curve.edges.values() if e.length is None]
        assert len(bounded) == 1 and bounded[0].length == 2
        assert bounded[0].weight == 1
        assert len(rays) == 2
        assert not emap.contracted

    def test_fold_has_weight_two(self):
        curve, emap = tropicalize(fold_embedding())
        bounded = [e for e in curve.edges.values() if e.length is not None]
        assert len(bounded) == 1
        assert bounded[0].weight == 2
        assert bounded[0].length == 1
        # the two half-loops both map onto it
        srcs = emap.edge_sources[bounded[0].id]
        assert len(srcs) == 2

    def test_balancing_asserted_and_reported(self):
        curve, _ = tropicalize(fold_embedding())
        assert check_balancing(curve).balanced

    def test_contracted_edge_recorded(self):
        g = build_graph(
            ["a", "b", "c"], [("e1", "a", "b", 2), ("e2", "b", "c", 1)]
        )
        ext = build_extended(g, [("ra", V("a")), ("rb", V("b"))])
        f = PLFunction(
            ext,
            {
                "e1": EdgeProfile(Fraction(0), (), (1,)),
                "e2": EdgeProfile(Fraction(2), (), (0,)),
            },
            {"ra": RayProfile(Fraction(0), -1), "rb": RayProfile(Fraction(2), 1)},
        )
        emb = Embedding(ext, [f])
        _curve, emap = tropicalize(emb)
        assert any(rec.source == "e2" for rec in emap.contracted)


class TestStretching:
    def test_unit(self):
        emb = line_embedding(2)
        assert stretching_factor(emb, "e") == 1

    def test_gcd_two(self):
        g = build_graph(["a", "b"], [("e", "a", "b", 1)])
        ext = build_extended(g, [("ra", V("a")), ("rb", V("b"))])
        f1 = PLFunction(
            ext,
            {"e": EdgeProfile(Fraction(0), (), (2,))},
            {"ra": RayProfile(Fraction(0), -2), "rb": RayProfile(Fraction(2), 2)},
        )
        f2 = PLFunction(
            ext,
            {"e": EdgeProfile(Fraction(0), (), (4,))},
            {"ra": RayProfile(Fraction(0), -4), "rb": RayProfile(Fraction(4), 4)},
        )
        emb = Embedding(ext, [f1, f2])
        assert stretching_factor(emb, "e") == 2

    def test_contracted_edge_raises(self):
        g = build_graph(
            ["a", "b", "c"], [("e1", "a", "b", 2), ("e2", "b", "c", 1)]
        )
        ext = build_extended(g, [("ra", V("a")), ("rb", V("b"))])
        f = PLFunction(
            ext,
            {
                "e1": EdgeProfile(Fraction(0), (), (1,)),
                "e2": EdgeProfile(Fraction(2), (), (0,)),
            },
            {"ra": RayProfile(Fraction(0), -1), "rb": RayProfile(Fraction(2), 1)},
        )
        emb = Embedding(ext, [f])
        with pytest.raises(ContractedEdge):
            stretching_factor(emb, "e2")


class TestExtend:
    def test_sign_convention(self):
        g = build_graph(
            ["a", "m", "b"], [("e1", "a", "m", 1), ("e2", "m", "b", 1)]
        )
        ext = build_extended(g, [])
        emb = Embedding(ext, [])
        # ramp with divisor a - m
        f = PLFunction(
            ext,
            {
                "e1": EdgeProfile(Fraction(0), (), (1,)),
                "e2": EdgeProfile(Fraction(1), (), (0,)),
            },
            {},
        )
        assert divisor_of(f).coeff(V("a")) == 1
        emb2 = extend_embedding(emb, f, "c0")
        assert len(emb2.skeleton.rays) == 2
        coord = emb2.coords[-1]
        # +1 at a means the value runs to -inf over a, +inf over m
        ray_at_a = next(
            r for r in emb2.skeleton.rays.values() if r.attach == "a"
        )
        ray_at_m = next(
            r for r in emb2.skeleton.rays.values() if r.attach == "m"
        )
        assert coord.value(V(ray_at_a.leaf)) == MINUS_INF
        assert coord.value(V(ray_at_m.leaf)) == PLUS_INF
        assert is_faithful_function(emb2, coord)

    def test_collision_rejected(self):
        g = build_graph(["a", "m", "b"], [("e1", "a", "m", 1), ("e2", "m", "b", 1)])
        ext = build_extended(g, [("r0", V("a"))])
        emb = Embedding(ext, [])
        f = PLFunction(
            ext,
            {
                "e1": EdgeProfile(Fraction(0), (), (1,)),
                "e2": EdgeProfile(Fraction(1), (), (0,)),
            },
            {"r0": RayProfile(Fraction(0), 0)},
        )
        with pytest.raises(DivisorCollision):
            extend_embedding(emb, f, "c0")

    def test_non_simple_rejected(self):
        g = build_graph(["a", "b"], [("e", "a", "b", 2)])
        ext = build_extended(g, [])
        emb = Embedding(ext, [])
        f = PLFunction(ext, {"e": EdgeProfile(Fraction(0), (), (2,))}, {})
        with pytest.raises(NonSimplePoint):
            extend_embedding(emb, f, "c0")

    def test_projection_recovers_previous_curve(self):
        g = build_graph(["a", "b"], [("e", "a", "b", 10)])
        ext = build_extended(g, [("ra", V("a")), ("rb", V("b"))])
        arclen = PLFunction(
            ext,
            {"e": EdgeProfile(Fraction(0), (), (1,))},
            {"ra": RayProfile(Fraction(0), -1), "rb": RayProfile(Fraction(10), 1)},
        )
        emb = Embedding(ext, [arclen])
        curve1, _ = tropicalize(emb)
        bump = trapezoid(ext, "e", (1, 2, 7, 8))
        emb2 = extend_embedding(emb, bump, "c1")
        # dropping the new coordinate and contracting new rays gives back
        # the previous image, up to vertex naming
        proj = Embedding(emb2.skeleton, emb2.coords[:-1])
        curve2, emap2 = tropicalize(proj)
        from curveops import same_up_to_subdivision

        assert same_up_to_subdivision(curve1, curve2)
        # the four new rays are contracted by the projection
        assert len(emap2.contracted) == 4

    def test_new_rays_have_stretch_one(self):
        g = build_graph(["a", "b"], [("e", "a", "b", 10)])
        ext = build_extended(g, [("ra", V("a")), ("rb", V("b"))])
        arclen = PLFunction(
            ext,
            {"e": EdgeProfile(Fraction(0), (), (1,))},
            {"ra": RayProfile(Fraction(0), -1), "rb": RayProfile(Fraction(10), 1)},
        )
        emb = Embedding(ext, [arclen])
        emb2 = extend_embedding(emb, trapezoid(ext, "e", (1, 2, 7, 8)), "c1")
        for rid in emb2.skeleton.rays:
            if rid.startswith("c1."):
                assert stretching_factor(emb2, rid) == 1


class TestFullyFaithful:
    def test_line_embedding_faithful(self):
        rep = is_fully_faithful(line_embedding(2))
        assert rep.fully_faithful

    def test_fold_not_faithful(self):
        rep = is_fully_faithful(fold_embedding())
        assert not rep.fully_faithful
        assert any("weight" in r or "covered" in r for r in rep.reasons)

    def test_contracted_blocks(self):
        g = build_graph(["a", "b", "c"], [("e1", "a", "b", 2), ("e2", "b", "c", 1)])
        ext = build_extended(g, [("ra", V("a")), ("rb", V("b"))])
        f = PLFunction(
            ext,
            {
                "e1": EdgeProfile(Fraction(0), (), (1,)),
                "e2": EdgeProfile(Fraction(2), (), (0,)),
            },
            {"ra": RayProfile(Fraction(0), -1), "rb": RayProfile(Fraction(2), 1)},
        )
        rep = is_fully_faithful(Embedding(ext, [f]))
        assert not rep.fully_faithful
        assert any("contracted" in r for r in rep.reasons)


class TestRandomizedBalancing:
    def test_trapezoid_extensions_balance(self):
        rng = random.Random(101)
        count = 0
        for _ in range(60):
            g = random_graph(rng)
            ext = build_extended(g, [])
            emb = Embedding(ext, [])
            ok = True
            for k in range(rng.randrange(1, 3)):
                eid = rng.choice(sorted(ext.finite.edges))
                e = ext.finite.edges[eid]
                xs = sorted(
                    rng.sample(range(1, 16), 4)
                )
                offs = [e.length * Fraction(x, 16) for x in xs]
                if offs[1] - offs[0] != offs[3] - offs[2]:
                    # symmetrize the fall
                    offs[3] = offs[2] + (offs[1] - offs[0])
                    if offs[3] >= e.length:
                        ok = False
                        break
                try:
                    bump = trapezoid(emb.skeleton, eid, offs)
                    emb = extend_embedding(emb, bump, f"c{k}")
                except Exception:
                    ok = False
                    break
            if not ok or not emb.coords:
                continue
            curve, _ = tropicalize(emb)  # asserts balancing internally
            assert check_balancing(curve).balanced
            count += 1
        assert count >= 30
