#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
import random
import unittest
from fractions import Fraction

import networkx as nx

from grsc import updcert
from grsc.cancel import check_gr_metric, vertex_orbits
from grsc.config import GrscConfig
from grsc.core import Word, LengthFunction, path_label, is_reduced_labelling
from grsc.exceptions import NotReducedError, InvalidCoefficientsError, DisconnectedGraphError
from grsc.ripssegev import CoefficientSystem, Skeleton, build_rips_segev, build_sets, is_connected, search_coefficients, \
    circulant_skeleton, regular_skeleton, golomb_rulers
from grsc.updcert import trace_product

from tests._graphs import ST, example_cs, two_line_cs

# a perfect difference set mod 13: the incidence graph of the projective plane of order 3
SINGER = (0, 1, 3, 9)

# circulant skeletons on 13 lines with a ruler of length 6 verify Gr'*(1) at the first candidate
SINGER_SEARCH = dict(ratio=1, search_skeleton="circulant", search_n_min=13, search_n_max=13, search_c_max=6,
                     cycle_cap=500)


class MyTestCase(unittest.TestCase):

    def test_edge_counts(self):
        rsg = build_rips_segev(example_cs(2))
        self.assertEqual(10, len(rsg.graph.edges))
        self.assertEqual(8, len(rsg.graph.vertices))
        self.assertEqual(10, example_cs(2).edge_count())

        rsg = build_rips_segev(example_cs(3))
        self.assertEqual(14, len(rsg.graph.edges))
        self.assertEqual(11, len(rsg.graph.vertices))
        self.assertEqual(ST, rsg.graph.alphabet)

    def test_markers(self):
        for cs in (example_cs(2), example_cs(3), two_line_cs()):
            rsg = build_rips_segev(cs)
            graph = rsg.graph
            self.assertTrue(is_reduced_labelling(graph))
            self.assertTrue(is_connected(rsg))
            self.assertEqual(rsg.u[(1, 0)], rsg.base)
            for i in range(1, cs.n + 1):
                line = rsg.line_path(i, 0)
                for j in range(1, cs.line_length(i)):
                    line = line + rsg.line_path(i, j)
                self.assertEqual(cs.a ** cs.line_length(i), path_label(graph, line))
                for j in range(cs.line_length(i)):
                    self.assertEqual(cs.a, path_label(graph, rsg.line_path(i, j)))
                    self.assertEqual(rsg.u[(i, j + 1)], graph.terminal(rsg.line_path(i, j)))
                for j in range(cs.line_length(i) + 1):
                    self.assertEqual(cs.b, path_label(graph, rsg.b_path(i, j)))
                    self.assertEqual(rsg.u[(i, j)], rsg.v0[(i, j)])
                    self.assertEqual(rsg.v1[(i, j)], graph.terminal(rsg.b_path(i, j)))
            # the identifications
            for (kind1, i1, j1), (kind2, i2, j2) in cs.identifications():
                named = {"u": rsg.u, "v1": rsg.v1}
                self.assertEqual(named[kind1][(i1, j1)], named[kind2][(i2, j2)])

    def test_deterministic(self):
        first = build_rips_segev(two_line_cs())
        second = build_rips_segev(two_line_cs())
        self.assertEqual(first.graph, second.graph)
        self.assertEqual(first.u, second.u)
        self.assertEqual(first.v1, second.v1)

    def test_not_reduced(self):
        # u_0 is glued to (v1)_1 and (v1)_0 to u_0: two incoming t-edges
        cs = CoefficientSystem(Word.parse("s^2"), Word.parse("t^2"), 1, (2,), ((1, 1, 1, 1),), ((1, 0, 2, 2),))
        cs.validate()
        with self.assertRaises(NotReducedError) as context:
            build_rips_segev(cs)
        self.assertEqual("incoming", context.exception.witness.kind)

    def test_validate(self):
        a, b = Word.parse("s^2"), Word.parse("t^2")
        with self.assertRaises(InvalidCoefficientsError):
            CoefficientSystem(a, b, 0, (), (), ()).validate()
        with self.assertRaises(InvalidCoefficientsError):
            CoefficientSystem(a, b, 1, (2, 2), ((1, 1, 1, 1),), ((0, 0, 0, 0),)).validate()
        with self.assertRaises(InvalidCoefficientsError):
            # P_1,3 out of range
            CoefficientSystem(a, b, 1, (2,), ((1, 1, 1, 1),), ((0, 0, 3, 0),)).validate()
        with self.assertRaises(InvalidCoefficientsError):
            CoefficientSystem(a, b, 1, (2,), ((1, 2, 1, 1),), ((0, 0, 0, 0),)).validate()
        with self.assertRaises(InvalidCoefficientsError):
            CoefficientSystem(a, b, 1, (2,), ((1, 1, 1),), ((0, 0, 0),)).validate()
        with self.assertRaises(InvalidCoefficientsError):
            # s^-1 s^2 is not reduced
            CoefficientSystem(Word.parse("s^-1 s^2"), b, 1, (2,), ((1, 1, 1, 1),), ((0, 0, 0, 0),)).validate()
        with self.assertRaises(InvalidCoefficientsError):
            CoefficientSystem(Word(), b, 1, (2,), ((1, 1, 1, 1),), ((0, 0, 0, 0),)).validate()
        with self.assertRaises(InvalidCoefficientsError):
            # a and b share a generator
            CoefficientSystem(Word.parse("s t"), b, 1, (2,), ((1, 1, 1, 1),), ((0, 0, 0, 0),)).validate()
        with self.assertRaises(InvalidCoefficientsError):
            build_rips_segev(CoefficientSystem(a, b, 1, (0,), ((1, 1, 1, 1),), ((0, 0, 0, 0),)))

    def test_sets(self):
        cs = example_cs(3)
        sets = build_sets(cs, build_rips_segev(cs))
        self.assertEqual((Word(),), sets.connectors)
        self.assertEqual(((Word(), Word.parse("s^2"), Word.parse("s^4")),), sets.a_sets)
        self.assertEqual((Word(), Word.parse("s^2"), Word.parse("t^2"), Word.parse("s^2 t^2")), sets.b_set)

    def test_trace_markers(self):
        for cs in (example_cs(3), two_line_cs()):
            rsg = build_rips_segev(cs)
            sets = build_sets(cs, rsg)
            for (i, j), word in sets.a_entries():
                self.assertEqual(rsg.u[(i, j)], trace_product(rsg, word, Word()).endvertex)
                self.assertEqual(rsg.v1[(i, j)], trace_product(rsg, word, cs.b).endvertex)
            self.assertEqual(0, len(trace_product(rsg, Word(), Word()).path))

    def test_disconnected(self):
        rsg = build_rips_segev(two_line_cs(), identify=False)
        self.assertFalse(is_connected(rsg))
        self.assertEqual(2, len(rsg.graph.components()))
        with self.assertRaises(DisconnectedGraphError):
            build_sets(rsg.cs, rsg)

    def test_search_budget_zero(self):
        result = search_coefficients(Word.parse("s^2"), Word.parse("t^2"), budget=0)
        self.assertFalse(result.found)
        self.assertIsNone(result.cs)
        self.assertEqual(0, result.candidates)

    def test_golomb_rulers(self):
        self.assertEqual([(1, 4, 6), (2, 5, 6)], golomb_rulers(3, 6))
        self.assertEqual([], golomb_rulers(3, 5))
        for r1, r2, c in golomb_rulers(6, 11):
            marks = (0, r1, r2, c)
            distances = [y - x for x in marks for y in marks if x < y]
            self.assertEqual(6, len(set(distances)))

    def test_skeleton_validation(self):
        singer = circulant_skeleton(13, SINGER)
        self.assertEqual(13, singer.n)
        self.assertEqual(6, singer.girth())
        # repeated differences 1 - 0 = 2 - 1 close a 4-cycle
        self.assertEqual(4, circulant_skeleton(13, (0, 1, 2, 5)).girth())

        with self.assertRaises(InvalidCoefficientsError):
            Skeleton(singer.lines, singer.chains[:-1])
        with self.assertRaises(InvalidCoefficientsError):
            # the chains list their line ends first
            Skeleton(singer.lines, tuple((c[1], c[0], c[2], c[3]) for c in singer.chains))
        with self.assertRaises(InvalidCoefficientsError):
            Skeleton(((0, 0, 1, 2),), ((0, 0, 1, 2),))
        with self.assertRaises(InvalidCoefficientsError):
            singer.coefficients(Word.parse("s^2"), Word.parse("t^2"), (4, 1, 6))

    def test_skeleton_coefficients(self):
        skeleton = circulant_skeleton(13, SINGER)
        cs = skeleton.coefficients(Word.parse("s^2"), Word.parse("t^2"), (1, 4, 6))
        cs.validate()
        self.assertEqual((6,) * 13, cs.c)
        rsg = build_rips_segev(cs)
        self.assertEqual(338, len(rsg.graph.edges))
        # 351 vertices, three gluings per chain
        self.assertEqual(312, len(rsg.graph.vertices))
        self.assertTrue(is_reduced_labelling(rsg.graph))
        self.assertTrue(is_connected(rsg))

        # along a chain the b-line of each marker ends at the next marker
        marks = (0, 1, 4, 6)
        for k, order in enumerate(skeleton.chains):
            markers = [(line + 1, marks[skeleton.lines[line].index(k)]) for line in order]
            for below, above in zip(markers, markers[1:]):
                self.assertEqual(rsg.v1[below], rsg.u[above])

        # rotating the lines is a free automorphism
        self.assertEqual(24, len(set(vertex_orbits(rsg.graph).values())))
        self.assertTrue(updcert.build_certificate(rsg, build_sets(cs, rsg)).ok)

        free_product = LengthFunction.free_product(rsg.graph.alphabet)
        self.assertTrue(check_gr_metric(rsg.graph, Fraction(1), free_product).satisfied)
        # two corner syllables against a hexagon of b-chains and lines
        self.assertFalse(check_gr_metric(rsg.graph, Fraction(1, 2), free_product, first_only=True).satisfied)

    def test_regular_skeleton(self):
        graph = nx.circulant_graph(9, [1, 3])
        for seed in range(5):
            skeleton = regular_skeleton(graph, random.Random(seed))
            with self.subTest(seed=seed):
                self.assertEqual(9, skeleton.n)
                girth = skeleton.girth()
                self.assertEqual(0, girth % 2)
                self.assertGreaterEqual(girth, nx.girth(graph))
                for i, row in enumerate(skeleton.lines):
                    self.assertEqual({k for k in range(9) if graph.has_edge(i, k)}, set(row))
                cs = skeleton.coefficients(Word.parse("s^2"), Word.parse("t^2"), (1, 4, 6))
                cs.validate()
                rsg = build_rips_segev(cs)
                self.assertTrue(is_reduced_labelling(rsg.graph))
                self.assertTrue(is_connected(rsg))

    def test_search(self):
        config = GrscConfig(**SINGER_SEARCH)
        result = search_coefficients(Word.parse("s^2"), Word.parse("t^2"), budget=4, seed=3, config=config)
        self.assertTrue(result.found)
        self.assertEqual(1, result.candidates)
        self.assertEqual(0, result.restarts)
        result.cs.validate()
        self.assertEqual(13, result.cs.n)
        self.assertTrue(is_reduced_labelling(result.rsg.graph))
        self.assertTrue(is_connected(result.rsg))
        self.assertTrue(result.verdict.satisfied)
        self.assertTrue(result.certificate.ok)
        # re-check the returned graph independently of the search
        free_product = LengthFunction.free_product(result.rsg.graph.alphabet)
        self.assertTrue(check_gr_metric(result.rsg.graph, Fraction(1), free_product).satisfied)

        again = search_coefficients(Word.parse("s^2"), Word.parse("t^2"), budget=4, seed=3, config=config)
        self.assertEqual(result.cs, again.cs)
        self.assertEqual(result.candidates, again.candidates)

        # the number of worker threads does not change the outcome
        threaded = search_coefficients(Word.parse("s^2"), Word.parse("t^2"), budget=4, seed=3,
                                       config=GrscConfig(workers=3, **SINGER_SEARCH))
        self.assertEqual(result.cs, threaded.cs)

    def test_search_girth_filter(self):
        # the only 4-regular graph on 5 vertices is K5, its double cover has girth 4
        config = GrscConfig(search_n_max=5, search_girth=8, backtrack_limit=3, restart_base=2)
        result = search_coefficients(Word.parse("s^2"), Word.parse("t^2"), budget=2, seed=1, config=config)
        self.assertFalse(result.found)
        self.assertEqual({"skeleton": 2}, result.rejections)

    def test_search_tight_ratio(self):
        # no one line system of length 3 satisfies Gr'*(1/6)
        config = GrscConfig(ratio="1/6", search_strategy="random", search_n_max=1, search_c_max=3, restart_base=4)
        result = search_coefficients(Word.parse("s^2"), Word.parse("t^2"), budget=8, seed=1, config=config)
        self.assertFalse(result.found)
        self.assertEqual(8, result.candidates)
        self.assertTrue(sum(result.rejections.values()) > 0)


if __name__ == '__main__':
    unittest.main()
