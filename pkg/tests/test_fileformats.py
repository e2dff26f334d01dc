#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
import tempfile
import unittest
from fractions import Fraction
from io import StringIO
from pathlib import Path

from grsc.cancel import check_gr_metric, check_gr_p
from grsc.comerford import CosetAction
from grsc.core import Alphabet, Direction, PathStep
from grsc.exceptions import FileFormatError
from grsc.fileformats import load_graph, save_graph, load_coefficients, save_coefficients, load_action, \
    save_action, load_certificate, save_certificate, load_verdict, save_verdict, parse_path, graph_format
from grsc.ripssegev import build_rips_segev, build_sets
from grsc.updcert import build_certificate, verify_certificate

from tests._graphs import ST, cycle, cycles, two_piece_graph, example_cs

GRAPH_TEXT = """\
# two vertices
alphabet s t
partition {s} {t}

vertex 0
vertex 1
  # an indented comment
edge 0 0 1 s
edge 1 1 0 t
"""


class MyTestCase(unittest.TestCase):

    def test_load_graph(self):
        graph = load_graph(StringIO(GRAPH_TEXT))
        self.assertEqual(ST, graph.alphabet)
        self.assertEqual((0, 1), graph.vertices)
        self.assertEqual(cycle("st", ST), graph)
        self.assertEqual((0,), graph.basepoints)

    def test_graph_errors(self):
        with self.assertRaises(FileFormatError) as context:
            load_graph(StringIO(GRAPH_TEXT.replace("edge 1 1 0 t", "edge 1 x 0 t")))
        self.assertEqual(9, context.exception.line_no)
        self.assertIn("line 9", str(context.exception))

        with self.assertRaises(FileFormatError) as context:
            load_graph(StringIO("alphabet s\nnode 0\n"))
        self.assertEqual(2, context.exception.line_no)

        with self.assertRaises(FileFormatError):
            load_graph(StringIO("vertex 0\n"))

        # the label is not in the alphabet
        with self.assertRaises(FileFormatError) as context:
            load_graph(StringIO("alphabet s\nvertex 0\nedge 0 0 0 t\n"))
        self.assertEqual(0, context.exception.line_no)

    def test_graph_files(self):
        alphabet = Alphabet(["s", "t", "u"], [["s", "u"], ["t"]])
        graph = cycles("stu", "uts", alphabet=alphabet)
        with tempfile.TemporaryDirectory() as tmpdir:
            filename = Path(tmpdir) / "graph.grsc"
            save_graph(graph, filename)
            loaded = load_graph(filename)
            self.assertEqual(graph, loaded)
            self.assertEqual(alphabet.partition, loaded.alphabet.partition)
            self.assertEqual(graph.basepoints, loaded.basepoints)
            # string filenames work as well
            self.assertEqual(graph, load_graph(str(filename)))
            text = filename.read_text(encoding="utf-8")
        self.assertEqual(text, graph_format.dumps(graph))
        self.assertIn("partition {s,u} {t}", text)

    def test_coefficients(self):
        text = "a s^2\nb t^2\nN 1\nC 3\n# line 1\nNIJ 1 1 1 1 1\nPIJ 1 1 2 2 1\n"
        cs = load_coefficients(StringIO(text))
        self.assertEqual(example_cs(3), cs)

        buffer = StringIO()
        save_coefficients(example_cs(3), buffer)
        self.assertEqual(example_cs(3), load_coefficients(buffer))

        # a P_ij out of range is rejected on load
        with self.assertRaises(FileFormatError):
            load_coefficients(StringIO(text.replace("PIJ 1 1 2 2 1", "PIJ 1 1 2 5 1")))
        with self.assertRaises(FileFormatError):
            load_coefficients(StringIO(text.replace("NIJ 1 1 1 1 1\n", "")))
        with self.assertRaises(FileFormatError) as context:
            load_coefficients(StringIO(text.replace("N 1", "N one")))
        self.assertEqual(3, context.exception.line_no)

    def test_action(self):
        action = CosetAction(3, {"s": [2, 3, 1], "t": [1, 3, 2]})
        buffer = StringIO()
        save_action(action, buffer)
        self.assertEqual("degree 3\nperm s 2 3 1\nperm t 1 3 2\n", buffer.getvalue())
        self.assertEqual(action, load_action(buffer))
        with self.assertRaises(FileFormatError):
            load_action(StringIO("degree 2\nperm s 1 1\n"))
        with self.assertRaises(FileFormatError):
            load_action(StringIO("perm s 1 2\n"))

    def test_certificate(self):
        cs = example_cs(3)
        rsg = build_rips_segev(cs)
        sets = build_sets(cs, rsg)
        certificate = build_certificate(rsg, sets)
        with tempfile.TemporaryDirectory() as tmpdir:
            filename = Path(tmpdir) / "gamma.cert"
            save_certificate(certificate, filename)
            loaded = load_certificate(filename)
        self.assertEqual(certificate, loaded)
        self.assertTrue(verify_certificate(rsg.graph, loaded, sets).ok)

        with self.assertRaises(FileFormatError):
            load_certificate(StringIO("base 0\nA 1 B 1 PATH 0\n"))
        with self.assertRaises(FileFormatError):
            load_certificate(StringIO("vertex 0\nA 1 B 1 PATH 0\n"))

    def test_verdicts(self):
        graph = cycles("stuvw", "stuxy", alphabet=Alphabet(list("stuvwxy")))
        verdict = check_gr_metric(graph, Fraction(1, 2))
        buffer = StringIO()
        save_verdict(verdict, buffer)
        loaded = load_verdict(buffer)
        self.assertEqual(verdict, loaded)
        self.assertFalse(loaded.satisfied)
        self.assertEqual(Fraction(1, 2), loaded.ratio)

        verdict = check_gr_p(two_piece_graph(), 3)
        buffer = StringIO()
        save_verdict(verdict, buffer)
        self.assertEqual(verdict, load_verdict(buffer))

        with self.assertRaises(FileFormatError):
            load_verdict(StringIO("condition gr_p\np 3\nsatisfied yes\nviolation cycle 0 0+ pieces 2\n"))

    def test_parse_path(self):
        path = parse_path(["4", "0+", "3-"])
        self.assertEqual(4, path.start)
        self.assertEqual((PathStep(0, Direction.FORWARD), PathStep(3, Direction.BACKWARD)), path.steps)
        self.assertEqual("4 0+ 3-", str(path))
        with self.assertRaises(ValueError):
            parse_path(["0", "1*"])
        with self.assertRaises(ValueError):
            parse_path([])


if __name__ == '__main__':
    unittest.main()
