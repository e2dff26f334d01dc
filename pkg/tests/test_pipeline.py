#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
import json
import tempfile
import unittest
from io import StringIO
from pathlib import Path

from grsc.cancel import check_gr_metric
from grsc.comerford import CosetAction, schreier_graph
from grsc.config import GrscConfig
from grsc.core import Word, LengthFunction
from grsc.exceptions import ConfigError, InvalidActionError
from grsc.fileformats import load_graph, load_certificate, load_coefficients
from grsc.pipeline import lifted_period_words, export_dot, run_theorem_pipeline, STATUS_EXHAUSTED, \
    STATUS_VERIFIED, STATUS_FAILED
from grsc.updcert import verify_certificate

from tests._graphs import ST, cycle

# circulant skeletons on 13 lines verify Gr'*(1), the smallest ratio a search of this size reaches
SINGER_SEARCH = dict(ratio=1, search_skeleton="circulant", search_n_min=13, search_n_max=13, search_c_max=6,
                     cycle_cap=500)


class MyTestCase(unittest.TestCase):

    def setUp(self) -> None:
        self.tmpdir = tempfile.TemporaryDirectory()
        self.tmppath = Path(self.tmpdir.name)

    def tearDown(self) -> None:
        self.tmpdir.cleanup()

    def test_lifted_period_words(self):
        kh = schreier_graph(CosetAction(1, {"s": [1], "t": [1]}), ST)
        self.assertEqual((Word.parse("s@1^6"), Word.parse("t@1^6")), lifted_period_words(kh, 1, 3))

        kh = schreier_graph(CosetAction(2, {"s": [2, 1], "t": [1, 2]}), ST)
        self.assertEqual((Word.parse("s@1 s@2"), Word.parse("t@1^2")), lifted_period_words(kh, 1, 2))
        self.assertEqual((Word.parse("s@2 s@1"), Word.parse("t@2^2")), lifted_period_words(kh, 2, 2))

        # a 3-cycle does not divide 2!
        kh = schreier_graph(CosetAction(3, {"s": [2, 3, 1], "t": [1, 2, 3]}), ST)
        with self.assertRaises(InvalidActionError):
            lifted_period_words(kh, 1, 2)

    def test_export_dot(self):
        graph = cycle("st", ST)
        expected = ('digraph grsc {\n'
                    '  node [shape=circle];\n'
                    '  0 [label="0", peripheries=2];\n'
                    '  1 [label="1"];\n'
                    '  0 -> 1 [label="s", id="e0"];\n'
                    '  1 -> 0 [label="t", id="e1"];\n'
                    '}\n')
        self.assertEqual(expected, export_dot(graph))
        buffer = StringIO()
        export_dot(graph, buffer)
        self.assertEqual(expected, buffer.getvalue())
        export_dot(graph, self.tmppath / "graph.dot")
        self.assertEqual(expected, (self.tmppath / "graph.dot").read_text(encoding="utf-8"))

    def test_pipeline(self):
        outdir = self.tmppath / "run"
        report = run_theorem_pipeline(2, seed=3, budget=4, outdir=outdir, config=GrscConfig(**SINGER_SEARCH))
        self.assertTrue(report.search["found"])
        self.assertEqual(1, report.search["candidates"])
        self.assertIsNone(report.halted_at)
        self.assertEqual(STATUS_VERIFIED, report.status)
        self.assertEqual(0, report.exit_code)
        self.assertEqual(312, report.base["vertices"])
        self.assertFalse(report.hypotheses_met)

        self.assertEqual({"1": 1, "2": 3}, report.subgroups_per_index)
        self.assertEqual({"1": 1, "2": 3}, report.subgroup_counts)
        self.assertEqual(4, len(report.subgroups))
        for record in report.subgroups:
            with self.subTest(record=record.name):
                self.assertEqual(record.index, len(record.components))
                self.assertIsNone(record.failure)
                self.assertEqual((True, True), record.relators_trivial)
                self.assertEqual(0, record.projection["failures"])
                self.assertTrue(record.verdict["satisfied"])
                self.assertFalse(record.non_unique_product)
                for component in record.components:
                    self.assertTrue(component.markers)
                    self.assertTrue(component.certificate_ok)
                    self.assertTrue(component.smallest_bucket >= 2)
                    self.assertEqual([], component.injectivity["collisions"])
                    self.assertEqual(4, component.injectivity["image_sizes"]["B"])

        # the artifacts can be read back and re-checked
        for name in ("coefficients.cs", "gamma.grsc", "gamma.verdict", "gamma.dot", "gamma.cert",
                     "h2_1.act", "h2_1.grsc", "h2_1_kh.dot", "h2_1.verdict", "h2_1_v1.cert", "h2_1_v2.cert",
                     "report.json", "timings.json"):
            self.assertTrue((outdir / name).exists(), name)
        self.assertEqual(13, load_coefficients(outdir / "coefficients.cs").n)
        gamma_h = load_graph(outdir / "h2_1.grsc")
        self.assertEqual(2 * 338, len(gamma_h.edges))
        free_product = LengthFunction.free_product(gamma_h.alphabet)
        self.assertTrue(check_gr_metric(gamma_h, 1, free_product).satisfied)
        self.assertTrue(verify_certificate(gamma_h, load_certificate(outdir / "h2_1_v1.cert")).ok)

        data = json.loads((outdir / "report.json").read_text(encoding="utf-8"))
        self.assertEqual(2, data["k"])
        self.assertEqual(report.status, data["status"])
        self.assertEqual(["h1_1", "h2_1", "h2_2", "h2_3"], [s["name"] for s in data["subgroups"]])
        self.assertTrue(data["existence"]["2"]["witnessed"])
        self.assertIn("report.json", data["artifacts"])

    def test_pipeline_deterministic(self):
        config = GrscConfig(**SINGER_SEARCH)
        run_theorem_pipeline(1, seed=5, budget=4, outdir=self.tmppath / "first", config=config)
        run_theorem_pipeline(1, seed=5, budget=4, outdir=self.tmppath / "second", config=config)
        first = sorted(p.name for p in (self.tmppath / "first").iterdir())
        second = sorted(p.name for p in (self.tmppath / "second").iterdir())
        self.assertEqual(first, second)
        for name in first:
            if name == "timings.json":
                continue
            self.assertEqual((self.tmppath / "first" / name).read_bytes(),
                             (self.tmppath / "second" / name).read_bytes(), name)

    def test_bad_k(self):
        with self.assertRaises(ConfigError):
            run_theorem_pipeline(0)
        with self.assertRaises(ConfigError):
            run_theorem_pipeline(4, config=GrscConfig(max_k=3))

    def test_budget_exhausted(self):
        report = run_theorem_pipeline(2, budget=0, outdir=self.tmppath, config=GrscConfig(**SINGER_SEARCH))
        self.assertEqual(STATUS_EXHAUSTED, report.status)
        self.assertEqual(2, report.exit_code)
        self.assertEqual([], report.subgroups)
        data = json.loads((self.tmppath / "report.json").read_text(encoding="utf-8"))
        self.assertFalse(data["search"]["found"])
        self.assertFalse((self.tmppath / "gamma.grsc").exists())


if __name__ == '__main__':
    unittest.main()
