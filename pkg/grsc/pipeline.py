#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
"""
End to end run for a given k: find a Rips-Segev graph Γ for a = s^{k!}, b = t^{k!}, then for every
subgroup H of index h <= k build Γ_H, re-verify it and certify each of its components.

All artifacts are written to an output directory, ``report.json`` summarises them. Everything except
``timings.json`` is a function of (k, seed, budget, options) only.
"""
from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path as FilePath
from typing import Dict, List, Optional, Tuple, Any, Union, TextIO

from grsc import fileformats
from grsc.cancel import check_gr_metric, check_gr_p, pointed_isomorphism
from grsc.comerford import SchreierGraph, CosetAction, comerford_transform, enumerate_index_h_actions, \
    subgroup_count, relators_act_trivially, piece_projection_check
from grsc.config import GrscConfig
from grsc.core import Alphabet, LabelledGraph, Word, LengthFunction, FREE_PRODUCT_LENGTH, format_word
from grsc.exceptions import ConfigError, InvalidActionError, LiftError, NotReducedError, CertificateError, \
    ResourceLimitError
from grsc.ripssegev import RSGraph, search_coefficients, build_rips_segev, build_sets
from grsc.updcert import Certificate, RelatorSet, build_certificate, verify_certificate, enumerate_relators, \
    check_injectivity, abelianization_rank
from grsc.workers import ordered_map

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

CLOSURE_NOTE = ("the unique product property is stable under free products, so a non-unique-product "
                "certificate for every component of Γ_H marks H as a non-unique-product group")

STATUS_VERIFIED = "verified"
STATUS_FAILED = "failed"
STATUS_EXHAUSTED = "budget-exhausted"

# failures after which the run stops
HALTING_FAILURES = ("lift", "verdict", "markers", "certificate")


def lifted_period_words(kh: SchreierGraph, v: int, k: int, s: str = "s", t: str = "t") -> Tuple[Word, Word]:
    """
    a_v and b_v: the labels of the s- and t-cycles of K_H through ``v``, raised to k!/(cycle length).

    :raises InvalidActionError: if a cycle length does not divide k!.
    """
    f = math.factorial(k)
    result = []
    for gen in (s, t):
        label = kh.cycle_label(gen, v)
        if f % len(label):
            raise InvalidActionError(f"{gen}-cycle of length {len(label)} through coset {v} does not divide {k}!")
        result.append(label ** (f // len(label)))
    return result[0], result[1]


def export_dot(graph: LabelledGraph, file: Union[FilePath, str, TextIO, None] = None) -> str:
    """
    The graph in Graphviz DOT syntax. Basepoints are drawn with a double circle.

    :param file: optionally also write the text to this filename or stream.
    """
    lines = ["digraph grsc {", "  node [shape=circle];"]
    bases = set(graph.basepoints)
    for vertex in graph.vertices:
        extra = ", peripheries=2" if vertex in bases else ""
        lines.append(f'  {vertex} [label="{vertex}"{extra}];')
    for edge in graph.edges:
        lines.append(f'  {edge.source} -> {edge.target} [label="{edge.label}", id="e{edge.id}"];')
    lines.append("}")
    text = "\n".join(lines) + "\n"
    if file is not None:
        try:
            with open(file, "w", encoding="utf-8", newline="\n") as out:
                out.write(text)
        except TypeError:
            file.write(text)
    return text


def _markers_match(lifted: LabelledGraph, rsg: RSGraph, fresh: RSGraph) -> bool:
    """True if the pointed isomorphism fresh -> lifted exists and maps every marker onto its namesake."""
    maps = pointed_isomorphism(fresh.graph, fresh.base, lifted, rsg.base)
    if maps is None or len(fresh.graph.vertices) != len(lifted.vertices):
        return False
    vmap, _ = maps
    for mine, theirs in ((fresh.u, rsg.u), (fresh.v0, rsg.v0), (fresh.v1, rsg.v1)):
        if any(vmap.get(vertex) != theirs[key] for key, vertex in mine.items()):
            return False
    return True


@dataclass
class ComponentRecord:
    """Outcome for one component Γ_v of Γ_H."""
    coset: int
    a_word: str
    b_word: str
    markers: bool = False
    certificate_ok: bool = False
    buckets: int = 0
    witnesses: int = 0
    smallest_bucket: int = 0
    injectivity: Dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "coset": self.coset,
            "a_v": self.a_word,
            "b_v": self.b_word,
            "markers": self.markers,
            "certificate": {"ok": self.certificate_ok, "buckets": self.buckets, "witnesses": self.witnesses,
                            "smallest_bucket": self.smallest_bucket},
            "injectivity": self.injectivity,
        }


@dataclass
class SubgroupRecord:
    """
    Outcome for one subgroup H, identified by the canonical image table of its coset action.

    ``failure`` names the first failed stage, ``None`` if all passed.
    """
    index: int
    number: int
    action: CosetAction
    verdict: Optional[Dict[str, Any]] = None
    projection: Optional[Dict[str, Any]] = None
    relators_trivial: Optional[Tuple[bool, bool]] = None
    components: List[ComponentRecord] = field(default_factory=list)
    non_unique_product: bool = False
    failure: Optional[str] = None
    artifacts: Dict[str, str] = field(default_factory=dict, repr=False)

    @property
    def name(self) -> str:
        return f"h{self.index}_{self.number}"

    @property
    def halting(self) -> bool:
        return self.failure in HALTING_FAILURES

    def as_dict(self) -> Dict[str, Any]:
        result = {
            "name": self.name,
            "index": self.index,
            "action": {gen: list(images) for gen, images in self.action.table},
            "verdict": self.verdict,
            "projection": self.projection,
            "components": [component.as_dict() for component in self.components],
            "non_unique_product": self.non_unique_product,
            "failure": self.failure,
            "artifacts": sorted(self.artifacts),
        }
        if self.relators_trivial is not None:
            result["relators_act_trivially"] = {"ok": self.relators_trivial[0],
                                                "exhaustive": self.relators_trivial[1]}
        return result


@dataclass
class RunReport:
    """Structured summary of a pipeline run, serialised to ``report.json``."""
    k: int
    seed: int
    budget: int
    options: Dict[str, Any]
    status: str = STATUS_VERIFIED
    hypotheses_met: bool = False
    search: Dict[str, Any] = field(default_factory=dict)
    base: Dict[str, Any] = field(default_factory=dict)
    subgroups: List[SubgroupRecord] = field(default_factory=list)
    subgroups_per_index: Dict[str, int] = field(default_factory=dict)
    subgroup_counts: Dict[str, int] = field(default_factory=dict)
    halted_at: Optional[str] = None
    artifacts: List[str] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict, repr=False)

    @property
    def exit_code(self) -> int:
        if self.status == STATUS_VERIFIED:
            return 0
        if self.status == STATUS_EXHAUSTED:
            return 2
        return 1

    def records_of_index(self, h: int) -> List[SubgroupRecord]:
        return [record for record in self.subgroups if record.index == h]

    def as_dict(self) -> Dict[str, Any]:
        existence = {str(h): {"witnessed": count > 0,
                              "action": next(({gen: list(images) for gen, images in r.action.table}
                                              for r in self.records_of_index(int(h))), None)}
                     for h, count in self.subgroups_per_index.items()}
        return {
            "k": self.k,
            "seed": self.seed,
            "budget": self.budget,
            "options": self.options,
            "status": self.status,
            "hypotheses_met": self.hypotheses_met,
            "search": self.search,
            "base": self.base,
            "subgroups": [record.as_dict() for record in self.subgroups],
            "subgroups_per_index": self.subgroups_per_index,
            "subgroup_counts": self.subgroup_counts,
            "existence": existence,
            "closure": CLOSURE_NOTE,
            "halted_at": self.halted_at,
            "artifacts": sorted(self.artifacts),
        }

    def dumps(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"


class _ArtifactWriter:
    """Collects artifact texts and writes them to the output directory, if there is one."""

    def __init__(self, outdir: Optional[Union[FilePath, str]]):
        self.outdir = FilePath(outdir) if outdir is not None else None
        self.names: List[str] = []
        if self.outdir is not None:
            self.outdir.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> None:
        self.names.append(name)
        if self.outdir is not None:
            with open(self.outdir / name, "w", encoding="utf-8", newline="\n") as file:
                file.write(text)
            logger.debug(f"wrote {self.outdir / name}")


class _SubgroupJob:
    """Everything needed to process the subgroups of one run; shared read-only by the workers."""

    def __init__(self, k: int, cfg: GrscConfig, rsg: RSGraph, alphabet: Alphabet, base_relators: RelatorSet,
                 hypotheses_met: bool):
        self.k = k
        self.cfg = cfg
        self.rsg = rsg
        self.alphabet = alphabet
        self.base_relators = base_relators
        self.hypotheses_met = hypotheses_met

    def __call__(self, item: Tuple[int, int, CosetAction]) -> SubgroupRecord:
        h, number, action = item
        record = SubgroupRecord(h, number, action)
        try:
            self._process(record)
        except LiftError as exc:
            logger.error(f"{record.name}: {exc}")
            record.failure = "lift"
        return record

    def _process(self, record: SubgroupRecord) -> None:
        cfg = self.cfg
        graph = self.rsg.graph
        cs = self.rsg.cs
        name = record.name
        record.artifacts[f"{name}.act"] = fileformats.action_format.dumps(record.action)
        record.relators_trivial = relators_act_trivially(record.action, self.base_relators)

        gamma_h = comerford_transform(graph, record.action)
        record.artifacts[f"{name}.grsc"] = fileformats.graph_format.dumps(gamma_h.graph)
        record.artifacts[f"{name}_kh.dot"] = export_dot(gamma_h.schreier.graph)

        length = LengthFunction.from_name(cfg.length, gamma_h.graph.alphabet)
        verdict = check_gr_metric(gamma_h.graph, cfg.ratio, length)
        record.verdict = verdict.as_dict()
        record.artifacts[f"{name}.verdict"] = fileformats.verdict_format.dumps(verdict)
        if not verdict.satisfied:
            record.failure = "verdict"
            return

        projection = piece_projection_check(graph, gamma_h, length=length, simple=True)
        record.projection = {"checked": projection.checked, "failures": len(projection.failures)}
        if not projection.ok:
            record.failure = "projection"

        lifted_relators = [enumerate_relators(lift.graph, cfg.cycle_cap) for lift in gamma_h.lifts]
        relators = RelatorSet(tuple(sorted({word for part in lifted_relators for word in part})),
                              all(part.exhaustive for part in lifted_relators),
                              sum(part.cycles for part in lifted_relators))
        verified = self.hypotheses_met and verdict.satisfied

        product_alphabet = self.alphabet.product(record.index)
        all_certified = True
        for lift in gamma_h.lifts:
            a_v, b_v = lifted_period_words(gamma_h.schreier, lift.coset, self.k)
            component = ComponentRecord(lift.coset, format_word(a_v), format_word(b_v))
            record.components.append(component)
            cs_v = cs.with_words(a_v, b_v, product_alphabet)
            try:
                fresh = build_rips_segev(cs_v)
            except NotReducedError as exc:
                logger.error(f"{name} coset {lift.coset}: {exc}")
                record.failure = "markers"
                return
            component.markers = _markers_match(lift.graph, self.rsg, fresh)
            if not component.markers:
                logger.error(f"{name} coset {lift.coset}: Γ_v differs from the Rips-Segev graph of (a_v, b_v)")
                record.failure = "markers"
                return

            sets = build_sets(cs_v, fresh)
            cert_name = f"{name}_v{lift.coset}.cert"
            try:
                certificate = build_certificate(fresh, sets)
            except CertificateError as exc:
                record.artifacts[cert_name] = fileformats.certificate_format.dumps(exc.certificate)
                record.failure = "certificate"
                return
            record.artifacts[cert_name] = fileformats.certificate_format.dumps(certificate)
            check = verify_certificate(lift.graph, certificate, sets)
            component.certificate_ok = check.ok
            component.buckets = check.buckets
            component.witnesses = check.witnesses
            component.smallest_bucket = min(len({(w.a_elem, w.b_elem) for w in witnesses})
                                            for witnesses in certificate.buckets.values())
            if not check.ok:
                logger.error(f"{name} coset {lift.coset}: {check.problems[0]}")
                record.failure = "certificate"
                return
            all_certified = all_certified and check.ok

            injectivity = check_injectivity(sets, relators, verified)
            component.injectivity = injectivity.as_dict()
            if injectivity.status == "collision" and record.failure is None:
                record.failure = "injectivity"

        record.non_unique_product = self.hypotheses_met and all_certified and record.failure is None


def _check_k(k: int, cfg: GrscConfig) -> None:
    if k < 1:
        raise ConfigError(f"k must be positive, got {k}")
    if k > cfg.max_k:
        if not cfg.allow_large_k:
            raise ConfigError(f"k = {k} is above the desk-scale cap {cfg.max_k}; set allow_large_k to run anyway")
        logger.warning(f"k = {k} is above {cfg.max_k}: relator lengths grow like {k}! and the number of "
                       f"subgroups grows quickly, expect long running times")


def run_theorem_pipeline(k: int, seed: Optional[int] = None, budget: Optional[int] = None,
                         outdir: Optional[Union[FilePath, str]] = None,
                         config: Optional[GrscConfig] = None) -> RunReport:
    """
    Run the whole construction for ``k``.

    Halts at the first subgroup whose Γ_H fails to lift, fails the metric condition, differs from the
    expected Rips-Segev graph or fails its certificate; the failing artifacts are still written.

    :param seed: search seed, ``config.seed`` by default.
    :param budget: search budget, ``config.budget`` by default.
    :param outdir: directory for the artifacts and reports; nothing is written when None.
    :raises ConfigError: if ``k`` is not positive or above the configured cap.
    """
    cfg = config or GrscConfig()
    seed = cfg.seed if seed is None else seed
    budget = cfg.budget if budget is None else budget
    _check_k(k, cfg)
    options = cfg.as_dict()
    options.pop("workers")
    report = RunReport(k, seed, budget, options)
    report.hypotheses_met = cfg.ratio <= Fraction(1, 6) and cfg.length == FREE_PRODUCT_LENGTH
    if not report.hypotheses_met:
        logger.warning(f"ratio {cfg.ratio} with {cfg.length} length does not meet the small cancellation "
                       f"hypotheses, no subgroup will be marked non-unique-product")
    writer = _ArtifactWriter(outdir)
    clock = time.perf_counter()

    def lap(stage: str) -> None:
        nonlocal clock
        now = time.perf_counter()
        report.timings[stage] = round(now - clock, 6)
        clock = now

    alphabet = Alphabet(["s", "t"], [["s"], ["t"]])
    f = math.factorial(k)
    a, b = Word.generator("s", f), Word.generator("t", f)
    logger.info(f"pipeline k={k}: searching coefficients for a = {a}, b = {b}")
    search = search_coefficients(a, b, budget, seed, cfg, alphabet)
    lap("search")
    report.search = {"found": search.found, "candidates": search.candidates, "restarts": search.restarts,
                     "rejections": dict(sorted(search.rejections.items()))}
    if not search.found:
        report.status = STATUS_EXHAUSTED
        _finish(report, writer)
        return report

    rsg = search.rsg
    cs = search.cs
    graph = rsg.graph
    report.search["coefficients"] = {"N": cs.n, "C": list(cs.c), "NIJ": [list(r) for r in cs.nij],
                                     "PIJ": [list(r) for r in cs.pij]}
    writer.write("coefficients.cs", fileformats.coefficient_format.dumps(cs))
    writer.write("gamma.grsc", fileformats.graph_format.dumps(graph))
    writer.write("gamma.verdict", fileformats.verdict_format.dumps(search.verdict))
    writer.write("gamma.dot", export_dot(graph))

    certificate: Optional[Certificate] = search.certificate
    if certificate is None:
        try:
            certificate = build_certificate(rsg, build_sets(cs, rsg), workers=cfg.workers)
        except CertificateError as exc:
            writer.write("gamma.cert", fileformats.certificate_format.dumps(exc.certificate))
            report.status = STATUS_FAILED
            report.halted_at = "gamma"
            _finish(report, writer)
            return report
    writer.write("gamma.cert", fileformats.certificate_format.dumps(certificate))

    base_relators = enumerate_relators(graph, cfg.cycle_cap)
    report.base = {
        "vertices": len(graph.vertices),
        "edges": len(graph.edges),
        "verdict": search.verdict.as_dict(),
        "certificate": {"buckets": len(certificate.buckets), "witnesses": certificate.witness_count()},
        "relators": len(base_relators),
        "relators_exhaustive": base_relators.exhaustive,
        "abelianization_rank": abelianization_rank(alphabet, base_relators) if base_relators.exhaustive else None,
    }
    try:
        report.base["gr_p"] = check_gr_p(graph, cfg.pieces_p, cfg.cycle_cap, workers=cfg.workers).as_dict()
    except ResourceLimitError as exc:
        logger.warning(f"Gr({cfg.pieces_p}) not checked: {exc}")
        report.base["gr_p"] = None
    lap("base")

    items = []
    for h in range(1, k + 1):
        actions = enumerate_index_h_actions(h, k)
        report.subgroups_per_index[str(h)] = len(actions)
        report.subgroup_counts[str(h)] = subgroup_count(h, k)
        items.extend((h, number, action) for number, action in enumerate(actions, start=1))
    logger.info(f"{len(items)} subgroup classes of index <= {k}")

    job = _SubgroupJob(k, cfg, rsg, alphabet, base_relators, report.hypotheses_met)
    for record in ordered_map(job, items, cfg.workers):
        report.subgroups.append(record)
        for name, text in sorted(record.artifacts.items()):
            writer.write(name, text)
        if record.failure is not None:
            report.status = STATUS_FAILED
            logger.error(f"{record.name} failed: {record.failure}")
        if record.halting:
            report.halted_at = record.name
            break
    lap("subgroups")
    _finish(report, writer)
    return report


def _finish(report: RunReport, writer: _ArtifactWriter) -> None:
    report.artifacts = list(writer.names) + ["report.json", "timings.json"]
    writer.write("report.json", report.dumps())
    writer.write("timings.json", json.dumps(report.timings, sort_keys=True, indent=2) + "\n")
    logger.info(f"pipeline finished: {report.status}")
