#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
"""
Line oriented text formats of all artifacts.

All formats are UTF-8, one record per line, with blank lines and lines starting with '#' ignored.
Every ``load``/``save`` accepts a filename or an already opened text stream like a StringIO.

Graph (``.grsc``)::

    alphabet s t
    partition {s} {t}
    vertex 0
    base 0
    edge 0 0 1 s

Coefficient system (``.cs``)::

    a s^2
    b t^2
    N 1
    C 3
    NIJ 1 1 1 1 1
    PIJ 1 2 1 1 2

Optional ``alphabet`` and ``partition`` lines give the alphabet of the system.

Coset action (``.act``)::

    degree 2
    perm s 2 1
    perm t 1 2

Certificate (``.cert``), ``A``, ``B`` and ``PATH`` being reserved tokens::

    base 0
    vertex 5
    A s^2 B t^2 PATH 0 0+ 1+ 6+ 7+

Paths are written as the start vertex followed by the steps, ``<edge>+`` for a forward and
``<edge>-`` for a backward traversal.
"""
from __future__ import annotations

import io
import logging
import re
from abc import ABC, abstractmethod
from fractions import Fraction
from pathlib import Path as FilePath
from typing import Union, TextIO, Iterator, Tuple, List, Dict, Any, Optional

from grsc.cancel import ConditionVerdict, Violation
from grsc.comerford import CosetAction
from grsc.core import Alphabet, LabelledGraph, Edge, Path, PathStep, Direction, parse_word, format_word
from grsc.exceptions import FileFormatError, GrscError
from grsc.ripssegev import CoefficientSystem
from grsc.updcert import Certificate, ProductWitness

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

Source = Union[FilePath, str, TextIO]

_BLOCK_RE = re.compile(r"\{([^}]*)\}")
_STEP_RE = re.compile(r"^([0-9]+)([+-])$")


def parse_path(tokens: List[str]) -> Path:
    """Parse ``<start> <step> <step> ...``."""
    if not tokens:
        raise ValueError("empty path")
    steps = []
    for token in tokens[1:]:
        match = _STEP_RE.match(token)
        if not match:
            raise ValueError(f"malformed step {token!r}")
        direction = Direction.FORWARD if match.group(2) == "+" else Direction.BACKWARD
        steps.append(PathStep(int(match.group(1)), direction))
    return Path(int(tokens[0]), tuple(steps))


def format_path(path: Path) -> str:
    return str(path)


def _format_partition(alphabet: Alphabet) -> str:
    return " ".join("{" + ",".join(block) + "}" for block in alphabet.partition)


def _parse_partition(line: str) -> List[List[str]]:
    return [[gen.strip() for gen in block.split(",") if gen.strip()] for block in _BLOCK_RE.findall(line)]


class ArtifactFormat(ABC):
    """
    Base class of the artifact formats.

    Subclasses implement :meth:`_load` and :meth:`_save` on open text streams; this class handles
    filenames and comments.
    """

    def load(self, source: Source) -> Any:
        """
        Read an artifact.

        :param source: filename or open text stream.
        :raises FileFormatError: on malformed lines, with the line number.
        """
        try:
            with open(source, "r", encoding="utf-8") as file:
                return self._load(file)
        except TypeError:
            # not a filename, assume a file object
            source.seek(0)
            return self._load(source)

    def save(self, artifact: Any, target: Source) -> None:
        """
        Write an artifact.

        :param target: filename or open text stream.
        """
        try:
            with open(target, "w", encoding="utf-8", newline="\n") as file:
                self._save(artifact, file)
        except TypeError:
            self._save(artifact, target)

    def dumps(self, artifact: Any) -> str:
        buffer = io.StringIO()
        self._save(artifact, buffer)
        return buffer.getvalue()

    @staticmethod
    def _records(file: TextIO) -> Iterator[Tuple[int, str, List[str]]]:
        for line_no, line in enumerate(file.readlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue  # skip comments
            yield line_no, line, stripped.split()

    @abstractmethod
    def _load(self, file: TextIO) -> Any:
        pass

    @abstractmethod
    def _save(self, artifact: Any, file: TextIO) -> None:
        pass


class GraphFormat(ArtifactFormat):

    def _load(self, file: TextIO) -> LabelledGraph:
        generators: Optional[List[str]] = None
        partition: Optional[List[List[str]]] = None
        vertices: List[int] = []
        bases: List[int] = []
        edges: List[Edge] = []
        for line_no, line, tokens in self._records(file):
            key = tokens[0]
            try:
                if key == "alphabet":
                    generators = tokens[1:]
                elif key == "partition":
                    partition = _parse_partition(line)
                elif key == "vertex" and len(tokens) == 2:
                    vertices.append(int(tokens[1]))
                elif key == "base" and len(tokens) == 2:
                    bases.append(int(tokens[1]))
                elif key == "edge" and len(tokens) == 5:
                    edges.append(Edge(int(tokens[1]), int(tokens[2]), int(tokens[3]), tokens[4]))
                else:
                    raise ValueError("unknown record")
            except ValueError as exc:
                raise FileFormatError(str(exc), line_no, line) from exc
        if generators is None:
            raise FileFormatError("missing 'alphabet' line")
        try:
            return LabelledGraph(Alphabet(generators, partition), vertices, edges, bases or None)
        except GrscError as exc:
            raise FileFormatError(str(exc)) from exc

    def _save(self, graph: LabelledGraph, file: TextIO) -> None:
        file.write("# grsc labelled graph\n")
        file.write(f"alphabet {' '.join(graph.alphabet.generators)}\n")
        file.write(f"partition {_format_partition(graph.alphabet)}\n")
        for vertex in graph.vertices:
            file.write(f"vertex {vertex}\n")
        for base in graph.basepoints:
            file.write(f"base {base}\n")
        for edge in graph.edges:
            file.write(f"edge {edge.id} {edge.source} {edge.target} {edge.label}\n")


class CoefficientFormat(ArtifactFormat):

    def _load(self, file: TextIO) -> CoefficientSystem:
        values: Dict[str, Any] = {"NIJ": {}, "PIJ": {}}
        generators = partition = None
        for line_no, line, tokens in self._records(file):
            key = tokens[0]
            try:
                if key in ("a", "b"):
                    values[key] = parse_word(" ".join(tokens[1:]))
                elif key == "N" and len(tokens) == 2:
                    values["N"] = int(tokens[1])
                elif key == "C":
                    values["C"] = [int(x) for x in tokens[1:]]
                elif key in ("NIJ", "PIJ") and len(tokens) == 6:
                    values[key][int(tokens[1])] = [int(x) for x in tokens[2:]]
                elif key == "alphabet":
                    generators = tokens[1:]
                elif key == "partition":
                    partition = _parse_partition(line)
                else:
                    raise ValueError("unknown record")
            except (ValueError, GrscError) as exc:
                raise FileFormatError(str(exc), line_no, line) from exc
        for key in ("a", "b", "N", "C"):
            if key not in values:
                raise FileFormatError(f"missing '{key}' line")
        n = values["N"]
        for key in ("NIJ", "PIJ"):
            if sorted(values[key]) != list(range(1, n + 1)):
                raise FileFormatError(f"'{key}' lines must cover the lines 1..{n}")
        try:
            alphabet = Alphabet(generators, partition) if generators else None
            cs = CoefficientSystem(values["a"], values["b"], n, values["C"],
                                   [values["NIJ"][i] for i in range(1, n + 1)],
                                   [values["PIJ"][i] for i in range(1, n + 1)], alphabet)
            cs.validate()
        except GrscError as exc:
            raise FileFormatError(str(exc)) from exc
        return cs

    def _save(self, cs: CoefficientSystem, file: TextIO) -> None:
        file.write("# grsc coefficient system\n")
        if cs.alphabet is not None:
            file.write(f"alphabet {' '.join(cs.alphabet.generators)}\n")
            file.write(f"partition {_format_partition(cs.alphabet)}\n")
        file.write(f"a {format_word(cs.a)}\n")
        file.write(f"b {format_word(cs.b)}\n")
        file.write(f"N {cs.n}\n")
        file.write(f"C {' '.join(str(ci) for ci in cs.c)}\n")
        for i, row in enumerate(cs.nij, start=1):
            file.write(f"NIJ {i} {' '.join(str(x) for x in row)}\n")
        for i, row in enumerate(cs.pij, start=1):
            file.write(f"PIJ {i} {' '.join(str(x) for x in row)}\n")


class ActionFormat(ArtifactFormat):

    def _load(self, file: TextIO) -> CosetAction:
        degree = None
        perms: Dict[str, List[int]] = {}
        for line_no, line, tokens in self._records(file):
            try:
                if tokens[0] == "degree" and len(tokens) == 2:
                    degree = int(tokens[1])
                elif tokens[0] == "perm" and len(tokens) >= 3:
                    perms[tokens[1]] = [int(x) for x in tokens[2:]]
                else:
                    raise ValueError("unknown record")
            except ValueError as exc:
                raise FileFormatError(str(exc), line_no, line) from exc
        if degree is None:
            raise FileFormatError("missing 'degree' line")
        try:
            return CosetAction(degree, perms)
        except GrscError as exc:
            raise FileFormatError(str(exc)) from exc

    def _save(self, action: CosetAction, file: TextIO) -> None:
        file.write(f"degree {action.degree}\n")
        for gen, images in action.table:
            file.write(f"perm {gen} {' '.join(str(x) for x in images)}\n")


class CertificateFormat(ArtifactFormat):

    def _load(self, file: TextIO) -> Certificate:
        base = None
        vertex = None
        buckets: Dict[int, List[ProductWitness]] = {}
        for line_no, line, tokens in self._records(file):
            try:
                if tokens[0] == "base" and len(tokens) == 2:
                    base = int(tokens[1])
                elif tokens[0] == "vertex" and len(tokens) == 2:
                    vertex = int(tokens[1])
                    buckets.setdefault(vertex, [])
                elif tokens[0] == "A":
                    if vertex is None:
                        raise ValueError("witness before the first 'vertex' line")
                    b_at = tokens.index("B")
                    path_at = len(tokens) - 1 - tokens[::-1].index("PATH")
                    a_elem = parse_word(" ".join(tokens[1:b_at]))
                    b_elem = parse_word(" ".join(tokens[b_at + 1:path_at]))
                    path = parse_path(tokens[path_at + 1:])
                    end = vertex
                    buckets[vertex].append(ProductWitness(a_elem, b_elem, path, end))
                else:
                    raise ValueError("unknown record")
            except (ValueError, GrscError) as exc:
                raise FileFormatError(str(exc), line_no, line) from exc
        if base is None:
            raise FileFormatError("missing 'base' line")
        return Certificate(base, buckets)

    def _save(self, certificate: Certificate, file: TextIO) -> None:
        file.write("# grsc non-unique product certificate\n")
        file.write(f"base {certificate.base}\n")
        for vertex, witnesses in certificate.buckets.items():
            file.write(f"vertex {vertex}\n")
            for witness in witnesses:
                file.write(f"A {format_word(witness.a_elem)} B {format_word(witness.b_elem)} "
                           f"PATH {format_path(witness.path)}\n")


class VerdictFormat(ArtifactFormat):
    """
    Verdict reports: a header, then one line per violation (and per linear reading flip)::

        condition gr_metric
        ratio 1/6
        length free_product
        satisfied no
        checked 40
        violation piece 0 1+ cycle 0 1+ 2+ piece_length 1 cycle_length 2
    """
    _FIELDS = ("piece", "cycle", "piece_length", "cycle_length", "pieces")

    def _load(self, file: TextIO) -> ConditionVerdict:
        header: Dict[str, str] = {}
        violations: List[Violation] = []
        flips: List[Violation] = []
        for line_no, line, tokens in self._records(file):
            try:
                if tokens[0] in ("violation", "flip"):
                    target = violations if tokens[0] == "violation" else flips
                    target.append(self._parse_violation(tokens[1:]))
                elif len(tokens) == 2:
                    header[tokens[0]] = tokens[1]
                else:
                    raise ValueError("unknown record")
            except ValueError as exc:
                raise FileFormatError(str(exc), line_no, line) from exc
        if "condition" not in header:
            raise FileFormatError("missing 'condition' line")
        verdict = ConditionVerdict(header["condition"], tuple(violations), tuple(flips),
                                   int(header.get("checked", 0)),
                                   ratio=Fraction(header["ratio"]) if "ratio" in header else None,
                                   length=header.get("length"),
                                   p=int(header["p"]) if "p" in header else None)
        if "satisfied" in header and (header["satisfied"] == "yes") != verdict.satisfied:
            raise FileFormatError("'satisfied' line disagrees with the violations")
        return verdict

    def _parse_violation(self, tokens: List[str]) -> Violation:
        values: Dict[str, List[str]] = {}
        current = None
        for token in tokens:
            if token in self._FIELDS:
                current = token
                values[current] = []
            elif current is None:
                raise ValueError(f"unexpected {token!r}")
            else:
                values[current].append(token)
        return Violation(
            parse_path(values["piece"]) if "piece" in values else None,
            parse_path(values["cycle"]) if "cycle" in values else None,
            int(values["piece_length"][0]) if "piece_length" in values else None,
            int(values["cycle_length"][0]) if "cycle_length" in values else None,
            int(values["pieces"][0]) if "pieces" in values else None,
        )

    @staticmethod
    def _format_violation(kind: str, violation: Violation) -> str:
        parts = [kind]
        if violation.piece is not None:
            parts.append(f"piece {format_path(violation.piece)}")
        if violation.cycle is not None:
            parts.append(f"cycle {format_path(violation.cycle)}")
        if violation.piece_length is not None:
            parts.append(f"piece_length {violation.piece_length}")
        if violation.cycle_length is not None:
            parts.append(f"cycle_length {violation.cycle_length}")
        if violation.pieces is not None:
            parts.append(f"pieces {violation.pieces}")
        return " ".join(parts)

    def _save(self, verdict: ConditionVerdict, file: TextIO) -> None:
        file.write(f"condition {verdict.condition}\n")
        if verdict.ratio is not None:
            file.write(f"ratio {verdict.ratio}\n")
            file.write(f"length {verdict.length}\n")
        if verdict.p is not None:
            file.write(f"p {verdict.p}\n")
        file.write(f"satisfied {'yes' if verdict.satisfied else 'no'}\n")
        file.write(f"checked {verdict.checked}\n")
        for violation in verdict.violations:
            file.write(self._format_violation("violation", violation) + "\n")
        for violation in verdict.linear_flips:
            file.write(self._format_violation("flip", violation) + "\n")


graph_format = GraphFormat()
coefficient_format = CoefficientFormat()
action_format = ActionFormat()
certificate_format = CertificateFormat()
verdict_format = VerdictFormat()


def load_graph(source: Source) -> LabelledGraph:
    return graph_format.load(source)


def save_graph(graph: LabelledGraph, target: Source) -> None:
    graph_format.save(graph, target)


def load_coefficients(source: Source) -> CoefficientSystem:
    return coefficient_format.load(source)


def save_coefficients(cs: CoefficientSystem, target: Source) -> None:
    coefficient_format.save(cs, target)


def load_action(source: Source) -> CosetAction:
    return action_format.load(source)


def save_action(action: CosetAction, target: Source) -> None:
    action_format.save(action, target)


def load_certificate(source: Source) -> Certificate:
    return certificate_format.load(source)


def save_certificate(certificate: Certificate, target: Source) -> None:
    certificate_format.save(certificate, target)


def load_verdict(source: Source) -> ConditionVerdict:
    return verdict_format.load(source)


def save_verdict(verdict: ConditionVerdict, target: Source) -> None:
    verdict_format.save(verdict, target)
