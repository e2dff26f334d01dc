#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
"""Small labelled graphs shared by the tests."""
import random
from typing import Iterable, Optional, Sequence, Tuple

from grsc.core import Alphabet, Edge, LabelledGraph, Word
from grsc.ripssegev import CoefficientSystem

ST = Alphabet(["s", "t"], [["s"], ["t"]])


def build(alphabet: Alphabet, edges: Iterable[Tuple[int, int, str]], vertices: Optional[Iterable[int]] = None,
          basepoints: Optional[Sequence[int]] = None) -> LabelledGraph:
    """Graph from (source, target, label) triples, edge ids in list order."""
    edges = [Edge(eid, source, target, label) for eid, (source, target, label) in enumerate(edges)]
    if vertices is None:
        vertices = {v for edge in edges for v in (edge.source, edge.target)}
    return LabelledGraph(alphabet, vertices, edges, basepoints)


def cycle(labels: Sequence[str], alphabet: Optional[Alphabet] = None, first: int = 0) -> LabelledGraph:
    """A single oriented cycle reading ``labels``."""
    if alphabet is None:
        alphabet = Alphabet(sorted(set(labels)))
    n = len(labels)
    return build(alphabet, [(first + k, first + (k + 1) % n, label) for k, label in enumerate(labels)])


def cycles(*words: Sequence[str], alphabet: Alphabet) -> LabelledGraph:
    """Disjoint oriented cycles, one per word."""
    edges = []
    first = 0
    for labels in words:
        n = len(labels)
        edges.extend((first + k, first + (k + 1) % n, label) for k, label in enumerate(labels))
        first += n
    return build(alphabet, edges)


def theta(arcs: Sequence[Sequence[str]], alphabet: Optional[Alphabet] = None) -> LabelledGraph:
    """
    Three (or more) arcs from vertex 0 to vertex 1, each arc an oriented path reading its labels.
    """
    if alphabet is None:
        alphabet = Alphabet(sorted({label for arc in arcs for label in arc}))
    edges = []
    nxt = 2
    for arc in arcs:
        current = 0
        for k, label in enumerate(arc):
            if k == len(arc) - 1:
                target = 1
            else:
                target = nxt
                nxt += 1
            edges.append((current, target, label))
            current = target
    return build(alphabet, edges)


def two_piece_graph() -> LabelledGraph:
    """
    Three disjoint 4-cycles a b c d, a b e f and g h c d: the first one is the concatenation of the
    two pieces a b and c d.
    """
    alphabet = Alphabet(list("abcdefgh"))
    return cycles("abcd", "abef", "ghcd", alphabet=alphabet)


def random_reduced_graph(rng: random.Random, max_edges: int = 12, max_vertices: int = 6,
                         alphabet: Alphabet = Alphabet(["s", "t", "u"], [["s", "u"], ["t"]])) -> LabelledGraph:
    """A random graph with a reduced labelling; edges that would fold are skipped."""
    n = rng.randint(1, max_vertices)
    outgoing = set()
    incoming = set()
    edges = []
    for _ in range(rng.randint(1, max_edges)):
        source, target = rng.randrange(n), rng.randrange(n)
        label = rng.choice(alphabet.generators)
        if (source, label) in outgoing or (target, label) in incoming:
            continue
        outgoing.add((source, label))
        incoming.add((target, label))
        edges.append((source, target, label))
    return build(alphabet, edges, vertices=range(n))


def example_cs(c: int = 3) -> CoefficientSystem:
    """
    A hand made one line system over a = s^2, b = t^2.

    For C = 3 the identifications pair u_0 with (v1)_1, u_2 with (v1)_0, u_3 with (v1)_2 and
    u_1 with (v1)_3. For C = 2 they pair u_0, u_1, u_2 with (v1)_1, (v1)_0, (v1)_2.
    """
    positions = {2: (1, 1, 2, 2), 3: (1, 2, 2, 1)}[c]
    return CoefficientSystem(Word.parse("s^2"), Word.parse("t^2"), 1, (c,), ((1, 1, 1, 1),), (positions,))


def two_line_cs() -> CoefficientSystem:
    """A two line system; every line is glued to the other one."""
    return CoefficientSystem(Word.parse("s^2"), Word.parse("t^2"), 2, (3, 3),
                             ((2, 2, 2, 2), (1, 1, 1, 1)), ((1, 2, 2, 1), (1, 2, 2, 1)))
