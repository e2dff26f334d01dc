#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
"""
Brute force versions of the small cancellation checks.

Only the graph model of :mod:`grsc.core` is shared with the library: automorphisms are found by
trying every vertex bijection, cycles by walking every closed trail, pieces by reading the label from
every vertex.
"""
import itertools
import math
from collections import Counter
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from grsc.core import LabelledGraph, Path, PathStep, Direction, Word, path_label


def automorphism_vertex_maps(graph: LabelledGraph) -> List[Dict[int, int]]:
    """Every vertex bijection that maps the labelled edge multiset onto itself."""
    edges = Counter((e.source, e.target, e.label) for e in graph.edges)
    vertices = list(graph.vertices)
    result = []
    for image in itertools.permutations(vertices):
        mapping = dict(zip(vertices, image))
        moved = Counter((mapping[s], mapping[t], label) for (s, t, label), count in edges.items()
                        for _ in range(count))
        if moved == edges:
            result.append(mapping)
    return result


def orbits(graph: LabelledGraph) -> Dict[int, frozenset]:
    maps = automorphism_vertex_maps(graph)
    return {v: frozenset(m[v] for m in maps) for v in graph.vertices}


def _steps_from(graph: LabelledGraph, vertex: int) -> List[PathStep]:
    result = []
    for edge in graph.edges:
        if edge.source == vertex:
            result.append(PathStep(edge.id, Direction.FORWARD))
        if edge.target == vertex:
            result.append(PathStep(edge.id, Direction.BACKWARD))
    return result


def _target(graph: LabelledGraph, step: PathStep) -> int:
    edge = graph.edge(step.edge)
    return edge.target if step.direction == Direction.FORWARD else edge.source


def simple_cycles(graph: LabelledGraph) -> List[Tuple[PathStep, ...]]:
    """One step sequence per simple cycle, cycles told apart by their edge sets."""
    found: Dict[frozenset, Tuple[PathStep, ...]] = {}

    def extend(start: int, vertex: int, steps: Tuple[PathStep, ...], visited: frozenset):
        for step in _steps_from(graph, vertex):
            if any(step.edge == s.edge for s in steps):
                continue
            target = _target(graph, step)
            if target == start:
                key = frozenset(s.edge for s in steps + (step,))
                found.setdefault(key, steps + (step,))
            elif target not in visited:
                extend(start, target, steps + (step,), visited | {target})

    for start in graph.vertices:
        extend(start, start, (), frozenset([start]))
    return list(found.values())


def is_piece(graph: LabelledGraph, orbit_of: Dict[int, frozenset], start: int, label: Word) -> bool:
    return any(graph.read_word(w, label) is not None for w in graph.vertices if w not in orbit_of[start])


def _blocks(graph: LabelledGraph, word: Word, free_product: bool) -> List[int]:
    if not free_product:
        return list(range(len(word)))
    return [graph.alphabet.block_of(letter.generator) for letter in word]


def linear_length(graph: LabelledGraph, word: Word, free_product: bool) -> int:
    blocks = _blocks(graph, word, free_product)
    if not blocks:
        return 0
    return 1 + sum(1 for x, y in zip(blocks, blocks[1:]) if x != y)


def cyclic_length(graph: LabelledGraph, word: Word, free_product: bool) -> int:
    if not free_product:
        return len(word)
    blocks = _blocks(graph, word, True)
    changes = sum(1 for k in range(len(blocks)) if blocks[k] != blocks[k - 1])
    return max(1, changes)


def _arcs(graph: LabelledGraph, steps: Sequence[PathStep]):
    """Every subpath of the cycle, both orientations, up to the full cycle from each position."""
    backward = [s.reversed() for s in reversed(steps)]
    for seq in (list(steps), backward):
        n = len(seq)
        starts = [graph.edge(s.edge).source if s.direction == Direction.FORWARD else graph.edge(s.edge).target
                  for s in seq]
        for i in range(n):
            for m in range(1, n + 1):
                arc = tuple(seq[(i + k) % n] for k in range(m))
                yield Path(starts[i], arc)


def gr_metric_satisfied(graph: LabelledGraph, ratio: Fraction, free_product: bool,
                        orbit_of: Optional[Dict[int, frozenset]] = None) -> bool:
    if orbit_of is None:
        orbit_of = orbits(graph)
    for steps in simple_cycles(graph):
        start = graph.edge(steps[0].edge).source if steps[0].direction == Direction.FORWARD \
            else graph.edge(steps[0].edge).target
        total = cyclic_length(graph, path_label(graph, Path(start, steps)), free_product)
        for arc in _arcs(graph, steps):
            label = path_label(graph, arc)
            if is_piece(graph, orbit_of, arc.start, label) and \
                    linear_length(graph, label, free_product) >= ratio * total:
                return False
    return True


def fewest_pieces(graph: LabelledGraph, orbit_of: Dict[int, frozenset], steps: Sequence[PathStep]) -> float:
    n = len(steps)
    starts = [graph.edge(s.edge).source if s.direction == Direction.FORWARD else graph.edge(s.edge).target
              for s in steps]
    best = math.inf
    for origin in range(n):
        rotated = [steps[(origin + k) % n] for k in range(n)]
        cover = [0] + [math.inf] * n
        for j in range(1, n + 1):
            for i in range(j):
                arc = Path(starts[(origin + i) % n], tuple(rotated[i:j]))
                if is_piece(graph, orbit_of, arc.start, path_label(graph, arc)):
                    cover[j] = min(cover[j], cover[i] + 1)
        best = min(best, cover[n])
    return best


def gr_p_violations(graph: LabelledGraph, p: int, orbit_of: Optional[Dict[int, frozenset]] = None) -> int:
    """Number of simple cycles that are a product of fewer than p pieces."""
    if orbit_of is None:
        orbit_of = orbits(graph)
    return sum(1 for steps in simple_cycles(graph) if fewest_pieces(graph, orbit_of, steps) < p)
