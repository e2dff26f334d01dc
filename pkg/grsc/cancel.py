#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
"""
Piece enumeration and exact verification of the graphical small cancellation conditions
Gr(p), Gr'(λ) (word length) and Gr'*(λ) (free product length).

All verifiers require a reduced labelling. On a reduced labelling an immersion of a labelled path
is determined by the image of its initial vertex, so two immersions of the same path differ by a
label-preserving automorphism exactly when their start vertices lie in the same automorphism orbit.
Piece enumeration walks all immersed paths from every start vertex and carries the set of partner
start vertices outside that orbit which still read the same label.
"""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, List, Optional, Tuple, Iterator, Union, NamedTuple, Mapping, Any

import networkx as nx
from networkx.algorithms import isomorphism
from networkx.utils import UnionFind

from grsc.core import LabelledGraph, Path, PathStep, Direction, LengthFunction, Word, path_label, \
    is_reduced_labelling, format_word
from grsc.exceptions import NotReducedError, ResourceLimitError, ConfigError
from grsc.workers import ordered_map

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

INFINITY = math.inf


def require_reduced(graph: LabelledGraph) -> None:
    """:raises NotReducedError: if ``graph`` fails the local folding criterion."""
    verdict = is_reduced_labelling(graph)
    if not verdict:
        raise NotReducedError(verdict)


class Automorphism:
    """
    A label-preserving automorphism given by a vertex bijection and an edge bijection.

    Automorphisms compare equal when both bijections agree and can be used in sets.
    """
    __slots__ = ("_vertices", "_edges")

    def __init__(self, vertex_map: Mapping[int, int], edge_map: Mapping[int, int]):
        self._vertices: Dict[int, int] = dict(vertex_map)
        self._edges: Dict[int, int] = dict(edge_map)

    @classmethod
    def identity(cls, graph: LabelledGraph) -> Automorphism:
        return cls({v: v for v in graph.vertices}, {e.id: e.id for e in graph.edges})

    @property
    def vertex_map(self) -> Dict[int, int]:
        return dict(self._vertices)

    @property
    def edge_map(self) -> Dict[int, int]:
        return dict(self._edges)

    def vertex(self, v: int) -> int:
        return self._vertices[v]

    def edge(self, e: int) -> int:
        return self._edges[e]

    def compose(self, other: Automorphism) -> Automorphism:
        """``self ∘ other``: apply ``other`` first."""
        return Automorphism({v: self._vertices[w] for v, w in other._vertices.items()},
                            {e: self._edges[f] for e, f in other._edges.items()})

    def inverse(self) -> Automorphism:
        return Automorphism({w: v for v, w in self._vertices.items()}, {f: e for e, f in self._edges.items()})

    def is_identity(self) -> bool:
        return all(v == w for v, w in self._vertices.items()) and all(e == f for e, f in self._edges.items())

    def apply(self, path: Path) -> Path:
        return Path(self._vertices[path.start], tuple(PathStep(self._edges[s.edge], s.direction) for s in path.steps))

    def is_valid_for(self, graph: LabelledGraph) -> bool:
        """Check that incidence, orientation and labels are preserved."""
        if sorted(self._vertices) != sorted(self._vertices.values()):
            return False
        for edge in graph.edges:
            image = graph.edge(self._edges[edge.id])
            if (image.source, image.target, image.label) != \
                    (self._vertices[edge.source], self._vertices[edge.target], edge.label):
                return False
        return True

    def _key(self):
        return tuple(sorted(self._vertices.items())), tuple(sorted(self._edges.items()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Automorphism):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        moved = {v: w for v, w in sorted(self._vertices.items()) if v != w}
        return f"Automorphism({moved or 'id'})"


def _vertex_signature(graph: LabelledGraph, vertex: int) -> Tuple[Tuple[str, int], ...]:
    return tuple(sorted((graph.edge(step.edge).label, int(step.direction)) for step in graph.steps_from(vertex)))


def label_automorphisms(graph: LabelledGraph) -> List[Automorphism]:
    """
    The full group of label-preserving automorphisms, identity included.

    Uses the VF2 matcher of networkx on the graph against itself, pruning candidate vertex pairs by
    their multiset of incident (label, direction) pairs. Parallel edges with the same endpoints and
    label are paired in id order, so on labellings that are not reduced the group is returned up
    to permutations of such parallel edges.

    :return: the automorphisms, ordered by their vertex map.
    """
    nxg = graph.to_networkx()
    for v in graph.vertices:
        nxg.nodes[v]["sig"] = _vertex_signature(graph, v)

    def node_match(a, b):
        return a["sig"] == b["sig"]

    def edge_match(a, b):
        return sorted(d["label"] for d in a.values()) == sorted(d["label"] for d in b.values())

    groups: Dict[Tuple[int, int, str], List[int]] = {}
    for edge in graph.edges:
        groups.setdefault((edge.source, edge.target, edge.label), []).append(edge.id)

    matcher = isomorphism.MultiDiGraphMatcher(nxg, nxg, node_match=node_match, edge_match=edge_match)
    result = set()
    for mapping in matcher.isomorphisms_iter():
        edge_map: Dict[int, int] = {}
        for (source, target, label), ids in groups.items():
            images = groups[(mapping[source], mapping[target], label)]
            edge_map.update(zip(ids, images))
        result.add(Automorphism(mapping, edge_map))
    automorphisms = sorted(result, key=lambda a: a._key())
    logger.debug(f"{len(automorphisms)} label-preserving automorphisms")
    return automorphisms


def pointed_isomorphism(graph1: LabelledGraph, vertex1: int, graph2: LabelledGraph, vertex2: int) \
        -> Optional[Tuple[Dict[int, int], Dict[int, int]]]:
    """
    The label-preserving isomorphism from the component of ``vertex1`` onto the component of ``vertex2``
    that sends ``vertex1`` to ``vertex2``, if there is one.

    Both graphs must be reduced; then the isomorphism is unique and found by propagating along edges.

    :return: (vertex map, edge map) or None.
    """
    if len(graph1.component_of(vertex1)) != len(graph2.component_of(vertex2)):
        return None
    vmap = {vertex1: vertex2}
    emap: Dict[int, int] = {}
    used_vertices = {vertex2}
    used_edges = set()
    queue = deque([vertex1])
    while queue:
        x = queue.popleft()
        y = vmap[x]
        if len(graph1.steps_from(x)) != len(graph2.steps_from(y)):
            return None
        for step in graph1.steps_from(x):
            image = graph2.step_for(y, graph1.step_letter(step))
            if image is None:
                return None
            known = emap.get(step.edge)
            if known is None:
                if image.edge in used_edges:
                    return None
                emap[step.edge] = image.edge
                used_edges.add(image.edge)
            elif known != image.edge:
                return None
            x2 = graph1.step_ends(step)[1]
            y2 = graph2.step_ends(image)[1]
            if x2 in vmap:
                if vmap[x2] != y2:
                    return None
            else:
                if y2 in used_vertices:
                    return None
                vmap[x2] = y2
                used_vertices.add(y2)
                queue.append(x2)
    return vmap, emap


def vertex_orbits(graph: LabelledGraph) -> Dict[int, int]:
    """
    Orbits of the label-preserving automorphism group on the vertices.

    :return: a map from every vertex to the smallest vertex of its orbit.
    :raises NotReducedError: on labellings that are not reduced.
    """
    require_reduced(graph)
    signature = {v: _vertex_signature(graph, v) for v in graph.vertices}
    shape = {}
    for comp, base in graph.components():
        edges = sum(len(graph.steps_from(v)) for v in comp)
        shape[base] = (len(comp), edges, tuple(sorted(signature[v] for v in comp)))

    orbits = UnionFind(graph.vertices)
    comps = graph.components()
    for comp, base in comps:
        for other, other_base in comps:
            if shape[other_base] != shape[base]:
                continue
            for candidate in sorted(other):
                if signature[candidate] != signature[base]:
                    continue
                iso = pointed_isomorphism(graph, base, graph, candidate)
                if iso is not None:
                    for x, y in iso[0].items():
                        orbits.union(x, y)
    result = {}
    for members in orbits.to_sets():
        smallest = min(members)
        for v in members:
            result[v] = smallest
    return result


class FiberPath(NamedTuple):
    """A path in the :class:`FiberSquare`: a start pair and a sequence of step pairs."""
    start: Tuple[int, int]
    steps: Tuple[Tuple[PathStep, PathStep], ...] = ()


class FiberSquare:
    """
    The fiber product of a labelled graph with itself.

    Vertices are ordered pairs of vertices, edges are pairs of equally labelled edges. Immersed
    paths of the square are exactly the pairs of equally labelled immersed paths in the graph.
    The square is never materialised; steps are generated on demand.
    """

    def __init__(self, graph: LabelledGraph):
        self.graph = graph

    @property
    def vertices(self) -> List[Tuple[int, int]]:
        return [(u, v) for u in self.graph.vertices for v in self.graph.vertices]

    def edges(self) -> List[Tuple[int, int]]:
        by_label: Dict[str, List[int]] = {}
        for edge in self.graph.edges:
            by_label.setdefault(edge.label, []).append(edge.id)
        return [(e1, e2) for ids in by_label.values() for e1 in ids for e2 in ids]

    def steps_from(self, pair: Tuple[int, int]) -> List[Tuple[PathStep, PathStep]]:
        u, v = pair
        graph = self.graph
        result = []
        for first in graph.steps_from(u):
            letter = graph.step_letter(first)
            for second in graph.steps_from(v):
                if graph.step_letter(second) == letter:
                    result.append((first, second))
        return result

    def terminal(self, path: FiberPath) -> Tuple[int, int]:
        if not path.steps:
            return path.start
        first, second = path.steps[-1]
        return self.graph.step_ends(first)[1], self.graph.step_ends(second)[1]

    def project(self, path: FiberPath, coordinate: int) -> Path:
        """Projection to coordinate 0 or 1."""
        return Path(path.start[coordinate], tuple(pair[coordinate] for pair in path.steps))

    def lift(self, first: Path, second: Path) -> Optional[FiberPath]:
        """The fiber path projecting to ``first`` and ``second``, or None if their labels differ."""
        if path_label(self.graph, first) != path_label(self.graph, second):
            return None
        return FiberPath((first.start, second.start), tuple(zip(first.steps, second.steps)))

    def immersed_paths(self, max_edges: int) -> Iterator[FiberPath]:
        """All immersed fiber paths with at most ``max_edges`` steps, the empty paths included."""
        for start in self.vertices:
            stack = [FiberPath(start)]
            while stack:
                path = stack.pop()
                yield path
                if len(path.steps) >= max_edges:
                    continue
                for pair in self.steps_from(self.terminal(path)):
                    if path.steps:
                        last = path.steps[-1]
                        if pair[0] == last[0].reversed() or pair[1] == last[1].reversed():
                            continue
                    stack.append(FiberPath(path.start, path.steps + (pair,)))


class PieceOccurrence(NamedTuple):
    """
    An immersed path in the graph together with the start of every essentially distinct partner
    immersion, read as paths in the graph.
    """
    path: Path
    partners: Tuple[Path, ...]
    length: int

    def fiber_path(self, partner: int = 0) -> FiberPath:
        other = self.partners[partner]
        return FiberPath((self.path.start, other.start), tuple(zip(self.path.steps, other.steps)))


def piece_edge_bound(graph: LabelledGraph, length: LengthFunction, max_length: float, simple: bool = False) -> int:
    """
    The number of edges a path of ℓ-length at most ``max_length`` can have.

    With word length this is ⌊max_length⌋. With free product length every syllable is read inside the
    subgraph of one block. A non-backtracking walk in a forest, or a simple path anywhere, uses each
    edge of that subgraph at most once, so a syllable has at most as many edges as its block.

    A simple path never has more edges than the graph has vertices. When no finite bound exists
    (infinite ``max_length``, or a block subgraph with a cycle and non-simple paths) the vertex count
    is returned and longer paths are cut.
    """
    fallback = len(graph.vertices)
    if max_length == INFINITY:
        return fallback
    if length.is_word_length:
        bound = int(math.floor(max_length))
        return min(bound, fallback) if simple else bound
    block_of = length.block_lookup()
    longest_run = 0
    for block in set(block_of.values()):
        run_graph = nx.MultiGraph()
        run_graph.add_edges_from((edge.source, edge.target, edge.id) for edge in graph.edges
                                 if block_of[edge.label] == block)
        run_edges = run_graph.number_of_edges()
        if not simple and run_edges > run_graph.number_of_nodes() - nx.number_connected_components(run_graph):
            return fallback
        longest_run = max(longest_run, run_edges)
    bound = int(math.floor(max_length)) * longest_run
    return min(bound, fallback) if simple else bound


class _WalkItem(NamedTuple):
    steps: Tuple[PathStep, ...]
    partners: Tuple[Tuple[int, int], ...]
    length: int
    closed: bool


class _PieceWalker:
    """Depth first walk over the immersed piece paths starting at one vertex."""

    def __init__(self, graph: LabelledGraph, length: LengthFunction, orbits: Dict[int, int]):
        self.graph = graph
        self.length = length
        self.orbits = orbits
        self.block_of = None if length.is_word_length else length.block_lookup()

    def partner_starts(self, start: int) -> Tuple[Tuple[int, int], ...]:
        orbit = self.orbits[start]
        return tuple((w, w) for w in self.graph.vertices if self.orbits[w] != orbit)

    def walk(self, start: int, max_length: float = INFINITY, max_edges: Optional[int] = None,
             simple: bool = False, extend_below: float = INFINITY) -> Iterator[_WalkItem]:
        """
        Yield every immersed piece path from ``start``.

        :param max_length: paths with a larger ℓ-length are neither yielded nor extended.
        :param max_edges: maximal number of edges, :func:`piece_edge_bound` by default.
        :param simple: only simple paths, and closed paths returning to ``start`` without other repetition.
        :param extend_below: yielded paths are only extended while their ℓ-length is below this value.
        """
        graph = self.graph
        if max_edges is None:
            max_edges = piece_edge_bound(graph, self.length, max_length, simple)
        partners = self.partner_starts(start)
        if not partners or max_edges < 1:
            return
        # frame: terminal vertex, steps, visited vertices, partners, ℓ-length, last block
        stack = [(start, (), frozenset([start]), partners, 0, None)]
        while stack:
            vertex, steps, visited, partners, value, last_block = stack.pop()
            for step in reversed(graph.steps_from(vertex)):
                if steps and step == steps[-1].reversed():
                    continue
                target = graph.step_ends(step)[1]
                closed = False
                if simple and target in visited:
                    if target != start:
                        continue
                    closed = True
                letter = graph.step_letter(step)
                moved = []
                for origin, current in partners:
                    partner_step = graph.step_for(current, letter)
                    if partner_step is not None:
                        moved.append((origin, graph.step_ends(partner_step)[1]))
                if not moved:
                    continue
                if self.block_of is None:
                    new_value, block = value + 1, None
                else:
                    block = self.block_of[letter.generator]
                    new_value = value + (1 if block != last_block else 0)
                if new_value > max_length:
                    continue
                new_steps = steps + (step,)
                yield _WalkItem(new_steps, tuple(moved), new_value, closed)
                if not closed and new_value < extend_below and len(new_steps) < max_edges:
                    stack.append((target, new_steps, visited | {target}, tuple(moved), new_value, block))

    def occurrence(self, start: int, item: _WalkItem) -> PieceOccurrence:
        path = Path(start, item.steps)
        label = path_label(self.graph, path)
        partners = tuple(self.graph.read_word(origin, label) for origin, _ in item.partners)
        return PieceOccurrence(path, partners, item.length)


def enumerate_piece_paths(graph: LabelledGraph, max_length: float, length: Optional[LengthFunction] = None, *,
                          max_edges: Optional[int] = None, simple: bool = False,
                          workers: int = 1) -> List[PieceOccurrence]:
    """
    All immersed paths p with ℓ(ω(p)) ≤ ``max_length`` that admit a second, essentially distinct immersion.

    Each path is reported once, with every partner immersion attached.

    :param length: the length function ℓ, word length by default.
    :param max_edges: bound on the number of edges of p, by default the smallest bound that drops no
        path within ``max_length`` (see :func:`piece_edge_bound`).
    :param simple: only report simple (or simple closed) paths.
    :param workers: number of worker threads, one work item per start vertex.
    :raises NotReducedError: on labellings that are not reduced.
    """
    if length is None:
        length = LengthFunction.word()
    walker = _PieceWalker(graph, length, vertex_orbits(graph))

    def from_start(start: int) -> List[PieceOccurrence]:
        return [walker.occurrence(start, item)
                for item in walker.walk(start, max_length=max_length, max_edges=max_edges, simple=simple)]

    result = [occ for chunk in ordered_map(from_start, graph.vertices, workers) for occ in chunk]
    logger.debug(f"{len(result)} piece paths with {length} length <= {max_length}")
    return result


def piece_partners(graph: LabelledGraph, path: Path, orbits: Optional[Dict[int, int]] = None) -> List[Path]:
    """The essentially distinct partner immersions of ``path``; non-empty iff ``path`` is a piece."""
    if orbits is None:
        orbits = vertex_orbits(graph)
    label = path_label(graph, path)
    orbit = orbits[path.start]
    result = []
    for w in graph.vertices:
        if orbits[w] == orbit:
            continue
        partner = graph.read_word(w, label)
        if partner is not None:
            result.append(partner)
    return result


class _Completion(NamedTuple):
    cyclic: float
    linear: float
    cycle: Optional[Path]


class _CycleOracle:
    """
    Shortest completion of a path to a simple closed path.

    Dijkstra runs on a state graph whose states are (vertex, block of the last letter read), so that
    for the free product length an edge costs 1 exactly when it starts a new syllable.
    The completion avoids the interior vertices of the path. A shortest completion that repeats
    a vertex can be shortcut without becoming longer, so the minimum is attained by a simple one.
    """

    def __init__(self, graph: LabelledGraph, length: LengthFunction):
        self.graph = graph
        self.length = length
        if length.is_word_length:
            self.block_of = {gen: 0 for gen in graph.alphabet.generators}
            blocks = [0]
        else:
            self.block_of = length.block_lookup()
            blocks = sorted(set(self.block_of.values()))
        states = nx.MultiDiGraph()
        states.add_nodes_from((v, b) for v in graph.vertices for b in blocks)
        for edge in graph.edges:
            beta = self.block_of[edge.label]
            for b in blocks:
                cost = 1 if length.is_word_length else int(b != beta)
                states.add_edge((edge.source, b), (edge.target, beta), key=(edge.id, 1), weight=cost,
                                step=PathStep(edge.id, Direction.FORWARD))
                states.add_edge((edge.target, b), (edge.source, beta), key=(edge.id, -1), weight=cost,
                                step=PathStep(edge.id, Direction.BACKWARD))
        self.states = states
        self.blocks = blocks
        self._edge_girth: Dict[int, float] = {}

    def edge_girth(self, edge: int) -> float:
        """Smallest cyclic length of a simple closed path through ``edge``, cached."""
        if edge not in self._edge_girth:
            start = self.graph.edge(edge).source
            self._edge_girth[edge] = self.complete(Path(start, (PathStep(edge, Direction.FORWARD),))).cyclic
        return self._edge_girth[edge]

    def complete(self, path: Path) -> _Completion:
        graph = self.graph
        if not path.steps:
            return _Completion(INFINITY, INFINITY, None)
        vertices = graph.path_vertices(path)
        label = path_label(graph, path)
        initial, terminal = vertices[0], vertices[-1]

        if initial == terminal:
            if len(set(vertices[:-1])) != len(vertices) - 1:
                return _Completion(INFINITY, INFINITY, None)
            return _Completion(self.length.cyclic(label), self.length(label), path)
        if len(set(vertices)) != len(vertices):
            return _Completion(INFINITY, INFINITY, None)

        blocked = set(vertices[1:-1])
        banned = path.steps[0].edge if len(path.steps) == 1 else None
        view = nx.subgraph_view(self.states,
                                filter_node=lambda s: s[0] not in blocked,
                                filter_edge=lambda a, b, k: k[0] != banned)
        first_block = self.block_of[label[0].generator]
        last_block = self.block_of[label[-1].generator]
        distances, routes = nx.single_source_dijkstra(view, (terminal, last_block), weight="weight")

        size = len(path.steps)
        changes = len(label) - 1 if self.length.is_word_length else self.length(label) - 1
        best_cyclic = best_linear = INFINITY
        best_state = None
        for b in self.blocks:
            state = (initial, b)
            if state not in distances:
                continue
            d = distances[state]
            if self.length.is_word_length:
                cyclic = linear = size + d
            else:
                cyclic = max(1, changes + d + int(b != first_block))
                linear = changes + d + 1
            if cyclic < best_cyclic:
                best_cyclic, best_state = cyclic, state
            best_linear = min(best_linear, linear)
        if best_state is None:
            return _Completion(INFINITY, INFINITY, None)

        route = routes[best_state]
        back = []
        for a, b in zip(route, route[1:]):
            key = min(view[a][b], key=lambda k: (view[a][b][k]["weight"], k))
            back.append(view[a][b][key]["step"])
        back = self._shortcut(terminal, back, initial)
        return _Completion(best_cyclic, best_linear, Path(initial, path.steps + tuple(back)))

    def _shortcut(self, start: int, steps: List[PathStep], stop: int) -> List[PathStep]:
        # cut closed detours so that the witness is simple, never longer
        order = [start]
        kept: List[PathStep] = []
        for step in steps:
            target = self.graph.step_ends(step)[1]
            if target in order:
                cut = order.index(target)
                del order[cut + 1:]
                del kept[cut:]
            else:
                order.append(target)
                kept.append(step)
            if target == stop:
                break
        return kept


def shortest_cycle_through(graph: LabelledGraph, occurrence: Union[Path, PieceOccurrence],
                           length: Optional[LengthFunction] = None) -> Union[int, float]:
    """
    Minimal ℓ(ω(γ)) over the nontrivial simple closed paths γ containing ``occurrence`` as a subpath.

    Closed paths are measured cyclically, a final syllable merging with the first one.

    :return: the length, or :data:`math.inf` if no such closed path exists.
    """
    if isinstance(occurrence, PieceOccurrence):
        occurrence = occurrence.path
    if length is None:
        length = LengthFunction.word()
    graph.validate_path(occurrence)
    return _CycleOracle(graph, length).complete(occurrence).cyclic


@dataclass(frozen=True)
class Violation:
    """
    One counterexample of a condition.

    For the metric conditions ``piece`` is the piece path and ``cycle`` a shortest simple closed path
    through it. For Gr(p) ``piece`` is None and ``pieces`` holds the minimal number of pieces covering ``cycle``.
    """
    piece: Optional[Path]
    cycle: Optional[Path]
    piece_length: Optional[int] = None
    cycle_length: Optional[int] = None
    pieces: Optional[int] = None

    def as_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {}
        if self.piece is not None:
            result["piece"] = str(self.piece)
            result["piece_length"] = self.piece_length
        if self.cycle is not None:
            result["cycle"] = str(self.cycle)
            result["cycle_length"] = self.cycle_length
        if self.pieces is not None:
            result["pieces"] = self.pieces
        return result


@dataclass(frozen=True)
class ConditionVerdict:
    """
    Outcome of :func:`check_gr_metric` or :func:`check_gr_p`.

    ``satisfied`` is derived from ``violations`` and so can not disagree with it.
    ``linear_flips`` lists metric violations that would disappear if closed paths were measured
    linearly from the start of the piece instead of cyclically.
    """
    condition: str
    violations: Tuple[Violation, ...] = ()
    linear_flips: Tuple[Violation, ...] = ()
    checked: int = 0
    ratio: Optional[Fraction] = None
    length: Optional[str] = None
    p: Optional[int] = None
    parameters: Dict[str, str] = field(default_factory=dict, compare=False)

    @property
    def satisfied(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.satisfied

    def describe(self) -> str:
        if self.condition == "gr_p":
            return f"Gr({self.p})"
        prime = "'*" if self.length == "free_product" else "'"
        return f"Gr{prime}({self.ratio})"

    def as_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {
            "condition": self.condition,
            "satisfied": self.satisfied,
            "checked": self.checked,
            "violations": [v.as_dict() for v in self.violations],
        }
        if self.ratio is not None:
            result["ratio"] = str(self.ratio)
            result["length"] = self.length
            result["linear_flips"] = [v.as_dict() for v in self.linear_flips]
        if self.p is not None:
            result["p"] = self.p
        return result


def _cycle_lower_bound(edges: int, value: int, closed: bool, word_length: bool) -> int:
    # lower bound for the length of any simple closed path through a path with this many edges and ℓ-length
    if word_length:
        return edges if closed else edges + 1
    return max(2, value - 1) if value >= 2 else 1


def check_gr_metric(graph: LabelledGraph, ratio: Union[Fraction, int, str], length: Optional[LengthFunction] = None,
                    *, workers: int = 1, first_only: bool = False) -> ConditionVerdict:
    """
    Check the metric condition: every piece p inside a nontrivial simple closed path γ has
    ℓ(ω(p)) < ratio·ℓ(ω(γ)).

    With word length this is Gr'(ratio), with free product length Gr'*(ratio). Comparisons use exact
    fractions. Every piece path is tested, subpaths of pieces included. Paths are not extended beyond
    ℓ-length ⌈ratio·|V(component)|⌉; a piece of that length on a closed path is always a violation.

    :param ratio: the λ, positive.
    :param length: the length function, word length by default.
    :param workers: number of worker threads, one work item per start vertex.
    :param first_only: stop each work item at its first violation. The verdict is unchanged.
    :raises NotReducedError: on labellings that are not reduced.
    """
    ratio = Fraction(ratio)
    if ratio <= 0:
        raise ConfigError(f"ratio must be positive, got {ratio}")
    if length is None:
        length = LengthFunction.word()
    walker = _PieceWalker(graph, length, vertex_orbits(graph))
    oracle = _CycleOracle(graph, length)

    def from_start(start: int) -> Tuple[List[Violation], List[Violation], int]:
        comp_size = len(graph.component_of(start))
        cap = math.ceil(ratio * comp_size)
        violations: List[Violation] = []
        flips: List[Violation] = []
        count = 0
        for item in walker.walk(start, max_edges=comp_size, simple=True, extend_below=cap):
            count += 1
            bound = _cycle_lower_bound(len(item.steps), item.length, item.closed, length.is_word_length)
            if ratio * bound > item.length:
                continue
            girth = max(oracle.edge_girth(item.steps[0].edge), oracle.edge_girth(item.steps[-1].edge))
            if ratio * girth > item.length:
                continue
            path = Path(start, item.steps)
            completion = oracle.complete(path)
            if completion.cyclic == INFINITY or item.length < ratio * completion.cyclic:
                continue
            violation = Violation(path, completion.cycle, item.length, int(completion.cyclic))
            violations.append(violation)
            if item.length < ratio * completion.linear:
                flips.append(violation)
            if first_only:
                break
        return violations, flips, count

    results = ordered_map(from_start, graph.vertices, workers)
    violations = tuple(v for chunk, _, _ in results for v in chunk)
    flips = tuple(v for _, chunk, _ in results for v in chunk)
    checked = sum(count for _, _, count in results)
    verdict = ConditionVerdict("gr_metric", violations, flips, checked, ratio=ratio, length=length.kind)
    logger.info(f"{verdict.describe()}: {'satisfied' if verdict.satisfied else f'{len(violations)} violations'} "
                f"({checked} piece paths)")
    return verdict


def _canonical_cycle(graph: LabelledGraph, steps: List[PathStep]) -> Path:
    forward = list(steps)
    backward = [s.reversed() for s in reversed(steps)]
    best = None
    for seq in (forward, backward):
        for shift in range(len(seq)):
            rotated = tuple(seq[shift:] + seq[:shift])
            if best is None or rotated < best:
                best = rotated
    return Path(graph.step_ends(best[0])[0], best)


def _expand_node_cycle(graph: LabelledGraph, multigraph: nx.MultiGraph, nodes: List[int]) -> Iterator[Path]:
    if len(nodes) == 1:
        v = nodes[0]
        for key in sorted(multigraph[v][v]):
            yield _canonical_cycle(graph, [PathStep(key, Direction.FORWARD)])
        return
    if len(nodes) == 2:
        u, v = nodes
        for e1, e2 in combinations(sorted(multigraph[u][v]), 2):
            yield _canonical_cycle(graph, [_step_between(graph, e1, u), _step_between(graph, e2, v)])
        return
    hops = [sorted(multigraph[a][b]) for a, b in zip(nodes, nodes[1:] + nodes[:1])]
    for choice in product(*hops):
        yield _canonical_cycle(graph, [_step_between(graph, e, a) for e, a in zip(choice, nodes)])


def _step_between(graph: LabelledGraph, edge_id: int, origin: int) -> PathStep:
    edge = graph.edge(edge_id)
    return PathStep(edge_id, Direction.FORWARD if edge.source == origin else Direction.BACKWARD)


def iter_simple_cycles(graph: LabelledGraph) -> Iterator[Path]:
    """
    Every nontrivial simple closed path once, up to rotation and orientation.

    Loops and pairs of parallel edges count as cycles. Node cycles come from
    :func:`networkx.simple_cycles` on the underlying undirected multigraph and are expanded
    over all choices of parallel edges.
    """
    multigraph = nx.MultiGraph()
    multigraph.add_nodes_from(graph.vertices)
    for edge in graph.edges:
        multigraph.add_edge(edge.source, edge.target, key=edge.id)
    seen = set()
    for nodes in nx.simple_cycles(multigraph):
        for cycle in _expand_node_cycle(graph, multigraph, list(nodes)):
            if cycle not in seen:
                seen.add(cycle)
                yield cycle


def simple_cycles(graph: LabelledGraph, cycle_cap: int) -> List[Path]:
    """
    All nontrivial simple closed paths, one canonical representative each, sorted by size.

    :raises ResourceLimitError: if there are more than ``cycle_cap`` of them.
    """
    result = []
    for cycle in iter_simple_cycles(graph):
        result.append(cycle)
        if len(result) > cycle_cap:
            raise ResourceLimitError(f"more than {cycle_cap} simple cycles")
    result.sort(key=lambda c: (len(c.steps), c.steps))
    return result


def _minimal_cover(reach: List[int], origin: int) -> float:
    """Fewest arcs covering the cyclic positions starting at ``origin``; ``reach[j]`` is the longest arc from j."""
    n = len(reach)
    jumps = 0
    covered = 0
    farthest = 0
    position = 0
    while covered < n:
        while position <= covered and position < n:
            farthest = max(farthest, position + reach[(origin + position) % n])
            position += 1
        if farthest <= covered:
            return INFINITY
        jumps += 1
        covered = farthest
    return jumps


def check_gr_p(graph: LabelledGraph, p: int, cycle_cap: int = 20000, *, workers: int = 1) -> ConditionVerdict:
    """
    Check Gr(p): no nontrivial simple closed path is a concatenation of fewer than p pieces.

    For every cycle and every position j the longest piece starting at j is computed; since a prefix of
    a piece is a piece, the minimal number of pieces is a minimal interval cover of the cyclic positions.

    :raises ResourceLimitError: if the graph has more than ``cycle_cap`` simple cycles.
    :raises NotReducedError: on labellings that are not reduced.
    """
    if p < 2:
        raise ConfigError(f"p must be at least 2, got {p}")
    orbits = vertex_orbits(graph)
    cycles = simple_cycles(graph, cycle_cap)

    def longest_pieces(cycle: Path) -> List[int]:
        vertices = graph.path_vertices(cycle)[:-1]
        letters = [graph.step_letter(step) for step in cycle.steps]
        n = len(letters)
        reach = []
        for j in range(n):
            orbit = orbits[vertices[j]]
            partners = [w for w in graph.vertices if orbits[w] != orbit]
            size = 0
            while size < n and partners:
                letter = letters[(j + size) % n]
                moved = []
                for w in partners:
                    step = graph.step_for(w, letter)
                    if step is not None:
                        moved.append(graph.step_ends(step)[1])
                partners = moved
                if partners:
                    size += 1
            reach.append(size)
        return reach

    def fewest_pieces(cycle: Path) -> float:
        reach = longest_pieces(cycle)
        return min(_minimal_cover(reach, origin) for origin in range(len(reach)))

    counts = ordered_map(fewest_pieces, cycles, workers)
    violations = tuple(Violation(None, cycle, cycle_length=len(cycle.steps), pieces=int(count))
                       for cycle, count in zip(cycles, counts) if count < p)
    verdict = ConditionVerdict("gr_p", violations, (), len(cycles), p=p)
    logger.info(f"{verdict.describe()}: {'satisfied' if verdict.satisfied else f'{len(violations)} violations'} "
                f"({len(cycles)} cycles)")
    return verdict


def cycle_words(graph: LabelledGraph, cycles: List[Path]) -> List[Word]:
    """Labels of the given closed paths."""
    return [path_label(graph, cycle) for cycle in cycles]


def describe_path(graph: LabelledGraph, path: Path) -> str:
    """Human readable form ``<steps> [label]``."""
    return f"{path} [{format_word(path_label(graph, path))}]"
