#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
"""
Rips-Segev graphs.

A coefficient system (a, b, N, (C_i), (N_ij), (P_ij)) describes the graph:

1. N lines p_i labelled a^{C_i}, with marker vertices u_{i,j} after the prefix a^j;
2. at every u_{i,j} a copy (p_b)_{i,j} of a line labelled b is attached at its start (v0)_{i,j};
3. per line four identifications glue the ends of the line and the ends of the first and last
   b-lines to markers elsewhere:
   u_{i,0} ~ (v1)_{N_i1,P_i1}, (v1)_{i,0} ~ u_{N_i2,P_i2}, u_{i,C_i} ~ (v1)_{N_i3,P_i3} and
   (v1)_{i,C_i} ~ u_{N_i4,P_i4}.

Vertices get ids in construction order (lines, then their b-lines) and after the identifications
every class is named by its smallest id, then ids are made contiguous. Edge ids follow the
construction order.
"""
from __future__ import annotations

import itertools
import logging
import random
from collections import deque, Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, FrozenSet, Iterable

import networkx as nx
from networkx.utils import UnionFind

from grsc import updcert
from grsc.cancel import ConditionVerdict, check_gr_metric
from grsc.config import GrscConfig
from grsc.core import Alphabet, Word, Letter, Edge, LabelledGraph, Path, PathStep, Direction, LengthFunction, \
    cyclic_reduce, free_reduce, path_label, is_reduced_labelling
from grsc.exceptions import InvalidCoefficientsError, NotReducedError, DisconnectedGraphError, CertificateError, \
    ConfigError
from grsc.workers import ordered_map

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

Marker = Tuple[int, int]


def _int_rows(rows: Iterable[Iterable[int]]) -> Tuple[Tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in row) for row in rows)


@dataclass(frozen=True)
class CoefficientSystem:
    """
    The data (a, b, N, (C_i), (N_ij), (P_ij)) of a Rips-Segev graph.

    Rows of ``nij`` and ``pij`` are indexed by the line i (1-based in the text, 0-based in the tuples)
    and have four entries each. ``alphabet`` is optional; by default the generators of ``a`` form one
    block and the generators of ``b`` another.
    """
    a: Word
    b: Word
    n: int
    c: Tuple[int, ...]
    nij: Tuple[Tuple[int, ...], ...]
    pij: Tuple[Tuple[int, ...], ...]
    alphabet: Optional[Alphabet] = None

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "c", tuple(int(x) for x in self.c))
        object.__setattr__(self, "nij", _int_rows(self.nij))
        object.__setattr__(self, "pij", _int_rows(self.pij))

    @property
    def resolved_alphabet(self) -> Alphabet:
        if self.alphabet is not None:
            return self.alphabet
        s_block = sorted(self.a.generators())
        t_block = sorted(self.b.generators())
        if set(s_block) & set(t_block):
            raise InvalidCoefficientsError(f"a and b share generators {sorted(set(s_block) & set(t_block))}")
        return Alphabet(s_block + t_block, [s_block, t_block])

    def line_length(self, i: int) -> int:
        """C_i for the 1-based line index i."""
        return self.c[i - 1]

    def validate(self) -> None:
        """:raises InvalidCoefficientsError: naming the first violated invariant."""
        if not len(self.a) or not len(self.b):
            raise InvalidCoefficientsError("a and b must be nontrivial")
        for name, word in (("a", self.a), ("b", self.b)):
            if cyclic_reduce(word) != word:
                raise InvalidCoefficientsError(f"{name} = {word} is not cyclically reduced")
        alphabet = self.resolved_alphabet
        blocks = []
        for name, word in (("a", self.a), ("b", self.b)):
            for gen in word.generators():
                if gen not in alphabet:
                    raise InvalidCoefficientsError(f"generator {gen!r} of {name} is not in the alphabet")
            word_blocks = {alphabet.block_of(gen) for gen in word.generators()}
            if len(word_blocks) != 1:
                raise InvalidCoefficientsError(f"{name} = {word} is not a word over a single block")
            blocks.append(word_blocks.pop())
        if blocks[0] == blocks[1]:
            raise InvalidCoefficientsError("a and b must be words over different blocks")
        if self.n < 1:
            raise InvalidCoefficientsError(f"N must be positive, got {self.n}")
        if len(self.c) != self.n:
            raise InvalidCoefficientsError(f"expected {self.n} values C_i, got {len(self.c)}")
        if any(ci < 1 for ci in self.c):
            raise InvalidCoefficientsError(f"all C_i must be positive, got {list(self.c)}")
        for name, rows in (("NIJ", self.nij), ("PIJ", self.pij)):
            if len(rows) != self.n or any(len(row) != 4 for row in rows):
                raise InvalidCoefficientsError(f"{name} must have {self.n} rows of 4 entries")
        for i, (n_row, p_row) in enumerate(zip(self.nij, self.pij), start=1):
            for j, (line, position) in enumerate(zip(n_row, p_row), start=1):
                if not 1 <= line <= self.n:
                    raise InvalidCoefficientsError(f"N_{i},{j} = {line} is not in 1..{self.n}")
                if not 0 <= position <= self.c[line - 1]:
                    raise InvalidCoefficientsError(
                        f"P_{i},{j} = {position} is not in 0..C_{line} = {self.c[line - 1]}")

    def with_words(self, a: Word, b: Word, alphabet: Optional[Alphabet]) -> CoefficientSystem:
        """The same combinatorial data with other words a, b."""
        return replace(self, a=a, b=b, alphabet=alphabet)

    def identifications(self) -> List[Tuple[Tuple[str, int, int], Tuple[str, int, int]]]:
        """The 4N marker pairs glued in step 3, as (kind, i, j) keys with kind ``u`` or ``v1``."""
        result = []
        for i in range(1, self.n + 1):
            n_row, p_row = self.nij[i - 1], self.pij[i - 1]
            last = self.c[i - 1]
            result.append((("u", i, 0), ("v1", n_row[0], p_row[0])))
            result.append((("v1", i, 0), ("u", n_row[1], p_row[1])))
            result.append((("u", i, last), ("v1", n_row[2], p_row[2])))
            result.append((("v1", i, last), ("u", n_row[3], p_row[3])))
        return result

    def edge_count(self) -> int:
        return sum(ci * len(self.a) + (ci + 1) * len(self.b) for ci in self.c)


@dataclass(frozen=True)
class RSGraph:
    """
    A Rips-Segev graph with its marker vertices.

    ``u``, ``v0`` and ``v1`` map (i, j) to vertex ids. ``line_steps[(i, j)]`` is the path from
    u_{i,j} to u_{i,j+1} and ``b_steps[(i, j)]`` the path from (v0)_{i,j} to (v1)_{i,j}.
    """
    cs: CoefficientSystem
    graph: LabelledGraph
    u: Dict[Marker, int]
    v0: Dict[Marker, int]
    v1: Dict[Marker, int]
    line_steps: Dict[Marker, Tuple[PathStep, ...]] = field(repr=False)
    b_steps: Dict[Marker, Tuple[PathStep, ...]] = field(repr=False)
    identified: bool = True

    @property
    def base(self) -> int:
        """u_{1,0}"""
        return self.u[(1, 0)]

    def line_path(self, i: int, j: int) -> Path:
        return Path(self.u[(i, j)], self.line_steps[(i, j)])

    def b_path(self, i: int, j: int) -> Path:
        return Path(self.v0[(i, j)], self.b_steps[(i, j)])


def build_rips_segev(cs: CoefficientSystem, identify: bool = True) -> RSGraph:
    """
    Run the three step construction.

    :param identify: perform the identifications of step 3. Without them the graph is the disjoint
        union of the lines with their b-lines attached.
    :raises InvalidCoefficientsError: if ``cs`` is invalid.
    :raises NotReducedError: if the identifications produce a labelling that is not reduced.
    """
    cs.validate()
    counter = itertools.count()
    raw_edges: List[Tuple[int, int, str]] = []

    def lay(start: int, word: Word) -> Tuple[int, Tuple[PathStep, ...]]:
        current = start
        steps = []
        for letter in word:
            nxt = next(counter)
            steps.append(PathStep(len(raw_edges), Direction.FORWARD if letter.sign > 0 else Direction.BACKWARD))
            if letter.sign > 0:
                raw_edges.append((current, nxt, letter.generator))
            else:
                raw_edges.append((nxt, current, letter.generator))
            current = nxt
        return current, tuple(steps)

    u: Dict[Marker, int] = {}
    v0: Dict[Marker, int] = {}
    v1: Dict[Marker, int] = {}
    line_steps: Dict[Marker, Tuple[PathStep, ...]] = {}
    b_steps: Dict[Marker, Tuple[PathStep, ...]] = {}
    for i in range(1, cs.n + 1):
        u[(i, 0)] = next(counter)
        for j in range(1, cs.line_length(i) + 1):
            u[(i, j)], line_steps[(i, j - 1)] = lay(u[(i, j - 1)], cs.a)
        for j in range(cs.line_length(i) + 1):
            v0[(i, j)] = next(counter)
            v1[(i, j)], b_steps[(i, j)] = lay(v0[(i, j)], cs.b)

    raw_count = next(counter)
    classes = UnionFind(range(raw_count))
    for key, vertex in u.items():
        classes.union(vertex, v0[key])
    if identify:
        named = {"u": u, "v1": v1}
        for (kind1, i1, j1), (kind2, i2, j2) in cs.identifications():
            classes.union(named[kind1][(i1, j1)], named[kind2][(i2, j2)])

    representative = {}
    for members in classes.to_sets():
        smallest = min(members)
        for raw in members:
            representative[raw] = smallest
    compact = {raw: index for index, raw in enumerate(sorted(set(representative.values())))}
    canonical = {raw: compact[representative[raw]] for raw in range(raw_count)}

    edges = [Edge(eid, canonical[source], canonical[target], label)
             for eid, (source, target, label) in enumerate(raw_edges)]
    graph = LabelledGraph(cs.resolved_alphabet, range(len(compact)), edges)
    verdict = is_reduced_labelling(graph)
    if not verdict:
        raise NotReducedError(verdict, f"coefficient system gives a labelling that is not reduced: {verdict}")

    def remap(markers: Dict[Marker, int]) -> Dict[Marker, int]:
        return {key: canonical[raw] for key, raw in markers.items()}

    rsg = RSGraph(cs, graph, remap(u), remap(v0), remap(v1), line_steps, b_steps, identify)
    logger.debug(f"Rips-Segev graph N={cs.n} C={list(cs.c)}: {len(graph.vertices)} vertices, "
                 f"{len(graph.edges)} edges")
    return rsg


def is_connected(rsg: RSGraph) -> bool:
    return len(rsg.graph.components()) == 1


@dataclass(frozen=True)
class ProductSets:
    """
    The sets A = A_1 ∪ ... ∪ A_N and B = {1, a, b, ab}.

    ``a_sets[i-1]`` is A_i = (w_i, w_i a, ..., w_i a^{C_i-1}), ``connectors[i-1]`` is w_i and ``base``
    the vertex u_{1,0} all paths start from. All words are freely reduced.
    """
    a_sets: Tuple[Tuple[Word, ...], ...]
    b_set: Tuple[Word, ...]
    connectors: Tuple[Word, ...]
    base: int

    def a_entries(self) -> List[Tuple[Marker, Word]]:
        """((i, j), w_i a^j) for all entries, in order."""
        return [((i, j), word) for i, words in enumerate(self.a_sets, start=1) for j, word in enumerate(words)]

    @property
    def a_elements(self) -> List[Word]:
        """The distinct words of A in order of first appearance."""
        return list(dict.fromkeys(word for _, word in self.a_entries()))


def _shortest_paths(graph: LabelledGraph, source: int) -> Dict[int, Path]:
    """
    Breadth first search with steps in (edge, direction) order: every vertex gets its shortest path
    with the lexicographically smallest step sequence.
    """
    parent: Dict[int, Optional[Tuple[int, PathStep]]] = {source: None}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        for step in graph.steps_from(x):
            y = graph.step_ends(step)[1]
            if y not in parent:
                parent[y] = (x, step)
                queue.append(y)
    result = {}
    for target in parent:
        steps = []
        current = target
        while parent[current] is not None:
            current, step = parent[current]
            steps.append(step)
        result[target] = Path(source, tuple(reversed(steps)))
    return result


def build_sets(cs: CoefficientSystem, rsg: RSGraph) -> ProductSets:
    """
    Build A and B. The connector w_i is the label of the shortest path from u_{1,0} to u_{i,0},
    ties broken by the lexicographically smallest step sequence.

    :raises DisconnectedGraphError: if ``rsg`` has more than one component.
    """
    if not is_connected(rsg):
        raise DisconnectedGraphError("the sets A_i need a connected Rips-Segev graph")
    paths = _shortest_paths(rsg.graph, rsg.base)
    connectors = []
    a_sets = []
    for i in range(1, cs.n + 1):
        w = free_reduce(path_label(rsg.graph, paths[rsg.u[(i, 0)]]))
        connectors.append(w)
        a_sets.append(tuple(free_reduce(w * cs.a ** j) for j in range(cs.line_length(i))))
    b_set = (Word(), free_reduce(cs.a), free_reduce(cs.b), free_reduce(cs.a * cs.b))
    return ProductSets(tuple(a_sets), b_set, tuple(connectors), rsg.base)


@dataclass
class SearchResult:
    """
    Outcome of :func:`search_coefficients`.

    When ``found`` is set, ``cs``, ``rsg`` and ``verdict`` describe a connected system whose graph
    satisfies the metric condition with ``ratio`` and ``length``; otherwise the budget ran out.
    """
    found: bool
    cs: Optional[CoefficientSystem] = None
    rsg: Optional[RSGraph] = None
    verdict: Optional[ConditionVerdict] = None
    certificate: Optional[updcert.Certificate] = None
    candidates: int = 0
    restarts: int = 0
    ratio: Fraction = Fraction(1, 6)
    length: str = "free_product"
    certificate_required: bool = True
    rejections: Dict[str, int] = field(default_factory=dict)


class _MarkerClasses:
    """
    Union-find over marker vertices that refuses merges creating two equal leaving letters at a vertex.

    The leaving letters of a marker are the letters that can be read from it along the construction:
    the first letter of a, the inverse of the last letter of a and the first letter of b at u_{i,j};
    the inverse of the last letter of b at (v1)_{i,j}.
    """

    def __init__(self, a: Word, b: Word, c: Tuple[int, ...]):
        first_a, last_a = a[0], a[-1].inverse()
        first_b, last_b = b[0], b[-1].inverse()
        self.parent: Dict[Tuple[str, int, int], Tuple[str, int, int]] = {}
        self.letters: Dict[Tuple[str, int, int], FrozenSet[Letter]] = {}
        for i, ci in enumerate(c, start=1):
            for j in range(ci + 1):
                letters = {first_b}
                if j < ci:
                    letters.add(first_a)
                if j > 0:
                    letters.add(last_a)
                self.parent[("u", i, j)] = ("u", i, j)
                self.letters[("u", i, j)] = frozenset(letters)
                self.parent[("v1", i, j)] = ("v1", i, j)
                self.letters[("v1", i, j)] = frozenset([last_b])

    def copy(self) -> _MarkerClasses:
        other = object.__new__(_MarkerClasses)
        other.parent = dict(self.parent)
        other.letters = dict(self.letters)
        return other

    def find(self, key):
        while self.parent[key] != key:
            key = self.parent[key]
        return key

    def union(self, x, y) -> bool:
        """Merge the classes of x and y; False (and no change) if they share a leaving letter."""
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return True
        if self.letters[rx] & self.letters[ry]:
            return False
        self.parent[ry] = rx
        self.letters[rx] = self.letters[rx] | self.letters.pop(ry)
        return True


class _Sampler:
    """Seeded random generation of coefficient systems with backtracking over the identifications."""

    def __init__(self, a: Word, b: Word, alphabet: Optional[Alphabet], config: GrscConfig):
        self.a = a
        self.b = b
        self.alphabet = alphabet
        self.config = config

    def sample(self, rng: random.Random, n_max: int, c_max: int) -> Optional[CoefficientSystem]:
        cfg = self.config
        n = rng.randint(cfg.search_n_min, n_max)
        # the larger of two draws favours long lines
        c = tuple(max(rng.randint(cfg.search_c_min, c_max), rng.randint(cfg.search_c_min, c_max))
                  for _ in range(n))
        assignment = self._assign(rng, n, c)
        if assignment is None:
            return None
        nij = [[0] * 4 for _ in range(n)]
        pij = [[0] * 4 for _ in range(n)]
        for (i, k), (line, position) in assignment.items():
            nij[i - 1][k] = line
            pij[i - 1][k] = position
        return CoefficientSystem(self.a, self.b, n, c, nij, pij, self.alphabet)

    def _assign(self, rng: random.Random, n: int, c: Tuple[int, ...]) -> Optional[Dict[Tuple[int, int], Marker]]:
        slots = [(i, k) for i in range(1, n + 1) for k in range(4)]
        used: Dict[int, List[int]] = {line: [] for line in range(1, n + 1)}
        assignment: Dict[Tuple[int, int], Marker] = {}
        attempts = 0

        def left(i: int, k: int) -> Tuple[str, int, int]:
            end = 0 if k < 2 else c[i - 1]
            return ("u" if k % 2 == 0 else "v1"), i, end

        def options(i: int) -> List[Marker]:
            targets = [(line, position) for line in range(1, n + 1) for position in range(c[line - 1] + 1)]
            rng.shuffle(targets)

            def spread(target: Marker) -> int:
                line, position = target
                if not used[line]:
                    return c[line - 1] + 1
                return min(abs(position - p) for p in used[line])

            # stable sort keeps the shuffled order among equally scattered targets
            return sorted(targets, key=lambda t: (-spread(t), t[0] == i))

        def descend(index: int, classes: _MarkerClasses) -> bool:
            nonlocal attempts
            if index == len(slots):
                return True
            i, k = slots[index]
            kind = "v1" if k % 2 == 0 else "u"
            for line, position in options(i):
                attempts += 1
                if attempts > self.config.backtrack_limit:
                    return False
                trial = classes.copy()
                if not trial.union(left(i, k), (kind, line, position)):
                    continue
                assignment[(i, k)] = (line, position)
                used[line].append(position)
                if descend(index + 1, trial):
                    return True
                used[line].pop()
                del assignment[(i, k)]
            return False

        if not descend(0, _MarkerClasses(self.a, self.b, c)):
            return None
        lines = UnionFind(range(1, n + 1))
        for (i, _), (line, _) in assignment.items():
            lines.union(i, line)
        if len(list(lines.to_sets())) != 1:
            return None
        return assignment


def golomb_rulers(c_min: int, c_max: int) -> List[Tuple[int, int, int]]:
    """
    Four-mark Golomb rulers 0 < r1 < r2 < C with C in ``c_min..c_max``: all six distances between
    the marks 0, r1, r2, C differ. Ordered by C, then r1.
    """
    result = []
    for c in range(max(c_min, 3), c_max + 1):
        for r1 in range(1, c - 1):
            for r2 in range(r1 + 1, c):
                marks = (0, r1, r2, c)
                distances = [y - x for x, y in itertools.combinations(marks, 2)]
                if len(set(distances)) == len(distances):
                    result.append((r1, r2, c))
    return result


@dataclass(frozen=True)
class Skeleton:
    """
    The incidence structure of lines and b-chains behind a coefficient system.

    A b-chain is a maximal sequence of markers in which the b-line of each marker ends at the next
    marker. In a skeleton every line meets four chains and every chain four lines. ``lines[i]``
    names the chains met by line i at u_{i,0}, at its two interior points and at u_{i,C_i}.
    ``chains[k]`` names the lines met by chain k from its first marker to its last one. The two middle
    markers of a chain are line ends, the first and the last are interior points. Indices are 0-based.

    A closed path in the Rips-Segev graph turns only at chain markers, so its free product length
    is at least the girth of the incidence graph.

    :raises InvalidCoefficientsError: if the two tables do not describe the same incidences.
    """
    lines: Tuple[Tuple[int, int, int, int], ...]
    chains: Tuple[Tuple[int, int, int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "lines", _int_rows(self.lines))
        object.__setattr__(self, "chains", _int_rows(self.chains))
        if len(self.lines) != len(self.chains):
            raise InvalidCoefficientsError(f"{len(self.lines)} lines but {len(self.chains)} chains")
        for name, rows in (("line", self.lines), ("chain", self.chains)):
            for index, row in enumerate(rows):
                if len(row) != 4 or len(set(row)) != 4 or not all(0 <= x < len(rows) for x in row):
                    raise InvalidCoefficientsError(f"{name} {index} needs four different partners, got {row}")
        for i, row in enumerate(self.lines):
            for role, k in enumerate(row):
                if i not in self.chains[k]:
                    raise InvalidCoefficientsError(f"line {i} meets chain {k} but the chain does not list it")
                height = self.chains[k].index(i)
                if (role in (0, 3)) != (height in (1, 2)):
                    raise InvalidCoefficientsError(f"line {i} and chain {k}: line ends must be the middle markers")

    @property
    def n(self) -> int:
        return len(self.lines)

    def incidence_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_edges_from((("line", i), ("chain", k)) for i, row in enumerate(self.lines) for k in row)
        return graph

    def girth(self) -> float:
        return nx.girth(self.incidence_graph())

    def coefficients(self, a: Word, b: Word, ruler: Tuple[int, int, int],
                     alphabet: Optional[Alphabet] = None) -> CoefficientSystem:
        """
        Lay every line out on the marks 0, r1, r2, C of ``ruler`` and read the identifications off
        the chains: the end u_{i,0} is glued to the b-line of the marker below it and its own b-line
        to the marker above it, and the same for u_{i,C}.
        """
        r1, r2, c = ruler
        if not 0 < r1 < r2 < c:
            raise InvalidCoefficientsError(f"ruler marks must satisfy 0 < r1 < r2 < C, got {ruler}")
        marks = (0, r1, r2, c)

        def position(line: int, chain: int) -> int:
            return marks[self.lines[line].index(chain)]

        nij, pij = [], []
        for i, row in enumerate(self.lines):
            n_row, p_row = [], []
            for chain in (row[0], row[3]):
                order = self.chains[chain]
                height = order.index(i)
                for neighbour in (order[height - 1], order[height + 1]):
                    n_row.append(neighbour + 1)
                    p_row.append(position(neighbour, chain))
            nij.append(n_row)
            pij.append(p_row)
        return CoefficientSystem(a, b, self.n, (c,) * self.n, nij, pij, alphabet)


def circulant_skeleton(n: int, offsets: Tuple[int, int, int, int]) -> Skeleton:
    """
    Line x meets the chains x + d for d in ``offsets`` (mod n): at its start for the first offset, at
    its end for the second and inside for the other two. Chains list their lines by the offset order
    (third, first, second, fourth).

    Rotation x -> x + 1 is a label-preserving automorphism of the resulting graph. The incidence
    graph has girth 6 exactly when the offsets have pairwise different differences mod n.
    """
    d0, d1, d2, d3 = offsets
    lines = [((x + d0) % n, (x + d2) % n, (x + d3) % n, (x + d1) % n) for x in range(n)]
    chains = [((p - d2) % n, (p - d0) % n, (p - d1) % n, (p - d3) % n) for p in range(n)]
    return Skeleton(tuple(lines), tuple(chains))


def regular_skeleton(graph: nx.Graph, rng: random.Random) -> Skeleton:
    """
    Skeleton of the bipartite double cover of a connected 4-regular graph: line v meets chain w
    whenever v and w are adjacent.

    An Euler tour orients every vertex with two outgoing and two incoming edges. Line v ends at the
    chains of its out-neighbours, which in turn use v for a middle marker; everything else is interior.
    The double cover has at least the girth of ``graph``.
    """
    nodes = sorted(graph)
    index = {v: i for i, v in enumerate(nodes)}
    outgoing: Dict[int, List[int]] = {i: [] for i in range(len(nodes))}
    incoming: Dict[int, List[int]] = {i: [] for i in range(len(nodes))}
    for v, w in nx.eulerian_circuit(graph, source=nodes[0]):
        outgoing[index[v]].append(index[w])
        incoming[index[w]].append(index[v])
    lines, chains = [], []
    for i in range(len(nodes)):
        ends, inner = list(outgoing[i]), list(incoming[i])
        rng.shuffle(ends)
        rng.shuffle(inner)
        lines.append((ends[0], inner[0], inner[1], ends[1]))
        middle, outer = list(incoming[i]), list(outgoing[i])
        rng.shuffle(middle)
        rng.shuffle(outer)
        chains.append((outer[0], middle[0], middle[1], outer[1]))
    return Skeleton(tuple(lines), tuple(chains))


class _SkeletonSampler:
    """
    Seeded generation of coefficient systems from skeletons of large girth, every line laid out on
    one Golomb ruler.

    Distances between chain markers on a line then identify the pair of markers, which keeps pieces
    from running through more than one full a-syllable between chain markers.
    """

    def __init__(self, a: Word, b: Word, alphabet: Optional[Alphabet], config: GrscConfig):
        self.a = a
        self.b = b
        self.alphabet = alphabet
        self.config = config
        self.rulers = golomb_rulers(config.search_c_min, max(config.search_c_max, 6))
        if not self.rulers:
            raise ConfigError(f"no Golomb ruler of length {config.search_c_min}..{config.search_c_max}")

    def draw(self, rng: random.Random, n: int) -> Optional[Skeleton]:
        if self.config.search_skeleton == "circulant":
            return circulant_skeleton(n, tuple(rng.sample(range(n), 4)))
        graph = nx.random_regular_graph(4, n, seed=rng.randrange(2 ** 32))
        if not nx.is_connected(graph):
            return None
        return regular_skeleton(graph, rng)

    def sample(self, rng: random.Random, n_max: int, c_max: int) -> Optional[CoefficientSystem]:
        cfg = self.config
        low = max(cfg.search_n_min, 5)
        n = rng.randint(low, max(low, n_max))
        rulers = [ruler for ruler in self.rulers if ruler[2] <= c_max] or \
                 [ruler for ruler in self.rulers if ruler[2] == self.rulers[0][2]]
        ruler = rng.choice(rulers)
        for _ in range(cfg.backtrack_limit):
            skeleton = self.draw(rng, n)
            if skeleton is None:
                continue
            girth = skeleton.girth()
            if girth >= cfg.search_girth:
                logger.debug(f"{cfg.search_skeleton} skeleton with {n} lines, girth {girth}, ruler {ruler}")
                return skeleton.coefficients(self.a, self.b, ruler, self.alphabet)
        return None


class _Outcome:
    __slots__ = ("index", "cs", "rsg", "verdict", "certificate", "reason")

    def __init__(self, index: int, cs: CoefficientSystem, rsg: Optional[RSGraph] = None,
                 verdict: Optional[ConditionVerdict] = None, certificate=None, reason: Optional[str] = None):
        self.index = index
        self.cs = cs
        self.rsg = rsg
        self.verdict = verdict
        self.certificate = certificate
        self.reason = reason


def search_coefficients(a: Word, b: Word, budget: Optional[int] = None, seed: Optional[int] = None,
                        config: Optional[GrscConfig] = None, alphabet: Optional[Alphabet] = None) -> SearchResult:
    """
    Search for a connected coefficient system whose Rips-Segev graph satisfies the metric condition.

    Restarts are geometric: restart r draws ``restart_base * 2**r`` candidates from its own random
    generator, seeded with ``(seed, r)``, and allows slightly more lines and longer lines than the
    previous one. With ``search_strategy="skeleton"`` a candidate comes from a line/chain incidence
    structure of girth at least ``search_girth`` (see :class:`Skeleton`) and the allowed number of
    lines doubles per restart; ``"random"`` samples the identifications directly. Each candidate is built, checked for reducedness and connectivity, optionally for a
    product certificate, and then verified with :func:`~grsc.cancel.check_gr_metric`.
    Candidates are evaluated in batches of ``workers``; the verified candidate with the smallest
    index wins, so results depend on the seed only.

    :param budget: maximal number of candidates, ``config.budget`` by default. 0 never finds anything.
    :param seed: random seed, ``config.seed`` by default.
    :param config: ratio, length function and search ranges.
    :return: a :class:`SearchResult`; ``found`` is False when the budget is exhausted.
    :raises InvalidCoefficientsError: if a or b is not a valid pair of words.
    """
    cfg = config or GrscConfig()
    budget = cfg.budget if budget is None else budget
    seed = cfg.seed if seed is None else seed
    template = CoefficientSystem(a, b, 1, (1,), ((1, 1, 1, 1),), ((0, 0, 0, 0),), alphabet)
    template.validate()
    length = LengthFunction.from_name(cfg.length, template.resolved_alphabet)
    skeletons = cfg.search_strategy == "skeleton"
    sampler = _SkeletonSampler(a, b, alphabet, cfg) if skeletons else _Sampler(a, b, alphabet, cfg)
    empty_draw = "skeleton" if skeletons else "assignment"
    rejections: Counter = Counter()

    def evaluate(item: Tuple[int, CoefficientSystem]) -> _Outcome:
        index, cs = item
        try:
            rsg = build_rips_segev(cs)
        except NotReducedError:
            return _Outcome(index, cs, reason="not-reduced")
        if not is_connected(rsg):
            return _Outcome(index, cs, reason="disconnected")
        certificate = None
        if cfg.require_certificate:
            try:
                certificate = updcert.build_certificate(rsg, build_sets(cs, rsg))
            except CertificateError:
                return _Outcome(index, cs, reason="certificate")
        verdict = check_gr_metric(rsg.graph, cfg.ratio, length, first_only=True)
        if not verdict.satisfied:
            return _Outcome(index, cs, reason="violation")
        return _Outcome(index, cs, rsg, verdict, certificate)

    result = SearchResult(False, ratio=cfg.ratio, length=cfg.length, certificate_required=cfg.require_certificate)
    candidates = 0
    restart = 0
    while candidates < budget:
        quota = cfg.restart_base * 2 ** restart
        if skeletons:
            n_max = min(cfg.search_n_max, max(cfg.search_n_min, 5) * 2 ** restart)
        else:
            n_max = min(cfg.search_n_max, cfg.search_n_min + restart)
        c_max = min(cfg.search_c_max, cfg.search_c_min + 2 * restart)
        rng = random.Random(f"{seed}:{restart}")
        logger.info(f"search restart {restart}: {quota} candidates, N <= {n_max}, C <= {c_max}")
        drawn = 0
        while drawn < quota and candidates < budget:
            batch = []
            while len(batch) < cfg.workers and drawn < quota and candidates < budget:
                cs = sampler.sample(rng, n_max, c_max)
                candidates += 1
                drawn += 1
                if cs is None:
                    rejections[empty_draw] += 1
                    continue
                batch.append((candidates, cs))
            for outcome in ordered_map(evaluate, batch, cfg.workers):
                if outcome.reason is None:
                    logger.info(f"candidate {outcome.index} verified: N={outcome.cs.n} C={list(outcome.cs.c)}")
                    result.found = True
                    result.cs = outcome.cs
                    result.rsg = outcome.rsg
                    result.verdict = outcome.verdict
                    result.certificate = outcome.certificate
                    result.candidates = outcome.index
                    result.restarts = restart
                    result.rejections = dict(rejections)
                    return result
                rejections[outcome.reason] += 1
                logger.debug(f"candidate {outcome.index} rejected: {outcome.reason}")
        restart += 1

    result.candidates = candidates
    result.restarts = restart
    result.rejections = dict(rejections)
    logger.warning(f"no verified coefficient system within {budget} candidates ({dict(rejections)})")
    return result
