#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
"""
Foundational data model: alphabets, words, length functions, labelled oriented graphs and paths.

All classes in this module are immutable after construction and can be shared freely between
worker threads.
"""
from __future__ import annotations

import logging
import re
from enum import IntEnum
from typing import Iterable, Iterator, Union, Optional, Dict, List, Tuple, NamedTuple, Sequence, FrozenSet

import networkx as nx

from grsc.exceptions import InvalidAlphabetError, InvalidWordError, InvalidPathError, InvalidGraphError

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

_GENERATOR_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(@[0-9]+)?$")
_SYLLABLE_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*(?:@[0-9]+)?)(?:\^(-?[0-9]+))?$")


def product_symbol(generator: str, coset: int) -> str:
    """The symbol of the generator ``generator`` subscripted by ``coset``, e.g. ``s@2``."""
    return f"{generator}@{coset}"


def split_symbol(symbol: str) -> Tuple[str, Optional[int]]:
    """Inverse of :func:`product_symbol`. Plain symbols return ``(symbol, None)``."""
    name, sep, coset = symbol.partition("@")
    if not sep:
        return symbol, None
    return name, int(coset)


class Alphabet:
    """
    An ordered set of generator names together with a partition into blocks.

    The partition is the one used by the free product length: a syllable is a maximal run of
    letters whose generators lie in the same block.
    If no partition is given every generator forms its own block.

    :param generators: Distinct generator names.
    :param partition: Disjoint, non-empty blocks covering the generators.
    :raises InvalidAlphabetError: if any of the invariants is violated.
    """

    def __init__(self, generators: Iterable[str], partition: Optional[Iterable[Iterable[str]]] = None):
        gens = tuple(generators)
        for gen in gens:
            if not isinstance(gen, str) or not _GENERATOR_RE.match(gen):
                raise InvalidAlphabetError(f"invalid generator name {gen!r}")
        if len(set(gens)) != len(gens):
            raise InvalidAlphabetError(f"duplicate generators in {gens}")

        if partition is None:
            blocks = tuple((gen,) for gen in gens)
        else:
            blocks = tuple(tuple(block) for block in partition)

        seen: Dict[str, int] = {}
        for index, block in enumerate(blocks):
            if not block:
                raise InvalidAlphabetError("empty partition block")
            for gen in block:
                if gen not in gens:
                    raise InvalidAlphabetError(f"partition mentions unknown generator {gen!r}")
                if gen in seen:
                    raise InvalidAlphabetError(f"generator {gen!r} is in more than one block")
                seen[gen] = index
        if len(seen) != len(gens):
            missing = [gen for gen in gens if gen not in seen]
            raise InvalidAlphabetError(f"partition does not cover {missing}")

        self._generators = gens
        self._partition = blocks
        self._block_of = seen

    @property
    def generators(self) -> Tuple[str, ...]:
        return self._generators

    @property
    def partition(self) -> Tuple[Tuple[str, ...], ...]:
        return self._partition

    def block_of(self, generator: str) -> int:
        """Index of the partition block containing ``generator``."""
        try:
            return self._block_of[generator]
        except KeyError:
            raise InvalidAlphabetError(f"{generator!r} is not in the alphabet") from None

    def product(self, h: int) -> Alphabet:
        """
        The alphabet S × {1..h} with symbols ``g@v``.

        Every block P of the partition becomes the block P × {1..h}.
        """
        if h < 1:
            raise InvalidAlphabetError(f"coset count must be positive, got {h}")
        gens = [product_symbol(gen, v) for gen in self._generators for v in range(1, h + 1)]
        blocks = [[product_symbol(gen, v) for gen in block for v in range(1, h + 1)] for block in self._partition]
        return Alphabet(gens, blocks)

    def __contains__(self, generator: object) -> bool:
        return generator in self._block_of

    def __len__(self) -> int:
        return len(self._generators)

    def __iter__(self) -> Iterator[str]:
        return iter(self._generators)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Alphabet):
            return NotImplemented
        return self._generators == other._generators and self._partition == other._partition

    def __hash__(self) -> int:
        return hash((self._generators, self._partition))

    def __repr__(self) -> str:
        blocks = " ".join("{" + ",".join(block) + "}" for block in self._partition)
        return f"Alphabet({' '.join(self._generators)} | {blocks})"


class Letter(NamedTuple):
    """A generator with an exponent of +1 or -1."""
    generator: str
    sign: int = 1

    def inverse(self) -> Letter:
        return Letter(self.generator, -self.sign)

    def __str__(self) -> str:
        return self.generator if self.sign > 0 else f"{self.generator}^-1"


class Word:
    """
    A finite sequence of letters.

    Words are *not* reduced automatically: ``Word.parse("s s^-1")`` has two letters.
    Use :func:`free_reduce` or :func:`cyclic_reduce` explicitly.
    """
    __slots__ = ("_letters",)

    def __init__(self, letters: Iterable[Union[Letter, Tuple[str, int]]] = ()):
        result = []
        for letter in letters:
            gen, sign = letter
            if sign not in (1, -1):
                raise InvalidWordError(f"letter sign must be +1 or -1, got {sign}")
            result.append(Letter(gen, sign))
        self._letters: Tuple[Letter, ...] = tuple(result)

    @classmethod
    def parse(cls, text: str) -> Word:
        return parse_word(text)

    @classmethod
    def generator(cls, name: str, power: int = 1) -> Word:
        letter = Letter(name, 1 if power > 0 else -1)
        return cls([letter] * abs(power))

    @property
    def letters(self) -> Tuple[Letter, ...]:
        return self._letters

    def generators(self) -> FrozenSet[str]:
        return frozenset(letter.generator for letter in self._letters)

    def inverse(self) -> Word:
        return Word(letter.inverse() for letter in reversed(self._letters))

    def __invert__(self) -> Word:
        return self.inverse()

    def __mul__(self, other: Word) -> Word:
        if not isinstance(other, Word):
            return NotImplemented
        return Word(self._letters + other._letters)

    def __pow__(self, power: int) -> Word:
        if power < 0:
            return self.inverse() ** -power
        return Word(self._letters * power)

    def __len__(self) -> int:
        return len(self._letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self._letters)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word(self._letters[item])
        return self._letters[item]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Word):
            return NotImplemented
        return self._letters == other._letters

    def __lt__(self, other: Word) -> bool:
        return self.sort_key() < other.sort_key()

    def __hash__(self) -> int:
        return hash(self._letters)

    def sort_key(self) -> Tuple[Tuple[str, int], ...]:
        return tuple((letter.generator, -letter.sign) for letter in self._letters)

    def __str__(self) -> str:
        return format_word(self)

    def __repr__(self) -> str:
        return f"Word('{format_word(self)}')"


def parse_word(text: str) -> Word:
    """
    Parse the syllable syntax ``s^2 t^-1 s``.

    Syllables are separated by whitespace, a missing exponent means 1 and the single token ``1``
    denotes the empty word.

    :raises InvalidWordError: on malformed syllables or a zero exponent.
    """
    tokens = text.split()
    if tokens == ["1"] or not tokens:
        return Word()
    letters: List[Letter] = []
    for token in tokens:
        match = _SYLLABLE_RE.match(token)
        if not match:
            raise InvalidWordError(f"malformed syllable {token!r} in {text!r}")
        gen, exponent = match.group(1), match.group(2)
        power = int(exponent) if exponent is not None else 1
        if power == 0:
            raise InvalidWordError(f"zero exponent in {token!r}")
        letters.extend([Letter(gen, 1 if power > 0 else -1)] * abs(power))
    return Word(letters)


def format_word(word: Word) -> str:
    """Inverse of :func:`parse_word`. Runs of the same letter are merged into one syllable."""
    if not len(word):
        return "1"
    parts = []
    letters = word.letters
    i = 0
    while i < len(letters):
        j = i
        while j < len(letters) and letters[j] == letters[i]:
            j += 1
        power = (j - i) * letters[i].sign
        parts.append(letters[i].generator if power == 1 else f"{letters[i].generator}^{power}")
        i = j
    return " ".join(parts)


def free_reduce(word: Word) -> Word:
    stack: List[Letter] = []
    for letter in word:
        if stack and stack[-1].generator == letter.generator and stack[-1].sign == -letter.sign:
            stack.pop()
        else:
            stack.append(letter)
    return Word(stack)


def cyclic_reduce(word: Word) -> Word:
    letters = free_reduce(word).letters
    start, end = 0, len(letters)
    while end - start >= 2 and letters[start] == letters[end - 1].inverse():
        start += 1
        end -= 1
    return Word(letters[start:end])


def word_length(word: Word) -> int:
    return len(free_reduce(word))


def _block_lookup(partition: Union[Alphabet, Iterable[Iterable[str]]]) -> Dict[str, int]:
    if isinstance(partition, Alphabet):
        return {gen: partition.block_of(gen) for gen in partition.generators}
    return {gen: index for index, block in enumerate(partition) for gen in block}


def syllables(word: Word, partition: Union[Alphabet, Iterable[Iterable[str]]]) -> List[Word]:
    """The maximal single-block runs of ``word`` (not reduced first)."""
    block_of = _block_lookup(partition)
    result: List[List[Letter]] = []
    last = None
    for letter in word:
        try:
            block = block_of[letter.generator]
        except KeyError:
            raise InvalidAlphabetError(f"{letter.generator!r} is not covered by the partition") from None
        if block != last:
            result.append([])
            last = block
        result[-1].append(letter)
    return [Word(run) for run in result]


def free_product_length(word: Word, partition: Union[Alphabet, Iterable[Iterable[str]]]) -> int:
    """
    Number of syllables of the freely reduced word with respect to ``partition``.

    :param partition: an :class:`Alphabet` or an iterable of generator blocks.
    """
    return len(syllables(free_reduce(word), partition))


WORD_LENGTH = "word"
FREE_PRODUCT_LENGTH = "free_product"


class LengthFunction(NamedTuple):
    """
    Word length or free product length.

    For the free product length the blocks come from ``partition`` (a tuple of generator tuples).
    Instances are callable on words.
    """
    kind: str = WORD_LENGTH
    partition: Tuple[Tuple[str, ...], ...] = ()

    @classmethod
    def word(cls) -> LengthFunction:
        return cls(WORD_LENGTH, ())

    @classmethod
    def free_product(cls, partition: Union[Alphabet, Iterable[Iterable[str]]]) -> LengthFunction:
        if isinstance(partition, Alphabet):
            partition = partition.partition
        return cls(FREE_PRODUCT_LENGTH, tuple(tuple(block) for block in partition))

    @classmethod
    def from_name(cls, name: str, alphabet: Alphabet) -> LengthFunction:
        if name == WORD_LENGTH:
            return cls.word()
        if name == FREE_PRODUCT_LENGTH:
            return cls.free_product(alphabet)
        raise ValueError(f"unknown length function {name!r}")

    @property
    def is_word_length(self) -> bool:
        return self.kind == WORD_LENGTH

    def block_lookup(self) -> Dict[str, int]:
        return _block_lookup(self.partition)

    def cyclic(self, word: Word) -> int:
        """Length of a closed word read cyclically: the last syllable merges with the first."""
        reduced = cyclic_reduce(word)
        if self.is_word_length:
            return len(reduced)
        runs = syllables(reduced, self.partition)
        block_of = self.block_lookup()
        if len(runs) > 1 and block_of[runs[0][0].generator] == block_of[runs[-1][0].generator]:
            return len(runs) - 1
        return len(runs)

    def __call__(self, word: Word) -> int:
        if self.is_word_length:
            return word_length(word)
        return free_product_length(word, self.partition)

    def __str__(self) -> str:
        return self.kind


class Edge(NamedTuple):
    id: int
    source: int
    target: int
    label: str


class Direction(IntEnum):
    BACKWARD = -1
    FORWARD = 1


class PathStep(NamedTuple):
    edge: int
    direction: Direction = Direction.FORWARD

    def reversed(self) -> PathStep:
        return PathStep(self.edge, Direction(-self.direction))

    def __str__(self) -> str:
        return f"{self.edge}{'+' if self.direction > 0 else '-'}"


class Path(NamedTuple):
    """
    A path in a :class:`LabelledGraph`: a start vertex and a sequence of steps.

    The start vertex is needed for the empty path; for non-empty paths it must be the initial
    vertex of the first step. Validity is checked against a graph by
    :meth:`LabelledGraph.validate_path`.
    """
    start: int
    steps: Tuple[PathStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    def __add__(self, other):
        if not isinstance(other, Path):
            return NotImplemented
        return Path(self.start, self.steps + other.steps)

    def __str__(self) -> str:
        return " ".join([str(self.start)] + [str(step) for step in self.steps])


class FoldingVerdict(NamedTuple):
    """
    Result of :func:`is_reduced_labelling`.

    On failure ``vertex`` is the offending vertex, ``edges`` the two equally labelled edges and
    ``kind`` either ``"outgoing"`` or ``"incoming"``.
    """
    reduced: bool
    vertex: Optional[int] = None
    edges: Optional[Tuple[int, int]] = None
    kind: Optional[str] = None

    def __bool__(self) -> bool:
        return self.reduced

    def __str__(self) -> str:
        if self.reduced:
            return "reduced"
        return f"vertex {self.vertex} has two {self.kind} edges {self.edges[0]} and {self.edges[1]} with equal label"


class LabelledGraph:
    """
    A finite oriented graph whose edges are labelled by the generators of an :class:`Alphabet`.

    Every connected component has one basepoint. If ``basepoints`` is omitted the smallest vertex
    id of each component is used.

    :param alphabet: the label alphabet.
    :param vertices: non-negative integer vertex ids.
    :param edges: edges as :class:`Edge` or ``(id, source, target, label)`` tuples.
    :param basepoints: optional basepoints, exactly one per component.
    :raises InvalidGraphError: on dangling edges, unknown labels, duplicate ids or bad basepoints.
    """

    def __init__(self, alphabet: Alphabet, vertices: Iterable[int],
                 edges: Iterable[Union[Edge, Tuple[int, int, int, str]]] = (),
                 basepoints: Optional[Iterable[int]] = None):
        self._alphabet = alphabet
        verts = tuple(sorted(set(vertices)))
        for v in verts:
            if not isinstance(v, int) or v < 0:
                raise InvalidGraphError(f"vertex ids must be non-negative integers, got {v!r}")
        vertex_set = set(verts)

        edge_map: Dict[int, Edge] = {}
        for item in edges:
            edge = Edge(*item)
            if edge.id in edge_map:
                raise InvalidGraphError(f"duplicate edge id {edge.id}")
            if edge.source not in vertex_set or edge.target not in vertex_set:
                raise InvalidGraphError(f"edge {edge.id} has an endpoint that is not a vertex")
            if edge.label not in alphabet:
                raise InvalidGraphError(f"edge {edge.id} label {edge.label!r} is not in the alphabet")
            edge_map[edge.id] = edge

        self._vertices = verts
        self._edges = edge_map
        self._edge_list = tuple(edge_map[eid] for eid in sorted(edge_map))

        steps: Dict[int, List[PathStep]] = {v: [] for v in verts}
        for edge in self._edge_list:
            steps[edge.source].append(PathStep(edge.id, Direction.FORWARD))
            steps[edge.target].append(PathStep(edge.id, Direction.BACKWARD))
        self._steps = {v: tuple(sorted(s)) for v, s in steps.items()}

        comps = self._compute_components()
        if basepoints is None:
            bases = [min(comp) for comp in comps]
        else:
            bases = list(basepoints)
            for comp in comps:
                inside = [b for b in bases if b in comp]
                if len(inside) != 1:
                    raise InvalidGraphError(f"component containing vertex {min(comp)} needs exactly one basepoint")
            if len(bases) != len(comps):
                raise InvalidGraphError("basepoints must name one vertex per component")
        self._components: Tuple[Tuple[FrozenSet[int], int], ...] = tuple(sorted(
            ((comp, next(b for b in bases if b in comp)) for comp in comps), key=lambda item: item[1]))
        self._component_index = {v: index for index, (comp, _) in enumerate(self._components) for v in comp}

    def _compute_components(self) -> List[FrozenSet[int]]:
        graph = nx.MultiGraph()
        graph.add_nodes_from(self._vertices)
        graph.add_edges_from((edge.source, edge.target, edge.id) for edge in self._edge_list)
        return [frozenset(comp) for comp in nx.connected_components(graph)]

    @property
    def alphabet(self) -> Alphabet:
        return self._alphabet

    @property
    def vertices(self) -> Tuple[int, ...]:
        return self._vertices

    @property
    def edges(self) -> Tuple[Edge, ...]:
        return self._edge_list

    @property
    def basepoints(self) -> Tuple[int, ...]:
        return tuple(base for _, base in self._components)

    def edge(self, edge_id: int) -> Edge:
        try:
            return self._edges[edge_id]
        except KeyError:
            raise InvalidPathError(f"no edge with id {edge_id}") from None

    def has_vertex(self, vertex: int) -> bool:
        return vertex in self._steps

    def steps_from(self, vertex: int) -> Tuple[PathStep, ...]:
        """All steps leaving ``vertex``, sorted by (edge id, direction). A loop contributes two steps."""
        return self._steps[vertex]

    def step_ends(self, step: PathStep) -> Tuple[int, int]:
        edge = self.edge(step.edge)
        if step.direction == Direction.FORWARD:
            return edge.source, edge.target
        return edge.target, edge.source

    def step_letter(self, step: PathStep) -> Letter:
        return Letter(self.edge(step.edge).label, int(step.direction))

    def step_for(self, vertex: int, letter: Letter) -> Optional[PathStep]:
        """The first step leaving ``vertex`` that reads ``letter``, or None."""
        for step in self._steps.get(vertex, ()):
            edge = self._edges[step.edge]
            if edge.label == letter.generator and step.direction == letter.sign:
                return step
        return None

    def component_index(self, vertex: int) -> int:
        return self._component_index[vertex]

    def component_of(self, vertex: int) -> FrozenSet[int]:
        return self._components[self._component_index[vertex]][0]

    def components(self) -> List[Tuple[FrozenSet[int], int]]:
        return list(self._components)

    def validate_path(self, path: Path) -> None:
        """:raises InvalidPathError: if the steps of ``path`` are not incident."""
        if path.start not in self._steps:
            raise InvalidPathError(f"path starts at unknown vertex {path.start}")
        current = path.start
        for index, step in enumerate(path.steps):
            initial, terminal = self.step_ends(step)
            if initial != current:
                raise InvalidPathError(f"step {index} ({step}) does not start at vertex {current}")
            current = terminal

    def path_vertices(self, path: Path) -> List[int]:
        """The visited vertices, starting with the initial vertex."""
        self.validate_path(path)
        result = [path.start]
        for step in path.steps:
            result.append(self.step_ends(step)[1])
        return result

    def terminal(self, path: Path) -> int:
        return self.path_vertices(path)[-1]

    def reversed(self, path: Path) -> Path:
        return Path(self.terminal(path), tuple(step.reversed() for step in reversed(path.steps)))

    def read_word(self, start: int, word: Word) -> Optional[Path]:
        """
        Follow ``word`` letter by letter from ``start``.

        On a reduced labelling each step is unique when it exists. Returns None at a dead end.
        """
        steps = []
        current = start
        for letter in word:
            step = self.step_for(current, letter)
            if step is None:
                return None
            steps.append(step)
            current = self.step_ends(step)[1]
        return Path(start, tuple(steps))

    def to_networkx(self) -> nx.MultiDiGraph:
        """The graph as a networkx multigraph; edge keys are edge ids, labels in the ``label`` attribute."""
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(self._vertices)
        for edge in self._edge_list:
            graph.add_edge(edge.source, edge.target, key=edge.id, label=edge.label)
        return graph

    def relabelled(self, alphabet: Alphabet, labels: Dict[int, str]) -> LabelledGraph:
        """The same oriented graph with edge ``e`` relabelled ``labels[e]`` over ``alphabet``."""
        edges = [Edge(edge.id, edge.source, edge.target, labels[edge.id]) for edge in self._edge_list]
        return LabelledGraph(alphabet, self._vertices, edges, self.basepoints)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelledGraph):
            return NotImplemented
        return (self._alphabet == other._alphabet and self._vertices == other._vertices and
                self._edge_list == other._edge_list and self.basepoints == other.basepoints)

    def __hash__(self) -> int:
        return hash((self._alphabet, self._vertices, self._edge_list))

    def __repr__(self) -> str:
        return f"LabelledGraph({len(self._vertices)} vertices, {len(self._edge_list)} edges, " \
               f"{len(self._components)} components)"


def path_label(graph: LabelledGraph, path: Path) -> Word:
    """
    The label of ``path``: +1 letters for forward steps, -1 letters for backward steps.

    No free reduction is applied.

    :raises InvalidPathError: if consecutive steps are not incident.
    """
    graph.validate_path(path)
    return Word(graph.step_letter(step) for step in path.steps)


def is_immersed(graph: LabelledGraph, path: Path) -> bool:
    """True if ``path`` is valid and never follows a step by its own reversal."""
    graph.validate_path(path)
    return all(b != a.reversed() for a, b in zip(path.steps, path.steps[1:]))


def is_reduced_labelling(graph: LabelledGraph) -> FoldingVerdict:
    """
    Local folding criterion: no vertex has two outgoing or two incoming edges with the same label.

    A loop counts once as outgoing and once as incoming at its vertex.
    """
    for vertex in graph.vertices:
        seen: Dict[Tuple[str, int], int] = {}
        for step in graph.steps_from(vertex):
            key = (graph.edge(step.edge).label, int(step.direction))
            if key in seen:
                kind = "outgoing" if step.direction == Direction.FORWARD else "incoming"
                return FoldingVerdict(False, vertex, (seen[key], step.edge), kind)
            seen[key] = step.edge
    return FoldingVerdict(True)


def components(graph: LabelledGraph) -> List[Tuple[FrozenSet[int], int]]:
    """Connected components of the underlying undirected graph with their basepoints, ordered by basepoint."""
    return graph.components()


def disjoint_union(graphs: Sequence[LabelledGraph], alphabet: Optional[Alphabet] = None) \
        -> Tuple[LabelledGraph, List[Tuple[int, int]]]:
    """
    Place the graphs side by side.

    Summand ``n`` has its vertex ids shifted by ``offsets[n][0]`` and its edge ids by ``offsets[n][1]``.

    :param alphabet: common alphabet, defaults to the alphabet of the first summand.
    :return: the union and the list of (vertex offset, edge offset) pairs.
    """
    if alphabet is None:
        if not graphs:
            raise InvalidGraphError("disjoint union of no graphs needs an explicit alphabet")
        alphabet = graphs[0].alphabet
    vertices: List[int] = []
    edges: List[Edge] = []
    bases: List[int] = []
    offsets: List[Tuple[int, int]] = []
    v_off = e_off = 0
    for graph in graphs:
        offsets.append((v_off, e_off))
        vertices.extend(v + v_off for v in graph.vertices)
        edges.extend(Edge(e.id + e_off, e.source + v_off, e.target + v_off, e.label) for e in graph.edges)
        bases.extend(b + v_off for b in graph.basepoints)
        v_off += (max(graph.vertices) + 1) if graph.vertices else 0
        e_off += (max(e.id for e in graph.edges) + 1) if graph.edges else 0
    return LabelledGraph(alphabet, vertices, edges, bases), offsets
