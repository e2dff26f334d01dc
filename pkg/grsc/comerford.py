#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
"""
The graphical Comerford transform.

A finite-index subgroup H is given by the transitive action of the generators on the cosets
1..h, coset 1 being H itself. From that action the Schreier coset graph K_H is built, every
component of the input graph is lifted to K_H once per coset, and the lifts relabelled by
``g@w`` (the generator together with the coset of the edge's source) make up Γ_H.
"""
from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Dict, List, Mapping, Sequence, Tuple, Optional, Iterable, Any

from sympy.combinatorics import Permutation, PermutationGroup

from grsc.cancel import require_reduced, enumerate_piece_paths, piece_partners, vertex_orbits
from grsc.core import Alphabet, LabelledGraph, Letter, Word, Path, PathStep, Edge, LengthFunction, \
    product_symbol, split_symbol, path_label, disjoint_union
from grsc.exceptions import InvalidActionError, LiftError
from grsc.updcert import RelatorSet
from grsc.workers import ordered_map

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


class CosetAction:
    """
    A right action of the generators on the cosets 1..h.

    :param degree: the number h of cosets.
    :param permutations: for every generator the images of 1..h, e.g. ``{"s": [2, 1], "t": [1, 2]}``.
    :raises InvalidActionError: if an image list is not a permutation of 1..h.
    """

    def __init__(self, degree: int, permutations: Mapping[str, Sequence[int]]):
        if degree < 1:
            raise InvalidActionError(f"degree must be positive, got {degree}")
        if not permutations:
            raise InvalidActionError("an action needs at least one generator")
        perms: Dict[str, Tuple[int, ...]] = {}
        for gen, images in permutations.items():
            images = tuple(int(x) for x in images)
            if sorted(images) != list(range(1, degree + 1)):
                raise InvalidActionError(f"images of {gen!r} are not a permutation of 1..{degree}: {images}")
            perms[gen] = images
        self._degree = degree
        self._perms = perms
        self._inverse = {gen: tuple(images.index(v) + 1 for v in range(1, degree + 1))
                         for gen, images in perms.items()}

    @property
    def degree(self) -> int:
        return self._degree

    @property
    def generators(self) -> Tuple[str, ...]:
        return tuple(self._perms)

    @property
    def table(self) -> Tuple[Tuple[str, Tuple[int, ...]], ...]:
        """The image table ``((generator, images), ...)`` in generator order."""
        return tuple(self._perms.items())

    def image(self, generator: str, coset: int) -> int:
        try:
            return self._perms[generator][coset - 1]
        except KeyError:
            raise InvalidActionError(f"the action does not know the generator {generator!r}") from None

    def preimage(self, generator: str, coset: int) -> int:
        try:
            return self._inverse[generator][coset - 1]
        except KeyError:
            raise InvalidActionError(f"the action does not know the generator {generator!r}") from None

    def act_letter(self, coset: int, letter: Letter) -> int:
        if letter.sign > 0:
            return self.image(letter.generator, coset)
        return self.preimage(letter.generator, coset)

    def act(self, coset: int, word: Word) -> int:
        """The coset reached from ``coset`` by reading ``word`` from left to right."""
        for letter in word:
            coset = self.act_letter(coset, letter)
        return coset

    def permutation(self, generator: str) -> Permutation:
        """The sympy permutation of ``generator`` on the points 0..h-1."""
        return Permutation([x - 1 for x in self._perms[generator]])

    def group(self) -> PermutationGroup:
        return PermutationGroup([self.permutation(gen) for gen in self._perms])

    def is_transitive(self) -> bool:
        return len(self.group().orbit(0)) == self._degree

    def cycle(self, generator: str, coset: int) -> Tuple[int, ...]:
        """The cosets of the ``generator``-cycle through ``coset``, starting at ``coset``."""
        result = [coset]
        current = self.image(generator, coset)
        while current != coset:
            result.append(current)
            current = self.image(generator, current)
        return tuple(result)

    def conjugated(self, relabel: Sequence[int]) -> CosetAction:
        """The action with coset x renamed to ``relabel[x - 1]``."""
        perms = {}
        for gen, images in self._perms.items():
            new = [0] * self._degree
            for x, y in enumerate(images, start=1):
                new[relabel[x - 1] - 1] = relabel[y - 1]
            perms[gen] = new
        return CosetAction(self._degree, perms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CosetAction):
            return NotImplemented
        return self._degree == other._degree and self._perms == other._perms

    def __hash__(self) -> int:
        return hash((self._degree, tuple(sorted(self._perms.items()))))

    def __str__(self) -> str:
        return "; ".join(f"{gen}: {' '.join(str(x) for x in images)}" for gen, images in self._perms.items())

    def __repr__(self) -> str:
        return f"CosetAction({self._degree}, {{{str(self)}}})"


def action_from_permutations(perms: Mapping[str, Sequence[int]], h: int) -> CosetAction:
    """
    Validated coset action of degree ``h``.

    :raises InvalidActionError: if the images are no permutations or the action is intransitive,
        in which case the stabiliser of coset 1 would not have index ``h``.
    """
    action = CosetAction(h, perms)
    if not action.is_transitive():
        raise InvalidActionError(f"the action {action} is not transitive on 1..{h}")
    return action


def _check_index(h: int, k: int) -> None:
    if h < 1:
        raise InvalidActionError(f"index must be positive, got {h}")
    if h > k:
        raise InvalidActionError(f"index {h} is larger than k = {k}; relators are only known to act "
                                 f"trivially for h <= k")


def _transitive_actions(h: int, generators: Sequence[str]) -> Iterable[CosetAction]:
    points = range(1, h + 1)
    for images in product(permutations(points), repeat=len(generators)):
        action = CosetAction(h, dict(zip(generators, images)))
        if action.is_transitive():
            yield action


def _canonical_table(action: CosetAction) -> Tuple[Tuple[int, ...], ...]:
    tables = []
    for relabel in permutations(range(1, action.degree + 1)):
        conjugate = action.conjugated(relabel)
        tables.append(tuple(images for _, images in conjugate.table))
    return min(tables)


def enumerate_index_h_actions(h: int, k: int, generators: Sequence[str] = ("s", "t")) -> List[CosetAction]:
    """
    One transitive action of degree ``h`` per class under simultaneous conjugation.

    The representative of a class is its lexicographically smallest image table. Every element of
    the symmetric group on h points has order dividing k! when h <= k, so the relators of a graph
    whose cycle labels are products of s^{k!} and t^{k!} act trivially on all of them.

    :raises InvalidActionError: if ``h`` < 1 or ``h`` > ``k``.
    """
    _check_index(h, k)
    classes = set()
    for action in _transitive_actions(h, generators):
        classes.add(_canonical_table(action))
    result = [CosetAction(h, dict(zip(generators, table))) for table in sorted(classes)]
    logger.debug(f"{len(result)} conjugacy classes of transitive actions of degree {h}")
    return result


def subgroup_count(h: int, k: int, generators: Sequence[str] = ("s", "t")) -> int:
    """
    Number of subgroups of index ``h``: transitive actions with a marked coset 1, counted up to
    relabelling the other h-1 cosets.
    """
    _check_index(h, k)
    transitive = sum(1 for _ in _transitive_actions(h, generators))
    return transitive // math.factorial(h - 1)


@dataclass(frozen=True)
class SchreierGraph:
    """
    The Schreier coset graph K_H with its edges relabelled ``g@v``.

    The edge of generator number ``i`` leaving coset ``v`` has id ``i * h + v - 1``.
    """
    action: CosetAction
    alphabet: Alphabet
    graph: LabelledGraph = field(repr=False)

    def edge_id(self, generator: str, coset: int) -> int:
        return self.alphabet.generators.index(generator) * self.action.degree + coset - 1

    def cycle_through(self, generator: str, coset: int) -> Path:
        """The oriented cycle of ``generator``-edges through ``coset``, starting there."""
        cosets = self.action.cycle(generator, coset)
        return Path(coset, tuple(PathStep(self.edge_id(generator, w)) for w in cosets))

    def cycle_label(self, generator: str, coset: int) -> Word:
        return path_label(self.graph, self.cycle_through(generator, coset))


def schreier_graph(action: CosetAction, alphabet: Alphabet) -> SchreierGraph:
    """
    K_H over ``alphabet.product(h)``: one edge v -> σ_g(v) labelled ``g@v`` per generator and coset.

    :raises InvalidActionError: if the action's generators differ from the alphabet.
    """
    if set(action.generators) != set(alphabet.generators):
        raise InvalidActionError(f"action generators {action.generators} do not match the alphabet "
                                 f"{alphabet.generators}")
    h = action.degree
    edges = []
    for i, gen in enumerate(alphabet.generators):
        for v in range(1, h + 1):
            edges.append(Edge(i * h + v - 1, v, action.image(gen, v), product_symbol(gen, v)))
    graph = LabelledGraph(alphabet.product(h), range(1, h + 1), edges)
    return SchreierGraph(action, alphabet, graph)


@dataclass(frozen=True)
class LiftedComponent:
    """The copy Γ_v of Γ: same vertices and edges, labels ``g@w`` with w the coset of the edge's source."""
    coset: int
    graph: LabelledGraph = field(repr=False)
    cosets: Dict[int, int] = field(repr=False)


def lift_labelling(graph: LabelledGraph, kh: SchreierGraph, v: int, *,
                   order_seed: Optional[int] = None) -> LiftedComponent:
    """
    Lift every component of ``graph`` to K_H with its basepoint at coset ``v``.

    Cosets are propagated along the edges from each basepoint. The lift is unique, so the result
    does not depend on the traversal order; ``order_seed`` shuffles the order for testing.

    :raises LiftError: if some closed path reads a word that does not fix its coset.
    """
    action = kh.action
    if not 1 <= v <= action.degree:
        raise InvalidActionError(f"coset {v} is not in 1..{action.degree}")
    rng = random.Random(order_seed) if order_seed is not None else None
    cosets: Dict[int, int] = {}
    for comp, base in graph.components():
        cosets[base] = v
        stack = [base]
        while stack:
            vertex = stack.pop()
            steps = list(graph.steps_from(vertex))
            if rng is not None:
                rng.shuffle(steps)
            for step in steps:
                target = graph.step_ends(step)[1]
                coset = action.act_letter(cosets[vertex], graph.step_letter(step))
                known = cosets.get(target)
                if known is None:
                    cosets[target] = coset
                    stack.append(target)
                elif known != coset:
                    raise LiftError(f"action does not factor through G(Γ): vertex {target} is reached "
                                    f"at cosets {known} and {coset}")
    labels = {edge.id: product_symbol(edge.label, cosets[edge.source]) for edge in graph.edges}
    lifted = graph.relabelled(graph.alphabet.product(action.degree), labels)
    return LiftedComponent(v, lifted, cosets)


@dataclass(frozen=True)
class GammaH:
    """
    Γ_H, the disjoint union of the lifts Γ_1 ... Γ_h.

    Summand ``v`` has its vertex ids shifted by ``offsets[v - 1][0]`` and its edge ids by
    ``offsets[v - 1][1]``.
    """
    graph: LabelledGraph
    base: LabelledGraph = field(repr=False)
    action: CosetAction
    schreier: SchreierGraph = field(repr=False)
    lifts: Tuple[LiftedComponent, ...] = field(repr=False)
    offsets: Tuple[Tuple[int, int], ...]

    @property
    def degree(self) -> int:
        return self.action.degree

    @property
    def free_rank(self) -> int:
        """Rank of the free factor in G(Γ_H) = H * F_{h-1}."""
        return self.action.degree - 1

    def _summand(self, offset_index: int, value: int) -> int:
        coset = 1
        for index, offset in enumerate(self.offsets, start=1):
            if offset[offset_index] <= value:
                coset = index
        return coset

    def project_vertex(self, vertex: int) -> Tuple[int, int]:
        """(coset v, vertex of Γ) for a vertex of Γ_H."""
        coset = self._summand(0, vertex)
        return coset, vertex - self.offsets[coset - 1][0]

    def project_edge(self, edge_id: int) -> Tuple[int, int]:
        coset = self._summand(1, edge_id)
        return coset, edge_id - self.offsets[coset - 1][1]

    def project_path(self, path: Path) -> Path:
        """π_v: the path of Γ under a path of Γ_H."""
        _, start = self.project_vertex(path.start)
        return Path(start, tuple(PathStep(self.project_edge(step.edge)[1], step.direction) for step in path.steps))

    def lift_path(self, path: Path, coset: int) -> Path:
        """The copy of ``path`` inside Γ_coset."""
        v_off, e_off = self.offsets[coset - 1]
        return Path(path.start + v_off, tuple(PathStep(step.edge + e_off, step.direction) for step in path.steps))

    def metadata(self) -> Dict[str, Any]:
        return {
            "degree": self.degree,
            "free_rank": self.free_rank,
            "action": {gen: list(images) for gen, images in self.action.table},
            "components": [{"basepoint": base, "coset": self.project_vertex(base)[0]}
                           for base in self.graph.basepoints],
        }


def comerford_transform(graph: LabelledGraph, action: CosetAction, *, workers: int = 1,
                        order_seed: Optional[int] = None) -> GammaH:
    """
    Build Γ_H for the subgroup H of index h given by ``action``.

    The partition blocks P of the alphabet become P x {1..h}.

    :raises NotReducedError: if ``graph`` is not reduced.
    :raises LiftError: if the action does not respect the relators of ``graph``.
    """
    require_reduced(graph)
    if not action.is_transitive():
        raise InvalidActionError(f"the action {action} is not transitive")
    kh = schreier_graph(action, graph.alphabet)
    lifts = ordered_map(lambda v: lift_labelling(graph, kh, v, order_seed=order_seed),
                        range(1, action.degree + 1), workers)
    union, offsets = disjoint_union([lift.graph for lift in lifts], graph.alphabet.product(action.degree))
    logger.info(f"Comerford transform of degree {action.degree}: {len(union.vertices)} vertices, "
                f"{len(union.edges)} edges")
    return GammaH(union, graph, action, kh, tuple(lifts), tuple(offsets))


def relators_act_trivially(action: CosetAction, relators: RelatorSet) -> Tuple[bool, bool]:
    """
    Check that every relator fixes every coset.

    :return: (all relators act trivially, the relator set was exhaustive)
    """
    for relator in relators.relators:
        for v in range(1, action.degree + 1):
            if action.act(v, relator) != v:
                logger.debug(f"relator {relator} moves coset {v}")
                return False, relators.exhaustive
    return True, relators.exhaustive


def project_word(word: Word) -> Word:
    """Forget the coset subscripts."""
    return Word(Letter(split_symbol(letter.generator)[0], letter.sign) for letter in word)


@dataclass(frozen=True)
class ProjectionFailure:
    path: Path
    projected: Path
    reason: str


@dataclass
class ProjectionVerdict:
    """Outcome of :func:`piece_projection_check`."""
    checked: int = 0
    failures: List[ProjectionFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok


def piece_projection_check(graph: LabelledGraph, gamma_h: GammaH, *, length: Optional[LengthFunction] = None,
                           max_length: float = math.inf, max_edges: Optional[int] = None,
                           simple: bool = False, workers: int = 1) -> ProjectionVerdict:
    """
    Project every piece of Γ_H to Γ and confirm the image is a piece of Γ with the same label pattern
    and the same word and free product length.

    :param length: bounds the enumerated pieces by ``max_length`` in this length over Γ_H's alphabet,
        word length by default.
    :param max_edges: edge bound of the enumeration. By default derived from a finite ``max_length`` so
        that no piece within it is dropped. Non-simple pieces of unbounded length are cut at the
        vertex count of Γ.
    :param simple: only project simple (or simple closed) pieces, the ones that can lie on a simple cycle.
    """
    if length is None:
        length = LengthFunction.word()
    elif not length.is_word_length:
        length = LengthFunction.free_product(gamma_h.graph.alphabet)
    if max_edges is None and max_length == math.inf and not simple:
        max_edges = len(graph.vertices)
    base_fp = LengthFunction.free_product(graph.alphabet)
    lifted_fp = LengthFunction.free_product(gamma_h.graph.alphabet)
    orbits = vertex_orbits(graph)

    verdict = ProjectionVerdict()
    for occurrence in enumerate_piece_paths(gamma_h.graph, max_length, length, max_edges=max_edges,
                                            simple=simple, workers=workers):
        verdict.checked += 1
        projected = gamma_h.project_path(occurrence.path)
        lifted_label = path_label(gamma_h.graph, occurrence.path)
        base_label = path_label(graph, projected)
        if project_word(lifted_label) != base_label:
            reason = "label pattern differs"
        elif not piece_partners(graph, projected, orbits):
            reason = "image is not a piece"
        elif lifted_fp(lifted_label) != base_fp(base_label):
            reason = "free product length differs"
        else:
            continue
        verdict.failures.append(ProjectionFailure(occurrence.path, projected, reason))
    if verdict.failures:
        logger.warning(f"{len(verdict.failures)} of {verdict.checked} pieces of Γ_H do not project to pieces")
    return verdict
