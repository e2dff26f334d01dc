#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
"""
Certificates that the product sets A, B of a Rips-Segev graph have no unique product, and a
desk-scale word problem solver for the injectivity of A and B.

Every product a·b with a in A and b in B is traced as a path from u_{1,0}. Two paths ending at the
same vertex differ by a closed path, so their labels are equal in the group presented by the graph.
A certificate groups all products by end vertex and succeeds when every group holds at least two
different factorizations.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, NamedTuple, Union, Sequence, TYPE_CHECKING

import sympy
from networkx.utils import UnionFind

from grsc.cancel import iter_simple_cycles
from grsc.core import Word, Letter, Path, LabelledGraph, Alphabet, free_reduce, cyclic_reduce, path_label
from grsc.exceptions import TraceError, CertificateError, InvalidPathError
from grsc.workers import ordered_map

if TYPE_CHECKING:
    from grsc.ripssegev import RSGraph, ProductSets

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

TRIVIAL = "trivial"
NONTRIVIAL = "nontrivial"
UNDECIDED = "undecided"


class ProductWitness(NamedTuple):
    """A factorization a·b together with the path from the base vertex it labels."""
    a_elem: Word
    b_elem: Word
    path: Path
    endvertex: int


def _trace(graph: LabelledGraph, base: int, a_elem: Word, b_elem: Word) -> ProductWitness:
    word = free_reduce(a_elem * b_elem)
    path = graph.read_word(base, word)
    if path is None:
        raise TraceError(f"{word} does not label a path from vertex {base}")
    return ProductWitness(a_elem, b_elem, path, graph.terminal(path))


def trace_product(rsg: RSGraph, a_elem: Word, b_elem: Word) -> ProductWitness:
    """
    The immersed path from u_{1,0} labelled by the free reduction of a·b.

    :raises TraceError: if the word can not be read from u_{1,0}.
    """
    return _trace(rsg.graph, rsg.base, a_elem, b_elem)


@dataclass
class Certificate:
    """
    All factorizations of the products AB, grouped by the end vertex of their paths.

    ``buckets`` is ordered by vertex id.
    """
    base: int
    buckets: Dict[int, List[ProductWitness]] = field(default_factory=dict)

    @staticmethod
    def _pairs(witnesses: Sequence[ProductWitness]) -> set:
        return {(w.a_elem, w.b_elem) for w in witnesses}

    @property
    def singletons(self) -> List[int]:
        """Vertices whose bucket holds fewer than two different factorizations."""
        return [vertex for vertex, witnesses in self.buckets.items() if len(self._pairs(witnesses)) < 2]

    @property
    def ok(self) -> bool:
        return bool(self.buckets) and not self.singletons

    def witness_count(self) -> int:
        return sum(len(witnesses) for witnesses in self.buckets.values())


def build_certificate(rsg: RSGraph, sets: ProductSets, *, workers: int = 1) -> Certificate:
    """
    Trace every product of a distinct word of A with a word of B and bucket them by end vertex.

    :raises CertificateError: if a bucket has a single factorization; the partial certificate is attached.
    :raises TraceError: if a product can not be traced.
    """
    pairs = [(a_elem, b_elem) for a_elem in sets.a_elements for b_elem in sets.b_set]
    witnesses = ordered_map(lambda pair: trace_product(rsg, *pair), pairs, workers)
    certificate = Certificate(rsg.base)
    for witness in sorted(witnesses, key=lambda w: w.endvertex):
        certificate.buckets.setdefault(witness.endvertex, []).append(witness)
    if certificate.singletons:
        raise CertificateError(certificate)
    logger.info(f"certificate: {certificate.witness_count()} witnesses in {len(certificate.buckets)} buckets")
    return certificate


@dataclass
class CertificateCheck:
    """Result of :func:`verify_certificate`; ``problems`` is empty iff ``ok``."""
    problems: List[str] = field(default_factory=list)
    buckets: int = 0
    witnesses: int = 0

    @property
    def ok(self) -> bool:
        return not self.problems


def verify_certificate(graph: LabelledGraph, certificate: Certificate,
                       sets: Optional[ProductSets] = None) -> CertificateCheck:
    """
    Re-check a certificate against a graph, independently of how it was built.

    Every witness path must be a valid path from the base vertex whose label freely reduces to a·b
    and which ends at its bucket vertex. Every bucket needs two different factorizations and no
    factorization may appear in two buckets. If ``sets`` is given all of A×B must be covered.
    """
    check = CertificateCheck(buckets=len(certificate.buckets))
    seen: Dict[Tuple[Word, Word], int] = {}
    if not certificate.buckets:
        check.problems.append("certificate is empty")
    for vertex, witnesses in certificate.buckets.items():
        for witness in witnesses:
            check.witnesses += 1
            name = f"{witness.a_elem} * {witness.b_elem}"
            try:
                label = path_label(graph, witness.path)
                end = graph.terminal(witness.path)
            except InvalidPathError as exc:
                check.problems.append(f"vertex {vertex}: {name}: {exc}")
                continue
            if witness.path.start != certificate.base:
                check.problems.append(f"vertex {vertex}: {name}: path starts at {witness.path.start}")
            if free_reduce(label) != free_reduce(witness.a_elem * witness.b_elem):
                check.problems.append(f"vertex {vertex}: {name}: path label {label} does not match")
            if end != vertex:
                check.problems.append(f"vertex {vertex}: {name}: path ends at {end}")
            pair = (witness.a_elem, witness.b_elem)
            if pair in seen and seen[pair] != vertex:
                check.problems.append(f"{name} is in the buckets of {seen[pair]} and {vertex}")
            seen[pair] = vertex
        if len(Certificate._pairs(witnesses)) < 2:
            check.problems.append(f"vertex {vertex}: only one factorization")
    if sets is not None:
        for a_elem in sets.a_elements:
            for b_elem in sets.b_set:
                if (a_elem, b_elem) not in seen:
                    check.problems.append(f"{a_elem} * {b_elem} is missing")
    return check


def canonical_relator(word: Word) -> Word:
    """The smallest rotation of the word or of its inverse, after cyclic reduction."""
    reduced = cyclic_reduce(word)
    if not len(reduced):
        return reduced
    candidates = []
    for variant in (reduced, reduced.inverse()):
        letters = variant.letters
        candidates.extend(Word(letters[k:] + letters[:k]) for k in range(len(letters)))
    return min(candidates)


@dataclass(frozen=True)
class RelatorSet:
    """
    Labels of the simple closed paths of a graph, canonicalized and deduplicated.

    ``exhaustive`` is False when the enumeration stopped at the cycle cap.
    """
    relators: Tuple[Word, ...]
    exhaustive: bool
    cycles: int = 0

    def __len__(self) -> int:
        return len(self.relators)

    def __iter__(self):
        return iter(self.relators)


def enumerate_relators(graph: LabelledGraph, cycle_cap: int) -> RelatorSet:
    """Relators from up to ``cycle_cap`` simple cycles. A graph with more cycles gives a truncated set."""
    words = set()
    count = 0
    exhaustive = True
    for cycle in iter_simple_cycles(graph):
        if count >= cycle_cap:
            exhaustive = False
            break
        count += 1
        words.add(canonical_relator(path_label(graph, cycle)))
    if not exhaustive:
        logger.warning(f"relator enumeration truncated at {cycle_cap} cycles")
    return RelatorSet(tuple(sorted(words)), exhaustive, count)


class _RelatorIndex:
    """
    Rotations of the relators and their inverses, indexed by their prefix of minimal length
    more than half the relator.
    """

    def __init__(self, relators: RelatorSet):
        self.index: Dict[Tuple[Letter, ...], List[Tuple[Letter, ...]]] = {}
        for relator in relators:
            for variant in (relator, relator.inverse()):
                letters = variant.letters
                half = len(letters) // 2 + 1
                for k in range(len(letters)):
                    rotation = letters[k:] + letters[:k]
                    self.index.setdefault(rotation[:half], []).append(rotation)
        self.key_sizes = sorted({len(key) for key in self.index}, reverse=True)

    def best_replacement(self, letters: Tuple[Letter, ...]) -> Optional[Tuple[int, int, Tuple[Letter, ...]]]:
        """
        The replacement shortening the cyclic word ``letters`` most.

        :return: (start, matched size, replacement letters) or None.
        """
        n = len(letters)
        best = None
        best_gain = 0
        for size in self.key_sizes:
            if size > n:
                continue
            for start in range(n):
                segment = tuple(letters[(start + t) % n] for t in range(size))
                for rotation in self.index.get(segment, ()):
                    matched = size
                    limit = min(n, len(rotation))
                    while matched < limit and letters[(start + matched) % n] == rotation[matched]:
                        matched += 1
                    complement = tuple(letter.inverse() for letter in reversed(rotation[matched:]))
                    gain = matched - len(complement)
                    if gain > best_gain:
                        best_gain = gain
                        best = (start, matched, complement)
        return best


def _dehn(word: Word, index: _RelatorIndex) -> Word:
    current = cyclic_reduce(word)
    while len(current):
        found = index.best_replacement(current.letters)
        if found is None:
            break
        start, matched, complement = found
        letters = current.letters
        rotated = letters[start:] + letters[:start]
        current = cyclic_reduce(Word(complement + rotated[matched:]))
    return current


def dehn_reduce(word: Word, relators: RelatorSet) -> Word:
    """
    Greedy Dehn reduction: while some subword of the cyclic word is more than half of a relator
    (or its inverse, in any rotation), replace it by the inverse of the remaining part.

    The result is cyclically reduced, never longer than the input and a fixpoint of this function.
    It is conjugate to the input, so it is empty iff the reduction proved the input trivial.
    """
    return _dehn(word, _RelatorIndex(relators))


class DehnResult(NamedTuple):
    word: Word
    status: str


def dehn_decide(word: Word, relators: RelatorSet, verified: bool, index: Optional[_RelatorIndex] = None) \
        -> DehnResult:
    """
    Reduce ``word`` and classify it.

    ``trivial`` when the reduction is empty. ``nontrivial`` only if the relator set is exhaustive and
    ``verified`` says the graph satisfies the small cancellation hypotheses; otherwise ``undecided``.
    """
    reduced = _dehn(word, index or _RelatorIndex(relators))
    if not len(reduced):
        return DehnResult(reduced, TRIVIAL)
    if relators.exhaustive and verified:
        return DehnResult(reduced, NONTRIVIAL)
    return DehnResult(reduced, UNDECIDED)


@dataclass
class InjectivityVerdict:
    """
    Whether A and B map injectively to the group.

    ``status`` is ``injective``, ``collision`` (some pair proved equal) or ``undecided``.
    ``image_sizes`` counts the classes left after merging proved collisions.
    """
    status: str
    collisions: List[Tuple[str, Word, Word]] = field(default_factory=list)
    undecided: int = 0
    image_sizes: Dict[str, int] = field(default_factory=dict)

    @property
    def injective(self) -> bool:
        return self.status == "injective"

    def as_dict(self) -> Dict[str, object]:
        return {
            "status": self.status,
            "collisions": [[name, str(x), str(y)] for name, x, y in self.collisions],
            "undecided_pairs": self.undecided,
            "image_sizes": dict(self.image_sizes),
        }


def check_injectivity(sets: ProductSets, relators: RelatorSet, verified: bool = False, *,
                      workers: int = 1) -> InjectivityVerdict:
    """
    Decide for every pair of distinct entries x, y of A (and of B) whether x·y⁻¹ is trivial.

    Entries are compared by position, so a word listed twice is reported as a collision.

    :param verified: the graph was verified to satisfy the small cancellation hypotheses under which
        an irreducible nonempty word is nontrivial.
    """
    index = _RelatorIndex(relators)
    verdict = InjectivityVerdict("injective")
    for name, words in (("A", [word for _, word in sets.a_entries()]), ("B", list(sets.b_set))):
        pairs = [(x, y) for x in range(len(words)) for y in range(x + 1, len(words))]
        results = ordered_map(lambda pair: dehn_decide(words[pair[0]] * words[pair[1]].inverse(),
                                                       relators, verified, index), pairs, workers)
        classes = UnionFind(range(len(words)))
        for (x, y), result in zip(pairs, results):
            if result.status == TRIVIAL:
                verdict.collisions.append((name, words[x], words[y]))
                classes.union(x, y)
            elif result.status == UNDECIDED:
                verdict.undecided += 1
        verdict.image_sizes[name] = len(list(classes.to_sets()))
    if verdict.collisions:
        verdict.status = "collision"
    elif verdict.undecided:
        verdict.status = UNDECIDED
        logger.warning(f"injectivity undecided for {verdict.undecided} pairs")
    return verdict


def exponent_sums(alphabet: Alphabet, word: Word) -> List[int]:
    position = {gen: index for index, gen in enumerate(alphabet.generators)}
    sums = [0] * len(alphabet.generators)
    for letter in word:
        sums[position[letter.generator]] += letter.sign
    return sums


def abelianization_rank(alphabet: Alphabet, relators: Union[RelatorSet, Sequence[Word]]) -> int:
    """
    Free rank of the abelianization of ⟨alphabet | relators⟩: the number of generators minus the
    rank of the exponent sum matrix.
    """
    rows = [exponent_sums(alphabet, word) for word in relators]
    if not rows:
        return len(alphabet.generators)
    return len(alphabet.generators) - sympy.Matrix(rows).rank()
