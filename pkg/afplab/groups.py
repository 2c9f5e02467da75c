"""Exact arithmetic and Cayley ball enumeration for the group catalog.

Elements are immutable :class:`GroupElement` objects holding the group
identifier and a canonical payload, so equality and hashing reduce to payload
comparison. Words in the standard generators of a group are sequences of
*letters*: the signed integer ``i + 1`` denotes the ``i``-th standard
generator and ``-(i + 1)`` its inverse.
"""

import abc
import bisect
import dataclasses
import itertools
import logging
import math
import os
import string
from collections.abc import Mapping, Sequence
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from afplab.exc import DomainError, GroupMismatch, ResourceCapExceeded, UnsupportedGroup

logger = logging.getLogger(__name__)

#: Default maximal number of elements of an enumerated ball.
DEFAULT_BALL_CAP = 10**6

#: Default maximal number of word indices handled by the free group index path.
DEFAULT_INDEX_CAP = 10**7

Letter = int
Word = Tuple[Letter, ...]


def default_ball_cap() -> int:
    """Return ball size cap, honoring ``AFPLAB_BALL_CAP`` environment variable."""
    return int(os.environ.get("AFPLAB_BALL_CAP", DEFAULT_BALL_CAP))


def default_index_cap() -> int:
    """Return free group index cap, honoring ``AFPLAB_INDEX_CAP`` environment
    variable."""
    return int(os.environ.get("AFPLAB_INDEX_CAP", DEFAULT_INDEX_CAP))


@dataclasses.dataclass(frozen=True)
class GroupElement:
    """Element of a catalog group in canonical form."""

    #: Identifier of the group this element belongs to.
    group_id: str

    #: Canonical payload.
    payload: Tuple[int, ...]


class Group(abc.ABC):
    """Base class for catalog groups."""

    #: Catalog identifier, f.e. ``"F2"`` or ``"Z^2"``.
    group_id: str

    #: Number of standard generators.
    num_generators: int

    #: Group order for finite groups, ``None`` otherwise.
    order: Optional[int] = None

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__}({self.group_id!r})>"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Group) and other.group_id == self.group_id

    def __hash__(self) -> int:
        return hash(self.group_id)

    @abc.abstractmethod
    def canonical(self, payload: Sequence[int]) -> Tuple[int, ...]:
        """Bring *payload* to canonical form.

        Raises :exc:`afplab.exc.DomainError` if *payload* does not describe an
        element of this group.
        """

    @abc.abstractmethod
    def _mul(self, a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]: ...

    @abc.abstractmethod
    def _inv(self, a: Tuple[int, ...]) -> Tuple[int, ...]: ...

    @abc.abstractmethod
    def _identity(self) -> Tuple[int, ...]: ...

    @abc.abstractmethod
    def _generator(self, index: int) -> Tuple[int, ...]: ...

    @abc.abstractmethod
    def normal_form_word(self, g: GroupElement) -> Word:
        """Return a word in the standard letters evaluating to *g*.

        For every group of the catalog the word without its first letter is
        a word of the same kind for ``letter⁻¹·g``, one letter shorter.
        """

    def relations(self) -> List[Word]:
        """Return words in the standard letters that evaluate to the identity."""
        return []

    def generator_name(self, index: int) -> str:
        return f"e{index + 1}"

    def element(self, payload: Sequence[int]) -> GroupElement:
        return GroupElement(self.group_id, self.canonical(payload))

    def identity(self) -> GroupElement:
        return GroupElement(self.group_id, self._identity())

    def _check(self, *elements: GroupElement):
        for g in elements:
            if g.group_id != self.group_id:
                raise GroupMismatch(self.group_id, g.group_id)

    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        self._check(a, b)
        return GroupElement(self.group_id, self._mul(a.payload, b.payload))

    def inv(self, a: GroupElement) -> GroupElement:
        self._check(a)
        return GroupElement(self.group_id, self._inv(a.payload))

    def generators(self) -> List[GroupElement]:
        """Return the standard generators."""
        return [GroupElement(self.group_id, self._generator(i)) for i in range(self.num_generators)]

    def standard_generating_set(self) -> "GeneratingSet":
        return GeneratingSet(self, tuple(self.generators())).symmetrized()

    def letter_element(self, letter: Letter) -> GroupElement:
        g = GroupElement(self.group_id, self._generator(abs(letter) - 1))
        return g if letter > 0 else self.inv(g)

    def letters(self) -> List[Letter]:
        return [i + 1 for i in range(self.num_generators)] + [-(i + 1) for i in range(self.num_generators)]

    def evaluate(self, word: Sequence[Letter]) -> GroupElement:
        """Evaluate word in the standard letters."""
        result = self.identity()
        for letter in word:
            result = self.mul(result, self.letter_element(letter))
        return result

    def first_letter(self, g: GroupElement) -> Optional[Letter]:
        """Return first letter of the normal form of *g*, or ``None`` for the
        identity."""
        word = self.normal_form_word(g)
        return word[0] if word else None

    def letter_label(self, letter: Letter) -> str:
        name = self.generator_name(abs(letter) - 1)
        return name if letter > 0 else f"{name}^-1"

    def label(self, g: GroupElement) -> str:
        """Render *g* as a compact word in standard generators."""
        self._check(g)
        word = self.normal_form_word(g)
        if not word:
            return "e"
        out = []
        for letter, run in itertools.groupby(word):
            power = len(list(run)) * (1 if letter > 0 else -1)
            name = self.generator_name(abs(letter) - 1)
            out.append(name if power == 1 else f"{name}^{power}")
        return " ".join(out)

    def parse_element(self, data: Any) -> GroupElement:
        """Parse element from its JSON representation (a payload list)."""
        if isinstance(data, int) and not isinstance(data, bool):
            data = [data]
        if not isinstance(data, Sequence) or isinstance(data, str):
            raise DomainError(f"cannot parse {data!r} as element of {self.group_id}")
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in data):
            raise DomainError(f"cannot parse {data!r} as element of {self.group_id}")
        return self.element(data)

    def random_element(self, rng: np.random.Generator, length: int) -> GroupElement:
        """Evaluate random word of given length in the standard letters."""
        letters = self.letters()
        return self.evaluate([letters[i] for i in rng.integers(0, len(letters), size=length)])

    def elements(self) -> List[GroupElement]:
        """List all elements of a finite group in ball order."""
        raise UnsupportedGroup("listing of all elements", self.group_id)


class IntegerLattice(Group):
    """The free abelian group ℤᵈ."""

    def __init__(self, dim: int):
        if dim < 1:
            raise DomainError("dimension of the integer lattice must be positive")
        self.dim = dim
        self.num_generators = dim
        self.group_id = f"Z^{dim}"

    def canonical(self, payload):
        payload = tuple(int(x) for x in payload)
        if len(payload) != self.dim:
            raise DomainError(f"expected {self.dim} coordinates for {self.group_id}, got {len(payload)}")
        return payload

    def _mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def _inv(self, a):
        return tuple(-x for x in a)

    def _identity(self):
        return (0,) * self.dim

    def _generator(self, index):
        return tuple(int(i == index) for i in range(self.dim))

    def normal_form_word(self, g):
        word: List[Letter] = []
        for i, n in enumerate(g.payload):
            word.extend([(i + 1) if n > 0 else -(i + 1)] * abs(n))
        return tuple(word)

    def relations(self):
        return [(i, j, -i, -j) for i in range(1, self.dim + 1) for j in range(i + 1, self.dim + 1)]


class Heisenberg(Group):
    """The integer Heisenberg group H₃(ℤ) of triples ``(a, b, c)`` with the law
    ``(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')``.

    Standard generators are ``x = (1,0,0)``, ``y = (0,1,0)`` and the central
    ``z = (0,0,1)``; the normal form of ``(a, b, c)`` is ``x^a y^b z^(c-ab)``.
    """

    group_id = "H3(Z)"
    num_generators = 3

    def canonical(self, payload):
        payload = tuple(int(x) for x in payload)
        if len(payload) != 3:
            raise DomainError("elements of H3(Z) are integer triples")
        return payload

    def _mul(self, a, b):
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1])

    def _inv(self, a):
        return (-a[0], -a[1], a[0] * a[1] - a[2])

    def _identity(self):
        return (0, 0, 0)

    def _generator(self, index):
        return tuple(int(i == index) for i in range(3))

    def generator_name(self, index):
        return "xyz"[index]

    def normal_form_word(self, g):
        a, b, c = g.payload
        word: List[Letter] = []
        for letter, n in ((1, a), (2, b), (3, c - a * b)):
            word.extend([letter if n > 0 else -letter] * abs(n))
        return tuple(word)

    def relations(self):
        return [(1, 3, -1, -3), (2, 3, -2, -3), (1, 2, -1, -2, -3)]


class FreeGroup(Group):
    """The free group Fₖ of reduced words.

    Payloads are reduced tuples of letters. Generators are labelled ``a``,
    ``b``, ... and their inverses ``A``, ``B``, ...

    Words are identified with natural numbers by the length-lexicographic
    order, where letters are ordered as signed integers (``B < A < a < b``
    in F₂). This is also the ball enumeration order.
    """

    def __init__(self, rank: int):
        if rank < 1 or rank > 26:
            raise DomainError("rank of the free group must lie in 1..26")
        self.rank = rank
        self.num_generators = rank
        self.group_id = f"F{rank}"
        self._sorted_letters = [-i for i in range(rank, 0, -1)] + list(range(1, rank + 1))
        self._base = 2 * rank - 1

    def canonical(self, payload):
        out: List[int] = []
        for letter in payload:
            letter = int(letter)
            if letter == 0 or abs(letter) > self.rank:
                raise DomainError(f"letter {letter} out of range for {self.group_id}")
            if out and out[-1] == -letter:
                out.pop()
            else:
                out.append(letter)
        return tuple(out)

    def _mul(self, a, b):
        n = 0
        while n < min(len(a), len(b)) and a[len(a) - 1 - n] == -b[n]:
            n += 1
        return a[: len(a) - n] + b[n:]

    def _inv(self, a):
        return tuple(-x for x in reversed(a))

    def _identity(self):
        return ()

    def _generator(self, index):
        return (index + 1,)

    def generator_name(self, index):
        return string.ascii_lowercase[index]

    def letter_label(self, letter):
        name = self.generator_name(abs(letter) - 1)
        return name if letter > 0 else name.upper()

    def label(self, g):
        self._check(g)
        return "".join(self.letter_label(x) for x in g.payload) or "e"

    def normal_form_word(self, g):
        return g.payload

    def first_letter(self, g):
        return g.payload[0] if g.payload else None

    def parse_element(self, data):
        if isinstance(data, str):
            letters = []
            for ch in data if data != "e" else "":
                if ch.lower() not in string.ascii_lowercase[: self.rank]:
                    raise DomainError(f"unknown letter {ch!r} for {self.group_id}")
                index = string.ascii_lowercase.index(ch.lower()) + 1
                letters.append(index if ch.islower() else -index)
            return self.element(letters)
        return super().parse_element(data)

    def random_element(self, rng, length):
        return self.evaluate(self.random_reduced_word(rng, length))

    def random_reduced_word(self, rng: np.random.Generator, length: int) -> Word:
        """Draw uniformly random reduced word of given length."""
        letters = self.letters()
        word: List[Letter] = []
        while len(word) < length:
            letter = letters[int(rng.integers(0, len(letters)))]
            if not word or word[-1] != -letter:
                word.append(letter)
        return tuple(word)

    def sphere_size(self, n: int) -> int:
        return 1 if n == 0 else 2 * self.rank * self._base ** (n - 1)

    def ball_size(self, radius: int) -> int:
        return sum(self.sphere_size(n) for n in range(radius + 1))

    def _position(self, letter: Letter) -> int:
        return letter + self.rank if letter < 0 else letter + self.rank - 1

    def word_index(self, g: GroupElement) -> int:
        """Return position of *g* in the length-lexicographic order of reduced
        words; the identity gets 0."""
        self._check(g)
        word = g.payload
        n = len(word)
        if n == 0:
            return 0
        value = self._position(word[0])
        for prev, letter in zip(word, word[1:]):
            pos = self._position(letter)
            value = value * self._base + pos - (pos > self._position(-prev))
        return self.ball_size(n - 1) + value

    def index_word(self, index: int) -> GroupElement:
        """Inverse of :meth:`word_index`."""
        if index < 0:
            raise DomainError("word index must be nonnegative")
        n = 0
        while self.ball_size(n) <= index:
            n += 1
        if n == 0:
            return self.identity()
        rest = index - self.ball_size(n - 1)
        scale = self._base ** (n - 1)
        word = [self._sorted_letters[rest // scale]]
        rest %= scale
        for j in range(n - 2, -1, -1):
            scale = self._base**j
            adj, rest = divmod(rest, scale)
            skipped = self._position(-word[-1])
            word.append(self._sorted_letters[adj + (adj >= skipped)])
        return GroupElement(self.group_id, tuple(word))

    def index_translation_table(self, letter: Letter, radius: int, cap: Optional[int] = None) -> np.ndarray:
        """Return word indices of ``letter·w`` for all words ``w`` of index
        below ``ball_size(radius)``.

        Computed directly by word index arithmetic, without materializing
        elements. Results may point into ``ball(radius + 1)``.
        """
        cap = default_index_cap() if cap is None else cap
        total = self.ball_size(radius + 1)
        if total > cap:
            raise ResourceCapExceeded(f"index table of {self.group_id} ball of radius {radius + 1}", total, cap)
        base = self._base
        size = self.ball_size(radius)
        offsets = np.array([self.ball_size(n - 1) if n > 0 else 0 for n in range(radius + 3)], dtype=np.int64)
        powers = np.array([base**j for j in range(radius + 2)], dtype=np.int64)
        idx = np.arange(size, dtype=np.int64)
        lengths = np.searchsorted(offsets[1 : radius + 2], idx, side="right").astype(np.int64)
        out = np.empty(size, dtype=np.int64)
        out[0] = 1 + self._position(letter)
        nz = lengths > 0
        n = lengths[nz]
        rest = idx[nz] - offsets[n]
        scale = powers[n - 1]
        first = rest // scale
        tail = rest % scale
        q_inv = self._position(-letter)
        cancels = first == q_inv
        grow = ~cancels
        adj = first[grow] - (first[grow] > q_inv)
        out_grow = offsets[n[grow] + 1] + self._position(letter) * powers[n[grow]] + adj * scale[grow] + tail[grow]
        nc = n[cancels]
        tc = tail[cancels]
        shrunk = np.zeros(nc.shape, dtype=np.int64)
        long = nc >= 2
        if np.any(long):
            sub = powers[nc[long] - 2]
            adj1 = tc[long] // sub
            # first letter of the shortened word, skipping the inverse of the cancelled letter
            p1 = adj1 + (adj1 >= self._position(letter))
            shrunk[long] = offsets[nc[long] - 1] + p1 * sub + tc[long] % sub
        result = np.empty(n.shape, dtype=np.int64)
        result[grow] = out_grow
        result[cancels] = shrunk
        out[nz] = result
        return out


class SymmetricGroup(Group):
    """The symmetric group Sym(n) of one-line permutation tuples.

    The product is composition, ``(p·q)[i] = p[q[i]]``, and the standard
    generators are the adjacent transpositions ``s0, s1, ...``.
    """

    def __init__(self, n: int):
        if n < 2:
            raise DomainError("Sym(n) needs n >= 2")
        self.n = n
        self.num_generators = n - 1
        self.group_id = f"Sym({n})"
        self.order = math.factorial(n)

    def canonical(self, payload):
        payload = tuple(int(x) for x in payload)
        if sorted(payload) != list(range(self.n)):
            raise DomainError(f"{payload!r} is not a permutation of 0..{self.n - 1}")
        return payload

    def _mul(self, a, b):
        return tuple(a[i] for i in b)

    def _inv(self, a):
        out = [0] * self.n
        for i, x in enumerate(a):
            out[x] = i
        return tuple(out)

    def _identity(self):
        return tuple(range(self.n))

    def _generator(self, index):
        p = list(range(self.n))
        p[index], p[index + 1] = p[index + 1], p[index]
        return tuple(p)

    def generator_name(self, index):
        return f"s{index}"

    def letters(self):
        return [i + 1 for i in range(self.num_generators)]

    def normal_form_word(self, g):
        p = list(g.payload)
        swaps: List[Letter] = []
        changed = True
        while changed:
            changed = False
            for i in range(self.n - 1):
                if p[i] > p[i + 1]:
                    p[i], p[i + 1] = p[i + 1], p[i]
                    swaps.append(i + 1)
                    changed = True
        return tuple(reversed(swaps))

    def label(self, g):
        self._check(g)
        return "[" + ",".join(str(x) for x in g.payload) + "]"

    def relations(self):
        m = self.num_generators
        out: List[Word] = [(i, i) for i in range(1, m + 1)]
        out.extend((i, i + 1) * 3 for i in range(1, m))
        out.extend((i, j) * 2 for i in range(1, m + 1) for j in range(i + 2, m + 1))
        return out

    def elements(self):
        return sorted(
            (GroupElement(self.group_id, p) for p in itertools.permutations(range(self.n))),
            key=lambda g: (len(self.normal_form_word(g)), g.payload),
        )


class CyclicProduct(Group):
    """Finite abelian group ℤ/n₁ × ... × ℤ/nᵣ of residue tuples."""

    def __init__(self, moduli: Sequence[int]):
        if not moduli or any(n < 2 for n in moduli):
            raise DomainError("moduli must be a nonempty list of integers >= 2")
        self.moduli = tuple(moduli)
        self.num_generators = len(self.moduli)
        self.group_id = "x".join(f"Z/{n}" for n in self.moduli)
        self.order = math.prod(self.moduli)

    def canonical(self, payload):
        payload = tuple(int(x) for x in payload)
        if len(payload) != len(self.moduli):
            raise DomainError(f"expected {len(self.moduli)} residues for {self.group_id}")
        return tuple(x % n for x, n in zip(payload, self.moduli))

    def _mul(self, a, b):
        return tuple((x + y) % n for x, y, n in zip(a, b, self.moduli))

    def _inv(self, a):
        return tuple(-x % n for x, n in zip(a, self.moduli))

    def _identity(self):
        return (0,) * len(self.moduli)

    def _generator(self, index):
        return tuple(int(i == index) for i in range(len(self.moduli)))

    def normal_form_word(self, g):
        word: List[Letter] = []
        for i, r in enumerate(g.payload):
            word.extend([i + 1] * r)
        return tuple(word)

    def relations(self):
        out: List[Word] = [(i + 1,) * n for i, n in enumerate(self.moduli)]
        r = len(self.moduli)
        out.extend((i, j, -i, -j) for i in range(1, r + 1) for j in range(i + 1, r + 1))
        return out

    def elements(self):
        return sorted(
            (GroupElement(self.group_id, p) for p in itertools.product(*(range(n) for n in self.moduli))),
            key=lambda g: (len(self.normal_form_word(g)), g.payload),
        )


def make_group(spec: Mapping) -> Group:
    """Create catalog group from its JSON description.

    Example:

    .. doctest::

        >>> from afplab.groups import make_group
        >>> make_group({"group": "F", "rank": 2})
        <FreeGroup('F2')>
        >>> make_group({"group": "Z", "dim": 2})
        <IntegerLattice('Z^2')>
    """
    name = spec.get("group")
    if name == "Z":
        return IntegerLattice(int(spec.get("dim", 1)))
    if name == "F":
        return FreeGroup(int(spec.get("rank", 2)))
    if name == "H3Z":
        return Heisenberg()
    if name == "Sym":
        return SymmetricGroup(int(spec["n"]))
    if name == "Zmod":
        return CyclicProduct([int(x) for x in spec["moduli"]])
    raise DomainError(f"unknown group {name!r}; known groups are: Z, F, H3Z, Sym, Zmod")


@dataclasses.dataclass(frozen=True)
class GeneratingSet:
    """Finite list of generators of a catalog group.

    :param group:
        The group the generators belong to.

    :param generators:
        Nonempty tuple of non-identity elements.

    :param symmetric:
        If set, the set must be closed under inverses.
    """

    group: Group
    generators: Tuple[GroupElement, ...]
    symmetric: bool = False

    def __post_init__(self):
        if not self.generators:
            raise DomainError("generating set must not be empty")
        identity = self.group.identity()
        for g in self.generators:
            self.group._check(g)
            if g == identity:
                raise DomainError("generating set must not contain the identity")
        if self.symmetric:
            present = set(self.generators)
            for g in self.generators:
                if self.group.inv(g) not in present:
                    raise DomainError(f"generating set is not symmetric: missing inverse of {self.group.label(g)}")

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.generators)

    def __len__(self) -> int:
        return len(self.generators)

    def labels(self) -> List[str]:
        return [self.group.label(g) for g in self.generators]

    def symmetrized(self) -> "GeneratingSet":
        """Return symmetric generating set with inverses placed right after
        their generators."""
        out: List[GroupElement] = []
        for g in self.generators:
            for h in (g, self.group.inv(g)):
                if h not in out:
                    out.append(h)
        return GeneratingSet(self.group, tuple(out), symmetric=True)


class Ball:
    """Ball of the word metric, enumerated by breadth-first search.

    Elements are sorted by word length, then by payload. Each element except
    the identity records the element it was reached from and the generator
    used, so that ``elements[i] = gens[parent_generators[i]] · elements[parents[i]]``.
    """

    def __init__(
        self,
        group: Group,
        generators: GeneratingSet,
        radius: int,
        elements: List[GroupElement],
        lengths: List[int],
        parents: List[int],
        parent_generators: List[int],
    ):
        self.group = group
        self.generators = generators
        self.radius = radius
        self.elements = elements
        self.lengths = lengths
        self.parents = parents
        self.parent_generators = parent_generators
        self._index = {g: i for i, g in enumerate(elements)}

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.elements)

    def __contains__(self, g: object) -> bool:
        return g in self._index

    def __getitem__(self, i: int) -> GroupElement:
        return self.elements[i]

    def position(self, g: GroupElement) -> int:
        """Return index of *g* in this ball, or -1 if *g* lies outside."""
        return self._index.get(g, -1)

    def sphere(self, n: int) -> List[GroupElement]:
        lo = bisect.bisect_left(self.lengths, n)
        hi = bisect.bisect_right(self.lengths, n)
        return self.elements[lo:hi]

    def translation_table(self, g: GroupElement, within: Optional["Ball"] = None) -> np.ndarray:
        """Return positions in *within* (default: this ball) of ``g·h`` for all
        elements ``h`` of this ball; -1 marks products lying outside."""
        within = self if within is None else within
        mul = self.group.mul
        return np.fromiter((within.position(mul(g, h)) for h in self.elements), dtype=np.int64, count=len(self))


def ball(group: Group, generators: GeneratingSet, radius: int, cap: Optional[int] = None) -> Ball:
    """Enumerate ball of given radius of the word metric of *generators*.

    Example:

    .. doctest::

        >>> from afplab.groups import FreeGroup, ball
        >>> F2 = FreeGroup(2)
        >>> [len(ball(F2, F2.standard_generating_set(), r)) for r in range(4)]
        [1, 5, 17, 53]

    :param radius:
        Nonnegative radius.

    :param cap:
        Maximal allowed number of elements. Defaults to
        :func:`default_ball_cap`.
    """
    if radius < 0:
        raise DomainError("radius must be nonnegative")
    cap = default_ball_cap() if cap is None else cap
    if isinstance(group, FreeGroup) and set(generators) == set(group.standard_generating_set()):
        expected = group.ball_size(radius)
        if expected > cap:
            raise ResourceCapExceeded(f"ball of radius {radius} in {group.group_id}", expected, cap)
    identity = group.identity()
    seen: Dict[GroupElement, Tuple[int, int]] = {identity: (-1, -1)}
    elements = [identity]
    lengths = [0]
    frontier_start = 0
    for n in range(1, radius + 1):
        layer: Dict[GroupElement, Tuple[int, int]] = {}
        for pos in range(frontier_start, len(elements)):
            g = elements[pos]
            for k, s in enumerate(generators):
                h = group.mul(s, g)
                if h not in seen and h not in layer:
                    layer[h] = (pos, k)
        if not layer:
            break
        if len(elements) + len(layer) > cap:
            raise ResourceCapExceeded(f"ball of radius {radius} in {group.group_id}", len(elements) + len(layer), cap)
        frontier_start = len(elements)
        for h in sorted(layer, key=lambda x: x.payload):
            seen[h] = layer[h]
            elements.append(h)
            lengths.append(n)
    parents = [seen[g][0] for g in elements]
    parent_generators = [seen[g][1] for g in elements]
    logger.debug("enumerated ball of radius %d in %s with %d elements", radius, group.group_id, len(elements))
    return Ball(group, generators, radius, elements, lengths, parents, parent_generators)
