"""Følner sets, their boundary ratios and Følner schedules."""

import abc
import dataclasses
import itertools
import logging
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from afplab.exc import DomainError, ResourceCapExceeded, UnsupportedGroup
from afplab.groups import (
    FreeGroup,
    GeneratingSet,
    Group,
    GroupElement,
    Heisenberg,
    IntegerLattice,
    SymmetricGroup,
    ball,
    default_ball_cap,
)

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class BoundaryRatio:
    """Exact boundary statistics of a finite set Φ for a single element γ."""

    #: The ratio ``|γΦ△Φ| / |Φ|``.
    ratio: Fraction

    #: Size of ``γΦ∖Φ``.
    outer: int

    #: Size of ``Φ∖γΦ``.
    inner: int

    #: Size of Φ.
    size: int

    @property
    def symmetric_difference(self) -> int:
        return self.outer + self.inner


class FolnerSet:
    """Nonempty finite subset of a group with cached boundary ratios.

    Elements keep the order they were given in, with duplicates removed;
    averages are summed in that order.
    """

    def __init__(self, group: Group, elements: Iterable[GroupElement]):
        self.group = group
        self.elements: Tuple[GroupElement, ...] = tuple(dict.fromkeys(elements))
        if not self.elements:
            raise DomainError("Følner set must not be empty")
        for g in self.elements:
            group._check(g)
        self._members = frozenset(self.elements)
        self._ratios: Dict[GroupElement, BoundaryRatio] = {}

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.elements)

    def __contains__(self, g: object) -> bool:
        return g in self._members

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FolnerSet) and other._members == self._members

    def __repr__(self) -> str:
        return f"<FolnerSet({self.group.group_id}, size={len(self)})>"

    def outer_boundary(self, gamma: GroupElement) -> List[GroupElement]:
        """Return ``γΦ∖Φ`` in the order of Φ."""
        mul = self.group.mul
        return [h for h in (mul(gamma, g) for g in self.elements) if h not in self._members]

    def inner_boundary(self, gamma: GroupElement) -> List[GroupElement]:
        """Return ``Φ∖γΦ`` in the order of Φ."""
        gamma_inv = self.group.inv(gamma)
        mul = self.group.mul
        return [h for h in self.elements if mul(gamma_inv, h) not in self._members]

    def boundary_ratio(self, gamma: GroupElement) -> BoundaryRatio:
        """Return exact ratio ``|γΦ△Φ| / |Φ|`` together with the split counts.

        Example:

        .. doctest::

            >>> from afplab.groups import IntegerLattice
            >>> from afplab.folner import FolnerSet
            >>> Z = IntegerLattice(1)
            >>> phi = FolnerSet(Z, [Z.element([i]) for i in range(10)])
            >>> phi.boundary_ratio(Z.element([1])).ratio
            Fraction(1, 5)
        """
        self.group._check(gamma)
        cached = self._ratios.get(gamma)
        if cached is None:
            outer = len(self.outer_boundary(gamma))
            inner = len(self.inner_boundary(gamma))
            cached = BoundaryRatio(Fraction(outer + inner, len(self)), outer, inner, len(self))
            self._ratios[gamma] = cached
        return cached

    def max_ratio(self, generators: Iterable[GroupElement]) -> Fraction:
        return max(self.boundary_ratio(g).ratio for g in generators)

    def translate_left(self, eta: GroupElement) -> "FolnerSet":
        return FolnerSet(self.group, (self.group.mul(eta, g) for g in self.elements))

    def translate_right(self, eta: GroupElement) -> "FolnerSet":
        return FolnerSet(self.group, (self.group.mul(g, eta) for g in self.elements))


def boundary_ratio(phi: FolnerSet, gamma: GroupElement) -> BoundaryRatio:
    """Functional form of :meth:`FolnerSet.boundary_ratio`."""
    return phi.boundary_ratio(gamma)


class FolnerSchedule(abc.ABC):
    """Indexed family of Følner candidates of a group.

    :param group:
        The group.

    :param cap:
        Maximal allowed set size.
    """

    #: Largest index the schedule provides, or ``None`` if unbounded.
    max_index: Optional[int] = None

    def __init__(self, group: Group, cap: Optional[int] = None):
        self.group = group
        self.cap = default_ball_cap() if cap is None else cap

    @abc.abstractmethod
    def set_size(self, index: int) -> int:
        """Return size of the set with given index without building it."""

    @abc.abstractmethod
    def _build(self, index: int) -> FolnerSet: ...

    def side(self, index: int) -> Optional[int]:
        """Return linear size parameter of the set with given index, if any."""
        return None

    def folner_set(self, index: int) -> FolnerSet:
        """Build the set with given index.

        Raises :exc:`afplab.exc.ResourceCapExceeded` if it would be larger
        than the cap.
        """
        if index < 0 or (self.max_index is not None and index > self.max_index):
            raise DomainError(f"index {index} is out of range of {self!r}")
        size = self.set_size(index)
        if size > self.cap:
            raise ResourceCapExceeded(f"Følner set with index {index}", size, self.cap)
        return self._build(index)

    def indices(self, max_index: int, min_index: int = 0) -> range:
        upper = max_index if self.max_index is None else min(max_index, self.max_index)
        return range(min_index, upper + 1)


class BoxSchedule(FolnerSchedule):
    """Boxes in ℤᵈ and in H₃(ℤ).

    In ℤᵈ the set with side *n* is ``[0, n)ᵈ``; in H₃(ℤ) it is
    ``{(a, b, c): 0 <= a, b < n, 0 <= c < n²}``.

    :param rule:
        Either ``"doubling"`` (side ``2**index``) or ``"linear"`` (side
        ``start + step * index``).
    """

    def __init__(self, group: Group, rule: str = "doubling", start: int = 1, step: int = 1, cap: Optional[int] = None):
        if not isinstance(group, (IntegerLattice, Heisenberg)):
            raise UnsupportedGroup("box schedule", group.group_id)
        if rule not in ("doubling", "linear"):
            raise DomainError(f"unknown side rule {rule!r}")
        if rule == "linear" and (start < 1 or step < 1):
            raise DomainError("linear side rule needs start >= 1 and step >= 1")
        super().__init__(group, cap)
        self.rule = rule
        self.start = start
        self.step = step

    def __repr__(self) -> str:
        return f"<BoxSchedule({self.group.group_id}, rule={self.rule!r})>"

    def side(self, index: int) -> int:
        if self.rule == "doubling":
            return 2**index
        return self.start + self.step * index

    def set_size(self, index):
        n = self.side(index)
        if isinstance(self.group, Heisenberg):
            return n**4
        return n**self.group.dim

    def _build(self, index):
        n = self.side(index)
        if isinstance(self.group, Heisenberg):
            ranges: Sequence[range] = (range(n), range(n), range(n * n))
        else:
            ranges = [range(n)] * self.group.dim
        return FolnerSet(self.group, (self.group.element(p) for p in itertools.product(*ranges)))


class BallSchedule(FolnerSchedule):
    """Word metric balls; index is the radius."""

    def __init__(self, group: Group, generators: GeneratingSet, cap: Optional[int] = None):
        super().__init__(group, cap)
        self.generators = generators.symmetrized()

    def __repr__(self) -> str:
        return f"<BallSchedule({self.group.group_id})>"

    def side(self, index):
        return index

    def set_size(self, index):
        if isinstance(self.group, FreeGroup) and set(self.generators) == set(self.group.standard_generating_set()):
            return self.group.ball_size(index)
        return 0

    def _build(self, index):
        return FolnerSet(self.group, ball(self.group, self.generators, index, cap=self.cap).elements)


class WholeGroupSchedule(FolnerSchedule):
    """Single-set schedule of a finite group."""

    max_index = 0

    def __init__(self, group: Group, cap: Optional[int] = None):
        if group.order is None:
            raise UnsupportedGroup("whole group schedule", group.group_id)
        super().__init__(group, cap)

    def set_size(self, index):
        return self.group.order

    def _build(self, index):
        return FolnerSet(self.group, self.group.elements())


class ChainSchedule(FolnerSchedule):
    """The chain Sym(1) ⊂ Sym(2) ⊂ ... ⊂ Sym(n) inside Sym(n).

    The set with index *i* consists of permutations moving only the points
    ``0..i``. Every adjacent transposition ``s_j`` with ``j < i`` has ratio 0
    on it, so the chain realizes approximate fixed points of the finitary
    symmetric group one transposition at a time.
    """

    def __init__(self, group: Group, cap: Optional[int] = None):
        if not isinstance(group, SymmetricGroup):
            raise UnsupportedGroup("chain schedule", group.group_id)
        super().__init__(group, cap)
        self.max_index = group.n - 1

    def set_size(self, index):
        out = 1
        for k in range(2, index + 2):
            out *= k
        return out

    def _build(self, index):
        n = self.group.n
        tail = tuple(range(index + 1, n))
        perms = sorted(itertools.permutations(range(index + 1)))
        return FolnerSet(self.group, (GroupElement(self.group.group_id, p + tail) for p in perms))


class ExplicitSchedule(FolnerSchedule):
    """Schedule made of explicitly given sets."""

    def __init__(self, group: Group, sets: Sequence[Sequence[GroupElement]], cap: Optional[int] = None):
        if not sets:
            raise DomainError("explicit schedule needs at least one set")
        super().__init__(group, cap)
        self._sets = [FolnerSet(group, s) for s in sets]
        self.max_index = len(self._sets) - 1

    def set_size(self, index):
        return len(self._sets[index])

    def _build(self, index):
        return self._sets[index]


@dataclasses.dataclass(frozen=True)
class ProfileRow:
    """Single row of a ratio profile."""

    index: int
    set_size: int
    generator_label: str
    ratio: Fraction

    def as_csv_row(self) -> dict:
        return {
            "index": self.index,
            "set_size": self.set_size,
            "generator_label": self.generator_label,
            "ratio_num": self.ratio.numerator,
            "ratio_den": self.ratio.denominator,
            "ratio_float": float(self.ratio),
        }


def ratio_profile(
    schedule: FolnerSchedule, generators: Iterable[GroupElement], max_index: int, min_index: int = 0
) -> List[ProfileRow]:
    """Compute boundary ratios of every scheduled set for every generator.

    Example:

    .. doctest::

        >>> from afplab.groups import IntegerLattice
        >>> from afplab.folner import BoxSchedule, ratio_profile
        >>> Z = IntegerLattice(1)
        >>> rows = ratio_profile(BoxSchedule(Z), [Z.element([1])], 5, min_index=1)
        >>> [str(r.ratio) for r in rows]
        ['1', '1/2', '1/4', '1/8', '1/16']
    """
    generators = list(generators)
    if not generators:
        raise DomainError("ratio profile needs at least one generator")
    rows = []
    for index in schedule.indices(max_index, min_index):
        phi = schedule.folner_set(index)
        for gamma in generators:
            rows.append(ProfileRow(index, len(phi), schedule.group.label(gamma), phi.boundary_ratio(gamma).ratio))
        logger.info(
            "index %d: |Φ|=%d, max ratio %s", index, len(phi), max(r.ratio for r in rows[-len(generators) :])
        )
    if not rows:
        raise DomainError(f"schedule {schedule!r} provides no index in range {min_index}..{max_index}")
    return rows
