"""Sparse vectors over groups, probability densities and the regular
representation of a group on them."""

import math
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

import numpy as np

from afplab.exc import DomainError, PointOutsideModel, UnsupportedGroup
from afplab.groups import FreeGroup, Group, GroupElement

#: Default tolerance of normalization checks.
NORMALIZATION_TOL = 1e-12


class SparseVector:
    """Finitely supported real function on a group.

    Entries are kept in insertion order; exact zeros are dropped.
    """

    __slots__ = ("group", "_data")

    def __init__(self, group: Group, data: Mapping[GroupElement, float]):
        self.group = group
        self._data: Dict[GroupElement, float] = {g: float(v) for g, v in data.items() if v != 0}

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__}({self.group.group_id}, support={len(self._data)})>"

    def __len__(self) -> int:
        return len(self._data)

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self._data)

    def __contains__(self, g: object) -> bool:
        return g in self._data

    def __getitem__(self, g: GroupElement) -> float:
        return self._data.get(g, 0.0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self.group == other.group and self._data == other._data

    def items(self) -> Iterable[Tuple[GroupElement, float]]:
        return self._data.items()

    def support(self) -> Tuple[GroupElement, ...]:
        return tuple(self._data)

    def values(self) -> np.ndarray:
        return np.fromiter(self._data.values(), dtype=float, count=len(self._data))

    def _merge(self, other: "SparseVector", sign: float) -> "SparseVector":
        if other.group != self.group:
            raise DomainError(f"cannot combine vectors over {self.group.group_id} and {other.group.group_id}")
        out = dict(self._data)
        for g, v in other._data.items():
            out[g] = out.get(g, 0.0) + sign * v
        return SparseVector(self.group, out)

    def __add__(self, other: "SparseVector") -> "SparseVector":
        return self._merge(other, 1.0)

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        return self._merge(other, -1.0)

    def __mul__(self, scalar: float) -> "SparseVector":
        return SparseVector(self.group, {g: scalar * v for g, v in self._data.items()})

    __rmul__ = __mul__

    def norm(self, p: float = 1) -> float:
        """Return ℓᵖ norm of this vector."""
        if not self._data:
            return 0.0
        return float(np.linalg.norm(self.values(), ord=p))

    def translate(self, g: GroupElement) -> "SparseVector":
        """Return the left translate ``x ↦ f(g⁻¹x)``; masses are relabeled,
        never recomputed."""
        self.group._check(g)
        mul = self.group.mul
        return self.__class__._from_trusted(self.group, {mul(g, h): v for h, v in self._data.items()})

    @classmethod
    def _from_trusted(cls, group: Group, data: Dict[GroupElement, float]) -> "SparseVector":
        obj = cls.__new__(cls)
        obj.group = group
        obj._data = data
        return obj

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values())))


class GroupDensity(SparseVector):
    """Nonnegative finitely supported function on a group.

    Zero masses are dropped from the support; negative masses are rejected.

    :param p:
        Exponent of the ℓᵖ normalization the density is meant for.
    """

    __slots__ = ("p",)

    def __init__(self, group: Group, data: Mapping[GroupElement, float], p: float = 1):
        super().__init__(group, data)
        if any(v < 0 for v in self._data.values()):
            raise DomainError("density masses must be nonnegative")
        if p not in (1, 2):
            raise DomainError(f"density exponent must be 1 or 2, got {p!r}")
        self.p = p

    @classmethod
    def _from_trusted(cls, group, data):
        obj = super()._from_trusted(group, data)
        obj.p = 1
        return obj

    def translate(self, g: GroupElement) -> "GroupDensity":
        out = super().translate(g)
        out.p = self.p  # type: ignore[attr-defined]
        return out  # type: ignore[return-value]

    @classmethod
    def point_mass(cls, group: Group, g: Optional[GroupElement] = None, p: float = 1) -> "GroupDensity":
        return cls(group, {group.identity() if g is None else g: 1.0}, p=p)

    @classmethod
    def uniform(cls, group: Group, elements: Sequence[GroupElement], p: float = 1) -> "GroupDensity":
        """Return density constant on *elements*, normalized in ℓᵖ.

        Example:

        .. doctest::

            >>> from afplab.groups import IntegerLattice
            >>> from afplab.densities import GroupDensity
            >>> Z = IntegerLattice(1)
            >>> f = GroupDensity.uniform(Z, [Z.element([i]) for i in range(10)])
            >>> round((f.translate(Z.element([1])) - f).norm(1), 12)
            0.2
        """
        elements = list(dict.fromkeys(elements))
        if not elements:
            raise DomainError("uniform density needs a nonempty support")
        mass = 1.0 / len(elements) if p == 1 else 1.0 / math.sqrt(len(elements))
        return cls(group, dict.fromkeys(elements, mass), p=p)

    @classmethod
    def from_vector(
        cls, group: Group, elements: Sequence[GroupElement], values: np.ndarray, p: float = 1
    ) -> "GroupDensity":
        """Build density from dense values attached to *elements*; entries
        that are not positive are dropped."""
        return cls(group, {g: float(v) for g, v in zip(elements, values) if v > 0}, p=p)

    def is_normalized(self, tol: float = NORMALIZATION_TOL) -> bool:
        return abs(self.norm(self.p) - 1.0) <= tol

    def relabel_to_naturals(self) -> Dict[int, float]:
        """Return this density as a point of prob(ℕ), with words identified
        with natural numbers by their length-lexicographic position."""
        if not isinstance(self.group, FreeGroup):
            raise UnsupportedGroup("relabeling to natural numbers", self.group.group_id)
        index = self.group.word_index
        return dict(sorted((index(g), v) for g, v in self._data.items()))


def tree_sum_sparse(vectors: Sequence[SparseVector]) -> SparseVector:
    """Sum sparse vectors pairwise in a fixed tree order."""
    if not vectors:
        raise DomainError("cannot sum an empty set of vectors")
    level = list(vectors)
    while len(level) > 1:
        paired = [level[i] + level[i + 1] for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            paired.append(level[-1])
        level = paired
    return level[0]


class DensityModel:
    """The set prob(G) of finitely supported probability densities on a
    group, as a convex model for the regular representation."""

    def __init__(self, group: Group, tol: float = 1e-9):
        self.group = group
        self.tol = tol

    def __repr__(self) -> str:
        return f"<DensityModel({self.group.group_id})>"

    def violation(self, x: SparseVector) -> float:
        values = x.values()
        if values.size == 0:
            return 1.0
        return float(max(0.0, -float(values.min()), abs(math.fsum(values) - 1.0)))

    def contains(self, x: SparseVector, tol: Optional[float] = None) -> bool:
        tol = self.tol if tol is None else tol
        return x.is_finite() and self.violation(x) <= tol

    def admit(self, x: SparseVector) -> SparseVector:
        if x.group != self.group:
            raise DomainError(f"density over {x.group.group_id} given to {self!r}")
        v = self.violation(x)
        if not x.is_finite() or v > 10 * self.tol:
            raise PointOutsideModel("prob(G)", v if x.is_finite() else math.inf, 10 * self.tol)
        return x

    def diameter(self, seminorm) -> float:
        p = getattr(seminorm, "p", None)
        if p is None:
            raise DomainError(f"diameter of prob(G) is known only for lp norms, not {seminorm.name}")
        return {1.0: 2.0, 2.0: math.sqrt(2.0), math.inf: 1.0}[float(p)]

    def describe(self) -> dict:
        return {"kind": "prob", "group": self.group.group_id}


class RegularAction:
    """Left regular representation ``(g·f)(x) = f(g⁻¹x)`` of a group on
    prob(G).

    Example:

    .. doctest::

        >>> from afplab.groups import FreeGroup
        >>> from afplab.densities import GroupDensity, RegularAction
        >>> F2 = FreeGroup(2)
        >>> action = RegularAction(F2)
        >>> f = action.act(F2.parse_element("a"), GroupDensity.point_mass(F2))
        >>> [F2.label(g) for g in f]
        ['a']
    """

    def __init__(self, group: Group):
        self.group = group
        self.model = DensityModel(group)

    def __repr__(self) -> str:
        return f"<RegularAction({self.group.group_id})>"

    def act(self, g: GroupElement, x: SparseVector) -> SparseVector:
        return self.model.admit(x).translate(g)

    def apply_letter(self, letter: int, x: SparseVector) -> SparseVector:
        return x.translate(self.group.letter_element(letter))

    def combine(self, weights: Sequence[float], points: Sequence[SparseVector]) -> SparseVector:
        return tree_sum_sparse([w * x for w, x in zip(weights, points)])

    def difference_norm(self, x: SparseVector, y: SparseVector, seminorm) -> float:
        p = getattr(seminorm, "p", None)
        if p is None:
            raise DomainError(f"densities are measured with lp norms only, not {seminorm.name}")
        return (x - y).norm(p)

    def is_finite(self, x: SparseVector) -> bool:
        return x.is_finite()
