"""Bounded convex models, seminorms and affine group actions on them."""

import abc
import dataclasses
import itertools
import logging
import math
from collections.abc import Mapping
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from afplab.exc import DomainError, PointOutsideModel
from afplab.groups import Group, GroupElement, SymmetricGroup, ball

logger = logging.getLogger(__name__)

#: Default membership tolerance.
DEFAULT_TOL = 1e-9

#: Maximal number of corners enumerated by :meth:`IntervalProduct.vertices`.
MAX_CORNERS = 2**16

_P_VALUES: Dict[str, float] = {"l1": 1.0, "l2": 2.0, "linf": math.inf}


def _dual_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if p == math.inf:
        return 1.0
    return p / (p - 1)


class LpNorm:
    """The ℓᵖ norm for ``p`` in ``{1, 2, inf}``."""

    def __init__(self, p: float):
        if p not in (1, 2, math.inf):
            raise DomainError(f"unsupported norm exponent {p!r}")
        self.p = float(p)
        self.name = {1.0: "l1", 2.0: "l2", math.inf: "linf"}[self.p]

    def __repr__(self) -> str:
        return f"LpNorm({self.name})"

    def __call__(self, v: np.ndarray) -> float:
        return float(np.linalg.norm(np.asarray(v, dtype=float), ord=self.p))

    def operator_bound(self, other: "LpNorm", dim: int) -> float:
        """Return ``sup ‖v‖_other / ‖v‖_self`` over nonzero vectors in ℝᵈⁱᵐ."""
        exponent = max(0.0, 1.0 / other.p - 1.0 / self.p)
        return float(dim**exponent)


class FunctionalGap:
    """Seminorm ``v ↦ |⟨φ, v⟩|`` of a fixed test functional φ."""

    def __init__(self, phi: Sequence[float], name: Optional[str] = None):
        self.phi = np.asarray(phi, dtype=float)
        self.name = name or "functional"

    def __repr__(self) -> str:
        return f"FunctionalGap({self.name})"

    def __call__(self, v: np.ndarray) -> float:
        return float(abs(self.phi @ np.asarray(v, dtype=float)))

    def dual_norm(self, norm: LpNorm) -> float:
        return float(np.linalg.norm(self.phi, ord=_dual_exponent(norm.p)))


class SeminormFamily:
    """Finite family of seminorms, evaluated as their maximum."""

    def __init__(self, members: Sequence[Union[LpNorm, FunctionalGap]]):
        if not members:
            raise DomainError("seminorm family must not be empty")
        self.members = tuple(members)
        self.name = "max(" + ",".join(m.name for m in self.members) + ")"

    def __iter__(self):
        return iter(self.members)

    def __call__(self, v: np.ndarray) -> float:
        return max(m(v) for m in self.members)


def make_seminorm(name: str) -> LpNorm:
    """Create ℓᵖ norm from its report name (``l1``, ``l2`` or ``linf``)."""
    try:
        return LpNorm(_P_VALUES[name])
    except KeyError:
        raise DomainError(f"unknown seminorm {name!r}") from None


class ConvexModel(abc.ABC):
    """Base class for bounded convex models in ℝᵈⁱᵐ.

    :param dim:
        Dimension of the ambient space.

    :param tol:
        Membership tolerance. Points violating membership by at most ten
        times this value are projected back onto the model.
    """

    def __init__(self, dim: int, tol: float = DEFAULT_TOL):
        if dim < 1:
            raise DomainError("dimension must be positive")
        self.dim = dim
        self.tol = tol

    @abc.abstractmethod
    def violation(self, x: np.ndarray) -> float:
        """Return how far *x* violates membership (0 for members)."""

    @abc.abstractmethod
    def project(self, x: np.ndarray) -> np.ndarray:
        """Bring nearby point *x* back onto the model."""

    @abc.abstractmethod
    def _diameter(self, seminorm: Union[LpNorm, FunctionalGap]) -> float: ...

    @abc.abstractmethod
    def vertices(self) -> np.ndarray: ...

    @abc.abstractmethod
    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray: ...

    @abc.abstractmethod
    def describe(self) -> dict: ...

    def _as_point(self, x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DomainError(f"expected point of dimension {self.dim}, got shape {x.shape}")
        return x

    def contains(self, x: np.ndarray, tol: Optional[float] = None) -> bool:
        tol = self.tol if tol is None else tol
        x = self._as_point(x)
        return bool(np.all(np.isfinite(x))) and self.violation(x) <= tol

    def admit(self, x: np.ndarray) -> np.ndarray:
        x = self._as_point(x)
        if not np.all(np.isfinite(x)):
            raise PointOutsideModel(self.__class__.__name__, math.inf, 10 * self.tol)
        v = self.violation(x)
        if v <= self.tol:
            return x
        if v <= 10 * self.tol:
            logger.warning("projecting point back onto %s (violation %.3e)", self.__class__.__name__, v)
            return self.project(x)
        raise PointOutsideModel(self.__class__.__name__, v, 10 * self.tol)

    def diameter(self, seminorm: Union[LpNorm, FunctionalGap, SeminormFamily]) -> float:
        """Return diameter of the model measured by *seminorm*; exact for ℓᵖ
        norms of the catalog models, an upper bound otherwise."""
        if isinstance(seminorm, SeminormFamily):
            return max(self._diameter(m) for m in seminorm)
        return self._diameter(seminorm)


class Simplex(ConvexModel):
    """The probability simplex ``{x >= 0, Σx = 1}`` in ℝᵈⁱᵐ."""

    def violation(self, x):
        return float(max(0.0, -float(x.min()), abs(float(x.sum()) - 1.0)))

    def project(self, x):
        y = np.clip(x, 0.0, None)
        total = y.sum()
        if total <= 0:
            return np.full(self.dim, 1.0 / self.dim)
        return y / total

    def _diameter(self, seminorm):
        if isinstance(seminorm, FunctionalGap):
            return float(seminorm.phi.max() - seminorm.phi.min())
        if self.dim == 1:
            return 0.0
        return {1.0: 2.0, 2.0: math.sqrt(2.0), math.inf: 1.0}[seminorm.p]

    def vertices(self):
        return np.eye(self.dim)

    def sample(self, rng, count):
        return rng.dirichlet(np.ones(self.dim), size=count)

    def barycenter(self) -> np.ndarray:
        return np.full(self.dim, 1.0 / self.dim)

    def describe(self):
        return {"kind": "simplex", "dim": self.dim}


class NormBall(ConvexModel):
    """Closed ℓᵖ ball of radius ρ centered at the origin."""

    def __init__(self, dim: int, p: float = 2, radius: float = 1.0, tol: float = DEFAULT_TOL):
        super().__init__(dim, tol)
        if radius <= 0:
            raise DomainError("ball radius must be positive")
        self.norm = LpNorm(p)
        self.radius = float(radius)

    def violation(self, x):
        return max(0.0, self.norm(x) / self.radius - 1.0)

    def project(self, x):
        return x * (self.radius / self.norm(x))

    def _diameter(self, seminorm):
        if isinstance(seminorm, FunctionalGap):
            return 2 * self.radius * seminorm.dual_norm(self.norm)
        return 2 * self.radius * self.norm.operator_bound(seminorm, self.dim)

    def vertices(self):
        if self.norm.p == math.inf and 2**self.dim <= MAX_CORNERS:
            return self.radius * np.array(list(itertools.product((-1.0, 1.0), repeat=self.dim)))
        eye = np.eye(self.dim) * self.radius
        return np.vstack([eye, -eye])

    def sample(self, rng, count):
        if self.norm.p == math.inf:
            return rng.uniform(-self.radius, self.radius, size=(count, self.dim))
        if self.norm.p == 1:
            signs = rng.choice((-1.0, 1.0), size=(count, self.dim))
            weights = rng.dirichlet(np.ones(self.dim + 1), size=count)[:, : self.dim]
            return self.radius * signs * weights
        directions = rng.normal(size=(count, self.dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        scales = rng.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / self.dim)
        return self.radius * directions * scales

    def describe(self):
        return {"kind": "ball", "dim": self.dim, "p": self.norm.name, "radius": self.radius}


class IntervalProduct(ConvexModel):
    """Box ``[lows[i], highs[i]]`` in every coordinate."""

    def __init__(self, lows: Sequence[float], highs: Sequence[float], tol: float = DEFAULT_TOL):
        lows_arr = np.asarray(lows, dtype=float)
        highs_arr = np.asarray(highs, dtype=float)
        if lows_arr.shape != highs_arr.shape or lows_arr.ndim != 1:
            raise DomainError("lows and highs must be lists of equal length")
        if np.any(lows_arr >= highs_arr):
            raise DomainError("every interval must satisfy low < high")
        super().__init__(len(lows_arr), tol)
        self.lows = lows_arr
        self.highs = highs_arr

    def violation(self, x):
        return float(max(0.0, float(np.max(self.lows - x)), float(np.max(x - self.highs))))

    def project(self, x):
        return np.clip(x, self.lows, self.highs)

    def _diameter(self, seminorm):
        widths = self.highs - self.lows
        if isinstance(seminorm, FunctionalGap):
            return float(np.abs(seminorm.phi) @ widths)
        return float(np.linalg.norm(widths, ord=seminorm.p))

    def vertices(self):
        if 2**self.dim > MAX_CORNERS:
            raise DomainError(f"too many corners to enumerate in dimension {self.dim}")
        corners = np.array(list(itertools.product((0.0, 1.0), repeat=self.dim)))
        return self.lows + corners * (self.highs - self.lows)

    def sample(self, rng, count):
        return rng.uniform(self.lows, self.highs, size=(count, self.dim))

    def describe(self):
        return {"kind": "intervals", "lows": self.lows.tolist(), "highs": self.highs.tolist()}


class AffineMap:
    """Affine map ``x ↦ A·x + b``.

    The linear part is either a dense matrix or a permutation of coordinates
    acting by ``y[perm[i]] = x[i]``; permutations are never expanded into
    matrices.
    """

    def __init__(
        self,
        dim: int,
        matrix: Optional[np.ndarray] = None,
        shift: Optional[np.ndarray] = None,
        permutation: Optional[Sequence[int]] = None,
    ):
        if matrix is not None and permutation is not None:
            raise DomainError("affine map is either a matrix or a permutation map")
        self.dim = dim
        self.matrix = None if matrix is None else np.asarray(matrix, dtype=float)
        self.permutation = None if permutation is None else np.asarray(permutation, dtype=np.int64)
        self.shift = None if shift is None else np.asarray(shift, dtype=float)
        if self.matrix is not None and self.matrix.shape != (dim, dim):
            raise DomainError(f"matrix must have shape ({dim}, {dim})")
        if self.permutation is not None and sorted(self.permutation.tolist()) != list(range(dim)):
            raise DomainError("permutation map needs a permutation of all coordinates")
        if self.shift is not None and self.shift.shape != (dim,):
            raise DomainError(f"shift must have {dim} entries")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.permutation is not None:
            y = np.empty_like(x)
            y[self.permutation] = x
        elif self.matrix is not None:
            y = self.matrix @ x
        else:
            y = x.copy()
        if self.shift is not None:
            y = y + self.shift
        return y

    def inverse(self) -> "AffineMap":
        if self.permutation is not None:
            inv = np.empty_like(self.permutation)
            inv[self.permutation] = np.arange(self.dim)
            shift = None if self.shift is None else -self.shift[self.permutation]
            return AffineMap(self.dim, permutation=inv, shift=shift)
        matrix = np.eye(self.dim) if self.matrix is None else self.matrix
        try:
            inv_matrix = np.linalg.inv(matrix)
        except np.linalg.LinAlgError:
            raise DomainError("affine map is not invertible") from None
        shift = None if self.shift is None else -(inv_matrix @ self.shift)
        return AffineMap(self.dim, matrix=inv_matrix, shift=shift)

    @classmethod
    def rotation(cls, angle: float, dim: int = 2, plane: Tuple[int, int] = (0, 1)) -> "AffineMap":
        i, j = plane
        m = np.eye(dim)
        c, s = math.cos(angle), math.sin(angle)
        m[i, i], m[i, j], m[j, i], m[j, j] = c, -s, s, c
        return cls(dim, matrix=m)

    @classmethod
    def transposition(cls, dim: int, i: int, j: int) -> "AffineMap":
        perm = list(range(dim))
        perm[i], perm[j] = perm[j], perm[i]
        return cls(dim, permutation=perm)


@dataclasses.dataclass(frozen=True)
class GeneratorValue:
    """Value measured for a single generator."""

    label: str
    value: float


@dataclasses.dataclass(frozen=True)
class DisplacementValues:
    """Per-generator displacement values and their maximum."""

    per_generator: Tuple[GeneratorValue, ...]

    @property
    def max(self) -> float:
        return max((x.value for x in self.per_generator), default=0.0)


class AffineAction:
    """Affine action of a catalog group on a convex model, given by the
    images of the standard generators.

    :param group:
        The acting group.

    :param model:
        The convex model acted upon.

    :param images:
        One affine map per standard generator of *group*.
    """

    def __init__(self, group: Group, model: ConvexModel, images: Sequence[AffineMap]):
        if len(images) != group.num_generators:
            raise DomainError(f"{group.group_id} needs {group.num_generators} generator images, got {len(images)}")
        for image in images:
            if image.dim != model.dim:
                raise DomainError("generator image dimension does not match the model")
        self.group = group
        self.model = model
        self.images = tuple(images)
        self._inverses = tuple(image.inverse() for image in images)

    def __repr__(self) -> str:
        return f"<AffineAction({self.group.group_id} on {self.model.describe()['kind']})>"

    def apply_letter(self, letter: int, x: np.ndarray) -> np.ndarray:
        index = abs(letter) - 1
        if not 0 <= index < len(self.images):
            raise DomainError(f"unknown generator letter {letter}")
        return (self.images if letter > 0 else self._inverses)[index](x)

    def act(self, g: GroupElement, x: np.ndarray) -> np.ndarray:
        """Apply *g* to *x* along the normal form word of *g*.

        Example:

        .. doctest::

            >>> import numpy as np
            >>> from afplab.groups import SymmetricGroup
            >>> from afplab.convex import Simplex, permutation_action
            >>> S5 = SymmetricGroup(5)
            >>> action = permutation_action(S5, Simplex(5))
            >>> action.act(S5.element([1, 0, 2, 3, 4]), np.array([1.0, 0, 0, 0, 0])).tolist()
            [0.0, 1.0, 0.0, 0.0, 0.0]
        """
        self.group._check(g)
        x = self.model.admit(x)
        for letter in reversed(self.group.normal_form_word(g)):
            x = self.apply_letter(letter, x)
        return x

    def combine(self, weights: Sequence[float], points: Sequence[np.ndarray]) -> np.ndarray:
        """Return ``Σ weights[i]·points[i]`` summed pairwise in a fixed tree
        order."""
        terms = np.asarray(weights, dtype=float)[:, None] * np.asarray(points, dtype=float)
        return tree_sum(terms)

    def difference_norm(self, x: np.ndarray, y: np.ndarray, seminorm) -> float:
        return float(seminorm(np.asarray(x) - np.asarray(y)))

    def is_finite(self, x: np.ndarray) -> bool:
        return bool(np.all(np.isfinite(x)))

    def contains(self, x: np.ndarray, word_length: int = 1) -> bool:
        return self.model.contains(x, self.model.tol * max(1, word_length))


def tree_sum(terms: np.ndarray) -> np.ndarray:
    """Sum rows of *terms* pairwise; the last row of an odd level is carried
    over unchanged."""
    if len(terms) == 0:
        raise DomainError("cannot sum an empty set of points")
    while len(terms) > 1:
        paired = terms[0 : len(terms) - 1 : 2] + terms[1::2]
        if len(terms) % 2:
            paired = np.vstack([paired, terms[-1:]])
        terms = paired
    return terms[0]


def displacement(action, x, generators: Sequence[GroupElement], seminorm) -> DisplacementValues:
    """Measure ``q(x - g·x)`` for every generator *g*."""
    label = action.group.label
    return DisplacementValues(
        tuple(GeneratorValue(label(g), action.difference_norm(x, action.act(g, x), seminorm)) for g in generators)
    )


def weak_displacement(action, x, generators: Sequence[GroupElement], functionals: np.ndarray) -> DisplacementValues:
    """Measure ``max_φ |⟨φ, x - g·x⟩|`` for every generator *g*."""
    functionals = np.atleast_2d(np.asarray(functionals, dtype=float))
    if functionals.size == 0:
        raise DomainError("weak displacement needs at least one functional")
    out = []
    for g in generators:
        diff = np.asarray(x) - np.asarray(action.act(g, x))
        out.append(GeneratorValue(action.group.label(g), float(np.max(np.abs(functionals @ diff)))))
    return DisplacementValues(tuple(out))


@dataclasses.dataclass(frozen=True)
class ActionCheck:
    """Result of a sampled check of an action."""

    #: Largest discrepancy found.
    max_discrepancy: float

    #: Allowed discrepancy.
    tolerance: float

    #: Human readable description of the worst case, if any.
    worst: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.tolerance


def _sample_points(model: ConvexModel, rng: np.random.Generator, count: int) -> np.ndarray:
    return np.vstack([model.vertices(), model.sample(rng, count)])


def check_relations(
    action: AffineAction, rng: np.random.Generator, samples: int = 20, tol: float = 1e-9
) -> ActionCheck:
    """Check that every catalog relation of the group acts trivially on
    sampled points, with tolerance scaled by relation length."""
    worst, worst_value = None, 0.0
    points = _sample_points(action.model, rng, samples)
    for word in action.group.relations():
        for x in points:
            y = x
            for letter in reversed(word):
                y = action.apply_letter(letter, y)
            # discrepancy per letter of the relation
            value = float(np.max(np.abs(y - x))) / len(word)
            if value > worst_value:
                worst, worst_value = " ".join(action.group.letter_label(k) for k in word), value
    if worst_value > 0.5 * tol:
        logger.warning("relation %s holds only up to %.3e per letter", worst, worst_value)
    return ActionCheck(worst_value, tol, worst)


def check_invariance(
    action: AffineAction, rng: np.random.Generator, radius: int = 3, samples: int = 20
) -> ActionCheck:
    """Check that elements of the ball of given radius map sampled points into
    the model, with tolerance scaled by word length."""
    b = ball(action.group, action.group.standard_generating_set(), radius)
    points = _sample_points(action.model, rng, samples)
    worst, worst_ratio = None, 0.0
    for g, length in zip(b.elements, b.lengths):
        for x in points:
            violation = action.model.violation(action.act(g, x))
            ratio = violation / max(1, length)
            if ratio > worst_ratio:
                worst, worst_ratio = action.group.label(g), ratio
    return ActionCheck(worst_ratio, action.model.tol, worst)


def rotation_action(group: Group, model: ConvexModel, angles: Sequence[float]) -> AffineAction:
    """Let the i-th standard generator rotate the first coordinate plane by
    ``angles[i]``."""
    if model.dim < 2:
        raise DomainError("rotation actions need dimension at least 2")
    return AffineAction(group, model, [AffineMap.rotation(a, model.dim) for a in angles])


def permutation_action(group: SymmetricGroup, model: ConvexModel) -> AffineAction:
    """Let Sym(n) permute the coordinates of an n-dimensional model."""
    if not isinstance(group, SymmetricGroup):
        raise DomainError("permutation action needs a symmetric group")
    if model.dim != group.n:
        raise DomainError(f"Sym({group.n}) permutes {group.n} coordinates, model has {model.dim}")
    return AffineAction(group, model, [AffineMap.transposition(model.dim, i, i + 1) for i in range(group.n - 1)])


def identity_action(group: Group, model: ConvexModel) -> AffineAction:
    return AffineAction(group, model, [AffineMap(model.dim) for _ in range(group.num_generators)])


def matrix_action(group: Group, model: ConvexModel, maps: Sequence[Mapping]) -> AffineAction:
    """Build action from per-generator ``{"matrix": ..., "shift": ...}`` or
    ``{"permutation": ..., "shift": ...}`` mappings."""
    images: List[AffineMap] = []
    for spec in maps:
        images.append(
            AffineMap(
                model.dim,
                matrix=spec.get("matrix"),
                shift=spec.get("shift"),
                permutation=spec.get("permutation"),
            )
        )
    return AffineAction(group, model, images)
