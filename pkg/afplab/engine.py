"""Følner averaging of orbits and approximate fixed point runs."""

import dataclasses
import enum
import logging
import math
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from afplab.exc import DomainError, NumericError
from afplab.folner import FolnerSchedule, FolnerSet
from afplab.groups import GroupElement
from afplab.interface import IAffineAction, ISeminorm

logger = logging.getLogger(__name__)

#: Tolerance of the weight normalization check.
WEIGHT_TOL = 1e-12

#: Absolute slack allowed on top of the displacement bound.
BOUND_SLACK = 1e-9


class OrbitCache:
    """Memoized orbit ``g ↦ g·x`` of a single point.

    Each new element is reached from a cached one by one generator
    application: with ``s`` the first letter of the normal form of ``g``,
    ``g·x = s·((s⁻¹g)·x)``.
    """

    def __init__(self, action: IAffineAction, x: Any):
        self.action = action
        self.x = x
        self._cache: Dict[GroupElement, Any] = {action.group.identity(): x}

    def __len__(self) -> int:
        return len(self._cache)

    def get(self, g: GroupElement) -> Any:
        cache = self._cache
        if g in cache:
            return cache[g]
        group = self.action.group
        group._check(g)
        pending: List[Tuple[GroupElement, int, GroupElement]] = []
        h = g
        while h not in cache:
            # the identity is always cached, so h has a first letter here
            letter = group.first_letter(h)
            assert letter is not None
            rest = group.mul(group.letter_element(-letter), h)
            pending.append((h, letter, rest))
            h = rest
        for h, letter, rest in reversed(pending):
            cache[h] = self.action.apply_letter(letter, cache[rest])
        return cache[g]


def weighted_average(
    action: IAffineAction, weights: Mapping[GroupElement, float], x: Any, orbit: Optional[OrbitCache] = None
) -> Any:
    """Return ``Σ w(g)·(g·x)`` for finitely supported probability weights *w*.

    Raises :exc:`afplab.exc.DomainError` for negative weights or weights not
    summing to 1.
    """
    if not weights:
        raise DomainError("weights must have nonempty support")
    values = list(weights.values())
    if any(w < 0 for w in values):
        raise DomainError("weights must be nonnegative")
    total = math.fsum(values)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise DomainError(f"weights must sum to 1, got {total!r}")
    orbit = OrbitCache(action, action.model.admit(x)) if orbit is None else orbit
    return action.combine(values, [orbit.get(g) for g in weights])


def folner_average(action: IAffineAction, phi: FolnerSet, x: Any, orbit: Optional[OrbitCache] = None) -> Any:
    """Return the uniform average of the orbit ``{g·x : g ∈ Φ}``.

    Example:

    .. doctest::

        >>> import numpy as np
        >>> from afplab.groups import SymmetricGroup
        >>> from afplab.folner import FolnerSet
        >>> from afplab.convex import Simplex, permutation_action
        >>> from afplab.engine import folner_average
        >>> S3 = SymmetricGroup(3)
        >>> action = permutation_action(S3, Simplex(3))
        >>> avg = folner_average(action, FolnerSet(S3, S3.elements()), np.array([1.0, 0, 0]))
        >>> np.allclose(avg, [1/3, 1/3, 1/3])
        True
    """
    return weighted_average(action, dict.fromkeys(phi, 1.0 / len(phi)), x, orbit)


@dataclasses.dataclass(frozen=True)
class DecompositionCheck:
    """Both sides of ``x_Φ - γ·x_Φ = (1/|Φ|)(Σ_{Φ∖γΦ} g·x - Σ_{γΦ∖Φ} h·x)``
    compared in a seminorm."""

    #: Seminorm of the difference of both sides.
    residual: float

    #: Set if ``γΦ = Φ``; both sides vanish then.
    empty_difference: bool

    #: Size of ``Φ∖γΦ`` (equal to the size of ``γΦ∖Φ``).
    boundary_size: int


def verify_decomposition(
    action: IAffineAction,
    phi: FolnerSet,
    x: Any,
    gamma: GroupElement,
    seminorm: ISeminorm,
    orbit: Optional[OrbitCache] = None,
    average: Any = None,
) -> DecompositionCheck:
    """Evaluate both sides of the displacement decomposition independently.

    The left side is computed from the average and its image under *gamma*,
    the right side from the orbit points over the two boundary pieces only.
    """
    inner = phi.inner_boundary(gamma)
    outer = phi.outer_boundary(gamma)
    if not inner and not outer:
        return DecompositionCheck(0.0, True, 0)
    orbit = OrbitCache(action, action.model.admit(x)) if orbit is None else orbit
    if average is None:
        average = folner_average(action, phi, x, orbit)
    lhs = average - action.act(gamma, average)
    scale = 1.0 / len(phi)
    inner_sum = action.combine([scale] * len(inner), [orbit.get(g) for g in inner])
    outer_sum = action.combine([scale] * len(outer), [orbit.get(h) for h in outer])
    rhs = inner_sum - outer_sum
    return DecompositionCheck(action.difference_norm(lhs, rhs, seminorm), False, len(inner))


@dataclasses.dataclass(frozen=True)
class GeneratorDisplacement:
    """Displacement of an average by a single generator."""

    label: str
    displacement: float
    ratio: Fraction
    bound: float
    residual: float
    weak: Optional[float] = None

    @property
    def within_bound(self) -> bool:
        return self.displacement <= self.bound + BOUND_SLACK


@dataclasses.dataclass(frozen=True)
class RunRecord:
    """Averaging result for a single schedule index."""

    index: int
    set_size: int
    average: Any
    per_generator: Tuple[GeneratorDisplacement, ...]

    @property
    def max_displacement(self) -> float:
        return max(x.displacement for x in self.per_generator)

    @property
    def max_ratio(self) -> Fraction:
        return max(x.ratio for x in self.per_generator)

    @property
    def max_residual(self) -> float:
        return max(x.residual for x in self.per_generator)


class Verdict(str, enum.Enum):
    SUCCESS = "SUCCESS"
    FAILURE = "FAILURE"


@dataclasses.dataclass(frozen=True)
class Certificate:
    """Witness of an approximate fixed point found by a run."""

    index: int
    displacement: float
    ratio: Fraction
    bound: float


@dataclasses.dataclass(frozen=True)
class AveragingRun:
    """Records of an approximate fixed point run."""

    group_id: str
    seminorm: str
    diameter: float
    epsilon: float
    records: Tuple[RunRecord, ...]
    verdict: Verdict
    certificate: Optional[Certificate] = None

    @property
    def message(self) -> str:
        last = self.records[-1]
        if self.verdict is Verdict.SUCCESS:
            return f"approximate fixed point at index {last.index} with displacement {last.max_displacement:.3e}"
        return f"no decay observed through index {last.index}"

    @property
    def bound_violations(self) -> List[Tuple[int, str]]:
        return [(r.index, g.label) for r in self.records for g in r.per_generator if not g.within_bound]


def afp_run(
    action: IAffineAction,
    schedule: FolnerSchedule,
    x0: Any,
    generators: Sequence[GroupElement],
    seminorm: ISeminorm,
    max_index: int = 12,
    min_index: int = 0,
    epsilon: float = 1e-2,
    functionals: Optional[np.ndarray] = None,
) -> AveragingRun:
    """Average the orbit of *x0* over every scheduled Følner set and measure
    how far each average is moved by the generators.

    The run succeeds if the largest displacement at the last reached index is
    below *epsilon*; a failure only states that no decay was observed through
    that index.
    """
    group = action.group
    x0 = action.model.admit(x0)
    generators = list(generators)
    diameter = action.model.diameter(seminorm)
    orbit = OrbitCache(action, x0)
    records = []
    for index in schedule.indices(max_index, min_index):
        phi = schedule.folner_set(index)
        average = folner_average(action, phi, x0, orbit)
        if not action.is_finite(average):
            raise NumericError(f"index {index}", "average is not finite")
        average = action.model.admit(average)
        per_generator = []
        for gamma in generators:
            moved = action.act(gamma, average)
            if not action.is_finite(moved):
                raise NumericError(f"index {index}", f"image under {group.label(gamma)} is not finite")
            value = action.difference_norm(average, moved, seminorm)
            ratio = phi.boundary_ratio(gamma).ratio
            check = verify_decomposition(action, phi, x0, gamma, seminorm, orbit, average)
            weak = None
            if functionals is not None:
                diff = np.asarray(average) - np.asarray(moved)
                weak = float(np.max(np.abs(np.atleast_2d(functionals) @ diff)))
            item = GeneratorDisplacement(
                group.label(gamma), value, ratio, float(ratio) / 2 * diameter, check.residual, weak
            )
            if not item.within_bound:
                logger.error(
                    "displacement %.6e by %s exceeds bound %.6e at index %d", value, item.label, item.bound, index
                )
            per_generator.append(item)
        record = RunRecord(index, len(phi), average, tuple(per_generator))
        logger.info(
            "index %d: |Φ|=%d, max displacement %.3e, max ratio %s",
            index,
            len(phi),
            record.max_displacement,
            record.max_ratio,
        )
        records.append(record)
    if not records:
        raise DomainError(f"schedule {schedule!r} provides no index in range {min_index}..{max_index}")
    last = records[-1]
    if last.max_displacement < epsilon:
        worst = max(last.per_generator, key=lambda x: x.displacement)
        certificate = Certificate(last.index, last.max_displacement, worst.ratio, worst.bound)
        return AveragingRun(
            group.group_id, seminorm.name, diameter, epsilon, tuple(records), Verdict.SUCCESS, certificate
        )
    return AveragingRun(group.group_id, seminorm.name, diameter, epsilon, tuple(records), Verdict.FAILURE)
