"""Declarative experiment configuration.

Experiment files are JSON objects loaded into :class:`ExperimentConfig` with
:meth:`afplab.schema.model.Model.load_valid`. Unknown keys, wrong types and
missing kind-specific parameters are all reported together, each with the
path of the offending key.
"""

import math
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

import numpy as np

from afplab import convex
from afplab.exc import DomainError
from afplab.folner import (
    BallSchedule,
    BoxSchedule,
    ChainSchedule,
    ExplicitSchedule,
    FolnerSchedule,
    WholeGroupSchedule,
)
from afplab.groups import GeneratingSet, Group, GroupElement, default_ball_cap, make_group
from afplab.schema.constraints import MaxValue, MinLength, MinValue
from afplab.schema.error import ErrorCode
from afplab.schema.loc import Loc
from afplab.schema.model import Model, field, model_validator, skip_unset

Kind = Literal["folner_profile", "afp_run", "reiter", "kesten", "counterexample", "embed"]

PositiveInt = Annotated[int, MinValue(min_inclusive=1)]
NonNegativeInt = Annotated[int, MinValue(min_inclusive=0)]
PositiveFloat = Annotated[float, MinValue(min_exclusive=0.0)]

#: JSON form of a group element: an integer, a word in generator letters or a
#: payload list.
ElementData = Union[int, str, List[int]]

_GROUP_PARAMETERS: Dict[str, tuple] = {
    "Z": ("dim",),
    "F": ("rank",),
    "H3Z": (),
    "Sym": ("n",),
    "Zmod": ("moduli",),
}

_REQUIRED_GROUP_PARAMETERS: Dict[str, tuple] = {"Sym": ("n",), "Zmod": ("moduli",)}


def _missing(loc: Loc, config, *names: str) -> list:
    return [config.create_error(loc + Loc(name), ErrorCode.REQUIRED_MISSING) for name in names]


class GroupSpec(Model):
    """Catalog group description, f.e. ``{"group": "F", "rank": 2}``."""

    group: Literal["Z", "F", "H3Z", "Sym", "Zmod"]
    dim: PositiveInt = field(optional=True)
    rank: Annotated[int, MinValue(min_inclusive=1), MaxValue(max_inclusive=26)] = field(optional=True)
    n: Annotated[int, MinValue(min_inclusive=2)] = field(optional=True)
    moduli: Annotated[List[Annotated[int, MinValue(min_inclusive=2)]], MinLength(1)] = field(optional=True)

    @model_validator()
    def _check_parameters(self, loc, config):
        if "group" not in self:
            return None
        allowed = _GROUP_PARAMETERS[self.group]
        errors = [
            config.create_error(loc + Loc(name), ErrorCode.UNKNOWN_FIELD)
            for name in ("dim", "rank", "n", "moduli")
            if name not in allowed and getattr(self, name) is not None and name in self
        ]
        required = _REQUIRED_GROUP_PARAMETERS.get(self.group, ())
        errors.extend(_missing(loc, config, *(name for name in required if name not in self)))
        return errors

    def build(self) -> Group:
        return make_group(self.dump(skip_unset))


class ScheduleSpec(Model):
    """Følner schedule description."""

    kind: Literal["box", "ball", "whole", "chain", "explicit"]
    rule: Literal["doubling", "linear"] = "doubling"
    start: PositiveInt = 1
    step: PositiveInt = 1
    sets: Annotated[List[Annotated[List[ElementData], MinLength(1)]], MinLength(1)] = field(optional=True)

    @model_validator()
    def _check_sets(self, loc, config):
        if self.kind == "explicit" and "sets" not in self:
            return _missing(loc, config, "sets")

    def build(self, group: Group, generators: GeneratingSet, cap: int) -> FolnerSchedule:
        if self.kind == "box":
            return BoxSchedule(group, self.rule, self.start, self.step, cap=cap)
        if self.kind == "ball":
            return BallSchedule(group, generators, cap=cap)
        if self.kind == "whole":
            return WholeGroupSchedule(group, cap=cap)
        if self.kind == "chain":
            return ChainSchedule(group, cap=cap)
        return ExplicitSchedule(group, [[group.parse_element(x) for x in s] for s in self.sets], cap=cap)


class ModelSpec(Model):
    """Convex model description."""

    kind: Literal["simplex", "ball", "intervals"]
    dim: PositiveInt = field(optional=True)
    p: Literal["l1", "l2", "linf"] = "l2"
    radius: PositiveFloat = 1.0
    lows: Annotated[List[float], MinLength(1)] = field(optional=True)
    highs: Annotated[List[float], MinLength(1)] = field(optional=True)
    tol: PositiveFloat = convex.DEFAULT_TOL

    @model_validator()
    def _check_kind_parameters(self, loc, config):
        if "kind" not in self:
            return None
        if self.kind in ("simplex", "ball"):
            return _missing(loc, config, *(x for x in ("dim",) if x not in self))
        errors = _missing(loc, config, *(x for x in ("lows", "highs") if x not in self))
        if not errors and len(self.lows) != len(self.highs):
            raise ValueError("lows and highs must have equal length")
        if not errors and any(lo >= hi for lo, hi in zip(self.lows, self.highs)):
            raise ValueError("every interval must satisfy low < high")
        return errors

    def build(self) -> convex.ConvexModel:
        if self.kind == "simplex":
            return convex.Simplex(self.dim, self.tol)
        if self.kind == "ball":
            p = {"l1": 1, "l2": 2, "linf": math.inf}[self.p]
            return convex.NormBall(self.dim, p, self.radius, self.tol)
        return convex.IntervalProduct(self.lows, self.highs, self.tol)


class ActionSpec(Model):
    """Affine action description.

    Rotation angles are given either in radians (``angles``) or in full turns
    (``turns``, angle = 2π·turns).
    """

    kind: Literal["rotation", "permutation", "identity", "matrix", "regular"]
    angles: Annotated[List[float], MinLength(1)] = field(optional=True)
    turns: Annotated[List[float], MinLength(1)] = field(optional=True)
    maps: Annotated[List[Dict[str, Any]], MinLength(1)] = field(optional=True)

    @model_validator()
    def _check_kind_parameters(self, loc, config):
        if self.kind == "rotation" and "angles" not in self and "turns" not in self:
            return _missing(loc, config, "angles")
        if self.kind == "rotation" and "angles" in self and "turns" in self:
            raise ValueError("give rotation by either angles or turns, not both")
        if self.kind == "matrix" and "maps" not in self:
            return _missing(loc, config, "maps")

    def rotation_angles(self) -> List[float]:
        if "angles" in self:
            return list(self.angles)
        return [2 * math.pi * t for t in self.turns]

    def build(self, group: Group, model: Optional[convex.ConvexModel]):
        if self.kind == "regular":
            from afplab.densities import RegularAction

            return RegularAction(group)
        if model is None:
            raise DomainError(f"{self.kind} action needs a convex model")
        if self.kind == "rotation":
            return convex.rotation_action(group, model, self.rotation_angles())
        if self.kind == "permutation":
            return convex.permutation_action(group, model)
        if self.kind == "identity":
            return convex.identity_action(group, model)
        return convex.matrix_action(group, model, self.maps)


class LimitsSpec(Model):
    """Resource limits."""

    ball_cap: PositiveInt = field(optional=True)
    index_cap: PositiveInt = field(optional=True)


class ExpectSpec(Model):
    """Expected outcome; experiments fail if it is not met."""

    verdict: Literal["SUCCESS", "FAILURE"] = field(optional=True)
    max_displacement: float = field(optional=True)
    min_displacement: float = field(optional=True)
    objective_max: float = field(optional=True)
    objective_min: float = field(optional=True)
    estimate_min: float = field(optional=True)
    estimate_max: float = field(optional=True)


class ExperimentConfig(Model):
    """Single experiment.

    Example:

    .. doctest::

        >>> from afplab.config import ExperimentConfig
        >>> config = ExperimentConfig.load_valid({
        ...     "kind": "folner_profile",
        ...     "name": "z-boxes",
        ...     "group": {"group": "Z"},
        ...     "schedule": {"kind": "box"},
        ...     "max_index": 3,
        ... })
        >>> config.group.build()
        <IntegerLattice('Z^1')>
    """

    kind: Kind
    name: Annotated[str, MinLength(1)]
    seed: NonNegativeInt = field(optional=True)
    group: GroupSpec = field(optional=True)
    generators: Annotated[List[ElementData], MinLength(1)] = field(optional=True)
    limits: LimitsSpec = field(optional=True)
    schedule: ScheduleSpec = field(optional=True)
    model: ModelSpec = field(optional=True)
    action: ActionSpec = field(optional=True)
    base_point: Annotated[List[float], MinLength(1)] = field(optional=True)
    seminorm: Literal["l1", "l2", "linf"] = "l2"
    functionals: Annotated[List[Annotated[List[float], MinLength(1)]], MinLength(1)] = field(optional=True)
    link: bool = False
    max_index: NonNegativeInt = 12
    min_index: NonNegativeInt = 0
    epsilon: PositiveFloat = 1e-2
    radius: NonNegativeInt = field(optional=True)
    radii: Annotated[List[NonNegativeInt], MinLength(1)] = field(optional=True)
    control_radii: List[NonNegativeInt] = [5, 10, 20, 45]
    p: Literal[1, 2] = 1
    method: Literal["subgradient", "lp"] = "subgradient"
    iterations: PositiveInt = 500
    step0: PositiveFloat = 1.0
    lp_max_radius: Annotated[int, MinValue(min_inclusive=-1)] = 2
    floor_threshold: PositiveFloat = 0.05
    samples: Annotated[int, MinValue(min_inclusive=2)] = 1000
    size: PositiveInt = field(optional=True)
    expect: ExpectSpec = field(optional=True)

    @model_validator()
    def _check_kind_requirements(self, loc, config):
        if "kind" not in self:
            return None
        required = {
            "folner_profile": ("group", "schedule"),
            "afp_run": ("group", "schedule", "action"),
            "reiter": ("group", "radius"),
            "kesten": ("group", "radius"),
            "counterexample": ("radii",),
            "embed": ("model",),
        }[self.kind]
        errors = _missing(loc, config, *(name for name in required if name not in self))
        if self.kind == "afp_run" and "action" in self and self.action.kind != "regular" and "model" not in self:
            errors.extend(_missing(loc, config, "model"))
        if self.kind == "embed" and "action" in self and "group" not in self:
            errors.extend(_missing(loc, config, "group"))
        if self.min_index > self.max_index:
            raise ValueError("min_index must not exceed max_index")
        return errors

    def ball_cap(self) -> int:
        if "limits" in self and "ball_cap" in self.limits:
            return self.limits.ball_cap
        return default_ball_cap()

    def index_cap(self) -> Optional[int]:
        if "limits" in self and "index_cap" in self.limits:
            return self.limits.index_cap
        return None

    def build_group(self) -> Group:
        return self.group.build()

    def build_generators(self, group: Group) -> List[GroupElement]:
        """Return configured generators, or the standard ones."""
        if "generators" not in self:
            return group.generators()
        return [group.parse_element(x) for x in self.generators]

    def build_functionals(self) -> Optional[np.ndarray]:
        if "functionals" not in self:
            return None
        return np.array(self.functionals, dtype=float)

    def echo(self) -> dict:
        """Return the config as given, without unset fields."""
        return self.dump(skip_unset)
