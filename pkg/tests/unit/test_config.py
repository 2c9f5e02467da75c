import math

import pytest

from afplab import convex
from afplab.config import ExperimentConfig
from afplab.densities import RegularAction
from afplab.exc import ParsingError, ValidationError
from afplab.folner import BallSchedule, BoxSchedule, ExplicitSchedule
from afplab.groups import FreeGroup, SymmetricGroup
from afplab.schema.loc import Loc

from tests.helpers import ErrorFactoryHelper


def profile(**overrides) -> dict:
    data = {
        "kind": "folner_profile",
        "name": "profile",
        "group": {"group": "Z", "dim": 2},
        "schedule": {"kind": "box"},
    }
    data.update(overrides)
    return data


class TestLoading:

    def test_minimal_config_gets_defaults(self):
        config = ExperimentConfig.load_valid(profile())
        assert config.max_index == 12
        assert config.min_index == 0
        assert config.seminorm == "l2"
        assert config.control_radii == [5, 10, 20, 45]
        assert "seed" not in config

    def test_unknown_key_is_reported_with_location(self):
        with pytest.raises(ParsingError) as excinfo:
            ExperimentConfig.load_valid(profile(schedule={"kind": "box", "sides": 3}))
        assert excinfo.value.errors == (ErrorFactoryHelper.unknown_field(Loc("schedule", "sides")),)

    def test_all_parsing_errors_are_reported_together(self):
        with pytest.raises(ParsingError) as excinfo:
            ExperimentConfig.load_valid(profile(max_index=-1, epsilon=0, group={"group": "F", "rank": 27}))
        assert sorted(excinfo.value.errors, key=lambda e: str(e.loc)) == [
            ErrorFactoryHelper.value_too_low(Loc("epsilon"), min_exclusive=0.0),
            ErrorFactoryHelper.value_too_high(Loc("group", "rank"), max_inclusive=26),
            ErrorFactoryHelper.value_too_low(Loc("max_index"), min_inclusive=0),
        ]

    def test_unknown_kind(self):
        with pytest.raises(ParsingError) as excinfo:
            ExperimentConfig.load_valid(profile(kind="benchmark"))
        assert excinfo.value.errors[0].loc == Loc("kind")
        assert excinfo.value.errors[0].code == "afplab.InvalidLiteral"


class TestKindRequirements:

    @pytest.mark.parametrize(
        "data, missing",
        [
            ({"kind": "reiter", "name": "r", "group": {"group": "F"}}, ["radius"]),
            ({"kind": "kesten", "name": "k"}, ["group", "radius"]),
            ({"kind": "counterexample", "name": "c"}, ["radii"]),
            ({"kind": "embed", "name": "e"}, ["model"]),
            ({"kind": "folner_profile", "name": "p", "group": {"group": "Z"}}, ["schedule"]),
            (
                {
                    "kind": "afp_run",
                    "name": "a",
                    "group": {"group": "Z"},
                    "schedule": {"kind": "box"},
                    "action": {"kind": "rotation", "angles": [1.0]},
                },
                ["model"],
            ),
            (
                {
                    "kind": "embed",
                    "name": "e",
                    "seed": 1,
                    "model": {"kind": "simplex", "dim": 3},
                    "action": {"kind": "permutation"},
                },
                ["group"],
            ),
        ],
    )
    def test_missing_parameters_are_reported(self, data, missing):
        with pytest.raises(ValidationError) as excinfo:
            ExperimentConfig.load_valid(data)
        assert list(excinfo.value.errors) == [ErrorFactoryHelper.required_missing(Loc(x)) for x in missing]

    def test_regular_action_needs_no_model(self):
        config = ExperimentConfig.load_valid(
            {
                "kind": "afp_run",
                "name": "a",
                "seed": 1,
                "group": {"group": "F", "rank": 2},
                "schedule": {"kind": "ball"},
                "action": {"kind": "regular"},
            }
        )
        assert isinstance(config.action.build(config.build_group(), None), RegularAction)

    def test_min_index_must_not_exceed_max_index(self):
        with pytest.raises(ValidationError) as excinfo:
            ExperimentConfig.load_valid(profile(min_index=4, max_index=3))
        assert excinfo.value.errors == (
            ErrorFactoryHelper.value_error(Loc(), "min_index must not exceed max_index"),
        )


class TestGroupSpec:

    @pytest.mark.parametrize(
        "group, expected_id",
        [
            ({"group": "Z"}, "Z^1"),
            ({"group": "Z", "dim": 3}, "Z^3"),
            ({"group": "F"}, "F2"),
            ({"group": "F", "rank": 3}, "F3"),
            ({"group": "H3Z"}, "H3(Z)"),
            ({"group": "Sym", "n": 4}, "Sym(4)"),
            ({"group": "Zmod", "moduli": [2, 3]}, "Z/2xZ/3"),
        ],
    )
    def test_build(self, group, expected_id):
        config = ExperimentConfig.load_valid(profile(group=group))
        assert config.build_group().group_id == expected_id

    def test_parameter_of_another_group_is_rejected(self):
        with pytest.raises(ValidationError) as excinfo:
            ExperimentConfig.load_valid(profile(group={"group": "Z", "rank": 2}))
        assert excinfo.value.errors == (ErrorFactoryHelper.unknown_field(Loc("group", "rank")),)

    def test_required_group_parameter(self):
        with pytest.raises(ValidationError) as excinfo:
            ExperimentConfig.load_valid(profile(group={"group": "Sym"}))
        assert excinfo.value.errors == (ErrorFactoryHelper.required_missing(Loc("group", "n")),)

    def test_generators_are_parsed_in_group(self):
        config = ExperimentConfig.load_valid(profile(group={"group": "F", "rank": 2}, generators=["a", "bA"]))
        F2 = FreeGroup(2)
        assert config.build_generators(config.build_group()) == [F2.element([1]), F2.element([2, -1])]

    def test_generators_accept_integers_words_and_payloads(self):
        config = ExperimentConfig.load_valid(profile(group={"group": "F", "rank": 2}, generators=[1, "b", [1, -2]]))
        F2 = FreeGroup(2)
        assert config.generators == [1, "b", [1, -2]]
        assert config.build_generators(config.build_group()) == [F2.element([1]), F2.element([2]), F2.element([1, -2])]

    @pytest.mark.parametrize("bad", [True, {"a": 1}, [1, "x"], None])
    def test_generator_of_unsupported_form_is_rejected(self, bad):
        with pytest.raises(ParsingError) as excinfo:
            ExperimentConfig.load_valid(profile(generators=[[1], bad]))
        assert [(e.loc, e.code) for e in excinfo.value.errors] == [(Loc("generators", 1), "afplab.UnsupportedType")]

    def test_standard_generators_are_default(self):
        config = ExperimentConfig.load_valid(profile(group={"group": "Sym", "n": 3}))
        assert config.build_generators(config.build_group()) == SymmetricGroup(3).generators()


class TestScheduleSpec:

    def test_build_box(self):
        config = ExperimentConfig.load_valid(profile(schedule={"kind": "box", "rule": "linear", "start": 2, "step": 3}))
        group = config.build_group()
        schedule = config.schedule.build(group, group.standard_generating_set(), config.ball_cap())
        assert isinstance(schedule, BoxSchedule)
        assert [schedule.side(i) for i in range(3)] == [2, 5, 8]

    def test_build_ball(self):
        config = ExperimentConfig.load_valid(profile(group={"group": "F"}, schedule={"kind": "ball"}))
        group = config.build_group()
        assert isinstance(config.schedule.build(group, group.standard_generating_set(), 100), BallSchedule)

    def test_build_explicit(self):
        config = ExperimentConfig.load_valid(
            profile(group={"group": "Z", "dim": 1}, schedule={"kind": "explicit", "sets": [[0], [0, 1, 2]]})
        )
        group = config.build_group()
        schedule = config.schedule.build(group, group.standard_generating_set(), 100)
        assert isinstance(schedule, ExplicitSchedule)
        assert len(schedule.folner_set(1)) == 3

    def test_explicit_schedule_needs_sets(self):
        with pytest.raises(ValidationError) as excinfo:
            ExperimentConfig.load_valid(profile(schedule={"kind": "explicit"}))
        assert excinfo.value.errors == (ErrorFactoryHelper.required_missing(Loc("schedule", "sets")),)


class TestModelAndActionSpecs:

    def afp(self, **overrides) -> dict:
        data = {
            "kind": "afp_run",
            "name": "a",
            "seed": 1,
            "group": {"group": "Z", "dim": 1},
            "schedule": {"kind": "box"},
            "model": {"kind": "ball", "dim": 2},
            "action": {"kind": "rotation", "turns": [0.25]},
        }
        data.update(overrides)
        return data

    def test_turns_are_converted_to_angles(self):
        config = ExperimentConfig.load_valid(self.afp())
        assert config.action.rotation_angles() == [math.pi / 2]

    def test_rotation_needs_angles(self):
        with pytest.raises(ValidationError) as excinfo:
            ExperimentConfig.load_valid(self.afp(action={"kind": "rotation"}))
        assert excinfo.value.errors == (ErrorFactoryHelper.required_missing(Loc("action", "angles")),)

    def test_rotation_angles_and_turns_are_exclusive(self):
        with pytest.raises(ValidationError) as excinfo:
            ExperimentConfig.load_valid(self.afp(action={"kind": "rotation", "angles": [1.0], "turns": [0.5]}))
        assert excinfo.value.errors == (
            ErrorFactoryHelper.value_error(Loc("action"), "give rotation by either angles or turns, not both"),
        )

    @pytest.mark.parametrize(
        "model, expected_type",
        [
            ({"kind": "simplex", "dim": 3}, convex.Simplex),
            ({"kind": "ball", "dim": 2, "p": "linf", "radius": 2.0}, convex.NormBall),
            ({"kind": "intervals", "lows": [0, 0], "highs": [1, 2]}, convex.IntervalProduct),
        ],
    )
    def test_build_model(self, model, expected_type):
        config = ExperimentConfig.load_valid(self.afp(model=model))
        assert isinstance(config.model.build(), expected_type)

    def test_interval_bounds_must_match(self):
        with pytest.raises(ValidationError) as excinfo:
            ExperimentConfig.load_valid(self.afp(model={"kind": "intervals", "lows": [0, 0], "highs": [1]}))
        expected = ErrorFactoryHelper.value_error(Loc("model"), "lows and highs must have equal length")
        assert excinfo.value.errors == (expected,)

    def test_simplex_needs_dimension(self):
        with pytest.raises(ValidationError) as excinfo:
            ExperimentConfig.load_valid(self.afp(model={"kind": "simplex"}))
        assert excinfo.value.errors == (ErrorFactoryHelper.required_missing(Loc("model", "dim")),)

    def test_build_rotation_action(self):
        config = ExperimentConfig.load_valid(self.afp())
        group = config.build_group()
        action = config.action.build(group, config.model.build())
        assert isinstance(action, convex.AffineAction)
        image = action.act(group.element([1]), [1.0, 0.0])
        assert image[0] == pytest.approx(0.0, abs=1e-15)
        assert image[1] == pytest.approx(1.0)


class TestLimits:

    def test_ball_cap_from_config(self):
        config = ExperimentConfig.load_valid(profile(limits={"ball_cap": 10}))
        assert config.ball_cap() == 10

    def test_ball_cap_from_environment(self, monkeypatch):
        monkeypatch.setenv("AFPLAB_BALL_CAP", "123")
        assert ExperimentConfig.load_valid(profile()).ball_cap() == 123

    def test_index_cap_is_unset_by_default(self):
        assert ExperimentConfig.load_valid(profile()).index_cap() is None


class TestEcho:

    def test_echo_contains_given_and_default_values_only(self):
        config = ExperimentConfig.load_valid(profile())
        echo = config.echo()
        assert echo["group"] == {"group": "Z", "dim": 2}
        assert echo["schedule"] == {"kind": "box", "rule": "doubling", "start": 1, "step": 1}
        assert "seed" not in echo
        assert "expect" not in echo

    def test_echo_loads_back_to_equal_config(self):
        config = ExperimentConfig.load_valid(profile(seed=3, expect={"verdict": "SUCCESS"}))
        assert ExperimentConfig.load_valid(config.echo()) == config
