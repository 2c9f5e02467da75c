import pytest

from afplab.schema.loc import Loc


class TestLoc:

    @pytest.mark.parametrize(
        "uut, expected_repr",
        [
            (Loc(), "Loc()"),
            (Loc(1), "Loc(1)"),
            (Loc("group"), "Loc('group')"),
            (Loc("schedule", "sets", 1), "Loc('schedule', 'sets', 1)"),
        ],
    )
    def test_repr(self, uut, expected_repr):
        assert repr(uut) == expected_repr

    @pytest.mark.parametrize(
        "uut, expected_str",
        [
            (Loc(), "(root)"),
            (Loc("group"), "group"),
            (Loc(1), "1"),
            (Loc("group", "rank"), "group.rank"),
            (Loc("generators", 1), "generators.1"),
        ],
    )
    def test_str(self, uut, expected_str):
        assert str(uut) == expected_str

    @pytest.mark.parametrize(
        "uut, index, expected",
        [
            (Loc(1), 0, 1),
            (Loc("model"), 0, "model"),
            (Loc("model", "lows", 1, "x"), 2, 1),
        ],
    )
    def test_getitem(self, uut, index, expected):
        assert uut[index] == expected

    @pytest.mark.parametrize(
        "uut, expected",
        [
            (Loc(), 0),
            (Loc("model"), 1),
            (Loc("model", "lows", 2), 3),
        ],
    )
    def test_len(self, uut, expected):
        assert len(uut) == expected

    @pytest.mark.parametrize(
        "left, right, is_equal",
        [
            (Loc(), Loc(), True),
            (Loc(1), Loc(), False),
            (Loc(), Loc(1), False),
            (Loc(1), Loc(1), True),
            (Loc("group"), Loc("group", 2), False),
        ],
    )
    def test_eq_and_ne_operators(self, left, right, is_equal):
        assert (left == right) == is_equal
        assert (left != right) == (not is_equal)

    @pytest.mark.parametrize(
        "left, right, expected_sum",
        [
            (Loc(), Loc(), Loc()),
            (Loc(1), Loc(2), Loc(1, 2)),
            (Loc("model", "lows"), Loc(3), Loc("model", "lows", 3)),
        ],
    )
    def test_concatenate_two_locs(self, left, right, expected_sum):
        assert left + right == expected_sum

    def test_locs_with_mixed_items_can_be_sorted(self):
        locs = [Loc("schedule"), Loc("generators", 1), Loc("generators", 0), Loc()]
        assert sorted(locs) == [Loc(), Loc("generators", 0), Loc("generators", 1), Loc("schedule")]

    def test_equal_locs_have_equal_hashes(self):
        assert hash(Loc("group", "rank")) == hash(Loc("group", "rank"))
