import itertools

import numpy as np
import pytest

from afplab.exc import DomainError, GroupMismatch, ResourceCapExceeded, UnsupportedGroup
from afplab.groups import (
    CyclicProduct,
    FreeGroup,
    GeneratingSet,
    Heisenberg,
    IntegerLattice,
    SymmetricGroup,
    ball,
    default_ball_cap,
    make_group,
)

CATALOG = [
    IntegerLattice(1),
    IntegerLattice(2),
    FreeGroup(2),
    FreeGroup(3),
    Heisenberg(),
    SymmetricGroup(4),
    CyclicProduct([2, 3]),
]


@pytest.fixture(params=CATALOG, ids=lambda g: g.group_id)
def group(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


class TestGroupLaws:

    def test_identity_is_neutral(self, group, rng):
        e = group.identity()
        for _ in range(20):
            g = group.random_element(rng, 5)
            assert group.mul(e, g) == g
            assert group.mul(g, e) == g

    def test_inverse(self, group, rng):
        e = group.identity()
        for _ in range(20):
            g = group.random_element(rng, 6)
            assert group.mul(g, group.inv(g)) == e
            assert group.mul(group.inv(g), g) == e

    def test_associativity(self, group, rng):
        for _ in range(20):
            a, b, c = (group.random_element(rng, 4) for _ in range(3))
            assert group.mul(group.mul(a, b), c) == group.mul(a, group.mul(b, c))

    def test_normal_form_word_evaluates_to_element(self, group, rng):
        for _ in range(20):
            g = group.random_element(rng, 6)
            assert group.evaluate(group.normal_form_word(g)) == g

    def test_normal_form_word_shortens_by_first_letter(self, group, rng):
        for _ in range(20):
            g = group.random_element(rng, 6)
            word = group.normal_form_word(g)
            if not word:
                continue
            rest = group.mul(group.letter_element(-word[0]), g)
            assert len(group.normal_form_word(rest)) == len(word) - 1

    def test_relations_evaluate_to_identity(self, group):
        for word in group.relations():
            assert group.evaluate(word) == group.identity()

    def test_mixing_groups_is_rejected(self):
        Z, F2 = IntegerLattice(1), FreeGroup(2)
        with pytest.raises(GroupMismatch):
            Z.mul(Z.identity(), F2.identity())


class TestCanonicalForm:

    @pytest.mark.parametrize(
        "group, raw, expected",
        [
            (FreeGroup(2), [1, 2, -2, -1, 2], (2,)),
            (FreeGroup(3), [3, -1, 1, -3, 2, 2], (2, 2)),
            (CyclicProduct([2, 3]), [5, -1], (1, 2)),
            (IntegerLattice(2), [3, -4], (3, -4)),
            (Heisenberg(), [1, -2, 3], (1, -2, 3)),
            (SymmetricGroup(4), [2, 0, 3, 1], (2, 0, 3, 1)),
        ],
    )
    def test_canonical_is_idempotent(self, group, raw, expected):
        once = group.canonical(raw)
        assert once == expected
        assert group.canonical(once) == once

    def test_payloads_of_random_elements_are_canonical(self, group, rng):
        for _ in range(20):
            g = group.random_element(rng, 7)
            assert group.canonical(g.payload) == g.payload
            assert group.element(g.payload) == g


class TestHeisenberg:

    def test_multiplication_law(self):
        H = Heisenberg()
        assert H.mul(H.element([1, 0, 0]), H.element([0, 1, 0])) == H.element([1, 1, 1])
        assert H.mul(H.element([0, 1, 0]), H.element([1, 0, 0])) == H.element([1, 1, 0])

    def test_z_is_the_commutator_of_x_and_y(self):
        H = Heisenberg()
        x, y = H.generators()[:2]
        commutator = H.mul(H.mul(x, y), H.mul(H.inv(x), H.inv(y)))
        assert commutator == H.element([0, 0, 1])

    def test_label(self):
        H = Heisenberg()
        assert H.label(H.element([2, -1, 0])) == "x^2 y^-1 z^2"


class TestFreeGroup:

    def test_words_are_reduced_on_construction(self):
        F2 = FreeGroup(2)
        assert F2.element([1, 2, -2, -1, 1]).payload == (1,)

    @pytest.mark.parametrize(
        "text, payload",
        [
            ("e", ()),
            ("a", (1,)),
            ("aB", (1, -2)),
            ("abBA", ()),
        ],
    )
    def test_parse_and_label(self, text, payload):
        F2 = FreeGroup(2)
        g = F2.parse_element(text)
        assert g.payload == payload
        assert F2.label(g) == (text if payload or text == "e" else "e")

    def test_unknown_letter_is_rejected(self):
        with pytest.raises(DomainError):
            FreeGroup(2).parse_element("c")

    @pytest.mark.parametrize("radius, expected", [(0, 1), (1, 5), (2, 17), (3, 53), (12, 1062881)])
    def test_ball_size(self, radius, expected):
        assert FreeGroup(2).ball_size(radius) == expected

    def test_ball_size_of_rank_three(self):
        assert FreeGroup(3).ball_size(2) == 1 + 6 + 30

    def test_word_index_follows_ball_order(self):
        F2 = FreeGroup(2)
        b = ball(F2, F2.standard_generating_set(), 4)
        assert [F2.word_index(g) for g in b] == list(range(len(b)))

    def test_index_word_inverts_word_index(self):
        F2 = FreeGroup(2)
        for n in range(200):
            assert F2.word_index(F2.index_word(n)) == n

    @pytest.mark.parametrize("letter", [1, -1, 2, -2])
    def test_index_translation_table_matches_multiplication(self, letter):
        F2 = FreeGroup(2)
        radius = 4
        table = F2.index_translation_table(letter, radius)
        s = F2.letter_element(letter)
        expected = [F2.word_index(F2.mul(s, F2.index_word(n))) for n in range(F2.ball_size(radius))]
        assert table.tolist() == expected

    def test_index_translation_table_respects_cap(self):
        with pytest.raises(ResourceCapExceeded) as excinfo:
            FreeGroup(2).index_translation_table(1, 5, cap=100)
        assert excinfo.value.cap == 100

    @pytest.mark.parametrize("rank", [0, 27])
    def test_rank_out_of_range(self, rank):
        with pytest.raises(DomainError):
            FreeGroup(rank)


class TestFiniteGroups:

    @pytest.mark.parametrize(
        "group, order",
        [
            (SymmetricGroup(3), 6),
            (SymmetricGroup(5), 120),
            (CyclicProduct([2, 3]), 6),
            (CyclicProduct([4]), 4),
        ],
    )
    def test_elements_list_whole_group(self, group, order):
        elements = group.elements()
        assert group.order == order
        assert len(set(elements)) == order
        assert elements[0] == group.identity()

    def test_symmetric_group_composes_permutations(self):
        S3 = SymmetricGroup(3)
        p, q = S3.element([1, 2, 0]), S3.element([1, 0, 2])
        assert S3.mul(p, q).payload == (2, 1, 0)

    def test_non_permutation_is_rejected(self):
        with pytest.raises(DomainError):
            SymmetricGroup(3).element([0, 0, 1])

    def test_residues_are_reduced(self):
        assert CyclicProduct([2, 3]).element([3, -1]).payload == (1, 2)

    def test_infinite_group_has_no_element_list(self):
        with pytest.raises(UnsupportedGroup):
            IntegerLattice(1).elements()


class TestMakeGroup:

    @pytest.mark.parametrize(
        "spec, expected",
        [
            ({"group": "Z", "dim": 2}, IntegerLattice(2)),
            ({"group": "F", "rank": 3}, FreeGroup(3)),
            ({"group": "H3Z"}, Heisenberg()),
            ({"group": "Sym", "n": 4}, SymmetricGroup(4)),
            ({"group": "Zmod", "moduli": [5]}, CyclicProduct([5])),
        ],
    )
    def test_make_group(self, spec, expected):
        assert make_group(spec) == expected

    def test_unknown_group(self):
        with pytest.raises(DomainError):
            make_group({"group": "SL2Z"})


class TestGeneratingSet:

    def test_identity_is_rejected(self):
        Z = IntegerLattice(1)
        with pytest.raises(DomainError):
            GeneratingSet(Z, (Z.identity(),))

    def test_empty_set_is_rejected(self):
        with pytest.raises(DomainError):
            GeneratingSet(IntegerLattice(1), ())

    def test_symmetric_flag_is_checked(self):
        F2 = FreeGroup(2)
        with pytest.raises(DomainError):
            GeneratingSet(F2, tuple(F2.generators()), symmetric=True)

    def test_symmetrized_places_inverses_after_generators(self):
        F2 = FreeGroup(2)
        gens = GeneratingSet(F2, tuple(F2.generators())).symmetrized()
        assert gens.labels() == ["a", "A", "b", "B"]
        assert gens.symmetric

    def test_symmetrized_keeps_involutions_once(self):
        S3 = SymmetricGroup(3)
        assert len(S3.standard_generating_set()) == 2


class TestBall:

    @pytest.mark.parametrize(
        "group, radius, expected",
        [
            (IntegerLattice(1), 5, 11),
            (IntegerLattice(2), 3, 25),
            (FreeGroup(2), 3, 53),
            (SymmetricGroup(3), 10, 6),
            (CyclicProduct([2, 3]), 10, 6),
        ],
    )
    def test_ball_size(self, group, radius, expected):
        assert len(ball(group, group.standard_generating_set(), radius)) == expected

    def test_elements_are_sorted_by_length(self):
        Z2 = IntegerLattice(2)
        b = ball(Z2, Z2.standard_generating_set(), 4)
        assert b.lengths == sorted(b.lengths)
        for g, n in zip(b.elements, b.lengths):
            assert sum(abs(x) for x in g.payload) == n

    def test_parent_pointers(self, group):
        gens = group.standard_generating_set()
        b = ball(group, gens, 3, cap=10**4)
        for i, g in enumerate(b.elements[1:], start=1):
            parent, k = b.parents[i], b.parent_generators[i]
            assert group.mul(gens.generators[k], b.elements[parent]) == g
            assert b.lengths[parent] == b.lengths[i] - 1

    def test_sphere(self):
        F2 = FreeGroup(2)
        b = ball(F2, F2.standard_generating_set(), 3)
        assert [len(b.sphere(n)) for n in range(4)] == [1, 4, 12, 36]

    def test_translation_table(self):
        Z = IntegerLattice(1)
        b = ball(Z, Z.standard_generating_set(), 2)
        table = b.translation_table(Z.element([1]))
        shifted = [b.elements[i].payload[0] if i >= 0 else None for i in table]
        assert shifted == [x.payload[0] + 1 if abs(x.payload[0] + 1) <= 2 else None for x in b.elements]

    def test_cap_is_enforced(self):
        with pytest.raises(ResourceCapExceeded) as excinfo:
            ball(IntegerLattice(2), IntegerLattice(2).standard_generating_set(), 10, cap=50)
        assert excinfo.value.cap == 50

    def test_free_group_cap_is_checked_before_enumeration(self):
        F2 = FreeGroup(2)
        with pytest.raises(ResourceCapExceeded) as excinfo:
            ball(F2, F2.standard_generating_set(), 20, cap=1000)
        assert excinfo.value.size == F2.ball_size(20)

    def test_negative_radius(self):
        with pytest.raises(DomainError):
            ball(IntegerLattice(1), IntegerLattice(1).standard_generating_set(), -1)

    def test_default_cap_reads_environment(self, monkeypatch):
        monkeypatch.setenv("AFPLAB_BALL_CAP", "77")
        assert default_ball_cap() == 77

    def test_ball_contains_all_short_words(self):
        H = Heisenberg()
        gens = H.standard_generating_set()
        b = ball(H, gens, 2)
        for word in itertools.product(H.letters(), repeat=2):
            assert H.evaluate(word) in b
