import logging
import math

import numpy as np
import pytest

from afplab.convex import (
    AffineAction,
    AffineMap,
    DisplacementValues,
    FunctionalGap,
    IntervalProduct,
    LpNorm,
    NormBall,
    SeminormFamily,
    Simplex,
    check_invariance,
    check_relations,
    displacement,
    identity_action,
    make_seminorm,
    matrix_action,
    permutation_action,
    rotation_action,
    tree_sum,
    weak_displacement,
)
from afplab.exc import DomainError, PointOutsideModel
from afplab.groups import FreeGroup, Heisenberg, IntegerLattice, SymmetricGroup


@pytest.fixture
def rng():
    return np.random.default_rng(7)


class TestSeminorms:

    @pytest.mark.parametrize(
        "name, vector, expected",
        [
            ("l1", [3.0, -4.0], 7.0),
            ("l2", [3.0, -4.0], 5.0),
            ("linf", [3.0, -4.0], 4.0),
        ],
    )
    def test_lp_norms(self, name, vector, expected):
        assert make_seminorm(name)(np.array(vector)) == pytest.approx(expected)

    def test_unknown_seminorm(self):
        with pytest.raises(DomainError):
            make_seminorm("l3")

    def test_unsupported_exponent(self):
        with pytest.raises(DomainError):
            LpNorm(3)

    @pytest.mark.parametrize(
        "source, target, dim, expected",
        [
            (2, 1, 4, 2.0),
            (1, 2, 4, 1.0),
            (math.inf, 1, 3, 3.0),
            (2, 2, 9, 1.0),
        ],
    )
    def test_operator_bound(self, source, target, dim, expected):
        assert LpNorm(source).operator_bound(LpNorm(target), dim) == pytest.approx(expected)

    def test_functional_gap(self):
        q = FunctionalGap([1.0, -1.0], name="diff")
        assert q(np.array([0.25, 0.75])) == pytest.approx(0.5)
        assert q.dual_norm(LpNorm(1)) == 1.0
        assert q.dual_norm(LpNorm(math.inf)) == 2.0

    def test_family_takes_maximum(self):
        family = SeminormFamily([FunctionalGap([1.0, 0.0], "x"), FunctionalGap([0.0, 1.0], "y")])
        assert family(np.array([0.3, -0.6])) == pytest.approx(0.6)
        assert family.name == "max(x,y)"

    def test_empty_family_is_rejected(self):
        with pytest.raises(DomainError):
            SeminormFamily([])


class TestModels:

    @pytest.mark.parametrize(
        "model, seminorm, expected",
        [
            (Simplex(3), "l1", 2.0),
            (Simplex(3), "l2", math.sqrt(2.0)),
            (Simplex(3), "linf", 1.0),
            (NormBall(2), "l2", 2.0),
            (NormBall(2), "l1", 2 * math.sqrt(2.0)),
            (NormBall(3, p=math.inf, radius=0.5), "linf", 1.0),
            (IntervalProduct([0, 0], [3, 4]), "l2", 5.0),
        ],
    )
    def test_diameter(self, model, seminorm, expected):
        assert model.diameter(make_seminorm(seminorm)) == pytest.approx(expected)

    def test_diameter_for_functional(self):
        assert Simplex(3).diameter(FunctionalGap([1.0, -2.0, 0.5])) == pytest.approx(3.0)
        assert IntervalProduct([0, 0], [1, 2]).diameter(FunctionalGap([1.0, -1.0])) == pytest.approx(3.0)

    @pytest.mark.parametrize(
        "model",
        [
            Simplex(4),
            NormBall(3, p=1),
            NormBall(3, p=2),
            NormBall(3, p=math.inf),
            IntervalProduct([-1, 0, 2], [1, 0.5, 3]),
        ],
    )
    def test_samples_and_vertices_lie_in_model(self, model, rng):
        for x in np.vstack([model.vertices(), model.sample(rng, 50)]):
            assert model.contains(x)

    def test_admit_returns_members_unchanged(self):
        x = np.array([0.2, 0.8])
        assert Simplex(2).admit(x) is x

    def test_admit_projects_nearby_points(self, caplog):
        model = Simplex(2)
        with caplog.at_level(logging.WARNING, logger="afplab.convex"):
            y = model.admit(np.array([0.5 + 5e-9, 0.5]))
        assert y.sum() == pytest.approx(1.0, abs=1e-15)
        assert "projecting point back onto Simplex" in caplog.text

    def test_admit_rejects_far_points(self):
        with pytest.raises(PointOutsideModel) as excinfo:
            NormBall(2).admit(np.array([1.0, 1.0]))
        assert excinfo.value.violation == pytest.approx(math.sqrt(2.0) - 1.0)

    def test_admit_rejects_non_finite_points(self):
        with pytest.raises(PointOutsideModel):
            Simplex(2).admit(np.array([math.nan, 1.0]))

    def test_wrong_dimension(self):
        with pytest.raises(DomainError):
            Simplex(3).contains(np.array([1.0, 0.0]))

    @pytest.mark.parametrize(
        "lows, highs",
        [
            ([0, 0], [1]),
            ([0, 1], [1, 1]),
        ],
    )
    def test_invalid_intervals(self, lows, highs):
        with pytest.raises(DomainError):
            IntervalProduct(lows, highs)

    def test_describe(self):
        assert NormBall(2, p=1, radius=2).describe() == {"kind": "ball", "dim": 2, "p": "l1", "radius": 2.0}
        assert Simplex(3).describe() == {"kind": "simplex", "dim": 3}


class TestAffineMap:

    def test_permutation_moves_coordinates(self):
        uut = AffineMap(3, permutation=[1, 2, 0])
        assert uut(np.array([1.0, 2.0, 3.0])).tolist() == [3.0, 1.0, 2.0]

    @pytest.mark.parametrize(
        "uut",
        [
            AffineMap(3, permutation=[2, 0, 1], shift=np.array([0.1, 0.2, 0.3])),
            AffineMap(2, matrix=np.array([[2.0, 1.0], [0.0, 1.0]]), shift=np.array([1.0, -1.0])),
            AffineMap.rotation(0.3, dim=3),
        ],
    )
    def test_inverse(self, uut):
        x = np.arange(1.0, uut.dim + 1.0)
        assert uut.inverse()(uut(x)) == pytest.approx(x)

    def test_singular_matrix_has_no_inverse(self):
        with pytest.raises(DomainError):
            AffineMap(2, matrix=np.zeros((2, 2))).inverse()

    def test_matrix_and_permutation_are_exclusive(self):
        with pytest.raises(DomainError):
            AffineMap(2, matrix=np.eye(2), permutation=[0, 1])

    def test_rotation(self):
        y = AffineMap.rotation(math.pi / 2)(np.array([1.0, 0.0]))
        assert y == pytest.approx([0.0, 1.0])


class TestAffineAction:

    def test_act_follows_normal_form(self):
        Z = IntegerLattice(1)
        action = rotation_action(Z, NormBall(2), [math.pi / 4])
        y = action.act(Z.element([-2]), np.array([1.0, 0.0]))
        assert y == pytest.approx([0.0, -1.0])

    def test_heisenberg_identity_action(self):
        H = Heisenberg()
        action = identity_action(H, Simplex(2))
        x = np.array([0.25, 0.75])
        assert action.act(H.element([3, -2, 5]), x).tolist() == x.tolist()

    def test_permutation_action_composes_like_group(self, rng):
        S4 = SymmetricGroup(4)
        action = permutation_action(S4, Simplex(4))
        x = Simplex(4).sample(rng, 1)[0]
        for _ in range(10):
            g, h = S4.random_element(rng, 3), S4.random_element(rng, 3)
            assert action.act(S4.mul(g, h), x) == pytest.approx(action.act(g, action.act(h, x)))

    def test_number_of_images_is_checked(self):
        with pytest.raises(DomainError):
            AffineAction(IntegerLattice(2), NormBall(2), [AffineMap(2)])

    def test_image_dimension_is_checked(self):
        with pytest.raises(DomainError):
            AffineAction(IntegerLattice(1), NormBall(2), [AffineMap(3)])

    def test_permutation_action_needs_matching_dimension(self):
        with pytest.raises(DomainError):
            permutation_action(SymmetricGroup(3), Simplex(4))

    def test_rotation_needs_plane(self):
        with pytest.raises(DomainError):
            rotation_action(IntegerLattice(1), IntervalProduct([0], [1]), [0.1])

    def test_combine(self):
        action = identity_action(IntegerLattice(1), Simplex(2))
        points = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        assert action.combine([0.25, 0.75], points).tolist() == [0.25, 0.75]

    def test_tree_sum_pairs_rows(self):
        terms = np.array([[1.0], [2.0], [3.0], [4.0], [5.0]])
        assert tree_sum(terms).tolist() == [15.0]

    def test_tree_sum_of_nothing(self):
        with pytest.raises(DomainError):
            tree_sum(np.empty((0, 2)))


class TestDisplacement:

    def test_displacement_per_generator(self):
        Z2 = IntegerLattice(2)
        action = rotation_action(Z2, NormBall(2), [math.pi / 2, math.pi])
        values = displacement(action, np.array([1.0, 0.0]), Z2.generators(), make_seminorm("l2"))
        assert [v.label for v in values.per_generator] == ["e1", "e2"]
        assert [v.value for v in values.per_generator] == pytest.approx([math.sqrt(2.0), 2.0])
        assert values.max == pytest.approx(2.0)

    def test_weak_displacement(self):
        Z = IntegerLattice(1)
        action = rotation_action(Z, NormBall(2), [math.pi / 2])
        values = weak_displacement(action, np.array([1.0, 0.0]), Z.generators(), np.array([[0.0, 1.0]]))
        assert values.max == pytest.approx(1.0)

    def test_weak_displacement_needs_functionals(self):
        Z = IntegerLattice(1)
        action = rotation_action(Z, NormBall(2), [0.1])
        with pytest.raises(DomainError):
            weak_displacement(action, np.array([1.0, 0.0]), Z.generators(), np.empty((0, 2)))

    def test_empty_values_have_zero_maximum(self):
        assert DisplacementValues(()).max == 0.0


class TestChecks:

    def test_commuting_rotations_satisfy_relations(self, rng):
        action = rotation_action(IntegerLattice(2), NormBall(2), [0.3, 1.1])
        assert check_relations(action, rng).passed

    def test_symmetric_group_permutations_satisfy_relations(self, rng):
        assert check_relations(permutation_action(SymmetricGroup(4), Simplex(4)), rng).passed

    def test_non_commuting_images_break_relations(self, rng):
        action = matrix_action(IntegerLattice(2), Simplex(3), [{"permutation": [1, 0, 2]}, {"permutation": [0, 2, 1]}])
        result = check_relations(action, rng)
        assert not result.passed
        assert result.worst == "e1 e2 e1^-1 e2^-1"

    def test_rotation_keeps_ball_invariant(self, rng):
        assert check_invariance(rotation_action(IntegerLattice(1), NormBall(2), [0.7]), rng).passed

    def test_shift_breaks_invariance(self, rng):
        action = matrix_action(IntegerLattice(1), Simplex(3), [{"shift": [0.5, -0.5, 0.0]}])
        result = check_invariance(action, rng, radius=1)
        assert not result.passed
        assert result.worst in ("e1", "e1^-1")


def lattice_rotation():
    Z2 = IntegerLattice(2)
    return rotation_action(Z2, NormBall(2), [0.7, 2.1])


def heisenberg_rotation():
    return rotation_action(Heisenberg(), NormBall(2), [0.3, 1.1, 0.0])


def free_group_rotations():
    maps = [
        {"matrix": AffineMap.rotation(0.9, 3, (0, 1)).matrix.tolist()},
        {"matrix": AffineMap.rotation(0.4, 3, (1, 2)).matrix.tolist()},
    ]
    return matrix_action(FreeGroup(2), NormBall(3), maps)


def free_group_on_square():
    maps = [{"matrix": [[-1.0, 0.0], [0.0, -1.0]], "shift": [1.0, 1.0]}, {"permutation": [1, 0]}]
    return matrix_action(FreeGroup(2), IntervalProduct([0.0, 0.0], [1.0, 1.0]), maps)


def symmetric_permutation():
    return permutation_action(SymmetricGroup(4), Simplex(4))


ACTIONS = [lattice_rotation, heisenberg_rotation, free_group_rotations, free_group_on_square, symmetric_permutation]


@pytest.mark.parametrize("make_action", ACTIONS)
class TestActionLaws:

    def test_act_composes_like_group(self, make_action, rng):
        action = make_action()
        group = action.group
        for _ in range(20):
            x = action.model.sample(rng, 1)[0]
            g, h = group.random_element(rng, 4), group.random_element(rng, 4)
            assert action.act(group.mul(g, h), x) == pytest.approx(action.act(g, action.act(h, x)), abs=1e-12)

    def test_act_is_affine(self, make_action, rng):
        action = make_action()
        for _ in range(20):
            x, y = action.model.sample(rng, 2)
            t = float(rng.uniform())
            g = action.group.random_element(rng, 5)
            expected = t * action.act(g, x) + (1 - t) * action.act(g, y)
            assert action.act(g, t * x + (1 - t) * y) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("p, dual", [(1, math.inf), (2, 2), (math.inf, 1)])
def test_weak_displacement_is_bounded_by_dual_norm(p, dual, rng):
    action = free_group_rotations()
    seminorm, dual_norm = LpNorm(p), LpNorm(dual)
    generators = action.group.generators()
    for _ in range(20):
        x = action.model.sample(rng, 1)[0]
        functionals = rng.normal(size=(3, 3))
        strong = displacement(action, x, generators, seminorm).per_generator
        weak = weak_displacement(action, x, generators, functionals).per_generator
        scale = max(dual_norm(phi) for phi in functionals)
        for s, w in zip(strong, weak):
            assert w.value <= scale * s.value + 1e-12
