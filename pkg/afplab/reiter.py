"""Reiter condition experiments on ℓᵖ(G).

Densities supported on a Cayley ball are pushed around by left translation;
the displacement ``max_s ‖s·f - f‖_p`` is minimized over such densities,
and the norm of the random walk operator is estimated by power iteration.
Translations leaving the ball are never clipped: differences live on the
ball of radius ``R + 1``, so leaked mass counts in full.
"""

import dataclasses
import logging
import math
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, sparse

from afplab.densities import GroupDensity, SparseVector
from afplab.exc import DomainError, NumericError, ResourceCapExceeded
from afplab.folner import FolnerSchedule
from afplab.groups import FreeGroup, GeneratingSet, Group, GroupElement, IntegerLattice, ball, default_ball_cap

logger = logging.getLogger(__name__)

#: Largest support the LP method accepts.
LP_MAX_SUPPORT = 10**4

#: Objective tolerance of the LP solver.
LP_TOL = 1e-7


def translate(g: GroupElement, f: GroupDensity) -> GroupDensity:
    """Return the left translate ``x ↦ f(g⁻¹x)`` of *f*."""
    return f.translate(g)


def reiter_objective(f: SparseVector, generators: Sequence[GroupElement], p: float = 1) -> float:
    """Return ``max_s ‖s·f - f‖_p`` over given generators.

    Example:

    .. doctest::

        >>> from afplab.groups import IntegerLattice
        >>> from afplab.densities import GroupDensity
        >>> from afplab.reiter import reiter_objective
        >>> Z = IntegerLattice(1)
        >>> f = GroupDensity.uniform(Z, [Z.element([i]) for i in range(4)])
        >>> reiter_objective(f, [Z.element([1]), Z.element([-1])])
        0.5
    """
    return max((f.translate(s) - f).norm(p) for s in generators)


def exact_l1_displacement(f: Mapping[GroupElement, Fraction], group: Group, gamma: GroupElement) -> Fraction:
    """Return ``‖γ·f - f‖₁`` of a density with rational masses, exactly."""
    diff: Dict[GroupElement, Fraction] = {group.mul(gamma, h): m for h, m in f.items()}
    for h, m in f.items():
        diff[h] = diff.get(h, Fraction(0)) - m
    return sum((abs(v) for v in diff.values()), Fraction(0))


@dataclasses.dataclass(frozen=True)
class FolnerLinkRow:
    """Objective of the uniform density on a scheduled set next to the
    set's largest boundary ratio."""

    index: int
    set_size: int
    objective: Fraction
    max_ratio: Fraction

    @property
    def holds(self) -> bool:
        return self.objective <= self.max_ratio


def folner_reiter_link(
    schedule: FolnerSchedule, generators: Sequence[GroupElement], max_index: int, min_index: int = 0
) -> List[FolnerLinkRow]:
    """Compare the exact ℓ¹ objective of the uniform density on every
    scheduled Følner set with its largest boundary ratio."""
    rows = []
    for index in schedule.indices(max_index, min_index):
        phi = schedule.folner_set(index)
        mass = Fraction(1, len(phi))
        f = dict.fromkeys(phi, mass)
        objective = max(exact_l1_displacement(f, schedule.group, s) for s in generators)
        rows.append(FolnerLinkRow(index, len(phi), objective, phi.max_ratio(generators)))
    return rows


@dataclasses.dataclass(frozen=True)
class TracePoint:
    """Single step of an iterative method."""

    iteration: int
    value: float
    best: float

    def as_csv_row(self) -> dict:
        return {"iteration": self.iteration, "value": self.value, "best": self.best}


@dataclasses.dataclass(frozen=True)
class ReiterResult:
    """Outcome of a displacement minimization over densities on a ball."""

    density: GroupDensity
    objective: float
    radius: int
    p: int
    method: str
    iterations: int
    support_size: int
    trace: Tuple[TracePoint, ...] = ()


class _TranslationOperators:
    """Left translations by generators as index maps from ``ball(R)`` into
    ``ball(R + 1)``."""

    def __init__(self, group: Group, generators: GeneratingSet, radius: int, cap: Optional[int]):
        self.group = group
        self.generators = list(generators)
        outer = ball(group, generators.symmetrized(), radius + 1, cap=cap)
        self.support_size = outer.lengths.index(radius + 1) if radius + 1 in outer.lengths else len(outer)
        self.size = len(outer)
        self.elements = outer.elements[: self.support_size]
        mul, position = group.mul, outer.position
        self.tables = np.array(
            [[position(mul(s, h)) for h in self.elements] for s in self.generators], dtype=np.int64
        ).reshape(len(self.generators), self.support_size)

    def differences(self, f: np.ndarray) -> np.ndarray:
        """Return matrix whose rows are ``s·f - f`` on the outer ball."""
        out = np.zeros((len(self.generators), self.size))
        for k, table in enumerate(self.tables):
            out[k, table] = f
            out[k, : self.support_size] -= f
        return out

    def difference_matrices(self) -> List[sparse.csr_matrix]:
        n, m = self.support_size, self.size
        embed = sparse.eye(m, n, format="csr")
        cols = np.arange(n)
        return [
            (sparse.csr_matrix((np.ones(n), (table, cols)), shape=(m, n)) - embed).tocsr() for table in self.tables
        ]


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Return Euclidean projection of *v* onto the probability simplex,
    computed by sorting."""
    n = v.shape[0]
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, n + 1) > (cssv - 1.0))[0][-1]
    theta = (cssv[rho] - 1.0) / (rho + 1.0)
    return np.clip(v - theta, 0.0, None)


def _project_sphere(v: np.ndarray) -> np.ndarray:
    w = np.clip(v, 0.0, None)
    norm = np.linalg.norm(w)
    if norm == 0:
        return np.full(v.shape[0], 1.0 / math.sqrt(v.shape[0]))
    return w / norm


def _subgradient(
    ops: _TranslationOperators, p: int, iterations: int, step0: float
) -> Tuple[np.ndarray, List[TracePoint]]:
    n = ops.support_size
    f = np.full(n, 1.0 / n) if p == 1 else np.full(n, 1.0 / math.sqrt(n))
    best_f, best = f, math.inf
    trace = []
    for k in range(1, iterations + 1):
        diffs = ops.differences(f)
        values = np.linalg.norm(diffs, ord=p, axis=1)
        active = int(np.argmax(values))
        value = float(values[active])
        if value < best:
            best_f, best = f, value
        trace.append(TracePoint(k - 1, value, best))
        logger.debug("subgradient step %d: objective %.12f, best %.12f", k - 1, value, best)
        d = diffs[active]
        if p == 1:
            d = np.sign(d)
        else:
            d = d / value if value > 0 else d
        table = ops.tables[active]
        grad = d[table] - d[:n]
        norm = np.linalg.norm(grad)
        if norm == 0:
            break
        f = f - (step0 / math.sqrt(k)) * grad / norm
        f = project_simplex(f) if p == 1 else _project_sphere(f)
    return best_f, trace


def _linear_program(ops: _TranslationOperators, radius: int) -> np.ndarray:
    n, m, k = ops.support_size, ops.size, len(ops.generators)
    blocks = []
    neg_eye = -sparse.eye(m, format="csr")
    for s, d in enumerate(ops.difference_matrices()):
        for sign in (1, -1):
            row = [sign * d] + [neg_eye if j == s else None for j in range(k)] + [None]
            blocks.append(row)
    for s in range(k):
        ones = sparse.csr_matrix(np.ones((1, m)))
        blocks.append([None] + [ones if j == s else None for j in range(k)] + [sparse.csr_matrix([[-1.0]])])
    a_ub = sparse.bmat(blocks, format="csr")
    b_ub = np.zeros(a_ub.shape[0])
    a_eq = sparse.hstack([sparse.csr_matrix(np.ones((1, n))), sparse.csr_matrix((1, k * m + 1))], format="csr")
    c = np.zeros(n + k * m + 1)
    c[-1] = 1.0
    result = optimize.linprog(
        c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=(0, None), method="highs",
        options={"primal_feasibility_tolerance": LP_TOL, "dual_feasibility_tolerance": LP_TOL},
    )
    if result.status != 0:
        raise NumericError(f"radius {radius}", f"linear program failed: {result.message}")
    f = np.clip(result.x[:n], 0.0, None)
    return f / f.sum()


def reiter_minimize(
    group: Group,
    generators: GeneratingSet,
    radius: int,
    p: int = 1,
    method: str = "subgradient",
    iterations: int = 500,
    step0: float = 1.0,
    cap: Optional[int] = None,
) -> ReiterResult:
    """Minimize ``max_s ‖s·f - f‖_p`` over normalized nonnegative densities
    supported in the ball of given radius.

    :param method:
        Either ``"subgradient"`` (projected subgradient descent from the
        uniform density with steps ``step0/√k``, keeping the best iterate) or
        ``"lp"`` (exact linear program, ``p=1`` only).
    """
    if p not in (1, 2):
        raise DomainError(f"exponent must be 1 or 2, got {p!r}")
    if method not in ("subgradient", "lp"):
        raise DomainError(f"unknown method {method!r}")
    if method == "lp" and p != 1:
        raise DomainError("the linear program method needs p=1")
    if radius < 0:
        raise DomainError("radius must be nonnegative")
    ops = _TranslationOperators(group, generators, radius, cap if cap is not None else default_ball_cap())
    trace: List[TracePoint] = []
    if method == "lp":
        if ops.support_size > LP_MAX_SUPPORT:
            raise ResourceCapExceeded(f"linear program on ball of radius {radius}", ops.support_size, LP_MAX_SUPPORT)
        f = _linear_program(ops, radius)
        iterations = 0
    else:
        f, trace = _subgradient(ops, p, iterations, step0)
        iterations = len(trace)
    density = GroupDensity.from_vector(group, ops.elements, f, p=p)
    objective = reiter_objective(density, list(generators), p)
    logger.info(
        "%s radius %d (%s, p=%d): objective %.9f on %d elements",
        group.group_id,
        radius,
        method,
        p,
        objective,
        ops.support_size,
    )
    return ReiterResult(density, objective, radius, p, method, iterations, ops.support_size, tuple(trace))


@dataclasses.dataclass(frozen=True)
class KestenEstimate:
    """Estimated norm of the random walk operator compressed to a ball."""

    group_id: str
    radius: int
    support_size: int
    estimate: float
    iterations: int
    trace: Tuple[TracePoint, ...] = ()


def _is_standard(group: Group, generators: GeneratingSet) -> bool:
    return set(generators) == set(group.standard_generating_set())


def _walk_operator(
    group: Group, generators: GeneratingSet, radius: int, cap: Optional[int], index_cap: Optional[int]
) -> sparse.csr_matrix:
    k = len(generators)
    if isinstance(group, FreeGroup) and _is_standard(group, generators):
        size = group.ball_size(radius)
        tables = [group.index_translation_table(s.payload[0], radius, index_cap) for s in generators]
    else:
        b = ball(group, generators, radius, cap=cap)
        size = len(b)
        tables = [b.translation_table(s) for s in generators]
    cols = np.arange(size, dtype=np.int64)
    op = sparse.csr_matrix((size, size))
    for table in tables:
        valid = (table >= 0) & (table < size)
        data = np.full(int(valid.sum()), 1.0 / k)
        op = op + sparse.csr_matrix((data, (table[valid], cols[valid])), shape=(size, size))
    return op.tocsr()


def kesten_estimate(
    group: Group,
    generators: GeneratingSet,
    radius: int,
    iterations: int = 200,
    cap: Optional[int] = None,
    index_cap: Optional[int] = None,
) -> KestenEstimate:
    """Estimate the norm of ``M f = (1/|S|) Σ_s s·f`` on densities supported
    in the ball of given radius.

    Mass leaving the ball is dropped, which makes the compressed operator
    symmetric and substochastic; its norm is nondecreasing in the radius and
    tends to the spectral radius of the random walk. Power iteration runs on
    the lazy operator ``(I + M)/2`` from the uniform density, and the largest
    Rayleigh quotient of ``M`` met on the way is returned.
    """
    if not generators.symmetric:
        present = set(generators)
        if any(group.inv(s) not in present for s in generators):
            raise DomainError("Kesten estimate needs a symmetric generating set")
    op = _walk_operator(group, generators, radius, cap, index_cap)
    size = op.shape[0]
    v = np.full(size, 1.0 / math.sqrt(size))
    best = -math.inf
    trace = []
    for k in range(iterations + 1):
        mv = op @ v
        value = float(v @ mv)
        best = max(best, value)
        trace.append(TracePoint(k, value, best))
        logger.debug("power iteration %d: rayleigh quotient %.12f", k, value)
        w = 0.5 * (v + mv)
        norm = np.linalg.norm(w)
        if not math.isfinite(norm) or norm == 0:
            raise NumericError(f"radius {radius}", "power iteration degenerated")
        v = w / norm
    logger.info("%s radius %d: Kesten estimate %.9f on %d elements", group.group_id, radius, best, size)
    return KestenEstimate(group.group_id, radius, size, best, iterations, tuple(trace))


def reference_floor(radius: int) -> Fraction:
    """Return the ℓ¹ floor ``1 + 1/|ball(R)|`` of F₂ with generators ``a, b``,
    attained by the uniform density on the ball."""
    return 1 + Fraction(1, FreeGroup(2).ball_size(radius))


@dataclasses.dataclass(frozen=True)
class FloorRow:
    """Minimized displacement at a single radius."""

    group_id: str
    radius: int
    floor: float
    method: str
    iterations: int
    support_size: int
    reference: Optional[Fraction] = None
    lp_floor: Optional[float] = None
    subgradient_floor: Optional[float] = None

    def as_csv_row(self) -> dict:
        return {
            "group": self.group_id,
            "radius": self.radius,
            "floor": self.floor,
            "method": self.method,
            "iterations": self.iterations,
            "support_size": self.support_size,
        }


@dataclasses.dataclass(frozen=True)
class Assertion:
    """Named check of an experiment."""

    name: str
    passed: bool
    detail: str


@dataclasses.dataclass(frozen=True)
class CounterexampleReport:
    """Free group floors contrasted with a ℤ² control."""

    rows: Tuple[FloorRow, ...]
    control_rows: Tuple[FloorRow, ...]
    assertions: Tuple[Assertion, ...]
    naturals: dict
    traces: Dict[str, Tuple[TracePoint, ...]]

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    @property
    def verdict(self) -> str:
        last = self.rows[-1]
        if self.passed:
            return f"no decay observed through R = {last.radius}: floor {last.floor:.6f}"
        failed = ", ".join(a.name for a in self.assertions if not a.passed)
        return f"assertions failed: {failed}"


def _naturals_picture(result: ReiterResult) -> dict:
    """Describe a free group density as a point of prob(ℕ) and check that
    translation by ``a`` acts on it as a permutation of coordinates."""
    density = result.density
    group = density.group
    assert isinstance(group, FreeGroup)
    relabeled = density.relabel_to_naturals()
    table = group.index_translation_table(1, result.radius)
    permuted = {int(table[n]): m for n, m in relabeled.items()}
    translated = translate(group.generators()[0], density).relabel_to_naturals()
    return {
        "radius": result.radius,
        "support_size": len(relabeled),
        "max_index": max(relabeled),
        "mass": math.fsum(relabeled.values()),
        "translation_is_permutation": permuted == translated,
    }


def counterexample_run(
    radii: Sequence[int],
    control_radii: Sequence[int] = (5, 10, 20, 45),
    method: str = "subgradient",
    iterations: int = 500,
    step0: float = 1.0,
    lp_max_radius: int = 2,
    floor_threshold: float = 0.05,
    cap: Optional[int] = None,
) -> CounterexampleReport:
    """Measure ℓ¹ displacement floors of F₂ acting on itself by left
    multiplication and contrast them with ℤ².

    For radii up to *lp_max_radius* both the linear program and the
    subgradient method run; the linear program value is recorded as the
    floor.
    """
    if not radii:
        raise DomainError("counterexample run needs at least one radius")
    free = FreeGroup(2)
    free_gens = GeneratingSet(free, tuple(free.generators()))
    rows = []
    traces: Dict[str, Tuple[TracePoint, ...]] = {}
    last_result = None
    for radius in sorted(radii):
        sub = reiter_minimize(free, free_gens, radius, 1, method, iterations, step0, cap)
        traces[f"F2_R{radius}"] = sub.trace
        lp = reiter_minimize(free, free_gens, radius, 1, "lp", cap=cap) if radius <= lp_max_radius else None
        best = lp if lp is not None else sub
        rows.append(
            FloorRow(
                free.group_id,
                radius,
                best.objective,
                best.method,
                sub.iterations,
                best.support_size,
                reference=reference_floor(radius),
                lp_floor=None if lp is None else lp.objective,
                subgradient_floor=sub.objective,
            )
        )
        last_result = best
    lattice = IntegerLattice(2)
    lattice_gens = GeneratingSet(lattice, tuple(lattice.generators()))
    control_rows = []
    for radius in sorted(control_radii):
        sub = reiter_minimize(lattice, lattice_gens, radius, 1, "subgradient", iterations, step0, cap)
        traces[f"Z2_R{radius}"] = sub.trace
        control_rows.append(
            FloorRow(lattice.group_id, radius, sub.objective, sub.method, sub.iterations, sub.support_size)
        )
    floors = [r.floor for r in rows]
    assertions = [
        Assertion(
            "floor_above_threshold",
            all(c > floor_threshold for c in floors),
            f"smallest floor {min(floors):.6f}, threshold {floor_threshold}",
        ),
        Assertion(
            "floors_non_increasing",
            all(b <= a + 1e-9 for a, b in zip(floors, floors[1:])),
            ", ".join(f"{c:.6f}" for c in floors),
        ),
        Assertion(
            "no_decay",
            floors[-1] / floors[0] >= 0.5,
            f"last/first floor ratio {floors[-1] / floors[0]:.6f}",
        ),
    ]
    for row in rows:
        if row.lp_floor is not None and row.subgradient_floor is not None:
            gap = abs(row.lp_floor - row.subgradient_floor)
            assertions.append(Assertion(f"methods_agree_R{row.radius}", gap <= 1e-3, f"|lp - subgradient| = {gap:.3e}"))
    if control_rows:
        final = control_rows[-1]
        assertions.append(
            Assertion(
                "control_decays",
                final.floor < floor_threshold,
                f"{final.group_id} floor at R = {final.radius} is {final.floor:.6f}",
            )
        )
    report = CounterexampleReport(
        tuple(rows), tuple(control_rows), tuple(assertions), _naturals_picture(last_result), traces
    )
    for a in report.assertions:
        log = logger.info if a.passed else logger.warning
        log("assertion %s %s: %s", a.name, "holds" if a.passed else "fails", a.detail)
    return report
