"""Affine embedding of compact convex models into ℓ².

A finite family of affine functions ``f_1, ..., f_N`` bounded by 1 on the
domain gives the map ``T(x) = (f_1(x)/1, f_2(x)/2, ..., f_N(x)/N)``, which is
affine, and injective as soon as the family separates points.
"""

import dataclasses
import itertools
import logging
import math
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.spatial.distance import pdist

from afplab.convex import ConvexModel, IntervalProduct, LpNorm, Simplex, tree_sum
from afplab.exc import DomainError
from afplab.groups import GroupElement
from afplab.interface import IAffineAction

logger = logging.getLogger(__name__)

#: Number of extra family members added on top of the separating ones.
EXTRA_MEMBERS = 8

#: Images closer than this are treated as not separated.
SEPARATION_TOL = 1e-12


def intrinsic_dim(domain: ConvexModel) -> int:
    """Return dimension of the affine hull of *domain*."""
    if isinstance(domain, Simplex):
        return domain.dim - 1
    if isinstance(domain, IntervalProduct):
        return domain.dim
    raise DomainError(f"embedding needs a simplex or a product of intervals, not {domain.describe()['kind']}")


def tangent_basis(domain: ConvexModel) -> np.ndarray:
    """Return matrix with orthonormal columns spanning directions of the
    affine hull of *domain*."""
    if isinstance(domain, Simplex):
        return linalg.null_space(np.ones((1, domain.dim)))
    intrinsic_dim(domain)
    return np.eye(domain.dim)


class AffineFunctionFamily:
    """Functions ``f_n(x) = ⟨w_n, x⟩ + c_n`` on a compact convex domain.

    :param domain:
        Simplex or product of intervals.

    :param weights:
        Matrix with one row ``w_n`` per member.

    :param offsets:
        Vector of constants ``c_n``.
    """

    def __init__(self, domain: ConvexModel, weights: np.ndarray, offsets: np.ndarray):
        intrinsic_dim(domain)
        weights = np.atleast_2d(np.asarray(weights, dtype=float))
        offsets = np.asarray(offsets, dtype=float)
        if weights.shape != (len(offsets), domain.dim):
            raise DomainError(f"family weights must have shape ({len(offsets)}, {domain.dim})")
        self.domain = domain
        self.weights = weights
        self.offsets = offsets
        self.scale = 1.0 / np.arange(1, len(offsets) + 1)

    def __len__(self) -> int:
        return len(self.offsets)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Evaluate all members at *x*."""
        return self.weights @ x + self.offsets

    def sup_norm_on_vertices(self) -> float:
        return float(np.max(np.abs(self.domain.vertices() @ self.weights.T + self.offsets)))

    def norm_bound(self) -> float:
        """Return ``(Σ_{n≤N} 1/n²)^(1/2)``, the ℓ² bound of all images."""
        return float(np.linalg.norm(self.scale))


def default_family(domain: ConvexModel, size: Optional[int] = None, seed: int = 0) -> AffineFunctionFamily:
    """Build separating family of affine functions with sup norm at most 1.

    The first members are coordinate functions rescaled to ``[-1, 1]`` (all
    but the last barycentric coordinate on a simplex), followed by the
    constant 1 and by seeded combinations of those with small rational
    coefficients, each divided by its largest absolute value over the
    vertices.

    Example:

    .. doctest::

        >>> from afplab.convex import Simplex
        >>> from afplab.embed import default_family
        >>> family = default_family(Simplex(2), 2)
        >>> family.weights.tolist(), family.offsets.tolist()
        ([[2.0, 0.0], [0.0, 0.0]], [-1.0, 1.0])
    """
    k = intrinsic_dim(domain)
    size = k + 1 + EXTRA_MEMBERS if size is None else size
    if size < k + 1:
        raise DomainError(f"family needs at least {k + 1} members on this domain, got {size}")
    m = domain.dim
    rows, consts = [], []
    if isinstance(domain, Simplex):
        for i in range(m - 1):
            rows.append(2.0 * np.eye(m)[i])
            consts.append(-1.0)
    else:
        assert isinstance(domain, IntervalProduct)
        widths = domain.highs - domain.lows
        for i in range(m):
            rows.append(2.0 * np.eye(m)[i] / widths[i])
            consts.append(-(domain.lows[i] + domain.highs[i]) / widths[i])
    rows.append(np.zeros(m))
    consts.append(1.0)
    base_w, base_c = np.array(rows), np.array(consts)
    rng = np.random.default_rng(seed)
    vertices = domain.vertices()
    while len(consts) < size:
        numerators = rng.integers(-3, 4, size=len(base_c))
        denominators = rng.integers(1, 4, size=len(base_c))
        coeffs = np.array([float(Fraction(int(a), int(b))) for a, b in zip(numerators, denominators)])
        w, c = coeffs @ base_w, float(coeffs @ base_c)
        peak = float(np.max(np.abs(vertices @ w + c)))
        if peak <= SEPARATION_TOL:
            continue
        rows.append(w / peak)
        consts.append(c / peak)
    return AffineFunctionFamily(domain, np.array(rows[:size]), np.array(consts[:size]))


def embed(family: AffineFunctionFamily, x: np.ndarray) -> np.ndarray:
    """Return ``(f_n(x)/n)`` for ``n = 1..N``.

    Raises :exc:`afplab.exc.PointOutsideModel` if *x* lies outside of the
    domain.
    """
    x = family.domain.admit(x)
    return family.scale * family(x)


def _embed_many(family: AffineFunctionFamily, points: np.ndarray) -> np.ndarray:
    return (points @ family.weights.T + family.offsets) * family.scale


@dataclasses.dataclass(frozen=True)
class EmbeddingReport:
    """Properties of an embedding measured on vertices and samples."""

    size: int
    affine_residual: float
    injectivity_margin: float
    witness: Optional[Tuple[int, int]]
    sample_margin: float
    lipschitz: float
    inverse_lipschitz: float
    empirical_lipschitz: float
    empirical_inverse_lipschitz: float
    norm_bound: float
    max_image_norm: float
    sup_norm: float

    @property
    def passed(self) -> bool:
        return (
            self.witness is None
            and self.sample_margin > SEPARATION_TOL
            and math.isfinite(self.inverse_lipschitz)
            and self.max_image_norm <= self.norm_bound + 1e-12
            and self.sup_norm <= 1 + 1e-12
        )


def lipschitz_moduli(family: AffineFunctionFamily) -> Tuple[float, float]:
    """Return exact ℓ² Lipschitz constants of ``T`` and of its inverse on the
    affine hull of the domain; the inverse one is infinite if ``T`` is not
    injective."""
    linear = (family.weights * family.scale[:, None]) @ tangent_basis(family.domain)
    sigma = np.linalg.svd(linear, compute_uv=False)
    if sigma.size < linear.shape[1]:
        return float(sigma.max(initial=0.0)), math.inf
    low = float(sigma.min())
    return float(sigma.max()), (1.0 / low if low > SEPARATION_TOL else math.inf)


def verify_embedding(family: AffineFunctionFamily, samples: int = 1000, seed: int = 0) -> EmbeddingReport:
    """Check affineness, injectivity and bi-Lipschitz moduli of the
    embedding given by *family*."""
    domain = family.domain
    rng = np.random.default_rng(seed)
    vertices = domain.vertices()
    vertex_images = _embed_many(family, vertices)
    distances = pdist(vertex_images)
    witness = None
    margin = float(distances.min()) if distances.size else math.inf
    if margin <= SEPARATION_TOL:
        # pdist orders pairs like itertools.combinations
        i, j = list(itertools.combinations(range(len(vertices)), 2))[int(np.argmin(distances))]
        witness = (i, j)
        logger.warning("vertices %d and %d are not separated by the family", i, j)
    xs, ys = domain.sample(rng, samples), domain.sample(rng, samples)
    lam = rng.uniform(0.0, 1.0, size=(samples, 1))
    mixed = _embed_many(family, lam * xs + (1 - lam) * ys)
    combined = lam * _embed_many(family, xs) + (1 - lam) * _embed_many(family, ys)
    affine_residual = float(np.max(np.abs(mixed - combined)))
    images_x, images_y = _embed_many(family, xs), _embed_many(family, ys)
    sample_margin = float(pdist(images_x).min()) if samples > 1 else math.inf
    dx = np.linalg.norm(xs - ys, axis=1)
    dt = np.linalg.norm(images_x - images_y, axis=1)
    keep = dx > SEPARATION_TOL
    with np.errstate(divide="ignore"):
        empirical = float(np.max(dt[keep] / dx[keep])) if np.any(keep) else 0.0
        empirical_inverse = float(np.max(dx[keep] / dt[keep])) if np.any(keep) else 0.0
    lipschitz, inverse_lipschitz = lipschitz_moduli(family)
    return EmbeddingReport(
        size=len(family),
        affine_residual=affine_residual,
        injectivity_margin=margin,
        witness=witness,
        sample_margin=sample_margin,
        lipschitz=lipschitz,
        inverse_lipschitz=inverse_lipschitz,
        empirical_lipschitz=empirical,
        empirical_inverse_lipschitz=empirical_inverse,
        norm_bound=family.norm_bound(),
        max_image_norm=float(np.max(np.linalg.norm(np.vstack([vertex_images, images_x]), axis=1))),
        sup_norm=family.sup_norm_on_vertices(),
    )


class EmbeddedModel(ConvexModel):
    """Image ``T(Q)`` of the domain of a family, as a convex model in ℝᴺ."""

    def __init__(self, family: AffineFunctionFamily):
        super().__init__(len(family), family.domain.tol)
        self.family = family
        self._basis = tangent_basis(family.domain)
        self._origin = family.domain.vertices().mean(axis=0)
        self._linear = (family.weights * family.scale[:, None]) @ self._basis
        self._pinv = np.linalg.pinv(self._linear)
        self._image_origin = family.scale * family(self._origin)

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.family.scale * self.family(x)

    def pullback(self, y: np.ndarray) -> np.ndarray:
        """Return the domain point whose image is closest to *y*."""
        return self._origin + self._basis @ (self._pinv @ (np.asarray(y, dtype=float) - self._image_origin))

    def violation(self, y):
        x = self.pullback(y)
        return max(self.family.domain.violation(x), float(np.max(np.abs(self.forward(x) - y))))

    def project(self, y):
        return self.forward(self.family.domain.project(self.pullback(y)))

    def _diameter(self, seminorm):
        if not isinstance(seminorm, LpNorm):
            raise DomainError("diameter of an embedded model is known only for lp norms")
        lipschitz, _ = lipschitz_moduli(self.family)
        return lipschitz * self.family.domain.diameter(LpNorm(2)) * LpNorm(2).operator_bound(seminorm, self.dim)

    def vertices(self):
        return _embed_many(self.family, self.family.domain.vertices())

    def sample(self, rng, count):
        return _embed_many(self.family, self.family.domain.sample(rng, count))

    def describe(self):
        return {"kind": "embedded", "size": self.dim, "domain": self.family.domain.describe()}


class ConjugatedAction:
    """Action ``h·T(x) = T(h·x)`` transported to the image of an embedding."""

    def __init__(self, action: IAffineAction, family: AffineFunctionFamily):
        if action.model is not family.domain and action.model.describe() != family.domain.describe():
            raise DomainError("family and action live on different domains")
        self.base = action
        self.group = action.group
        self.model = EmbeddedModel(family)

    def __repr__(self) -> str:
        return f"<ConjugatedAction({self.base!r})>"

    def act(self, g: GroupElement, y: np.ndarray) -> np.ndarray:
        y = self.model.admit(y)
        return self.model.forward(self.base.act(g, self.model.pullback(y)))

    def apply_letter(self, letter: int, y: np.ndarray) -> np.ndarray:
        return self.model.forward(self.base.apply_letter(letter, self.model.pullback(y)))

    def combine(self, weights, points):
        terms = np.asarray(weights, dtype=float)[:, None] * np.asarray(points, dtype=float)
        return tree_sum(terms)

    def difference_norm(self, x, y, seminorm) -> float:
        return float(seminorm(np.asarray(x) - np.asarray(y)))

    def is_finite(self, x) -> bool:
        return bool(np.all(np.isfinite(x)))


def conjugated_action(action: IAffineAction, family: AffineFunctionFamily) -> ConjugatedAction:
    """Transport *action* to the image of the embedding given by *family*.

    Raises :exc:`afplab.exc.DomainError` if the family does not separate
    points of the domain.
    """
    _, inverse = lipschitz_moduli(family)
    if not math.isfinite(inverse):
        raise DomainError("family does not separate points, the embedding is not injective")
    return ConjugatedAction(action, family)


@dataclasses.dataclass(frozen=True)
class CommutationCheck:
    """Comparison of the conjugated and the original action on samples."""

    #: Largest ``‖T(g·x) - g·T(x)‖₂`` found.
    max_commutation_error: float

    #: Largest ratio of conjugated displacement to original displacement.
    max_displacement_ratio: float

    #: The Lipschitz constant bounding that ratio.
    lipschitz: float

    samples: int

    @property
    def displacement_bounded(self) -> bool:
        return self.max_displacement_ratio <= self.lipschitz * (1 + 1e-9) + 1e-12


def check_commutation(
    conjugated: ConjugatedAction, generators, rng: np.random.Generator, samples: int = 100
) -> CommutationCheck:
    """Check ``T(g·x) = g·T(x)`` and ``q(Ty - g·Ty) <= L·q(x - g·x)`` for
    sampled points ``x`` and given generators."""
    base = conjugated.base
    model = conjugated.model
    l2 = LpNorm(2)
    worst_error, worst_ratio = 0.0, 0.0
    for x in base.model.sample(rng, samples):
        y = model.forward(x)
        for g in generators:
            gx = base.act(g, x)
            gy = conjugated.act(g, y)
            worst_error = max(worst_error, l2(model.forward(gx) - gy))
            original = l2(x - gx)
            if original > SEPARATION_TOL:
                worst_ratio = max(worst_ratio, l2(y - gy) / original)
    lipschitz, _ = lipschitz_moduli(model.family)
    return CommutationCheck(worst_error, worst_ratio, lipschitz, samples)
