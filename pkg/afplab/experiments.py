"""Experiment runners: turn a validated config into a report and tables."""

import dataclasses
import enum
import json
import logging
import math
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from afplab import convex, embed, engine, folner, reiter
from afplab.config import ExperimentConfig
from afplab.densities import GroupDensity, RegularAction
from afplab.exc import DomainError, NumericError
from afplab.groups import FreeGroup, GeneratingSet
from afplab.reiter import Assertion

logger = logging.getLogger(__name__)

#: Allowed decomposition residual per element of the averaged set.
RESIDUAL_TOL = 1e-9


@dataclasses.dataclass(frozen=True)
class ExperimentResult:
    """Outcome of a single experiment."""

    kind: str
    name: str
    passed: bool
    verdict: str
    report: dict
    tables: Dict[str, List[dict]] = dataclasses.field(default_factory=dict)

    def document(self, config: ExperimentConfig) -> dict:
        return {
            "config": config.echo(),
            "kind": self.kind,
            "name": self.name,
            "passed": self.passed,
            "verdict": self.verdict,
            "report": self.report,
        }


def _encode(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (tuple, set, frozenset)):
        return list(obj)
    raise TypeError(f"cannot encode {obj!r} as JSON")


def to_json(document: dict) -> str:
    """Serialize report deterministically.

    Floats use the shortest representation that round-trips; rationals
    become ``{"num": ..., "den": ...}``. Non-finite values raise
    :exc:`afplab.exc.NumericError`.

    Example:

    .. doctest::

        >>> from fractions import Fraction
        >>> from afplab.experiments import to_json
        >>> print(to_json({"ratio": Fraction(1, 4), "value": 0.1}))
        {
          "ratio": {
            "den": 4,
            "num": 1
          },
          "value": 0.1
        }
    """
    try:
        return json.dumps(document, default=_encode, sort_keys=True, allow_nan=False, indent=2)
    except ValueError as e:
        raise NumericError("report serialization", str(e)) from None


def _check_expectations(
    config: ExperimentConfig, values: Dict[str, Optional[float]], verdict: Optional[str] = None
) -> List[Assertion]:
    if "expect" not in config:
        return []
    expect = config.expect
    out = []
    if "verdict" in expect and verdict is not None:
        detail = f"got {verdict}, expected {expect.verdict}"
        out.append(Assertion("expected_verdict", verdict == expect.verdict, detail))
    checks = [
        ("max_displacement", "final_displacement", lambda v, e: v <= e),
        ("min_displacement", "smallest_displacement", lambda v, e: v >= e),
        ("objective_max", "objective", lambda v, e: v <= e),
        ("objective_min", "objective", lambda v, e: v >= e),
        ("estimate_min", "estimate", lambda v, e: v >= e),
        ("estimate_max", "estimate", lambda v, e: v <= e),
    ]
    for key, value_name, ok in checks:
        if key in expect and values.get(value_name) is not None:
            value, bound = values[value_name], getattr(expect, key)
            out.append(Assertion(f"expected_{key}", bool(ok(value, bound)), f"{value_name} {value!r} vs {bound!r}"))
    return out


def _assertions_report(assertions: List[Assertion]) -> List[dict]:
    return [{"name": a.name, "passed": a.passed, "detail": a.detail} for a in assertions]


def _require_seed(config: ExperimentConfig, seed: Optional[int]) -> int:
    if seed is None:
        raise DomainError(f"{config.kind} experiment {config.name!r} needs a seed; set 'seed' or pass --seed")
    return seed


def _check_report(check: convex.ActionCheck) -> dict:
    return {
        "max_discrepancy": check.max_discrepancy,
        "tolerance": check.tolerance,
        "worst": check.worst,
        "passed": check.passed,
    }


def run_folner_profile(config: ExperimentConfig, seed: Optional[int]) -> ExperimentResult:
    group = config.build_group()
    generators = config.build_generators(group)
    schedule = config.schedule.build(group, GeneratingSet(group, tuple(generators)), config.ball_cap())
    rows = folner.ratio_profile(schedule, generators, config.max_index, config.min_index)
    assertions: List[Assertion] = []
    report: Dict[str, Any] = {
        "group": group.group_id,
        "rows": [
            {"index": r.index, "set_size": r.set_size, "generator": r.generator_label, "ratio": r.ratio} for r in rows
        ],
    }
    if config.link:
        link = reiter.folner_reiter_link(schedule, generators, config.max_index, config.min_index)
        report["link"] = [
            {"index": r.index, "set_size": r.set_size, "objective": r.objective, "max_ratio": r.max_ratio} for r in link
        ]
        assertions.append(
            Assertion("uniform_objective_below_ratio", all(r.holds for r in link), f"{len(link)} sets checked")
        )
    last = max((r for r in rows if r.index == rows[-1].index), key=lambda r: r.ratio)
    assertions.extend(_check_expectations(config, {}))
    report["assertions"] = _assertions_report(assertions)
    return ExperimentResult(
        config.kind,
        config.name,
        all(a.passed for a in assertions),
        f"max ratio {last.ratio} at index {last.index} (|Φ|={last.set_size})",
        report,
        {"profile": [r.as_csv_row() for r in rows]},
    )


def _base_point(config: ExperimentConfig, action) -> Any:
    if isinstance(action, RegularAction):
        if "base_point" in config:
            raise DomainError("the regular action starts from the point mass at the identity")
        return GroupDensity.point_mass(action.group)
    if "base_point" in config:
        return np.array(config.base_point, dtype=float)
    model = action.model
    vertices = model.vertices()
    return vertices[0]


def run_afp(config: ExperimentConfig, seed: Optional[int]) -> ExperimentResult:
    seed = _require_seed(config, seed)
    group = config.build_group()
    generators = config.build_generators(group)
    gens = GeneratingSet(group, tuple(generators))
    model = config.model.build() if "model" in config else None
    action = config.action.build(group, model)
    functionals = config.build_functionals()
    if functionals is not None and isinstance(action, RegularAction):
        raise DomainError("test functionals need a finite-dimensional convex model")
    seminorm = convex.make_seminorm(config.seminorm)
    assertions: List[Assertion] = []
    report: Dict[str, Any] = {"group": group.group_id, "seminorm": seminorm.name}
    if isinstance(action, convex.AffineAction):
        rng = np.random.default_rng(seed)
        relations = convex.check_relations(action, rng)
        invariance = convex.check_invariance(action, rng)
        report["relation_check"] = _check_report(relations)
        report["invariance_check"] = _check_report(invariance)
        assertions.append(Assertion("relations_hold", relations.passed, f"worst relation {relations.worst}"))
        assertions.append(Assertion("model_invariant", invariance.passed, f"worst element {invariance.worst}"))
    schedule = config.schedule.build(group, gens, config.ball_cap())
    run = engine.afp_run(
        action,
        schedule,
        _base_point(config, action),
        generators,
        seminorm,
        config.max_index,
        config.min_index,
        config.epsilon,
        functionals,
    )
    records = []
    table = []
    for record in run.records:
        item: Dict[str, Any] = {
            "index": record.index,
            "set_size": record.set_size,
            "per_generator": [
                {
                    "label": g.label,
                    "displacement": g.displacement,
                    "ratio": g.ratio,
                    "bound": g.bound,
                    "residual": g.residual,
                    **({} if g.weak is None else {"weak": g.weak}),
                }
                for g in record.per_generator
            ],
        }
        if isinstance(record.average, np.ndarray):
            item["average"] = record.average
        else:
            item["average_support_size"] = len(record.average)
        records.append(item)
        for g in record.per_generator:
            table.append(
                {
                    "index": record.index,
                    "set_size": record.set_size,
                    "generator_label": g.label,
                    "displacement": g.displacement,
                    "ratio_num": g.ratio.numerator,
                    "ratio_den": g.ratio.denominator,
                    "bound": g.bound,
                    "residual": g.residual,
                }
            )
    violations = run.bound_violations
    assertions.append(Assertion("displacement_within_bound", not violations, f"{len(violations)} violations"))
    worst_residual = max((r.max_residual / r.set_size for r in run.records), default=0.0)
    assertions.append(
        Assertion(
            "decomposition_holds",
            worst_residual <= RESIDUAL_TOL,
            f"largest residual per element {worst_residual:.3e}",
        )
    )
    values = {
        "final_displacement": run.records[-1].max_displacement,
        "smallest_displacement": min(r.max_displacement for r in run.records),
    }
    assertions.extend(_check_expectations(config, values, run.verdict.value))
    report.update(
        {
            "diameter": run.diameter,
            "epsilon": run.epsilon,
            "records": records,
            "verdict": run.verdict,
            "message": run.message,
            "certificate": None if run.certificate is None else dataclasses.asdict(run.certificate),
            "assertions": _assertions_report(assertions),
        }
    )
    return ExperimentResult(
        config.kind,
        config.name,
        all(a.passed for a in assertions),
        f"{run.verdict.value}: {run.message}",
        report,
        {"records": table},
    )


def _density_table(density: GroupDensity) -> List[dict]:
    group = density.group
    rows = []
    for g, mass in density.items():
        row: Dict[str, Any] = {"element": group.label(g), "mass": mass}
        if isinstance(group, FreeGroup):
            row["word_index"] = group.word_index(g)
        rows.append(row)
    return rows


def run_reiter(config: ExperimentConfig, seed: Optional[int]) -> ExperimentResult:
    group = config.build_group()
    gens = GeneratingSet(group, tuple(config.build_generators(group)))
    result = reiter.reiter_minimize(
        group, gens, config.radius, config.p, config.method, config.iterations, config.step0, config.ball_cap()
    )
    recomputed = reiter.reiter_objective(result.density, list(gens), result.p)
    assertions = [
        Assertion(
            "objective_reproducible", abs(recomputed - result.objective) <= 1e-9, f"recomputed {recomputed!r}"
        )
    ]
    assertions.extend(_check_expectations(config, {"objective": result.objective}))
    report = {
        "group": group.group_id,
        "radius": result.radius,
        "p": result.p,
        "method": result.method,
        "objective": result.objective,
        "iterations": result.iterations,
        "support_size": result.support_size,
        "density_support": len(result.density),
        "assertions": _assertions_report(assertions),
    }
    return ExperimentResult(
        config.kind,
        config.name,
        all(a.passed for a in assertions),
        f"objective {result.objective:.9f} on ball of radius {result.radius}",
        report,
        {"trace": [t.as_csv_row() for t in result.trace], "density": _density_table(result.density)},
    )


def run_kesten(config: ExperimentConfig, seed: Optional[int]) -> ExperimentResult:
    group = config.build_group()
    if "generators" in config:
        gens = GeneratingSet(group, tuple(config.build_generators(group)))
    else:
        gens = group.standard_generating_set()
    result = reiter.kesten_estimate(
        group, gens, config.radius, config.iterations, config.ball_cap(), config.index_cap()
    )
    assertions = [Assertion("estimate_at_most_one", result.estimate <= 1 + 1e-9, f"estimate {result.estimate!r}")]
    assertions.extend(_check_expectations(config, {"estimate": result.estimate}))
    report = {
        "group": group.group_id,
        "radius": result.radius,
        "support_size": result.support_size,
        "estimate": result.estimate,
        "iterations": result.iterations,
        "assertions": _assertions_report(assertions),
    }
    return ExperimentResult(
        config.kind,
        config.name,
        all(a.passed for a in assertions),
        f"Kesten estimate {result.estimate:.9f} on ball of radius {result.radius}",
        report,
        {"trace": [t.as_csv_row() for t in result.trace]},
    )


def _floor_report(row: reiter.FloorRow) -> dict:
    out: Dict[str, Any] = {
        "radius": row.radius,
        "floor": row.floor,
        "method": row.method,
        "iterations": row.iterations,
        "support_size": row.support_size,
    }
    if row.reference is not None:
        out["reference"] = row.reference
    if row.lp_floor is not None:
        out["lp_floor"] = row.lp_floor
    if row.subgradient_floor is not None:
        out["subgradient_floor"] = row.subgradient_floor
    return out


def run_counterexample(config: ExperimentConfig, seed: Optional[int]) -> ExperimentResult:
    result = reiter.counterexample_run(
        config.radii,
        config.control_radii,
        config.method,
        config.iterations,
        config.step0,
        config.lp_max_radius,
        config.floor_threshold,
        config.ball_cap(),
    )
    assertions = list(result.assertions) + _check_expectations(config, {})
    report = {
        "floors": [_floor_report(r) for r in result.rows],
        "control": [_floor_report(r) for r in result.control_rows],
        "prob_naturals": result.naturals,
        "assertions": _assertions_report(assertions),
    }
    traces = [dict(series=name, **t.as_csv_row()) for name, trace in result.traces.items() for t in trace]
    return ExperimentResult(
        config.kind,
        config.name,
        all(a.passed for a in assertions),
        result.verdict,
        report,
        {"floors": [r.as_csv_row() for r in result.rows + result.control_rows], "traces": traces},
    )


def _finite_or_none(data: dict) -> dict:
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in data.items()}


def run_embed(config: ExperimentConfig, seed: Optional[int]) -> ExperimentResult:
    seed = _require_seed(config, seed)
    domain = config.model.build()
    family = embed.default_family(domain, config.size if "size" in config else None, seed)
    result = embed.verify_embedding(family, config.samples, seed)
    assertions = [
        Assertion("embedding_verified", result.passed, f"witness {result.witness}"),
        Assertion("affine", result.affine_residual <= 1e-12, f"affine residual {result.affine_residual:.3e}"),
    ]
    report: Dict[str, Any] = {"embedding": _finite_or_none(dataclasses.asdict(result))}
    if "action" in config and result.passed:
        group = config.build_group()
        action = config.action.build(group, domain)
        conjugated = embed.conjugated_action(action, family)
        check = embed.check_commutation(conjugated, config.build_generators(group), np.random.default_rng(seed), 100)
        report["commutation"] = dataclasses.asdict(check)
        assertions.append(
            Assertion("commutes", check.max_commutation_error <= 1e-9, f"error {check.max_commutation_error:.3e}")
        )
        assertions.append(
            Assertion(
                "displacement_bounded",
                check.displacement_bounded,
                f"ratio {check.max_displacement_ratio:.6f}, modulus {check.lipschitz:.6f}",
            )
        )
    report["assertions"] = _assertions_report(assertions)
    rng = np.random.default_rng(seed)
    vertices = domain.vertices()
    points = [("vertex", x) for x in vertices] + [("sample", x) for x in domain.sample(rng, min(config.samples, 100))]
    cloud = []
    for kind, x in points:
        image = embed.embed(family, x)
        cloud.append({"kind": kind, **{f"t{n + 1}": float(v) for n, v in enumerate(image)}})
    passed = all(a.passed for a in assertions)
    verdict = "embedding verified" if passed else "embedding check failed"
    if math.isfinite(result.inverse_lipschitz):
        verdict += f" (moduli {result.lipschitz:.4f}, {result.inverse_lipschitz:.4f})"
    return ExperimentResult(config.kind, config.name, passed, verdict, report, {"points": cloud})


RUNNERS: Dict[str, Callable[[ExperimentConfig, Optional[int]], ExperimentResult]] = {
    "folner_profile": run_folner_profile,
    "afp_run": run_afp,
    "reiter": run_reiter,
    "kesten": run_kesten,
    "counterexample": run_counterexample,
    "embed": run_embed,
}


def run_experiment(config: ExperimentConfig, seed: Optional[int] = None) -> ExperimentResult:
    """Run experiment described by *config*; *seed* overrides the configured
    one."""
    seed = config.seed if seed is None and "seed" in config else seed
    logger.info("running %s experiment %r", config.kind, config.name)
    result = RUNNERS[config.kind](config, seed)
    logger.info("%s: %s", config.name, result.verdict)
    return result
