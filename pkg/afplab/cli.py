"""Command line interface: ``afp-lab run`` and ``afp-lab suite``.

Exit codes: 0 if every experiment passed, 1 if an experiment failed its own
assertions, 2 for configuration and domain errors, 3 when a resource cap was
hit and 4 for numeric failures.
"""

import argparse
import concurrent.futures
import csv
import datetime
import json
import logging
import pathlib
import sys
import time
from typing import Any, Dict, List, Optional, Sequence, Tuple

from afplab import __version__
from afplab.config import ExperimentConfig
from afplab.exc import AfpLabError, ConfigError, DomainError, NumericError, ResourceCapExceeded
from afplab.experiments import ExperimentResult, run_experiment, to_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_RESOURCE = 3
EXIT_NUMERIC = 4


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (ConfigError, DomainError)):
        return EXIT_INVALID
    if isinstance(exc, ResourceCapExceeded):
        return EXIT_RESOURCE
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    raise exc


def load_config(path: pathlib.Path) -> ExperimentConfig:
    """Load and validate experiment config file.

    Raises :exc:`afplab.exc.ConfigError` if the file is not valid.
    """
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DomainError(f"{path}: not a valid JSON document: {e}") from None
    return ExperimentConfig.load_valid(data)


def load_manifest(path: pathlib.Path) -> List[pathlib.Path]:
    """Return config paths listed by a suite manifest, resolved against the
    manifest's directory.

    A manifest is either a JSON list of paths or an object with the
    ``experiments`` key holding such list.
    """
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DomainError(f"{path}: not a valid JSON document: {e}") from None
    if isinstance(data, dict):
        data = data.get("experiments", [])
    if not isinstance(data, list) or not all(isinstance(x, str) for x in data):
        raise DomainError(f"{path}: manifest must list config paths")
    return [path.parent / x for x in data]


def write_outputs(out: pathlib.Path, config: ExperimentConfig, result: ExperimentResult, meta: Dict[str, Any]):
    """Write report, sidecar metadata and CSV tables of an experiment."""
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{result.name}.json").write_text(to_json(result.document(config)) + "\n", encoding="utf-8")
    (out / f"{result.name}.meta.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    for table, rows in result.tables.items():
        if not rows:
            continue
        with open(out / f"{result.name}.{table}.csv", "w", newline="", encoding="utf-8") as fd:
            writer = csv.DictWriter(fd, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)


def _execute(
    config: ExperimentConfig, seed: Optional[int]
) -> Tuple[Optional[ExperimentResult], int, Optional[str], dict]:
    started = datetime.datetime.now(datetime.timezone.utc)
    t0 = time.perf_counter()
    try:
        result = run_experiment(config, seed)
    except AfpLabError as e:
        code = exit_code_for(e)
        return None, code, str(e), {}
    meta = {
        "started": started.isoformat(),
        "duration_seconds": time.perf_counter() - t0,
        "version": __version__,
        "seed": seed if seed is not None else (config.seed if "seed" in config else None),
    }
    return result, (EXIT_OK if result.passed else EXIT_FAILED), None, meta


def _execute_loaded(data: dict, seed: Optional[int]):
    return _execute(ExperimentConfig.load_valid(data), seed)


def run_configs(
    configs: Sequence[ExperimentConfig], out: pathlib.Path, seed: Optional[int], parallel: bool
) -> List[Tuple[ExperimentConfig, Optional[ExperimentResult], int, Optional[str]]]:
    """Run experiments, in a process pool if *parallel* is set; results keep
    the order of *configs*."""
    if parallel and len(configs) > 1:
        with concurrent.futures.ProcessPoolExecutor() as pool:
            outcomes = list(pool.map(_execute_loaded, [c.echo() for c in configs], [seed] * len(configs)))
    else:
        outcomes = [_execute(c, seed) for c in configs]
    summary = []
    for config, (result, code, error, meta) in zip(configs, outcomes):
        if result is not None:
            write_outputs(out, config, result, meta)
            print(f"{config.name}: {'PASS' if result.passed else 'FAIL'} {result.verdict}")
        else:
            print(f"{config.name}: ERROR {error}")
            logger.error("experiment %r failed with exit code %d: %s", config.name, code, error)
        summary.append((config, result, code, error))
    return summary


def _first_failure(codes: Sequence[int]) -> int:
    return next((c for c in codes if c != EXIT_OK), EXIT_OK)


def _load_all(paths: Sequence[pathlib.Path]) -> List[ExperimentConfig]:
    configs = []
    for path in paths:
        try:
            configs.append(load_config(path))
        except ConfigError as e:
            raise ConfigErrorInFile(path, e) from None
    return configs


class ConfigErrorInFile(Exception):
    """Config error annotated with the file it was found in."""

    def __init__(self, path: pathlib.Path, error: ConfigError):
        super().__init__(f"{path}: {error}")
        self.path = path
        self.error = error


def cmd_run(args: argparse.Namespace) -> int:
    configs = _load_all([pathlib.Path(x) for x in args.configs])
    summary = run_configs(configs, pathlib.Path(args.out), args.seed, args.parallel)
    return _first_failure([code for _, _, code, _ in summary])


def cmd_suite(args: argparse.Namespace) -> int:
    manifest = pathlib.Path(args.manifest)
    configs = _load_all(load_manifest(manifest))
    out = pathlib.Path(args.out)
    summary = run_configs(configs, out, args.seed, args.parallel)
    codes = [code for _, _, code, _ in summary]
    report = {
        "manifest": manifest.name,
        "passed": all(c == EXIT_OK for c in codes),
        "experiments": [
            {
                "name": config.name,
                "kind": config.kind,
                "exit_code": code,
                "passed": code == EXIT_OK,
                "verdict": result.verdict if result is not None else error,
            }
            for config, result, code, error in summary
        ],
    }
    out.mkdir(parents=True, exist_ok=True)
    (out / "suite.json").write_text(to_json(report) + "\n", encoding="utf-8")
    failed = [config.name for config, _, code, _ in summary if code != EXIT_OK]
    if failed:
        print(f"suite: {len(codes) - len(failed)}/{len(codes)} passed; failed: {', '.join(failed)}")
    else:
        print(f"suite: {len(codes)}/{len(codes)} passed")
    return _first_failure(codes)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="afp-lab", description="Approximate fixed point experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="log warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="results", help="output directory (default: %(default)s)")
    common.add_argument("--seed", type=int, help="override configured seeds")
    common.add_argument("--parallel", action="store_true", help="run independent experiments in a process pool")
    run = sub.add_parser("run", parents=[common], help="run experiment configs")
    run.add_argument("configs", nargs="+", help="experiment config files")
    run.set_defaults(func=cmd_run)
    suite = sub.add_parser("suite", parents=[common], help="run experiments listed by a manifest")
    suite.add_argument("manifest", help="suite manifest file")
    suite.set_defaults(func=cmd_suite)
    return parser


def configure_logging(verbose: bool, quiet: bool):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return args.func(args)
    except ConfigErrorInFile as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except AfpLabError as e:
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
