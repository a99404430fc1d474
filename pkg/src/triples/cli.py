"""Operator entry points: run one instruction, benchmark datasets, generate
and verify datasets, inspect libraries."""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from .bench import (
    DEFAULT_EPSILON,
    compute_metrics,
    generate,
    load_dataset,
    save_dataset,
    verify_dataset,
)
from .demos import DemoLibrary, HashedBagEmbedder, LibraryFormatError
from .gateway import (
    API_KEY_ENV,
    ENDPOINT_ENV,
    BackendSet,
    OracleDataError,
    RemoteConfig,
    ScriptedPromptError,
    oracle_backends,
    remote_backends,
    scripted_backends,
)
from .lang import ApiRegistry
from .pipeline import (
    EpisodeResult,
    PipelineConfig,
    TaskSpec,
    run_epoch_loop,
    run_episode,
)
from .transport import GatewayError
from .world import GoalState

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2
EXIT_NOT_EXECUTABLE = 3


class CliError(Exception):
    """Usage or IO problem; maps to exit code 1."""


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--backend", default="oracle",
        help="backend: oracle | scripted:FILE.json | remote (default: oracle)",
    )
    parser.add_argument(
        "--endpoint", default=None,
        help=f"remote endpoint URL (or ${ENDPOINT_ENV})",
    )
    parser.add_argument("--model", default="gpt-3.5-turbo",
                        help="remote model name (default: %(default)s)")
    parser.add_argument("--library", default=None,
                        help="seed demonstration library JSON")


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k", type=int, default=3,
                        help="demonstrations retrieved per task (default: %(default)s)")
    parser.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                        help="success threshold in meters (default: %(default)s)")
    parser.add_argument("--max-retries", type=int, default=3,
                        help="solve retries per minimal task (default: %(default)s)")
    parser.add_argument("--theta-dup", type=float, default=0.9,
                        help="dedup similarity threshold (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triples",
        description="Closed-loop policy-code harness for tabletop tasks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one instruction end to end")
    run.add_argument("--task", default=None, help="instruction text")
    run.add_argument("--scenario", default="observable",
                     choices=("observable", "partial"))
    run.add_argument("--seed", type=int, default=0, help="world seed")
    run.add_argument("--dataset", default=None, help="dataset JSON with tasks")
    run.add_argument("--task-id", default=None,
                     help="task id inside --dataset to run")
    run.add_argument("--trace", action="store_true",
                     help="include the execution trace in the printed result")
    _add_backend_flags(run)
    _add_pipeline_flags(run)

    bench = sub.add_parser("bench", help="run a dataset and report metrics")
    bench.add_argument("--dataset", required=True)
    bench.add_argument("--epochs", type=int, default=0,
                       help="library update passes before the frozen pass")
    bench.add_argument("--update", default="none",
                       choices=("none", "append", "append_delete"))
    bench.add_argument("--report", default=None, help="write the run report here")
    bench.add_argument("--jobs", type=int, default=1,
                       help="parallel workers for the frozen pass")
    bench.add_argument("--trace", action="store_true",
                       help="include execution traces in the report")
    bench.add_argument("--save-library", default=None,
                       help="write the post-run library JSON here")
    bench.add_argument("--save-registry", default=None,
                       help="write the post-run learned-API JSON here")
    _add_backend_flags(bench)
    _add_pipeline_flags(bench)

    gen = sub.add_parser("gen", help="generate a seeded dataset")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--observable", type=int, default=0)
    gen.add_argument("--partial", type=int, default=0)
    gen.add_argument("--out", required=True)

    verify = sub.add_parser("verify", help="check every ground truth in a dataset")
    verify.add_argument("dataset")
    verify.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)

    lib = sub.add_parser("lib", help="inspect a demonstration library")
    lib.add_argument("action", choices=("list", "show", "export"))
    lib.add_argument("--library", required=True)
    lib.add_argument("--registry", default=None,
                     help="learned-API JSON saved by bench")
    lib.add_argument("--id", type=int, default=None, help="demo id for show")
    lib.add_argument("--out", default=None, help="output path for export")

    return parser


def _make_backends(args) -> BackendSet:
    spec = args.backend
    if spec == "oracle":
        return oracle_backends()
    if spec.startswith("scripted:"):
        path = spec.split(":", 1)[1]
        if not Path(path).is_file():
            raise CliError(f"scripted backend file not found: {path}")
        return scripted_backends(path)
    if spec == "remote":
        endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV)
        if not endpoint:
            raise CliError(
                f"remote backend needs --endpoint or ${ENDPOINT_ENV}"
            )
        return remote_backends(RemoteConfig(endpoint=endpoint, model=args.model,
                                            key_env=API_KEY_ENV))
    raise CliError(f"unknown backend kind: {spec!r}")


def _make_config(args, update: str = "none", epochs: int = 0,
                 jobs: int = 1) -> PipelineConfig:
    try:
        return PipelineConfig(
            k=args.k,
            epsilon=args.epsilon,
            max_retries=args.max_retries,
            theta_dup=args.theta_dup,
            update_mode=update,
            epochs=epochs,
            sequential=jobs <= 1,
            jobs=max(jobs, 1),
        )
    except ValueError as err:
        raise CliError(str(err)) from err


def _load_library(args) -> DemoLibrary:
    provider = HashedBagEmbedder()
    if args.library:
        try:
            return DemoLibrary.load(args.library, provider)
        except (OSError, LibraryFormatError) as err:
            raise CliError(f"cannot load library: {err}") from err
    return DemoLibrary(provider)


def _select_task(args) -> TaskSpec:
    if args.task_id:
        if not args.dataset:
            raise CliError("--task-id requires --dataset")
        dataset = load_dataset(args.dataset)
        for task in dataset.tasks:
            if task.id == args.task_id:
                if args.task:
                    task.instruction = args.task
                return task
        raise CliError(f"task id {args.task_id!r} not in {args.dataset}")
    if not args.task:
        raise CliError("provide --task text or --dataset/--task-id")
    if args.backend == "oracle":
        raise CliError("the oracle backend needs --dataset and --task-id")
    return TaskSpec(
        id="adhoc",
        instruction=args.task,
        scenario=args.scenario,
        seed=args.seed,
        goal=GoalState(),  # no targets: success reduces to executability
    )


def _result_exit_code(result: EpisodeResult) -> int:
    if result.success:
        return EXIT_OK
    if result.executable:
        return EXIT_FAILED
    return EXIT_NOT_EXECUTABLE


def cmd_run(args) -> int:
    task = _select_task(args)
    backends = _make_backends(args)
    cfg = _make_config(args)
    library = _load_library(args)
    registry = ApiRegistry()
    result, _ = run_episode(task, backends, registry, library, cfg)
    print(json.dumps(result.to_dict(include_trace=args.trace), indent=2,
                     sort_keys=True))
    return _result_exit_code(result)


def _print_metrics(metrics) -> None:
    print(
        f"tasks: {metrics.total}  executable: {metrics.executable}  "
        f"successes: {metrics.successes}"
    )
    print(f"SR {metrics.sr:.3f}  ESR {metrics.esr:.3f}  Err {metrics.err:.4f}")
    print("level  count  SR     Err")
    for level, stats in sorted(metrics.per_level.items()):
        print(f"{level:<6} {stats.count:<6} {stats.sr:<6.3f} {stats.err:.4f}")


def cmd_bench(args) -> int:
    try:
        dataset = load_dataset(args.dataset)
    except (OSError, ValueError, KeyError) as err:
        raise CliError(f"cannot load dataset: {err}") from err
    backends = _make_backends(args)
    cfg = _make_config(args, update=args.update, epochs=args.epochs,
                       jobs=args.jobs)
    library = _load_library(args)
    registry = ApiRegistry()
    run = run_epoch_loop(dataset.tasks, backends, cfg, library, registry)
    _print_metrics(run.metrics)
    if args.report:
        report = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "config": {
                "dataset": str(args.dataset),
                "backend": args.backend,
                "k": cfg.k,
                "epsilon": cfg.epsilon,
                "max_retries": cfg.max_retries,
                "theta_dup": cfg.theta_dup,
                "update_mode": cfg.update_mode,
                "epochs": cfg.epochs,
                "jobs": cfg.jobs,
                "library": str(args.library) if args.library else None,
            },
            "metrics": run.metrics.to_dict(),
            "per_task": [e.to_dict(include_trace=args.trace)
                         for e in run.episodes],
            "library_digests": [s.to_dict() for s in run.snapshots],
        }
        try:
            Path(args.report).write_text(
                json.dumps(report, indent=2, sort_keys=True) + "\n",
                encoding="utf-8",
            )
        except OSError as err:
            raise CliError(f"cannot write report: {err}") from err
        print(f"report written to {args.report}")
    if args.save_library:
        library.save(args.save_library)
        print(f"library written to {args.save_library}")
    if args.save_registry:
        Path(args.save_registry).write_text(
            json.dumps(registry.to_json(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        print(f"registry written to {args.save_registry}")
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.observable < 0 or args.partial < 0:
        raise CliError("task counts cannot be negative")
    dataset = generate(args.seed, args.observable, args.partial)
    try:
        save_dataset(dataset, args.out)
    except OSError as err:
        raise CliError(f"cannot write dataset: {err}") from err
    print(f"wrote {len(dataset.tasks)} tasks to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        dataset = load_dataset(args.dataset)
    except (OSError, ValueError, KeyError) as err:
        raise CliError(f"cannot load dataset: {err}") from err
    failures = verify_dataset(dataset, epsilon=args.epsilon)
    if failures:
        for task_id in failures:
            print(task_id)
        print(f"{len(failures)} of {len(dataset.tasks)} tasks failed verification")
        return EXIT_FAILED
    print(f"all {len(dataset.tasks)} tasks verified")
    return EXIT_OK


def cmd_lib(args) -> int:
    try:
        library = DemoLibrary.load(args.library, HashedBagEmbedder())
    except (OSError, LibraryFormatError) as err:
        raise CliError(f"cannot load library: {err}") from err
    registry = ApiRegistry()
    if args.registry:
        try:
            data = json.loads(Path(args.registry).read_text(encoding="utf-8"))
            registry = ApiRegistry.from_json(data)
        except (OSError, ValueError, KeyError) as err:
            raise CliError(f"cannot load registry: {err}") from err
    if args.action == "list":
        print(f"{len(library)} demonstration(s)")
        for demo in library.demos:
            print(f"  {demo.id} [{demo.source}] {demo.task_description}")
        print("api docs:")
        for line in registry.doc_lines():
            print(f"  {line}")
        return EXIT_OK
    if args.action == "show":
        if args.id is None:
            raise CliError("show needs --id")
        for demo in library.demos:
            if demo.id == args.id:
                print(f"[task description]\n{demo.task_description}")
                print(f"[thought]\n{demo.thought}")
                print(f"[examples]\n{demo.examples}")
                return EXIT_OK
        raise CliError(f"no demo with id {args.id}")
    if not args.out:
        raise CliError("export needs --out")
    library.save(args.out)
    print(f"library written to {args.out}")
    return EXIT_OK


_COMMANDS = {
    "run": cmd_run,
    "bench": cmd_bench,
    "gen": cmd_gen,
    "verify": cmd_verify,
    "lib": cmd_lib,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (GatewayError, ScriptedPromptError, OracleDataError) as err:
        print(f"backend error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
