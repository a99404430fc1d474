"""Stage orchestration: simplify, retrieve, solve with compiler feedback,
execute, score, and summarize successful episodes into the library."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .demos import DemoLibrary
from .gateway import (
    Backend,
    BackendSet,
    ChatMessage,
    ResponseFormatError,
    build_simplify_prompt,
    build_solve_prompt,
    build_summary_prompt,
    default_templates,
    parse_code,
    parse_simplification,
    parse_summary,
    supervise,
)
from .lang import (
    ApiRegistry,
    Diagnostic,
    ExecutionTrace,
    ParseError,
    PolicyError,
    PolicyRuntimeError,
    interpret,
    parse,
    register_api,
    static_check,
)
from .world import GoalState, WorldState, spawn_world

UPDATE_MODE_CHOICES = ("none", "append", "append_delete")

IMPLICATION_TAGS = ("relative_position", "color", "geometry", "mass")


@dataclass
class TaskSpec:
    id: str
    instruction: str
    scenario: str
    seed: int
    goal: GoalState
    gt_code: str | None = None
    implication: frozenset[str] = frozenset()
    complexity: int = 1


@dataclass
class EpisodeResult:
    task_id: str
    minimal_tasks: list[str] = field(default_factory=list)
    code: str = ""
    executable: bool = False
    success: bool = False
    err_value: float = 0.0
    retries_used: int = 0
    trace: ExecutionTrace | None = None
    learned: tuple[str, int] | None = None
    failure: str | None = None

    def to_dict(self, include_trace: bool = False) -> dict:
        data = {
            "task_id": self.task_id,
            "minimal_tasks": self.minimal_tasks,
            "code": self.code,
            "executable": self.executable,
            "success": self.success,
            "err_value": self.err_value,
            "retries_used": self.retries_used,
            "learned": list(self.learned) if self.learned else None,
            "failure": self.failure,
        }
        if include_trace:
            data["trace"] = self.trace.to_dict() if self.trace else None
        return data


@dataclass
class PipelineConfig:
    k: int = 3
    epsilon: float = 0.03
    max_retries: int = 3
    theta_dup: float = 0.9
    update_mode: str = "none"
    epochs: int = 0
    sequential: bool = True
    jobs: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries cannot be negative")
        if not 0 < self.theta_dup <= 1:
            raise ValueError("theta_dup must be in (0, 1]")
        if self.update_mode not in UPDATE_MODE_CHOICES:
            raise ValueError(f"update_mode must be one of {UPDATE_MODE_CHOICES}")
        if self.epochs < 0:
            raise ValueError("epochs cannot be negative")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")


class SimplifyFailure(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class SolveExhausted(Exception):
    def __init__(self, diagnostics: list[Diagnostic], retries: int):
        super().__init__(f"retry budget exhausted after {retries} retries")
        self.diagnostics = diagnostics
        self.retries = retries


def simplify(backend: Backend, template, world: WorldState,
             x_high: str) -> list[str]:
    """One completion plus a single re-ask on a malformed response."""
    messages = build_simplify_prompt(template, world.observe(), x_high)
    response = backend.complete(messages)
    try:
        return parse_simplification(response)
    except ResponseFormatError:
        retry = messages + [
            _assistant(response),
            _user("Respond only with lines of the form 'TASK: <minimal task>'."),
        ]
        response = backend.complete(retry)
        try:
            return parse_simplification(response)
        except ResponseFormatError as err:
            raise SimplifyFailure(f"simplification unusable twice: {err}") from err


def solve(backend: Backend, template, context: str, world: WorldState,
          registry: ApiRegistry, library: DemoLibrary, x_low: str,
          cfg: PipelineConfig) -> tuple[str, int]:
    """Generate code for one minimal task, feeding diagnostics back on failure.

    Returns (source, retries_used). Raises SolveExhausted once
    max_retries + 1 attempts produced diagnostics.
    """
    demos = library.retrieve(x_low, cfg.k)
    messages = build_solve_prompt(template, context, registry.doc_lines(),
                                  demos, x_low)
    diagnostics: list[Diagnostic] = []
    for attempt in range(cfg.max_retries + 1):
        response = backend.complete(messages)
        diagnostics = _diagnose(response, registry, world)
        if not diagnostics:
            return parse_code(response), attempt
        feedback = "\n".join(d.render() for d in diagnostics)
        messages = messages + [
            _assistant(response),
            _user(
                f"The code was rejected with these diagnostics:\n{feedback}\n"
                f"Resend the complete corrected program."
            ),
        ]
    raise SolveExhausted(diagnostics, cfg.max_retries)


def _diagnose(response: str, registry: ApiRegistry,
              world: WorldState) -> list[Diagnostic]:
    try:
        source = parse_code(response)
    except ResponseFormatError:
        return [Diagnostic("parse", 1, 1, "syntax", "the response contains no code")]
    try:
        program = parse(source)
    except ParseError as err:
        return [err.diagnostic]
    return static_check(program, registry, world)


def evaluate(world: WorldState, goal: GoalState,
             epsilon: float) -> tuple[float, bool]:
    """Summed L2 deviation of goal objects plus gripper terms; success is
    err <= epsilon."""
    err = 0.0
    for name, target in goal.object_targets.items():
        obj = world.objects.get(name)
        if obj is None:
            raise ValueError(f"goal references unknown object {name!r}")
        err += math.dist(obj.position, target)
    if goal.gripper_target is not None:
        err += math.dist(world.gripper.position, goal.gripper_target)
    if goal.require_empty_hand and world.gripper.holding is not None:
        err += 0.5
    return err, err <= epsilon


def run_episode(task: TaskSpec, backends: BackendSet, registry: ApiRegistry,
                library: DemoLibrary, cfg: PipelineConfig,
                templates: dict | None = None
                ) -> tuple[EpisodeResult, WorldState]:
    """Run the full loop for one task on a freshly spawned world.

    Solving for every minimal task sees the initial observation; the
    concatenated program is interpreted once. Runtime failures still count
    as executable and are scored on the partially mutated world.
    """
    templates = templates or default_templates()
    world = spawn_world(task.scenario, task.seed)
    bound = backends.for_task(task)
    result = EpisodeResult(task_id=task.id)

    try:
        minimal_tasks = simplify(bound.simplify, templates["simplify"], world,
                                 task.instruction)
    except SimplifyFailure as err:
        result.failure = err.reason
        result.err_value, _ = evaluate(world, task.goal, cfg.epsilon)
        return result, world
    result.minimal_tasks = minimal_tasks

    context = world.observe()
    blocks: list[str] = []
    for x_low in minimal_tasks:
        try:
            code, retries = solve(bound.solve, templates["solve"], context,
                                  world, registry, library, x_low, cfg)
        except SolveExhausted as err:
            result.retries_used += err.retries
            result.failure = "; ".join(d.render() for d in err.diagnostics)
            result.err_value, _ = evaluate(world, task.goal, cfg.epsilon)
            return result, world
        blocks.append(code)
        result.retries_used += retries
    result.code = "\n".join(blocks)

    try:
        program = parse(result.code)
        residual = static_check(program, registry, world)
    except ParseError as err:
        residual = [err.diagnostic]
    if residual:
        # Clean blocks can still clash once concatenated (e.g. duplicate defs).
        result.failure = "; ".join(d.render() for d in residual)
        result.err_value, _ = evaluate(world, task.goal, cfg.epsilon)
        return result, world

    result.executable = True
    try:
        result.trace = interpret(program, world, registry)
    except PolicyRuntimeError as err:
        result.trace = err.trace
        result.failure = err.diagnostic.render()
    result.err_value, ok = evaluate(world, task.goal, cfg.epsilon)
    result.success = ok
    return result, world


def summarize_success(backends: BackendSet, registry: ApiRegistry,
                      library: DemoLibrary, x_low_joined: str, code: str,
                      cfg: PipelineConfig,
                      templates: dict | None = None) -> tuple[str, int] | None:
    """Propose, verify, and store one learned routine after a success.

    Returns (api_name, demo_id) when the library was updated; rejections and
    SKIPs leave registry and library untouched.
    """
    templates = templates or default_templates()
    messages = build_summary_prompt(templates["summarize"], x_low_joined, code)
    response = backends.summarize.complete(messages)
    try:
        parsed = parse_summary(response)
    except ResponseFormatError:
        return None
    if parsed is None:
        return None
    funcdef_source, demo = parsed
    verdict = supervise(backends.summarize, funcdef_source, demo, registry,
                        templates.get("supervise"))
    if not verdict.accepted:
        return None
    try:
        api_name = register_api(registry, funcdef_source)
    except PolicyError:
        return None
    mode = cfg.update_mode if cfg.update_mode != "none" else "append"
    stored = library.upsert(demo.task_description, demo.thought, demo.examples,
                            source="learned", theta_dup=cfg.theta_dup, mode=mode)
    return api_name, stored.id


@dataclass
class PassSnapshot:
    label: str
    library_digest: str
    registry_digest: str
    library_size: int
    learned_apis: list[str]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "library_digest": self.library_digest,
            "registry_digest": self.registry_digest,
            "library_size": self.library_size,
            "learned_apis": self.learned_apis,
        }


@dataclass
class BenchRun:
    metrics: object
    episodes: list[EpisodeResult]
    snapshots: list[PassSnapshot]


def _snapshot(label: str, library: DemoLibrary,
              registry: ApiRegistry) -> PassSnapshot:
    return PassSnapshot(
        label=label,
        library_digest=library.digest(),
        registry_digest=registry.digest(),
        library_size=len(library),
        learned_apis=sorted(registry.learned),
    )


def run_epoch_loop(tasks: list[TaskSpec], backends: BackendSet,
                   cfg: PipelineConfig, library: DemoLibrary,
                   registry: ApiRegistry,
                   templates: dict | None = None) -> BenchRun:
    """cfg.epochs sequential update passes, then one frozen evaluation pass.

    Updates apply immediately after each successful episode; the frozen pass
    never mutates the library or registry and produces the reported metrics.
    """
    from .bench import compute_metrics  # bench builds on pipeline types

    snapshots = [_snapshot("seed", library, registry)]
    if cfg.update_mode != "none":
        for epoch in range(cfg.epochs):
            for task in tasks:
                result, _ = run_episode(task, backends, registry, library, cfg,
                                        templates)
                if result.success:
                    result.learned = summarize_success(
                        backends.for_task(task), registry, library,
                        "\n".join(result.minimal_tasks), result.code, cfg,
                        templates,
                    )
            snapshots.append(_snapshot(f"update-{epoch + 1}", library, registry))

    if cfg.jobs > 1 and not cfg.sequential:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            episodes = [
                future.result()[0]
                for future in [
                    pool.submit(run_episode, task, backends, registry, library,
                                cfg, templates)
                    for task in tasks
                ]
            ]
    else:
        episodes = [
            run_episode(task, backends, registry, library, cfg, templates)[0]
            for task in tasks
        ]
    snapshots.append(_snapshot("frozen", library, registry))

    levels = {task.id: task.complexity for task in tasks}
    metrics = compute_metrics(episodes, levels)
    return BenchRun(metrics=metrics, episodes=episodes, snapshots=snapshots)


def _assistant(content: str) -> ChatMessage:
    return ChatMessage("assistant", content)


def _user(content: str) -> ChatMessage:
    return ChatMessage("user", content)
