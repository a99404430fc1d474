"""Seeded task generator, dataset verification, and SR/ESR/Err metrics.

Every generated task carries verified ground-truth code: the goal is read off
by executing that code on the task's own spawned world, so a fresh dataset
always verifies clean. Instruction wording comes from a paraphrase lexicon
shipped as a JSON asset.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .lang import (
    ApiRegistry,
    PolicyError,
    interpret,
    parse,
    static_check,
)
from .pipeline import EpisodeResult, TaskSpec, evaluate
from .world import GoalState, ObjectState, WorldState, spawn_world

DATASET_VERSION = 1
DEFAULT_EPSILON = 0.03

_OFFSETS_CM = (5, 10, 15)
_MAX_DRAWS = 40


def load_paraphrases() -> dict:
    text = resources.files("triples").joinpath("assets/paraphrases.json").read_text(
        encoding="utf-8"
    )
    return json.loads(text)


@dataclass
class Dataset:
    version: int
    generator_seed: int
    tasks: list[TaskSpec] = field(default_factory=list)


@dataclass
class LevelStats:
    sr: float
    err: float
    count: int


@dataclass
class MetricsReport:
    sr: float
    esr: float
    err: float
    per_level: dict[int, LevelStats]
    total: int
    executable: int
    successes: int

    def to_dict(self) -> dict:
        return {
            "SR": self.sr,
            "ESR": self.esr,
            "Err": self.err,
            "counts": {
                "total": self.total,
                "executable": self.executable,
                "successes": self.successes,
            },
            "per_level": {
                str(level): {"SR": s.sr, "Err": s.err, "count": s.count}
                for level, s in sorted(self.per_level.items())
            },
        }


def compute_metrics(results: list[EpisodeResult],
                    levels: dict[str, int]) -> MetricsReport:
    """SR over all tasks, ESR over executable ones, Err as the mean deviation
    over all tasks (non-executable ones score their untouched world)."""
    if not results:
        raise ValueError("cannot compute metrics over zero results")
    total = len(results)
    executable = sum(1 for r in results if r.executable)
    successes = sum(1 for r in results if r.success)
    err = sum(r.err_value for r in results) / total
    per_level: dict[int, LevelStats] = {}
    for level in sorted(set(levels.get(r.task_id, 1) for r in results)):
        bucket = [r for r in results if levels.get(r.task_id, 1) == level]
        per_level[level] = LevelStats(
            sr=sum(1 for r in bucket if r.success) / len(bucket),
            err=sum(r.err_value for r in bucket) / len(bucket),
            count=len(bucket),
        )
    return MetricsReport(
        sr=successes / total,
        esr=successes / executable if executable else 0.0,
        err=err,
        per_level=per_level,
        total=total,
        executable=executable,
        successes=successes,
    )


# -- ground-truth realization --------------------------------------------------


def _run_gt(gt_code: str, world: WorldState):
    """Execute candidate ground truth on a clone; None when it cannot run."""
    registry = ApiRegistry()
    try:
        program = parse(gt_code)
    except PolicyError:
        return None
    if static_check(program, registry, world):
        return None
    scratch = world.clone()
    try:
        trace = interpret(program, scratch, registry)
    except PolicyError:
        return None
    return scratch, trace


def complexity_level(tag_count: int, core_steps: int) -> int:
    return min(7, max(1, tag_count + math.ceil(core_steps / 4)))


def assign_complexity(task: TaskSpec) -> int:
    """Level from implication count and the executed length of the ground truth."""
    if not task.gt_code:
        raise ValueError(f"task {task.id!r} has no ground-truth code")
    outcome = _run_gt(task.gt_code, spawn_world(task.scenario, task.seed))
    if outcome is None:
        raise ValueError(f"task {task.id!r} ground truth does not execute")
    _, trace = outcome
    return complexity_level(len(task.implication), len(trace.steps))


def _realize(task_id: str, instruction: str, scenario: str, seed: int,
             gt_code: str, tags: set[str],
             world: WorldState) -> TaskSpec | None:
    outcome = _run_gt(gt_code, world)
    if outcome is None:
        return None
    final, trace = outcome
    moved = {
        name: final.objects[name].position
        for name in final.objects
        if final.objects[name].position != world.objects[name].position
    }
    if not moved:
        return None
    return TaskSpec(
        id=task_id,
        instruction=instruction,
        scenario=scenario,
        seed=seed,
        goal=GoalState(object_targets=moved, require_empty_hand=True),
        gt_code=gt_code,
        implication=frozenset(tags),
        complexity=complexity_level(len(tags), len(trace.steps)),
    )


# -- instruction families -------------------------------------------------------


def _blocks(world: WorldState) -> list[ObjectState]:
    return sorted(world.movable_blocks(), key=lambda o: o.name)


def _cups(world: WorldState) -> list[ObjectState]:
    return sorted(world.cups(), key=lambda o: o.name)


def _unique_shape_block(world: WorldState, rng) -> ObjectState | None:
    blocks = _blocks(world)
    candidates = [
        b for b in blocks
        if sum(1 for other in blocks if other.shape == b.shape) == 1
    ]
    return rng.choice(candidates) if candidates else None


def _family_color_place(world, rng, lex):
    block = rng.choice(_blocks(world))
    cup = rng.choice(_cups(world))
    phrase = rng.choice(lex["colors"][block.color])
    instruction = f"put the {phrase} block in the {cup.color} cup"
    gt = f'pick("{block.name}")\nplace_on("{cup.name}")'
    return instruction, gt, {"color"}


def _family_geometry_stack(world, rng, lex):
    base = _unique_shape_block(world, rng)
    if base is None:
        return None
    movers = [b for b in _blocks(world) if b.name != base.name]
    mover = rng.choice(movers)
    phrase = rng.choice(lex["shapes"][base.shape])
    instruction = f"stack the {mover.color} block on the {phrase} block"
    gt = f'pick("{mover.name}")\nplace_on("{base.name}")'
    return instruction, gt, {"geometry"}


def _family_color_geometry(world, rng, lex):
    base = _unique_shape_block(world, rng)
    if base is None:
        return None
    movers = [b for b in _blocks(world) if b.name != base.name]
    mover = rng.choice(movers)
    color_phrase = rng.choice(lex["colors"][mover.color])
    shape_phrase = rng.choice(lex["shapes"][base.shape])
    instruction = f"stack the {color_phrase} block on the {shape_phrase} block"
    gt = f'pick("{mover.name}")\nplace_on("{base.name}")'
    return instruction, gt, {"color", "geometry"}


def _family_relative_pick(world, rng, lex):
    blocks = _blocks(world)
    anchor = rng.choice(blocks)
    relation = rng.choice(sorted(lex["directions"]))
    ax, ay = lex["directions"][relation]
    candidates = []
    for b in blocks:
        if b.name == anchor.name:
            continue
        dx = b.position[0] - anchor.position[0]
        dy = b.position[1] - anchor.position[1]
        along = dx * ax + dy * ay
        if along > 1e-9:
            candidates.append((along, b))
    if not candidates:
        return None
    target = min(candidates, key=lambda pair: pair[0])[1]
    cup = rng.choice(_cups(world))
    instruction = (
        f"pick up the block nearest {relation} the {anchor.color} block "
        f"and put it in the {cup.color} cup"
    )
    gt = f'pick("{target.name}")\nplace_on("{cup.name}")'
    return instruction, gt, {"relative_position"}


def _family_offset_place(world, rng, lex):
    blocks = _blocks(world)
    mover = rng.choice(blocks)
    anchors = [b for b in blocks if b.name != mover.name]
    anchor = rng.choice(anchors)
    relation = rng.choice(sorted(lex["directions"]))
    ax, ay = lex["directions"][relation]
    cm = rng.choice(_OFFSETS_CM)
    dx, dy = ax * cm / 100.0, ay * cm / 100.0
    instruction = (
        f"place the {mover.color} block {cm} centimeters {relation} "
        f"the {anchor.color} block"
    )
    gt = (
        f'spot = get_obj_pose("{anchor.name}")\n'
        f'pick("{mover.name}")\n'
        f"place_at({_shift('spot.x', dx)}, {_shift('spot.y', dy)}, spot.z)"
    )
    return instruction, gt, {"relative_position"}


def _shift(base: str, delta: float) -> str:
    if delta > 0:
        return f"{base} + {round(delta, 6)!r}"
    if delta < 0:
        return f"{base} - {round(-delta, 6)!r}"
    return base


def _family_direct_stack(world, rng, lex):
    blocks = _blocks(world)
    mover = rng.choice(blocks)
    bases = [b for b in blocks if b.name != mover.name]
    base = rng.choice(bases)
    instruction = f"stack the {mover.color} block on the {base.color} block"
    gt = f'pick("{mover.name}")\nplace_on("{base.name}")'
    return instruction, gt, set()


def _family_two_step(world, rng, lex):
    blocks = _blocks(world)
    cups = _cups(world)
    first = rng.choice(blocks)
    rest = [b for b in blocks if b.name != first.name]
    mover = rng.choice(rest)
    bases = [b for b in rest if b.name != mover.name]
    base = rng.choice(bases)
    cup = rng.choice(cups)
    phrase = rng.choice(lex["colors"][first.color])
    instruction = (
        f"put the {phrase} block in the {cup.color} cup, then stack the "
        f"{mover.color} block on the {base.color} block"
    )
    gt = (
        f'pick("{first.name}")\nplace_on("{cup.name}")\n'
        f'pick("{mover.name}")\nplace_on("{base.name}")'
    )
    return instruction, gt, {"color"}


def _family_tower(world, rng, lex):
    blocks = rng.sample(_blocks(world), 3)
    a, b, c = blocks
    instruction = (
        f"build a tower: put the {b.color} block on the {a.color} block and "
        f"the {c.color} block on the {b.color} block"
    )
    gt = (
        f'pick("{b.name}")\nplace_on("{a.name}")\n'
        f'pick("{c.name}")\nplace_on("{b.name}")'
    )
    return instruction, gt, set()


_OBSERVABLE_FAMILIES = (
    _family_color_place,
    _family_geometry_stack,
    _family_color_geometry,
    _family_relative_pick,
    _family_offset_place,
    _family_direct_stack,
    _family_two_step,
    _family_tower,
)


def _mass_decision_tree(names: list[str], lightest: bool) -> str:
    op = "<" if lightest else ">"
    n1, n2, n3 = names
    return (
        f'm1 = get_obj_mass("{n1}")\n'
        f'm2 = get_obj_mass("{n2}")\n'
        f'm3 = get_obj_mass("{n3}")\n'
        f"if m1 {op} m2:\n"
        f"    if m1 {op} m3:\n"
        f'        pick("{n1}")\n'
        f"    else:\n"
        f'        pick("{n3}")\n'
        f"    end\n"
        f"else:\n"
        f"    if m2 {op} m3:\n"
        f'        pick("{n2}")\n'
        f"    else:\n"
        f'        pick("{n3}")\n'
        f"    end\n"
        f"end"
    )


def _family_extreme_mass_cup(world, rng, lex):
    names = [b.name for b in _blocks(world)]
    cup = rng.choice(_cups(world))
    lightest = rng.random() < 0.5
    word = "lightest" if lightest else "heaviest"
    instruction = f"put the {word} block in the {cup.color} cup"
    gt = _mass_decision_tree(names, lightest) + f'\nplace_on("{cup.name}")'
    return instruction, gt, {"mass"}


def _family_extreme_mass_fixed(world, rng, lex):
    names = [b.name for b in _blocks(world)]
    fixed = [o for o in world.objects.values() if o.fixed]
    if not fixed:
        return None
    base = fixed[0]
    lightest = rng.random() < 0.5
    word = "lightest" if lightest else "heaviest"
    instruction = f"stack the {word} block on the {base.color} block"
    gt = _mass_decision_tree(names, lightest) + f'\nplace_on("{base.name}")'
    return instruction, gt, {"mass"}


def _family_both_extremes(world, rng, lex):
    names = [b.name for b in _blocks(world)]
    cups = _cups(world)
    cup_a, cup_b = rng.sample(cups, 2)
    instruction = (
        f"put the lightest block in the {cup_a.color} cup and the heaviest "
        f"block in the {cup_b.color} cup"
    )
    gt = (
        _mass_decision_tree(names, lightest=True)
        + f'\nplace_on("{cup_a.name}")\n'
        + _mass_decision_tree(names, lightest=False)
        + f'\nplace_on("{cup_b.name}")'
    )
    return instruction, gt, {"mass"}


def _family_partial_direct(world, rng, lex):
    block = rng.choice(_blocks(world))
    cup = rng.choice(_cups(world))
    instruction = f"put the {block.color} block in the {cup.color} cup"
    gt = f'pick("{block.name}")\nplace_on("{cup.name}")'
    return instruction, gt, set()


_PARTIAL_FAMILIES = (
    _family_extreme_mass_cup,
    _family_extreme_mass_fixed,
    _family_both_extremes,
    _family_partial_direct,
)


def generate(seed: int, n_observable: int, n_partial: int) -> Dataset:
    """Build a seeded dataset; identical arguments give identical datasets."""
    if n_observable < 0 or n_partial < 0:
        raise ValueError("task counts cannot be negative")
    rng = random.Random(seed)
    lex = load_paraphrases()
    tasks: list[TaskSpec] = []
    plan = [("observable", _OBSERVABLE_FAMILIES, "obs", i)
            for i in range(n_observable)]
    plan += [("partial", _PARTIAL_FAMILIES, "part", i) for i in range(n_partial)]
    for scenario, families, prefix, i in plan:
        task_id = f"{prefix}-{i:04d}"
        for _ in range(_MAX_DRAWS):
            task_seed = rng.randrange(1 << 31)
            world = spawn_world(scenario, task_seed)
            family = families[rng.randrange(len(families))]
            built = family(world, rng, lex)
            if built is None:
                continue
            instruction, gt, tags = built
            task = _realize(task_id, instruction, scenario, task_seed, gt, tags,
                            world)
            if task is not None:
                tasks.append(task)
                break
        else:
            raise RuntimeError(f"could not realize a task for {task_id}")
    return Dataset(version=DATASET_VERSION, generator_seed=seed, tasks=tasks)


def verify_dataset(dataset: Dataset,
                   epsilon: float = DEFAULT_EPSILON) -> list[str]:
    """Re-execute every task's ground truth and score it; returns failing ids."""
    failures = []
    for task in dataset.tasks:
        if not task.gt_code:
            failures.append(task.id)
            continue
        outcome = _run_gt(task.gt_code, spawn_world(task.scenario, task.seed))
        if outcome is None:
            failures.append(task.id)
            continue
        final, _ = outcome
        try:
            err, ok = evaluate(final, task.goal, epsilon)
        except ValueError:
            failures.append(task.id)
            continue
        if not ok:
            failures.append(task.id)
    return failures


# -- dataset files ---------------------------------------------------------------


def _goal_to_dict(goal: GoalState) -> dict:
    return {
        "object_targets": {n: list(p) for n, p in goal.object_targets.items()},
        "gripper_target": list(goal.gripper_target) if goal.gripper_target else None,
        "require_empty_hand": goal.require_empty_hand,
    }


def _goal_from_dict(data: dict) -> GoalState:
    return GoalState(
        object_targets={n: tuple(p) for n, p in data["object_targets"].items()},
        gripper_target=tuple(data["gripper_target"]) if data.get("gripper_target")
        else None,
        require_empty_hand=bool(data.get("require_empty_hand", False)),
    )


def task_to_dict(task: TaskSpec) -> dict:
    return {
        "id": task.id,
        "instruction": task.instruction,
        "scenario": task.scenario,
        "seed": task.seed,
        "goal": _goal_to_dict(task.goal),
        "gt_code": task.gt_code,
        "implication": sorted(task.implication),
        "complexity": task.complexity,
    }


def task_from_dict(data: dict) -> TaskSpec:
    return TaskSpec(
        id=data["id"],
        instruction=data["instruction"],
        scenario=data["scenario"],
        seed=int(data["seed"]),
        goal=_goal_from_dict(data["goal"]),
        gt_code=data.get("gt_code"),
        implication=frozenset(data.get("implication", [])),
        complexity=int(data.get("complexity", 1)),
    )


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    data = {
        "version": dataset.version,
        "generator_seed": dataset.generator_seed,
        "tasks": [task_to_dict(t) for t in dataset.tasks],
    }
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def load_dataset(path: str | Path) -> Dataset:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("version") != DATASET_VERSION:
        raise ValueError(f"unsupported dataset version {data.get('version')!r}")
    tasks = [task_from_dict(entry) for entry in data["tasks"]]
    ids = [t.id for t in tasks]
    if len(set(ids)) != len(ids):
        raise ValueError("dataset task ids are not unique")
    return Dataset(version=DATASET_VERSION,
                   generator_seed=int(data.get("generator_seed", 0)),
                   tasks=tasks)
