"""Deterministic study of demonstration-library update modes.

A scripted ten-task set where five composite tasks are only solvable through
a routine learned from the five simple tasks, and stale near-duplicate
demonstrations steer two of them wrong unless deleted. Frozen-pass success
rates then order strictly: no updates < append < append_delete (10/10).

The conditioning trick: retrieval runs with k=1 so exactly one demonstration
appears in each solve prompt, which lets scripted substring matchers key on
marker strings that only that demonstration carries. build_study() verifies
every similarity inequality the scenario depends on against the real
embedder and fails loudly if the text geometry drifts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .demos import DemoLibrary, HashedBagEmbedder, cosine_sim
from .gateway import BackendSet, ScriptedBackend
from .lang import ApiRegistry, interpret, parse, register_api
from .pipeline import BenchRun, PipelineConfig, TaskSpec, run_epoch_loop
from .world import GoalState, spawn_world

STUDY_SEED = 11
STUDY_MODES = ("none", "append", "append_delete")
EXPECTED_SR = {"none": 0.5, "append": 0.8, "append_delete": 1.0}

_MARKER_A = "LEGACY-ROUTE-A"
_MARKER_B = "LEGACY-ROUTE-B"

_NEW_DESC = "stack the tower pair into the target cup"
_STALE_A_DESC = "carefully stack the tower pair into the target cup"
_STALE_B_DESC = "slowly stack the tower pair into the target cup"

_PAIR_API = """def place_pair_in_cup(first, second, cup):
    pick(first)
    place_on(cup)
    pick(second)
    place_on(first)
end"""

_SUMMARY_RESPONSE = f"""API:
{_PAIR_API}
TASK_DESCRIPTION:
{_NEW_DESC}
THOUGHT:
Stacking two blocks inside a cup repeats one pick and place pattern, so a \
single routine covers every pairing.
EXAMPLES:
place_pair_in_cup("red_block", "green_block", "blue_cup")"""

_NOOP_CODE = "# retrieved approach does not apply\nmove(0.0, 0.0, 0.0)"


@dataclass
class StudyFixture:
    tasks: list[TaskSpec] = field(default_factory=list)
    simplify_matchers: list[tuple[str, str]] = field(default_factory=list)
    solve_matchers: list[tuple[str, str]] = field(default_factory=list)
    summary_matchers: list[tuple[str, str]] = field(default_factory=list)
    seed_demos: list[tuple[str, str, str]] = field(default_factory=list)

    def backends(self) -> BackendSet:
        return BackendSet(
            simplify=ScriptedBackend(self.simplify_matchers),
            solve=ScriptedBackend(self.solve_matchers),
            summarize=ScriptedBackend(self.summary_matchers),
        )

    def library(self) -> DemoLibrary:
        lib = DemoLibrary(HashedBagEmbedder())
        for desc, thought, examples in self.seed_demos:
            lib.upsert(desc, thought, examples, source="seed")
        return lib


def _goal_for(code: str, registry: ApiRegistry) -> GoalState:
    world = spawn_world("observable", STUDY_SEED)
    before = {n: o.position for n, o in world.objects.items()}
    interpret(parse(code), world, registry)
    moved = {
        n: o.position for n, o in world.objects.items() if o.position != before[n]
    }
    return GoalState(object_targets=moved, require_empty_hand=True)


def _check_geometry(composite_xlows: list[str]) -> None:
    embed = HashedBagEmbedder().embed
    new = embed(_NEW_DESC)
    stale = [embed(_STALE_A_DESC), embed(_STALE_B_DESC)]
    neutrals = [
        embed("pour the kettle water into the basin"),
        embed("wipe the table with the damp sponge"),
    ]
    for vec in stale:
        sim = cosine_sim(new, vec)
        assert sim >= 0.9, f"dedup threshold not reached: {sim:.4f}"
    for i, x_low in enumerate(composite_xlows, start=1):
        query = embed(x_low)
        best_stale = max(cosine_sim(query, v) for v in stale)
        to_new = cosine_sim(query, new)
        best_neutral = max(cosine_sim(query, v) for v in neutrals)
        assert best_stale > best_neutral, f"x{i}: stale must beat neutral demos"
        assert to_new > best_neutral, f"x{i}: learned must beat neutral demos"
        if i <= 2:
            assert best_stale > to_new, f"x{i}: stale demo must outrank learned"
        else:
            assert to_new > best_stale, f"x{i}: learned demo must outrank stale"


def build_study() -> StudyFixture:
    world = spawn_world("observable", STUDY_SEED)
    blocks = sorted(b.name for b in world.movable_blocks())
    cups = sorted(c.name for c in world.cups())
    fixture = StudyFixture()

    core = ApiRegistry()
    learned = ApiRegistry()
    register_api(learned, _PAIR_API)

    # Five simple tasks; succeeding at the first one yields the learned routine.
    simple_moves = [
        (blocks[1], blocks[0]),
        (blocks[2], blocks[1]),
        (blocks[3], blocks[2]),
        (blocks[0], blocks[3]),
        (blocks[0], cups[1]),
    ]
    for i, (mover, base) in enumerate(simple_moves, start=1):
        instruction = f"tower drill {i}: stack {mover} on {base}"
        x_low = f"simple-step-{i} move {mover} onto {base}"
        code = f'pick("{mover}")\nplace_on("{base}")'
        fixture.tasks.append(TaskSpec(
            id=f"simple-{i}",
            instruction=instruction,
            scenario="observable",
            seed=STUDY_SEED,
            goal=_goal_for(code, core),
            implication=frozenset(),
            complexity=1,
        ))
        fixture.simplify_matchers.append((instruction, f"TASK: {x_low}"))
        fixture.solve_matchers.append((f"simple-step-{i}", code))

    # Five composite tasks, solvable only by calling the learned routine.
    pair_args = [
        (blocks[0], blocks[1], cups[0]),
        (blocks[1], blocks[2], cups[1]),
        (blocks[2], blocks[3], cups[0]),
        (blocks[3], blocks[0], cups[1]),
        (blocks[0], blocks[2], cups[0]),
    ]
    composite_xlows = []
    composite_codes = []
    for i, (first, second, cup) in enumerate(pair_args, start=1):
        qualifier = {1: "carefully ", 2: "slowly "}.get(i, "")
        x_low = (
            f"{qualifier}stack the tower pair into the target cup "
            f"for composite-step-{i}"
        )
        instruction = (
            f"composite drill {i}: assemble {first} and {second} into {cup}"
        )
        code = f'place_pair_in_cup("{first}", "{second}", "{cup}")'
        composite_xlows.append(x_low)
        composite_codes.append(code)
        fixture.tasks.append(TaskSpec(
            id=f"composite-{i}",
            instruction=instruction,
            scenario="observable",
            seed=STUDY_SEED,
            goal=_goal_for(code, learned),
            implication=frozenset(),
            complexity=2,
        ))
        fixture.simplify_matchers.append((instruction, f"TASK: {x_low}"))

    _check_geometry(composite_xlows)

    # Matcher order is load-bearing: stale markers must preempt the
    # composite-step responses, so a retrieved stale demo derails the solve.
    fixture.solve_matchers.append((_MARKER_A, _NOOP_CODE))
    fixture.solve_matchers.append((_MARKER_B, _NOOP_CODE))
    for i in (3, 4, 5, 1, 2):
        fixture.solve_matchers.append(
            (f"composite-step-{i}", composite_codes[i - 1])
        )

    fixture.summary_matchers.append(("simple-step-1", _SUMMARY_RESPONSE))
    fixture.summary_matchers.append(("simple-step-", "SKIP"))
    fixture.summary_matchers.append(("composite-step-", "SKIP"))

    fixture.seed_demos = [
        (
            _STALE_A_DESC,
            "walk the blocks over one at a time",
            f"# {_MARKER_A}\n"
            f'pick("{blocks[0]}")\nplace_at(0.3, 0.0, 0.02)',
        ),
        (
            _STALE_B_DESC,
            "slide the pair along the table",
            f"# {_MARKER_B}\n"
            f'pick("{blocks[1]}")\nplace_at(0.3, 0.12, 0.02)',
        ),
        (
            "pour the kettle water into the basin",
            "tilt over the basin",
            'pick("kettle")\nplace_on("basin")',
        ),
        (
            "wipe the table with the damp sponge",
            "sweep side to side",
            'pick("sponge")\nmove(0.1, 0.0, 0.0)',
        ),
    ]
    return fixture


def run_study(update_mode: str, epochs: int,
              fixture: StudyFixture | None = None) -> BenchRun:
    fixture = fixture or build_study()
    cfg = PipelineConfig(k=1, update_mode=update_mode, epochs=epochs)
    return run_epoch_loop(fixture.tasks, fixture.backends(), cfg,
                          fixture.library(), ApiRegistry())


def run_all() -> dict[str, BenchRun]:
    """The three update configurations at one epoch (none needs no pass)."""
    fixture = build_study()
    return {
        "none": run_study("none", 0, fixture),
        "append": run_study("append", 1, fixture),
        "append_delete": run_study("append_delete", 1, fixture),
    }
