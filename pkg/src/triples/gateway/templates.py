"""Default role templates for the three pipeline roles plus the supervisor.

These are plain editable constants; swap any section by constructing a
RoleTemplate with different text.
"""

from __future__ import annotations

from dataclasses import dataclass

ROLES = ("simplify", "solve", "summarize", "supervise")


@dataclass(frozen=True)
class RoleTemplate:
    role: str
    intro: str
    rules: str
    exemplars: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {self.role!r}")


SIMPLIFY_INTRO = (
    "You rewrite tabletop robot instructions into minimal executable steps. "
    "The environment listing below is the only ground truth about the scene."
)

SIMPLIFY_RULES = """Rewrite rules:
1. Resolve every indirect or underspecified reference (colors described by \
analogy, shape descriptions, relative positions, hidden properties) to the \
exact object name from the environment listing, reasoning over the listed \
attributes.
2. Split the instruction into minimal tasks, each one robot action, phrased \
like "move the gripper <distance> <direction>" with concrete values inferred \
from the instruction.
3. Keep any part that rules 1 and 2 cannot resolve unchanged inside its \
minimal task.
Respond with one line per minimal task, each formatted exactly as:
TASK: <minimal task>"""

SIMPLIFY_EXEMPLARS = """Example:
Instruction: put the banana colored block in the red cup
TASK: pick up yellow_block
TASK: place the held object on red_cup"""

SOLVE_INTRO = (
    "You write policy code for a tabletop robot, using only the documented "
    "APIs against the environment described below."
)

SOLVE_RULES = """Language rules:
- one statement per line; blocks close with a line containing only end
- statements: name = expression | api_call(arguments) | \
if expression: ... else: ... end | def name(params): ... end | # comment
- expressions: decimal numbers, double-quoted strings, true, false, \
variables, the operators + - * / < <= > >= == !=, and .x .y .z on a pose \
returned by get_obj_pose
- there are no loops; call only the documented APIs; take object names from \
the environment listing
Respond with the complete program in a fenced code block."""

SOLVE_EXEMPLARS = """Example task: stack green_block on yellow_block
```
pick("green_block")
place_on("yellow_block")
```"""

SUMMARIZE_INTRO = (
    "You distill one successful policy-code run into a reusable routine and "
    "a demonstration library entry."
)

SUMMARIZE_RULES = """Summary rules:
1. Encapsulate only to make the successful code easier to reuse; the routine \
must keep the original behavior.
2. The routine body may call only APIs that already exist.
3. The library entry must supply the [task description], [thought], and \
[examples] sections for the new routine.
Respond with the single line SKIP when no useful routine exists, otherwise \
with exactly these four sections:
API:
<one function definition ending with end>
TASK_DESCRIPTION:
<one line naming the kind of task>
THOUGHT:
<why the routine helps>
EXAMPLES:
<policy code calling the new routine>"""

SUMMARIZE_EXEMPLARS = """Example response:
API:
def park_over(target):
    p = get_obj_pose(target)
    pick(target)
    place_at(p.x, p.y, p.z)
end
TASK_DESCRIPTION:
re-seat a block at its own footprint
THOUGHT:
Reading the pose before picking lets the block be set back down exactly \
where it started.
EXAMPLES:
park_over("green_block")"""

SUPERVISE_INTRO = (
    "You audit a proposed robot routine and its demonstration entry before "
    "they enter the library."
)

SUPERVISE_RULES = (
    "Reply with ACCEPT when the routine and entry are well formed and "
    "consistent with the documented APIs, otherwise reply with REJECT "
    "followed by a short reason."
)

_DEFAULTS = {
    "simplify": RoleTemplate("simplify", SIMPLIFY_INTRO, SIMPLIFY_RULES,
                             SIMPLIFY_EXEMPLARS),
    "solve": RoleTemplate("solve", SOLVE_INTRO, SOLVE_RULES, SOLVE_EXEMPLARS),
    "summarize": RoleTemplate("summarize", SUMMARIZE_INTRO, SUMMARIZE_RULES,
                              SUMMARIZE_EXEMPLARS),
    "supervise": RoleTemplate("supervise", SUPERVISE_INTRO, SUPERVISE_RULES,
                              "No examples."),
}


def default_template(role: str) -> RoleTemplate:
    return _DEFAULTS[role]


def default_templates() -> dict[str, RoleTemplate]:
    return dict(_DEFAULTS)
