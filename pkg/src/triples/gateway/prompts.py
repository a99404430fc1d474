"""Prompt builders and response parsers for the three pipeline roles.

Builders are pure: identical inputs yield byte-identical messages. The solve
prompt is assembled from tagged sections so its concatenation order can be
asserted structurally, not by substring accident.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..demos import Demonstration
from ..lang import ApiRegistry, ParseError, PolicyError, register_api, parse
from ..lang.checker import static_check
from .backends import Backend, ChatMessage
from .templates import RoleTemplate

SKIP_TOKEN = "SKIP"

_TASK_LINE = re.compile(r"^TASK:\s*(\S.*?)\s*$", re.MULTILINE)
_FENCE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)
_SUMMARY_HEADER = re.compile(
    r"^(API|TASK_DESCRIPTION|THOUGHT|EXAMPLES):[ \t]*$", re.MULTILINE
)


class ResponseFormatError(ValueError):
    """The model response does not follow the role's output contract."""


def build_simplify_prompt(template: RoleTemplate, env_obs: str,
                          x_high: str) -> list[ChatMessage]:
    if not env_obs.strip():
        raise ValueError("environment observation must be non-empty")
    if not x_high.strip():
        raise ValueError("instruction must be non-empty")
    system = f"{template.intro}\n\n{env_obs}"
    user = (
        f"{template.rules}\n\n{template.exemplars}\n\n"
        f"Simplify this instruction into TASK lines:\n{x_high}"
    )
    return [ChatMessage("system", system), ChatMessage("user", user)]


def parse_simplification(text: str) -> list[str]:
    tasks = _TASK_LINE.findall(text)
    if not tasks:
        raise ResponseFormatError("no TASK: lines in the simplification response")
    return tasks


def render_demo(demo: Demonstration) -> str:
    return (
        f"[task description]\n{demo.task_description}\n"
        f"[thought]\n{demo.thought}\n"
        f"[examples]\n{demo.examples}"
    )


def solve_prompt_sections(context: str, api_docs: list[str],
                          demos: list[Demonstration],
                          x_low: str) -> tuple[tuple[str, str], ...]:
    """Tagged user-content sections in their required order."""
    sections = [
        ("context", context),
        ("api", "\n".join(api_docs)),
    ]
    if demos:
        sections.append(
            ("demonstrations", "\n\n".join(render_demo(d) for d in demos))
        )
    sections.append(("task", x_low))
    return tuple(sections)


def build_solve_prompt(template: RoleTemplate, context: str,
                       api_docs: list[str], demos: list[Demonstration],
                       x_low: str) -> list[ChatMessage]:
    system = f"{template.intro}\n\n{template.rules}\n\n{template.exemplars}"
    sections = solve_prompt_sections(context, api_docs, demos, x_low)
    user = "\n\n".join(f"[{tag}]\n{text}" for tag, text in sections)
    return [ChatMessage("system", system), ChatMessage("user", user)]


def parse_code(text: str) -> str:
    match = _FENCE.search(text)
    source = match.group(1) if match else text
    source = source.strip()
    if not source:
        raise ResponseFormatError("the response contains no code")
    return source


def build_summary_prompt(template: RoleTemplate, x_low: str,
                         code: str) -> list[ChatMessage]:
    user = (
        f"{template.rules}\n\n{template.exemplars}\n\n"
        f"Completed minimal tasks:\n{x_low}\n\nSuccessful code:\n{code}"
    )
    return [ChatMessage("system", template.intro), ChatMessage("user", user)]


def parse_summary(text: str) -> tuple[str, Demonstration] | None:
    """Extract (funcdef_source, demonstration); None when the model SKIPs."""
    if text.strip() == SKIP_TOKEN:
        return None
    headers = list(_SUMMARY_HEADER.finditer(text))
    sections: dict[str, str] = {}
    for i, match in enumerate(headers):
        end = headers[i + 1].start() if i + 1 < len(headers) else len(text)
        sections[match.group(1)] = text[match.end() : end].strip()
    missing = [name for name in ("API", "TASK_DESCRIPTION", "THOUGHT", "EXAMPLES")
               if not sections.get(name)]
    if missing:
        raise ResponseFormatError(
            f"summary response is missing section(s): {', '.join(missing)}"
        )
    demo = Demonstration(
        id=0,
        task_description=sections["TASK_DESCRIPTION"],
        thought=sections["THOUGHT"],
        examples=sections["EXAMPLES"],
        source="learned",
    )
    return sections["API"], demo


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reason: str = ""


def supervise(backend: Backend, funcdef_source: str,
              demonstration: Demonstration, registry: ApiRegistry,
              template: RoleTemplate | None = None) -> Verdict:
    """Deterministic validation first; remote backends add one ACCEPT/REJECT
    confirmation call that is honored as-is."""
    scratch = registry.clone()
    try:
        register_api(scratch, funcdef_source)
    except PolicyError as err:
        return Verdict(False, f"routine rejected: {err.diagnostic.render()}")
    try:
        program = parse(demonstration.examples)
    except ParseError as err:
        return Verdict(
            False, f"demonstration examples rejected: {err.diagnostic.render()}"
        )
    diags = static_check(program, scratch, world=None)
    if diags:
        return Verdict(
            False, f"demonstration examples rejected: {diags[0].render()}"
        )
    if backend.kind == "remote":
        intro = template.intro if template else "You audit a proposed routine."
        rules = template.rules if template else "Reply ACCEPT or REJECT."
        messages = [
            ChatMessage("system", intro),
            ChatMessage(
                "user",
                f"{rules}\n\nRoutine:\n{funcdef_source}\n\n"
                f"Entry:\n{render_demo(demonstration)}\n\n"
                f"Reply ACCEPT or REJECT.",
            ),
        ]
        reply = backend.complete(messages)
        if "REJECT" in reply:
            return Verdict(False, f"supervisor rejected: {reply.strip()[:200]}")
        if "ACCEPT" not in reply:
            return Verdict(False, "supervisor verdict was unreadable")
    return Verdict(True)
