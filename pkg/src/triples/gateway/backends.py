"""Chat-completion backends: remote HTTP, scripted, oracle, and faulty.

Every backend answers `complete(messages) -> text`. Oracle backends are bound
to a task via `for_task`, which returns a fresh bound copy so concurrent
episodes never share mutable state.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path

from ..lang import (
    Assign,
    Call,
    Comment,
    ExprStmt,
    FuncDef,
    If,
    Literal,
    Program,
    Var,
    format_program,
    parse,
)
from ..transport import GatewayError, post_json

API_KEY_ENV = "TRIPLES_API_KEY"
ENDPOINT_ENV = "TRIPLES_ENDPOINT"

ROLE_NAMES = ("system", "user", "assistant")


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLE_NAMES:
            raise ValueError(f"role must be one of {ROLE_NAMES}, got {self.role!r}")
        if not self.content:
            raise ValueError("message content must be non-empty")


class Backend:
    kind = "base"

    def complete(self, messages: list[ChatMessage]) -> str:
        raise NotImplementedError

    def for_task(self, task) -> "Backend":
        return self


def _final_user_content(messages: list[ChatMessage]) -> str:
    for message in reversed(messages):
        if message.role == "user":
            return message.content
    raise ValueError("no user message in the prompt")


# -- remote -------------------------------------------------------------------


@dataclass
class RemoteConfig:
    endpoint: str
    model: str
    key_env: str = API_KEY_ENV
    timeout: float = 30.0
    max_retries: int = 3
    backoff_base: float = 0.5
    max_in_flight: int = 4


def _chat_url(endpoint: str) -> str:
    base = endpoint.rstrip("/")
    if base.endswith("/chat/completions"):
        return base
    if base.endswith("/v1"):
        return base + "/chat/completions"
    return base + "/v1/chat/completions"


class RemoteBackend(Backend):
    """OpenAI-compatible chat completions at temperature 0."""

    kind = "remote"

    def __init__(self, config: RemoteConfig):
        self.config = config
        self.url = _chat_url(config.endpoint)
        self._gate = threading.BoundedSemaphore(config.max_in_flight)

    def complete(self, messages: list[ChatMessage]) -> str:
        if not messages:
            raise ValueError("at least one message is required")
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": self.config.model,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": 0,
        }
        with self._gate:
            data = post_json(
                self.url,
                payload,
                headers,
                self.config.timeout,
                self.config.max_retries,
                self.config.backoff_base,
            )
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as err:
            raise GatewayError(f"malformed chat response: {err}") from err
        if not isinstance(content, str) or not content:
            raise GatewayError("chat response has no text content")
        return content


# -- scripted -----------------------------------------------------------------


class ScriptedPromptError(RuntimeError):
    """No matcher covered the prompt; scripted maps must be total."""


class ScriptedBackend(Backend):
    """First substring matcher over the final user message wins."""

    kind = "scripted"

    def __init__(self, matchers: list[tuple[str, str]]):
        for match, _ in matchers:
            if not match:
                raise ValueError("scripted matchers must be non-empty strings")
        self.matchers = list(matchers)

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, list):
            raise ValueError("scripted backend file must be a JSON list")
        matchers = []
        for i, entry in enumerate(data):
            try:
                matchers.append((entry["match"], entry["response"]))
            except (KeyError, TypeError) as err:
                raise ValueError(f"bad scripted entry at index {i}: {err}") from err
        return cls(matchers)

    def complete(self, messages: list[ChatMessage]) -> str:
        content = _final_user_content(messages)
        for match, response in self.matchers:
            if match in content:
                return response
        raise ScriptedPromptError(
            f"no scripted matcher covers the prompt (tail: {content[-160:]!r})"
        )


# -- oracle ------------------------------------------------------------------


class OracleDataError(RuntimeError):
    """The oracle has no ground truth for the active task."""


def describe_statement(stmt) -> str:
    """One-line account of a policy statement, naming real objects."""
    if isinstance(stmt, ExprStmt):
        call = stmt.call
        args = [_arg_text(a) for a in call.args]
        if call.name == "pick":
            return f"pick up {args[0]}"
        if call.name == "place_on":
            return f"place the held object on {args[0]}"
        if call.name == "place_at":
            return f"place the held object at ({', '.join(args)})"
        if call.name == "move":
            return f"move the gripper by ({', '.join(args)})"
        if call.name == "get_obj_pose":
            return f"check the pose of {args[0]}"
        if call.name == "get_obj_mass":
            return f"check the mass of {args[0]}"
        return f"run {call.name}({', '.join(args)})"
    if isinstance(stmt, Assign):
        if isinstance(stmt.value, Call) and stmt.value.args:
            target = _arg_text(stmt.value.args[0])
            if stmt.value.name == "get_obj_mass":
                return f"measure the mass of {target} into {stmt.name}"
            if stmt.value.name == "get_obj_pose":
                return f"record the pose of {target} into {stmt.name}"
        return f"compute {stmt.name}"
    if isinstance(stmt, If):
        names = sorted(_string_literals(stmt))
        if names:
            return f"compare the measurements and act on one of {', '.join(names)}"
        return "act on the comparison outcome"
    if isinstance(stmt, FuncDef):
        return f"define the routine {stmt.name}"
    if isinstance(stmt, Comment):
        return "note"
    return "perform the step"


def _arg_text(expr) -> str:
    if isinstance(expr, Literal):
        return str(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Call):
        return f"{expr.name}(...)"
    return "computed value"


def _string_literals(node) -> set[str]:
    found: set[str] = set()

    def walk(item):
        if isinstance(item, Literal) and isinstance(item.value, str):
            found.add(item.value)
        elif isinstance(item, (tuple, list)):
            for sub in item:
                walk(sub)
        elif hasattr(item, "__dataclass_fields__"):
            for name in item.__dataclass_fields__:
                walk(getattr(item, name))

    walk(node)
    return found


class OracleBackend(Backend):
    """Answers each role from the bound task's verified ground-truth code.

    Simplification labels each top-level statement "step N: ..."; solution
    returns the statement whose label appears in the prompt. Concatenating
    the per-step blocks reproduces the ground truth exactly.
    """

    kind = "oracle"

    def __init__(self, role: str, task=None):
        if role not in ("simplify", "solve", "summarize"):
            raise ValueError(f"oracle cannot play role {role!r}")
        self.role = role
        self.task = task
        self._segments: list[tuple[str, str]] | None = None

    def for_task(self, task) -> "OracleBackend":
        return OracleBackend(self.role, task)

    def _require_segments(self) -> list[tuple[str, str]]:
        if self._segments is not None:
            return self._segments
        if self.task is None or not getattr(self.task, "gt_code", None):
            raise OracleDataError(
                "oracle backend has no bound task with ground-truth code"
            )
        program = parse(self.task.gt_code)
        segments = []
        index = 0
        for stmt in program.statements:
            if isinstance(stmt, Comment):
                continue
            index += 1
            label = f"step {index}: {describe_statement(stmt)}"
            segments.append((label, format_program(Program((stmt,)))))
        if not segments:
            raise OracleDataError("ground-truth code has no executable statements")
        self._segments = segments
        return segments

    def complete(self, messages: list[ChatMessage]) -> str:
        if self.role == "summarize":
            return "SKIP"
        segments = self._require_segments()
        if self.role == "simplify":
            return "\n".join(f"TASK: {label}" for label, _ in segments)
        # Retry turns append diagnostics after the task, so scan every user
        # message for the most recent step label.
        content = "\n".join(m.content for m in messages if m.role == "user")
        best = None
        best_pos = -1
        for label, code in segments:
            pos = content.rfind(label)
            if pos > best_pos:
                best_pos = pos
                best = code
        if best is None or best_pos < 0:
            raise OracleDataError("prompt does not reference any known step label")
        return best


# -- faulty -------------------------------------------------------------------


class FaultyBackend(Backend):
    """Corrupts the first n completions, then delegates untouched.

    The injection counter is shared across task bindings, so an n-fault
    backend yields exactly n corrupted responses per run.
    """

    kind = "faulty"

    def __init__(self, inner: Backend, failures: int, _cell: list[int] | None = None):
        self.inner = inner
        self._remaining = _cell if _cell is not None else [failures]

    def for_task(self, task) -> "FaultyBackend":
        return FaultyBackend(self.inner.for_task(task), 0, _cell=self._remaining)

    def complete(self, messages: list[ChatMessage]) -> str:
        text = self.inner.complete(messages)
        if self._remaining[0] > 0:
            self._remaining[0] -= 1
            return _corrupt(text)
        return text


def _corrupt(text: str) -> str:
    cut = text.rfind(")")
    if cut >= 0:
        return text[:cut] + text[cut + 1 :]
    return text + "\npick(\n"


# -- role bundles --------------------------------------------------------------


@dataclass
class BackendSet:
    simplify: Backend
    solve: Backend
    summarize: Backend

    def for_task(self, task) -> "BackendSet":
        return BackendSet(
            simplify=self.simplify.for_task(task),
            solve=self.solve.for_task(task),
            summarize=self.summarize.for_task(task),
        )


def oracle_backends() -> BackendSet:
    return BackendSet(
        simplify=OracleBackend("simplify"),
        solve=OracleBackend("solve"),
        summarize=OracleBackend("summarize"),
    )


def scripted_backends(path: str | Path) -> BackendSet:
    shared = ScriptedBackend.from_file(path)
    return BackendSet(simplify=shared, solve=shared, summarize=shared)


def remote_backends(config: RemoteConfig) -> BackendSet:
    shared = RemoteBackend(config)
    return BackendSet(simplify=shared, solve=shared, summarize=shared)
