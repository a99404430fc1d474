"""Chat backends, role templates, prompt builders and response parsers."""

from .backends import (
    API_KEY_ENV,
    Backend,
    BackendSet,
    ChatMessage,
    ENDPOINT_ENV,
    FaultyBackend,
    OracleBackend,
    OracleDataError,
    RemoteBackend,
    RemoteConfig,
    ScriptedBackend,
    ScriptedPromptError,
    describe_statement,
    oracle_backends,
    remote_backends,
    scripted_backends,
)
from .prompts import (
    ResponseFormatError,
    Verdict,
    build_simplify_prompt,
    build_solve_prompt,
    build_summary_prompt,
    parse_code,
    parse_simplification,
    parse_summary,
    render_demo,
    solve_prompt_sections,
    supervise,
)
from .templates import RoleTemplate, default_template, default_templates

__all__ = [
    "API_KEY_ENV",
    "Backend",
    "BackendSet",
    "ChatMessage",
    "ENDPOINT_ENV",
    "FaultyBackend",
    "OracleBackend",
    "OracleDataError",
    "RemoteBackend",
    "RemoteConfig",
    "ResponseFormatError",
    "RoleTemplate",
    "ScriptedBackend",
    "ScriptedPromptError",
    "Verdict",
    "build_simplify_prompt",
    "build_solve_prompt",
    "build_summary_prompt",
    "default_template",
    "default_templates",
    "describe_statement",
    "oracle_backends",
    "parse_code",
    "parse_simplification",
    "parse_summary",
    "remote_backends",
    "render_demo",
    "scripted_backends",
    "solve_prompt_sections",
    "supervise",
]
