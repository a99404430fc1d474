"""Policy language: parser, static checker, interpreter, API registry."""

from .checker import static_check
from .formatter import format_program
from .interpreter import ExecutionTrace, Pose, TraceStep, interpret, STEP_BUDGET
from .nodes import (
    Assign,
    Attr,
    Binary,
    Call,
    Comment,
    Diagnostic,
    ExprStmt,
    FuncDef,
    If,
    Literal,
    ParseError,
    PolicyError,
    PolicyRuntimeError,
    Program,
    RegistrationError,
    Var,
)
from .parser import lex, parse
from .registry import (
    ApiRegistry,
    CORE_DOCS,
    CORE_SIGNATURES,
    register_api,
)

__all__ = [
    "ApiRegistry",
    "Assign",
    "Attr",
    "Binary",
    "CORE_DOCS",
    "CORE_SIGNATURES",
    "Call",
    "Comment",
    "Diagnostic",
    "ExecutionTrace",
    "ExprStmt",
    "FuncDef",
    "If",
    "Literal",
    "ParseError",
    "PolicyError",
    "PolicyRuntimeError",
    "Pose",
    "Program",
    "RegistrationError",
    "STEP_BUDGET",
    "TraceStep",
    "Var",
    "format_program",
    "interpret",
    "lex",
    "parse",
    "register_api",
    "static_check",
]
