"""Syntax tree nodes and diagnostics for the policy language.

Position fields never participate in equality, so two parses of the same
source compare structurally equal regardless of layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

PHASES = ("lex", "parse", "check", "runtime")
CODES = ("syntax", "unknown_api", "unknown_object", "arity", "type", "runtime_action")

ATTR_FIELDS = ("x", "y", "z")


@dataclass(frozen=True)
class Diagnostic:
    phase: str
    line: int
    column: int
    code: str
    message: str

    def render(self) -> str:
        """Single-line form used verbatim in retry prompts."""
        return f"{self.phase}:{self.line}:{self.column}:{self.code}:{self.message}"


class PolicyError(Exception):
    """Base for language failures; always carries one Diagnostic."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.render())
        self.diagnostic = diagnostic


class ParseError(PolicyError):
    pass


class RegistrationError(PolicyError):
    pass


class PolicyRuntimeError(PolicyError):
    def __init__(self, diagnostic: Diagnostic, trace):
        super().__init__(diagnostic)
        self.trace = trace


# -- expressions -----------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    value: object  # int | float | str | bool


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / < <= > >= == !=
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Attr:
    base: "Expr"
    field: str  # x | y | z
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


Expr = Union[Literal, Var, Binary, Call, Attr]


# -- statements --------------------------------------------------------------


@dataclass(frozen=True)
class Assign:
    name: str
    value: Expr
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ExprStmt:
    call: Call


@dataclass(frozen=True)
class If:
    cond: Expr
    body: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] = ()
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class FuncDef:
    name: str
    params: tuple[str, ...]
    body: tuple["Stmt", ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Comment:
    text: str  # verbatim, including the leading '#'


Stmt = Union[Assign, ExprStmt, If, FuncDef, Comment]


@dataclass(frozen=True)
class Program:
    statements: tuple[Stmt, ...]
