"""Canonical pretty-printer; parse(format_program(p)) is structurally p."""

from __future__ import annotations

from .nodes import (
    Assign,
    Attr,
    Binary,
    Call,
    Comment,
    ExprStmt,
    FuncDef,
    If,
    Literal,
    Program,
    Var,
)

_INDENT = "    "

# Binding strength; a child printed in a stronger-or-equal context gets parens.
_PREC = {"<": 1, "<=": 1, ">": 1, ">=": 1, "==": 1, "!=": 1,
         "+": 2, "-": 2, "*": 3, "/": 3}
_ATOM = 4


def format_program(program: Program) -> str:
    lines: list[str] = []
    for stmt in program.statements:
        _emit(stmt, 0, lines)
    return "\n".join(lines)


def _emit(stmt, depth: int, lines: list[str]) -> None:
    pad = _INDENT * depth
    if isinstance(stmt, Comment):
        lines.append(pad + stmt.text)
    elif isinstance(stmt, Assign):
        lines.append(f"{pad}{stmt.name} = {_expr(stmt.value)}")
    elif isinstance(stmt, ExprStmt):
        lines.append(pad + _expr(stmt.call))
    elif isinstance(stmt, If):
        lines.append(f"{pad}if {_expr(stmt.cond)}:")
        for inner in stmt.body:
            _emit(inner, depth + 1, lines)
        if stmt.orelse:
            lines.append(f"{pad}else:")
            for inner in stmt.orelse:
                _emit(inner, depth + 1, lines)
        lines.append(pad + "end")
    elif isinstance(stmt, FuncDef):
        lines.append(f"{pad}def {stmt.name}({', '.join(stmt.params)}):")
        for inner in stmt.body:
            _emit(inner, depth + 1, lines)
        lines.append(pad + "end")
    else:
        raise TypeError(f"not a statement: {stmt!r}")


def _expr(e, parent_prec: int = 0) -> str:
    if isinstance(e, Literal):
        return _literal(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.name}({', '.join(_expr(a) for a in e.args)})"
    if isinstance(e, Attr):
        base = _expr(e.base, _ATOM)
        return f"{base}.{e.field}"
    if isinstance(e, Binary):
        prec = _PREC[e.op]
        text = f"{_expr(e.lhs, prec)} {e.op} {_expr(e.rhs, prec + 1)}"
        if prec < parent_prec:
            return f"({text})"
        return text
    raise TypeError(f"not an expression: {e!r}")


def _literal(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return f'"{value}"'
    raise TypeError(f"unsupported literal: {value!r}")
