"""Static checks run before execution; diagnostics feed the solve retry loop."""

from __future__ import annotations

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
    Program,
)
from .registry import (
    ApiRegistry,
    NUMERIC_ARG_SLOTS,
    OBJECT_ARG_SLOTS,
)


def static_check(program: Program, registry: ApiRegistry, world=None) -> list[Diagnostic]:
    """Flag unknown APIs, bad arity, bad literal arguments, and misused poses.

    Program-local function definitions are visible everywhere (the interpreter
    hoists them), with the last definition of a name winning. Passing a world
    enables existence checks on string-literal object arguments.
    """
    known = registry.arities()
    known.update(_collect_defs(program.statements))
    return check_block(program.statements, known, world)


def check_block(statements, known: dict[str, int], world) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    _walk_stmts(statements, known, world, diags)
    return diags


def _collect_defs(statements) -> dict[str, int]:
    found: dict[str, int] = {}
    for stmt in statements:
        if isinstance(stmt, FuncDef):
            found[stmt.name] = len(stmt.params)
        elif isinstance(stmt, If):
            found.update(_collect_defs(stmt.body))
            found.update(_collect_defs(stmt.orelse))
    return found


def _walk_stmts(statements, known, world, diags) -> None:
    for stmt in statements:
        if isinstance(stmt, Comment):
            continue
        if isinstance(stmt, Assign):
            _walk_expr(stmt.value, known, world, diags)
        elif isinstance(stmt, ExprStmt):
            _walk_expr(stmt.call, known, world, diags)
        elif isinstance(stmt, If):
            _walk_expr(stmt.cond, known, world, diags)
            _walk_stmts(stmt.body, known, world, diags)
            _walk_stmts(stmt.orelse, known, world, diags)
        elif isinstance(stmt, FuncDef):
            _walk_stmts(stmt.body, known, world, diags)


def _walk_expr(expr, known, world, diags) -> None:
    if isinstance(expr, Call):
        _check_call(expr, known, world, diags)
        for arg in expr.args:
            _walk_expr(arg, known, world, diags)
    elif isinstance(expr, Binary):
        _walk_expr(expr.lhs, known, world, diags)
        _walk_expr(expr.rhs, known, world, diags)
    elif isinstance(expr, Attr):
        _walk_expr(expr.base, known, world, diags)
        kind = _static_kind(expr.base, known)
        if kind not in ("pose", "unknown"):
            diags.append(Diagnostic(
                "check", expr.line, expr.col, "type",
                f"'.{expr.field}' is only valid on a pose from get_obj_pose",
            ))


def _check_call(call: Call, known, world, diags) -> None:
    arity = known.get(call.name)
    if arity is None:
        diags.append(Diagnostic(
            "check", call.line, call.col, "unknown_api",
            f"unknown API {call.name!r}",
        ))
        return
    if len(call.args) != arity:
        diags.append(Diagnostic(
            "check", call.line, call.col, "arity",
            f"{call.name!r} expects {arity} argument(s), got {len(call.args)}",
        ))
        return
    for slot in OBJECT_ARG_SLOTS.get(call.name, ()):
        arg = call.args[slot]
        if isinstance(arg, Literal):
            if not isinstance(arg.value, str):
                diags.append(Diagnostic(
                    "check", call.line, call.col, "type",
                    f"{call.name!r} expects an object name string",
                ))
            elif world is not None and arg.value not in world.objects:
                diags.append(Diagnostic(
                    "check", call.line, call.col, "unknown_object",
                    f"unknown object {arg.value!r}: it does not exist in the "
                    f"environment",
                ))
    for slot in NUMERIC_ARG_SLOTS.get(call.name, ()):
        arg = call.args[slot]
        if isinstance(arg, Literal) and (
            isinstance(arg.value, bool) or not isinstance(arg.value, (int, float))
        ):
            diags.append(Diagnostic(
                "check", call.line, call.col, "type",
                f"argument {slot + 1} of {call.name!r} must be a number",
            ))


def _static_kind(expr, known) -> str:
    """Best-effort static type: pose | number | string | bool | none | unknown."""
    if isinstance(expr, Literal):
        if isinstance(expr.value, bool):
            return "bool"
        if isinstance(expr.value, (int, float)):
            return "number"
        return "string"
    if isinstance(expr, Call):
        if expr.name == "get_obj_pose":
            return "pose"
        if expr.name == "get_obj_mass":
            return "number"
        if expr.name in known:
            return "none"
        return "unknown"
    if isinstance(expr, (Binary, Attr)):
        return "number"
    return "unknown"  # variables are dynamic
