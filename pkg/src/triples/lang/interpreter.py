"""Tree-walking interpreter over a WorldState.

Learned and program-local routines are inlined into core API steps; every
core invocation lands in the execution trace. World ActionErrors abort the
run as runtime diagnostics, leaving partial world mutation in place for
error scoring.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass, field

from ..world import ActionError, WorldState
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
    PolicyRuntimeError,
    Program,
    Var,
)
from .registry import CORE_SIGNATURES, ApiRegistry

STEP_BUDGET = 200

Pose = namedtuple("Pose", ("x", "y", "z"))


@dataclass
class TraceStep:
    api: str
    args: tuple
    outcome: str


@dataclass
class ExecutionTrace:
    steps: list[TraceStep] = field(default_factory=list)
    world_before: str = ""
    world_after: str = ""

    def to_dict(self) -> dict:
        return {
            "steps": [[s.api, list(s.args), s.outcome] for s in self.steps],
            "world_before": self.world_before,
            "world_after": self.world_after,
        }


class _Halt(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic


class _Interpreter:
    def __init__(self, world: WorldState, registry: ApiRegistry, step_budget: int):
        self.world = world
        self.registry = registry
        self.step_budget = step_budget
        self.trace = ExecutionTrace(world_before=world.digest())
        self.local_funcs: dict[str, FuncDef] = {}
        self.stmt_line = 1
        self.stmt_col = 1

    def fail(self, message: str):
        raise _Halt(Diagnostic(
            "runtime", self.stmt_line, self.stmt_col, "runtime_action", message
        ))

    def run(self, program: Program) -> None:
        self._hoist(program.statements)
        env: dict[str, object] = {}
        self.exec_block(program.statements, env)

    def _hoist(self, statements) -> None:
        for stmt in statements:
            if isinstance(stmt, FuncDef):
                self.local_funcs[stmt.name] = stmt
            elif isinstance(stmt, If):
                self._hoist(stmt.body)
                self._hoist(stmt.orelse)

    def exec_block(self, statements, env: dict) -> None:
        for stmt in statements:
            if isinstance(stmt, (Comment, FuncDef)):
                continue
            if isinstance(stmt, Assign):
                self.stmt_line, self.stmt_col = stmt.line, stmt.col
                env[stmt.name] = self.eval(stmt.value, env)
            elif isinstance(stmt, ExprStmt):
                self.stmt_line, self.stmt_col = stmt.call.line, stmt.call.col
                self.eval(stmt.call, env)
            elif isinstance(stmt, If):
                self.stmt_line, self.stmt_col = stmt.line, stmt.col
                branch = stmt.body if self.eval(stmt.cond, env) else stmt.orelse
                self.exec_block(branch, env)
            else:
                raise TypeError(f"not a statement: {stmt!r}")

    def eval(self, expr, env: dict):
        if isinstance(expr, Literal):
            return expr.value
        if isinstance(expr, Var):
            if expr.name not in env:
                self.fail(f"unbound variable {expr.name!r}")
            return env[expr.name]
        if isinstance(expr, Binary):
            return self.eval_binary(expr, env)
        if isinstance(expr, Attr):
            value = self.eval(expr.base, env)
            if not isinstance(value, Pose):
                self.fail(f"'.{expr.field}' needs a pose, got {type(value).__name__}")
            return getattr(value, expr.field)
        if isinstance(expr, Call):
            return self.call(expr, env)
        raise TypeError(f"not an expression: {expr!r}")

    def eval_binary(self, expr: Binary, env: dict):
        left = self.eval(expr.lhs, env)
        right = self.eval(expr.rhs, env)
        op = expr.op
        if op == "==":
            return left == right
        if op == "!=":
            return left != right
        if not (_is_number(left) and _is_number(right)):
            self.fail(f"operator {op!r} needs numeric operands")
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            if right == 0:
                self.fail("division by zero")
            return left / right
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        return left >= right

    def call(self, call: Call, env: dict):
        args = [self.eval(arg, env) for arg in call.args]
        # Resolution mirrors the checker: local defs shadow learned, which
        # would shadow core (the registry itself forbids that).
        fd = self.local_funcs.get(call.name) or self.registry.learned.get(call.name)
        if fd is not None:
            assert len(args) == len(fd.params), f"arity drift in {call.name!r}"
            self.exec_block(fd.body, dict(zip(fd.params, args)))
            return None
        if call.name not in CORE_SIGNATURES:
            raise LookupError(
                f"unresolved call {call.name!r}; the program was not static-checked"
            )
        return self.invoke_core(call, args)

    def invoke_core(self, call: Call, args: list):
        assert len(args) == len(CORE_SIGNATURES[call.name]), "arity drift"
        self.stmt_line, self.stmt_col = call.line, call.col
        if len(self.trace.steps) >= self.step_budget:
            self.fail(f"step budget of {self.step_budget} core API calls exceeded")
        if call.name in ("place_at", "move"):
            for i, value in enumerate(args):
                if not _is_number(value):
                    self.fail(
                        f"argument {i + 1} of {call.name!r} must be a number, "
                        f"got {value!r}"
                    )
        try:
            if call.name == "pick":
                self.world.pick(args[0])
                outcome = "ok"
                result = None
            elif call.name == "place_on":
                self.world.place_on(args[0])
                outcome = "ok"
                result = None
            elif call.name == "place_at":
                self.world.place_at(args[0], args[1], args[2])
                outcome = "ok"
                result = None
            elif call.name == "move":
                self.world.move_gripper(args[0], args[1], args[2])
                outcome = "ok"
                result = None
            elif call.name == "get_obj_pose":
                result = Pose(*self.world.get_obj_pose(args[0]))
                outcome = repr(tuple(result))
            else:
                result = self.world.get_obj_mass(args[0])
                outcome = repr(result)
        except ActionError as err:
            self.fail(err.message)
        self.trace.steps.append(TraceStep(call.name, tuple(args), outcome))
        return result


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def interpret(
    program: Program,
    world: WorldState,
    registry: ApiRegistry,
    step_budget: int = STEP_BUDGET,
) -> ExecutionTrace:
    """Run a statically clean program against the world, mutating it in place.

    Returns the trace; raises PolicyRuntimeError (carrying the partial trace)
    when a step fails, with the world keeping all mutations up to that step.
    """
    interp = _Interpreter(world, registry, step_budget)
    try:
        interp.run(program)
    except _Halt as halt:
        interp.trace.world_after = world.digest()
        raise PolicyRuntimeError(halt.diagnostic, interp.trace) from None
    interp.trace.world_after = world.digest()
    return interp.trace
