"""Fixed core API surface plus dynamically learned routines."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .formatter import format_program
from .nodes import (
    Comment,
    Diagnostic,
    FuncDef,
    Program,
    RegistrationError,
)
from .parser import parse

CORE_SIGNATURES: dict[str, tuple[str, ...]] = {
    "pick": ("object_name",),
    "place_on": ("object_name",),
    "place_at": ("x", "y", "z"),
    "move": ("dx", "dy", "dz"),
    "get_obj_pose": ("object_name",),
    "get_obj_mass": ("object_name",),
}

CORE_DOCS: dict[str, str] = {
    "pick": "pick(object_name): grasp the named object; the gripper must be empty",
    "place_on": "place_on(object_name): set the held object on top of the named "
                "object (inside it when the target is a cup)",
    "place_at": "place_at(x, y, z): set the held object down at the coordinates, "
                "in meters",
    "move": "move(dx, dy, dz): translate the gripper (and any held object) by "
            "the given offsets, in meters",
    "get_obj_pose": "get_obj_pose(object_name): return the object's center pose, "
                    "readable via .x .y .z",
    "get_obj_mass": "get_obj_mass(object_name): return the object's mass in "
                    "kilograms, also revealing it in observations",
}

# Argument slots that must be object-name strings / plain numbers when written
# as literals; the static checker validates these.
OBJECT_ARG_SLOTS: dict[str, tuple[int, ...]] = {
    "pick": (0,),
    "place_on": (0,),
    "get_obj_pose": (0,),
    "get_obj_mass": (0,),
}
NUMERIC_ARG_SLOTS: dict[str, tuple[int, ...]] = {
    "place_at": (0, 1, 2),
    "move": (0, 1, 2),
}


@dataclass
class ApiRegistry:
    """Core names are immutable; learned routines accumulate between episodes."""

    learned: dict[str, FuncDef] = field(default_factory=dict)
    sources: dict[str, str] = field(default_factory=dict)

    def knows(self, name: str) -> bool:
        return name in CORE_SIGNATURES or name in self.learned

    def arities(self) -> dict[str, int]:
        table = {name: len(params) for name, params in CORE_SIGNATURES.items()}
        table.update({name: len(fd.params) for name, fd in self.learned.items()})
        return table

    def doc_lines(self) -> list[str]:
        lines = [CORE_DOCS[name] for name in CORE_SIGNATURES]
        for name, fd in self.learned.items():
            lines.append(
                f"{name}({', '.join(fd.params)}): learned routine that expands "
                f"into core API calls"
            )
        return lines

    def clone(self) -> "ApiRegistry":
        return ApiRegistry(learned=dict(self.learned), sources=dict(self.sources))

    def digest(self) -> str:
        blob = json.dumps(sorted(self.sources.items()), separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def to_json(self) -> dict:
        return {
            "version": 1,
            "apis": [
                {"name": name, "source": self.sources[name]} for name in self.learned
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ApiRegistry":
        registry = cls()
        for entry in data.get("apis", []):
            register_api(registry, entry["source"])
        return registry


def register_api(registry: ApiRegistry, funcdef_source: str) -> str:
    """Validate and add one learned routine; returns its name.

    Raises ParseError on bad syntax and RegistrationError when the definition
    breaks the closed-world rules (unknown calls, collisions).
    """
    program = parse(funcdef_source)
    defs = [s for s in program.statements if not isinstance(s, Comment)]
    if len(defs) != 1 or not isinstance(defs[0], FuncDef):
        raise RegistrationError(Diagnostic(
            "check", 1, 1, "syntax",
            "expected exactly one function definition",
        ))
    fd = defs[0]
    if fd.name in CORE_SIGNATURES or fd.name in registry.learned:
        raise RegistrationError(Diagnostic(
            "check", fd.line, fd.col, "type",
            f"{fd.name!r} is already a registered API",
        ))
    # Body may call only core + previously learned names; the new name itself
    # is excluded, so learned routines can never recurse.
    from .checker import check_block  # late import: checker depends on registry

    diags = check_block(fd.body, registry.arities(), world=None)
    if diags:
        raise RegistrationError(diags[0])
    registry.learned[fd.name] = fd
    registry.sources[fd.name] = format_program(Program((fd,)))
    return fd.name
