"""Deterministic kinematic tabletop world: objects, gripper, sensors, actions."""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field, replace

Vec3 = tuple[float, float, float]

SHAPES = ("cube", "cylinder", "triangle", "cup")
BLOCK_SHAPES = ("cube", "cylinder", "triangle")
COLORS = ("red", "green", "blue", "yellow", "purple", "orange")
SCENARIOS = ("observable", "partial")

BLOCK_HEIGHT = 0.04
CUP_HEIGHT = 0.10
CUP_MASS = 0.25

# Axis-aligned workspace box, meters: ((xmin, xmax), (ymin, ymax), (zmin, zmax)).
WORKSPACE: tuple[tuple[float, float], ...] = ((0.0, 0.6), (-0.3, 0.3), (0.0, 0.4))
GRIPPER_HOME: Vec3 = (0.30, 0.0, 0.30)

# Spawn grid: cell pitch 0.12 m keeps every candidate strictly inside bounds
# and any two cells farther apart than the footprint tolerance.
_GRID_X = (0.06, 0.18, 0.30, 0.42, 0.54)
_GRID_Y = (-0.24, -0.12, 0.0, 0.12, 0.24)

_EPS = 1e-9


class ActionError(Exception):
    """A rejected action. The message names the offending object or coordinate
    so it can be fed back verbatim to a code-writing model."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind
        self.message = message


@dataclass
class ObjectState:
    name: str
    shape: str
    color: str
    height: float
    mass: float
    position: Vec3
    fixed: bool = False
    mass_visible: bool = True

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.color not in COLORS:
            raise ValueError(f"unknown color {self.color!r}")
        if self.height <= 0:
            raise ValueError("height must be positive")
        if self.mass <= 0:
            raise ValueError("mass must be positive")


@dataclass
class GripperState:
    position: Vec3 = GRIPPER_HOME
    holding: str | None = None


@dataclass
class GoalState:
    """Target positions for scoring. Names must exist in the paired world."""

    object_targets: dict[str, Vec3] = field(default_factory=dict)
    gripper_target: Vec3 | None = None
    require_empty_hand: bool = False


@dataclass
class WorldState:
    objects: dict[str, ObjectState]
    gripper: GripperState = field(default_factory=GripperState)
    bounds: tuple[tuple[float, float], ...] = WORKSPACE
    observability: str = "observable"
    sensor_log: list[tuple[str, str]] = field(default_factory=list)

    # -- queries ---------------------------------------------------------

    def movable_blocks(self) -> list[ObjectState]:
        return [o for o in self.objects.values() if o.shape != "cup" and not o.fixed]

    def cups(self) -> list[ObjectState]:
        return [o for o in self.objects.values() if o.shape == "cup"]

    def in_bounds(self, p: Vec3) -> bool:
        return all(lo - _EPS <= c <= hi + _EPS for c, (lo, hi) in zip(p, self.bounds))

    def _require(self, name: str) -> ObjectState:
        obj = self.objects.get(name)
        if obj is None:
            raise ActionError(
                "unknown_object",
                f"there is no object named {name!r} in the environment",
            )
        return obj

    def _supported_object(self, base: ObjectState) -> ObjectState | None:
        """Return an object resting in base's footprint column above it, if any."""
        for other in self.objects.values():
            if other.name == base.name or other.name == self.gripper.holding:
                continue
            if (
                abs(other.position[0] - base.position[0]) <= _EPS
                and abs(other.position[1] - base.position[1]) <= _EPS
                and other.position[2] > base.position[2] + _EPS
            ):
                return other
        return None

    def _occupant_at(self, p: Vec3, ignore: set[str]) -> ObjectState | None:
        for other in self.objects.values():
            if other.name in ignore:
                continue
            if all(abs(oc - pc) <= _EPS for oc, pc in zip(other.position, p)):
                return other
        return None

    # -- actions (atomic: every check precedes any mutation) --------------

    def pick(self, name: str) -> None:
        obj = self._require(name)
        if self.gripper.holding is not None:
            raise ActionError(
                "already_holding",
                f"cannot pick {name!r}: the gripper is already holding "
                f"{self.gripper.holding!r}",
            )
        if obj.fixed:
            raise ActionError("object_fixed", f"{name!r} is fixed and cannot be picked")
        supported = self._supported_object(obj)
        if supported is not None:
            raise ActionError(
                "unstable_grasp",
                f"cannot pick {name!r}: {supported.name!r} is stacked on it",
            )
        self.gripper.holding = name
        self.gripper.position = obj.position

    def place_on(self, name: str) -> None:
        held_name = self.gripper.holding
        if held_name is None:
            raise ActionError("hand_empty", "cannot place: the gripper holds nothing")
        base = self._require(name)
        if name == held_name:
            raise ActionError(
                "occupied_target", f"cannot place {name!r} onto itself"
            )
        held = self.objects[held_name]
        if base.shape == "cup":
            # Containment: object centered on the cup, at the rim height.
            target = (
                base.position[0],
                base.position[1],
                base.position[2] + base.height / 2,
            )
        else:
            target = (
                base.position[0],
                base.position[1],
                base.position[2] + (base.height + held.height) / 2,
            )
        if not self.in_bounds(target):
            raise ActionError(
                "out_of_bounds",
                f"placing on {name!r} would put {held_name!r} at "
                f"{_fmt_vec(target)}, outside the workspace",
            )
        occupant = self._occupant_at(target, ignore={held_name, name})
        if occupant is not None:
            raise ActionError(
                "occupied_target",
                f"the top of {name!r} is already occupied by {occupant.name!r}",
            )
        held.position = target
        self.gripper.position = target
        self.gripper.holding = None

    def place_at(self, x: float, y: float, z: float) -> None:
        held_name = self.gripper.holding
        if held_name is None:
            raise ActionError("hand_empty", "cannot place: the gripper holds nothing")
        target = (x, y, z)
        if not self.in_bounds(target):
            raise ActionError(
                "out_of_bounds", f"{_fmt_vec(target)} is outside the workspace"
            )
        occupant = self._occupant_at(target, ignore={held_name})
        if occupant is not None:
            raise ActionError(
                "occupied_target",
                f"{_fmt_vec(target)} is already occupied by {occupant.name!r}",
            )
        self.objects[held_name].position = target
        self.gripper.position = target
        self.gripper.holding = None

    def move_gripper(self, dx: float, dy: float, dz: float) -> None:
        p = self.gripper.position
        target = (p[0] + dx, p[1] + dy, p[2] + dz)
        if not self.in_bounds(target):
            raise ActionError(
                "out_of_bounds",
                f"moving the gripper to {_fmt_vec(target)} leaves the workspace",
            )
        self.gripper.position = target
        if self.gripper.holding is not None:
            self.objects[self.gripper.holding].position = target

    # -- sensors -----------------------------------------------------------

    def get_obj_pose(self, name: str) -> Vec3:
        obj = self._require(name)
        self.sensor_log.append(("pose", name))
        return obj.position

    def get_obj_mass(self, name: str) -> float:
        obj = self._require(name)
        obj.mass_visible = True
        self.sensor_log.append(("mass", name))
        return obj.mass

    # -- rendering / identity ----------------------------------------------

    def observe(self) -> str:
        (x0, x1), (y0, y1), (z0, z1) = self.bounds
        lines = [
            f"workspace bounds: x [{x0:.3f}, {x1:.3f}], y [{y0:.3f}, {y1:.3f}], "
            f"z [{z0:.3f}, {z1:.3f}] meters"
        ]
        if self.observability == "partial":
            lines.append(
                "note: some masses are hidden; call get_obj_mass(name) to measure them"
            )
        lines.append("objects:")
        for name in sorted(self.objects):
            obj = self.objects[name]
            entry = (
                f"  {name}: {obj.shape}, {obj.color}, "
                f"position {_fmt_vec(obj.position)}"
            )
            if obj.mass_visible:
                entry += f", mass {obj.mass:.3f} kg"
            if obj.fixed:
                entry += ", fixed in place"
            lines.append(entry)
        held = self.gripper.holding if self.gripper.holding else "nothing"
        lines.append(
            f"gripper: position {_fmt_vec(self.gripper.position)}, holding {held}"
        )
        return "\n".join(lines)

    def clone(self) -> WorldState:
        return WorldState(
            objects={n: replace(o) for n, o in self.objects.items()},
            gripper=replace(self.gripper),
            bounds=self.bounds,
            observability=self.observability,
            sensor_log=list(self.sensor_log),
        )

    def digest(self) -> str:
        state = {
            "objects": {
                n: [o.shape, o.color, o.height, o.mass, list(o.position), o.fixed,
                    o.mass_visible]
                for n, o in sorted(self.objects.items())
            },
            "gripper": [list(self.gripper.position), self.gripper.holding],
            "bounds": [list(b) for b in self.bounds],
            "observability": self.observability,
            "sensor_log": [list(e) for e in self.sensor_log],
        }
        blob = json.dumps(state, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _fmt_vec(p: Vec3) -> str:
    return f"({p[0]:.3f}, {p[1]:.3f}, {p[2]:.3f})"


def spawn_world(scenario: str, seed: int) -> WorldState:
    """Build the scenario's object set at seed-determined grid positions.

    observable: 4 movable blocks (distinct colors) + 2 cups, all masses visible.
    partial: 3 movable blocks of distinct hidden masses + 1 fixed block + 2 cups.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"scenario must be one of {SCENARIOS}, got {scenario!r}")
    rng = random.Random(seed)
    cells = [(x, y) for x in _GRID_X for y in _GRID_Y]
    spots = rng.sample(cells, 6)
    objects: dict[str, ObjectState] = {}

    def add(obj: ObjectState) -> None:
        objects[obj.name] = obj

    if scenario == "observable":
        block_colors = rng.sample(COLORS, 4)
        shapes = rng.sample(BLOCK_SHAPES, 3)
        shapes.append(rng.choice(BLOCK_SHAPES))
        rng.shuffle(shapes)
        for i, (color, shape) in enumerate(zip(block_colors, shapes)):
            x, y = spots[i]
            add(ObjectState(
                name=f"{color}_block",
                shape=shape,
                color=color,
                height=BLOCK_HEIGHT,
                mass=round(rng.uniform(0.1, 0.9), 3),
                position=(x, y, BLOCK_HEIGHT / 2),
            ))
    else:
        block_colors = rng.sample(COLORS, 4)
        masses = rng.sample([round(0.05 * i, 2) for i in range(2, 19)], 3)
        for i, color in enumerate(block_colors[:3]):
            x, y = spots[i]
            add(ObjectState(
                name=f"{color}_block",
                shape=rng.choice(BLOCK_SHAPES),
                color=color,
                height=BLOCK_HEIGHT,
                mass=masses[i],
                position=(x, y, BLOCK_HEIGHT / 2),
                mass_visible=False,
            ))
        x, y = spots[3]
        add(ObjectState(
            name=f"{block_colors[3]}_block",
            shape=rng.choice(BLOCK_SHAPES),
            color=block_colors[3],
            height=BLOCK_HEIGHT,
            mass=2.0,
            position=(x, y, BLOCK_HEIGHT / 2),
            fixed=True,
        ))

    cup_colors = rng.sample(COLORS, 2)
    for i, color in enumerate(cup_colors):
        x, y = spots[4 + i]
        add(ObjectState(
            name=f"{color}_cup",
            shape="cup",
            color=color,
            height=CUP_HEIGHT,
            mass=CUP_MASS,
            position=(x, y, CUP_HEIGHT / 2),
        ))

    return WorldState(objects=objects, observability=scenario)
