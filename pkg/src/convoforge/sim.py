"""Discrete-event simulation of the collaborative assembly workspace.

Three areas with access permissions, items (components and tools), five
assembly steps, and a simulated clock. Robot and human actions mutate a
TaskState and advance the clock by configured durations; nothing ever reads
wall-clock time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

ACCESS_ROBOT_ONLY = "robot_only"
ACCESS_SHARED = "shared"

KIND_COMPONENT = "component"
KIND_TOOL = "tool"

WORKBENCH = "workbench"

STATUS_PENDING = "pending"
STATUS_IN_PROGRESS = "in_progress"
STATUS_DONE_CORRECT = "done_correct"
STATUS_DONE_INCORRECT = "done_incorrect"

REQUIRED_AREAS = 3
REQUIRED_STEPS = 5

# fetch/pick/assemble outcome codes
DELIVERED = "delivered"
UNAVAILABLE = "unavailable"
ACCESS_DENIED = "access_denied"
PICKED = "picked"


class TaskError(Exception):
    """Task configuration or task action failure."""


class UnknownItemError(TaskError):
    pass


class StepStateError(TaskError):
    pass


@dataclass(frozen=True)
class Area:
    name: str
    access: str


@dataclass(frozen=True)
class Item:
    name: str
    kind: str
    area: str


@dataclass(frozen=True)
class StepSpec:
    index: int
    required_components: tuple[str, ...]
    required_tool: str | None


@dataclass(frozen=True)
class ActionDurations:
    robot_fetch_s: float
    robot_deliver_s: float
    human_pick_s: float
    human_assemble_s: float
    speech_s_per_token: float

    def to_dict(self) -> dict:
        return {
            "robot_fetch_s": self.robot_fetch_s,
            "robot_deliver_s": self.robot_deliver_s,
            "human_pick_s": self.human_pick_s,
            "human_assemble_s": self.human_assemble_s,
            "speech_s_per_token": self.speech_s_per_token,
        }


@dataclass(frozen=True)
class ScheduledFault:
    after_turn: int
    kind: str  # "item_unavailable" | "robot_error"
    target: str  # item name or error code


@dataclass(frozen=True)
class TaskConfig:
    areas: tuple[Area, ...]
    items: tuple[Item, ...]
    steps: tuple[StepSpec, ...]
    durations: ActionDurations
    faults: tuple[ScheduledFault, ...] = ()

    def item(self, name: str) -> Item | None:
        for item in self.items:
            if item.name == name:
                return item
        return None

    def area(self, name: str) -> Area:
        for area in self.areas:
            if area.name == name:
                return area
        raise KeyError(name)


class SimClock:
    """Monotone simulated clock, in seconds."""

    def __init__(self, now: float = 0.0):
        if now < 0:
            raise ValueError("clock must start non-negative")
        self.now = float(now)

    def advance(self, dt: float) -> None:
        if dt < 0:
            raise ValueError("clock cannot move backwards")
        self.now += dt


@dataclass
class StepState:
    spec: StepSpec
    status: str = STATUS_PENDING


@dataclass
class FetchOutcome:
    status: str  # delivered | unavailable | access_denied
    alternative: str | None = None


@dataclass(frozen=True)
class SimEvent:
    kind: str  # "robot_error" | "item_unavailable" | "step_done"
    payload: dict[str, str] = field(default_factory=dict)


class TaskState:
    """Mutable world state for one session."""

    def __init__(self, config: TaskConfig):
        self.config = config
        self.location: dict[str, str] = {i.name: i.area for i in config.items}
        self.available: dict[str, bool] = {i.name: True for i in config.items}
        self.steps: list[StepState] = [StepState(s) for s in config.steps]

    def workbench_items(self) -> set[str]:
        return {name for name, loc in self.location.items() if loc == WORKBENCH}

    def step(self, index: int) -> StepState:
        for st in self.steps:
            if st.spec.index == index:
                return st
        raise StepStateError(f"no step with index {index}")

    def finished_steps(self) -> list[StepState]:
        return [s for s in self.steps if s.status in (STATUS_DONE_CORRECT, STATUS_DONE_INCORRECT)]

    def correct_steps(self) -> int:
        return sum(1 for s in self.steps if s.status == STATUS_DONE_CORRECT)

    def next_pending(self) -> StepState | None:
        for st in self.steps:
            if st.status in (STATUS_PENDING, STATUS_IN_PROGRESS):
                return st
        return None


def _check_durations(d: ActionDurations) -> None:
    for name, value in d.to_dict().items():
        if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
            raise TaskError(f"duration '{name}' must be strictly positive")


def _check_keys(obj: dict, allowed: set[str], where: str, optional: set[str] = frozenset()) -> None:
    for key in obj:
        if key not in allowed and key not in optional:
            raise TaskError(f"unknown key '{key}' in {where}")
    for key in allowed:
        if key not in obj:
            raise TaskError(f"missing key '{key}' in {where}")


def load_task(text: str) -> TaskConfig:
    """Parse and validate a task configuration document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TaskError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise TaskError("top-level value must be an object")
    _check_keys(doc, {"areas", "items", "steps", "durations"}, "task document", optional={"faults"})

    areas = []
    for i, a in enumerate(doc["areas"]):
        _check_keys(a, {"name", "access"}, f"area #{i}")
        if a["access"] not in (ACCESS_ROBOT_ONLY, ACCESS_SHARED):
            raise TaskError(f"area '{a['name']}': access must be robot_only or shared")
        areas.append(Area(a["name"], a["access"]))
    if len(areas) != REQUIRED_AREAS:
        raise TaskError(f"exactly {REQUIRED_AREAS} areas required, got {len(areas)}")
    if len({a.name for a in areas}) != len(areas):
        raise TaskError("duplicate area names")
    accesses = {a.access for a in areas}
    if ACCESS_ROBOT_ONLY not in accesses or ACCESS_SHARED not in accesses:
        raise TaskError("need at least one robot_only and one shared area")

    area_names = {a.name for a in areas}
    items = []
    for i, it in enumerate(doc["items"]):
        _check_keys(it, {"name", "kind", "area"}, f"item #{i}")
        if it["kind"] not in (KIND_COMPONENT, KIND_TOOL):
            raise TaskError(f"item '{it['name']}': kind must be component or tool")
        if it["area"] not in area_names:
            raise TaskError(f"item '{it['name']}' placed in unknown area '{it['area']}'")
        items.append(Item(it["name"], it["kind"], it["area"]))
    if len({i.name for i in items}) != len(items):
        raise TaskError("duplicate item names")
    item_names = {i.name for i in items}

    steps = []
    for i, s in enumerate(doc["steps"]):
        _check_keys(s, {"index", "required_components", "required_tool"}, f"step #{i}")
        index = s["index"]
        if not isinstance(index, int) or isinstance(index, bool):
            raise TaskError(f"step #{i}: index must be an integer")
        comps = tuple(s["required_components"])
        for c in comps:
            if c not in item_names:
                raise TaskError(f"step {index}: unknown required component '{c}'")
        tool = s["required_tool"]
        if tool is not None and tool not in item_names:
            raise TaskError(f"step {index}: unknown required tool '{tool}'")
        steps.append(StepSpec(index, comps, tool))
    if len(steps) != REQUIRED_STEPS:
        raise TaskError(f"exactly {REQUIRED_STEPS} steps required, got {len(steps)}")
    if sorted(s.index for s in steps) != list(range(1, REQUIRED_STEPS + 1)):
        raise TaskError(f"step indexes must be 1..{REQUIRED_STEPS}")

    d = doc["durations"]
    _check_keys(
        d,
        {"robot_fetch_s", "robot_deliver_s", "human_pick_s", "human_assemble_s", "speech_s_per_token"},
        "durations",
    )
    durations = ActionDurations(
        robot_fetch_s=d["robot_fetch_s"],
        robot_deliver_s=d["robot_deliver_s"],
        human_pick_s=d["human_pick_s"],
        human_assemble_s=d["human_assemble_s"],
        speech_s_per_token=d["speech_s_per_token"],
    )
    _check_durations(durations)

    faults = []
    for i, f in enumerate(doc.get("faults", [])):
        _check_keys(f, {"after_turn", "kind", "target"}, f"fault #{i}")
        if f["kind"] not in ("item_unavailable", "robot_error"):
            raise TaskError(f"fault #{i}: kind must be item_unavailable or robot_error")
        if f["kind"] == "item_unavailable" and f["target"] not in item_names:
            raise TaskError(f"fault #{i}: unknown item '{f['target']}'")
        if not isinstance(f["after_turn"], int) or f["after_turn"] < 0:
            raise TaskError(f"fault #{i}: after_turn must be a non-negative integer")
        faults.append(ScheduledFault(f["after_turn"], f["kind"], f["target"]))

    return TaskConfig(tuple(areas), tuple(items), tuple(steps), durations, tuple(faults))


def validate_task_against_schema(config: TaskConfig, schema) -> None:
    """Every item name must be a catalog canonical of the active schema."""
    canonicals: set[str] = set()
    for catalog in schema.catalogs:
        canonicals.update(catalog.canonicals())
    for item in config.items:
        if item.name not in canonicals:
            raise TaskError(
                f"item '{item.name}' does not match any catalog entry of schema '{schema.name}'"
            )


def _nearest_alternative(state: TaskState, wanted: Item) -> str | None:
    """Closest same-kind fetchable item by declaration-order distance."""
    items = state.config.items
    wanted_idx = items.index(wanted)
    best: tuple[int, int] | None = None
    best_name: str | None = None
    for idx, candidate in enumerate(items):
        if candidate.name == wanted.name or candidate.kind != wanted.kind:
            continue
        if not state.available[candidate.name] or state.location[candidate.name] == WORKBENCH:
            continue
        key = (abs(idx - wanted_idx), idx)
        if best is None or key < best:
            best = key
            best_name = candidate.name
    return best_name


def robot_fetch(state: TaskState, item_name: str, clock: SimClock) -> FetchOutcome:
    """Robot fetches an item from any area and delivers it to the workbench."""
    item = state.config.item(item_name)
    if item is None:
        raise UnknownItemError(f"unknown item '{item_name}'")
    if not state.available[item_name] or state.location[item_name] == WORKBENCH:
        return FetchOutcome(UNAVAILABLE, _nearest_alternative(state, item))
    state.location[item_name] = WORKBENCH
    d = state.config.durations
    clock.advance(d.robot_fetch_s + d.robot_deliver_s)
    return FetchOutcome(DELIVERED)


def human_pick(state: TaskState, item_name: str, clock: SimClock) -> str:
    """Human picks an item; allowed only from shared areas."""
    item = state.config.item(item_name)
    if item is None:
        raise UnknownItemError(f"unknown item '{item_name}'")
    loc = state.location[item_name]
    if loc != WORKBENCH and state.config.area(loc).access == ACCESS_ROBOT_ONLY:
        return ACCESS_DENIED
    if not state.available[item_name] or loc == WORKBENCH:
        return UNAVAILABLE
    state.location[item_name] = WORKBENCH
    clock.advance(state.config.durations.human_pick_s)
    return PICKED


def assemble_step(
    state: TaskState, index: int, using: set[str], clock: SimClock
) -> str:
    """Assemble one step with the named workbench items.

    Correct iff `using` covers the step's required components and tool.
    """
    step = state.step(index)
    if step.status not in (STATUS_PENDING, STATUS_IN_PROGRESS):
        raise StepStateError(f"step {index} is already finished")
    for name in using:
        if state.config.item(name) is None:
            raise UnknownItemError(f"unknown item '{name}'")
        if state.location[name] != WORKBENCH:
            raise TaskError(f"item '{name}' is not on the workbench")
    step.status = STATUS_IN_PROGRESS
    required = set(step.spec.required_components)
    if step.spec.required_tool is not None:
        required.add(step.spec.required_tool)
    correct = required <= using
    clock.advance(state.config.durations.human_assemble_s)
    step.status = STATUS_DONE_CORRECT if correct else STATUS_DONE_INCORRECT
    return step.status


def inject_fault(state: TaskState, kind: str, target: str, clock: SimClock) -> SimEvent:
    """Mutate the world (item loss) or raise a robot fault event."""
    if kind == "item_unavailable":
        if state.config.item(target) is None:
            raise UnknownItemError(f"unknown item '{target}'")
        state.available[target] = False
        return SimEvent("item_unavailable", {"item": target})
    if kind == "robot_error":
        return SimEvent("robot_error", {"code": target})
    raise TaskError(f"unknown fault kind '{kind}'")


def describe_items(names: list[str]) -> str:
    """Human-readable list: "the gear and the wrench"."""
    phrases = [f"the {n}" for n in names]
    if not phrases:
        return "nothing else"
    if len(phrases) == 1:
        return phrases[0]
    return ", ".join(phrases[:-1]) + " and " + phrases[-1]


def step_requirements(spec: StepSpec) -> list[str]:
    names = list(spec.required_components)
    if spec.required_tool is not None:
        names.append(spec.required_tool)
    return names
