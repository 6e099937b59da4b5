"""Multi-turn conversation engine.

State transitions are pure: each operation takes a state value and returns
a new one together with exactly one robot action. Sessions never share data,
and timestamps always come from the caller's simulated clock.

Phases: awaiting_user (free for input, with or without an active dialogue),
eliciting (a required slot is being asked for), awaiting_api (a dispatched
API call is outstanding), ended. `idle` is accepted as a synonym of a fresh
awaiting_user state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .matching import match_utterance, scan_catalog_value
from .schema import DialogueSchema, normalize, render_template

PHASE_IDLE = "idle"
PHASE_AWAITING_USER = "awaiting_user"
PHASE_ELICITING = "eliciting"
PHASE_AWAITING_API = "awaiting_api"
PHASE_ENDED = "ended"

USER = "user"
ROBOT = "robot"

# Fallback texts for sessions where no dialogue is active; a dialogue's own
# on_no_match takes precedence once one is active.
DEFAULT_NO_MATCH = "Sorry, I did not understand that."
GIVE_UP_TEXT = "Sorry, I still did not understand. Let us start over."

MAX_NO_MATCH = 2


class ProtocolError(Exception):
    """An operation was invoked in a phase that does not permit it."""


class BusyError(Exception):
    """A robot-initiated dialogue cannot start right now; retry later."""


@dataclass(frozen=True)
class Respond:
    text: str


@dataclass(frozen=True)
class Elicit:
    slot: str
    prompt: str


@dataclass(frozen=True)
class ApiCall:
    api: str
    args: dict[str, str]


@dataclass(frozen=True)
class EndDialogue:
    text: str


RobotAction = Respond | Elicit | ApiCall | EndDialogue


def action_text(action: RobotAction) -> str:
    """The spoken text of an action; API calls are silent."""
    if isinstance(action, (Respond, EndDialogue)):
        return action.text
    if isinstance(action, Elicit):
        return action.prompt
    return ""


@dataclass(frozen=True)
class Turn:
    speaker: str
    content: str | RobotAction  # user turns carry text, robot turns an action
    at: float

    def spoken(self) -> str:
        if isinstance(self.content, str):
            return self.content
        return action_text(self.content)


@dataclass(frozen=True)
class ConversationState:
    session_id: str
    schema: DialogueSchema
    phase: str = PHASE_AWAITING_USER
    active: str | None = None
    bindings: dict[str, str] = None  # type: ignore[assignment]
    elicit_slot: str | None = None
    pending_api: str | None = None
    history: tuple[Turn, ...] = ()
    no_match_count: int = 0

    def __post_init__(self):
        if self.bindings is None:
            object.__setattr__(self, "bindings", {})

    def last_turn(self) -> Turn | None:
        return self.history[-1] if self.history else None


def start_session(schema: DialogueSchema, session_id: str) -> ConversationState:
    if not session_id:
        raise ValueError("session_id must be non-empty")
    return ConversationState(session_id=session_id, schema=schema)


def _append(state: ConversationState, turn: Turn) -> ConversationState:
    last = state.last_turn()
    at = turn.at
    if last is not None and at < last.at:
        at = last.at  # clamp: timestamps are non-decreasing along history
    return replace(state, history=state.history + (Turn(turn.speaker, turn.content, at),))


def _no_match_text(state: ConversationState) -> str:
    if state.active is not None:
        return state.schema.dialogue(state.active).responses.on_no_match
    return DEFAULT_NO_MATCH


def _first_missing_slot(state: ConversationState) -> str | None:
    dialogue = state.schema.dialogue(state.active)
    for slot in dialogue.slots:
        if slot.required and slot.name not in state.bindings:
            return slot.name
    return None


def _advance_user(state: ConversationState, now: float) -> tuple[ConversationState, RobotAction]:
    """Continue the active dialogue after a user contribution filled slots."""
    dialogue = state.schema.dialogue(state.active)
    missing = _first_missing_slot(state)
    if missing is not None:
        slot = dialogue.slot(missing)
        action = Elicit(missing, render_template(slot.elicit_prompt, state.bindings))
        state = replace(state, phase=PHASE_ELICITING, elicit_slot=missing)
        state = _append(state, Turn(ROBOT, action, now))
        return state, action
    if dialogue.api is not None:
        api = state.schema.api(dialogue.api)
        args = {name: state.bindings[name] for name in api.args}
        action = ApiCall(api.name, args)
        # the API call is not a spoken turn; the result's action will be
        state = replace(
            state, phase=PHASE_AWAITING_API, elicit_slot=None, pending_api=api.name
        )
        return state, action
    action = EndDialogue(render_template(dialogue.responses.on_complete, state.bindings))
    state = _append(state, Turn(ROBOT, action, now))
    state = _finish_dialogue(state)
    return state, action


def _activate_robot(
    state: ConversationState, dialogue_name: str, bindings: dict[str, str], now: float
) -> tuple[ConversationState, RobotAction]:
    """Activate a dialogue on the robot's initiative (event or trigger route).

    Missing required slots are elicited; a complete dialogue yields a Respond
    and stays active so the user's reply is matched in its context. APIs are
    never fired from activation alone.
    """
    dialogue = state.schema.dialogue(dialogue_name)
    known = {k: v for k, v in bindings.items() if dialogue.slot(k) is not None}
    state = replace(state, active=dialogue_name, bindings=known, no_match_count=0)
    missing = _first_missing_slot(state)
    if missing is not None:
        slot = dialogue.slot(missing)
        action: RobotAction = Elicit(missing, render_template(slot.elicit_prompt, known))
        state = replace(state, phase=PHASE_ELICITING, elicit_slot=missing)
    else:
        action = Respond(render_template(dialogue.responses.on_complete, known))
        state = replace(state, phase=PHASE_AWAITING_USER, elicit_slot=None)
    state = _append(state, Turn(ROBOT, action, now))
    return state, action


def _finish_dialogue(state: ConversationState) -> ConversationState:
    return replace(
        state,
        phase=PHASE_AWAITING_USER,
        active=None,
        bindings={},
        elicit_slot=None,
        pending_api=None,
        no_match_count=0,
    )


def _handle_no_match(
    state: ConversationState, now: float
) -> tuple[ConversationState, RobotAction]:
    count = state.no_match_count + 1
    if count >= MAX_NO_MATCH:
        action: RobotAction = EndDialogue(GIVE_UP_TEXT)
        state = _append(state, Turn(ROBOT, action, now))
        state = _finish_dialogue(state)
        return state, action
    action = Respond(_no_match_text(state))
    state = replace(state, no_match_count=count)
    state = _append(state, Turn(ROBOT, action, now))
    return state, action


def user_turn(
    state: ConversationState, text: str, now: float
) -> tuple[ConversationState, RobotAction]:
    """Process one user utterance and produce exactly one robot action."""
    if state.phase not in (PHASE_AWAITING_USER, PHASE_ELICITING, PHASE_IDLE):
        raise ProtocolError(f"user_turn not allowed in phase '{state.phase}'")
    state = _append(state, Turn(USER, text, now))

    if state.phase == PHASE_ELICITING:
        dialogue = state.schema.dialogue(state.active)
        slot = dialogue.slot(state.elicit_slot)
        tokens = normalize(text)
        if slot.catalog_name is not None:
            value = scan_catalog_value(state.schema, slot.catalog_name, tokens)
        else:
            value = " ".join(tokens) if tokens else None
        if value is None:
            return _handle_no_match(state, now)
        bindings = {**state.bindings, slot.name: value}
        state = replace(
            state,
            phase=PHASE_AWAITING_USER,
            elicit_slot=None,
            bindings=bindings,
            no_match_count=0,
        )
        return _advance_user(state, now)

    result = match_utterance(state.schema, text, context=state.active)
    if result is None:
        return _handle_no_match(state, now)
    if result.dialogue == state.active:
        bindings = {**state.bindings, **result.bindings}
    else:
        bindings = dict(result.bindings)
    state = replace(
        state, active=result.dialogue, bindings=bindings, no_match_count=0
    )
    return _advance_user(state, now)


def apply_api_result(
    state: ConversationState,
    status: str,
    payload: dict[str, str],
    now: float | None = None,
) -> tuple[ConversationState, RobotAction]:
    """Route an API result: respond (ending the dialogue) or trigger another."""
    if state.phase != PHASE_AWAITING_API:
        raise ProtocolError(f"apply_api_result not allowed in phase '{state.phase}'")
    if now is None:
        last = state.last_turn()
        now = last.at if last is not None else 0.0
    api = state.schema.api(state.pending_api)
    route = api.route_for(status)
    if route.respond is not None:
        action = EndDialogue(render_template(route.respond, payload))
        state = _append(state, Turn(ROBOT, action, now))
        state = _finish_dialogue(state)
        return state, action
    state = _finish_dialogue(state)
    return _activate_robot(state, route.trigger, dict(payload), now)


def initiate_dialogue(
    state: ConversationState,
    dialogue_name: str,
    bindings: dict[str, str],
    now: float,
) -> tuple[ConversationState, RobotAction]:
    """Open a robot-initiated dialogue (error report, suggestion).

    Permitted only when the engine is quiet: awaiting user input with the
    previous dialogue fully closed (or no history at all). Anything else
    raises BusyError so the caller can defer the event.
    """
    if state.phase not in (PHASE_AWAITING_USER, PHASE_IDLE):
        raise BusyError(f"cannot initiate in phase '{state.phase}'")
    if not state.schema.has_dialogue(dialogue_name):
        raise ValueError(f"unknown dialogue '{dialogue_name}'")
    last = state.last_turn()
    if last is not None and not (
        last.speaker == ROBOT and isinstance(last.content, EndDialogue)
    ):
        # robot turns may only pile up right after an EndDialogue; anywhere
        # else the initiation must wait for the conversation to settle
        raise BusyError("conversation not settled; initiation deferred")
    return _activate_robot(state, dialogue_name, bindings, now)


def end_session(state: ConversationState) -> ConversationState:
    return replace(state, phase=PHASE_ENDED)
