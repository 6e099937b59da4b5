"""Back-end handlers binding dialogue API calls to simulator actions.

Each handler is pure given (args, task state, clock): it performs the sim
action, advances the clock, and returns a status plus a string payload that
feeds the response templates. Handlers also append (action, detail, dt)
records to an optional trace list so transcripts can account for durations.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from . import sim
from .schema import DialogueSchema

logger = logging.getLogger(__name__)

DIALOGUE_REPORT_ISSUE = "ReportIssue"
DIALOGUE_OFFER_SUGGESTION = "OfferSuggestion"

_WORD_NUMBERS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
}


@dataclass
class ApiResult:
    status: str
    payload: dict[str, str] = field(default_factory=dict)


def _parse_step(value: str) -> int | None:
    value = value.strip().casefold()
    if value in _WORD_NUMBERS:
        return _WORD_NUMBERS[value]
    m = re.fullmatch(r"(?:step\s+)?(\d+)", value)
    if m:
        return int(m.group(1))
    return None


def _trace(trace: list | None, action: str, detail: dict, dt: float) -> None:
    if trace is not None:
        trace.append({"action": action, "detail": detail, "dt": dt})


def _handle_fetch_item(args, state: sim.TaskState, clock: sim.SimClock, trace) -> ApiResult:
    item = args["item"]
    before = clock.now
    try:
        outcome = sim.robot_fetch(state, item, clock)
    except sim.UnknownItemError:
        return ApiResult("error", {"item": item})
    if outcome.status == sim.DELIVERED:
        _trace(trace, "robot_fetch", {"item": item}, clock.now - before)
        return ApiResult("ok", {"item": item})
    if outcome.alternative is not None:
        return ApiResult("unavailable", {"item": item, "alternative": outcome.alternative})
    return ApiResult("error", {"item": item})


def _handle_confirm_alternative(args, state, clock, trace) -> ApiResult:
    alternative = args["alternative"]
    if args["decision"] != "yes":
        return ApiResult("declined", {"alternative": alternative})
    before = clock.now
    try:
        outcome = sim.robot_fetch(state, alternative, clock)
    except sim.UnknownItemError:
        return ApiResult("error", {"alternative": alternative})
    if outcome.status == sim.DELIVERED:
        _trace(trace, "robot_fetch", {"item": alternative}, clock.now - before)
        return ApiResult("ok", {"item": alternative})
    return ApiResult("error", {"alternative": alternative})


def _handle_request_assistance(args, state, clock, trace) -> ApiResult:
    return ApiResult(
        "ok", {"detail": "I will hold the assembly steady while you work on it."}
    )


def _status_payload(state: sim.TaskState) -> dict[str, str]:
    done = len(state.finished_steps())
    nxt = state.next_pending()
    if nxt is None:
        return {"done": str(done), "next": "nothing", "suggestion": "no more parts"}
    return {
        "done": str(done),
        "next": f"step {nxt.spec.index}",
        "suggestion": sim.describe_items(sim.step_requirements(nxt.spec)),
    }


def _handle_query_status(args, state, clock, trace) -> ApiResult:
    return ApiResult("ok", _status_payload(state))


def _handle_report_done(args, state, clock, trace) -> ApiResult:
    raw = args["step"]
    index = _parse_step(raw)
    if index is None or not 1 <= index <= sim.REQUIRED_STEPS:
        return ApiResult("error", {"step": raw})
    before = clock.now
    using = state.workbench_items()
    try:
        result = sim.assemble_step(state, index, using, clock)
    except sim.TaskError:
        return ApiResult("error", {"step": raw})
    _trace(
        trace,
        "assemble",
        {"step": index, "using": sorted(using), "result": result},
        clock.now - before,
    )
    return ApiResult("ok", {"step": raw})


# handler descriptor: callable + the payload fields it guarantees per status
_HANDLERS = {
    "fetch_item": (
        _handle_fetch_item,
        {"ok": {"item"}, "unavailable": {"item", "alternative"}, "error": {"item"}},
    ),
    "confirm_alternative": (
        _handle_confirm_alternative,
        {"ok": {"item"}, "declined": {"alternative"}, "error": {"alternative"}},
    ),
    "request_assistance": (_handle_request_assistance, {"ok": {"detail"}, "error": set()}),
    "query_status": (
        _handle_query_status,
        {"ok": {"done", "next", "suggestion"}, "error": set()},
    ),
    "report_done": (_handle_report_done, {"ok": {"step"}, "error": {"step"}}),
}

_TEMPLATE_VAR = re.compile(r"\{(\w+)\}")


class HandlerTableError(Exception):
    pass


def check_handler_table(schema: DialogueSchema) -> None:
    """Startup checks: every schema API has a handler, and every respond
    template's variables are covered by the payload its handler emits for
    that status."""
    for api in schema.apis:
        if api.name not in _HANDLERS:
            raise HandlerTableError(f"api '{api.name}' has no registered handler")
        _, payload_fields = _HANDLERS[api.name]
        for status, route in api.result_routes:
            if route.respond is None:
                continue
            declared = payload_fields.get(status, payload_fields.get("error", set()))
            for var in _TEMPLATE_VAR.findall(route.respond):
                if var not in declared:
                    raise HandlerTableError(
                        f"api '{api.name}' status '{status}': template variable "
                        f"'{var}' is not in the handler payload {sorted(declared)}"
                    )


def handle_api(
    api: str,
    args: dict[str, str],
    state: sim.TaskState,
    clock: sim.SimClock,
    trace: list | None = None,
) -> ApiResult:
    """Dispatch one API call; unregistered names yield an error status."""
    entry = _HANDLERS.get(api)
    if entry is None:
        logger.warning("no handler for api '%s'", api)
        return ApiResult("error", {})
    handler, _ = entry
    return handler(args, state, clock, trace)


def on_sim_event(event: sim.SimEvent, session_active: bool) -> tuple[str, dict[str, str]] | None:
    """Map a simulator event to a robot-initiated dialogue invocation.

    Returns (dialogue name, bindings), or None when the event carries no
    conversational content or the session has ended.
    """
    if not session_active:
        logger.warning("dropping sim event %s: session ended", event.kind)
        return None
    if event.kind == "robot_error":
        return DIALOGUE_REPORT_ISSUE, {"code": event.payload["code"]}
    if event.kind == "step_done":
        return DIALOGUE_OFFER_SUGGESTION, dict(event.payload)
    return None


def milestone_event(state: sim.TaskState, step_index: int) -> sim.SimEvent | None:
    """Step-completion milestone: suggest the next pending step's needs."""
    nxt = state.next_pending()
    if nxt is None:
        return None
    return sim.SimEvent(
        "step_done",
        {
            "step": str(step_index),
            "suggestion": sim.describe_items(sim.step_requirements(nxt.spec)),
        },
    )
