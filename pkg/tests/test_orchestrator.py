import logging

import pytest

from convoforge import orchestrator, sim
from convoforge.orchestrator import (
    HandlerTableError,
    check_handler_table,
    handle_api,
    milestone_event,
    on_sim_event,
)
from convoforge.schema import ApiDef, Route, build_schema


@pytest.fixture
def state(task_config):
    return sim.TaskState(task_config)


@pytest.fixture
def clock():
    return sim.SimClock()


def test_handler_table_totality(schema):
    check_handler_table(schema)  # shipped schema resolves completely


def test_handler_table_rejects_unknown_api(schema):
    bogus = ApiDef(
        "teleport_item",
        ("item",),
        (("ok", Route(respond="zap {item}")), ("error", Route(respond="no"))),
    )
    broken = build_schema(
        schema.name, list(schema.catalogs), list(schema.dialogues), list(schema.apis) + [bogus]
    )
    with pytest.raises(HandlerTableError, match="teleport_item"):
        check_handler_table(broken)


def test_payload_sufficiency_check(schema):
    bogus = ApiDef(
        "query_status2",
        (),
        (
            ("ok", Route(respond="status {mystery_var}")),
            ("error", Route(respond="no")),
        ),
    )
    broken = build_schema(
        schema.name, list(schema.catalogs), list(schema.dialogues), list(schema.apis) + [bogus]
    )
    with pytest.raises(HandlerTableError, match="mystery_var"):
        # reuse the query_status handler for the alias to isolate the check
        orchestrator._HANDLERS["query_status2"] = orchestrator._HANDLERS["query_status"]
        try:
            check_handler_table(broken)
        finally:
            del orchestrator._HANDLERS["query_status2"]


def test_fetch_item_nominal(state, clock):
    result = handle_api("fetch_item", {"item": "gear"}, state, clock)
    assert result.status == "ok"
    assert result.payload == {"item": "gear"}
    assert clock.now == 12.0


def test_fetch_item_unavailable_with_alternative(state, clock):
    sim.inject_fault(state, "item_unavailable", "gear", clock)
    result = handle_api("fetch_item", {"item": "gear"}, state, clock)
    assert result.status == "unavailable"
    assert result.payload == {"item": "gear", "alternative": "spare gear"}


def test_fetch_item_unknown(state, clock):
    result = handle_api("fetch_item", {"item": "unicorn"}, state, clock)
    assert result.status == "error"


def test_unregistered_api_is_error_not_crash(state, clock):
    result = handle_api("warp_drive", {}, state, clock)
    assert result.status == "error"


def test_query_status_recomputed_by_independent_scan(state, clock):
    for name in ("base plate", "bracket", "screwdriver"):
        sim.robot_fetch(state, name, clock)
    sim.assemble_step(state, 1, {"base plate", "screwdriver"}, clock)
    sim.assemble_step(state, 2, {"bracket", "screwdriver"}, clock)
    result = handle_api("query_status", {}, state, clock)
    assert result.status == "ok"
    # independent scan of step statuses
    done = sum(1 for s in state.steps if s.status.startswith("done"))
    pending = [s.spec.index for s in state.steps if s.status == "pending"]
    assert result.payload["done"] == str(done) == "2"
    assert result.payload["next"] == f"step {pending[0]}"
    assert result.payload["suggestion"] == "the gear and the wrench"


def test_query_status_when_all_done(state, clock):
    for step in state.steps:
        step.status = sim.STATUS_DONE_CORRECT
    result = handle_api("query_status", {}, state, clock)
    assert result.payload["done"] == "5"
    assert result.payload["next"] == "nothing"


def test_report_done_word_and_digit(state, clock):
    sim.robot_fetch(state, "base plate", clock)
    sim.robot_fetch(state, "screwdriver", clock)
    result = handle_api("report_done", {"step": "one"}, state, clock)
    assert result.status == "ok"
    assert state.steps[0].status == sim.STATUS_DONE_CORRECT
    sim.robot_fetch(state, "bracket", clock)
    result = handle_api("report_done", {"step": "2"}, state, clock)
    assert result.status == "ok"


def test_report_done_invalid_step(state, clock):
    assert handle_api("report_done", {"step": "nine"}, state, clock).status == "error"
    assert handle_api("report_done", {"step": "soon"}, state, clock).status == "error"


def test_report_done_already_finished(state, clock):
    handle_api("report_done", {"step": "1"}, state, clock)
    assert handle_api("report_done", {"step": "1"}, state, clock).status == "error"


def test_confirm_alternative_yes_fetches(state, clock):
    result = handle_api(
        "confirm_alternative", {"alternative": "spare gear", "decision": "yes"}, state, clock
    )
    assert result.status == "ok"
    assert result.payload == {"item": "spare gear"}
    assert state.location["spare gear"] == sim.WORKBENCH


def test_confirm_alternative_no_declines(state, clock):
    result = handle_api(
        "confirm_alternative", {"alternative": "spare gear", "decision": "no"}, state, clock
    )
    assert result.status == "declined"
    assert state.location["spare gear"] == "A1"


def test_request_assistance(state, clock):
    result = handle_api("request_assistance", {}, state, clock)
    assert result.status == "ok"
    assert "detail" in result.payload


def test_on_sim_event_routes_robot_error():
    event = sim.SimEvent("robot_error", {"code": "GRIPPER_FAULT"})
    assert on_sim_event(event, session_active=True) == (
        "ReportIssue",
        {"code": "GRIPPER_FAULT"},
    )


def test_on_sim_event_routes_milestone(state, clock):
    sim.robot_fetch(state, "base plate", clock)
    sim.robot_fetch(state, "screwdriver", clock)
    sim.assemble_step(state, 1, {"base plate", "screwdriver"}, clock)
    event = milestone_event(state, 1)
    routed = on_sim_event(event, session_active=True)
    assert routed is not None
    dialogue, bindings = routed
    assert dialogue == "OfferSuggestion"
    assert bindings["step"] == "1"
    # recomputed from the task state: next pending is step 2
    assert bindings["suggestion"] == "the bracket and the screwdriver"


def test_no_milestone_after_final_step(state, clock):
    for step in state.steps:
        step.status = sim.STATUS_DONE_CORRECT
    assert milestone_event(state, 5) is None


def test_event_after_session_end_dropped_with_warning(caplog):
    event = sim.SimEvent("robot_error", {"code": "X"})
    with caplog.at_level(logging.WARNING):
        assert on_sim_event(event, session_active=False) is None
    assert any("session ended" in r.message for r in caplog.records)


def test_item_unavailable_event_is_silent():
    event = sim.SimEvent("item_unavailable", {"item": "gear"})
    assert on_sim_event(event, session_active=True) is None
