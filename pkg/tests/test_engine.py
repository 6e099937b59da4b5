import json

import pytest

from convoforge import engine
from convoforge.engine import (
    ApiCall,
    BusyError,
    Elicit,
    EndDialogue,
    ProtocolError,
    Respond,
    apply_api_result,
    initiate_dialogue,
    start_session,
    user_turn,
)


def drive(state, step):
    if step["op"] == "user_turn":
        return user_turn(state, step["input"], step["now"])
    if step["op"] == "apply_api_result":
        return apply_api_result(state, step["status"], step["payload"], now=step["now"])
    raise AssertionError(step["op"])


def check(state, action, expect):
    assert type(action).__name__ == expect["action"]
    if "text" in expect:
        assert engine.action_text(action) == expect["text"]
    if "api" in expect:
        assert action.api == expect["api"]
    if "args" in expect:
        assert action.args == expect["args"]
    if "slot" in expect:
        assert action.slot == expect["slot"]
    if "phase" in expect:
        assert state.phase == expect["phase"]
    if "active" in expect:
        assert state.active == expect["active"]
    if "bindings" in expect:
        for key, value in expect["bindings"].items():
            assert state.bindings.get(key) == value
    if "no_match_count" in expect:
        assert state.no_match_count == expect["no_match_count"]
    if "history_len" in expect:
        assert len(state.history) == expect["history_len"]


@pytest.mark.parametrize("fixture", ["no_match_twice.json", "trigger_alternative.json"])
def test_golden_traces(schema, fixtures_dir, fixture):
    trace = json.loads((fixtures_dir / "engine" / fixture).read_text())
    state = start_session(schema, "golden")
    for step in trace["steps"]:
        state, action = drive(state, step)
        check(state, action, step["expect"])


def test_start_session(schema):
    state = start_session(schema, "s1")
    assert state.phase == engine.PHASE_AWAITING_USER
    assert state.history == ()
    assert state.bindings == {}


def test_start_session_requires_id(schema):
    with pytest.raises(ValueError):
        start_session(schema, "")


def test_sessions_are_independent(schema):
    a = start_session(schema, "a")
    b = start_session(schema, "b")
    a2, _ = user_turn(a, "bring me the gear", 1.0)
    assert b.history == ()
    assert a.history == ()  # transitions return new values
    assert len(a2.history) == 1


def test_complete_utterance_dispatches_api(schema):
    state = start_session(schema, "s")
    state, action = user_turn(state, "bring me the gear", 1.0)
    assert action == ApiCall("fetch_item", {"item": "gear"})
    assert state.phase == engine.PHASE_AWAITING_API


def test_missing_slot_elicits_in_declaration_order(schema):
    state = start_session(schema, "s")
    state, action = user_turn(state, "bring me a component", 1.0)
    assert isinstance(action, Elicit)
    assert action.slot == "item"
    assert action.prompt == "Which component should I bring?"
    assert state.phase == engine.PHASE_ELICITING


def test_elicitation_accepts_bare_catalog_value(schema):
    state = start_session(schema, "s")
    state, _ = user_turn(state, "bring me a component", 1.0)
    state, action = user_turn(state, "the spare gear", 2.0)
    assert action == ApiCall("fetch_item", {"item": "spare gear"})


def test_elicitation_rejects_non_catalog_answer(schema):
    state = start_session(schema, "s")
    state, _ = user_turn(state, "bring me a component", 1.0)
    state, action = user_turn(state, "a banana", 2.0)
    assert isinstance(action, Respond)
    assert action.text == "Sorry, I did not catch which component you need."
    assert state.no_match_count == 1
    assert state.phase == engine.PHASE_ELICITING  # still waiting for the slot


def test_free_text_elicitation_binds_anything(schema):
    state = start_session(schema, "s")
    result = user_turn(state, "step", 1.0)  # "step" alone matches nothing
    state = start_session(schema, "s")
    state, action = initiate_dialogue(state, "ReportDone", {}, 0.5)
    assert isinstance(action, Elicit) and action.slot == "step"
    state, action = user_turn(state, "FIVE!", 1.0)
    assert action == ApiCall("report_done", {"step": "five"})


def test_api_respond_route_renders_payload(schema):
    state = start_session(schema, "s")
    state, _ = user_turn(state, "bring me the gear", 1.0)
    state, action = apply_api_result(state, "ok", {"item": "gear"}, now=2.0)
    assert action == EndDialogue("I placed the gear on the workbench.")
    assert state.active is None


def test_api_unknown_status_uses_error_route(schema):
    state = start_session(schema, "s")
    state, _ = user_turn(state, "bring me the gear", 1.0)
    state, action = apply_api_result(state, "exploded", {"item": "gear"}, now=2.0)
    assert action == EndDialogue("I could not get the gear.")


def test_apply_api_result_requires_awaiting_api(schema):
    state = start_session(schema, "s")
    with pytest.raises(ProtocolError):
        apply_api_result(state, "ok", {})


def test_user_turn_rejected_while_awaiting_api(schema):
    state = start_session(schema, "s")
    state, _ = user_turn(state, "bring me the gear", 1.0)
    with pytest.raises(ProtocolError):
        user_turn(state, "hello", 2.0)


def test_user_turn_rejected_after_end(schema):
    state = engine.end_session(start_session(schema, "s"))
    with pytest.raises(ProtocolError):
        user_turn(state, "hello", 1.0)


def test_initiate_with_complete_bindings_responds(schema):
    state = start_session(schema, "s")
    state, action = initiate_dialogue(
        state, "ReportIssue", {"code": "GRIPPER_FAULT"}, 1.0
    )
    assert isinstance(action, Respond)
    assert "GRIPPER_FAULT" in action.text
    assert state.phase == engine.PHASE_AWAITING_USER
    assert state.history[0].speaker == engine.ROBOT  # robot turn appended first


def test_initiate_with_missing_slot_elicits(schema):
    state = start_session(schema, "s")
    state, action = initiate_dialogue(state, "ProposeAlternative", {"alternative": "shaft"}, 1.0)
    assert isinstance(action, Elicit)
    assert action.slot == "decision"
    assert action.prompt == "Should I bring the shaft instead?"


def test_initiate_busy_while_eliciting(schema):
    state = start_session(schema, "s")
    state, _ = user_turn(state, "bring me a component", 1.0)
    with pytest.raises(BusyError):
        initiate_dialogue(state, "ReportIssue", {"code": "X"}, 2.0)


def test_initiate_busy_while_awaiting_api(schema):
    state = start_session(schema, "s")
    state, _ = user_turn(state, "bring me the gear", 1.0)
    with pytest.raises(BusyError):
        initiate_dialogue(state, "ReportIssue", {"code": "X"}, 2.0)


def test_initiate_deferred_after_plain_respond(schema):
    state = start_session(schema, "s")
    state, _ = initiate_dialogue(state, "ReportIssue", {"code": "X"}, 1.0)
    # last turn is a Respond, not an EndDialogue: a second initiation waits
    with pytest.raises(BusyError):
        initiate_dialogue(state, "ReportIssue", {"code": "Y"}, 2.0)


def test_initiate_allowed_after_end_dialogue(schema):
    state = start_session(schema, "s")
    state, _ = user_turn(state, "bring me the gear", 1.0)
    state, _ = apply_api_result(state, "ok", {"item": "gear"}, now=2.0)
    state, action = initiate_dialogue(state, "ReportIssue", {"code": "X"}, 3.0)
    assert isinstance(action, Respond)


def test_initiate_unknown_dialogue(schema):
    state = start_session(schema, "s")
    with pytest.raises(ValueError):
        initiate_dialogue(state, "Ghost", {}, 1.0)


def test_turn_alternation_and_timestamps(schema):
    state = start_session(schema, "s")
    inputs = [
        ("bring me a component", 1.0),
        ("the gear", 2.0),
        ("what is the status", 3.0),
        ("blorp", 4.0),
        ("blorp", 5.0),
    ]
    actions = 0
    for text, now in inputs:
        if state.phase == engine.PHASE_AWAITING_API:
            state, _ = apply_api_result(state, "ok", {"item": "gear"}, now=now)
        state, action = user_turn(state, text, now)
        actions += 1
        if isinstance(action, ApiCall):
            state, _ = apply_api_result(
                state, "ok", {"item": "gear", "done": "0", "next": "step 1", "suggestion": "x"}, now=now
            )
    assert actions == len(inputs)  # one action per user turn, no absorption
    for a, b in zip(state.history, state.history[1:]):
        assert b.at >= a.at
        if a.speaker == b.speaker:
            assert a.speaker == engine.ROBOT
            assert isinstance(a.content, EndDialogue)


def test_context_merges_bindings_for_active_dialogue(schema):
    state = start_session(schema, "s")
    state, action = initiate_dialogue(
        state, "OfferSuggestion", {"step": "1", "suggestion": "the bracket"}, 1.0
    )
    assert isinstance(action, Respond)
    assert state.phase == engine.PHASE_AWAITING_USER
    # the dialogue stays active: a matching reply keeps the earlier bindings
    state, action = user_turn(state, "any suggestions", 2.0)
    assert action == ApiCall("query_status", {})
    assert state.bindings["step"] == "1"


def test_second_no_match_ends_even_while_eliciting(schema):
    state = start_session(schema, "s")
    state, _ = user_turn(state, "bring me a component", 1.0)
    state, action = user_turn(state, "zz", 2.0)
    assert isinstance(action, Respond)
    state, action = user_turn(state, "zz", 3.0)
    assert isinstance(action, EndDialogue)
    assert state.active is None
    assert state.phase == engine.PHASE_AWAITING_USER
