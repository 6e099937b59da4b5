"""Session gateway: routes wire messages between operators and the engine.

One Gateway serves many sessions; each session's messages are processed
strictly serially under its own lock. The gateway owns the session's task
state and simulated clock, accounts speech time for every spoken turn, logs
every message (plus simulator actions) into an ordered per-session record
list, and defers robot-initiated dialogues until the conversation is quiet.
"""

from __future__ import annotations

import logging
import queue
import threading
from collections import deque
from dataclasses import dataclass, field

from . import baseline, engine, orchestrator, sim, wire
from .schema import DialogueSchema

logger = logging.getLogger(__name__)

MODE_CONVERSATION = "conversation"
MODE_BASELINE = "baseline"

E_NO_SESSION = "NO_SESSION"
E_DUPLICATE_SESSION = "DUPLICATE_SESSION"
E_BAD_SESSION = "BAD_SESSION"
E_BAD_MODE = "BAD_MODE"
E_SCHEMA_MISMATCH = "SCHEMA_MISMATCH"
E_PROTOCOL = "PROTOCOL"
E_BAD_KIND = "BAD_KIND"


class GatewayError(Exception):
    def __init__(self, code: str, message: str, http_status: int = 400):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.http_status = http_status


@dataclass
class LogRecord:
    """One transcript entry: a wire message or a simulator action."""

    at: float
    kind: str  # "wire" | "sim"
    direction: str | None = None  # "c2s" | "s2c" | "int" (backend-internal)
    message: dict | None = None  # wire envelope object
    action: str | None = None  # sim action name
    detail: dict | None = None
    dt: float = 0.0

    def to_obj(self) -> dict:
        if self.kind == "wire":
            return {
                "at": round(self.at, 6),
                "kind": "wire",
                "dir": self.direction,
                "message": self.message,
            }
        return {
            "at": round(self.at, 6),
            "kind": "sim",
            "action": self.action,
            "detail": self.detail,
            "dt": round(self.dt, 6),
        }


class _StampedTrace(list):
    """Sim-action sink that stamps each record with the clock at append time."""

    def __init__(self, clock: sim.SimClock):
        super().__init__()
        self._clock = clock

    def append(self, record: dict) -> None:
        record = dict(record)
        record["at"] = self._clock.now
        super().append(record)


@dataclass
class Session:
    id: str
    mode: str
    task: sim.TaskState
    clock: sim.SimClock
    state: engine.ConversationState | None = None
    server_seq: int = 0
    last_client_seq: int = 0
    user_turns: int = 0
    fault_index: int = 0
    finished_seen: set[int] = field(default_factory=set)
    pending_events: deque = field(default_factory=deque)
    event_queue: "queue.Queue[dict | None]" = field(default_factory=queue.Queue)
    log: list[LogRecord] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    ended: bool = False

    def next_seq(self) -> int:
        self.server_seq += 1
        return self.server_seq


class Gateway:
    def __init__(self, schema: DialogueSchema, task_config: sim.TaskConfig):
        orchestrator.check_handler_table(schema)
        sim.validate_task_against_schema(task_config, schema)
        self.schema = schema
        self.task_config = task_config
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()

    # -- session lifecycle ---------------------------------------------------

    def create_session(self, msg: wire.WireMessage) -> Session:
        if msg.kind != wire.KIND_SESSION_START:
            raise GatewayError(E_BAD_KIND, f"expected SessionStart, got {msg.kind}")
        if not msg.session:
            raise GatewayError(E_BAD_SESSION, "session id must be non-empty")
        if msg.body["schema_name"] != self.schema.name:
            raise GatewayError(
                E_SCHEMA_MISMATCH,
                f"server schema is '{self.schema.name}', got '{msg.body['schema_name']}'",
            )
        mode = msg.body["mode"]
        if mode not in (MODE_CONVERSATION, MODE_BASELINE):
            raise GatewayError(E_BAD_MODE, f"unknown mode '{mode}'")
        with self._registry_lock:
            if msg.session in self._sessions:
                raise GatewayError(
                    E_DUPLICATE_SESSION, f"session '{msg.session}' already exists", 409
                )
            session = Session(
                id=msg.session,
                mode=mode,
                task=sim.TaskState(self.task_config),
                clock=sim.SimClock(),
            )
            if mode == MODE_CONVERSATION:
                session.state = engine.start_session(self.schema, msg.session)
            self._sessions[msg.session] = session
        with session.lock:
            session.last_client_seq = msg.seq
            self._log_wire(session, "c2s", msg)
            self._post_exchange(session)  # faults scheduled before the first turn
        return session

    def get_session(self, session_id: str) -> Session:
        with self._registry_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise GatewayError(E_NO_SESSION, f"no session '{session_id}'", 404)
        return session

    def delete_session(self, session_id: str, reason: str = "client request") -> wire.WireMessage:
        session = self.get_session(session_id)
        with session.lock:
            if session.state is not None:
                session.state = engine.end_session(session.state)
            session.ended = True
            msg = wire.session_end(session.id, session.next_seq(), reason)
            self._log_wire(session, "s2c", msg)
            session.event_queue.put(None)
        with self._registry_lock:
            self._sessions.pop(session_id, None)
        return msg

    # -- turns ---------------------------------------------------------------

    def user_turn(self, msg: wire.WireMessage) -> list[wire.WireMessage]:
        session = self.get_session(msg.session)
        if msg.kind != wire.KIND_USER_TURN:
            raise GatewayError(E_BAD_KIND, f"expected UserTurn, got {msg.kind}")
        with session.lock:
            if msg.seq <= session.last_client_seq:
                raise GatewayError(
                    wire.E_SEQ_REGRESSION,
                    f"seq {msg.seq} does not exceed last seen {session.last_client_seq}",
                )
            session.last_client_seq = msg.seq
            text = msg.body["text"]
            self._advance_speech(session, text)
            self._log_wire(session, "c2s", msg)
            if session.mode == MODE_CONVERSATION:
                replies = self._conversation_turn(session, text)
            else:
                replies = self._baseline_turn(session, text)
            session.user_turns += 1
            self._post_exchange(session)
            return replies

    def _conversation_turn(self, session: Session, text: str) -> list[wire.WireMessage]:
        try:
            state, action = engine.user_turn(session.state, text, session.clock.now)
        except engine.ProtocolError as exc:
            raise GatewayError(E_PROTOCOL, str(exc), 409) from exc
        session.state = state
        out: list[wire.WireMessage] = []
        if isinstance(action, engine.ApiCall):
            call_msg = self._robot_turn_msg(session, action)
            out.append(call_msg)
            self._log_wire(session, "s2c", call_msg)
            trace = _StampedTrace(session.clock)
            result = orchestrator.handle_api(
                action.api, action.args, session.task, session.clock, trace
            )
            self._drain_trace(session, trace)
            result_msg = wire.WireMessage(
                session.id,
                session.next_seq(),
                wire.KIND_API_RESULT,
                {"status": result.status, "payload": result.payload},
            )
            self._log_wire(session, "int", result_msg)
            session.state, action = engine.apply_api_result(
                session.state, result.status, result.payload, now=session.clock.now
            )
        spoken = engine.action_text(action)
        self._advance_speech(session, spoken)
        reply = self._robot_turn_msg(session, action)
        out.append(reply)
        self._log_wire(session, "s2c", reply)
        return out

    def _baseline_turn(self, session: Session, text: str) -> list[wire.WireMessage]:
        cmd = baseline.parse_command(text)
        if cmd is None:
            response = baseline.REJECT_TEXT
        else:
            trace = _StampedTrace(session.clock)
            response = baseline.execute_command(cmd, session.task, session.clock, trace)
            self._drain_trace(session, trace)
        self._advance_speech(session, response)
        reply = wire.WireMessage(
            session.id,
            session.next_seq(),
            wire.KIND_ROBOT_TURN,
            {"action": wire.ACTION_RESPOND, "text": response},
        )
        self._log_wire(session, "s2c", reply)
        return [reply]

    # -- robot-initiated events ----------------------------------------------

    def inject_fault(self, session_id: str, kind: str, target: str) -> None:
        """Scripted fault entry point (tests and demos)."""
        session = self.get_session(session_id)
        with session.lock:
            event = sim.inject_fault(session.task, kind, target, session.clock)
            self._route_event(session, event)
            self._dispatch_events(session)

    def _route_event(self, session: Session, event: sim.SimEvent) -> None:
        if session.mode != MODE_CONVERSATION:
            return  # the baseline has no robot-initiated channel
        routed = orchestrator.on_sim_event(event, session_active=not session.ended)
        if routed is not None:
            session.pending_events.append(routed)

    def _post_exchange(self, session: Session) -> None:
        faults = self.task_config.faults
        while (
            session.fault_index < len(faults)
            and faults[session.fault_index].after_turn <= session.user_turns
        ):
            fault = faults[session.fault_index]
            session.fault_index += 1
            event = sim.inject_fault(session.task, fault.kind, fault.target, session.clock)
            self._route_event(session, event)
        for step in session.task.finished_steps():
            if step.spec.index not in session.finished_seen:
                session.finished_seen.add(step.spec.index)
                milestone = orchestrator.milestone_event(session.task, step.spec.index)
                if milestone is not None:
                    self._route_event(session, milestone)
        if session.mode == MODE_CONVERSATION:
            self._dispatch_events(session)

    def _dispatch_events(self, session: Session) -> None:
        while session.pending_events:
            dialogue, bindings = session.pending_events[0]
            try:
                state, action = engine.initiate_dialogue(
                    session.state, dialogue, bindings, session.clock.now
                )
            except engine.BusyError:
                break  # keep the event queued until the conversation settles
            session.pending_events.popleft()
            session.state = state
            event_msg = wire.WireMessage(
                session.id,
                session.next_seq(),
                wire.KIND_EVENT,
                {"dialogue": dialogue, "bindings": bindings},
            )
            self._log_wire(session, "s2c", event_msg)
            self._advance_speech(session, engine.action_text(action))
            turn_msg = self._robot_turn_msg(session, action)
            self._log_wire(session, "s2c", turn_msg)
            session.event_queue.put(turn_msg.to_obj())

    # -- helpers ---------------------------------------------------------------

    def _advance_speech(self, session: Session, text: str) -> None:
        tokens = len(text.split())
        if tokens:
            session.clock.advance(tokens * self.task_config.durations.speech_s_per_token)

    def _robot_turn_msg(self, session: Session, action: engine.RobotAction) -> wire.WireMessage:
        if isinstance(action, engine.Respond):
            body = {"action": wire.ACTION_RESPOND, "text": action.text}
        elif isinstance(action, engine.Elicit):
            body = {"action": wire.ACTION_ELICIT, "text": action.prompt, "slot": action.slot}
        elif isinstance(action, engine.ApiCall):
            body = {
                "action": wire.ACTION_API_CALL,
                "text": "",
                "api": action.api,
                "args": action.args,
            }
        else:
            body = {"action": wire.ACTION_END, "text": action.text}
        return wire.WireMessage(session.id, session.next_seq(), wire.KIND_ROBOT_TURN, body)

    def _log_wire(self, session: Session, direction: str, msg: wire.WireMessage) -> None:
        session.log.append(
            LogRecord(
                at=session.clock.now,
                kind="wire",
                direction=direction,
                message=msg.to_obj(),
            )
        )

    def _drain_trace(self, session: Session, trace: list) -> None:
        for record in trace:
            session.log.append(
                LogRecord(
                    at=record["at"],
                    kind="sim",
                    action=record["action"],
                    detail=record["detail"],
                    dt=record["dt"],
                )
            )
