"""Comparative experiment harness with scripted operator policies.

A policy walks an ordered assembly plan, phrasing each goal for the active
interaction mode. With probability error_rate an utterance is replaced by
its degraded variant: in conversation mode the slot-omitting phrasing (which
triggers elicitation and recovers), in baseline mode an ambiguous prefix
(which the rigid command interface resolves silently, sometimes wrongly).
Everything is seeded; identical inputs give byte-identical outputs.
"""

from __future__ import annotations

import json
import random
import statistics
from dataclasses import dataclass
from pathlib import Path

from . import wire
from .gateway import MODE_BASELINE, MODE_CONVERSATION, Gateway
from .schema import DialogueSchema
from .sim import TaskConfig

_STEP_WORDS = {1: "one", 2: "two", 3: "three", 4: "four", 5: "five"}

MODES = (MODE_CONVERSATION, MODE_BASELINE)


class HarnessError(Exception):
    pass


class ReplayError(Exception):
    pass


@dataclass(frozen=True)
class Goal:
    kind: str  # "fetch" | "done"
    target: str  # item name, or step index as a string


@dataclass(frozen=True)
class Phrasing:
    nominal: str
    noisy: str


@dataclass(frozen=True)
class OperatorPolicy:
    goals: tuple[Goal, ...]
    error_rate: float
    seed: int
    phrasings: dict[tuple[str, Goal], Phrasing]

    def __post_init__(self):
        if not 0.0 <= self.error_rate <= 1.0:
            raise HarnessError("error_rate must be in [0, 1]")
        for mode in MODES:
            for goal in self.goals:
                if (mode, goal) not in self.phrasings:
                    raise HarnessError(
                        f"phrasing table does not cover goal {goal} in mode '{mode}'"
                    )

    def phrasing(self, mode: str, goal: Goal) -> Phrasing:
        try:
            return self.phrasings[(mode, goal)]
        except KeyError:
            raise HarnessError(f"no phrasing for goal {goal} in mode '{mode}'") from None

    def answer_for(self, goal: Goal, slot: str) -> str:
        """Elicitation answers are always precise: asked directly, the
        operator names exactly what the current goal needs."""
        if slot in ("item", "alternative"):
            return f"the {goal.target}"
        if slot == "decision":
            return "yes"
        if slot == "step":
            return _STEP_WORDS.get(int(goal.target), goal.target)
        return goal.target


def default_policy(task: TaskConfig, error_rate: float, seed: int = 0) -> OperatorPolicy:
    """Plan: fetch each step's missing items in order, then report the step."""
    goals: list[Goal] = []
    fetched: set[str] = set()
    for step in sorted(task.steps, key=lambda s: s.index):
        needed = list(step.required_components)
        if step.required_tool is not None:
            needed.append(step.required_tool)
        for name in needed:
            if name not in fetched:
                fetched.add(name)
                goals.append(Goal("fetch", name))
        goals.append(Goal("done", str(step.index)))
    phrasings: dict[tuple[str, Goal], Phrasing] = {}
    kinds = {item.name: item.kind for item in task.items}
    for goal in goals:
        if goal.kind == "fetch":
            category = "component" if kinds[goal.target] == "component" else "tool"
            phrasings[(MODE_CONVERSATION, goal)] = Phrasing(
                nominal=f"could you bring me the {goal.target}",
                noisy=f"bring me a {category}",
            )
            phrasings[(MODE_BASELINE, goal)] = Phrasing(
                nominal=f"bring {goal.target}",
                noisy=f"bring {goal.target[0]}",
            )
        else:
            index = int(goal.target)
            word = _STEP_WORDS[index]
            phrasings[(MODE_CONVERSATION, goal)] = Phrasing(
                nominal=f"i finished step {word}",
                noisy=f"i finished step {word}",
            )
            phrasings[(MODE_BASELINE, goal)] = Phrasing(
                nominal=f"done {index}",
                noisy=f"done {index}",
            )
    return OperatorPolicy(tuple(goals), error_rate, seed, phrasings)


@dataclass(frozen=True)
class MetricsRecord:
    session_id: str
    mode: str
    seed: int
    total_time_s: float
    steps_correct: int
    turns: int
    transcript_path: str


def _spoken_turn(record: dict) -> tuple[str, str] | None:
    """(speaker, text) for records that carry speech, else None."""
    if record.get("kind") != "wire":
        return None
    msg = record["message"]
    if msg["kind"] == wire.KIND_USER_TURN:
        return "user", msg["body"]["text"]
    if msg["kind"] == wire.KIND_ROBOT_TURN and msg["body"]["action"] != wire.ACTION_API_CALL:
        return "robot", msg["body"]["text"]
    return None


def run_session(
    policy: OperatorPolicy,
    mode: str,
    schema: DialogueSchema,
    task: TaskConfig,
    seed: int,
    transcript_path: str | Path,
) -> MetricsRecord:
    """Drive one full scripted session through an in-process gateway."""
    if mode not in MODES:
        raise HarnessError(f"unknown mode '{mode}'")
    rng = random.Random(seed)
    gw = Gateway(schema, task)
    session_id = f"{mode}-{seed}"
    cseq = 1
    gw.create_session(wire.session_start(session_id, cseq, schema.name, mode))
    session = gw.get_session(session_id)
    log = session.log  # keep references: the registry entry dies with delete
    task_state = session.task
    clock = session.clock

    for goal in policy.goals:
        phrasing = policy.phrasing(mode, goal)
        text = phrasing.noisy if rng.random() < policy.error_rate else phrasing.nominal
        cseq += 1
        replies = gw.user_turn(wire.user_turn(session_id, cseq, text))
        bounces = 0
        while replies and replies[-1].body.get("action") == wire.ACTION_ELICIT:
            bounces += 1
            if bounces > 4:
                raise HarnessError(f"elicitation did not converge for goal {goal}")
            answer = policy.answer_for(goal, replies[-1].body["slot"])
            cseq += 1
            replies = gw.user_turn(wire.user_turn(session_id, cseq, answer))
        while not session.event_queue.empty():  # robot-initiated turns are logged already
            session.event_queue.get_nowait()

    steps_correct = task_state.correct_steps()
    gw.delete_session(session_id, reason="experiment complete")
    total_time_s = clock.now
    turns = sum(1 for r in log if _spoken_turn(r.to_obj()) is not None)

    path = Path(transcript_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        {
            "kind": "header",
            "session": session_id,
            "mode": mode,
            "seed": seed,
            "schema": schema.name,
            "error_rate": policy.error_rate,
            "durations": task.durations.to_dict(),
        }
    ]
    lines.extend(r.to_obj() for r in log)
    lines.append(
        {
            "kind": "summary",
            "total_time_s": round(total_time_s, 6),
            "steps_correct": steps_correct,
            "turns": turns,
        }
    )
    payload = "\n".join(json.dumps(obj, sort_keys=True, separators=(",", ":")) for obj in lines)
    path.write_bytes(payload.encode("utf-8") + b"\n")

    return MetricsRecord(
        session_id=session_id,
        mode=mode,
        seed=seed,
        total_time_s=total_time_s,
        steps_correct=steps_correct,
        turns=turns,
        transcript_path=str(path),
    )


@dataclass(frozen=True)
class ModeStats:
    mean_time_s: float
    std_time_s: float
    mean_steps: float
    std_steps: float


@dataclass(frozen=True)
class ExperimentSummary:
    per_mode: dict[str, ModeStats]
    relative_time_delta: float  # (conversation - baseline) / baseline
    relative_steps_delta: float

    def to_dict(self) -> dict:
        return {
            "per_mode": {
                mode: {
                    "mean_time_s": stats.mean_time_s,
                    "std_time_s": stats.std_time_s,
                    "mean_steps_correct": stats.mean_steps,
                    "std_steps_correct": stats.std_steps,
                }
                for mode, stats in self.per_mode.items()
            },
            "relative_time_delta": self.relative_time_delta,
            "relative_steps_delta": self.relative_steps_delta,
        }


def summarize(records: list[MetricsRecord]) -> ExperimentSummary:
    per_mode: dict[str, ModeStats] = {}
    for mode in MODES:
        rows = [r for r in records if r.mode == mode]
        if not rows:
            raise HarnessError(f"no completed sessions for mode '{mode}'")
        times = [r.total_time_s for r in rows]
        steps = [r.steps_correct for r in rows]
        per_mode[mode] = ModeStats(
            mean_time_s=statistics.mean(times),
            std_time_s=statistics.pstdev(times),
            mean_steps=statistics.mean(steps),
            std_steps=statistics.pstdev(steps),
        )
    conv = per_mode[MODE_CONVERSATION]
    base = per_mode[MODE_BASELINE]
    return ExperimentSummary(
        per_mode=per_mode,
        relative_time_delta=(conv.mean_time_s - base.mean_time_s) / base.mean_time_s,
        relative_steps_delta=(conv.mean_steps - base.mean_steps) / base.mean_steps
        if base.mean_steps
        else float("inf"),
    )


CSV_HEADER = "session_id,mode,seed,total_time_s,steps_correct,turns"


def run_experiment(
    n_per_mode: int,
    error_rate: float,
    base_seed: int,
    out_csv: str | Path,
    schema: DialogueSchema,
    task: TaskConfig,
    transcript_dir: str | Path | None = None,
) -> tuple[ExperimentSummary, list[MetricsRecord]]:
    """Run n seeded sessions per mode; write the metrics CSV."""
    if n_per_mode < 1:
        raise HarnessError("n_per_mode must be >= 1")
    out_csv = Path(out_csv)
    if transcript_dir is None:
        transcript_dir = out_csv.with_name(out_csv.stem + "_transcripts")
    transcript_dir = Path(transcript_dir)
    policy = default_policy(task, error_rate)
    records: list[MetricsRecord] = []
    for mode in MODES:
        for i in range(n_per_mode):
            seed = base_seed + i
            transcript = transcript_dir / f"{mode}-{seed}.jsonl"
            records.append(run_session(policy, mode, schema, task, seed, transcript))
    rows = [CSV_HEADER]
    rows.extend(
        f"{r.session_id},{r.mode},{r.seed},{r.total_time_s:.1f},{r.steps_correct},{r.turns}"
        for r in records
    )
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    out_csv.write_bytes(("\n".join(rows) + "\n").encode("utf-8"))
    return summarize(records), records


@dataclass(frozen=True)
class ReplayResult:
    rendered: str
    total_time_s: float
    steps_correct: int
    turns: int


def replay(transcript_path: str | Path) -> ReplayResult:
    """Re-render a transcript, re-deriving time and invariants from scratch.

    Recomputes the clock from speech token counts and simulator durations,
    checks every recorded timestamp, re-checks turn alternation, re-scores
    the assembly steps, and compares everything against the recorded summary.
    """
    path = Path(transcript_path)
    try:
        raw_lines = path.read_text("utf-8").splitlines()
    except OSError as exc:
        raise ReplayError(f"cannot read transcript: {exc}") from exc
    records = []
    for i, line in enumerate(raw_lines):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ReplayError(f"corrupt transcript at line {i + 1}: {exc.msg}") from exc
    if not records or records[0].get("kind") != "header":
        raise ReplayError("corrupt transcript: missing header")
    if records[-1].get("kind") != "summary":
        raise ReplayError("corrupt transcript: missing summary")
    header, body, summary = records[0], records[1:-1], records[-1]
    rate = header["durations"]["speech_s_per_token"]

    t = 0.0
    turns = 0
    steps_correct = 0
    last_spoken: tuple[str, str] | None = None  # (speaker, robot action)
    rendered: list[str] = []
    for record in body:
        if record.get("kind") == "sim":
            t += record["dt"]
            rendered.append(f"[{record['at']:10.1f}]   sim: {record['action']} {record['detail']}")
        elif record.get("kind") == "wire":
            msg = record["message"]
            spoken = _spoken_turn(record)
            if spoken is not None:
                speaker, text = spoken
                t += len(text.split()) * rate
                turns += 1
                action = msg["body"].get("action", "")
                if speaker == "user":
                    if last_spoken is not None and last_spoken[0] == "user":
                        raise ReplayError("turn alternation violated: two user turns in a row")
                else:
                    if last_spoken is not None and last_spoken[0] == "robot" and last_spoken[1] != wire.ACTION_END:
                        raise ReplayError(
                            "turn alternation violated: robot turn not preceded by an end"
                        )
                last_spoken = (speaker, action)
                rendered.append(f"[{record['at']:10.1f}] {speaker:>5}: {text}")
            if msg["kind"] == wire.KIND_API_RESULT and msg["body"]["status"] == "ok":
                pass  # scoring comes from the sim records below
        else:
            raise ReplayError(f"corrupt transcript: unknown record kind {record.get('kind')}")
        if abs(record["at"] - t) > 1e-6:
            raise ReplayError(
                f"timestamp mismatch: recorded {record['at']}, recomputed {t:.6f}"
            )
        if record.get("kind") == "sim" and record["action"] == "assemble":
            if record["detail"]["result"] == "done_correct":
                steps_correct += 1
    if abs(summary["total_time_s"] - t) > 1e-6:
        raise ReplayError(
            f"total time mismatch: recorded {summary['total_time_s']}, recomputed {t:.6f}"
        )
    if summary["steps_correct"] != steps_correct:
        raise ReplayError("steps_correct mismatch between summary and sim records")
    if summary["turns"] != turns:
        raise ReplayError("turn count mismatch between summary and records")
    return ReplayResult("\n".join(rendered), t, steps_correct, turns)
