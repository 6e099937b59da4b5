"""Request-response baseline: rigid single-turn commands, no clarification.

The grammar is `<verb> [argument]` with verbs bring/status/help/done. An
ambiguous bring argument is resolved to the first item whose name starts
with it, silently; a malformed command gets one fixed rejection and no
re-prompt. This deliberate rigidity is the comparison condition for the
conversational mode.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import sim

VERB_BRING = "bring"
VERB_STATUS = "status"
VERB_HELP = "help"
VERB_DONE = "done"

REJECT_TEXT = "unrecognized command"
HELP_TEXT = "commands: bring <item>, status, done <step>, help"


@dataclass(frozen=True)
class Command:
    verb: str
    argument: str | None = None


def parse_command(text: str) -> Command | None:
    """Rigid parse; returns None (reject) on anything off-grammar."""
    tokens = text.strip().casefold().split()
    if not tokens:
        return None
    verb = tokens[0]
    rest = tokens[1:]
    if verb == VERB_BRING:
        if not rest:
            return None
        return Command(VERB_BRING, " ".join(rest))
    if verb == VERB_DONE:
        if len(rest) != 1 or not rest[0].isdigit():
            return None
        return Command(VERB_DONE, rest[0])
    if verb in (VERB_STATUS, VERB_HELP):
        if rest:
            return None
        return Command(verb)
    return None


def _first_prefix_match(state: sim.TaskState, prefix: str) -> str | None:
    for item in state.config.items:
        if item.name.startswith(prefix):
            return item.name
    return None


def execute_command(
    cmd: Command, state: sim.TaskState, clock: sim.SimClock, trace: list | None = None
) -> str:
    """Execute one command; always exactly one response text."""
    if cmd.verb == VERB_BRING:
        name = _first_prefix_match(state, cmd.argument)
        if name is None:
            return f"no item matching '{cmd.argument}'"
        before = clock.now
        outcome = sim.robot_fetch(state, name, clock)
        if outcome.status != sim.DELIVERED:
            return f"{name} not available"
        if trace is not None:
            trace.append({"action": "robot_fetch", "detail": {"item": name}, "dt": clock.now - before})
        return f"delivered {name}"
    if cmd.verb == VERB_DONE:
        index = int(cmd.argument)
        if not 1 <= index <= sim.REQUIRED_STEPS:
            return f"no step {index}"
        try:
            before = clock.now
            result = sim.assemble_step(state, index, state.workbench_items(), clock)
        except sim.StepStateError:
            return f"step {index} already done"
        if trace is not None:
            trace.append(
                {
                    "action": "assemble",
                    "detail": {
                        "step": index,
                        "using": sorted(state.workbench_items()),
                        "result": result,
                    },
                    "dt": clock.now - before,
                }
            )
        return f"step {index} done"
    if cmd.verb == VERB_STATUS:
        done = len(state.finished_steps())
        nxt = state.next_pending()
        if nxt is None:
            return f"{done} of {sim.REQUIRED_STEPS} steps done"
        return f"{done} of {sim.REQUIRED_STEPS} steps done, next step {nxt.spec.index}"
    if cmd.verb == VERB_HELP:
        return HELP_TEXT
    return REJECT_TEXT
