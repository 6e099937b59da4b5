"""A full conversation session, driven in-process through the gateway.

Shows the three robot behaviours in one sitting: slot elicitation when a
request is underspecified, API dispatch with a chained alternative proposal
when the world misbehaves, and a robot-initiated dialogue pushed over the
event channel after a milestone.

Run from the repository root:  python demos/02_conversation_walkthrough.py
"""

import convoforge as cf
from convoforge import wire
from convoforge.gateway import Gateway

schema = cf.default_schema()
gw = Gateway(schema, cf.default_task())

SESSION = "demo"
seq = 1
gw.create_session(wire.session_start(SESSION, seq, schema.name, "conversation"))
session = gw.get_session(SESSION)


def say(text):
    global seq
    seq += 1
    print(f"user : {text}")
    for reply in gw.user_turn(wire.user_turn(SESSION, seq, text)):
        body = reply.body
        if body["action"] == "api_call":
            print(f"  ->   [api {body['api']} {body['args']}]")
        else:
            print(f"robot: {body['text']}")
    while not session.event_queue.empty():
        pushed = session.event_queue.get_nowait()
        print(f"robot: {pushed['body']['text']}   (robot-initiated)")


# An underspecified request: the robot asks for the missing slot, and a bare
# value is enough to answer the elicitation.
say("bring me a component")
say("the base plate")
say("bring me the screwdriver")
say("i finished step one")

# Sabotage the world: the gear goes missing, so the fetch comes back
# unavailable and the robot proposes the nearest same-kind alternative.
gw.inject_fault(SESSION, "item_unavailable", "gear")
say("bring me the bracket")
say("i finished step two")
say("bring me the gear")
say("yes")  # accept the proposed spare gear

# A robot fault initiates a conversation without any user action.
gw.inject_fault(SESSION, "robot_error", "GRIPPER_FAULT")
while not session.event_queue.empty():
    pushed = session.event_queue.get_nowait()
    print(f"robot: {pushed['body']['text']}   (robot-initiated)")

print(f"\nsimulated clock: {session.clock.now:.1f}s")
print("steps:", [s.status for s in session.task.steps])
gw.delete_session(SESSION)
