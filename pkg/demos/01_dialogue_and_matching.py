"""Dialogue schemas and utterance matching.

The shipped schema declares catalogs (value lists with synonyms), dialogues
(utterance templates with slots), and the APIs a completed dialogue calls.
This walkthrough loads it, enumerates template groundings, and shows how the
deterministic matcher binds slots.

Run from the repository root:  python demos/01_dialogue_and_matching.py
"""

import convoforge as cf
from convoforge.matching import expand_template, match_utterance

schema = cf.default_schema()
print(f"schema '{schema.name}':")
for dialogue in schema.dialogues:
    api = dialogue.api or "-"
    print(f"  {dialogue.name:<20} {len(dialogue.utterance_sets)} utterances  api={api}")

# Every catalog value and synonym yields one surface string per template.
# The matcher must invert every one of them; tests enforce this exactly.
print("\nsome groundings of 'bring me the {item}' (tool dialogue):")
tool_dialogue = schema.dialogue("RequestTool")
for surface, bindings in expand_template(tool_dialogue.utterance_sets[0], schema, "RequestTool"):
    print(f"  {surface!r:<32} -> {bindings}")

# Matching is exact on literal tokens after normalization (case folding,
# punctuation stripping); slot spans bind by longest catalog match, so the
# two-word entry wins over its one-word prefix.
print("\nmatching:")
for text in [
    "Bring me the GEAR!",
    "bring me the spare gear",
    "bring me the cog",          # synonym resolves to its canonical
    "bring me a component",      # slot-less template: triggers elicitation
    "good morning robot",        # nothing covers this: no match
]:
    result = match_utterance(schema, text)
    if result is None:
        print(f"  {text!r:<28} -> no match")
    else:
        print(f"  {text!r:<28} -> {result.dialogue} {result.bindings}")
