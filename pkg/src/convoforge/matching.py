"""Deterministic utterance matching against schema templates.

Matching is exact on literal tokens (after normalization) and binds slot
spans to catalog entries by longest match, scanning left to right. Synonyms
resolve to their canonical value; free-text slots bind the raw token span.
There is no statistical scoring: a template either covers the whole input
or it does not.
"""

from __future__ import annotations

import itertools
import weakref
from dataclasses import dataclass

from .schema import (
    Catalog,
    DialogueSchema,
    UtteranceTemplate,
    normalize,
)


class NotEnumerableError(Exception):
    """Raised when a template with a free-text slot is asked to enumerate."""


@dataclass(frozen=True)
class MatchResult:
    dialogue: str
    utterance_index: int
    bindings: dict[str, str]
    score: float


# surface index: catalog name -> list of (surface token tuple, canonical),
# sorted longest-first so a scan at a position finds the longest entry first.
_SurfaceIndex = dict[str, list[tuple[tuple[str, ...], str]]]

_INDEX_CACHE: "weakref.WeakKeyDictionary[DialogueSchema, _SurfaceIndex]" = (
    weakref.WeakKeyDictionary()
)


def _catalog_surfaces(catalog: Catalog) -> list[tuple[tuple[str, ...], str]]:
    surfaces = []
    for entry in catalog.entries:
        for surface in entry.surfaces():
            surfaces.append((tuple(normalize(surface)), entry.value))
    surfaces.sort(key=lambda item: len(item[0]), reverse=True)
    return surfaces


def _surface_index(schema: DialogueSchema) -> _SurfaceIndex:
    index = _INDEX_CACHE.get(schema)
    if index is None:
        index = {c.name: _catalog_surfaces(c) for c in schema.catalogs}
        _INDEX_CACHE[schema] = index
    return index


def scan_catalog_value(
    schema: DialogueSchema, catalog_name: str, tokens: list[str]
) -> str | None:
    """Find a catalog entry anywhere in `tokens`: longest match, then leftmost.

    Used for bare elicitation answers such as "the gear", where the value is
    embedded in filler words rather than a full utterance template.
    """
    surfaces = _surface_index(schema)[catalog_name]
    for surface, canonical in surfaces:  # longest first
        width = len(surface)
        for start in range(0, len(tokens) - width + 1):
            if tuple(tokens[start : start + width]) == surface:
                return canonical
    return None


def _match_template(
    schema: DialogueSchema,
    dialogue_name: str,
    template: UtteranceTemplate,
    tokens: list[str],
) -> dict[str, str] | None:
    index = _surface_index(schema)
    dialogue = schema.dialogue(dialogue_name)
    toks = template.tokens

    def walk(ti: int, pos: int, bindings: dict[str, str]) -> dict[str, str] | None:
        if ti == len(toks):
            return bindings if pos == len(tokens) else None
        tok = toks[ti]
        if tok.kind == "lit":
            if pos < len(tokens) and tokens[pos] == tok.value:
                return walk(ti + 1, pos + 1, bindings)
            return None
        slot = dialogue.slot(tok.value)
        if slot is None:  # unreachable for validated schemas
            return None
        if slot.catalog_name is not None:
            # longest catalog match at this position, committed (no backtracking)
            for surface, canonical in index[slot.catalog_name]:
                width = len(surface)
                if tuple(tokens[pos : pos + width]) == surface:
                    if tok.value in bindings and bindings[tok.value] != canonical:
                        return None
                    return walk(ti + 1, pos + width, {**bindings, tok.value: canonical})
            return None
        # free-text slot: try the longest span first, shrink until the rest fits
        for end in range(len(tokens), pos, -1):
            value = " ".join(tokens[pos:end])
            if tok.value in bindings and bindings[tok.value] != value:
                continue
            result = walk(ti + 1, end, {**bindings, tok.value: value})
            if result is not None:
                return result
        return None

    return walk(0, 0, {})


def match_utterance(
    schema: DialogueSchema, text: str, context: str | None = None
) -> MatchResult | None:
    """Match input text against the schema's utterance templates.

    Templates of the `context` dialogue (if given) are tried first; otherwise
    dialogues are tried in declaration order, utterances in listed order.
    Returns None when nothing covers the whole input.
    """
    tokens = normalize(text)
    if not tokens:
        return None
    ordered: list[str] = []
    if context is not None and schema.has_dialogue(context):
        ordered.append(context)
    ordered.extend(d.name for d in schema.dialogues if d.name not in ordered)
    for name in ordered:
        dialogue = schema.dialogue(name)
        for idx, template in enumerate(dialogue.utterance_sets):
            bindings = _match_template(schema, name, template, tokens)
            if bindings is not None:
                # a match requires every literal token to match, so the
                # matched/total literal ratio is always 1.0
                return MatchResult(
                    dialogue=name,
                    utterance_index=idx,
                    bindings=bindings,
                    score=1.0,
                )
    return None


def expand_template(
    template: UtteranceTemplate, schema: DialogueSchema, dialogue_name: str
) -> list[tuple[str, dict[str, str]]]:
    """Enumerate every grounding of a template over its slot catalogs.

    Each catalog canonical and each synonym yields one surface string; the
    bindings carry the canonical value. Raises NotEnumerableError if the
    template references a free-text slot.
    """
    dialogue = schema.dialogue(dialogue_name)
    slot_choices: list[list[tuple[str, str]]] = []  # per slot: (surface, canonical)
    slot_order: list[str] = []
    for name in template.slot_names():
        if name in slot_order:
            continue
        slot = dialogue.slot(name)
        assert slot is not None
        if slot.catalog_name is None:
            raise NotEnumerableError(
                f"slot '{name}' is free-text: not enumerable"
            )
        catalog = schema.catalog(slot.catalog_name)
        choices = []
        for entry in catalog.entries:
            for surface in entry.surfaces():
                choices.append((surface, entry.value))
        slot_choices.append(choices)
        slot_order.append(name)
    groundings: list[tuple[str, dict[str, str]]] = []
    for combo in itertools.product(*slot_choices):
        chosen = dict(zip(slot_order, combo))
        words: list[str] = []
        for tok in template.tokens:
            if tok.kind == "lit":
                words.append(tok.value)
            else:
                words.append(chosen[tok.value][0])
        bindings = {name: canonical for name, (_, canonical) in chosen.items()}
        groundings.append((" ".join(words), bindings))
    return groundings
