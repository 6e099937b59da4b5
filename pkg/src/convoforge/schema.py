"""Declarative dialogue schema: parsing, validation, serialization.

A schema document declares catalogs (named value lists with synonyms),
dialogues (utterance templates, slots, response texts, an optional API
binding) and APIs (argument lists plus status-keyed result routes).
Everything is validated up front; downstream code can assume a loaded
schema is internally consistent and treat it as immutable.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_-]*$")
_PUNCT_TABLE = str.maketrans("", "", ".,;:!?'\"")

KIND_TEXT = "text"


class SchemaError(Exception):
    """Base class for schema loading failures."""


class SchemaSyntaxError(SchemaError):
    """The document is not well-formed JSON; message carries the position."""


class SchemaValidationError(SchemaError):
    """The document is well-formed but violates a schema rule."""


def normalize(text: str) -> list[str]:
    """Fold case, strip the punctuation set .,;:!?'\" and split on whitespace."""
    return text.casefold().translate(_PUNCT_TABLE).split()


@dataclass(frozen=True)
class UtteranceToken:
    kind: str  # "lit" | "slot"
    value: str


@dataclass(frozen=True)
class UtteranceTemplate:
    tokens: tuple[UtteranceToken, ...]

    def slot_names(self) -> list[str]:
        return [t.value for t in self.tokens if t.kind == "slot"]

    def source(self) -> str:
        return " ".join(
            "{%s}" % t.value if t.kind == "slot" else t.value for t in self.tokens
        )


@dataclass(frozen=True)
class CatalogEntry:
    value: str
    synonyms: tuple[str, ...] = ()

    def surfaces(self) -> tuple[str, ...]:
        return (self.value, *self.synonyms)


@dataclass(frozen=True)
class Catalog:
    name: str
    entries: tuple[CatalogEntry, ...]

    def canonicals(self) -> list[str]:
        return [e.value for e in self.entries]


@dataclass(frozen=True)
class SlotDef:
    name: str
    kind: str  # "text" or "catalog:<name>"
    required: bool
    elicit_prompt: str

    @property
    def catalog_name(self) -> str | None:
        if self.kind.startswith("catalog:"):
            return self.kind.split(":", 1)[1]
        return None


@dataclass(frozen=True)
class ResponseTemplates:
    on_complete: str
    on_no_match: str


@dataclass(frozen=True)
class Dialogue:
    name: str
    utterance_sets: tuple[UtteranceTemplate, ...]
    slots: tuple[SlotDef, ...]
    api: str | None
    responses: ResponseTemplates

    def slot(self, name: str) -> SlotDef | None:
        for s in self.slots:
            if s.name == name:
                return s
        return None

    def required_slot_names(self) -> list[str]:
        return [s.name for s in self.slots if s.required]


@dataclass(frozen=True)
class Route:
    """Result route: exactly one of `respond` (template) or `trigger` (dialogue)."""

    respond: str | None = None
    trigger: str | None = None


@dataclass(frozen=True)
class ApiDef:
    name: str
    args: tuple[str, ...]
    result_routes: tuple[tuple[str, Route], ...]

    def route_for(self, status: str) -> Route:
        for key, route in self.result_routes:
            if key == status:
                return route
        for key, route in self.result_routes:
            if key == "error":
                return route
        raise KeyError(status)  # unreachable: "error" route is validated in


@dataclass(frozen=True, eq=False)
class DialogueSchema:
    """A fully validated schema. eq=False keeps the object identity-hashable
    so matcher indexes can be cached per loaded schema; compare via to_dict()."""

    name: str
    catalogs: tuple[Catalog, ...]
    dialogues: tuple[Dialogue, ...]
    apis: tuple[ApiDef, ...]
    _catalog_map: dict[str, Catalog] = field(repr=False, default_factory=dict)
    _dialogue_map: dict[str, Dialogue] = field(repr=False, default_factory=dict)
    _api_map: dict[str, ApiDef] = field(repr=False, default_factory=dict)

    def catalog(self, name: str) -> Catalog:
        return self._catalog_map[name]

    def dialogue(self, name: str) -> Dialogue:
        return self._dialogue_map[name]

    def api(self, name: str) -> ApiDef:
        return self._api_map[name]

    def has_dialogue(self, name: str) -> bool:
        return name in self._dialogue_map


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaValidationError(message)


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    for key in obj:
        _require(key in allowed, f"unknown key '{key}' in {where}")
    for key in allowed:
        _require(key in obj, f"missing key '{key}' in {where}")


def _check_str(value, where: str, allow_empty: bool = False) -> str:
    _require(isinstance(value, str), f"{where} must be a string")
    if not allow_empty:
        _require(value != "", f"{where} must not be empty")
    return value


def _check_ident(value, where: str) -> str:
    value = _check_str(value, where)
    _require(bool(_IDENT_RE.match(value)), f"{where} is not a valid identifier: '{value}'")
    return value


def _check_list(value, where: str) -> list:
    _require(isinstance(value, list), f"{where} must be an array")
    return value


def _parse_utterance(text: str, where: str) -> UtteranceTemplate:
    tokens: list[UtteranceToken] = []
    for word in text.split():
        if word.startswith("{") and word.endswith("}"):
            name = word[1:-1]
            _require(bool(_IDENT_RE.match(name)), f"{where}: bad slot marker '{word}'")
            tokens.append(UtteranceToken("slot", name))
        else:
            _require("{" not in word and "}" not in word, f"{where}: stray brace in '{word}'")
            tokens.append(UtteranceToken("lit", " ".join(normalize(word))))
    tokens = [t for t in tokens if t.value]  # drop literals that normalize away
    _require(len(tokens) > 0, f"{where}: empty utterance")
    _require(any(t.kind == "lit" for t in tokens), f"{where}: no literal token")
    for a, b in zip(tokens, tokens[1:]):
        _require(
            not (a.kind == "slot" and b.kind == "slot"),
            f"{where}: adjacent slot tokens",
        )
    return UtteranceTemplate(tuple(tokens))


def _parse_catalog(obj, index: int) -> Catalog:
    where = f"catalog #{index}"
    _require(isinstance(obj, dict), f"{where} must be an object")
    _check_keys(obj, {"name", "entries"}, where)
    name = _check_ident(obj["name"], f"{where} name")
    entries_raw = _check_list(obj["entries"], f"catalog '{name}' entries")
    _require(len(entries_raw) > 0, f"catalog '{name}': entries must be non-empty")
    entries = []
    seen_surfaces: set[str] = set()
    for j, entry in enumerate(entries_raw):
        ewhere = f"catalog '{name}' entry #{j}"
        _require(isinstance(entry, dict), f"{ewhere} must be an object")
        _check_keys(entry, {"value", "synonyms"}, ewhere)
        value = _check_str(entry["value"], f"{ewhere} value")
        synonyms = tuple(
            _check_str(s, f"{ewhere} synonym") for s in _check_list(entry["synonyms"], f"{ewhere} synonyms")
        )
        for surface in (value, *synonyms):
            key = " ".join(normalize(surface))
            _require(key != "", f"{ewhere}: surface '{surface}' normalizes to nothing")
            _require(
                key not in seen_surfaces,
                f"catalog '{name}': duplicate surface '{surface}'",
            )
            seen_surfaces.add(key)
        entries.append(CatalogEntry(value, synonyms))
    return Catalog(name, tuple(entries))


def _parse_slot(obj, dialogue_name: str, index: int) -> SlotDef:
    where = f"slot #{index} of dialogue '{dialogue_name}'"
    _require(isinstance(obj, dict), f"{where} must be an object")
    _check_keys(obj, {"name", "kind", "required", "elicit"}, where)
    name = _check_ident(obj["name"], f"{where} name")
    kind = _check_str(obj["kind"], f"slot '{name}' kind")
    _require(
        kind == KIND_TEXT or kind.startswith("catalog:"),
        f"slot '{name}' of dialogue '{dialogue_name}': kind must be 'text' or 'catalog:<name>'",
    )
    required = obj["required"]
    _require(isinstance(required, bool), f"slot '{name}' required must be a boolean")
    elicit = _check_str(obj["elicit"], f"slot '{name}' elicit", allow_empty=True)
    _require(
        not required or elicit.strip() != "",
        f"required slot '{name}' of dialogue '{dialogue_name}' has empty elicit prompt",
    )
    return SlotDef(name, kind, required, elicit)


def _parse_dialogue(obj, index: int) -> Dialogue:
    where = f"dialogue #{index}"
    _require(isinstance(obj, dict), f"{where} must be an object")
    _check_keys(obj, {"name", "utterances", "slots", "api", "responses"}, where)
    name = _check_ident(obj["name"], f"{where} name")
    utt_raw = _check_list(obj["utterances"], f"dialogue '{name}' utterances")
    _require(len(utt_raw) > 0, f"dialogue '{name}': utterances must be non-empty")
    utterances = tuple(
        _parse_utterance(
            _check_str(u, f"utterance #{i} of dialogue '{name}'"),
            f"utterance #{i} of dialogue '{name}'",
        )
        for i, u in enumerate(utt_raw)
    )
    slots = []
    slot_names = set()
    for i, s in enumerate(_check_list(obj["slots"], f"dialogue '{name}' slots")):
        slot = _parse_slot(s, name, i)
        _require(slot.name not in slot_names, f"duplicate slot name '{slot.name}' in dialogue '{name}'")
        slot_names.add(slot.name)
        slots.append(slot)
    api = obj["api"]
    if api is not None:
        api = _check_str(api, f"dialogue '{name}' api")
    responses_raw = obj["responses"]
    _require(isinstance(responses_raw, dict), f"dialogue '{name}' responses must be an object")
    _check_keys(responses_raw, {"on_complete", "on_no_match"}, f"dialogue '{name}' responses")
    responses = ResponseTemplates(
        _check_str(responses_raw["on_complete"], f"dialogue '{name}' on_complete"),
        _check_str(responses_raw["on_no_match"], f"dialogue '{name}' on_no_match"),
    )
    return Dialogue(name, utterances, tuple(slots), api, responses)


def _parse_api(obj, index: int) -> ApiDef:
    where = f"api #{index}"
    _require(isinstance(obj, dict), f"{where} must be an object")
    _check_keys(obj, {"name", "args", "routes"}, where)
    name = _check_ident(obj["name"], f"{where} name")
    args = tuple(
        _check_ident(a, f"api '{name}' argument") for a in _check_list(obj["args"], f"api '{name}' args")
    )
    _require(len(set(args)) == len(args), f"api '{name}': duplicate argument names")
    routes_raw = obj["routes"]
    _require(isinstance(routes_raw, dict), f"api '{name}' routes must be an object")
    routes = []
    for status, route_obj in routes_raw.items():
        _require(isinstance(route_obj, dict), f"api '{name}' route '{status}' must be an object")
        keys = set(route_obj)
        _require(
            keys == {"respond"} or keys == {"trigger"},
            f"api '{name}' route '{status}' must have exactly one of 'respond' or 'trigger'",
        )
        if "respond" in route_obj:
            routes.append((status, Route(respond=_check_str(route_obj["respond"], f"api '{name}' respond template"))))
        else:
            routes.append((status, Route(trigger=_check_str(route_obj["trigger"], f"api '{name}' trigger target"))))
    for needed in ("ok", "error"):
        _require(
            any(s == needed for s, _ in routes),
            f"api '{name}': missing route for status '{needed}'",
        )
    return ApiDef(name, args, tuple(routes))


def _validate_cross_references(schema: DialogueSchema) -> None:
    for dialogue in schema.dialogues:
        for slot in dialogue.slots:
            cat = slot.catalog_name
            if cat is not None:
                _require(
                    cat in schema._catalog_map,
                    f"slot '{slot.name}' of dialogue '{dialogue.name}': unknown catalog '{cat}'",
                )
        declared = {s.name for s in dialogue.slots}
        for i, template in enumerate(dialogue.utterance_sets):
            for slot_name in template.slot_names():
                _require(
                    slot_name in declared,
                    f"unresolved slot reference '{slot_name}' in utterance #{i} of dialogue '{dialogue.name}'",
                )
        if dialogue.api is not None:
            _require(
                dialogue.api in schema._api_map,
                f"dialogue '{dialogue.name}': unknown api '{dialogue.api}'",
            )
            api = schema._api_map[dialogue.api]
            required = set(dialogue.required_slot_names())
            _require(
                set(api.args) == required,
                f"dialogue '{dialogue.name}': api '{api.name}' argument names "
                f"{sorted(api.args)} do not match required slot names {sorted(required)}",
            )
    for api in schema.apis:
        for status, route in api.result_routes:
            if route.trigger is not None:
                _require(
                    route.trigger in schema._dialogue_map,
                    f"api '{api.name}': route for status '{status}' triggers unknown dialogue '{route.trigger}'",
                )


def build_schema(
    name: str,
    catalogs: list[Catalog],
    dialogues: list[Dialogue],
    apis: list[ApiDef],
) -> DialogueSchema:
    """Assemble and cross-validate a schema from parsed parts."""
    seen: set[str] = set()
    for c in catalogs:
        _require(c.name not in seen, f"duplicate catalog name '{c.name}'")
        seen.add(c.name)
    seen = set()
    for d in dialogues:
        _require(d.name not in seen, f"duplicate dialogue name '{d.name}'")
        seen.add(d.name)
    seen = set()
    for a in apis:
        _require(a.name not in seen, f"duplicate api name '{a.name}'")
        seen.add(a.name)
    schema = DialogueSchema(
        name=name,
        catalogs=tuple(catalogs),
        dialogues=tuple(dialogues),
        apis=tuple(apis),
        _catalog_map={c.name: c for c in catalogs},
        _dialogue_map={d.name: d for d in dialogues},
        _api_map={a.name: a for a in apis},
    )
    _validate_cross_references(schema)
    return schema


def parse_schema(text: str) -> DialogueSchema:
    """Parse and validate a UTF-8 schema document.

    Raises SchemaSyntaxError (with line/column) for malformed JSON and
    SchemaValidationError (naming the rule and the offending element) for
    documents that parse but break an invariant.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaSyntaxError(
            f"line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    _require(isinstance(doc, dict), "top-level value must be an object")
    _check_keys(doc, {"name", "catalogs", "dialogues", "apis"}, "schema document")
    name = _check_ident(doc["name"], "schema name")
    catalogs = [_parse_catalog(c, i) for i, c in enumerate(_check_list(doc["catalogs"], "catalogs"))]
    dialogues = [_parse_dialogue(d, i) for i, d in enumerate(_check_list(doc["dialogues"], "dialogues"))]
    apis = [_parse_api(a, i) for i, a in enumerate(_check_list(doc["apis"], "apis"))]
    return build_schema(name, catalogs, dialogues, apis)


def to_dict(schema: DialogueSchema) -> dict:
    """Serialize a schema back to the document structure (inverse of parse)."""
    return {
        "name": schema.name,
        "catalogs": [
            {
                "name": c.name,
                "entries": [
                    {"value": e.value, "synonyms": list(e.synonyms)} for e in c.entries
                ],
            }
            for c in schema.catalogs
        ],
        "dialogues": [
            {
                "name": d.name,
                "utterances": [t.source() for t in d.utterance_sets],
                "slots": [
                    {
                        "name": s.name,
                        "kind": s.kind,
                        "required": s.required,
                        "elicit": s.elicit_prompt,
                    }
                    for s in d.slots
                ],
                "api": d.api,
                "responses": {
                    "on_complete": d.responses.on_complete,
                    "on_no_match": d.responses.on_no_match,
                },
            }
            for d in schema.dialogues
        ],
        "apis": [
            {
                "name": a.name,
                "args": list(a.args),
                "routes": {
                    status: (
                        {"respond": r.respond} if r.respond is not None else {"trigger": r.trigger}
                    )
                    for status, r in a.result_routes
                },
            }
            for a in schema.apis
        ],
    }


def serialize(schema: DialogueSchema) -> str:
    return json.dumps(to_dict(schema), indent=2, ensure_ascii=False) + "\n"


def render_template(template: str, values: dict[str, str]) -> str:
    """Substitute {name} markers; unknown names are left as-is."""

    def repl(match: re.Match) -> str:
        return values.get(match.group(1), match.group(0))

    return re.sub(r"\{(\w+)\}", repl, template)
