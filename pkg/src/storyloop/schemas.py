"""Structured-payload parsing with a per-purpose schema registry.

Providers wrap machine-readable payloads in prose, so the parser extracts
the first fenced code block (``` or ```json) and validates it against the
registered schema.  A failed parse names the first missing or ill-typed
field so fail-fast callers can surface a precise diagnostic.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any

_FENCE = re.compile(r"```(?:[a-zA-Z0-9_-]*)\s*\n(.*?)```", re.DOTALL)


class ParseFailure(Exception):
    """Raised when a response is not a valid instance of its schema."""

    def __init__(self, schema_id: str, field_name: str | None, reason: str) -> None:
        self.schema_id = schema_id
        self.field_name = field_name
        self.reason = reason
        at = f" at field '{field_name}'" if field_name else ""
        super().__init__(f"{schema_id}{at}: {reason}")


@dataclass(frozen=True)
class StructuredPayload:
    schema_id: str
    fields: dict[str, Any]


@dataclass(frozen=True)
class Field:
    """One declared field: kind drives validation.

    Kinds: text (non-empty str), string (str, may be empty), int, number,
    bool, text_list, int_list, map (with item_fields), map_list (list of
    maps validated against item_fields), choice (one of options).
    """

    name: str
    kind: str
    required: bool = True
    minimum: int | None = None
    maximum: int | None = None
    options: tuple[str, ...] = ()
    item_fields: tuple["Field", ...] = ()
    default: Any = None


def _check(value: Any, spec: Field, path: str, schema_id: str) -> Any:
    kind = spec.kind
    if kind == "text":
        if not isinstance(value, str) or not value.strip():
            raise ParseFailure(schema_id, path, "expected non-empty text")
        return value
    if kind == "string":
        if not isinstance(value, str):
            raise ParseFailure(schema_id, path, "expected a string")
        return value
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseFailure(schema_id, path, "expected an integer")
        if spec.minimum is not None and value < spec.minimum:
            raise ParseFailure(schema_id, path, f"below minimum {spec.minimum}")
        if spec.maximum is not None and value > spec.maximum:
            raise ParseFailure(schema_id, path, f"above maximum {spec.maximum}")
        return value
    if kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseFailure(schema_id, path, "expected a number")
        return float(value)
    if kind == "bool":
        if not isinstance(value, bool):
            raise ParseFailure(schema_id, path, "expected a boolean")
        return value
    if kind == "choice":
        if not isinstance(value, str) or value not in spec.options:
            raise ParseFailure(schema_id, path, f"expected one of {spec.options}")
        return value
    if kind == "text_list":
        if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
            raise ParseFailure(schema_id, path, "expected a list of strings")
        return list(value)
    if kind == "int_list":
        if not isinstance(value, list) or any(
            isinstance(v, bool) or not isinstance(v, int) for v in value
        ):
            raise ParseFailure(schema_id, path, "expected a list of integers")
        return list(value)
    if kind == "map":
        if not isinstance(value, dict):
            raise ParseFailure(schema_id, path, "expected an object")
        return _check_fields(value, spec.item_fields, schema_id, prefix=f"{path}.")
    if kind == "map_list":
        if not isinstance(value, list):
            raise ParseFailure(schema_id, path, "expected a list of objects")
        out = []
        for i, item in enumerate(value):
            if not isinstance(item, dict):
                raise ParseFailure(schema_id, f"{path}[{i}]", "expected an object")
            out.append(_check_fields(item, spec.item_fields, schema_id, prefix=f"{path}[{i}]."))
        return out
    raise AssertionError(f"unknown field kind {kind!r}")


def _check_fields(
    data: dict[str, Any], specs: tuple[Field, ...], schema_id: str, prefix: str = ""
) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for spec in specs:
        path = f"{prefix}{spec.name}"
        if spec.name not in data or data[spec.name] is None:
            if spec.required:
                raise ParseFailure(schema_id, path, "missing required field")
            out[spec.name] = spec.default
            continue
        out[spec.name] = _check(data[spec.name], spec, path, schema_id)
    return out


_CHARACTER_FIELDS = (
    Field("character_id", "string", required=False, default=""),
    Field("name", "text"),
    Field("role", "choice", options=("protagonist", "supporting")),
    Field("backstory", "text"),
    Field("personality", "text"),
    Field("speech_style", "text"),
    Field("relationship_to_protagonist", "string", required=False, default=""),
    Field("on_screen", "bool", required=False, default=True),
)

_ACT_FIELDS = (
    Field("index", "int", minimum=1),
    Field("goal", "text"),
    Field("turning_point", "text"),
    Field("locations", "text_list", required=False, default=[]),
)

_CRITIC_AXES = (
    "novelty",
    "tension",
    "pacing",
    "cinematic_quality",
    "emotional_resonance",
    "structural_coherence",
)

JUDGE_DIMENSIONS = (
    "relevance",
    "coherence",
    "empathy",
    "surprise",
    "engagement",
    "complexity",
    "character_shaping",
    "satisfaction",
    "perceived_quality",
    "process_helpfulness",
    "reuse_intent",
)

SCHEMAS: dict[str, tuple[Field, ...]] = {
    "stage1": (
        Field("title", "text"),
        Field("premise", "text"),
        Field("theme", "text"),
        Field("emotional_undercurrent", "text"),
        Field("protagonist_objective", "text"),
    ),
    "stage2": (
        Field("world_description", "text"),
        Field("scene_frame", "text"),
        Field("atmosphere", "text"),
        Field("initial_location", "text"),
        Field("locations", "text_list", required=False, default=[]),
    ),
    "stage3": (Field("characters", "map_list", item_fields=_CHARACTER_FIELDS),),
    "stage4": (Field("acts", "map_list", item_fields=_ACT_FIELDS),),
    "critic": (
        Field(
            "scores",
            "map",
            item_fields=tuple(Field(axis, "int", minimum=1, maximum=10) for axis in _CRITIC_AXES),
        ),
        Field("weakest_acts", "int_list", required=False, default=[]),
    ),
    "refiner": (Field("acts", "map_list", item_fields=_ACT_FIELDS),),
    "stage5": (
        Field("opening_prose", "text"),
        Field(
            "first_dialogue",
            "map_list",
            required=False,
            default=[],
            item_fields=(Field("speaker", "text"), Field("line", "text")),
        ),
        Field("choices", "text_list"),
        Field(
            "hidden_elements",
            "map_list",
            required=False,
            default=[],
            item_fields=(
                Field("element_id", "string", required=False, default=""),
                Field("description", "text"),
            ),
        ),
        Field("active_tensions", "text_list", required=False, default=[]),
    ),
    "summary": (
        Field("summary", "text"),
        Field(
            "refinements",
            "map",
            required=False,
            default=None,
            item_fields=(
                Field("current_goal", "string", required=False, default=""),
                Field("open_tensions", "text_list", required=False, default=[]),
                Field("last_turning_point", "string", required=False, default=""),
            ),
        ),
    ),
    "reflection": (
        Field("unresolved_tensions", "text_list"),
        Field("inferred_user_interests", "text_list"),
        Field("advancement_strategy", "text"),
        Field("pacing_assessment", "text"),
        Field(
            "artifact_recommendation",
            "map",
            required=False,
            default=None,
            item_fields=(
                Field("wanted", "bool"),
                Field("concept", "string", required=False, default=""),
            ),
        ),
    ),
    "artifact": (
        Field("description", "text"),
        Field("document", "text"),
    ),
    "judge": tuple(Field(dim, "int", minimum=1, maximum=5) for dim in JUDGE_DIMENSIONS)
    + (Field("rationale", "string", required=False, default=""),),
    "persona_sim": (
        Field("kind", "choice", options=("choice", "message", "end")),
        Field("content", "string", required=False, default=""),
    ),
}

CRITIC_AXES = _CRITIC_AXES


def extract_payload_block(text: str) -> str | None:
    """First fenced block in the response, or the raw text when it looks like JSON."""
    match = _FENCE.search(text)
    if match:
        return match.group(1)
    stripped = text.strip()
    if stripped.startswith("{"):
        return stripped
    return None


def parse_structured(text: str, schema_id: str) -> StructuredPayload:
    """Validate a raw response against a registered schema.

    Pure: same text and schema always produce the same result.
    """
    if schema_id not in SCHEMAS:
        raise KeyError(f"schema not registered: {schema_id!r}")
    block = extract_payload_block(text)
    if block is None:
        raise ParseFailure(schema_id, None, "no machine-readable payload block found")
    try:
        data = json.loads(block)
    except json.JSONDecodeError as exc:
        raise ParseFailure(schema_id, None, f"payload is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseFailure(schema_id, None, "payload must be a JSON object")
    fields = _check_fields(data, SCHEMAS[schema_id], schema_id)
    return StructuredPayload(schema_id=schema_id, fields=fields)
