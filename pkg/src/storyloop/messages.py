"""Conversation messages and the tagged response grammar.

A turn response is a sequence of tagged segments.  Each segment is delimited
by an explicit begin line ``<<tag>>`` (optionally ``<<dialogue speaker=name>>``)
and an end line ``<</tag>>``.  Visible prose lives only in ``narration`` and
``dialogue`` segments; ``scene_update`` carries the machine-readable shift
tags the structure guard reads; ``choices`` lists the displayed branches, one
per line.  Unknown tags are preserved as opaque segments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

AUTHOR_USER = "user"
AUTHOR_NARRATOR = "narrator"
AUTHOR_SYSTEM = "system"

TAG_NARRATION = "narration"
TAG_DIALOGUE = "dialogue"
TAG_CHOICES = "choices"
TAG_SCENE_UPDATE = "scene_update"
TAG_ARTIFACT_REF = "artifact_ref"

KNOWN_TAGS = (TAG_NARRATION, TAG_DIALOGUE, TAG_CHOICES, TAG_SCENE_UPDATE, TAG_ARTIFACT_REF)

_BEGIN = re.compile(r"^<<([a-z_]+)(?:\s+([a-z_]+)=\"?([^\">]*?)\"?)?>>\s*$")
_END = re.compile(r"^<</([a-z_]+)>>\s*$")


def npc_author(character_id: str) -> str:
    return f"npc:{character_id}"


@dataclass(frozen=True)
class Message:
    """One entry in the session transcript."""

    message_id: str
    author: str  # user | narrator | system | npc:<character_id>
    content: str
    choice_taken: str | None = None
    timestamp: float = 0.0

    def __post_init__(self) -> None:
        if self.author == AUTHOR_USER and not (self.content.strip() or self.choice_taken):
            raise ValueError("user message needs free text or a chosen option")

    @property
    def is_system(self) -> bool:
        return self.author == AUTHOR_SYSTEM

    @property
    def is_user(self) -> bool:
        return self.author == AUTHOR_USER

    @property
    def is_npc(self) -> bool:
        return self.author.startswith("npc:")


@dataclass(frozen=True)
class Segment:
    tag: str
    payload: str
    speaker: str = ""


@dataclass(frozen=True)
class SceneTags:
    """Structured shift markers parsed from a scene_update segment."""

    new_location: str | None = None
    reveal: str | None = None
    goal: str | None = None
    act_advance: bool = False


@dataclass(frozen=True)
class TaggedResponse:
    segments: tuple[Segment, ...] = ()

    @property
    def choices(self) -> tuple[str, ...]:
        for seg in self.segments:
            if seg.tag == TAG_CHOICES:
                return parse_choice_lines(seg.payload)
        return ()

    @property
    def scene_tags(self) -> SceneTags:
        for seg in self.segments:
            if seg.tag == TAG_SCENE_UPDATE:
                return parse_scene_update(seg.payload)
        return SceneTags()

    @property
    def visible_text(self) -> str:
        parts = [s.payload for s in self.segments if s.tag in (TAG_NARRATION, TAG_DIALOGUE)]
        return "\n".join(parts)

    def has_visible_prose(self) -> bool:
        return any(
            s.tag in (TAG_NARRATION, TAG_DIALOGUE) and s.payload.strip() for s in self.segments
        )


def parse_tagged(text: str) -> TaggedResponse:
    """Parse tagged segments out of a raw response; tolerant of stray prose.

    Lines outside any segment are dropped (providers wrap responses in
    chatter).  An unterminated segment runs to the next begin line or EOF.
    """
    segments: list[Segment] = []
    tag: str | None = None
    speaker = ""
    buf: list[str] = []

    def close() -> None:
        nonlocal tag, speaker, buf
        if tag is not None:
            segments.append(Segment(tag=tag, payload="\n".join(buf).strip("\n"), speaker=speaker))
        tag, speaker, buf = None, "", []

    for line in text.splitlines():
        begin = _BEGIN.match(line.strip())
        if begin:
            close()
            tag = begin.group(1)
            if begin.group(2) == "speaker" and begin.group(3):
                speaker = begin.group(3)
            continue
        end = _END.match(line.strip())
        if end:
            if tag == end.group(1):
                close()
            continue
        if tag is not None:
            buf.append(line)
    close()
    return TaggedResponse(segments=tuple(segments))


def render_tagged(response: TaggedResponse) -> str:
    """Inverse of parse_tagged, used for script fixtures and replay."""
    lines: list[str] = []
    for seg in response.segments:
        attr = f' speaker="{seg.speaker}"' if seg.speaker else ""
        lines.append(f"<<{seg.tag}{attr}>>")
        if seg.payload:
            lines.append(seg.payload)
        lines.append(f"<</{seg.tag}>>")
    return "\n".join(lines)


def parse_choice_lines(payload: str) -> tuple[str, ...]:
    out = []
    for line in payload.splitlines():
        text = line.strip().lstrip("-*").strip()
        if text:
            out.append(text)
    return tuple(out)


def parse_scene_update(payload: str) -> SceneTags:
    fields: dict[str, str] = {}
    for line in payload.splitlines():
        if ":" not in line:
            continue
        key, _, value = line.partition(":")
        fields[key.strip().casefold()] = value.strip()
    act_raw = fields.get("act_advance", "")
    return SceneTags(
        new_location=fields.get("location") or None,
        reveal=fields.get("reveal") or None,
        goal=fields.get("goal") or None,
        act_advance=act_raw.casefold() in ("true", "yes", "1"),
    )


def scene_update_segment(
    *,
    location: str | None = None,
    reveal: str | None = None,
    goal: str | None = None,
    act_advance: bool = False,
) -> Segment:
    lines = []
    if location:
        lines.append(f"location: {location}")
    if reveal:
        lines.append(f"reveal: {reveal}")
    if goal:
        lines.append(f"goal: {goal}")
    if act_advance:
        lines.append("act_advance: true")
    return Segment(tag=TAG_SCENE_UPDATE, payload="\n".join(lines))


def choices_segment(choices: tuple[str, ...] | list[str]) -> Segment:
    return Segment(tag=TAG_CHOICES, payload="\n".join(choices))
